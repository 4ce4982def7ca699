use dtoqw::cli;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let code = match cli::parse_args(&args) {
        Ok(cfg) => match cli::execute(&cfg) {
            Ok(()) => 0,
            Err(err) => {
                eprintln!("error: {err}");
                err.exit_code()
            }
        },
        Err(err) => {
            eprintln!("error: {err}");
            eprintln!("run with --help for usage");
            err.exit_code()
        }
    };
    std::process::exit(code);
}
