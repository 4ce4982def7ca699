//! Command-line front end: argument parsing, run/sweep execution, CSV and
//! JSON emission, and the `--verify` cross-checks.
//!
//! Usage sketch:
//!
//! ```text
//! dtoqw --graph path:5 --channel adc --gamma 500 --g 0.01 --steps 30 --out run.csv
//! dtoqw --graph star:5 --channel nmd --eta 0.5 --omega 50 \
//!       --sweep p:0.1:0.5:5 --out sweep.csv
//! dtoqw --graph file:mygraph.txt --channel depol --p 0.5 --alpha 1 --format json --verify
//! ```
//!
//! Single runs write one CSV/JSON document to `--out` (stdout when omitted).
//! Sweeps run their grid points concurrently and write one file per grid
//! point plus a JSON index; they require `--out`. Floats in CSV are printed
//! with 17 significant digits so files round-trip exactly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::channels::{verify_completeness, ChannelError, ChannelSpec};
use crate::graph::{Graph, GraphError};
use crate::linalg::numeric_tolerance;
use crate::metrics::{compute_series, MetricSeries, MetricsError};
use crate::oracle::{build_superop, embed};
use crate::walk::{run, RunConfig, WalkError};

pub const USAGE: &str = "\
dtoqw - discrete-time open quantum walk simulator

USAGE:
  dtoqw --graph <SPEC> --channel <adc|nmd|depol> [channel params] [options]

GRAPH SPEC:
  path:<n> | cycle:<n> | star:<n> | complete:<n> | bipartite:<a>,<b> | file:<path>
  Graph files are plain text (first line n, then `u v` lines, # comments)
  or JSON {\"n\": int, \"edges\": [[u,v], ...]}.

CHANNEL PARAMETERS:
  adc:   --gamma <rate> --g <width>     (coins rebuilt from lambda(t) each step)
  nmd:   --p <0..1/2> --eta <x> --omega <x>
  depol: --p <0..1> --alpha <x>

OPTIONS:
  --steps <int>                 number of steps (default 30)
  --dt <real>                   time per step, adc only (default 1.0)
  --start <vertex>              start vertex (default 0)
  --out <path>                  output file (default stdout; required for sweeps)
  --format <csv|json>           output format (default csv)
  --sweep <param>:<min>:<max>:<count>
                                run a grid over one channel parameter
  --verify                      check Kraus completeness and the superoperator
                                oracle along the run; nonzero exit on failure
  --help                        print this text
";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown flag {0:?} (try --help)")]
    UnknownFlag(String),
    #[error("flag {0} given more than once")]
    DuplicateFlag(String),
    #[error("flag {0} expects a value")]
    MissingValue(String),
    #[error("invalid value {value:?} for {flag}: {reason}")]
    InvalidValue {
        flag: &'static str,
        value: String,
        reason: String,
    },
    #[error("missing required flag {0}")]
    MissingRequired(&'static str),
    #[error("malformed graph spec {0:?}: expected family:<n>, bipartite:<a>,<b> or file:<path>")]
    MalformedGraphSpec(String),
    #[error("malformed sweep spec {0:?}: expected <param>:<min>:<max>:<count> with count >= 1")]
    MalformedSweep(String),
    #[error("parameter {param:?} does not belong to channel {channel}")]
    ParameterNotInChannel {
        param: String,
        channel: &'static str,
    },
    #[error("sweeps need --out to name their output files")]
    SweepRequiresOut,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(
        "verification failed: completeness residual {completeness:.3e}, \
         oracle residual {oracle:.3e}, tolerance {tolerance:.1e}"
    )]
    VerificationFailed {
        completeness: f64,
        oracle: f64,
        tolerance: f64,
    },
}

impl CliError {
    /// Process exit code: 2 for usage problems, 3 for failed verification,
    /// 1 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::UnknownFlag(_)
            | CliError::DuplicateFlag(_)
            | CliError::MissingValue(_)
            | CliError::InvalidValue { .. }
            | CliError::MissingRequired(_)
            | CliError::MalformedGraphSpec(_)
            | CliError::MalformedSweep(_)
            | CliError::ParameterNotInChannel { .. }
            | CliError::SweepRequiresOut
            | CliError::Graph(_)
            | CliError::Channel(_) => 2,
            CliError::VerificationFailed { .. } => 3,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Sweep over one channel parameter on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        (0..self.count)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64)
            .collect()
    }
}

/// Fully validated run configuration.
#[derive(Debug, Clone)]
pub struct CliConfig {
    pub graph_spec: String,
    pub graph: Graph,
    pub channel: ChannelSpec,
    pub steps: usize,
    pub dt: f64,
    pub start: usize,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub sweep: Option<SweepSpec>,
    pub verify: bool,
    pub help: bool,
}

#[derive(Debug, Default)]
struct RawArgs {
    graph: Option<String>,
    channel: Option<String>,
    gamma: Option<f64>,
    g: Option<f64>,
    p: Option<f64>,
    eta: Option<f64>,
    omega: Option<f64>,
    alpha: Option<f64>,
    steps: Option<usize>,
    dt: Option<f64>,
    start: Option<usize>,
    out: Option<String>,
    format: Option<String>,
    sweep: Option<String>,
    verify: bool,
    help: bool,
}

fn parse_number<T: std::str::FromStr>(flag: &'static str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| CliError::InvalidValue {
        flag,
        value: value.to_string(),
        reason: e.to_string(),
    })
}

/// Parses raw command-line arguments (program name excluded). Both
/// `--flag value` and `--flag=value` are accepted.
pub fn parse_args(args: &[String]) -> Result<CliConfig, CliError> {
    let mut raw = RawArgs::default();
    let mut seen: Vec<&str> = Vec::new();
    let mut iter = args.iter().peekable();
    while let Some(arg) = iter.next() {
        let (flag, inline_value) = match arg.split_once('=') {
            Some((f, v)) => (f, Some(v.to_string())),
            None => (arg.as_str(), None),
        };
        const VALUE_FLAGS: [&str; 14] = [
            "--graph", "--channel", "--gamma", "--g", "--p", "--eta", "--omega", "--alpha",
            "--steps", "--dt", "--start", "--out", "--format", "--sweep",
        ];
        if let Some(&known) = VALUE_FLAGS.iter().find(|&&f| f == flag) {
            if seen.contains(&known) {
                return Err(CliError::DuplicateFlag(known.to_string()));
            }
            seen.push(known);
        }
        let mut take_value = || -> Result<String, CliError> {
            if let Some(v) = &inline_value {
                return Ok(v.clone());
            }
            iter.next()
                .map(|s| s.to_string())
                .ok_or_else(|| CliError::MissingValue(flag.to_string()))
        };
        match flag {
            "--graph" => raw.graph = Some(take_value()?),
            "--channel" => raw.channel = Some(take_value()?),
            "--gamma" => raw.gamma = Some(parse_number("--gamma", &take_value()?)?),
            "--g" => raw.g = Some(parse_number("--g", &take_value()?)?),
            "--p" => raw.p = Some(parse_number("--p", &take_value()?)?),
            "--eta" => raw.eta = Some(parse_number("--eta", &take_value()?)?),
            "--omega" => raw.omega = Some(parse_number("--omega", &take_value()?)?),
            "--alpha" => raw.alpha = Some(parse_number("--alpha", &take_value()?)?),
            "--steps" => raw.steps = Some(parse_number("--steps", &take_value()?)?),
            "--dt" => raw.dt = Some(parse_number("--dt", &take_value()?)?),
            "--start" => raw.start = Some(parse_number("--start", &take_value()?)?),
            "--out" => raw.out = Some(take_value()?),
            "--format" => raw.format = Some(take_value()?),
            "--sweep" => raw.sweep = Some(take_value()?),
            "--verify" => raw.verify = true,
            "--help" | "-h" => raw.help = true,
            other => return Err(CliError::UnknownFlag(other.to_string())),
        }
    }

    if raw.help {
        // Leave a minimal placeholder config; `execute` prints usage.
        return Ok(CliConfig {
            graph_spec: String::new(),
            graph: Graph::path(1).expect("single vertex"),
            channel: ChannelSpec::Depolarizing { p: 0.0, alpha: 0.0 },
            steps: 0,
            dt: 1.0,
            start: 0,
            out: None,
            format: OutputFormat::Csv,
            sweep: None,
            verify: false,
            help: true,
        });
    }

    let graph_spec = raw
        .graph
        .clone()
        .ok_or(CliError::MissingRequired("--graph"))?;
    let graph = parse_graph_spec(&graph_spec)?;

    let format = match raw.format.as_deref() {
        None | Some("csv") => OutputFormat::Csv,
        Some("json") => OutputFormat::Json,
        Some(other) => {
            return Err(CliError::InvalidValue {
                flag: "--format",
                value: other.to_string(),
                reason: "expected csv or json".into(),
            })
        }
    };

    let sweep = raw.sweep.as_deref().map(parse_sweep_spec).transpose()?;

    let channel_kind = raw
        .channel
        .clone()
        .ok_or(CliError::MissingRequired("--channel"))?;
    let channel = build_channel(&channel_kind, &raw, sweep.as_ref())?;
    channel.validate()?;

    let start = raw.start.unwrap_or(0);
    if start >= graph.vertex_count() {
        return Err(CliError::InvalidValue {
            flag: "--start",
            value: start.to_string(),
            reason: format!("graph has {} vertices", graph.vertex_count()),
        });
    }

    if sweep.is_some() && raw.out.is_none() {
        return Err(CliError::SweepRequiresOut);
    }

    // Every grid point must produce a valid channel before any run starts.
    if let Some(sweep_spec) = &sweep {
        for value in sweep_spec.values() {
            substitute_parameter(&channel, &sweep_spec.parameter, value)?.validate()?;
        }
    }

    Ok(CliConfig {
        graph_spec,
        graph,
        channel,
        steps: raw.steps.unwrap_or(30),
        dt: raw.dt.unwrap_or(1.0),
        start,
        out: raw.out.map(PathBuf::from),
        format,
        sweep,
        verify: raw.verify,
        help: false,
    })
}

fn parse_graph_spec(spec: &str) -> Result<Graph, CliError> {
    let (family, rest) = spec
        .split_once(':')
        .ok_or_else(|| CliError::MalformedGraphSpec(spec.to_string()))?;
    let parse_n = |s: &str| -> Result<usize, CliError> {
        s.parse()
            .map_err(|_| CliError::MalformedGraphSpec(spec.to_string()))
    };
    match family {
        "path" => Ok(Graph::path(parse_n(rest)?)?),
        "cycle" => Ok(Graph::cycle(parse_n(rest)?)?),
        "star" => Ok(Graph::star(parse_n(rest)?)?),
        "complete" => Ok(Graph::complete(parse_n(rest)?)?),
        "bipartite" => {
            let (a, b) = rest
                .split_once(',')
                .ok_or_else(|| CliError::MalformedGraphSpec(spec.to_string()))?;
            Ok(Graph::complete_bipartite(parse_n(a)?, parse_n(b)?)?)
        }
        "file" => {
            let path = PathBuf::from(rest);
            let contents = std::fs::read_to_string(&path)
                .map_err(|source| CliError::Io { path, source })?;
            Ok(Graph::from_file_contents(&contents)?)
        }
        _ => Err(CliError::MalformedGraphSpec(spec.to_string())),
    }
}

fn parse_sweep_spec(spec: &str) -> Result<SweepSpec, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [param, min, max, count] = parts.as_slice() else {
        return Err(CliError::MalformedSweep(spec.to_string()));
    };
    let min: f64 = min
        .parse()
        .map_err(|_| CliError::MalformedSweep(spec.to_string()))?;
    let max: f64 = max
        .parse()
        .map_err(|_| CliError::MalformedSweep(spec.to_string()))?;
    let count: usize = count
        .parse()
        .map_err(|_| CliError::MalformedSweep(spec.to_string()))?;
    if count == 0 {
        return Err(CliError::MalformedSweep(spec.to_string()));
    }
    Ok(SweepSpec {
        parameter: param.to_string(),
        min,
        max,
        count,
    })
}

/// Assembles a [`ChannelSpec`] from the channel kind and whatever parameters
/// were supplied. Parameters foreign to the chosen channel are rejected, and
/// a swept parameter may omit its base value (the sweep minimum stands in).
fn build_channel(
    kind: &str,
    raw: &RawArgs,
    sweep: Option<&SweepSpec>,
) -> Result<ChannelSpec, CliError> {
    let channel_name: &'static str = match kind {
        "adc" => "adc",
        "nmd" => "nmd",
        "depol" => "depol",
        other => {
            return Err(CliError::InvalidValue {
                flag: "--channel",
                value: other.to_string(),
                reason: "expected adc, nmd or depol".into(),
            })
        }
    };
    let owned_params: [(&'static str, Option<f64>); 6] = [
        ("gamma", raw.gamma),
        ("g", raw.g),
        ("p", raw.p),
        ("eta", raw.eta),
        ("omega", raw.omega),
        ("alpha", raw.alpha),
    ];
    let allowed: &[&str] = match channel_name {
        "adc" => &["gamma", "g"],
        "nmd" => &["p", "eta", "omega"],
        _ => &["p", "alpha"],
    };
    for (name, value) in owned_params {
        if value.is_some() && !allowed.contains(&name) {
            return Err(CliError::ParameterNotInChannel {
                param: name.to_string(),
                channel: channel_name,
            });
        }
    }
    if let Some(sweep) = sweep {
        if !allowed.contains(&sweep.parameter.as_str()) {
            return Err(CliError::ParameterNotInChannel {
                param: sweep.parameter.clone(),
                channel: channel_name,
            });
        }
    }

    let fetch = |name: &'static str, given: Option<f64>| -> Result<f64, CliError> {
        if let Some(v) = given {
            return Ok(v);
        }
        if let Some(sweep) = sweep {
            if sweep.parameter == name {
                return Ok(sweep.min);
            }
        }
        Err(CliError::MissingRequired(match name {
            "gamma" => "--gamma",
            "g" => "--g",
            "p" => "--p",
            "eta" => "--eta",
            "omega" => "--omega",
            _ => "--alpha",
        }))
    };

    Ok(match channel_name {
        "adc" => ChannelSpec::AmplitudeDamping {
            gamma: fetch("gamma", raw.gamma)?,
            g: fetch("g", raw.g)?,
        },
        "nmd" => ChannelSpec::Dephasing {
            p: fetch("p", raw.p)?,
            eta: fetch("eta", raw.eta)?,
            omega: fetch("omega", raw.omega)?,
        },
        _ => ChannelSpec::Depolarizing {
            p: fetch("p", raw.p)?,
            alpha: fetch("alpha", raw.alpha)?,
        },
    })
}

/// Returns a copy of `channel` with the named parameter replaced.
pub fn substitute_parameter(
    channel: &ChannelSpec,
    parameter: &str,
    value: f64,
) -> Result<ChannelSpec, CliError> {
    let mut out = channel.clone();
    let channel_name = match channel {
        ChannelSpec::AmplitudeDamping { .. } => "adc",
        ChannelSpec::Dephasing { .. } => "nmd",
        ChannelSpec::Depolarizing { .. } => "depol",
    };
    match (&mut out, parameter) {
        (ChannelSpec::AmplitudeDamping { gamma, .. }, "gamma") => *gamma = value,
        (ChannelSpec::AmplitudeDamping { g, .. }, "g") => *g = value,
        (ChannelSpec::Dephasing { p, .. }, "p") => *p = value,
        (ChannelSpec::Dephasing { eta, .. }, "eta") => *eta = value,
        (ChannelSpec::Dephasing { omega, .. }, "omega") => *omega = value,
        (ChannelSpec::Depolarizing { p, .. }, "p") => *p = value,
        (ChannelSpec::Depolarizing { alpha, .. }, "alpha") => *alpha = value,
        _ => {
            return Err(CliError::ParameterNotInChannel {
                param: parameter.to_string(),
                channel: channel_name,
            })
        }
    }
    Ok(out)
}

/// Residuals gathered by `--verify`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VerifyReport {
    /// Worst per-vertex and global Kraus completeness residual over the run.
    pub completeness_residual: f64,
    /// Worst deviation between the blockwise step and the full superoperator
    /// application; absent for zero-step runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_residual: Option<f64>,
}

impl VerifyReport {
    pub fn passed(&self, tolerance: f64) -> bool {
        self.completeness_residual <= tolerance
            && self.oracle_residual.is_none_or(|r| r <= tolerance)
    }
}

/// Result of one executed run.
pub struct RunOutput {
    pub channel: ChannelSpec,
    pub series: MetricSeries,
    pub verify: Option<VerifyReport>,
}

fn execute_single(
    cfg: &CliConfig,
    channel: &ChannelSpec,
) -> Result<RunOutput, CliError> {
    let run_cfg = RunConfig {
        graph: cfg.graph.clone(),
        channel: channel.clone(),
        steps: cfg.steps,
        dt: cfg.dt,
        start_vertex: cfg.start,
    };
    let snapshots = run(&run_cfg)?;
    let series = compute_series(&snapshots)?;
    let verify = if cfg.verify {
        Some(verify_run(&run_cfg, &snapshots)?)
    } else {
        None
    };
    Ok(RunOutput {
        channel: channel.clone(),
        series,
        verify,
    })
}

/// Re-derives every coin set of the run and checks per-vertex completeness,
/// global superoperator completeness, and blockwise-vs-superoperator
/// agreement on the actual snapshots.
pub fn verify_run(
    cfg: &RunConfig,
    snapshots: &[crate::walk::WalkerState],
) -> Result<VerifyReport, CliError> {
    let wg = cfg.graph.to_walk_graph();
    let mut completeness = 0.0f64;
    let mut oracle: Option<f64> = None;
    let coin_times = if cfg.steps == 0 {
        // Nothing was applied; still vet the first coin set that would be.
        vec![cfg.dt]
    } else {
        (1..=cfg.steps).map(|k| k as f64 * cfg.dt).collect()
    };
    for (idx, &t) in coin_times.iter().enumerate() {
        let coins = cfg.channel.build_coins(&wg, t)?;
        completeness = completeness.max(verify_completeness(&coins));
        let superop = build_superop(&wg, &coins).expect("dimensions agree by construction");
        completeness = completeness.max(superop.completeness_residual());
        if cfg.steps > 0 {
            let before = embed(&snapshots[idx]);
            let after = superop
                .apply(&before)
                .expect("embedded state has superoperator dimension");
            let residual = after.sub(&embed(&snapshots[idx + 1])).max_abs();
            oracle = Some(oracle.unwrap_or(0.0).max(residual));
        }
        if !cfg.channel.is_time_dependent() {
            if cfg.steps > 0 && idx == 0 {
                // Static coins: completeness checked once, but keep walking
                // the snapshots for the oracle residual.
                for k in 1..cfg.steps {
                    let before = embed(&snapshots[k]);
                    let after = superop.apply(&before).expect("dimension");
                    let residual = after.sub(&embed(&snapshots[k + 1])).max_abs();
                    oracle = Some(oracle.unwrap_or(0.0).max(residual));
                }
            }
            break;
        }
    }
    Ok(VerifyReport {
        completeness_residual: completeness,
        oracle_residual: oracle,
    })
}

/// 17 significant digits, enough for exact f64 round-trips.
fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders the CSV document: header `step,p_v0,...,coherence,fidelity`, one
/// row per snapshot.
pub fn render_csv(series: &MetricSeries) -> String {
    let n = series.probabilities.first().map_or(0, Vec::len);
    let mut out = String::new();
    out.push_str("step");
    for v in 0..n {
        let _ = write!(out, ",p_v{v}");
    }
    out.push_str(",coherence,fidelity\n");
    for (k, row) in series.probabilities.iter().enumerate() {
        let _ = write!(out, "{k}");
        for p in row {
            let _ = write!(out, ",{}", fmt_float(*p));
        }
        let _ = writeln!(
            out,
            ",{},{}",
            fmt_float(series.coherence[k]),
            fmt_float(series.fidelity[k])
        );
    }
    out
}

#[derive(Serialize)]
struct ConfigEcho<'a> {
    graph: &'a str,
    #[serde(flatten)]
    channel: &'a ChannelSpec,
    steps: usize,
    dt: f64,
    start: usize,
}

#[derive(Serialize)]
struct SeriesJson<'a> {
    probabilities: &'a [Vec<f64>],
    coherence: &'a [f64],
    fidelity: &'a [f64],
}

#[derive(Serialize)]
struct DocumentJson<'a> {
    config: ConfigEcho<'a>,
    series: SeriesJson<'a>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verify: Option<VerifyReport>,
}

/// Renders the JSON document mirroring the CSV series.
pub fn render_json(cfg: &CliConfig, output: &RunOutput) -> String {
    let doc = DocumentJson {
        config: ConfigEcho {
            graph: &cfg.graph_spec,
            channel: &output.channel,
            steps: cfg.steps,
            dt: cfg.dt,
            start: cfg.start,
        },
        series: SeriesJson {
            probabilities: &output.series.probabilities,
            coherence: &output.series.coherence,
            fidelity: &output.series.fidelity,
        },
        verify: output.verify,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("output document serializes");
    text.push('\n');
    text
}

fn render(cfg: &CliConfig, output: &RunOutput) -> String {
    match cfg.format {
        OutputFormat::Csv => render_csv(&output.series),
        OutputFormat::Json => render_json(cfg, output),
    }
}

fn write_output(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match path {
        Some(path) => std::fs::write(path, contents).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

/// Splits `base` into its stem and extension-bearing parent for sweep file
/// naming: `dir/name.csv` becomes `dir/name_<i>.csv` plus `dir/name_index.json`.
fn sweep_paths(base: &Path, count: usize, extension: &str) -> (Vec<PathBuf>, PathBuf) {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sweep".to_string());
    let parent = base.parent().map(Path::to_path_buf).unwrap_or_default();
    let files = (0..count)
        .map(|i| parent.join(format!("{stem}_{i:03}.{extension}")))
        .collect();
    let index = parent.join(format!("{stem}_index.json"));
    (files, index)
}

#[derive(Serialize)]
struct SweepIndex<'a> {
    parameter: &'a str,
    values: &'a [f64],
    files: Vec<String>,
}

/// Executes the parsed configuration: a single run or a sweep. Returns the
/// verification error if `--verify` found a residual above tolerance.
pub fn execute(cfg: &CliConfig) -> Result<(), CliError> {
    if cfg.help {
        print!("{USAGE}");
        return Ok(());
    }
    let tolerance = numeric_tolerance();
    match &cfg.sweep {
        None => {
            let output = execute_single(cfg, &cfg.channel)?;
            write_output(cfg.out.as_deref(), &render(cfg, &output))?;
            finish_verification(&[output], tolerance)
        }
        Some(sweep) => {
            let base = cfg.out.as_deref().ok_or(CliError::SweepRequiresOut)?;
            let values = sweep.values();
            let channels: Vec<ChannelSpec> = values
                .iter()
                .map(|&v| substitute_parameter(&cfg.channel, &sweep.parameter, v))
                .collect::<Result<_, _>>()?;

            // Grid points are independent; run them on scoped threads and
            // write the files in grid order afterwards.
            let outputs: Vec<Result<RunOutput, CliError>> = std::thread::scope(|scope| {
                let handles: Vec<_> = channels
                    .iter()
                    .map(|channel| scope.spawn(move || execute_single(cfg, channel)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("run thread panicked"))
                    .collect()
            });
            let outputs: Vec<RunOutput> =
                outputs.into_iter().collect::<Result<_, CliError>>()?;

            let (files, index_path) = sweep_paths(base, values.len(), cfg.format.extension());
            for (path, output) in files.iter().zip(&outputs) {
                let sub_cfg = CliConfig {
                    channel: output.channel.clone(),
                    ..cfg.clone()
                };
                write_output(Some(path), &render(&sub_cfg, output))?;
            }
            let index = SweepIndex {
                parameter: &sweep.parameter,
                values: &values,
                files: files
                    .iter()
                    .map(|p| p.to_string_lossy().into_owned())
                    .collect(),
            };
            let mut index_text =
                serde_json::to_string_pretty(&index).expect("index serializes");
            index_text.push('\n');
            write_output(Some(&index_path), &index_text)?;
            finish_verification(&outputs, tolerance)
        }
    }
}

/// Reports verification outcomes to stderr and fails on the worst offender.
fn finish_verification(outputs: &[RunOutput], tolerance: f64) -> Result<(), CliError> {
    let mut failure: Option<(f64, f64)> = None;
    for output in outputs {
        if let Some(report) = &output.verify {
            eprintln!(
                "verify: completeness_residual={:.3e} oracle_residual={} (tolerance {:.1e})",
                report.completeness_residual,
                report
                    .oracle_residual
                    .map_or_else(|| "n/a".to_string(), |r| format!("{r:.3e}")),
                tolerance
            );
            if !report.passed(tolerance) {
                failure = Some((
                    report.completeness_residual,
                    report.oracle_residual.unwrap_or(0.0),
                ));
            }
        }
    }
    match failure {
        Some((completeness, oracle)) => Err(CliError::VerificationFailed {
            completeness,
            oracle,
            tolerance,
        }),
        None => Ok(()),
    }
}
