//! Command-line front end.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::distcore::Side;
use crate::error::{Error, Result};
use crate::mc::{
    exact_tails, run_audit, run_tail_experiment_cl, verify_domination, Outcome, TailGrid, TailRow, Verdict, CSV_HEADER,
    DEFAULT_CL,
};
use crate::oracle::{enumerate_coupling, enumerate_law};
use crate::processes::ProcessConfig;
use crate::sizebias::CharFn;

pub const SEED_ENV: &str = "SIZEBIAS_LAB_SEED";
pub const DEFAULT_GRID: &str = "0:6:0.1";
pub const DEFAULT_SAMPLES: u64 = 100_000;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Bounds,
    Simulate,
    VerifyCoupling,
    Oracle,
    Report,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// A fully resolved invocation. Also the shape of a `--config` file, where
/// every field is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub command: Command,
    pub process: Option<ProcessConfig>,
    #[serde(with = "grid_string")]
    pub t_grid: TailGrid,
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
    pub cl: f64,
    pub coupling: bool,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub timestamp: bool,
    pub inputs: Vec<PathBuf>,
}

mod grid_string {
    use super::TailGrid;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(g: &TailGrid, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(g)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<TailGrid, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialSpec {
    command: Option<Command>,
    process: Option<Value>,
    t_grid: Option<String>,
    samples: Option<u64>,
    seed: Option<u64>,
    workers: Option<usize>,
    cl: Option<f64>,
    coupling: Option<bool>,
    output: Option<PathBuf>,
    format: Option<Format>,
    timestamp: Option<bool>,
    #[serde(default)]
    inputs: Vec<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(
    name = "sizebias-lab",
    version,
    about = "Size-bias couplings, concentration bounds and their verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Tabulate the analytic tail bounds.
    Bounds(CommonArgs),
    /// Estimate tails by simulation and check them against the bounds.
    Simulate(CommonArgs),
    /// Audit the size-bias coupling by simulation.
    VerifyCoupling(CommonArgs),
    /// Exact law by enumeration, with exact tails checked against the bounds.
    Oracle(CommonArgs),
    /// Merge earlier CSV or JSON outputs into a summary by process and side.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct ProcessArgs {
    /// perm, runs, extrema, urn, lightbulb, graph, coverage, cpoisson or poisson
    #[arg(long)]
    process: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    /// Pattern as a comma separated permutation of 1..m.
    #[arg(long, value_delimiter = ',')]
    tau: Option<Vec<usize>>,
    #[arg(long)]
    dim: Option<u32>,
    #[arg(long)]
    assume_monotone: bool,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    d: Option<u32>,
    #[arg(long)]
    kappa_d: Option<u32>,
    /// volume or nonisolated
    #[arg(long)]
    statistic: Option<String>,
    #[arg(long)]
    points_per_unit: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Gamma claim shape.
    #[arg(long)]
    alpha: Option<f64>,
    /// Gamma claim scale.
    #[arg(long)]
    beta: Option<f64>,
    /// Claim law as JSON, e.g. '{"atoms":[1,2],"probs":[0.5,0.5]}'.
    #[arg(long)]
    claims_pmf: Option<String>,
    /// The constant M > 1 fixing gamma = 1 / (M max Z).
    #[arg(long)]
    big_m: Option<f64>,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON file with default settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Grid of t as start:stop:step.
    #[arg(long = "t")]
    t_grid: Option<String>,
    #[arg(long, alias = "N")]
    samples: Option<u64>,
    /// Defaults to $SIZEBIAS_LAB_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, 0 for all cores. Results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Confidence level of the one-sided bounds.
    #[arg(long)]
    cl: Option<f64>,
    /// Also enumerate the joint coupling law (oracle).
    #[arg(long)]
    coupling: bool,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
    #[arg(long = "out", value_enum)]
    format: Option<Format>,
    /// Omit the timestamp line from CSV output.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Debug, Args)]
struct CommonArgs {
    #[command(flatten)]
    process: ProcessArgs,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Files written by simulate or oracle.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
    #[arg(long = "out", value_enum)]
    format: Option<Format>,
    #[arg(long)]
    no_timestamp: bool,
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn parse_and_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let spec = match resolve(cli.command) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    match dispatch(&spec) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    }
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|e| Error::Parse(format!("{SEED_ENV}={s:?}: {e}"))),
        Err(_) => Ok(None),
    }
}

fn read_partial(path: &Path) -> Result<PartialSpec> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Layers process flags over the `process` object of a config file.
fn process_config(file: Option<Value>, a: &ProcessArgs) -> Result<Option<ProcessConfig>> {
    let mut obj = match file {
        Some(Value::Object(m)) => m,
        Some(other) => return Err(Error::Parse(format!("process must be a JSON object, got {other}"))),
        None => Map::new(),
    };
    if let Some(name) = &a.process {
        if obj.get("process").and_then(Value::as_str) != Some(name.as_str()) {
            obj.clear();
        }
        obj.insert("process".into(), json!(name));
    }
    let mut set = |k: &str, v: Option<Value>| {
        if let Some(v) = v {
            obj.insert(k.into(), v);
        }
    };
    set("n", a.n.map(|v| json!(v)));
    set("m", a.m.map(|v| json!(v)));
    set("p", a.p.map(|v| json!(v)));
    set("tau", a.tau.as_ref().map(|v| json!(v)));
    set("dim", a.dim.map(|v| json!(v)));
    set("assume_monotone", a.assume_monotone.then_some(json!(true)));
    set("rho", a.rho.map(|v| json!(v)));
    set("d", a.d.map(|v| json!(v)));
    set("kappa_d", a.kappa_d.map(|v| json!(v)));
    set("statistic", a.statistic.as_ref().map(|v| json!(v)));
    set("points_per_unit", a.points_per_unit.map(|v| json!(v)));
    set("lambda", a.lambda.map(|v| json!(v)));
    set("M", a.big_m.map(|v| json!(v)));
    if a.alpha.is_some() || a.beta.is_some() {
        let (alpha, beta) = a
            .alpha
            .zip(a.beta)
            .ok_or_else(|| Error::InvalidArgument("gamma claims need both --alpha and --beta".into()))?;
        set("claims", Some(json!({ "gamma": { "alpha": alpha, "beta": beta } })));
    }
    if let Some(text) = &a.claims_pmf {
        let pmf: Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("--claims-pmf: {e}")))?;
        set("claims", Some(json!({ "pmf": pmf })));
    }
    if obj.is_empty() {
        return Ok(None);
    }
    match obj.get("process").and_then(Value::as_str) {
        Some(name) if ProcessConfig::NAMES.contains(&name) => {}
        Some(name) => {
            return Err(Error::InvalidConfig(format!(
                "unknown process {name:?}; expected one of {}",
                ProcessConfig::NAMES.join(", ")
            )))
        }
        None => return Err(Error::InvalidConfig("no process named".into())),
    }
    serde_json::from_value(Value::Object(obj))
        .map(Some)
        .map_err(|e| Error::InvalidConfig(e.to_string()))
}

fn resolve(cmd: Cmd) -> Result<RunSpec> {
    let (command, args) = match cmd {
        Cmd::Bounds(a) => (Command::Bounds, a),
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::VerifyCoupling(a) => (Command::VerifyCoupling, a),
        Cmd::Oracle(a) => (Command::Oracle, a),
        Cmd::Report(r) => {
            return Ok(RunSpec {
                command: Command::Report,
                process: None,
                t_grid: DEFAULT_GRID.parse()?,
                samples: 0,
                seed: 0,
                workers: 0,
                cl: DEFAULT_CL,
                coupling: false,
                output: r.output,
                format: r.format.unwrap_or_default(),
                timestamp: !r.no_timestamp,
                inputs: r.inputs,
            })
        }
    };
    let r = args.run;
    let file = match &r.config {
        Some(p) => read_partial(p)?,
        None => PartialSpec::default(),
    };
    if let Some(c) = file.command {
        if c != command {
            return Err(Error::InvalidArgument(format!(
                "config file is for {c:?} but the command is {command:?}"
            )));
        }
    }
    let process = process_config(file.process, &args.process)?
        .ok_or_else(|| Error::InvalidConfig("no process given (use --process or a config file)".into()))?;
    let grid = r.t_grid.or(file.t_grid).unwrap_or_else(|| DEFAULT_GRID.into());
    let seed = match r.seed.or(file.seed) {
        Some(s) => s,
        None => env_seed()?.unwrap_or(0),
    };
    Ok(RunSpec {
        command,
        process: Some(process),
        t_grid: grid.parse()?,
        samples: r.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES),
        seed,
        workers: r.workers.or(file.workers).unwrap_or(0),
        cl: r.cl.or(file.cl).unwrap_or(DEFAULT_CL),
        coupling: r.coupling || file.coupling.unwrap_or(false),
        output: r.output.or(file.output),
        format: r.format.or(file.format).unwrap_or_default(),
        timestamp: !r.no_timestamp && file.timestamp.unwrap_or(true),
        inputs: file.inputs,
    })
}

/// Runs a resolved spec. `Ok(false)` means a check failed; the report was
/// still written.
pub fn dispatch(spec: &RunSpec) -> Result<bool> {
    let process = || {
        spec.process
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("no process given".into()))
    };
    match spec.command {
        Command::Bounds => cmd_bounds(spec, process()?),
        Command::Simulate => cmd_simulate(spec, process()?),
        Command::VerifyCoupling => cmd_verify(spec, process()?),
        Command::Oracle => cmd_oracle(spec, process()?),
        Command::Report => cmd_report(spec),
    }
}

fn emit(spec: &RunSpec, body: &str) -> Result<()> {
    let mut text = String::new();
    if spec.format == Format::Csv && spec.timestamp {
        let now = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
        let _ = writeln!(text, "# generated {now} by sizebias-lab {}", env!("CARGO_PKG_VERSION"));
    }
    text.push_str(body);
    match &spec.output {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn json_body(v: &impl Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Settings that shape the results. Worker count, destination and the
/// timestamp flag are left out so outputs are identical across them.
fn spec_value(spec: &RunSpec) -> Result<Value> {
    let mut v = serde_json::to_value(spec)?;
    if let Value::Object(m) = &mut v {
        for k in ["workers", "output", "timestamp"] {
            m.remove(k);
        }
    }
    Ok(v)
}

fn spec_line(spec: &RunSpec) -> Result<String> {
    Ok(format!("# run {}\n", spec_value(spec)?))
}

fn cmd_bounds(spec: &RunSpec, cfg: &ProcessConfig) -> Result<bool> {
    let info = cfg.info()?;
    let bound = info
        .bound
        .as_ref()
        .ok_or_else(|| Error::Unsupported(format!("{} has zero variance here, so no bound applies", cfg.name())))?;
    let curve = bound.curve(&spec.t_grid.points())?;
    let body = match spec.format {
        Format::Csv => spec_line(spec)? + &curve.to_csv(),
        Format::Json => json_body(&json!({ "run": spec_value(spec)?, "info": info, "curve": curve }))?,
    };
    emit(spec, &body)?;
    Ok(true)
}

fn verdict_body(spec: &RunSpec, verdict: &Verdict, extra: Value) -> Result<String> {
    Ok(match spec.format {
        Format::Csv => spec_line(spec)? + &verdict.to_csv(),
        Format::Json => {
            let mut v = json!({ "run": spec_value(spec)?, "verdict": verdict });
            if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
                m.extend(e);
            }
            json_body(&v)?
        }
    })
}

fn cmd_simulate(spec: &RunSpec, cfg: &ProcessConfig) -> Result<bool> {
    let info = cfg.info()?;
    let grid = spec.t_grid.points();
    let tail = run_tail_experiment_cl(cfg, &grid, spec.samples, spec.seed, spec.workers, spec.cl)?;
    let verdict = match &info.bound {
        Some(b) => verify_domination(&tail, &b.curve(&grid)?)?,
        None => {
            // sigma = 0: report the raw tails with nothing to check
            let rows = tail
                .sides
                .iter()
                .flat_map(|s| {
                    (0..grid.len()).map(|i| TailRow {
                        process: tail.process.clone(),
                        side: s.side,
                        t: grid[i],
                        n: Some(tail.n),
                        estimate: s.estimate[i],
                        ci_low: s.ci_low[i],
                        ci_high: s.ci_high[i],
                        bound: None,
                        verdict: Outcome::Na,
                    })
                })
                .collect();
            Verdict {
                process: tail.process.clone(),
                rows,
                failures: 0,
                passed: true,
            }
        }
    };
    emit(spec, &verdict_body(spec, &verdict, json!({ "tail": tail }))?)?;
    Ok(verdict.passed)
}

fn cmd_verify(spec: &RunSpec, cfg: &ProcessConfig) -> Result<bool> {
    let audit = run_audit(cfg, spec.samples, spec.seed, spec.workers, &CharFn::DEFAULTS)?;
    let body = match spec.format {
        Format::Json => json_body(&json!({ "run": spec_value(spec)?, "audit": audit }))?,
        Format::Csv => {
            let mut s = spec_line(spec)?;
            let _ = writeln!(
                s,
                "# samples {} max_diff {} min_diff {} bound_violations {} monotone_violations {} passed {}",
                audit.n_samples,
                audit.max_diff,
                audit.min_diff,
                audit.bound_violations,
                audit.monotone_violations,
                audit.passed
            );
            s.push_str("f,lhs,rhs,residual,std_error,within_tolerance\n");
            for r in &audit.char_residuals {
                let _ = writeln!(
                    s,
                    "{},{:.12e},{:.12e},{:.12e},{:.12e},{}",
                    r.f.name(),
                    r.lhs,
                    r.rhs,
                    r.residual,
                    r.std_error,
                    r.within_tolerance
                );
            }
            s
        }
    };
    emit(spec, &body)?;
    Ok(audit.passed)
}

fn cmd_oracle(spec: &RunSpec, cfg: &ProcessConfig) -> Result<bool> {
    let info = cfg.info()?;
    let law = enumerate_law(cfg)?;
    let moments = law.moments();
    let mut ok = true;
    let mut extra = json!({
        "info": info,
        "law": law,
        "enumerated_mean": moments.mean,
        "enumerated_variance": moments.variance,
    });
    if law.mean() > 0.0 {
        extra["size_biased"] = json!(law.size_bias()?);
    }
    if spec.coupling {
        let joint = enumerate_coupling(cfg)?;
        let tv_y = joint.marginal_y()?.tv_distance(&law);
        let tv_ys = joint.marginal_ys()?.tv_distance(&law.size_bias()?);
        ok &= tv_y <= 1e-12 && tv_ys <= 1e-12;
        extra["joint"] = json!(joint);
        extra["tv_y"] = json!(tv_y);
        extra["tv_ys"] = json!(tv_ys);
    }
    let verdict = match &info.bound {
        Some(b) => {
            let grid = spec.t_grid.points();
            let tail = exact_tails(cfg.name(), &law, info.mu, info.sigma(), &grid)?;
            verify_domination(&tail, &b.curve(&grid)?)?
        }
        None => Verdict {
            process: cfg.name().to_string(),
            rows: Vec::new(),
            failures: 0,
            passed: true,
        },
    };
    ok &= verdict.passed;
    emit(spec, &verdict_body(spec, &verdict, extra)?)?;
    Ok(ok)
}

/// Totals for one `(process, side)` key.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub process: String,
    pub side: String,
    pub points: usize,
    pub checked: usize,
    pub failures: usize,
    /// Largest ratio of the checked statistic to the bound.
    pub max_ratio: Option<f64>,
}

fn parse_csv_rows(text: &str, path: &Path) -> Result<Vec<TailRow>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let bad = |msg: String| Error::Parse(format!("{}: {msg}", path.display()));
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        other => return Err(bad(format!("expected header {CSV_HEADER:?}, found {other:?}"))),
    }
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 9 {
                return Err(bad(format!("expected 9 fields in {l:?}")));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}")));
            let opt = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
            let side = match f[1] {
                "left" => Side::Left,
                "right" => Side::Right,
                s => return Err(bad(format!("unknown side {s:?}"))),
            };
            let verdict = match f[8] {
                "pass" => Outcome::Pass,
                "fail" => Outcome::Fail,
                "n/a" => Outcome::Na,
                s => return Err(bad(format!("unknown verdict {s:?}"))),
            };
            Ok(TailRow {
                process: f[0].to_string(),
                side,
                t: num(f[2])?,
                n: if f[3].is_empty() {
                    None
                } else {
                    Some(f[3].parse().map_err(|e| bad(format!("N {:?}: {e}", f[3])))?)
                },
                estimate: num(f[4])?,
                ci_low: num(f[5])?,
                ci_high: num(f[6])?,
                bound: opt(f[7])?,
                verdict,
            })
        })
        .collect()
}

fn read_rows(path: &Path) -> Result<Vec<TailRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let verdict = v
            .get("verdict")
            .cloned()
            .ok_or_else(|| Error::Parse(format!("{}: no verdict in JSON", path.display())))?;
        let verdict: Verdict = serde_json::from_value(verdict)?;
        Ok(verdict.rows)
    } else {
        parse_csv_rows(&text, path)
    }
}

/// Merges result rows into one summary line per `(process, side)`.
pub fn summarize(rows: &[TailRow]) -> Vec<SummaryRow> {
    let mut map: BTreeMap<(String, String), SummaryRow> = BTreeMap::new();
    for r in rows {
        let key = (r.process.clone(), r.side.to_string());
        let s = map.entry(key.clone()).or_insert_with(|| SummaryRow {
            process: key.0,
            side: key.1,
            ..Default::default()
        });
        s.points += 1;
        if r.verdict == Outcome::Na {
            continue;
        }
        s.checked += 1;
        s.failures += (r.verdict == Outcome::Fail) as usize;
        if let Some(b) = r.bound.filter(|&b| b > 0.0) {
            let stat = if r.n.is_some() { r.ci_low } else { r.estimate };
            let ratio = stat / b;
            s.max_ratio = Some(s.max_ratio.map_or(ratio, |m| m.max(ratio)));
        }
    }
    map.into_values().collect()
}

fn cmd_report(spec: &RunSpec) -> Result<bool> {
    let mut rows = Vec::new();
    for p in &spec.inputs {
        rows.extend(read_rows(p)?);
    }
    let summary = summarize(&rows);
    let body = match spec.format {
        Format::Json => json_body(&json!({ "inputs": spec.inputs, "summary": summary }))?,
        Format::Csv => {
            let mut s = String::from("process,side,points,checked,failures,max_ratio,verdict\n");
            for r in &summary {
                let ratio = r.max_ratio.map(|v| format!("{v:.6e}")).unwrap_or_default();
                let verdict = if r.checked == 0 {
                    "n/a"
                } else if r.failures == 0 {
                    "pass"
                } else {
                    "fail"
                };
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    r.process, r.side, r.points, r.checked, r.failures, ratio, verdict
                );
            }
            s
        }
    };
    emit(spec, &body)?;
    Ok(summary.iter().all(|r| r.failures == 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_for(args: &[&str]) -> Result<RunSpec> {
        let cli = Cli::try_parse_from(std::iter::once("sizebias-lab").chain(args.iter().copied()))
            .map_err(|e| Error::Parse(e.to_string()))?;
        resolve(cli.command)
    }

    #[test]
    fn flags_build_process_configs() {
        let s = spec_for(&[
            "bounds",
            "--process",
            "runs",
            "--n",
            "100",
            "--m",
            "2",
            "--p",
            "0.5",
            "--t",
            "0:5:0.1",
        ])
        .unwrap();
        assert_eq!(s.process, Some(ProcessConfig::Runs { n: 100, m: 2, p: 0.5 }));
        assert_eq!(s.t_grid.len(), 51);
        let s = spec_for(&[
            "simulate",
            "--process",
            "perm",
            "--n",
            "9",
            "--tau",
            "1,3,2",
            "--seed",
            "4",
        ])
        .unwrap();
        assert_eq!(
            s.process,
            Some(ProcessConfig::Perm {
                n: 9,
                tau: vec![1, 3, 2]
            })
        );
        assert_eq!(s.seed, 4);
        let s = spec_for(&[
            "simulate",
            "--process",
            "cpoisson",
            "--lambda",
            "4",
            "--alpha",
            "1",
            "--beta",
            "1",
        ])
        .unwrap();
        assert!(matches!(s.process, Some(ProcessConfig::CompoundPoisson { m, .. }) if m == 2.0));
    }

    #[test]
    fn bad_input_is_rejected() {
        assert!(matches!(
            spec_for(&["bounds", "--process", "nope", "--n", "3"]),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            spec_for(&["bounds", "--process", "runs", "--n", "3"]),
            Err(Error::InvalidConfig(_))
        ));
        assert!(spec_for(&["bounds", "--process", "poisson", "--lambda", "2", "--t", "0:1"]).is_err());
        assert!(spec_for(&["bounds"]).is_err());
        assert!(spec_for(&["bounds", "--process", "cpoisson", "--lambda", "2", "--alpha", "1"]).is_err());
    }

    #[test]
    fn config_file_under_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(
            &path,
            r#"{"process":{"process":"graph","n":50,"p":0.05},"samples":20000,"seed":11,"t_grid":"0:2:0.5"}"#,
        )
        .unwrap();
        let p = path.to_str().unwrap();
        let s = spec_for(&["simulate", "--config", p, "--p", "0.1"]).unwrap();
        assert_eq!(s.process, Some(ProcessConfig::Graph { n: 50, p: 0.1 }));
        assert_eq!((s.samples, s.seed, s.t_grid.len()), (20_000, 11, 5));
        // naming a different process drops the file's parameters
        let s = spec_for(&["simulate", "--config", p, "--process", "poisson", "--lambda", "3"]).unwrap();
        assert_eq!(s.process, Some(ProcessConfig::Poisson { lambda: 3.0 }));
    }

    #[test]
    fn run_spec_round_trips() {
        let s = spec_for(&[
            "oracle",
            "--process",
            "coverage",
            "--n",
            "32",
            "--rho",
            "0.5",
            "--d",
            "1",
            "--t",
            "0:6:0.1",
            "--cl",
            "0.99",
            "--coupling",
            "-o",
            "out.json",
            "--out",
            "json",
        ])
        .unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<RunSpec>(&text).unwrap(), s);
    }

    #[test]
    fn summary_keys_and_ratios() {
        let row = |side, n, est: f64, lo: f64, bound, verdict| TailRow {
            process: "runs".into(),
            side,
            t: 1.0,
            n,
            estimate: est,
            ci_low: lo,
            ci_high: est,
            bound,
            verdict,
        };
        let rows = vec![
            row(Side::Right, Some(10), 0.2, 0.1, Some(0.5), Outcome::Pass),
            row(Side::Right, None, 0.3, 0.3, Some(0.4), Outcome::Pass),
            row(Side::Left, None, 0.3, 0.3, None, Outcome::Na),
        ];
        let s = summarize(&rows);
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].side.as_str(), s[0].checked, s[0].max_ratio), ("left", 0, None));
        assert_eq!((s[1].points, s[1].checked, s[1].failures), (2, 2, 0));
        assert!((s[1].max_ratio.unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn csv_rows_parse_back() {
        let v = Verdict {
            process: "poisson".into(),
            rows: vec![TailRow {
                process: "poisson".into(),
                side: Side::Left,
                t: 0.5,
                n: None,
                estimate: 0.25,
                ci_low: 0.25,
                ci_high: 0.25,
                bound: Some(0.75),
                verdict: Outcome::Pass,
            }],
            failures: 0,
            passed: true,
        };
        let rows = parse_csv_rows(&format!("# x\n{}", v.to_csv()), Path::new("mem")).unwrap();
        assert_eq!(rows, v.rows);
    }
}
