//! Command-line front end.
//!
//! Every data file `<out>` gets a sidecar `<out>.json` holding the fully
//! resolved [`RunConfig`]. Passing that sidecar back through `--config`
//! reproduces the data file byte for byte. Flags override values from the file.
//!
//! Exit status: 0 on success, 1 when a verification fails or a computation
//! does not converge, 2 for usage and domain errors. Errors are reported as a
//! single JSON line on stderr.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dynamics::{self, collapse_transform, max_pairwise_deviation, uniform_grid, TimeSeries};
use crate::error::QError;
use crate::fock::{LambdaIndex, ModelParams};
use crate::isomap;
use crate::verify::{self, CheckRecord, Suite, VerifyConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Qosc,
    Anharmonic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Series,
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepTarget {
    Isomorphism,
    Evolve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Evolve,
    Verify,
    Map,
    Collapse,
    Sweep,
}

/// Fully resolved parameters of one run. Fields irrelevant to a command
/// are carried along so that a sidecar is a complete record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<CommandName>,
    pub model: ModelKind,
    pub q: f64,
    pub omega: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub n: u32,
    pub m: u32,
    pub tau_max: f64,
    pub steps: usize,
    pub dim: usize,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub method: Method,
    pub suite: Suite,
    pub pairs: Vec<[u32; 2]>,
    pub j_col: usize,
    pub j_max: u32,
    pub target: SweepTarget,
    pub q_list: Vec<f64>,
    pub ratio_list: Vec<f64>,
    pub alpha_list: Vec<f64>,
    pub n_list: Vec<u32>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            model: ModelKind::Qosc,
            q: 1.2,
            omega: 1.0,
            omega1: 10.0,
            omega2: 1.0,
            alpha_re: 0.8,
            alpha_im: 0.0,
            n: 1,
            m: 0,
            tau_max: 10.0,
            steps: 401,
            dim: 64,
            tol: 1e-12,
            out: None,
            format: Format::Csv,
            method: Method::Series,
            suite: Suite::All,
            pairs: vec![[1, 0], [2, 0], [3, 0]],
            j_col: 0,
            j_max: 6,
            target: SweepTarget::Isomorphism,
            q_list: vec![1.2],
            ratio_list: vec![1.0, 5.0, 10.0, 100.0],
            alpha_list: vec![0.8],
            n_list: vec![1, 2, 3, 4],
        }
    }
}

impl RunConfig {
    pub fn alpha(&self) -> Complex64 {
        Complex64::new(self.alpha_re, self.alpha_im)
    }

    pub fn model_params(&self) -> Result<ModelParams, QError> {
        match self.model {
            ModelKind::Qosc => ModelParams::q_osc(self.q, self.omega),
            ModelKind::Anharmonic => ModelParams::anharmonic(self.omega1, self.omega2),
        }
    }

    pub fn idx(&self) -> LambdaIndex {
        LambdaIndex::new(self.n, self.m)
    }

    pub fn verify_config(&self) -> VerifyConfig {
        VerifyConfig { dim: self.dim, tol: self.tol, tau_max: self.tau_max, steps: self.steps, alpha: self.alpha() }
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::usage(format!("--tol must be positive, got {}", self.tol)));
        }
        if self.steps == 0 {
            return Err(CliError::usage("--steps must be at least 1"));
        }
        if self.dim < 2 {
            return Err(CliError::usage(format!("--dim must be at least 2, got {}", self.dim)));
        }
        if !self.alpha_re.is_finite() || !self.alpha_im.is_finite() {
            return Err(CliError::usage("alpha must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(name = "qdeform", version, about = "q-deformed and anharmonic oscillator dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Expectation value <Lambda^{n,m}> along a time grid.
    Evolve(Common),
    /// Run verification suites and write a JSON report.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        suite: Option<Suite>,
    },
    /// Map anharmonic parameters to the q-oscillator.
    Map {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        j_max: Option<u32>,
    },
    /// Normalized phase curves of band elements for several (n, m).
    Collapse {
        #[command(flatten)]
        common: Common,
        /// Comma-separated n:m pairs, e.g. 1:0,2:1
        #[arg(long, value_delimiter = ',', value_parser = parse_pair)]
        pairs: Option<Vec<[u32; 2]>>,
        #[arg(long)]
        j_col: Option<usize>,
    },
    /// Evaluate a command over a parameter grid; long-format CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        target: Option<SweepTarget>,
        #[arg(long, value_delimiter = ',')]
        q_list: Option<Vec<f64>>,
        /// omega1/omega2 values; omega2 is taken from --omega2
        #[arg(long, value_delimiter = ',')]
        ratio_list: Option<Vec<f64>>,
        /// Real coherent amplitudes
        #[arg(long, value_delimiter = ',')]
        alpha_list: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<u32>>,
        #[arg(long)]
        j_max: Option<u32>,
    },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    #[arg(long)]
    q: Option<f64>,
    /// omega_q of the q-oscillator
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    omega1: Option<f64>,
    #[arg(long)]
    omega2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha_im: Option<f64>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    tau_max: Option<f64>,
    /// Number of grid points, including both ends
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// A sidecar written by a previous run, or a bare config object
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<Method>,
}

fn parse_pair(s: &str) -> Result<[u32; 2], String> {
    let (n, m) = s.split_once(':').ok_or_else(|| format!("expected n:m, got '{s}'"))?;
    let parse = |v: &str| v.trim().parse::<u32>().map_err(|e| format!("bad index '{v}': {e}"));
    Ok([parse(n)?, parse(m)?])
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: String,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, kind: "usage".into(), message: message.into() }
    }

    fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        Self { code: 2, kind: "io".into(), message: format!("{}: {err}", path.display()) }
    }

    fn record(&self) -> String {
        json!({ "error": self.kind, "message": self.message, "exit": self.code }).to_string()
    }
}

impl From<QError> for CliError {
    fn from(e: QError) -> Self {
        let code = match e {
            QError::Convergence(_) | QError::Truncation(_) | QError::NonDiagonal(_) => 1,
            _ => 2,
        };
        Self { code, kind: e.kind().into(), message: e.to_string() }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let message = e.render().to_string();
            let first = message.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("{}", CliError::usage(first).record());
            return 2;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.record());
            e.code
        }
    }
}

fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let value = match value {
        Value::Object(mut map) if map.contains_key("config") => map.remove("config").unwrap_or(Value::Null),
        other => other,
    };
    serde_json::from_value(value).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn resolve(common: &Common, command: CommandName) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(previous) = cfg.command {
        if previous != command {
            return Err(CliError::usage(format!("config was written by '{previous:?}', not '{command:?}'").to_lowercase()));
        }
    }
    cfg.command = Some(command);
    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = common.$field.clone() { cfg.$field = v; } )* };
    }
    set!(model, q, omega, omega1, omega2, alpha_re, alpha_im, n, m, tau_max, steps, dim, tol, format, method);
    if let Some(out) = &common.out {
        cfg.out = Some(out.clone());
    }
    Ok(cfg)
}

fn dispatch(cmd: Cmd) -> Result<i32, CliError> {
    match cmd {
        Cmd::Evolve(common) => {
            let cfg = resolve(&common, CommandName::Evolve)?;
            cmd_evolve(&cfg)
        }
        Cmd::Verify { common, suite } => {
            let mut cfg = resolve(&common, CommandName::Verify)?;
            if let Some(s) = suite {
                cfg.suite = s;
            }
            cmd_verify(&cfg)
        }
        Cmd::Map { common, j_max } => {
            let mut cfg = resolve(&common, CommandName::Map)?;
            if let Some(j) = j_max {
                cfg.j_max = j;
            }
            cmd_map(&cfg)
        }
        Cmd::Collapse { common, pairs, j_col } => {
            let mut cfg = resolve(&common, CommandName::Collapse)?;
            if let Some(p) = pairs {
                cfg.pairs = p;
            }
            if let Some(j) = j_col {
                cfg.j_col = j;
            }
            cmd_collapse(&cfg)
        }
        Cmd::Sweep { common, target, q_list, ratio_list, alpha_list, n_list, j_max } => {
            let mut cfg = resolve(&common, CommandName::Sweep)?;
            if let Some(t) = target {
                cfg.target = t;
            }
            if let Some(v) = q_list {
                cfg.q_list = v;
            }
            if let Some(v) = ratio_list {
                cfg.ratio_list = v;
            }
            if let Some(v) = alpha_list {
                cfg.alpha_list = v;
            }
            if let Some(v) = n_list {
                cfg.n_list = v;
            }
            if let Some(j) = j_max {
                cfg.j_max = j;
            }
            cmd_sweep(&cfg)
        }
    }
}

/// Shortest decimal that parses back to the same double; `-0.0` prints as `0.0`.
fn num(x: f64) -> String {
    format!("{:?}", x + 0.0)
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes `data` to `--out` (and the sidecar next to it) or to stdout.
fn emit(cfg: &RunConfig, data: &[u8], diagnostics: Value) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => {
            fs::write(path, data).map_err(|e| CliError::io(path, e))?;
            let sidecar = json!({
                "qdeform_version": env!("CARGO_PKG_VERSION"),
                "data_file": path,
                "config": cfg,
                "diagnostics": diagnostics,
            });
            let side = sidecar_path(path);
            let mut text = serde_json::to_string_pretty(&sidecar).map_err(|e| CliError::io(&side, e))?;
            text.push('\n');
            fs::write(&side, text).map_err(|e| CliError::io(&side, e))
        }
        None => io::stdout().write_all(data).map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    let err = |e: csv::Error| CliError::io(Path::new("<csv>"), e);
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::io(Path::new("<csv>"), e))
}

fn json_bytes(value: &impl Serialize) -> Result<Vec<u8>, CliError> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| CliError::io(Path::new("<json>"), e))?;
    v.push(b'\n');
    Ok(v)
}

/// Rows of `time, re, im, abs, arg`.
fn trace_table(series: &TimeSeries) -> Vec<[f64; 5]> {
    series.times.iter().zip(&series.values).map(|(t, v)| [*t, v.re, v.im, v.norm(), v.arg()].map(|x| x + 0.0)).collect()
}

fn trace_bytes(cfg: &RunConfig, series: &TimeSeries, time_label: &str) -> Result<Vec<u8>, CliError> {
    let table = trace_table(series);
    let labels = [time_label, "re", "im", "abs", "arg"];
    match cfg.format {
        Format::Csv => {
            let header: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
            let rows: Vec<Vec<String>> = table.iter().map(|r| r.iter().map(|x| num(*x)).collect()).collect();
            csv_bytes(&header, &rows)
        }
        Format::Json => {
            let rows: Vec<Value> = table
                .iter()
                .map(|r| Value::Object(labels.iter().zip(r).map(|(k, v)| (k.to_string(), json!(v))).collect()))
                .collect();
            json_bytes(&rows)
        }
    }
}

fn evolve_series(cfg: &RunConfig) -> Result<(TimeSeries, &'static str), CliError> {
    let params = cfg.model_params()?;
    let grid = uniform_grid(cfg.tau_max, cfg.steps)?;
    let (alpha, idx) = (cfg.alpha(), cfg.idx());
    Ok(match (cfg.model, cfg.method) {
        (ModelKind::Qosc, Method::Series) => (dynamics::evolve_q_expectation(&params, alpha, idx, &grid, cfg.tol)?, "tau"),
        (ModelKind::Qosc, Method::Closed) => {
            return Err(CliError::usage("--method closed is available for the anharmonic model only"));
        }
        (ModelKind::Anharmonic, Method::Series) => {
            (dynamics::evolve_anharmonic_expectation(&params, alpha, idx, &grid, cfg.tol)?, "t")
        }
        (ModelKind::Anharmonic, Method::Closed) => (dynamics::evolve_anharmonic_closed(&params, alpha, idx, &grid)?, "t"),
    })
}

fn cmd_evolve(cfg: &RunConfig) -> Result<i32, CliError> {
    cfg.validate()?;
    let (series, label) = evolve_series(cfg)?;
    let data = trace_bytes(cfg, &series, label)?;
    let v0 = series.values[0];
    let diagnostics = json!({
        "points": series.len(),
        "time_label": label,
        "truncation_tail": series.truncation_tail,
        "initial_value": [v0.re, v0.im],
    });
    emit(cfg, &data, diagnostics)?;
    Ok(0)
}

fn cmd_verify(cfg: &RunConfig) -> Result<i32, CliError> {
    cfg.validate()?;
    let start = Instant::now();
    let suites: Vec<Suite> = match cfg.suite {
        Suite::All => Suite::ALL.to_vec(),
        s => vec![s],
    };
    let vcfg = cfg.verify_config();
    let mut records: Vec<CheckRecord> = vec![];
    let mut summary = vec![];
    for s in suites {
        let recs = verify::run_suite(s, &vcfg);
        let passed = recs.iter().filter(|r| r.pass).count();
        summary.push(json!({ "suite": s.name(), "checks": recs.len(), "passed": passed }));
        records.extend(recs);
    }
    let ok = verify::all_pass(&records);
    // Reports are JSON whatever --format says.
    let data = json_bytes(&records)?;
    let diagnostics = json!({
        "suites": summary,
        "all_pass": ok,
        "elapsed_seconds": start.elapsed().as_secs_f64(),
    });
    emit(cfg, &data, diagnostics.clone())?;
    if cfg.out.is_some() {
        for s in diagnostics["suites"].as_array().into_iter().flatten() {
            println!("{}: {}/{} pass", s["suite"].as_str().unwrap_or("?"), s["passed"], s["checks"]);
        }
    }
    Ok(if ok { 0 } else { 1 })
}

fn map_record(omega1: f64, omega2: f64, n: u32, j_max: u32) -> Result<Value, QError> {
    let r = isomap::isomorphism_residuals(omega1, omega2, n, j_max)?;
    Ok(json!({
        "n": n,
        "q": r.map.q_of_n,
        "omega_q": r.map.omega_q,
        "p_n": r.map.p_n,
        "residuals": {
            "inverse_q": r.inverse_q,
            "z": r.z,
            "coefficient_table": r.coefficient_table,
            "coefficient_function": r.coefficient_function,
            "closure": r.closure,
        },
    }))
}

const MAP_COLUMNS: [&str; 9] =
    ["n", "q", "omega_q", "p_n", "inverse_q", "z", "coefficient_table", "coefficient_function", "closure"];

fn cmd_map(cfg: &RunConfig) -> Result<i32, CliError> {
    let record = map_record(cfg.omega1, cfg.omega2, cfg.n, cfg.j_max)?;
    let data = match cfg.format {
        Format::Json => json_bytes(&record)?,
        Format::Csv => {
            let mut row = vec![cfg.n.to_string()];
            for key in ["q", "omega_q", "p_n"] {
                row.push(num(record[key].as_f64().unwrap_or(f64::NAN)));
            }
            for key in &MAP_COLUMNS[4..] {
                row.push(num(record["residuals"][*key].as_f64().unwrap_or(f64::NAN)));
            }
            let header: Vec<String> = MAP_COLUMNS.iter().map(|s| s.to_string()).collect();
            csv_bytes(&header, &[row])?
        }
    };
    emit(cfg, &data, json!({ "j_max": cfg.j_max }))?;
    Ok(0)
}

fn cmd_collapse(cfg: &RunConfig) -> Result<i32, CliError> {
    cfg.validate()?;
    if cfg.model != ModelKind::Qosc {
        return Err(CliError::usage("collapse is defined for the q-oscillator (--model qosc)"));
    }
    if cfg.pairs.is_empty() {
        return Err(CliError::usage("--pairs is empty"));
    }
    let params = cfg.model_params()?;
    let taus = uniform_grid(cfg.tau_max, cfg.steps)?;
    let mut curves = vec![];
    let mut failures = vec![];
    for &[n, m] in &cfg.pairs {
        let idx = LambdaIndex::new(n, m);
        let r = dynamics::element_phase_curve(&params, idx, cfg.j_col, &taus, cfg.dim)
            .and_then(|c| collapse_transform(std::slice::from_ref(&c)));
        match r {
            Ok(mut c) => curves.push(c.remove(0)),
            Err(e) => failures.push(json!({ "curve": idx.to_string(), "error": e.kind(), "message": e.to_string() })),
        }
    }
    if !failures.is_empty() {
        let err = CliError { code: 2, kind: "collapse".into(), message: Value::Array(failures).to_string() };
        return Err(err);
    }
    let deviation = max_pairwise_deviation(&curves);
    let data = match cfg.format {
        Format::Csv => {
            let mut header = vec!["tau".to_string()];
            header.extend(curves.iter().map(|c| c.idx.to_string()));
            let mut rows: Vec<Vec<String>> = (0..taus.len())
                .map(|i| std::iter::once(num(taus[i])).chain(curves.iter().map(|c| num(c.values[i]))).collect())
                .collect();
            rows.push(vec!["max_pairwise_deviation".into(), num(deviation)]);
            csv_bytes(&header, &rows)?
        }
        Format::Json => json_bytes(&json!({
            "tau": taus,
            "curves": curves.iter().map(|c| json!({ "label": c.idx.to_string(), "values": c.values })).collect::<Vec<_>>(),
            "max_pairwise_deviation": deviation,
        }))?,
    };
    emit(cfg, &data, json!({ "curves": curves.len(), "max_pairwise_deviation": deviation }))?;
    Ok(0)
}

/// One long-format row: grid point, its parameters, time (if any), metric, value, error.
type SweepRow = [String; 6];

fn sweep_point_isomorphism(point: usize, ratio: f64, omega2: f64, n: u32, j_max: u32) -> Vec<SweepRow> {
    let key = format!("omega1={};omega2={};n={n}", num(ratio * omega2), num(omega2));
    let row = |metric: &str, value: String, error: String| {
        [point.to_string(), key.clone(), String::new(), metric.to_string(), value, error]
    };
    match map_record(ratio * omega2, omega2, n, j_max) {
        Ok(rec) => {
            let mut rows: Vec<SweepRow> = ["q", "omega_q", "p_n"]
                .iter()
                .map(|k| row(k, num(rec[*k].as_f64().unwrap_or(f64::NAN)), String::new()))
                .collect();
            for key in &MAP_COLUMNS[4..] {
                rows.push(row(key, num(rec["residuals"][*key].as_f64().unwrap_or(f64::NAN)), String::new()));
            }
            rows
        }
        Err(e) => vec![row("error", String::new(), e.to_string())],
    }
}

fn sweep_point_evolve(point: usize, cfg: &RunConfig) -> Vec<SweepRow> {
    let key = match cfg.model {
        ModelKind::Qosc => format!("q={};omega={};alpha={};n={};m={}", num(cfg.q), num(cfg.omega), num(cfg.alpha_re), cfg.n, cfg.m),
        ModelKind::Anharmonic => {
            format!("omega1={};omega2={};alpha={};n={};m={}", num(cfg.omega1), num(cfg.omega2), num(cfg.alpha_re), cfg.n, cfg.m)
        }
    };
    match evolve_series(cfg) {
        Ok((series, _)) => trace_table(&series)
            .into_iter()
            .flat_map(|r| {
                let key = key.clone();
                ["re", "im", "abs", "arg"]
                    .into_iter()
                    .zip(&r[1..].to_vec())
                    .map(move |(metric, v)| [point.to_string(), key.clone(), num(r[0]), metric.to_string(), num(*v), String::new()])
                    .collect::<Vec<_>>()
            })
            .collect(),
        Err(e) => vec![[point.to_string(), key, String::new(), "error".into(), String::new(), e.message]],
    }
}

fn cmd_sweep(cfg: &RunConfig) -> Result<i32, CliError> {
    cfg.validate()?;
    let rows: Vec<SweepRow> = match cfg.target {
        SweepTarget::Isomorphism => {
            let points: Vec<(f64, u32)> = cfg.ratio_list.iter().flat_map(|&r| cfg.n_list.iter().map(move |&n| (r, n))).collect();
            points
                .par_iter()
                .enumerate()
                .flat_map_iter(|(i, &(ratio, n))| sweep_point_isomorphism(i, ratio, cfg.omega2, n, cfg.j_max))
                .collect()
        }
        SweepTarget::Evolve => {
            let models: Vec<RunConfig> = match cfg.model {
                ModelKind::Qosc => cfg.q_list.iter().map(|&q| RunConfig { q, ..cfg.clone() }).collect(),
                ModelKind::Anharmonic => {
                    cfg.ratio_list.iter().map(|&r| RunConfig { omega1: r * cfg.omega2, ..cfg.clone() }).collect()
                }
            };
            let points: Vec<RunConfig> = models
                .iter()
                .flat_map(|c| cfg.alpha_list.iter().map(move |&a| RunConfig { alpha_re: a, alpha_im: 0.0, ..c.clone() }))
                .collect();
            points.par_iter().enumerate().flat_map_iter(|(i, c)| sweep_point_evolve(i, c)).collect()
        }
    };
    let errors = rows.iter().filter(|r| !r[5].is_empty()).count();
    let header: Vec<String> = ["point", "params", "time", "metric", "value", "error"].iter().map(|s| s.to_string()).collect();
    let data = match cfg.format {
        Format::Csv => csv_bytes(&header, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())?,
        Format::Json => {
            let objs: Vec<Value> = rows
                .iter()
                .map(|r| Value::Object(header.iter().cloned().zip(r.iter().map(|s| json!(s))).collect()))
                .collect();
            json_bytes(&objs)?
        }
    };
    emit(cfg, &data, json!({ "rows": rows.len(), "error_rows": errors }))?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_parser() {
        assert_eq!(parse_pair("2:3").unwrap(), [2, 3]);
        assert!(parse_pair("2").is_err());
        assert!(parse_pair("a:1").is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = RunConfig { command: Some(CommandName::Map), out: Some("x.csv".into()), ..RunConfig::default() };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
        let partial: RunConfig = serde_json::from_str(r#"{"q": 2.0}"#).unwrap();
        assert_eq!(partial.q, 2.0);
        assert_eq!(partial.dim, 64);
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn numbers_are_shortest_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(1.0), "1.0");
    }

    #[test]
    fn error_codes() {
        assert_eq!(CliError::from(QError::Domain("x".into())).code, 2);
        assert_eq!(CliError::from(QError::Convergence("x".into())).code, 1);
        let rec: Value = serde_json::from_str(&CliError::usage("bad").record()).unwrap();
        assert_eq!(rec["exit"], 2);
    }
}
