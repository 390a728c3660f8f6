//! Command-line front end.
//!
//! Every subcommand reads a strict JSON [`RunConfig`], applies `--override
//! key=value` edits (dotted paths into the config document), runs, and writes
//! a CSV or JSON result plus a `*.manifest.json` file recording the effective
//! configuration and its content hash.
//!
//! Exit codes: 0 success, 2 configuration or validation error, 3 numerical
//! failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::coeffs::{Coefficients, Model};
use crate::deterministic::{analytic_series, integrate_master_with, steady_state, RdmSeries};
use crate::ensemble::{run_ensemble_with, EnsembleEstimate, EnsembleOptions};
use crate::error::{Error, Result};
use crate::io::{canonical_json, content_hash, fmt_f64, manifest_path, write_json, write_table, CSV_SCHEMA_VERSION};
use crate::metrics::{fidelity, hermitian_eigen, wootters_concurrence};
use crate::model::{c, re, InitialState, ModelParams, Operator4};
use crate::trajectory::Unraveling;

/// Smallest ensemble accepted by the `fidelity` command.
pub const FIDELITY_MIN_TRAJECTORIES: u64 = 1000;

/// Number of perturbed matrices behind the fidelity confidence band.
const BAND_SAMPLES: usize = 64;

/// Initial state as written in a config: a preset name, a two-digit preset
/// code such as `10`, or 8 numbers `[re, im, …]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialStateSpec {
    Preset(String),
    Code(u64),
    Amplitudes(Vec<f64>),
}

impl InitialStateSpec {
    pub fn resolve(&self) -> Result<InitialState> {
        match self {
            InitialStateSpec::Preset(name) => name.parse(),
            InitialStateSpec::Code(n) => format!("{n:02}").parse(),
            InitialStateSpec::Amplitudes(v) => InitialState::from_components(v),
        }
    }
}

/// Optional parameter axes of the `sweep` command.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    #[serde(default)]
    pub gamma: Vec<f64>,
    #[serde(default)]
    pub delta: Vec<f64>,
}

fn default_dt() -> f64 {
    0.01
}
fn default_n_traj() -> u64 {
    1000
}
fn default_stride() -> usize {
    10
}

/// Run configuration; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ModelParams,
    pub initial_state: InitialStateSpec,
    pub model: Model,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    #[serde(default = "default_n_traj")]
    pub n_traj: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_stride")]
    pub output_stride: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub unraveling: Unraveling,
    /// Reference time of the steady-state report (defaults to `T`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_ref: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepAxes>,
}

impl RunConfig {
    /// Parse a config document, applying `key=value` overrides first.
    pub fn from_json_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("malformed JSON: {e}")))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: RunConfig = serde_json::from_value(doc).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.initial_state.resolve()?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::Config(format!("T must be > 0, got {}", self.t_end)));
        }
        if self.output_stride == 0 {
            return Err(Error::Config("output_stride must be >= 1".into()));
        }
        Ok(())
    }

    pub fn initial(&self) -> Result<InitialState> {
        self.initial_state.resolve()
    }

    /// SHA-256 content hash of the canonical JSON form.
    pub fn content_hash(&self) -> Result<String> {
        Ok(content_hash(canonical_json(self)?.as_bytes()))
    }
}

/// Set `key` (dotted path, numeric segments index arrays) to `value`, which is
/// read as JSON when it parses and as a plain string otherwise.
pub fn apply_override(doc: &mut Value, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{spec}' is not of the form key=value")))?;
    if key.is_empty() {
        return Err(Error::Config(format!("override '{spec}' has an empty key")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    let mut cur = doc;
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert(part.to_string(), value);
                    return Ok(());
                }
                map.entry(part.to_string())
                    .or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| Error::Config(format!("override '{key}': '{part}' is not an array index")))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| Error::Config(format!("override '{key}': index {idx} out of range ({len})")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(Error::Config(format!("override '{key}': '{part}' is inside a scalar"))),
        };
    }
    Ok(())
}

/// Exit code of an error: 2 for configuration and I/O problems, 3 for
/// numerical failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter(_) | Error::Config(_) | Error::Io(_) | Error::Csv(_) => 2,
        _ => 3,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "nmqsd",
    version,
    about = "Non-Markovian quantum state diffusion for two qubits in a Lorentzian bath"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo ensemble: RDM, standard errors and concurrence vs time.
    Ensemble(CommonArgs),
    /// Zeroth-order (or weak-coupling) master equation.
    Master(CommonArgs),
    /// Closed-form solution for states without |11⟩ support.
    Analytic(CommonArgs),
    /// Long-time state and relaxation time (JSON).
    Steady(CommonArgs),
    /// Grid over γ and/or Δ: concurrence and fidelity per point and time.
    Sweep(CommonArgs),
    /// Fidelity of the ensemble against the zeroth-order master equation.
    Fidelity(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output file (overrides `output_path`).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads for ensembles (0 = one per core).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Config edit `dotted.key=value`; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ensemble(_) => "ensemble",
            Command::Master(_) => "master",
            Command::Analytic(_) => "analytic",
            Command::Steady(_) => "steady",
            Command::Sweep(_) => "sweep",
            Command::Fidelity(_) => "fidelity",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Ensemble(a)
            | Command::Master(a)
            | Command::Analytic(a)
            | Command::Steady(a)
            | Command::Sweep(a)
            | Command::Fidelity(a) => a,
        }
    }
}

/// Run manifest written next to every output.
#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    csv_schema_version: u32,
    config_hash: String,
    config: &'a RunConfig,
    params: ModelParams,
    model: Model,
    seed: u64,
    n_traj: u64,
    dt: f64,
    t_end: f64,
    output: PathBuf,
    summary: Value,
}

struct Session {
    command: &'static str,
    cfg: RunConfig,
    output: PathBuf,
    threads: usize,
}

impl Session {
    fn create_output(&self) -> Result<BufWriter<File>> {
        if let Some(dir) = self.output.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        Ok(BufWriter::new(File::create(&self.output)?))
    }

    fn write_manifest(&self, summary: Value) -> Result<()> {
        let m = Manifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            csv_schema_version: CSV_SCHEMA_VERSION,
            config_hash: self.cfg.content_hash()?,
            config: &self.cfg,
            params: self.cfg.params,
            model: self.cfg.model,
            seed: self.cfg.seed,
            n_traj: self.cfg.n_traj,
            dt: self.cfg.dt,
            t_end: self.cfg.t_end,
            output: self.output.clone(),
            summary,
        };
        write_json(&manifest_path(&self.output), &m)
    }

    fn ensemble(&self, params: &ModelParams, model: Model) -> Result<EnsembleEstimate> {
        let psi0 = self.cfg.initial()?.state();
        let coeffs = Coefficients::build(model, params, 0.5 * self.cfg.dt, self.cfg.t_end)?;
        let opts = EnsembleOptions {
            n_traj: self.cfg.n_traj,
            seed: self.cfg.seed,
            dt: self.cfg.dt,
            t_end: self.cfg.t_end,
            output_stride: self.cfg.output_stride,
            unraveling: self.cfg.unraveling,
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| run_ensemble_with(psi0, &coeffs, &opts))
    }

    fn master(&self, params: &ModelParams, model: Model) -> Result<RdmSeries> {
        if model == Model::Exact {
            return Err(Error::Config(
                "the master equation has no exact form; use model zeroth, weak1, weak3 or weak5".into(),
            ));
        }
        let rho0 = self.cfg.initial()?.density();
        let coeffs = Coefficients::build(model, params, 0.5 * self.cfg.dt, self.cfg.t_end)?;
        integrate_master_with(
            &rho0,
            &coeffs,
            self.cfg.dt,
            self.cfg.t_end,
            self.cfg.output_stride,
            |_, _, _| {},
        )
    }

    fn cmd_ensemble(&self) -> Result<()> {
        let est = self.ensemble(&self.cfg.params, self.cfg.model)?;
        est.write_csv(self.create_output()?)?;
        self.write_manifest(serde_json::json!({
            "rows": est.grid.len(),
            "n_completed": est.n_traj,
            "n_aborted": est.n_aborted,
            "max_stderr": est.max_stderr(),
            "unraveling": est.unraveling,
        }))
    }

    fn cmd_master(&self) -> Result<()> {
        let series = self.master(&self.cfg.params, self.cfg.model)?;
        series.write_csv(self.create_output()?)?;
        self.write_manifest(serde_json::json!({ "rows": series.times.len() }))
    }

    fn cmd_analytic(&self) -> Result<()> {
        let rho0 = self.cfg.initial()?.density();
        let series = analytic_series(
            &rho0,
            &self.cfg.params,
            self.cfg.dt,
            self.cfg.t_end,
            self.cfg.output_stride,
        )?;
        series.write_csv(self.create_output()?)?;
        self.write_manifest(serde_json::json!({ "rows": series.times.len() }))
    }

    fn cmd_steady(&self) -> Result<()> {
        let rho0 = self.cfg.initial()?.density();
        let t_ref = self.cfg.t_ref.unwrap_or(self.cfg.t_end);
        let report = steady_state(&rho0, &self.cfg.params, t_ref, self.cfg.dt, self.cfg.t_end)?;
        write_json(&self.output, &report)?;
        self.write_manifest(serde_json::json!({
            "method": report.method,
            "concurrence_inf": report.concurrence_inf,
            "tau_s": report.tau_s,
        }))
    }

    fn cmd_sweep(&self) -> Result<()> {
        let axes = self.cfg.sweep.clone().unwrap_or_default();
        if axes.gamma.is_empty() && axes.delta.is_empty() {
            return Err(Error::Config(
                "sweep needs a non-empty 'sweep.gamma' or 'sweep.delta' list".into(),
            ));
        }
        let deterministic = self.cfg.n_traj == 0;
        if deterministic && self.cfg.model != Model::Zeroth {
            return Err(Error::Config(format!(
                "n_traj = 0 selects the deterministic solver, which needs model zeroth (got {})",
                self.cfg.model
            )));
        }
        let base = self.cfg.params;
        let gammas = if axes.gamma.is_empty() {
            vec![base.gamma]
        } else {
            axes.gamma
        };
        let deltas = if axes.delta.is_empty() {
            vec![base.delta]
        } else {
            axes.delta
        };
        let solver = if deterministic { "master" } else { "ensemble" };
        let mut rows = Vec::new();
        for &g in &gammas {
            for &d in &deltas {
                let p = base.with_gamma(g)?.with_delta(d)?;
                let reference = self.master(&p, Model::Zeroth)?;
                let (times, rho) = if deterministic {
                    (reference.times.clone(), reference.rho.clone())
                } else {
                    let est = self.ensemble(&p, self.cfg.model)?;
                    (est.grid, est.rho)
                };
                for (k, (t, r)) in times.iter().zip(&rho).enumerate() {
                    let conc = wootters_concurrence(r)?.value;
                    let fid = fidelity(&reference.rho[k], r)?.value;
                    rows.push(vec![
                        fmt_f64(g),
                        fmt_f64(d),
                        solver.to_string(),
                        fmt_f64(*t),
                        fmt_f64(conc),
                        fmt_f64(fid),
                    ]);
                }
            }
        }
        let header: Vec<String> = ["gamma", "delta", "solver", "t", "concurrence", "fidelity"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        write_table(self.create_output()?, &header, &rows)?;
        self.write_manifest(serde_json::json!({
            "rows": rows.len(),
            "points": gammas.len() * deltas.len(),
            "solver": solver,
        }))
    }

    fn cmd_fidelity(&self) -> Result<()> {
        if self.cfg.n_traj < FIDELITY_MIN_TRAJECTORIES {
            return Err(Error::Config(format!(
                "fidelity needs n_traj >= {FIDELITY_MIN_TRAJECTORIES} (got {})",
                self.cfg.n_traj
            )));
        }
        let est = self.ensemble(&self.cfg.params, self.cfg.model)?;
        let reference = self.master(&self.cfg.params, Model::Zeroth)?;
        let points = fidelity_with_band(&est, &reference.rho, self.cfg.seed)?;
        let header: Vec<String> = [
            "t",
            "fidelity",
            "band_lo",
            "band_hi",
            "concurrence_ensemble",
            "concurrence_reference",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let rows: Vec<Vec<String>> = points
            .iter()
            .map(|p| {
                [
                    p.t,
                    p.fidelity,
                    p.band_lo,
                    p.band_hi,
                    p.concurrence_ensemble,
                    p.concurrence_reference,
                ]
                .iter()
                .map(|&v| fmt_f64(v))
                .collect()
            })
            .collect();
        write_table(self.create_output()?, &header, &rows)?;
        let min = points
            .iter()
            .min_by(|a, b| a.fidelity.total_cmp(&b.fidelity))
            .expect("non-empty grid");
        self.write_manifest(serde_json::json!({
            "rows": rows.len(),
            "min_fidelity": min.fidelity,
            "min_fidelity_t": min.t,
            "min_band": [min.band_lo, min.band_hi],
            "n_aborted": est.n_aborted,
        }))
    }
}

/// One row of the fidelity comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityPoint {
    pub t: f64,
    pub fidelity: f64,
    pub band_lo: f64,
    pub band_hi: f64,
    pub concurrence_ensemble: f64,
    pub concurrence_reference: f64,
}

/// Closest unit-trace PSD matrix in the eigenbasis (negative eigenvalues
/// clipped to zero).
fn project_psd(m: &Operator4) -> Operator4 {
    let h = (m + m.adjoint()) * re(0.5);
    let (vals, vecs) = hermitian_eigen(&h);
    let mut out = Operator4::zeros();
    for (k, &v) in vals.iter().enumerate() {
        if v > 0.0 {
            let col = vecs.column(k);
            out += col * col.adjoint() * re(v);
        }
    }
    let tr = out.trace().re;
    if tr > 0.0 {
        out / re(tr)
    } else {
        Operator4::identity() * re(0.25)
    }
}

/// Fidelity of each ensemble matrix against `reference`, with a 3σ band from
/// parametric resampling: Hermitian perturbations with the element standard
/// errors, projected back onto density matrices.
pub fn fidelity_with_band(est: &EnsembleEstimate, reference: &[Operator4], seed: u64) -> Result<Vec<FidelityPoint>> {
    if reference.len() != est.grid.len() {
        return Err(Error::InvalidParameter(format!(
            "reference has {} matrices, ensemble grid has {}",
            reference.len(),
            est.grid.len()
        )));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f1de);
    let mut out = Vec::with_capacity(est.grid.len());
    for (k, (&t, rho)) in est.grid.iter().zip(&est.rho).enumerate() {
        let f = fidelity(&reference[k], &project_psd(rho))?.value;
        let se = &est.stderr[k];
        let mut samples = Vec::with_capacity(BAND_SAMPLES);
        for _ in 0..BAND_SAMPLES {
            let mut d = Operator4::zeros();
            for i in 0..4 {
                let g: f64 = StandardNormal.sample(&mut rng);
                d[(i, i)] = re(g * se[4 * i + i]);
                for j in i + 1..4 {
                    let (a, b): (f64, f64) = (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
                    let s = se[4 * i + j] * std::f64::consts::FRAC_1_SQRT_2;
                    d[(i, j)] = c(a * s, b * s);
                    d[(j, i)] = d[(i, j)].conj();
                }
            }
            samples.push(fidelity(&reference[k], &project_psd(&(rho + d)))?.value);
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let sd = (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        out.push(FidelityPoint {
            t,
            fidelity: f,
            band_lo: (f - 3.0 * sd).max(0.0),
            band_hi: (f + 3.0 * sd).min(1.0),
            concurrence_ensemble: wootters_concurrence(&project_psd(rho))?.value,
            concurrence_reference: wootters_concurrence(&reference[k])?.value,
        });
    }
    Ok(out)
}

fn load_session(command: &Command) -> Result<Session> {
    let args = command.args();
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", args.config.display())))?;
    let cfg = RunConfig::from_json_with_overrides(&text, &args.overrides)?;
    let output = args
        .output
        .clone()
        .or_else(|| cfg.output_path.clone())
        .ok_or_else(|| Error::Config("no output: pass --output or set output_path".into()))?;
    Ok(Session {
        command: command.name(),
        cfg,
        output,
        threads: args.threads,
    })
}

fn dispatch(command: &Command) -> Result<PathBuf> {
    let s = load_session(command)?;
    match command {
        Command::Ensemble(_) => s.cmd_ensemble(),
        Command::Master(_) => s.cmd_master(),
        Command::Analytic(_) => s.cmd_analytic(),
        Command::Steady(_) => s.cmd_steady(),
        Command::Sweep(_) => s.cmd_sweep(),
        Command::Fidelity(_) => s.cmd_fidelity(),
    }?;
    Ok(s.output)
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli.command) {
        Ok(out) => {
            eprintln!("wrote {}", out.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Read a config file the way the CLI does (for scripting and tests).
pub fn load_config(path: &Path, overrides: &[String]) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    RunConfig::from_json_with_overrides(&text, overrides)
}
