//! Monte Carlo estimation of the reduced density matrix ρ(t) = M[|ψ_t⟩⟨ψ_t|].
//!
//! Trajectories `0 … n_traj−1` are summed by a pairwise reduction tree whose
//! shape depends only on the trajectory indices, never on thread scheduling,
//! so results are bit-identical for any number of worker threads.

use std::io::Write;

use crate::coeffs::{Coefficients, Model};
use crate::error::{Error, Result};
use crate::io::{rdm_header, rdm_row, write_table};
use crate::metrics::{hermiticity_deviation, min_eigenvalue, wootters_concurrence};
use crate::model::{ModelParams, Operator4, PureState4};
use crate::noise::{sample_ou_path, step_count};
use crate::trajectory::{output_times, propagate, Unraveling};

/// Largest number of trajectories summed sequentially at a leaf of the tree.
const LEAF_SIZE: usize = 8;

/// Largest tolerated fraction of aborted trajectories.
pub const MAX_ABORT_FRACTION: f64 = 1e-3;

/// Thresholds of [`rdm_physicality`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Largest |Tr ρ − 1|.
    pub trace: f64,
    /// Largest |ρᵢⱼ − conj(ρⱼᵢ)|.
    pub hermiticity: f64,
    /// Smallest admissible eigenvalue (≤ 0).
    pub min_eigenvalue: f64,
}

impl Thresholds {
    /// Deterministic outputs: trace 1 ± 1e−9, Hermitian to 1e−12, λ_min ≥ −1e−8.
    pub fn deterministic() -> Self {
        Thresholds {
            trace: 1e-9,
            hermiticity: 1e-12,
            min_eigenvalue: -1e-8,
        }
    }

    /// Monte Carlo averages of unit projectors: eigenvalue floor scaled to
    /// three times the largest element standard error.
    pub fn monte_carlo(max_stderr: f64) -> Self {
        Thresholds {
            trace: 1e-9,
            hermiticity: 1e-12,
            min_eigenvalue: -(3.0 * max_stderr).max(1e-8),
        }
    }

    /// Abort thresholds of the deterministic integrators.
    pub fn guard() -> Self {
        Thresholds {
            trace: 1e-6,
            hermiticity: 1e-6,
            min_eigenvalue: -1e-6,
        }
    }
}

/// Physicality diagnostics of one density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalityReport {
    pub trace_deviation: f64,
    pub hermiticity_deviation: f64,
    pub min_eigenvalue: f64,
    pub pass: bool,
}

/// Trace, Hermiticity and positivity of `rho` against `limits`.
pub fn rdm_physicality(rho: &Operator4, limits: &Thresholds) -> PhysicalityReport {
    let trace_deviation = (rho.trace() - 1.0).norm();
    let herm = hermiticity_deviation(rho);
    let min = min_eigenvalue(rho);
    let pass = trace_deviation <= limits.trace
        && herm <= limits.hermiticity
        && min >= limits.min_eigenvalue
        && rho.iter().all(|z| z.is_finite());
    PhysicalityReport {
        trace_deviation,
        hermiticity_deviation: herm,
        min_eigenvalue: min,
        pass,
    }
}

/// Ensemble settings besides the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleOptions {
    pub n_traj: u64,
    pub seed: u64,
    pub dt: f64,
    pub t_end: f64,
    pub output_stride: usize,
    pub unraveling: Unraveling,
}

/// Monte Carlo estimate of ρ(t) on the output grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleEstimate {
    pub grid: Vec<f64>,
    pub rho: Vec<Operator4>,
    /// Standard error of each complex entry (row-major) at each output time.
    pub stderr: Vec<[f64; 16]>,
    /// Trajectories that contributed.
    pub n_traj: u64,
    /// Trajectories that aborted (excluded from the average).
    pub n_aborted: u64,
    pub seed: u64,
    pub model: Model,
    pub unraveling: Unraveling,
    pub dt: f64,
}

impl EnsembleEstimate {
    /// Largest element standard error over all times.
    pub fn max_stderr(&self) -> f64 {
        self.stderr.iter().flat_map(|s| s.iter().copied()).fold(0.0, f64::max)
    }

    /// Concurrence of the mean matrix at each output time.
    pub fn concurrence(&self) -> Result<Vec<f64>> {
        self.rho
            .iter()
            .map(|r| wootters_concurrence(r).map(|m| m.value))
            .collect()
    }

    /// Physicality of every output matrix at 3σ-scaled thresholds.
    pub fn physicality(&self) -> Vec<PhysicalityReport> {
        let limits = Thresholds::monte_carlo(self.max_stderr());
        self.rho.iter().map(|r| rdm_physicality(r, &limits)).collect()
    }

    /// CSV with `t`, the 16 entries (re/im), the 16 standard errors and
    /// `concurrence`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let conc = self.concurrence()?;
        let rows: Vec<Vec<String>> = (0..self.grid.len())
            .map(|k| rdm_row(self.grid[k], &self.rho[k], Some(&self.stderr[k]), &[conc[k]]))
            .collect();
        write_table(w, &rdm_header(true, &["concurrence"]), &rows)
    }
}

/// Partial sums over a contiguous range of trajectory indices.
struct Partial {
    sum: Vec<Operator4>,
    sumsq: Vec<[f64; 16]>,
    n: u64,
    aborted: u64,
    first_error: Option<(u64, String)>,
}

impl Partial {
    fn empty(len: usize) -> Self {
        Partial {
            sum: vec![Operator4::zeros(); len],
            sumsq: vec![[0.0; 16]; len],
            n: 0,
            aborted: 0,
            first_error: None,
        }
    }

    fn merge(mut self, other: Partial) -> Partial {
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sumsq.iter_mut().zip(&other.sumsq) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        self.n += other.n;
        self.aborted += other.aborted;
        if self.first_error.is_none() {
            self.first_error = other.first_error;
        }
        self
    }
}

struct Job<'a> {
    psi0: PureState4,
    coeffs: &'a Coefficients,
    opts: EnsembleOptions,
    outputs: usize,
}

impl Job<'_> {
    fn leaf(&self, lo: u64, hi: u64) -> Partial {
        let mut part = Partial::empty(self.outputs);
        let mut buf = Vec::with_capacity(self.outputs);
        for idx in lo..hi {
            buf.clear();
            let run = sample_ou_path(&self.coeffs.params, self.opts.dt, self.opts.t_end, self.opts.seed, idx).and_then(
                |noise| {
                    propagate(
                        self.psi0,
                        self.coeffs,
                        &noise,
                        self.opts.unraveling,
                        self.opts.output_stride,
                        |s| buf.push(s.projector()),
                    )
                },
            );
            match run {
                Ok(_) => {
                    for (k, p) in buf.iter().enumerate() {
                        part.sum[k] += p;
                        for (x, z) in part.sumsq[k].iter_mut().zip(p.iter()) {
                            *x += z.norm_sqr();
                        }
                    }
                    part.n += 1;
                }
                Err(e) => {
                    part.aborted += 1;
                    if part.first_error.is_none() {
                        part.first_error = Some((idx, e.to_string()));
                    }
                }
            }
        }
        part
    }

    fn reduce(&self, lo: u64, hi: u64) -> Partial {
        if hi - lo <= LEAF_SIZE as u64 {
            return self.leaf(lo, hi);
        }
        let mid = lo + (hi - lo) / 2;
        let (a, b) = rayon::join(|| self.reduce(lo, mid), || self.reduce(mid, hi));
        a.merge(b)
    }
}

/// Average `n_traj` trajectories of the model behind `coeffs` (tabulated on the
/// half-step grid `dt/2`) started from `psi0`.
pub fn run_ensemble_with(psi0: PureState4, coeffs: &Coefficients, opts: &EnsembleOptions) -> Result<EnsembleEstimate> {
    if opts.n_traj == 0 {
        return Err(Error::InvalidParameter("n_traj must be >= 1".into()));
    }
    if ((psi0.norm() - 1.0).abs()) > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "initial state must be normalized (norm {})",
            psi0.norm()
        )));
    }
    if opts.output_stride == 0 {
        return Err(Error::InvalidParameter("output stride must be >= 1".into()));
    }
    let steps = step_count(opts.dt, opts.t_end)?;
    let grid = output_times(steps, opts.dt, opts.output_stride);
    let job = Job {
        psi0,
        coeffs,
        opts: *opts,
        outputs: grid.len(),
    };
    let part = job.reduce(0, opts.n_traj);

    if part.aborted as f64 > MAX_ABORT_FRACTION * opts.n_traj as f64 || part.n == 0 {
        let (idx, msg) = part.first_error.unwrap_or((0, "no trajectory completed".into()));
        // a configuration problem makes every trajectory fail the same way
        if part.n == 0 && msg.starts_with("invalid parameter") {
            return Err(Error::InvalidParameter(msg));
        }
        return Err(Error::EnsembleFailed {
            aborted: part.aborted as usize,
            total: opts.n_traj as usize,
            first: format!("trajectory {idx}: {msg}"),
        });
    }

    let n = part.n as f64;
    let rho: Vec<Operator4> = part.sum.iter().map(|s| s / crate::model::re(n)).collect();
    let stderr = rho
        .iter()
        .zip(&part.sumsq)
        .map(|(mean, sq)| {
            let mut se = [0.0; 16];
            if part.n > 1 {
                for (k, (m, s)) in mean.iter().zip(sq).enumerate() {
                    let var = ((s - n * m.norm_sqr()) / (n - 1.0)).max(0.0);
                    se[k] = (var / n).sqrt();
                }
            }
            se
        })
        .collect();
    Ok(EnsembleEstimate {
        grid,
        rho,
        stderr,
        n_traj: part.n,
        n_aborted: part.aborted,
        seed: opts.seed,
        model: coeffs.model,
        unraveling: opts.unraveling,
        dt: opts.dt,
    })
}

/// Nonlinear-unraveling ensemble of `model` from `psi0` on `[0, t_end]`.
#[allow(clippy::too_many_arguments)]
pub fn run_ensemble(
    psi0: PureState4,
    params: &ModelParams,
    model: Model,
    n_traj: u64,
    seed: u64,
    dt: f64,
    t_end: f64,
    output_stride: usize,
) -> Result<EnsembleEstimate> {
    let coeffs = Coefficients::build(model, params, 0.5 * dt, t_end)?;
    let opts = EnsembleOptions {
        n_traj,
        seed,
        dt,
        t_end,
        output_stride,
        unraveling: Unraveling::Nonlinear,
    };
    run_ensemble_with(psi0, &coeffs, &opts)
}
