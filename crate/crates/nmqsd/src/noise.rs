//! Colored complex Gaussian noise z*_t and the shifted noise of the nonlinear
//! equation.
//!
//! The Ornstein–Uhlenbeck process with covariance
//! `M[z_t z*_s] = α(t,s) = (γ/2)e^{−γ|t−s|}e^{−iΩ(t−s)}` is sampled with its exact
//! one-step transition, so the sampled covariance carries no discretization
//! bias. Samples live on the half-step grid `0, dt/2, dt, …, T` because the
//! trajectory integrator evaluates the noise at midpoint stages.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::model::{c, ModelParams, C64};

/// One realization of z*_t on the half-step grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    pub dt: f64,
    /// z*_t at t = k·dt/2, k = 0, …, 2·steps.
    pub values: Vec<C64>,
    pub seed: u64,
    pub traj_index: u64,
}

/// Number of whole steps of size `dt` in `[0, t_end]`, tolerant to rounding.
pub fn step_count(dt: f64, t_end: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    if !(t_end >= dt) {
        return Err(Error::InvalidParameter(format!(
            "T must be >= dt, got T={t_end}, dt={dt}"
        )));
    }
    let n = t_end / dt;
    let r = n.round();
    if (n - r).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "T={t_end} is not a multiple of dt={dt}"
        )));
    }
    Ok(r as usize)
}

/// Per-trajectory random stream keyed by `(seed, traj_index)`.
pub fn trajectory_rng(seed: u64, traj_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(traj_index);
    rng
}

fn complex_gaussian(rng: &mut ChaCha8Rng, sd_per_component: f64) -> C64 {
    let a: f64 = StandardNormal.sample(rng);
    let b: f64 = StandardNormal.sample(rng);
    c(a * sd_per_component, b * sd_per_component)
}

/// Sample z*_t on `0, dt/2, …, T` with the exact OU recursion
/// `z*_{t+h} = z*_t e^{−(γ−iΩ)h} + ξ`, `h = dt/2`.
pub fn sample_ou_path(params: &ModelParams, dt: f64, t_end: f64, seed: u64, traj_index: u64) -> Result<NoisePath> {
    if params.gamma <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "gamma must be > 0, got {}",
            params.gamma
        )));
    }
    let steps = step_count(dt, t_end)?;
    let mut rng = trajectory_rng(seed, traj_index);
    let values = ou_chain(params, 0.5 * dt, 2 * steps + 1, &mut rng);
    Ok(NoisePath {
        dt,
        values,
        seed,
        traj_index,
    })
}

/// `len` samples of the stationary OU chain with spacing `h`.
pub(crate) fn ou_chain(params: &ModelParams, h: f64, len: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let g = params.gamma;
    let decay = C64::from_polar((-g * h).exp(), params.omega * h);
    let sd0 = (0.25 * g).sqrt();
    let sd = (0.25 * g * (1.0 - (-2.0 * g * h).exp())).sqrt();
    let mut out = Vec::with_capacity(len);
    let mut z = complex_gaussian(rng, sd0);
    out.push(z);
    for _ in 1..len {
        z = z * decay + complex_gaussian(rng, sd);
        out.push(z);
    }
    out
}

impl NoisePath {
    /// The identically zero path (noise-free propagation).
    pub fn zeros(dt: f64, t_end: f64) -> Result<Self> {
        let steps = step_count(dt, t_end)?;
        Ok(NoisePath {
            dt,
            values: vec![C64::new(0.0, 0.0); 2 * steps + 1],
            seed: 0,
            traj_index: 0,
        })
    }

    /// The same realization seen on a grid `factor` times coarser.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.steps().is_multiple_of(factor) {
            return Err(Error::InvalidParameter(format!(
                "cannot coarsen {} steps by a factor {factor}",
                self.steps()
            )));
        }
        Ok(NoisePath {
            dt: self.dt * factor as f64,
            values: self.values.iter().step_by(factor).copied().collect(),
            seed: self.seed,
            traj_index: self.traj_index,
        })
    }

    /// Number of whole steps covered.
    pub fn steps(&self) -> usize {
        (self.values.len() - 1) / 2
    }

    /// z*_t at half-step index `k` (time `k·dt/2`).
    #[inline]
    pub fn at(&self, k: usize) -> C64 {
        self.values[k]
    }

    /// Half-step index of time `t`, rejecting off-grid times.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = t / (0.5 * self.dt);
        let k = x.round();
        if k < 0.0 || (x - k).abs() > 1e-9 * x.abs().max(1.0) || k as usize >= self.values.len() {
            return Err(Error::InvalidParameter(format!("t={t} is not on the half-step grid")));
        }
        Ok(k as usize)
    }

    /// Write the path as CSV with columns `t, re_zstar, im_zstar`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["t", "re_zstar", "im_zstar"])?;
        for (k, z) in self.values.iter().enumerate() {
            let t = 0.5 * self.dt * k as f64;
            wr.write_record([t.to_string(), z.re.to_string(), z.im.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Running memory integral of the shifted noise,
/// `M(t) = λ ∫₀^t α*(t,s) ⟨L†⟩_s ds`.
///
/// For the exponential kernel it obeys
/// `dM/dt = −(γ − iΩ) M + λ (γ/2) ⟨L†⟩_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftAccumulator {
    pub m: C64,
    pub t: f64,
}

impl Default for ShiftAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl ShiftAccumulator {
    pub fn new() -> Self {
        ShiftAccumulator {
            m: C64::new(0.0, 0.0),
            t: 0.0,
        }
    }

    /// Right-hand side of the memory ODE.
    #[inline]
    pub fn rate(m: C64, l_dag_expect: C64, params: &ModelParams) -> C64 {
        -c(params.gamma, -params.omega) * m + l_dag_expect * (params.lambda * 0.5 * params.gamma)
    }
}

/// One midpoint step of the memory ODE with a constant source over the step.
pub fn shift_update(acc: ShiftAccumulator, l_dag_expect: C64, dt: f64, params: &ModelParams) -> ShiftAccumulator {
    let k1 = ShiftAccumulator::rate(acc.m, l_dag_expect, params);
    let mid = acc.m + k1 * (0.5 * dt);
    let k2 = ShiftAccumulator::rate(mid, l_dag_expect, params);
    ShiftAccumulator {
        m: acc.m + k2 * dt,
        t: acc.t + dt,
    }
}

/// z̃*_t = z*_t + M(t).
pub fn shifted_noise(path: &NoisePath, acc: &ShiftAccumulator, t: f64) -> Result<C64> {
    let k = path.index_of(t)?;
    if (acc.t - t).abs() > 1e-9 * t.abs().max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "shift accumulator is at t={}, requested t={t}",
            acc.t
        )));
    }
    Ok(path.at(k) + acc.m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{bath_correlation, coupling_operator, expectation, InitialState};

    fn params(gamma: f64, omega: f64) -> ModelParams {
        ModelParams::new(1.0, 1.0, gamma, omega).unwrap()
    }

    #[test]
    fn same_seed_and_index_reproduce_path() {
        let p = params(0.5, 0.3);
        let a = sample_ou_path(&p, 0.01, 2.0, 42, 7).unwrap();
        let b = sample_ou_path(&p, 0.01, 2.0, 42, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.values.len(), 2 * 200 + 1);
        let other = sample_ou_path(&p, 0.01, 2.0, 42, 8).unwrap();
        assert_ne!(a.values, other.values);
    }

    #[test]
    fn invalid_grid_and_bath_are_rejected() {
        let p = params(0.5, 0.0);
        assert!(sample_ou_path(&p, 0.0, 1.0, 1, 0).is_err());
        assert!(sample_ou_path(&p, 0.1, 0.05, 1, 0).is_err());
        let mut bad = p;
        bad.gamma = -1.0;
        assert!(sample_ou_path(&bad, 0.1, 1.0, 1, 0).is_err());
    }

    /// Empirical first and second moments over `n` independent chains.
    struct LagStats {
        mean: C64,
        cov: C64,
        cov_se: f64,
        pseudo: C64,
        pseudo_se: f64,
    }

    fn lag_stats(p: &ModelParams, h: f64, lag: usize, n: usize, start: usize) -> LagStats {
        let mut sum = C64::new(0.0, 0.0);
        let mut cov = C64::new(0.0, 0.0);
        let mut cov2 = 0.0;
        let mut pseudo = C64::new(0.0, 0.0);
        let mut pseudo2 = 0.0;
        for i in 0..n as u64 {
            let mut rng = trajectory_rng(2024, i);
            let v = ou_chain(p, h, start + lag + 1, &mut rng);
            let (zs_s, zs_t) = (v[start], v[start + lag]);
            sum += zs_s;
            // M[z_t z*_s] with z_t = conj(z*_t)
            let x = zs_t.conj() * zs_s;
            cov += x;
            cov2 += x.norm_sqr();
            let y = zs_t * zs_s;
            pseudo += y;
            pseudo2 += y.norm_sqr();
        }
        let nf = n as f64;
        let cov_m = cov / nf;
        let pseudo_m = pseudo / nf;
        LagStats {
            mean: sum / nf,
            cov: cov_m,
            cov_se: ((cov2 / nf - cov_m.norm_sqr()) / nf).sqrt(),
            pseudo: pseudo_m,
            pseudo_se: ((pseudo2 / nf - pseudo_m.norm_sqr()) / nf).sqrt(),
        }
    }

    #[test]
    fn stationary_initial_law() {
        let p = params(1.0, 0.0);
        let n = 100_000;
        let s = lag_stats(&p, 0.25, 0, n, 0);
        assert!(s.mean.norm() <= 3.0 / ((n * 2) as f64).sqrt(), "mean {}", s.mean);
        assert!(
            (s.cov.re - 0.5).abs() <= 3.0 * s.cov_se,
            "var {} se {}",
            s.cov.re,
            s.cov_se
        );
    }

    #[test]
    fn lag_covariance_matches_correlation() {
        let p = params(1.0, 1.0);
        let h = 0.25;
        for (lag, tau) in [(2usize, 0.5), (4, 1.0), (8, 2.0)] {
            let s = lag_stats(&p, h, lag, 100_000, 0);
            let alpha = bath_correlation(tau, 0.0, &p);
            let ratio = s.cov / alpha;
            let se = s.cov_se / alpha.norm();
            assert!((ratio - 1.0).norm() <= 3.0 * se, "tau {tau}: {ratio}");
            assert!(s.pseudo.norm() <= 3.0 * s.pseudo_se);
        }
    }

    #[test]
    fn statistics_do_not_depend_on_window() {
        let p = params(1.0, 1.0);
        let early = lag_stats(&p, 0.25, 2, 40_000, 0);
        let late = lag_stats(&p, 0.25, 2, 40_000, 16);
        let se = (early.cov_se.powi(2) + late.cov_se.powi(2)).sqrt();
        assert!((early.cov - late.cov).norm() <= 3.0 * se);
    }

    #[test]
    fn variance_has_no_step_size_drift() {
        let p = params(1.0, 0.5);
        let n = 40_000;
        let a = lag_stats(&p, 0.005, 0, n, 200);
        let b = lag_stats(&p, 0.025, 0, n, 40);
        let se = (a.cov_se.powi(2) + b.cov_se.powi(2)).sqrt();
        assert!((a.cov.re - b.cov.re).abs() <= 3.0 * se);
        assert!((a.cov.re - 0.5).abs() <= 3.0 * a.cov_se);
    }

    #[test]
    fn zero_source_keeps_memory_zero() {
        let p = params(0.5, 0.4);
        let mut acc = ShiftAccumulator::new();
        for _ in 0..1000 {
            acc = shift_update(acc, C64::new(0.0, 0.0), 0.01, &p);
        }
        assert_eq!(acc.m, C64::new(0.0, 0.0));
        assert!((acc.t - 10.0).abs() < 1e-9);
    }

    #[test]
    fn constant_source_reaches_fixed_point() {
        let p = ModelParams::new(1.0, 0.8, 0.5, 0.4).unwrap();
        let cst = c(0.3, -0.2);
        let mut acc = ShiftAccumulator::new();
        for _ in 0..10_000 {
            acc = shift_update(acc, cst, 0.01, &p);
        }
        let want = cst * (p.lambda * 0.5 * p.gamma) / c(p.gamma, -p.omega);
        assert!((acc.m - want).norm() < 1e-10, "{} vs {}", acc.m, want);
    }

    #[test]
    fn single_step_matches_exact_linear_solution() {
        // constant source from M = 0: M(dt) = s(1 − e^{−k dt})/k, k = γ − iΩ
        let p = params(0.5, 0.0);
        let cst = c(1.0, 0.5);
        let dt = 1e-3;
        let acc = shift_update(ShiftAccumulator::new(), cst, dt, &p);
        let k = c(p.gamma, -p.omega);
        let src = cst * (p.lambda * 0.5 * p.gamma);
        let exact = src * (1.0 - (-k * dt).exp()) / k;
        assert!((acc.m - exact).norm() < 1e-6 * exact.norm());
        assert!((acc.t - dt).abs() < 1e-15);
    }

    #[test]
    fn shifted_noise_adds_memory() {
        let p = params(0.5, 0.0);
        let path = sample_ou_path(&p, 0.1, 1.0, 3, 0).unwrap();
        let acc = ShiftAccumulator {
            m: C64::new(0.0, 0.0),
            t: 0.5,
        };
        assert_eq!(shifted_noise(&path, &acc, 0.5).unwrap(), path.at(10));
        let zero = NoisePath {
            values: vec![C64::new(0.0, 0.0); 21],
            ..path.clone()
        };
        let acc = ShiftAccumulator { m: c(0.3, 0.1), t: 0.5 };
        assert_eq!(shifted_noise(&zero, &acc, 0.5).unwrap(), c(0.3, 0.1));
        assert!(shifted_noise(&path, &acc, 0.52).is_err());
        assert!(shifted_noise(&path, &acc, 0.55).is_err());
    }

    #[test]
    fn ground_state_never_shifts_noise() {
        // ⟨L†⟩ = 0 on |00⟩, so the accumulator keeps M = 0 and z̃* = z*.
        let p = params(0.5, 0.2);
        let l = coupling_operator();
        let psi = InitialState::Ground.state();
        let ld = expectation(&psi, &l.adjoint());
        let path = sample_ou_path(&p, 0.1, 2.0, 1, 0).unwrap();
        let mut acc = ShiftAccumulator::new();
        for k in 0..20 {
            let t = 0.1 * k as f64;
            assert_eq!(shifted_noise(&path, &acc, t).unwrap(), path.at(2 * k));
            acc = shift_update(acc, ld, 0.1, &p);
        }
    }

    #[test]
    fn csv_dump_has_header_and_rows() {
        let p = params(0.5, 0.0);
        let path = sample_ou_path(&p, 0.5, 1.0, 1, 0).unwrap();
        let mut buf = Vec::new();
        path.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "t,re_zstar,im_zstar");
        assert_eq!(lines.len(), 1 + 5);
    }
}
