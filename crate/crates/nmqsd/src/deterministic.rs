//! Noise-free oracles: the zeroth-order master equation, its element-wise
//! form, the closed-form solution for states without |11⟩ support, and the
//! steady-state predictor.
//!
//! Master equation (Ō₀ = F1·L + F2·K from the zeroth-order track):
//!
//! ```text
//! ρ̇ = −i[H_s, ρ] + λ[L, ρŌ₀†] + λ[Ō₀ρ, L†]
//! ```
//!
//! Density-matrix element labels are 1-based: ρ₁₁ is the |11⟩
//! population and ρ₄₄ the |00⟩ population (0-based indices 0 and 3).

use std::io::Write;

use serde::Serialize;

use crate::coeffs::{closed_form_a, integrate_zeroth_coeffs, Coefficients, Model};
use crate::ensemble::{rdm_physicality, Thresholds};
use crate::error::{Error, Result};
use crate::io::{rdm_header, rdm_row, write_table};
use crate::metrics::wootters_concurrence;
use crate::model::{build_hamiltonian, c, coupling_operator, re, ModelParams, Operator4, C64, I};
use crate::noise::step_count;
use crate::ode::rk4_step;

/// 4×4 density matrix in the fixed basis.
pub type DensityMatrix4 = Operator4;

/// Trace drift that aborts a deterministic integration.
pub const TRACE_GUARD: f64 = 1e-6;
/// Eigenvalue below which a deterministic integration aborts.
pub const EIGENVALUE_GUARD: f64 = -1e-6;
/// Required agreement of the matrix and element forms.
pub const CROSS_CHECK_TOLERANCE: f64 = 1e-8;
/// Support on |11⟩ above which the closed-form solution is refused.
pub const EXCITED_SUPPORT_TOLERANCE: f64 = 1e-12;
/// Element rate (per unit time, rotating frame) that defines relaxation.
pub const RELAXATION_RATE: f64 = 1e-4;

/// Density matrices on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RdmSeries {
    pub times: Vec<f64>,
    pub rho: Vec<DensityMatrix4>,
}

impl RdmSeries {
    /// Concurrence at every output time.
    pub fn concurrence(&self) -> Result<Vec<f64>> {
        self.rho
            .iter()
            .map(|r| wootters_concurrence(r).map(|m| m.value))
            .collect()
    }

    /// The last matrix.
    pub fn last(&self) -> &DensityMatrix4 {
        self.rho.last().expect("series is never empty")
    }

    /// CSV with `t`, the 16 entries (re/im) and `concurrence`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let conc = self.concurrence()?;
        let rows: Vec<Vec<String>> = self
            .times
            .iter()
            .zip(&self.rho)
            .zip(&conc)
            .map(|((t, r), c)| rdm_row(*t, r, None, &[*c]))
            .collect();
        write_table(w, &rdm_header(false, &["concurrence"]), &rows)
    }
}

/// Right-hand side of the master equation for a given Ō₀.
pub fn master_rhs(rho: &DensityMatrix4, o: &Operator4, params: &ModelParams) -> DensityMatrix4 {
    let h = build_hamiltonian(params);
    let l = coupling_operator();
    let lam = params.lambda;
    let comm = |a: &Operator4, b: &Operator4| a * b - b * a;
    -(comm(&h, rho) * I) + (comm(&l, &(rho * o.adjoint())) + comm(&(o * rho), &l.adjoint())) * re(lam)
}

/// The nine independent elements (ρ11, ρ12, ρ13, ρ14, ρ22, ρ23, ρ33, ρ24, ρ34).
pub type Elements = [C64; 9];

/// Read the independent elements of a matrix.
pub fn elements_of(rho: &DensityMatrix4) -> Elements {
    [
        rho[(0, 0)],
        rho[(0, 1)],
        rho[(0, 2)],
        rho[(0, 3)],
        rho[(1, 1)],
        rho[(1, 2)],
        rho[(2, 2)],
        rho[(1, 3)],
        rho[(2, 3)],
    ]
}

/// Rebuild the matrix from its independent elements, fixing ρ44 by the trace.
pub fn matrix_of(e: &Elements, trace: f64) -> DensityMatrix4 {
    let mut m = DensityMatrix4::zeros();
    let set = |m: &mut DensityMatrix4, i: usize, j: usize, v: C64| {
        m[(i, j)] = v;
        m[(j, i)] = v.conj();
    };
    m[(0, 0)] = re(e[0].re);
    set(&mut m, 0, 1, e[1]);
    set(&mut m, 0, 2, e[2]);
    set(&mut m, 0, 3, e[3]);
    m[(1, 1)] = re(e[4].re);
    set(&mut m, 1, 2, e[5]);
    m[(2, 2)] = re(e[6].re);
    set(&mut m, 1, 3, e[7]);
    set(&mut m, 2, 3, e[8]);
    m[(3, 3)] = re(trace - e[0].re - e[4].re - e[6].re);
    m
}

/// Element-wise equations of motion given X = F1 − F2 and Y = F1 + F2.
pub fn element_rhs(e: &Elements, x: C64, y: C64, params: &ModelParams) -> Elements {
    let lam = params.lambda;
    let w = params.omega_s;
    let [r11, r12, r13, r14, r22, r23, r33, r24, r34] = *e;
    let xs = x.conj();
    let ry = 2.0 * lam * y.re;
    let rx = 2.0 * lam * x.re;
    let iw = c(0.0, w);
    [
        -2.0 * ry * r11,
        -iw * r12 - lam * (2.0 * y + xs) * r12 - lam * xs * r13,
        -iw * r13 - lam * (2.0 * y + xs) * r13 - lam * xs * r12,
        -2.0 * iw * r14 - 2.0 * lam * y * r14,
        ry * r11 - rx * r22 - lam * xs * r23 - lam * x * r23.conj(),
        ry * r11 - rx * r23 - lam * x * r33 - lam * xs * r22.conj(),
        ry * r11 - rx * r33 - lam * xs * r23.conj() - lam * x * r23,
        -iw * r24 + lam * (y + xs) * (r12 + r13) - lam * x * (r24 + r34),
        -iw * r34 + lam * (y + xs) * (r12 + r13) - lam * x * (r34 + r24),
    ]
}

fn flatten(m: &DensityMatrix4) -> [C64; 16] {
    let mut a = [C64::new(0.0, 0.0); 16];
    for i in 0..4 {
        for j in 0..4 {
            a[4 * i + j] = m[(i, j)];
        }
    }
    a
}

fn unflatten(a: &[C64; 16]) -> DensityMatrix4 {
    DensityMatrix4::from_fn(|i, j| a[4 * i + j])
}

fn guard(rho: &DensityMatrix4, trace0: f64, t: f64) -> Result<()> {
    let rep = rdm_physicality(rho, &Thresholds::guard());
    if !rho.iter().all(|z| z.is_finite()) {
        return Err(Error::Unphysical {
            t,
            detail: "non-finite entries".into(),
        });
    }
    let drift = (rho.trace().re - trace0).abs();
    if drift > TRACE_GUARD || rep.min_eigenvalue < EIGENVALUE_GUARD {
        return Err(Error::Unphysical {
            t,
            detail: format!(
                "trace drift {drift:e}, minimum eigenvalue {:e}, hermiticity deviation {:e}",
                rep.min_eigenvalue, rep.hermiticity_deviation
            ),
        });
    }
    Ok(())
}

fn check_rho0(rho0: &DensityMatrix4) -> Result<()> {
    let rep = rdm_physicality(rho0, &Thresholds::guard());
    if !rep.pass || (rho0.trace().re - 1.0).abs() > TRACE_GUARD {
        return Err(Error::InvalidParameter(format!(
            "initial density matrix is not physical (trace {}, min eigenvalue {:e}, hermiticity {:e})",
            rho0.trace().re,
            rep.min_eigenvalue,
            rep.hermiticity_deviation
        )));
    }
    Ok(())
}

/// RK4 integration of the master equation with the noise-free part of any
/// model's Ō (`coeffs` tabulated on the half-step grid `dt/2`).
///
/// `on_step(n, t, ρ)` sees every integration step; outputs are kept at step 0,
/// every `stride` steps and the final step. For the zeroth-order model the
/// element-wise form is integrated alongside and must agree to
/// [`CROSS_CHECK_TOLERANCE`].
pub fn integrate_master_with(
    rho0: &DensityMatrix4,
    coeffs: &Coefficients,
    dt: f64,
    t_end: f64,
    stride: usize,
    mut on_step: impl FnMut(usize, f64, &DensityMatrix4),
) -> Result<RdmSeries> {
    check_rho0(rho0)?;
    if stride == 0 {
        return Err(Error::InvalidParameter("output stride must be >= 1".into()));
    }
    let steps = step_count(dt, t_end)?;
    if (coeffs.step - 0.5 * dt).abs() > 1e-12 * dt || coeffs.len() < 2 * steps + 1 {
        return Err(Error::InvalidParameter(format!(
            "coefficients must cover [0, {t_end}] on the half-step grid {}",
            0.5 * dt
        )));
    }
    let params = coeffs.params;
    let element_track = match (coeffs.model, coeffs.track()) {
        (Model::Zeroth, Some(tr)) => Some(tr),
        _ => None,
    };
    let trace0 = rho0.trace().re;
    let mut y = flatten(rho0);
    let mut el = elements_of(rho0);
    let mut out = RdmSeries {
        times: vec![0.0],
        rho: vec![*rho0],
    };
    on_step(0, 0.0, rho0);
    for n in 0..steps {
        let k0 = 2 * n;
        y = rk4_step(&y, dt, |stage, y| {
            flatten(&master_rhs(&unflatten(y), coeffs.o_free(k0 + stage), &params))
        });
        let rho = unflatten(&y);
        let t = (n + 1) as f64 * dt;
        guard(&rho, trace0, t)?;
        if let Some(tr) = element_track {
            el = rk4_step(&el, dt, |stage, e| {
                element_rhs(e, tr.x(k0 + stage), tr.y(k0 + stage), &params)
            });
            let dev = (matrix_of(&el, trace0) - rho)
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            if dev > CROSS_CHECK_TOLERANCE {
                return Err(Error::CrossCheck(format!(
                    "matrix and element forms differ by {dev:e} at t = {t}"
                )));
            }
        }
        on_step(n + 1, t, &rho);
        if (n + 1) % stride == 0 || n + 1 == steps {
            out.times.push(t);
            out.rho.push(rho);
        }
    }
    Ok(out)
}

/// The zeroth-order master equation on `[0, t_end]` with step `dt`.
pub fn integrate_master(
    rho0: &DensityMatrix4,
    params: &ModelParams,
    dt: f64,
    t_end: f64,
    stride: usize,
) -> Result<RdmSeries> {
    let coeffs = Coefficients::from_track(integrate_zeroth_coeffs(params, 0.5 * dt, t_end)?);
    integrate_master_with(rho0, &coeffs, dt, t_end, stride, |_, _, _| {})
}

/// Largest |ρ₁ⱼ| (support on |11⟩).
pub fn excited_support(rho: &DensityMatrix4) -> f64 {
    (0..4).map(|j| rho[(0, j)].norm()).fold(0.0, f64::max)
}

fn require_zero_excited(rho0: &DensityMatrix4) -> Result<()> {
    let s = excited_support(rho0);
    if s > EXCITED_SUPPORT_TOLERANCE {
        return Err(Error::InvalidParameter(format!(
            "closed-form solution needs an initial state without |11> support (found {s:e})"
        )));
    }
    Ok(())
}

fn a_of(t: f64, params: &ModelParams) -> Result<C64> {
    if params.lambda == 0.0 {
        // X ≡ 0 without coupling
        return Ok(re(1.0));
    }
    closed_form_a(t, params)
}

/// Closed-form (ρ22, ρ33, R23, I23) at time `t`.
fn analytic_block(rho0: &DensityMatrix4, a: C64) -> (f64, f64, f64, f64) {
    let (p22, p33) = (rho0[(1, 1)].re, rho0[(2, 2)].re);
    let (r23, i23) = (rho0[(1, 2)].re, rho0[(1, 2)].im);
    let a2 = a.norm_sqr();
    let plus = 0.25 * (1.0 + a2 + 2.0 * a.re);
    let minus = 0.25 * (1.0 + a2 - 2.0 * a.re);
    let rho22 = plus * p22 + minus * p33 + 0.5 * (a2 - 1.0) * r23 + a.im * i23;
    let rho33 = plus * p33 + minus * p22 + 0.5 * (a2 - 1.0) * r23 - a.im * i23;
    let re23 = 0.25 * (a2 - 1.0) * (p22 + p33) + 0.5 * (a2 + 1.0) * r23;
    let im23 = 0.5 * a.im * (p33 - p22) + a.re * i23;
    (rho22, rho33, re23, im23)
}

/// Closed-form density matrix at `t` for an initial state without |11⟩ support.
pub fn analytic_rdm(rho0: &DensityMatrix4, t: f64, params: &ModelParams) -> Result<DensityMatrix4> {
    require_zero_excited(rho0)?;
    let a = a_of(t, params)?;
    let (rho22, rho33, re23, im23) = analytic_block(rho0, a);
    let (r24, r34) = (rho0[(1, 3)], rho0[(2, 3)]);
    let phase = C64::from_polar(0.5, -params.omega_s * t);
    let rho24 = phase * (a * (r24 + r34) + r24 - r34);
    let rho34 = phase * (a * (r34 + r24) - r24 + r34);
    let e: Elements = [
        re(0.0),
        re(0.0),
        re(0.0),
        re(0.0),
        re(rho22),
        c(re23, im23),
        re(rho33),
        rho24,
        rho34,
    ];
    Ok(matrix_of(&e, rho0.trace().re))
}

/// Closed-form concurrence 2|ρ23(t)| for an initial state without |11⟩ support.
pub fn analytic_concurrence(rho0: &DensityMatrix4, t: f64, params: &ModelParams) -> Result<f64> {
    require_zero_excited(rho0)?;
    let (_, _, re23, im23) = analytic_block(rho0, a_of(t, params)?);
    Ok(2.0 * re23.hypot(im23))
}

/// Closed-form series on `0, dt·stride, …`.
pub fn analytic_series(
    rho0: &DensityMatrix4,
    params: &ModelParams,
    dt: f64,
    t_end: f64,
    stride: usize,
) -> Result<RdmSeries> {
    let steps = step_count(dt, t_end)?;
    let times = crate::trajectory::output_times(steps, dt, stride);
    let rho = times
        .iter()
        .map(|&t| analytic_rdm(rho0, t, params))
        .collect::<Result<_>>()?;
    Ok(RdmSeries { times, rho })
}

/// How the steady state was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SteadyMethod {
    /// Closed form for states without |11⟩ support.
    ClosedForm,
    /// Read off a long master-equation integration.
    LongTimeIntegration,
}

/// Long-time limit of the density matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyStateReport {
    pub method: SteadyMethod,
    /// Singlet weight parameter: ρ22 = ρ33 = r, ρ23 = −r, ρ44 = 1 − 2r.
    pub r: f64,
    /// Oscillating coherence ρ24 = −ρ34 = x at `t_ref`.
    #[serde(serialize_with = "ser_complex")]
    pub x: C64,
    pub t_ref: f64,
    /// The limiting matrix with x evaluated at `t_ref`.
    #[serde(serialize_with = "ser_matrix")]
    pub rho_inf: DensityMatrix4,
    /// Concurrence of the limit (2r in closed form; Wootters concurrence of
    /// the final matrix for long-time integration).
    pub concurrence_inf: f64,
    /// First time after which every element of ρ, viewed in the frame rotating
    /// with H_s, changes by less than 1e−4 per unit time (None if not reached).
    pub tau_s: Option<f64>,
    /// Integration horizon used for `tau_s` and long-time readings.
    pub horizon: f64,
}

fn ser_complex<S: serde::Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

fn ser_matrix<S: serde::Serializer>(m: &DensityMatrix4, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<[f64; 2]>> = (0..4)
        .map(|i| (0..4).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    rows.serialize(s)
}

/// The limiting matrix of the zero-|11⟩ family.
pub fn final_form(r: f64, x: C64) -> DensityMatrix4 {
    let e: Elements = [re(0.0), re(0.0), re(0.0), re(0.0), re(r), re(-r), re(r), x, -x];
    matrix_of(&e, 1.0)
}

/// Steady state of `rho0`, with τ_S and (for states with |11⟩ support) the
/// limit itself taken from master integration over `[0, horizon]`.
pub fn steady_state(
    rho0: &DensityMatrix4,
    params: &ModelParams,
    t_ref: f64,
    dt: f64,
    horizon: f64,
) -> Result<SteadyStateReport> {
    let w = params.omega_s;
    // energies of the fixed basis: ω, 0, 0, −ω
    let energy = [w, 0.0, 0.0, -w];
    let rotate = |rho: &DensityMatrix4, t: f64| {
        DensityMatrix4::from_fn(|i, j| rho[(i, j)] * C64::from_polar(1.0, (energy[i] - energy[j]) * t))
    };
    let mut prev: Option<DensityMatrix4> = None;
    let mut last_fast: Option<f64> = None;
    let mut t_last = 0.0;
    let coeffs = Coefficients::from_track(integrate_zeroth_coeffs(params, 0.5 * dt, horizon)?);
    let series = integrate_master_with(rho0, &coeffs, dt, horizon, usize::MAX, |_, t, rho| {
        let rot = rotate(rho, t);
        if let Some(p) = prev {
            let rate = (rot - p).iter().map(|z| z.norm()).fold(0.0, f64::max) / dt;
            if rate >= RELAXATION_RATE {
                last_fast = Some(t);
            }
        }
        prev = Some(rot);
        t_last = t;
    })?;
    let tau_s = match last_fast {
        None => Some(0.0),
        Some(t) if t < t_last => Some(t),
        Some(_) => None,
    };
    if excited_support(rho0) <= EXCITED_SUPPORT_TOLERANCE {
        let r = 0.25 * (rho0[(1, 1)].re + rho0[(2, 2)].re - 2.0 * rho0[(1, 2)].re);
        let x = (rho0[(1, 3)] - rho0[(2, 3)]) * C64::from_polar(0.5, -w * t_ref);
        Ok(SteadyStateReport {
            method: SteadyMethod::ClosedForm,
            r,
            x,
            t_ref,
            rho_inf: final_form(r, x),
            concurrence_inf: 2.0 * r,
            tau_s,
            horizon,
        })
    } else {
        let end = *series.last();
        let r = end[(1, 1)].re;
        let x = (end[(1, 3)] - end[(2, 3)]) * C64::from_polar(0.5, -w * (t_ref - horizon));
        Ok(SteadyStateReport {
            method: SteadyMethod::LongTimeIntegration,
            r,
            x,
            t_ref,
            rho_inf: final_form(r, x),
            concurrence_inf: wootters_concurrence(&end)?.value,
            tau_s,
            horizon,
        })
    }
}

/// Where ρ11 increased under the master equation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    /// Largest single-step increase of ρ11 after `t_from`.
    pub max_increase: f64,
    /// Maximal intervals `[start, end]` on which ρ11 increased.
    pub increasing_intervals: Vec<(f64, f64)>,
    pub t_from: f64,
}

impl MonotonicityReport {
    pub fn is_monotone(&self) -> bool {
        self.increasing_intervals.is_empty()
    }
}

/// Integrate from |11⟩ and report every interval after `t_from` on which ρ11
/// grew by more than `tolerance` per step.
pub fn rho11_monotonicity_report(
    params: &ModelParams,
    dt: f64,
    t_end: f64,
    t_from: f64,
    tolerance: f64,
) -> Result<MonotonicityReport> {
    let series = integrate_master(&crate::model::InitialState::Excited.density(), params, dt, t_end, 1)?;
    let mut rep = MonotonicityReport {
        max_increase: 0.0,
        increasing_intervals: Vec::new(),
        t_from,
    };
    let mut open: Option<f64> = None;
    for (w, t) in series.rho.windows(2).zip(series.times.windows(2)) {
        let inc = w[1][(0, 0)].re - w[0][(0, 0)].re;
        let rising = t[0] >= t_from && inc > tolerance;
        if t[0] >= t_from {
            rep.max_increase = rep.max_increase.max(inc);
        }
        match (rising, open) {
            (true, None) => open = Some(t[0]),
            (false, Some(s)) => {
                rep.increasing_intervals.push((s, t[0]));
                open = None;
            }
            _ => {}
        }
    }
    if let Some(s) = open {
        rep.increasing_intervals.push((s, *series.times.last().unwrap()));
    }
    Ok(rep)
}
