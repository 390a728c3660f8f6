//! Single stochastic realizations of the linear and nonlinear NMQSD equations.
//!
//! Linear equation (raw noise z*_t, free norm):
//!
//! ```text
//! ∂ₜψ = −iH_s ψ + λ z*_t L ψ − λ L† Ō(t, z*) ψ
//! ```
//!
//! Nonlinear equation (shifted noise z̃*_t = z*_t + M(t), unit norm):
//!
//! ```text
//! ∂ₜψ = −iH_s ψ + λ z̃*_t (L − ⟨L⟩)ψ − λ [(L† − ⟨L†⟩)Ō − ⟨(L† − ⟨L†⟩)Ō⟩] ψ
//! ```
//!
//! The noise is colored and smooth between grid points, so each realization is
//! a pathwise ODE. It is advanced with a midpoint scheme whose stages use the
//! noise and coefficients at `t` and `t + dt/2`; both live on the half-step
//! grid. The memory `M` of the shift and the noise coefficient `J` of Ō are
//! integrated together with ψ.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::coeffs::{Coefficients, NoiseChannel};
use crate::error::{Error, Result};
use crate::model::{build_hamiltonian, coupling_operator, re, Operator4, PureState4, C64, I};
use crate::noise::{NoisePath, ShiftAccumulator};

/// Which form of the stochastic equation is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unraveling {
    /// Norm-preserving equation with shifted noise (the default estimator).
    #[default]
    Nonlinear,
    /// Linear equation with raw noise; ρ is the mean of unnormalized projectors.
    Linear,
}

/// Amplitude magnitude treated as overflow in the linear equation.
const OVERFLOW_LIMIT: f64 = 1e150;

/// State of one realization at a grid time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryState {
    /// Amplitudes (unit norm in nonlinear mode).
    pub psi: PureState4,
    /// Memory part M(t) of the shifted noise (stays 0 in linear mode).
    pub m_shift: C64,
    /// Coefficient J(t) of the σ₋ᴬσ₋ᴮ noise term of Ō (0 for noise-free models).
    pub j_noise: C64,
    /// Current time `step·dt`.
    pub t: f64,
    /// Number of steps taken.
    pub step: usize,
    /// ⟨L⟩ at the current state.
    pub l_expect: C64,
    /// ⟨L†⟩ = conj(⟨L⟩) at the current state.
    pub l_dag_expect: C64,
}

impl TrajectoryState {
    /// State at t = 0 with empty memory.
    pub fn new(psi0: PureState4) -> Self {
        let mut s = TrajectoryState {
            psi: psi0,
            m_shift: C64::new(0.0, 0.0),
            j_noise: C64::new(0.0, 0.0),
            t: 0.0,
            step: 0,
            l_expect: C64::new(0.0, 0.0),
            l_dag_expect: C64::new(0.0, 0.0),
        };
        s.refresh_expectations();
        s
    }

    fn refresh_expectations(&mut self) {
        let n2 = self.psi.norm_squared();
        self.l_expect = self.psi.dotc(&(coupling_operator() * self.psi)) / re(n2);
        self.l_dag_expect = self.l_expect.conj();
    }

    /// The shift accumulator view of `m_shift`.
    pub fn shift(&self) -> ShiftAccumulator {
        ShiftAccumulator {
            m: self.m_shift,
            t: self.t,
        }
    }

    /// |ψ⟩⟨ψ| (unnormalized in linear mode).
    pub fn projector(&self) -> Operator4 {
        self.psi * self.psi.adjoint()
    }
}

/// Right-hand side of the augmented system (ψ, M, J) for one model.
struct Drift<'a> {
    coeffs: &'a Coefficients,
    h: Operator4,
    l: Operator4,
    l_dag: Operator4,
    lambda: f64,
    unraveling: Unraveling,
}

#[derive(Clone, Copy)]
struct Aug {
    psi: PureState4,
    m: C64,
    j: C64,
}

impl<'a> Drift<'a> {
    fn new(coeffs: &'a Coefficients, unraveling: Unraveling) -> Self {
        let l = coupling_operator();
        Drift {
            coeffs,
            h: build_hamiltonian(&coeffs.params),
            l,
            l_dag: l.adjoint(),
            lambda: coeffs.params.lambda,
            unraveling,
        }
    }

    /// Derivative at half-step index `k` with raw noise `z`.
    #[inline]
    fn eval(&self, k: usize, z: C64, y: &Aug) -> Aug {
        let lam = self.lambda;
        let psi = &y.psi;
        let hpsi = self.h * psi;
        let lpsi = self.l * psi;
        let o = self.coeffs.o_bar_at(k, y.j);
        let opsi = o * psi;
        let channel: Option<&NoiseChannel> = self.coeffs.channel(k);
        match self.unraveling {
            Unraveling::Linear => {
                let dpsi = -(hpsi * I) + lpsi * (z * lam) - self.l_dag * opsi * re(lam);
                let dj = channel.map_or(C64::new(0.0, 0.0), |ch| ch.kappa * y.j + ch.source * z);
                Aug {
                    psi: dpsi,
                    m: C64::new(0.0, 0.0),
                    j: dj,
                }
            }
            Unraveling::Nonlinear => {
                let n2 = re(psi.norm_squared());
                let l_exp = psi.dotc(&lpsi) / n2;
                let ldag_exp = l_exp.conj();
                let zt = z + y.m;
                let t1 = self.l_dag * opsi - opsi * ldag_exp;
                let t1_exp = psi.dotc(&t1) / n2;
                let dpsi = -(hpsi * I) + (lpsi - psi * l_exp) * (zt * lam) - (t1 - psi * t1_exp) * re(lam);
                let dm = ShiftAccumulator::rate(y.m, ldag_exp, &self.coeffs.params);
                let dj = channel.map_or(C64::new(0.0, 0.0), |ch| {
                    ch.kappa * y.j + ch.source * zt + ch.girsanov * ldag_exp * lam
                });
                Aug {
                    psi: dpsi,
                    m: dm,
                    j: dj,
                }
            }
        }
    }

    fn step(&self, state: &TrajectoryState, noise: &NoisePath, dt: f64) -> Result<TrajectoryState> {
        let n = state.step;
        let k0 = 2 * n;
        let y0 = Aug {
            psi: state.psi,
            m: state.m_shift,
            j: state.j_noise,
        };
        let d1 = self.eval(k0, noise.at(k0), &y0);
        let h2 = 0.5 * dt;
        let ymid = Aug {
            psi: y0.psi + d1.psi * re(h2),
            m: y0.m + d1.m * h2,
            j: y0.j + d1.j * h2,
        };
        let d2 = self.eval(k0 + 1, noise.at(k0 + 1), &ymid);
        let mut psi = y0.psi + d2.psi * re(dt);
        let m = y0.m + d2.m * dt;
        let j = y0.j + d2.j * dt;

        let abort = |reason: String| Error::TrajectoryAborted {
            traj_index: noise.traj_index,
            step: n + 1,
            reason,
        };
        let norm = psi.norm();
        if !norm.is_finite() || !m.is_finite() || !j.is_finite() {
            return Err(abort("non-finite amplitudes".into()));
        }
        match self.unraveling {
            Unraveling::Nonlinear => {
                if norm == 0.0 {
                    return Err(abort("state vector vanished".into()));
                }
                psi /= re(norm);
            }
            Unraveling::Linear => {
                if norm > OVERFLOW_LIMIT {
                    return Err(abort(format!("norm overflow ({norm:e})")));
                }
            }
        }
        let mut next = TrajectoryState {
            psi,
            m_shift: m,
            j_noise: j,
            t: (n + 1) as f64 * dt,
            step: n + 1,
            l_expect: C64::new(0.0, 0.0),
            l_dag_expect: C64::new(0.0, 0.0),
        };
        next.refresh_expectations();
        Ok(next)
    }
}

fn check_grids(coeffs: &Coefficients, noise: &NoisePath, dt: f64, steps: usize) -> Result<()> {
    if (noise.dt - dt).abs() > 1e-12 * dt {
        return Err(Error::InvalidParameter(format!(
            "noise path step {} does not match dt {dt}",
            noise.dt
        )));
    }
    if (coeffs.step - 0.5 * dt).abs() > 1e-12 * dt {
        return Err(Error::InvalidParameter(format!(
            "coefficients must be tabulated on the half-step grid dt/2 = {}, got {}",
            0.5 * dt,
            coeffs.step
        )));
    }
    if noise.steps() < steps || coeffs.len() < 2 * steps + 1 {
        return Err(Error::InvalidParameter(format!(
            "noise ({} steps) or coefficients ({} half steps) do not cover {steps} steps",
            noise.steps(),
            coeffs.len().saturating_sub(1)
        )));
    }
    Ok(())
}

fn single_step(
    state: &TrajectoryState,
    noise: &NoisePath,
    coeffs: &Coefficients,
    dt: f64,
    unraveling: Unraveling,
) -> Result<TrajectoryState> {
    check_grids(coeffs, noise, dt, state.step + 1)?;
    Drift::new(coeffs, unraveling).step(state, noise, dt)
}

/// Advance the nonlinear equation by one step of size `dt`.
///
/// `coeffs` must be tabulated with step `dt/2`; `noise` is the raw path whose
/// shifted value is formed internally from `state.m_shift`.
pub fn step_nonlinear(
    state: &TrajectoryState,
    noise: &NoisePath,
    coeffs: &Coefficients,
    dt: f64,
) -> Result<TrajectoryState> {
    single_step(state, noise, coeffs, dt, Unraveling::Nonlinear)
}

/// Advance the linear equation by one step of size `dt` (no shift, no
/// renormalization).
pub fn step_linear(
    state: &TrajectoryState,
    noise: &NoisePath,
    coeffs: &Coefficients,
    dt: f64,
) -> Result<TrajectoryState> {
    single_step(state, noise, coeffs, dt, Unraveling::Linear)
}

/// Propagate over the whole noise path, calling `on_output` at step 0, at every
/// multiple of `stride`, and at the final step.
pub fn propagate(
    psi0: PureState4,
    coeffs: &Coefficients,
    noise: &NoisePath,
    unraveling: Unraveling,
    stride: usize,
    mut on_output: impl FnMut(&TrajectoryState),
) -> Result<TrajectoryState> {
    if stride == 0 {
        return Err(Error::InvalidParameter("output stride must be >= 1".into()));
    }
    let steps = noise.steps();
    let dt = noise.dt;
    check_grids(coeffs, noise, dt, steps)?;
    let drift = Drift::new(coeffs, unraveling);
    let mut state = TrajectoryState::new(psi0);
    on_output(&state);
    for n in 0..steps {
        state = drift.step(&state, noise, dt)?;
        if (n + 1) % stride == 0 || n + 1 == steps {
            on_output(&state);
        }
    }
    Ok(state)
}

/// Output times of [`propagate`] for `steps` steps of size `dt`.
pub fn output_times(steps: usize, dt: f64, stride: usize) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..=steps).step_by(stride.max(1)).collect();
    if *idx.last().unwrap() != steps {
        idx.push(steps);
    }
    idx.into_iter().map(|n| n as f64 * dt).collect()
}

/// Recorded realization.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub unraveling: Unraveling,
    pub times: Vec<f64>,
    pub states: Vec<TrajectoryState>,
}

/// Propagate and keep the states at the output times.
pub fn run_trajectory(
    psi0: PureState4,
    coeffs: &Coefficients,
    noise: &NoisePath,
    unraveling: Unraveling,
    stride: usize,
) -> Result<TrajectoryRecord> {
    let mut states = Vec::new();
    propagate(psi0, coeffs, noise, unraveling, stride, |s| states.push(*s))?;
    Ok(TrajectoryRecord {
        unraveling,
        times: states.iter().map(|s| s.t).collect(),
        states,
    })
}

impl TrajectoryRecord {
    /// CSV with columns `t`, real/imaginary parts of the four amplitudes, `norm`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string()];
        for lbl in ["11", "10", "01", "00"] {
            header.push(format!("re_psi_{lbl}"));
            header.push(format!("im_psi_{lbl}"));
        }
        header.push("norm".into());
        wr.write_record(&header)?;
        for s in &self.states {
            let mut row = vec![s.t.to_string()];
            for a in s.psi.iter() {
                row.push(a.re.to_string());
                row.push(a.im.to_string());
            }
            row.push(s.psi.norm().to_string());
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }
}
