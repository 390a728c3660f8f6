//! Exact and zeroth-order coefficient tracks F1, F2, F̄3.

use std::io::Write;

use crate::error::{Error, Result};
use crate::model::{bath_correlation, c, ModelParams, C64, I};
use crate::noise::step_count;
use crate::ode::{rk4_step, trapezoid};

/// Coefficients whose magnitude signals the breakdown of the closed system.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// Which coefficient system a [`CoeffTrack`] integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackMode {
    /// Full system with the F̄3 feedback.
    Exact,
    /// F̄3 forced to zero (noise term dropped).
    ZerothOrder,
}

/// F1, F2, F̄3 on the uniform grid `t_k = k·step`, `k = 0, …, n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTrack {
    pub params: ModelParams,
    pub mode: TrackMode,
    pub step: f64,
    pub f1: Vec<C64>,
    pub f2: Vec<C64>,
    pub f3bar: Vec<C64>,
}

fn rates(p: &ModelParams, y: &[C64; 3], exact: bool) -> [C64; 3] {
    let [f1, f2, f3] = *y;
    let lam = p.lambda;
    let damp = c(-p.gamma, p.delta);
    let feedback = if exact {
        I * (0.5 * lam) * f3
    } else {
        C64::new(0.0, 0.0)
    };
    let d1 = c(0.5 * lam * p.gamma, 0.0) + damp * f1 + lam * f1 * f1 + 3.0 * lam * f2 * f2 - feedback;
    let d2 = damp * f2 - lam * f1 * f1 + 4.0 * lam * f1 * f2 + lam * f2 * f2 - feedback;
    let d3 = if exact {
        damp * 2.0 * f3 + 4.0 * lam * f1 * f3 - I * (2.0 * p.gamma * lam) * f2
    } else {
        C64::new(0.0, 0.0)
    };
    [d1, d2, d3]
}

fn integrate(params: &ModelParams, step: f64, t_end: f64, mode: TrackMode) -> Result<CoeffTrack> {
    params.validate()?;
    let n = step_count(step, t_end)?;
    let exact = mode == TrackMode::Exact;
    let mut f1 = Vec::with_capacity(n + 1);
    let mut f2 = Vec::with_capacity(n + 1);
    let mut f3bar = Vec::with_capacity(n + 1);
    let mut y = [C64::new(0.0, 0.0); 3];
    for k in 0..=n {
        if k > 0 {
            y = rk4_step(&y, step, |_, y| rates(params, y, exact));
        }
        for (name, v) in ["F1", "F2", "F3bar"].iter().zip(y.iter()) {
            if !v.is_finite() || v.norm() > DIVERGENCE_LIMIT {
                return Err(Error::Divergence {
                    name,
                    t: k as f64 * step,
                    limit: DIVERGENCE_LIMIT,
                });
            }
        }
        f1.push(y[0]);
        f2.push(y[1]);
        f3bar.push(y[2]);
    }
    Ok(CoeffTrack {
        params: *params,
        mode,
        step,
        f1,
        f2,
        f3bar,
    })
}

/// RK4 integration of the full F1/F2/F̄3 system on `[0, t_end]`.
pub fn integrate_exact_coeffs(params: &ModelParams, step: f64, t_end: f64) -> Result<CoeffTrack> {
    integrate(params, step, t_end, TrackMode::Exact)
}

/// RK4 integration of the F1/F2 system with F̄3 ≡ 0.
pub fn integrate_zeroth_coeffs(params: &ModelParams, step: f64, t_end: f64) -> Result<CoeffTrack> {
    integrate(params, step, t_end, TrackMode::ZerothOrder)
}

/// Re-integrate a track's parameter set without the F̄3 feedback.
///
/// This is a fresh integration rather than zeroing F̄3 after the fact, because
/// F̄3 feeds back into F1 and F2.
pub fn truncate_zeroth(track: &CoeffTrack) -> Result<CoeffTrack> {
    integrate_zeroth_coeffs(&track.params, track.step, track.t_end())
}

impl CoeffTrack {
    pub fn len(&self) -> usize {
        self.f1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f1.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        self.step * (self.len() - 1) as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        self.step * k as f64
    }

    /// X = F1 − F2.
    pub fn x(&self, k: usize) -> C64 {
        self.f1[k] - self.f2[k]
    }

    /// Y = F1 + F2.
    pub fn y(&self, k: usize) -> C64 {
        self.f1[k] + self.f2[k]
    }

    /// Grid index of `t`, rejecting times off the grid or outside it.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        grid_index(t, self.step, self.len())
    }

    /// CSV with columns `t, re/im` of F1, F2, F̄3.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["t", "re_F1", "im_F1", "re_F2", "im_F2", "re_F3bar", "im_F3bar"])?;
        for k in 0..self.len() {
            let row = [
                self.time(k),
                self.f1[k].re,
                self.f1[k].im,
                self.f2[k].re,
                self.f2[k].im,
                self.f3bar[k].re,
                self.f3bar[k].im,
            ];
            wr.write_record(row.iter().map(|x| x.to_string()))?;
        }
        wr.flush()?;
        Ok(())
    }
}

pub(crate) fn grid_index(t: f64, step: f64, len: usize) -> Result<usize> {
    let x = t / step;
    let k = x.round();
    if !(k >= 0.0) || (x - k).abs() > 1e-9 * x.abs().max(1.0) || k as usize >= len {
        return Err(Error::InvalidParameter(format!(
            "t={t} is outside the coefficient grid (step {step}, {len} points)"
        )));
    }
    Ok(k as usize)
}

/// Noise kernel F3(t,v) = −4iλF2(v) exp ∫_v^t (−γ + 2iω_s − iΩ + 4λF1(s)) ds.
///
/// `t` and `v` must lie on the track grid; the exponent is integrated with
/// the trapezoidal rule on the grid.
pub fn f3_kernel(t: f64, v: f64, track: &CoeffTrack, params: &ModelParams) -> Result<C64> {
    if v > t {
        return Err(Error::InvalidParameter(format!(
            "f3_kernel needs v <= t, got v={v}, t={t}"
        )));
    }
    let kt = track.index_of(t)?;
    let kv = track.index_of(v)?;
    let lam = params.lambda;
    let base = c(-params.gamma, 2.0 * params.omega_s - params.omega);
    let exponent = base * (t - v) + trapezoid((kv..kt + 1).map(|k| track.f1[k] * (4.0 * lam)), track.step);
    Ok(-I * (4.0 * lam) * track.f2[kv] * exponent.exp())
}

/// Largest |F̄3(t) − ∫₀^t α(t,v) F3(t,v) dv| over the grid, with both the
/// exponent and the convolution evaluated by the trapezoidal rule.
///
/// Diagnostic for the relation between the ODE variable F̄3 and the kernel.
pub fn f3_bar_identity_residual(track: &CoeffTrack) -> f64 {
    let p = &track.params;
    let lam = p.lambda;
    let base = c(-p.gamma, 2.0 * p.omega_s - p.omega);
    let h = track.step;
    // cumulative ∫₀^t 4λF1 on the grid
    let mut cum = vec![C64::new(0.0, 0.0); track.len()];
    for k in 1..track.len() {
        cum[k] = cum[k - 1] + (track.f1[k - 1] + track.f1[k]) * (2.0 * lam * h);
    }
    let mut worst: f64 = 0.0;
    for kt in 0..track.len() {
        let t = track.time(kt);
        let conv = trapezoid(
            (0..kt + 1).map(|kv| {
                let v = track.time(kv);
                let kern = -I * (4.0 * lam) * track.f2[kv] * (base * (t - v) + cum[kt] - cum[kv]).exp();
                bath_correlation(t, v, p) * kern
            }),
            h,
        );
        worst = worst.max((track.f3bar[kt] - conv).norm());
    }
    worst
}
