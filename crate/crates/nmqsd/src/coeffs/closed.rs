//! Closed forms for X(t) = F1 − F2 and A(t) = exp(−2λ∫₀^t X) of the zeroth-order
//! system, with overflow-safe complex trigonometry and an ODE fallback.

use crate::error::{Error, Result};
use crate::model::{c, ModelParams, C64, I};
use crate::ode::rk4_step;

/// Above this magnitude the closed form is replaced by direct integration.
pub const CLOSED_FORM_LIMIT: f64 = 1e6;

/// Step of the fallback Riccati integration.
const FALLBACK_STEP: f64 = 1e-3;

/// Branch-fixed constants of the closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormParams {
    /// β = √(4λ²γ − γ² + 2iγΔ + Δ²) with Im β ≥ 0.
    pub beta: C64,
    /// c = arctan((iΔ − γ)/β), principal branch.
    pub c: C64,
}

impl ClosedFormParams {
    pub fn new(params: &ModelParams) -> Result<Self> {
        if params.lambda <= 0.0 {
            return Err(Error::InvalidParameter(
                "closed forms need lambda > 0 (X ≡ 0 when lambda = 0)".into(),
            ));
        }
        let beta2 = beta_squared(params);
        let mut beta = beta2.sqrt();
        if beta.im < 0.0 {
            beta = -beta;
        }
        let cc = (c(-params.gamma, params.delta) / beta).atan();
        Ok(ClosedFormParams { beta, c: cc })
    }
}

/// 4λ²γ − γ² + 2iγΔ + Δ².
pub fn beta_squared(params: &ModelParams) -> C64 {
    let (l, g, d) = (params.lambda, params.gamma, params.delta);
    c(4.0 * l * l * g - g * g + d * d, 2.0 * g * d)
}

/// tan z without overflow for large |Im z|.
fn tan_stable(z: C64) -> C64 {
    if z.im >= 0.0 {
        let w = (I * 2.0 * z).exp();
        -I * (w - 1.0) / (w + 1.0)
    } else {
        let w = (-I * 2.0 * z).exp();
        -I * (1.0 - w) / (1.0 + w)
    }
}

/// ln cos z without overflow for large |Im z| (branch irrelevant after exp).
fn ln_cos(z: C64) -> C64 {
    if z.im >= 0.0 {
        -I * z + ((1.0 + (I * 2.0 * z).exp()) * 0.5).ln()
    } else {
        I * z + ((1.0 + (-I * 2.0 * z).exp()) * 0.5).ln()
    }
}

fn riccati_rate(p: &ModelParams, x: C64) -> C64 {
    c(-p.gamma, p.delta) * x + 2.0 * p.lambda * x * x + 0.5 * p.lambda * p.gamma
}

/// X(t) by RK4 integration of Ẋ = (iΔ − γ)X + 2λX² + λγ/2, X(0) = 0.
pub fn riccati_x(t: f64, params: &ModelParams) -> C64 {
    let n = (t / FALLBACK_STEP).ceil().max(1.0) as usize;
    let h = t / n as f64;
    let mut y = [C64::new(0.0, 0.0)];
    for _ in 0..n {
        y = rk4_step(&y, h, |_, y| [riccati_rate(params, y[0])]);
    }
    y[0]
}

/// The closed form without fallback; `None` if non-finite or beyond the limit.
pub fn closed_form_x_raw(t: f64, params: &ModelParams, cf: &ClosedFormParams) -> Option<C64> {
    let z = cf.beta * (0.5 * t) + cf.c;
    let x = (c(params.gamma, -params.delta) + cf.beta * tan_stable(z)) / (4.0 * params.lambda);
    (x.is_finite() && x.norm() <= CLOSED_FORM_LIMIT).then_some(x)
}

/// X(t) = [γ − iΔ + β tan(βt/2 + c)]/(4λ), falling back to direct Riccati
/// integration when the closed form is unusable.
pub fn closed_form_x(t: f64, params: &ModelParams) -> Result<C64> {
    let cf = ClosedFormParams::new(params)?;
    Ok(closed_form_x_raw(t, params, &cf).unwrap_or_else(|| riccati_x(t, params)))
}

/// A(t) = exp(−2λ∫₀^t X) = e^{−γt/2} e^{iΔt/2} cos(βt/2 + c)/cos c.
///
/// Falls back to integrating X and its integral together when the closed
/// form is not finite.
pub fn closed_form_a(t: f64, params: &ModelParams) -> Result<C64> {
    let cf = ClosedFormParams::new(params)?;
    let z = cf.beta * (0.5 * t) + cf.c;
    let log_a = c(-0.5 * params.gamma * t, 0.5 * params.delta * t) + ln_cos(z) - ln_cos(cf.c);
    let a = log_a.exp();
    if a.is_finite() && a.norm() <= CLOSED_FORM_LIMIT {
        return Ok(a);
    }
    let n = (t / FALLBACK_STEP).ceil().max(1.0) as usize;
    let h = t / n as f64;
    let mut y = [C64::new(0.0, 0.0); 2];
    for _ in 0..n {
        y = rk4_step(&y, h, |_, y| [riccati_rate(params, y[0]), y[0]]);
    }
    Ok((y[1] * (-2.0 * params.lambda)).exp())
}

/// Long-time limit (γ − iΔ + iβ)/(4λ) of X.
pub fn steady_x(params: &ModelParams) -> Result<C64> {
    let cf = ClosedFormParams::new(params)?;
    Ok((c(params.gamma, -params.delta) + I * cf.beta) / (4.0 * params.lambda))
}
