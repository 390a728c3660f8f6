//! O-operator coefficients: exact and zeroth-order tracks, the weak-coupling
//! hierarchy, closed forms, and assembly of Ō = ∫α Ô.
//!
//! In every model Ō splits into a noise-free part and at most one noise
//! channel along σ₋ᴬσ₋ᴮ whose coefficient `J(t)` is carried by the trajectory
//! as an auxiliary ODE:
//!
//! ```text
//! Ō(t) = Ō₀(t) + weight · J(t) · σ₋ᴬσ₋ᴮ
//! dJ/dt = κ(t) J + source(t) · z̃*_t + λ ⟨L†⟩_t · girsanov(t)
//! ```
//!
//! The last term is present only in the nonlinear (shifted-noise) equation.

pub mod closed;
pub mod track;
pub mod weak;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use closed::{closed_form_a, closed_form_x, steady_x, ClosedFormParams};
pub use track::{
    f3_bar_identity_residual, f3_kernel, integrate_exact_coeffs, integrate_zeroth_coeffs, truncate_zeroth, CoeffTrack,
    TrackMode,
};
pub use weak::{integrate_weak_coupling, WeakCouplingTrack, WeakOrder};

use crate::error::{Error, Result};
use crate::model::{
    c, coupling_operator, double_lowering, k_operator, ma_zb, re, sigma_minus, za_mb, ModelParams, Operator4, Qubit,
    C64, I,
};

/// Choice of O-operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Model {
    Exact,
    Zeroth,
    Weak(WeakOrder),
}

impl Model {
    pub const ALL: [Model; 5] = [
        Model::Exact,
        Model::Zeroth,
        Model::Weak(WeakOrder::First),
        Model::Weak(WeakOrder::Third),
        Model::Weak(WeakOrder::Fifth),
    ];
}

impl FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "exact" => Model::Exact,
            "zeroth" => Model::Zeroth,
            "weak1" => Model::Weak(WeakOrder::First),
            "weak3" => Model::Weak(WeakOrder::Third),
            "weak5" => Model::Weak(WeakOrder::Fifth),
            other => {
                return Err(Error::Config(format!(
                    "invalid model '{other}' (expected exact, zeroth, weak1, weak3 or weak5)"
                )))
            }
        })
    }
}

impl TryFrom<String> for Model {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse().map_err(|e| match e {
            Error::Config(msg) => msg,
            other => other.to_string(),
        })
    }
}

impl From<Model> for String {
    fn from(m: Model) -> String {
        m.to_string()
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Exact => f.write_str("exact"),
            Model::Zeroth => f.write_str("zeroth"),
            Model::Weak(o) => write!(f, "weak{}", o.number()),
        }
    }
}

/// The noise channel of Ō at one grid time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseChannel {
    /// κ(t): homogeneous rate of J.
    pub kappa: C64,
    /// Coefficient of z̃*_t in dJ/dt.
    pub source: C64,
    /// Coefficient of λ⟨L†⟩_t in dJ/dt (nonlinear equation only).
    pub girsanov: C64,
    /// Factor multiplying J in Ō (1 for the exact model, λ⁴ for weak order 5).
    pub weight: C64,
}

/// Raw coefficient data behind [`Coefficients`].
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientSource {
    Track(CoeffTrack),
    Weak(Box<WeakCouplingTrack>),
}

/// Coefficients of one model on the grid `k·step`, with Ō₀ and the noise
/// channel precomputed per grid point for fast trajectory stepping.
#[derive(Debug, Clone)]
pub struct Coefficients {
    pub model: Model,
    pub params: ModelParams,
    pub step: f64,
    pub source: CoefficientSource,
    o_free: Vec<Operator4>,
    channel: Option<Vec<NoiseChannel>>,
}

impl Coefficients {
    /// Integrate the coefficients of `model` on `[0, t_end]` with grid `step`.
    pub fn build(model: Model, params: &ModelParams, step: f64, t_end: f64) -> Result<Self> {
        let source = match model {
            Model::Exact => CoefficientSource::Track(integrate_exact_coeffs(params, step, t_end)?),
            Model::Zeroth => CoefficientSource::Track(integrate_zeroth_coeffs(params, step, t_end)?),
            Model::Weak(order) => {
                CoefficientSource::Weak(Box::new(integrate_weak_coupling(params, order, step, t_end)?))
            }
        };
        Ok(Self::from_source(model, source))
    }

    /// Wrap an existing track (the model is implied by its mode).
    pub fn from_track(track: CoeffTrack) -> Self {
        let model = match track.mode {
            TrackMode::Exact => Model::Exact,
            TrackMode::ZerothOrder => Model::Zeroth,
        };
        Self::from_source(model, CoefficientSource::Track(track))
    }

    /// Wrap an existing weak-coupling track.
    pub fn from_weak(track: WeakCouplingTrack) -> Self {
        Self::from_source(Model::Weak(track.order), CoefficientSource::Weak(Box::new(track)))
    }

    fn from_source(model: Model, source: CoefficientSource) -> Self {
        let (params, step, len) = match &source {
            CoefficientSource::Track(t) => (t.params, t.step, t.len()),
            CoefficientSource::Weak(w) => (w.params, w.step, w.len()),
        };
        let l = coupling_operator();
        let k_op = k_operator();
        let lam = params.lambda;
        let (o_free, channel): (Vec<Operator4>, Option<Vec<NoiseChannel>>) = match &source {
            CoefficientSource::Track(t) => {
                let o = (0..len).map(|k| l * t.f1[k] + k_op * t.f2[k]).collect();
                let ch = (t.mode == TrackMode::Exact).then(|| {
                    let base = c(-params.gamma, 2.0 * params.omega_s - params.omega);
                    (0..len)
                        .map(|k| NoiseChannel {
                            kappa: base + t.f1[k] * (4.0 * lam),
                            source: t.f2[k] * (4.0 * lam),
                            girsanov: I * t.f3bar[k],
                            weight: re(1.0),
                        })
                        .collect()
                });
                (o, ch)
            }
            CoefficientSource::Weak(w) => {
                let (sa, sb, zamb, mazb) = (sigma_minus(Qubit::A), sigma_minus(Qubit::B), za_mb(), ma_zb());
                let o = (0..len)
                    .map(|k| {
                        let mut o = l * (w.f1[k] * lam);
                        if w.order >= WeakOrder::Third {
                            let l3 = lam.powi(3);
                            o += (sa * w.f3a[k] + sb * w.f3b[k] + zamb * w.g3a[k] + mazb * w.g3b[k]) * re(l3);
                        }
                        if w.order == WeakOrder::Fifth {
                            let l5 = lam.powi(5);
                            o += (sa * w.f5a[k] + sb * w.f5b[k] + zamb * w.g5a[k] + mazb * w.g5b[k]) * re(l5);
                        }
                        o
                    })
                    .collect();
                let ch = (w.order == WeakOrder::Fifth).then(|| {
                    let kappa = -weak::kernel_decay(&params) + c(0.0, 2.0 * params.omega_s);
                    (0..len)
                        .map(|k| NoiseChannel {
                            kappa,
                            source: (w.g3a[k] + w.g3b[k]) * 2.0,
                            girsanov: w.h4bar[k],
                            weight: re(lam.powi(4)),
                        })
                        .collect()
                });
                (o, ch)
            }
        };
        Coefficients {
            model,
            params,
            step,
            source,
            o_free,
            channel,
        }
    }

    pub fn len(&self) -> usize {
        self.o_free.len()
    }

    pub fn is_empty(&self) -> bool {
        self.o_free.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        self.step * (self.len() - 1) as f64
    }

    /// Noise-free part Ō₀ at grid index `k`.
    #[inline]
    pub fn o_free(&self, k: usize) -> &Operator4 {
        &self.o_free[k]
    }

    /// Noise channel at grid index `k`, if the model has one.
    #[inline]
    pub fn channel(&self, k: usize) -> Option<&NoiseChannel> {
        self.channel.as_ref().map(|c| &c[k])
    }

    /// Whether the model carries a noise term at all.
    pub fn has_noise_channel(&self) -> bool {
        self.channel.is_some()
    }

    /// The underlying exact/zeroth track, if any.
    pub fn track(&self) -> Option<&CoeffTrack> {
        match &self.source {
            CoefficientSource::Track(t) => Some(t),
            CoefficientSource::Weak(_) => None,
        }
    }

    /// The underlying weak-coupling track, if any.
    pub fn weak(&self) -> Option<&WeakCouplingTrack> {
        match &self.source {
            CoefficientSource::Weak(w) => Some(w),
            CoefficientSource::Track(_) => None,
        }
    }

    /// Ō at grid index `k` for a given noise-term value `j`.
    pub fn o_bar_at(&self, k: usize, j: C64) -> Operator4 {
        match self.channel(k) {
            Some(ch) => self.o_free[k] + double_lowering() * (ch.weight * j),
            None => self.o_free[k],
        }
    }
}

/// Ō(t) for the model of `coeffs`: `F1·L + F2·K + J·σ₋ᴬσ₋ᴮ` (exact),
/// `F1·L + F2·K` (zeroth), or the λ-expansion (weak; λ⁴·J·σ₋ᴬσ₋ᴮ at order 5).
/// `j_noise` is ignored by models without a noise channel.
pub fn assemble_o_bar(coeffs: &Coefficients, j_noise: C64, t: f64) -> Result<Operator4> {
    let k = track::grid_index(t, coeffs.step, coeffs.len())?;
    Ok(coeffs.o_bar_at(k, j_noise))
}
