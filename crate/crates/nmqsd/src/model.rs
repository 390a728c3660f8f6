//! Fixed conventions, parameter record, static operators and bath functions.
//!
//! The two-qubit basis is fixed once and for all:
//!
//! | index | state  | element     |
//! |-------|--------|-------------|
//! | 0     | \|11⟩  | ρ₁₁         |
//! | 1     | \|10⟩  | ρ₂₂         |
//! | 2     | \|01⟩  | ρ₃₃         |
//! | 3     | \|00⟩  | ρ₄₄         |
//!
//! Qubit A is the first label, and `1` is the excited state of each qubit.
//! Every other module (including the Wootters spin flip in [`crate::metrics`])
//! relies on this ordering.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = Complex64;
/// 4×4 complex operator in the fixed basis.
pub type Operator4 = Matrix4<C64>;
/// Four complex amplitudes in the fixed basis.
pub type PureState4 = Vector4<C64>;

pub const IDX_11: usize = 0;
pub const IDX_10: usize = 1;
pub const IDX_01: usize = 2;
pub const IDX_00: usize = 3;

/// Imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Physical constants of the model.
///
/// `delta` is always `omega_s - omega` and the spectral weight Γ is fixed to 1;
/// neither is ever read from input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// System frequency ω_s (defines the time unit; defaults use 1).
    pub omega_s: f64,
    /// Dimensionless coupling strength λ ≥ 0.
    pub lambda: f64,
    /// Inverse memory time γ > 0.
    pub gamma: f64,
    /// Central bath frequency Ω.
    pub omega: f64,
    /// Detuning Δ = ω_s − Ω.
    pub delta: f64,
}

/// Overall spectral weight Γ. Not tunable.
pub const SPECTRAL_WEIGHT: f64 = 1.0;

impl ModelParams {
    /// Validated constructor from (ω_s, λ, γ, Ω).
    pub fn new(omega_s: f64, lambda: f64, gamma: f64, omega: f64) -> Result<Self> {
        let p = ModelParams {
            omega_s,
            lambda,
            gamma,
            omega,
            delta: omega_s - omega,
        };
        p.validate()?;
        Ok(p)
    }

    /// Constructor from the detuning instead of the bath frequency.
    pub fn with_detuning(omega_s: f64, lambda: f64, gamma: f64, delta: f64) -> Result<Self> {
        Self::new(omega_s, lambda, gamma, omega_s - delta)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.omega_s, self.lambda, self.gamma, self.omega];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("model parameters must be finite".into()));
        }
        if self.gamma <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gamma must be > 0, got {}",
                self.gamma
            )));
        }
        if self.lambda < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "lambda must be >= 0, got {}",
                self.lambda
            )));
        }
        if self.delta != self.omega_s - self.omega {
            return Err(Error::InvalidParameter("delta must equal omega_s - Omega".into()));
        }
        Ok(())
    }

    /// Same physics with a different γ.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.omega_s, self.lambda, gamma, self.omega)
    }

    /// Same physics with a different λ.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.omega_s, lambda, self.gamma, self.omega)
    }

    /// Same ω_s and coupling with detuning Δ (Ω is recomputed).
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::with_detuning(self.omega_s, self.lambda, self.gamma, delta)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelParamsRepr {
    omega_s: f64,
    lambda: f64,
    gamma: f64,
    #[serde(rename = "Omega")]
    omega: f64,
    #[serde(default, skip_serializing)]
    delta: Option<f64>,
    #[serde(rename = "Gamma", default, skip_serializing)]
    spectral_weight: Option<f64>,
}

impl Serialize for ModelParams {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ModelParamsRepr {
            omega_s: self.omega_s,
            lambda: self.lambda,
            gamma: self.gamma,
            omega: self.omega,
            delta: None,
            spectral_weight: None,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ModelParams {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ModelParamsRepr::deserialize(d)?;
        if let Some(g) = r.spectral_weight {
            if g != SPECTRAL_WEIGHT {
                return Err(serde::de::Error::custom(format!(
                    "Gamma is fixed to 1 and cannot be set (got {g})"
                )));
            }
        }
        let p = ModelParams::new(r.omega_s, r.lambda, r.gamma, r.omega).map_err(serde::de::Error::custom)?;
        // `delta` may be given for readability but must agree with omega_s − Omega.
        if let Some(d) = r.delta {
            if (d - p.delta).abs() > 1e-12 * (1.0 + d.abs()) {
                return Err(serde::de::Error::custom(format!(
                    "delta = {d} disagrees with omega_s - Omega = {}",
                    p.delta
                )));
            }
        }
        Ok(p)
    }
}

/// Single-qubit operator acting on qubit A or B, embedded in the 4-dim space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Qubit {
    A,
    B,
}

/// σ₋ on one qubit.
pub fn sigma_minus(q: Qubit) -> Operator4 {
    let mut m = Operator4::zeros();
    match q {
        Qubit::A => {
            m[(IDX_01, IDX_11)] = re(1.0);
            m[(IDX_00, IDX_10)] = re(1.0);
        }
        Qubit::B => {
            m[(IDX_10, IDX_11)] = re(1.0);
            m[(IDX_00, IDX_01)] = re(1.0);
        }
    }
    m
}

/// σ_z on one qubit (+1 on the excited state).
pub fn sigma_z(q: Qubit) -> Operator4 {
    let d = match q {
        Qubit::A => [1.0, 1.0, -1.0, -1.0],
        Qubit::B => [1.0, -1.0, 1.0, -1.0],
    };
    Operator4::from_diagonal(&Vector4::new(re(d[0]), re(d[1]), re(d[2]), re(d[3])))
}

/// H_s = (ω_s/2)(σ_zᴬ + σ_zᴮ).
pub fn build_hamiltonian(params: &ModelParams) -> Operator4 {
    (sigma_z(Qubit::A) + sigma_z(Qubit::B)) * re(params.omega_s / 2.0)
}

/// L = σ₋ᴬ + σ₋ᴮ.
pub fn coupling_operator() -> Operator4 {
    sigma_minus(Qubit::A) + sigma_minus(Qubit::B)
}

/// K = σ_zᴬσ₋ᴮ + σ₋ᴬσ_zᴮ, the operator multiplying F2 in the O-operator.
pub fn k_operator() -> Operator4 {
    sigma_z(Qubit::A) * sigma_minus(Qubit::B) + sigma_minus(Qubit::A) * sigma_z(Qubit::B)
}

/// σ_zᴬσ₋ᴮ.
pub fn za_mb() -> Operator4 {
    sigma_z(Qubit::A) * sigma_minus(Qubit::B)
}

/// σ₋ᴬσ_zᴮ.
pub fn ma_zb() -> Operator4 {
    sigma_minus(Qubit::A) * sigma_z(Qubit::B)
}

/// σ₋ᴬσ₋ᴮ, the operator carrying the single noise channel.
pub fn double_lowering() -> Operator4 {
    sigma_minus(Qubit::A) * sigma_minus(Qubit::B)
}

/// Bath correlation α(t,s) = (γ/2) e^{−γ|t−s|} e^{−iΩ(t−s)}.
pub fn bath_correlation(t: f64, s: f64, params: &ModelParams) -> C64 {
    let tau = t - s;
    C64::from_polar(
        0.5 * params.gamma * (-params.gamma * tau.abs()).exp(),
        -params.omega * tau,
    )
}

/// Lorentzian spectral density J(ω) = (Γ/π) γ² / ((ω−Ω)² + γ²), Γ = 1.
pub fn spectral_density(omega: f64, params: &ModelParams) -> f64 {
    let g2 = params.gamma * params.gamma;
    let d = omega - params.omega;
    SPECTRAL_WEIGHT / PI * g2 / (d * d + g2)
}

/// Named initial states plus an explicit amplitude list.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    /// |11⟩
    Excited,
    /// |10⟩
    Ten,
    /// |01⟩
    One,
    /// |00⟩
    Ground,
    /// (|10⟩ − |01⟩)/√2
    Singlet,
    /// (|10⟩ + |01⟩)/√2
    Triplet,
    /// (|10⟩ + |00⟩)/√2
    TenPlusGround,
    /// (|11⟩ + |00⟩)/√2
    BellPlus,
    /// (|11⟩ − |00⟩)/√2
    BellMinus,
    /// Explicit amplitudes (normalized on use).
    Amplitudes([C64; 4]),
}

impl InitialState {
    pub const PRESETS: [&'static str; 9] = ["11", "10", "01", "00", "singlet", "triplet", "10+00", "bell+", "bell-"];

    /// Build from an explicit list `[re0, im0, re1, im1, …]` of 8 numbers.
    pub fn from_components(v: &[f64]) -> Result<Self> {
        if v.len() != 8 {
            return Err(Error::Config(format!(
                "amplitude list needs 8 numbers, got {}",
                v.len()
            )));
        }
        let a = [c(v[0], v[1]), c(v[2], v[3]), c(v[4], v[5]), c(v[6], v[7])];
        let n: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Config("amplitude list must have a finite non-zero norm".into()));
        }
        Ok(InitialState::Amplitudes(a))
    }

    /// Unit-norm state vector.
    pub fn state(&self) -> PureState4 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = match self {
            InitialState::Excited => [1.0, 0.0, 0.0, 0.0].map(re),
            InitialState::Ten => [0.0, 1.0, 0.0, 0.0].map(re),
            InitialState::One => [0.0, 0.0, 1.0, 0.0].map(re),
            InitialState::Ground => [0.0, 0.0, 0.0, 1.0].map(re),
            InitialState::Singlet => [0.0, s, -s, 0.0].map(re),
            InitialState::Triplet => [0.0, s, s, 0.0].map(re),
            InitialState::TenPlusGround => [0.0, s, 0.0, s].map(re),
            InitialState::BellPlus => [s, 0.0, 0.0, s].map(re),
            InitialState::BellMinus => [s, 0.0, 0.0, -s].map(re),
            InitialState::Amplitudes(a) => *a,
        };
        let psi = PureState4::new(v[0], v[1], v[2], v[3]);
        let n = psi.norm();
        psi / re(n)
    }

    /// Projector |ψ⟩⟨ψ| of the normalized state.
    pub fn density(&self) -> Operator4 {
        let psi = self.state();
        psi * psi.adjoint()
    }
}

impl FromStr for InitialState {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "11" => InitialState::Excited,
            "10" => InitialState::Ten,
            "01" => InitialState::One,
            "00" => InitialState::Ground,
            "singlet" => InitialState::Singlet,
            "triplet" => InitialState::Triplet,
            "10+00" => InitialState::TenPlusGround,
            "bell+" => InitialState::BellPlus,
            "bell-" | "bell−" => InitialState::BellMinus,
            other => {
                return Err(Error::Config(format!(
                    "unknown initial-state preset '{other}' (expected one of {:?} or 8 numbers)",
                    Self::PRESETS
                )))
            }
        })
    }
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            InitialState::Excited => "11",
            InitialState::Ten => "10",
            InitialState::One => "01",
            InitialState::Ground => "00",
            InitialState::Singlet => "singlet",
            InitialState::Triplet => "triplet",
            InitialState::TenPlusGround => "10+00",
            InitialState::BellPlus => "bell+",
            InitialState::BellMinus => "bell-",
            InitialState::Amplitudes(_) => "amplitudes",
        };
        f.write_str(name)
    }
}

/// ⟨ψ|A|ψ⟩ / ⟨ψ|ψ⟩.
pub fn expectation(psi: &PureState4, op: &Operator4) -> C64 {
    let n = psi.norm_squared();
    psi.dotc(&(op * psi)) / re(n)
}
