//! Entanglement and distance measures on two-qubit density matrices.

use nalgebra::{SymmetricEigen, SVD};

use crate::error::{Error, Result};
use crate::model::{re, Operator4, C64};

/// Hermiticity deviation above which an input is rejected.
pub const HERMITICITY_TOLERANCE: f64 = 1e-6;
/// Eigenvalues below this are rejected by [`fidelity`].
pub const NEGATIVITY_REJECT: f64 = -1e-6;
/// Eigenvalues below this are treated as zero inside matrix square roots.
/// They are at the rounding level of a unit-trace 4×4 eigen-solve, and their
/// square roots would otherwise inject ~1e−8 noise into the metrics.
pub const PSD_FLOOR: f64 = 1e-14;

/// A scalar measure with the eigenvalues it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricValue {
    pub value: f64,
    /// Concurrence: √μᵢ in decreasing order. Fidelity: eigenvalues of
    /// √ρ_a ρ_b √ρ_a in decreasing order (after clipping).
    pub eigenvalues: Vec<f64>,
}

/// Largest |Aᵢⱼ − conj(Aⱼᵢ)|.
pub fn hermiticity_deviation(m: &Operator4) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_hermitian(m: &Operator4, what: &str) -> Result<()> {
    let d = hermiticity_deviation(m);
    if !(d <= HERMITICITY_TOLERANCE) {
        return Err(Error::InvalidParameter(format!(
            "{what} is not Hermitian (deviation {d:e})"
        )));
    }
    Ok(())
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues descending.
pub fn hermitian_eigen(m: &Operator4) -> (Vec<f64>, Operator4) {
    let herm = (m + m.adjoint()) * re(0.5);
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Operator4::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>());
    (values, vectors)
}

/// Smallest eigenvalue of the Hermitian part.
pub fn min_eigenvalue(m: &Operator4) -> f64 {
    *hermitian_eigen(m).0.last().unwrap()
}

/// √m for Hermitian PSD `m`; eigenvalues below [`PSD_FLOOR`] (including
/// negative ones) are clipped to zero.
pub fn psd_sqrt(m: &Operator4) -> Operator4 {
    let (vals, vecs) = hermitian_eigen(m);
    let d = Operator4::from_diagonal(&nalgebra::Vector4::from_iterator(
        vals.iter().map(|&v| re(if v > PSD_FLOOR { v.sqrt() } else { 0.0 })),
    ));
    vecs * d * vecs.adjoint()
}

/// σ_y ⊗ σ_y in the fixed basis |11⟩, |10⟩, |01⟩, |00⟩ (anti-diagonal −1, 1, 1, −1).
pub fn spin_flip() -> Operator4 {
    let mut m = Operator4::zeros();
    m[(0, 3)] = re(-1.0);
    m[(1, 2)] = re(1.0);
    m[(2, 1)] = re(1.0);
    m[(3, 0)] = re(-1.0);
    m
}

/// Wootters concurrence `max(0, √μ₁ − √μ₂ − √μ₃ − √μ₄)`, with μᵢ the
/// eigenvalues of ρ ρ̃, ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y).
///
/// The √μᵢ are computed as the singular values of √ρ·√ρ̃, which avoids square
/// roots of rounding-level eigenvalues. Negative eigenvalues of ρ (Monte Carlo
/// estimates are PSD only statistically) are clipped to zero.
pub fn wootters_concurrence(rho: &Operator4) -> Result<MetricValue> {
    check_hermitian(rho, "density matrix")?;
    let sy = spin_flip();
    let s = psd_sqrt(rho);
    let s_tilde = sy * s.map(|z| z.conj()) * sy;
    let roots = singular_values_desc(&(s * s_tilde));
    let c = roots[0] - roots[1] - roots[2] - roots[3];
    Ok(MetricValue {
        value: c.clamp(0.0, 1.0),
        eigenvalues: roots,
    })
}

/// Uhlmann fidelity `Tr √(√ρ_a ρ_b √ρ_a)` (no square on the trace).
pub fn fidelity(rho_a: &Operator4, rho_b: &Operator4) -> Result<MetricValue> {
    for (m, what) in [(rho_a, "first density matrix"), (rho_b, "second density matrix")] {
        check_hermitian(m, what)?;
        let min = min_eigenvalue(m);
        if min < NEGATIVITY_REJECT {
            return Err(Error::InvalidParameter(format!(
                "{what} has eigenvalue {min:e} below {NEGATIVITY_REJECT:e}"
            )));
        }
    }
    // eigenvalues of √a b √a are the squared singular values of √a √b
    let sv = singular_values_desc(&(psd_sqrt(rho_a) * psd_sqrt(rho_b)));
    let f: f64 = sv.iter().sum();
    Ok(MetricValue {
        value: f.clamp(0.0, 1.0),
        eigenvalues: sv.iter().map(|v| v * v).collect(),
    })
}

fn singular_values_desc(m: &Operator4) -> Vec<f64> {
    let mut sv: Vec<f64> = SVD::new(*m, false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Trace as a complex number.
pub fn trace(m: &Operator4) -> C64 {
    m.trace()
}
