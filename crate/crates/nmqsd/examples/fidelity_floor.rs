//! Fidelity between the exact NMQSD ensemble and the zeroth-order master
//! equation from |11⟩ (λ = 1, γ = 0.5, Δ = 1), with a Monte Carlo band.
//!
//! ```text
//! cargo run --release --example fidelity_floor -- 10000
//! ```

use nmqsd::cli::fidelity_with_band;
use nmqsd::coeffs::Model;
use nmqsd::deterministic::integrate_master;
use nmqsd::ensemble::run_ensemble;
use nmqsd::model::{InitialState, ModelParams};

fn main() -> nmqsd::Result<()> {
    let n_traj: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let p = ModelParams::with_detuning(1.0, 1.0, 0.5, 1.0)?;
    let (dt, t_end, stride) = (0.01, 10.0, 25);
    let est = run_ensemble(
        InitialState::Excited.state(),
        &p,
        Model::Exact,
        n_traj,
        3,
        dt,
        t_end,
        stride,
    )?;
    let reference = integrate_master(&InitialState::Excited.density(), &p, dt, t_end, stride)?;
    let points = fidelity_with_band(&est, &reference.rho, 3)?;
    println!("{:>5} {:>9} {:>20}", "t", "F", "3σ band");
    for pt in &points {
        println!(
            "{:>5.2} {:>9.5} [{:.5}, {:.5}]",
            pt.t, pt.fidelity, pt.band_lo, pt.band_hi
        );
    }
    let min = points
        .iter()
        .min_by(|a, b| a.fidelity.total_cmp(&b.fidelity))
        .expect("non-empty");
    println!(
        "\nlowest fidelity {:.4} at t = {:.2} ({n_traj} trajectories)",
        min.fidelity, min.t
    );
    Ok(())
}
