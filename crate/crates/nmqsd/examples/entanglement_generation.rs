//! Entanglement generated from the product state |11⟩ for several memory
//! rates γ: peak transient concurrence of the exact ensemble and of the
//! zeroth-order master equation.
//!
//! ```text
//! cargo run --release --example entanglement_generation -- 4000
//! ```

use nmqsd::coeffs::Model;
use nmqsd::deterministic::integrate_master;
use nmqsd::ensemble::run_ensemble;
use nmqsd::model::{InitialState, ModelParams};

fn peak(times: &[f64], c: &[f64]) -> (f64, f64) {
    times
        .iter()
        .zip(c)
        .fold((0.0, 0.0), |best, (&t, &v)| if v > best.1 { (t, v) } else { best })
}

fn main() -> nmqsd::Result<()> {
    let n_traj: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let (dt, t_end, stride) = (0.01, 8.0, 10);
    println!("{:>5} {:>22} {:>22}", "γ", "exact peak (t, C)", "zeroth master (t, C)");
    for gamma in [0.2, 0.5, 0.8, 1.1] {
        let p = ModelParams::with_detuning(1.0, 1.0, gamma, 1.0)?;
        let est = run_ensemble(
            InitialState::Excited.state(),
            &p,
            Model::Exact,
            n_traj,
            5,
            dt,
            t_end,
            stride,
        )?;
        let master = integrate_master(&InitialState::Excited.density(), &p, dt, t_end, stride)?;
        let (te, ce) = peak(&est.grid, &est.concurrence()?);
        let (tm, cm) = peak(&master.times, &master.concurrence()?);
        println!("{gamma:>5.1} {te:>10.1} {ce:>11.4} {tm:>10.1} {cm:>11.4}");
    }
    Ok(())
}
