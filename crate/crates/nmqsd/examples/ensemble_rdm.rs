//! Monte Carlo estimate of the reduced density matrix from |10⟩ with standard
//! errors, checked against the zeroth-order master equation (exact for states
//! without |11⟩ support).
//!
//! ```text
//! cargo run --release --example ensemble_rdm
//! ```

use nmqsd::coeffs::Model;
use nmqsd::deterministic::integrate_master;
use nmqsd::ensemble::run_ensemble;
use nmqsd::model::{InitialState, ModelParams};

fn main() -> nmqsd::Result<()> {
    let p = ModelParams::with_detuning(1.0, 1.0, 0.5, 1.0)?;
    let (dt, t_end, stride) = (0.01, 5.0, 100);
    let est = run_ensemble(InitialState::Ten.state(), &p, Model::Exact, 4000, 1, dt, t_end, stride)?;
    let master = integrate_master(&InitialState::Ten.density(), &p, dt, t_end, stride)?;
    let conc = est.concurrence()?;
    println!(
        "{:>4} {:>16} {:>16} {:>10} {:>12}",
        "t", "rho22 (MC ± se)", "rho23 (MC ± se)", "C", "|MC−master|"
    );
    for k in 0..est.grid.len() {
        let (r, se) = (&est.rho[k], &est.stderr[k]);
        let dev = (r - master.rho[k]).iter().map(|z| z.norm()).fold(0.0, f64::max);
        println!(
            "{:>4.1} {:>8.4} ± {:.4} {:>8.4} ± {:.4} {:>10.4} {:>12.5}",
            est.grid[k],
            r[(1, 1)].re,
            se[5],
            r[(1, 2)].re,
            se[6],
            conc[k],
            dev
        );
    }
    let phys = est.physicality();
    println!(
        "\n{} trajectories ({} aborted); all matrices physical: {}",
        est.n_traj,
        est.n_aborted,
        phys.iter().all(|r| r.pass)
    );
    Ok(())
}
