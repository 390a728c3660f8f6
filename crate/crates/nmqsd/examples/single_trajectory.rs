//! One realization of the nonlinear and the linear stochastic equation from
//! |11⟩ driven by the same noise path, written as CSV.
//!
//! ```text
//! cargo run --release --example single_trajectory > traj.csv
//! ```

use nmqsd::coeffs::{Coefficients, Model};
use nmqsd::model::{coupling_operator, expectation, InitialState, ModelParams};
use nmqsd::noise::sample_ou_path;
use nmqsd::trajectory::{run_trajectory, Unraveling};

fn main() -> nmqsd::Result<()> {
    let p = ModelParams::with_detuning(1.0, 1.0, 0.5, 1.0)?;
    let (dt, t_end) = (0.01, 10.0);
    let coeffs = Coefficients::build(Model::Exact, &p, 0.5 * dt, t_end)?;
    let noise = sample_ou_path(&p, dt, t_end, 42, 0)?;
    let psi0 = InitialState::Excited.state();

    let nonlinear = run_trajectory(psi0, &coeffs, &noise, Unraveling::Nonlinear, 50)?;
    let linear = run_trajectory(psi0, &coeffs, &noise, Unraveling::Linear, 50)?;
    let l = coupling_operator();
    for (a, b) in nonlinear.states.iter().zip(&linear.states).step_by(4) {
        eprintln!(
            "t = {:>5.2}  <L> = {:+.4}{:+.4}i  linear norm {:.4}",
            a.t,
            expectation(&a.psi, &l).re,
            expectation(&a.psi, &l).im,
            b.psi.norm()
        );
    }
    nonlinear.write_csv(std::io::stdout())
}
