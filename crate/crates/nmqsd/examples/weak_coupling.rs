//! Weak-coupling expansion of the O-operator at orders 1, 3 and 5 for
//! initial |01⟩, compared with the exact concurrence through the L² distance
//! over [0, 10].
//!
//! ```text
//! cargo run --release --example weak_coupling
//! ```

use nmqsd::coeffs::{Coefficients, Model, WeakOrder};
use nmqsd::deterministic::{analytic_series, integrate_master_with};
use nmqsd::model::{InitialState, ModelParams};

fn main() -> nmqsd::Result<()> {
    let p = ModelParams::with_detuning(1.0, 0.6, 0.6, 1.0)?;
    let (dt, t_end, stride) = (0.01, 10.0, 10);
    let rho0 = InitialState::One.density();
    let exact = analytic_series(&rho0, &p, dt, t_end, stride)?.concurrence()?;
    for order in [WeakOrder::First, WeakOrder::Third, WeakOrder::Fifth] {
        let co = Coefficients::build(Model::Weak(order), &p, 0.5 * dt, t_end)?;
        let c = integrate_master_with(&rho0, &co, dt, t_end, stride, |_, _, _| {})?.concurrence()?;
        let l2 = (c.iter().zip(&exact).map(|(a, b)| (a - b).powi(2)).sum::<f64>() * dt * stride as f64).sqrt();
        let peak = c.iter().copied().fold(0.0, f64::max);
        println!(
            "order {}: noise channel {:<5}  peak C {peak:.4}  L² distance to exact {l2:.4}",
            order.number(),
            co.has_noise_channel()
        );
    }
    println!("exact peak C {:.4}", exact.iter().copied().fold(0.0, f64::max));
    Ok(())
}
