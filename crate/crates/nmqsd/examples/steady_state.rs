//! Long-time states and relaxation times for several presets, printed as JSON.
//!
//! ```text
//! cargo run --release --example steady_state
//! ```

use nmqsd::deterministic::steady_state;
use nmqsd::model::{InitialState, ModelParams};

fn main() -> nmqsd::Result<()> {
    let p = ModelParams::with_detuning(1.0, 1.0, 1.0, 1.0)?;
    for st in [
        InitialState::Ten,
        InitialState::Singlet,
        InitialState::Triplet,
        InitialState::BellPlus,
    ] {
        let rep = steady_state(&st.density(), &p, 60.0, 0.01, 60.0)?;
        println!(
            "{st:>8}: {:?}, r = {:.4}, C(∞) = {:.4}, τ_S = {}",
            rep.method,
            rep.r,
            rep.concurrence_inf,
            rep.tau_s.map_or("not reached".into(), |t| format!("{t:.2}"))
        );
    }
    let rep = steady_state(&InitialState::Ten.density(), &p, 30.0, 0.01, 30.0)?;
    println!("\n{}", serde_json::to_string(&rep).expect("serializable"));
    Ok(())
}
