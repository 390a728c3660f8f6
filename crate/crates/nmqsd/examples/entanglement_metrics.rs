//! Wootters concurrence and Uhlmann fidelity on reference matrices.
//!
//! ```text
//! cargo run --release --example entanglement_metrics
//! ```

use nmqsd::deterministic::final_form;
use nmqsd::metrics::{fidelity, wootters_concurrence};
use nmqsd::model::{re, InitialState, Operator4, C64};

fn main() -> nmqsd::Result<()> {
    let mixed = Operator4::identity() * re(0.25);
    let cases = [
        ("triplet", InitialState::Triplet.density()),
        ("singlet", InitialState::Singlet.density()),
        ("|10>", InitialState::Ten.density()),
        ("bell+", InitialState::BellPlus.density()),
        ("limit r=1/4", final_form(0.25, C64::new(0.0, 0.0))),
        ("I/4", mixed),
    ];
    for (name, rho) in &cases {
        let c = wootters_concurrence(rho)?;
        let f = fidelity(rho, &mixed)?;
        println!("{name:>12}: C = {:.4}  F(ρ, I/4) = {:.4}", c.value, f.value);
    }
    let a = InitialState::Ten.density();
    for eps in [0.0, 0.25, 0.5, 1.0] {
        let b = a * re(1.0 - eps) + mixed * re(eps);
        println!(
            "F(|10><10|, (1−ε)ρ + ε I/4) at ε = {eps}: {:.4}",
            fidelity(&a, &b)?.value
        );
    }
    Ok(())
}
