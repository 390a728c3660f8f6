//! Integrate the exact and zeroth-order O-operator coefficients and show the
//! Markov limit: as γ grows the steady value of X approaches λ/2.
//!
//! ```text
//! cargo run --release --example coefficient_tracks
//! ```

use nmqsd::coeffs::{closed_form_x, integrate_exact_coeffs, integrate_zeroth_coeffs, steady_x};
use nmqsd::model::ModelParams;

fn main() -> nmqsd::Result<()> {
    let p = ModelParams::with_detuning(1.0, 1.0, 0.5, 1.0)?;
    let exact = integrate_exact_coeffs(&p, 0.005, 10.0)?;
    let zeroth = integrate_zeroth_coeffs(&p, 0.005, 10.0)?;
    println!(
        "{:>5} {:>22} {:>22} {:>22}",
        "t", "X exact track", "X zeroth track", "X closed form"
    );
    for t in [0.0, 1.0, 2.0, 5.0, 10.0] {
        let k = exact.index_of(t)?;
        let (xe, xz, xc) = (exact.x(k), zeroth.x(k), closed_form_x(t, &p)?);
        println!(
            "{t:>5.1} {:>10.6} {:+10.6}i {:>10.6} {:+10.6}i {:>10.6} {:+10.6}i",
            xe.re, xe.im, xz.re, xz.im, xc.re, xc.im
        );
    }

    println!("\nMarkov limit (λ = 1, Δ = 0): |X(∞) − λ/2|");
    for gamma in [5.0, 20.0, 50.0] {
        let q = ModelParams::with_detuning(1.0, 1.0, gamma, 0.0)?;
        let x = steady_x(&q)?;
        println!("  γ = {gamma:>4}: {:.6}", (x - 0.5 * q.lambda).norm());
    }
    Ok(())
}
