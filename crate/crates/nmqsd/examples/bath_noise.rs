//! Sample Ornstein–Uhlenbeck noise paths and compare their empirical
//! covariance with the bath correlation α(τ) = (γ/2) e^{−γ|τ|} e^{−iΩτ}.
//!
//! ```text
//! cargo run --release --example bath_noise
//! ```

use nmqsd::model::{bath_correlation, ModelParams, C64};
use nmqsd::noise::sample_ou_path;

fn main() -> nmqsd::Result<()> {
    let p = ModelParams::with_detuning(1.0, 1.0, 0.5, 1.0)?;
    let (dt, n_paths) = (0.2, 20_000u64);
    let lags = [0usize, 2, 5, 10];
    let mut acc = vec![C64::new(0.0, 0.0); lags.len()];
    for i in 0..n_paths {
        // values sit on the half-step grid dt/2 = 0.1
        let path = sample_ou_path(&p, dt, 1.0, 7, i)?;
        let zs = path.values[0];
        for (a, &lag) in acc.iter_mut().zip(&lags) {
            *a += path.values[lag].conj() * zs;
        }
    }
    println!("{:>6} {:>24} {:>24}", "tau", "empirical M[z_t z*_s]", "alpha(tau)");
    for (a, &lag) in acc.iter().zip(&lags) {
        let tau = lag as f64 * 0.5 * dt;
        let emp = a / n_paths as f64;
        let exact = bath_correlation(tau, 0.0, &p);
        println!(
            "{tau:>6.2} {:>11.5} {:+11.5}i {:>11.5} {:+11.5}i",
            emp.re, emp.im, exact.re, exact.im
        );
    }

    let path = sample_ou_path(&p, dt, 1.0, 7, 0)?;
    println!("\nfirst path as CSV:");
    path.write_csv(std::io::stdout())
}
