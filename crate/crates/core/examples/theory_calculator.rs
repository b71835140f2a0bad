//! Closed-form predictions for G(n,p) and the Zeta ensemble.
//!
//! `cargo run --release --example theory_calculator`

use organic_overlay::ensemble::theory::{critical_failure_fraction, TheoryPrediction};
use organic_overlay::ensemble::zeta::riemann_zeta;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for s in [1.5, 2.0, 2.5, 3.0] {
        println!("zeta({s}) = {:.10}", riemann_zeta(s)?);
    }
    println!();
    println!("gamma  critical failure fraction");
    for gamma in [2.2, 2.5, 3.0, 3.2, 3.5, 4.0] {
        let r = critical_failure_fraction(gamma)?;
        match r.value() {
            Some(v) => println!("{gamma:<6} {v:.6}"),
            None => println!("{gamma:<6} -> 1"),
        }
    }
    println!();
    let gnp = TheoryPrediction::for_gnp(10_000, 1e-3, Some(5_000))?;
    println!("G(10^4, 10^-3): {}", serde_json::to_string_pretty(&gnp)?);
    Ok(())
}
