//! Rewiring a random seed graph towards a power law with exponent 2.5.
//!
//! `cargo run --release --example ensemble_converge`

use organic_overlay::ensemble::gnp_generate;
use organic_overlay::fit::fit_power_law;
use organic_overlay::rewire::{rewiring_sweep, Identifiers, RewireConfig};
use organic_overlay::rng::replica_stream;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 5000;
    let mut rng = replica_stream(5, 0);
    let mut g = gnp_generate(n, 6.0 / (n - 1) as f64, &mut rng)?;
    let ids = Identifiers::random(n, &mut rng);
    let cfg = RewireConfig::for_network(n, 2.5);
    let fit = fit_power_law(&g.degree_sequence())?;
    println!("seed graph: gamma_f {:.3}, KS {:.4}", fit.gamma_f, fit.ks_d);
    println!("sweep  gamma_f  KS      k_min  giant");
    for sweep in 1..=30 {
        rewiring_sweep(&mut g, &ids, &cfg, &mut rng)?;
        if sweep % 5 == 0 {
            let fit = fit_power_law(&g.degree_sequence())?;
            let giant = g.connected_components().giant_fraction;
            println!(
                "{sweep:<6} {:<8.3} {:<7.4} {:<6} {giant:.3}",
                fit.gamma_f, fit.ks_d, fit.k_min
            );
        }
    }
    Ok(())
}
