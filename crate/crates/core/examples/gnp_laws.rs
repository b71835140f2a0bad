//! Giant component and diameter of sampled G(n,p) graphs against theory.
//!
//! `cargo run --release --example gnp_laws`

use organic_overlay::ensemble::gnp_generate;
use organic_overlay::ensemble::theory::expected_diameter;
use organic_overlay::graph::Diameter;
use organic_overlay::rng::replica_stream;

/// Giant fraction S solving S = 1 - exp(-c S), by fixed-point iteration.
fn giant_fixed_point(c: f64) -> f64 {
    let mut s = 1.0;
    for _ in 0..10_000 {
        s = 1.0 - (-c * s).exp();
    }
    s
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 10_000;
    println!("mean degree  giant (sampled)  giant (theory)");
    for c in [0.5, 1.0, 1.5, 2.0, 4.0] {
        let g = gnp_generate(n, c / (n - 1) as f64, &mut replica_stream(7, 0))?;
        let s = g.connected_components().giant_fraction;
        println!("{c:<12} {s:<16.4} {:.4}", giant_fixed_point(c));
    }
    let p = 1e-3;
    let g = gnp_generate(n, p, &mut replica_stream(7, 1))?;
    if let Diameter::Finite { hops, .. } = g.diameter() {
        println!(
            "\ndiameter of G({n}, {p}): {hops} hops, ln n / ln np = {:.2}",
            expected_diameter(n, p)?
        );
    }
    Ok(())
}
