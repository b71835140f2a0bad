//! Annealing a Euclidean overlay: link energy falls, high-capacity nodes
//! gather links, and a capacity shock perturbs the equilibrium.
//!
//! `cargo run --release --example anneal_equilibrate`

use organic_overlay::anneal::{AnnealParams, Annealer, CapacityDistribution, InstanceSpec};
use organic_overlay::rng::replica_stream;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = replica_stream(11, 0);
    let (g, states) = InstanceSpec::default().generate(&mut rng)?;
    let mut a = Annealer::new(g, states, AnnealParams::default())?;
    println!("round  energy  free energy  rank corr  giant");
    let show = |r: &organic_overlay::anneal::AnnealRow| {
        println!(
            "{:<6} {:<7.3} {:<12.3} {:<10.3} {:.2}",
            r.round,
            r.mean_link_energy,
            r.mean_link_free_energy,
            r.capacity_degree_rank_corr,
            r.giant_fraction
        );
    };
    show(&a.observe(0));
    for round in 1..=100 {
        let row = a.step_round(&mut rng)?;
        if round % 20 == 0 {
            show(&row);
        }
    }
    println!("capacity shock");
    a.shock(&mut rng, &CapacityDistribution::default());
    for round in 1..=50 {
        let row = a.step_round(&mut rng)?;
        if round <= 3 || round % 10 == 0 {
            show(&row);
        }
    }
    Ok(())
}
