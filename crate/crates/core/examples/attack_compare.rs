//! Targeted attack on rewired networks: removing the top 10% of nodes by
//! degree splits a gamma = 2.1 network far more than a gamma = 3.5 one.
//!
//! `cargo run --release --example attack_compare`

use organic_overlay::ensemble::gnp_generate;
use organic_overlay::resilience::remove_top_degree_nodes;
use organic_overlay::rewire::{
    adaptation_schedule, default_walk_length, Identifiers, ScheduleBlock,
};
use organic_overlay::rng::replica_stream;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 300;
    println!("gamma  giant before  giant after  components after");
    for gamma in [2.1, 3.5] {
        let mut rng = replica_stream(9, 0);
        let mut g = gnp_generate(n, 6.0 / (n - 1) as f64, &mut rng)?;
        let ids = Identifiers::random(n, &mut rng);
        let schedule = [ScheduleBlock { gamma, sweeps: 30 }];
        adaptation_schedule(&mut g, &ids, &schedule, default_walk_length(n), 3, &mut rng)?;
        let before = g.connected_components().giant_fraction;
        let (_, r) = remove_top_degree_nodes(&g, 0.1)?;
        println!(
            "{gamma:<6} {before:<13.3} {:<12.3} {}",
            r.giant_fraction_after,
            r.components_after.component_count()
        );
    }
    Ok(())
}
