//! Adjacency and Laplacian spectra of G(n,p): semicircle support, largest
//! eigenvalue, synchronizability and consensus time.
//!
//! `cargo run --release --example spectrum_report`

use organic_overlay::ensemble::gnp_generate;
use organic_overlay::rng::replica_stream;
use organic_overlay::spectral::{
    adjacency_spectrum, consensus_time, laplacian_spectrum, random_walk_centrality,
    semicircle_half_width, sync_is_stable, ConsensusGrouping,
};
use organic_overlay::Graph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (n, p) = (1000, 0.01);
    let g = gnp_generate(n, p, &mut replica_stream(3, 0))?;
    let a = adjacency_spectrum(&g)?;
    let edge = semicircle_half_width(n, p);
    let outside = a.eigenvalues.iter().filter(|x| x.abs() >= edge).count();
    println!(
        "G({n}, {p}): lambda_1 = {:.3} (np = {})",
        a.largest().unwrap_or(0.0),
        n as f64 * p
    );
    println!("semicircle half-width {edge:.3}, eigenvalues outside: {outside}");

    let l = laplacian_spectrum(&g)?;
    match (l.lambda2(), sync_is_stable(&l, 10.0)) {
        (Some(l2), Ok(sync)) => {
            let t = consensus_time(l2, 1.0, 1e-3, ConsensusGrouping::default())?;
            println!(
                "lambda_2 = {l2:.4}, eigenratio = {:.2}, stable: {}",
                sync.eigenratio, sync.stable
            );
            println!("consensus time to 1e-3: {t:.3}");
        }
        _ => println!("graph is disconnected: no synchronization or consensus"),
    }

    // A star with one extra leaf-to-leaf edge: the hub is the most central node.
    let mut star = Graph::star(6);
    star.add_edge(1, 2)?;
    for i in 0..star.node_count() {
        let c = random_walk_centrality(&star, i, 500)?;
        println!("centrality of node {i}: {:.4}", c.value);
    }
    Ok(())
}
