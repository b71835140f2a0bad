//! Random-failure percolation on the Zeta ensemble and on G(n,p), with the
//! measured critical fraction next to theory.
//!
//! `cargo run --release --example percolation_sweep`

use organic_overlay::ensemble::EnsembleSpec;
use organic_overlay::resilience::{
    percolation_sweep, theoretical_vs_empirical_failure, PercolationPlan, RemovalMode,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let plan = PercolationPlan::uniform_grid(RemovalMode::Random, 10, 1);
    let gnp = percolation_sweep(&EnsembleSpec::gnp_mean_degree(10_000, 2.0), &plan)?;
    println!(
        "G(n,p), mean degree 2: critical fraction {:?} (theory 0.5)",
        gnp.critical_fraction
    );
    for row in gnp.rows.iter().step_by(10) {
        println!(
            "  f = {:.2}  giant {:.4} +- {:.4}",
            row.fraction, row.mean_giant, row.std_giant
        );
    }
    for gamma in [2.2, 2.5, 3.2] {
        let cmp = theoretical_vs_empirical_failure(gamma, 10_000, 10, 1)?;
        println!("{}", serde_json::to_string(&cmp)?);
    }
    Ok(())
}
