//! A full harness run: the network adapts to exponent 2.1, then to 3.5.
//! Writes per-replica traces, the aggregate, cycle markers and plot series.
//!
//! `cargo run --release --example adaptation_cycles -- [out_dir]`

use std::path::PathBuf;

use organic_overlay::harness::{run_experiment, ExperimentConfig, ExperimentKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "runs/adaptation_cycles".into())
        .into();
    let mut config = ExperimentConfig::for_experiment(ExperimentKind::AdaptationCycles);
    config.replicas = 4;
    let run = run_experiment(&config, &out)?;
    println!("{}", serde_json::to_string_pretty(&run.summary["blocks"])?);
    println!("{} files in {}", run.manifest.files.len(), out.display());
    Ok(())
}
