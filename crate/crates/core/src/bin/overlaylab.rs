//! `overlaylab`: command-line front end for the experiment harness.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use organic_overlay::ensemble::theory::TheoryPrediction;
use organic_overlay::ensemble::EnsembleSpec;
use organic_overlay::graph::Diameter;
use organic_overlay::harness::{
    compare_with_theory, emit_plot_data, run_experiment, AttackSource, ExperimentConfig,
    ExperimentKind, HarnessError, ModelKind, PlotInputs, PlotKind, Tolerances, Trace,
};
use organic_overlay::resilience::{RemovalMode, DEFAULT_GIANT_THRESHOLD};
use organic_overlay::rng::replica_stream;

#[derive(Parser)]
#[command(
    name = "overlaylab",
    version,
    about = "Self-organizing overlay topology experiments"
)]
struct Cli {
    /// Master seed; overrides the config value.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; defaults to runs/<experiment>.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// TOML experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Node count.
    #[arg(long)]
    n: Option<usize>,
    /// Replica count.
    #[arg(long)]
    replicas: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Gnp,
    Zeta,
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Rewired,
    Zeta,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Random,
    Targeted,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one graph and compare it with theory.
    Generate {
        #[arg(long, value_enum, default_value = "gnp")]
        model: Model,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Edge probability for G(n,p); overrides --mean-degree.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 10.0)]
        mean_degree: f64,
        #[arg(long, default_value_t = 2.5)]
        gamma: f64,
    },
    /// Equilibrate a Euclidean overlay by annealing, with an optional capacity shock.
    Anneal {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long)]
        temperature: Option<f64>,
        /// Skip the capacity shock.
        #[arg(long)]
        no_shock: bool,
    },
    /// Rewire a seed graph towards a target exponent.
    Rewire {
        #[command(flatten)]
        common: Common,
        /// Run the configured adaptation schedule instead of a single block.
        #[arg(long)]
        cycles: bool,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        sweeps: Option<usize>,
        #[arg(long)]
        walk_length: Option<usize>,
    },
    /// Remove the highest-degree nodes from networks at two exponents.
    Attack {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        fraction: Option<f64>,
        #[arg(long, value_enum)]
        source: Option<Source>,
        /// Comma-separated exponents.
        #[arg(long, value_delimiter = ',')]
        gammas: Option<Vec<f64>>,
    },
    /// Sweep the removed fraction and locate the critical point.
    Percolate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        model: Option<Model>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        mean_degree: Option<f64>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Adjacency and Laplacian spectra of G(n,p).
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        mean_degree: Option<f64>,
    },
    /// Print theory predictions, or re-emit a plot series from a finished run.
    Report {
        #[arg(long, value_enum, default_value = "zeta")]
        model: Model,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 10.0)]
        mean_degree: f64,
        #[arg(long, default_value_t = 2.5)]
        gamma: f64,
        /// Run directory holding aggregate.csv.
        #[arg(long)]
        run_dir: Option<PathBuf>,
        /// Plot kind to emit from the run directory.
        #[arg(long, requires = "run_dir")]
        plot: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("overlaylab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn base_config(
    path: Option<&Path>,
    kinds: &[ExperimentKind],
) -> Result<ExperimentConfig, HarnessError> {
    match path {
        Some(p) => {
            let c = ExperimentConfig::load(p)?;
            if !kinds.contains(&c.experiment) {
                return Err(HarnessError::Config(format!(
                    "experiment: config is for {}, expected {}",
                    c.experiment.label(),
                    kinds
                        .iter()
                        .map(|k| k.label())
                        .collect::<Vec<_>>()
                        .join(" or ")
                )));
            }
            Ok(c)
        }
        None => Ok(ExperimentConfig::for_experiment(kinds[0])),
    }
}

fn apply_common(c: &mut ExperimentConfig, common: &Common, seed: Option<u64>) {
    if let Some(n) = common.n {
        c.n = n;
    }
    if let Some(r) = common.replicas {
        c.replicas = r;
    }
    if let Some(s) = seed {
        c.seed = s;
    }
}

fn run(c: &ExperimentConfig, out_dir: Option<PathBuf>) -> Result<(), HarnessError> {
    c.validate()?;
    let dir = out_dir.unwrap_or_else(|| PathBuf::from("runs").join(c.experiment.label()));
    let out = run_experiment(c, &dir)?;
    println!("{}", serde_json::to_string_pretty(&out.summary)?);
    eprintln!(
        "wrote {} files to {} ({}/{} replicas)",
        out.manifest.files.len(),
        dir.display(),
        out.manifest.completed_replicas,
        out.manifest.replicas
    );
    Ok(())
}

fn gnp_p(n: usize, p: Option<f64>, mean_degree: f64) -> f64 {
    p.unwrap_or_else(|| EnsembleSpec::gnp_mean_degree(n, mean_degree).parameter())
}

fn dispatch(cli: Cli) -> Result<(), HarnessError> {
    let config = cli.config.as_deref();
    match cli.command {
        Command::Generate {
            model,
            n,
            p,
            mean_degree,
            gamma,
        } => generate(
            model,
            n,
            p,
            mean_degree,
            gamma,
            cli.seed.unwrap_or(1),
            cli.out_dir,
        ),
        Command::Anneal {
            common,
            rounds,
            temperature,
            no_shock,
        } => {
            let mut c = base_config(config, &[ExperimentKind::AnnealEquilibrate])?;
            apply_common(&mut c, &common, cli.seed);
            if let Some(r) = rounds {
                c.anneal.rounds = r;
            }
            if let Some(t) = temperature {
                c.anneal.temperature = t;
            }
            if no_shock {
                c.anneal.shock = false;
            }
            run(&c, cli.out_dir)
        }
        Command::Rewire {
            common,
            cycles,
            gamma,
            sweeps,
            walk_length,
        } => {
            let kinds = if cycles {
                [
                    ExperimentKind::AdaptationCycles,
                    ExperimentKind::EnsembleConverge,
                ]
            } else {
                [
                    ExperimentKind::EnsembleConverge,
                    ExperimentKind::AdaptationCycles,
                ]
            };
            let mut c = base_config(config, &kinds)?;
            apply_common(&mut c, &common, cli.seed);
            if let Some(g) = gamma {
                c.rewire.gamma = g;
            }
            if let Some(s) = sweeps {
                c.rewire.sweeps = s;
            }
            if walk_length.is_some() {
                c.rewire.walk_length = walk_length;
            }
            run(&c, cli.out_dir)
        }
        Command::Attack {
            common,
            fraction,
            source,
            gammas,
        } => {
            let mut c = base_config(config, &[ExperimentKind::AttackCompare])?;
            apply_common(&mut c, &common, cli.seed);
            if let Some(f) = fraction {
                c.attack.fraction = f;
            }
            if let Some(s) = source {
                c.attack.source = match s {
                    Source::Rewired => AttackSource::Rewired,
                    Source::Zeta => AttackSource::Zeta,
                };
            }
            if let Some(g) = gammas {
                c.attack.gammas = g;
            }
            run(&c, cli.out_dir)
        }
        Command::Percolate {
            common,
            model,
            gamma,
            mean_degree,
            mode,
        } => {
            let mut c = base_config(config, &[ExperimentKind::PercolationSweep])?;
            apply_common(&mut c, &common, cli.seed);
            if let Some(m) = model {
                c.percolation.model = match m {
                    Model::Gnp => ModelKind::Gnp,
                    Model::Zeta => ModelKind::Zeta,
                };
            }
            if let Some(g) = gamma {
                c.percolation.gamma = g;
            }
            if let Some(k) = mean_degree {
                c.percolation.mean_degree = k;
            }
            if let Some(m) = mode {
                c.percolation.mode = match m {
                    Mode::Random => RemovalMode::Random,
                    Mode::Targeted => RemovalMode::Targeted,
                };
            }
            run(&c, cli.out_dir)
        }
        Command::Spectrum {
            common,
            p,
            mean_degree,
        } => {
            let mut c = base_config(config, &[ExperimentKind::SpectrumReport])?;
            apply_common(&mut c, &common, cli.seed);
            if p.is_some() {
                c.spectrum.p = p;
            }
            if let Some(k) = mean_degree {
                c.spectrum.mean_degree = k;
            }
            run(&c, cli.out_dir)
        }
        Command::Report {
            model,
            n,
            p,
            mean_degree,
            gamma,
            run_dir,
            plot,
        } => match run_dir {
            Some(dir) => replot(
                &dir,
                plot.as_deref().unwrap_or("gamma_f_vs_sweep"),
                cli.out_dir,
            ),
            None => {
                let prediction = match model {
                    Model::Gnp => TheoryPrediction::for_gnp(n, gnp_p(n, p, mean_degree), None)?,
                    Model::Zeta => TheoryPrediction::for_zeta(gamma)?,
                };
                println!("{}", serde_json::to_string_pretty(&prediction)?);
                Ok(())
            }
        },
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |e| HarnessError::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

fn generate(
    model: Model,
    n: usize,
    p: Option<f64>,
    mean_degree: f64,
    gamma: f64,
    seed: u64,
    out_dir: Option<PathBuf>,
) -> Result<(), HarnessError> {
    let spec = match model {
        Model::Gnp => EnsembleSpec::Gnp {
            n,
            p: gnp_p(n, p, mean_degree),
        },
        Model::Zeta => EnsembleSpec::zeta(n, gamma),
    };
    spec.validate()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let mut rng = replica_stream(seed, 0);
    let generated = spec.generate(&mut rng)?;
    let g = &generated.graph;
    let components = g.connected_components();

    let mut measured = BTreeMap::new();
    let exists = components.giant_fraction >= DEFAULT_GIANT_THRESHOLD;
    measured.insert("giant_exists".to_string(), if exists { 1.0 } else { 0.0 });
    let (prediction, requested, np): (TheoryPrediction, Vec<&str>, Option<f64>) = match spec {
        EnsembleSpec::Gnp { n, p } => {
            let prediction = TheoryPrediction::for_gnp(n, p, None)?;
            let mut requested = vec!["giant_exists"];
            if let Diameter::Finite { hops, .. } = g.diameter() {
                measured.insert("diameter".to_string(), hops as f64);
                if prediction.expected_diameter.is_some() {
                    requested.push("diameter");
                }
            }
            (prediction, requested, Some(n as f64 * p))
        }
        EnsembleSpec::ZetaConfig { gamma, .. } => (
            TheoryPrediction::for_zeta(gamma)?,
            vec!["giant_exists"],
            None,
        ),
    };
    let report = compare_with_theory(
        &measured,
        &prediction,
        &requested,
        np,
        &Tolerances::default(),
    )?;

    let dir = out_dir.unwrap_or_else(|| PathBuf::from("runs").join("generate"));
    std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let edges = dir.join("graph.edges");
    let mut buf = Vec::new();
    g.write_edge_list(
        &mut buf,
        &[
            format!("ensemble {}", serde_json::to_string(&spec)?),
            format!("seed {seed}"),
        ],
    )
    .map_err(io_err(&edges))?;
    std::fs::write(&edges, buf).map_err(io_err(&edges))?;
    let summary = json!({
        "ensemble": spec,
        "seed": seed,
        "nodes": g.node_count(),
        "edges": g.edge_count(),
        "discarded_self_loops": generated.discarded_self_loops,
        "discarded_multi_edges": generated.discarded_multi_edges,
        "giant_fraction": components.giant_fraction,
        "components": components.component_count(),
        "theory_report": report,
    });
    let report_path = dir.join("theory_report.json");
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    std::fs::write(&report_path, &text).map_err(io_err(&report_path))?;
    print!("{text}");
    Ok(())
}

fn replot(run_dir: &Path, kind: &str, out_dir: Option<PathBuf>) -> Result<(), HarnessError> {
    let kind: PlotKind = kind.parse()?;
    let path = run_dir.join("aggregate.csv");
    let file = std::fs::File::open(&path).map_err(io_err(&path))?;
    let trace = Trace::read_csv(file)?;
    let text = emit_plot_data(
        kind,
        &PlotInputs {
            aggregate: Some(&trace),
            ..Default::default()
        },
    )?;
    match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
            let out = dir.join(format!("{}.dat", kind.name()));
            std::fs::write(&out, text).map_err(io_err(&out))?;
            eprintln!("wrote {}", out.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}
