//! The six experiment runners.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::{AttackSource, ExperimentConfig, ExperimentKind, ModelKind};
use super::report::{compare_with_theory, PlotInputs, PlotKind, Tolerances};
use super::trace::{aggregate, Trace};
use super::{replica_file, HarnessError, ReplicaFailure, RunDir};
use crate::anneal::{Annealer, NodeState};
use crate::ensemble::theory::TheoryPrediction;
use crate::ensemble::{gnp_generate, EnsembleSpec};
use crate::fit::fit_power_law;
use crate::graph::Graph;
use crate::resilience::{
    percolation_replica, remove_top_degree_nodes, PercolationPlan, PercolationTable,
};
use crate::rewire::{adaptation_schedule, Identifiers, ScheduleBlock};
use crate::rng::{replica_stream, substream};
use crate::spectral::{
    adjacency_spectrum, consensus_time, laplacian_spectrum, semicircle_half_width, sync_is_stable,
    ConsensusGrouping,
};
use crate::stats::{mean, median, std_dev};

pub(super) struct Done {
    pub failures: Vec<ReplicaFailure>,
    pub summary: Value,
}

pub(super) fn run(config: &ExperimentConfig, dir: &mut RunDir) -> Result<Done, HarnessError> {
    match config.experiment {
        ExperimentKind::EnsembleConverge => {
            let schedule = [ScheduleBlock {
                gamma: config.rewire.gamma,
                sweeps: config.rewire.sweeps,
            }];
            rewiring(config, &schedule, dir)
        }
        ExperimentKind::AdaptationCycles => rewiring(config, &config.schedule, dir),
        ExperimentKind::AnnealEquilibrate => anneal(config, dir),
        ExperimentKind::AttackCompare => attack(config, dir),
        ExperimentKind::PercolationSweep => percolation(config, dir),
        ExperimentKind::SpectrumReport => spectrum(config, dir),
    }
}

/// Completed `(replica, result)` pairs and the recorded failures.
type ReplicaResults<T> = (Vec<(usize, T)>, Vec<ReplicaFailure>);

/// Runs `job` for every replica in parallel. Results come back in replica
/// order; failures are recorded unless every replica failed.
fn run_replicas<T, F>(replicas: usize, job: F) -> Result<ReplicaResults<T>, HarnessError>
where
    T: Send,
    F: Fn(usize) -> Result<T, HarnessError> + Sync,
{
    let results: Vec<Result<T, HarnessError>> = (0..replicas).into_par_iter().map(&job).collect();
    let mut done = Vec::new();
    let mut failures = Vec::new();
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Ok(t) => done.push((k, t)),
            Err(e) => failures.push(ReplicaFailure {
                replica: k,
                error: e.to_string(),
            }),
        }
    }
    if done.is_empty() {
        return Err(HarnessError::AllReplicasFailed {
            replicas,
            first: failures
                .first()
                .map(|f| f.error.clone())
                .unwrap_or_default(),
        });
    }
    Ok((done, failures))
}

fn opt(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::NAN)
}

/// Median ignoring NaN; null in JSON when nothing is left.
fn median_of(xs: impl IntoIterator<Item = f64>) -> Value {
    let v: Vec<f64> = xs.into_iter().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        Value::Null
    } else {
        json!(median(&v))
    }
}

fn edge_list(g: &Graph, comments: &[String]) -> Vec<u8> {
    let mut buf = Vec::new();
    g.write_edge_list(&mut buf, comments)
        .expect("in-memory write");
    buf
}

fn write_replicas(dir: &mut RunDir, traces: &[(usize, Trace)]) -> Result<Trace, HarnessError> {
    for (k, t) in traces {
        dir.write_trace(&replica_file(*k), t)?;
    }
    let only: Vec<Trace> = traces.iter().map(|(_, t)| t.clone()).collect();
    let agg = aggregate(&only)?;
    dir.write_trace("aggregate.csv", &agg)?;
    Ok(agg)
}

const REWIRE_COLUMNS: [&str; 10] = [
    "sweep",
    "block",
    "gamma_target",
    "gamma_f",
    "ks_d",
    "k_min",
    "giant_fraction",
    "isolated_nodes",
    "conflicts",
    "restores",
];

struct RewireReplica {
    trace: Trace,
    final_graph: Graph,
    block_ends: Vec<usize>,
}

fn rewire_replica(
    config: &ExperimentConfig,
    schedule: &[ScheduleBlock],
    k: usize,
) -> Result<RewireReplica, HarnessError> {
    let n = config.n;
    let mut rng = replica_stream(config.seed, k as u64);
    let p = config.seed_graph.mean_degree / (n - 1) as f64;
    let mut g = gnp_generate(n, p, &mut rng)?;
    let ids = Identifiers::random(n, &mut rng);
    let giant0 = g.connected_components().giant_fraction;
    let isolated0 = g.isolated_count();
    let t = adaptation_schedule(
        &mut g,
        &ids,
        schedule,
        config.walk_length(),
        config.rewire.max_retries,
        &mut rng,
    )?;
    let mut trace = Trace::new(REWIRE_COLUMNS);
    let f0 = t.initial_fit;
    trace.push(vec![
        0.0,
        0.0,
        schedule[0].gamma,
        opt(f0.map(|f| f.gamma_f)),
        opt(f0.map(|f| f.ks_d)),
        opt(f0.map(|f| f.k_min as f64)),
        giant0,
        isolated0 as f64,
        0.0,
        0.0,
    ]);
    for r in &t.rows {
        trace.push(vec![
            r.sweep as f64,
            r.block as f64,
            r.gamma_target,
            opt(r.gamma_f),
            opt(r.ks_d),
            opt(r.k_min.map(|k| k as f64)),
            r.giant_fraction,
            r.isolated_nodes as f64,
            r.conflicts as f64,
            r.restores as f64,
        ]);
    }
    Ok(RewireReplica {
        trace,
        final_graph: g,
        block_ends: t.block_ends,
    })
}

fn rewiring(
    config: &ExperimentConfig,
    schedule: &[ScheduleBlock],
    dir: &mut RunDir,
) -> Result<Done, HarnessError> {
    let (done, failures) = run_replicas(config.replicas, |k| rewire_replica(config, schedule, k))?;
    let traces: Vec<(usize, Trace)> = done.iter().map(|(k, r)| (*k, r.trace.clone())).collect();
    let agg = write_replicas(dir, &traces)?;

    let block_ends = &done[0].1.block_ends;
    let mut markers = Trace::new(["block", "gamma_target", "start_sweep", "end_sweep"]);
    let column = |row: usize, name: &str| -> Vec<f64> {
        done.iter()
            .map(|(_, r)| r.trace.rows[row][r.trace.column_index(name).expect("known column")])
            .collect()
    };
    let mut blocks = Vec::new();
    let mut start = 0;
    for (b, (&end, block)) in block_ends.iter().zip(schedule).enumerate() {
        markers.push(vec![b as f64, block.gamma, (start + 1) as f64, end as f64]);
        blocks.push(json!({
            "block": b,
            "gamma_target": block.gamma,
            "start_sweep": start + 1,
            "end_sweep": end,
            "start_ks_d_median": median_of(column(start, "ks_d")),
            "end_ks_d_median": median_of(column(end, "ks_d")),
            "end_gamma_f_median": median_of(column(end, "gamma_f")),
        }));
        start = end;
    }
    dir.write_trace("markers.csv", &markers)?;

    let pooled: Vec<usize> = done
        .iter()
        .flat_map(|(_, r)| r.final_graph.degree_sequence())
        .collect();
    let inputs = PlotInputs {
        aggregate: Some(&agg),
        degrees: Some(&pooled),
        ..Default::default()
    };
    for kind in [
        PlotKind::GammaFVsSweep,
        PlotKind::KsDVsSweep,
        PlotKind::GiantVsSweep,
        PlotKind::DegreeCcdf,
    ] {
        dir.write_plot(kind, &inputs)?;
    }
    let (k0, first) = &done[0];
    dir.write(
        &format!("replica_{k0:03}_final.edges"),
        edge_list(
            &first.final_graph,
            &[format!("final topology of replica {k0}")],
        ),
    )?;

    let last = start;
    let summary = json!({
        "experiment": config.experiment.label(),
        "n": config.n,
        "walk_length": config.walk_length(),
        "completed_replicas": done.len(),
        "initial_gamma_f_median": median_of(column(0, "gamma_f")),
        "initial_ks_d_median": median_of(column(0, "ks_d")),
        "final_gamma_f_median": median_of(column(last, "gamma_f")),
        "final_ks_d_median": median_of(column(last, "ks_d")),
        "final_isolated_nodes_median": median_of(column(last, "isolated_nodes")),
        "blocks": blocks,
    });
    Ok(Done { failures, summary })
}

const ANNEAL_COLUMNS: [&str; 8] = [
    "round",
    "mean_link_energy",
    "mean_link_free_energy",
    "mean_link_distance_sq",
    "capacity_degree_rank_corr",
    "giant_fraction",
    "accepted_rewires",
    "edge_count",
];

struct AnnealReplica {
    trace: Trace,
    pre_shock: (Graph, Vec<NodeState>),
    last: (Graph, Vec<NodeState>),
}

fn anneal_replica(config: &ExperimentConfig, k: usize) -> Result<AnnealReplica, HarnessError> {
    let a = &config.anneal;
    let mut rng = replica_stream(config.seed, k as u64);
    let (g, states) = a
        .instance(config.n, config.seed_graph.mean_degree)
        .generate(&mut rng)?;
    let mut annealer = Annealer::new(g, states, a.params())?;
    let mut trace = Trace::new(ANNEAL_COLUMNS);
    let push = |trace: &mut Trace, row: crate::anneal::AnnealRow, m: usize| {
        trace.push(vec![
            row.round as f64,
            row.mean_link_energy,
            row.mean_link_free_energy,
            row.mean_link_distance_sq,
            row.capacity_degree_rank_corr,
            row.giant_fraction,
            row.accepted_rewires as f64,
            m as f64,
        ]);
    };
    push(&mut trace, annealer.observe(0), annealer.graph.edge_count());
    for _ in 0..a.rounds {
        let row = annealer.step_round(&mut rng)?;
        push(&mut trace, row, annealer.graph.edge_count());
    }
    let pre_shock = (annealer.graph.clone(), annealer.states.clone());
    if a.shock {
        annealer.shock(&mut rng, &a.capacity);
        for _ in 0..a.post_shock_rounds {
            let row = annealer.step_round(&mut rng)?;
            push(&mut trace, row, annealer.graph.edge_count());
        }
    }
    Ok(AnnealReplica {
        trace,
        pre_shock,
        last: (annealer.graph, annealer.states),
    })
}

fn nodes_csv(g: &Graph, states: &[NodeState]) -> Trace {
    let mut t = Trace::new(["node", "x", "y", "capacity", "degree"]);
    for (i, s) in states.iter().enumerate() {
        t.push(vec![
            i as f64,
            s.position[0],
            s.position[1],
            s.capacity,
            g.degree(i) as f64,
        ]);
    }
    t
}

/// Level before the shock, peak soon after it and level at the end of the
/// post-shock window, for one column of an annealing trace.
fn shock_response(trace: &Trace, col: &str, rounds: usize, post: usize) -> (f64, f64, f64) {
    let x = trace.column(col).expect("known column");
    let window = 10.min(rounds).max(1);
    let pre = mean(&x[rounds + 1 - window..=rounds]);
    let early = &x[rounds + 1..=rounds + window.min(post)];
    let peak = early.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let end_window = window.min(post);
    let end = mean(&x[rounds + post + 1 - end_window..=rounds + post]);
    (pre, peak, end)
}

fn anneal(config: &ExperimentConfig, dir: &mut RunDir) -> Result<Done, HarnessError> {
    let a = &config.anneal;
    let (done, failures) = run_replicas(config.replicas, |k| anneal_replica(config, k))?;
    let traces: Vec<(usize, Trace)> = done.iter().map(|(k, r)| (*k, r.trace.clone())).collect();
    let agg = write_replicas(dir, &traces)?;
    let inputs = PlotInputs {
        aggregate: Some(&agg),
        ..Default::default()
    };
    for kind in [
        PlotKind::EnergyVsRound,
        PlotKind::FreeEnergyVsRound,
        PlotKind::RankCorrVsRound,
    ] {
        dir.write_plot(kind, &inputs)?;
    }

    let (k0, first) = &done[0];
    let (g, s) = &first.pre_shock;
    dir.write(
        &format!("replica_{k0:03}_pre_shock.edges"),
        edge_list(g, &[format!("replica {k0} after {} rounds", a.rounds)]),
    )?;
    dir.write_trace(
        &format!("replica_{k0:03}_pre_shock_nodes.csv"),
        &nodes_csv(g, s),
    )?;

    let window = 10.min(a.rounds);
    let mut first10 = Vec::new();
    let mut last10 = Vec::new();
    let mut rank_corr = Vec::new();
    for (_, r) in &done {
        let e = r.trace.column("mean_link_energy").expect("known column");
        first10.push(mean(&e[1..=window]));
        last10.push(mean(&e[a.rounds + 1 - window..=a.rounds]));
        let rho = r
            .trace
            .column("capacity_degree_rank_corr")
            .expect("known column");
        rank_corr.push(mean(&rho[a.rounds + 1 - window..=a.rounds]));
    }
    let decreased = first10.iter().zip(&last10).filter(|(f, l)| l < f).count();
    let mut summary = json!({
        "experiment": config.experiment.label(),
        "n": config.n,
        "rounds": a.rounds,
        "completed_replicas": done.len(),
        "energy_first_window_median": median(&first10),
        "energy_last_window_median": median(&last10),
        "replicas_with_energy_decrease": decreased,
        "rank_corr_last_window_median": median(&rank_corr),
    });

    if a.shock && a.post_shock_rounds > 0 {
        let mut markers = Trace::new(["shock_after_round"]);
        markers.push(vec![a.rounds as f64]);
        dir.write_trace("markers.csv", &markers)?;
        let (g, s) = &first.last;
        dir.write(
            &format!("replica_{k0:03}_final.edges"),
            edge_list(g, &[format!("replica {k0} after the capacity shock")]),
        )?;
        dir.write_trace(
            &format!("replica_{k0:03}_final_nodes.csv"),
            &nodes_csv(g, s),
        )?;
        let mut shock = serde_json::Map::new();
        for col in ["mean_link_energy", "mean_link_free_energy"] {
            let resp: Vec<(f64, f64, f64)> = done
                .iter()
                .map(|(_, r)| shock_response(&r.trace, col, a.rounds, a.post_shock_rounds))
                .collect();
            let spiked = resp.iter().filter(|(pre, peak, _)| peak > pre).count();
            let recovered = resp.iter().filter(|(_, peak, end)| end < peak).count();
            shock.insert(
                col.to_string(),
                json!({
                    "pre_median": median(&resp.iter().map(|r| r.0).collect::<Vec<_>>()),
                    "peak_median": median(&resp.iter().map(|r| r.1).collect::<Vec<_>>()),
                    "end_median": median(&resp.iter().map(|r| r.2).collect::<Vec<_>>()),
                    "replicas_spiked": spiked,
                    "replicas_recovered": recovered,
                }),
            );
        }
        summary["shock"] = Value::Object(shock);
    }
    Ok(Done { failures, summary })
}

const ATTACK_COLUMNS: [&str; 8] = [
    "gamma",
    "gamma_f",
    "giant_fraction_before",
    "giant_fraction_after",
    "components_after",
    "isolated_after",
    "edges_before",
    "edges_after",
];

struct AttackReplica {
    trace: Trace,
    graphs: Vec<(Graph, Graph)>,
}

fn attack_network(
    config: &ExperimentConfig,
    gamma: f64,
    k: usize,
    gi: usize,
) -> Result<Graph, HarnessError> {
    let n = config.n;
    let mut rng = substream(config.seed, k as u64, gi as u64);
    Ok(match config.attack.source {
        AttackSource::Zeta => EnsembleSpec::zeta(n, gamma).generate(&mut rng)?.graph,
        AttackSource::Rewired => {
            let p = config.seed_graph.mean_degree / (n - 1) as f64;
            let mut g = gnp_generate(n, p, &mut rng)?;
            let ids = Identifiers::random(n, &mut rng);
            let schedule = [ScheduleBlock {
                gamma,
                sweeps: config.attack.sweeps,
            }];
            adaptation_schedule(
                &mut g,
                &ids,
                &schedule,
                config.walk_length(),
                config.rewire.max_retries,
                &mut rng,
            )?;
            g
        }
    })
}

fn attack_replica(config: &ExperimentConfig, k: usize) -> Result<AttackReplica, HarnessError> {
    let mut trace = Trace::new(ATTACK_COLUMNS);
    let mut graphs = Vec::new();
    for (gi, &gamma) in config.attack.gammas.iter().enumerate() {
        let g = attack_network(config, gamma, k, gi)?;
        let fit = fit_power_law(&g.degree_sequence()).ok();
        let (survivors, r) = remove_top_degree_nodes(&g, config.attack.fraction)?;
        trace.push(vec![
            gamma,
            opt(fit.map(|f| f.gamma_f)),
            g.connected_components().giant_fraction,
            r.giant_fraction_after,
            r.components_after.component_count() as f64,
            survivors.isolated_count() as f64,
            g.edge_count() as f64,
            survivors.edge_count() as f64,
        ]);
        graphs.push((g, survivors));
    }
    Ok(AttackReplica { trace, graphs })
}

fn attack(config: &ExperimentConfig, dir: &mut RunDir) -> Result<Done, HarnessError> {
    let (done, failures) = run_replicas(config.replicas, |k| attack_replica(config, k))?;
    let traces: Vec<(usize, Trace)> = done.iter().map(|(k, r)| (*k, r.trace.clone())).collect();
    write_replicas(dir, &traces)?;

    let (k0, first) = &done[0];
    for (&gamma, (g, survivors)) in config.attack.gammas.iter().zip(&first.graphs) {
        dir.write(
            &format!("network_gamma_{gamma}.edges"),
            edge_list(g, &[format!("replica {k0}, gamma {gamma}, before attack")]),
        )?;
        dir.write(
            &format!("survivors_gamma_{gamma}.edges"),
            edge_list(
                survivors,
                &[format!(
                    "replica {k0}, gamma {gamma}, top {} by degree removed",
                    config.attack.fraction
                )],
            ),
        )?;
    }

    let per_gamma: Vec<Value> = config
        .attack
        .gammas
        .iter()
        .enumerate()
        .map(|(i, &gamma)| {
            let col = |name: &str| -> Vec<f64> {
                done.iter()
                    .map(|(_, r)| {
                        r.trace.rows[i][r.trace.column_index(name).expect("known column")]
                    })
                    .collect()
            };
            let giant = col("giant_fraction_after");
            json!({
                "gamma": gamma,
                "mean_giant_fraction_after": mean(&giant),
                "std_giant_fraction_after": std_dev(&giant),
                "mean_components_after": mean(&col("components_after")),
                "mean_isolated_after": mean(&col("isolated_after")),
                "median_gamma_f": median_of(col("gamma_f")),
            })
        })
        .collect();
    let lo = &per_gamma[0];
    let hi = &per_gamma[per_gamma.len() - 1];
    let comparison = json!({
        "n": config.n,
        "fraction": config.attack.fraction,
        "source": config.attack.source,
        "completed_replicas": done.len(),
        "per_gamma": per_gamma,
        "giant_larger_at_highest_gamma":
            hi["mean_giant_fraction_after"].as_f64() > lo["mean_giant_fraction_after"].as_f64(),
        "more_components_at_lowest_gamma":
            lo["mean_components_after"].as_f64() > hi["mean_components_after"].as_f64(),
    });
    dir.write_json("comparison.json", &comparison)?;
    Ok(Done {
        failures,
        summary: comparison,
    })
}

fn percolation(config: &ExperimentConfig, dir: &mut RunDir) -> Result<Done, HarnessError> {
    let perc = &config.percolation;
    let spec = perc.ensemble(config.n);
    let plan = PercolationPlan {
        fractions: perc.resolved_fractions(),
        mode: perc.mode,
        replicas: config.replicas,
        seed: config.seed,
        giant_threshold: perc.giant_threshold,
    };
    plan.validate()?;
    let (done, failures) = run_replicas(config.replicas, |k| {
        percolation_replica(&spec, &plan, k as u64).map_err(HarnessError::from)
    })?;
    let traces: Vec<(usize, Trace)> = done
        .iter()
        .map(|(k, curve)| {
            let mut t = Trace::new(["fraction", "giant_fraction", "giant_fraction_of_original"]);
            for (&f, &(s, o)) in plan.fractions.iter().zip(curve) {
                t.push(vec![f, s, o]);
            }
            (*k, t)
        })
        .collect();
    let agg = write_replicas(dir, &traces)?;
    let curves: Vec<Vec<(f64, f64)>> = done.into_iter().map(|(_, c)| c).collect();
    let table = PercolationTable::from_replicas(&spec, &plan, &curves);
    let mut csv = Vec::new();
    table.write_csv(&mut csv)?;
    dir.write("percolation_table.csv", csv)?;
    dir.write_plot(
        PlotKind::PercolationCurve,
        &PlotInputs {
            aggregate: Some(&agg),
            ..Default::default()
        },
    )?;

    let prediction = match perc.model {
        ModelKind::Zeta => TheoryPrediction::for_zeta(perc.gamma)?,
        ModelKind::Gnp => TheoryPrediction::for_gnp(config.n, spec.parameter(), None)?,
    };
    // A giant that never drops below the threshold is reported as 1.
    let empirical = table.critical_fraction.unwrap_or(1.0);
    let mut measured = BTreeMap::new();
    measured.insert("critical_failure_fraction".to_string(), empirical);
    let tol = Tolerances {
        critical_failure_fraction: perc.tolerance,
        ..Tolerances::default()
    };
    let report = if prediction.critical_failure_fraction.is_some() {
        let r = compare_with_theory(
            &measured,
            &prediction,
            &["critical_failure_fraction"],
            None,
            &tol,
        )?;
        dir.write_json("theory_report.json", &r)?;
        Some(r)
    } else {
        None
    };
    let summary = json!({
        "experiment": config.experiment.label(),
        "model": perc.model,
        "parameter": spec.parameter(),
        "n": config.n,
        "mode": perc.mode,
        "completed_replicas": curves.len(),
        "critical_fraction": table.critical_fraction,
        "giant_threshold": perc.giant_threshold,
        "prediction": prediction,
        "theory_report": report,
    });
    Ok(Done { failures, summary })
}

const SPECTRUM_COLUMNS: [&str; 9] = [
    "row",
    "lambda1",
    "semicircle_violations",
    "lambda2",
    "lambda_n",
    "eigenratio",
    "sync_stable",
    "consensus_time",
    "giant_fraction",
];

struct SpectrumReplica {
    trace: Trace,
    adjacency: crate::spectral::Spectrum,
    laplacian: crate::spectral::Spectrum,
}

fn spectrum_replica(config: &ExperimentConfig, k: usize) -> Result<SpectrumReplica, HarnessError> {
    let s = &config.spectrum;
    let n = config.n;
    let p = s.resolved_p(n);
    let mut rng = replica_stream(config.seed, k as u64);
    let g = gnp_generate(n, p, &mut rng)?;
    let adjacency = adjacency_spectrum(&g)?;
    let laplacian = laplacian_spectrum(&g)?;
    let edge = semicircle_half_width(n, p);
    let violations = adjacency
        .eigenvalues
        .iter()
        .filter(|x| x.abs() >= edge)
        .count();
    let (ratio, stable, time) = match sync_is_stable(&laplacian, s.sync_beta) {
        Ok(sync) => {
            let l2 = laplacian.lambda2().expect("connected");
            let t = consensus_time(
                l2,
                s.consensus_c,
                s.consensus_epsilon,
                ConsensusGrouping::default(),
            )
            .unwrap_or(f64::NAN);
            (sync.eigenratio, if sync.stable { 1.0 } else { 0.0 }, t)
        }
        Err(_) => (f64::NAN, f64::NAN, f64::NAN),
    };
    let mut trace = Trace::new(SPECTRUM_COLUMNS);
    trace.push(vec![
        0.0,
        adjacency.largest().unwrap_or(f64::NAN),
        violations as f64,
        laplacian.lambda2().unwrap_or(f64::NAN),
        laplacian.largest().unwrap_or(f64::NAN),
        ratio,
        stable,
        time,
        g.connected_components().giant_fraction,
    ]);
    Ok(SpectrumReplica {
        trace,
        adjacency,
        laplacian,
    })
}

fn spectrum(config: &ExperimentConfig, dir: &mut RunDir) -> Result<Done, HarnessError> {
    let s = &config.spectrum;
    let n = config.n;
    let p = s.resolved_p(n);
    let (done, failures) = run_replicas(config.replicas, |k| spectrum_replica(config, k))?;
    let traces: Vec<(usize, Trace)> = done.iter().map(|(k, r)| (*k, r.trace.clone())).collect();
    write_replicas(dir, &traces)?;

    let (k0, first) = &done[0];
    for spec in [&first.adjacency, &first.laplacian] {
        let mut buf = Vec::new();
        spec.write_csv(&mut buf)?;
        dir.write(
            &format!(
                "replica_{k0:03}_{}_spectrum.csv",
                spec.kind.label().to_lowercase()
            ),
            buf,
        )?;
    }
    let pooled: Vec<f64> = done
        .iter()
        .flat_map(|(_, r)| r.adjacency.eigenvalues.iter().copied())
        .collect();
    dir.write_plot(
        PlotKind::SpectrumHist,
        &PlotInputs {
            eigenvalues: Some((&pooled, n, p)),
            bins: s.bins,
            ..Default::default()
        },
    )?;

    let col = |name: &str| -> Vec<f64> {
        done.iter()
            .map(|(_, r)| r.trace.column(name).expect("known column")[0])
            .collect()
    };
    let lambda1 = col("lambda1");
    let np = n as f64 * p;
    let mut measured = BTreeMap::new();
    measured.insert("largest_adjacency_eigenvalue".to_string(), median(&lambda1));
    let prediction = TheoryPrediction::for_gnp(n, p, None)?;
    let report = compare_with_theory(
        &measured,
        &prediction,
        &["largest_adjacency_eigenvalue"],
        Some(np),
        &Tolerances::default(),
    )?;
    dir.write_json("theory_report.json", &report)?;
    let violations = col("semicircle_violations");
    let summary = json!({
        "experiment": config.experiment.label(),
        "n": n,
        "p": p,
        "np": np,
        "completed_replicas": done.len(),
        "semicircle_half_width": semicircle_half_width(n, p),
        "max_semicircle_violations": violations.iter().copied().fold(0.0, f64::max),
        "lambda1_min": lambda1.iter().copied().fold(f64::INFINITY, f64::min),
        "lambda1_max": lambda1.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        "lambda1_median": median(&lambda1),
        "lambda2_median": median_of(col("lambda2")),
        "eigenratio_median": median_of(col("eigenratio")),
        "consensus_time_median": median_of(col("consensus_time")),
        "theory_report": report,
    });
    Ok(Done { failures, summary })
}
