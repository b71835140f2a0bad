//! Ensemble enforcement by biased random-walk rewiring.
//!
//! Every node carries a random identifier in `(0, 1]`. To rewire an edge
//! `{i, j}`, the initiating endpoint deletes it and sends a sampling
//! message on two consecutive biased random walks of length `l`; the two
//! endpoints found, `v` and `w`, are joined if they are distinct and not
//! yet adjacent. A walk at node `i` proposes a uniformly random neighbor
//! `j` and moves there with probability
//!
//! ```text
//! min(1, (d_i / d_j) * (id_i / id_j)^(1 / (gamma - 1)))
//! ```
//!
//! and otherwise stays put. This is a Metropolis-Hastings chain whose
//! stationary law is `pi_i ∝ id_i^(-1/(gamma-1))`; edges whose endpoints
//! follow that law produce a degree distribution with tail exponent
//! `gamma`.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, ModelError};
use crate::fit::{fit_power_law, FitResult};
use crate::graph::Graph;

/// Per-node identifiers drawn uniformly from `(0, 1]`; not necessarily unique.
#[derive(Debug, Clone, PartialEq)]
pub struct Identifiers(Vec<f64>);

impl Identifiers {
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        // random() is in [0, 1); flip it onto (0, 1].
        Self((0..n).map(|_| 1.0 - rng.random::<f64>()).collect())
    }

    pub fn from_vec(ids: Vec<f64>) -> Result<Self, ModelError> {
        if let Some(bad) = ids.iter().find(|&&x| !(x > 0.0 && x <= 1.0)) {
            return Err(invalid(
                "identifier",
                format!("must lie in (0, 1], got {bad}"),
            ));
        }
        Ok(Self(ids))
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Unclamped forwarding weight `(d_i / d_j) (id_i / id_j)^(1/(gamma-1))`.
pub fn raw_transition_ratio(
    d_i: usize,
    d_j: usize,
    id_i: f64,
    id_j: f64,
    gamma: f64,
) -> Result<f64, ModelError> {
    if d_i == 0 || d_j == 0 {
        return Err(invalid(
            "degree",
            "walk endpoints must have positive degree",
        ));
    }
    if !(id_i > 0.0 && id_j > 0.0) {
        return Err(invalid("identifier", "identifiers must be positive"));
    }
    if !(gamma > 1.0) {
        return Err(invalid("gamma", format!("must exceed 1, got {gamma}")));
    }
    Ok(ratio(d_i, d_j, id_i, id_j, 1.0 / (gamma - 1.0)))
}

#[inline]
fn ratio(d_i: usize, d_j: usize, id_i: f64, id_j: f64, exponent: f64) -> f64 {
    (d_i as f64 / d_j as f64) * (id_i / id_j).powf(exponent)
}

/// Metropolis-Hastings acceptance: the forwarding weight clamped to 1.
pub fn transition_probability(
    d_i: usize,
    d_j: usize,
    id_i: f64,
    id_j: f64,
    gamma: f64,
) -> Result<f64, ModelError> {
    raw_transition_ratio(d_i, d_j, id_i, id_j, gamma).map(|r| r.min(1.0))
}

/// One lazy step from `i`: propose a uniform neighbor, accept or stay.
#[inline]
fn walk_step<R: Rng + ?Sized>(
    g: &Graph,
    ids: &Identifiers,
    i: usize,
    exponent: f64,
    rng: &mut R,
) -> usize {
    let nbrs = g.neighbors(i);
    let j = nbrs[rng.random_range(0..nbrs.len())];
    let accept = ratio(nbrs.len(), g.degree(j), ids.get(i), ids.get(j), exponent);
    if accept >= 1.0 || rng.random::<f64>() < accept {
        j
    } else {
        i
    }
}

/// Runs `steps` biased steps from `start` and returns the final node.
pub fn biased_walk<R: Rng + ?Sized>(
    g: &Graph,
    ids: &Identifiers,
    start: usize,
    steps: usize,
    gamma: f64,
    rng: &mut R,
) -> Result<usize, ModelError> {
    if start >= g.node_count() {
        return Err(invalid("start", "node index out of range"));
    }
    if g.degree(start) == 0 {
        return Err(ModelError::IsolatedNode(start));
    }
    if !(gamma > 1.0) {
        return Err(invalid("gamma", format!("must exceed 1, got {gamma}")));
    }
    let exponent = 1.0 / (gamma - 1.0);
    let mut at = start;
    for _ in 0..steps {
        at = walk_step(g, ids, at, exponent, rng);
    }
    Ok(at)
}

/// Explicit transition matrix of the lazy biased walk (rows of isolated
/// nodes are the identity).
pub fn transition_matrix(
    g: &Graph,
    ids: &Identifiers,
    gamma: f64,
) -> Result<Vec<Vec<f64>>, ModelError> {
    let n = g.node_count();
    let mut m = vec![vec![0.0; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        let d = g.degree(i);
        if d == 0 {
            row[i] = 1.0;
            continue;
        }
        let mut stay = 1.0;
        for &j in g.neighbors(i) {
            let p =
                transition_probability(d, g.degree(j), ids.get(i), ids.get(j), gamma)? / d as f64;
            row[j] = p;
            stay -= p;
        }
        // Rounding can leave -1e-16 when every proposal is accepted.
        row[i] += stay.max(0.0);
    }
    Ok(m)
}

/// Target law `pi_i ∝ id_i^(-1/(gamma-1))` over non-isolated nodes; all
/// zero for an edgeless graph.
pub fn stationary_target(g: &Graph, ids: &Identifiers, gamma: f64) -> Vec<f64> {
    let exponent = -1.0 / (gamma - 1.0);
    let w: Vec<f64> = (0..g.node_count())
        .map(|i| {
            if g.degree(i) > 0 {
                ids.get(i).powf(exponent)
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = w.iter().sum();
    if total == 0.0 {
        return w;
    }
    w.into_iter().map(|x| x / total).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewireConfig {
    pub gamma: f64,
    pub walk_length: usize,
    /// Fresh walk pairs tried after a conflicting first proposal.
    pub max_retries: usize,
}

impl RewireConfig {
    /// Walk length `ceil(ln n)`, three retries.
    pub fn for_network(n: usize, gamma: f64) -> Self {
        Self {
            gamma,
            walk_length: default_walk_length(n),
            max_retries: 3,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.gamma > 2.0) {
            return Err(invalid(
                "gamma",
                format!("gamma must exceed 2, got {}", self.gamma),
            ));
        }
        if self.walk_length == 0 {
            return Err(invalid("walk_length", "must be at least 1"));
        }
        Ok(())
    }
}

pub fn default_walk_length(n: usize) -> usize {
    ((n.max(2) as f64).ln().ceil() as usize).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewireOutcome {
    Relocated {
        removed: (usize, usize),
        added: (usize, usize),
        attempts: usize,
    },
    /// Every proposal conflicted; the original edge was put back.
    Restored {
        removed: (usize, usize),
        attempts: usize,
    },
}

impl RewireOutcome {
    pub fn attempts(&self) -> usize {
        match *self {
            RewireOutcome::Relocated { attempts, .. }
            | RewireOutcome::Restored { attempts, .. } => attempts,
        }
    }
}

/// Rewires the edge `{initiator, other}`: delete it, walk `l` steps from
/// the initiator to find `v`, another `l` steps from `v` to find `w`, and
/// add `{v, w}`. If the initiator was left isolated by the deletion the
/// walks start from `other` instead; if both are isolated, or every one of
/// the `1 + max_retries` proposals conflicts, the edge is restored.
pub fn rewire_edge<R: Rng + ?Sized>(
    g: &mut Graph,
    ids: &Identifiers,
    (initiator, other): (usize, usize),
    config: &RewireConfig,
    rng: &mut R,
) -> Result<RewireOutcome, ModelError> {
    if !g.remove_edge(initiator, other)? {
        return Err(invalid(
            "edge",
            format!("{{{initiator},{other}}} is not in the graph"),
        ));
    }
    let removed = (initiator, other);
    let start = if g.degree(initiator) > 0 {
        initiator
    } else if g.degree(other) > 0 {
        other
    } else {
        g.add_edge(initiator, other)?;
        return Ok(RewireOutcome::Restored {
            removed,
            attempts: 0,
        });
    };
    let exponent = 1.0 / (config.gamma - 1.0);
    let attempts = 1 + config.max_retries;
    for attempt in 1..=attempts {
        let mut v = start;
        for _ in 0..config.walk_length {
            v = walk_step(g, ids, v, exponent, rng);
        }
        let mut w = v;
        for _ in 0..config.walk_length {
            w = walk_step(g, ids, w, exponent, rng);
        }
        if v != w && g.add_edge(v, w)? {
            return Ok(RewireOutcome::Relocated {
                removed,
                added: (v, w),
                attempts: attempt,
            });
        }
    }
    g.add_edge(initiator, other)?;
    Ok(RewireOutcome::Restored { removed, attempts })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SweepReport {
    pub edges_processed: usize,
    pub relocated: usize,
    /// Proposals rejected because `v == w` or `{v, w}` already existed.
    pub conflicts: usize,
    pub restores: usize,
    pub isolated_nodes: usize,
}

/// Rewires every edge present at the start of the sweep exactly once, in
/// shuffled order and from a randomly chosen endpoint.
pub fn rewiring_sweep<R: Rng + ?Sized>(
    g: &mut Graph,
    ids: &Identifiers,
    config: &RewireConfig,
    rng: &mut R,
) -> Result<SweepReport, ModelError> {
    config.validate()?;
    if ids.len() != g.node_count() {
        return Err(invalid("identifiers", "one identifier per node required"));
    }
    let mut snapshot = g.edges();
    snapshot.shuffle(rng);
    let mut report = SweepReport::default();
    for (a, b) in snapshot {
        // Only the edge being processed is ever deleted, so snapshot edges
        // are still present when their turn comes.
        debug_assert!(g.has_edge(a, b));
        let pair = if rng.random::<bool>() { (a, b) } else { (b, a) };
        let outcome = rewire_edge(g, ids, pair, config, rng)?;
        report.edges_processed += 1;
        match outcome {
            RewireOutcome::Relocated { attempts, .. } => {
                report.relocated += 1;
                report.conflicts += attempts - 1;
            }
            RewireOutcome::Restored { attempts, .. } => {
                report.restores += 1;
                report.conflicts += attempts;
            }
        }
    }
    report.isolated_nodes = g.isolated_count();
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleBlock {
    pub gamma: f64,
    pub sweeps: usize,
}

/// One row per sweep of an adaptation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptationRow {
    /// 1-based, counted across blocks.
    pub sweep: usize,
    pub block: usize,
    pub gamma_target: f64,
    pub gamma_f: Option<f64>,
    pub ks_d: Option<f64>,
    pub k_min: Option<usize>,
    pub giant_fraction: f64,
    pub conflicts: usize,
    pub restores: usize,
    pub isolated_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationTrace {
    /// Fit of the graph before the first sweep.
    pub initial_fit: Option<FitResult>,
    pub rows: Vec<AdaptationRow>,
    /// Sweep indices after which a block ends.
    pub block_ends: Vec<usize>,
}

impl AdaptationTrace {
    /// KS distance at the start of `block`: the initial fit for block 0,
    /// otherwise the last row of the previous block.
    pub fn block_start_ks(&self, block: usize) -> Option<f64> {
        if block == 0 {
            return self.initial_fit.map(|f| f.ks_d);
        }
        let end = *self.block_ends.get(block - 1)?;
        self.rows.get(end.checked_sub(1)?)?.ks_d
    }

    pub fn block_end_row(&self, block: usize) -> Option<&AdaptationRow> {
        let end = *self.block_ends.get(block)?;
        self.rows.get(end.checked_sub(1)?)
    }
}

/// Runs the rewiring protocol through consecutive `(gamma, sweeps)` blocks,
/// fitting the degree distribution after every sweep.
pub fn adaptation_schedule<R: Rng + ?Sized>(
    g: &mut Graph,
    ids: &Identifiers,
    schedule: &[ScheduleBlock],
    walk_length: usize,
    max_retries: usize,
    rng: &mut R,
) -> Result<AdaptationTrace, ModelError> {
    if schedule.is_empty() {
        return Err(invalid("schedule", "must contain at least one block"));
    }
    let mut trace = AdaptationTrace {
        initial_fit: fit_power_law(&g.degree_sequence()).ok(),
        rows: Vec::with_capacity(schedule.iter().map(|b| b.sweeps).sum()),
        block_ends: Vec::with_capacity(schedule.len()),
    };
    for (block, entry) in schedule.iter().enumerate() {
        let config = RewireConfig {
            gamma: entry.gamma,
            walk_length,
            max_retries,
        };
        config.validate()?;
        for _ in 0..entry.sweeps {
            let report = rewiring_sweep(g, ids, &config, rng)?;
            let fit = fit_power_law(&g.degree_sequence()).ok();
            trace.rows.push(AdaptationRow {
                sweep: trace.rows.len() + 1,
                block,
                gamma_target: entry.gamma,
                gamma_f: fit.map(|f| f.gamma_f),
                ks_d: fit.map(|f| f.ks_d),
                k_min: fit.map(|f| f.k_min),
                giant_fraction: g.connected_components().giant_fraction,
                conflicts: report.conflicts,
                restores: report.restores,
                isolated_nodes: report.isolated_nodes,
            });
        }
        trace.block_ends.push(trace.rows.len());
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn kernel_examples() {
        assert_eq!(transition_probability(3, 3, 0.4, 0.4, 2.5).unwrap(), 1.0);
        let p = transition_probability(2, 6, 27e-3, 8e-3, 4.0).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        assert_eq!(transition_probability(4, 1, 0.3, 0.3, 3.0).unwrap(), 1.0);
        assert!((raw_transition_ratio(4, 1, 0.3, 0.3, 3.0).unwrap() - 4.0).abs() < 1e-15);
        assert!(transition_probability(0, 1, 0.3, 0.3, 3.0).is_err());
        assert!(transition_probability(1, 1, 0.0, 0.3, 3.0).is_err());
    }

    #[test]
    fn identifiers_in_half_open_unit_interval() {
        let ids = Identifiers::random(10_000, &mut seeded(1));
        assert!(ids.as_slice().iter().all(|&x| x > 0.0 && x <= 1.0));
        assert!(Identifiers::from_vec(vec![0.5, 0.0]).is_err());
        assert!(Identifiers::from_vec(vec![1.0, 1.0]).is_ok());
    }

    #[test]
    fn zero_length_walk_stays() {
        let g = Graph::complete(4);
        let ids = Identifiers::random(4, &mut seeded(0));
        assert_eq!(biased_walk(&g, &ids, 2, 0, 2.5, &mut seeded(1)).unwrap(), 2);
        let lonely = Graph::new(3);
        assert_eq!(
            biased_walk(&lonely, &ids, 0, 3, 2.5, &mut seeded(1)),
            Err(ModelError::IsolatedNode(0))
        );
    }

    #[test]
    fn two_node_graph_always_restores() {
        let mut g = Graph::complete(2);
        let ids = Identifiers::random(2, &mut seeded(0));
        let cfg = RewireConfig::for_network(2, 2.5);
        let mut rng = seeded(3);
        for _ in 0..20 {
            let out = rewire_edge(&mut g, &ids, (0, 1), &cfg, &mut rng).unwrap();
            assert!(matches!(out, RewireOutcome::Restored { .. }));
            assert!(g.has_edge(0, 1));
        }
    }

    #[test]
    fn sweep_conserves_edges() {
        let mut rng = seeded(12);
        let mut g = crate::ensemble::gnp_generate(300, 0.02, &mut rng).unwrap();
        let ids = Identifiers::random(300, &mut rng);
        let m = g.edge_count();
        let cfg = RewireConfig::for_network(300, 2.5);
        for _ in 0..5 {
            let rep = rewiring_sweep(&mut g, &ids, &cfg, &mut rng).unwrap();
            assert_eq!(g.edge_count(), m);
            assert_eq!(rep.edges_processed, m);
            assert_eq!(rep.relocated + rep.restores, m);
            assert_eq!(rep.isolated_nodes, g.isolated_count());
            g.check_invariants().unwrap();
        }
    }

    #[test]
    fn schedule_rows_and_boundaries() {
        let mut rng = seeded(2);
        let mut g = crate::ensemble::gnp_generate(200, 0.03, &mut rng).unwrap();
        let ids = Identifiers::random(200, &mut rng);
        let schedule = [
            ScheduleBlock {
                gamma: 2.1,
                sweeps: 2,
            },
            ScheduleBlock {
                gamma: 3.5,
                sweeps: 3,
            },
        ];
        let t = adaptation_schedule(&mut g, &ids, &schedule, 6, 3, &mut rng).unwrap();
        assert_eq!(t.rows.len(), 5);
        assert_eq!(t.block_ends, vec![2, 5]);
        assert_eq!(t.rows[2].block, 1);
        assert_eq!(t.rows[4].sweep, 5);
        assert!(adaptation_schedule(&mut g, &ids, &[], 6, 3, &mut rng).is_err());
        let bad = [ScheduleBlock {
            gamma: 1.5,
            sweeps: 1,
        }];
        assert!(adaptation_schedule(&mut g, &ids, &bad, 6, 3, &mut rng).is_err());
    }
}
