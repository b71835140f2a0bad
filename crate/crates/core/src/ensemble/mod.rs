//! Random graph ensembles: G(n,p), the Zeta configuration model, and the
//! closed-form theory that goes with them.

pub mod theory;
pub mod zeta;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, ModelError};
use crate::graph::Graph;

pub use theory::{
    critical_failure_fraction, expected_diameter, gnp_graph_probability, gnp_log_graph_probability,
    molloy_reed_ratio, percolation_threshold, FailureThreshold, MolloyReed, PercolationThreshold,
    TheoryPrediction,
};
pub use zeta::{hurwitz_zeta, riemann_zeta, zeta_degree_pmf, TruncatedZeta};

/// Target ensemble for generators and percolation sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleSpec {
    Gnp { n: usize, p: f64 },
    ZetaConfig { n: usize, gamma: f64, k_max: usize },
}

impl EnsembleSpec {
    pub fn gnp_mean_degree(n: usize, mean_degree: f64) -> Self {
        let p = if n > 1 {
            (mean_degree / (n - 1) as f64).clamp(0.0, 1.0)
        } else {
            0.0
        };
        EnsembleSpec::Gnp { n, p }
    }

    /// Zeta configuration model truncated at the simple-graph bound `n - 1`.
    pub fn zeta(n: usize, gamma: f64) -> Self {
        EnsembleSpec::ZetaConfig {
            n,
            gamma,
            k_max: n.saturating_sub(1).max(1),
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            EnsembleSpec::Gnp { n, .. } | EnsembleSpec::ZetaConfig { n, .. } => n,
        }
    }

    /// `p` for G(n,p), `gamma` for the Zeta ensemble.
    pub fn parameter(&self) -> f64 {
        match *self {
            EnsembleSpec::Gnp { p, .. } => p,
            EnsembleSpec::ZetaConfig { gamma, .. } => gamma,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match *self {
            EnsembleSpec::Gnp { n, p } => {
                if n == 0 {
                    return Err(invalid("n", "must be at least 1"));
                }
                if !(0.0..=1.0).contains(&p) {
                    return Err(invalid("p", format!("must lie in [0, 1], got {p}")));
                }
            }
            EnsembleSpec::ZetaConfig { n, gamma, k_max } => {
                if n == 0 {
                    return Err(invalid("n", "must be at least 1"));
                }
                if !(gamma > 2.0) {
                    return Err(invalid(
                        "gamma",
                        format!("gamma must exceed 2, got {gamma}"),
                    ));
                }
                if k_max == 0 || (n > 1 && k_max > n - 1) {
                    return Err(invalid(
                        "k_max",
                        format!("must lie in [1, n-1], got {k_max}"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Generated, ModelError> {
        self.validate()?;
        match *self {
            EnsembleSpec::Gnp { n, p } => Ok(Generated {
                graph: gnp_generate(n, p, rng)?,
                discarded_self_loops: 0,
                discarded_multi_edges: 0,
            }),
            EnsembleSpec::ZetaConfig { n, gamma, k_max } => {
                zeta_config_generate(n, gamma, k_max, rng)
            }
        }
    }
}

/// A generated graph plus what the generator had to throw away.
#[derive(Debug, Clone)]
pub struct Generated {
    pub graph: Graph,
    pub discarded_self_loops: usize,
    pub discarded_multi_edges: usize,
}

/// G(n,p) by geometric skipping over the `n(n-1)/2` candidate pairs, so the
/// cost is O(n + m) rather than O(n^2).
pub fn gnp_generate<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Graph, ModelError> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid("p", format!("must lie in [0, 1], got {p}")));
    }
    if p == 1.0 {
        return Ok(Graph::complete(n));
    }
    let mut g = Graph::new(n);
    if p == 0.0 {
        return Ok(g);
    }
    let log_q = (1.0 - p).ln();
    let mut v: usize = 1;
    let mut w: i64 = -1;
    while v < n {
        let r: f64 = rng.random();
        let skip = ((1.0 - r).ln() / log_q).floor();
        w += 1 + if skip.is_finite() {
            skip as i64
        } else {
            i64::MAX / 4
        };
        while v < n && w >= v as i64 {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            g.add_edge(v, w as usize)?;
        }
    }
    Ok(g)
}

/// Configuration model with i.i.d. truncated-Zeta degrees.
///
/// Stubs are matched uniformly at random; self-loops and repeated pairs
/// produced by the matching are dropped and counted. An odd degree sum is
/// fixed by redrawing one uniformly chosen node's degree.
pub fn zeta_config_generate<R: Rng + ?Sized>(
    n: usize,
    gamma: f64,
    k_max: usize,
    rng: &mut R,
) -> Result<Generated, ModelError> {
    EnsembleSpec::ZetaConfig { n, gamma, k_max }.validate()?;
    let law = TruncatedZeta::new(gamma, k_max)?;
    let mut degrees: Vec<usize> = (0..n).map(|_| law.sample(rng)).collect();
    fix_parity(&mut degrees, &law, rng);

    let mut stubs: Vec<usize> = degrees
        .iter()
        .enumerate()
        .flat_map(|(v, &d)| std::iter::repeat_n(v, d))
        .collect();
    stubs.shuffle(rng);

    let mut graph = Graph::new(n);
    let mut discarded_self_loops = 0;
    let mut discarded_multi_edges = 0;
    for pair in stubs.chunks_exact(2) {
        let (a, b) = (pair[0], pair[1]);
        if a == b {
            discarded_self_loops += 1;
        } else if !graph.add_edge(a, b)? {
            discarded_multi_edges += 1;
        }
    }
    Ok(Generated {
        graph,
        discarded_self_loops,
        discarded_multi_edges,
    })
}

fn fix_parity<R: Rng + ?Sized>(degrees: &mut [usize], law: &TruncatedZeta, rng: &mut R) {
    const MAX_REDRAWS: usize = 1000;
    if degrees.is_empty() || degrees.iter().sum::<usize>() % 2 == 0 {
        return;
    }
    for _ in 0..MAX_REDRAWS {
        let v = rng.random_range(0..degrees.len());
        let old = degrees[v];
        let new = law.sample(rng);
        degrees[v] = new;
        if (old + new).is_multiple_of(2) {
            // parity unchanged, keep trying from the new state
            continue;
        }
        return;
    }
    // Only reachable when every redraw has the same parity (k_max = 1 with
    // odd n): drop a single stub.
    if let Some(d) = degrees.iter_mut().find(|d| **d > 0) {
        *d -= 1;
    }
}
