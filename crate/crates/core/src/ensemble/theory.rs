//! Closed-form predictions for G(n,p) and Zeta ensembles.
//!
//! Asymptotic results (diameter, percolation point) are order-of-magnitude
//! statements that hold asymptotically almost surely; they are returned
//! with [`Exactness::Asymptotic`] and must not be read as expectations.

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use super::zeta::riemann_zeta;
use crate::error::{invalid, ModelError};

pub const FORMULA_GRAPH_PROBABILITY: &str = "p^m * (1-p)^(n(n-1)/2 - m)";
pub const FORMULA_PERCOLATION: &str = "p_c = 1/n";
pub const FORMULA_DIAMETER: &str = "log(n) / log(np)";
pub const FORMULA_MOLLOY_REED: &str = "<k^2>/<k> > 2";
pub const FORMULA_CRITICAL_FAILURE: &str = "r = 1 - (zeta(gamma-2)/zeta(gamma-1) - 1)^(-1)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    Exact,
    Asymptotic,
}

pub fn gnp_log_graph_probability(n: usize, p: f64, m: usize) -> Result<f64, ModelError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid("p", format!("must lie in [0, 1], got {p}")));
    }
    let pairs = n * n.saturating_sub(1) / 2;
    if m > pairs {
        return Err(invalid(
            "m",
            format!("edge count {m} exceeds n(n-1)/2 = {pairs}"),
        ));
    }
    let absent = pairs - m;
    // 0 * ln(0) is taken as 0 so p in {0, 1} gives probability 1 or 0 correctly.
    let term = |count: usize, q: f64| {
        if count == 0 {
            0.0
        } else {
            count as f64 * q.ln()
        }
    };
    Ok(term(m, p) + term(absent, 1.0 - p))
}

/// Probability G(n,p) assigns to one specific graph with `m` edges.
pub fn gnp_graph_probability(n: usize, p: f64, m: usize) -> Result<f64, ModelError> {
    gnp_log_graph_probability(n, p, m).map(f64::exp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PercolationThreshold {
    pub critical_p: f64,
    /// Largest component at `p = 1/n` grows like `n^(2/3)`.
    pub critical_giant_order: f64,
}

pub fn percolation_threshold(n: usize) -> Result<PercolationThreshold, ModelError> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    let nf = n as f64;
    Ok(PercolationThreshold {
        critical_p: 1.0 / nf,
        critical_giant_order: nf.powf(2.0 / 3.0),
    })
}

/// `log(n) / log(np)`, valid only in the supercritical regime `np > 1`.
pub fn expected_diameter(n: usize, p: f64) -> Result<f64, ModelError> {
    let np = n as f64 * p;
    if !(np > 1.0) {
        return Err(ModelError::Subcritical(np));
    }
    Ok((n as f64).ln() / np.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MolloyReed {
    pub mean_degree: f64,
    pub second_moment: f64,
    pub kappa: f64,
    pub giant_exists: bool,
    /// `kappa == 2` up to rounding: the critical point itself.
    pub at_boundary: bool,
}

pub fn molloy_reed_ratio(degrees: &[usize]) -> Result<MolloyReed, ModelError> {
    if degrees.is_empty() {
        return Err(invalid("degree_sequence", "must be nonempty"));
    }
    let n = degrees.len() as f64;
    let first: f64 = degrees.iter().map(|&k| k as f64).sum::<f64>() / n;
    if first == 0.0 {
        return Err(invalid("degree_sequence", "all degrees are zero"));
    }
    let second: f64 = degrees.iter().map(|&k| (k * k) as f64).sum::<f64>() / n;
    let kappa = second / first;
    let at_boundary = (kappa - 2.0).abs() <= 1e-12 * kappa;
    Ok(MolloyReed {
        mean_degree: first,
        second_moment: second,
        kappa,
        giant_exists: kappa > 2.0 && !at_boundary,
        at_boundary,
    })
}

/// Fraction of random node failures that destroys the giant component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FailureThreshold {
    Finite(f64),
    /// `zeta(gamma - 2)` diverges: `gamma` in (2, 3), or exactly 3 with
    /// `boundary` set.
    TendsToOne {
        boundary: bool,
    },
}

impl FailureThreshold {
    pub fn value(&self) -> Option<f64> {
        match self {
            FailureThreshold::Finite(r) => Some(*r),
            FailureThreshold::TendsToOne { .. } => None,
        }
    }

    pub fn is_sentinel(&self) -> bool {
        matches!(self, FailureThreshold::TendsToOne { .. })
    }
}

impl Serialize for FailureThreshold {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            FailureThreshold::Finite(r) => s.serialize_f64(*r),
            FailureThreshold::TendsToOne { .. } => s.serialize_str("→1"),
        }
    }
}

pub fn critical_failure_fraction(gamma: f64) -> Result<FailureThreshold, ModelError> {
    if !(gamma > 2.0) {
        return Err(invalid(
            "gamma",
            format!("gamma must exceed 2, got {gamma}"),
        ));
    }
    if gamma < 3.0 {
        return Ok(FailureThreshold::TendsToOne { boundary: false });
    }
    if gamma == 3.0 {
        return Ok(FailureThreshold::TendsToOne { boundary: true });
    }
    let ratio = riemann_zeta(gamma - 2.0)? / riemann_zeta(gamma - 1.0)?;
    Ok(FailureThreshold::Finite(1.0 - 1.0 / (ratio - 1.0)))
}

/// Theory values for one ensemble, each tagged with the formula behind it.
///
/// Serializes as a flat JSON object: `<field>` plus `<field>_formula` and
/// `<field>_exactness` for every populated field.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TheoryPrediction {
    pub graph_probability: Option<f64>,
    pub percolation_critical_p: Option<f64>,
    pub expected_diameter: Option<f64>,
    pub giant_exists: Option<bool>,
    pub critical_failure_fraction: Option<FailureThreshold>,
}

impl TheoryPrediction {
    /// G(n,p) predictions; `m` selects the graph whose probability is reported.
    pub fn for_gnp(n: usize, p: f64, m: Option<usize>) -> Result<Self, ModelError> {
        let graph_probability = m.map(|m| gnp_graph_probability(n, p, m)).transpose()?;
        let np = n as f64 * p;
        Ok(Self {
            graph_probability,
            percolation_critical_p: Some(percolation_threshold(n)?.critical_p),
            expected_diameter: expected_diameter(n, p).ok(),
            giant_exists: Some(np > 1.0),
            critical_failure_fraction: if np > 1.0 {
                // Poisson degrees: kappa = c + 1, f_c = 1 - 1/(kappa - 1) = 1 - 1/c.
                Some(FailureThreshold::Finite(1.0 - 1.0 / np))
            } else {
                None
            },
        })
    }

    pub fn for_zeta(gamma: f64) -> Result<Self, ModelError> {
        // kappa = zeta(gamma-2)/zeta(gamma-1), infinite for gamma <= 3.
        let giant = gamma <= 3.0 || riemann_zeta(gamma - 2.0)? / riemann_zeta(gamma - 1.0)? > 2.0;
        Ok(Self {
            giant_exists: Some(giant),
            critical_failure_fraction: Some(critical_failure_fraction(gamma)?),
            ..Self::default()
        })
    }
}

impl Serialize for TheoryPrediction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(None)?;
        macro_rules! field {
            ($name:literal, $value:expr, $formula:expr, $exactness:expr) => {
                if let Some(v) = &$value {
                    map.serialize_entry($name, v)?;
                    map.serialize_entry(concat!($name, "_formula"), $formula)?;
                    map.serialize_entry(concat!($name, "_exactness"), &$exactness)?;
                }
            };
        }
        field!(
            "graph_probability",
            self.graph_probability,
            FORMULA_GRAPH_PROBABILITY,
            Exactness::Exact
        );
        field!(
            "percolation_critical_p",
            self.percolation_critical_p,
            FORMULA_PERCOLATION,
            Exactness::Asymptotic
        );
        field!(
            "expected_diameter",
            self.expected_diameter,
            FORMULA_DIAMETER,
            Exactness::Asymptotic
        );
        field!(
            "giant_exists",
            self.giant_exists,
            FORMULA_MOLLOY_REED,
            Exactness::Asymptotic
        );
        field!(
            "critical_failure_fraction",
            self.critical_failure_fraction,
            FORMULA_CRITICAL_FAILURE,
            Exactness::Asymptotic
        );
        map.end()
    }
}
