//! Discrete power-law fitting of degree sequences.
//!
//! For each candidate lower cutoff `k_min` the exponent is the maximum
//! likelihood estimate under `P(k) = k^-gamma / zeta(gamma, k_min)`, and
//! the goodness of fit is the Kolmogorov-Smirnov distance between the
//! empirical and fitted CDFs on `k >= k_min`. The reported fit is the
//! candidate with the smallest distance.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ensemble::zeta::hurwitz_unchecked;
use crate::error::{invalid, ModelError};

/// Fits on fewer tail observations than this are not attempted.
pub const MIN_TAIL: usize = 10;
const GAMMA_LOWER: f64 = 1.0 + 1e-6;
/// Upper end of the exponent search interval.
pub const GAMMA_UPPER: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub gamma_f: f64,
    pub k_min: usize,
    /// KS distance; set to 1 for degenerate inputs, which carry no
    /// power-law tail at all.
    pub ks_d: f64,
    pub n_tail: usize,
    /// No cutoff leaves at least two distinct degree values in the tail.
    #[serde(default)]
    pub degenerate: bool,
}

/// Sorted `(degree, count)` of the nonzero entries.
fn histogram(degrees: &[usize]) -> Vec<(usize, usize)> {
    let mut h = BTreeMap::new();
    for &d in degrees.iter().filter(|&&d| d > 0) {
        *h.entry(d).or_insert(0usize) += 1;
    }
    h.into_iter().collect()
}

pub fn fit_power_law(degrees: &[usize]) -> Result<FitResult, ModelError> {
    let hist = histogram(degrees);
    let total: usize = hist.iter().map(|&(_, c)| c).sum();
    if total < MIN_TAIL {
        return Err(ModelError::TooFewObservations {
            found: total,
            required: MIN_TAIL,
        });
    }
    // Suffix sums: tail counts and sums of ln k for each cutoff index.
    let mut tail_n = vec![0usize; hist.len() + 1];
    let mut tail_log = vec![0.0f64; hist.len() + 1];
    for idx in (0..hist.len()).rev() {
        let (k, c) = hist[idx];
        tail_n[idx] = tail_n[idx + 1] + c;
        tail_log[idx] = tail_log[idx + 1] + c as f64 * (k as f64).ln();
    }

    let mut best: Option<FitResult> = None;
    // The last distinct value never qualifies: its tail has a single value.
    for idx in 0..hist.len().saturating_sub(1) {
        if tail_n[idx] < MIN_TAIL {
            break;
        }
        let k_min = hist[idx].0;
        let gamma = mle_exponent(k_min, tail_n[idx], tail_log[idx]);
        let ks_d = ks_distance(&hist[idx..], tail_n[idx], k_min, gamma);
        if best.is_none_or(|b| ks_d < b.ks_d) {
            best = Some(FitResult {
                gamma_f: gamma,
                k_min,
                ks_d,
                n_tail: tail_n[idx],
                degenerate: false,
            });
        }
    }
    Ok(best.unwrap_or(FitResult {
        gamma_f: GAMMA_UPPER,
        k_min: hist[0].0,
        ks_d: 1.0,
        n_tail: total,
        degenerate: true,
    }))
}

/// MLE and KS distance with the cutoff held fixed.
pub fn fit_power_law_fixed_kmin(degrees: &[usize], k_min: usize) -> Result<FitResult, ModelError> {
    if k_min == 0 {
        return Err(invalid("k_min", "must be at least 1"));
    }
    let hist: Vec<(usize, usize)> = histogram(degrees)
        .into_iter()
        .filter(|&(k, _)| k >= k_min)
        .collect();
    let n_tail: usize = hist.iter().map(|&(_, c)| c).sum();
    if n_tail < MIN_TAIL {
        return Err(ModelError::TooFewObservations {
            found: n_tail,
            required: MIN_TAIL,
        });
    }
    let sum_log: f64 = hist.iter().map(|&(k, c)| c as f64 * (k as f64).ln()).sum();
    let gamma = mle_exponent(k_min, n_tail, sum_log);
    Ok(FitResult {
        gamma_f: gamma,
        k_min,
        ks_d: ks_distance(&hist, n_tail, k_min, gamma),
        n_tail,
        degenerate: hist.len() < 2,
    })
}

/// Mean log-likelihood per observation; concave in `gamma`.
fn log_likelihood(gamma: f64, k_min: usize, n: usize, sum_log: f64) -> f64 {
    -gamma * sum_log / n as f64 - hurwitz_unchecked(gamma, k_min as f64).ln()
}

/// Golden-section maximization on `[GAMMA_LOWER, GAMMA_UPPER]`.
fn mle_exponent(k_min: usize, n: usize, sum_log: f64) -> f64 {
    let ll = |g: f64| log_likelihood(g, k_min, n, sum_log);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (GAMMA_LOWER, GAMMA_UPPER);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (ll(c), ll(d));
    while b - a > 1e-10 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = ll(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = ll(d);
        }
    }
    0.5 * (a + b)
}

/// `max_k |F_emp(k) - F_fit(k)|` over integer `k` from `k_min` to the largest
/// observation; both CDFs are step functions on the integers.
fn ks_distance(tail: &[(usize, usize)], n_tail: usize, k_min: usize, gamma: f64) -> f64 {
    let z_min = hurwitz_unchecked(gamma, k_min as f64);
    let k_last = tail.last().map_or(k_min, |&(k, _)| k);
    let mut fitted_cdf = 0.0;
    let mut emp_count = 0usize;
    let mut next = 0;
    let mut d: f64 = 0.0;
    for k in k_min..=k_last {
        fitted_cdf += (k as f64).powf(-gamma) / z_min;
        if next < tail.len() && tail[next].0 == k {
            emp_count += tail[next].1;
            next += 1;
        }
        let emp = emp_count as f64 / n_tail as f64;
        d = d.max((emp - fitted_cdf).abs());
    }
    d.min(1.0)
}

/// `(k, P(K >= k))` for each distinct nonzero degree.
pub fn degree_ccdf(degrees: &[usize]) -> Vec<(usize, f64)> {
    let hist = histogram(degrees);
    let total: usize = hist.iter().map(|&(_, c)| c).sum();
    let mut remaining = total;
    hist.into_iter()
        .map(|(k, c)| {
            let p = remaining as f64 / total as f64;
            remaining -= c;
            (k, p)
        })
        .collect()
}
