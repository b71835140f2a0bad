//! Riemann/Hurwitz zeta and the Zeta (discrete power-law) degree law.

use rand::Rng;

use crate::error::{invalid, ModelError};

/// Bernoulli numbers B_2, B_4, ..., B_16.
const BERNOULLI_EVEN: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// Terms summed explicitly before the Euler-Maclaurin tail.
const DIRECT_TERMS: usize = 16;

/// Hurwitz zeta `sum_{k>=0} (q + k)^{-s}` for `s > 1`, `q > 0`.
///
/// Direct summation of the first terms followed by an Euler-Maclaurin
/// tail with eight Bernoulli corrections; relative error is below 1e-13
/// for `s` in (1, 60].
pub fn hurwitz_zeta(s: f64, q: f64) -> Result<f64, ModelError> {
    if !(s > 1.0) {
        return Err(ModelError::Divergent(s));
    }
    if !(q > 0.0) {
        return Err(invalid("q", format!("must be positive, got {q}")));
    }
    Ok(hurwitz_unchecked(s, q))
}

pub(crate) fn hurwitz_unchecked(s: f64, q: f64) -> f64 {
    let mut sum = 0.0;
    // Summed smallest-first for accuracy.
    for k in (0..DIRECT_TERMS).rev() {
        sum += (q + k as f64).powf(-s);
    }
    let a = q + DIRECT_TERMS as f64;
    let a_pow = a.powf(-s);
    let mut tail = a * a_pow / (s - 1.0) + 0.5 * a_pow;
    // Running product s (s+1) ... (s+2j-2) / (2j)! * a^{-s-2j+1}
    let mut factor = s * a_pow / a;
    let mut fact = 2.0;
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = b / fact * factor;
        tail += term;
        let m = 2.0 * (j as f64 + 1.0);
        factor *= (s + m - 1.0) * (s + m) / (a * a);
        fact *= (m + 1.0) * (m + 2.0);
    }
    sum + tail
}

/// Riemann zeta for real `s > 1`.
pub fn riemann_zeta(s: f64) -> Result<f64, ModelError> {
    hurwitz_zeta(s, 1.0)
}

/// Zeta law `P(k) = k^{-gamma} / zeta(gamma)` on `k >= 1`.
pub fn zeta_degree_pmf(k: usize, gamma: f64) -> Result<f64, ModelError> {
    if k == 0 {
        return Err(invalid("k", "support of the Zeta law starts at 1"));
    }
    let z = riemann_zeta(gamma)?;
    Ok((k as f64).powf(-gamma) / z)
}

/// Zeta law truncated to `1..=k_max`, sampled by inversion on a
/// precomputed cumulative table.
#[derive(Debug, Clone)]
pub struct TruncatedZeta {
    gamma: f64,
    cumulative: Vec<f64>,
}

impl TruncatedZeta {
    pub fn new(gamma: f64, k_max: usize) -> Result<Self, ModelError> {
        if !(gamma > 1.0) {
            return Err(invalid("gamma", format!("must exceed 1, got {gamma}")));
        }
        if k_max == 0 {
            return Err(invalid("k_max", "must be at least 1"));
        }
        let mut cumulative = Vec::with_capacity(k_max);
        let mut acc = 0.0;
        for k in 1..=k_max {
            acc += (k as f64).powf(-gamma);
            cumulative.push(acc);
        }
        Ok(Self { gamma, cumulative })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn k_max(&self) -> usize {
        self.cumulative.len()
    }

    pub fn pmf(&self, k: usize) -> f64 {
        if k == 0 || k > self.k_max() {
            return 0.0;
        }
        (k as f64).powf(-self.gamma) / self.cumulative[self.k_max() - 1]
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = self.cumulative[self.cumulative.len() - 1];
        let u = rng.random::<f64>() * total;
        // First index with cumulative > u.
        let idx = self.cumulative.partition_point(|&c| c <= u);
        idx.min(self.cumulative.len() - 1) + 1
    }
}
