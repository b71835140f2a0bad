//! Adjacency and Laplacian spectra and the dynamical quantities derived
//! from them: semicircle law, synchronization eigenratio, consensus time,
//! random-walk return probabilities and centrality.
//!
//! Sign convention: the Laplacian used here is the positive semidefinite
//! `D - A`. The coupling operator `A - D` of the node dynamics has the
//! negated spectrum, so its "smallest/largest non-zero eigenvalues in
//! absolute value" are exactly `lambda_2` and `lambda_n` below and every
//! eigenratio is identical.

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, ModelError};
use crate::graph::Graph;

/// Above this node count only extremal eigenvalues are computed (Lanczos).
pub const DENSE_LIMIT: usize = 3000;
/// Relative residual at which an extremal Ritz value is accepted.
pub const ITERATIVE_TOLERANCE: f64 = 1e-8;
const LANCZOS_MAX_DIM: usize = 1500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MatrixKind {
    Adjacency,
    Laplacian,
}

impl MatrixKind {
    pub fn label(&self) -> &'static str {
        match self {
            MatrixKind::Adjacency => "ADJACENCY",
            MatrixKind::Laplacian => "LAPLACIAN",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub kind: MatrixKind,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `1e-8 * max |lambda|`: the cut below which an eigenvalue counts as zero.
    pub fn zero_tolerance(&self) -> f64 {
        let max_abs = self.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        1e-8 * max_abs
    }

    pub fn zero_multiplicity(&self) -> usize {
        let tol = self.zero_tolerance();
        self.eigenvalues.iter().filter(|x| x.abs() <= tol).count()
    }

    /// Second-smallest eigenvalue (the algebraic connectivity for a Laplacian).
    pub fn lambda2(&self) -> Option<f64> {
        self.eigenvalues.get(1).copied()
    }

    pub fn largest(&self) -> Option<f64> {
        self.eigenvalues.last().copied()
    }

    pub fn sum(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// Same eigenvalues negated and re-sorted: the spectrum of `-M`.
    pub fn negated(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.eigenvalues.iter().map(|x| -x).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// CSV with header `index,eigenvalue,matrix_kind`.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wtr = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        wtr.write_record(["index", "eigenvalue", "matrix_kind"])?;
        for (i, ev) in self.eigenvalues.iter().enumerate() {
            wtr.write_record([i.to_string(), ev.to_string(), self.kind.label().to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub fn adjacency_matrix(g: &Graph) -> DMatrix<f64> {
    let n = g.node_count();
    let mut m = DMatrix::zeros(n, n);
    for (i, j) in g.edges() {
        m[(i, j)] = 1.0;
        m[(j, i)] = 1.0;
    }
    m
}

/// `D - A`.
pub fn laplacian_matrix(g: &Graph) -> DMatrix<f64> {
    let mut m = -adjacency_matrix(g);
    for i in 0..g.node_count() {
        m[(i, i)] = g.degree(i) as f64;
    }
    m
}

fn dense_spectrum(m: DMatrix<f64>, kind: MatrixKind) -> Spectrum {
    let mut eigenvalues: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    Spectrum { eigenvalues, kind }
}

fn check_dense(g: &Graph) -> Result<(), ModelError> {
    let n = g.node_count();
    if n == 0 {
        return Err(invalid("n", "graph must have at least one node"));
    }
    if n > DENSE_LIMIT {
        return Err(ModelError::TooLargeForDense {
            n,
            limit: DENSE_LIMIT,
        });
    }
    Ok(())
}

pub fn adjacency_spectrum(g: &Graph) -> Result<Spectrum, ModelError> {
    check_dense(g)?;
    Ok(dense_spectrum(adjacency_matrix(g), MatrixKind::Adjacency))
}

pub fn laplacian_spectrum(g: &Graph) -> Result<Spectrum, ModelError> {
    check_dense(g)?;
    Ok(dense_spectrum(laplacian_matrix(g), MatrixKind::Laplacian))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaplacianExtremes {
    pub lambda2: f64,
    pub lambda_n: f64,
    pub method: SolverMethod,
}

/// `lambda_2` and `lambda_n` of `D - A`: dense up to [`DENSE_LIMIT`] nodes,
/// Lanczos (deflated against the constant vector) above.
pub fn laplacian_extremes(g: &Graph) -> Result<LaplacianExtremes, ModelError> {
    let n = g.node_count();
    if n < 2 {
        return Err(invalid("n", "lambda_2 needs at least two nodes"));
    }
    if n <= DENSE_LIMIT {
        let s = laplacian_spectrum(g)?;
        return Ok(LaplacianExtremes {
            lambda2: s.eigenvalues[1],
            lambda_n: s.eigenvalues[n - 1],
            method: SolverMethod::Dense,
        });
    }
    let apply = |x: &[f64], y: &mut [f64]| {
        for (i, yi) in y.iter_mut().enumerate() {
            let s: f64 = g.neighbors(i).iter().map(|&j| x[j]).sum();
            *yi = g.degree(i) as f64 * x[i] - s;
        }
    };
    let ones = vec![1.0 / (n as f64).sqrt(); n];
    let (lo, hi) = lanczos_extremes(n, apply, Some(&ones))?;
    Ok(LaplacianExtremes {
        lambda2: lo,
        lambda_n: hi,
        method: SolverMethod::Lanczos,
    })
}

/// Largest adjacency eigenvalue (dense or Lanczos as above).
pub fn largest_adjacency_eigenvalue(g: &Graph) -> Result<f64, ModelError> {
    let n = g.node_count();
    if n <= DENSE_LIMIT {
        return Ok(adjacency_spectrum(g)?.largest().unwrap_or(0.0));
    }
    let apply = |x: &[f64], y: &mut [f64]| {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = g.neighbors(i).iter().map(|&j| x[j]).sum();
        }
    };
    Ok(lanczos_extremes(n, apply, None)?.1)
}

/// Smallest and largest eigenvalue of a symmetric operator on the
/// orthogonal complement of `deflate` (a unit vector), by Lanczos with full
/// reorthogonalization.
fn lanczos_extremes<F>(
    n: usize,
    apply: F,
    deflate: Option<&[f64]>,
) -> Result<(f64, f64), ModelError>
where
    F: Fn(&[f64], &mut [f64]),
{
    let project = |v: &mut [f64]| {
        if let Some(u) = deflate {
            let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
        }
    };
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();

    let mut rng = crate::rng::seeded(0x1a2c_2050);
    let mut q: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    project(&mut q);
    let q_norm = norm(&q);
    q.iter_mut().for_each(|x| *x /= q_norm);

    let max_dim = n.min(LANCZOS_MAX_DIM);
    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut last_residual = f64::INFINITY;

    for k in 0..max_dim {
        apply(&basis[k], &mut w);
        project(&mut w);
        let a: f64 = w.iter().zip(&basis[k]).map(|(x, y)| x * y).sum();
        alpha.push(a);
        // Full reorthogonalization, twice for stability.
        // The deflated direction is included, else rounding lets it back in.
        for _ in 0..2 {
            project(&mut w);
            for b in &basis {
                let d: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
            }
        }
        let b_next = norm(&w);
        let dim = k + 1;
        let exhausted = b_next < 1e-12 || dim == max_dim;
        if dim % 10 == 0 || exhausted {
            let t = tridiagonal(&alpha, &beta);
            let eig = SymmetricEigen::new(t);
            let (mut lo_i, mut hi_i) = (0, 0);
            for (i, &v) in eig.eigenvalues.iter().enumerate() {
                if v < eig.eigenvalues[lo_i] {
                    lo_i = i;
                }
                if v > eig.eigenvalues[hi_i] {
                    hi_i = i;
                }
            }
            let (lo, hi) = (eig.eigenvalues[lo_i], eig.eigenvalues[hi_i]);
            let scale = lo.abs().max(hi.abs()).max(1.0);
            let res_lo = (b_next * eig.eigenvectors[(dim - 1, lo_i)]).abs();
            let res_hi = (b_next * eig.eigenvectors[(dim - 1, hi_i)]).abs();
            last_residual = res_lo.max(res_hi) / scale;
            if last_residual <= ITERATIVE_TOLERANCE || b_next < 1e-12 {
                return Ok((lo, hi));
            }
            if dim == max_dim {
                break;
            }
        }
        beta.push(b_next);
        basis.push(w.iter().map(|x| x / b_next).collect());
    }
    Err(ModelError::NoConvergence {
        iterations: max_dim,
        residual: last_residual,
    })
}

fn tridiagonal(alpha: &[f64], beta: &[f64]) -> DMatrix<f64> {
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    t
}

/// `2 sqrt(np(1-p))`: edge of the semicircle bulk.
pub fn semicircle_half_width(n: usize, p: f64) -> f64 {
    2.0 * (n as f64 * p * (1.0 - p)).sqrt()
}

/// Limiting eigenvalue density of G(n,p) adjacency matrices.
pub fn semicircle_density(lambda: f64, n: usize, p: f64) -> Result<f64, ModelError> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(
            "p",
            format!("must lie strictly inside (0, 1), got {p}"),
        ));
    }
    let var = n as f64 * p * (1.0 - p);
    if lambda.abs() >= semicircle_half_width(n, p) {
        return Ok(0.0);
    }
    Ok((4.0 * var - lambda * lambda).sqrt() / (2.0 * std::f64::consts::PI * var))
}

/// `(lambda, density)` pairs on an even grid across the support.
pub fn semicircle_overlay(n: usize, p: f64, points: usize) -> Result<Vec<(f64, f64)>, ModelError> {
    let r = semicircle_half_width(n, p);
    let points = points.max(2);
    (0..points)
        .map(|k| {
            let x = -r + 2.0 * r * k as f64 / (points - 1) as f64;
            semicircle_density(x, n, p).map(|d| (x, d))
        })
        .collect()
}

/// Leading-order estimate `np` of the Perron eigenvalue of G(n,p).
pub fn largest_adjacency_eigenvalue_estimate(n: usize, p: f64) -> Result<f64, ModelError> {
    let np = n as f64 * p;
    if !(np > 1.0) {
        return Err(ModelError::Subcritical(np));
    }
    Ok(np)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SyncStability {
    pub eigenratio: f64,
    pub stable: bool,
}

/// Master-stability test `lambda_n / lambda_2 < beta`.
pub fn sync_is_stable(spectrum: &Spectrum, beta: f64) -> Result<SyncStability, ModelError> {
    if spectrum.kind != MatrixKind::Laplacian {
        return Err(invalid(
            "spectrum",
            "synchronization needs a Laplacian spectrum",
        ));
    }
    if !(beta > 0.0) {
        return Err(invalid("beta", format!("must be positive, got {beta}")));
    }
    let l2 = spectrum.lambda2().ok_or(ModelError::Disconnected)?;
    if l2 <= spectrum.zero_tolerance() {
        return Err(ModelError::Disconnected);
    }
    let ln = spectrum.largest().expect("nonempty");
    let eigenratio = ln / l2;
    Ok(SyncStability {
        eigenratio,
        stable: eigenratio < beta,
    })
}

/// How `ln C - ln eps / 2` is parenthesised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsensusGrouping {
    /// `ln C - (ln eps) / 2`
    #[default]
    HalfLogEpsilon,
    /// `ln C - ln(eps / 2)`
    LogHalfEpsilon,
}

pub fn consensus_time(
    lambda2: f64,
    integration_constant: f64,
    epsilon: f64,
    grouping: ConsensusGrouping,
) -> Result<f64, ModelError> {
    if !(lambda2 > 0.0) {
        return Err(invalid(
            "lambda2",
            format!("must be positive, got {lambda2}"),
        ));
    }
    if !(integration_constant > 0.0) {
        return Err(invalid("C", "integration constant must be positive"));
    }
    if !(epsilon > 0.0) {
        return Err(invalid(
            "epsilon",
            "synchronization threshold must be positive",
        ));
    }
    let numerator = match grouping {
        ConsensusGrouping::HalfLogEpsilon => integration_constant.ln() - epsilon.ln() / 2.0,
        ConsensusGrouping::LogHalfEpsilon => integration_constant.ln() - (epsilon / 2.0).ln(),
    };
    if numerator < 0.0 {
        return Err(invalid(
            "epsilon",
            "threshold too large for the integration constant: consensus time would be negative",
        ));
    }
    Ok(numerator / lambda2)
}

/// Distribution of a simple random walk started at `start` after `t` steps.
pub fn walk_distribution(g: &Graph, start: usize, t: usize) -> Result<Vec<f64>, ModelError> {
    if start >= g.node_count() {
        return Err(invalid("start", "node index out of range"));
    }
    if g.degree(start) == 0 {
        return Err(ModelError::IsolatedNode(start));
    }
    let mut p = vec![0.0; g.node_count()];
    p[start] = 1.0;
    let mut next = vec![0.0; g.node_count()];
    for _ in 0..t {
        step_walk(g, &p, &mut next);
        std::mem::swap(&mut p, &mut next);
    }
    Ok(p)
}

fn step_walk(g: &Graph, p: &[f64], next: &mut [f64]) {
    next.fill(0.0);
    for (u, &pu) in p.iter().enumerate() {
        if pu == 0.0 {
            continue;
        }
        let share = pu / g.degree(u) as f64;
        for &v in g.neighbors(u) {
            next[v] += share;
        }
    }
}

/// `P_ii(t)`: probability that a walk from `i` is back at `i` after `t` steps.
pub fn return_probability(g: &Graph, i: usize, t: usize) -> Result<f64, ModelError> {
    Ok(walk_distribution(g, i, t)?[i])
}

pub fn is_bipartite(g: &Graph) -> bool {
    let n = g.node_count();
    let mut color = vec![u8::MAX; n];
    let mut stack = Vec::new();
    for s in 0..n {
        if color[s] != u8::MAX {
            continue;
        }
        color[s] = 0;
        stack.push(s);
        while let Some(u) = stack.pop() {
            for &v in g.neighbors(u) {
                if color[v] == u8::MAX {
                    color[v] = 1 - color[u];
                    stack.push(v);
                } else if color[v] == color[u] {
                    return false;
                }
            }
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Centrality {
    pub value: f64,
    /// Stationary share `k_i / sum k`.
    pub stationary: f64,
    /// Relaxation sum `sum_{t=0}^{t_max} (P_ii(t) - k_i / sum k)`.
    pub relaxation_time: f64,
    /// The last term still exceeded 1e-10 in magnitude.
    pub truncated: bool,
}

/// Random-walk centrality `(k_i / sum k) / sum_{t=0}^{t_max} (P_ii(t) - k_i / sum k)`.
///
/// Requires a connected, non-bipartite graph so that `P_ii(t)` converges to
/// the stationary share.
pub fn random_walk_centrality(g: &Graph, i: usize, t_max: usize) -> Result<Centrality, ModelError> {
    if i >= g.node_count() {
        return Err(invalid("i", "node index out of range"));
    }
    if g.degree(i) == 0 {
        return Err(ModelError::IsolatedNode(i));
    }
    if g.connected_components().component_count() != 1 {
        return Err(ModelError::Disconnected);
    }
    if is_bipartite(g) {
        return Err(ModelError::Bipartite);
    }
    let stationary = g.degree(i) as f64 / (2 * g.edge_count()) as f64;
    let mut p = vec![0.0; g.node_count()];
    p[i] = 1.0;
    let mut next = vec![0.0; g.node_count()];
    let mut sum = p[i] - stationary;
    let mut last = sum;
    for _ in 0..t_max {
        step_walk(g, &p, &mut next);
        std::mem::swap(&mut p, &mut next);
        last = p[i] - stationary;
        sum += last;
    }
    Ok(Centrality {
        value: stationary / sum,
        stationary,
        relaxation_time: sum,
        truncated: last.abs() >= 1e-10,
    })
}
