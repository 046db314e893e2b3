use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// A weighted point cloud on `R^k`. Points are stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Builds a measure from row-major `points` (length `weights.len()·dim`).
    /// Weights must be nonnegative and sum to one within 1e−12.
    pub fn new(dim: usize, points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return invalid("measure dimension must be positive");
        }
        if weights.is_empty() {
            return invalid("measure support is empty");
        }
        if points.len() != weights.len() * dim {
            return invalid(format!(
                "{} coordinates do not match {} atoms of dimension {dim}",
                points.len(),
                weights.len()
            ));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return invalid("measure points must be finite");
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return invalid("measure weights must be finite and nonnegative");
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return invalid(format!("weights sum to {total}, expected 1"));
        }
        Ok(DiscreteMeasure { dim, points, weights })
    }

    /// Like [`DiscreteMeasure::new`], dividing the weights by their sum first.
    pub fn normalized(dim: usize, points: Vec<f64>, mut weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return invalid("weights must have a positive finite sum");
        }
        for w in weights.iter_mut() {
            *w /= total;
        }
        // the division leaves a residue of a few ulps per atom
        let residue = 1.0 - weights.iter().sum::<f64>();
        if let Some(imax) = argmax(&weights) {
            weights[imax] += residue;
        }
        Self::new(dim, points, weights)
    }

    /// Equal weights `1/m` on the given row-major points.
    pub fn uniform(dim: usize, points: Vec<f64>) -> Result<Self> {
        if dim == 0 || points.is_empty() || points.len() % dim != 0 {
            return invalid("points must be a nonempty multiple of the dimension");
        }
        let m = points.len() / dim;
        let w = 1.0 / m as f64;
        Self::new(dim, points, vec![w; m])
    }

    pub fn dirac(point: &[f64]) -> Result<Self> {
        Self::new(point.len(), point.to_vec(), vec![1.0])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// True when all weights agree to within 1e−12 relative.
    pub fn is_uniform(&self) -> bool {
        let w0 = self.weights[0];
        self.weights.iter().all(|w| (w - w0).abs() <= 1e-12 * w0.max(1e-300))
    }

    /// Spatial dilation `x ↦ s·x`, weights unchanged.
    pub fn dilate(&self, s: f64) -> Self {
        DiscreteMeasure {
            dim: self.dim,
            points: self.points.iter().map(|x| s * x).collect(),
            weights: self.weights.clone(),
        }
    }

    /// Translation `x ↦ x + shift`.
    pub fn translate(&self, shift: &[f64]) -> Self {
        assert_eq!(shift.len(), self.dim);
        let points = self.points.chunks(self.dim).flat_map(|p| p.iter().zip(shift).map(|(a, b)| a + b)).collect();
        DiscreteMeasure { dim: self.dim, points, weights: self.weights.clone() }
    }

    /// Restriction to the atoms at `indices`, with equal weights.
    pub fn uniform_subset(&self, indices: &[usize]) -> Result<Self> {
        let mut pts = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            pts.extend_from_slice(self.point(i));
        }
        Self::uniform(self.dim, pts)
    }

    /// Weighted mean of the atoms.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for (p, w) in self.points.chunks(self.dim).zip(&self.weights) {
            for (a, x) in m.iter_mut().zip(p) {
                *a += w * x;
            }
        }
        m
    }
}

fn argmax(v: &[f64]) -> Option<usize> {
    v.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i)
}

/// A coupling given by `(source, target, mass)` triples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub entries: Vec<(usize, usize, f64)>,
    /// `Σ mass·|x−y|^p`
    pub cost: f64,
    pub p: f64,
}

impl TransportPlan {
    pub fn source_marginal(&self, m: usize) -> Vec<f64> {
        let mut r = vec![0.0; m];
        for &(i, _, w) in &self.entries {
            r[i] += w;
        }
        r
    }

    pub fn target_marginal(&self, n: usize) -> Vec<f64> {
        let mut c = vec![0.0; n];
        for &(_, j, w) in &self.entries {
            c[j] += w;
        }
        c
    }

    /// Largest absolute deviation of the plan's marginals from the weights of
    /// `mu` and `nu`.
    pub fn marginal_error(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        let r = self.source_marginal(mu.len());
        let c = self.target_marginal(nu.len());
        let er = r.iter().zip(mu.weights()).map(|(a, b)| (a - b).abs());
        let ec = c.iter().zip(nu.weights()).map(|(a, b)| (a - b).abs());
        er.chain(ec).fold(0.0, f64::max)
    }

    /// Recomputes `Σ mass·|x−y|^p` against the given measures.
    pub fn evaluate_cost(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        self.entries.iter().map(|&(i, j, w)| w * ground_cost(mu.point(i), nu.point(j), self.p)).sum()
    }
}

/// `|x−y|^p` with the Euclidean norm.
#[inline]
pub fn ground_cost(x: &[f64], y: &[f64], p: f64) -> f64 {
    let s: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    if p == 2.0 {
        s
    } else {
        s.sqrt().powf(p)
    }
}

/// Dense row-major cost matrix `c[i·n + j] = |x_i − y_j|^p`.
pub fn cost_matrix(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Vec<f64> {
    let n = nu.len();
    let mut c = vec![0.0; mu.len() * n];
    for i in 0..mu.len() {
        let x = mu.point(i);
        for j in 0..n {
            c[i * n + j] = ground_cost(x, nu.point(j), p);
        }
    }
    c
}
