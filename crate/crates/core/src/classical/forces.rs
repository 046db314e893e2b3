//! Pairwise and mean-field forces.

use std::cmp::Ordering;

use crate::potential::Potential;

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

/// `F_k = −(1/N) Σ_l ∇V(x_k − x_l)` for row-major positions of `N` particles.
///
/// Pairs are visited in lexicographic order of the positions, so relabeling
/// the particles permutes the output bit for bit.
pub fn nbody_force(v: &Potential, positions: &[f64], out: &mut [f64]) {
    let d = v.dim();
    let n = positions.len() / d;
    out.iter_mut().for_each(|f| *f = 0.0);
    if n < 2 || v.is_zero() {
        return;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| lexicographic(&positions[a * d..(a + 1) * d], &positions[b * d..(b + 1) * d]));
    let inv_n = 1.0 / n as f64;
    if d == 1 {
        let xs: Vec<f64> = order.iter().map(|&k| positions[k]).collect();
        let mut acc = vec![0.0; n];
        for a in 0..n {
            for b in a + 1..n {
                // V' is odd, so the reverse pair contributes exactly −g
                let g = v.grad1(xs[a] - xs[b]);
                acc[a] -= g;
                acc[b] += g;
            }
        }
        for (s, &k) in order.iter().enumerate() {
            out[k] = acc[s] * inv_n;
        }
        return;
    }
    let mut acc = vec![0.0; n * d];
    let mut z = vec![0.0; d];
    for a in 0..n {
        let xa = &positions[order[a] * d..(order[a] + 1) * d];
        for b in a + 1..n {
            let xb = &positions[order[b] * d..(order[b] + 1) * d];
            let mut r2 = 0.0;
            for c in 0..d {
                z[c] = xa[c] - xb[c];
                r2 += z[c] * z[c];
            }
            let s = v.radial_factor(r2);
            for c in 0..d {
                let g = s * z[c];
                acc[a * d + c] -= g;
                acc[b * d + c] += g;
            }
        }
    }
    for (s, &k) in order.iter().enumerate() {
        for c in 0..d {
            out[k * d + c] = acc[s * d + c] * inv_n;
        }
    }
}

/// `−Σ_m w_m ∇V(x − y_m)` against an equal-weight cloud of row-major positions.
pub fn mean_field_force(v: &Potential, x: &[f64], cloud_positions: &[f64], out: &mut [f64]) {
    let d = v.dim();
    let m = cloud_positions.len() / d;
    out.iter_mut().for_each(|f| *f = 0.0);
    if v.is_zero() || m == 0 {
        return;
    }
    if d == 1 {
        let x0 = x[0];
        out[0] = -cloud_positions.iter().map(|y| v.grad1(x0 - y)).sum::<f64>() / m as f64;
        return;
    }
    for y in cloud_positions.chunks(d) {
        let mut r2 = 0.0;
        for c in 0..d {
            let z = x[c] - y[c];
            r2 += z * z;
        }
        let s = v.radial_factor(r2);
        for c in 0..d {
            out[c] -= s * (x[c] - y[c]);
        }
    }
    let inv = 1.0 / m as f64;
    out.iter_mut().for_each(|f| *f *= inv);
}

/// How the mean-field force of a cloud is evaluated at many points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForceEvaluation {
    /// Direct summation over the cloud for every evaluation point.
    Direct,
    /// In one dimension, direct summation on a uniform node set followed by
    /// cubic Hermite interpolation; falls back to direct summation outside
    /// the tabulated range and for `d > 1`.
    #[default]
    Tabulated,
}

/// The mean-field force of a frozen cloud, ready for repeated evaluation.
pub struct MeanFieldForce<'a> {
    v: &'a Potential,
    cloud: &'a [f64],
    table: Option<HermiteTable>,
}

struct HermiteTable {
    x0: f64,
    h: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl<'a> MeanFieldForce<'a> {
    pub fn new(v: &'a Potential, cloud_positions: &'a [f64], mode: ForceEvaluation) -> Self {
        let table = (mode == ForceEvaluation::Tabulated && v.dim() == 1 && !v.is_zero())
            .then(|| HermiteTable::build(v, cloud_positions));
        MeanFieldForce { v, cloud: cloud_positions, table }
    }

    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        if let Some(t) = &self.table {
            if let Some(f) = t.eval(x[0]) {
                out[0] = f;
                return;
            }
        }
        mean_field_force(self.v, x, self.cloud, out);
    }

    /// Evaluates the force at every row of `positions`.
    pub fn eval_all(&self, positions: &[f64], out: &mut [f64]) {
        let d = self.v.dim();
        for (x, f) in positions.chunks(d).zip(out.chunks_mut(d)) {
            self.eval(x, f);
        }
    }
}

impl HermiteTable {
    fn build(v: &Potential, cloud: &[f64]) -> Self {
        let (_, width) = v.gaussian_parameters();
        let lo = cloud.iter().copied().fold(f64::INFINITY, f64::min) - 2.0 * width;
        let hi = cloud.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 2.0 * width;
        let nodes = (((hi - lo) / (width / 64.0)).ceil() as usize).clamp(64, 4096);
        let h = (hi - lo) / (nodes - 1) as f64;
        let inv_m = 1.0 / cloud.len() as f64;
        let (amplitude, _) = v.gaussian_parameters();
        let inv_w2 = 1.0 / (width * width);
        let mut values = vec![0.0; nodes];
        let mut slopes = vec![0.0; nodes];
        for k in 0..nodes {
            let x = lo + k as f64 * h;
            let (mut f, mut df) = (0.0, 0.0);
            for y in cloud {
                let z = x - y;
                let e = amplitude * inv_w2 * (-0.5 * z * z * inv_w2).exp();
                // F = −V'(z) = e·z ; F' = e·(1 − z²/w²)
                f += e * z;
                df += e * (1.0 - z * z * inv_w2);
            }
            values[k] = f * inv_m;
            slopes[k] = df * inv_m;
        }
        HermiteTable { x0: lo, h, values, slopes }
    }

    #[inline]
    fn eval(&self, x: f64) -> Option<f64> {
        let s = (x - self.x0) / self.h;
        if !(s >= 0.0) || s >= (self.values.len() - 1) as f64 {
            return None;
        }
        let k = s as usize;
        let t = s - k as f64;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Some(
            h00 * self.values[k]
                + h10 * self.h * self.slopes[k]
                + h01 * self.values[k + 1]
                + h11 * self.h * self.slopes[k + 1],
        )
    }
}

/// `H_N = Σ_k |ξ_k|²/2 + (1/2N) Σ_{k≠l} V(x_k − x_l)`.
pub fn nbody_energy(v: &Potential, positions: &[f64], momenta: &[f64]) -> f64 {
    let d = v.dim();
    let n = positions.len() / d;
    let kinetic = 0.5 * momenta.iter().map(|p| p * p).sum::<f64>();
    let mut pot = 0.0;
    for a in 0..n {
        for b in a + 1..n {
            let r2: f64 = (0..d)
                .map(|c| {
                    let z = positions[a * d + c] - positions[b * d + c];
                    z * z
                })
                .sum();
            pot += v.eval_r2(r2);
        }
    }
    kinetic + pot / n as f64
}
