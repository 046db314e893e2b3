//! Töplitz (anti-Wick) quantization of discrete phase-space symbols.

use std::cmp::Ordering;

use num_complex::Complex64;

use super::coherent::{check_coherent_center, coherent_coefficients};
use super::density::DensityMatrix;
use super::grid::GridSpec;
use super::phase_space::husimi_on;
use crate::error::{invalid, Result};
use crate::transport::{DiscreteMeasure, TransportPlan};

/// Largest particle number whose `N!` relabelings are enumerated.
pub const MAX_SYMMETRIZED_PARTICLES: usize = 6;

/// A probability measure on `(R^{2d})^n` read as a Töplitz symbol divided by
/// `(2πε)^{dn}`.
///
/// Each atom is laid out particle by particle, `(q_1, p_1, …, q_n, p_n)`
/// with `q_k, p_k ∈ R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolMeasure {
    pub dim: usize,
    pub measure: DiscreteMeasure,
}

impl SymbolMeasure {
    pub fn new(dim: usize, measure: DiscreteMeasure) -> Result<Self> {
        if dim == 0 || measure.dim() == 0 || measure.dim() % (2 * dim) != 0 {
            return invalid(format!(
                "a {}-dimensional atom is not a phase-space point of R^{}",
                measure.dim(),
                2 * dim
            ));
        }
        Ok(SymbolMeasure { dim, measure })
    }

    /// Point mass at one phase-space point.
    pub fn dirac(dim: usize, z: &[f64]) -> Result<Self> {
        Self::new(dim, DiscreteMeasure::dirac(z)?)
    }

    pub fn particles(&self) -> usize {
        self.measure.dim() / (2 * self.dim)
    }

    pub fn len(&self) -> usize {
        self.measure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measure.is_empty()
    }

    pub fn atom(&self, i: usize) -> &[f64] {
        self.measure.point(i)
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.measure.weights()[i]
    }

    /// Tensor product of symbols, particles concatenated in order.
    pub fn product(factors: &[&SymbolMeasure]) -> Result<Self> {
        let Some(first) = factors.first() else {
            return invalid("empty symbol product");
        };
        let mut points = first.measure.points().to_vec();
        let mut weights = first.measure.weights().to_vec();
        let mut width = first.measure.dim();
        for f in &factors[1..] {
            if f.dim != first.dim {
                return invalid("symbol factors of different spatial dimension");
            }
            let fw = f.measure.dim();
            let mut p2 = Vec::with_capacity(weights.len() * f.len() * (width + fw));
            let mut w2 = Vec::with_capacity(weights.len() * f.len());
            for (a, wa) in weights.iter().enumerate() {
                for b in 0..f.len() {
                    p2.extend_from_slice(&points[a * width..(a + 1) * width]);
                    p2.extend_from_slice(f.atom(b));
                    w2.push(wa * f.weight(b));
                }
            }
            points = p2;
            weights = w2;
            width += fw;
        }
        Self::new(first.dim, DiscreteMeasure::normalized(width, points, weights)?)
    }

    /// Merges identical atoms and sorts atoms lexicographically.
    pub fn canonical(&self) -> Result<Self> {
        let w = self.measure.dim();
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| cmp_atoms(self.atom(a), self.atom(b)));
        let mut points: Vec<f64> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for &i in &order {
            let z = self.atom(i);
            match weights.len() {
                n if n > 0 && &points[(n - 1) * w..n * w] == z => weights[n - 1] += self.weight(i),
                _ => {
                    points.extend_from_slice(z);
                    weights.push(self.weight(i));
                }
            }
        }
        Self::new(self.dim, DiscreteMeasure::normalized(w, points, weights)?)
    }
}

fn cmp_atoms(a: &[f64], b: &[f64]) -> Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

/// Orthonormal-basis coefficients of `|z_1⟩ ⊗ … ⊗ |z_n⟩` for a one-dimensional atom.
fn product_coefficients(grid: &GridSpec, atom: &[f64]) -> Result<Vec<Complex64>> {
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for qp in atom.chunks(2) {
        check_coherent_center(grid, qp[0], qp[1])?;
        let c = coherent_coefficients(grid, qp[0], qp[1]);
        let mut next = Vec::with_capacity(out.len() * c.len());
        for a in &out {
            next.extend(c.iter().map(|b| a * b));
        }
        out = next;
    }
    Ok(out)
}

/// `Σ_m w_m |z_m, ε⟩⟨z_m, ε|` on the `n`-axis grid, `n` the symbol's particle count.
pub fn toeplitz_operator(grid: &GridSpec, symbol: &SymbolMeasure) -> Result<DensityMatrix> {
    if symbol.dim != 1 {
        return invalid("Töplitz operators are built on one-dimensional grids only");
    }
    let mut out = DensityMatrix::zeros(*grid, symbol.particles())?;
    let n = out.dim();
    for m in 0..symbol.len() {
        let c = product_coefficients(grid, symbol.atom(m))?;
        let w = symbol.weight(m);
        for i in 0..n {
            let a = c[i] * w;
            for (r, b) in out.matrix[i * n..(i + 1) * n].iter_mut().zip(&c) {
                *r += a * b.conj();
            }
        }
    }
    Ok(out)
}

/// `trace(OP^T(f) ρ) = ∫ f(z) ⟨z|ρ|z⟩ dz / 2πε`, by quadrature of the
/// Husimi function of `rho` on the lattice `x × ξ`.
pub fn toeplitz_lift_expectation<F>(rho: &DensityMatrix, f: F, x: &[f64], xi: &[f64]) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let h = husimi_on(rho, x, xi)?;
    let mut s = 0.0;
    for (i, &q) in h.x.iter().enumerate() {
        for (k, &p) in h.xi.iter().enumerate() {
            s += f(q, p) * h.at(i, k);
        }
    }
    Ok(s * h.cell())
}

/// Product coupling symbol `Σ π_ij δ_{(z_i, z'_j)}` of a transport plan
/// between two n-particle symbols; atoms are `(source atom, target atom)`.
pub fn coupling_symbol(plan: &TransportPlan, source: &SymbolMeasure, target: &SymbolMeasure) -> Result<SymbolMeasure> {
    if source.dim != target.dim || source.particles() != target.particles() {
        return invalid("coupled symbols must have the same shape");
    }
    let w = source.measure.dim() + target.measure.dim();
    let mut points = Vec::with_capacity(plan.entries.len() * w);
    let mut weights = Vec::with_capacity(plan.entries.len());
    for &(i, j, mass) in &plan.entries {
        if i >= source.len() || j >= target.len() {
            return invalid(format!("plan entry ({i}, {j}) outside the symbols"));
        }
        points.extend_from_slice(source.atom(i));
        points.extend_from_slice(target.atom(j));
        weights.push(mass);
    }
    SymbolMeasure::new(source.dim, DiscreteMeasure::normalized(w, points, weights)?)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        // next permutation in lexicographic order
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}

/// Averages a coupling symbol on `(R^{2d})^N × (R^{2d})^N` over the `N!`
/// joint relabelings of the particles on both sides.
pub fn symmetrize_coupling_symbol(coupling: &SymbolMeasure) -> Result<SymbolMeasure> {
    let blocks = coupling.particles();
    if blocks % 2 != 0 {
        return invalid("a coupling symbol has an even number of particle blocks");
    }
    let n = blocks / 2;
    if n > MAX_SYMMETRIZED_PARTICLES {
        return invalid(format!("cannot enumerate {n}! relabelings (at most {MAX_SYMMETRIZED_PARTICLES} particles)"));
    }
    let b = 2 * coupling.dim;
    let perms = permutations(n);
    let share = 1.0 / perms.len() as f64;
    let w = coupling.measure.dim();
    let mut points = Vec::with_capacity(coupling.len() * perms.len() * w);
    let mut weights = Vec::with_capacity(coupling.len() * perms.len());
    for m in 0..coupling.len() {
        let z = coupling.atom(m);
        for sigma in &perms {
            for side in 0..2 {
                for &k in sigma {
                    let s = (side * n + k) * b;
                    points.extend_from_slice(&z[s..s + b]);
                }
            }
            weights.push(coupling.weight(m) * share);
        }
    }
    SymbolMeasure::new(coupling.dim, DiscreteMeasure::normalized(w, points, weights)?)?.canonical()
}

/// Symmetrized Töplitz initial coupling built from a transport plan
/// between two N-particle symbols.
pub fn symmetrize_initial_coupling(
    plan: &TransportPlan,
    source: &SymbolMeasure,
    target: &SymbolMeasure,
) -> Result<SymbolMeasure> {
    if source.particles() > MAX_SYMMETRIZED_PARTICLES {
        return invalid(format!(
            "cannot enumerate {}! relabelings (at most {MAX_SYMMETRIZED_PARTICLES} particles)",
            source.particles()
        ));
    }
    symmetrize_coupling_symbol(&coupling_symbol(plan, source, target)?)
}

/// `(1/N) Σ_j ∫ |z_j − z'_j|² dπ + 2dε`: the coupling cost of the Töplitz
/// lift of a coupling symbol.
pub fn coupling_symbol_cost(coupling: &SymbolMeasure, eps: f64) -> Result<f64> {
    let blocks = coupling.particles();
    if blocks % 2 != 0 {
        return invalid("a coupling symbol has an even number of particle blocks");
    }
    let n = blocks / 2;
    let b = 2 * coupling.dim;
    let mut total = 0.0;
    for m in 0..coupling.len() {
        let z = coupling.atom(m);
        let (left, right) = z.split_at(n * b);
        let d2: f64 = left.iter().zip(right).map(|(u, v)| (u - v) * (u - v)).sum();
        total += coupling.weight(m) * d2;
    }
    Ok(total / n as f64 + 2.0 * coupling.dim as f64 * eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::coherent::coherent_state;

    fn sym(points: Vec<f64>, weights: Vec<f64>, width: usize) -> SymbolMeasure {
        SymbolMeasure::new(1, DiscreteMeasure::normalized(width, points, weights).unwrap()).unwrap()
    }

    #[test]
    fn single_atom_is_coherent_projector() {
        let g = GridSpec::single(64, 6.0, 0.5).unwrap();
        let t = toeplitz_operator(&g, &SymbolMeasure::dirac(1, &[0.5, -1.0]).unwrap()).unwrap();
        let p = DensityMatrix::from_pure(&coherent_state(&g, 0.5, -1.0).unwrap()).unwrap();
        for (a, b) in t.matrix.iter().zip(&p.matrix) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn two_atoms_rank_two() {
        let g = GridSpec::single(64, 6.0, 0.5).unwrap();
        let t = toeplitz_operator(&g, &sym(vec![-1.0, 0.0, 1.0, 0.5], vec![1.0, 1.0], 2)).unwrap();
        t.validate(8, 0).unwrap();
        let (vals, _) = t.eigen();
        assert_eq!(vals.iter().filter(|l| l.abs() > 1e-12).count(), 2);
    }

    #[test]
    fn permutation_enumeration() {
        assert_eq!(permutations(1), vec![vec![0]]);
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(4).len(), 24);
    }

    #[test]
    fn symmetrization_cases() {
        // one particle: identity
        let s = sym(vec![0.0, 1.0, 2.0, 3.0], vec![1.0], 4);
        assert_eq!(symmetrize_coupling_symbol(&s).unwrap(), s.canonical().unwrap());
        // two particles, asymmetric atom: two equal halves
        let z = vec![0.0, 0.0, 1.0, 0.0, 0.1, 0.0, 1.2, 0.3];
        let s = sym(z, vec![1.0], 8);
        let out = symmetrize_coupling_symbol(&s).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out.measure.weights(), &[0.5, 0.5]);
        assert_eq!(out.atom(1), &[1.0, 0.0, 0.0, 0.0, 1.2, 0.3, 0.1, 0.0]);
        let c0 = coupling_symbol_cost(&s, 0.25).unwrap();
        let c1 = coupling_symbol_cost(&out, 0.25).unwrap();
        assert!((c0 - c1).abs() < 1e-15);
        // too many particles
        let big = sym(vec![0.0; 28], vec![1.0], 28);
        assert!(symmetrize_coupling_symbol(&big).is_err());
    }

    #[test]
    fn product_symbol_layout() {
        let a = sym(vec![0.0, 1.0, 2.0, 3.0], vec![1.0, 3.0], 2);
        let b = SymbolMeasure::dirac(1, &[5.0, 6.0]).unwrap();
        let ab = SymbolMeasure::product(&[&a, &b]).unwrap();
        assert_eq!(ab.particles(), 2);
        assert_eq!(ab.atom(1), &[2.0, 3.0, 5.0, 6.0]);
        assert_eq!(ab.weight(1), 0.75);
    }
}
