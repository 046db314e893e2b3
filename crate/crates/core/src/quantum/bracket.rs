//! Coupling costs and the two-sided bracket of the quantum transport cost.

use num_complex::Complex64;

use super::density::DensityMatrix;
use super::fft::AxisFft;
use super::grid::GridSpec;
use super::phase_space::husimi_transform;
use super::toeplitz::SymbolMeasure;
use super::wave::WaveFunction;
use crate::error::{invalid, Result};
use crate::transport::wasserstein_exact;

/// A finite convex combination of pure states, `Σ w_k |ψ_k⟩⟨ψ_k|`.
#[derive(Debug, Clone)]
pub struct MixedState {
    pub components: Vec<(f64, WaveFunction)>,
}

impl MixedState {
    pub fn pure(psi: WaveFunction) -> Self {
        MixedState { components: vec![(1.0, psi)] }
    }

    /// Spectral decomposition of a density matrix; eigenvalues at or below
    /// `cutoff` are dropped.
    pub fn from_density(rho: &DensityMatrix, cutoff: f64) -> Result<Self> {
        let (vals, vecs) = rho.eigen();
        let n = rho.dim();
        let scale = rho.grid.spacing().powf(-0.5 * rho.axes as f64);
        let mut components = Vec::new();
        for (k, &l) in vals.iter().enumerate() {
            if l > cutoff {
                let values = (0..n).map(|i| vecs[(i, k)] * scale).collect();
                components.push((l, WaveFunction::from_values(rho.grid, rho.axes, values)?));
            }
        }
        if components.is_empty() {
            return invalid("density matrix has no eigenvalue above the cutoff");
        }
        Ok(MixedState { components })
    }

    /// Töplitz lift of a coupling symbol: one product of coherent states per atom.
    pub fn toeplitz_coupling(grid: &GridSpec, coupling: &SymbolMeasure) -> Result<Self> {
        if coupling.dim != 1 {
            return invalid("quantum couplings are built on one-dimensional grids only");
        }
        let mut components = Vec::with_capacity(coupling.len());
        for m in 0..coupling.len() {
            let centers: Vec<(f64, f64)> = coupling.atom(m).chunks(2).map(|c| (c[0], c[1])).collect();
            components.push((coupling.weight(m), super::coherent::coherent_product(grid, &centers)?));
        }
        Ok(MixedState { components })
    }

    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|(w, _)| w).sum()
    }
}

/// `(1/N) Σ_j ⟨Φ| |x_j − y_j|² + ε²|k_{x_j} − k_{y_j}|² |Φ⟩` for a state on
/// the axes `(x_1…x_N, y_1…y_N)`.
pub fn dobrushin_quantum_functional(phi: &WaveFunction, n: usize) -> Result<f64> {
    if n == 0 || phi.axes != 2 * n {
        return invalid(format!("a coupling of {n}-particle systems has {} axes, got {}", 2 * n, phi.axes));
    }
    let m = phi.points();
    let xs = phi.grid.coordinates();
    let ks = phi.grid.wavenumbers();
    let eps = phi.grid.epsilon;
    let norm = phi.values.iter().map(|z| z.norm_sqr()).sum::<f64>();

    let mut idx = vec![0usize; phi.axes];
    let mut position = 0.0;
    for z in &phi.values {
        let d2: f64 = (0..n).map(|j| (xs[idx[j]] - xs[idx[n + j]]).powi(2)).sum();
        position += z.norm_sqr() * d2;
        for a in (0..phi.axes).rev() {
            idx[a] += 1;
            if idx[a] < m {
                break;
            }
            idx[a] = 0;
        }
    }
    position /= norm;

    let fft = AxisFft::new(m);
    let mut momentum = 0.0;
    let mut buf: Vec<Complex64> = Vec::new();
    for j in 0..n {
        buf.clone_from(&phi.values);
        fft.forward(&mut buf, phi.axes, j);
        fft.forward(&mut buf, phi.axes, n + j);
        let sa = m.pow((phi.axes - 1 - j) as u32);
        let sb = m.pow((phi.axes - 1 - n - j) as u32);
        let (mut num, mut den) = (0.0, 0.0);
        for (i, z) in buf.iter().enumerate() {
            let w = z.norm_sqr();
            let dk = ks[(i / sa) % m] - ks[(i / sb) % m];
            num += w * dk * dk;
            den += w;
        }
        momentum += eps * eps * num / den;
    }
    Ok((position + momentum) / n as f64)
}

/// Weighted average of [`dobrushin_quantum_functional`] over a mixture.
pub fn dobrushin_mixed(r: &MixedState, n: usize) -> Result<f64> {
    let mut s = 0.0;
    for (w, phi) in &r.components {
        s += w * dobrushin_quantum_functional(phi, n)?;
    }
    Ok(s / r.total_weight())
}

/// `trace((Q*Q + P*P) R)` for a coupling `R` on the two-variable grid
/// `(x_1, x_2)`, with `Q = x_1 − x_2` and `P = −iε(∂_{x_1} − ∂_{x_2})`.
pub fn qp_cost_trace(r: &MixedState) -> Result<f64> {
    dobrushin_mixed(r, 1)
}

/// [`qp_cost_trace`] of a density matrix on the doubled grid, through its
/// spectral decomposition. Only practical on small grids.
pub fn qp_cost_trace_density(r: &DensityMatrix) -> Result<f64> {
    if r.axes != 2 {
        return invalid("the transport cost needs a density matrix on the doubled grid (x_1, x_2)");
    }
    qp_cost_trace(&MixedState::from_density(r, 0.0)?)
}

/// Upper end of the bracket: `dist_MK,2(μ_1, μ_2)² + 2dε` for single-particle symbols.
pub fn mk_eps_upper(symbol1: &SymbolMeasure, symbol2: &SymbolMeasure, eps: f64) -> Result<f64> {
    if symbol1.particles() != 1 || symbol2.particles() != 1 || symbol1.dim != symbol2.dim {
        return invalid("the bracket compares single-particle symbols of equal dimension");
    }
    let (w2, _) = wasserstein_exact(&symbol1.measure, &symbol2.measure, 2.0)?;
    Ok(w2 * w2 + 2.0 * symbol1.dim as f64 * eps)
}

/// Squared `W₂` distance between the Husimi transforms of two one-axis
/// density matrices, each discretized on its own adapted lattice.
pub fn husimi_distance_squared(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    let a = husimi_transform(rho1)?.to_measure()?;
    let b = husimi_transform(rho2)?.to_measure()?;
    let (w2, _) = wasserstein_exact(&a, &b, 2.0)?;
    Ok(w2 * w2)
}

/// Lower end of the bracket: `dist_MK,2(W̃[ρ_1], W̃[ρ_2])² − 2dε`; may be negative.
pub fn mk_eps_lower(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    if rho1.grid.epsilon != rho2.grid.epsilon {
        return invalid("density matrices at different ε");
    }
    Ok(husimi_distance_squared(rho1, rho2)? - 2.0 * rho1.grid.epsilon)
}
