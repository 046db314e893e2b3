use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::transport::DiscreteMeasure;

/// Positions and momenta of `N` particles in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub dim: usize,
    pub positions: Vec<f64>,
    pub momenta: Vec<f64>,
    pub time: f64,
}

impl PhaseState {
    pub fn new(dim: usize, positions: Vec<f64>, momenta: Vec<f64>, time: f64) -> Result<Self> {
        if dim == 0 {
            return invalid("dimension must be positive");
        }
        if positions.is_empty() || positions.len() % dim != 0 || momenta.len() != positions.len() {
            return invalid(format!(
                "positions ({}) and momenta ({}) must hold N ≥ 1 rows of dimension {dim}",
                positions.len(),
                momenta.len()
            ));
        }
        if positions.iter().chain(&momenta).any(|v| !v.is_finite()) || !time.is_finite() {
            return invalid("phase state entries must be finite");
        }
        Ok(PhaseState { dim, positions, momenta, time })
    }

    pub fn n_particles(&self) -> usize {
        self.positions.len() / self.dim
    }

    pub fn position(&self, k: usize) -> &[f64] {
        &self.positions[k * self.dim..(k + 1) * self.dim]
    }

    pub fn momentum(&self, k: usize) -> &[f64] {
        &self.momenta[k * self.dim..(k + 1) * self.dim]
    }

    /// Relabels particles: particle `k` of the result is particle `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let d = self.dim;
        let mut positions = Vec::with_capacity(self.positions.len());
        let mut momenta = Vec::with_capacity(self.momenta.len());
        for &k in perm {
            positions.extend_from_slice(&self.positions[k * d..(k + 1) * d]);
            momenta.extend_from_slice(&self.momenta[k * d..(k + 1) * d]);
        }
        PhaseState { dim: d, positions, momenta, time: self.time }
    }
}

/// Particle approximation of a one-particle phase-space density: `M` points
/// `(x, ξ) ∈ R^{2d}` with equal weights `1/M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VlasovCloud {
    pub state: PhaseState,
}

impl VlasovCloud {
    pub fn new(state: PhaseState) -> Self {
        VlasovCloud { state }
    }

    pub fn len(&self) -> usize {
        self.state.n_particles()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.state.dim
    }

    pub fn time(&self) -> f64 {
        self.state.time
    }

    /// The cloud as an equal-weight measure on `R^{2d}` with coordinates
    /// `(x, ξ)`.
    pub fn measure(&self) -> DiscreteMeasure {
        let d = self.dim();
        let mut pts = Vec::with_capacity(2 * self.state.positions.len());
        for k in 0..self.len() {
            pts.extend_from_slice(self.state.position(k));
            pts.extend_from_slice(self.state.momentum(k));
        }
        DiscreteMeasure::uniform(2 * d, pts).expect("cloud is nonempty and finite")
    }
}
