use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Environment variable overriding the memory cap, in bytes.
pub const MEMORY_CAP_ENV: &str = "MEANFIELD_MEMORY_CAP_BYTES";
/// Default cap on any single grid array: 2 GiB.
pub const DEFAULT_MEMORY_CAP: u64 = 2 << 30;

/// Periodic spectral grid `x_j = −L + j·h`, `h = 2L/M`, on every axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Spatial dimension per particle. Only `d = 1` grids are supported.
    pub dim: usize,
    pub n_particles: usize,
    pub points_per_axis: usize,
    pub box_half_width: f64,
    pub epsilon: f64,
}

impl GridSpec {
    pub fn new(
        dim: usize,
        n_particles: usize,
        points_per_axis: usize,
        box_half_width: f64,
        epsilon: f64,
    ) -> Result<Self> {
        if dim != 1 {
            return invalid(format!("quantum grids are one-dimensional per particle, got d={dim}"));
        }
        if n_particles == 0 {
            return invalid("at least one particle is required");
        }
        if points_per_axis < 4 || !points_per_axis.is_power_of_two() {
            return invalid(format!("points per axis must be a power of two ≥ 4, got {points_per_axis}"));
        }
        if !(box_half_width > 0.0) || !box_half_width.is_finite() {
            return invalid(format!("box half-width must be positive, got {box_half_width}"));
        }
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return invalid(format!("epsilon must be positive, got {epsilon}"));
        }
        Ok(GridSpec { dim, n_particles, points_per_axis, box_half_width, epsilon })
    }

    /// One particle in one dimension.
    pub fn single(points_per_axis: usize, box_half_width: f64, epsilon: f64) -> Result<Self> {
        Self::new(1, 1, points_per_axis, box_half_width, epsilon)
    }

    pub fn with_particles(&self, n: usize) -> Self {
        GridSpec { n_particles: n, ..*self }
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.box_half_width / self.points_per_axis as f64
    }

    pub fn coordinates(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.points_per_axis).map(|j| -self.box_half_width + j as f64 * h).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let m = self.points_per_axis;
        let dk = PI / self.box_half_width;
        (0..m).map(|j| if j < m / 2 { j as f64 * dk } else { (j as f64 - m as f64) * dk }).collect()
    }

    /// Largest representable wavenumber `π/h`.
    pub fn k_max(&self) -> f64 {
        PI / self.spacing()
    }
}

pub fn memory_cap_bytes() -> u64 {
    std::env::var(MEMORY_CAP_ENV).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_MEMORY_CAP)
}

/// Bytes of a complex128 array with `points^axes` entries.
pub fn state_bytes(points: usize, axes: usize) -> u128 {
    16 * (points as u128).pow(axes as u32)
}

pub fn check_memory(points: usize, axes: usize, what: &str) -> Result<()> {
    let bytes = state_bytes(points, axes);
    let cap = memory_cap_bytes();
    if bytes > cap as u128 {
        return Err(Error::Resource(format!("{what}: {points}^{axes} complex grid needs {bytes} bytes, cap is {cap}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_geometry() {
        let g = GridSpec::single(8, 2.0, 0.5).unwrap();
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.coordinates()[0], -2.0);
        assert_eq!(g.coordinates()[7], 1.5);
        let k = g.wavenumbers();
        assert_eq!(k[1], PI / 2.0);
        assert_eq!(k[4], -4.0 * PI / 2.0);
        assert!((g.k_max() - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(GridSpec::new(2, 1, 16, 1.0, 1.0).is_err());
        assert!(GridSpec::single(12, 1.0, 1.0).is_err());
        assert!(GridSpec::single(16, 1.0, 0.0).is_err());
    }

    #[test]
    fn memory_formula() {
        assert_eq!(state_bytes(128, 4), 16 * 128u128.pow(4));
        assert!(check_memory(64, 4, "state").is_ok());
        assert!(check_memory(512, 4, "state").is_err());
    }
}
