//! Wigner and Husimi transforms of one-axis density matrices.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use super::coherent::coherent_samples;
use super::density::DensityMatrix;
use super::fft::AxisFft;
use crate::error::{invalid, Error, Result};
use crate::transport::DiscreteMeasure;

/// Real values on a rectangular `(x, ξ)` lattice, row-major in `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceFunction {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    pub values: Vec<f64>,
}

impl PhaseSpaceFunction {
    fn step(v: &[f64]) -> f64 {
        if v.len() > 1 {
            v[1] - v[0]
        } else {
            1.0
        }
    }

    pub fn cell(&self) -> f64 {
        Self::step(&self.x) * Self::step(&self.xi)
    }

    pub fn at(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.xi.len() + k]
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest deviation from `f(x, ξ)` over the lattice.
    pub fn max_error<F: Fn(f64, f64) -> f64>(&self, f: F) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, &x) in self.x.iter().enumerate() {
            for (k, &xi) in self.xi.iter().enumerate() {
                worst = worst.max((self.at(i, k) - f(x, xi)).abs());
            }
        }
        worst
    }

    /// Lattice cloud with weights `value·Δx·Δξ`, dropping cells below
    /// `1e−16` of the peak. Fails on negative values beyond roundoff.
    pub fn to_measure(&self) -> Result<DiscreteMeasure> {
        let peak = self.values.iter().copied().fold(0.0, f64::max);
        if self.min() < -1e-12 * peak.max(1.0) {
            return Err(Error::InvalidState("phase-space function has negative values".into()));
        }
        let cut = 1e-16 * peak;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (i, &x) in self.x.iter().enumerate() {
            for (k, &xi) in self.xi.iter().enumerate() {
                let v = self.at(i, k);
                if v > cut {
                    points.extend([x, xi]);
                    weights.push(v);
                }
            }
        }
        DiscreteMeasure::normalized(2, points, weights)
    }

    /// CSV with columns `x,xi,value`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let fmt = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(["x", "xi", "value"]).map_err(fmt)?;
        for (i, x) in self.x.iter().enumerate() {
            for (k, xi) in self.xi.iter().enumerate() {
                w.write_record(&[format!("{x:e}"), format!("{xi:e}"), format!("{:e}", self.at(i, k))]).map_err(fmt)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn one_axis(rho: &DensityMatrix) -> Result<()> {
    if rho.axes != 1 {
        return invalid(format!("phase-space transforms need a one-axis density matrix, got {} axes", rho.axes));
    }
    Ok(())
}

/// `W(x, ξ) = (2πε)^{−1} ∫ e^{−iξy/ε} ρ(x + y/2, x − y/2) dy`.
///
/// The shear `y = 2mh` stays on grid points, so no interpolation is needed;
/// the `ξ` lattice has spacing `πε/2L` and covers `±πε/2h`. Kernel samples
/// that fall outside the box are taken as zero.
pub fn wigner_transform(rho: &DensityMatrix) -> Result<PhaseSpaceFunction> {
    one_axis(rho)?;
    let g = rho.grid;
    let m = g.points_per_axis;
    let eps = g.epsilon;
    let fft = AxisFft::new(m);
    let pre = 1.0 / (PI * eps);
    let half = (m / 2) as isize;
    let mut values = vec![0.0; m * m];
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    for i in 0..m as isize {
        for s in -half..half {
            let (a, b) = (i + s, i - s);
            let slot = s.rem_euclid(m as isize) as usize;
            line[slot] = if a >= 0 && b >= 0 && a < m as isize && b < m as isize {
                rho.matrix[a as usize * m + b as usize]
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        fft.forward(&mut line, 1, 0);
        // FFT order → ascending ξ
        for k in 0..m {
            let src = (k + m / 2) % m;
            values[i as usize * m + k] = pre * line[src].re;
        }
    }
    let dxi = PI * eps / (2.0 * g.box_half_width);
    let xi = (0..m).map(|k| (k as f64 - (m / 2) as f64) * dxi).collect();
    Ok(PhaseSpaceFunction { x: g.coordinates(), xi, values })
}

/// Wigner function of `|q + ip, ε⟩`: `(πε)^{−1} e^{−((x−q)² + (ξ−p)²)/ε}`.
pub fn coherent_wigner(q: f64, p: f64, eps: f64, x: f64, xi: f64) -> f64 {
    (-((x - q).powi(2) + (xi - p).powi(2)) / eps).exp() / (PI * eps)
}

/// Husimi function of `|q + ip, ε⟩`: `(2πε)^{−1} e^{−((x−q)² + (ξ−p)²)/2ε}`.
pub fn coherent_husimi(q: f64, p: f64, eps: f64, x: f64, xi: f64) -> f64 {
    (-((x - q).powi(2) + (xi - p).powi(2)) / (2.0 * eps)).exp() / (2.0 * PI * eps)
}

/// `⟨z, ε|ρ|z, ε⟩ / 2πε` on the lattice `x × ξ`.
pub fn husimi_on(rho: &DensityMatrix, x: &[f64], xi: &[f64]) -> Result<PhaseSpaceFunction> {
    one_axis(rho)?;
    let g = rho.grid;
    let m = g.points_per_axis;
    let eps = g.epsilon;
    let xs = g.coordinates();
    let mut values = vec![0.0; x.len() * xi.len()];
    let mut b = vec![Complex64::new(0.0, 0.0); m * m];
    let mut phase = vec![Complex64::new(0.0, 0.0); m];
    for (a, &q) in x.iter().enumerate() {
        // real Gaussian envelope, normalized on the grid
        let env: Vec<f64> = coherent_samples(&g, q, 0.0).iter().map(|z| z.re).collect();
        let n2: f64 = env.iter().map(|e| e * e).sum();
        for i in 0..m {
            for j in 0..m {
                b[i * m + j] = rho.matrix[i * m + j] * (env[i] * env[j] / n2);
            }
        }
        for (k, &p) in xi.iter().enumerate() {
            for (ph, &xx) in phase.iter_mut().zip(&xs) {
                *ph = Complex64::from_polar(1.0, p * xx / eps);
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..m {
                let row = &b[i * m..(i + 1) * m];
                let s: Complex64 = row.iter().zip(&phase).map(|(r, c)| r * c).sum();
                acc += phase[i].conj() * s;
            }
            values[a * xi.len() + k] = acc.re / (2.0 * PI * eps);
        }
    }
    Ok(PhaseSpaceFunction { x: x.to_vec(), xi: xi.to_vec(), values })
}

/// Lattice used by [`husimi_transform`].
#[derive(Debug, Clone, PartialEq)]
pub struct HusimiLattice {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
}

impl HusimiLattice {
    /// Symmetric lattice around `(q, p)` with the given spacing and half-extents.
    pub fn centered(q: f64, p: f64, spacing: f64, half_x: f64, half_xi: f64) -> Self {
        let axis = |c: f64, half: f64| {
            let j = (half / spacing).ceil() as isize;
            (-j..=j).map(|s| c + s as f64 * spacing).collect()
        };
        HusimiLattice { x: axis(q, half_x), xi: axis(p, half_xi) }
    }

    /// Lattice at spacing `√ε/2` covering six Husimi standard deviations
    /// around the mean; the Husimi variance is the state's variance plus `ε/2`.
    pub fn adapted(rho: &DensityMatrix) -> Self {
        let eps = rho.grid.epsilon;
        let (q, vq) = rho.position_moments();
        let (p, vp) = rho.momentum_moments();
        let sx = (vq.max(0.0) + 0.5 * eps).sqrt();
        let sp = (vp.max(0.0) + 0.5 * eps).sqrt();
        Self::centered(q, p, 0.5 * eps.sqrt(), 6.0 * sx, 6.0 * sp)
    }
}

/// Husimi transform on the adapted lattice of `rho`.
pub fn husimi_transform(rho: &DensityMatrix) -> Result<PhaseSpaceFunction> {
    one_axis(rho)?;
    let lat = HusimiLattice::adapted(rho);
    husimi_on(rho, &lat.x, &lat.xi)
}

/// `G_{ε/2} ⋆ W` evaluated on the lattice `x × ξ` by quadrature over the
/// Wigner lattice; `G_{ε/2}(z) = (πε)^{−1} e^{−|z|²/ε}`.
pub fn smoothed_wigner(w: &PhaseSpaceFunction, eps: f64, x: &[f64], xi: &[f64]) -> PhaseSpaceFunction {
    let kernel = |a: &[f64], b: &[f64]| -> Vec<f64> {
        let mut g = vec![0.0; a.len() * b.len()];
        for (i, u) in a.iter().enumerate() {
            for (j, v) in b.iter().enumerate() {
                g[i * b.len() + j] = (-(u - v) * (u - v) / eps).exp();
            }
        }
        g
    };
    let gx = kernel(x, &w.x);
    let gk = kernel(xi, &w.xi);
    let (nwx, nwk) = (w.x.len(), w.xi.len());
    // t[i][b] = Σ_k W[i][k] gk[b][k]
    let mut t = vec![0.0; nwx * xi.len()];
    for i in 0..nwx {
        let row = &w.values[i * nwk..(i + 1) * nwk];
        for b in 0..xi.len() {
            t[i * xi.len() + b] = row.iter().zip(&gk[b * nwk..(b + 1) * nwk]).map(|(u, v)| u * v).sum();
        }
    }
    let scale = w.cell() / (PI * eps);
    let mut values = vec![0.0; x.len() * xi.len()];
    for a in 0..x.len() {
        for b in 0..xi.len() {
            let mut s = 0.0;
            for i in 0..nwx {
                s += gx[a * nwx + i] * t[i * xi.len() + b];
            }
            values[a * xi.len() + b] = s * scale;
        }
    }
    PhaseSpaceFunction { x: x.to_vec(), xi: xi.to_vec(), values }
}
