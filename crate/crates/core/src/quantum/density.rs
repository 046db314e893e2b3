use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::fft::AxisFft;
use super::grid::{check_memory, GridSpec};
use super::wave::WaveFunction;
use crate::error::{invalid, Error, Result};
use crate::rng::stream_rng;

/// A density matrix on `axes` grid variables.
///
/// `matrix` is the row-major `dim × dim` array of the operator in the
/// orthonormal grid basis, i.e. `h^axes · ρ(x_i, x_j)`, so that the trace is
/// the plain sum of the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub grid: GridSpec,
    pub axes: usize,
    pub matrix: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.grid.points_per_axis.pow(self.axes as u32)
    }

    pub(crate) fn zeros(grid: GridSpec, axes: usize) -> Result<Self> {
        check_memory(grid.points_per_axis, 2 * axes, "density matrix")?;
        let n = grid.points_per_axis.pow(axes as u32);
        Ok(DensityMatrix { grid, axes, matrix: vec![Complex64::new(0.0, 0.0); n * n] })
    }

    /// `Σ w_k |ψ_k⟩⟨ψ_k|`.
    pub fn from_mixture(components: &[(f64, &WaveFunction)]) -> Result<Self> {
        let Some((_, first)) = components.first() else {
            return invalid("empty mixture");
        };
        let mut out = Self::zeros(first.grid, first.axes)?;
        let n = out.dim();
        for (w, psi) in components {
            if psi.axes != out.axes || psi.values.len() != n {
                return invalid("mixture components live on different grids");
            }
            let s = w * psi.cell();
            for i in 0..n {
                let a = psi.values[i] * s;
                let row = &mut out.matrix[i * n..(i + 1) * n];
                for (r, b) in row.iter_mut().zip(&psi.values) {
                    *r += a * b.conj();
                }
            }
        }
        Ok(out)
    }

    pub fn from_pure(psi: &WaveFunction) -> Result<Self> {
        Self::from_mixture(&[(1.0, psi)])
    }

    pub fn trace(&self) -> Complex64 {
        let n = self.dim();
        (0..n).map(|i| self.matrix[i * n + i]).sum()
    }

    pub fn hermitian_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.matrix[i * n + j] - self.matrix[j * n + i].conj()).norm());
            }
        }
        worst
    }

    /// Hermitian to `1e−10`, unit trace to `1e−8`, and no Rayleigh quotient
    /// below `−1e−8` over `probes` random vectors.
    pub fn validate(&self, probes: usize, seed: u64) -> Result<()> {
        let herm = self.hermitian_error();
        if herm > 1e-10 {
            return Err(Error::InvalidState(format!("density matrix not Hermitian: {herm:.3e}")));
        }
        let tr = self.trace();
        if (tr - 1.0).norm() > 1e-8 {
            return Err(Error::InvalidState(format!("density matrix trace {tr}")));
        }
        let n = self.dim();
        let mut rng = stream_rng(seed, 0);
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        for _ in 0..probes {
            for z in v.iter_mut() {
                *z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            }
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            let q = self.quadratic_form(&v).re / norm;
            if q < -1e-8 {
                return Err(Error::InvalidState(format!("negative Rayleigh quotient {q:.3e}")));
            }
        }
        Ok(())
    }

    /// `v^H A v`.
    pub fn quadratic_form(&self, v: &[Complex64]) -> Complex64 {
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let row = &self.matrix[i * n..(i + 1) * n];
            let av: Complex64 = row.iter().zip(v).map(|(a, x)| a * x).sum();
            acc += v[i].conj() * av;
        }
        acc
    }

    pub fn to_dmatrix(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        DMatrix::from_row_slice(n, n, &self.matrix)
    }

    /// Eigenvalues (ascending order is not guaranteed) and eigenvectors as columns.
    pub fn eigen(&self) -> (Vec<f64>, DMatrix<Complex64>) {
        let e = SymmetricEigen::new(self.to_dmatrix());
        (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
    }

    /// `(⟨x⟩, Var x)` of a one-axis density matrix.
    pub fn position_moments(&self) -> (f64, f64) {
        let xs = self.grid.coordinates();
        let n = self.dim();
        let (mut m1, mut m2) = (0.0, 0.0);
        for (i, x) in xs.iter().enumerate().take(n) {
            let w = self.matrix[i * n + i].re;
            m1 += w * x;
            m2 += w * x * x;
        }
        (m1, m2 - m1 * m1)
    }

    /// Momentum-space populations `⟨k|ρ|k⟩` of a one-axis density matrix,
    /// in FFT order.
    pub fn momentum_populations(&self) -> Vec<f64> {
        let n = self.dim();
        let mut a = self.matrix.clone();
        let f = AxisFft::new(n);
        // F ρ F^H: forward over rows, conjugate-forward over columns
        f.forward(&mut a, 2, 0);
        a.iter_mut().for_each(|z| *z = z.conj());
        f.forward(&mut a, 2, 1);
        (0..n).map(|k| a[k * n + k].re / n as f64).collect()
    }

    /// `(⟨εk⟩, Var εk)` of a one-axis density matrix.
    pub fn momentum_moments(&self) -> (f64, f64) {
        let pops = self.momentum_populations();
        let eps = self.grid.epsilon;
        let (mut m1, mut m2) = (0.0, 0.0);
        for (w, k) in pops.iter().zip(self.grid.wavenumbers()) {
            m1 += w * eps * k;
            m2 += w * eps * eps * k * k;
        }
        (m1, m2 - m1 * m1)
    }
}

/// `½‖A − B‖₁` via a Hermitian eigendecomposition of the difference.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return invalid("trace distance between matrices of different sizes");
    }
    let n = a.dim();
    let diff: Vec<Complex64> = a.matrix.iter().zip(&b.matrix).map(|(x, y)| x - y).collect();
    let e = SymmetricEigen::new(DMatrix::from_row_slice(n, n, &diff));
    Ok(0.5 * e.eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
}

/// Reduced density matrix of the contiguous axes `start..start+n`.
pub fn reduced_density(psi: &WaveFunction, start: usize, n: usize) -> Result<DensityMatrix> {
    if n == 0 || start + n > psi.axes {
        return invalid(format!("cannot keep axes {start}..{} of a {}-axis state", start + n, psi.axes));
    }
    let m = psi.points();
    let mut out = DensityMatrix::zeros(psi.grid, n)?;
    let k = m.pow(n as u32);
    let rest = m.pow((psi.axes - start - n) as u32);
    let outer = m.pow(start as u32);
    let cell = psi.cell();
    for o in 0..outer {
        let block = &psi.values[o * k * rest..(o + 1) * k * rest];
        for i in 0..k {
            let ri = &block[i * rest..(i + 1) * rest];
            for j in i..k {
                let rj = &block[j * rest..(j + 1) * rest];
                let s: Complex64 = ri.iter().zip(rj).map(|(a, b)| a * b.conj()).sum();
                out.matrix[i * k + j] += s * cell;
            }
        }
    }
    for i in 0..k {
        for j in 0..i {
            out.matrix[i * k + j] = out.matrix[j * k + i].conj();
        }
        out.matrix[i * k + i].im = 0.0;
    }
    Ok(out)
}

/// Marginal on the first `n` particles of an N-body state, `n < N`.
pub fn partial_trace(psi: &WaveFunction, n: usize) -> Result<DensityMatrix> {
    if n >= psi.axes {
        return invalid(format!("marginal order {n} must be below the particle number {}", psi.axes));
    }
    reduced_density(psi, 0, n)
}
