use num_complex::Complex64;

use super::fft::AxisFft;
use super::grid::{check_memory, GridSpec};
use crate::error::{invalid, Error, Result};

/// Grid samples of a wave function on `axes` one-dimensional variables.
///
/// Values are stored row-major with axis 0 slowest and normalized so that
/// `h^axes · Σ|ψ|² = 1`. An N-body state has `axes = N`; a coupling of two
/// N-body systems has `axes = 2N` with the first system's variables first.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    pub grid: GridSpec,
    pub axes: usize,
    pub values: Vec<Complex64>,
    pub time: f64,
}

impl WaveFunction {
    pub fn zeros(grid: GridSpec, axes: usize) -> Result<Self> {
        if axes == 0 {
            return invalid("a wave function needs at least one axis");
        }
        check_memory(grid.points_per_axis, axes, "wave function")?;
        let len = grid.points_per_axis.pow(axes as u32);
        Ok(WaveFunction { grid, axes, values: vec![Complex64::new(0.0, 0.0); len], time: 0.0 })
    }

    pub fn from_values(grid: GridSpec, axes: usize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.points_per_axis.pow(axes as u32) {
            return invalid(format!("{} values for a {}^{} grid", values.len(), grid.points_per_axis, axes));
        }
        Ok(WaveFunction { grid, axes, values, time: 0.0 })
    }

    pub fn points(&self) -> usize {
        self.grid.points_per_axis
    }

    /// Quadrature weight `h^axes` of one grid cell.
    pub fn cell(&self) -> f64 {
        self.grid.spacing().powi(self.axes as i32)
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.cell()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidState(format!("cannot normalize a state of norm {n}")));
        }
        let s = 1.0 / n;
        self.values.iter_mut().for_each(|z| *z *= s);
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &WaveFunction) -> Complex64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum::<Complex64>() * self.cell()
    }

    /// Tensor product of the given states, axes concatenated in order.
    pub fn product(factors: &[&WaveFunction]) -> Result<Self> {
        let Some(first) = factors.first() else {
            return invalid("empty tensor product");
        };
        let mut out = (*first).clone();
        for f in &factors[1..] {
            if f.grid.points_per_axis != out.grid.points_per_axis || f.grid.box_half_width != out.grid.box_half_width {
                return invalid("tensor factors live on different grids");
            }
            check_memory(out.points(), out.axes + f.axes, "tensor product")?;
            let mut values = Vec::with_capacity(out.values.len() * f.values.len());
            for a in &out.values {
                values.extend(f.values.iter().map(|b| a * b));
            }
            out.values = values;
            out.axes += f.axes;
        }
        Ok(out)
    }

    /// Multi-index of a flat position, axis 0 first.
    pub fn unflatten(&self, mut idx: usize, out: &mut [usize]) {
        let m = self.points();
        for a in (0..self.axes).rev() {
            out[a] = idx % m;
            idx /= m;
        }
    }

    /// `⟨x⟩` along one axis.
    pub fn position_mean(&self, axis: usize) -> f64 {
        let xs = self.grid.coordinates();
        let m = self.points();
        let stride = m.pow((self.axes - 1 - axis) as u32);
        self.values.iter().enumerate().map(|(i, z)| z.norm_sqr() * xs[(i / stride) % m]).sum::<f64>() * self.cell()
    }

    /// `⟨ε k⟩` along one axis.
    pub fn momentum_mean(&self, axis: usize) -> f64 {
        let k = self.grid.wavenumbers();
        let m = self.points();
        let mut v = self.values.clone();
        AxisFft::new(m).forward(&mut v, self.axes, axis);
        let stride = m.pow((self.axes - 1 - axis) as u32);
        let (mut num, mut den) = (0.0, 0.0);
        for (i, z) in v.iter().enumerate() {
            let w = z.norm_sqr();
            num += w * k[(i / stride) % m];
            den += w;
        }
        self.grid.epsilon * num / den
    }

    /// Probability that every coordinate lies in `[−L/2, L/2]`.
    pub fn inner_box_mass(&self) -> f64 {
        let xs = self.grid.coordinates();
        let half = 0.5 * self.grid.box_half_width;
        let inside: Vec<bool> = xs.iter().map(|x| x.abs() <= half).collect();
        let mut idx = vec![0; self.axes];
        let mut mass = 0.0;
        for (i, z) in self.values.iter().enumerate() {
            self.unflatten(i, &mut idx);
            if idx.iter().all(|&j| inside[j]) {
                mass += z.norm_sqr();
            }
        }
        mass * self.cell()
    }

    /// Fails with a domain error when more than `1e−10` of the mass has
    /// left the inner half of the box.
    pub fn check_guard_band(&self) -> Result<()> {
        let outside = 1.0 - self.inner_box_mass();
        if outside > 1e-10 {
            return Err(Error::Domain(format!(
                "mass {outside:.3e} outside the inner half of the box at t={}",
                self.time
            )));
        }
        Ok(())
    }
}
