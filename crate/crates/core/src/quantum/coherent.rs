use num_complex::Complex64;

use super::grid::GridSpec;
use super::wave::WaveFunction;
use crate::error::{Error, Result};

/// `x²/ε` margin giving a Gaussian tail below `1e−12` (`e^{−28} ≈ 7e−13`).
const TAIL_EXPONENT: f64 = 28.0;

/// Checks that `|q + ip, ε⟩` fits the grid in position and in momentum.
pub fn check_coherent_center(grid: &GridSpec, q: f64, p: f64) -> Result<()> {
    let eps = grid.epsilon;
    let room_x = grid.box_half_width - q.abs();
    let room_k = grid.k_max() - p.abs() / eps;
    if room_x <= 0.0 || room_x * room_x / eps < TAIL_EXPONENT {
        return Err(Error::Domain(format!(
            "coherent center q={q} too close to the box edge ±{} at ε={eps}",
            grid.box_half_width
        )));
    }
    if room_k <= 0.0 || room_k * room_k * eps < TAIL_EXPONENT {
        return Err(Error::Domain(format!(
            "coherent momentum p={p} too close to the grid cutoff ε·π/h={} at ε={eps}",
            eps * grid.k_max()
        )));
    }
    Ok(())
}

/// Unnormalized samples of `(πε)^{−1/4} e^{−(x−q)²/2ε} e^{ipx/ε}`.
pub(crate) fn coherent_samples(grid: &GridSpec, q: f64, p: f64) -> Vec<Complex64> {
    let eps = grid.epsilon;
    let pre = (std::f64::consts::PI * eps).powf(-0.25);
    grid.coordinates()
        .iter()
        .map(|&x| Complex64::from_polar(pre * (-(x - q) * (x - q) / (2.0 * eps)).exp(), p * x / eps))
        .collect()
}

/// The coherent state `|q + ip, ε⟩` on one axis, renormalized on the grid.
pub fn coherent_state(grid: &GridSpec, q: f64, p: f64) -> Result<WaveFunction> {
    check_coherent_center(grid, q, p)?;
    let mut w = WaveFunction::from_values(*grid, 1, coherent_samples(grid, q, p))?;
    w.normalize()?;
    Ok(w)
}

/// Tensor product of coherent states with the given `(q, p)` centers.
pub fn coherent_product(grid: &GridSpec, centers: &[(f64, f64)]) -> Result<WaveFunction> {
    let factors = centers.iter().map(|&(q, p)| coherent_state(grid, q, p)).collect::<Result<Vec<_>>>()?;
    WaveFunction::product(&factors.iter().collect::<Vec<_>>())
}

/// Orthonormal-basis coefficients `h^{1/2}·ψ` of a normalized coherent state,
/// without the domain check.
pub(crate) fn coherent_coefficients(grid: &GridSpec, q: f64, p: f64) -> Vec<Complex64> {
    let mut c = coherent_samples(grid, q, p);
    let n = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    c.iter_mut().for_each(|z| *z /= n);
    c
}
