//! Strang split-step propagators: N-body Schrödinger, Hartree and the
//! coupled Hartree/N-body evolution on a doubled grid.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::fft::AxisFft;
use super::grid::GridSpec;
use super::wave::WaveFunction;
use crate::error::{invalid, Result};
use crate::potential::Potential;

/// A multiplicative phase acting on one axis or on a pair of axes.
enum PhaseFactor {
    Axis { axis: usize, table: Vec<Complex64> },
    Pair { a: usize, b: usize, table: Vec<Complex64> },
}

/// Multiplies every grid value by the product of the given factors.
fn apply_factors(values: &mut [Complex64], m: usize, axes: usize, factors: &[&PhaseFactor]) {
    if factors.is_empty() {
        return;
    }
    let mut idx = vec![0usize; axes];
    for z in values.iter_mut() {
        let mut w = Complex64::new(1.0, 0.0);
        for f in factors {
            w *= match *f {
                PhaseFactor::Axis { axis, table } => table[idx[*axis]],
                PhaseFactor::Pair { a, b, table } => table[idx[*a] * m + idx[*b]],
            };
        }
        *z *= w;
        // odometer, last axis fastest
        for a in (0..axes).rev() {
            idx[a] += 1;
            if idx[a] < m {
                break;
            }
            idx[a] = 0;
        }
    }
}

fn phase_table(values: impl Iterator<Item = f64>, scale: f64) -> Vec<Complex64> {
    values.map(|u| Complex64::from_polar(1.0, -scale * u)).collect()
}

/// `exp(−i dt ε k²/2)` in FFT order; rejects steps whose largest kinetic
/// phase reaches `π`.
fn kinetic_table(grid: &GridSpec, dt: f64) -> Result<Vec<Complex64>> {
    if !(dt > 0.0) || !dt.is_finite() {
        return invalid(format!("time step must be positive, got {dt}"));
    }
    let eps = grid.epsilon;
    let kmax = grid.k_max();
    let phase = dt * eps * kmax * kmax / 2.0;
    if phase >= PI {
        return invalid(format!(
            "kinetic phase dt·εk²/2 = {phase:.3} reaches π; reduce dt below {:.3e}",
            2.0 * PI / (eps * kmax * kmax)
        ));
    }
    Ok(phase_table(grid.wavenumbers().iter().map(|k| 0.5 * eps * k * k), dt))
}

fn check_potential(v: &Potential) -> Result<()> {
    if v.dim() != 1 {
        return invalid(format!("quantum grids are one-dimensional, potential has d={}", v.dim()));
    }
    Ok(())
}

/// `exp(−i (dt/2) V(x_a − x_b) / (εN))` for all grid pairs.
fn pair_table(grid: &GridSpec, v: &Potential, n: usize, dt: f64) -> Vec<Complex64> {
    let xs = grid.coordinates();
    let scale = 0.5 * dt / (grid.epsilon * n as f64);
    phase_table(xs.iter().flat_map(|a| xs.iter().map(move |b| v.eval1(a - b))), scale)
}

/// Split-step propagator for
/// `iε∂_tΨ = −(ε²/2) Σ_k Δ_k Ψ + (1/N) Σ_{k<l} V(x_k − x_l) Ψ + Σ_k U(x_k) Ψ`.
pub struct SplitStep {
    grid: GridSpec,
    axes: usize,
    dt: f64,
    fft: AxisFft,
    kinetic: Vec<Complex64>,
    half_potential: Vec<PhaseFactor>,
}

impl SplitStep {
    /// Interacting N-body propagator, `N = grid.n_particles`, no external field.
    pub fn nbody(grid: &GridSpec, v: &Potential, dt: f64) -> Result<Self> {
        check_potential(v)?;
        let n = grid.n_particles;
        let mut half_potential = Vec::new();
        if !v.is_zero() && n > 1 {
            let table = pair_table(grid, v, n, dt);
            for a in 0..n {
                for b in a + 1..n {
                    half_potential.push(PhaseFactor::Pair { a, b, table: table.clone() });
                }
            }
        }
        Ok(SplitStep {
            grid: *grid,
            axes: n,
            dt,
            fft: AxisFft::new(grid.points_per_axis),
            kinetic: kinetic_table(grid, dt)?,
            half_potential,
        })
    }

    /// One particle in the external potential `u`.
    pub fn external<U: Fn(f64) -> f64>(grid: &GridSpec, u: U, dt: f64) -> Result<Self> {
        let table = phase_table(grid.coordinates().iter().map(|&x| u(x)), 0.5 * dt / grid.epsilon);
        Ok(SplitStep {
            grid: *grid,
            axes: 1,
            dt,
            fft: AxisFft::new(grid.points_per_axis),
            kinetic: kinetic_table(grid, dt)?,
            half_potential: vec![PhaseFactor::Axis { axis: 0, table }],
        })
    }

    pub fn step(&self, psi: &mut WaveFunction) -> Result<()> {
        if psi.axes != self.axes || psi.grid.points_per_axis != self.grid.points_per_axis {
            return invalid(format!("propagator for {} axes applied to a {}-axis state", self.axes, psi.axes));
        }
        let m = self.grid.points_per_axis;
        let factors: Vec<&PhaseFactor> = self.half_potential.iter().collect();
        apply_factors(&mut psi.values, m, self.axes, &factors);
        for axis in 0..self.axes {
            self.fft.multiply(&mut psi.values, self.axes, axis, &self.kinetic);
        }
        apply_factors(&mut psi.values, m, self.axes, &factors);
        psi.time += self.dt;
        Ok(())
    }
}

/// One Strang step of the N-body Schrödinger equation.
pub fn split_step_nbody(psi: &WaveFunction, v: &Potential, dt: f64) -> Result<WaveFunction> {
    let mut out = psi.clone();
    SplitStep::nbody(&psi.grid.with_particles(psi.axes), v, dt)?.step(&mut out)?;
    Ok(out)
}

/// Self-consistent potential `V_ρ(x) = ∫ V(x − z)|ψ(z)|² dz` by zero-padded
/// FFT convolution, so no periodic images enter.
pub struct MeanFieldConvolution {
    m: usize,
    h: f64,
    fft: AxisFft,
    kernel_hat: Vec<Complex64>,
}

impl MeanFieldConvolution {
    pub fn new(grid: &GridSpec, v: &Potential) -> Self {
        let m = grid.points_per_axis;
        let h = grid.spacing();
        let fft = AxisFft::new(2 * m);
        let mut kernel = vec![Complex64::new(0.0, 0.0); 2 * m];
        for d in -(m as isize - 1)..m as isize {
            kernel[d.rem_euclid(2 * m as isize) as usize] = Complex64::new(v.eval1(d as f64 * h), 0.0);
        }
        fft.forward(&mut kernel, 1, 0);
        MeanFieldConvolution { m, h, fft, kernel_hat: kernel }
    }

    pub fn potential(&self, psi: &WaveFunction) -> Vec<f64> {
        let m = self.m;
        let mut a = vec![Complex64::new(0.0, 0.0); 2 * m];
        for (s, z) in a.iter_mut().zip(&psi.values) {
            *s = Complex64::new(z.norm_sqr() * self.h, 0.0);
        }
        self.fft.forward(&mut a, 1, 0);
        for (s, k) in a.iter_mut().zip(&self.kernel_hat) {
            *s *= k;
        }
        self.fft.inverse(&mut a, 1, 0);
        a[..m].iter().map(|z| z.re).collect()
    }
}

/// Split-step propagator for the Hartree equation
/// `iε∂_tψ = −(ε²/2)Δψ + V_ρ ψ`, `ρ = |ψ|²`.
///
/// Each potential half-step uses the density at that instant; the density
/// is unchanged by the phase itself, so no predictor is needed.
pub struct HartreeStep {
    grid: GridSpec,
    dt: f64,
    fft: AxisFft,
    kinetic: Vec<Complex64>,
    conv: MeanFieldConvolution,
    interacting: bool,
}

impl HartreeStep {
    pub fn new(grid: &GridSpec, v: &Potential, dt: f64) -> Result<Self> {
        check_potential(v)?;
        Ok(HartreeStep {
            grid: *grid,
            dt,
            fft: AxisFft::new(grid.points_per_axis),
            kinetic: kinetic_table(grid, dt)?,
            conv: MeanFieldConvolution::new(grid, v),
            interacting: !v.is_zero(),
        })
    }

    pub fn mean_field_potential(&self, psi: &WaveFunction) -> Vec<f64> {
        self.conv.potential(psi)
    }

    fn half_phase(&self, psi: &WaveFunction) -> Option<Vec<Complex64>> {
        self.interacting.then(|| phase_table(self.conv.potential(psi).into_iter(), 0.5 * self.dt / self.grid.epsilon))
    }

    fn check(&self, psi: &WaveFunction) -> Result<()> {
        if psi.axes != 1 || psi.grid.points_per_axis != self.grid.points_per_axis {
            return invalid("the Hartree propagator acts on single-particle states of its own grid");
        }
        Ok(())
    }

    pub fn step(&self, psi: &mut WaveFunction) -> Result<()> {
        self.check(psi)?;
        if let Some(t) = self.half_phase(psi) {
            psi.values.iter_mut().zip(&t).for_each(|(z, w)| *z *= w);
        }
        self.fft.multiply(&mut psi.values, 1, 0, &self.kinetic);
        if let Some(t) = self.half_phase(psi) {
            psi.values.iter_mut().zip(&t).for_each(|(z, w)| *z *= w);
        }
        psi.time += self.dt;
        Ok(())
    }
}

/// One Strang step of the Hartree equation.
pub fn hartree_step(psi: &WaveFunction, v: &Potential, dt: f64) -> Result<WaveFunction> {
    let mut out = psi.clone();
    HartreeStep::new(&psi.grid, v, dt)?.step(&mut out)?;
    Ok(out)
}

/// `trace(−ε²Δρ) + ∬ V(x − z)|ψ(z)|²|ψ(x)|² dx dz`, twice the Hartree
/// Hamiltonian; conserved by the exact flow.
pub fn hartree_energy(psi: &WaveFunction, v: &Potential) -> Result<f64> {
    check_potential(v)?;
    if psi.axes != 1 {
        return invalid("Hartree energy of a multi-axis state");
    }
    let g = psi.grid;
    let mut hat = psi.values.clone();
    AxisFft::new(g.points_per_axis).forward(&mut hat, 1, 0);
    let (mut num, mut den) = (0.0, 0.0);
    for (z, k) in hat.iter().zip(g.wavenumbers()) {
        num += z.norm_sqr() * k * k;
        den += z.norm_sqr();
    }
    let kinetic = g.epsilon * g.epsilon * num / den;
    let vrho = MeanFieldConvolution::new(&g, v).potential(psi);
    let potential: f64 = psi.values.iter().zip(&vrho).map(|(z, u)| z.norm_sqr() * u).sum::<f64>() * g.spacing();
    Ok(kinetic + potential)
}

/// Lockstep propagator for a coupling `Φ(x_1…x_N, y_1…y_N)` of the
/// Hartree tensor power (x side) and the N-body state (y side).
///
/// The x axes feel the self-consistent potential of `reference`, a Hartree
/// state advanced in the same step with the same potentials; the y axes
/// feel the pair interaction `(1/N) Σ_{k<l} V(y_k − y_l)`.
pub struct CoupledStep {
    n: usize,
    hartree: HartreeStep,
    pairs: Vec<PhaseFactor>,
}

impl CoupledStep {
    pub fn new(grid: &GridSpec, v: &Potential, dt: f64) -> Result<Self> {
        let n = grid.n_particles;
        let hartree = HartreeStep::new(grid, v, dt)?;
        let mut pairs = Vec::new();
        if !v.is_zero() && n > 1 {
            let table = pair_table(grid, v, n, dt);
            for a in 0..n {
                for b in a + 1..n {
                    pairs.push(PhaseFactor::Pair { a: n + a, b: n + b, table: table.clone() });
                }
            }
        }
        Ok(CoupledStep { n, hartree, pairs })
    }

    fn half_potential(&self, phi: &mut WaveFunction, reference: &mut WaveFunction) {
        let mut mean_field: Vec<PhaseFactor> = Vec::new();
        if let Some(t) = self.hartree.half_phase(reference) {
            reference.values.iter_mut().zip(&t).for_each(|(z, w)| *z *= w);
            mean_field.extend((0..self.n).map(|axis| PhaseFactor::Axis { axis, table: t.clone() }));
        }
        let factors: Vec<&PhaseFactor> = mean_field.iter().chain(&self.pairs).collect();
        let m = phi.points();
        apply_factors(&mut phi.values, m, 2 * self.n, &factors);
    }

    pub fn step(&self, phi: &mut WaveFunction, reference: &mut WaveFunction) -> Result<()> {
        self.hartree.check(reference)?;
        if phi.axes != 2 * self.n || phi.points() != reference.points() {
            return invalid(format!("coupled propagator for 2×{} axes applied to a {}-axis state", self.n, phi.axes));
        }
        self.half_potential(phi, reference);
        let h = &self.hartree;
        h.fft.multiply(&mut reference.values, 1, 0, &h.kinetic);
        for axis in 0..phi.axes {
            h.fft.multiply(&mut phi.values, phi.axes, axis, &h.kinetic);
        }
        self.half_potential(phi, reference);
        phi.time += h.dt;
        reference.time += h.dt;
        Ok(())
    }
}

/// One lockstep step of the coupled evolution and of its Hartree reference.
pub fn coupled_quantum_advance(
    phi: &WaveFunction,
    reference: &WaveFunction,
    v: &Potential,
    dt: f64,
) -> Result<(WaveFunction, WaveFunction)> {
    if phi.axes % 2 != 0 {
        return invalid("a coupled state has an even number of axes");
    }
    let stepper = CoupledStep::new(&phi.grid.with_particles(phi.axes / 2), v, dt)?;
    let (mut a, mut b) = (phi.clone(), reference.clone());
    stepper.step(&mut a, &mut b)?;
    Ok((a, b))
}
