//! Interaction potentials, their declared regularity constants, and the
//! physical-to-dimensionless rescaling.
//!
//! A [`Potential`] carries `sup_grad = ‖∇V‖∞`, `lip_grad = Lip(∇V)` and
//! `sup_abs = ‖V‖∞` as stored values. Every bound evaluated downstream reads
//! these numbers, so they are fixed at construction and audited separately by
//! [`verify_constants`].

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::stream_rng;

/// Closed-form potential families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum PotentialSpec {
    /// `V(z) = amplitude · exp(−|z|² / (2 width²))`
    Gaussian {
        amplitude: f64,
        width: f64,
        #[serde(default = "default_dim")]
        dim: usize,
    },
    /// `V ≡ 0`
    Zero {
        #[serde(default = "default_dim")]
        dim: usize,
    },
}

fn default_dim() -> usize {
    1
}

impl PotentialSpec {
    pub fn build(&self) -> Result<Potential> {
        match *self {
            PotentialSpec::Gaussian { amplitude, width, dim } => make_gaussian_potential(amplitude, width, dim),
            PotentialSpec::Zero { dim } => make_gaussian_potential(0.0, 1.0, dim),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    Gaussian { amplitude: f64, width: f64 },
}

/// An even interaction potential on `R^d` with stored regularity constants.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    name: String,
    dim: usize,
    shape: Shape,
    sup_grad: f64,
    lip_grad: f64,
    sup_abs: f64,
    // cached 1/(2 width²) and amplitude/width²
    half_inv_w2: f64,
    grad_scale: f64,
}

impl Potential {
    fn gaussian(amplitude: f64, width: f64, dim: usize) -> Self {
        let a = amplitude.abs();
        let name = if amplitude == 0.0 { "zero" } else { "gaussian" };
        Potential {
            name: name.to_string(),
            dim,
            shape: Shape::Gaussian { amplitude, width },
            sup_grad: a / width * (-0.5f64).exp(),
            // Hessian eigenvalues are A/w² e^{-s/2}·{-1, s-1} with s=|z|²/w²; the
            // largest modulus is attained at s=0.
            lip_grad: a / (width * width),
            sup_abs: a,
            half_inv_w2: 0.5 / (width * width),
            grad_scale: amplitude / (width * width),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `‖∇V‖_{L∞}`
    pub fn sup_grad(&self) -> f64 {
        self.sup_grad
    }

    /// `Lip(∇V)`
    pub fn lip_grad(&self) -> f64 {
        self.lip_grad
    }

    /// `‖V‖_{L∞}`
    pub fn sup_abs(&self) -> f64 {
        self.sup_abs
    }

    pub fn is_zero(&self) -> bool {
        match self.shape {
            Shape::Gaussian { amplitude, .. } => amplitude == 0.0,
        }
    }

    /// Gaussian parameters `(amplitude, width)`.
    pub fn gaussian_parameters(&self) -> (f64, f64) {
        match self.shape {
            Shape::Gaussian { amplitude, width } => (amplitude, width),
        }
    }

    /// Replace the declared constants. Only meant for auditing experiments
    /// that need a deliberately wrong declaration.
    pub fn with_declared_constants(mut self, sup_grad: f64, lip_grad: f64) -> Self {
        self.sup_grad = sup_grad;
        self.lip_grad = lip_grad;
        self
    }

    pub fn spec(&self) -> PotentialSpec {
        match self.shape {
            Shape::Gaussian { amplitude, width } => {
                if amplitude == 0.0 {
                    PotentialSpec::Zero { dim: self.dim }
                } else {
                    PotentialSpec::Gaussian { amplitude, width, dim: self.dim }
                }
            }
        }
    }

    /// `V(z)` for `z ∈ R^d`.
    pub fn eval(&self, z: &[f64]) -> f64 {
        debug_assert_eq!(z.len(), self.dim);
        let r2: f64 = z.iter().map(|c| c * c).sum();
        self.eval_r2(r2)
    }

    /// `V` as a function of `|z|²`.
    #[inline]
    pub fn eval_r2(&self, r2: f64) -> f64 {
        match self.shape {
            Shape::Gaussian { amplitude, .. } => amplitude * (-r2 * self.half_inv_w2).exp(),
        }
    }

    /// One-dimensional evaluation `V(z)`.
    #[inline]
    pub fn eval1(&self, z: f64) -> f64 {
        self.eval_r2(z * z)
    }

    /// Writes `∇V(z)` into `out`.
    pub fn grad(&self, z: &[f64], out: &mut [f64]) {
        debug_assert_eq!(z.len(), self.dim);
        let r2: f64 = z.iter().map(|c| c * c).sum();
        let s = self.radial_factor(r2);
        for (o, c) in out.iter_mut().zip(z) {
            *o = s * c;
        }
    }

    /// One-dimensional derivative `V'(z)`. Exactly odd in `z`.
    #[inline]
    pub fn grad1(&self, z: f64) -> f64 {
        self.radial_factor(z * z) * z
    }

    /// `∇V(z) = radial_factor(|z|²) · z`.
    #[inline]
    pub fn radial_factor(&self, r2: f64) -> f64 {
        match self.shape {
            Shape::Gaussian { .. } => -self.grad_scale * (-r2 * self.half_inv_w2).exp(),
        }
    }
}

/// `V(z) = amplitude · exp(−|z|²/(2·width²))` on `R^d`, with analytic
/// `‖∇V‖∞ = |amplitude|·e^{−1/2}/width` and `Lip(∇V) = |amplitude|/width²`.
pub fn make_gaussian_potential(amplitude: f64, width: f64, dim: usize) -> Result<Potential> {
    if !(width > 0.0) || !width.is_finite() {
        return invalid(format!("gaussian width must be positive, got {width}"));
    }
    if !amplitude.is_finite() {
        return invalid("gaussian amplitude must be finite");
    }
    if dim == 0 {
        return invalid("potential dimension must be positive");
    }
    Ok(Potential::gaussian(amplitude, width, dim))
}

/// Physical scales of an N-body Schrödinger problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingInput {
    pub hbar: f64,
    pub mass: f64,
    pub length: f64,
    pub time: f64,
    pub n_particles: usize,
}

/// Dimensionless form of a physical problem.
///
/// Returns `ε = ħT/(mL²)` together with `V̂(ẑ) = (N T²/(m L²))·V(L ẑ)`.
pub fn rescale(s: &ScalingInput, v_phys: &Potential) -> Result<(f64, Potential)> {
    let positive = [s.hbar, s.mass, s.length, s.time];
    if positive.iter().any(|x| !(*x > 0.0) || !x.is_finite()) || s.n_particles == 0 {
        return invalid(format!("scaling inputs must be strictly positive: {s:?}"));
    }
    let l2 = s.length * s.length;
    let epsilon = s.hbar * s.time / (s.mass * l2);
    let factor = s.n_particles as f64 * s.time * s.time / (s.mass * l2);
    let v_hat = match v_phys.shape {
        Shape::Gaussian { amplitude, width } => {
            make_gaussian_potential(factor * amplitude, width / s.length, v_phys.dim)?
        }
    };
    Ok((epsilon, v_hat))
}

/// Outcome of sampling a potential against its declared constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantsAudit {
    pub observed_sup_grad: f64,
    pub observed_lip_grad: f64,
    pub declared_sup_grad: f64,
    pub declared_lip_grad: f64,
    pub sup_grad_violated: bool,
    pub lip_grad_violated: bool,
}

impl ConstantsAudit {
    pub fn ok(&self) -> bool {
        !self.sup_grad_violated && !self.lip_grad_violated
    }
}

const AUDIT_SLACK: f64 = 1e-9;

/// Samples `n_samples` points uniformly in `[−half_width, half_width]^d`, records
/// the largest `|∇V|` and the largest difference quotient of `∇V` over nearby
/// pairs, and flags any excess over the declared constants.
pub fn verify_constants(v: &Potential, n_samples: usize, half_width: f64, seed: u64) -> ConstantsAudit {
    let d = v.dim;
    let mut rng = stream_rng(seed, 0);
    let mut z = vec![0.0; d];
    let mut z2 = vec![0.0; d];
    let mut g = vec![0.0; d];
    let mut g2 = vec![0.0; d];
    let mut sup = 0.0f64;
    let mut lip = 0.0f64;
    for i in 0..n_samples.max(2) {
        for c in z.iter_mut() {
            *c = rng.random_range(-half_width..half_width);
        }
        v.grad(&z, &mut g);
        sup = sup.max(norm(&g));
        // partner at a random small offset; scales vary so both local and
        // mid-range quotients are probed
        let scale = half_width * 10f64.powi(-((i % 4) as i32) - 2);
        for (p, c) in z2.iter_mut().zip(&z) {
            *p = c + scale * rng.random_range(-1.0..1.0);
        }
        v.grad(&z2, &mut g2);
        let dz: f64 = z.iter().zip(&z2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if dz > 0.0 {
            let dg: f64 = g.iter().zip(&g2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            lip = lip.max(dg / dz);
        }
    }
    ConstantsAudit {
        observed_sup_grad: sup,
        observed_lip_grad: lip,
        declared_sup_grad: v.sup_grad,
        declared_lip_grad: v.lip_grad,
        sup_grad_violated: sup > v.sup_grad * (1.0 + AUDIT_SLACK) + f64::MIN_POSITIVE,
        lip_grad_violated: lip > v.lip_grad * (1.0 + AUDIT_SLACK) + f64::MIN_POSITIVE,
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
