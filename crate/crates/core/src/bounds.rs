//! Right-hand sides of the mean-field and semiclassical stability estimates,
//! the Monte-Carlo consistency error, and the report rows that compare them.

use std::collections::BTreeMap;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::potential::Potential;
use crate::rng::stream_rng;

/// One measured-versus-bound comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub inequality_id: String,
    pub time: f64,
    pub lhs_measured: f64,
    pub lhs_stderr: f64,
    pub rhs: f64,
    /// Absolute numerical tolerance added to the right-hand side.
    pub tolerance: f64,
    pub constants: BTreeMap<String, f64>,
    pub pass: bool,
    /// `rhs + 3·stderr + tolerance − lhs`; nonnegative exactly when `pass`.
    pub margin: f64,
}

impl BoundReport {
    pub fn new(
        inequality_id: impl Into<String>,
        time: f64,
        lhs_measured: f64,
        lhs_stderr: f64,
        rhs: f64,
        tolerance: f64,
        constants: BTreeMap<String, f64>,
    ) -> Self {
        let margin = rhs + 3.0 * lhs_stderr + tolerance - lhs_measured;
        BoundReport {
            inequality_id: inequality_id.into(),
            time,
            lhs_measured,
            lhs_stderr,
            rhs,
            tolerance,
            constants,
            // NaN anywhere fails
            pass: margin >= 0.0,
            margin,
        }
    }

    /// Marks the row failed, e.g. after a numerical guard trip.
    pub fn fail(mut self) -> Self {
        self.pass = false;
        self
    }

    pub fn to_json_line(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }
}

/// One JSON object per line.
pub fn write_jsonl<W: Write>(reports: &[BoundReport], mut out: W) -> Result<()> {
    for r in reports {
        writeln!(out, "{}", r.to_json_line()?)?;
    }
    Ok(())
}

/// `K_p = max(1, p − 1)`
pub fn k_p(p: f64) -> f64 {
    (p - 1.0).max(1.0)
}

/// `Λ_p = 2K_p(1 + 2^{p−1} Lip(∇V)^p)`
pub fn lambda_p(p: f64, lip: f64) -> f64 {
    2.0 * k_p(p) * (1.0 + 2f64.powf(p - 1.0) * lip.powf(p))
}

/// `Λ = 3 + 4 Lip(∇V)²`
pub fn lambda_quantum(lip: f64) -> f64 {
    3.0 + 4.0 * lip * lip
}

/// Constants echoed in every report row. `eps` and `p` are omitted when
/// they do not enter the bound.
pub fn bound_constants(
    v: &Potential,
    eps: Option<f64>,
    n_particles: usize,
    n: usize,
    p: Option<f64>,
) -> BTreeMap<String, f64> {
    let mut c = BTreeMap::new();
    c.insert("sup_grad".to_string(), v.sup_grad());
    c.insert("lip_grad".to_string(), v.lip_grad());
    c.insert("lambda".to_string(), lambda_quantum(v.lip_grad()));
    c.insert("N".to_string(), n_particles as f64);
    c.insert("n".to_string(), n as f64);
    c.insert("d".to_string(), v.dim() as f64);
    if let Some(e) = eps {
        c.insert("epsilon".to_string(), e);
    }
    if let Some(p) = p {
        c.insert("p".to_string(), p);
        c.insert("k_p".to_string(), k_p(p));
        c.insert("lambda_p".to_string(), lambda_p(p, v.lip_grad()));
    }
    c
}

fn check_ranges(p: f64, n_particles: usize, n: usize, t: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return invalid(format!("exponent p = {p} must be at least 1"));
    }
    if n == 0 || n > n_particles {
        return invalid(format!("marginal order n = {n} must lie in 1..={n_particles}"));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return invalid(format!("time t = {t} must be nonnegative"));
    }
    Ok(())
}

/// Bound on `dist_MK,p(f(t)^{⊗n}, F^n_N(t))^p`:
/// `n · 2^p K_p ‖∇V‖^p ([p/2]+1)/N^{min(p/2,1)} · (e^{Λ_p t} − 1)/Λ_p`.
pub fn classical_rhs(v: &Potential, p: f64, n_particles: usize, n: usize, t: f64) -> Result<f64> {
    check_ranges(p, n_particles, n, t)?;
    let lp = lambda_p(p, v.lip_grad());
    let growth = (lp * t).exp_m1() / lp;
    let count = ((p / 2.0).floor() + 1.0) / (n_particles as f64).powf((p / 2.0).min(1.0));
    Ok(n as f64 * 2f64.powf(p) * k_p(p) * v.sup_grad().powf(p) * count * growth)
}

/// [`classical_rhs`] divided by `n`, the form with `(1/n) dist^p` on the left.
pub fn classical_rhs_normalized(v: &Potential, p: f64, n_particles: usize, n: usize, t: f64) -> Result<f64> {
    Ok(classical_rhs(v, p, n_particles, n, t)? / n as f64)
}

/// Which initial data the quantum estimate is stated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuantumVariant {
    /// Arbitrary initial density; `init_term = MK_ε,2(initial pair)²`.
    General,
    /// Töplitz initial density; `init_term = dist_MK,2(symbols)²`.
    Toeplitz,
    /// Factorized Töplitz initial coupling; `init_term` is ignored.
    Factorized,
}

impl FromStr for QuantumVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(QuantumVariant::General),
            "toeplitz" => Ok(QuantumVariant::Toeplitz),
            "factorized" => Ok(QuantumVariant::Factorized),
            other => invalid(format!("unknown quantum bound variant '{other}'")),
        }
    }
}

/// Bound on the `n`-particle quantum transport cost at time `t`.
pub fn quantum_rhs(
    variant: QuantumVariant,
    v: &Potential,
    eps: f64,
    n_particles: usize,
    n: usize,
    t: f64,
    init_term: f64,
) -> Result<f64> {
    check_ranges(1.0, n_particles, n, t)?;
    if !(eps > 0.0) {
        return invalid(format!("ε = {eps} must be positive"));
    }
    let lam = lambda_quantum(v.lip_grad());
    let g2 = v.sup_grad().powi(2);
    let big_n = n_particles as f64;
    let nn = n as f64;
    let d = v.dim() as f64;
    let growth = (lam * t).exp_m1() / lam;
    let e = (lam * t).exp();
    Ok(match variant {
        QuantumVariant::General => nn * (8.0 / big_n * g2 * growth + e / big_n * init_term),
        QuantumVariant::Toeplitz => nn * ((2.0 * d * eps + init_term / big_n) * e + 8.0 * nn / big_n * g2 * growth),
        QuantumVariant::Factorized => {
            let decay = -(-lam * t).exp_m1() / lam;
            nn * (2.0 * d * eps + 8.0 / big_n * g2 * decay) * e
        }
    })
}

/// General consistency-error constant `(2⌊p/2⌋+2)/N^{min(p/2,1)} · (2F)^p`.
pub fn combineq_rhs(f_sup: f64, p: f64, n_particles: usize) -> f64 {
    (2.0 * (p / 2.0).floor() + 2.0) / (n_particles as f64).powf((p / 2.0).min(1.0)) * (2.0 * f_sup).powf(p)
}

/// Even-`p` consistency-error constant `(p/N)(2F)^p`.
pub fn combineq_rhs_even(f_sup: f64, p: f64, n_particles: usize) -> f64 {
    p / n_particles as f64 * (2.0 * f_sup).powf(p)
}

/// One-particle density for the consistency-error experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum OneParticleDensity {
    Gaussian { mean: f64, std: f64 },
}

impl OneParticleDensity {
    pub fn standard_normal() -> Self {
        OneParticleDensity::Gaussian { mean: 0.0, std: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            OneParticleDensity::Gaussian { mean, std } => {
                if !(std > 0.0 && std.is_finite() && mean.is_finite()) {
                    return invalid(format!("Gaussian density needs finite mean and positive std, got {mean}, {std}"));
                }
            }
        }
        Ok(())
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            OneParticleDensity::Gaussian { mean, std } => {
                let z = (x - mean) / std;
                (-0.5 * z * z).exp() / (std * (2.0 * std::f64::consts::PI).sqrt())
            }
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            OneParticleDensity::Gaussian { mean, std } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + std * z
            }
        }
    }

    /// `(∇V ⋆ ρ)(x)` for a one-dimensional Gaussian `V`, in closed form.
    pub fn convolved_gradient(&self, v: &Potential, x: f64) -> f64 {
        let (a, w) = v.gaussian_parameters();
        match *self {
            OneParticleDensity::Gaussian { mean, std } => {
                let s2 = w * w + std * std;
                let y = x - mean;
                -a * w * y / s2.powf(1.5) * (-0.5 * y * y / s2).exp()
            }
        }
    }
}

const MC_CHUNK: usize = 4096;

/// Monte-Carlo estimate of `E|F⋆ρ(x_1) − (1/N) Σ_k F(x_1 − x_k)|^p` over
/// i.i.d. `x_1…x_N ~ ρ`, with `F = ∇V`. Returns `(mean, stderr)`.
///
/// Chunks of samples draw from independent substreams of `seed`, so the
/// result does not depend on the thread count.
pub fn combineq_mc(
    v: &Potential,
    rho: &OneParticleDensity,
    p: f64,
    n_particles: usize,
    n_mc: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if v.dim() != 1 {
        return invalid("the consistency-error estimate is implemented for d = 1");
    }
    if !(p > 0.0) || n_particles == 0 || n_mc < 2 {
        return invalid(format!("need p > 0, N ≥ 1 and at least two samples (p={p}, N={n_particles}, n_mc={n_mc})"));
    }
    rho.validate()?;
    let chunks = n_mc.div_ceil(MC_CHUNK);
    let sums: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let count = MC_CHUNK.min(n_mc - c * MC_CHUNK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let x1 = rho.sample(&mut rng);
                // k = 1 contributes F(0) = 0
                let mut acc = 0.0;
                for _ in 1..n_particles {
                    acc += v.grad1(x1 - rho.sample(&mut rng));
                }
                let val = (rho.convolved_gradient(v, x1) - acc / n_particles as f64).abs().powf(p);
                s += val;
                s2 += val * val;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = sums.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let n = n_mc as f64;
    let mean = s / n;
    let var = ((s2 - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok((mean, (var / n).sqrt()))
}

fn binomial(n: u64, k: u64) -> u128 {
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

/// Number of maps `g: {1..p} → {1..N}` under which some `m ≥ 2` has exactly
/// one preimage, by inclusion–exclusion over the set of such `m`.
pub fn count_s_np(n_particles: u64, p: u32) -> u128 {
    let n = n_particles;
    let mut total: i128 = 0;
    for j in 1..=(n.saturating_sub(1)).min(p as u64) {
        // choose j labels, give each one distinct position, fill the rest freely
        let falling: u128 = (0..j).map(|i| (p as u64 - i) as u128).product();
        let rest = ((n - j) as u128).pow(p - j as u32);
        let term = (binomial(n - 1, j) * falling * rest) as i128;
        total += if j % 2 == 1 { term } else { -term };
    }
    total as u128
}

/// The closed form `(N − 1)^p` stated alongside the consistency lemma. It
/// undercounts: only maps whose distinguished label is hit once are counted
/// with the remaining positions restricted, which misses e.g. both maps with
/// a single `2` when `N = p = 2`.
pub fn count_s_np_closed_form(n_particles: u64, p: u32) -> u128 {
    (n_particles.saturating_sub(1) as u128).pow(p)
}

/// Exhaustive enumeration of [`count_s_np`]; needs `N^p ≤ 10⁷`.
pub fn count_s_np_enumerate(n_particles: u64, p: u32) -> Result<u64> {
    let total = (n_particles as u128).checked_pow(p).unwrap_or(u128::MAX);
    if total > 10_000_000 {
        return invalid(format!("{n_particles}^{p} maps exceed the enumeration limit of 10^7"));
    }
    let n = n_particles as usize;
    let mut hits = vec![0u32; n];
    let mut count = 0;
    for code in 0..total as u64 {
        hits.iter_mut().for_each(|h| *h = 0);
        let mut c = code;
        for _ in 0..p {
            hits[(c % n_particles) as usize] += 1;
            c /= n_particles;
        }
        if hits[1..].contains(&1) {
            count += 1;
        }
    }
    Ok(count)
}

/// Moment growth bound `M_0 e^{(p−1)(1+2 Lip(∇V)) t}`.
pub fn moment_rhs(m0: f64, p: f64, lip: f64, t: f64) -> f64 {
    m0 * ((p - 1.0) * (1.0 + 2.0 * lip) * t).exp()
}
