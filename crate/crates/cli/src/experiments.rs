//! The experiments behind each configuration id. Every experiment returns
//! its report rows in sweep order; sweep points run on the current rayon
//! pool and draw from seeds derived from the sweep index.

use std::collections::BTreeMap;

use meanfield_core::bounds::{
    bound_constants, classical_rhs, classical_rhs_normalized, combineq_mc, combineq_rhs, combineq_rhs_even, count_s_np,
    count_s_np_closed_form, count_s_np_enumerate, moment_rhs, quantum_rhs, BoundReport, OneParticleDensity,
    QuantumVariant,
};
use meanfield_core::classical::{
    coupled_advance, dobrushin_estimate, marginal_cloud, moment_p_with_stderr, vlasov_advance, CoupledEnsemble,
    ForceEvaluation, InitialData,
};
use meanfield_core::potential::Potential;
use meanfield_core::quantum::{
    check_memory, coherent_product, coherent_state, coherent_wigner, dobrushin_quantum_functional, husimi_on,
    husimi_transform, mk_eps_lower, mk_eps_upper, qp_cost_trace, reduced_density, toeplitz_lift_expectation,
    toeplitz_operator, wigner_transform, CoupledStep, DensityMatrix, GridSpec, MixedState, SymbolMeasure, WaveFunction,
};
use meanfield_core::rng::{child_seed, stream_rng};
use meanfield_core::transport::{
    cost_matrix, kantorovich_gap, mean_stderr, solve_exact, subsample_distance, DiscreteMeasure,
};
use meanfield_core::{Error, Result};
use rand::Rng;
use rayon::prelude::*;

use crate::config::{Experiment, Resolved};

/// Report rows of one run, plus the first numerical guard that tripped.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub reports: Vec<BoundReport>,
    pub guard: Option<String>,
}

impl Outcome {
    fn absorb(&mut self, other: Outcome) {
        self.reports.extend(other.reports);
        if self.guard.is_none() {
            self.guard = other.guard;
        }
    }
}

pub fn run_experiment(r: &Resolved) -> Result<Outcome> {
    let v = r.potential.build()?;
    match r.experiment {
        Experiment::ClassicalDobrushin => classical_dobrushin(r, &v),
        Experiment::QuantumDobrushin => quantum_dobrushin(r, &v),
        Experiment::MkBracket => mk_bracket(r),
        Experiment::ToeplitzIdentities => toeplitz_identities(r),
        Experiment::Combineq => combineq(r, &v),
        Experiment::OtSelftest => ot_selftest(r),
        Experiment::VlasovMoments => vlasov_moments(r, &v),
    }
}

fn steps_between(from: f64, to: f64, dt: f64) -> usize {
    ((to - from) / dt).round().max(0.0) as usize
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn with(mut c: BTreeMap<String, f64>, extra: &[(&str, f64)]) -> BTreeMap<String, f64> {
    for (k, v) in extra {
        if v.is_finite() {
            c.insert(k.to_string(), *v);
        }
    }
    c
}

fn constants(extra: &[(&str, f64)]) -> BTreeMap<String, f64> {
    with(BTreeMap::new(), extra)
}

/// `E|W_p|^p` over subsample repeats with its standard error.
fn subsample_power(
    a: &DiscreteMeasure,
    b: &DiscreteMeasure,
    p: f64,
    m: usize,
    repeats: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let est = subsample_distance(a, b, p, m, repeats, seed)?;
    let powered: Vec<f64> = est.values.iter().map(|w| w.powf(p)).collect();
    Ok(mean_stderr(&powered))
}

struct ClassicalPoint {
    reports: Vec<BoundReport>,
    root_d: Vec<f64>,
    subsample: Vec<f64>,
}

fn classical_dobrushin(r: &Resolved, v: &Potential) -> Result<Outcome> {
    let init = InitialData::standard_normal(1);
    let (p, n) = (r.p, r.marginal);
    let points: Vec<ClassicalPoint> = r
        .n_particles
        .par_iter()
        .enumerate()
        .map(|(i, &big_n)| -> Result<ClassicalPoint> {
            let seed = child_seed(r.seed, i as u64);
            let mut ens = CoupledEnsemble::diagonal(&init, 1, big_n, r.coupled_samples, r.reference_size, seed)?;
            let mut out = ClassicalPoint { reports: Vec::new(), root_d: Vec::new(), subsample: Vec::new() };
            let half = r.coupled_samples / 2;
            let m = r.subsample_size.min(half);
            for (k, &t) in r.times.iter().enumerate() {
                let steps = steps_between(ens.time(), t, r.dt);
                if steps > 0 {
                    ens = coupled_advance(&ens, v, r.dt, steps, ForceEvaluation::Tabulated)?;
                }
                let base = bound_constants(v, None, big_n, n, Some(p));
                let (d, s) = dobrushin_estimate(&ens, p)?;
                let rhs = classical_rhs(v, p, big_n, 1, t)?;
                out.reports.push(BoundReport::new("dobrushin-classical", t, d, s, rhs, 1e-12, base.clone()));
                out.root_d.push(d.powf(1.0 / p));

                // disjoint halves: N-body half A against mean-field half B,
                // baseline mean-field half A against mean-field half B
                let nb = marginal_cloud(&ens.nbody[..half], n)?;
                let mf_a = marginal_cloud(&ens.mean_field[..half], n)?;
                let mf_b = marginal_cloud(&ens.mean_field[half..2 * half], n)?;
                let sub_seed = child_seed(seed, 100 + k as u64);
                let (w, sw) = subsample_power(&nb, &mf_b, p, m, r.subsample_repeats, sub_seed)?;
                let (b0, sb) = subsample_power(&mf_a, &mf_b, p, m, r.subsample_repeats, sub_seed)?;
                let corrected = (w - b0) / n as f64;
                let stderr = (sw * sw + sb * sb).sqrt() / n as f64;
                let rhs_n = classical_rhs_normalized(v, p, big_n, n, t)?;
                let c = with(base, &[("subsample_size", m as f64), ("raw", w / n as f64), ("baseline", b0 / n as f64)]);
                out.reports.push(BoundReport::new("wasserstein-subsample", t, corrected, stderr, rhs_n, 1e-12, c));
                out.subsample.push(corrected.max(0.0).powf(1.0 / p));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut outcome = Outcome::default();
    let ns: Vec<f64> = r.n_particles.iter().map(|&n| n as f64).collect();
    let expected = -(p / 2.0).min(1.0) / p;
    for pt in &points {
        outcome.reports.extend(pt.reports.iter().cloned());
    }
    for (k, &t) in r.times.iter().enumerate() {
        let roots: Vec<f64> = points.iter().map(|pt| pt.root_d[k]).collect();
        // a vanishing functional (e.g. V = 0) has no power law to fit
        if roots.iter().any(|x| !(*x > 0.0)) {
            continue;
        }
        let slope = log_log_slope(&ns, &roots);
        let subs: Vec<f64> = points.iter().map(|pt| pt.subsample[k]).collect();
        let sub_slope = if subs.iter().all(|s| *s > 0.0) { log_log_slope(&ns, &subs) } else { f64::NAN };
        let c = constants(&[("p", p), ("slope", slope), ("expected", expected), ("subsample_slope", sub_slope)]);
        outcome.reports.push(BoundReport::new("wasserstein-n-slope", t, (slope - expected).abs(), 0.0, 0.15, 0.0, c));
    }
    Ok(outcome)
}

fn quantum_dobrushin(r: &Resolved, v: &Potential) -> Result<Outcome> {
    let sweep: Vec<(usize, f64)> =
        r.n_particles.iter().flat_map(|&n| r.epsilons.iter().map(move |&e| (n, e))).collect();
    for &(n, _) in &sweep {
        check_memory(r.grid_points, 2 * n, "doubled N-body state")?;
    }
    let outcomes: Vec<Outcome> =
        sweep.par_iter().map(|&(n, eps)| quantum_point(r, v, n, eps)).collect::<Result<_>>()?;
    let mut out = Outcome::default();
    outcomes.into_iter().for_each(|o| out.absorb(o));
    Ok(out)
}

const NORM_DRIFT_LIMIT: f64 = 1e-10;

fn quantum_point(r: &Resolved, v: &Potential, n: usize, eps: f64) -> Result<Outcome> {
    let grid = GridSpec::new(1, n, r.grid_points, r.box_half_width, eps)?;
    let [q, p] = r.center;
    let phi0 = coherent_state(&grid, q, p)?;
    let mut phi = WaveFunction::product(&vec![&phi0; 2 * n])?;
    let mut reference = phi0.clone();
    let step = CoupledStep::new(&grid, v, r.dt)?;
    let mut out = Outcome::default();
    for &t in &r.times {
        for _ in 0..steps_between(phi.time, t, r.dt) {
            step.step(&mut phi, &mut reference)?;
        }
        let base = bound_constants(v, Some(eps), n, 1, None);
        let drift = (phi.norm_sq() - 1.0).abs();
        if drift > NORM_DRIFT_LIMIT {
            let msg = format!("norm drift {drift:.3e} at t={t}, ε={eps}, N={n}");
            out.reports.push(BoundReport::new("guard-norm", t, drift, 0.0, NORM_DRIFT_LIMIT, 0.0, base).fail());
            out.guard = Some(msg);
            break;
        }
        if let Err(e) = phi.check_guard_band() {
            let outside = 1.0 - phi.inner_box_mass();
            out.reports.push(BoundReport::new("guard-boundary-mass", t, outside, 0.0, 1e-10, 0.0, base).fail());
            out.guard = Some(format!("{e} (ε={eps}, N={n})"));
            break;
        }
        let d = dobrushin_quantum_functional(&phi, n)?;
        let rhs = quantum_rhs(QuantumVariant::Factorized, v, eps, n, 1, t, 0.0)?;
        let c = with(base.clone(), &[("norm_drift", drift)]);
        out.reports.push(BoundReport::new("dobrushin-quantum-factorized", t, d, 0.0, rhs, 1e-2 * rhs, c));

        let rx = reduced_density(&phi, 0, 1)?;
        let ry = reduced_density(&phi, n, 1)?;
        let low = mk_eps_lower(&rx, &ry)?;
        out.reports.push(BoundReport::new("husimi-lower-chain", t, low, 0.0, d, 1e-2, base));
    }
    Ok(out)
}

fn dirac(q: f64, p: f64) -> Result<SymbolMeasure> {
    SymbolMeasure::dirac(1, &[q, p])
}

fn mk_bracket(r: &Resolved) -> Result<Outcome> {
    let outcomes: Vec<Outcome> = (0..r.instances)
        .into_par_iter()
        .map(|k| -> Result<Outcome> {
            let eps = r.epsilons[k % r.epsilons.len()];
            let mut rng = stream_rng(r.seed, k as u64);
            let mut z = [0.0; 4];
            z.iter_mut().for_each(|c| *c = rng.random_range(-1.0..1.0));
            let grid = GridSpec::single(r.grid_points, r.box_half_width, eps)?;
            let coupling = coherent_product(&grid, &[(z[0], z[1]), (z[2], z[3])])?;
            let cost = qp_cost_trace(&MixedState::pure(coupling))?;
            let dist2 = (z[0] - z[2]).powi(2) + (z[1] - z[3]).powi(2);
            let exact = dist2 + 2.0 * eps;
            let upper = mk_eps_upper(&dirac(z[0], z[1])?, &dirac(z[2], z[3])?, eps)?;
            let rho1 = DensityMatrix::from_pure(&coherent_state(&grid, z[0], z[1])?)?;
            let rho2 = DensityMatrix::from_pure(&coherent_state(&grid, z[2], z[3])?)?;
            let low = mk_eps_lower(&rho1, &rho2)?;
            let c = constants(&[("epsilon", eps), ("d", 1.0), ("instance", k as f64), ("distance_squared", dist2)]);
            let rel = (cost - exact).abs() / exact;
            Ok(Outcome {
                reports: vec![
                    BoundReport::new(
                        "toeplitz-coupling-cost",
                        0.0,
                        rel,
                        0.0,
                        1e-3,
                        0.0,
                        with(c.clone(), &[("cost", cost), ("exact", exact)]),
                    ),
                    BoundReport::new("bracket-upper", 0.0, cost, 0.0, upper, 1e-3 * upper, c.clone()),
                    BoundReport::new("bracket-lower", 0.0, low, 0.0, cost, 1e-3, c.clone()),
                    BoundReport::new("cost-floor", 0.0, 2.0 * eps, 0.0, cost, 1e-6, c),
                ],
                guard: None,
            })
        })
        .collect::<Result<_>>()?;
    let mut out = Outcome::default();
    outcomes.into_iter().for_each(|o| out.absorb(o));
    Ok(out)
}

fn random_symbol<R: Rng>(rng: &mut R, atoms: usize, spread: f64) -> Result<SymbolMeasure> {
    let points: Vec<f64> = (0..2 * atoms).map(|_| rng.random_range(-spread..spread)).collect();
    let weights: Vec<f64> = (0..atoms).map(|_| rng.random_range(0.1..1.0)).collect();
    SymbolMeasure::new(1, DiscreteMeasure::normalized(2, points, weights)?)
}

fn toeplitz_identities(r: &Resolved) -> Result<Outcome> {
    let eps = r.epsilons[0];
    let grid = GridSpec::single(r.grid_points, r.box_half_width, eps)?;
    let mut out = Outcome::default();
    let c = constants(&[("epsilon", eps), ("grid_points", r.grid_points as f64)]);

    let (q, p) = (1.0, -0.5);
    let rho = DensityMatrix::from_pure(&coherent_state(&grid, q, p)?)?;
    let w = wigner_transform(&rho)?;
    let err = w.max_error(|x, xi| coherent_wigner(q, p, eps, x, xi));
    out.reports.push(BoundReport::new("wigner-coherent-max-error", 0.0, err, 0.0, 1e-6, 0.0, c.clone()));
    let mass = (w.integral() - 1.0).abs();
    out.reports.push(BoundReport::new("wigner-normalization", 0.0, mass, 0.0, 1e-6, 0.0, c.clone()));

    let mut rng = stream_rng(r.seed, 0);
    let state = toeplitz_operator(&grid, &random_symbol(&mut rng, 3, 1.5)?)?;
    let dim = state.dim();
    for k in 0..r.instances {
        let mu = random_symbol(&mut rng, 4, 2.0)?;
        let t = toeplitz_operator(&grid, &mu)?;
        let lhs: f64 = (0..dim)
            .into_par_iter()
            .map(|i| (0..dim).map(|j| (t.matrix[i * dim + j] * state.matrix[j * dim + i]).re).sum::<f64>())
            .collect::<Vec<_>>()
            .iter()
            .sum();
        let mut rhs = 0.0;
        for m in 0..mu.len() {
            let z = mu.atom(m);
            let h = husimi_on(&state, &[z[0]], &[z[1]])?;
            rhs += mu.weight(m) * 2.0 * std::f64::consts::PI * eps * h.values[0];
        }
        let rel = (lhs - rhs).abs() / rhs.abs();
        let ck = with(c.clone(), &[("instance", k as f64)]);
        out.reports.push(BoundReport::new("toeplitz-trace-identity", 0.0, rel, 0.0, 1e-6, 0.0, ck.clone()));
        let h = husimi_transform(&t)?;
        out.reports.push(BoundReport::new("husimi-nonnegative", 0.0, -h.min(), 0.0, 0.0, 1e-12, ck.clone()));
        out.reports.push(BoundReport::new("husimi-normalization", 0.0, (h.integral() - 1.0).abs(), 0.0, 1e-6, 0.0, ck));
    }

    let [q0, p0] = if r.center == [0.0, 0.0] { [0.7, -0.3] } else { r.center };
    let rho = DensityMatrix::from_pure(&coherent_state(&grid, q0, p0)?)?;
    let s = eps.sqrt();
    let lattice = |c: f64| -> Vec<f64> { (-42..=42).map(|j| c + j as f64 * s / 6.0).collect() };
    let e = toeplitz_lift_expectation(&rho, |x, _| x * x, &lattice(q0), &lattice(p0))?;
    let (m1, var) = rho.position_moments();
    let weyl = m1 * m1 + var;
    let cq = with(c, &[("q0", q0), ("p0", p0), ("lift", e), ("trace_x2", weyl)]);
    out.reports.push(BoundReport::new(
        "toeplitz-quadratic-lift",
        0.0,
        (e - (weyl + eps / 2.0)).abs(),
        0.0,
        1e-4,
        0.0,
        cq.clone(),
    ));
    out.reports.push(BoundReport::new(
        "toeplitz-quadratic-weyl-part",
        0.0,
        (weyl - (q0 * q0 + eps / 2.0)).abs(),
        0.0,
        1e-4,
        0.0,
        cq,
    ));
    Ok(out)
}

fn combineq(r: &Resolved, v: &Potential) -> Result<Outcome> {
    if v.dim() != 1 {
        return Err(Error::InvalidArgument("the consistency experiment runs in one dimension".into()));
    }
    let rho = OneParticleDensity::standard_normal();
    let p = r.p;
    let estimates: Vec<(f64, f64)> = r
        .n_particles
        .iter()
        .enumerate()
        .map(|(i, &n)| combineq_mc(v, &rho, p, n, r.mc_samples, child_seed(r.seed, i as u64)))
        .collect::<Result<_>>()?;
    let mut out = Outcome::default();
    let even = p.fract() == 0.0 && (p as u64) % 2 == 0;
    for (&n, &(m, s)) in r.n_particles.iter().zip(&estimates) {
        let c = with(bound_constants(v, None, n, 1, Some(p)), &[("mc_samples", r.mc_samples as f64)]);
        if even {
            let rhs = combineq_rhs_even(v.sup_grad(), p, n);
            out.reports.push(BoundReport::new("consistency-even", 0.0, m, s, rhs, 0.0, c.clone()));
        }
        let rhs = combineq_rhs(v.sup_grad(), p, n);
        out.reports.push(BoundReport::new("consistency-general", 0.0, m, s, rhs, 0.0, c));
    }
    let ns: Vec<f64> = r.n_particles.iter().map(|&n| n as f64).collect();
    let means: Vec<f64> = estimates.iter().map(|e| e.0).collect();
    let expected = -(p / 2.0).min(1.0);
    let slope = if means.iter().all(|m| *m > 0.0) { log_log_slope(&ns, &means) } else { f64::NAN };
    let c = constants(&[("p", p), ("slope", slope), ("expected", expected)]);
    out.reports.push(BoundReport::new("consistency-n-slope", 0.0, (slope - expected).abs(), 0.0, 0.15, 0.0, c));

    for n in 1..=5u64 {
        for pp in [2u32, 4] {
            let count = count_s_np(n, pp);
            let enumerated = count_s_np_enumerate(n, pp)? as u128;
            let c = constants(&[
                ("N", n as f64),
                ("p", pp as f64),
                ("count", count as f64),
                ("enumerated", enumerated as f64),
                ("closed_form", count_s_np_closed_form(n, pp) as f64),
            ]);
            let diff = (count as f64 - enumerated as f64).abs();
            out.reports.push(BoundReport::new("count-s-np", 0.0, diff, 0.0, 0.0, 0.0, c));
        }
    }
    Ok(out)
}

/// Minimum over all permutations of the mean assignment cost.
fn permutation_minimum(cost: &[f64], n: usize) -> f64 {
    fn rec(c: &[f64], n: usize, row: usize, used: &mut [bool], acc: f64, best: &mut f64) {
        if row == n {
            *best = best.min(acc);
            return;
        }
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                rec(c, n, row + 1, used, acc + c[row * n + j], best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    rec(cost, n, 0, &mut vec![false; n], 0.0, &mut best);
    best / n as f64
}

fn ot_selftest(r: &Resolved) -> Result<Outcome> {
    let mut out = Outcome::default();
    for k in 0..r.instances {
        let mut rng = stream_rng(r.seed, k as u64);
        let dim = if k % 2 == 0 { 2 } else { 4 };
        let n = 1 + (k / 2) % 6;
        let mut cloud = || -> Result<DiscreteMeasure> {
            DiscreteMeasure::uniform(dim, (0..n * dim).map(|_| rng.random_range(-3.0..3.0)).collect())
        };
        let (a, b) = (cloud()?, cloud()?);
        let sol = solve_exact(&a, &b, 2.0)?;
        let brute = permutation_minimum(&cost_matrix(&a, &b, 2.0), n);
        let c = constants(&[("dim", dim as f64), ("size", n as f64), ("instance", k as f64), ("cost", sol.plan.cost)]);
        let diff = (sol.plan.cost - brute).abs();
        out.reports.push(BoundReport::new(
            "ot-permutation-minimum",
            0.0,
            diff,
            0.0,
            0.0,
            1e-12 * brute.max(1.0),
            c.clone(),
        ));
        let gap = kantorovich_gap(&a, &b, 2.0, &sol.plan, &sol.source_potential, &sol.target_potential)?;
        out.reports.push(BoundReport::new("ot-duality-gap", 0.0, gap, 0.0, 1e-9, 0.0, c));
    }
    Ok(out)
}

fn vlasov_moments(r: &Resolved, v: &Potential) -> Result<Outcome> {
    let p = r.p;
    let mut cloud = InitialData::standard_normal(v.dim()).sample_cloud(v.dim(), r.mc_samples, r.seed)?;
    let (m0, s0) = moment_p_with_stderr(&cloud, p)?;
    let mut out = Outcome::default();
    for &t in &r.times {
        let steps = steps_between(cloud.time(), t, r.dt);
        if steps > 0 {
            cloud = vlasov_advance(&cloud, v, r.dt, steps, ForceEvaluation::Tabulated)?;
        }
        let (mt, st) = moment_p_with_stderr(&cloud, p)?;
        let rhs = moment_rhs(m0, p, v.lip_grad(), t);
        // M_p(0)·e^{…}·(1 + 3σ) with σ the relative standard error of M_p(0)
        let tol = 3.0 * s0 / m0 * rhs;
        let c = constants(&[
            ("p", p),
            ("lip_grad", v.lip_grad()),
            ("d", v.dim() as f64),
            ("cloud_size", r.mc_samples as f64),
            ("m0", m0),
            ("m0_stderr", s0),
            ("mt_stderr", st),
        ]);
        out.reports.push(BoundReport::new("moment-growth", t, mt, 0.0, rhs, tol, c));
    }
    Ok(out)
}
