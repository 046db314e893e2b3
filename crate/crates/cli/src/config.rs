//! Experiment configuration files and their validation.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use meanfield_core::potential::PotentialSpec;
use meanfield_core::quantum::{check_coherent_center, check_memory, GridSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    ClassicalDobrushin,
    QuantumDobrushin,
    MkBracket,
    ToeplitzIdentities,
    Combineq,
    OtSelftest,
    VlasovMoments,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::ClassicalDobrushin,
        Experiment::QuantumDobrushin,
        Experiment::MkBracket,
        Experiment::ToeplitzIdentities,
        Experiment::Combineq,
        Experiment::OtSelftest,
        Experiment::VlasovMoments,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Experiment::ClassicalDobrushin => "classical-dobrushin",
            Experiment::QuantumDobrushin => "quantum-dobrushin",
            Experiment::MkBracket => "mk-bracket",
            Experiment::ToeplitzIdentities => "toeplitz-identities",
            Experiment::Combineq => "combineq",
            Experiment::OtSelftest => "ot-selftest",
            Experiment::VlasovMoments => "vlasov-moments",
        }
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL.into_iter().find(|e| e.id() == s).ok_or_else(|| {
            let known: Vec<_> = Experiment::ALL.iter().map(|e| e.id()).collect();
            format!("unknown experiment '{s}'; expected one of {}", known.join(", "))
        })
    }
}

/// Numeric parameters. Every field is optional; each experiment fills in
/// its own defaults and ignores fields it does not use.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub epsilons: Option<Vec<f64>>,
    pub n_particles: Option<Vec<usize>>,
    pub p: Option<f64>,
    pub marginal: Option<usize>,
    pub dt: Option<f64>,
    /// Output times, ascending and nonnegative.
    pub times: Option<Vec<f64>>,
    pub grid_points: Option<usize>,
    pub box_half_width: Option<f64>,
    /// Phase-space center `(q, p)` of coherent initial data.
    pub center: Option<[f64; 2]>,
    pub mc_samples: Option<usize>,
    pub coupled_samples: Option<usize>,
    pub reference_size: Option<usize>,
    pub instances: Option<usize>,
    pub subsample_size: Option<usize>,
    pub subsample_repeats: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default = "default_potential")]
    pub potential: PotentialSpec,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub seed: u64,
    /// Output directory; `--out` takes precedence.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_potential() -> PotentialSpec {
    PotentialSpec::Gaussian { amplitude: 1.0, width: 1.0, dim: 1 }
}

/// A problem with one configuration field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic { field: field.into(), message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Parameters after defaults, as consumed by the experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub experiment: Experiment,
    pub potential: PotentialSpec,
    pub seed: u64,
    pub epsilons: Vec<f64>,
    pub n_particles: Vec<usize>,
    pub p: f64,
    pub marginal: usize,
    pub dt: f64,
    pub times: Vec<f64>,
    pub grid_points: usize,
    pub box_half_width: f64,
    pub center: [f64; 2],
    pub mc_samples: usize,
    pub coupled_samples: usize,
    pub reference_size: usize,
    pub instances: usize,
    pub subsample_size: usize,
    pub subsample_repeats: usize,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, Diagnostic> {
        serde_json::from_str(text).map_err(|e| Diagnostic::new("config", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, Diagnostic> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Diagnostic::new("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Fills in the experiment's defaults. Fails only on an unknown id.
    pub fn resolve(&self) -> Result<Resolved, Diagnostic> {
        let experiment: Experiment = self.experiment.parse().map_err(|m| Diagnostic::new("experiment", m))?;
        let p = &self.params;
        use Experiment::*;
        let (eps, ns, times, dt, grid, half_width) = match experiment {
            QuantumDobrushin => (vec![0.5, 0.25], vec![2], (0..6).map(|k| k as f64 / 10.0).collect(), 0.01, 64, 8.0),
            MkBracket => (vec![0.5, 0.25, 0.1], vec![1], vec![0.0], 0.0, 128, 6.0),
            ToeplitzIdentities => (vec![0.25], vec![1], vec![0.0], 0.0, 256, 8.0),
            ClassicalDobrushin => (vec![], vec![16, 64, 256], vec![0.25, 0.5, 1.0], 0.025, 0, 0.0),
            Combineq => (vec![], vec![4, 16, 64], vec![0.0], 0.0, 0, 0.0),
            OtSelftest => (vec![], vec![], vec![0.0], 0.0, 0, 0.0),
            VlasovMoments => (vec![], vec![], vec![0.25, 0.5, 0.75, 1.0], 0.05, 0, 0.0),
        };
        let mc_default = match experiment {
            Combineq => 100_000,
            _ => 20_000,
        };
        let instances_default = match experiment {
            OtSelftest => 50,
            ToeplitzIdentities => 10,
            _ => 20,
        };
        Ok(Resolved {
            experiment,
            potential: self.potential,
            seed: self.seed,
            epsilons: p.epsilons.clone().unwrap_or(eps),
            n_particles: p.n_particles.clone().unwrap_or(ns),
            p: p.p.unwrap_or(2.0),
            marginal: p.marginal.unwrap_or(1),
            dt: p.dt.unwrap_or(dt),
            times: p.times.clone().unwrap_or(times),
            grid_points: p.grid_points.unwrap_or(grid),
            box_half_width: p.box_half_width.unwrap_or(half_width),
            center: p.center.unwrap_or([0.0, 0.0]),
            mc_samples: p.mc_samples.unwrap_or(mc_default),
            coupled_samples: p.coupled_samples.unwrap_or(2000),
            reference_size: p.reference_size.unwrap_or(20_000),
            instances: p.instances.unwrap_or(instances_default),
            subsample_size: p.subsample_size.unwrap_or(400),
            subsample_repeats: p.subsample_repeats.unwrap_or(8),
        })
    }

    /// Schema and cross-field checks; an empty list means the config runs.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let r = match self.resolve() {
            Ok(r) => r,
            Err(d) => return vec![d],
        };
        let mut out = Vec::new();
        let v = match self.potential.build() {
            Ok(v) => Some(v),
            Err(e) => {
                out.push(Diagnostic::new("potential", e.to_string()));
                None
            }
        };
        if let Some(v) = &v {
            if v.dim() != 1 {
                out.push(Diagnostic::new("potential.dim", "experiments run in one space dimension"));
            }
        }
        r.check(&mut out);
        out
    }
}

impl Resolved {
    fn check(&self, out: &mut Vec<Diagnostic>) {
        use Experiment::*;
        let mut bad = |field: &str, msg: String| out.push(Diagnostic::new(format!("params.{field}"), msg));
        if !(self.p >= 1.0 && self.p.is_finite()) {
            bad("p", format!("exponent must be a finite number ≥ 1, got {}", self.p));
        }
        if self.times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) || self.times.windows(2).any(|w| w[1] <= w[0]) {
            bad("times", "output times must be nonnegative and strictly increasing".into());
        }
        if self.times.is_empty() {
            bad("times", "at least one output time is required".into());
        }
        let needs_dt = matches!(self.experiment, QuantumDobrushin | ClassicalDobrushin | VlasovMoments);
        if needs_dt && !(self.dt > 0.0 && self.dt.is_finite()) {
            bad("dt", format!("time step must be positive, got {}", self.dt));
        }
        if needs_dt && self.dt > 0.0 {
            for t in &self.times {
                let steps = t / self.dt;
                if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
                    bad("times", format!("output time {t} is not a multiple of dt = {}", self.dt));
                }
            }
        }
        if self.n_particles.contains(&0) {
            bad("n_particles", "particle numbers must be positive".into());
        }
        if matches!(self.experiment, QuantumDobrushin | MkBracket | ToeplitzIdentities) {
            if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
                bad("epsilons", "need at least one positive ε".into());
            }
            if !(self.box_half_width > 0.0) {
                bad("box_half_width", format!("must be positive, got {}", self.box_half_width));
            }
            let grid_points = self.grid_points;
            for &eps in &self.epsilons {
                let Ok(grid) = GridSpec::single(grid_points, self.box_half_width, eps) else {
                    bad(
                        "grid_points",
                        format!("{grid_points} points at ε={eps} is not a valid grid (power of two ≥ 4)"),
                    );
                    continue;
                };
                if self.experiment == QuantumDobrushin {
                    if let Err(e) = check_coherent_center(&grid, self.center[0], self.center[1]) {
                        bad("center", e.to_string());
                    }
                    // |ψ|² is normal with variance ε/2; (room²/ε ≥ 21) keeps the
                    // initial mass outside the inner half-box below 1e−10
                    let room = 0.5 * self.box_half_width - self.center[0].abs();
                    if room <= 0.0 || room * room / eps < 21.0 {
                        bad("center", format!(
                            "coherent center q={} leaves more than 1e-10 of the mass outside the guard band |x| ≤ {} at ε={eps}",
                            self.center[0],
                            0.5 * self.box_half_width
                        ));
                    }
                }
            }
            let axes: usize = match self.experiment {
                QuantumDobrushin => 2 * self.n_particles.iter().copied().max().unwrap_or(1),
                // two-particle couplings; density matrices are point² entries
                _ => 2,
            };
            if self.experiment == QuantumDobrushin && self.marginal > 1 {
                bad("marginal", "the quantum experiment reports one-particle marginals".into());
            }
            let what = if self.experiment == QuantumDobrushin { "doubled N-body state" } else { "two-particle state" };
            if let Err(e) = check_memory(grid_points, axes, what) {
                bad("grid_points", e.to_string());
            }
        }
        match self.experiment {
            ClassicalDobrushin => {
                if self.n_particles.len() < 2 {
                    bad("n_particles", "the N-slope fit needs at least two particle numbers".into());
                }
                if self.coupled_samples < 2 {
                    bad("coupled_samples", "need at least two coupled samples".into());
                }
                if self.reference_size < 2 {
                    bad("reference_size", "reference cloud needs at least two particles".into());
                }
                if self.marginal == 0 || self.n_particles.iter().any(|&n| n < self.marginal) {
                    bad("marginal", format!("marginal order {} must lie in 1..=N for every N", self.marginal));
                }
                if self.subsample_size == 0 || self.subsample_size > self.coupled_samples {
                    bad("subsample_size", format!("must lie in 1..={}", self.coupled_samples));
                }
                if self.subsample_repeats == 0 {
                    bad("subsample_repeats", "need at least one repeat".into());
                }
            }
            Combineq => {
                if self.n_particles.len() < 2 {
                    bad("n_particles", "the N-scaling fit needs at least two particle numbers".into());
                }
                if self.mc_samples < 2 {
                    bad("mc_samples", "need at least two Monte-Carlo samples".into());
                }
            }
            VlasovMoments => {
                if self.mc_samples < 2 {
                    bad("mc_samples", "the Vlasov cloud needs at least two particles".into());
                }
            }
            OtSelftest | MkBracket | ToeplitzIdentities => {
                if self.instances == 0 {
                    bad("instances", "need at least one instance".into());
                }
            }
            QuantumDobrushin => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_id_round_trips() {
        for e in Experiment::ALL {
            assert_eq!(e.id().parse::<Experiment>().unwrap(), e);
        }
    }

    #[test]
    fn defaults_validate_cleanly() {
        for e in Experiment::ALL {
            let c = ExperimentConfig::from_json(&format!(r#"{{"experiment": "{}"}}"#, e.id())).unwrap();
            assert_eq!(c.validate(), vec![], "{}", e.id());
        }
    }

    #[test]
    fn unknown_id_is_named() {
        let c = ExperimentConfig::from_json(r#"{"experiment": "quantum-dobrushn"}"#).unwrap();
        let d = c.validate();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].field, "experiment");
        assert!(d[0].message.contains("quantum-dobrushn"));
    }

    #[test]
    fn unknown_field_is_a_parse_error() {
        assert!(ExperimentConfig::from_json(r#"{"experiment": "combineq", "params": {"sample": 3}}"#).is_err());
    }

    #[test]
    fn oversized_doubled_grid_is_reported() {
        let c = ExperimentConfig::from_json(
            r#"{"experiment": "quantum-dobrushin", "params": {"grid_points": 128, "n_particles": [2]}}"#,
        )
        .unwrap();
        let d = c.validate();
        assert!(d.iter().any(|d| d.field == "params.grid_points" && d.message.contains("4294967296")), "{d:?}");
    }

    #[test]
    fn cross_field_errors() {
        let c = ExperimentConfig::from_json(
            r#"{"experiment": "quantum-dobrushin", "params": {"center": [3.5, 0.0], "dt": 0.03, "times": [0.0, 0.1]}}"#,
        )
        .unwrap();
        let fields: Vec<String> = c.validate().into_iter().map(|d| d.field).collect();
        assert!(fields.contains(&"params.center".to_string()));
        assert!(fields.contains(&"params.times".to_string()));
    }
}
