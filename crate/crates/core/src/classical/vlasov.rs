use super::forces::{ForceEvaluation, MeanFieldForce};
use super::state::VlasovCloud;
use super::verlet::{kick, kick_drift};
use crate::error::{invalid, Result};
use crate::potential::Potential;

/// Advances a Vlasov particle cloud by `n_steps` velocity-Verlet steps of
/// size `dt`. Each particle feels the mean-field force of the whole cloud,
/// evaluated from a snapshot of the cloud's positions at the start and end
/// of every step.
pub fn vlasov_advance(
    cloud: &VlasovCloud,
    v: &Potential,
    dt: f64,
    n_steps: usize,
    mode: ForceEvaluation,
) -> Result<VlasovCloud> {
    if !(dt > 0.0) {
        return invalid(format!("time step must be positive, got {dt}"));
    }
    if cloud.dim() != v.dim() {
        return invalid("cloud and potential dimensions differ");
    }
    let mut state = cloud.state.clone();
    let mut f = vec![0.0; state.positions.len()];
    let start = state.time;
    self_force(v, &state.positions, mode, &mut f);
    for step in 0..n_steps {
        kick_drift(&mut state, &f, dt);
        self_force(v, &state.positions, mode, &mut f);
        kick(&mut state.momenta, &f, 0.5 * dt);
        state.time = start + (step + 1) as f64 * dt;
    }
    Ok(VlasovCloud::new(state))
}

pub(crate) fn self_force(v: &Potential, positions: &[f64], mode: ForceEvaluation, out: &mut [f64]) {
    if v.is_zero() {
        out.fill(0.0);
        return;
    }
    let field = MeanFieldForce::new(v, positions, mode);
    field.eval_all(positions, out);
}

/// `M_p = (1/M) Σ_m (|x_m|^p + |ξ_m|^p)`.
pub fn moment_p(cloud: &VlasovCloud, p: f64) -> Result<f64> {
    Ok(moment_p_with_stderr(cloud, p)?.0)
}

/// `M_p` together with the Monte-Carlo standard error of the mean.
pub fn moment_p_with_stderr(cloud: &VlasovCloud, p: f64) -> Result<(f64, f64)> {
    if !(p >= 1.0) {
        return invalid(format!("moment order must be ≥ 1, got {p}"));
    }
    let s = &cloud.state;
    let norm_p = |v: &[f64]| {
        let r2: f64 = v.iter().map(|c| c * c).sum();
        if p == 2.0 {
            r2
        } else {
            r2.sqrt().powf(p)
        }
    };
    let terms: Vec<f64> = (0..cloud.len()).map(|k| norm_p(s.position(k)) + norm_p(s.momentum(k))).collect();
    Ok(crate::transport::mean_stderr(&terms))
}
