//! Particle dynamics: the N-body Newton flow, the Vlasov particle method and
//! the coupled mean-field/N-body flow used for Dobrushin estimates.

mod coupling;
mod forces;
mod init;
mod state;
mod verlet;
mod vlasov;

pub use coupling::{coupled_advance, dobrushin_estimate, dobrushin_functional, marginal_cloud, CoupledEnsemble};
pub use forces::{mean_field_force, nbody_energy, nbody_force, ForceEvaluation, MeanFieldForce};
pub use init::InitialData;
pub use state::{PhaseState, VlasovCloud};
pub use verlet::verlet_step;
pub use vlasov::{moment_p, moment_p_with_stderr, vlasov_advance};

use std::io::Write;

use crate::error::Result;
use crate::transport::DiscreteMeasure;

/// Writes a phase-space cloud as CSV with columns `weight, x…, ξ…`.
/// `n` is the number of particles per atom and `d` the spatial dimension.
pub fn write_phase_cloud<W: Write>(cloud: &DiscreteMeasure, n: usize, d: usize, out: W) -> Result<()> {
    let mut labels = vec!["weight".to_string()];
    for prefix in ["x", "xi"] {
        for j in 1..=n {
            for c in 0..d {
                labels.push(if d == 1 { format!("{prefix}{j}") } else { format!("{prefix}{j}_{c}") });
            }
        }
    }
    crate::transport::io::write_measure_labeled(cloud, &labels, out)
}
