//! Spectral-grid quantum dynamics in one space dimension per particle:
//! N-body Schrödinger and Hartree propagators, coherent states, Töplitz
//! quantization, Wigner/Husimi transforms and quantum coupling costs.

mod bracket;
mod checkpoint;
mod coherent;
mod density;
mod fft;
mod grid;
mod phase_space;
mod propagate;
mod toeplitz;
mod wave;

pub use bracket::{
    dobrushin_mixed, dobrushin_quantum_functional, husimi_distance_squared, mk_eps_lower, mk_eps_upper, qp_cost_trace,
    qp_cost_trace_density, MixedState,
};
pub use checkpoint::{read_checkpoint, write_checkpoint, Precision};
pub use coherent::{check_coherent_center, coherent_product, coherent_state};
pub use density::{partial_trace, reduced_density, trace_distance, DensityMatrix};
pub use grid::{check_memory, memory_cap_bytes, state_bytes, GridSpec, DEFAULT_MEMORY_CAP, MEMORY_CAP_ENV};
pub use phase_space::{
    coherent_husimi, coherent_wigner, husimi_on, husimi_transform, smoothed_wigner, wigner_transform, HusimiLattice,
    PhaseSpaceFunction,
};
pub use propagate::{
    coupled_quantum_advance, hartree_energy, hartree_step, split_step_nbody, CoupledStep, HartreeStep,
    MeanFieldConvolution, SplitStep,
};
pub use toeplitz::{
    coupling_symbol, coupling_symbol_cost, symmetrize_coupling_symbol, symmetrize_initial_coupling,
    toeplitz_lift_expectation, toeplitz_operator, SymbolMeasure, MAX_SYMMETRIZED_PARTICLES,
};
pub use wave::WaveFunction;
