//! Operator frames built from spin-coherent-state projectors.
//!
//! For a spin `s`, the projectors onto coherent states along `N_s = (2s+1)^2`
//! generic directions form a basis of the Hermitian operators on the
//! `(2s+1)`-dimensional Hilbert space. This crate builds such frames, checks
//! and repairs their non-singularity, computes the dual basis, and reconstructs
//! operators (in particular density matrices) from their expectation values in
//! the frame states.
//!
//! Module map:
//! - [`spin`]: ladder, component and rotation matrices.
//! - [`coherent`]: unit vectors, coherent states, projectors, Q-symbols.
//! - [`frames`]: constellations, Gram matrices, repair, duals, landscapes.
//! - [`reconstruction`]: discrete symbols, reconstruction, tomography.
//! - [`optimize`]: annealed constellation conditioning and baselines.
//! - [`io`]: JSON and CSV artifact formats.

pub mod coherent;
pub mod error;
pub mod frames;
pub mod grid;
pub mod io;
pub mod operator;
pub mod optimize;
pub mod reconstruction;
pub mod spin;

pub use coherent::{
    coherent_state, overlap, projector, q_symbol, q_symbol_grid, CoherentState, Projector,
    UnitVector,
};
pub use error::{Error, Result};
pub use frames::{
    build_nonsingular, constellation_distance, det_landscape, dual_basis, fibonacci_constellation,
    gram_entry, gram_matrix, is_singular, random_constellation, tetrahedron, Constellation,
    FrameSystem, GramMatrix, RepairOptions, RepairReport, DEFAULT_TAU,
};
pub use grid::SphereGrid;
pub use operator::{ComplexMatrix, HermitianOperator};
pub use optimize::{
    baseline_sweep, objective_eval, optimize, Objective, OptimizationConfig, OptimizationTrace,
};
pub use reconstruction::{
    discrete_p_symbol, discrete_q_symbol, random_density_matrix, reconstruct, simulate_measurement,
    tomography_trial, DiscretePSymbol, DiscreteQSymbol, TomographyResult,
};
pub use spin::{
    ladder_minus, ladder_plus, rotation_operator, spin_component, spin_z, SpinParameter,
};
