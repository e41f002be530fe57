//! Classical lattice Klein-Gordon fields with probabilistic initial
//! conditions, and their description in terms of fluctuating-field
//! observables.
//!
//! The crate has two complementary engines:
//!
//! * grid engines for one or two sites, which hold the full classical wave
//!   function `q(sigma, pi)` or its Fourier transform `psi(sigma, zeta)`
//!   ([`transport`], [`spectral`], [`observables`], [`schroedinger`]);
//! * an ensemble engine for arbitrary lattices that samples microstates and
//!   advances them with the cellular-automaton update ([`automaton`]).
//!
//! [`effective_action`] covers the action of the fluctuating and mirror
//! fields, the tree-level saddle-point series and the one-loop lattice sum.

pub mod automaton;
pub mod effective_action;
pub mod error;
mod fourier;
pub mod model;
pub mod observables;
pub mod phase_space;
pub mod schroedinger;
pub mod spectral;
pub mod transport;

pub use automaton::{
    ensemble_expect, energy, energy_drift, run_automaton, run_automaton_observed, sample_initial, Ensemble, Estimate,
    FieldConfiguration, FieldObservable, FieldObservableKind,
};
pub use error::{Error, Result};
pub use model::{Lattice, ModelParams, DEFAULT_LAPLACIAN_PREFACTOR};
pub use phase_space::{
    make_gaussian_q, normalize, to_probability, Axis, ClassicalWaveFunction, ComplexWaveFunction, NormReport,
    PhaseGrid, SiteGaussian, WaveFunction,
};
pub use spectral::{fourier_pi_to_zeta, fourier_zeta_to_pi, to_mirror_view, MirrorView};
pub use transport::{evolve_q, evolve_q_step, force, liouville_rhs, step_update, StepDirection, SubstepOrder};

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
