//! The fluctuating-field side of the model: the Minkowski action of the
//! field pair `(phi, chi)`, the tree-level saddle point of the mirror field
//! for constant `phi`, and the one-loop lattice momentum sum.
//!
//! Series coefficients are exact rationals; the model parameters enter
//! through their exact binary values.

mod action;
mod one_loop;
mod series;

pub use action::{interaction_action, minkowski_action, ActionValue, SpacetimeField};
pub use one_loop::{
    fluctuation_mass_squared, one_loop_density, one_loop_phi4_coefficient, one_loop_phi4_density, one_loop_subtracted,
    one_loop_sum, Dispersion,
};
pub use series::{
    delta_s_max_power, exact, mirror_max_power, mirror_residual, ratio, saddle_consistency, saddle_value,
    solve_mirror_series, solve_saddle, tree_level_delta_s, MirrorSeries, PowerSeries, ReferenceCoefficients,
    SaddleReport,
};
