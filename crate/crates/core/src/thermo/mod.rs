//! Topological pressure: additive pressure of locally constant potentials,
//! subadditive pressure of the singular value function, and their roots.

mod additive;
mod curve;
mod root;
mod subadditive;

pub use additive::{
    additive_pressure, gibbs_markov_measure, gibbs_markov_measure_checked, spectral_pressure,
    weighted_transition, GibbsMeasure, Potential, GIBBS_CHECK_LEVELS,
};
pub use curve::{s_grid, PressureCurve};
pub use root::{bisect_decreasing, pressure_root, RootBracket, MAX_BISECTION_STEPS};
pub use subadditive::{
    affinity_dimension, affinity_dimension_with, determinant_pressure, singular_value_function,
    subadditive_pressure, subadditive_pressure_with_budget, AffinityOptions, DimensionReport,
    SubadditiveEstimate, DEFAULT_PRODUCT_BUDGET,
};
#[allow(unused_imports)]
pub(crate) use subadditive::{check_budget, validate_matrices};
