//! Closed-form solution of the Verhulst master equations when the noise
//! switching rate equals the linear growth rate, in dimensionless units
//! (`τ = p1 t`, `p1 = ν = 1`).

mod closed_form;
mod distribution;
mod initial;
mod params;

use thiserror::Error;

use crate::quad::QuadError;

pub use closed_form::{
    backward_map, char_vars, delta_w1_density, fit_cauchy, general_solution, solution_distribution, solve, solve_delta,
    solve_grid, stationary, CauchyFit, CharFunction, ExtReal, FitBranch, SmoothFn, SolutionPoint,
};
pub use distribution::{callable, Atom, Density, MixedDistribution1D};
pub use initial::{InitialDensity, InitialKind, InitialSampler, MassIntegrals, RealFn, NORMALIZATION_TOL};
pub use params::{UserParams, VerhulstParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerhulstError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid initial density: {0}")]
    InvalidInitial(String),
    #[error("characteristic variable undefined; use backward_map (x = {x}, tau = {tau})")]
    Domain { x: f64, tau: f64 },
    #[error("delta initial data has no pointwise density; use solve_delta")]
    DeltaInitial,
    #[error(transparent)]
    Quad(#[from] QuadError),
}
