//! Reconstruction solvers built on conjugate gradients for the normal
//! equations.

mod cg;
mod masked;
mod split_bregman;

pub use cg::{cg_normal_equations, CgConfig, LinearOperator, SolveReport};
pub use masked::{
    solve_exact_mask, solve_masked_l2, solve_masked_l2_with, InitialGuess, MaskedL2Config,
    DEFAULT_LAMBDA_LARGE,
};
pub use split_bregman::{shrink, solve_tv_split_bregman, SplitBregmanConfig};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}
