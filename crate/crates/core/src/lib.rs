//! Parallel-beam CT reconstruction toolkit.
//!
//! The crate provides a matched forward/adjoint Radon projector, Ram-Lak
//! filtered back projection, the anisotropic TV difference operator with
//! edge-mask construction, and three iterative solvers:
//!
//! - edge-masked ℓ2-regularized least squares,
//!   `argmin ‖Ru − s‖² + λ‖MDu‖²`, solved by conjugate gradients on the
//!   normal equations;
//! - the exact-mask variant, where the fidelity term is weighted so heavily
//!   that `Ru = s` is effectively a constraint;
//! - a Split Bregman solver for the anisotropic TV problem
//!   `argmin ‖Ru − s‖² + λ‖Du‖₁`, used as a baseline.
//!
//! Images are square, row-major, and span `[-1, 1]²` with pixel `(0, 0)` in
//! the top-left corner. All distances inside the projector are measured in
//! pixel units.

pub mod error;
pub mod fbp;
pub mod image;
pub mod metrics;
pub mod phantom;
pub mod projector;
pub mod solvers;
pub mod sparsity;

pub use error::{CtError, Result};
pub use fbp::{backproject, fbp_reconstruct, filter_sinogram, FilterKind, FilterSpec};
pub use image::Image;
pub use metrics::{add_noise, mask_agreement, relative_error, MaskAgreement, NoiseSpec};
pub use phantom::{rasterize_ellipses, shepp_logan, EllipseSpec, MODIFIED_SHEPP_LOGAN};
pub use projector::{adjoint, forward, materialize_dense, ProjectionGeometry, Sinogram};
pub use solvers::{
    cg_normal_equations, shrink, solve_exact_mask, solve_masked_l2, solve_tv_split_bregman,
    CgConfig, InitialGuess, LinearOperator, MaskedL2Config, SolveReport, SplitBregmanConfig,
};
pub use sparsity::{
    build_mask, true_mask, tv_adjoint, tv_apply, tv_seminorm, AnisotropicTv, EdgeField, EdgeMask,
    SparsityTransform,
};
