use std::time::Instant;

use super::cg::{cg_normal_equations, CgConfig, LinearOperator, SolveReport};
use super::norm_sq;
use crate::error::{invalid, CtError, Result};
use crate::fbp::{fbp_reconstruct, FilterSpec};
use crate::image::Image;
use crate::projector::{adjoint_into, forward_into, ProjectionGeometry, Sinogram};
use crate::sparsity::{AnisotropicTv, EdgeMask, SparsityTransform};

/// Fidelity weight standing in for the hard constraint `Ru = s`.
pub const DEFAULT_LAMBDA_LARGE: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialGuess {
    #[default]
    Zero,
    Fbp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskedL2Config {
    pub lambda: f64,
    pub max_iters: usize,
    pub rel_tolerance: f64,
    pub initial_guess: InitialGuess,
}

impl Default for MaskedL2Config {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            max_iters: 500,
            rel_tolerance: 1e-8,
            initial_guess: InitialGuess::Zero,
        }
    }
}

impl MaskedL2Config {
    fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return invalid(format!("lambda must be positive, got {}", self.lambda));
        }
        if self.max_iters == 0 {
            return invalid("max_iters must be positive");
        }
        if !(self.rel_tolerance > 0.0 && self.rel_tolerance < 1.0) {
            return invalid(format!(
                "rel_tolerance must lie in (0, 1), got {}",
                self.rel_tolerance
            ));
        }
        Ok(())
    }
}

/// The stacked operator `[R; √λ·M·S]` whose normal matrix is
/// `RᵀR + λ SᵀMS` (M is a 0/1 diagonal, so `MᵀM = M`).
pub(crate) struct MaskedSystem<'a, S: SparsityTransform> {
    pub geom: &'a ProjectionGeometry,
    pub mask: Option<&'a EdgeMask>,
    pub transform: &'a S,
    pub weight: f64,
}

impl<S: SparsityTransform> MaskedSystem<'_, S> {
    fn data_len(&self) -> usize {
        self.geom.data_len()
    }
}

impl<S: SparsityTransform> LinearOperator for MaskedSystem<'_, S> {
    fn rows(&self) -> usize {
        self.data_len() + self.transform.coefficient_len(self.geom.size_n())
    }

    fn cols(&self) -> usize {
        self.geom.size_n() * self.geom.size_n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.geom.size_n();
        let (data, coeffs) = y.split_at_mut(self.data_len());
        forward_into(x, self.geom, data);
        self.transform.apply(n, x, coeffs);
        if let Some(mask) = self.mask {
            mask.apply_in_place(coeffs);
        }
        for c in coeffs.iter_mut() {
            *c *= self.weight;
        }
    }

    fn apply_adjoint(&self, y: &[f64], x: &mut [f64]) {
        let n = self.geom.size_n();
        let (data, coeffs) = y.split_at(self.data_len());
        adjoint_into(data, self.geom, x);
        let mut scaled: Vec<f64> = coeffs.iter().map(|c| c * self.weight).collect();
        if let Some(mask) = self.mask {
            mask.apply_in_place(&mut scaled);
        }
        let mut back = vec![0.0; n * n];
        self.transform.adjoint(n, &scaled, &mut back);
        for (xi, b) in x.iter_mut().zip(&back) {
            *xi += b;
        }
    }
}

fn check_problem(sino: &Sinogram, geom: &ProjectionGeometry, mask: &EdgeMask) -> Result<()> {
    if sino.geometry() != geom {
        return invalid("sinogram geometry does not match the requested geometry");
    }
    if mask.size_n() != geom.size_n() {
        return invalid(format!(
            "mask size {} does not match geometry size {}",
            mask.size_n(),
            geom.size_n()
        ));
    }
    Ok(())
}

/// Residual norms `(‖Ru − s‖², ‖M S u‖²)` at `u`.
fn masked_terms<S: SparsityTransform>(
    u: &[f64],
    sino: &Sinogram,
    geom: &ProjectionGeometry,
    mask: &EdgeMask,
    transform: &S,
) -> (f64, f64) {
    let n = geom.size_n();
    let mut ru = vec![0.0; geom.data_len()];
    forward_into(u, geom, &mut ru);
    let fidelity = ru
        .iter()
        .zip(sino.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let mut coeffs = vec![0.0; transform.coefficient_len(n)];
    transform.apply(n, u, &mut coeffs);
    mask.apply_in_place(&mut coeffs);
    (fidelity, norm_sq(&coeffs))
}

/// Edge-masked ℓ2-regularized least squares,
/// `argmin_u ‖Ru − s‖² + λ‖M D u‖²`, with `D` the anisotropic TV operator.
///
/// The reported objective is the value of that functional at the output.
pub fn solve_masked_l2(
    sino: &Sinogram,
    geom: &ProjectionGeometry,
    mask: &EdgeMask,
    cfg: &MaskedL2Config,
) -> Result<(Image, SolveReport)> {
    solve_masked_l2_with(sino, geom, mask, cfg, &AnisotropicTv)
}

/// [`solve_masked_l2`] with an arbitrary sparsifying transform whose
/// coefficient layout the mask indexes.
pub fn solve_masked_l2_with<S: SparsityTransform>(
    sino: &Sinogram,
    geom: &ProjectionGeometry,
    mask: &EdgeMask,
    cfg: &MaskedL2Config,
    transform: &S,
) -> Result<(Image, SolveReport)> {
    let start = Instant::now();
    check_problem(sino, geom, mask)?;
    cfg.validate()?;
    let n = geom.size_n();
    if mask.bits().len() != transform.coefficient_len(n) {
        return invalid("mask length does not match the transform's coefficient count");
    }

    let system = MaskedSystem {
        geom,
        mask: Some(mask),
        transform,
        weight: cfg.lambda.sqrt(),
    };
    let mut rhs = vec![0.0; system.rows()];
    rhs[..geom.data_len()].copy_from_slice(sino.as_slice());

    let init = match cfg.initial_guess {
        InitialGuess::Zero => None,
        InitialGuess::Fbp => Some(fbp_reconstruct(sino, geom, &FilterSpec::default())?.into_vec()),
    };
    let cg = CgConfig {
        max_iters: cfg.max_iters,
        rel_tolerance: cfg.rel_tolerance,
    };
    let (u, mut report) = cg_normal_equations(&system, &rhs, &cg, init.as_deref())?;

    if let Some(k) = u.iter().position(|v| !v.is_finite()) {
        return Err(CtError::NumericalFailure {
            iteration: report.iterations_used,
            reason: format!("non-finite pixel at index {k}"),
        });
    }
    let (fidelity, penalty) = masked_terms(&u, sino, geom, mask, transform);
    report.objective_value = fidelity + cfg.lambda * penalty;
    report.wall_time_seconds = start.elapsed().as_secs_f64();
    Ok((Image::from_vec(n, u)?, report))
}

/// Exact-mask reconstruction: `argmin ‖MDu‖²` subject to `Ru = s`, realized
/// as `argmin λ_large‖Ru − s‖² + ‖MDu‖²`.
///
/// This has the same minimizer as the masked solve with `λ = 1/λ_large`, and
/// that is how it is computed. The reported objective is
/// `λ_large‖Ru − s‖² + ‖MDu‖²`. `cg.lambda` is ignored.
pub fn solve_exact_mask(
    sino: &Sinogram,
    geom: &ProjectionGeometry,
    mask: &EdgeMask,
    lambda_large: f64,
    cg: &MaskedL2Config,
) -> Result<(Image, SolveReport)> {
    if !(lambda_large > 0.0 && lambda_large.is_finite()) {
        return invalid(format!("lambda_large must be positive, got {lambda_large}"));
    }
    let cfg = MaskedL2Config {
        lambda: 1.0 / lambda_large,
        ..*cg
    };
    let (u, mut report) = solve_masked_l2(sino, geom, mask, &cfg)?;
    let (fidelity, penalty) = masked_terms(u.as_slice(), sino, geom, mask, &AnisotropicTv);
    report.objective_value = lambda_large * fidelity + penalty;
    Ok((u, report))
}
