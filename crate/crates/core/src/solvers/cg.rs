use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use super::norm_sq;
use crate::error::{invalid, CtError, Result};

/// A real linear map given by its action and the action of its transpose.
pub trait LinearOperator: Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;

    /// `y ← A x`; `y` is overwritten.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// `x ← Aᵀ y`; `x` is overwritten.
    fn apply_adjoint(&self, y: &[f64], x: &mut [f64]);
}

impl LinearOperator for DMatrix<f64> {
    fn rows(&self) -> usize {
        self.nrows()
    }

    fn cols(&self) -> usize {
        self.ncols()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let r = self * DVector::from_column_slice(x);
        y.copy_from_slice(r.as_slice());
    }

    fn apply_adjoint(&self, y: &[f64], x: &mut [f64]) {
        let r = self.tr_mul(&DVector::from_column_slice(y));
        x.copy_from_slice(r.as_slice());
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgConfig {
    pub max_iters: usize,
    /// Stop once `‖Aᵀ(b − Ax)‖ ≤ rel_tolerance · ‖Aᵀb‖`. Zero runs the full
    /// iteration budget.
    pub rel_tolerance: f64,
}

impl Default for CgConfig {
    fn default() -> Self {
        Self {
            max_iters: 500,
            rel_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations_used: usize,
    /// Relative normal-equation residual at exit.
    pub final_residual: f64,
    pub wall_time_seconds: f64,
    pub objective_value: f64,
    /// Relative normal-equation residual before the first iteration and
    /// after each one.
    pub residual_history: Vec<f64>,
}

/// Least-squares solve of `min ‖Ax − b‖²` through the normal equations
/// `AᵀA x = Aᵀb`, using only products with `A` and `Aᵀ`.
///
/// The iteration is the conjugate residual method applied to `AᵀA`, so the
/// normal-equation residual `‖Aᵀ(b − Ax_k)‖` is non-increasing. Each step
/// costs one product with `A` and one with `Aᵀ`. Starts from `x0` when
/// given, otherwise from zero. The reported objective is `‖Ax − b‖²`.
pub fn cg_normal_equations<A: LinearOperator + ?Sized>(
    op: &A,
    rhs: &[f64],
    cfg: &CgConfig,
    x0: Option<&[f64]>,
) -> Result<(Vec<f64>, SolveReport)> {
    let start = Instant::now();
    let (m, n) = (op.rows(), op.cols());
    if rhs.len() != m {
        return invalid(format!(
            "right-hand side has length {}, expected {m}",
            rhs.len()
        ));
    }
    if !(cfg.rel_tolerance >= 0.0 && cfg.rel_tolerance < 1.0) {
        return invalid(format!(
            "relative tolerance must lie in [0, 1), got {}",
            cfg.rel_tolerance
        ));
    }
    let mut x = match x0 {
        Some(x0) if x0.len() != n => {
            return invalid(format!(
                "initial guess has length {}, expected {n}",
                x0.len()
            ))
        }
        Some(x0) => x0.to_vec(),
        None => vec![0.0; n],
    };

    let mut ax = vec![0.0; m];
    let mut r = vec![0.0; n];

    op.apply_adjoint(rhs, &mut r);
    let reference = norm_sq(&r).sqrt();

    // Normal residual r = Aᵀ(b − Ax).
    let mut ls_residual = rhs.to_vec();
    if x0.is_some() {
        op.apply(&x, &mut ax);
        for (res, a) in ls_residual.iter_mut().zip(&ax) {
            *res -= a;
        }
        op.apply_adjoint(&ls_residual, &mut r);
    }

    let relative = |res: f64| {
        if reference > 0.0 {
            res / reference
        } else {
            res
        }
    };
    let mut residual = norm_sq(&r).sqrt();
    let mut history = vec![relative(residual)];
    let mut iterations = 0;

    if residual > cfg.rel_tolerance * reference && residual > 0.0 {
        let mut ar = vec![0.0; m];
        let mut nr = vec![0.0; n];
        op.apply(&r, &mut ar);
        op.apply_adjoint(&ar, &mut nr);
        let mut rho = norm_sq(&ar);

        let mut p = r.clone();
        let mut np = nr.clone();

        for k in 1..=cfg.max_iters {
            let denom = norm_sq(&np);
            if !(denom > 0.0 && denom.is_finite() && rho.is_finite()) {
                return Err(CtError::NumericalFailure {
                    iteration: k,
                    reason: format!("conjugate direction breakdown (‖AᵀAp‖² = {denom})"),
                });
            }
            let alpha = rho / denom;
            for (xi, pi) in x.iter_mut().zip(&p) {
                *xi += alpha * pi;
            }
            for (ri, npi) in r.iter_mut().zip(&np) {
                *ri -= alpha * npi;
            }
            iterations = k;
            residual = norm_sq(&r).sqrt();
            if !residual.is_finite() {
                return Err(CtError::NumericalFailure {
                    iteration: k,
                    reason: "residual became non-finite".into(),
                });
            }
            history.push(relative(residual));
            if residual <= cfg.rel_tolerance * reference || residual == 0.0 || k == cfg.max_iters {
                break;
            }

            op.apply(&r, &mut ar);
            op.apply_adjoint(&ar, &mut nr);
            let rho_next = norm_sq(&ar);
            let beta = rho_next / rho;
            rho = rho_next;
            for ((pi, npi), (ri, nri)) in p.iter_mut().zip(np.iter_mut()).zip(r.iter().zip(&nr)) {
                *pi = ri + beta * *pi;
                *npi = nri + beta * *npi;
            }
        }
    }

    op.apply(&x, &mut ax);
    let objective = ax
        .iter()
        .zip(rhs)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>();

    Ok((
        x,
        SolveReport {
            iterations_used: iterations,
            final_residual: relative(residual),
            wall_time_seconds: start.elapsed().as_secs_f64(),
            objective_value: objective,
            residual_history: history,
        },
    ))
}
