//! Anisotropic TV difference operator `D`, its transpose, and edge masks.
//!
//! An edge field stores `2·n²` coefficients: the horizontal forward
//! differences `u[i, j+1] − u[i, j]` for every pixel, followed by the
//! vertical ones `u[i+1, j] − u[i, j]`, both row-major. Differences that
//! would step past the last column (resp. row) are fixed at zero.

use crate::error::{invalid, Result};
use crate::image::Image;

/// Threshold below which a ground-truth difference counts as zero.
pub const TRUE_EDGE_EPS: f64 = 1e-12;

/// A linear sparsifying transform with its adjoint, acting on flat
/// row-major images of side `size_n`.
pub trait SparsityTransform: Sync {
    fn coefficient_len(&self, size_n: usize) -> usize;

    /// `out` is overwritten.
    fn apply(&self, size_n: usize, u: &[f64], out: &mut [f64]);

    /// `out` is overwritten.
    fn adjoint(&self, size_n: usize, coeffs: &[f64], out: &mut [f64]);
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AnisotropicTv;

impl SparsityTransform for AnisotropicTv {
    fn coefficient_len(&self, size_n: usize) -> usize {
        2 * size_n * size_n
    }

    fn apply(&self, n: usize, u: &[f64], out: &mut [f64]) {
        let nn = n * n;
        let (horiz, vert) = out.split_at_mut(nn);
        for i in 0..n {
            let row = &u[i * n..(i + 1) * n];
            let h = &mut horiz[i * n..(i + 1) * n];
            for j in 0..n - 1 {
                h[j] = row[j + 1] - row[j];
            }
            h[n - 1] = 0.0;

            let v = &mut vert[i * n..(i + 1) * n];
            if i + 1 < n {
                let next = &u[(i + 1) * n..(i + 2) * n];
                for j in 0..n {
                    v[j] = next[j] - row[j];
                }
            } else {
                v.fill(0.0);
            }
        }
    }

    fn adjoint(&self, n: usize, coeffs: &[f64], out: &mut [f64]) {
        let nn = n * n;
        let (horiz, vert) = coeffs.split_at(nn);
        out.fill(0.0);
        for i in 0..n {
            for j in 0..n - 1 {
                let h = horiz[i * n + j];
                out[i * n + j + 1] += h;
                out[i * n + j] -= h;
            }
        }
        for i in 0..n - 1 {
            for j in 0..n {
                let v = vert[i * n + j];
                out[(i + 1) * n + j] += v;
                out[i * n + j] -= v;
            }
        }
    }
}

/// Stacked horizontal/vertical forward differences of an image.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeField {
    size_n: usize,
    values: Vec<f64>,
}

impl EdgeField {
    pub fn from_vec(size_n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != 2 * size_n * size_n {
            return invalid(format!(
                "edge field of size {size_n} needs {} values, got {}",
                2 * size_n * size_n,
                values.len()
            ));
        }
        Ok(Self { size_n, values })
    }

    pub fn size_n(&self) -> usize {
        self.size_n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn horizontal(&self) -> &[f64] {
        &self.values[..self.size_n * self.size_n]
    }

    pub fn vertical(&self) -> &[f64] {
        &self.values[self.size_n * self.size_n..]
    }

    /// `‖y‖₁`, accumulated over the horizontal half and then the vertical
    /// half, each in row-major order.
    pub fn l1_norm(&self) -> f64 {
        let abs_sum = |s: &[f64]| s.iter().fold(0.0, |acc, v| acc + v.abs());
        abs_sum(self.horizontal()) + abs_sum(self.vertical())
    }

    /// Element-wise product with a mask.
    pub fn masked(&self, mask: &EdgeMask) -> Result<EdgeField> {
        mask.check_size(self.size_n)?;
        let values = self
            .values
            .iter()
            .zip(mask.bits())
            .map(|(&v, &keep)| if keep { v } else { 0.0 })
            .collect();
        Ok(EdgeField {
            size_n: self.size_n,
            values,
        })
    }
}

/// Binary diagonal mask over edge-field positions: `true` marks a non-edge
/// (regularized) position, `false` an edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMask {
    size_n: usize,
    bits: Vec<bool>,
}

impl EdgeMask {
    pub fn from_bits(size_n: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != 2 * size_n * size_n {
            return invalid(format!(
                "mask of size {size_n} needs {} entries, got {}",
                2 * size_n * size_n,
                bits.len()
            ));
        }
        Ok(Self { size_n, bits })
    }

    pub fn all_ones(size_n: usize) -> Self {
        Self {
            size_n,
            bits: vec![true; 2 * size_n * size_n],
        }
    }

    pub fn size_n(&self) -> usize {
        self.size_n
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Number of edge (zero) positions.
    pub fn zero_count(&self) -> usize {
        self.bits.iter().filter(|b| !**b).count()
    }

    /// Zeroes the masked-out entries of `values` in place.
    pub fn apply_in_place(&self, values: &mut [f64]) {
        for (v, &keep) in values.iter_mut().zip(&self.bits) {
            if !keep {
                *v = 0.0;
            }
        }
    }

    pub fn complement(&self) -> Self {
        Self {
            size_n: self.size_n,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub(crate) fn check_size(&self, size_n: usize) -> Result<()> {
        if self.size_n != size_n {
            return invalid(format!(
                "mask size {} does not match image size {size_n}",
                self.size_n
            ));
        }
        Ok(())
    }
}

pub fn tv_apply(image: &Image) -> EdgeField {
    let n = image.size();
    let mut values = vec![0.0; 2 * n * n];
    AnisotropicTv.apply(n, image.as_slice(), &mut values);
    EdgeField { size_n: n, values }
}

pub fn tv_adjoint(field: &EdgeField) -> Image {
    let n = field.size_n;
    let mut out = Image::zeros(n);
    AnisotropicTv.adjoint(n, &field.values, out.as_mut_slice());
    out
}

/// Anisotropic TV seminorm `‖Du‖₁`.
pub fn tv_seminorm(image: &Image) -> f64 {
    tv_apply(image).l1_norm()
}

/// Mask from an approximate edge field: 1 where `|y_i| < τ`, 0 otherwise.
pub fn build_mask(field: &EdgeField, tau: f64) -> Result<EdgeMask> {
    if !(tau > 0.0 && tau.is_finite()) {
        return invalid(format!(
            "threshold τ must be positive and finite, got {tau}"
        ));
    }
    Ok(EdgeMask {
        size_n: field.size_n,
        bits: field.values.iter().map(|v| v.abs() < tau).collect(),
    })
}

/// Exact edge mask of a noiseless ground-truth image: 1 wherever its
/// difference vanishes.
pub fn true_mask(image: &Image) -> EdgeMask {
    let field = tv_apply(image);
    EdgeMask {
        size_n: field.size_n,
        bits: field
            .values
            .iter()
            .map(|v| v.abs() <= TRUE_EDGE_EPS)
            .collect(),
    }
}
