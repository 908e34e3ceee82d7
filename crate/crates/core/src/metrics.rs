//! Error metrics, sinogram noise, and mask agreement statistics.
//!
//! Noise is drawn from ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded with
//! `seed_from_u64`, mapped through `rand_distr::Normal` (ziggurat). Both are
//! portable, so a `(seed, sigma, input)` triple fixes the output on every
//! platform.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Result};
use crate::image::Image;
use crate::projector::Sinogram;
use crate::sparsity::EdgeMask;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            sigma: 0.0,
            seed: 0,
        }
    }
}

/// `‖u − x‖₂ / ‖x‖₂`.
pub fn relative_error(u: &Image, x: &Image) -> Result<f64> {
    if u.size() != x.size() {
        return invalid(format!("image sizes differ: {} vs {}", u.size(), x.size()));
    }
    let reference = x.norm();
    if reference == 0.0 {
        return invalid("reference image has zero norm");
    }
    let diff: f64 = u
        .as_slice()
        .iter()
        .zip(x.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(diff.sqrt() / reference)
}

/// Adds i.i.d. `N(0, σ²)` samples to every sinogram entry. `σ = 0` returns
/// the input unchanged.
pub fn add_noise(sino: &Sinogram, spec: &NoiseSpec) -> Result<Sinogram> {
    if !(spec.sigma >= 0.0 && spec.sigma.is_finite()) {
        return invalid(format!(
            "noise sigma must be non-negative, got {}",
            spec.sigma
        ));
    }
    if spec.sigma == 0.0 {
        return Ok(sino.clone());
    }
    let normal =
        Normal::new(0.0, spec.sigma).map_err(|e| crate::CtError::InvalidArgument(e.to_string()))?;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let mut out = sino.clone();
    for v in out.as_mut_slice() {
        *v += normal.sample(&mut rng);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskAgreement {
    /// Fraction of true non-edges the approximate mask marks as edges.
    pub false_edge_rate: f64,
    /// Fraction of true edges the approximate mask leaves regularized.
    pub missed_edge_rate: f64,
}

/// Compares an approximate mask against the ground truth. Rates over an
/// empty set are reported as 0.
pub fn mask_agreement(approx: &EdgeMask, truth: &EdgeMask) -> Result<MaskAgreement> {
    if approx.size_n() != truth.size_n() {
        return invalid(format!(
            "mask sizes differ: {} vs {}",
            approx.size_n(),
            truth.size_n()
        ));
    }
    let (mut edges, mut missed, mut flat, mut false_edges) = (0usize, 0usize, 0usize, 0usize);
    for (&a, &t) in approx.bits().iter().zip(truth.bits()) {
        if t {
            flat += 1;
            if !a {
                false_edges += 1;
            }
        } else {
            edges += 1;
            if a {
                missed += 1;
            }
        }
    }
    let rate = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    Ok(MaskAgreement {
        false_edge_rate: rate(false_edges, flat),
        missed_edge_rate: rate(missed, edges),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantom::shepp_logan;
    use crate::projector::ProjectionGeometry;
    use crate::sparsity::true_mask;

    #[test]
    fn relative_error_basics() {
        let x = shepp_logan(32).unwrap();
        assert_eq!(relative_error(&x, &x).unwrap(), 0.0);
        let twice = Image::from_vec(32, x.as_slice().iter().map(|v| 2.0 * v).collect()).unwrap();
        assert!((relative_error(&twice, &x).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(relative_error(&Image::zeros(32), &x).unwrap(), 1.0);
        assert!(relative_error(&x, &Image::zeros(32)).is_err());
        assert!(relative_error(&Image::zeros(16), &x).is_err());
    }

    #[test]
    fn noise_is_reproducible() {
        let g = ProjectionGeometry::new(16, 4).unwrap();
        let s = Sinogram::from_vec(&g, (0..g.data_len()).map(|k| k as f64).collect()).unwrap();
        let zero = add_noise(
            &s,
            &NoiseSpec {
                sigma: 0.0,
                seed: 9,
            },
        )
        .unwrap();
        assert_eq!(zero, s);
        let spec = NoiseSpec {
            sigma: 0.5,
            seed: 42,
        };
        let a = add_noise(&s, &spec).unwrap();
        let b = add_noise(&s, &spec).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, s);
        let c = add_noise(
            &s,
            &NoiseSpec {
                sigma: 0.5,
                seed: 43,
            },
        )
        .unwrap();
        assert_ne!(a, c);
        assert!(add_noise(
            &s,
            &NoiseSpec {
                sigma: -1.0,
                seed: 0
            }
        )
        .is_err());
    }

    #[test]
    fn noise_standard_deviation() {
        // 10⁶ samples: the standard error of the sample stddev is ~7e-4.
        let g = ProjectionGeometry::with_angles(8, vec![0.0], 1_000_000, 1.0).unwrap();
        let s = Sinogram::zeros(&g);
        let noisy = add_noise(
            &s,
            &NoiseSpec {
                sigma: 1.0,
                seed: 2024,
            },
        )
        .unwrap();
        let v = noisy.as_slice();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        let sd = var.sqrt();
        assert!((0.995..=1.005).contains(&sd), "{sd}");
    }

    #[test]
    fn agreement_cases() {
        let x = shepp_logan(32).unwrap();
        let truth = true_mask(&x);
        let same = mask_agreement(&truth, &truth).unwrap();
        assert_eq!((same.false_edge_rate, same.missed_edge_rate), (0.0, 0.0));

        let ones = EdgeMask::all_ones(32);
        let r = mask_agreement(&ones, &truth).unwrap();
        assert_eq!((r.false_edge_rate, r.missed_edge_rate), (0.0, 1.0));

        let r = mask_agreement(&truth.complement(), &truth).unwrap();
        assert_eq!((r.false_edge_rate, r.missed_edge_rate), (1.0, 1.0));

        assert!(mask_agreement(&EdgeMask::all_ones(16), &truth).is_err());
    }
}
