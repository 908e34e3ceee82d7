//! Filtered back projection with the Ram-Lak ramp filter.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid, Result};
use crate::image::Image;
use crate::projector::{ProjectionGeometry, Sinogram};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    RamLak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterSpec {
    pub kind: FilterKind,
    /// Rows are zero-padded to the next power of two at least
    /// `padding_factor · n_detectors` before filtering.
    pub padding_factor: usize,
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self {
            kind: FilterKind::RamLak,
            padding_factor: 2,
        }
    }
}

/// Band-limited spatial ramp kernel at integer lag `k`, for unit spacing:
/// `1/4` at zero, `0` at even lags, `−1/(πk)²` at odd lags.
pub fn ram_lak_kernel(k: i64) -> f64 {
    if k == 0 {
        0.25
    } else if k % 2 == 0 {
        0.0
    } else {
        let kf = k as f64;
        -1.0 / (PI * kf).powi(2)
    }
}

fn padded_len(n_detectors: usize, padding_factor: usize) -> usize {
    (padding_factor.max(2) * n_detectors).next_power_of_two()
}

/// Frequency response of the spatial kernel laid out circularly over
/// `len` samples. Real because the kernel is even.
fn ram_lak_response(len: usize, spacing: f64, planner: &mut FftPlanner<f64>) -> Vec<f64> {
    let mut h: Vec<Complex64> = (0..len)
        .map(|i| {
            let lag = if i <= len / 2 {
                i as i64
            } else {
                i as i64 - len as i64
            };
            Complex64::new(ram_lak_kernel(lag) / spacing, 0.0)
        })
        .collect();
    planner.plan_fft_forward(len).process(&mut h);
    h.into_iter().map(|c| c.re).collect()
}

/// Convolves every angle row with the ramp kernel (linear convolution,
/// truncated back to the detector range).
pub fn filter_sinogram(sino: &Sinogram, spec: &FilterSpec) -> Result<Sinogram> {
    if spec.padding_factor < 2 {
        return invalid(format!(
            "padding factor must be at least 2, got {}",
            spec.padding_factor
        ));
    }
    let geom = sino.geometry();
    let nd = geom.n_detectors();
    let len = padded_len(nd, spec.padding_factor);

    let mut planner = FftPlanner::new();
    let response = ram_lak_response(len, geom.detector_spacing(), &mut planner);
    let fft = planner.plan_fft_forward(len);
    let ifft = planner.plan_fft_inverse(len);
    let scale = 1.0 / len as f64;

    let mut out = sino.clone();
    out.as_mut_slice().par_chunks_mut(nd).for_each(|row| {
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for (b, &v) in buf.iter_mut().zip(row.iter()) {
            b.re = v;
        }
        fft.process(&mut buf);
        for (b, &h) in buf.iter_mut().zip(&response) {
            *b *= h;
        }
        ifft.process(&mut buf);
        for (v, b) in row.iter_mut().zip(&buf) {
            *v = b.re * scale;
        }
    });
    Ok(out)
}

/// Pixel-driven backprojection with linear interpolation along the
/// detector, scaled by `π / n_angles`.
pub fn backproject(sino: &Sinogram, geom: &ProjectionGeometry) -> Result<Image> {
    if sino.geometry() != geom {
        return invalid("sinogram geometry does not match the requested geometry");
    }
    let n = geom.size_n();
    let nd = geom.n_detectors();
    let spacing = geom.detector_spacing();
    let center = (nd as f64 - 1.0) * 0.5;
    let half = (n as f64 - 1.0) * 0.5;
    let trig: Vec<(f64, f64)> = geom.angles().iter().map(|a| a.sin_cos()).collect();
    let scale = PI / geom.n_angles() as f64;

    let mut image = Image::zeros(n);
    image
        .as_mut_slice()
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(row, line)| {
            let y = half - row as f64;
            for (col, px) in line.iter_mut().enumerate() {
                let x = col as f64 - half;
                let mut acc = 0.0;
                for (a, &(sin, cos)) in trig.iter().enumerate() {
                    let pos = (x * cos + y * sin) / spacing + center;
                    let base = pos.floor();
                    let f = pos - base;
                    let k = base as i64;
                    let readings = sino.row(a);
                    let at = |i: i64| {
                        if i >= 0 && (i as usize) < nd {
                            readings[i as usize]
                        } else {
                            0.0
                        }
                    };
                    acc += (1.0 - f) * at(k) + f * at(k + 1);
                }
                *px = acc * scale;
            }
        });
    Ok(image)
}

pub fn fbp_reconstruct(
    sino: &Sinogram,
    geom: &ProjectionGeometry,
    spec: &FilterSpec,
) -> Result<Image> {
    if sino.geometry() != geom {
        return invalid("sinogram geometry does not match the requested geometry");
    }
    backproject(&filter_sinogram(sino, spec)?, geom)
}
