//! Analytic ellipse phantoms.
//!
//! The Shepp-Logan phantom here is the ten-ellipse "modified" (high
//! contrast) variant: skull at 1.0, brain at 0.2, ventricles at 0.0 and
//! small features at 0.3–0.4. Parameters, in the `[-1, 1]²` frame with
//! rotation in degrees counter-clockwise:
//!
//! | intensity | a      | b      | x0    | y0      | rot |
//! |-----------|--------|--------|-------|---------|-----|
//! |  1.0      | 0.69   | 0.92   |  0.0  |  0.0    |   0 |
//! | -0.8      | 0.6624 | 0.874  |  0.0  | -0.0184 |   0 |
//! | -0.2      | 0.11   | 0.31   |  0.22 |  0.0    | -18 |
//! | -0.2      | 0.16   | 0.41   | -0.22 |  0.0    |  18 |
//! |  0.1      | 0.21   | 0.25   |  0.0  |  0.35   |   0 |
//! |  0.1      | 0.046  | 0.046  |  0.0  |  0.1    |   0 |
//! |  0.1      | 0.046  | 0.046  |  0.0  | -0.1    |   0 |
//! |  0.1      | 0.046  | 0.023  | -0.08 | -0.605  |   0 |
//! |  0.1      | 0.023  | 0.023  |  0.0  | -0.606  |   0 |
//! |  0.1      | 0.023  | 0.046  |  0.06 | -0.605  |   0 |
//!
//! Only the ellipses centred on the vertical axis are mirror symmetric; the
//! two large ventricles differ in size and the three small bottom features
//! are placed asymmetrically, so the full phantom is not left-right
//! symmetric.

use crate::error::{invalid, Result};
use crate::image::Image;

const MIN_SIZE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseSpec {
    pub intensity: f64,
    pub center_x: f64,
    pub center_y: f64,
    pub semi_axis_a: f64,
    pub semi_axis_b: f64,
    pub rotation_deg: f64,
}

impl EllipseSpec {
    pub const fn new(
        intensity: f64,
        semi_axis_a: f64,
        semi_axis_b: f64,
        center_x: f64,
        center_y: f64,
        rotation_deg: f64,
    ) -> Self {
        Self {
            intensity,
            center_x,
            center_y,
            semi_axis_a,
            semi_axis_b,
            rotation_deg,
        }
    }

    /// Whether the point `(x, y)` lies inside or on the ellipse.
    #[inline]
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (sin, cos) = self.rotation_deg.to_radians().sin_cos();
        let dx = x - self.center_x;
        let dy = y - self.center_y;
        let u = dx * cos + dy * sin;
        let v = -dx * sin + dy * cos;
        let a = self.semi_axis_a;
        let b = self.semi_axis_b;
        (u * u) / (a * a) + (v * v) / (b * b) <= 1.0
    }
}

pub const MODIFIED_SHEPP_LOGAN: [EllipseSpec; 10] = [
    EllipseSpec::new(1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    EllipseSpec::new(-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    EllipseSpec::new(-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    EllipseSpec::new(-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    EllipseSpec::new(0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    EllipseSpec::new(0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    EllipseSpec::new(0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    EllipseSpec::new(0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    EllipseSpec::new(0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
    EllipseSpec::new(0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
];

/// Sum of the intensities of every ellipse covering each pixel center.
/// No clamping is applied.
pub fn rasterize_ellipses(specs: &[EllipseSpec], size_n: usize) -> Result<Image> {
    if size_n < MIN_SIZE {
        return invalid(format!(
            "phantom size must be at least {MIN_SIZE}, got {size_n}"
        ));
    }
    for (k, e) in specs.iter().enumerate() {
        if !(e.semi_axis_a > 0.0 && e.semi_axis_b > 0.0) {
            return invalid(format!("ellipse {k} has non-positive semi-axis"));
        }
    }
    Ok(Image::from_fn(size_n, |row, col| {
        let (x, y) = Image::pixel_center(size_n, row, col);
        specs
            .iter()
            .filter(|e| e.contains(x, y))
            .fold(0.0, |acc, e| acc + e.intensity)
    }))
}

/// Modified Shepp-Logan phantom sampled at pixel centers, clamped to `[0, 1]`.
pub fn shepp_logan(size_n: usize) -> Result<Image> {
    Ok(rasterize_ellipses(&MODIFIED_SHEPP_LOGAN, size_n)?.clamped(0.0, 1.0))
}
