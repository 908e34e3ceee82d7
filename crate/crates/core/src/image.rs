use crate::error::{invalid, Result};

/// Square grid of attenuation values, row-major.
///
/// Pixel `(row, col)` has its center at
/// `x = (2·col + 1 − n) / n`, `y = (n − 1 − 2·row) / n` in the `[-1, 1]²`
/// frame, so row 0 is the top of the image.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    size: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn zeros(size: usize) -> Self {
        Self {
            size,
            data: vec![0.0; size * size],
        }
    }

    pub fn from_vec(size: usize, data: Vec<f64>) -> Result<Self> {
        if size == 0 {
            return invalid("image size must be positive");
        }
        if data.len() != size * size {
            return invalid(format!(
                "image of size {size} needs {} values, got {}",
                size * size,
                data.len()
            ));
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return invalid(format!("image value at index {k} is not finite"));
        }
        Ok(Self { size, data })
    }

    pub fn from_fn(size: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(size * size);
        for row in 0..size {
            for col in 0..size {
                data.push(f(row, col));
            }
        }
        Self { size, data }
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.size + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.size + col] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Left-right mirror image.
    pub fn mirrored(&self) -> Self {
        let n = self.size;
        Self::from_fn(n, |r, c| self.get(r, n - 1 - c))
    }

    pub fn clamped(mut self, lo: f64, hi: f64) -> Self {
        for v in &mut self.data {
            *v = v.clamp(lo, hi);
        }
        self
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Center of pixel `(row, col)` in the `[-1, 1]²` frame.
    #[inline]
    pub fn pixel_center(size: usize, row: usize, col: usize) -> (f64, f64) {
        let n = size as f64;
        let x = (2.0 * col as f64 + 1.0 - n) / n;
        let y = (n - 1.0 - 2.0 * row as f64) / n;
        (x, y)
    }
}
