//! 8-bit grayscale previews (binary PGM).

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder};

use crate::error::{CliError, CliResult};
use crate::matrix_file::Matrix;

/// Maps `[0, 1]` linearly onto `[0, 255]`, clamping outside values. NaN maps
/// to 0.
pub fn to_gray(values: &[f64]) -> Vec<u8> {
    values
        .iter()
        .map(|&v| {
            let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
            (v * 255.0).round() as u8
        })
        .collect()
}

pub fn write_preview(m: &Matrix, path: &Path) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let encoder = PnmEncoder::new(BufWriter::new(file))
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary));
    encoder
        .write_image(
            &to_gray(&m.data),
            m.cols as u32,
            m.rows as u32,
            ExtendedColorType::L8,
        )
        .map_err(|e| match e {
            image::ImageError::IoError(io) => CliError::io(path, io),
            other => CliError::io(path, std::io::Error::other(other.to_string())),
        })
}
