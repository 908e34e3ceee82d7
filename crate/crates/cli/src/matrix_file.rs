//! `CTMAT` files: an ASCII header `CTMAT 1 <rows> <cols>\n` followed by
//! `rows·cols` little-endian f64 values in row-major order.

use std::fs;
use std::path::Path;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> CliResult<Self> {
        if rows == 0 || cols == 0 {
            return Err(CliError::Invalid(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(CliError::Invalid(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = format!("CTMAT 1 {} {}\n", self.rows, self.cols);
        let mut out = Vec::with_capacity(header.len() + 8 * self.data.len());
        out.extend_from_slice(header.as_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> CliResult<Self> {
        let bad = |msg: &str| CliError::Invalid(format!("malformed CTMAT data: {msg}"));
        let nl = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| bad("missing header line"))?;
        let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| bad("header is not ASCII"))?;
        let fields: Vec<&str> = header.split(' ').collect();
        if fields.len() != 4 || fields[0] != "CTMAT" || fields[1] != "1" {
            return Err(bad("expected header `CTMAT 1 <rows> <cols>`"));
        }
        let rows: usize = fields[2].parse().map_err(|_| bad("bad row count"))?;
        let cols: usize = fields[3].parse().map_err(|_| bad("bad column count"))?;
        let body = &bytes[nl + 1..];
        let expected = rows
            .checked_mul(cols)
            .and_then(|c| c.checked_mul(8))
            .ok_or_else(|| bad("dimensions overflow"))?;
        if body.len() != expected {
            return Err(bad(&format!(
                "expected {expected} payload bytes, found {}",
                body.len()
            )));
        }
        let data = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::new(rows, cols, data)
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        fs::write(path, self.to_bytes()).map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            CliError::Invalid(msg) => CliError::Invalid(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn byte_length_is_header_plus_payload() {
        let m = Matrix::new(64, 64, vec![0.5; 64 * 64]).unwrap();
        let bytes = m.to_bytes();
        assert_eq!(bytes.len(), "CTMAT 1 64 64\n".len() + 64 * 64 * 8);
        assert!(bytes.starts_with(b"CTMAT 1 64 64\n"));
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let data = vec![0.1, -0.0, f64::MIN_POSITIVE, 1e300, -7.25, 3.0];
        let m = Matrix::new(2, 3, data.clone()).unwrap();
        let back = Matrix::from_bytes(&m.to_bytes()).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back.data), bits(&data));
        assert_eq!((back.rows, back.cols), (2, 3));
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(Matrix::new(0, 3, vec![]).is_err());
        assert!(Matrix::new(2, 2, vec![1.0]).is_err());
        assert!(Matrix::from_bytes(b"CTMAT 1 1 1").is_err());
        assert!(Matrix::from_bytes(b"CTMAT 2 1 1\n00000000").is_err());
        assert!(Matrix::from_bytes(b"CTMAT 1 1 2\n00000000").is_err());
        assert!(Matrix::from_bytes(b"CTMAT 1 0 1\n").is_err());
    }
}
