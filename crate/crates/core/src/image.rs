use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Grayscale image with intensities in `[0, 1]`.
///
/// `delta` is the pixel spacing and `intensity_scale` the dynamic range the
/// image came from (1 for synthetic data, 255 for 8-bit files), kept for
/// reporting only.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pixels: DMatrix<f64>,
    delta: f64,
    intensity_scale: f64,
}

impl Image {
    pub fn new(pixels: DMatrix<f64>) -> Result<Self> {
        Self::with_metadata(pixels, 1.0, 1.0)
    }

    pub fn with_metadata(pixels: DMatrix<f64>, delta: f64, intensity_scale: f64) -> Result<Self> {
        let (rows, cols) = pixels.shape();
        if rows < 2 || cols < 2 {
            return Err(Error::InvalidSize(format!(
                "image must be at least 2x2, got {rows}x{cols}"
            )));
        }
        if let Some(bad) = pixels.iter().find(|v| !(**v >= 0.0 && **v <= 1.0)) {
            return Err(Error::Domain(format!(
                "pixel values must lie in [0, 1], found {bad}"
            )));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "pixel spacing must be positive, got {delta}"
            )));
        }
        Ok(Self {
            pixels,
            delta,
            intensity_scale,
        })
    }

    /// Builds an image from arbitrary values by clamping into `[0, 1]`.
    pub fn clamped(mut values: DMatrix<f64>) -> Result<Self> {
        values.apply(|v| *v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) });
        Self::new(values)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::DimensionMismatch {
                expected: format!("rows of length {ncols}"),
                found: "ragged rows".into(),
            });
        }
        Self::new(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
    }

    pub fn pixels(&self) -> &DMatrix<f64> {
        &self.pixels
    }

    pub fn into_pixels(self) -> DMatrix<f64> {
        self.pixels
    }

    pub fn rows(&self) -> usize {
        self.pixels.nrows()
    }

    pub fn cols(&self) -> usize {
        self.pixels.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.pixels.shape()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn intensity_scale(&self) -> f64 {
        self.intensity_scale
    }

    pub fn set_delta(&mut self, delta: f64) -> Result<()> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "pixel spacing must be positive, got {delta}"
            )));
        }
        self.delta = delta;
        Ok(())
    }

    pub fn transpose(&self) -> Self {
        Self {
            pixels: self.pixels.transpose(),
            ..*self
        }
    }

    /// Sub-image `[row0, row0+rows) x [col0, col0+cols)`.
    pub fn crop(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> Result<Self> {
        if row0 + rows > self.rows() || col0 + cols > self.cols() {
            return Err(Error::InvalidSize(format!(
                "crop {rows}x{cols} at ({row0},{col0}) exceeds {}x{}",
                self.rows(),
                self.cols()
            )));
        }
        let pixels = self.pixels.view((row0, col0), (rows, cols)).into_owned();
        Self::with_metadata(pixels, self.delta, self.intensity_scale)
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.pixels.row(i).iter().copied().collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.pixels.column(j).iter().copied().collect()
    }
}

pub(crate) fn check_same_shape(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", a.nrows(), a.ncols()),
            found: format!("{}x{}", b.nrows(), b.ncols()),
        });
    }
    Ok(())
}
