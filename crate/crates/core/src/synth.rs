//! Synthetic test images.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::Image;

/// Rectangular sampling grid `x = x_min + i·ts`, `y = y_min + j·ts`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub ts: f64,
}

impl GridSpec {
    /// `[-1, 3]²` with `ts = 0.02`: 201 x 201 samples.
    pub fn example1() -> Self {
        Self {
            x_min: -1.0,
            x_max: 3.0,
            y_min: -1.0,
            y_max: 3.0,
            ts: 0.02,
        }
    }

    /// The example-1 domain sampled with `n` points per axis.
    pub fn example1_with_samples(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSize(format!("need at least 2 samples, got {n}")));
        }
        Ok(Self {
            ts: 4.0 / (n - 1) as f64,
            ..Self::example1()
        })
    }

    fn count(lo: f64, hi: f64, ts: f64) -> usize {
        ((hi - lo) / ts).round() as usize + 1
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ts > 0.0 && self.ts.is_finite()) {
            return Err(Error::InvalidParameter(format!("ts must be positive, got {}", self.ts)));
        }
        if !(self.x_min < self.x_max && self.y_min < self.y_max) {
            return Err(Error::InvalidParameter("grid bounds must satisfy min < max".into()));
        }
        let (r, c) = self.shape();
        if r < 2 || c < 2 {
            return Err(Error::InvalidSize(format!("grid yields {r}x{c} samples")));
        }
        Ok(())
    }

    /// `(rows, cols)`: rows follow `x`, columns follow `y`.
    pub fn shape(&self) -> (usize, usize) {
        (
            Self::count(self.x_min, self.x_max, self.ts),
            Self::count(self.y_min, self.y_max, self.ts),
        )
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.ts
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_min + j as f64 * self.ts
    }
}

/// `sin(x²/2 + y²/4 + 3)·cos(2x + 1 - e^y) + 1`, with range `[0, 2]`.
pub fn example1_value(x: f64, y: f64) -> f64 {
    (0.5 * x * x + 0.25 * y * y + 3.0).sin() * (2.0 * x + 1.0 - y.exp()).cos() + 1.0
}

/// An image whose pixels were divided by `original_scale` to fit in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledImage {
    pub image: Image,
    pub original_scale: f64,
}

impl ScaledImage {
    /// Maps values from the image scale back to the original units.
    pub fn to_original(&self, values: &DMatrix<f64>) -> DMatrix<f64> {
        values * self.original_scale
    }

    pub fn original(&self) -> DMatrix<f64> {
        self.to_original(self.image.pixels())
    }
}

/// Samples the example-1 surface and halves it into `[0, 1]`.
/// The pixel spacing of the returned image is `grid.ts`.
pub fn example1_image(grid: &GridSpec) -> Result<ScaledImage> {
    grid.validate()?;
    let (rows, cols) = grid.shape();
    let pixels = DMatrix::from_fn(rows, cols, |i, j| {
        (0.5 * example1_value(grid.x(i), grid.y(j))).clamp(0.0, 1.0)
    });
    Ok(ScaledImage {
        image: Image::with_metadata(pixels, grid.ts, 1.0)?,
        original_scale: 2.0,
    })
}

/// `n x n` board of `cell x cell` blocks, `low` in the top-left block.
pub fn checkerboard(n: usize, cell: usize, low: f64, high: f64) -> Result<Image> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("checkerboard needs n >= 2, got {n}")));
    }
    if cell == 0 || cell > n {
        return Err(Error::InvalidParameter(format!(
            "cell size must be in 1..={n}, got {cell}"
        )));
    }
    if !(0.0 <= low && low < high && high <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= low < high <= 1, got low={low}, high={high}"
        )));
    }
    Image::new(DMatrix::from_fn(n, n, |i, j| {
        if (i / cell + j / cell) % 2 == 0 {
            low
        } else {
            high
        }
    }))
}
