//! Seeded additive Gaussian white noise.
//!
//! Samples come from a ChaCha20 stream seeded with `NoiseSpec::seed`,
//! transformed to standard normals by `rand_distr`'s ziggurat sampler and
//! drawn in row-major pixel order.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::{check_same_shape, Image};

/// Generator identification recorded in experiment reports.
pub const PRNG_NAME: &str = "ChaCha20Rng (rand_chacha 0.9) + StandardNormal ziggurat (rand_distr 0.5), row-major";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseSpec {
    /// Standard deviation on the 0-255 intensity scale.
    pub sigma_255: f64,
    pub seed: u64,
    pub clip: bool,
}

impl NoiseSpec {
    pub fn new(sigma_255: f64, seed: u64) -> Result<Self> {
        if !(sigma_255 >= 0.0 && sigma_255.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise standard deviation must be nonnegative, got {sigma_255}"
            )));
        }
        Ok(Self {
            sigma_255,
            seed,
            clip: true,
        })
    }

    pub fn without_clipping(self) -> Self {
        Self { clip: false, ..self }
    }

    /// Standard deviation on the `[0, 1]` scale.
    pub fn sigma_unit(&self) -> f64 {
        self.sigma_255 / 255.0
    }
}

/// Raw noisy values, without the `[0, 1]` constraint an [`Image`] carries.
pub fn noisy_values(img: &Image, spec: &NoiseSpec) -> DMatrix<f64> {
    let mut out = img.pixels().clone();
    if spec.sigma_255 == 0.0 {
        return out;
    }
    let sigma = spec.sigma_unit();
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    for i in 0..out.nrows() {
        for j in 0..out.ncols() {
            let z: f64 = StandardNormal.sample(&mut rng);
            let v = out[(i, j)] + sigma * z;
            out[(i, j)] = if spec.clip { v.clamp(0.0, 1.0) } else { v };
        }
    }
    out
}

/// Adds noise and clips to `[0, 1]` when `spec.clip` is set.
///
/// Unclipped results that leave `[0, 1]` are not valid images; use
/// [`noisy_values`] to inspect them.
pub fn add_noise(img: &Image, spec: &NoiseSpec) -> Result<Image> {
    let values = noisy_values(img, spec);
    Image::with_metadata(values, img.delta(), img.intensity_scale())
}

/// `10 log₁₀(Σ clean² / Σ (noisy - clean)²)`; `+∞` when there is no noise.
pub fn snr_db(clean: &DMatrix<f64>, noisy: &DMatrix<f64>) -> Result<f64> {
    check_same_shape(clean, noisy)?;
    let signal: f64 = clean.iter().map(|v| v * v).sum();
    let noise: f64 = clean.iter().zip(noisy.iter()).map(|(c, n)| (n - c) * (n - c)).sum();
    if noise == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (signal / noise).log10())
}
