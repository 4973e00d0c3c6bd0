//! Image quality measures: MSE, PSNR, windowed SSIM and its mean (MSSIM).
//!
//! SSIM uses an 11x11 Gaussian window (σ = 1.5) with stabilisers
//! `ε₁ = (0.01 L)²`, `ε₂ = (0.03 L)²`, `L = 1`. Near the border the window
//! is truncated to the image and its weights renormalised to sum to one, so
//! the map has the same shape as the inputs.

use nalgebra::DMatrix;
use serde::{Serialize, Serializer};

use crate::error::Result;
use crate::image::check_same_shape;

const WINDOW_RADIUS: usize = 5;
const WINDOW_SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

/// Serializes non-finite values as the strings `"inf"`, `"-inf"` or `"nan"`.
pub fn serialize_f64_sentinel<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricBundle {
    pub mse: f64,
    #[serde(serialize_with = "serialize_f64_sentinel")]
    pub psnr_db: f64,
    pub mssim: f64,
    pub intensity_scale: f64,
}

impl MetricBundle {
    /// All three metrics of `test` against `reference`; both on `[0, 1]`.
    /// `intensity_scale` is the `L` used for PSNR.
    pub fn compare(reference: &DMatrix<f64>, test: &DMatrix<f64>, intensity_scale: f64) -> Result<Self> {
        let mse = mse(reference, test)?;
        Ok(Self {
            mse,
            psnr_db: psnr_from_mse(mse, intensity_scale),
            mssim: mssim(reference, test)?,
            intensity_scale,
        })
    }
}

pub fn mse(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    check_same_shape(a, b)?;
    let sum: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / a.len() as f64)
}

/// `10 log₁₀(L² / mse)`; `+∞` for identical inputs.
pub fn psnr_from_mse(mse: f64, intensity_scale: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (intensity_scale * intensity_scale / mse).log10()
    }
}

pub fn psnr(a: &DMatrix<f64>, b: &DMatrix<f64>, intensity_scale: f64) -> Result<f64> {
    Ok(psnr_from_mse(mse(a, b)?, intensity_scale))
}

fn gaussian_taps() -> [f64; 2 * WINDOW_RADIUS + 1] {
    let mut taps = [0.0; 2 * WINDOW_RADIUS + 1];
    for (k, t) in taps.iter_mut().enumerate() {
        let d = k as f64 - WINDOW_RADIUS as f64;
        *t = (-d * d / (2.0 * WINDOW_SIGMA * WINDOW_SIGMA)).exp();
    }
    taps
}

/// Weighted local mean along one axis with the truncated window renormalised.
/// Applying it along rows then columns equals the renormalised 2D window,
/// because the truncated 2D weight sum is the product of the 1D sums.
fn blur_axis(src: &DMatrix<f64>, along_rows: bool, taps: &[f64]) -> DMatrix<f64> {
    let (rows, cols) = src.shape();
    let r = WINDOW_RADIUS as isize;
    DMatrix::from_fn(rows, cols, |i, j| {
        let (pos, len) = if along_rows { (j, cols) } else { (i, rows) };
        let mut acc = 0.0;
        let mut wsum = 0.0;
        for d in -r..=r {
            let p = pos as isize + d;
            if p < 0 || p >= len as isize {
                continue;
            }
            let w = taps[(d + r) as usize];
            let v = if along_rows { src[(i, p as usize)] } else { src[(p as usize, j)] };
            acc += w * v;
            wsum += w;
        }
        acc / wsum
    })
}

fn local_mean(src: &DMatrix<f64>, taps: &[f64]) -> DMatrix<f64> {
    blur_axis(&blur_axis(src, true, taps), false, taps)
}

pub fn ssim_map(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_same_shape(a, b)?;
    let taps = gaussian_taps();
    let c1 = (K1 * 1.0f64).powi(2);
    let c2 = (K2 * 1.0f64).powi(2);

    let mu_a = local_mean(a, &taps);
    let mu_b = local_mean(b, &taps);
    let aa = local_mean(&a.component_mul(a), &taps);
    let bb = local_mean(&b.component_mul(b), &taps);
    let ab = local_mean(&a.component_mul(b), &taps);

    Ok(DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| {
        let (ma, mb) = (mu_a[(i, j)], mu_b[(i, j)]);
        let var_a = aa[(i, j)] - ma * ma;
        let var_b = bb[(i, j)] - mb * mb;
        let cov = ab[(i, j)] - ma * mb;
        ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
            / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2))
    }))
}

pub fn mssim(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    Ok(ssim_map(a, b)?.mean())
}
