//! Separated two-dimensional reconstruction.
//!
//! Every row and every column of the image is treated as the potential of a
//! 1D operator `-h² D₂ - diag(½ I)`. The negative spectra of these `rows +
//! cols` operators are computed once and then combined pixel by pixel:
//!
//! ```text
//! I[i,j] = -λ + ( h²/L₂ · Σ_n Σ_m (λ - κ_{i,n} - ρ_{j,m})^γ · φ_{i,n}[j]² · ϕ_{j,m}[i]² )^{1/(1+γ)}
//! ```
//!
//! where `(κ_{i,n}, φ_{i,n})` come from row `i` and `(ρ_{j,m}, ϕ_{j,m})` from
//! column `j`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result, Slice};
use crate::image::Image;
use crate::metrics::MetricBundle;
use crate::scsa1d::ScsaParams;
use crate::spectral::{build_diff_matrix, negative_spectrum, SchrodingerOperator1D, SpectralDecomposition};

/// How independent slices and pixels are scheduled. Results do not depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

/// `L^cl_{2,γ} = Γ(γ+1) / (4π Γ(γ+2)) = 1 / (4π(γ+1))`.
pub fn semiclassical_constant_2d(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be positive for the 2D formula, got {gamma}"
        )));
    }
    Ok(1.0 / (4.0 * PI * (gamma + 1.0)))
}

/// Negative spectra of every row and column operator of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparatedSpectra {
    pub row_spectra: Vec<SpectralDecomposition>,
    pub col_spectra: Vec<SpectralDecomposition>,
    h: f64,
    lambda: f64,
    delta: f64,
}

impl SeparatedSpectra {
    pub fn rows(&self) -> usize {
        self.row_spectra.len()
    }

    pub fn cols(&self) -> usize {
        self.col_spectra.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn row_counts(&self) -> Vec<usize> {
        self.row_spectra.iter().map(SpectralDecomposition::count_negative).collect()
    }

    pub fn col_counts(&self) -> Vec<usize> {
        self.col_spectra.iter().map(SpectralDecomposition::count_negative).collect()
    }

    pub fn total_negative(&self) -> usize {
        self.row_counts().iter().sum::<usize>() + self.col_counts().iter().sum::<usize>()
    }

    fn check_params(&self, params: &ScsaParams) -> Result<()> {
        if self.h != params.h || self.lambda != params.lambda || self.delta != params.delta {
            return Err(Error::InvalidParameter(format!(
                "spectra were computed for h={}, lambda={}, delta={} but params ask for h={}, lambda={}, delta={}",
                self.h, self.lambda, self.delta, params.h, params.lambda, params.delta
            )));
        }
        Ok(())
    }
}

fn slice_spectra(
    slices: Vec<Vec<f64>>,
    params: &ScsaParams,
    execution: Execution,
    tag: fn(usize) -> Slice,
) -> Result<Vec<SpectralDecomposition>> {
    let diff = build_diff_matrix(slices[0].len(), params.delta)?;
    let solve = |(idx, potential): (usize, &Vec<f64>)| {
        let op = SchrodingerOperator1D::new(params.h, potential, &diff, true)?;
        negative_spectrum(&op, params.lambda).map_err(|e| e.with_slice(tag(idx)))
    };
    match execution {
        Execution::Serial => slices.iter().enumerate().map(solve).collect(),
        Execution::Parallel => slices.par_iter().enumerate().map(solve).collect(),
    }
}

/// Solves the row operators (potential `½ I[i,:]`) and the column operators
/// (potential `½ I[:,j]`).
pub fn decompose_image(img: &Image, params: &ScsaParams) -> Result<SeparatedSpectra> {
    decompose_image_with(img, params, Execution::Parallel)
}

pub fn decompose_image_with(
    img: &Image,
    params: &ScsaParams,
    execution: Execution,
) -> Result<SeparatedSpectra> {
    params.validate()?;
    let rows = (0..img.rows()).map(|i| img.row(i)).collect();
    let cols = (0..img.cols()).map(|j| img.column(j)).collect();
    Ok(SeparatedSpectra {
        row_spectra: slice_spectra(rows, params, execution, Slice::Row)?,
        col_spectra: slice_spectra(cols, params, execution, Slice::Column)?,
        h: params.h,
        lambda: params.lambda,
        delta: params.delta,
    })
}

/// Output of a 2D reconstruction.
///
/// `reconstructed` holds the raw formula values; they are only clamped into
/// `[0, 1]` by [`ReconstructionReport::image`] and when exporting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionReport {
    #[serde(skip)]
    pub reconstructed: DMatrix<f64>,
    pub neg_counts_rows: Vec<usize>,
    pub neg_counts_cols: Vec<usize>,
    pub params: ScsaParams,
    pub empty_row_count: usize,
    pub empty_col_count: usize,
    pub metrics: Option<MetricBundle>,
}

impl ReconstructionReport {
    /// The reconstruction clamped into `[0, 1]`.
    pub fn image(&self) -> Image {
        Image::clamped(self.reconstructed.clone()).expect("reconstruction keeps the input shape")
    }

    /// Attaches metrics of the clamped reconstruction against `reference`.
    pub fn compare_to(&mut self, reference: &Image) -> Result<&MetricBundle> {
        let bundle = MetricBundle::compare(reference.pixels(), self.image().pixels(), 1.0)?;
        Ok(self.metrics.insert(bundle))
    }

    pub fn total_negative(&self) -> usize {
        self.neg_counts_rows.iter().sum::<usize>() + self.neg_counts_cols.iter().sum::<usize>()
    }
}

pub fn reconstruct_2d(img: &Image, params: &ScsaParams) -> Result<ReconstructionReport> {
    reconstruct_2d_with(img, params, Execution::Parallel)
}

pub fn reconstruct_2d_with(
    img: &Image,
    params: &ScsaParams,
    execution: Execution,
) -> Result<ReconstructionReport> {
    let spectra = decompose_image_with(img, params, execution)?;
    reconstruct_from_spectra_with(&spectra, params, execution)
}

/// Combination step alone. `params.gamma` may differ between calls on the
/// same spectra; `h`, `lambda` and `delta` must match those used to solve them.
pub fn reconstruct_from_spectra(
    spectra: &SeparatedSpectra,
    params: &ScsaParams,
) -> Result<ReconstructionReport> {
    reconstruct_from_spectra_with(spectra, params, Execution::Parallel)
}

pub fn reconstruct_from_spectra_with(
    spectra: &SeparatedSpectra,
    params: &ScsaParams,
    execution: Execution,
) -> Result<ReconstructionReport> {
    params.validate()?;
    spectra.check_params(params)?;
    let lcl = semiclassical_constant_2d(params.gamma)?;
    let prefactor = params.h * params.h / lcl;
    let power = 1.0 / (1.0 + params.gamma);

    let sums = match integer_exponent(params.gamma) {
        Some(k) => binomial_sums(spectra, params.lambda, k, execution),
        None => direct_sums(spectra, params.lambda, params.gamma, execution),
    };
    let reconstructed = sums.map(|s| -params.lambda + (prefactor * s).powf(power));

    let neg_counts_rows = spectra.row_counts();
    let neg_counts_cols = spectra.col_counts();
    Ok(ReconstructionReport {
        reconstructed,
        empty_row_count: neg_counts_rows.iter().filter(|&&c| c == 0).count(),
        empty_col_count: neg_counts_cols.iter().filter(|&&c| c == 0).count(),
        neg_counts_rows,
        neg_counts_cols,
        params: *params,
        metrics: None,
    })
}

fn integer_exponent(gamma: f64) -> Option<u32> {
    (gamma.fract() == 0.0 && gamma <= 32.0).then_some(gamma as u32)
}

fn run_rows<F>(rows: usize, execution: Execution, f: F) -> Vec<Vec<f64>>
where
    F: Fn(usize) -> Vec<f64> + Sync + Send,
{
    match execution {
        Execution::Serial => (0..rows).map(f).collect(),
        Execution::Parallel => (0..rows).into_par_iter().map(f).collect(),
    }
}

fn assemble(rows: usize, cols: usize, values: Vec<Vec<f64>>) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |i, j| values[i][j])
}

/// Shifted eigenvalues `λ/2 - μ`. Positive for every retained `μ < λ ≤ 0`,
/// and `(λ/2 - κ) + (λ/2 - ρ) = λ - κ - ρ`.
fn half_shifted(spectrum: &SpectralDecomposition, lambda: f64) -> Vec<f64> {
    spectrum
        .eigenvalues
        .iter()
        .map(|mu| {
            let shifted = lambda / 2.0 - mu;
            assert!(shifted > 0.0, "retained eigenvalue {mu} not below lambda {lambda}");
            shifted
        })
        .collect()
}

/// Double sum evaluated term by term: `O(N·M)` powers per pixel.
fn direct_sums(
    spectra: &SeparatedSpectra,
    lambda: f64,
    gamma: f64,
    execution: Execution,
) -> DMatrix<f64> {
    let (rows, cols) = (spectra.rows(), spectra.cols());
    let row_shift: Vec<Vec<f64>> = spectra.row_spectra.iter().map(|s| half_shifted(s, lambda)).collect();
    let col_shift: Vec<Vec<f64>> = spectra.col_spectra.iter().map(|s| half_shifted(s, lambda)).collect();

    let values = run_rows(rows, execution, |i| {
        let row = &spectra.row_spectra[i];
        (0..cols)
            .map(|j| {
                let col = &spectra.col_spectra[j];
                let mut total = 0.0;
                for (n, a) in row_shift[i].iter().enumerate() {
                    let phi = row.eigenvectors[(j, n)];
                    let mut inner = 0.0;
                    for (m, b) in col_shift[j].iter().enumerate() {
                        let chi = col.eigenvectors[(i, m)];
                        inner += (a + b).powf(gamma) * chi * chi;
                    }
                    total += phi * phi * inner;
                }
                total
            })
            .collect()
    });
    assemble(rows, cols, values)
}

/// Integer `γ`: expand `(a + b)^γ = Σ_k C(γ,k) a^k b^{γ-k}` so the double
/// sum factors into per-row and per-column moments. Every term is
/// nonnegative, so the expansion loses no precision to cancellation.
fn binomial_sums(
    spectra: &SeparatedSpectra,
    lambda: f64,
    gamma: u32,
    execution: Execution,
) -> DMatrix<f64> {
    let (rows, cols) = (spectra.rows(), spectra.cols());
    let order = gamma as usize + 1;

    // moments[s][k * len + x] = Σ_n shift_n^k · v_n[x]²
    let moments = |spectrum: &SpectralDecomposition, len: usize| -> Vec<f64> {
        let shift = half_shifted(spectrum, lambda);
        let mut out = vec![0.0; order * len];
        for (n, a) in shift.iter().enumerate() {
            let v = spectrum.eigenvectors.column(n);
            let mut ak = 1.0;
            for k in 0..order {
                let block = &mut out[k * len..(k + 1) * len];
                for (dst, x) in block.iter_mut().zip(v.iter()) {
                    *dst += ak * x * x;
                }
                ak *= a;
            }
        }
        out
    };
    let row_moments: Vec<Vec<f64>> = spectra.row_spectra.iter().map(|s| moments(s, cols)).collect();
    let col_moments: Vec<Vec<f64>> = spectra.col_spectra.iter().map(|s| moments(s, rows)).collect();

    let binom: Vec<f64> = (0..order)
        .scan(1.0, |c, k| {
            let out = *c;
            *c = *c * (gamma as usize - k) as f64 / (k + 1) as f64;
            Some(out)
        })
        .collect();

    let values = run_rows(rows, execution, |i| {
        let rm = &row_moments[i];
        (0..cols)
            .map(|j| {
                let cm = &col_moments[j];
                (0..order)
                    .map(|k| binom[k] * rm[k * cols + j] * cm[(order - 1 - k) * rows + i])
                    .sum()
            })
            .collect()
    });
    assemble(rows, cols, values)
}

/// Separated eigenfunction `ψ[i,j] = φ_{i,n}[j] · ϕ_{j,m}[i]` for fixed
/// 0-based pair indices `(n, m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenfunctionField {
    pub values: DMatrix<f64>,
    /// False where row `i` has fewer than `n+1` or column `j` fewer than
    /// `m+1` retained pairs; those pixels hold zero.
    pub defined: DMatrix<bool>,
}

impl EigenfunctionField {
    pub fn defined_count(&self) -> usize {
        self.defined.iter().filter(|d| **d).count()
    }
}

pub fn export_eigenfunction(spectra: &SeparatedSpectra, n: usize, m: usize) -> Result<EigenfunctionField> {
    let (rows, cols) = (spectra.rows(), spectra.cols());
    let mut values = DMatrix::zeros(rows, cols);
    let mut defined = DMatrix::from_element(rows, cols, false);
    for i in 0..rows {
        let row = &spectra.row_spectra[i];
        if n >= row.count_negative() {
            continue;
        }
        for j in 0..cols {
            let col = &spectra.col_spectra[j];
            if m >= col.count_negative() {
                continue;
            }
            values[(i, j)] = row.eigenvectors[(j, n)] * col.eigenvectors[(i, m)];
            defined[(i, j)] = true;
        }
    }
    if !defined.iter().any(|d| *d) {
        return Err(Error::InvalidParameter(format!(
            "eigenpair ({n}, {m}) exists for no pixel (max row count {}, max column count {})",
            spectra.row_counts().into_iter().max().unwrap_or(0),
            spectra.col_counts().into_iter().max().unwrap_or(0)
        )));
    }
    Ok(EigenfunctionField { values, defined })
}
