//! Semi-classical signal analysis (SCSA) of 1D signals and grayscale images.
//!
//! A nonnegative signal is used as the potential `V` of the operator
//! `-h² d²/dx² - V`; its negative eigenvalues and squared eigenfunctions
//! rebuild the signal. Images are handled by separation of variables: one 1D
//! operator per row and per column, combined pixel by pixel.
//!
//! ```
//! use nalgebra::DMatrix;
//! use scsa_core::{reconstruct_2d, Image, ScsaParams};
//!
//! let img = Image::new(DMatrix::from_fn(16, 16, |i, j| 0.4 + 0.02 * (i + j) as f64)).unwrap();
//! let report = reconstruct_2d(&img, &ScsaParams::pixels(0.2, 4.0).unwrap()).unwrap();
//! assert_eq!(report.neg_counts_rows.len(), 16);
//! ```

pub mod error;
pub mod image;
pub mod imageio;
pub mod metrics;
pub mod noise;
pub mod scsa1d;
pub mod scsa2d;
pub mod spectral;
pub mod synth;
pub mod tuning;

pub use error::{Error, Result, Slice};
pub use image::Image;
pub use imageio::ImageFormat;
pub use metrics::{mse, mssim, psnr, psnr_from_mse, ssim_map, MetricBundle};
pub use noise::{add_noise, snr_db, NoiseSpec, PRNG_NAME};
pub use scsa1d::{reconstruct_1d, semiclassical_constant_1d, ScsaParams, Slice1D};
pub use scsa2d::{
    decompose_image, export_eigenfunction, reconstruct_2d, reconstruct_from_spectra, semiclassical_constant_2d,
    EigenfunctionField, Execution, ReconstructionReport, SeparatedSpectra,
};
pub use spectral::{build_diff_matrix, negative_spectrum, DiffMatrix, SchrodingerOperator1D, SpectralDecomposition};
pub use synth::{checkerboard, example1_image, GridSpec, ScaledImage};
pub use tuning::{log_spaced, sweep, BestCell, Objective, SweepResult, SweepRow, SweepSpec};
