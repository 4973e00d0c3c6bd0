use nalgebra::DMatrix;
use proptest::prelude::*;
use scsa_core::imageio::{decode, encode};
use scsa_core::scsa2d::decompose_image_with;
use scsa_core::{
    add_noise, mse, mssim, psnr, reconstruct_1d, reconstruct_2d, snr_db, Execution, Image, ImageFormat, NoiseSpec,
    ScsaParams, Slice1D,
};

fn unit_matrix(max_side: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (4..=max_side, 4..=max_side).prop_flat_map(|(r, c)| {
        proptest::collection::vec(0.0f64..=1.0, r * c).prop_map(move |v| DMatrix::from_vec(r, c, v))
    })
}

fn format() -> impl Strategy<Value = ImageFormat> {
    prop_oneof![Just(ImageFormat::PgmP2), Just(ImageFormat::PgmP5), Just(ImageFormat::Png)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn slice_counts_never_grow_with_h(pixels in unit_matrix(12), h in 0.05f64..0.6, factor in 1.0f64..3.0) {
        let img = Image::new(pixels).unwrap();
        let small = decompose_image_with(&img, &ScsaParams::pixels(h, 1.0).unwrap(), Execution::Serial).unwrap();
        let large = decompose_image_with(&img, &ScsaParams::pixels(h * factor, 1.0).unwrap(), Execution::Serial).unwrap();
        for (a, b) in small.row_counts().iter().zip(large.row_counts()) {
            prop_assert!(b <= *a);
        }
        for (a, b) in small.col_counts().iter().zip(large.col_counts()) {
            prop_assert!(b <= *a);
        }
    }

    #[test]
    fn transposing_the_image_transposes_the_reconstruction(pixels in unit_matrix(10), h in 0.1f64..0.5, gamma in 0.5f64..5.0) {
        let img = Image::new(pixels).unwrap();
        let params = ScsaParams::pixels(h, gamma).unwrap();
        let direct = reconstruct_2d(&img, &params).unwrap().reconstructed;
        let swapped = reconstruct_2d(&img.transpose(), &params).unwrap().reconstructed;
        prop_assert!((direct.transpose() - swapped).amax() < 1e-12);
    }

    #[test]
    fn reconstruction_is_finite_and_nonnegative(pixels in unit_matrix(10), h in 0.05f64..2.0, gamma in 0.0f64..6.0) {
        let img = Image::new(pixels).unwrap();
        let out = reconstruct_2d(&img, &ScsaParams::pixels(h, gamma.max(1e-3)).unwrap()).unwrap();
        prop_assert!(out.reconstructed.iter().all(|v| v.is_finite() && *v >= 0.0));
        prop_assert_eq!(out.neg_counts_rows.len(), img.rows());
        prop_assert_eq!(out.neg_counts_cols.len(), img.cols());
    }

    #[test]
    fn metrics_are_symmetric(a in unit_matrix(16), seed in any::<u64>()) {
        let noisy = add_noise(&Image::new(a.clone()).unwrap(), &NoiseSpec::new(15.0, seed).unwrap()).unwrap();
        let b = noisy.pixels();
        prop_assert_eq!(mse(&a, b).unwrap(), mse(b, &a).unwrap());
        prop_assert!(mse(&a, b).unwrap() >= 0.0);
        prop_assert!((mssim(&a, b).unwrap() - mssim(b, &a).unwrap()).abs() < 1e-12);
        prop_assert!(mssim(&a, b).unwrap() <= 1.0 + 1e-12);
        let m = mse(&a, b).unwrap();
        if m > 0.0 {
            prop_assert!((psnr(&a, b, 1.0).unwrap() + 10.0 * m.log10()).abs() < 1e-9);
        }
    }

    #[test]
    fn snr_drops_as_noise_grows(a in unit_matrix(16), seed in any::<u64>(), sigma in 5.0f64..40.0) {
        prop_assume!(a.iter().any(|v| *v > 0.0));
        let img = Image::new(a.clone()).unwrap();
        let low = add_noise(&img, &NoiseSpec::new(sigma, seed).unwrap().without_clipping());
        let high = add_noise(&img, &NoiseSpec::new(2.0 * sigma, seed).unwrap().without_clipping());
        if let (Ok(low), Ok(high)) = (low, high) {
            prop_assert!(snr_db(&a, high.pixels()).unwrap() < snr_db(&a, low.pixels()).unwrap());
        }
    }

    #[test]
    fn save_load_save_is_byte_stable(a in unit_matrix(20), fmt in format()) {
        let first = encode(&a, fmt).unwrap();
        let loaded = decode(&first).unwrap();
        prop_assert!((loaded.pixels() - &a).amax() <= 1.0 / 510.0 + 1e-12);
        let second = encode(loaded.pixels(), fmt).unwrap();
        prop_assert_eq!(first, second);
    }

    #[test]
    fn one_dimensional_output_is_repeatable_and_nonnegative(samples in proptest::collection::vec(0.0f64..=1.0, 8..40), h in 0.02f64..0.5) {
        let signal = Slice1D::new(samples, 1.0).unwrap();
        let a = reconstruct_1d(&signal, &ScsaParams::pixels(h, 0.5).unwrap()).unwrap();
        let b = reconstruct_1d(&signal, &ScsaParams::pixels(h, 0.5).unwrap()).unwrap();
        prop_assert_eq!(a.samples(), b.samples());
        prop_assert!(a.samples().iter().all(|v| v.is_finite() && *v >= 0.0));
    }
}

/// A smooth positive bump is recovered more accurately as `h` shrinks, until
/// nearly every mode of the grid is bound.
#[test]
fn one_dimensional_error_shrinks_with_h() {
    let n = 128;
    let delta = 0.05;
    let samples: Vec<f64> = (0..n)
        .map(|i| {
            let x = i as f64 * delta - 3.2;
            2.0 * (-x * x).exp() + 0.5 * (-(x - 1.0).powi(2) * 4.0).exp()
        })
        .collect();
    let signal = Slice1D::new(samples.clone(), delta).unwrap();
    let norm: f64 = samples.iter().map(|v| v * v).sum::<f64>().sqrt();
    let errors: Vec<f64> = [0.4, 0.2, 0.1, 0.05]
        .iter()
        .map(|&h| {
            let out = reconstruct_1d(&signal, &ScsaParams::new(h, 0.5, 0.0, delta).unwrap()).unwrap();
            let err: f64 = out.samples().iter().zip(&samples).map(|(a, b)| (a - b).powi(2)).sum();
            err.sqrt() / norm
        })
        .collect();
    for w in errors.windows(2) {
        assert!(w[1] < w[0], "{errors:?}");
    }
    assert!(errors[3] < 0.02, "{errors:?}");
}
