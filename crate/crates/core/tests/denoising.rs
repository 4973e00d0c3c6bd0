use std::path::PathBuf;

use scsa_core::{add_noise, imageio, log_spaced, sweep, NoiseSpec, Objective, ScsaParams, SweepSpec};

#[test]
fn heavy_noise_error_curve_has_an_interior_minimum() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/camera_crop128.pgm");
    let clean = imageio::load(path).unwrap();
    let noisy = add_noise(&clean, &NoiseSpec::new(75.0, 75).unwrap()).unwrap();
    let spec = SweepSpec::new(log_spaced(1.0, 2.2, 7).unwrap(), vec![4.0], Objective::MinMse, clean.clone()).unwrap();
    let result = sweep(&noisy, &spec, &ScsaParams::pixels(1.0, 4.0).unwrap()).unwrap();

    let curve: Vec<f64> = result.table.iter().map(|r| r.mse).collect();
    let best = (0..curve.len()).min_by(|&a, &b| curve[a].total_cmp(&curve[b])).unwrap();
    assert!(best > 0 && best < curve.len() - 1, "optimum on the boundary: {curve:?}");
    assert!(curve[..=best].windows(2).all(|w| w[1] <= w[0]), "{curve:?}");
    assert!(curve[best..].windows(2).all(|w| w[1] >= w[0]), "{curve:?}");
    assert_eq!(result.best(Objective::MinMse).h, result.table[best].h);
}
