//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scsa_core::imageio::{self, encode};
use scsa_core::scsa2d::{decompose_image_with, reconstruct_2d_with};
use scsa_core::{
    add_noise, build_diff_matrix, checkerboard, example1_image, log_spaced, mse, mssim, negative_spectrum, psnr,
    psnr_from_mse, reconstruct_2d, semiclassical_constant_1d, semiclassical_constant_2d, snr_db, sweep, Execution,
    GridSpec, Image, ImageFormat, NoiseSpec, Objective, SchrodingerOperator1D, ScsaParams, SweepSpec,
};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn camera_crop() -> Image {
    let img = imageio::load(data_path("camera_crop128.pgm")).expect("camera crop fixture");
    assert_eq!(img.shape(), (128, 128));
    img
}

fn surface64() -> Image {
    example1_image(&GridSpec::example1_with_samples(64).unwrap()).unwrap().image
}

// ---------------------------------------------------------------------------
// 1. constants

fn constants() -> Outcome {
    ensure!(semiclassical_constant_1d(0.5).unwrap() == 0.25, "1D constant at 1/2 is not exactly 0.25");

    let mut worst: f64 = 0.0;
    for k in 0..60 {
        let g = 0.1 * k as f64 + 0.03 * (k % 7) as f64;
        let a = semiclassical_constant_1d(g).unwrap();
        let b = semiclassical_constant_1d(g + 1.0).unwrap();
        worst = worst.max((b / a - (g + 1.0) / (g + 1.5)).abs());

        let direct = statrs::function::gamma::gamma(g + 1.0) / (2.0 * PI.sqrt() * statrs::function::gamma::gamma(g + 1.5));
        ensure!((a - direct).abs() <= 1e-12 * direct, "1D constant at {g}: {a} vs gamma ratio {direct}");

        if g > 0.0 {
            let a2 = semiclassical_constant_2d(g).unwrap();
            let b2 = semiclassical_constant_2d(g + 1.0).unwrap();
            worst = worst.max((b2 / a2 - (g + 1.0) / (g + 2.0)).abs());
            ensure!((a2 * 4.0 * PI * (g + 1.0) - 1.0).abs() < 1e-12, "2D constant at {g}");
        }
    }
    ensure!(worst <= 1e-12, "recurrence error {worst:e}");
    Ok(format!("recurrence error {worst:.1e}"))
}

// ---------------------------------------------------------------------------
// 2. spectral oracle

fn spectral_oracle() -> Outcome {
    let mut worst_rel: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    for &n in &[16usize, 64] {
        for &(delta, h, level) in &[(2.0 * PI / n as f64, 0.37, 2.0), (0.1, 0.013, 1.3), (1.0, 0.11, 0.8)] {
            let diff = build_diff_matrix(n, delta).unwrap();
            let potential = vec![level; n];
            let op = SchrodingerOperator1D::new(h, &potential, &diff, false).unwrap();
            let spec = negative_spectrum(&op, 0.0).unwrap();

            let half = n as i64 / 2;
            let mut expected: Vec<f64> = (-half..n as i64 - half)
                .map(|k| {
                    let w = 2.0 * PI * k as f64 / (n as f64 * delta);
                    h * h * w * w - level
                })
                .filter(|&mu| mu < 0.0)
                .collect();
            expected.sort_by(f64::total_cmp);

            ensure!(
                spec.eigenvalues.len() == expected.len(),
                "n={n} delta={delta}: {} negative eigenvalues, expected {}",
                spec.eigenvalues.len(),
                expected.len()
            );
            ensure!(!expected.is_empty(), "degenerate oracle case n={n}");
            for (got, want) in spec.eigenvalues.iter().zip(&expected) {
                worst_rel = worst_rel.max((got - want).abs() / want.abs());
            }
            worst_res = worst_res.max(spec.max_relative_residual(&op.assemble().unwrap()));
        }
    }
    ensure!(worst_rel <= 1e-8, "eigenvalue relative error {worst_rel:e}");
    ensure!(worst_res <= 1e-10, "eigenvector residual {worst_res:e}");
    Ok(format!("max rel err {worst_rel:.1e}, max residual {worst_res:.1e}"))
}

// ---------------------------------------------------------------------------
// 3. brute-force equivalence

/// Second-derivative matrix from its Fourier definition:
/// `(1/n) Σ_k -(2πk/(nΔ))² cos(2πk(j-l)/n)`.
fn fourier_second_derivative(n: usize, delta: f64) -> DMatrix<f64> {
    let lo = -(n as i64 / 2);
    let hi = lo + n as i64;
    DMatrix::from_fn(n, n, |j, l| {
        let d = j as f64 - l as f64;
        (lo..hi)
            .map(|k| {
                let w = 2.0 * PI * k as f64 / (n as f64 * delta);
                -w * w * (2.0 * PI * k as f64 * d / n as f64).cos()
            })
            .sum::<f64>()
            / n as f64
    })
}

/// Eigenvalues below `lambda` and the squared eigenfunctions at `at`,
/// normalized so that `Δ·Σψ² = 1`.
fn slice_pairs(samples: &[f64], h: f64, lambda: f64, delta: f64, at: usize) -> Vec<(f64, f64)> {
    let n = samples.len();
    let mut m = fourier_second_derivative(n, delta) * (-h * h);
    for (i, v) in samples.iter().enumerate() {
        m[(i, i)] -= 0.5 * v;
    }
    let eig = SymmetricEigen::new(m);
    (0..n)
        .filter(|&k| eig.eigenvalues[k] < lambda)
        .map(|k| {
            let v = eig.eigenvectors.column(k);
            (eig.eigenvalues[k], v[at] * v[at] / (delta * v.norm_squared()))
        })
        .collect()
}

fn naive_reconstruct(img: &DMatrix<f64>, h: f64, gamma: f64, lambda: f64, delta: f64) -> DMatrix<f64> {
    let l2 = 1.0 / (4.0 * PI * (gamma + 1.0));
    DMatrix::from_fn(img.nrows(), img.ncols(), |i, j| {
        let row: Vec<f64> = img.row(i).iter().copied().collect();
        let col: Vec<f64> = img.column(j).iter().copied().collect();
        let along_row = slice_pairs(&row, h, lambda, delta, j);
        let along_col = slice_pairs(&col, h, lambda, delta, i);
        let mut sum = 0.0;
        for &(kappa, psi2) in &along_row {
            for &(rho, phi2) in &along_col {
                sum += (lambda - kappa - rho).powf(gamma) * psi2 * phi2;
            }
        }
        -lambda + (h * h / l2 * sum).powf(1.0 / (1.0 + gamma))
    })
}

fn brute_force_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5c5a);
    let gammas = [0.5, 1.0, 2.0, 3.5, 4.0];
    let mut worst: f64 = 0.0;
    for case in 0..10 {
        let rows = rng.random_range(8..=16);
        let cols = rng.random_range(8..=16);
        let pixels = DMatrix::from_fn(rows, cols, |_, _| rng.random::<f64>());
        let h = rng.random_range(0.08..0.4);
        let gamma = gammas[case % gammas.len()];
        let lambda = if case % 3 == 2 { -0.03 } else { 0.0 };
        let delta = if case % 2 == 0 { 1.0 } else { 0.5 };

        let img = Image::with_metadata(pixels.clone(), delta, 1.0).unwrap();
        let params = ScsaParams::new(h, gamma, lambda, delta).unwrap();
        let fast = reconstruct_2d(&img, &params).unwrap().reconstructed;
        let slow = naive_reconstruct(&pixels, h, gamma, lambda, delta);
        let err = (&fast - &slow).amax();
        ensure!(err <= 1e-10, "case {case} ({rows}x{cols}, h={h:.3}, gamma={gamma}): max diff {err:e}");
        worst = worst.max(err);
    }
    Ok(format!("max per-pixel diff {worst:.1e} over 10 images"))
}

// ---------------------------------------------------------------------------
// 4. eigen-count monotonicity

fn counts_non_increasing(img: &Image, hs: &[f64], label: &str) -> Result<usize, String> {
    let mut previous: Option<(Vec<usize>, Vec<usize>)> = None;
    let mut first_total = 0;
    for (k, &h) in hs.iter().enumerate() {
        let params = ScsaParams::new(h, 4.0, 0.0, img.delta()).unwrap();
        let spectra = decompose_image_with(img, &params, Execution::Parallel).map_err(|e| e.to_string())?;
        let (rows, cols) = (spectra.row_counts(), spectra.col_counts());
        if k == 0 {
            first_total = spectra.total_negative();
        }
        if let Some((prev_rows, prev_cols)) = &previous {
            for (axis, now, before) in [("row", &rows, prev_rows), ("column", &cols, prev_cols)] {
                if let Some(idx) = (0..now.len()).find(|&i| now[i] > before[i]) {
                    return Err(format!(
                        "{label}: {axis} {idx} count rises from {} to {} at h={h}",
                        before[idx], now[idx]
                    ));
                }
            }
        }
        previous = Some((rows, cols));
    }
    let (rows, cols) = previous.unwrap();
    let last_total: usize = rows.iter().chain(&cols).sum();
    if last_total >= first_total {
        return Err(format!("{label}: total count did not decrease ({first_total} -> {last_total})"));
    }
    Ok(first_total - last_total)
}

fn count_monotonicity() -> Outcome {
    let camera = camera_crop();
    let surface = example1_image(&GridSpec::example1()).unwrap().image;
    let drop_a = counts_non_increasing(&camera, &log_spaced(0.1, 3.0, 6).unwrap(), "camera crop")?;
    let drop_b = counts_non_increasing(&surface, &log_spaced(0.005, 0.2, 6).unwrap(), "analytic surface")?;
    Ok(format!("totals drop by {drop_a} (camera) and {drop_b} (surface, 201x201)"))
}

// ---------------------------------------------------------------------------
// 5. convergence in h

fn relative_l2(reference: &DMatrix<f64>, estimate: &DMatrix<f64>) -> f64 {
    ((reference - estimate).norm_squared() / reference.norm_squared()).sqrt()
}

fn convergence_in_h() -> Outcome {
    let img = surface64();
    let mut hs = log_spaced(0.005, 0.2, 8).unwrap();
    hs.reverse();

    let slots = 2 * 64 * 64;
    let mut rows = Vec::new();
    for &h in &hs {
        let params = ScsaParams::new(h, 4.0, 0.0, img.delta()).unwrap();
        let report = reconstruct_2d(&img, &params).unwrap();
        let out = report.image();
        rows.push((h, mse(img.pixels(), out.pixels()).unwrap(), relative_l2(img.pixels(), out.pixels()), report.total_negative()));
    }

    let floor = (0..rows.len()).min_by(|&a, &b| rows[a].1.total_cmp(&rows[b].1)).unwrap();
    ensure!(floor >= 4, "minimum reached after only {floor} refinements: {rows:?}");
    for w in rows[..=floor].windows(2) {
        ensure!(w[1].1 <= w[0].1, "MSE rises from {:e} to {:e} between h={} and h={}", w[0].1, w[1].1, w[0].0, w[1].0);
    }
    // Past the floor the operator is saturated: almost every mode is bound.
    for r in &rows[floor + 1..] {
        let fill = r.3 as f64 / slots as f64;
        ensure!(fill >= 0.75, "MSE rose at h={} with only {:.0}% of modes bound", r.0, 100.0 * fill);
    }
    let best = rows[floor];
    ensure!(best.2 <= 0.05, "best relative L2 error {:.4} > 0.05", best.2);
    Ok(format!(
        "MSE non-increasing over {} points to floor at h={:.4}, rel L2 {:.2}%",
        floor + 1,
        best.0,
        100.0 * best.2
    ))
}

// ---------------------------------------------------------------------------
// 6. best exponent

fn gamma_optimum() -> Outcome {
    let img = surface64();
    let gammas: Vec<f64> = (1..=6).map(f64::from).collect();
    let spec = SweepSpec::new(log_spaced(0.004, 0.1, 25).unwrap(), gammas.clone(), Objective::MinMse, img.clone()).unwrap();
    let base = ScsaParams::new(0.01, 4.0, 0.0, img.delta()).unwrap();
    let result = sweep(&img, &spec, &base).unwrap();

    let per_gamma: Vec<(f64, f64, f64)> = gammas
        .iter()
        .map(|&g| {
            let best = result.curve(g).into_iter().min_by(|a, b| a.mse.total_cmp(&b.mse)).unwrap();
            (g, best.h, best.mse)
        })
        .collect();
    let (g, h, m) = per_gamma.iter().copied().min_by(|a, b| a.2.total_cmp(&b.2)).unwrap();
    let summary: Vec<String> = per_gamma.iter().map(|(g, h, m)| format!("g{g}:{m:.2e}@{h:.4}")).collect();
    ensure!((g - 4.0).abs() <= 1.0, "selected gamma {g} (h={h}, mse={m:e}); {}", summary.join(" "));
    Ok(format!("selected gamma {g} at h={h:.4}; {}", summary.join(" ")))
}

// ---------------------------------------------------------------------------
// 7. denoising

fn denoising() -> Outcome {
    let clean = camera_crop();
    let mut lines = Vec::new();
    for (sigma, seed) in [(20.0, 20u64), (30.0, 30), (50.0, 50)] {
        let noisy = add_noise(&clean, &NoiseSpec::new(sigma, seed).unwrap()).unwrap();
        let noisy_psnr = psnr(clean.pixels(), noisy.pixels(), 1.0).unwrap();
        let noisy_mssim = mssim(clean.pixels(), noisy.pixels()).unwrap();

        let spec = SweepSpec::new(log_spaced(0.3, 3.0, 10).unwrap(), vec![2.0, 3.0, 4.0], Objective::MaxPsnr, clean.clone()).unwrap();
        let result = sweep(&noisy, &spec, &ScsaParams::pixels(1.0, 4.0).unwrap()).unwrap();
        let denoised = result.best_reconstruction.image();
        let out_psnr = psnr(clean.pixels(), denoised.pixels(), 1.0).unwrap();
        let out_mssim = mssim(clean.pixels(), denoised.pixels()).unwrap();
        let best = result.best(Objective::MaxPsnr);

        ensure!(
            out_psnr - noisy_psnr >= 2.0,
            "sigma {sigma}: PSNR {noisy_psnr:.2} -> {out_psnr:.2} dB (gain < 2 dB)"
        );
        ensure!(out_mssim > noisy_mssim, "sigma {sigma}: MSSIM {noisy_mssim:.3} -> {out_mssim:.3}");
        lines.push(format!(
            "s{sigma}: {noisy_psnr:.2}->{out_psnr:.2} dB, mssim {noisy_mssim:.3}->{out_mssim:.3} (h={:.3}, g={})",
            best.h, best.gamma
        ));
    }
    Ok(lines.join("; "))
}

// ---------------------------------------------------------------------------
// 8. noise anchor

fn noise_anchor() -> Outcome {
    let board = checkerboard(128, 16, 0.3, 0.7).unwrap();
    let mut lines = Vec::new();
    for (sigma, target) in [(30.0, 12.58), (50.0, 8.27)] {
        let noisy = add_noise(&board, &NoiseSpec::new(sigma, 1).unwrap()).unwrap();
        let snr = snr_db(board.pixels(), noisy.pixels()).unwrap();
        ensure!((snr - target).abs() <= 1.5, "sigma {sigma}: SNR {snr:.2} dB, target {target} +- 1.5");
        lines.push(format!("s{sigma}: {snr:.2} dB (target {target})"));
    }
    Ok(lines.join("; "))
}

// ---------------------------------------------------------------------------
// 9. metric identities

fn metric_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = DMatrix::from_fn(64, 48, |_, _| rng.random::<f64>());
    let b = a.map(|v| (v + 0.1 * (rng.random::<f64>() - 0.5)).clamp(0.0, 1.0));

    let self_ssim = mssim(&a, &a).unwrap();
    ensure!((self_ssim - 1.0).abs() <= 1e-9, "mssim(a, a) = {self_ssim}");

    let m = mse(&a, &b).unwrap();
    for scale in [1.0, 2.0, 255.0] {
        let p = psnr(&a, &b, scale).unwrap();
        let want = 10.0 * (scale * scale / m).log10();
        ensure!((p - want).abs() <= 1e-9, "psnr at L={scale}: {p} vs {want}");
    }

    let anchor = psnr_from_mse(0.0027, 1.0);
    ensure!((anchor - 25.686).abs() <= 1e-3, "psnr(mse=0.0027) = {anchor}");
    Ok(format!("mssim(a,a)-1 = {:.1e}, anchor {anchor:.4} dB", self_ssim - 1.0))
}

// ---------------------------------------------------------------------------
// 10. determinism

fn pipeline_bytes(execution: Execution) -> Vec<Vec<u8>> {
    let clean = surface64();
    let noisy = add_noise(&clean, &NoiseSpec::new(25.0, 77).unwrap()).unwrap();
    let params = ScsaParams::new(0.02, 4.0, 0.0, clean.delta()).unwrap();
    let mut report = reconstruct_2d_with(&noisy, &params, execution).unwrap();
    report.compare_to(&clean).unwrap();

    let spec = SweepSpec::new(vec![0.015, 0.03], vec![3.0, 4.0], Objective::MinMse, clean.clone()).unwrap();
    let table = sweep(&noisy, &spec, &params).unwrap().to_csv();
    let table_without_timing: String = table
        .lines()
        .map(|l| l.rsplit_once(',').unwrap().0.to_string() + "\n")
        .collect();

    vec![
        encode(noisy.pixels(), ImageFormat::PgmP5).unwrap(),
        encode(&report.reconstructed, ImageFormat::Png).unwrap(),
        encode(&report.reconstructed, ImageFormat::PgmP2).unwrap(),
        report.reconstructed.iter().flat_map(|v| v.to_le_bytes()).collect(),
        serde_json::to_vec_pretty(&report).unwrap(),
        table_without_timing.into_bytes(),
    ]
}

fn determinism() -> Outcome {
    let first = pipeline_bytes(Execution::Parallel);
    let second = pipeline_bytes(Execution::Parallel);
    let serial = pipeline_bytes(Execution::Serial);
    for (k, ((a, b), c)) in first.iter().zip(&second).zip(&serial).enumerate() {
        ensure!(a == b, "artifact {k} differs between identical runs");
        ensure!(a == c, "artifact {k} differs between serial and parallel runs");
    }
    let total: usize = first.iter().map(Vec::len).sum();
    Ok(format!("{} artifacts, {total} bytes identical across 3 runs", first.len()))
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("semiclassical constants", constants),
        ("spectral oracle", spectral_oracle),
        ("brute-force equivalence", brute_force_equivalence),
        ("eigen-count monotonicity", count_monotonicity),
        ("convergence in h", convergence_in_h),
        ("gamma optimum", gamma_optimum),
        ("denoising efficacy", denoising),
        ("noise anchor", noise_anchor),
        ("metric identities", metric_identities),
        ("determinism", determinism),
    ];

    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let id = k + 1;
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str()) || *f == id.to_string()) {
            continue;
        }
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS  {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failures += 1;
                println!("criterion {id:>2} FAIL  {name} ({secs:.1}s): {detail}");
            }
        }
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
