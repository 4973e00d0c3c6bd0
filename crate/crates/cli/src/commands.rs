use std::fmt::Write as _;
use std::path::Path;

use scsa_core::imageio::{self, encode};
use scsa_core::scsa2d::decompose_image;
use scsa_core::synth::example1_image;
use scsa_core::{
    add_noise, checkerboard, log_spaced, reconstruct_2d, snr_db, sweep as run_sweep, GridSpec, Image, ImageFormat,
    MetricBundle, NoiseSpec, Objective, ScsaParams, SweepResult, SweepSpec, PRNG_NAME,
};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::report::{envelope, number, OutputDir, Stopwatch, TableFormat};
use crate::{
    DenoiseArgs, EigreportArgs, GridArgs, MetricsArgs, OperatorArgs, ReconstructArgs, SweepArgs, SynthArgs, SynthKind,
};

fn image_extension(format: ImageFormat) -> &'static str {
    match format {
        ImageFormat::Png => "png",
        ImageFormat::PgmP2 | ImageFormat::PgmP5 => "pgm",
    }
}

fn load(path: &Path, operator: Option<&OperatorArgs>) -> Result<Image, CliError> {
    let mut img = imageio::load(path)?;
    if let Some(op) = operator {
        img.set_delta(op.delta)?;
    }
    Ok(img)
}

fn params(h: f64, gamma: f64, op: &OperatorArgs) -> Result<ScsaParams, CliError> {
    Ok(ScsaParams::new(h, gamma, op.lambda, op.delta)?)
}

fn h_grid(grid: &GridArgs) -> Result<Vec<f64>, CliError> {
    Ok(log_spaced(grid.h_min, grid.h_max, grid.h_steps)?)
}

fn metrics_json(m: &MetricBundle) -> Value {
    json!({
        "mse": number(m.mse),
        "psnr_db": number(m.psnr_db),
        "mssim": number(m.mssim),
        "intensity_scale": m.intensity_scale,
    })
}

fn input_json(path: &Path, img: &Image) -> Value {
    json!({ "path": path.display().to_string(), "rows": img.rows(), "cols": img.cols() })
}

fn counts_table(rows: &[usize], cols: &[usize], format: TableFormat) -> Result<String, CliError> {
    Ok(match format {
        TableFormat::Csv => {
            let mut out = String::from("axis,index,neg_eigs\n");
            for (axis, counts) in [("row", rows), ("col", cols)] {
                for (i, c) in counts.iter().enumerate() {
                    let _ = writeln!(out, "{axis},{i},{c}");
                }
            }
            out
        }
        TableFormat::Json => serde_json::to_string_pretty(&json!({ "rows": rows, "cols": cols }))? + "\n",
    })
}

fn sweep_table(result: &SweepResult, format: TableFormat) -> Result<String, CliError> {
    Ok(match format {
        TableFormat::Csv => result.to_csv(),
        TableFormat::Json => serde_json::to_string_pretty(&result.table)? + "\n",
    })
}

fn best_cells(result: &SweepResult) -> Value {
    let mut map = serde_json::Map::new();
    for objective in Objective::ALL {
        let cell = result.best(objective);
        let row = result.row(cell).expect("best cell comes from the table");
        map.insert(
            objective.name().into(),
            json!({
                "h": cell.h,
                "gamma": cell.gamma,
                "mse": number(row.mse),
                "psnr_db": number(row.psnr_db),
                "mssim": number(row.mssim),
            }),
        );
    }
    Value::Object(map)
}

fn grid_json(h_values: &[f64], gammas: &[f64], op: &OperatorArgs) -> Value {
    json!({ "h_values": h_values, "gamma_values": gammas, "lambda": op.lambda, "delta": op.delta })
}

pub fn reconstruct(a: ReconstructArgs) -> Result<(), CliError> {
    let mut clock = Stopwatch::start();
    let img = load(&a.input, Some(&a.operator))?;
    let p = params(a.h, a.gamma, &a.operator)?;
    let out = OutputDir::create(&a.output.out)?;
    clock.lap("load");

    let mut report = reconstruct_2d(&img, &p)?;
    clock.lap("reconstruct");
    let metrics = report.compare_to(&img)?.clone();

    let image_name = format!("reconstructed.{}", image_extension(a.output.image_format));
    let counts_name = format!("counts.{}", a.output.format.extension());
    out.write(&image_name, encode(&report.reconstructed, a.output.image_format)?)?;
    out.write(
        &counts_name,
        counts_table(&report.neg_counts_rows, &report.neg_counts_cols, a.output.format)?,
    )?;
    out.write_json(
        "report.json",
        &envelope(
            "reconstruct",
            json!({
                "input": input_json(&a.input, &img),
                "params": p,
                "neg_counts_rows": report.neg_counts_rows,
                "neg_counts_cols": report.neg_counts_cols,
                "total_negative": report.total_negative(),
                "empty_row_count": report.empty_row_count,
                "empty_col_count": report.empty_col_count,
                "metrics": metrics_json(&metrics),
                "outputs": { "image": image_name, "counts": counts_name },
            }),
        ),
    )?;
    clock.lap("write");
    out.write_json("timings.json", &clock.to_json("reconstruct"))
}

pub fn denoise(a: DenoiseArgs) -> Result<(), CliError> {
    let mut clock = Stopwatch::start();
    let clean = load(&a.input, Some(&a.operator))?;
    let noise = NoiseSpec::new(a.sigma, a.seed)?;
    let h_values = h_grid(&a.grid)?;
    let spec = SweepSpec::new(h_values.clone(), a.gamma.clone(), a.objective, clean.clone())?;
    let base = params(h_values[0], a.gamma[0], &a.operator)?;
    let out = OutputDir::create(&a.output.out)?;
    clock.lap("load");

    let mut noisy = add_noise(&clean, &noise)?;
    noisy.set_delta(a.operator.delta)?;
    let snr = snr_db(clean.pixels(), noisy.pixels())?;
    let noisy_metrics = MetricBundle::compare(clean.pixels(), noisy.pixels(), 1.0)?;
    clock.lap("noise");

    let result = run_sweep(&noisy, &spec, &base)?;
    clock.lap("sweep");

    let best = result.best(a.objective);
    let denoised = &result.best_reconstruction;
    let denoised_metrics = MetricBundle::compare(clean.pixels(), denoised.image().pixels(), 1.0)?;

    let ext = image_extension(a.output.image_format);
    let noisy_name = format!("noisy.{ext}");
    let denoised_name = format!("denoised.{ext}");
    let table_name = format!("sweep.{}", a.output.format.extension());
    out.write(&noisy_name, encode(noisy.pixels(), a.output.image_format)?)?;
    out.write(&denoised_name, encode(&denoised.reconstructed, a.output.image_format)?)?;
    out.write(&table_name, sweep_table(&result, a.output.format)?)?;
    out.write_json(
        "report.json",
        &envelope(
            "denoise",
            json!({
                "input": input_json(&a.input, &clean),
                "noise": {
                    "sigma_255": noise.sigma_255,
                    "seed": noise.seed,
                    "clip": noise.clip,
                    "prng": PRNG_NAME,
                },
                "noisy_snr_db": number(snr),
                "noisy_metrics": metrics_json(&noisy_metrics),
                "grid": grid_json(&h_values, &a.gamma, &a.operator),
                "objective": a.objective.name(),
                "best": {
                    "h": best.h,
                    "gamma": best.gamma,
                    "metrics": metrics_json(&denoised_metrics),
                    "total_negative": denoised.total_negative(),
                },
                "best_by_objective": best_cells(&result),
                "psnr_gain_db": number(denoised_metrics.psnr_db - noisy_metrics.psnr_db),
                "outputs": { "noisy": noisy_name, "denoised": denoised_name, "table": table_name },
            }),
        ),
    )?;
    clock.lap("write");
    out.write_json("timings.json", &clock.to_json("denoise"))
}

pub fn sweep(a: SweepArgs) -> Result<(), CliError> {
    let mut clock = Stopwatch::start();
    let img = load(&a.input, Some(&a.operator))?;
    let reference = match &a.reference {
        Some(path) => load(path, Some(&a.operator))?,
        None => img.clone(),
    };
    let h_values = h_grid(&a.grid)?;
    let spec = SweepSpec::new(h_values.clone(), a.gamma.clone(), a.objective, reference)?;
    let base = params(h_values[0], a.gamma[0], &a.operator)?;
    let out = OutputDir::create(&a.output.out)?;
    clock.lap("load");

    let result = run_sweep(&img, &spec, &base)?;
    clock.lap("sweep");

    let best = result.best(a.objective);
    let image_name = format!("best.{}", image_extension(a.output.image_format));
    let table_name = format!("sweep.{}", a.output.format.extension());
    out.write(&image_name, encode(&result.best_reconstruction.reconstructed, a.output.image_format)?)?;
    out.write(&table_name, sweep_table(&result, a.output.format)?)?;
    out.write_json(
        "report.json",
        &envelope(
            "sweep",
            json!({
                "input": input_json(&a.input, &img),
                "reference": a.reference.as_ref().map(|p| p.display().to_string()),
                "grid": grid_json(&h_values, &a.gamma, &a.operator),
                "objective": a.objective.name(),
                "best": { "h": best.h, "gamma": best.gamma },
                "best_by_objective": best_cells(&result),
                "table": result.table,
                "outputs": { "image": image_name, "table": table_name },
            }),
        ),
    )?;
    clock.lap("write");
    out.write_json("timings.json", &clock.to_json("sweep"))
}

pub fn synth(a: SynthArgs) -> Result<(), CliError> {
    let out = OutputDir::create(&a.out)?;
    let ext = image_extension(a.image_format);
    let (name, img, details) = match a.kind {
        SynthKind::Example1 => {
            let grid = match a.samples {
                Some(n) => GridSpec::example1_with_samples(n)?,
                None => GridSpec::example1(),
            };
            let scaled = example1_image(&grid)?;
            let details = json!({
                "grid": grid,
                "original_scale": scaled.original_scale,
                "delta": grid.ts,
            });
            ("example1", scaled.image, details)
        }
        SynthKind::Checkerboard => {
            let img = checkerboard(a.n, a.cell, a.low, a.high)?;
            let details = json!({ "n": a.n, "cell": a.cell, "low": a.low, "high": a.high, "delta": 1.0 });
            ("checkerboard", img, details)
        }
    };
    let file = format!("{name}.{ext}");
    out.write(&file, encode(img.pixels(), a.image_format)?)?;
    out.write_json(
        "report.json",
        &envelope(
            "synth",
            json!({
                "kind": name,
                "rows": img.rows(),
                "cols": img.cols(),
                "details": details,
                "outputs": { "image": file },
            }),
        ),
    )
}

pub fn metrics(a: MetricsArgs) -> Result<(), CliError> {
    let reference = load(&a.reference, None)?;
    let test = load(&a.test, None)?;
    let m = MetricBundle::compare(reference.pixels(), test.pixels(), a.scale)?;
    let text = match a.format {
        TableFormat::Csv => format!(
            "mse,psnr_db,mssim\n{},{},{}\n",
            m.mse,
            if m.psnr_db.is_finite() { m.psnr_db.to_string() } else { "inf".into() },
            m.mssim
        ),
        TableFormat::Json => serde_json::to_string_pretty(&metrics_json(&m))? + "\n",
    };
    print!("{text}");
    if let Some(dir) = &a.out {
        let out = OutputDir::create(dir)?;
        let name = format!("metrics.{}", a.format.extension());
        out.write(&name, &text)?;
        out.write_json(
            "report.json",
            &envelope(
                "metrics",
                json!({
                    "reference": input_json(&a.reference, &reference),
                    "test": input_json(&a.test, &test),
                    "metrics": metrics_json(&m),
                    "outputs": { "metrics": name },
                }),
            ),
        )?;
    }
    Ok(())
}

pub fn eigreport(a: EigreportArgs) -> Result<(), CliError> {
    let mut clock = Stopwatch::start();
    let img = load(&a.input, Some(&a.operator))?;
    let h_values = h_grid(&a.grid)?;
    let out = OutputDir::create(&a.output.out)?;
    clock.lap("load");

    let mut per_h = Vec::with_capacity(h_values.len());
    for &h in &h_values {
        let spectra = decompose_image(&img, &params(h, 1.0, &a.operator)?)?;
        per_h.push((h, spectra.row_counts(), spectra.col_counts()));
    }
    clock.lap("decompose");

    let table = match a.output.format {
        TableFormat::Csv => {
            let mut s = String::from("h,axis,index,neg_eigs\n");
            for (h, rows, cols) in &per_h {
                for (axis, counts) in [("row", rows), ("col", cols)] {
                    for (i, c) in counts.iter().enumerate() {
                        let _ = writeln!(s, "{h},{axis},{i},{c}");
                    }
                }
            }
            s
        }
        TableFormat::Json => {
            let v: Vec<Value> = per_h
                .iter()
                .map(|(h, rows, cols)| json!({ "h": h, "rows": rows, "cols": cols }))
                .collect();
            serde_json::to_string_pretty(&v)? + "\n"
        }
    };
    let table_name = format!("counts.{}", a.output.format.extension());
    out.write(&table_name, table)?;
    let totals: Vec<Value> = per_h
        .iter()
        .map(|(h, rows, cols)| {
            json!({ "h": h, "total": rows.iter().sum::<usize>() + cols.iter().sum::<usize>() })
        })
        .collect();
    out.write_json(
        "report.json",
        &envelope(
            "eigreport",
            json!({
                "input": input_json(&a.input, &img),
                "grid": grid_json(&h_values, &[], &a.operator),
                "totals": totals,
                "outputs": { "table": table_name },
            }),
        ),
    )?;
    clock.lap("write");
    out.write_json("timings.json", &clock.to_json("eigreport"))
}
