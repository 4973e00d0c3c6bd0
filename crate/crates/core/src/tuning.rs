//! Grid search over `(h, γ)`.
//!
//! Only `h` enters the operators, so the row and column spectra are solved
//! once per `h` and reused for every `γ`.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::{check_same_shape, Image};
use crate::metrics::{serialize_f64_sentinel, MetricBundle};
use crate::scsa1d::ScsaParams;
use crate::scsa2d::{decompose_image, reconstruct_from_spectra, ReconstructionReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    MinMse,
    MaxPsnr,
    MaxMssim,
}

impl Objective {
    pub const ALL: [Objective; 3] = [Objective::MinMse, Objective::MaxPsnr, Objective::MaxMssim];

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "min-mse" | "mse" => Some(Self::MinMse),
            "max-psnr" | "psnr" => Some(Self::MaxPsnr),
            "max-mssim" | "mssim" => Some(Self::MaxMssim),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::MinMse => "min-mse",
            Self::MaxPsnr => "max-psnr",
            Self::MaxMssim => "max-mssim",
        }
    }

    /// Score where larger is better.
    fn score(&self, row: &SweepRow) -> f64 {
        match self {
            Self::MinMse => -row.mse,
            Self::MaxPsnr => row.psnr_db,
            Self::MaxMssim => row.mssim,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub h_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    pub objective: Objective,
    pub reference: Image,
}

impl SweepSpec {
    pub fn new(h_values: Vec<f64>, gamma_values: Vec<f64>, objective: Objective, reference: Image) -> Result<Self> {
        if h_values.is_empty() || gamma_values.is_empty() {
            return Err(Error::InvalidParameter("sweep grids must be nonempty".into()));
        }
        if !h_values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter("h values must be strictly ascending".into()));
        }
        if let Some(h) = h_values.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
            return Err(Error::InvalidParameter(format!("h values must be positive, got {h}")));
        }
        if let Some(g) = gamma_values.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
            return Err(Error::InvalidParameter(format!("gamma values must be nonnegative, got {g}")));
        }
        Ok(Self {
            h_values,
            gamma_values,
            objective,
            reference,
        })
    }
}

/// `steps` values from `min` to `max` inclusive, evenly spaced in `log h`.
pub fn log_spaced(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max >= min && min.is_finite() && max.is_finite()) || steps == 0 {
        return Err(Error::InvalidParameter(format!(
            "log grid needs 0 < min <= max and steps >= 1 (min={min}, max={max}, steps={steps})"
        )));
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    let (lo, hi) = (min.ln(), max.ln());
    let mut out: Vec<f64> = (0..steps)
        .map(|k| (lo + (hi - lo) * k as f64 / (steps - 1) as f64).exp())
        .collect();
    out[0] = min;
    out[steps - 1] = max;
    out.dedup();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub h: f64,
    pub gamma: f64,
    pub mse: f64,
    #[serde(serialize_with = "serialize_f64_sentinel")]
    pub psnr_db: f64,
    pub mssim: f64,
    pub total_neg_eigs: usize,
    /// Combination time plus an equal share of the spectra time for this `h`.
    #[serde(skip)]
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BestCell {
    pub h: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    /// One row per `(h, γ)` in grid order: `h` outer, `γ` inner.
    pub table: Vec<SweepRow>,
    pub objective: Objective,
    pub best_min_mse: BestCell,
    pub best_max_psnr: BestCell,
    pub best_max_mssim: BestCell,
    /// Reconstruction at the best cell under `objective`.
    pub best_reconstruction: ReconstructionReport,
}

impl SweepResult {
    pub fn best(&self, objective: Objective) -> BestCell {
        match objective {
            Objective::MinMse => self.best_min_mse,
            Objective::MaxPsnr => self.best_max_psnr,
            Objective::MaxMssim => self.best_max_mssim,
        }
    }

    pub fn row(&self, cell: BestCell) -> Option<&SweepRow> {
        self.table.iter().find(|r| r.h == cell.h && r.gamma == cell.gamma)
    }

    /// Rows for one `γ`, ascending in `h`.
    pub fn curve(&self, gamma: f64) -> Vec<SweepRow> {
        self.table.iter().filter(|r| r.gamma == gamma).copied().collect()
    }

    pub const CSV_HEADER: &'static str = "h,gamma,mse,psnr_db,mssim,total_neg_eigs,wall_time_s";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.table {
            let psnr = if r.psnr_db.is_finite() {
                r.psnr_db.to_string()
            } else {
                "inf".to_string()
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{:.6}",
                r.h, r.gamma, r.mse, psnr, r.mssim, r.total_neg_eigs, r.wall_time_s
            );
        }
        out
    }
}

fn pick_best(table: &[SweepRow], objective: Objective) -> Option<BestCell> {
    table
        .iter()
        .filter(|r| !objective.score(r).is_nan())
        .min_by(|a, b| {
            objective
                .score(b)
                .total_cmp(&objective.score(a))
                .then(a.h.total_cmp(&b.h))
                .then(a.gamma.total_cmp(&b.gamma))
        })
        .map(|r| BestCell { h: r.h, gamma: r.gamma })
}

/// Reconstructs `img` at every grid cell and scores the clamped result
/// against `spec.reference`. `params_base` supplies `lambda` and `delta`.
pub fn sweep(img: &Image, spec: &SweepSpec, params_base: &ScsaParams) -> Result<SweepResult> {
    check_same_shape(img.pixels(), spec.reference.pixels())?;
    let tag = |h: f64, gamma: Option<f64>| move |e: Error| Error::SweepCell { h, gamma, source: Box::new(e) };

    let mut table = Vec::with_capacity(spec.h_values.len() * spec.gamma_values.len());
    let mut best: Option<(f64, ReconstructionReport)> = None;

    for &h in &spec.h_values {
        let started = Instant::now();
        let params_h = params_base.with_h(h).map_err(tag(h, None))?;
        let spectra = decompose_image(img, &params_h).map_err(tag(h, None))?;
        let spectra_share = started.elapsed().as_secs_f64() / spec.gamma_values.len() as f64;
        let total_neg_eigs = spectra.total_negative();

        for &gamma in &spec.gamma_values {
            let started = Instant::now();
            let params = params_h.with_gamma(gamma).map_err(tag(h, Some(gamma)))?;
            let mut report = reconstruct_from_spectra(&spectra, &params).map_err(tag(h, Some(gamma)))?;
            let m: MetricBundle = *report.compare_to(&spec.reference)?;
            let row = SweepRow {
                h,
                gamma,
                mse: m.mse,
                psnr_db: m.psnr_db,
                mssim: m.mssim,
                total_neg_eigs,
                wall_time_s: spectra_share + started.elapsed().as_secs_f64(),
            };
            let score = spec.objective.score(&row);
            // Strict improvement only: earlier cells (smaller h, then grid-order γ) win ties.
            let better = match &best {
                None => !score.is_nan(),
                Some((s, r)) => {
                    score > *s || (score == *s && h == r.params.h && gamma < r.params.gamma)
                }
            };
            if better {
                best = Some((score, report));
            }
            table.push(row);
        }
    }

    let missing = || Error::Domain("every sweep cell produced an undefined metric".into());
    Ok(SweepResult {
        best_min_mse: pick_best(&table, Objective::MinMse).ok_or_else(missing)?,
        best_max_psnr: pick_best(&table, Objective::MaxPsnr).ok_or_else(missing)?,
        best_max_mssim: pick_best(&table, Objective::MaxMssim).ok_or_else(missing)?,
        best_reconstruction: best.ok_or_else(missing)?.1,
        objective: spec.objective,
        table,
    })
}
