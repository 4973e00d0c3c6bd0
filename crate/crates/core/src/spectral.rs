//! Fourier pseudo-spectral second-derivative matrices and the negative
//! spectrum of discretised 1D semi-classical Schrödinger operators
//! `-h² D₂ - diag(c·V)` on a periodic grid.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Dense periodic second-derivative matrix for `n` samples spaced `delta` apart.
///
/// The matrix is symmetric and circulant; applying it to the samples of a
/// trigonometric interpolant returns the exact second derivative at the nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffMatrix {
    delta: f64,
    entries: DMatrix<f64>,
}

impl DiffMatrix {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }
}

/// Builds `D₂` on the canonical `[0, 2π)` grid and rescales it by
/// `(2π / (n·delta))²` so that it differentiates in the physical abscissa.
///
/// With `delta = 2π/n` the scaling is exactly one.
pub fn build_diff_matrix(n: usize, delta: f64) -> Result<DiffMatrix> {
    if n < 2 {
        return Err(Error::InvalidSize(format!(
            "differentiation matrix needs at least 2 points, got {n}"
        )));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sample spacing must be positive and finite, got {delta}"
        )));
    }

    let step = 2.0 * PI / n as f64;
    let even = n % 2 == 0;
    let diagonal = if even {
        -PI * PI / (3.0 * step * step) - 1.0 / 6.0
    } else {
        -PI * PI / (3.0 * step * step) + 1.0 / 12.0
    };

    // One row of the circulant, indexed by the offset (j - k) mod n.
    let mut stencil = vec![diagonal; n];
    for (offset, value) in stencil.iter_mut().enumerate().skip(1) {
        let half_angle = offset as f64 * step / 2.0;
        let sign = if offset % 2 == 0 { 1.0 } else { -1.0 };
        let s = half_angle.sin();
        *value = if even {
            -sign / (2.0 * s * s)
        } else {
            -sign * half_angle.cos() / (2.0 * s * s)
        };
    }

    let scale = (2.0 * PI / (n as f64 * delta)).powi(2);
    let mut entries = DMatrix::zeros(n, n);
    for j in 0..n {
        for k in j..n {
            // Use the smaller of the two offsets so that (j,k) and (k,j) share bits.
            let offset = (k - j).min(n - (k - j));
            let v = stencil[offset] * scale;
            entries[(j, k)] = v;
            entries[(k, j)] = v;
        }
    }

    Ok(DiffMatrix { delta, entries })
}

/// `-h² D₂ - diag(c·V)` with `c = ½` when `half_potential` is set.
///
/// The halved form is the per-row / per-column operator used by the
/// separated 2D reconstruction.
#[derive(Debug, Clone, Copy)]
pub struct SchrodingerOperator1D<'a> {
    pub h: f64,
    pub potential: &'a [f64],
    pub diff: &'a DiffMatrix,
    pub half_potential: bool,
}

impl<'a> SchrodingerOperator1D<'a> {
    pub fn new(
        h: f64,
        potential: &'a [f64],
        diff: &'a DiffMatrix,
        half_potential: bool,
    ) -> Result<Self> {
        let op = Self {
            h,
            potential,
            diff,
            half_potential,
        };
        op.validate()?;
        Ok(op)
    }

    fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "h must be positive and finite, got {}",
                self.h
            )));
        }
        if self.potential.len() != self.diff.n() {
            return Err(Error::DimensionMismatch {
                expected: format!("potential of length {}", self.diff.n()),
                found: format!("length {}", self.potential.len()),
            });
        }
        if let Some(bad) = self.potential.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::Domain(format!(
                "potential must be nonnegative, found {bad}"
            )));
        }
        Ok(())
    }

    fn potential_factor(&self) -> f64 {
        if self.half_potential {
            0.5
        } else {
            1.0
        }
    }

    /// Dense matrix of the operator. Symmetric by construction.
    pub fn assemble(&self) -> Result<DMatrix<f64>> {
        self.validate()?;
        let mut m = self.diff.entries() * (-self.h * self.h);
        let c = self.potential_factor();
        for (i, v) in self.potential.iter().enumerate() {
            m[(i, i)] -= c * v;
        }
        Ok(m)
    }
}

/// Eigenpairs of one operator with eigenvalue below the threshold `λ`.
///
/// Eigenvalues are ascending. Column `k` of `eigenvectors` belongs to
/// `eigenvalues[k]` and satisfies `Δ·Σ v² = 1`, with its first
/// non-negligible component positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
    pub norm_weight: f64,
}

impl SpectralDecomposition {
    pub fn empty(n: usize, norm_weight: f64) -> Self {
        Self {
            eigenvalues: Vec::new(),
            eigenvectors: DMatrix::zeros(n, 0),
            norm_weight,
        }
    }

    pub fn count_negative(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Largest `‖M v − μ v‖ / (‖M‖_F + |μ|)` over the retained pairs.
    pub fn max_relative_residual(&self, matrix: &DMatrix<f64>) -> f64 {
        let frob = matrix.norm();
        self.eigenvalues
            .iter()
            .zip(self.eigenvectors.column_iter())
            .map(|(&mu, v)| {
                let v = v.into_owned();
                let r: DVector<f64> = matrix * &v - &v * mu;
                // Measure on the unit-norm vector so the bound is scale free.
                r.norm() / v.norm() / (frob + mu.abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Full symmetric eigendecomposition of the assembled operator, keeping the
/// pairs with `μ < lambda` (strict).
pub fn negative_spectrum(
    op: &SchrodingerOperator1D<'_>,
    lambda: f64,
) -> Result<SpectralDecomposition> {
    if !(lambda <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be nonpositive, got {lambda}"
        )));
    }
    let matrix = op.assemble()?;
    let n = matrix.nrows();
    let weight = op.diff.delta();

    // With V ≡ 0 the operator is -h²D₂, positive semidefinite with an exact
    // zero eigenvalue; roundoff must not decide whether it falls below λ = 0.
    if op.potential.iter().all(|&v| v == 0.0) {
        return Ok(SpectralDecomposition::empty(n, weight));
    }

    let eig = SymmetricEigen::try_new(matrix, f64::EPSILON, 10_000 * n).ok_or_else(|| {
        Error::Eigensolver {
            slice: None,
            message: format!("implicit QR did not converge for a {n}x{n} operator"),
            residual: None,
        }
    })?;

    if let Some(bad) = eig.eigenvalues.iter().find(|v| !v.is_finite()) {
        return Err(Error::Eigensolver {
            slice: None,
            message: format!("non-finite eigenvalue {bad}"),
            residual: None,
        });
    }

    let mut order: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] < lambda).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .total_cmp(&eig.eigenvalues[b])
            .then(a.cmp(&b))
    });

    let mut eigenvectors = DMatrix::zeros(n, order.len());
    let mut eigenvalues = Vec::with_capacity(order.len());
    for (dst, &src) in order.iter().enumerate() {
        eigenvalues.push(eig.eigenvalues[src]);
        let v = eig.eigenvectors.column(src);
        let norm = (weight * v.norm_squared()).sqrt();
        let peak = v.amax();
        let lead = v
            .iter()
            .copied()
            .find(|x| x.abs() > 1e-8 * peak)
            .unwrap_or(1.0);
        let scale = lead.signum() / norm;
        eigenvectors.column_mut(dst).copy_from(&(v * scale));
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        norm_weight: weight,
    })
}
