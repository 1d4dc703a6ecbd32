//! Matrix-exponential calculus and spectral validation for the exponents
//! `E` and `D`.
//!
//! The model is parametrized by two real square matrices: `E` (d×d, time
//! domain) and `D` (m×m, state space). Everything downstream only consumes
//! the real parts of their eigenvalues, grouped with multiplicities, plus
//! matrix powers `c^A = exp(A ln c)`. Jordan structure is never computed;
//! eigenvalue real parts come from a dense Schur decomposition and are
//! clustered under a relative tolerance.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used to cluster eigenvalue real parts.
pub const CLUSTER_TOL: f64 = 1e-9;

/// A validated real square matrix, stored row-major at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    inner: DMatrix<f64>,
}

impl SquareMatrix {
    /// Builds a matrix of the given order from row-major entries.
    pub fn from_row_major(order: usize, entries: &[f64]) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidInput("matrix order must be positive".into()));
        }
        if entries.len() != order * order {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for order {}, got {}",
                order * order,
                order,
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "matrix entries must be finite, found {bad}"
            )));
        }
        Ok(Self {
            inner: DMatrix::from_row_slice(order, order, entries),
        })
    }

    pub fn identity(order: usize) -> Self {
        Self {
            inner: DMatrix::identity(order, order),
        }
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        let order = entries.len();
        let mut m = vec![0.0; order * order];
        for (i, &v) in entries.iter().enumerate() {
            m[i * order + i] = v;
        }
        Self::from_row_major(order, &m)
    }

    pub fn order(&self) -> usize {
        self.inner.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.inner.trace()
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.order();
        (0..n).all(|i| (0..n).all(|j| i == j || self.inner[(i, j)] == 0.0))
    }

    pub fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose(),
        }
    }

    /// Entrywise scaling `beta * A`.
    pub fn scale(&self, beta: f64) -> Self {
        Self {
            inner: &self.inner * beta,
        }
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn row_major_entries(&self) -> Vec<f64> {
        let n = self.order();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| self.inner[(i, j)])
            .collect()
    }
}

/// Eigenvalue real parts of a matrix, grouped by closeness, in ascending
/// order, plus the trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    /// Distinct eigenvalue real parts, strictly ascending.
    pub real_parts: Vec<f64>,
    /// Number of eigenvalues in each group; sums to the matrix order.
    pub multiplicities: Vec<usize>,
    /// Trace of the matrix.
    pub trace: f64,
}

impl SpectrumSummary {
    pub fn order(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    pub fn min_real(&self) -> f64 {
        self.real_parts[0]
    }

    pub fn max_real(&self) -> f64 {
        *self.real_parts.last().unwrap()
    }

    /// Real parts repeated by multiplicity, ascending (λ_1 <= ... <= λ_m).
    pub fn expanded(&self) -> Vec<f64> {
        self.real_parts
            .iter()
            .zip(&self.multiplicities)
            .flat_map(|(&r, &m)| std::iter::repeat(r).take(m))
            .collect()
    }
}

/// The validated exponent pair (E, D) together with spectral data.
#[derive(Debug, Clone)]
pub struct ExponentPair {
    e: SquareMatrix,
    d: SquareMatrix,
    spectrum_e: SpectrumSummary,
    spectrum_d: SpectrumSummary,
}

impl ExponentPair {
    pub fn e(&self) -> &SquareMatrix {
        &self.e
    }

    pub fn d(&self) -> &SquareMatrix {
        &self.d
    }

    pub fn spectrum_e(&self) -> &SpectrumSummary {
        &self.spectrum_e
    }

    pub fn spectrum_d(&self) -> &SpectrumSummary {
        &self.spectrum_d
    }

    /// Spatial dimension d.
    pub fn dim(&self) -> usize {
        self.e.order()
    }

    /// State-space dimension m.
    pub fn state_dim(&self) -> usize {
        self.d.order()
    }

    /// q = trace(E).
    pub fn trace_e(&self) -> f64 {
        self.spectrum_e.trace
    }
}

/// Computes `c^A = exp(A ln c)` for `c > 0`.
///
/// The exponential itself is delegated to nalgebra's Padé
/// scaling-and-squaring implementation; the group law
/// `c^A (c')^A = (c c')^A` is enforced by tests rather than construction.
pub fn matrix_power(a: &SquareMatrix, c: f64) -> Result<SquareMatrix> {
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::Domain(format!(
            "matrix power base must be a positive real, got {c}"
        )));
    }
    let scaled = a.as_dmatrix() * c.ln();
    Ok(SquareMatrix { inner: scaled.exp() })
}

/// `c^A x` without exposing the intermediate matrix.
pub fn matrix_power_apply(a: &SquareMatrix, c: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(matrix_power(a, c)?.as_dmatrix() * x)
}

/// Eigenvalue real parts via a dense Schur decomposition, clustered under a
/// relative tolerance.
pub fn spectrum_summary(a: &SquareMatrix, cluster_tol: f64) -> Result<SpectrumSummary> {
    if cluster_tol <= 0.0 {
        return Err(Error::InvalidInput(
            "cluster tolerance must be positive".into(),
        ));
    }
    let schur = nalgebra::Schur::try_new(a.inner.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| {
            Error::Numerical(format!(
                "Schur iteration failed to converge for a {}x{} matrix",
                a.order(),
                a.order()
            ))
        })?;
    let eigen = schur.complex_eigenvalues();
    let mut reals: Vec<f64> = eigen.iter().map(|z| z.re).collect();
    reals.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let mut groups: Vec<(f64, usize)> = Vec::new();
    for r in reals {
        match groups.last_mut() {
            Some((rep, count)) if (r - *rep).abs() <= cluster_tol * rep.abs().max(1.0) => {
                // running mean keeps the representative centered in the cluster
                *rep += (r - *rep) / (*count as f64 + 1.0);
                *count += 1;
            }
            _ => groups.push((r, 1)),
        }
    }

    Ok(SpectrumSummary {
        real_parts: groups.iter().map(|g| g.0).collect(),
        multiplicities: groups.iter().map(|g| g.1).collect(),
        trace: a.trace(),
    })
}

/// Validates the spectral conditions on (E, D) and assembles the pair.
///
/// Requires every eigenvalue real part of both matrices to be positive and
/// `λ_max(D) < 1 < a_min(E)`. On violation the offending eigenvalue is
/// named; `normalize_pair` can often repair the input.
pub fn validate_pair(e: &SquareMatrix, d: &SquareMatrix) -> Result<ExponentPair> {
    let spectrum_e = spectrum_summary(e, CLUSTER_TOL)?;
    let spectrum_d = spectrum_summary(d, CLUSTER_TOL)?;

    for (name, s) in [("E", &spectrum_e), ("D", &spectrum_d)] {
        if s.min_real() <= 0.0 {
            return Err(Error::Validation(format!(
                "all eigenvalue real parts of {name} must be positive; found {}",
                s.min_real()
            )));
        }
    }
    let a1 = spectrum_e.min_real();
    let lam_max = spectrum_d.max_real();
    if a1 <= 1.0 {
        return Err(Error::Validation(format!(
            "spectral condition lambda_max(D) < 1 < a_min(E) violated: a_min(E) = {a1} <= 1"
        )));
    }
    if lam_max >= 1.0 {
        return Err(Error::Validation(format!(
            "spectral condition lambda_max(D) < 1 < a_min(E) violated: lambda_max(D) = {lam_max} >= 1"
        )));
    }

    Ok(ExponentPair {
        e: e.clone(),
        d: d.clone(),
        spectrum_e,
        spectrum_d,
    })
}

/// Jointly rescales (E, D) -> (βE, βD) so the result satisfies
/// `λ_max < 1 < a_min`, with β the geometric midpoint
/// `1 / sqrt(a_min(E) λ_max(D))`.
///
/// The scaling family is invariant under this reparametrization (c^{βE}
/// sweeps the same group as c^E), so the rescale changes coordinates, not
/// the law. Possible iff `λ_max(D) < a_min(E)` in the raw spectra.
pub fn normalize_pair(e: &SquareMatrix, d: &SquareMatrix) -> Result<(SquareMatrix, SquareMatrix)> {
    let se = spectrum_summary(e, CLUSTER_TOL)?;
    let sd = spectrum_summary(d, CLUSTER_TOL)?;
    for (name, s) in [("E", &se), ("D", &sd)] {
        if s.min_real() <= 0.0 {
            return Err(Error::Validation(format!(
                "cannot normalize: {name} has eigenvalue real part {} <= 0",
                s.min_real()
            )));
        }
    }
    let a1 = se.min_real();
    let lam_max = sd.max_real();
    if lam_max >= a1 {
        return Err(Error::Validation(format!(
            "normalization impossible: lambda_max(D) = {lam_max} >= a_min(E) = {a1}; \
             no joint rescale separates them across 1"
        )));
    }
    let beta = 1.0 / (a1 * lam_max).sqrt();
    Ok((e.scale(beta), d.scale(beta)))
}
