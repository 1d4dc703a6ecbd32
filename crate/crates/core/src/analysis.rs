//! Empirical verification machinery: characteristic functions, the scaling
//! law, box-counting dimension estimates and the modulus-of-continuity
//! statistic.
//!
//! Everything here consumes immutable samples and is safe to run over
//! disjoint index ranges in parallel. The estimators are deliberately
//! simple — their value lies in being independent of the synthesis path
//! they check.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fieldsim::{
    exponent_quadrature, simulate, simulate_at, FieldSample, FrequencyPlan, MatrixConvention,
};
use crate::polar::{HomogeneousFunction, PolarSystem};
use crate::spectral::{matrix_power, ExponentPair};

/// One empirical characteristic-function evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct CFProbe {
    pub theta: Vec<f64>,
    pub empirical: Complex64,
    /// Exponent of the theoretical CF `exp(-exponent)`, when one was
    /// supplied.
    pub theoretical_exponent: Option<f64>,
    /// Combined standard error of the cos/sin means.
    pub std_error: f64,
}

impl CFProbe {
    pub fn with_theoretical(mut self, exponent: f64) -> Self {
        self.theoretical_exponent = Some(exponent);
        self
    }

    /// |empirical - exp(-exponent)| when a theoretical exponent is set.
    pub fn deviation(&self) -> Option<f64> {
        self.theoretical_exponent
            .map(|e| (self.empirical - Complex64::new((-e).exp(), 0.0)).norm())
    }
}

/// `(1/N) Σ exp(i <θ, X_k>)` with its standard error.
pub fn empirical_cf(samples: &[DVector<f64>], theta: &DVector<f64>) -> Result<CFProbe> {
    let n = samples.len();
    if n < 100 {
        return Err(Error::Statistical(format!(
            "need at least 100 samples for a CF estimate, got {n}"
        )));
    }
    let mut sum_c = 0.0;
    let mut sum_s = 0.0;
    let mut sum_c2 = 0.0;
    let mut sum_s2 = 0.0;
    for x in samples {
        let arg = theta.dot(x);
        let (s, c) = arg.sin_cos();
        sum_c += c;
        sum_s += s;
        sum_c2 += c * c;
        sum_s2 += s * s;
    }
    let nf = n as f64;
    let mean_c = sum_c / nf;
    let mean_s = sum_s / nf;
    let var_c = (sum_c2 / nf - mean_c * mean_c).max(0.0) * nf / (nf - 1.0);
    let var_s = (sum_s2 / nf - mean_s * mean_s).max(0.0) * nf / (nf - 1.0);
    Ok(CFProbe {
        theta: theta.iter().copied().collect(),
        empirical: Complex64::new(mean_c, mean_s),
        theoretical_exponent: None,
        std_error: ((var_c + var_s) / nf).sqrt(),
    })
}

/// One (point, theta) comparison inside a scaling check.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingProbe {
    pub point: Vec<f64>,
    pub theta: Vec<f64>,
    /// CF of X(c^E t) at θ.
    pub cf_scaled_argument: Complex64,
    /// CF of c^D X(t) at θ, i.e. of X(t) at c^{D^T} θ.
    pub cf_transformed_value: Complex64,
    pub discrepancy: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Relative error of the deterministic quadrature identity at this
    /// probe.
    pub quadrature_rel_error: f64,
}

/// Result of an operator-self-similarity check at one scaling factor.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub c: f64,
    pub probes: Vec<ScalingProbe>,
    pub max_discrepancy: f64,
    pub max_quadrature_rel_error: f64,
    pub pass: bool,
}

/// Compares the law of `X(c^E t)` with the law of `c^D X(t)` on shared
/// realizations, via empirical CFs at the given probes, and evaluates the
/// deterministic exponent identity alongside.
#[allow(clippy::too_many_arguments)]
pub fn scaling_check(
    pair: &ExponentPair,
    alpha: f64,
    psi: &HomogeneousFunction,
    plan: &FrequencyPlan,
    c: f64,
    points: &[DVector<f64>],
    thetas: &[DVector<f64>],
    realizations: usize,
    seed: u64,
    allowance: f64,
) -> Result<ScalingReport> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!("scaling factor must be positive, got {c}")));
    }
    if points.is_empty() || thetas.is_empty() {
        return Err(Error::InvalidInput("need at least one point and theta".into()));
    }
    let scale_e = matrix_power(pair.e(), c)?;
    let scale_dt = matrix_power(&pair.d().transpose(), c)?;

    // both point sets are evaluated exactly: scaled points first, originals
    // after them
    let mut all_points: Vec<DVector<f64>> =
        points.iter().map(|t| scale_e.as_dmatrix() * t).collect();
    all_points.extend(points.iter().cloned());
    let n_points = points.len();
    let samples = simulate_at(plan, Arc::new(all_points), realizations, seed)?;

    let mut probes = Vec::with_capacity(n_points * thetas.len());
    let mut max_disc = 0.0f64;
    let mut max_qrel = 0.0f64;
    for (i, t) in points.iter().enumerate() {
        let scaled_values: Vec<DVector<f64>> =
            samples.iter().map(|s| s.values[i].clone()).collect();
        let base_values: Vec<DVector<f64>> = samples
            .iter()
            .map(|s| s.values[n_points + i].clone())
            .collect();
        for theta in thetas {
            let theta_t = scale_dt.as_dmatrix() * theta;
            let lhs = empirical_cf(&scaled_values, theta)?;
            let rhs = empirical_cf(&base_values, &theta_t)?;
            let discrepancy = (lhs.empirical - rhs.empirical).norm();
            let tolerance =
                3.0 * (lhs.std_error.powi(2) + rhs.std_error.powi(2)).sqrt() + allowance;

            let scaled_t = scale_e.as_dmatrix() * t;
            let q_lhs = exponent_quadrature(
                pair,
                alpha,
                psi,
                plan,
                &scaled_t,
                theta,
                MatrixConvention::Transposed,
            )?;
            let q_rhs = exponent_quadrature(
                pair,
                alpha,
                psi,
                plan,
                t,
                &theta_t,
                MatrixConvention::Transposed,
            )?;
            let qrel = if q_rhs == 0.0 && q_lhs == 0.0 {
                0.0
            } else {
                (q_lhs - q_rhs).abs() / q_rhs.abs().max(q_lhs.abs())
            };

            max_disc = max_disc.max(discrepancy);
            max_qrel = max_qrel.max(qrel);
            probes.push(ScalingProbe {
                point: t.iter().copied().collect(),
                theta: theta.iter().copied().collect(),
                cf_scaled_argument: lhs.empirical,
                cf_transformed_value: rhs.empirical,
                discrepancy,
                tolerance,
                pass: discrepancy <= tolerance,
                quadrature_rel_error: qrel,
            });
        }
    }

    let pass = probes.iter().all(|p| p.pass);
    Ok(ScalingReport {
        c,
        probes,
        max_discrepancy: max_disc,
        max_quadrature_rel_error: max_qrel,
        pass,
    })
}

/// Box-counting fit of a point cloud.
#[derive(Debug, Clone, Serialize)]
pub struct BoxDimFit {
    /// Dyadic box sides, descending.
    pub scales: Vec<f64>,
    /// Occupied-box counts, one per scale.
    pub counts: Vec<usize>,
    /// Least-squares slope of log N against log(1/ε) over the window.
    pub slope: f64,
    pub r_squared: f64,
    /// Index range `[lo, hi)` of the scales used in the fit.
    pub scale_window: (usize, usize),
    /// Set when the cloud is a single point and no fit exists.
    pub degenerate: bool,
}

/// Counts occupied boxes at `ε_l = span · 2^{-l}` for `l = 0..=eps_levels`
/// and fits the middle scale window, excluding the coarsest sixth (too few
/// boxes) and the finest third (saturation at the sample count).
///
/// Axes are normalized to unit extent first (degenerate axes skipped).
/// Axis scaling is bi-Lipschitz, so the dimension is unchanged, while the
/// count curve stops depending on the units of the coordinates — graphs
/// mix spatial and value axes whose raw extents differ by an order of
/// magnitude.
pub fn box_dimension(points: &[DVector<f64>], eps_levels: usize) -> Result<BoxDimFit> {
    if points.len() < 1024 {
        return Err(Error::Statistical(format!(
            "box counting needs at least 1024 points, got {}",
            points.len()
        )));
    }
    if eps_levels < 3 || eps_levels > 30 {
        return Err(Error::InvalidInput(
            "eps_levels must lie between 3 and 30".into(),
        ));
    }
    let k = points[0].len();
    if k == 0 || k > 8 {
        return Err(Error::InvalidInput(
            "box counting supports 1 to 8 coordinates".into(),
        ));
    }
    if points
        .iter()
        .any(|p| p.len() != k || p.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::InvalidInput(
            "point cloud has mixed dimensions or non-finite coordinates".into(),
        ));
    }

    let mut mins = vec![f64::INFINITY; k];
    let mut maxs = vec![f64::NEG_INFINITY; k];
    for p in points {
        for a in 0..k {
            mins[a] = mins[a].min(p[a]);
            maxs[a] = maxs[a].max(p[a]);
        }
    }
    let raw_spans: Vec<f64> = (0..k).map(|a| maxs[a] - mins[a]).collect();
    let levels = eps_levels + 1;
    if raw_spans.iter().all(|s| *s == 0.0) {
        return Ok(BoxDimFit {
            scales: (0..levels).map(|_| 0.0).collect(),
            counts: vec![1; levels],
            slope: 0.0,
            r_squared: 0.0,
            scale_window: (0, 0),
            degenerate: true,
        });
    }
    // unit-extent normalization; constant axes keep scale 1 so they always
    // map to box index 0
    let inv_span: Vec<f64> = raw_spans
        .iter()
        .map(|s| if *s > 0.0 { 1.0 / s } else { 1.0 })
        .collect();
    let span = 1.0;

    let counts: Vec<usize> = (0..levels)
        .into_par_iter()
        .map(|l| {
            let eps = span * 2f64.powi(-(l as i32));
            let max_idx = (1u64 << l) - 1;
            let mut boxes: HashSet<u128> = HashSet::with_capacity(points.len().min(1 << 20));
            for p in points {
                let mut key: u128 = 0;
                for a in 0..k {
                    let coord = (p[a] - mins[a]) * inv_span[a];
                    let idx = ((coord / eps).floor() as u64).min(max_idx);
                    key = (key << 16) | idx as u128;
                }
                boxes.insert(key);
            }
            boxes.len()
        })
        .collect();

    let scales: Vec<f64> = (0..levels)
        .map(|l| span * 2f64.powi(-(l as i32)))
        .collect();

    let lo = (levels as f64 / 6.0).ceil() as usize;
    let mut hi = (2.0 * levels as f64 / 3.0).floor() as usize;
    if hi < lo + 2 {
        hi = (lo + 2).min(levels);
    }

    let xs: Vec<f64> = (lo..hi).map(|l| l as f64 * std::f64::consts::LN_2).collect();
    let ys: Vec<f64> = (lo..hi).map(|l| (counts[l] as f64).ln()).collect();
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let slope = sxy / sxx;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let fit = mean_y + slope * (x - mean_x);
            (y - fit).powi(2)
        })
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };

    Ok(BoxDimFit {
        scales,
        counts,
        slope,
        r_squared,
        scale_window: (lo, hi),
        degenerate: false,
    })
}

/// Range point cloud {X(x_i)} of one realization.
pub fn range_cloud(sample: &FieldSample) -> Vec<DVector<f64>> {
    sample.values.to_vec()
}

/// Graph point cloud {(x_i, X(x_i))} of one realization.
pub fn graph_cloud(sample: &FieldSample) -> Vec<DVector<f64>> {
    sample
        .points
        .iter()
        .zip(&sample.values)
        .map(|(x, v)| {
            let mut coords: Vec<f64> = x.iter().copied().collect();
            coords.extend(v.iter());
            DVector::from_vec(coords)
        })
        .collect()
}

/// Normalized sup of increments for one component.
#[derive(Debug, Clone, Serialize)]
pub struct ModulusStatistic {
    pub component: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub value: f64,
}

/// Grid geometry of a sample on the dyadic lattice: resolution `2^L + 1`
/// points per axis.
fn dyadic_levels(sample: &FieldSample, dim: usize) -> Result<(usize, u32)> {
    let total = sample.points.len();
    let n = (total as f64).powf(1.0 / dim as f64).round() as usize;
    if n.pow(dim as u32) != total || n < 3 {
        return Err(Error::InvalidInput(format!(
            "sample is not a product lattice: {total} points in dimension {dim}"
        )));
    }
    let steps = n - 1;
    if !steps.is_power_of_two() {
        return Err(Error::InvalidInput(format!(
            "modulus statistic needs a dyadic lattice (2^L + 1 points per axis), got {n}"
        )));
    }
    Ok((n, steps.trailing_zeros()))
}

/// Sup over dyadic-neighbor pairs of
/// `|X_j(u) - X_j(v)| / (τ_E(u-v)^{λ_j - ε} [ln(1 + τ_E(u-v)^{-1})]^{δ + 1/2 + 1/α})`
/// for every component j.
///
/// The pair set walks all scales `2^{-l}`, axis-aligned neighbors on the
/// scale-l sublattice — O(N log N) pairs instead of all O(N²). A negative
/// `epsilon` probes exponents above the predicted regularity; the statistic
/// is then expected to diverge under refinement.
pub fn modulus_statistic(
    sample: &FieldSample,
    pair: &ExponentPair,
    epsilon: f64,
    delta: f64,
) -> Result<Vec<ModulusStatistic>> {
    let d = pair.dim();
    let m = pair.state_dim();
    let alpha = sample.meta.alpha;
    let lambdas = pair.spectrum_d().expanded();
    if let Some(l) = lambdas.iter().find(|l| **l - epsilon <= 0.0) {
        return Err(Error::Domain(format!(
            "modulus exponent lambda - epsilon must stay positive: lambda {l}, epsilon {epsilon}"
        )));
    }
    if delta <= 0.0 {
        return Err(Error::Domain("delta must be positive".into()));
    }
    let (n, levels) = dyadic_levels(sample, d)?;
    let log_power = delta + 0.5 + 1.0 / alpha;

    let polar = PolarSystem::new(pair.e())?;
    // one radial value per scale; every axis step of length 2^{-l} shares it
    // only for isotropic lattices if steps differ by axis; here the lattice
    // is uniform so the step vector is 2^{-l} e_a and tau depends on the axis
    let mut tau_by_scale_axis = vec![vec![0.0f64; d]; levels as usize + 1];
    for l in 0..=levels {
        let step = 2f64.powi(-(l as i32));
        for (a, slot) in tau_by_scale_axis[l as usize].iter_mut().enumerate() {
            let mut e_vec = DVector::zeros(d);
            e_vec[a] = step;
            *slot = polar.radial(&e_vec)?;
        }
    }

    let strides: Vec<usize> = (0..d).map(|a| n.pow((d - 1 - a) as u32)).collect();
    let mut sup = vec![0.0f64; m];

    for l in 0..=levels {
        let step_idx = (n - 1) >> l; // lattice index distance at scale l
        let side = (1usize << l) + 1; // points per axis on the sublattice
        let sub_total = side.pow(d as u32);
        for a in 0..d {
            let tau = tau_by_scale_axis[l as usize][a];
            let denom = tau.powf(-epsilon) * (1.0 + 1.0 / tau).ln().powf(log_power);
            // per-component denominators τ^{λ_j}·(common factor)
            let denoms: Vec<f64> = lambdas.iter().map(|&lam| tau.powf(lam) * denom).collect();
            let mut coords = vec![0usize; d];
            for flat in 0..sub_total {
                let mut rem = flat;
                for (slot, _) in coords.iter_mut().zip(0..d).rev() {
                    *slot = rem % side;
                    rem /= side;
                }
                if coords[a] + 1 >= side {
                    continue;
                }
                let mut u_idx = 0usize;
                for b in 0..d {
                    u_idx += coords[b] * step_idx * strides[b];
                }
                let v_idx = u_idx + step_idx * strides[a];
                let xu = &sample.values[u_idx];
                let xv = &sample.values[v_idx];
                for j in 0..m {
                    let r = (xu[j] - xv[j]).abs() / denoms[j];
                    if r > sup[j] {
                        sup[j] = r;
                    }
                }
            }
        }
    }

    Ok((0..m)
        .map(|j| ModulusStatistic {
            component: j,
            epsilon,
            delta,
            value: sup[j],
        })
        .collect())
}

/// One realization's modulus statistic at two nested resolutions.
#[derive(Debug, Clone, Serialize)]
pub struct ModulusRefinement {
    pub realization: u64,
    pub component: usize,
    pub coarse: f64,
    pub fine: f64,
    pub ratio: f64,
}

/// Runs the resolution-doubling experiment: the same realizations evaluated
/// on lattices `2^L + 1` and `2^{L+1} + 1`, with the statistic's ratio
/// across the doubling. Bounded ratios are the finite-sample proxy for the
/// almost-sure finiteness of the normalized sup.
#[allow(clippy::too_many_arguments)]
pub fn modulus_refinement(
    pair: &ExponentPair,
    plan: &FrequencyPlan,
    levels: u32,
    epsilon: f64,
    delta: f64,
    realizations: usize,
    seed: u64,
) -> Result<Vec<ModulusRefinement>> {
    let coarse_n = (1usize << levels) + 1;
    let fine_n = (1usize << (levels + 1)) + 1;
    let coarse = simulate(plan, coarse_n, realizations, seed)?;
    let fine = simulate(plan, fine_n, realizations, seed)?;
    let mut out = Vec::with_capacity(realizations * pair.state_dim());
    for (c, f) in coarse.iter().zip(&fine) {
        let sc = modulus_statistic(c, pair, epsilon, delta)?;
        let sf = modulus_statistic(f, pair, epsilon, delta)?;
        for (a, b) in sc.iter().zip(&sf) {
            out.push(ModulusRefinement {
                realization: c.meta.realization,
                component: a.component,
                coarse: a.value,
                fine: b.value,
                ratio: b.value / a.value,
            });
        }
    }
    Ok(out)
}
