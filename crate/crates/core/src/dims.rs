//! Closed-form Hausdorff dimensions of the range and the graph of the
//! field over `[0,1]^d`.
//!
//! Both dimensions depend only on the grouped eigenvalue real parts
//! `0 < a_1 < ... < a_p` of `E` (multiplicities `μ_k`) and the ascending
//! real parts `0 < λ_1 <= ... <= λ_m` of `D`. Each dimension comes in two
//! algebraically equivalent forms — a minimum over candidate exponents and
//! an explicit case split — and the module evaluates both, treating any
//! disagreement as an internal error rather than picking silently.
//!
//! The graph formula reuses the `a_k` in descending order (written
//! `ã_j = a_{p-j+1}` here). The natural collapse checks pin this down: for
//! d = m = 1 the graph dimension reduces to the classical `2 - λ/a`, and
//! the two forms agree across random spectra only under the descending
//! order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{ExponentPair, SpectrumSummary};

/// Which branch of the range case form fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RangeBranch {
    /// Σλ_i < Σ a_k μ_k: the range fills all of R^m.
    FullDimension,
    /// The interior branch at index l (1-based into λ_1..λ_m).
    Term { l: usize },
}

/// Which branch of the graph case form fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphBranch {
    /// Σ a_k μ_k <= Σλ_i: graph and range dimensions coincide.
    EqualsRange,
    /// The anisotropy branch at index l (1-based into the descending ã).
    Term { l: usize },
}

/// Theoretical range/graph dimensions in both forms plus the active case.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DimensionReport {
    pub range_dim_min_form: f64,
    pub range_dim_case_form: f64,
    pub graph_dim_min_form: f64,
    pub graph_dim_case_form: f64,
    pub range_branch: RangeBranch,
    pub graph_branch: GraphBranch,
}

impl DimensionReport {
    pub fn range_dim(&self) -> f64 {
        self.range_dim_min_form
    }

    pub fn graph_dim(&self) -> f64 {
        self.graph_dim_min_form
    }
}

fn lambda_prefix_sums(lambdas: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(lambdas.len() + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for &l in lambdas {
        acc += l;
        out.push(acc);
    }
    out
}

/// Hausdorff dimension of the range, as (min form, case form, branch).
pub fn range_dimension(
    spectrum_e: &SpectrumSummary,
    spectrum_d: &SpectrumSummary,
) -> (f64, f64, RangeBranch) {
    let lambdas = spectrum_d.expanded();
    let m = lambdas.len();
    let q_sum: f64 = spectrum_e
        .real_parts
        .iter()
        .zip(&spectrum_e.multiplicities)
        .map(|(&a, &mu)| a * mu as f64)
        .sum();
    let prefix = lambda_prefix_sums(&lambdas);

    let term = |j: usize| -> f64 {
        // (Σ a_k μ_k + Σ_{i<=j} (λ_j - λ_i)) / λ_j, 1-based j
        (q_sum + j as f64 * lambdas[j - 1] - prefix[j]) / lambdas[j - 1]
    };

    let mut min_form = m as f64;
    for j in 1..=m {
        min_form = min_form.min(term(j));
    }

    let (case_form, branch) = if prefix[m] < q_sum {
        (m as f64, RangeBranch::FullDimension)
    } else {
        // smallest l with Σ_{i<=l-1} λ_i < Σ a_k μ_k <= Σ_{i<=l} λ_i
        let l = (1..=m).find(|&l| prefix[l] >= q_sum).unwrap_or(m);
        (term(l), RangeBranch::Term { l })
    };

    (min_form, case_form, branch)
}

/// Hausdorff dimension of the graph, as (min form, case form, branch).
pub fn graph_dimension(
    spectrum_e: &SpectrumSummary,
    spectrum_d: &SpectrumSummary,
) -> (f64, f64, GraphBranch) {
    let lambdas = spectrum_d.expanded();
    let m = lambdas.len();
    let lambda_total: f64 = lambdas.iter().sum();
    let p = spectrum_e.real_parts.len();

    // descending reindexing of the E spectrum
    let a_desc: Vec<f64> = spectrum_e.real_parts.iter().rev().copied().collect();
    let mu_desc: Vec<f64> = spectrum_e
        .multiplicities
        .iter()
        .rev()
        .map(|&m| m as f64)
        .collect();
    let mu_total: f64 = mu_desc.iter().sum();
    let q_sum: f64 = a_desc.iter().zip(&mu_desc).map(|(a, mu)| a * mu).sum();

    // prefix sums of ã_j μ̃_j and μ̃_j in descending order
    let mut amu_prefix = vec![0.0; p + 1];
    let mut mu_prefix = vec![0.0; p + 1];
    for j in 0..p {
        amu_prefix[j + 1] = amu_prefix[j] + a_desc[j] * mu_desc[j];
        mu_prefix[j + 1] = mu_prefix[j] + mu_desc[j];
    }

    let graph_term = |l: usize| -> f64 {
        // Σ_{j<=l} (ã_j/ã_l) μ̃_j + Σ_{j>l} μ̃_j + Σ_i (1 - λ_i/ã_l), 1-based l
        amu_prefix[l] / a_desc[l - 1] + (mu_total - mu_prefix[l]) + m as f64
            - lambda_total / a_desc[l - 1]
    };

    let (range_min, range_case, _) = range_dimension(spectrum_e, spectrum_d);
    let lambda_prefix = lambda_prefix_sums(&lambdas);
    let range_terms_min = (1..=m)
        .map(|j| (q_sum + j as f64 * lambdas[j - 1] - lambda_prefix[j]) / lambdas[j - 1])
        .fold(f64::INFINITY, f64::min);

    let mut min_form = range_terms_min;
    for l in 1..=p {
        min_form = min_form.min(graph_term(l));
    }

    let (case_form, branch) = if q_sum <= lambda_total {
        (range_case.min(range_min), GraphBranch::EqualsRange)
    } else {
        // the l with Σ_{k<=l-1} ã_k μ̃_k <= Σλ_i < Σ_{k<=l} ã_k μ̃_k
        let l = (1..=p)
            .find(|&l| amu_prefix[l] > lambda_total)
            .unwrap_or(p);
        (graph_term(l), GraphBranch::Term { l })
    };

    (min_form, case_form, branch)
}

/// Both dimensions with a hard consistency check between the two forms.
pub fn dimension_report(pair: &ExponentPair) -> Result<DimensionReport> {
    dimension_report_from_spectra(pair.spectrum_e(), pair.spectrum_d())
}

/// As [`dimension_report`] but starting from spectra, used by the random
/// equivalence sweeps.
pub fn dimension_report_from_spectra(
    spectrum_e: &SpectrumSummary,
    spectrum_d: &SpectrumSummary,
) -> Result<DimensionReport> {
    let (range_min, range_case, range_branch) = range_dimension(spectrum_e, spectrum_d);
    let (graph_min, graph_case, graph_branch) = graph_dimension(spectrum_e, spectrum_d);

    for (name, a, b) in [
        ("range", range_min, range_case),
        ("graph", graph_min, graph_case),
    ] {
        if (a - b).abs() > 1e-9 * (1.0 + a.abs()) {
            return Err(Error::Numerical(format!(
                "internal inconsistency: {name} dimension min form {a} disagrees with case form {b}"
            )));
        }
    }
    if graph_min < range_min - 1e-9 {
        return Err(Error::Numerical(format!(
            "internal inconsistency: graph dimension {graph_min} below range dimension {range_min}"
        )));
    }

    Ok(DimensionReport {
        range_dim_min_form: range_min,
        range_dim_case_form: range_case,
        graph_dim_min_form: graph_min,
        graph_dim_case_form: graph_case,
        range_branch,
        graph_branch,
    })
}

/// Draws a random valid spectrum pair (p <= 3 groups for E above 1,
/// m <= 4 eigenvalues for D below 1), used by the form-equivalence sweeps.
pub fn random_spectra_for_tests<R: rand::Rng>(rng: &mut R) -> (SpectrumSummary, SpectrumSummary) {
    let p = rng.gen_range(1..=3usize);
    let mut parts = Vec::with_capacity(p);
    let mut cur = rng.gen_range(1.05..1.5f64);
    for _ in 0..p {
        parts.push(cur);
        cur += rng.gen_range(0.1..0.8);
    }
    let mults: Vec<usize> = (0..p).map(|_| rng.gen_range(1..=2)).collect();
    let se = SpectrumSummary {
        real_parts: parts.clone(),
        multiplicities: mults.clone(),
        trace: parts.iter().zip(&mults).map(|(&r, &m)| r * m as f64).sum(),
    };

    let groups = rng.gen_range(1..=3usize);
    let mut lam_parts = Vec::with_capacity(groups);
    let mut lam = rng.gen_range(0.05..0.4f64);
    for _ in 0..groups {
        lam_parts.push(lam);
        lam += rng.gen_range(0.05..0.25);
        if lam >= 0.92 {
            lam = 0.92;
        }
    }
    lam_parts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let g = lam_parts.len();
    let mut lam_mults = vec![1usize; g];
    let mut total: usize = g;
    while total < 4 && rng.gen_bool(0.5) {
        let idx = rng.gen_range(0..g);
        lam_mults[idx] += 1;
        total += 1;
    }
    let sd = SpectrumSummary {
        real_parts: lam_parts.clone(),
        multiplicities: lam_mults.clone(),
        trace: lam_parts
            .iter()
            .zip(&lam_mults)
            .map(|(&r, &m)| r * m as f64)
            .sum(),
    };
    (se, sd)
}
