//! Generalized polar coordinates with respect to a matrix exponent, and
//! `E^T`-homogeneous functions ψ.
//!
//! For a matrix `E` with positive eigenvalue real parts every nonzero
//! `x ∈ R^d` factors uniquely as `x = τ_E(x)^E  l_E(x)` with `τ_E(x) > 0`
//! and `l_E(x)` on the unit sphere `S_E = {τ_E = 1}`. The radial part obeys
//! `τ_E(c^E x) = c τ_E(x)`.
//!
//! The unit sphere is taken with respect to the integral norm
//!
//! ```text
//! |x|_E = ∫_0^1 ||t^E x|| t^{-1} dt = ∫_0^∞ ||e^{-uE} x|| du,
//! ```
//!
//! chosen because `t ↦ |t^{-E} x|_E` is strictly decreasing for every
//! matrix with positive spectrum, which the Euclidean norm does not
//! guarantee for non-normal `E`. That monotonicity gives the radial part a
//! unique bracketable root.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{self, SquareMatrix, CLUSTER_TOL};

const GL32_NODES: [f64; 32] = [
    -0.9972638618494816,
    -0.9856115115452684,
    -0.9647622555875064,
    -0.9349060759377397,
    -0.8963211557660522,
    -0.84936761373257,
    -0.7944837959679424,
    -0.7321821187402897,
    -0.6630442669302152,
    -0.5877157572407623,
    -0.5068999089322294,
    -0.42135127613063533,
    -0.33186860228212767,
    -0.23928736225213706,
    -0.1444719615827965,
    -0.04830766568773831,
    0.04830766568773831,
    0.1444719615827965,
    0.23928736225213706,
    0.33186860228212767,
    0.42135127613063533,
    0.5068999089322294,
    0.5877157572407623,
    0.6630442669302152,
    0.7321821187402897,
    0.7944837959679424,
    0.84936761373257,
    0.8963211557660522,
    0.9349060759377397,
    0.9647622555875064,
    0.9856115115452684,
    0.9972638618494816,
];

const GL32_WEIGHTS: [f64; 32] = [
    0.007018610009469298,
    0.016274394730905965,
    0.025392065309262427,
    0.034273862913021626,
    0.042835898022226426,
    0.050998059262376244,
    0.058684093478535704,
    0.06582222277636175,
    0.07234579410884845,
    0.07819389578707031,
    0.08331192422694685,
    0.08765209300440391,
    0.09117387869576386,
    0.09384439908080457,
    0.09563872007927483,
    0.09654008851472781,
    0.09654008851472781,
    0.09563872007927483,
    0.09384439908080457,
    0.09117387869576386,
    0.08765209300440391,
    0.08331192422694685,
    0.07819389578707031,
    0.07234579410884845,
    0.06582222277636175,
    0.058684093478535704,
    0.050998059262376244,
    0.042835898022226426,
    0.034273862913021626,
    0.025392065309262427,
    0.016274394730905965,
    0.007018610009469298,
];

/// Relative tail threshold for the norm quadrature.
const NORM_TAIL_REL: f64 = 1e-12;
/// Relative bracket width for the radial bisection.
const TAU_REL_WIDTH: f64 = 1e-10;
const MAX_BRACKET_STEPS: usize = 200;

/// Radial/directional decomposition of a point: `x = radial^E direction`.
#[derive(Debug, Clone)]
pub struct PolarDecomposition {
    /// τ_E(x); zero exactly when x = 0.
    pub radial: f64,
    /// l_E(x) with τ_E = 1; `None` for x = 0 where no direction exists.
    pub direction: Option<DVector<f64>>,
}

/// Precomputed quadrature and spectral data for polar coordinates with
/// respect to one matrix. Construction is the expensive part; the value is
/// immutable afterwards and can be shared across threads.
#[derive(Debug, Clone)]
pub struct PolarSystem {
    matrix: SquareMatrix,
    min_real: f64,
    panel_len: f64,
    max_panels: usize,
    /// exp(-s_i E) at the Gauss-Legendre nodes of the first panel.
    node_exps: Vec<DMatrix<f64>>,
    /// exp(-L E), advances the quadrature by one panel.
    step_exp: DMatrix<f64>,
    /// Scalar shortcut: for 1x1 exponents the integral norm is |x| / a.
    scalar_exponent: Option<f64>,
}

impl PolarSystem {
    pub fn new(matrix: &SquareMatrix) -> Result<Self> {
        let spectrum = spectral::spectrum_summary(matrix, CLUSTER_TOL)?;
        let min_real = spectrum.min_real();
        if min_real <= 0.0 {
            return Err(Error::Domain(format!(
                "polar coordinates need positive eigenvalue real parts, found {min_real}"
            )));
        }
        let scalar_exponent = if matrix.order() == 1 {
            Some(matrix.as_dmatrix()[(0, 0)])
        } else {
            None
        };
        let panel_len = (1.0 / min_real).clamp(0.25, 8.0);
        // run until e^{-a_min u} has decayed far below the tail threshold
        let max_panels = ((45.0 / (min_real * panel_len)).ceil() as usize).clamp(20, 4000);
        let neg = matrix.as_dmatrix() * -1.0;
        let node_exps = GL32_NODES
            .iter()
            .map(|&t| {
                let s = panel_len * (t + 1.0) / 2.0;
                (&neg * s).exp()
            })
            .collect();
        let step_exp = (&neg * panel_len).exp();
        Ok(Self {
            matrix: matrix.clone(),
            min_real,
            panel_len,
            max_panels,
            node_exps,
            step_exp,
            scalar_exponent,
        })
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.matrix
    }

    pub fn min_real(&self) -> f64 {
        self.min_real
    }

    /// The integral norm `∫_0^∞ ||e^{-uE} x|| du` by composite 32-point
    /// Gauss-Legendre panels, truncated once a panel falls below the tail
    /// threshold relative to the accumulated value.
    pub fn ms_norm(&self, x: &DVector<f64>) -> Result<f64> {
        if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite coordinate {bad}")));
        }
        if x.norm() == 0.0 {
            return Ok(0.0);
        }
        if let Some(a) = self.scalar_exponent {
            return Ok(x[0].abs() / a);
        }
        let half = self.panel_len / 2.0;
        let mut v = x.clone();
        let mut acc = 0.0;
        let mut small_run = 0usize;
        for _ in 0..self.max_panels {
            let mut panel = 0.0;
            for (m, w) in self.node_exps.iter().zip(GL32_WEIGHTS.iter()) {
                panel += w * (m * &v).norm();
            }
            panel *= half;
            acc += panel;
            if panel <= NORM_TAIL_REL * acc {
                small_run += 1;
                if small_run >= 2 {
                    return Ok(acc);
                }
            } else {
                small_run = 0;
            }
            v = &self.step_exp * &v;
        }
        if small_run > 0 {
            return Ok(acc);
        }
        Err(Error::Numerical(
            "integral norm quadrature did not reach its tail threshold".into(),
        ))
    }

    fn shrunk(&self, t: f64, x: &DVector<f64>) -> DVector<f64> {
        // t^{-E} x
        (self.matrix.as_dmatrix() * (-t.ln())).exp() * x
    }

    /// Polar decomposition of `x`: the unique `t > 0` with
    /// `|t^{-E} x|_E = 1`, found by bracketing from t = 1 and bisection.
    pub fn decompose(&self, x: &DVector<f64>) -> Result<PolarDecomposition> {
        if x.norm() == 0.0 {
            return Ok(PolarDecomposition {
                radial: 0.0,
                direction: None,
            });
        }
        if let Some(a) = self.scalar_exponent {
            // t^{-a} |x| / a = 1  =>  t = (|x|/a)^{1/a}
            let radial = (x[0].abs() / a).powf(1.0 / a);
            let dir = DVector::from_element(1, a * x[0].signum());
            return Ok(PolarDecomposition {
                radial,
                direction: Some(dir),
            });
        }

        let g = |t: f64| -> Result<f64> { self.ms_norm(&self.shrunk(t, x)) };
        let g1 = g(1.0)?;
        let (mut lo, mut hi) = if g1 >= 1.0 {
            // g decreases in t; push hi out until it drops below 1
            let mut hi = 1.0;
            let mut steps = 0;
            while g(hi)? > 1.0 {
                hi *= 2.0;
                steps += 1;
                if steps > MAX_BRACKET_STEPS {
                    return Err(Error::Numerical(
                        "radial bracketing failed growing t; spectrum likely invalid".into(),
                    ));
                }
            }
            (hi / 2.0, hi)
        } else {
            let mut lo = 1.0;
            let mut steps = 0;
            while g(lo)? < 1.0 {
                lo /= 2.0;
                steps += 1;
                if steps > MAX_BRACKET_STEPS {
                    return Err(Error::Numerical(
                        "radial bracketing failed shrinking t; spectrum likely invalid".into(),
                    ));
                }
            }
            (lo, 2.0 * lo)
        };

        for _ in 0..200 {
            if hi - lo <= TAU_REL_WIDTH * lo {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if g(mid)? >= 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let radial = 0.5 * (lo + hi);
        Ok(PolarDecomposition {
            radial,
            direction: Some(self.shrunk(radial, x)),
        })
    }

    /// Radial part only.
    pub fn radial(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.decompose(x)?.radial)
    }
}

/// One-shot integral norm; builds the quadrature each call. Use
/// [`PolarSystem`] when evaluating many points against the same matrix.
pub fn ms_norm(e: &SquareMatrix, x: &DVector<f64>) -> Result<f64> {
    PolarSystem::new(e)?.ms_norm(x)
}

/// One-shot polar decomposition.
pub fn tau(e: &SquareMatrix, x: &DVector<f64>) -> Result<PolarDecomposition> {
    PolarSystem::new(e)?.decompose(x)
}

/// Which realization of the `E^T`-homogeneous function ψ to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PsiVariant {
    /// ψ(ξ) = τ_{E^T}(ξ); works for every admissible exponent.
    #[serde(rename = "tau")]
    TauBased,
    /// ψ(ξ) = Σ_j |ξ_j|^{1/a_j}; only for diagonal E = diag(a_1..a_d).
    /// Kept as a fast path and an independent oracle for the tau variant.
    #[serde(rename = "diag")]
    DiagonalClosedForm,
}

/// A continuous `E^T`-homogeneous function: ψ(c^{E^T} ξ) = c ψ(ξ), positive
/// away from the origin, ψ(0) = 0.
#[derive(Debug, Clone)]
pub struct HomogeneousFunction {
    variant: PsiVariant,
    exponent: SquareMatrix,
    system: Option<PolarSystem>,
    inverse_diag: Option<Vec<f64>>,
}

impl HomogeneousFunction {
    pub fn new(variant: PsiVariant, e: &SquareMatrix) -> Result<Self> {
        match variant {
            PsiVariant::TauBased => Ok(Self {
                variant,
                exponent: e.clone(),
                system: Some(PolarSystem::new(&e.transpose())?),
                inverse_diag: None,
            }),
            PsiVariant::DiagonalClosedForm => {
                if !e.is_diagonal() {
                    return Err(Error::Config(
                        "closed-form psi requires a diagonal exponent matrix; \
                         use the tau variant instead"
                            .into(),
                    ));
                }
                let diag: Vec<f64> = (0..e.order()).map(|i| e.as_dmatrix()[(i, i)]).collect();
                if let Some(bad) = diag.iter().find(|a| **a <= 0.0) {
                    return Err(Error::Domain(format!(
                        "diagonal psi exponents must be positive, found {bad}"
                    )));
                }
                Ok(Self {
                    variant,
                    exponent: e.clone(),
                    system: None,
                    inverse_diag: Some(diag.iter().map(|a| 1.0 / a).collect()),
                })
            }
        }
    }

    pub fn variant(&self) -> PsiVariant {
        self.variant
    }

    pub fn exponent(&self) -> &SquareMatrix {
        &self.exponent
    }

    pub fn eval(&self, xi: &DVector<f64>) -> Result<f64> {
        if xi.len() != self.exponent.order() {
            return Err(Error::InvalidInput(format!(
                "psi argument has dimension {}, exponent is {}x{}",
                xi.len(),
                self.exponent.order(),
                self.exponent.order()
            )));
        }
        match self.variant {
            PsiVariant::TauBased => self.system.as_ref().unwrap().radial(xi),
            PsiVariant::DiagonalClosedForm => Ok(xi
                .iter()
                .zip(self.inverse_diag.as_ref().unwrap())
                .map(|(&x, &inv_a)| x.abs().powf(inv_a))
                .sum()),
        }
    }
}

/// Evaluates ψ at a frequency point.
pub fn psi_eval(f: &HomogeneousFunction, xi: &DVector<f64>) -> Result<f64> {
    f.eval(xi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Adaptive Simpson on the original integral ∫_0^1 ||t^E x|| / t dt for
    /// diagonal E, with t^E evaluated in closed form so the oracle shares
    /// nothing with the panel quadrature or the matrix exponential.
    fn simpson_oracle_diag(diag: &[f64], x: &[f64], eps: f64) -> f64 {
        let f = |t: f64| -> f64 {
            let s: f64 = diag
                .iter()
                .zip(x)
                .map(|(&a, &xi)| {
                    let v = t.powf(a) * xi;
                    v * v
                })
                .sum();
            s.sqrt() / t
        };
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
            let c = 0.5 * (a + b);
            (b - a) / 6.0 * (f(a) + 4.0 * f(c) + f(b))
        }
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64, whole: f64, depth: u32) -> f64 {
            let c = 0.5 * (a + b);
            let left = simpson(f, a, c);
            let right = simpson(f, c, b);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * eps {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, c, eps / 2.0, left, depth - 1) + rec(f, c, b, eps / 2.0, right, depth - 1)
            }
        }
        // start at a tiny positive t; for positive diagonals the integrand
        // extends continuously with value ~ t^{a_min - 1}
        let a0 = 1e-12;
        rec(&f, a0, 1.0, eps, simpson(&f, a0, 1.0), 48)
    }

    #[test]
    fn norm_under_identity_is_euclidean() {
        for d in [2usize, 3] {
            let e = SquareMatrix::identity(d);
            let sys = PolarSystem::new(&e).unwrap();
            let x = DVector::from_fn(d, |i, _| 1.0 + i as f64);
            assert_relative_eq!(sys.ms_norm(&x).unwrap(), x.norm(), max_relative = 1e-10);
        }
    }

    #[test]
    fn norm_scalar_case_closed_form() {
        let e = SquareMatrix::diagonal(&[1.7]).unwrap();
        let x = DVector::from_element(1, 1.0);
        assert_relative_eq!(ms_norm(&e, &x).unwrap(), 1.0 / 1.7, max_relative = 1e-12);
    }

    #[test]
    fn norm_matches_simpson_oracle() {
        let e = SquareMatrix::diagonal(&[1.2, 1.5]).unwrap();
        let sys = PolarSystem::new(&e).unwrap();
        let x = DVector::from_vec(vec![1.0, 1.0]);
        let got = sys.ms_norm(&x).unwrap();
        let want = simpson_oracle_diag(&[1.2, 1.5], &[1.0, 1.0], 1e-13);
        assert_relative_eq!(got, want, max_relative = 1e-10);

        let x = DVector::from_vec(vec![-0.3, 2.0]);
        let got = sys.ms_norm(&x).unwrap();
        let want = simpson_oracle_diag(&[1.2, 1.5], &[-0.3, 2.0], 1e-13);
        assert_relative_eq!(got, want, max_relative = 1e-10);
    }

    #[test]
    fn zero_maps_to_zero() {
        let e = SquareMatrix::diagonal(&[1.2, 1.5]).unwrap();
        let sys = PolarSystem::new(&e).unwrap();
        let zero = DVector::zeros(2);
        assert_eq!(sys.ms_norm(&zero).unwrap(), 0.0);
        let dec = sys.decompose(&zero).unwrap();
        assert_eq!(dec.radial, 0.0);
        assert!(dec.direction.is_none());
    }

    #[test]
    fn decompose_identity_exponent() {
        let e = SquareMatrix::identity(3);
        let sys = PolarSystem::new(&e).unwrap();
        let x = DVector::from_vec(vec![3.0, 0.0, 4.0]);
        let dec = sys.decompose(&x).unwrap();
        assert_relative_eq!(dec.radial, 5.0, max_relative = 1e-9);
        let dir = dec.direction.unwrap();
        assert_relative_eq!(dir[0], 0.6, max_relative = 1e-8);
        assert_relative_eq!(dir[2], 0.8, max_relative = 1e-8);
    }

    #[test]
    fn decompose_scalar_closed_form() {
        let a = 1.25f64;
        let e = SquareMatrix::diagonal(&[a]).unwrap();
        let x = DVector::from_element(1, 2.0);
        let dec = tau(&e, &x).unwrap();
        assert_relative_eq!(dec.radial, (2.0 / a).powf(1.0 / a), max_relative = 1e-12);
    }

    #[test]
    fn radial_homogeneity_spot_check() {
        let e = SquareMatrix::diagonal(&[1.2, 1.5]).unwrap();
        let sys = PolarSystem::new(&e).unwrap();
        let x = DVector::from_vec(vec![0.7, -0.4]);
        let c = 3.0;
        let scaled = spectral::matrix_power(&e, c).unwrap().as_dmatrix() * &x;
        let lhs = sys.radial(&scaled).unwrap();
        let rhs = c * sys.radial(&x).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-6);
    }

    fn random_positive_exponent(rng: &mut ChaCha8Rng, d: usize) -> SquareMatrix {
        // random entries, then shift the diagonal until the spectrum is
        // comfortably positive
        let mut entries: Vec<f64> = (0..d * d).map(|_| rng.gen_range(-0.4..0.4)).collect();
        for i in 0..d {
            entries[i * d + i] += rng.gen_range(1.0..2.0);
        }
        SquareMatrix::from_row_major(d, &entries).unwrap()
    }

    #[test]
    fn radial_homogeneity_random_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x7a0);
        for _ in 0..30 {
            let d = rng.gen_range(1..=3usize);
            let e = random_positive_exponent(&mut rng, d);
            let sys = PolarSystem::new(&e).unwrap();
            for _ in 0..5 {
                let x = DVector::from_fn(d, |_, _| rng.gen_range(-2.0..2.0f64));
                if x.norm() < 1e-6 {
                    continue;
                }
                let c = 10f64.powf(rng.gen_range(-2.0..2.0));
                let scaled = spectral::matrix_power(&e, c).unwrap().as_dmatrix() * &x;
                let lhs = sys.radial(&scaled).unwrap();
                let rhs = c * sys.radial(&x).unwrap();
                assert_relative_eq!(lhs, rhs, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn reconstruction_and_unit_direction() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x7a1);
        for _ in 0..25 {
            let d = rng.gen_range(2..=3usize);
            let e = random_positive_exponent(&mut rng, d);
            let sys = PolarSystem::new(&e).unwrap();
            let x = DVector::from_fn(d, |_, _| rng.gen_range(-2.0..2.0f64));
            if x.norm() < 1e-6 {
                continue;
            }
            let dec = sys.decompose(&x).unwrap();
            let dir = dec.direction.clone().unwrap();
            let back = spectral::matrix_power(&e, dec.radial).unwrap().as_dmatrix() * &dir;
            assert_relative_eq!((back - &x).norm() / x.norm(), 0.0, epsilon = 1e-8);
            assert_relative_eq!(sys.ms_norm(&dir).unwrap(), 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn radial_vanishes_continuously_at_origin() {
        let e = SquareMatrix::diagonal(&[1.2, 1.5]).unwrap();
        let sys = PolarSystem::new(&e).unwrap();
        let x = DVector::from_vec(vec![1.0, 1.0]);
        let mut prev = f64::INFINITY;
        let mut last = 0.0;
        for k in 0..12 {
            let scaled = &x / 2f64.powi(k);
            let r = sys.radial(&scaled).unwrap();
            assert!(r < prev, "radial must shrink with the point");
            prev = r;
            last = r;
        }
        assert!(last < 1e-2 * sys.radial(&x).unwrap());
    }

    #[test]
    fn psi_diagonal_closed_form_value() {
        let e = SquareMatrix::diagonal(&[1.25]).unwrap();
        let psi = HomogeneousFunction::new(PsiVariant::DiagonalClosedForm, &e).unwrap();
        let xi = DVector::from_element(1, 32.0);
        assert_relative_eq!(psi.eval(&xi).unwrap(), 16.0, max_relative = 1e-12);
    }

    #[test]
    fn psi_tau_based_identity_exponent_is_euclidean() {
        let e = SquareMatrix::identity(2);
        let psi = HomogeneousFunction::new(PsiVariant::TauBased, &e).unwrap();
        let xi = DVector::from_vec(vec![3.0, 4.0]);
        assert_relative_eq!(psi.eval(&xi).unwrap(), 5.0, max_relative = 1e-9);
    }

    #[test]
    fn psi_homogeneity_both_variants() {
        let e = SquareMatrix::diagonal(&[1.2, 1.5]).unwrap();
        let c = 10.0f64;
        let scale = spectral::matrix_power(&e.transpose(), c).unwrap();
        for variant in [PsiVariant::TauBased, PsiVariant::DiagonalClosedForm] {
            let psi = HomogeneousFunction::new(variant, &e).unwrap();
            let xi = DVector::from_vec(vec![0.4, -1.1]);
            let lhs = psi.eval(&(scale.as_dmatrix() * &xi)).unwrap();
            let rhs = c * psi.eval(&xi).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-6);
        }
    }

    #[test]
    fn psi_variants_differ_by_bounded_direction_factor() {
        let e = SquareMatrix::diagonal(&[1.2, 1.5]).unwrap();
        let tau_psi = HomogeneousFunction::new(PsiVariant::TauBased, &e).unwrap();
        let diag_psi = HomogeneousFunction::new(PsiVariant::DiagonalClosedForm, &e).unwrap();
        let scale = spectral::matrix_power(&e.transpose(), 7.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0x7a2);
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for _ in 0..100 {
            let mut xi = DVector::from_fn(2, |_, _| rng.gen_range(-1.0..1.0f64));
            if xi.norm() < 1e-3 {
                continue;
            }
            xi /= xi.norm();
            let ratio = tau_psi.eval(&xi).unwrap() / diag_psi.eval(&xi).unwrap();
            lo = lo.min(ratio);
            hi = hi.max(ratio);
            // both scale identically, so the ratio is scale-invariant
            let scaled = scale.as_dmatrix() * &xi;
            let ratio_scaled = tau_psi.eval(&scaled).unwrap() / diag_psi.eval(&scaled).unwrap();
            assert_relative_eq!(ratio, ratio_scaled, max_relative = 1e-6);
        }
        assert!(lo > 0.0 && hi.is_finite() && hi / lo < 10.0);
    }

    #[test]
    fn psi_diag_rejects_non_diagonal() {
        let e = SquareMatrix::from_row_major(2, &[1.2, 0.3, 0.0, 1.5]).unwrap();
        assert!(HomogeneousFunction::new(PsiVariant::DiagonalClosedForm, &e).is_err());
        assert!(HomogeneousFunction::new(PsiVariant::TauBased, &e).is_ok());
    }

    #[test]
    fn psi_zero_is_zero() {
        let e = SquareMatrix::diagonal(&[1.2, 1.5]).unwrap();
        for variant in [PsiVariant::TauBased, PsiVariant::DiagonalClosedForm] {
            let psi = HomogeneousFunction::new(variant, &e).unwrap();
            assert_eq!(psi.eval(&DVector::zeros(2)).unwrap(), 0.0);
        }
    }

    #[test]
    fn polar_rejects_nonpositive_spectrum() {
        let e = SquareMatrix::diagonal(&[-0.5, 1.0]).unwrap();
        assert!(PolarSystem::new(&e).is_err());
    }
}
