//! Simulation and fractal analysis of multivariate operator-self-similar
//! symmetric alpha-stable random fields.
//!
//! A field `X : R^d -> R^m` is (E,D)-operator-self-similar when
//! `{X(c^E x)} = {c^D X(x)}` in distribution for every `c > 0`, where `E`
//! and `D` are real matrices with positive eigenvalue real parts. This
//! crate builds such fields from their harmonizable spectral representation
//!
//! ```text
//! X(x) = Re ∫ (e^{i<x,y>} - 1) ψ(y)^{-D - (q/α) I}  W_α(dy),   q = trace(E),
//! ```
//!
//! discretized on a truncated frequency lattice, and provides the machinery
//! to check the distributional claims that come with the construction:
//! characteristic functions, the scaling law, moduli of continuity and
//! range/graph fractal dimensions.
//!
//! Module map:
//!
//! * [`spectral`] — matrix powers `c^A`, eigenvalue-real-part summaries and
//!   validation of the exponent pair (E, D).
//! * [`polar`] — generalized polar coordinates `(τ_E, l_E)` and
//!   `E^T`-homogeneous functions ψ.
//! * [`stablerng`] — reproducible stable samplers: symmetric scalars,
//!   positive (totally skewed) scalars and isotropic complex vectors.
//! * [`fieldsim`] — frequency plans, field synthesis, and the deterministic
//!   characteristic-function exponent quadrature.
//! * [`dims`] — closed-form Hausdorff dimensions of the range and graph.
//! * [`analysis`] — empirical characteristic functions, scaling-law checks,
//!   box-counting dimension estimates and the modulus-of-continuity
//!   statistic.
//! * [`config`] — the TOML run configuration shared with the CLI.

pub mod analysis;
pub mod config;
pub mod dims;
pub mod error;
pub mod fieldsim;
pub mod polar;
pub mod spectral;
pub mod stablerng;

pub use analysis::{BoxDimFit, CFProbe, ModulusStatistic, ScalingReport};
pub use config::RunConfig;
pub use dims::DimensionReport;
pub use error::{Error, Result};
pub use fieldsim::{FieldSample, FrequencyPlan, MatrixConvention};
pub use polar::{HomogeneousFunction, PolarDecomposition, PsiVariant};
pub use spectral::{ExponentPair, SpectrumSummary, SquareMatrix};
pub use stablerng::{SeededStream, StableParams};
