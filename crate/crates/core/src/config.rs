//! Run configuration: a TOML file with explicit matrix orders and row-major
//! entries, shared by the CLI and the library test harnesses.
//!
//! The file round-trips losslessly through [`RunConfig::from_toml_str`] and
//! [`RunConfig::to_toml_string`]; artifacts embed the SHA-256 of the
//! canonical serialization so every output can be traced to the exact
//! configuration and seed that produced it.
//!
//! Schema:
//!
//! ```toml
//! [exponents]
//! e_order = 1          # d; E is d x d, row-major
//! e_entries = [1.25]
//! d_order = 1          # m; D is m x m, row-major
//! d_entries = [0.5]
//!
//! [field]
//! alpha = 1.5          # stability index in (0, 2]
//! psi = "tau"          # "tau" (any E) or "diag" (diagonal E only)
//! spacing = 0.0981747  # frequency lattice spacing h
//! radius = 201.0619    # frequency cutoff R
//! resolution = 1025    # spatial points per axis on [0, 1]
//! realizations = 10
//! seed = 42
//!
//! [cf_check]           # optional; defaults derived from dimensions
//! points = [[1.0]]
//! thetas = [[0.5], [1.0], [2.0]]
//! allowance = 0.02
//!
//! [scaling_check]      # optional
//! c = 2.0
//! points = [[0.5], [1.0]]
//! thetas = [[0.5], [1.0], [2.0]]
//! allowance = 0.02
//!
//! [boxdim]             # optional
//! eps_levels = 12
//! target = "both"      # "range" | "graph" | "both"
//!
//! [modulus]            # optional
//! epsilon = 0.05
//! delta = 0.5
//! levels = 10          # coarse lattice has 2^levels + 1 points per axis
//! ```

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::polar::{HomogeneousFunction, PsiVariant};
use crate::spectral::{validate_pair, ExponentPair, SquareMatrix};
use crate::stablerng::StableParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentsConfig {
    pub e_order: usize,
    pub e_entries: Vec<f64>,
    pub d_order: usize,
    pub d_entries: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub alpha: f64,
    pub psi: PsiVariant,
    pub spacing: f64,
    pub radius: f64,
    pub resolution: usize,
    pub realizations: usize,
    /// TOML's integers are signed 64-bit; the bit pattern is the RNG seed.
    pub seed: i64,
}

impl FieldConfig {
    pub fn seed_u64(&self) -> u64 {
        self.seed as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CfCheckConfig {
    pub points: Vec<Vec<f64>>,
    pub thetas: Vec<Vec<f64>>,
    #[serde(default = "default_allowance")]
    pub allowance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingCheckConfig {
    pub c: f64,
    pub points: Vec<Vec<f64>>,
    pub thetas: Vec<Vec<f64>>,
    #[serde(default = "default_allowance")]
    pub allowance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoxDimTarget {
    Range,
    Graph,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxDimConfig {
    #[serde(default = "default_eps_levels")]
    pub eps_levels: usize,
    #[serde(default = "default_boxdim_target")]
    pub target: BoxDimTarget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulusConfig {
    #[serde(default = "default_modulus_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_modulus_delta")]
    pub delta: f64,
    #[serde(default = "default_modulus_levels")]
    pub levels: u32,
}

fn default_allowance() -> f64 {
    0.02
}

fn default_eps_levels() -> usize {
    12
}

fn default_boxdim_target() -> BoxDimTarget {
    BoxDimTarget::Both
}

fn default_modulus_epsilon() -> f64 {
    0.05
}

fn default_modulus_delta() -> f64 {
    0.5
}

fn default_modulus_levels() -> u32 {
    10
}

/// The full run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub exponents: ExponentsConfig,
    pub field: FieldConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cf_check: Option<CfCheckConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling_check: Option<ScalingCheckConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boxdim: Option<BoxDimConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<ModulusConfig>,
}

/// A config whose matrices passed spectral validation, plus the derived
/// objects every subcommand needs.
#[derive(Debug)]
pub struct ValidatedConfig {
    pub config: RunConfig,
    pub pair: ExponentPair,
    pub psi: HomogeneousFunction,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config parse failed: {e}")))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("config serialization failed: {e}")))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    /// SHA-256 of the canonical serialization, hex-encoded.
    pub fn hash(&self) -> Result<String> {
        let canonical = self.to_toml_string()?;
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        Ok(hex_string(&hasher.finalize()))
    }

    /// Runs the spectral validation and builds ψ; every subcommand starts
    /// here.
    pub fn validate(&self) -> Result<ValidatedConfig> {
        let e = SquareMatrix::from_row_major(self.exponents.e_order, &self.exponents.e_entries)?;
        let d = SquareMatrix::from_row_major(self.exponents.d_order, &self.exponents.d_entries)?;
        let pair = validate_pair(&e, &d)?;
        StableParams::new(self.field.alpha, 1.0)?;
        if self.field.resolution < 2 {
            return Err(Error::Validation(
                "field.resolution must be at least 2".into(),
            ));
        }
        if self.field.realizations < 1 {
            return Err(Error::Validation(
                "field.realizations must be at least 1".into(),
            ));
        }
        if !(self.field.spacing > 0.0 && self.field.radius > self.field.spacing) {
            return Err(Error::Validation(
                "field needs 0 < spacing < radius".into(),
            ));
        }
        let psi = HomogeneousFunction::new(self.field.psi, pair.e())?;
        Ok(ValidatedConfig {
            config: self.clone(),
            pair,
            psi,
        })
    }

    /// CF-check options, synthesized from the dimensions when absent.
    pub fn cf_check_options(&self) -> CfCheckConfig {
        self.cf_check.clone().unwrap_or_else(|| CfCheckConfig {
            points: default_points(self.exponents.e_order),
            thetas: default_thetas(self.exponents.d_order),
            allowance: default_allowance(),
        })
    }

    pub fn scaling_check_options(&self) -> ScalingCheckConfig {
        self.scaling_check
            .clone()
            .unwrap_or_else(|| ScalingCheckConfig {
                c: 2.0,
                points: default_points(self.exponents.e_order),
                thetas: default_thetas(self.exponents.d_order),
                allowance: default_allowance(),
            })
    }

    pub fn boxdim_options(&self) -> BoxDimConfig {
        self.boxdim.clone().unwrap_or(BoxDimConfig {
            eps_levels: default_eps_levels(),
            target: default_boxdim_target(),
        })
    }

    pub fn modulus_options(&self) -> ModulusConfig {
        self.modulus.clone().unwrap_or(ModulusConfig {
            epsilon: default_modulus_epsilon(),
            delta: default_modulus_delta(),
            levels: default_modulus_levels(),
        })
    }
}

fn default_points(d: usize) -> Vec<Vec<f64>> {
    vec![vec![0.5; d], vec![1.0; d]]
}

fn default_thetas(m: usize) -> Vec<Vec<f64>> {
    let axis = |scale: f64| {
        let mut v = vec![0.0; m];
        v[0] = scale;
        v
    };
    let mut out = vec![axis(0.5), axis(1.0), axis(2.0)];
    if m > 1 {
        out.push(vec![1.0 / (m as f64).sqrt(); m]);
    }
    out
}

fn hex_string(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_config() -> RunConfig {
        RunConfig {
            exponents: ExponentsConfig {
                e_order: 1,
                e_entries: vec![1.25],
                d_order: 1,
                d_entries: vec![0.5],
            },
            field: FieldConfig {
                alpha: 1.5,
                psi: PsiVariant::TauBased,
                spacing: 2.0 * std::f64::consts::PI / 64.0,
                radius: 64.0 * std::f64::consts::PI,
                resolution: 1025,
                realizations: 10,
                seed: 42,
            },
            cf_check: None,
            scaling_check: None,
            boxdim: None,
            modulus: None,
        }
    }

    #[test]
    fn roundtrip_is_lossless() {
        let cfg = sample_config();
        let text = cfg.to_toml_string().unwrap();
        let back = RunConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let cfg = sample_config();
        assert_eq!(cfg.hash().unwrap(), cfg.hash().unwrap());
        let mut other = cfg.clone();
        other.field.seed = 43;
        assert_ne!(cfg.hash().unwrap(), other.hash().unwrap());
    }

    #[test]
    fn validation_rejects_bad_spectrum_with_named_condition() {
        let mut cfg = sample_config();
        cfg.exponents.e_entries = vec![0.8];
        let err = cfg.validate().unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("lambda_max(D) < 1 < a_min(E)"),
            "message should name the violated condition: {msg}"
        );
    }

    #[test]
    fn validation_rejects_diag_psi_for_non_diagonal_e() {
        let mut cfg = sample_config();
        cfg.exponents.e_order = 2;
        cfg.exponents.e_entries = vec![1.2, 0.3, 0.0, 1.5];
        cfg.exponents.d_order = 1;
        cfg.exponents.d_entries = vec![0.5];
        cfg.field.psi = PsiVariant::DiagonalClosedForm;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"
[exponents]
e_order = 1
e_entries = [1.25]
d_order = 1
d_entries = [0.5]
mystery = 1

[field]
alpha = 1.5
psi = "tau"
spacing = 0.1
radius = 10.0
resolution = 16
realizations = 1
seed = 0
"#;
        assert!(RunConfig::from_toml_str(text).is_err());
    }

    #[test]
    fn optional_sections_parse_with_defaults() {
        let text = r#"
[exponents]
e_order = 1
e_entries = [1.25]
d_order = 1
d_entries = [0.5]

[field]
alpha = 1.5
psi = "diag"
spacing = 0.1
radius = 10.0
resolution = 16
realizations = 1
seed = 0

[boxdim]

[modulus]
epsilon = 0.1
"#;
        let cfg = RunConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.boxdim_options().eps_levels, 12);
        assert_eq!(cfg.boxdim_options().target, BoxDimTarget::Both);
        let m = cfg.modulus_options();
        assert_eq!(m.epsilon, 0.1);
        assert_eq!(m.delta, 0.5);
        // defaults synthesized for absent sections track the dimensions
        let cf = cfg.cf_check_options();
        assert_eq!(cf.points[0].len(), 1);
        assert_eq!(cf.thetas.len(), 3);
    }

    proptest! {
        #[test]
        fn roundtrip_survives_arbitrary_field_values(
            alpha in 0.1f64..2.0,
            spacing in 1e-3f64..1.0,
            radius_mult in 2.0f64..100.0,
            seed in any::<i64>(),
            realizations in 1usize..50,
        ) {
            let mut cfg = sample_config();
            cfg.field.alpha = alpha;
            cfg.field.spacing = spacing;
            cfg.field.radius = spacing * radius_mult;
            cfg.field.seed = seed;
            cfg.field.realizations = realizations;
            let text = cfg.to_toml_string().unwrap();
            let back = RunConfig::from_toml_str(&text).unwrap();
            prop_assert_eq!(cfg, back);
        }
    }
}
