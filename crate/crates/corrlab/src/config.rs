//! Experiment configuration: a JSON document with defaults, validation,
//! and a stable content hash stamped into every output file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::attack2::ResetPolicy;
use crate::channel::cascade;
use crate::error::{Error, Result};
use crate::gf2::{is_primitive, vetted_masks, ConnectionPolynomial, MAX_PRIMITIVITY_DEGREE};
use crate::rng::fnv1a64;

/// Connection polynomial as written in a config file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolySpec {
    /// Coefficient mask in hex, least significant bit is g_0.
    pub hex: String,
    /// Degree k.
    pub degree: u32,
}

impl PolySpec {
    pub fn parse(&self) -> Result<ConnectionPolynomial> {
        ConnectionPolynomial::from_hex(&self.hex, self.degree)
    }
}

/// Where attack 2 gets its channel parameter from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Use the configured p1 directly.
    #[default]
    Reproduce,
    /// Estimate the parameter from the received sequence per trial.
    Realistic,
}

fn default_trials() -> u64 {
    100
}
fn default_bins() -> usize {
    20
}
fn default_alpha() -> u32 {
    5
}
fn default_max_rounds() -> u32 {
    50
}
fn default_max_trials() -> u64 {
    1 << 20
}
fn default_seed() -> u64 {
    1
}
fn default_min_occupied() -> usize {
    3
}
fn default_out_dir() -> String {
    "out".into()
}

/// Full experiment description. Serializes to a flat JSON object;
/// unknown keys are rejected so typos surface instead of silently
/// falling back to defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub poly: PolySpec,
    /// Optional declared tap count; must match the polynomial if given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<u32>,
    /// Observed sequence length.
    pub n: usize,
    /// Keystream BSC parameter.
    pub p1: f64,
    /// Wiretap-decoder residual BSC parameter.
    pub p2: f64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    /// EXIT chart bin count.
    #[serde(default = "default_bins")]
    pub d: usize,
    /// Reliability-update iterations per round.
    #[serde(default = "default_alpha")]
    pub alpha: u32,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: u32,
    /// Attack-1 candidate cap.
    #[serde(default = "default_max_trials")]
    pub max_trials: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub reset: ResetPolicy,
    /// Minimum occupied EXIT bins for a meaningful verdict.
    #[serde(default = "default_min_occupied")]
    pub min_occupied_bins: usize,
    /// Cap on check-squaring depth; derived from n and k when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_squarings: Option<u32>,
    /// Aggregate-channel grid for the attack-1 sweep; a default grid is
    /// used when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_prime_grid: Option<Vec<f64>>,
    /// Main-channel parameter for the secrecy-capacity report.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_main: Option<f64>,
    /// Wiretap-channel parameter for the secrecy-capacity report.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_wire: Option<f64>,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
}

impl Default for ExperimentConfig {
    /// The large operating point: k=31 weight-7 polynomial, N=3100,
    /// p1=0.2 with a clean known-plaintext channel.
    fn default() -> Self {
        ExperimentConfig {
            poly: PolySpec {
                hex: "0x8000011F".into(),
                degree: 31,
            },
            t: None,
            n: 3100,
            p1: 0.2,
            p2: 0.0,
            trials: default_trials(),
            d: default_bins(),
            alpha: default_alpha(),
            max_rounds: default_max_rounds(),
            max_trials: default_max_trials(),
            seed: default_seed(),
            mode: Mode::default(),
            reset: ResetPolicy::default(),
            min_occupied_bins: default_min_occupied(),
            max_squarings: None,
            p_prime_grid: None,
            p_main: None,
            p_wire: None,
            out_dir: default_out_dir(),
        }
    }
}

fn check_probability(value: f64, field: &str) -> Result<()> {
    if !(0.0..=0.5).contains(&value) || !value.is_finite() {
        return Err(Error::Config(format!(
            "field {field}: probability {value} outside [0, 0.5]"
        )));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Aggregate channel seen by the eavesdropper.
    pub fn p_prime(&self) -> f64 {
        cascade(self.p1, self.p2)
    }

    /// Checks every invariant and returns the parsed polynomial.
    ///
    /// Polynomials up to the primitivity-test cap are walked for full
    /// period; higher degrees must come from the vetted table since an
    /// arbitrary mask cannot be certified at runtime.
    pub fn validate(&self) -> Result<ConnectionPolynomial> {
        let poly = self.poly.parse()?;
        if poly.degree() <= MAX_PRIMITIVITY_DEGREE {
            if !is_primitive(&poly)? {
                return Err(Error::Config(format!(
                    "field poly: {} (degree {}) is not primitive",
                    self.poly.hex,
                    poly.degree()
                )));
            }
        } else if !vetted_masks(poly.degree()).contains(&poly.mask()) {
            return Err(Error::Config(format!(
                "field poly: degree {} exceeds the runtime primitivity check \
                 and {} is not in the vetted table",
                poly.degree(),
                self.poly.hex,
            )));
        }
        if let Some(t) = self.t {
            if t != poly.t() {
                return Err(Error::Config(format!(
                    "field t: declared {t} but the polynomial has {} taps",
                    poly.t()
                )));
            }
        }
        if self.n <= poly.degree() as usize {
            return Err(Error::Config(format!(
                "field n: {} must exceed the polynomial degree {}",
                self.n,
                poly.degree()
            )));
        }
        check_probability(self.p1, "p1")?;
        check_probability(self.p2, "p2")?;
        if let Some(p) = self.p_main {
            check_probability(p, "p_main")?;
        }
        if let Some(p) = self.p_wire {
            check_probability(p, "p_wire")?;
        }
        if let Some(grid) = &self.p_prime_grid {
            if grid.is_empty() {
                return Err(Error::Config("field p_prime_grid: empty grid".into()));
            }
            for &p in grid {
                check_probability(p, "p_prime_grid")?;
            }
        }
        if self.trials == 0 {
            return Err(Error::Config("field trials: must be at least 1".into()));
        }
        if self.d == 0 {
            return Err(Error::Config("field d: need at least one bin".into()));
        }
        if self.alpha == 0 {
            return Err(Error::Config("field alpha: must be at least 1".into()));
        }
        if self.max_rounds == 0 {
            return Err(Error::Config("field max_rounds: must be at least 1".into()));
        }
        if self.max_trials == 0 {
            return Err(Error::Config("field max_trials: must be at least 1".into()));
        }
        if self.min_occupied_bins == 0 {
            return Err(Error::Config(
                "field min_occupied_bins: must be at least 1".into(),
            ));
        }
        Ok(poly)
    }

    /// Parses a JSON document; syntax errors carry line and column.
    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s)
            .map_err(|e| Error::Config(format!("line {}, column {}: {e}", e.line(), e.column())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Stable content hash over the canonical serialization; stamped
    /// into every output header so files name the run that produced
    /// them. The output directory is not part of the experiment and is
    /// excluded, so the same run written to two places hashes alike.
    pub fn config_hash(&self) -> u64 {
        let mut canonical = self.clone();
        canonical.out_dir = String::new();
        let text = serde_json::to_string(&canonical).expect("config serializes");
        fnv1a64(text.as_bytes())
    }
}

/// Parses the `degree:hex` shorthand used by the CLI polynomial flag.
pub fn parse_k_poly(s: &str) -> Result<PolySpec> {
    let (degree, hex) = s.split_once(':').ok_or_else(|| {
        Error::Config(format!("--k-poly {s:?}: expected the form degree:hex"))
    })?;
    let degree: u32 = degree
        .parse()
        .map_err(|e| Error::Config(format!("--k-poly {s:?}: bad degree: {e}")))?;
    let spec = PolySpec {
        hex: hex.to_string(),
        degree,
    };
    spec.parse()?;
    Ok(spec)
}
