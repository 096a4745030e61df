//! Run configuration: a JSON file whose values may be overridden by flags.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use blaschke_core::frames::Tolerances;
use blaschke_core::operators::{IsometryKind, IsometrySpec, ShiftKind};
use blaschke_core::{BlaschkeProduct, Error as CoreError, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, ConfigError, Result};

/// Smallest truncation accepted from a config file.
pub const MIN_DIM: usize = 8;

/// A complex number as `[re, im]`.
pub type Pair = [f64; 2];

pub fn to_c64(p: Pair) -> C64 {
    C64::new(p[0], p[1])
}

pub fn to_pair(z: C64) -> Pair {
    [z.re, z.im]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub blaschke: BlaschkeConfig,
    pub isometry: IsometryConfig,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series_order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceConfig>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlaschkeConfig {
    #[serde(default = "unit_tau")]
    pub tau: Pair,
    pub roots: RootsConfig,
}

fn unit_tau() -> Pair {
    [1.0, 0.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RootsConfig {
    List(Vec<Pair>),
    Random { random: RandomRoots },
}

/// Roots drawn uniformly from the disc of radius `max_modulus`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomRoots {
    pub degree: usize,
    pub max_modulus: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindName {
    RightShift,
    MultShift,
    DiagonalUnitary,
    WoldSum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsometryConfig {
    pub kind: KindName,
    /// Multiplier for `mult_shift`; for `wold_sum` selects a multiplicative
    /// shift block instead of the right shift.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    /// Diagonal phases in radians. Default: `2 pi (k - 1) / size`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitary_dim: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub christensen: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub borderline_factor: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// Flag values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub dim: Option<usize>,
    pub seed: Option<u64>,
    pub series_order: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Validated config with the library objects it describes. `config` has
/// random roots replaced by the drawn values.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub config: RunConfig,
    pub blaschke: BlaschkeProduct,
    pub spec: IsometrySpec,
    pub tolerances: Tolerances,
}

fn default_phases(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}

fn core_to_config(field: &str, e: CoreError) -> ConfigError {
    ConfigError::new(field, e)
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            CliError::Config(ConfigError::new(
                "<root>",
                format_args!("line {}, column {}: {e}", e.line(), e.column()),
            ))
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(n) = o.dim {
            self.dim = n;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if o.series_order.is_some() {
            self.series_order = o.series_order;
        }
        if o.out.is_some() || o.format.is_some() {
            let out = self.output.get_or_insert(OutputConfig {
                path: None,
                format: Format::Json,
            });
            if let Some(p) = &o.out {
                out.path = Some(p.clone());
            }
            if let Some(f) = o.format {
                out.format = f;
            }
        }
    }

    pub fn format(&self) -> Format {
        self.output.as_ref().map(|o| o.format).unwrap_or_default()
    }

    pub fn output_path(&self) -> Option<&Path> {
        self.output.as_ref().and_then(|o| o.path.as_deref())
    }

    fn roots(&self) -> std::result::Result<Vec<C64>, ConfigError> {
        match &self.blaschke.roots {
            RootsConfig::List(list) => Ok(list.iter().copied().map(to_c64).collect()),
            RootsConfig::Random { random } => {
                if !(0.0..1.0).contains(&random.max_modulus) {
                    return Err(ConfigError::new(
                        "blaschke.roots.random.max_modulus",
                        "must lie in [0, 1)",
                    ));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                Ok((0..random.degree)
                    .map(|_| {
                        let r = random.max_modulus * rng.gen::<f64>().sqrt();
                        C64::from_polar(r, rng.gen_range(0.0..TAU))
                    })
                    .collect())
            }
        }
    }

    fn spec(&self) -> std::result::Result<IsometrySpec, ConfigError> {
        let iso = &self.isometry;
        let n = self.dim;
        let unexpected = |field: &str, what: bool| {
            if what {
                Err(ConfigError::new(
                    format!("isometry.{field}"),
                    format_args!("not used by {:?}", iso.kind),
                ))
            } else {
                Ok(())
            }
        };
        let kind = match iso.kind {
            KindName::RightShift => {
                unexpected("p", iso.p.is_some())?;
                unexpected("phases", iso.phases.is_some())?;
                unexpected("unitary_dim", iso.unitary_dim.is_some())?;
                IsometryKind::RightShift
            }
            KindName::MultShift => {
                unexpected("phases", iso.phases.is_some())?;
                unexpected("unitary_dim", iso.unitary_dim.is_some())?;
                let p = iso
                    .p
                    .ok_or_else(|| ConfigError::new("isometry.p", "required for mult_shift"))?;
                IsometryKind::MultShift { p }
            }
            KindName::DiagonalUnitary => {
                unexpected("p", iso.p.is_some())?;
                unexpected("unitary_dim", iso.unitary_dim.is_some())?;
                let phases = iso.phases.clone().unwrap_or_else(|| default_phases(n));
                if phases.len() != n {
                    return Err(ConfigError::new(
                        "isometry.phases",
                        format_args!("{} phases for dim {n}", phases.len()),
                    ));
                }
                IsometryKind::DiagonalUnitary { phases }
            }
            KindName::WoldSum => {
                let u = match (&iso.phases, iso.unitary_dim) {
                    (Some(ph), Some(u)) if ph.len() != u => {
                        return Err(ConfigError::new(
                            "isometry.phases",
                            format_args!("{} phases for unitary_dim {u}", ph.len()),
                        ))
                    }
                    (Some(ph), _) => ph.len(),
                    (None, Some(u)) => u,
                    (None, None) => {
                        return Err(ConfigError::new(
                            "isometry.unitary_dim",
                            "required for wold_sum",
                        ))
                    }
                };
                if u == 0 || u >= n {
                    return Err(ConfigError::new(
                        "isometry.unitary_dim",
                        format_args!("must lie in 1..{n}"),
                    ));
                }
                let unitary_phases = iso.phases.clone().unwrap_or_else(|| default_phases(u));
                let shift = iso.p.map_or(ShiftKind::Right, ShiftKind::Mult);
                IsometryKind::WoldSum {
                    unitary_phases,
                    shift,
                }
            }
        };
        let field = match iso.kind {
            KindName::MultShift | KindName::WoldSum if iso.p.is_some() => "isometry.p",
            _ => "isometry",
        };
        IsometrySpec::new(kind, n).map_err(|e| core_to_config(field, e))
    }

    fn tolerances(&self) -> std::result::Result<Tolerances, ConfigError> {
        let mut t = Tolerances::default();
        if let Some(o) = &self.tolerances {
            for (name, value, slot) in [
                ("christensen", o.christensen, &mut t.christensen),
                ("formula", o.formula, &mut t.formula),
                (
                    "borderline_factor",
                    o.borderline_factor,
                    &mut t.borderline_factor,
                ),
            ] {
                if let Some(v) = value {
                    if !(v.is_finite() && v > 0.0) {
                        return Err(ConfigError::new(
                            format!("tolerances.{name}"),
                            "must be positive",
                        ));
                    }
                    *slot = v;
                }
            }
            if t.borderline_factor < 1.0 {
                return Err(ConfigError::new(
                    "tolerances.borderline_factor",
                    "must be at least 1",
                ));
            }
        }
        Ok(t)
    }

    /// Validates every field before any computation.
    pub fn resolve(&self) -> std::result::Result<Resolved, ConfigError> {
        if self.dim < MIN_DIM {
            return Err(ConfigError::new(
                "dim",
                format_args!("must be at least {MIN_DIM}"),
            ));
        }
        let roots = self.roots()?;
        let tau = to_c64(self.blaschke.tau);
        let blaschke = BlaschkeProduct::new(tau, roots.clone()).map_err(|e| match e {
            CoreError::NonUnimodularTau { .. } => core_to_config("blaschke.tau", e),
            CoreError::RootOutsideDisc { index, .. } => {
                core_to_config(&format!("blaschke.roots[{index}]"), e)
            }
            e => core_to_config("blaschke", e),
        })?;
        if self.series_order.is_none() {
            blaschke
                .default_order()
                .map_err(|e| core_to_config("series_order", e))?;
        }
        let spec = self.spec()?;
        let tolerances = self.tolerances()?;
        let mut config = self.clone();
        config.blaschke.roots = RootsConfig::List(roots.into_iter().map(to_pair).collect());
        Ok(Resolved {
            config,
            blaschke,
            spec,
            tolerances,
        })
    }
}
