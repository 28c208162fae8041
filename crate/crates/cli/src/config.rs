//! Experiment configuration files.

use std::path::Path;

use anyhow::{bail, Context};
use isomono_core::isoflow::FieldSign;
use isomono_core::wstructures::{PoleCoefficients, WFieldSample};
use isomono_core::{FuchsianConnection, SquareMatrix, C64};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    SchlesingerAudit,
    GaudinRun,
    Monodromy,
    SpectralCurve,
    Wcheck,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::SchlesingerAudit => "schlesinger-audit",
            Self::GaudinRun => "gaudin-run",
            Self::Monodromy => "monodromy",
            Self::SpectralCurve => "spectral-curve",
            Self::Wcheck => "wcheck",
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the command on the command line when present.
    pub command: Option<CommandName>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    pub connection: Option<FuchsianConnection>,
    pub random: Option<RandomConfig>,
    pub flow: Option<FlowConfig>,
    #[serde(default)]
    pub monodromy: MonodromyConfig,
    #[serde(default)]
    pub spectral: SpectralConfig,
    pub wcheck: Option<WcheckConfig>,
    #[serde(default)]
    pub thresholds: Thresholds,
    /// Write the CSV time series for flow commands.
    #[serde(default = "yes")]
    pub csv: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub ode_tol: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            ode_tol: 1e-10,
            max_steps: 200_000,
        }
    }
}

/// Seeded random system instead of an explicit connection.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomConfig {
    pub points: usize,
    pub dim: usize,
    /// `|t_end|` of the random Schlesinger flow.
    #[serde(default = "default_t_abs")]
    pub t_abs: f64,
}

fn default_t_abs() -> f64 {
    0.3
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub direction: usize,
    #[serde(with = "pair")]
    pub t_end: C64,
    #[serde(default = "correct")]
    pub sign: FieldSign,
}

fn correct() -> FieldSign {
    FieldSign::Correct
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonodromyConfig {
    #[serde(with = "option_pair")]
    pub base: Option<C64>,
    pub max_word_len: Option<usize>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralConfig {
    pub probes: usize,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self { probes: 50 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WcheckConfig {
    #[serde(default = "hundred")]
    pub samples: usize,
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    #[serde(default = "twenty")]
    pub maps: usize,
    #[serde(default = "six")]
    pub order_z: usize,
    #[serde(default = "two")]
    pub order_zbar: usize,
    /// Explicit samples whose identity residuals are reported.
    #[serde(default)]
    pub samples_explicit: Vec<WFieldSample>,
    pub poles: Option<PoleConfig>,
}

fn hundred() -> usize {
    100
}
fn twenty() -> usize {
    20
}
fn six() -> usize {
    6
}
fn two() -> usize {
    2
}
fn default_dims() -> Vec<usize> {
    vec![2, 3]
}

/// Declared leading pole coefficients checked against the residues.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoleConfig {
    #[serde(with = "pair")]
    pub kappa: C64,
    pub level: usize,
    pub points: Vec<PoleEntry>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoleEntry {
    pub residue: SquareMatrix,
    pub declared: PoleCoefficients,
}

/// Pass thresholds; defaults are the acceptance values.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    pub invariant_drift: f64,
    pub eigen_drift: f64,
    pub sum_p_drift: f64,
    pub product_defect: f64,
    pub big_loop: f64,
    pub spectral_drift: f64,
    pub bracket_max: f64,
    pub curve_residual: f64,
    pub structural: f64,
    pub reduction: f64,
    pub from_map: f64,
    pub pole_metadata: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            invariant_drift: 1e-6,
            eigen_drift: 1e-9,
            sum_p_drift: 1e-10,
            product_defect: 1e-7,
            big_loop: 1e-7,
            spectral_drift: 1e-8,
            bracket_max: 1e-11,
            curve_residual: 1e-10,
            structural: 1e-11,
            reduction: 1e-12,
            from_map: 1e-12,
            pole_metadata: 1e-12,
        }
    }
}

mod pair {
    use isomono_core::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(c: &C64, s: S) -> Result<S::Ok, S::Error> {
        [c.re, c.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

mod option_pair {
    use isomono_core::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(c: &Option<C64>, s: S) -> Result<S::Ok, S::Error> {
        c.map(|c| [c.re, c.im]).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<C64>, D::Error> {
        Ok(Option::<[f64; 2]>::deserialize(d)?.map(|[re, im]| C64::new(re, im)))
    }
}

/// Reads a config without validating it; errors name the offending field path.
pub fn parse(path: &Path) -> anyhow::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        anyhow::anyhow!("{}: field `{}`: {}", path.display(), field, e.inner())
    })?;
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn validate(&self, command: CommandName) -> anyhow::Result<()> {
        if let Some(c) = self.command {
            if c != command {
                bail!("field `command`: config is for `{}`, not `{}`", c.as_str(), command.as_str());
            }
        }
        let tol = self.integrator.ode_tol;
        if !(tol > 0.0 && tol < 1e-2) {
            bail!("field `integrator.ode_tol`: must lie in (0, 1e-2), got {tol:e}");
        }
        if self.integrator.max_steps == 0 {
            bail!("field `integrator.max_steps`: must be positive");
        }
        let needs_system = command != CommandName::Wcheck;
        match (&self.connection, &self.random) {
            (Some(_), Some(_)) => bail!("field `random`: give either `connection` or `random`, not both"),
            (None, None) if needs_system => bail!("field `connection`: missing (or give `random`)"),
            _ => {}
        }
        if let Some(r) = &self.random {
            if r.points < 2 || r.dim < 2 {
                bail!("field `random`: need at least 2 points of dimension at least 2");
            }
            if self.seed.is_none() {
                bail!("field `seed`: required when `random` is used");
            }
        }
        if command == CommandName::SchlesingerAudit && self.connection.is_some() && self.flow.is_none() {
            bail!("field `flow`: required with an explicit connection");
        }
        if command == CommandName::SpectralCurve && self.seed.is_none() {
            bail!("field `seed`: required for the spectral-curve probes");
        }
        if command == CommandName::Wcheck {
            let Some(w) = &self.wcheck else {
                bail!("field `wcheck`: missing");
            };
            if (w.samples > 0 || w.maps > 0) && self.seed.is_none() {
                bail!("field `seed`: required for random identity sweeps");
            }
            if w.dims.iter().any(|&n| n == 0) {
                bail!("field `wcheck.dims`: dimensions must be positive");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> anyhow::Result<ExperimentConfig> {
        let dir = tempfile::tempdir()?;
        let p = dir.path().join("c.json");
        std::fs::write(&p, text)?;
        let cfg = super::parse(&p)?;
        cfg.validate(CommandName::Monodromy)?;
        Ok(cfg)
    }

    #[test]
    fn missing_kappa_names_the_field() {
        let err = parse(r#"{"connection": {"points": [[0,0],[1,0]], "residues": []}}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("connection"), "{msg}");
        assert!(msg.contains("kappa"), "{msg}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = parse(r#"{"seed": 1, "random": {"points": 3, "dim": 2}, "colour": 3}"#).unwrap_err();
        assert!(err.to_string().contains("colour"));
    }

    #[test]
    fn random_needs_a_seed() {
        let err = parse(r#"{"random": {"points": 3, "dim": 2}}"#).unwrap_err();
        assert!(err.to_string().contains("`seed`"));
        assert!(parse(r#"{"seed": 4, "random": {"points": 3, "dim": 2}}"#).is_ok());
    }

    #[test]
    fn thresholds_default_to_acceptance_values() {
        let cfg = parse(r#"{"seed": 4, "random": {"points": 3, "dim": 2}, "thresholds": {"big_loop": 1e-5}}"#).unwrap();
        assert_eq!(cfg.thresholds.big_loop, 1e-5);
        assert_eq!(cfg.thresholds.product_defect, 1e-7);
        assert_eq!(cfg.integrator.ode_tol, 1e-10);
    }
}
