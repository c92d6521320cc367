//! Experiment configuration: a TOML file with typed sections, strict about
//! unknown keys, plus command-line overrides.
//!
//! ```toml
//! schema_version = 1
//!
//! [dataset]
//! variant = "shared-specific"      # shared-specific | noisy-shared | repeated
//! classes = 2
//! noise_sizes = [2, 2]
//!
//! [mixture]
//! family = "mmvae"                 # mvae | mmvae | mopoe | custom
//!
//! [model]
//! latent_size = 16
//! init_scale = 0.1
//! prior = "learned"                # learned | uniform
//!
//! [train]
//! beta = 1.0
//! steps = 2000
//! step_size = 0.5
//! momentum = 0.9
//! seeds = [0, 1, 2]
//! ```
//!
//! Modality numbers in configs are 1-based (custom mixture subsets list
//! modalities as 1..M). Any key can be overridden from the command line with
//! `--set section.key=value`.

use std::str::FromStr;

use elbolab::{DatasetSpec, Family, PriorMode, SubsetIndex, SubsetMixture};
use serde::Deserialize;

use crate::error::CliError;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Environment variable overriding the dense-table cell cap.
pub const CELL_CAP_ENV: &str = "ELBOLAB_CELL_CAP";

pub fn cell_cap() -> Result<usize, CliError> {
    match std::env::var(CELL_CAP_ENV) {
        Ok(raw) => raw.trim().parse().map_err(|e| {
            CliError::Config(format!("{CELL_CAP_ENV}={raw:?} is not a valid cell count: {e}"))
        }),
        Err(_) => Ok(elbolab::DEFAULT_CELL_CAP),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema_version: u32,
    pub dataset: DatasetSection,
    #[serde(default)]
    pub mixture: MixtureSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub metrics: MetricsSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub variant: String,
    pub classes: Option<usize>,
    pub noise_sizes: Option<Vec<usize>>,
    pub eps: Option<Vec<f64>>,
    pub copies: Option<usize>,
    pub base: Option<Box<DatasetSection>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureSection {
    pub family: Option<String>,
    /// Custom mixtures: subsets as lists of 1-based modality numbers.
    pub subsets: Option<Vec<Vec<usize>>>,
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub latent_size: usize,
    pub init_scale: f64,
    pub prior: String,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            latent_size: 16,
            init_scale: 0.1,
            prior: "learned".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub beta: f64,
    pub steps: usize,
    pub step_size: f64,
    pub momentum: f64,
    pub seeds: Vec<u64>,
}

impl Default for TrainSection {
    fn default() -> Self {
        TrainSection {
            beta: 1.0,
            steps: 2000,
            step_size: 0.5,
            momentum: 0.9,
            seeds: vec![0],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsSection {
    pub linear_steps: usize,
    pub linear_step_size: f64,
}

impl Default for MetricsSection {
    fn default() -> Self {
        MetricsSection {
            linear_steps: 2000,
            linear_step_size: 0.5,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub betas: Option<Vec<f64>>,
    pub modalities: Option<Vec<usize>>,
    pub mode: String,
    pub families: Vec<String>,
    /// MoPoE enumerates 2^M − 1 subsets; modality sweeps refuse to go past
    /// this many modalities for that family.
    pub mopoe_modality_cap: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            betas: None,
            modalities: None,
            mode: "distinct".into(),
            families: vec!["mvae".into(), "mmvae".into(), "mopoe".into()],
            mopoe_modality_cap: 6,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub format: Option<String>,
}

/// Output format for sweep reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(CliError::Config(format!(
                "unknown format {other:?} (expected csv or json)"
            ))),
        }
    }
}

impl ConfigFile {
    /// Loads a config file, applies `--set section.key=value` overrides, and
    /// validates.
    pub fn load(path: &std::path::Path, overrides: &[String]) -> Result<ConfigFile, CliError> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        let mut value: toml::Value = raw
            .parse()
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        for entry in overrides {
            apply_override(&mut value, entry)?;
        }
        let config: ConfigFile = value
            .try_into()
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} not supported (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.dataset_spec()?.validate().map_err(config_err)?;
        if self.train.seeds.is_empty() {
            return Err(CliError::Config("train.seeds must not be empty".into()));
        }
        reject_duplicates(&self.train.seeds, "train.seeds")?;
        if self.train.beta <= 0.0 || self.train.beta.is_nan() {
            return Err(CliError::Config(format!(
                "train.beta must be positive, got {}",
                self.train.beta
            )));
        }
        if let Some(betas) = &self.sweep.betas {
            if betas.iter().any(|&b| b <= 0.0 || b.is_nan()) {
                return Err(CliError::Config("sweep.betas must all be positive".into()));
            }
            let mut sorted: Vec<f64> = betas.clone();
            sorted.sort_by(f64::total_cmp);
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(CliError::Config("sweep.betas contains duplicates".into()));
            }
        }
        if let Some(ms) = &self.sweep.modalities {
            if ms.contains(&0) {
                return Err(CliError::Config("sweep.modalities must be ≥ 1".into()));
            }
            reject_duplicates(ms, "sweep.modalities")?;
        }
        match self.sweep.mode.as_str() {
            "distinct" | "repeated" => {}
            other => {
                return Err(CliError::Config(format!(
                    "sweep.mode must be distinct or repeated, got {other:?}"
                )))
            }
        }
        let families = self.sweep_families()?;
        reject_duplicates(&families, "sweep.families")?;
        self.prior_mode()?;
        if let Some(f) = &self.output.format {
            f.parse::<OutputFormat>()?;
        }
        Ok(())
    }

    pub fn dataset_spec(&self) -> Result<DatasetSpec, CliError> {
        dataset_spec_of(&self.dataset)
    }

    pub fn prior_mode(&self) -> Result<PriorMode, CliError> {
        match self.model.prior.as_str() {
            "learned" => Ok(PriorMode::Learned),
            "uniform" => Ok(PriorMode::FixedUniform),
            other => Err(CliError::Config(format!(
                "model.prior must be learned or uniform, got {other:?}"
            ))),
        }
    }

    pub fn sweep_families(&self) -> Result<Vec<Family>, CliError> {
        self.sweep
            .families
            .iter()
            .map(|f| f.parse::<Family>().map_err(config_err))
            .collect()
    }

    /// The mixture used by `info` and `audit`: a named family preset over the
    /// dataset's modality count, or the explicit custom subsets.
    pub fn mixture(&self) -> Result<SubsetMixture, CliError> {
        let m = self.dataset_spec()?.modality_count();
        match self.mixture.family.as_deref() {
            None => Err(CliError::Config(
                "mixture.family is required (mvae, mmvae, mopoe, or custom)".into(),
            )),
            Some("custom") => {
                let subsets = self.mixture.subsets.as_ref().ok_or_else(|| {
                    CliError::Config("mixture.subsets is required for a custom mixture".into())
                })?;
                let weights = self.mixture.weights.as_ref().ok_or_else(|| {
                    CliError::Config("mixture.weights is required for a custom mixture".into())
                })?;
                if subsets.len() != weights.len() {
                    return Err(CliError::Config(format!(
                        "{} subsets but {} weights",
                        subsets.len(),
                        weights.len()
                    )));
                }
                let entries = subsets
                    .iter()
                    .zip(weights)
                    .map(|(subset, &w)| {
                        let indices: Vec<usize> = subset
                            .iter()
                            .map(|&n| {
                                if n == 0 || n > m {
                                    Err(CliError::Config(format!(
                                        "modality number {n} out of range 1..={m}"
                                    )))
                                } else {
                                    Ok(n - 1)
                                }
                            })
                            .collect::<Result<_, _>>()?;
                        Ok((SubsetIndex::from_indices(&indices), w))
                    })
                    .collect::<Result<Vec<_>, CliError>>()?;
                SubsetMixture::custom(m, entries).map_err(config_err)
            }
            Some(name) => {
                let family: Family = name.parse().map_err(config_err)?;
                SubsetMixture::preset(family, m).map_err(config_err)
            }
        }
    }
}

fn dataset_spec_of(section: &DatasetSection) -> Result<DatasetSpec, CliError> {
    let field = |name: &str| {
        CliError::Config(format!(
            "dataset.{name} is required for variant {:?}",
            section.variant
        ))
    };
    let forbid = |present: bool, name: &str| {
        if present {
            Err(CliError::Config(format!(
                "dataset.{name} is not a key of variant {:?}",
                section.variant
            )))
        } else {
            Ok(())
        }
    };
    match section.variant.as_str() {
        "shared-specific" => {
            forbid(section.eps.is_some(), "eps")?;
            forbid(section.copies.is_some(), "copies")?;
            forbid(section.base.is_some(), "base")?;
            Ok(DatasetSpec::SharedSpecific {
                classes: section.classes.ok_or_else(|| field("classes"))?,
                noise_sizes: section.noise_sizes.clone().ok_or_else(|| field("noise_sizes"))?,
            })
        }
        "noisy-shared" => {
            forbid(section.noise_sizes.is_some(), "noise_sizes")?;
            forbid(section.copies.is_some(), "copies")?;
            forbid(section.base.is_some(), "base")?;
            Ok(DatasetSpec::NoisyShared {
                classes: section.classes.ok_or_else(|| field("classes"))?,
                eps: section.eps.clone().ok_or_else(|| field("eps"))?,
            })
        }
        "repeated" => {
            forbid(section.classes.is_some(), "classes")?;
            forbid(section.noise_sizes.is_some(), "noise_sizes")?;
            forbid(section.eps.is_some(), "eps")?;
            let base = section.base.as_ref().ok_or_else(|| field("base"))?;
            Ok(DatasetSpec::Repeated {
                base: Box::new(dataset_spec_of(base)?),
                copies: section.copies.ok_or_else(|| field("copies"))?,
            })
        }
        other => Err(CliError::Config(format!(
            "dataset.variant must be shared-specific, noisy-shared, or repeated; got {other:?}"
        ))),
    }
}

pub fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn reject_duplicates<T: PartialEq + std::fmt::Debug>(
    values: &[T],
    key: &str,
) -> Result<(), CliError> {
    for (i, v) in values.iter().enumerate() {
        if values[..i].contains(v) {
            return Err(CliError::Config(format!("{key} contains duplicate {v:?}")));
        }
    }
    Ok(())
}

/// Applies one `section.key=value` override onto the raw TOML document.
/// The value is parsed as a TOML literal (so arrays and numbers work);
/// unparsable values are treated as strings.
fn apply_override(root: &mut toml::Value, entry: &str) -> Result<(), CliError> {
    let (path, raw_value) = entry.split_once('=').ok_or_else(|| {
        CliError::Config(format!("--set {entry:?} is not of the form section.key=value"))
    })?;
    let parsed: toml::Value = match format!("v = {raw_value}").parse::<toml::Table>() {
        Ok(table) => table["v"].clone(),
        Err(_) => toml::Value::String(raw_value.trim().to_string()),
    };
    let segments: Vec<&str> = path.trim().split('.').collect();
    if segments.is_empty() || segments.iter().any(|s| s.is_empty()) {
        return Err(CliError::Config(format!("--set {entry:?} has an empty key path")));
    }
    let mut cursor = root;
    for segment in &segments[..segments.len() - 1] {
        cursor = cursor
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("--set {entry:?}: {segment} is not a table")))?
            .entry(segment.to_string())
            .or_insert(toml::Value::Table(Default::default()));
    }
    cursor
        .as_table_mut()
        .ok_or_else(|| CliError::Config(format!("--set {entry:?}: not a table")))?
        .insert(segments[segments.len() - 1].to_string(), parsed);
    Ok(())
}

pub fn parse_seed_list(raw: &str) -> Result<Vec<u64>, CliError> {
    raw.split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|e| CliError::Config(format!("bad seed {t:?}: {e}")))
        })
        .collect()
}
