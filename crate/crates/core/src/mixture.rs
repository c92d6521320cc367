//! Subset mixtures: the weighted sets of modality subsets that define
//! mixture-based multimodal encoders.
//!
//! The three named families decompose the joint encoder as
//!
//! * `Mvae`  — one product of all experts: S = {{1,…,M}}
//! * `Mmvae` — mixture of unimodal experts: S = {{1},…,{M}}, weights 1/M
//! * `Mopoe` — mixture over every non-empty subset: S = 𝒫(M)∖{∅}, weights 1/(2^M−1)
//!
//! Arbitrary subsets with non-uniform weights are supported through
//! [`SubsetMixture::custom`].

use crate::error::{Error, Result};
use crate::subset::{SubsetIndex, MAX_MODALITIES};

/// Default limit on the number of subsets a preset may enumerate.
pub const DEFAULT_MAX_SUBSETS: usize = 4096;

/// Weights within `WEIGHT_SUM_TOL` of 1 are accepted untouched; sums off by
/// at most `WEIGHT_RENORM_TOL` are renormalized (flagged); anything worse is
/// an error.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
pub const WEIGHT_RENORM_TOL: f64 = 1e-9;

/// The named mixture families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Mvae,
    Mmvae,
    Mopoe,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Mvae, Family::Mmvae, Family::Mopoe];

    pub fn id(self) -> &'static str {
        match self {
            Family::Mvae => "mvae",
            Family::Mmvae => "mmvae",
            Family::Mopoe => "mopoe",
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mvae" => Ok(Family::Mvae),
            "mmvae" => Ok(Family::Mmvae),
            "mopoe" | "mopoe-vae" => Ok(Family::Mopoe),
            other => Err(Error::InvalidMixture(format!("unknown family {other:?}"))),
        }
    }
}

/// A validated set S = {(A, ω_A)} of non-empty subsets with weights summing
/// to 1, stored in canonical order (ascending bitmask).
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetMixture {
    modality_count: usize,
    entries: Vec<(SubsetIndex, f64)>,
    renormalized: bool,
}

impl SubsetMixture {
    /// Builds the preset for a family, with uniform weights.
    pub fn preset(family: Family, modality_count: usize) -> Result<Self> {
        Self::preset_with_cap(family, modality_count, DEFAULT_MAX_SUBSETS)
    }

    pub fn preset_with_cap(family: Family, modality_count: usize, cap: usize) -> Result<Self> {
        if modality_count == 0 {
            return Err(Error::InvalidMixture("modality count must be ≥ 1".into()));
        }
        if modality_count > MAX_MODALITIES {
            return Err(Error::InvalidMixture(format!(
                "at most {MAX_MODALITIES} modalities supported"
            )));
        }
        let entries: Vec<(SubsetIndex, f64)> = match family {
            Family::Mvae => vec![(SubsetIndex::full(modality_count), 1.0)],
            Family::Mmvae => {
                let w = 1.0 / modality_count as f64;
                (0..modality_count)
                    .map(|m| (SubsetIndex::singleton(m), w))
                    .collect()
            }
            Family::Mopoe => {
                if modality_count >= 63 || (1usize << modality_count) - 1 > cap {
                    return Err(Error::BudgetExceeded {
                        cells: 1usize
                            .checked_shl(modality_count as u32)
                            .map(|c| c - 1)
                            .unwrap_or(usize::MAX),
                        cap,
                    });
                }
                let count = (1usize << modality_count) - 1;
                let w = 1.0 / count as f64;
                (1..=count as u32)
                    .map(|bits| (SubsetIndex::from_bits(bits), w))
                    .collect()
            }
        };
        Ok(SubsetMixture {
            modality_count,
            entries,
            renormalized: false,
        })
    }

    /// Validates an arbitrary list of (subset, weight) pairs.
    ///
    /// Near-miss weight sums (within [`WEIGHT_RENORM_TOL`]) are renormalized
    /// and flagged via [`SubsetMixture::was_renormalized`]; larger deviations
    /// are rejected.
    pub fn custom(modality_count: usize, entries: Vec<(SubsetIndex, f64)>) -> Result<Self> {
        if modality_count == 0 || modality_count > MAX_MODALITIES {
            return Err(Error::InvalidMixture(format!(
                "modality count must be in 1..={MAX_MODALITIES}"
            )));
        }
        if entries.is_empty() {
            return Err(Error::InvalidMixture("mixture has no subsets".into()));
        }
        let mut entries = entries;
        entries.sort_by_key(|&(s, _)| s);
        for window in entries.windows(2) {
            if window[0].0 == window[1].0 {
                return Err(Error::InvalidMixture(format!(
                    "duplicate subset {}",
                    window[0].0
                )));
            }
        }
        let mut sum = 0.0;
        for &(subset, weight) in &entries {
            if subset.is_empty() {
                return Err(Error::InvalidMixture("subsets must be non-empty".into()));
            }
            subset
                .validate(modality_count)
                .map_err(|_| Error::InvalidMixture(format!(
                    "subset {subset} exceeds modality count {modality_count}"
                )))?;
            if !(0.0..=1.0).contains(&weight) || !weight.is_finite() {
                return Err(Error::InvalidMixture(format!(
                    "weight {weight} for subset {subset} not in [0,1]"
                )));
            }
            sum += weight;
        }
        let dev = (sum - 1.0).abs();
        let mut renormalized = false;
        if dev > WEIGHT_SUM_TOL {
            if dev > WEIGHT_RENORM_TOL {
                return Err(Error::InvalidMixture(format!(
                    "weights sum to {sum}, expected 1 within {WEIGHT_RENORM_TOL}"
                )));
            }
            for e in entries.iter_mut() {
                e.1 /= sum;
            }
            renormalized = true;
        }
        Ok(SubsetMixture {
            modality_count,
            entries,
            renormalized,
        })
    }

    /// The pair (S, S⁺) obtained by re-instantiating a family preset at M
    /// and M+1 modalities. Every subset of S reappears in S⁺ with the
    /// re-weighted coefficient; every new subset contains modality M+1.
    pub fn extend(family: Family, modality_count: usize) -> Result<(Self, Self)> {
        if family == Family::Mvae {
            return Err(Error::UnsupportedFamily {
                family: family.to_string(),
                reason: "extension analysis covers sub-sampling families only".into(),
            });
        }
        Ok((
            Self::preset(family, modality_count)?,
            Self::preset(family, modality_count + 1)?,
        ))
    }

    pub fn modality_count(&self) -> usize {
        self.modality_count
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in canonical (ascending bitmask) order.
    pub fn entries(&self) -> &[(SubsetIndex, f64)] {
        &self.entries
    }

    pub fn contains(&self, subset: SubsetIndex) -> bool {
        self.entries.binary_search_by_key(&subset, |&(s, _)| s).is_ok()
    }

    pub fn was_renormalized(&self) -> bool {
        self.renormalized
    }

    pub fn iter(&self) -> impl Iterator<Item = (SubsetIndex, f64)> + '_ {
        self.entries.iter().copied()
    }
}
