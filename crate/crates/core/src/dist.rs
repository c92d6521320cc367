//! Dense joint distributions over the product alphabet.

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::numerics::{fmt_f64, Tolerances};
use crate::subset::SubsetIndex;

/// The full probability table p(x_1,…,x_M), stored dense and row-major.
///
/// Entries are validated to be non-negative and to sum to 1 within the
/// `prob_sum` tolerance (default 1e-12). Instances are immutable after
/// construction and safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    alphabet: Alphabet,
    probs: Vec<f64>,
}

impl JointDistribution {
    pub fn new(alphabet: Alphabet, probs: Vec<f64>) -> Result<Self> {
        Self::with_tolerances(alphabet, probs, &Tolerances::default())
    }

    pub fn with_tolerances(
        alphabet: Alphabet,
        probs: Vec<f64>,
        tol: &Tolerances,
    ) -> Result<Self> {
        if probs.len() != alphabet.table_len() {
            return Err(Error::InvalidDistribution(format!(
                "table has {} entries, alphabet needs {}",
                probs.len(),
                alphabet.table_len()
            )));
        }
        if let Some(i) = probs.iter().position(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidDistribution(format!(
                "entry {i} is {} (must be finite and ≥ 0)",
                probs[i]
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > tol.prob_sum {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {sum}, expected 1 within {}",
                tol.prob_sum
            )));
        }
        Ok(JointDistribution { alphabet, probs })
    }

    /// Builds a distribution from non-negative weights by normalizing them.
    pub fn normalized(alphabet: Alphabet, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != alphabet.table_len() {
            return Err(Error::InvalidDistribution(format!(
                "table has {} entries, alphabet needs {}",
                weights.len(),
                alphabet.table_len()
            )));
        }
        if let Some(i) = weights.iter().position(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidDistribution(format!(
                "weight {i} is {} (must be finite and ≥ 0)",
                weights[i]
            )));
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to 0".into()));
        }
        let probs = weights.into_iter().map(|w| w / sum).collect();
        Ok(JointDistribution {
            alphabet,
            probs,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn modality_count(&self) -> usize {
        self.alphabet.modality_count()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, x: &[usize]) -> f64 {
        self.probs[self.alphabet.index_of(x)]
    }

    pub fn full_set(&self) -> SubsetIndex {
        self.alphabet.full_set()
    }

    /// Marginal distribution over a non-empty `subset`, with modalities in
    /// ascending index order.
    pub fn marginalize(&self, subset: SubsetIndex) -> Result<JointDistribution> {
        let marg_alphabet = self.alphabet.project(subset)?;
        let probs = self.marginal_table(subset)?;
        Ok(JointDistribution {
            alphabet: marg_alphabet,
            probs,
        })
    }

    /// Raw marginal table over `subset` (empty subset yields the single cell
    /// of the empty product, [1.0]).
    pub(crate) fn marginal_table(&self, subset: SubsetIndex) -> Result<Vec<f64>> {
        subset.validate(self.modality_count())?;
        if subset.is_empty() {
            return Ok(vec![1.0]);
        }
        let members = subset.indices();
        // Strides of the marginal table, aligned to member modalities.
        let mut strides = vec![1usize; members.len()];
        for j in (0..members.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * self.alphabet.size(members[j + 1]);
        }
        let len: usize = members.iter().map(|&m| self.alphabet.size(m)).product();
        let mut out = vec![0.0; len];
        self.alphabet.visit_cells(|idx, digits| {
            let mi: usize = members
                .iter()
                .zip(&strides)
                .map(|(&m, &s)| digits[m] * s)
                .sum();
            out[mi] += self.probs[idx];
        });
        Ok(out)
    }

    /// Serializes to the versioned text format: header, alphabet sizes, and
    /// the flat row-major probability list as decimal floats (17 significant
    /// digits, so values round-trip exactly).
    ///
    /// ```text
    /// elbolab-dist v1
    /// sizes: 2 3
    /// probs:
    /// 1.6666666666666666e-1
    /// ...
    /// ```
    pub fn to_text(&self) -> String {
        let mut out = String::from("elbolab-dist v1\n");
        out.push_str("sizes:");
        for s in self.alphabet.sizes() {
            out.push_str(&format!(" {s}"));
        }
        out.push_str("\nprobs:\n");
        for p in &self.probs {
            out.push_str(&fmt_f64(*p));
            out.push('\n');
        }
        out
    }

    /// Parses the format produced by [`JointDistribution::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty input".into()))?;
        if header.trim() != "elbolab-dist v1" {
            return Err(Error::Parse(format!("unexpected header {header:?}")));
        }
        let sizes_line = lines
            .next()
            .ok_or_else(|| Error::Parse("missing sizes line".into()))?;
        let sizes_str = sizes_line
            .strip_prefix("sizes:")
            .ok_or_else(|| Error::Parse("expected `sizes:` line".into()))?;
        let sizes = sizes_str
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("bad size {t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        match lines.next() {
            Some(l) if l.trim() == "probs:" => {}
            other => return Err(Error::Parse(format!("expected `probs:` line, got {other:?}"))),
        }
        let mut probs = Vec::new();
        for line in lines {
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            probs.push(
                t.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad probability {t:?}: {e}")))?,
            );
        }
        let alphabet = Alphabet::new(sizes)?;
        JointDistribution::new(alphabet, probs)
    }
}
