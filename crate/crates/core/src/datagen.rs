//! Declarative generators for synthetic discrete multimodal joints with
//! controllable shared vs modality-specific information.
//!
//! Three variants:
//!
//! * `SharedSpecific` — x_m = (c, n_m): a class label c ~ U(K) shared by all
//!   modalities plus an independent uniform noise coordinate n_m ~ U(N_m).
//!   Symbols are encoded as c·N_m + n_m. Any single modality reveals c, so
//!   Δ has the closed form Σ_A ω_A Σ_{m∉A} ln N_m.
//! * `NoisyShared` — each modality reports the shared label through an
//!   independent symmetric corruption channel: x_m = c with probability
//!   1−ε_m, otherwise uniform over the K−1 other labels. The label stays
//!   shared but is no longer exactly recoverable from any one modality.
//! * `Repeated` — one base modality replicated `copies` times, perfectly
//!   correlated, so every modality determines all others.

use crate::alphabet::Alphabet;
use crate::dist::JointDistribution;
use crate::error::{Error, Result};
use crate::mixture::SubsetMixture;

/// Declarative description of a synthetic joint.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    SharedSpecific {
        classes: usize,
        noise_sizes: Vec<usize>,
    },
    NoisyShared {
        classes: usize,
        eps: Vec<f64>,
    },
    Repeated {
        base: Box<DatasetSpec>,
        copies: usize,
    },
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            DatasetSpec::SharedSpecific {
                classes,
                noise_sizes,
            } => {
                if *classes == 0 {
                    return Err(Error::InvalidParameter("classes must be ≥ 1".into()));
                }
                if noise_sizes.is_empty() || noise_sizes.contains(&0) {
                    return Err(Error::InvalidParameter(
                        "noise sizes must be a non-empty list of positive integers".into(),
                    ));
                }
            }
            DatasetSpec::NoisyShared { classes, eps } => {
                if *classes < 2 {
                    return Err(Error::InvalidParameter(
                        "label corruption needs at least 2 classes".into(),
                    ));
                }
                if eps.is_empty() || eps.iter().any(|&e| !(0.0..1.0).contains(&e)) {
                    return Err(Error::InvalidParameter(
                        "eps must be a non-empty list of values in [0,1)".into(),
                    ));
                }
            }
            DatasetSpec::Repeated { base, copies } => {
                if *copies == 0 {
                    return Err(Error::InvalidParameter("copies must be ≥ 1".into()));
                }
                base.validate()?;
                if base.modality_count() != 1 {
                    return Err(Error::InvalidParameter(
                        "repeated base must describe exactly one modality".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn modality_count(&self) -> usize {
        match self {
            DatasetSpec::SharedSpecific { noise_sizes, .. } => noise_sizes.len(),
            DatasetSpec::NoisyShared { eps, .. } => eps.len(),
            DatasetSpec::Repeated { copies, .. } => *copies,
        }
    }

    /// Number of shared-label classes.
    pub fn num_classes(&self) -> usize {
        match self {
            DatasetSpec::SharedSpecific { classes, .. } => *classes,
            DatasetSpec::NoisyShared { classes, .. } => *classes,
            DatasetSpec::Repeated { base, .. } => base.num_classes(),
        }
    }

    /// Per-modality alphabet sizes.
    pub fn modality_sizes(&self) -> Vec<usize> {
        match self {
            DatasetSpec::SharedSpecific {
                classes,
                noise_sizes,
            } => noise_sizes.iter().map(|&n| classes * n).collect(),
            DatasetSpec::NoisyShared { classes, eps } => vec![*classes; eps.len()],
            DatasetSpec::Repeated { base, copies } => {
                vec![base.modality_sizes()[0]; *copies]
            }
        }
    }

    /// The ground-truth shared label of an observation.
    ///
    /// For `SharedSpecific` (and `Repeated` over it) the label is read off
    /// any modality exactly. For `NoisyShared` the label is latent, so the
    /// exact posterior argmax over the full observation is used, ties
    /// resolved toward the smallest class index.
    pub fn label_of(&self, x: &[usize]) -> usize {
        match self {
            DatasetSpec::SharedSpecific { noise_sizes, .. } => x[0] / noise_sizes[0],
            DatasetSpec::NoisyShared { classes, eps } => {
                let mut best = (0usize, f64::NEG_INFINITY);
                for c in 0..*classes {
                    let mut log_post = 0.0;
                    for (m, &xm) in x.iter().enumerate() {
                        log_post += symbol_log_prob(*classes, eps[m], c, xm);
                    }
                    if log_post > best.1 {
                        best = (c, log_post);
                    }
                }
                best.0
            }
            DatasetSpec::Repeated { base, .. } => base.label_of(&x[..1]),
        }
    }
}

/// ln p(x_m | c) for the symmetric corruption channel.
fn symbol_log_prob(classes: usize, eps: f64, c: usize, x: usize) -> f64 {
    if x == c {
        (1.0 - eps).ln()
    } else {
        (eps / (classes - 1) as f64).ln()
    }
}

/// Materializes the exact joint distribution of a spec.
pub fn build_joint(spec: &DatasetSpec) -> Result<JointDistribution> {
    spec.validate()?;
    let alphabet = Alphabet::new(spec.modality_sizes())?;
    let probs = match spec {
        DatasetSpec::SharedSpecific {
            classes,
            noise_sizes,
        } => {
            let noise_cells: f64 = noise_sizes.iter().map(|&n| n as f64).product();
            let cell = 1.0 / (*classes as f64 * noise_cells);
            let mut probs = vec![0.0; alphabet.table_len()];
            alphabet.visit_cells(|idx, digits| {
                let c0 = digits[0] / noise_sizes[0];
                if digits
                    .iter()
                    .zip(noise_sizes)
                    .all(|(&d, &n)| d / n == c0)
                {
                    probs[idx] = cell;
                }
            });
            probs
        }
        DatasetSpec::NoisyShared { classes, eps } => {
            let k = *classes;
            let prior = 1.0 / k as f64;
            let mut probs = vec![0.0; alphabet.table_len()];
            alphabet.visit_cells(|idx, digits| {
                let mut p = 0.0;
                for c in 0..k {
                    let mut term = prior;
                    for (m, &xm) in digits.iter().enumerate() {
                        term *= if xm == c {
                            1.0 - eps[m]
                        } else {
                            eps[m] / (k - 1) as f64
                        };
                    }
                    p += term;
                }
                probs[idx] = p;
            });
            probs
        }
        DatasetSpec::Repeated { base, .. } => {
            let base_joint = build_joint(base)?;
            let mut probs = vec![0.0; alphabet.table_len()];
            alphabet.visit_cells(|idx, digits| {
                let v = digits[0];
                if digits.iter().all(|&d| d == v) {
                    probs[idx] = base_joint.probs()[v];
                }
            });
            probs
        }
    };
    JointDistribution::new(alphabet, probs)
}

/// Closed-form Δ for `SharedSpecific`: any observed modality pins the label,
/// so each subset term is the entropy of the unobserved noise coordinates,
/// Σ_{m∉A} ln N_m.
pub fn closed_form_delta(spec: &DatasetSpec, mixture: &SubsetMixture) -> Result<f64> {
    let DatasetSpec::SharedSpecific { noise_sizes, .. } = spec else {
        return Err(Error::UnsupportedVariant(
            "closed-form Δ is available for the shared-specific variant only".into(),
        ));
    };
    spec.validate()?;
    if mixture.modality_count() != noise_sizes.len() {
        return Err(Error::DimensionMismatch(format!(
            "mixture is over {} modalities, spec has {}",
            mixture.modality_count(),
            noise_sizes.len()
        )));
    }
    let log_noise: Vec<f64> = noise_sizes.iter().map(|&n| (n as f64).ln()).collect();
    let mut total = 0.0;
    for (subset, weight) in mixture.iter() {
        let unobserved: f64 = (0..noise_sizes.len())
            .filter(|&m| !subset.contains(m))
            .map(|m| log_noise[m])
            .sum();
        total += weight * unobserved;
    }
    Ok(total)
}

/// Exact per-modality classifiers g_m(x_m) = argmax_c p(c|x_m), replacing
/// the pretrained networks a sampled pipeline would use. Ties break toward
/// the smallest class index.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesClassifier {
    classes: usize,
    tables: Vec<Vec<usize>>,
}

impl BayesClassifier {
    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn classify(&self, modality: usize, symbol: usize) -> usize {
        self.tables[modality][symbol]
    }

    pub fn table(&self, modality: usize) -> &[usize] {
        &self.tables[modality]
    }
}

/// The classifier table for a single modality.
pub fn bayes_classifier(spec: &DatasetSpec, modality: usize) -> Result<Vec<usize>> {
    spec.validate()?;
    if modality >= spec.modality_count() {
        return Err(Error::InvalidParameter(format!(
            "modality {} out of range ({} modalities)",
            modality + 1,
            spec.modality_count()
        )));
    }
    match spec {
        DatasetSpec::SharedSpecific { noise_sizes, .. } => {
            let n = noise_sizes[modality];
            let size = spec.num_classes() * n;
            Ok((0..size).map(|symbol| symbol / n).collect())
        }
        DatasetSpec::NoisyShared { classes, eps } => {
            let k = *classes;
            let e = eps[modality];
            let table = (0..k)
                .map(|symbol| {
                    // uniform label prior cancels; argmax over p(x|c)
                    let mut best = (0usize, f64::NEG_INFINITY);
                    for c in 0..k {
                        let lp = symbol_log_prob(k, e, c, symbol);
                        if lp > best.1 {
                            best = (c, lp);
                        }
                    }
                    best.0
                })
                .collect();
            Ok(table)
        }
        DatasetSpec::Repeated { base, .. } => bayes_classifier(base, 0),
    }
}

/// Classifier tables for every modality.
pub fn bayes_classifiers(spec: &DatasetSpec) -> Result<BayesClassifier> {
    let tables = (0..spec.modality_count())
        .map(|m| bayes_classifier(spec, m))
        .collect::<Result<Vec<_>>>()?;
    Ok(BayesClassifier {
        classes: spec.num_classes(),
        tables,
    })
}
