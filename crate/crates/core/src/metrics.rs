//! Exact evaluation metrics: leave-one-out generative coherence and linear
//! classification of latent representations.
//!
//! Sampling is replaced by enumeration throughout, so both metrics are
//! deterministic real numbers, not estimates.

use crate::datagen::{BayesClassifier, DatasetSpec};
use crate::dist::JointDistribution;
use crate::error::{Error, Result};
use crate::model::TabularModel;
use crate::numerics::log_softmax_into;
use crate::subset::SubsetIndex;

/// Per-modality leave-one-out coherence values and their mean.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CoherenceReport {
    pub per_modality: Vec<f64>,
    pub average: f64,
}

/// Leave-one-out generative coherence.
///
/// For each modality m, the model encodes A = {1,…,M}∖{m}, generates x̂_m
/// from the decoder, and the per-modality classifier judges whether x̂_m
/// carries the sample's shared label:
///
/// ```text
/// coherence_m = Σ_x p(x) Σ_z p(z|x_A) Σ_{x̂_m} q(x̂_m|z) · 1{g_m(x̂_m) = y(x)}
/// ```
pub fn loo_coherence(
    model: &TabularModel,
    dist: &JointDistribution,
    classifiers: &BayesClassifier,
    spec: &DatasetSpec,
) -> Result<CoherenceReport> {
    let mcount = model.modality_count();
    if mcount < 2 {
        return Err(Error::LeaveOneOutUndefined);
    }
    if dist.alphabet() != model.alphabet() {
        return Err(Error::DimensionMismatch(
            "model and distribution alphabets differ".into(),
        ));
    }
    if spec.modality_sizes() != model.alphabet().sizes() {
        return Err(Error::DimensionMismatch(
            "dataset spec does not match the model alphabet".into(),
        ));
    }
    let classes = spec.num_classes();
    if classifiers.classes() != classes {
        return Err(Error::DimensionMismatch(
            "classifier class count does not match the dataset spec".into(),
        ));
    }
    let z = model.latent_size();
    let enc_log = model.encoder_log_tables();
    let dec_log = model.decoder_log_tables();

    // hit[m][z·K + c] = Σ_{x̂_m} q(x̂_m|z) · 1{g_m(x̂_m) = c}
    let mut hit = Vec::with_capacity(mcount);
    for m in 0..mcount {
        let mut t = vec![0.0; z * classes];
        for k in 0..z {
            for (b, &lq) in dec_log[m].row(k).iter().enumerate() {
                t[k * classes + classifiers.classify(m, b)] += lq.exp();
            }
        }
        hit.push(t);
    }

    let mut per_modality = vec![0.0; mcount];
    let mut score_full = vec![0.0; z];
    let mut score = vec![0.0; z];
    let mut log_post = vec![0.0; z];
    dist.alphabet().visit_cells(|idx, x| {
        let px = dist.probs()[idx];
        if px <= 0.0 {
            return;
        }
        let y = spec.label_of(x);
        score_full.fill(0.0);
        for (m, &xm) in x.iter().enumerate() {
            for (s, &l) in score_full.iter_mut().zip(enc_log[m].row(xm)) {
                *s += l;
            }
        }
        for (m, &xm) in x.iter().enumerate() {
            // leave-one-out product: drop modality m's expert from the full product
            let row = enc_log[m].row(xm);
            for k in 0..z {
                score[k] = score_full[k] - row[k];
            }
            log_softmax_into(&score, &mut log_post);
            let mut coherent = 0.0;
            for k in 0..z {
                coherent += log_post[k].exp() * hit[m][k * classes + y];
            }
            per_modality[m] += px * coherent;
        }
    });

    let average = per_modality.iter().sum::<f64>() / mcount as f64;
    Ok(CoherenceReport {
        per_modality,
        average,
    })
}

/// Trains a multinomial linear probe (softmax regression) on the posterior
/// probability vectors p(z|x_subset) and returns the exact expected accuracy
/// Σ_x p(x)·1{prediction(x) = y(x)}.
///
/// Full-batch gradient descent from zero-initialized weights, so the result
/// is deterministic in (steps, step_size). Argmax ties resolve toward the
/// smallest class index.
pub fn latent_linear_classification(
    model: &TabularModel,
    dist: &JointDistribution,
    spec: &DatasetSpec,
    subset: SubsetIndex,
    steps: usize,
    step_size: f64,
) -> Result<f64> {
    if dist.alphabet() != model.alphabet() {
        return Err(Error::DimensionMismatch(
            "model and distribution alphabets differ".into(),
        ));
    }
    if spec.modality_sizes() != model.alphabet().sizes() {
        return Err(Error::DimensionMismatch(
            "dataset spec does not match the model alphabet".into(),
        ));
    }
    subset.validate(model.modality_count())?;
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    if step_size <= 0.0 || !step_size.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "step size must be positive, got {step_size}"
        )));
    }
    let classes = spec.num_classes();
    let z = model.latent_size();

    // dataset of (weight, representation, label) over the support
    let mut examples: Vec<(f64, Vec<f64>, usize)> = Vec::new();
    let mut result: Result<()> = Ok(());
    dist.alphabet().visit_cells(|idx, x| {
        if result.is_err() {
            return;
        }
        let px = dist.probs()[idx];
        if px <= 0.0 {
            return;
        }
        match model.encode_subset(x, subset) {
            Ok(rep) => examples.push((px, rep, spec.label_of(x))),
            Err(e) => result = Err(e),
        }
    });
    result?;

    let mut weights = vec![0.0; classes * z];
    let mut bias = vec![0.0; classes];
    let mut logits = vec![0.0; classes];
    let mut probs = vec![0.0; classes];
    let mut grad_w = vec![0.0; classes * z];
    let mut grad_b = vec![0.0; classes];
    for _ in 0..steps {
        grad_w.fill(0.0);
        grad_b.fill(0.0);
        for (w, rep, label) in &examples {
            for c in 0..classes {
                logits[c] = bias[c]
                    + weights[c * z..(c + 1) * z]
                        .iter()
                        .zip(rep)
                        .map(|(&wk, &rk)| wk * rk)
                        .sum::<f64>();
            }
            crate::numerics::softmax_into(&logits, &mut probs);
            for c in 0..classes {
                let err = w * (probs[c] - if c == *label { 1.0 } else { 0.0 });
                grad_b[c] += err;
                for (gw, &rk) in grad_w[c * z..(c + 1) * z].iter_mut().zip(rep) {
                    *gw += err * rk;
                }
            }
        }
        for (wk, gk) in weights.iter_mut().zip(&grad_w) {
            *wk -= step_size * gk;
        }
        for (bk, gk) in bias.iter_mut().zip(&grad_b) {
            *bk -= step_size * gk;
        }
    }

    let mut accuracy = 0.0;
    for (w, rep, label) in &examples {
        let mut best = (0usize, f64::NEG_INFINITY);
        for c in 0..classes {
            let score = bias[c]
                + weights[c * z..(c + 1) * z]
                    .iter()
                    .zip(rep)
                    .map(|(&wk, &rk)| wk * rk)
                    .sum::<f64>();
            if score > best.1 {
                best = (c, score);
            }
        }
        if best.0 == *label {
            accuracy += w;
        }
    }
    Ok(accuracy)
}
