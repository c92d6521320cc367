//! The generative discrepancy Δ(X,S) and its diagnostics.
//!
//! Δ(X,S) = Σ_{A∈S} ω_A · H(X_{{1,…,M}∖A} | X_A) is the weighted average of
//! the information in the modalities an encoder never observes. It is a
//! property of the data and the mixture alone — no model parameters enter —
//! and it upper-bounds how closely the sub-sampled objective can approach
//! the expected log-evidence.

use crate::alphabet::Alphabet;
use crate::dist::JointDistribution;
use crate::error::{Error, Result};
use crate::mixture::{Family, SubsetMixture};
use crate::subset::SubsetIndex;

/// Δ(X,S) together with its per-subset conditional-entropy terms.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DeltaReport {
    pub total: f64,
    /// (subset A, weight ω_A, H(X_complement | X_A)) in canonical order.
    pub per_subset: Vec<DeltaTerm>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct DeltaTerm {
    pub subset: SubsetIndex,
    pub weight: f64,
    pub conditional_entropy: f64,
}

/// Computes Δ(dist, S).
///
/// A full-set subset contributes a structurally exact 0 (the conditional
/// entropy of an empty complement is zero by definition, not by float
/// cancellation), so mixtures without sub-sampling report `total == 0.0`.
pub fn delta(dist: &JointDistribution, mixture: &SubsetMixture) -> Result<DeltaReport> {
    let m = dist.modality_count();
    if mixture.modality_count() != m {
        return Err(Error::DimensionMismatch(format!(
            "mixture is over {} modalities, distribution has {m}",
            mixture.modality_count()
        )));
    }
    let mut per_subset = Vec::with_capacity(mixture.len());
    let mut total = 0.0;
    for (subset, weight) in mixture.iter() {
        let complement = subset.complement(m);
        let term = if complement.is_empty() {
            0.0
        } else {
            dist.conditional_entropy(complement, subset)?
        };
        total += weight * term;
        per_subset.push(DeltaTerm {
            subset,
            weight,
            conditional_entropy: term,
        });
    }
    Ok(DeltaReport { total, per_subset })
}

/// How Δ changes when modality M+1 is added to a family preset.
///
/// `difference_direct` is Δ(X⁺,S⁺) − Δ(X,S) computed from two explicit
/// discrepancy evaluations; `difference_decomposed` reassembles the same
/// quantity from information terms:
///
/// ```text
/// difference = specific_subset_term + specific_new_term − shared_term
/// shared_term          = (1/|S| − 1/|S⁺|) · Σ_{A∈S} I(X_∖A ; X_{M+1} | X_A)
/// specific_subset_term = 1/(|S⁺||S|)      · Σ_{A∈S} H(X_A | X_{M+1})
/// specific_new_term    = 1/|S⁺|           · Σ_{A∈S} H(X_{M+1} | X)
/// ```
///
/// The two routes must agree; `increases` reports whether the specific
/// (new-information) terms dominate the shared one, i.e. whether the added
/// modality is diverse enough to grow the discrepancy.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DeltaExtensionAudit {
    pub family: Family,
    pub base_modalities: usize,
    pub delta_base: f64,
    pub delta_extended: f64,
    pub shared_term: f64,
    pub specific_subset_term: f64,
    pub specific_new_term: f64,
    pub difference_direct: f64,
    pub difference_decomposed: f64,
    pub increases: bool,
}

/// Audits the Δ change for `family` when going from the first
/// `base_modalities` modalities of `dist_plus` to all of them.
///
/// `dist_plus` must have `base_modalities + 1` modalities; the base
/// distribution is materialized as the explicit marginal over the first M.
pub fn delta_extension_audit(
    dist_plus: &JointDistribution,
    family: Family,
    base_modalities: usize,
) -> Result<DeltaExtensionAudit> {
    if family == Family::Mvae {
        return Err(Error::UnsupportedFamily {
            family: family.to_string(),
            reason: "extension analysis covers sub-sampling families only".into(),
        });
    }
    let m = base_modalities;
    if dist_plus.modality_count() != m + 1 {
        return Err(Error::DimensionMismatch(format!(
            "distribution has {} modalities, expected {}",
            dist_plus.modality_count(),
            m + 1
        )));
    }
    let (mixture, mixture_plus) = SubsetMixture::extend(family, m)?;
    let base = dist_plus.marginalize(SubsetIndex::full(m))?;
    let delta_base = delta(&base, &mixture)?.total;
    let delta_extended = delta(dist_plus, &mixture_plus)?.total;

    let new_modality = SubsetIndex::singleton(m);
    let full_base = SubsetIndex::full(m);
    let inv_s = 1.0 / mixture.len() as f64;
    let inv_s_plus = 1.0 / mixture_plus.len() as f64;

    let mut sum_cmi = 0.0;
    let mut sum_h_subset_given_new = 0.0;
    for (subset, _) in mixture.iter() {
        let unobserved = subset.complement(m);
        if !unobserved.is_empty() {
            sum_cmi +=
                dist_plus.conditional_mutual_information(unobserved, new_modality, subset)?;
        }
        sum_h_subset_given_new += dist_plus.conditional_entropy(subset, new_modality)?;
    }
    let h_new_given_base = dist_plus.conditional_entropy(new_modality, full_base)?;

    let shared_term = (inv_s - inv_s_plus) * sum_cmi;
    let specific_subset_term = inv_s_plus * inv_s * sum_h_subset_given_new;
    let specific_new_term = inv_s_plus * mixture.len() as f64 * h_new_given_base;

    let difference_direct = delta_extended - delta_base;
    let difference_decomposed = specific_subset_term + specific_new_term - shared_term;
    let increases = specific_subset_term + specific_new_term > shared_term;

    Ok(DeltaExtensionAudit {
        family,
        base_modalities: m,
        delta_base,
        delta_extended,
        shared_term,
        specific_subset_term,
        specific_new_term,
        difference_direct,
        difference_decomposed,
        increases,
    })
}

/// A conditional table p(z | x_A): one distribution over z per joint symbol
/// of the input modalities.
#[derive(Debug, Clone)]
pub struct StochasticChannel {
    inputs: usize,
    outputs: usize,
    /// Row-major: probs[input · outputs + output].
    probs: Vec<f64>,
}

impl StochasticChannel {
    pub fn new(inputs: usize, outputs: usize, probs: Vec<f64>) -> Result<Self> {
        if inputs == 0 || outputs == 0 {
            return Err(Error::InvalidChannel("empty input or output space".into()));
        }
        if probs.len() != inputs * outputs {
            return Err(Error::InvalidChannel(format!(
                "expected {} entries, got {}",
                inputs * outputs,
                probs.len()
            )));
        }
        for (i, row) in probs.chunks(outputs).enumerate() {
            if row.iter().any(|&p| p < 0.0 || !p.is_finite()) {
                return Err(Error::InvalidChannel(format!("row {i} has invalid entries")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidChannel(format!(
                    "row {i} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(StochasticChannel {
            inputs,
            outputs,
            probs,
        })
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn row(&self, input: usize) -> &[f64] {
        &self.probs[input * self.outputs..(input + 1) * self.outputs]
    }
}

/// Residual of the conditional-entropy decomposition through an encoding of
/// a subset.
///
/// For any channel Z that reads only x_A, the extended joint
/// p(x)·channel(z|x_A) satisfies
///
/// ```text
/// H(X | Z) = H(X_{∖A} | X_A) + H(X_A | Z)
/// ```
///
/// because Z ← X_A ⊥ X_{∖A} forms a Markov chain by construction. Returns
/// |lhs − rhs|, which must vanish (≤ 1e-9) for every valid channel.
///
/// The channel's input index is the row-major index over the subset's
/// modalities in ascending order, matching [`JointDistribution::marginalize`].
pub fn entropy_decomposition_residual(
    dist: &JointDistribution,
    subset: SubsetIndex,
    channel: &StochasticChannel,
) -> Result<f64> {
    let m = dist.modality_count();
    subset.validate(m)?;
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let subset_alphabet = dist.alphabet().project(subset)?;
    if channel.inputs() != subset_alphabet.table_len() {
        return Err(Error::InvalidChannel(format!(
            "channel has {} input symbols, subset {} has {}",
            channel.inputs(),
            subset,
            subset_alphabet.table_len()
        )));
    }

    let extended = extend_with_channel(dist, subset, channel)?;
    let x_all = SubsetIndex::full(m);
    let z = SubsetIndex::singleton(m);

    let lhs = extended.conditional_entropy(x_all, z)?;
    let unobserved = subset.complement(m);
    let rhs = dist.conditional_entropy(unobserved, subset)? + extended.conditional_entropy(subset, z)?;
    Ok((lhs - rhs).abs())
}

/// Joint p(x, z) = p(x)·channel(z | x_subset) over M+1 modalities, with z as
/// the final modality.
pub(crate) fn extend_with_channel(
    dist: &JointDistribution,
    subset: SubsetIndex,
    channel: &StochasticChannel,
) -> Result<JointDistribution> {
    let members = subset.indices();
    // Strides of the channel's input index over the subset digits.
    let mut strides = vec![1usize; members.len()];
    for j in (0..members.len().saturating_sub(1)).rev() {
        strides[j] = strides[j + 1] * dist.alphabet().size(members[j + 1]);
    }
    let mut sizes = dist.alphabet().sizes().to_vec();
    sizes.push(channel.outputs());
    let ext_alphabet = Alphabet::new(sizes)?;
    let z_count = channel.outputs();
    let mut probs = vec![0.0; ext_alphabet.table_len()];
    dist.alphabet().visit_cells(|idx, digits| {
        let input: usize = members
            .iter()
            .zip(&strides)
            .map(|(&m, &s)| digits[m] * s)
            .sum();
        let row = channel.row(input);
        let px = dist.probs()[idx];
        let base = idx * z_count;
        for (zi, &pz) in row.iter().enumerate() {
            probs[base + zi] = px * pz;
        }
    });
    JointDistribution::new(ext_alphabet, probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use approx::assert_relative_eq;

    const LN2: f64 = std::f64::consts::LN_2;
    const LN3: f64 = 1.0986122886681098;

    fn uniform(sizes: Vec<usize>) -> JointDistribution {
        let a = Alphabet::new(sizes).unwrap();
        let n = a.table_len();
        JointDistribution::new(a, vec![1.0 / n as f64; n]).unwrap()
    }

    fn shared_specific(classes: usize, noise: &[usize]) -> JointDistribution {
        // x_m = (c, n_m), all factors independent and uniform
        let sizes: Vec<usize> = noise.iter().map(|&n| classes * n).collect();
        let a = Alphabet::new(sizes).unwrap();
        let mut probs = vec![0.0; a.table_len()];
        let cell = 1.0 / (classes as f64 * noise.iter().map(|&n| n as f64).product::<f64>());
        a.visit_cells(|idx, digits| {
            let c0 = digits[0] / noise[0];
            if digits.iter().zip(noise).all(|(&d, &n)| d / n == c0) {
                probs[idx] = cell;
            }
        });
        JointDistribution::new(a, probs).unwrap()
    }

    #[test]
    fn delta_is_structurally_zero_without_subsampling() {
        let d = uniform(vec![2, 3]);
        let s = SubsetMixture::preset(Family::Mvae, 2).unwrap();
        let report = delta(&d, &s).unwrap();
        assert_eq!(report.total, 0.0);
        assert_eq!(report.per_subset[0].conditional_entropy, 0.0);
    }

    #[test]
    fn delta_of_independent_binary_mmvae_is_ln2() {
        let d = uniform(vec![2, 2]);
        let s = SubsetMixture::preset(Family::Mmvae, 2).unwrap();
        assert_relative_eq!(delta(&d, &s).unwrap().total, LN2, epsilon = 1e-12);
    }

    #[test]
    fn delta_matches_shared_specific_closed_form() {
        // K=2, N=(2,3), MoPoE: Δ = (ln3 + ln2 + 0)/3 with per-subset terms Σ_{m∉A} ln N_m
        let d = shared_specific(2, &[2, 3]);
        let s = SubsetMixture::preset(Family::Mopoe, 2).unwrap();
        let report = delta(&d, &s).unwrap();
        assert_relative_eq!(report.total, (LN3 + LN2) / 3.0, epsilon = 1e-12);
        assert_relative_eq!(report.per_subset[0].conditional_entropy, LN3, epsilon = 1e-12);
        assert_relative_eq!(report.per_subset[1].conditional_entropy, LN2, epsilon = 1e-12);
        assert_eq!(report.per_subset[2].conditional_entropy, 0.0);
    }

    #[test]
    fn delta_total_is_weighted_sum_of_terms() {
        let d = shared_specific(2, &[2, 2, 2]);
        let s = SubsetMixture::preset(Family::Mopoe, 3).unwrap();
        let report = delta(&d, &s).unwrap();
        let recomputed: f64 = report
            .per_subset
            .iter()
            .map(|t| t.weight * t.conditional_entropy)
            .sum();
        assert!((report.total - recomputed).abs() < 1e-10);
        assert!(report.total >= -1e-12);
    }

    #[test]
    fn delta_rejects_dimension_mismatch() {
        let d = uniform(vec![2, 2]);
        let s = SubsetMixture::preset(Family::Mmvae, 3).unwrap();
        assert!(matches!(delta(&d, &s), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn extension_audit_independent_new_modality() {
        // X_3 independent of (X_1, X_2): shared term is zero and Δ must grow.
        let d = uniform(vec![2, 2, 2]);
        for family in [Family::Mmvae, Family::Mopoe] {
            let audit = delta_extension_audit(&d, family, 2).unwrap();
            assert_relative_eq!(audit.shared_term, 0.0, epsilon = 1e-12);
            assert!(audit.increases);
            assert!(audit.difference_direct > 0.0);
            assert!((audit.difference_direct - audit.difference_decomposed).abs() < 1e-9);
        }
    }

    #[test]
    fn extension_audit_identical_modalities_is_flat() {
        // all three modalities equal: every cross conditional entropy is 0
        let a = Alphabet::new(vec![2, 2, 2]).unwrap();
        let mut probs = vec![0.0; 8];
        probs[a.index_of(&[0, 0, 0])] = 0.5;
        probs[a.index_of(&[1, 1, 1])] = 0.5;
        let d = JointDistribution::new(a, probs).unwrap();
        let audit = delta_extension_audit(&d, Family::Mmvae, 2).unwrap();
        assert_relative_eq!(audit.delta_base, 0.0, epsilon = 1e-12);
        assert_relative_eq!(audit.delta_extended, 0.0, epsilon = 1e-12);
        assert_relative_eq!(audit.difference_direct, 0.0, epsilon = 1e-12);
        assert!((audit.difference_direct - audit.difference_decomposed).abs() < 1e-9);
    }

    #[test]
    fn extension_audit_copy_of_first_modality() {
        // X_3 ≡ X_1, all modalities uniform binary, X_2 independent, MMVAE M=2.
        // Oracle: both sides assembled from definition-level entropies.
        let a = Alphabet::new(vec![2, 2, 2]).unwrap();
        let mut probs = vec![0.0; 8];
        for x1 in 0..2 {
            for x2 in 0..2 {
                probs[a.index_of(&[x1, x2, x1])] = 0.25;
            }
        }
        let d = JointDistribution::new(a, probs).unwrap();
        let audit = delta_extension_audit(&d, Family::Mmvae, 2).unwrap();

        // direct side: Δ at M=2 is ln2 (independent uniform pair); at M=3
        // every singleton leaves exactly one unobserved uniform bit, so Δ
        // stays at ln2 and the difference vanishes
        assert_relative_eq!(audit.delta_base, LN2, epsilon = 1e-12);
        assert_relative_eq!(audit.delta_extended, LN2, epsilon = 1e-12);
        assert_relative_eq!(audit.difference_direct, 0.0, epsilon = 1e-12);

        // decomposed side from hand-computed information terms:
        // Σ CMI = I(X2;X3|X1) + I(X1;X3|X2) = 0 + ln2
        // Σ H(X_A|X3) = H(X1|X3) + H(X2|X3) = 0 + ln2, H(X3|X) = 0
        let expected_shared = (1.0 / 2.0 - 1.0 / 3.0) * LN2;
        let expected_specific_subset = (1.0 / 6.0) * LN2;
        assert_relative_eq!(audit.shared_term, expected_shared, epsilon = 1e-12);
        assert_relative_eq!(audit.specific_subset_term, expected_specific_subset, epsilon = 1e-12);
        assert_relative_eq!(audit.specific_new_term, 0.0, epsilon = 1e-12);
        assert!((audit.difference_direct - audit.difference_decomposed).abs() < 1e-9);
    }

    #[test]
    fn extension_audit_flags_growth_for_label_plus_noise_data() {
        // independent per-modality noise around a shared label: the new
        // modality shares nothing beyond the label already pinned by any
        // observed subset, so the shared term vanishes and Δ must grow
        for m in 1..=5usize {
            let d = shared_specific(2, &vec![2; m + 1]);
            for family in [Family::Mmvae, Family::Mopoe] {
                let audit = delta_extension_audit(&d, family, m).unwrap();
                assert!(audit.shared_term.abs() < 1e-9, "{family} M={m}");
                assert!(audit.increases, "{family} M={m}");
                assert!(
                    audit.delta_extended > audit.delta_base - 1e-12,
                    "{family} M={m}: Δ decreased"
                );
                assert!((audit.difference_direct - audit.difference_decomposed).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn extension_audit_rejects_mvae() {
        let d = uniform(vec![2, 2, 2]);
        assert!(matches!(
            delta_extension_audit(&d, Family::Mvae, 2),
            Err(Error::UnsupportedFamily { .. })
        ));
    }

    #[test]
    fn channel_validation() {
        assert!(StochasticChannel::new(2, 2, vec![0.5, 0.5, 0.9, 0.2]).is_err());
        assert!(StochasticChannel::new(2, 2, vec![0.5, 0.5, -0.1, 1.1]).is_err());
        assert!(StochasticChannel::new(2, 2, vec![0.5, 0.5, 0.3]).is_err());
        assert!(StochasticChannel::new(2, 2, vec![0.5, 0.5, 0.3, 0.7]).is_ok());
    }

    #[test]
    fn decomposition_residual_identity_channel() {
        let d = shared_specific(2, &[2, 2]);
        let subset = SubsetIndex::singleton(0);
        let n = 4;
        let mut probs = vec![0.0; n * n];
        for i in 0..n {
            probs[i * n + i] = 1.0;
        }
        let channel = StochasticChannel::new(n, n, probs).unwrap();
        let residual = entropy_decomposition_residual(&d, subset, &channel).unwrap();
        assert!(residual < 1e-12);

        // identity channel also pins H(X_A | Z_A) = 0
        let ext = extend_with_channel(&d, subset, &channel).unwrap();
        let h = ext.conditional_entropy(subset, SubsetIndex::singleton(2)).unwrap();
        assert_relative_eq!(h, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn decomposition_residual_constant_channel() {
        let d = shared_specific(2, &[2, 3]);
        let subset = SubsetIndex::singleton(1);
        let inputs = 6;
        let channel = StochasticChannel::new(inputs, 3, vec![1.0 / 3.0; inputs * 3]).unwrap();
        let residual = entropy_decomposition_residual(&d, subset, &channel).unwrap();
        assert!(residual < 1e-12);

        // constant channel carries nothing: H(X|Z) = H(X)
        let ext = extend_with_channel(&d, subset, &channel).unwrap();
        let h_x_given_z = ext
            .conditional_entropy(SubsetIndex::full(2), SubsetIndex::singleton(2))
            .unwrap();
        assert_relative_eq!(h_x_given_z, d.entropy(d.full_set()).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn decomposition_residual_rejects_bad_shapes() {
        let d = uniform(vec![2, 2]);
        let channel = StochasticChannel::new(3, 2, vec![0.5; 6]).unwrap();
        assert!(entropy_decomposition_residual(&d, SubsetIndex::singleton(0), &channel).is_err());
        let ok = StochasticChannel::new(2, 2, vec![0.5; 4]).unwrap();
        assert!(entropy_decomposition_residual(&d, SubsetIndex::EMPTY, &ok).is_err());
    }
}
