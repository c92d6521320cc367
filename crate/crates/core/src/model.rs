//! Tabular multimodal VAE over finite alphabets.
//!
//! All conditional distributions are softmax-parameterized:
//!
//! * encoder p(z | x_m) = softmax_z(encoder_logits[m][x_m, ·])
//! * decoder q(x_m | z) = softmax_{x_m}(decoder_logits[m][z, ·])
//! * prior  q(z) = softmax(prior_logits) or fixed uniform
//!
//! Softmax keeps every probability strictly positive, so product-of-experts
//! posteriors never vanish identically. Products are formed in log space
//! with max-subtraction before normalization.
//!
//! Models are immutable value objects during evaluation; training produces
//! new parameter states instead of mutating shared ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::alphabet::Alphabet;
use crate::dist::JointDistribution;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::mixture::SubsetMixture;
use crate::numerics::{fmt_f64, log_softmax_into, log_sum_exp, softmax, softmax_into};
use crate::subset::SubsetIndex;

/// Whether the latent prior is a fixed uniform distribution or a learned
/// softmax-parameterized one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorMode {
    FixedUniform,
    Learned,
}

/// Softmax-parameterized encoders, decoders, and prior over |Z| latent
/// symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularModel {
    alphabet: Alphabet,
    latent_size: usize,
    /// Per modality m: |X_m| × |Z| logits.
    pub(crate) encoder_logits: Vec<Matrix>,
    /// Per modality m: |Z| × |X_m| logits.
    pub(crate) decoder_logits: Vec<Matrix>,
    /// None = fixed uniform prior.
    pub(crate) prior_logits: Option<Vec<f64>>,
}

impl TabularModel {
    pub fn new(
        alphabet: Alphabet,
        latent_size: usize,
        encoder_logits: Vec<Matrix>,
        decoder_logits: Vec<Matrix>,
        prior_logits: Option<Vec<f64>>,
    ) -> Result<Self> {
        if latent_size == 0 {
            return Err(Error::DimensionMismatch("latent size must be ≥ 1".into()));
        }
        let m = alphabet.modality_count();
        if encoder_logits.len() != m || decoder_logits.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "expected {m} encoder and decoder tables, got {} and {}",
                encoder_logits.len(),
                decoder_logits.len()
            )));
        }
        for (i, (enc, dec)) in encoder_logits.iter().zip(&decoder_logits).enumerate() {
            let size = alphabet.size(i);
            if enc.rows() != size || enc.cols() != latent_size {
                return Err(Error::DimensionMismatch(format!(
                    "encoder table {i} is {}×{}, expected {size}×{latent_size}",
                    enc.rows(),
                    enc.cols()
                )));
            }
            if dec.rows() != latent_size || dec.cols() != size {
                return Err(Error::DimensionMismatch(format!(
                    "decoder table {i} is {}×{}, expected {latent_size}×{size}",
                    dec.rows(),
                    dec.cols()
                )));
            }
        }
        if let Some(p) = &prior_logits {
            if p.len() != latent_size {
                return Err(Error::DimensionMismatch(format!(
                    "prior has {} logits, expected {latent_size}",
                    p.len()
                )));
            }
        }
        Ok(TabularModel {
            alphabet,
            latent_size,
            encoder_logits,
            decoder_logits,
            prior_logits,
        })
    }

    /// Seeded random initialization: every logit is drawn i.i.d. from
    /// `scale`·N(0,1) in a fixed order (encoders by modality, then decoders,
    /// then prior), so identical seeds give identical models.
    pub fn init_random(
        alphabet: &Alphabet,
        latent_size: usize,
        prior: PriorMode,
        seed: u64,
        scale: f64,
    ) -> Result<Self> {
        if latent_size == 0 {
            return Err(Error::DimensionMismatch("latent size must be ≥ 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |rows: usize, cols: usize| -> Matrix {
            Matrix::from_vec(
                rows,
                cols,
                (0..rows * cols)
                    .map(|_| scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
                    .collect(),
            )
        };
        let m = alphabet.modality_count();
        let encoder_logits: Vec<Matrix> = (0..m)
            .map(|i| draw(alphabet.size(i), latent_size))
            .collect();
        let decoder_logits: Vec<Matrix> = (0..m)
            .map(|i| draw(latent_size, alphabet.size(i)))
            .collect();
        let prior_logits = match prior {
            PriorMode::FixedUniform => None,
            PriorMode::Learned => Some(draw(1, latent_size).data().to_vec()),
        };
        Self::new(
            alphabet.clone(),
            latent_size,
            encoder_logits,
            decoder_logits,
            prior_logits,
        )
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn modality_count(&self) -> usize {
        self.alphabet.modality_count()
    }

    pub fn latent_size(&self) -> usize {
        self.latent_size
    }

    pub fn encoder_logits(&self, modality: usize) -> &Matrix {
        &self.encoder_logits[modality]
    }

    pub fn decoder_logits(&self, modality: usize) -> &Matrix {
        &self.decoder_logits[modality]
    }

    pub fn prior_logits(&self) -> Option<&[f64]> {
        self.prior_logits.as_deref()
    }

    pub fn prior_mode(&self) -> PriorMode {
        if self.prior_logits.is_some() {
            PriorMode::Learned
        } else {
            PriorMode::FixedUniform
        }
    }

    /// q(z), the prior over latent symbols.
    pub fn prior(&self) -> Vec<f64> {
        match &self.prior_logits {
            Some(logits) => softmax(logits),
            None => vec![1.0 / self.latent_size as f64; self.latent_size],
        }
    }

    /// ln q(z).
    pub fn log_prior(&self) -> Vec<f64> {
        match &self.prior_logits {
            Some(logits) => {
                let mut out = vec![0.0; self.latent_size];
                log_softmax_into(logits, &mut out);
                out
            }
            None => vec![-(self.latent_size as f64).ln(); self.latent_size],
        }
    }

    fn check_input(&self, x: &[usize]) -> Result<()> {
        if x.len() != self.modality_count() {
            return Err(Error::DimensionMismatch(format!(
                "input has {} coordinates, model has {} modalities",
                x.len(),
                self.modality_count()
            )));
        }
        for (m, &xi) in x.iter().enumerate() {
            if xi >= self.alphabet.size(m) {
                return Err(Error::DimensionMismatch(format!(
                    "symbol {xi} out of range for modality {} (size {})",
                    m + 1,
                    self.alphabet.size(m)
                )));
            }
        }
        Ok(())
    }

    /// Product-of-experts posterior p(z | x_A) ∝ Π_{m∈A} p(z | x_m),
    /// normalized over z. A singleton subset returns that modality's
    /// posterior unchanged.
    pub fn encode_subset(&self, x: &[usize], subset: SubsetIndex) -> Result<Vec<f64>> {
        self.check_input(x)?;
        subset.validate(self.modality_count())?;
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        let mut score = vec![0.0; self.latent_size];
        let mut log_row = vec![0.0; self.latent_size];
        for m in subset.iter() {
            log_softmax_into(self.encoder_logits[m].row(x[m]), &mut log_row);
            for (s, &l) in score.iter_mut().zip(&log_row) {
                *s += l;
            }
        }
        let mut out = vec![0.0; self.latent_size];
        softmax_into(&score, &mut out);
        Ok(out)
    }

    /// Mixture posterior Σ_{A∈S} ω_A · p(z | x_A).
    pub fn encode_mixture(&self, x: &[usize], mixture: &SubsetMixture) -> Result<Vec<f64>> {
        if mixture.modality_count() != self.modality_count() {
            return Err(Error::DimensionMismatch(format!(
                "mixture is over {} modalities, model has {}",
                mixture.modality_count(),
                self.modality_count()
            )));
        }
        let mut out = vec![0.0; self.latent_size];
        for (subset, weight) in mixture.iter() {
            let posterior = self.encode_subset(x, subset)?;
            for (o, p) in out.iter_mut().zip(posterior) {
                *o += weight * p;
            }
        }
        Ok(out)
    }

    /// Σ_{m∈target} ln q(x_m | z). The usual reconstruction term uses the
    /// full set as `target`; the empty target is the empty product, 0.
    pub fn decode_log_likelihood(&self, z: usize, x: &[usize], target: SubsetIndex) -> Result<f64> {
        self.check_input(x)?;
        target.validate(self.modality_count())?;
        if z >= self.latent_size {
            return Err(Error::DimensionMismatch(format!(
                "latent symbol {z} out of range (|Z| = {})",
                self.latent_size
            )));
        }
        let mut total = 0.0;
        let mut log_row = vec![0.0; 0];
        for m in target.iter() {
            log_row.resize(self.alphabet.size(m), 0.0);
            log_softmax_into(self.decoder_logits[m].row(z), &mut log_row);
            total += log_row[x[m]];
        }
        Ok(total)
    }

    /// Exact expected log-evidence of the model's generative side:
    /// E_{p(x)} ln Σ_z q(z) Π_m q(x_m | z).
    pub fn model_log_evidence(&self, dist: &JointDistribution) -> Result<f64> {
        if dist.alphabet() != &self.alphabet {
            return Err(Error::DimensionMismatch(
                "distribution alphabet differs from model alphabet".into(),
            ));
        }
        let dec_log = self.decoder_log_tables();
        let log_prior = self.log_prior();
        let mut scores = vec![0.0; self.latent_size];
        let mut total = 0.0;
        dist.alphabet().visit_cells(|idx, digits| {
            let px = dist.probs()[idx];
            if px > 0.0 {
                for (k, score) in scores.iter_mut().enumerate() {
                    let mut s = log_prior[k];
                    for (m, &xm) in digits.iter().enumerate() {
                        s += dec_log[m].get(k, xm);
                    }
                    *score = s;
                }
                total += px * log_sum_exp(&scores);
            }
        });
        Ok(total)
    }

    /// Per-modality tables of ln p(z | x_m), shape |X_m| × |Z|.
    pub(crate) fn encoder_log_tables(&self) -> Vec<Matrix> {
        self.encoder_logits
            .iter()
            .map(|logits| {
                let mut t = Matrix::zeros(logits.rows(), logits.cols());
                for r in 0..logits.rows() {
                    log_softmax_into(logits.row(r), t.row_mut(r));
                }
                t
            })
            .collect()
    }

    /// Per-modality tables of ln q(x_m | z), shape |Z| × |X_m|.
    pub(crate) fn decoder_log_tables(&self) -> Vec<Matrix> {
        self.decoder_logits
            .iter()
            .map(|logits| {
                let mut t = Matrix::zeros(logits.rows(), logits.cols());
                for r in 0..logits.rows() {
                    log_softmax_into(logits.row(r), t.row_mut(r));
                }
                t
            })
            .collect()
    }

    /// Serializes to the versioned text format: a dimensions header followed
    /// by each logit table in declared order, one row per line, 17
    /// significant digits per value (bit-exact round trip).
    pub fn to_text(&self) -> String {
        let mut out = String::from("elbolab-model v1\n");
        out.push_str("sizes:");
        for s in self.alphabet.sizes() {
            out.push_str(&format!(" {s}"));
        }
        out.push_str(&format!("\nlatent: {}\n", self.latent_size));
        out.push_str(&format!(
            "prior: {}\n",
            match self.prior_mode() {
                PriorMode::FixedUniform => "uniform",
                PriorMode::Learned => "learned",
            }
        ));
        let push_matrix = |out: &mut String, m: &Matrix| {
            for r in 0..m.rows() {
                let row = m
                    .row(r)
                    .iter()
                    .map(|&v| fmt_f64(v))
                    .collect::<Vec<_>>()
                    .join(" ");
                out.push_str(&row);
                out.push('\n');
            }
        };
        for (i, enc) in self.encoder_logits.iter().enumerate() {
            out.push_str(&format!("encoder {}\n", i + 1));
            push_matrix(&mut out, enc);
        }
        for (i, dec) in self.decoder_logits.iter().enumerate() {
            out.push_str(&format!("decoder {}\n", i + 1));
            push_matrix(&mut out, dec);
        }
        if let Some(p) = &self.prior_logits {
            out.push_str("prior-logits\n");
            let row = p.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(" ");
            out.push_str(&row);
            out.push('\n');
        }
        out
    }

    /// Parses the format produced by [`TabularModel::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().peekable();
        let header = lines.next().ok_or_else(|| Error::Parse("empty input".into()))?;
        if header.trim() != "elbolab-model v1" {
            return Err(Error::Parse(format!("unexpected header {header:?}")));
        }
        let sizes_line = lines.next().ok_or_else(|| Error::Parse("missing sizes".into()))?;
        let sizes: Vec<usize> = sizes_line
            .strip_prefix("sizes:")
            .ok_or_else(|| Error::Parse("expected `sizes:`".into()))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|e| Error::Parse(format!("bad size {t:?}: {e}"))))
            .collect::<Result<_>>()?;
        let latent_line = lines.next().ok_or_else(|| Error::Parse("missing latent".into()))?;
        let latent_size: usize = latent_line
            .strip_prefix("latent:")
            .ok_or_else(|| Error::Parse("expected `latent:`".into()))?
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad latent size: {e}")))?;
        let prior_line = lines.next().ok_or_else(|| Error::Parse("missing prior".into()))?;
        let learned_prior = match prior_line.strip_prefix("prior:").map(str::trim) {
            Some("uniform") => false,
            Some("learned") => true,
            other => return Err(Error::Parse(format!("bad prior mode {other:?}"))),
        };

        fn parse_row<'a>(
            lines: &mut impl Iterator<Item = &'a str>,
            expect: usize,
        ) -> Result<Vec<f64>> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse("unexpected end of table".into()))?;
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|e| Error::Parse(format!("bad value {t:?}: {e}"))))
                .collect::<Result<_>>()?;
            if row.len() != expect {
                return Err(Error::Parse(format!(
                    "row has {} values, expected {expect}",
                    row.len()
                )));
            }
            Ok(row)
        }
        fn parse_matrix<'a>(
            lines: &mut impl Iterator<Item = &'a str>,
            label: &str,
            rows: usize,
            cols: usize,
        ) -> Result<Matrix> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing `{label}` section")))?;
            if line.trim() != label {
                return Err(Error::Parse(format!("expected `{label}`, got {line:?}")));
            }
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                data.extend(parse_row(lines, cols)?);
            }
            Ok(Matrix::from_vec(rows, cols, data))
        }

        let alphabet = Alphabet::new(sizes)?;
        let m = alphabet.modality_count();
        let mut encoder_logits = Vec::with_capacity(m);
        for i in 0..m {
            encoder_logits.push(parse_matrix(
                &mut lines,
                &format!("encoder {}", i + 1),
                alphabet.size(i),
                latent_size,
            )?);
        }
        let mut decoder_logits = Vec::with_capacity(m);
        for i in 0..m {
            decoder_logits.push(parse_matrix(
                &mut lines,
                &format!("decoder {}", i + 1),
                latent_size,
                alphabet.size(i),
            )?);
        }
        let prior_logits = if learned_prior {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse("missing `prior-logits` section".into()))?;
            if line.trim() != "prior-logits" {
                return Err(Error::Parse(format!("expected `prior-logits`, got {line:?}")));
            }
            Some(parse_row(&mut lines, latent_size)?)
        } else {
            None
        };
        if lines.next().map(str::trim).filter(|l| !l.is_empty()).is_some() {
            return Err(Error::Parse("trailing content after model".into()));
        }
        TabularModel::new(alphabet, latent_size, encoder_logits, decoder_logits, prior_logits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn alphabet(sizes: &[usize]) -> Alphabet {
        Alphabet::new(sizes.to_vec()).unwrap()
    }

    fn random_model(sizes: &[usize], latent: usize, seed: u64) -> TabularModel {
        TabularModel::init_random(&alphabet(sizes), latent, PriorMode::Learned, seed, 0.5).unwrap()
    }

    #[test]
    fn singleton_subset_is_the_unimodal_posterior() {
        let model = random_model(&[3, 2], 4, 1);
        let x = [2, 1];
        let p = model.encode_subset(&x, SubsetIndex::singleton(0)).unwrap();
        let direct = softmax(model.encoder_logits(0).row(2));
        for (a, b) in p.iter().zip(&direct) {
            assert_relative_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn uniform_experts_give_uniform_posterior() {
        let a = alphabet(&[2, 2]);
        let model =
            TabularModel::init_random(&a, 5, PriorMode::FixedUniform, 0, 0.0).unwrap();
        let p = model.encode_subset(&[0, 1], SubsetIndex::full(2)).unwrap();
        for &pi in &p {
            assert_relative_eq!(pi, 0.2, epsilon = 1e-15);
        }
    }

    #[test]
    fn product_of_experts_equals_logit_sum_softmax() {
        // numeric check that the normalized product matches softmax(l1+l2)
        let model = random_model(&[3, 4], 6, 2);
        let x = [1, 3];
        let poe = model.encode_subset(&x, SubsetIndex::full(2)).unwrap();
        let summed: Vec<f64> = (0..6)
            .map(|k| model.encoder_logits(0).get(1, k) + model.encoder_logits(1).get(3, k))
            .collect();
        let expected = softmax(&summed);
        for (a, b) in poe.iter().zip(&expected) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn encode_subset_rejects_empty_subset() {
        let model = random_model(&[2], 3, 3);
        assert!(matches!(
            model.encode_subset(&[0], SubsetIndex::EMPTY),
            Err(Error::EmptySubset)
        ));
    }

    #[test]
    fn poe_is_order_invariant() {
        let model = random_model(&[2, 3, 2], 5, 4);
        let x = [1, 2, 0];
        let subset = SubsetIndex::full(3);
        let forward = model.encode_subset(&x, subset).unwrap();
        // same product accumulated in reverse modality order
        let mut score = vec![0.0; 5];
        let mut log_row = vec![0.0; 5];
        for m in subset.indices().into_iter().rev() {
            log_softmax_into(model.encoder_logits(m).row(x[m]), &mut log_row);
            for (s, &l) in score.iter_mut().zip(&log_row) {
                *s += l;
            }
        }
        let reversed = softmax(&score);
        for (a, b) in forward.iter().zip(&reversed) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn mixture_with_single_full_subset_matches_encode_subset() {
        use crate::mixture::Family;
        let model = random_model(&[2, 2], 4, 5);
        let mixture = SubsetMixture::preset(Family::Mvae, 2).unwrap();
        let x = [1, 0];
        let via_mixture = model.encode_mixture(&x, &mixture).unwrap();
        let direct = model.encode_subset(&x, SubsetIndex::full(2)).unwrap();
        for (a, b) in via_mixture.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn behaviorally_identical_subsets_collapse() {
        // modality 2's encoder is uninformative (each row constant over z,
        // hence a uniform expert), so {1} and {1,2} encode identically; an
        // equal-weight mixture of the two equals either alone
        let a = alphabet(&[2, 3]);
        let mut model = random_model(&[2, 3], 4, 6);
        let constant = Matrix::from_fn(3, 4, |r, _| 0.1 * r as f64);
        model = TabularModel::new(
            a,
            4,
            vec![model.encoder_logits(0).clone(), constant],
            vec![model.decoder_logits(0).clone(), model.decoder_logits(1).clone()],
            model.prior_logits().map(|p| p.to_vec()),
        )
        .unwrap();
        let mixture = SubsetMixture::custom(
            2,
            vec![
                (SubsetIndex::singleton(0), 0.5),
                (SubsetIndex::full(2), 0.5),
            ],
        )
        .unwrap();
        let x = [1, 2];
        let mixed = model.encode_mixture(&x, &mixture).unwrap();
        let alone = model.encode_subset(&x, SubsetIndex::singleton(0)).unwrap();
        for (a, b) in mixed.iter().zip(&alone) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn mopoe_mixture_assembles_from_subset_posteriors() {
        use crate::mixture::Family;
        let model = random_model(&[2, 2], 5, 7);
        let mixture = SubsetMixture::preset(Family::Mopoe, 2).unwrap();
        let x = [0, 1];
        let mixed = model.encode_mixture(&x, &mixture).unwrap();
        let p1 = model.encode_subset(&x, SubsetIndex::singleton(0)).unwrap();
        let p2 = model.encode_subset(&x, SubsetIndex::singleton(1)).unwrap();
        let p12 = model.encode_subset(&x, SubsetIndex::full(2)).unwrap();
        for k in 0..5 {
            assert_relative_eq!(mixed[k], (p1[k] + p2[k] + p12[k]) / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn posteriors_normalize() {
        let model = random_model(&[2, 3, 2], 7, 8);
        let mixture = SubsetMixture::preset(crate::mixture::Family::Mopoe, 3).unwrap();
        model.alphabet().clone().visit_cells(|_, x| {
            let p = model.encode_mixture(x, &mixture).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let q = model.encode_subset(x, SubsetIndex::singleton(1)).unwrap();
            assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        });
    }

    #[test]
    fn logit_shift_leaves_posteriors_unchanged() {
        let base = random_model(&[2, 2], 4, 9);
        let mut shifted_enc: Vec<Matrix> = (0..2).map(|m| base.encoder_logits(m).clone()).collect();
        for row in 0..2 {
            for k in 0..4 {
                let v = shifted_enc[0].get(row, k);
                shifted_enc[0].set(row, k, v + 7.5);
            }
        }
        let shifted = TabularModel::new(
            base.alphabet().clone(),
            4,
            shifted_enc,
            vec![base.decoder_logits(0).clone(), base.decoder_logits(1).clone()],
            base.prior_logits().map(|p| p.to_vec()),
        )
        .unwrap();
        let x = [1, 1];
        let a = base.encode_subset(&x, SubsetIndex::full(2)).unwrap();
        let b = shifted.encode_subset(&x, SubsetIndex::full(2)).unwrap();
        for (ai, bi) in a.iter().zip(&b) {
            assert_relative_eq!(ai, bi, epsilon = 1e-12);
        }
    }

    #[test]
    fn decode_log_likelihood_examples() {
        let a = alphabet(&[2, 2]);
        let model = TabularModel::init_random(&a, 3, PriorMode::FixedUniform, 0, 0.0).unwrap();
        // uniform decoder over binary modalities: ln(1/2) per modality
        let ll = model
            .decode_log_likelihood(0, &[0, 1], SubsetIndex::full(2))
            .unwrap();
        assert_relative_eq!(ll, -2.0 * std::f64::consts::LN_2, epsilon = 1e-14);
        // empty target: empty product
        assert_eq!(
            model.decode_log_likelihood(1, &[0, 0], SubsetIndex::EMPTY).unwrap(),
            0.0
        );
    }

    #[test]
    fn decode_log_likelihood_matches_softmax_product() {
        let model = random_model(&[3, 2], 4, 10);
        let x = [2, 0];
        let z = 3;
        let ll = model
            .decode_log_likelihood(z, &x, SubsetIndex::full(2))
            .unwrap();
        let q0 = softmax(model.decoder_logits(0).row(z));
        let q1 = softmax(model.decoder_logits(1).row(z));
        assert_relative_eq!(ll, (q0[2] * q1[0]).ln(), epsilon = 1e-12);
    }

    #[test]
    fn model_log_evidence_uniform_case() {
        let a = alphabet(&[2, 2]);
        let model = TabularModel::init_random(&a, 4, PriorMode::FixedUniform, 0, 0.0).unwrap();
        let dist = JointDistribution::new(a, vec![0.25; 4]).unwrap();
        let le = model.model_log_evidence(&dist).unwrap();
        assert_relative_eq!(le, -2.0 * std::f64::consts::LN_2, epsilon = 1e-12);
    }

    #[test]
    fn model_log_evidence_near_zero_for_matched_point_mass() {
        let a = alphabet(&[2, 2]);
        let mut probs = vec![0.0; 4];
        probs[a.index_of(&[1, 0])] = 1.0;
        let dist = JointDistribution::new(a.clone(), probs).unwrap();
        // decoders concentrated on (1, 0) for every z
        let dec0 = Matrix::from_fn(2, 2, |_, c| if c == 1 { 50.0 } else { 0.0 });
        let dec1 = Matrix::from_fn(2, 2, |_, c| if c == 0 { 50.0 } else { 0.0 });
        let enc = Matrix::zeros(2, 2);
        let model =
            TabularModel::new(a, 2, vec![enc.clone(), enc], vec![dec0, dec1], None).unwrap();
        let le = model.model_log_evidence(&dist).unwrap();
        assert!(le.abs() < 1e-9, "log evidence {le} not ≈ 0");
    }

    #[test]
    fn model_log_evidence_matches_double_enumeration_oracle() {
        let model = random_model(&[2, 3], 4, 11);
        let a = model.alphabet().clone();
        let n = a.table_len();
        let weights: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 13 + 5) % 7) as f64).collect();
        let dist = JointDistribution::normalized(a.clone(), weights).unwrap();
        // oracle: direct sums with explicit softmax tables
        let prior = model.prior();
        let q0: Vec<Vec<f64>> = (0..4).map(|z| softmax(model.decoder_logits(0).row(z))).collect();
        let q1: Vec<Vec<f64>> = (0..4).map(|z| softmax(model.decoder_logits(1).row(z))).collect();
        let mut expected = 0.0;
        a.visit_cells(|idx, x| {
            let mut evidence = 0.0;
            for z in 0..4 {
                evidence += prior[z] * q0[z][x[0]] * q1[z][x[1]];
            }
            expected += dist.probs()[idx] * evidence.ln();
        });
        let le = model.model_log_evidence(&dist).unwrap();
        assert_relative_eq!(le, expected, epsilon = 1e-12);
    }

    #[test]
    fn init_random_is_deterministic_and_scale_sensitive() {
        let a = alphabet(&[2, 3]);
        let m1 = TabularModel::init_random(&a, 4, PriorMode::Learned, 42, 0.1).unwrap();
        let m2 = TabularModel::init_random(&a, 4, PriorMode::Learned, 42, 0.1).unwrap();
        assert_eq!(m1, m2);
        let m3 = TabularModel::init_random(&a, 4, PriorMode::Learned, 43, 0.1).unwrap();
        assert_ne!(m1, m3);
        let flat = TabularModel::init_random(&a, 4, PriorMode::Learned, 42, 0.0).unwrap();
        let p = flat.encode_subset(&[1, 2], SubsetIndex::full(2)).unwrap();
        for &pi in &p {
            assert_relative_eq!(pi, 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn text_round_trip_is_bit_exact() {
        for prior in [PriorMode::FixedUniform, PriorMode::Learned] {
            let model =
                TabularModel::init_random(&alphabet(&[2, 3]), 4, prior, 99, 0.7).unwrap();
            let back = TabularModel::from_text(&model.to_text()).unwrap();
            assert_eq!(model, back);
        }
    }

    #[test]
    fn from_text_rejects_malformed_input() {
        assert!(TabularModel::from_text("nope").is_err());
        let model = random_model(&[2], 2, 0);
        let text = model.to_text();
        // drop the whole prior section
        let cut = text.rfind("prior-logits").unwrap();
        assert!(TabularModel::from_text(&text[..cut]).is_err());
    }
}
