//! Seeded generators and sampling oracles shared by the integration suites.

use elbolab::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_sizes(rng: &mut ChaCha8Rng, max_modalities: usize, max_size: usize) -> Vec<usize> {
    let m = rng.gen_range(1..=max_modalities);
    (0..m).map(|_| rng.gen_range(2..=max_size)).collect()
}

/// Random dense joint with full support and mild skew.
pub fn random_joint(rng: &mut ChaCha8Rng, sizes: &[usize]) -> JointDistribution {
    let alphabet = Alphabet::new(sizes.to_vec()).unwrap();
    let weights: Vec<f64> = (0..alphabet.table_len())
        .map(|_| {
            let u: f64 = rng.gen();
            u * u + 1e-4
        })
        .collect();
    JointDistribution::normalized(alphabet, weights).unwrap()
}

/// Random probability table over `len` outcomes.
pub fn random_table(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let mut t: Vec<f64> = (0..len).map(|_| rng.gen::<f64>() + 1e-6).collect();
    let sum: f64 = t.iter().sum();
    for v in &mut t {
        *v /= sum;
    }
    t
}

/// Either a family preset or a random custom mixture over `m` modalities.
pub fn random_mixture(rng: &mut ChaCha8Rng, m: usize) -> SubsetMixture {
    if rng.gen_bool(0.5) {
        let family = *[Family::Mvae, Family::Mmvae, Family::Mopoe]
            .choose(rng)
            .unwrap();
        SubsetMixture::preset(family, m).unwrap()
    } else {
        let all: Vec<u32> = (1..(1u32 << m)).collect();
        let count = rng.gen_range(1..=all.len().min(5));
        let chosen = all.choose_multiple(rng, count).copied();
        let mut entries: Vec<(SubsetIndex, f64)> = chosen
            .map(|bits| (SubsetIndex::from_bits(bits), rng.gen::<f64>() + 0.05))
            .collect();
        let total: f64 = entries.iter().map(|(_, w)| w).sum();
        for e in entries.iter_mut() {
            e.1 /= total;
        }
        SubsetMixture::custom(m, entries).unwrap()
    }
}

pub fn random_model(
    rng: &mut ChaCha8Rng,
    alphabet: &Alphabet,
    latent: usize,
    scale: f64,
) -> TabularModel {
    let prior = if rng.gen_bool(0.5) {
        PriorMode::Learned
    } else {
        PriorMode::FixedUniform
    };
    TabularModel::init_random(alphabet, latent, prior, rng.gen(), scale).unwrap()
}

/// Random conditional table with `inputs` rows over `outputs` symbols.
pub fn random_channel(rng: &mut ChaCha8Rng, inputs: usize, outputs: usize) -> StochasticChannel {
    let mut probs = Vec::with_capacity(inputs * outputs);
    for _ in 0..inputs {
        probs.extend(random_table(rng, outputs));
    }
    StochasticChannel::new(inputs, outputs, probs).unwrap()
}

pub fn random_nonempty_subset(rng: &mut ChaCha8Rng, m: usize) -> SubsetIndex {
    SubsetIndex::from_bits(rng.gen_range(1..(1u32 << m)))
}

fn sample_categorical(rng: &mut ChaCha8Rng, probs: &[f64]) -> usize {
    let mut u: f64 = rng.gen();
    for (i, &p) in probs.iter().enumerate() {
        u -= p;
        if u <= 0.0 {
            return i;
        }
    }
    probs.len() - 1
}

/// Monte Carlo estimate of the average leave-one-out coherence, with its
/// standard error. Mirrors the exact metric: x ~ p, m ~ U(modalities),
/// z ~ p(z|x_∖m), x̂_m ~ q(·|z), success iff g_m(x̂_m) = y(x).
pub fn mc_loo_coherence(
    model: &TabularModel,
    dist: &JointDistribution,
    classifiers: &BayesClassifier,
    spec: &DatasetSpec,
    samples: usize,
    seed: u64,
) -> (f64, f64) {
    let mut rng = rng(seed);
    let mcount = model.modality_count();
    let z = model.latent_size();
    let mut hits = 0usize;
    let mut x = vec![0usize; mcount];
    let mut decoder_rows: Vec<Vec<Vec<f64>>> = Vec::with_capacity(mcount);
    for m in 0..mcount {
        let mut rows = Vec::with_capacity(z);
        for k in 0..z {
            rows.push(elbolab::numerics::softmax(model.decoder_logits(m).row(k)));
        }
        decoder_rows.push(rows);
    }
    for _ in 0..samples {
        let cell = sample_categorical(&mut rng, dist.probs());
        dist.alphabet().decode_into(cell, &mut x);
        let y = spec.label_of(&x);
        let m = rng.gen_range(0..mcount);
        let leave_out = SubsetIndex::singleton(m).complement(mcount);
        let posterior = model.encode_subset(&x, leave_out).unwrap();
        let k = sample_categorical(&mut rng, &posterior);
        let emitted = sample_categorical(&mut rng, &decoder_rows[m][k]);
        if classifiers.classify(m, emitted) == y {
            hits += 1;
        }
    }
    let estimate = hits as f64 / samples as f64;
    let se = (estimate * (1.0 - estimate) / samples as f64).sqrt();
    (estimate, se)
}
