//! Shared fixtures for the benchmark targets.

use elbolab::*;

pub fn shared_specific(modalities: usize) -> (DatasetSpec, JointDistribution) {
    let spec = DatasetSpec::SharedSpecific {
        classes: 2,
        noise_sizes: vec![2; modalities],
    };
    let dist = build_joint(&spec).unwrap();
    (spec, dist)
}

pub fn model_for(dist: &JointDistribution, latent: usize, seed: u64) -> TabularModel {
    TabularModel::init_random(dist.alphabet(), latent, PriorMode::Learned, seed, 0.1).unwrap()
}
