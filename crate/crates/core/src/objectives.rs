//! Exact evaluation, exact gradients, and deterministic training of the
//! multimodal objectives, plus the bound audit.
//!
//! Three objectives are supported; every expectation is a finite sum over
//! the full data table, all subsets, and all latent symbols:
//!
//! * `ElboSub` — the sub-sampled objective
//!   Σ_A ω_A { E_{p(x) p(z|x_A)}[ln q(x|z)] − β·E_{p(x)}[KL(p(z|x_A) ‖ q(z))] }
//! * `ElboFull` — the bound with the mixture encoder p^S(z|x) = Σ_A ω_A p(z|x_A)
//!   E_{p(x) p^S(z|x)}[ln q(x|z)] − β·E_{p(x)}[KL(p^S(z|x) ‖ q(z))]
//! * `ElboMvaePlus` — the marginal-augmented variant L(x) + Σ_i L(x_i),
//!   where each L(x_i) encodes and reconstructs only modality i (no
//!   cross-modal reconstructions).
//!
//! At β = 1 the chain `elbo_sub ≤ elbo_full ≤ −H(X)` holds for every
//! parameter value, with `elbo_full − elbo_sub` equal to the expected
//! mixture-KL term Σ_A ω_A KL(p(z|x_A) ‖ p^S(z|x)). [`bound_audit`] checks
//! those within [`AUDIT_TOL`] and additionally reports the sub-sampling
//! penalty check `elbo_sub + Δ ≤ −H(X)`. The penalty check is a diagnostic,
//! not an identity: a model whose variational family captures the data's
//! latent structure exactly can push `elbo_sub` all the way to −H(X) and
//! fail it by up to Δ.

use crate::discrepancy;
use crate::dist::JointDistribution;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::mixture::SubsetMixture;
use crate::model::TabularModel;
use crate::subset::SubsetIndex;

/// Slack allowed when asserting the audit inequalities at β = 1.
pub const AUDIT_TOL: f64 = 1e-9;

/// Selects which objective [`evaluate`], [`gradient`], and [`train`] use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveId {
    ElboSub,
    ElboFull,
    ElboMvaePlus,
}

/// Gradient tables matching the parameter shapes of a [`TabularModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGradient {
    pub encoder: Vec<Matrix>,
    pub decoder: Vec<Matrix>,
    /// Present iff the model has a learned prior.
    pub prior: Option<Vec<f64>>,
}

impl ModelGradient {
    pub fn zeros_for(model: &TabularModel) -> Self {
        let m = model.modality_count();
        ModelGradient {
            encoder: (0..m)
                .map(|i| Matrix::zeros(model.alphabet().size(i), model.latent_size()))
                .collect(),
            decoder: (0..m)
                .map(|i| Matrix::zeros(model.latent_size(), model.alphabet().size(i)))
                .collect(),
            prior: model.prior_logits().map(|p| vec![0.0; p.len()]),
        }
    }

    pub fn l2_norm(&self) -> f64 {
        let mut sq = 0.0;
        for t in self.encoder.iter().chain(&self.decoder) {
            sq += t.data().iter().map(|g| g * g).sum::<f64>();
        }
        if let Some(p) = &self.prior {
            sq += p.iter().map(|g| g * g).sum::<f64>();
        }
        sq.sqrt()
    }

    pub fn scale(&mut self, a: f64) {
        for t in self.encoder.iter_mut().chain(self.decoder.iter_mut()) {
            t.scale(a);
        }
        if let Some(p) = &mut self.prior {
            for g in p.iter_mut() {
                *g *= a;
            }
        }
    }

    /// self += a · other.
    pub fn axpy(&mut self, a: f64, other: &ModelGradient) {
        for (s, o) in self.encoder.iter_mut().zip(&other.encoder) {
            s.axpy(a, o);
        }
        for (s, o) in self.decoder.iter_mut().zip(&other.decoder) {
            s.axpy(a, o);
        }
        if let (Some(s), Some(o)) = (&mut self.prior, &other.prior) {
            for (si, oi) in s.iter_mut().zip(o) {
                *si += a * oi;
            }
        }
    }
}

fn check_inputs(
    model: &TabularModel,
    dist: &JointDistribution,
    mixture: Option<&SubsetMixture>,
    beta: f64,
) -> Result<()> {
    if model.alphabet() != dist.alphabet() {
        return Err(Error::DimensionMismatch(
            "model and distribution alphabets differ".into(),
        ));
    }
    if let Some(s) = mixture {
        if s.modality_count() != model.modality_count() {
            return Err(Error::DimensionMismatch(format!(
                "mixture is over {} modalities, model has {}",
                s.modality_count(),
                model.modality_count()
            )));
        }
    }
    if beta <= 0.0 || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "beta must be a positive finite real, got {beta}"
        )));
    }
    Ok(())
}

/// Cached log-probability tables for one model.
struct Tables {
    enc_log: Vec<Matrix>,
    dec_log: Vec<Matrix>,
    log_prior: Vec<f64>,
    prior: Vec<f64>,
}

impl Tables {
    fn new(model: &TabularModel) -> Self {
        Tables {
            enc_log: model.encoder_log_tables(),
            dec_log: model.decoder_log_tables(),
            log_prior: model.log_prior(),
            prior: model.prior(),
        }
    }
}

/// Scratch buffers reused across cells.
struct Scratch {
    ll: Vec<f64>,
    score: Vec<f64>,
    log_post: Vec<f64>,
    post: Vec<f64>,
    mix: Vec<f64>,
    per_subset_post: Vec<f64>,
    h: Vec<f64>,
}

impl Scratch {
    fn new(z: usize, subsets: usize) -> Self {
        Scratch {
            ll: vec![0.0; z],
            score: vec![0.0; z],
            log_post: vec![0.0; z],
            post: vec![0.0; z],
            mix: vec![0.0; z],
            per_subset_post: vec![0.0; z * subsets],
            h: vec![0.0; z],
        }
    }
}

fn fill_log_likelihood(tables: &Tables, x: &[usize], ll: &mut [f64]) {
    for (k, l) in ll.iter_mut().enumerate() {
        let mut s = 0.0;
        for (m, &xm) in x.iter().enumerate() {
            s += tables.dec_log[m].get(k, xm);
        }
        *l = s;
    }
}

fn poe_posterior(
    tables: &Tables,
    x: &[usize],
    subset: SubsetIndex,
    score: &mut [f64],
    log_post: &mut [f64],
    post: &mut [f64],
) {
    score.fill(0.0);
    for m in subset.iter() {
        for (s, &l) in score.iter_mut().zip(tables.enc_log[m].row(x[m])) {
            *s += l;
        }
    }
    crate::numerics::log_softmax_into(score, log_post);
    for (p, &lp) in post.iter_mut().zip(log_post.iter()) {
        *p = lp.exp();
    }
}

/// Closes out the decoder (negative part) and prior gradients from the
/// accumulated posterior-mass coefficients; `mass[m][k]` is
/// Σ_x p(x)·(posterior mass at z=k whose reconstruction covers modality m),
/// and `prior_mass[k]` sums the posterior mass of every KL term.
fn finish_gradient(
    tables: &Tables,
    grad: &mut ModelGradient,
    mass: &[Vec<f64>],
    prior_mass: &[f64],
    kl_terms: f64,
    beta: f64,
) {
    let z = tables.log_prior.len();
    for (m, dec) in tables.dec_log.iter().enumerate() {
        let g = &mut grad.decoder[m];
        for (k, &coeff) in mass[m].iter().enumerate().take(z) {
            if coeff != 0.0 {
                let row = g.row_mut(k);
                for (b, r) in row.iter_mut().enumerate() {
                    *r -= coeff * dec.get(k, b).exp();
                }
            }
        }
    }
    if let Some(pg) = &mut grad.prior {
        for (k, g) in pg.iter_mut().enumerate() {
            *g += beta * (prior_mass[k] - kl_terms * tables.prior[k]);
        }
    }
}

/// Shared evaluator: returns the objective value and, when `grad` is given,
/// accumulates exact gradients into it.
#[allow(clippy::needless_range_loop)] // kernels accumulate across parallel arrays
fn eval(
    objective: ObjectiveId,
    model: &TabularModel,
    dist: &JointDistribution,
    mixture: &SubsetMixture,
    beta: f64,
    mut grad: Option<&mut ModelGradient>,
) -> f64 {
    let tables = Tables::new(model);
    let z = model.latent_size();
    let mcount = model.modality_count();
    let mut sc = Scratch::new(z, mixture.len());

    // Σ_x p(x)·(posterior mass reconstructing modality m at z=k): closes the
    // decoder softmax pullback after the cell sweep.
    let mut mass = vec![vec![0.0; z]; mcount];
    let mut prior_mass = vec![0.0; z];
    // number of KL-vs-prior terms (each contributes −β·prior to the prior grad)
    let kl_terms = match objective {
        ObjectiveId::ElboSub | ObjectiveId::ElboFull => 1.0,
        ObjectiveId::ElboMvaePlus => (mcount + 1) as f64,
    };

    let mut value = 0.0;
    dist.alphabet().visit_cells(|idx, x| {
        let px = dist.probs()[idx];
        if px <= 0.0 {
            return;
        }
        fill_log_likelihood(&tables, x, &mut sc.ll);
        match objective {
            ObjectiveId::ElboSub => {
                sc.mix.fill(0.0);
                for (subset, w) in mixture.iter() {
                    poe_posterior(&tables, x, subset, &mut sc.score, &mut sc.log_post, &mut sc.post);
                    let mut term = 0.0;
                    for k in 0..z {
                        sc.h[k] = sc.ll[k] - beta * (sc.log_post[k] - tables.log_prior[k]);
                        term += sc.post[k] * sc.h[k];
                    }
                    value += px * w * term;
                    if let Some(g) = grad.as_deref_mut() {
                        for m in subset.iter() {
                            let row = g.encoder[m].row_mut(x[m]);
                            for k in 0..z {
                                row[k] += px * w * sc.post[k] * (sc.h[k] - term);
                            }
                        }
                    }
                    for k in 0..z {
                        sc.mix[k] += w * sc.post[k];
                    }
                }
                if grad.is_some() {
                    for k in 0..z {
                        let c = px * sc.mix[k];
                        prior_mass[k] += c;
                        for m in 0..mcount {
                            mass[m][k] += c;
                        }
                    }
                    let g = grad.as_deref_mut().unwrap();
                    for (m, &xm) in x.iter().enumerate() {
                        for k in 0..z {
                            let v = g.decoder[m].get(k, xm) + px * sc.mix[k];
                            g.decoder[m].set(k, xm, v);
                        }
                    }
                }
            }
            ObjectiveId::ElboFull => {
                sc.mix.fill(0.0);
                for (a, (subset, w)) in mixture.iter().enumerate() {
                    poe_posterior(&tables, x, subset, &mut sc.score, &mut sc.log_post, &mut sc.post);
                    sc.per_subset_post[a * z..(a + 1) * z].copy_from_slice(&sc.post);
                    for k in 0..z {
                        sc.mix[k] += w * sc.post[k];
                    }
                }
                let mut cell_value = 0.0;
                for k in 0..z {
                    sc.h[k] = sc.ll[k] - beta * (sc.mix[k].ln() - tables.log_prior[k]);
                    cell_value += sc.mix[k] * sc.h[k];
                }
                value += px * cell_value;
                if let Some(g) = grad.as_deref_mut() {
                    for (a, (subset, w)) in mixture.iter().enumerate() {
                        let pa = &sc.per_subset_post[a * z..(a + 1) * z];
                        let hbar: f64 = pa.iter().zip(&sc.h).map(|(&p, &h)| p * h).sum();
                        for m in subset.iter() {
                            let row = g.encoder[m].row_mut(x[m]);
                            for k in 0..z {
                                row[k] += px * w * pa[k] * (sc.h[k] - hbar);
                            }
                        }
                    }
                    for k in 0..z {
                        let c = px * sc.mix[k];
                        prior_mass[k] += c;
                        for m in 0..mcount {
                            mass[m][k] += c;
                        }
                    }
                    for (m, &xm) in x.iter().enumerate() {
                        for k in 0..z {
                            let v = g.decoder[m].get(k, xm) + px * sc.mix[k];
                            g.decoder[m].set(k, xm, v);
                        }
                    }
                }
            }
            ObjectiveId::ElboMvaePlus => {
                // joint term: full-set encoder, all-modality reconstruction
                let full = SubsetIndex::full(mcount);
                poe_posterior(&tables, x, full, &mut sc.score, &mut sc.log_post, &mut sc.post);
                let mut term = 0.0;
                for k in 0..z {
                    sc.h[k] = sc.ll[k] - beta * (sc.log_post[k] - tables.log_prior[k]);
                    term += sc.post[k] * sc.h[k];
                }
                value += px * term;
                if let Some(g) = grad.as_deref_mut() {
                    for m in 0..mcount {
                        let row = g.encoder[m].row_mut(x[m]);
                        for k in 0..z {
                            row[k] += px * sc.post[k] * (sc.h[k] - term);
                        }
                    }
                    for k in 0..z {
                        let c = px * sc.post[k];
                        prior_mass[k] += c;
                        for m in 0..mcount {
                            mass[m][k] += c;
                        }
                    }
                    for (m, &xm) in x.iter().enumerate() {
                        for k in 0..z {
                            let v = g.decoder[m].get(k, xm) + px * sc.post[k];
                            g.decoder[m].set(k, xm, v);
                        }
                    }
                }
                // marginal terms: encode x_i, reconstruct only modality i
                for (i, &xi) in x.iter().enumerate() {
                    let log_pi = tables.enc_log[i].row(xi);
                    let mut term_i = 0.0;
                    for k in 0..z {
                        sc.h[k] = tables.dec_log[i].get(k, xi)
                            - beta * (log_pi[k] - tables.log_prior[k]);
                        sc.post[k] = log_pi[k].exp();
                        term_i += sc.post[k] * sc.h[k];
                    }
                    value += px * term_i;
                    if let Some(g) = grad.as_deref_mut() {
                        let row = g.encoder[i].row_mut(xi);
                        for k in 0..z {
                            row[k] += px * sc.post[k] * (sc.h[k] - term_i);
                        }
                        for k in 0..z {
                            let c = px * sc.post[k];
                            prior_mass[k] += c;
                            mass[i][k] += c;
                            let v = g.decoder[i].get(k, xi) + c;
                            g.decoder[i].set(k, xi, v);
                        }
                    }
                }
            }
        }
    });

    if let Some(g) = grad {
        finish_gradient(&tables, g, &mass, &prior_mass, kl_terms, beta);
    }
    value
}

/// The sub-sampled objective L_S (see module docs).
pub fn elbo_sub(
    model: &TabularModel,
    dist: &JointDistribution,
    mixture: &SubsetMixture,
    beta: f64,
) -> Result<f64> {
    check_inputs(model, dist, Some(mixture), beta)?;
    Ok(eval(ObjectiveId::ElboSub, model, dist, mixture, beta, None))
}

/// The bound L with the mixture encoder (see module docs).
pub fn elbo_full(
    model: &TabularModel,
    dist: &JointDistribution,
    mixture: &SubsetMixture,
    beta: f64,
) -> Result<f64> {
    check_inputs(model, dist, Some(mixture), beta)?;
    Ok(eval(ObjectiveId::ElboFull, model, dist, mixture, beta, None))
}

/// The marginal-augmented objective L(x) + Σ_i L(x_i).
pub fn elbo_mvae_plus(model: &TabularModel, dist: &JointDistribution, beta: f64) -> Result<f64> {
    check_inputs(model, dist, None, beta)?;
    let trivial = SubsetMixture::preset(crate::mixture::Family::Mvae, model.modality_count())?;
    Ok(eval(ObjectiveId::ElboMvaePlus, model, dist, &trivial, beta, None))
}

/// Dispatches on the objective id. `mixture` is ignored by `ElboMvaePlus`
/// (its subset structure is fixed).
pub fn evaluate(
    objective: ObjectiveId,
    model: &TabularModel,
    dist: &JointDistribution,
    mixture: &SubsetMixture,
    beta: f64,
) -> Result<f64> {
    match objective {
        ObjectiveId::ElboSub => elbo_sub(model, dist, mixture, beta),
        ObjectiveId::ElboFull => elbo_full(model, dist, mixture, beta),
        ObjectiveId::ElboMvaePlus => elbo_mvae_plus(model, dist, beta),
    }
}

/// Exact gradient of the selected objective with respect to every encoder,
/// decoder, and (learned) prior logit.
pub fn gradient(
    objective: ObjectiveId,
    model: &TabularModel,
    dist: &JointDistribution,
    mixture: &SubsetMixture,
    beta: f64,
) -> Result<ModelGradient> {
    Ok(eval_with_gradient(objective, model, dist, mixture, beta)?.1)
}

/// Objective value and gradient in one enumeration pass.
pub fn eval_with_gradient(
    objective: ObjectiveId,
    model: &TabularModel,
    dist: &JointDistribution,
    mixture: &SubsetMixture,
    beta: f64,
) -> Result<(f64, ModelGradient)> {
    match objective {
        ObjectiveId::ElboMvaePlus => check_inputs(model, dist, None, beta)?,
        _ => check_inputs(model, dist, Some(mixture), beta)?,
    }
    let mut grad = ModelGradient::zeros_for(model);
    let value = eval(objective, model, dist, mixture, beta, Some(&mut grad));
    Ok((value, grad))
}

/// Expected log-evidence of the data itself: E_{p(x)}[ln p(x)] = −H(X).
pub fn data_log_evidence(dist: &JointDistribution) -> f64 {
    -dist
        .entropy(dist.full_set())
        .expect("full set is always a valid subset")
}

/// The exact tightness term Σ_A ω_A E_{p(x)} KL(p(z|x_A) ‖ p^S(z|x)),
/// an independent route to `elbo_full − elbo_sub` at β = 1.
pub fn mixture_kl_gap(
    model: &TabularModel,
    dist: &JointDistribution,
    mixture: &SubsetMixture,
) -> Result<f64> {
    check_inputs(model, dist, Some(mixture), 1.0)?;
    let tables = Tables::new(model);
    let z = model.latent_size();
    let mut sc = Scratch::new(z, mixture.len());
    let mut gap = 0.0;
    dist.alphabet().visit_cells(|idx, x| {
        let px = dist.probs()[idx];
        if px <= 0.0 {
            return;
        }
        sc.mix.fill(0.0);
        for (a, (subset, w)) in mixture.iter().enumerate() {
            poe_posterior(&tables, x, subset, &mut sc.score, &mut sc.log_post, &mut sc.post);
            sc.per_subset_post[a * z..(a + 1) * z].copy_from_slice(&sc.post);
            for k in 0..z {
                sc.mix[k] += w * sc.post[k];
            }
        }
        for (a, (_, w)) in mixture.iter().enumerate() {
            let pa = &sc.per_subset_post[a * z..(a + 1) * z];
            let kl: f64 = pa
                .iter()
                .zip(&sc.mix)
                .map(|(&p, &r)| p * (p.ln() - r.ln()))
                .sum();
            gap += px * w * kl;
        }
    });
    Ok(gap)
}

/// One bound-audit record at β = 1.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BoundAudit {
    pub beta: f64,
    /// −H(X), the ceiling of the bound chain.
    pub data_log_evidence: f64,
    pub elbo_full: f64,
    pub elbo_sub: f64,
    /// elbo_full − elbo_sub.
    pub tightness_gap: f64,
    /// Σ_A ω_A E KL(p(z|x_A) ‖ p^S(z|x)), the independent gap route.
    pub mixture_kl_gap: f64,
    pub delta: f64,
    /// data_log_evidence − delta − elbo_sub: how far the sub-sampled bound
    /// sits below the entropy ceiling after discounting Δ. Negative slack
    /// means the model has recovered cross-modal structure beyond the Δ
    /// discount.
    pub slack: f64,
    pub checks: Vec<AuditCheck>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct AuditCheck {
    pub name: &'static str,
    /// Violation amount; the check passes when residual ≤ [`AUDIT_TOL`].
    pub residual: f64,
    pub passed: bool,
}

impl BoundAudit {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Evaluates the whole bound chain at β = 1 and records every inequality.
///
/// β is pinned to 1 because the chain is a statement about the unweighted
/// bound; evaluations at other β carry no inequality contract.
pub fn bound_audit(
    model: &TabularModel,
    dist: &JointDistribution,
    mixture: &SubsetMixture,
) -> Result<BoundAudit> {
    let beta = 1.0;
    let sub = elbo_sub(model, dist, mixture, beta)?;
    let full = elbo_full(model, dist, mixture, beta)?;
    let neg_h = data_log_evidence(dist);
    let delta = discrepancy::delta(dist, mixture)?.total;
    let gap = full - sub;
    let kl_gap = mixture_kl_gap(model, dist, mixture)?;
    let slack = neg_h - delta - sub;

    let check = |name: &'static str, residual: f64| AuditCheck {
        name,
        residual,
        passed: residual <= AUDIT_TOL,
    };
    let checks = vec![
        check("sub_le_full", sub - full),
        check("full_le_log_evidence", full - neg_h),
        check("sub_plus_delta_le_log_evidence", sub + delta - neg_h),
        check("gap_matches_mixture_kl", (gap - kl_gap).abs()),
    ];

    Ok(BoundAudit {
        beta,
        data_log_evidence: neg_h,
        elbo_full: full,
        elbo_sub: sub,
        tightness_gap: gap,
        mixture_kl_gap: kl_gap,
        delta,
        slack,
        checks,
    })
}

/// Residual of the rate decomposition for one subset A ∈ S.
///
/// With the exact joint p(x_A)·p(z|x_A), the regularizer decomposes as
///
/// ```text
/// E_{p(x)}[KL(p(z|x_A) ‖ q(z))] = I(X_A; Z_A) + KL(p(z) ‖ q(z))
/// ```
///
/// where p(z) is the aggregate posterior. Returns the absolute residual,
/// which must stay below [`AUDIT_TOL`] for every model.
pub fn rate_identity_residual(
    model: &TabularModel,
    dist: &JointDistribution,
    mixture: &SubsetMixture,
    subset: SubsetIndex,
) -> Result<f64> {
    check_inputs(model, dist, Some(mixture), 1.0)?;
    if !mixture.contains(subset) {
        return Err(Error::SubsetNotInMixture { subset });
    }
    let tables = Tables::new(model);
    let z = model.latent_size();
    let marg = dist.marginalize(subset)?;
    let members = subset.indices();

    let mut rate = 0.0;
    let mut aggregate = vec![0.0; z];
    let mut joint = vec![0.0; marg.alphabet().table_len() * z];
    let mut score = vec![0.0; z];
    let mut log_post = vec![0.0; z];
    let mut post = vec![0.0; z];
    marg.alphabet().visit_cells(|idx, xa| {
        score.fill(0.0);
        for (pos, &m) in members.iter().enumerate() {
            for (s, &l) in score.iter_mut().zip(tables.enc_log[m].row(xa[pos])) {
                *s += l;
            }
        }
        crate::numerics::log_softmax_into(&score, &mut log_post);
        for (p, &lp) in post.iter_mut().zip(&log_post) {
            *p = lp.exp();
        }
        let pxa = marg.probs()[idx];
        let mut kl = 0.0;
        for (k, (&pk, &lpk)) in post.iter().zip(&log_post).enumerate() {
            kl += pk * (lpk - tables.log_prior[k]);
            aggregate[k] += pxa * pk;
            joint[idx * z + k] = pxa * pk;
        }
        rate += pxa * kl;
    });

    // I(X_A; Z_A) from the materialized joint, via the info measures
    let mut sizes = marg.alphabet().sizes().to_vec();
    sizes.push(z);
    let joint_dist = JointDistribution::new(crate::alphabet::Alphabet::new(sizes)?, joint)?;
    let x_part = SubsetIndex::full(members.len());
    let z_part = SubsetIndex::singleton(members.len());
    let info = joint_dist.mutual_information(x_part, z_part)?;
    let prior_kl = crate::info::kl_divergence(&aggregate, &tables.prior)?;

    Ok((rate - info - prior_kl).abs())
}

/// Training hyperparameters for [`train`]: full-batch gradient ascent with
/// classical momentum (v ← μ·v + g, θ ← θ + η·v).
#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    pub objective: ObjectiveId,
    pub beta: f64,
    pub steps: usize,
    pub step_size: f64,
    pub momentum: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            objective: ObjectiveId::ElboSub,
            beta: 1.0,
            steps: 1000,
            step_size: 0.5,
            momentum: 0.9,
        }
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TrainRecord {
    pub step: usize,
    pub objective: f64,
    pub grad_norm: f64,
}

/// The per-step audit trail and the final parameter state.
#[derive(Debug, Clone)]
pub struct TrainTrajectory {
    /// One record per step plus a final record at `step == steps`.
    pub records: Vec<TrainRecord>,
    pub final_model: TabularModel,
}

impl TrainTrajectory {
    pub fn final_objective(&self) -> f64 {
        self.records.last().expect("trajectory is never empty").objective
    }
}

/// Deterministic full-batch ascent on the configured objective.
///
/// Convergence is declared by the step budget alone; the objective is not
/// required to increase monotonically (the step size is fixed). Aborts with
/// a diagnostic error if the objective or gradient turns non-finite.
pub fn train(
    model: &TabularModel,
    dist: &JointDistribution,
    mixture: &SubsetMixture,
    config: &TrainConfig,
) -> Result<TrainTrajectory> {
    match config.objective {
        ObjectiveId::ElboMvaePlus => check_inputs(model, dist, None, config.beta)?,
        _ => check_inputs(model, dist, Some(mixture), config.beta)?,
    }
    if config.step_size < 0.0 || !config.step_size.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "step size must be a non-negative finite real, got {}",
            config.step_size
        )));
    }
    let mut current = model.clone();
    let mut velocity = ModelGradient::zeros_for(model);
    let mut records = Vec::with_capacity(config.steps + 1);
    for step in 0..=config.steps {
        let (value, grad) =
            eval_with_gradient(config.objective, &current, dist, mixture, config.beta)?;
        let grad_norm = grad.l2_norm();
        if !value.is_finite() || !grad_norm.is_finite() {
            return Err(Error::NonFiniteObjective { step, value });
        }
        records.push(TrainRecord {
            step,
            objective: value,
            grad_norm,
        });
        if step == config.steps {
            break;
        }
        velocity.scale(config.momentum);
        velocity.axpy(1.0, &grad);
        apply_step(&mut current, config.step_size, &velocity);
    }
    Ok(TrainTrajectory {
        records,
        final_model: current,
    })
}

fn apply_step(model: &mut TabularModel, step_size: f64, direction: &ModelGradient) {
    for (t, d) in model.encoder_logits.iter_mut().zip(&direction.encoder) {
        t.axpy(step_size, d);
    }
    for (t, d) in model.decoder_logits.iter_mut().zip(&direction.decoder) {
        t.axpy(step_size, d);
    }
    if let (Some(p), Some(d)) = (&mut model.prior_logits, &direction.prior) {
        for (pi, di) in p.iter_mut().zip(d) {
            *pi += step_size * di;
        }
    }
}
