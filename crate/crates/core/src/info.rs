//! Exact information measures in nats.
//!
//! Conventions: natural logarithm throughout, 0·log 0 := 0, and H(∅) = 0.
//! KL and cross-entropy treat q(x)=0 with p(x)>0 as a hard error rather
//! than ∞, so modeling bugs surface instead of propagating infinities.

use crate::dist::JointDistribution;
use crate::error::{Error, Result};
use crate::subset::SubsetIndex;

/// −Σ p ln p over a raw table; entries ≤ 0 contribute nothing.
pub fn table_entropy(table: &[f64]) -> f64 {
    let mut h = 0.0;
    for &p in table {
        if p > 0.0 {
            h -= p * p.ln();
        }
    }
    h
}

/// Kullback-Leibler divergence Σ p ln(p/q) between two tables on the same
/// support.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::SupportMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let mut kl = 0.0;
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi > 0.0 {
            if qi <= 0.0 {
                return Err(Error::AbsoluteContinuityViolated { index: i, p: pi });
            }
            kl += pi * (pi / qi).ln();
        }
    }
    Ok(kl)
}

/// Cross-entropy −Σ p ln q; satisfies CE(p,q) = H(p) + KL(p‖q).
pub fn cross_entropy(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::SupportMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let mut ce = 0.0;
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi > 0.0 {
            if qi <= 0.0 {
                return Err(Error::AbsoluteContinuityViolated { index: i, p: pi });
            }
            ce -= pi * qi.ln();
        }
    }
    Ok(ce)
}

impl JointDistribution {
    /// Entropy H(X_subset) of the marginal over `subset`; H(∅) = 0.
    pub fn entropy(&self, subset: SubsetIndex) -> Result<f64> {
        subset.validate(self.modality_count())?;
        if subset.is_empty() {
            return Ok(0.0);
        }
        Ok(table_entropy(&self.marginal_table(subset)?))
    }

    /// Conditional entropy H(X_target | X_given) = H(X_{target∪given}) − H(X_given).
    ///
    /// Overlap between `target` and `given` is allowed; an empty `given`
    /// reduces to the plain entropy.
    pub fn conditional_entropy(&self, target: SubsetIndex, given: SubsetIndex) -> Result<f64> {
        target.validate(self.modality_count())?;
        given.validate(self.modality_count())?;
        if given.is_empty() {
            return self.entropy(target);
        }
        Ok(self.entropy(target.union(given))? - self.entropy(given)?)
    }

    /// Mutual information I(X_a; X_b) = H(X_a) − H(X_a | X_b) for disjoint
    /// subsets.
    pub fn mutual_information(&self, a: SubsetIndex, b: SubsetIndex) -> Result<f64> {
        a.validate(self.modality_count())?;
        b.validate(self.modality_count())?;
        if !a.is_disjoint(b) {
            return Err(Error::OverlappingSubsets { a, b });
        }
        Ok(self.entropy(a)? - self.conditional_entropy(a, b)?)
    }

    /// Conditional mutual information I(X_a; X_b | X_given), computed as the
    /// p(x_given)-weighted KL between the conditional joint and the product
    /// of conditional marginals:
    ///
    /// Σ_g p(g) · KL( p(a,b|g) ‖ p(a|g) p(b|g) ).
    pub fn conditional_mutual_information(
        &self,
        a: SubsetIndex,
        b: SubsetIndex,
        given: SubsetIndex,
    ) -> Result<f64> {
        a.validate(self.modality_count())?;
        b.validate(self.modality_count())?;
        given.validate(self.modality_count())?;
        if !a.is_disjoint(b) {
            return Err(Error::OverlappingSubsets { a, b });
        }
        if !a.is_disjoint(given) {
            return Err(Error::OverlappingSubsets { a, b: given });
        }
        if !b.is_disjoint(given) {
            return Err(Error::OverlappingSubsets { a: b, b: given });
        }
        if a.is_empty() || b.is_empty() {
            return Ok(0.0);
        }

        let union = a.union(b).union(given);
        let abg = self.marginal_table(union)?;
        let ag = self.marginal_table(a.union(given))?;
        let bg = self.marginal_table(b.union(given))?;
        let g = self.marginal_table(given)?;

        // Expanded form of the weighted KL: Σ p(abg)·[ln p(abg) + ln p(g)
        // − ln p(ag) − ln p(bg)], skipping zero-mass cells.
        let members = union.indices();
        let proj_ag = Projection::new(self.alphabet().sizes(), &members, a.union(given));
        let proj_bg = Projection::new(self.alphabet().sizes(), &members, b.union(given));
        let proj_g = Projection::new(self.alphabet().sizes(), &members, given);

        let union_alphabet = self.alphabet().project(union)?;
        let mut cmi = 0.0;
        union_alphabet.visit_cells(|idx, digits| {
            let p = abg[idx];
            if p > 0.0 {
                let p_ag = ag[proj_ag.index(digits)];
                let p_bg = bg[proj_bg.index(digits)];
                let p_g = g[proj_g.index(digits)];
                cmi += p * ((p * p_g) / (p_ag * p_bg)).ln();
            }
        });
        Ok(cmi)
    }
}

/// Maps digit tuples of a marginal over `members` onto flat indices of a
/// marginal over a subset of those members.
struct Projection {
    // (position within the member digits, stride in the target table)
    terms: Vec<(usize, usize)>,
}

impl Projection {
    fn new(sizes: &[usize], members: &[usize], target: SubsetIndex) -> Self {
        let targets: Vec<usize> = target.iter().collect();
        let mut strides = vec![1usize; targets.len()];
        for j in (0..targets.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * sizes[targets[j + 1]];
        }
        let terms = targets
            .iter()
            .zip(&strides)
            .map(|(&modality, &stride)| {
                let pos = members
                    .iter()
                    .position(|&m| m == modality)
                    .expect("target subset must be contained in members");
                (pos, stride)
            })
            .collect();
        Projection { terms }
    }

    fn index(&self, digits: &[usize]) -> usize {
        self.terms.iter().map(|&(pos, stride)| digits[pos] * stride).sum()
    }
}
