//! Small numeric helpers shared by the probability and model code.
//!
//! All softmax-style operations subtract the row maximum before
//! exponentiating, so strictly positive outputs are guaranteed for any
//! finite logits.

/// Default enumeration budget: maximum number of cells in a dense table.
pub const DEFAULT_CELL_CAP: usize = 10_000_000;

/// Validation tolerances used when constructing distributions and mixtures.
///
/// `prob_sum` bounds |Σp − 1| for probability tables; `identity` is the
/// default slack for exact algebraic identities checked at runtime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub prob_sum: f64,
    pub identity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            prob_sum: 1e-12,
            identity: 1e-10,
        }
    }
}

/// log Σ exp(v) with max-subtraction; -inf for an empty slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Writes log softmax(row) into `out`.
pub fn log_softmax_into(row: &[f64], out: &mut [f64]) {
    debug_assert_eq!(row.len(), out.len());
    let lse = log_sum_exp(row);
    for (o, &v) in out.iter_mut().zip(row) {
        *o = v - lse;
    }
}

/// Writes softmax(row) into `out`.
pub fn softmax_into(row: &[f64], out: &mut [f64]) {
    debug_assert_eq!(row.len(), out.len());
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &v) in out.iter_mut().zip(row) {
        let e = (v - max).exp();
        *o = e;
        sum += e;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

/// softmax(row) as a fresh vector.
pub fn softmax(row: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; row.len()];
    softmax_into(row, &mut out);
    out
}

/// Formats a float with 17 significant digits, enough to round-trip f64
/// exactly through decimal text.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
