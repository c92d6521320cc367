//! Report rows and the CSV/JSON writers.
//!
//! Values are written with 17 significant digits ('.' decimal, no locale),
//! so every float round-trips exactly and identical runs produce identical
//! bytes. The wall-time column is emitted only when timings are requested;
//! it is informational and excluded from the determinism guarantee.

use elbolab::numerics::fmt_f64;
use serde::Serialize;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// One sweep point: a trained model summarized by its objectives, bound
/// audit, and metrics.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub schema_version: u32,
    pub experiment_id: String,
    pub family: String,
    pub beta: f64,
    pub m: usize,
    pub seed: u64,
    /// Final training objective (the sub-sampled bound at the row's β).
    pub elbo_sub: f64,
    /// Mixture-encoder bound at the row's β, same trained model.
    pub elbo_full: f64,
    /// elbo_full − elbo_sub at β = 1 (the mixture-KL tightness term).
    pub tightness_gap: f64,
    pub delta: f64,
    pub neg_entropy: f64,
    /// neg_entropy − delta − elbo_sub at β = 1.
    pub slack: f64,
    /// Average leave-one-out coherence; absent for single-modality runs.
    pub coherence_avg: Option<f64>,
    pub linear_accuracy: f64,
    pub model_log_evidence: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl SweepRow {
    pub fn check_finite(&self) -> Result<(), crate::error::CliError> {
        let values = [
            ("elbo_sub", self.elbo_sub),
            ("elbo_full", self.elbo_full),
            ("tightness_gap", self.tightness_gap),
            ("delta", self.delta),
            ("neg_entropy", self.neg_entropy),
            ("slack", self.slack),
            ("linear_accuracy", self.linear_accuracy),
            ("model_log_evidence", self.model_log_evidence),
        ];
        for (name, v) in values {
            if !v.is_finite() {
                return Err(crate::error::CliError::Config(format!(
                    "{}: non-finite {name} = {v}",
                    self.experiment_id
                )));
            }
        }
        if let Some(c) = self.coherence_avg {
            if !c.is_finite() {
                return Err(crate::error::CliError::Config(format!(
                    "{}: non-finite coherence",
                    self.experiment_id
                )));
            }
        }
        Ok(())
    }
}

const CSV_COLUMNS: &[&str] = &[
    "schema_version",
    "experiment_id",
    "family",
    "beta",
    "m",
    "seed",
    "elbo_sub",
    "elbo_full",
    "tightness_gap",
    "delta",
    "neg_entropy",
    "slack",
    "coherence_avg",
    "linear_accuracy",
    "model_log_evidence",
];

pub fn rows_to_csv(rows: &[SweepRow], timings: bool) -> String {
    let mut out = String::new();
    out.push_str(&CSV_COLUMNS.join(","));
    if timings {
        out.push_str(",wall_time_ms");
    }
    out.push('\n');
    for row in rows {
        let coherence = row.coherence_avg.map(fmt_f64).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{coherence},{},{}",
            row.schema_version,
            row.experiment_id,
            row.family,
            fmt_f64(row.beta),
            row.m,
            row.seed,
            fmt_f64(row.elbo_sub),
            fmt_f64(row.elbo_full),
            fmt_f64(row.tightness_gap),
            fmt_f64(row.delta),
            fmt_f64(row.neg_entropy),
            fmt_f64(row.slack),
            fmt_f64(row.linear_accuracy),
            fmt_f64(row.model_log_evidence),
        ));
        if timings {
            out.push(',');
            if let Some(ms) = row.wall_time_ms {
                out.push_str(&format!("{ms:.3}"));
            }
        }
        out.push('\n');
    }
    out
}

pub fn rows_to_json(rows: &[SweepRow]) -> String {
    #[derive(Serialize)]
    struct Report<'a> {
        schema_version: u32,
        rows: &'a [SweepRow],
    }
    let mut text = serde_json::to_string_pretty(&Report {
        schema_version: REPORT_SCHEMA_VERSION,
        rows,
    })
    .expect("sweep rows are serializable");
    text.push('\n');
    text
}

/// Writes to the path, or to stdout when no path is given.
pub fn emit(out: Option<&std::path::Path>, content: &str) -> Result<(), crate::error::CliError> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| crate::error::CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
