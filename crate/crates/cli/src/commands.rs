//! The four subcommands: info, audit, sweep-beta, sweep-modalities.

use std::path::Path;
use std::time::Instant;

use elbolab::{
    bayes_classifiers, bound_audit, build_joint, closed_form_delta, delta, elbo_full,
    latent_linear_classification, loo_coherence, train, BoundAudit, DatasetSpec, Family,
    JointDistribution, ObjectiveId, SubsetIndex, SubsetMixture, TabularModel, TrainConfig,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{cell_cap, ConfigFile, OutputFormat};
use crate::error::{core_err, CliError};
use crate::output::{emit, rows_to_csv, rows_to_json, SweepRow, REPORT_SCHEMA_VERSION};

pub struct RunOptions {
    pub out: Option<std::path::PathBuf>,
    pub format: OutputFormat,
    pub jobs: usize,
    pub timings: bool,
}

fn build_joint_capped(spec: &DatasetSpec) -> Result<JointDistribution, CliError> {
    let cap = cell_cap()?;
    let cells: usize = spec.modality_sizes().iter().product();
    if cells > cap {
        return Err(CliError::Budget(format!(
            "dataset needs {cells} cells, cap is {cap} (set {} to raise it)",
            crate::config::CELL_CAP_ENV
        )));
    }
    build_joint(spec).map_err(core_err)
}

// ---------------------------------------------------------------------------
// info

#[derive(Serialize)]
struct PairwiseMi {
    a: usize,
    b: usize,
    nats: f64,
}

#[derive(Serialize)]
struct InfoReport {
    schema_version: u32,
    modalities: usize,
    modality_sizes: Vec<usize>,
    entropy: f64,
    data_log_evidence: f64,
    modality_entropies: Vec<f64>,
    pairwise_mutual_information: Vec<PairwiseMi>,
    /// Δ per family preset at the dataset's modality count. MoPoE is null
    /// when 2^M − 1 subsets would exceed the preset cap.
    preset_deltas: std::collections::BTreeMap<String, Option<f64>>,
    /// Closed-form Δ per preset (shared-specific datasets only).
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form_deltas: Option<std::collections::BTreeMap<String, f64>>,
}

pub fn cmd_info(
    config: &ConfigFile,
    out: Option<&Path>,
    dump_dist: Option<&Path>,
) -> Result<(), CliError> {
    let spec = config.dataset_spec()?;
    let dist = build_joint_capped(&spec)?;
    let m = dist.modality_count();

    let entropy = dist.entropy(dist.full_set()).map_err(core_err)?;
    let modality_entropies = (0..m)
        .map(|i| dist.entropy(SubsetIndex::singleton(i)).map_err(core_err))
        .collect::<Result<Vec<_>, _>>()?;
    let mut pairwise = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            pairwise.push(PairwiseMi {
                a: a + 1,
                b: b + 1,
                nats: dist
                    .mutual_information(SubsetIndex::singleton(a), SubsetIndex::singleton(b))
                    .map_err(core_err)?,
            });
        }
    }
    let mut preset_deltas = std::collections::BTreeMap::new();
    for family in Family::ALL {
        let value = match SubsetMixture::preset(family, m) {
            Ok(mixture) => Some(delta(&dist, &mixture).map_err(core_err)?.total),
            Err(elbolab::Error::BudgetExceeded { .. }) => None,
            Err(e) => return Err(core_err(e)),
        };
        preset_deltas.insert(family.to_string(), value);
    }
    let closed_form_deltas = match &spec {
        DatasetSpec::SharedSpecific { .. } => {
            let mut map = std::collections::BTreeMap::new();
            for family in Family::ALL {
                if let Ok(mixture) = SubsetMixture::preset(family, m) {
                    map.insert(
                        family.to_string(),
                        closed_form_delta(&spec, &mixture).map_err(core_err)?,
                    );
                }
            }
            Some(map)
        }
        _ => None,
    };

    let report = InfoReport {
        schema_version: REPORT_SCHEMA_VERSION,
        modalities: m,
        modality_sizes: dist.alphabet().sizes().to_vec(),
        entropy,
        data_log_evidence: -entropy,
        modality_entropies,
        pairwise_mutual_information: pairwise,
        preset_deltas,
        closed_form_deltas,
    };
    if let Some(path) = dump_dist {
        std::fs::write(path, dist.to_text())
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    }
    let mut text =
        serde_json::to_string_pretty(&report).expect("info report is serializable");
    text.push('\n');
    emit(out, &text)
}

// ---------------------------------------------------------------------------
// audit

#[derive(Serialize)]
struct SeedAudit {
    seed: u64,
    init: BoundAudit,
    trained: BoundAudit,
}

#[derive(Serialize)]
struct AuditReport {
    schema_version: u32,
    family: String,
    beta: f64,
    steps: usize,
    audits: Vec<SeedAudit>,
    all_passed: bool,
}

pub fn cmd_audit(config: &ConfigFile, options: &RunOptions) -> Result<(), CliError> {
    let spec = config.dataset_spec()?;
    let dist = build_joint_capped(&spec)?;
    let mixture = config.mixture()?;
    let prior = config.prior_mode()?;
    let train_cfg = TrainConfig {
        objective: ObjectiveId::ElboSub,
        beta: config.train.beta,
        steps: config.train.steps,
        step_size: config.train.step_size,
        momentum: config.train.momentum,
    };

    let audits = run_jobs(options.jobs, &config.train.seeds, |&seed| {
        let model = TabularModel::init_random(
            dist.alphabet(),
            config.model.latent_size,
            prior,
            seed,
            config.model.init_scale,
        )
        .map_err(core_err)?;
        let init = bound_audit(&model, &dist, &mixture).map_err(core_err)?;
        let trajectory = train(&model, &dist, &mixture, &train_cfg).map_err(core_err)?;
        let trained = bound_audit(&trajectory.final_model, &dist, &mixture).map_err(core_err)?;
        Ok(SeedAudit {
            seed,
            init,
            trained,
        })
    })?;

    let all_passed = audits
        .iter()
        .all(|a| a.init.passed() && a.trained.passed());
    let report = AuditReport {
        schema_version: REPORT_SCHEMA_VERSION,
        family: config
            .mixture
            .family
            .clone()
            .unwrap_or_else(|| "custom".into()),
        beta: config.train.beta,
        steps: config.train.steps,
        audits,
        all_passed,
    };
    let mut text =
        serde_json::to_string_pretty(&report).expect("audit report is serializable");
    text.push('\n');
    emit(options.out.as_deref(), &text)?;
    if !all_passed {
        return Err(CliError::AuditFailed(
            "at least one bound-audit inequality failed; see the report".into(),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// sweeps

struct Point {
    family: Family,
    beta: f64,
    m: usize,
    seed: u64,
    spec: DatasetSpec,
}

fn run_point(config: &ConfigFile, point: &Point, timings: bool) -> Result<SweepRow, CliError> {
    let start = Instant::now();
    let dist = build_joint_capped(&point.spec)?;
    let mixture = SubsetMixture::preset(point.family, point.m).map_err(core_err)?;
    let prior = config.prior_mode()?;
    let model = TabularModel::init_random(
        dist.alphabet(),
        config.model.latent_size,
        prior,
        point.seed,
        config.model.init_scale,
    )
    .map_err(core_err)?;
    let train_cfg = TrainConfig {
        objective: ObjectiveId::ElboSub,
        beta: point.beta,
        steps: config.train.steps,
        step_size: config.train.step_size,
        momentum: config.train.momentum,
    };
    let trajectory = train(&model, &dist, &mixture, &train_cfg).map_err(core_err)?;
    let trained = &trajectory.final_model;

    let sub_at_beta = trajectory.final_objective();
    let full_at_beta = elbo_full(trained, &dist, &mixture, point.beta).map_err(core_err)?;
    let audit = bound_audit(trained, &dist, &mixture).map_err(core_err)?;

    let coherence_avg = if point.m >= 2 {
        let classifiers = bayes_classifiers(&point.spec).map_err(core_err)?;
        Some(
            loo_coherence(trained, &dist, &classifiers, &point.spec)
                .map_err(core_err)?
                .average,
        )
    } else {
        None
    };
    let linear_accuracy = latent_linear_classification(
        trained,
        &dist,
        &point.spec,
        dist.full_set(),
        config.metrics.linear_steps,
        config.metrics.linear_step_size,
    )
    .map_err(core_err)?;
    let model_log_evidence = trained.model_log_evidence(&dist).map_err(core_err)?;

    let row = SweepRow {
        schema_version: REPORT_SCHEMA_VERSION,
        experiment_id: format!(
            "{}-b{}-m{}-s{}",
            point.family, point.beta, point.m, point.seed
        ),
        family: point.family.to_string(),
        beta: point.beta,
        m: point.m,
        seed: point.seed,
        elbo_sub: sub_at_beta,
        elbo_full: full_at_beta,
        tightness_gap: audit.tightness_gap,
        delta: audit.delta,
        neg_entropy: audit.data_log_evidence,
        slack: audit.slack,
        coherence_avg,
        linear_accuracy,
        model_log_evidence,
        wall_time_ms: timings.then(|| start.elapsed().as_secs_f64() * 1e3),
    };
    row.check_finite()?;
    Ok(row)
}

fn write_rows(rows: Vec<SweepRow>, options: &RunOptions) -> Result<(), CliError> {
    let content = match options.format {
        OutputFormat::Csv => rows_to_csv(&rows, options.timings),
        OutputFormat::Json => rows_to_json(&rows),
    };
    emit(options.out.as_deref(), &content)
}

pub fn cmd_sweep_beta(config: &ConfigFile, options: &RunOptions) -> Result<(), CliError> {
    let betas = config
        .sweep
        .betas
        .clone()
        .ok_or_else(|| CliError::Config("sweep.betas is required for sweep-beta".into()))?;
    let spec = config.dataset_spec()?;
    let m = spec.modality_count();
    let families = config.sweep_families()?;
    check_mopoe_cap(&families, &[m], config.sweep.mopoe_modality_cap)?;

    // canonical order: (family, beta, seed)
    let mut points = Vec::new();
    for &family in &families {
        for &beta in &betas {
            for &seed in &config.train.seeds {
                points.push(Point {
                    family,
                    beta,
                    m,
                    seed,
                    spec: spec.clone(),
                });
            }
        }
    }
    points.sort_by(|a, b| {
        family_rank(a.family)
            .cmp(&family_rank(b.family))
            .then(a.beta.total_cmp(&b.beta))
            .then(a.seed.cmp(&b.seed))
    });
    let rows = run_jobs(options.jobs, &points, |p| {
        run_point(config, p, options.timings)
    })?;
    write_rows(rows, options)
}

pub fn cmd_sweep_modalities(config: &ConfigFile, options: &RunOptions) -> Result<(), CliError> {
    let modalities = config.sweep.modalities.clone().ok_or_else(|| {
        CliError::Config("sweep.modalities is required for sweep-modalities".into())
    })?;
    let families = config.sweep_families()?;
    check_mopoe_cap(&families, &modalities, config.sweep.mopoe_modality_cap)?;
    let base = config.dataset_spec()?;
    let repeated_mode = config.sweep.mode == "repeated";

    let mut points = Vec::new();
    for &family in &families {
        for &m in &modalities {
            let spec = resize_dataset(&base, m, repeated_mode)?;
            for &seed in &config.train.seeds {
                points.push(Point {
                    family,
                    beta: config.train.beta,
                    m,
                    seed,
                    spec: spec.clone(),
                });
            }
        }
    }
    points.sort_by(|a, b| {
        family_rank(a.family)
            .cmp(&family_rank(b.family))
            .then(a.m.cmp(&b.m))
            .then(a.seed.cmp(&b.seed))
    });
    let rows = run_jobs(options.jobs, &points, |p| {
        run_point(config, p, options.timings)
    })?;
    write_rows(rows, options)
}

fn family_rank(family: Family) -> usize {
    Family::ALL.iter().position(|f| *f == family).unwrap()
}

fn check_mopoe_cap(families: &[Family], modalities: &[usize], cap: usize) -> Result<(), CliError> {
    if families.contains(&Family::Mopoe) {
        if let Some(&m) = modalities.iter().find(|&&m| m > cap) {
            return Err(CliError::Budget(format!(
                "mopoe at {m} modalities needs 2^{m}−1 subsets; the sweep cap is {cap} \
                 modalities (sweep.mopoe_modality_cap)"
            )));
        }
    }
    Ok(())
}

/// Rebuilds the dataset at `m` modalities. Distinct mode truncates or
/// extends the per-modality parameter lists (repeating the last entry);
/// repeated mode replicates the first modality `m` times, perfectly
/// correlated.
fn resize_dataset(spec: &DatasetSpec, m: usize, repeated: bool) -> Result<DatasetSpec, CliError> {
    fn resized<T: Clone>(values: &[T], m: usize) -> Vec<T> {
        (0..m)
            .map(|i| values[i.min(values.len() - 1)].clone())
            .collect()
    }
    let spec = match (spec, repeated) {
        (DatasetSpec::SharedSpecific { classes, noise_sizes }, false) => {
            DatasetSpec::SharedSpecific {
                classes: *classes,
                noise_sizes: resized(noise_sizes, m),
            }
        }
        (DatasetSpec::NoisyShared { classes, eps }, false) => DatasetSpec::NoisyShared {
            classes: *classes,
            eps: resized(eps, m),
        },
        (DatasetSpec::Repeated { .. }, false) => {
            return Err(CliError::Config(
                "a repeated dataset sweeps modality counts with sweep.mode = \"repeated\"".into(),
            ))
        }
        (DatasetSpec::SharedSpecific { classes, noise_sizes }, true) => DatasetSpec::Repeated {
            base: Box::new(DatasetSpec::SharedSpecific {
                classes: *classes,
                noise_sizes: vec![noise_sizes[0]],
            }),
            copies: m,
        },
        (DatasetSpec::NoisyShared { classes, eps }, true) => DatasetSpec::Repeated {
            base: Box::new(DatasetSpec::NoisyShared {
                classes: *classes,
                eps: vec![eps[0]],
            }),
            copies: m,
        },
        (DatasetSpec::Repeated { base, .. }, true) => DatasetSpec::Repeated {
            base: base.clone(),
            copies: m,
        },
    };
    Ok(spec)
}

/// Runs independent jobs, optionally in parallel, preserving input order.
fn run_jobs<T: Sync, R: Send>(
    jobs: usize,
    items: &[T],
    f: impl Fn(&T) -> Result<R, CliError> + Sync + Send,
) -> Result<Vec<R>, CliError> {
    if jobs <= 1 {
        items.iter().map(f).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::Io(format!("cannot build thread pool: {e}")))?;
        pool.install(|| items.par_iter().map(f).collect())
    }
}
