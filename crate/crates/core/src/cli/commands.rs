//! The four subcommands. Each returns an [`Outcome`]; library errors are
//! configuration errors from the caller's point of view.

use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::config::{ExperimentConfig, Format, SetSource};
use super::records::{self, sig6, BoundRecord, IncidenceRecord, Tags, TrialRecord};
use crate::energy::{energy_report, lambda_counts, Variant};
use crate::error::{Error, Result};
use crate::functions::{ExpanderSpec, FunctionTable};
use crate::incidence::incidence_report;
use crate::sets::{generate, FSet, SetFamily};
use crate::theorems::{
    compare_bounds, conditional_growth_check, predicted_exponent, verify_theorem, ConditionalReport, Sizes,
    SHAPE_NOTE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Status {
    Ok = 0,
    Failed = 1,
    Usage = 2,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub status: Status,
    /// Diagnostics for stderr.
    pub messages: Vec<String>,
}

/// One concrete `(A, B, C, g, h)`.
#[derive(Debug, Clone)]
pub struct Instance {
    pub a: FSet,
    pub b: FSet,
    pub c: FSet,
    pub spec: ExpanderSpec,
    pub tags: Tags,
}

/// Explicit tables are read once per run.
struct Tables {
    g: Option<FunctionTable>,
    h: Option<FunctionTable>,
}

impl Tables {
    fn load(cfg: &ExperimentConfig) -> Result<Self> {
        let load = |fam: &crate::functions::FunctionFamily| -> Result<Option<FunctionTable>> {
            if fam.is_explicit() {
                fam.table(&FSet::empty(cfg.field)).map(Some)
            } else {
                Ok(None)
            }
        };
        Ok(Tables {
            g: load(&cfg.g)?,
            h: load(&cfg.h)?,
        })
    }
}

/// Seeds for A, B and C of trial `trial`: one ChaCha8 stream per trial, so a
/// trial's sets do not depend on how many trials run.
pub fn trial_seeds(seed: u64, trial: u64) -> [u64; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    [rng.next_u64(), rng.next_u64(), rng.next_u64()]
}

fn sized(fam: &SetFamily, size: Option<u64>) -> Result<SetFamily> {
    match size {
        Some(n) => fam.with_size(n),
        None => Ok(fam.clone()),
    }
}

fn source_tag(src: &SetSource, size: Option<u64>) -> Result<String> {
    Ok(match src {
        SetSource::Family(f) => sized(f, size)?.to_string(),
        shift => shift.to_string(),
    })
}

fn build(cfg: &ExperimentConfig, tables: &Tables, trial: u64, size: Option<u64>) -> Result<Instance> {
    let field = cfg.field;
    let [sa, sb, sc] = trial_seeds(cfg.seed, trial);
    let fam_a = sized(&cfg.family_a, size)?;
    let a = generate(&fam_a.with_seed(sa), field)?;
    let own = |seed: u64| move |f: &SetFamily| generate(&sized(f, size)?.with_seed(seed), field);
    let b = cfg.family_b.resolve(field, own(sb), &a, None)?;
    let c = cfg.family_c.resolve(field, own(sc), &a, Some(&b))?;

    let domain = match (&tables.g, &tables.h) {
        (Some(t), _) | (None, Some(t)) => t.domain().clone(),
        (None, None) => a.clone(),
    };
    let g = match &tables.g {
        Some(t) => t.clone(),
        None => cfg.g.table(&domain)?,
    };
    let h = match &tables.h {
        Some(t) => t.clone(),
        None => cfg.h.table(&domain)?,
    };
    let tags = Tags {
        a: fam_a.to_string(),
        b: source_tag(&cfg.family_b, size)?,
        c: source_tag(&cfg.family_c, size)?,
        g: cfg.g.to_string(),
        h: cfg.h.to_string(),
    };
    Ok(Instance {
        a,
        b,
        c,
        spec: ExpanderSpec::new(g, h)?,
        tags,
    })
}

/// `(trial index, grid size)` for every trial of the run, in output order.
fn schedule(cfg: &ExperimentConfig) -> Vec<(u64, Option<u64>)> {
    let grid: Vec<Option<u64>> = if cfg.sizes.is_empty() {
        vec![None]
    } else {
        cfg.sizes.iter().map(|&n| Some(n)).collect()
    };
    let mut out = Vec::new();
    for size in grid {
        for _ in 0..cfg.trials {
            out.push((out.len() as u64, size));
        }
    }
    out
}

/// Builds every instance in parallel, preserving schedule order.
pub fn instances(cfg: &ExperimentConfig) -> Result<Vec<(u64, Option<u64>, Instance)>> {
    let tables = Tables::load(cfg)?;
    schedule(cfg)
        .into_par_iter()
        .map(|(t, size)| build(cfg, &tables, t, size).map(|inst| (t, size, inst)))
        .collect()
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn serialize<T: Serialize>(cfg: &ExperimentConfig, rows: &[T]) -> Result<Vec<u8>> {
    match cfg.format {
        Format::Csv => {
            let stamp = (!cfg.deterministic).then(|| format!("# generated_unix={}", unix_now()));
            records::to_csv(rows, stamp.as_deref())
        }
        Format::Json => records::to_json(rows),
    }
}

fn write_to(path: Option<&std::path::Path>, bytes: &[u8]) -> Result<()> {
    let res = match path {
        Some(p) => std::fs::write(p, bytes),
        None => std::io::stdout().lock().write_all(bytes),
    };
    res.map_err(|e| Error::InvalidParameter(format!("write failed: {e}")))
}

/// Writes the JSON summary to stdout, or to stderr when the records went to
/// stdout.
fn write_summary(cfg: &ExperimentConfig, mut summary: serde_json::Value) -> Result<()> {
    if !cfg.deterministic {
        summary["generated_unix"] = json!(unix_now());
    }
    let mut text = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    text.push('\n');
    if cfg.out.is_some() {
        write_to(None, text.as_bytes())
    } else {
        std::io::stderr()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Error::InvalidParameter(e.to_string()))
    }
}

/// Re-parses written bytes and checks each row.
fn selfcheck<T>(cfg: &ExperimentConfig, bytes: &[u8], expected: usize, check: impl Fn(&T) -> std::result::Result<(), String>) -> Vec<String>
where
    T: for<'de> serde::Deserialize<'de>,
{
    let parsed: Result<Vec<T>> = match cfg.format {
        Format::Csv => records::from_csv(bytes),
        Format::Json => records::from_json(bytes),
    };
    match parsed {
        Err(e) => vec![format!("selfcheck: {e}")],
        Ok(rows) if rows.len() != expected => {
            vec![format!("selfcheck: read {} records, wrote {expected}", rows.len())]
        }
        Ok(rows) => rows
            .iter()
            .filter_map(|r| check(r).err())
            .map(|e| format!("selfcheck: {e}"))
            .collect(),
    }
}

pub struct TrialOutput {
    pub records: Vec<TrialRecord>,
    pub grid_size: Option<u64>,
    pub conditional: Option<ConditionalReport>,
}

pub fn run_trials(cfg: &ExperimentConfig) -> Result<Vec<TrialOutput>> {
    let insts = instances(cfg)?;
    insts
        .into_par_iter()
        .map(|(t, size, inst)| {
            let records = cfg
                .variant
                .variants()
                .iter()
                .map(|&v| {
                    verify_theorem(v, &inst.a, &inst.b, &inst.c, &inst.spec, &cfg.budgets)
                        .map(|ver| TrialRecord::from_verification(t, &ver, &inst.tags))
                })
                .collect::<Result<Vec<_>>>()?;
            let conditional = match cfg.epsilon {
                Some(eps) if inst.a.len() > 1 => Some(conditional_growth_check(&inst.a, &inst.spec, eps)?),
                _ => None,
            };
            Ok(TrialOutput {
                records,
                grid_size: size,
                conditional,
            })
        })
        .collect()
}

fn emit_trials(cfg: &ExperimentConfig, command: &str, outputs: &[TrialOutput], extra: serde_json::Value) -> Result<Outcome> {
    let recs: Vec<TrialRecord> = outputs.iter().flat_map(|o| o.records.iter().cloned()).collect();
    let bytes = serialize(cfg, &recs)?;
    write_to(cfg.out.as_deref(), &bytes)?;

    let mut messages: Vec<String> = recs
        .iter()
        .filter(|r| !r.chain_ok)
        .map(|r| format!("chain violation: trial {} ({})", r.trial, r.variant))
        .collect();
    let failures = messages.len();
    if cfg.selfcheck {
        messages.extend(selfcheck(cfg, &bytes, recs.len(), TrialRecord::check));
    }
    let ok = messages.is_empty();
    let mut summary = json!({
        "command": command,
        "p": cfg.field.modulus(),
        "seed": cfg.seed,
        "trials": cfg.trials,
        "records": recs.len(),
        "chain_failures": failures,
        "selfcheck": cfg.selfcheck,
        "ok": ok,
    });
    if let (Some(obj), serde_json::Value::Object(more)) = (summary.as_object_mut(), extra) {
        obj.extend(more);
    }
    write_summary(cfg, summary)?;
    Ok(Outcome {
        status: if ok { Status::Ok } else { Status::Failed },
        messages,
    })
}

pub fn verify(cfg: &ExperimentConfig) -> Result<Outcome> {
    let outputs = run_trials(cfg)?;
    emit_trials(cfg, "verify", &outputs, json!({}))
}

/// One row of the exponent table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub size: u64,
    pub variant: Variant,
    pub trials: u64,
    /// `log(measured_max)/log|A|`; absent when `|A| <= 1`.
    pub exponent_min: Option<f64>,
    pub exponent_mean: Option<f64>,
    pub exponent_max: Option<f64>,
    pub chain_failures: u64,
    pub epsilon: Option<f64>,
    pub predicted_exponent: Option<f64>,
    pub hypothesis_fraction: Option<f64>,
    pub epsilon_max_mean: Option<f64>,
    pub realized_exponent_mean: Option<f64>,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

pub fn aggregate(cfg: &ExperimentConfig, outputs: &[TrialOutput]) -> Vec<AggregateRow> {
    let mut rows = Vec::new();
    let mut keys: Vec<Option<u64>> = Vec::new();
    for o in outputs {
        if !keys.contains(&o.grid_size) {
            keys.push(o.grid_size);
        }
    }
    for key in keys {
        let group: Vec<&TrialOutput> = outputs.iter().filter(|o| o.grid_size == key).collect();
        let conds: Vec<&ConditionalReport> = group.iter().filter_map(|o| o.conditional.as_ref()).collect();
        for &variant in cfg.variant.variants() {
            let recs: Vec<&TrialRecord> = group
                .iter()
                .flat_map(|o| o.records.iter())
                .filter(|r| r.variant == variant)
                .collect();
            let size = key.unwrap_or_else(|| recs.first().map_or(0, |r| r.size_a));
            let exps: Vec<f64> = recs
                .iter()
                .filter(|r| r.size_a > 1)
                .map(|r| (r.measured_max as f64).ln() / (r.size_a as f64).ln())
                .collect();
            let with_eps = cfg.epsilon.is_some();
            let frac = |xs: &[bool]| (!xs.is_empty()).then(|| xs.iter().filter(|&&b| b).count() as f64 / xs.len() as f64);
            rows.push(AggregateRow {
                size,
                variant,
                trials: recs.len() as u64,
                exponent_min: (!exps.is_empty()).then(|| sig6(exps.iter().copied().fold(f64::INFINITY, f64::min))),
                exponent_mean: mean(&exps).map(sig6),
                exponent_max: (!exps.is_empty()).then(|| sig6(exps.iter().copied().fold(f64::NEG_INFINITY, f64::max))),
                chain_failures: recs.iter().filter(|r| !r.chain_ok).count() as u64,
                epsilon: cfg.epsilon,
                predicted_exponent: cfg.epsilon.map(|e| sig6(predicted_exponent(e))),
                hypothesis_fraction: if with_eps {
                    frac(&conds.iter().map(|c| c.hypothesis_holds).collect::<Vec<_>>()).map(sig6)
                } else {
                    None
                },
                epsilon_max_mean: mean(&conds.iter().map(|c| c.epsilon_max).collect::<Vec<_>>()).map(sig6),
                realized_exponent_mean: mean(&conds.iter().map(|c| c.realized_exponent).collect::<Vec<_>>())
                    .map(sig6),
            });
        }
    }
    rows
}

const BASE_COLUMNS: [&str; 7] =
    ["size", "variant", "trials", "exponent_min", "exponent_mean", "exponent_max", "chain_failures"];
const EPSILON_COLUMNS: [&str; 5] =
    ["epsilon", "predicted_exponent", "hypothesis_fraction", "epsilon_max_mean", "realized_exponent_mean"];

/// The exponent table as CSV. Conditional columns appear only when an
/// epsilon was given.
pub fn aggregate_csv(rows: &[AggregateRow], with_epsilon: bool) -> Result<Vec<u8>> {
    let cell = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::InvalidParameter(e.to_string());
    let mut header: Vec<&str> = BASE_COLUMNS.to_vec();
    if with_epsilon {
        header.extend(EPSILON_COLUMNS);
    }
    w.write_record(&header).map_err(err)?;
    for r in rows {
        let mut rec = vec![
            r.size.to_string(),
            r.variant.to_string(),
            r.trials.to_string(),
            cell(r.exponent_min),
            cell(r.exponent_mean),
            cell(r.exponent_max),
            r.chain_failures.to_string(),
        ];
        if with_epsilon {
            rec.extend([
                cell(r.epsilon),
                cell(r.predicted_exponent),
                cell(r.hypothesis_fraction),
                cell(r.epsilon_max_mean),
                cell(r.realized_exponent_mean),
            ]);
        }
        w.write_record(&rec).map_err(err)?;
    }
    w.into_inner().map_err(|e| Error::InvalidParameter(e.to_string()))
}

pub fn experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    let outputs = run_trials(cfg)?;
    let rows = aggregate(cfg, &outputs);
    if let Some(path) = &cfg.aggregate_out {
        let bytes = match cfg.format {
            Format::Csv => aggregate_csv(&rows, cfg.epsilon.is_some())?,
            Format::Json => records::to_json(&rows)?,
        };
        write_to(Some(path), &bytes)?;
    }
    emit_trials(cfg, "experiment", &outputs, json!({ "aggregate": rows }))
}

pub fn incidence(cfg: &ExperimentConfig) -> Result<Outcome> {
    let insts = instances(cfg)?;
    let recs: Vec<IncidenceRecord> = insts
        .into_par_iter()
        .map(|(t, _, inst)| {
            cfg.variant
                .variants()
                .iter()
                .map(|&v| {
                    let (a, b, c, spec) = (&inst.a, &inst.b, &inst.c, &inst.spec);
                    let lc = lambda_counts(v, a, b, c, spec)?;
                    let energy = energy_report(&lc, b, c, spec.multiplicity(v)?)?;
                    let rep = incidence_report(v, a, b, c, spec, energy.energy, &cfg.budgets)?;
                    Ok(IncidenceRecord {
                        trial: t,
                        p: cfg.field.modulus(),
                        variant: v,
                        size_a: a.len() as u64,
                        size_b: b.len() as u64,
                        size_c: c.len() as u64,
                        size_r: rep.size_r,
                        size_s: rep.size_s,
                        projection_size: rep.projection_size,
                        image_size: rep.image_size,
                        incidences: rep.incidences,
                        incidences_grouped: rep.incidences_grouped,
                        incidences_naive: rep.incidences_naive,
                        k_exact: rep.k_exact.map_or(-1, |k| k as i64),
                        k_paper: rep.k_paper,
                        k_bound: rep.k_bound,
                        rudnev_rhs: sig6(rep.rudnev_rhs),
                        rudnev_ratio: sig6(rep.rudnev_ratio),
                        p2_gate: rep.p2_gate,
                        energy: rep.energy,
                        e_le_i: rep.e_le_i,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<Vec<_>>>>()?
        .into_iter()
        .flatten()
        .collect();

    let bytes = serialize(cfg, &recs)?;
    write_to(cfg.out.as_deref(), &bytes)?;
    let mut messages: Vec<String> = recs.iter().filter_map(|r| r.check().err()).collect();
    let failures = messages.len();
    if cfg.selfcheck {
        messages.extend(selfcheck(cfg, &bytes, recs.len(), IncidenceRecord::check));
    }
    let ok = messages.is_empty();
    let max_ratio = recs.iter().map(|r| r.rudnev_ratio).fold(0.0, f64::max);
    write_summary(
        cfg,
        json!({
            "command": "incidence",
            "p": cfg.field.modulus(),
            "seed": cfg.seed,
            "trials": cfg.trials,
            "records": recs.len(),
            "oracle_checked": recs.iter().filter(|r| r.incidences_naive.is_some()).count(),
            "failures": failures,
            "max_rudnev_ratio": max_ratio,
            "selfcheck": cfg.selfcheck,
            "ok": ok,
        }),
    )?;
    Ok(Outcome {
        status: if ok { Status::Ok } else { Status::Failed },
        messages,
    })
}

pub fn bounds(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = cfg.field.modulus();
    let sizes: Vec<Sizes> = if cfg.sizes.is_empty() {
        let tables = Tables::load(cfg)?;
        let inst = build(cfg, &tables, 0, None)?;
        vec![Sizes::of(&inst.a, &inst.b, &inst.c)]
    } else {
        cfg.sizes.iter().map(|&n| Sizes::uniform(n)).collect()
    };
    let recs: Vec<BoundRecord> = sizes
        .into_iter()
        .map(|s| BoundRecord::from(&compare_bounds(s, cfg.m, p)))
        .collect();
    let bytes = serialize(cfg, &recs)?;
    write_to(cfg.out.as_deref(), &bytes)?;
    write_summary(
        cfg,
        json!({
            "command": "bounds",
            "p": p,
            "m": cfg.m,
            "rows": recs.len(),
            "note": SHAPE_NOTE,
            "ok": true,
        }),
    )?;
    Ok(Outcome {
        status: Status::Ok,
        messages: Vec::new(),
    })
}
