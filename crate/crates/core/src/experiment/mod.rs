//! Ensemble runs over generated inputs: one record per (rule, replicate),
//! envelope calibration, and the crystal stability comparison.

mod config;
mod output;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitstream::{generate, BitSequence, SourceSpec};
use crate::error::{Error, Result};
use crate::metrics::{bias, envelope_ratio, eq2_bound};
use crate::rulevm::{
    crystal_rule, random_rule, rule_complexity, run_rule, HaltReason, SelectionRule,
};

pub use config::{CSetting, ExperimentConfig, OutputFormat, OutputSpec, RuleRef};
pub use output::{emit, render, CSV_HEADER};

/// Records with fewer selected bits are ignored by calibration.
pub const MIN_CALIBRATION_SUB_LEN: usize = 100;
/// Calibration needs at least this many qualifying records.
pub const MIN_CALIBRATION_RECORDS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub rule_id: String,
    pub k_rule_bits: u64,
    pub seed: u64,
    pub sub_len: usize,
    /// `None` for an empty selection.
    pub bias: Option<f64>,
    pub delta_hat_bits: f64,
    pub bound: Option<f64>,
    pub satisfied: Option<bool>,
    #[serde(with = "halt_reason_str")]
    pub halt_reason: HaltReason,
}

mod halt_reason_str {
    use super::HaltReason;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(reason: &HaltReason, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(reason.as_str())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<HaltReason, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl ExperimentRecord {
    /// Smallest `c` that makes this record satisfy the bound.
    pub fn envelope_ratio(&self) -> Option<f64> {
        self.bias.map(|b| {
            envelope_ratio(
                b,
                self.delta_hat_bits,
                self.k_rule_bits as f64,
                self.sub_len,
            )
        })
    }

    fn qualifies_for_calibration(&self) -> bool {
        self.bias.is_some() && self.sub_len >= MIN_CALIBRATION_SUB_LEN
    }
}

/// Seed of replicate `r` (0-based): `base + r`, wrapping.
pub fn replicate_seed(base: u64, r: u32) -> u64 {
    base.wrapping_add(r as u64)
}

fn replicate_source(source: &SourceSpec, r: u32) -> (SourceSpec, u64) {
    let seed = replicate_seed(source.seed().unwrap_or(0), r);
    (source.with_seed(seed), seed)
}

/// Runs every rule on every replicate. Bounds are left empty.
fn observe(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    if cfg.replicates == 0 {
        return Err(Error::Config("replicates must be at least 1".into()));
    }
    let rules = cfg.resolve_rules()?;
    if rules.is_empty() {
        return Err(Error::Config("at least one rule is required".into()));
    }
    let complexities: Vec<u64> = rules.iter().map(|(_, r)| rule_complexity(r)).collect();

    let per_replicate: Vec<Vec<ExperimentRecord>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let (source, seed) = replicate_source(&cfg.source, r);
            let x = generate(&source, cfg.n)?;
            let delta_hat = cfg.estimator.estimate(&x)?.deficiency;
            Ok(rules
                .par_iter()
                .zip(&complexities)
                .map(|((id, rule), &k_rule)| {
                    let sel = run_rule(rule, &x);
                    ExperimentRecord {
                        rule_id: id.clone(),
                        k_rule_bits: k_rule,
                        seed,
                        sub_len: sel.sub_len(),
                        bias: bias(&sel.selected).ok(),
                        delta_hat_bits: delta_hat,
                        bound: None,
                        satisfied: None,
                        halt_reason: sel.halt_reason,
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    // rule-major order, replicates in order
    let mut records = Vec::with_capacity(rules.len() * cfg.replicates as usize);
    for rule_idx in 0..rules.len() {
        for rep in &per_replicate {
            records.push(rep[rule_idx].clone());
        }
    }
    Ok(records)
}

/// Fills `bound` and `satisfied` for every non-empty record.
pub fn apply_bound(records: &mut [ExperimentRecord], c: f64) -> Result<()> {
    for rec in records.iter_mut() {
        if let Some(b) = rec.bias {
            let bound = eq2_bound(rec.delta_hat_bits, rec.k_rule_bits as f64, rec.sub_len, c)?;
            rec.bound = Some(bound);
            rec.satisfied = Some(b <= bound);
        }
    }
    Ok(())
}

/// One record per (rule, replicate), ordered by rule then replicate.
/// With `c = calibrate` the bound uses the constant measured on this run.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    Ok(run_experiment_with_c(cfg)?.0)
}

/// Like [`run_experiment`], also returning the `c` that was applied.
pub fn run_experiment_with_c(cfg: &ExperimentConfig) -> Result<(Vec<ExperimentRecord>, f64)> {
    let mut records = observe(cfg)?;
    let c = match cfg.c {
        CSetting::Fixed(c) => c,
        CSetting::Calibrate => {
            let c = calibrate_records(&records)?;
            if c == 0.0 {
                return Err(Error::Calibration(
                    "every qualifying selection was perfectly balanced, c = 0".into(),
                ));
            }
            c
        }
    };
    apply_bound(&mut records, c)?;
    Ok((records, c))
}

/// Maximum envelope ratio over qualifying records (`sub_len >= 100`).
pub fn calibrate_records(records: &[ExperimentRecord]) -> Result<f64> {
    let ratios: Vec<f64> = records
        .iter()
        .filter(|r| r.qualifies_for_calibration())
        .filter_map(ExperimentRecord::envelope_ratio)
        .collect();
    if ratios.len() < MIN_CALIBRATION_RECORDS {
        return Err(Error::Calibration(format!(
            "{} qualifying records (sub_len >= {MIN_CALIBRATION_SUB_LEN}), need {MIN_CALIBRATION_RECORDS}",
            ratios.len()
        )));
    }
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

pub fn calibrate_c(cfg: &ExperimentConfig) -> Result<f64> {
    calibrate_records(&observe(cfg)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupStats {
    pub rule_id: String,
    /// Replicates that selected at least one bit.
    pub count: usize,
    pub mean_bias: Option<f64>,
    /// Standard error of the mean; zero with fewer than two observations.
    pub std_error: f64,
    pub excluded: bool,
}

impl GroupStats {
    fn from_biases(rule_id: String, biases: &[f64]) -> Self {
        let count = biases.len();
        if count == 0 {
            return Self {
                rule_id,
                count,
                mean_bias: None,
                std_error: 0.0,
                excluded: true,
            };
        }
        let mean = biases.iter().sum::<f64>() / count as f64;
        let std_error = if count > 1 {
            let var = biases.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
            (var / count as f64).sqrt()
        } else {
            0.0
        };
        Self {
            rule_id,
            count,
            mean_bias: Some(mean),
            std_error,
            excluded: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrystalSummary {
    pub n: usize,
    pub replicates: u32,
    pub crystal: GroupStats,
    pub groups: Vec<GroupStats>,
    /// Set when fewer than two replicates make standard errors meaningless.
    pub low_power: bool,
    /// Crystal mean bias within three combined standard errors of, or
    /// below, every non-excluded group's mean.
    pub passed: bool,
}

/// Base seed of the uniform inputs used by [`crystal_stability_check`].
pub const CRYSTAL_BASE_SEED: u64 = 1;

/// The fixed comparison ensemble: random 16-state rules with seeds 1..=8.
pub fn crystal_ensemble() -> Vec<(String, SelectionRule)> {
    (1..=8)
        .map(|seed| {
            let id = RuleRef::Random { seed, states: 16 }.id();
            (id, random_rule(seed, 16).expect("16 states is in range"))
        })
        .collect()
}

/// Compares the crystal rule's mean bias with each rule of the fixed
/// random 16-state ensemble on uniform inputs.
pub fn crystal_stability_check(n: usize, replicates: u32) -> Result<CrystalSummary> {
    if n < 1 << 16 {
        return Err(Error::validation(format!(
            "n must be at least 2^16, got {n}"
        )));
    }
    crystal_stability_check_with(n, replicates, &crystal_ensemble())
}

pub fn crystal_stability_check_with(
    n: usize,
    replicates: u32,
    ensemble: &[(String, SelectionRule)],
) -> Result<CrystalSummary> {
    if replicates == 0 {
        return Err(Error::validation("replicates must be at least 1"));
    }
    let crystal = crystal_rule();
    let inputs: Vec<BitSequence> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            generate(
                &SourceSpec::Uniform {
                    seed: replicate_seed(CRYSTAL_BASE_SEED, r),
                },
                n,
            )
        })
        .collect::<Result<_>>()?;

    let biases_for = |rule: &SelectionRule| -> Vec<f64> {
        inputs
            .par_iter()
            .map(|x| bias(&run_rule(rule, x).selected).ok())
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    };

    let crystal_stats = GroupStats::from_biases("crystal".into(), &biases_for(&crystal));
    let groups: Vec<GroupStats> = ensemble
        .iter()
        .map(|(id, rule)| GroupStats::from_biases(id.clone(), &biases_for(rule)))
        .collect();

    let c_mean = crystal_stats.mean_bias.unwrap_or(0.0);
    let passed = groups.iter().filter(|g| !g.excluded).all(|g| {
        let se = (crystal_stats.std_error.powi(2) + g.std_error.powi(2)).sqrt();
        c_mean <= g.mean_bias.unwrap_or(0.0) + 3.0 * se
    });

    Ok(CrystalSummary {
        n,
        replicates,
        crystal: crystal_stats,
        groups,
        low_power: replicates < 2,
        passed,
    })
}
