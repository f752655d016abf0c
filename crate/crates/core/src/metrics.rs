//! Bias of a selected subsequence and the chaoticity bound on it:
//!
//! ```text
//! |nu(R(x)) - 1/2| <= c * sqrt((delta(x|n) + K(R) + 2 log2 K(R)) / l(R(x)))
//! ```
//!
//! `delta` comes from a complexity estimator and `K(R)` from the rule's
//! canonical encoding length. `c` is a free constant; [`CALIBRATED_C`] is the
//! value measured by the shipped calibration ensemble.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::bitstream::{frequency, BitSequence};
use crate::complexity::Estimator;
use crate::error::{Error, Result};
use crate::rulevm::{rule_complexity, run_rule, SelectionResult, SelectionRule};

/// Envelope constant measured on the reference ensemble (uniform input,
/// n = 2^20, 20 replicates, identity + transient 1..8 + random 2/4/8/16-state
/// rules) with the lz78 estimator. Regenerate with
/// `selstab calibrate --config configs/calibration.conf`.
pub const CALIBRATED_C: f64 = 0.09199614834151931;

/// Exact `|nu(s) - 1/2|`.
pub fn bias_exact(sub: &BitSequence) -> Result<Ratio<u64>> {
    let nu = frequency(sub)?;
    let half = Ratio::new(1, 2);
    Ok(if nu >= half { nu - half } else { half - nu })
}

/// `|nu(s) - 1/2|`, correctly rounded.
pub fn bias(sub: &BitSequence) -> Result<f64> {
    if sub.is_empty() {
        return Err(Error::EmptySequence);
    }
    let ones = sub.count_ones() as i64;
    let len = sub.len() as i64;
    Ok((2 * ones - len).unsigned_abs() as f64 / (2 * len) as f64)
}

/// `delta_hat + k_rule + 2 log2 k_rule`.
pub fn eq2_denominator(delta_hat: f64, k_rule: f64) -> f64 {
    delta_hat + k_rule + 2.0 * k_rule.log2()
}

pub fn eq2_bound(delta_hat: f64, k_rule: f64, sub_len: usize, c: f64) -> Result<f64> {
    if sub_len == 0 {
        return Err(Error::validation("empty selection, bound undefined"));
    }
    if k_rule.is_nan() || k_rule < 1.0 {
        return Err(Error::validation(format!(
            "rule complexity must be at least 1 bit, got {k_rule}"
        )));
    }
    if delta_hat.is_nan() || delta_hat < 0.0 {
        return Err(Error::validation(format!(
            "deficiency must be non-negative, got {delta_hat}"
        )));
    }
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::validation(format!("c must be positive, got {c}")));
    }
    Ok(c * (eq2_denominator(delta_hat, k_rule) / sub_len as f64).sqrt())
}

/// `bias * sqrt(sub_len / denominator)`: the smallest `c` for which the
/// bound holds on this one observation.
pub fn envelope_ratio(bias: f64, delta_hat: f64, k_rule: f64, sub_len: usize) -> f64 {
    bias * (sub_len as f64 / eq2_denominator(delta_hat, k_rule)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bias: f64,
    pub bound: f64,
    pub c_used: f64,
    pub delta_hat: f64,
    pub k_rule: u64,
    pub sub_len: usize,
    pub satisfied: bool,
}

/// Assembles a report from an existing selection, deficiency estimate and
/// rule complexity.
pub fn report_for_selection(
    selection: &SelectionResult,
    delta_hat: f64,
    k_rule: u64,
    c: f64,
) -> Result<BoundReport> {
    if selection.selected.is_empty() {
        return Err(Error::EmptySelection(selection.halt_reason));
    }
    let bias = bias(&selection.selected)?;
    let sub_len = selection.sub_len();
    let bound = eq2_bound(delta_hat, k_rule as f64, sub_len, c)?;
    Ok(BoundReport {
        bias,
        bound,
        c_used: c,
        delta_hat,
        k_rule,
        sub_len,
        satisfied: bias <= bound,
    })
}

pub fn bound_report(
    x: &BitSequence,
    rule: &SelectionRule,
    estimator: Estimator,
    c: f64,
) -> Result<BoundReport> {
    let selection = run_rule(rule, x);
    if selection.selected.is_empty() {
        return Err(Error::EmptySelection(selection.halt_reason));
    }
    let delta_hat = estimator.estimate(x)?.deficiency;
    report_for_selection(&selection, delta_hat, rule_complexity(rule), c)
}
