//! Segmentation comparison scores: pairwise Rand F-score and variation of
//! information, both computed from a label contingency table.
//!
//! Count sums are taken in integer space and the table is ordered, so every
//! score is deterministic across runs and symmetric where it should be.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::grid::LabelVolume;

/// Joint label counts between a predicted and a reference labeling.
#[derive(Debug, Clone)]
pub struct ContingencyTable {
    joint: BTreeMap<(u32, u32), u64>,
    pred_marginal: BTreeMap<u32, u64>,
    ref_marginal: BTreeMap<u32, u64>,
    total: u64,
}

impl ContingencyTable {
    /// Counts co-occurrences; with `ignore_ref_zero`, positions whose
    /// reference label is 0 are excluded entirely.
    pub fn build(pred: &[u32], reference: &[u32], ignore_ref_zero: bool) -> Result<Self> {
        if pred.len() != reference.len() {
            return Err(Error::Input(format!(
                "label arrays differ in length: {} vs {}",
                pred.len(),
                reference.len()
            )));
        }
        let mut table = ContingencyTable {
            joint: BTreeMap::new(),
            pred_marginal: BTreeMap::new(),
            ref_marginal: BTreeMap::new(),
            total: 0,
        };
        for (&s, &t) in pred.iter().zip(reference) {
            if ignore_ref_zero && t == 0 {
                continue;
            }
            *table.joint.entry((s, t)).or_insert(0) += 1;
            *table.pred_marginal.entry(s).or_insert(0) += 1;
            *table.ref_marginal.entry(t).or_insert(0) += 1;
            table.total += 1;
        }
        Ok(table)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    fn sum_squares(counts: impl Iterator<Item = u64>) -> u128 {
        counts.map(|n| (n as u128) * (n as u128)).sum()
    }

    /// (H(pred | ref), H(ref | pred)), natural log.
    fn conditional_entropies(&self) -> (f64, f64) {
        let n = self.total as f64;
        let mut h_pred_given_ref = 0.0;
        let mut h_ref_given_pred = 0.0;
        for (&(s, t), &count) in &self.joint {
            let p = count as f64 / n;
            let ps = self.pred_marginal[&s] as f64 / n;
            let pt = self.ref_marginal[&t] as f64 / n;
            h_pred_given_ref -= p * (p / pt).ln();
            h_ref_given_pred -= p * (p / ps).ln();
        }
        // Clamp the -0.0 that exact agreement produces.
        (h_pred_given_ref.max(0.0), h_ref_given_pred.max(0.0))
    }
}

fn check_shapes(pred: &LabelVolume, reference: &LabelVolume) -> Result<()> {
    if pred.shape() != reference.shape() {
        return Err(Error::Input(format!(
            "shape mismatch: {:?} vs {:?}",
            pred.shape(),
            reference.shape()
        )));
    }
    Ok(())
}

/// Pairwise-probability Rand F-score in [0, 1]: the harmonic mean of
/// precision `sum p^2 / sum s^2` and recall `sum p^2 / sum t^2`, where p are
/// the joint and s, t the predicted/reference marginal probabilities. The
/// normalization cancels, so the ratios are formed directly from integer
/// sums of squared counts.
pub fn rand_f_score_labels(pred: &[u32], reference: &[u32], ignore_ref_zero: bool) -> Result<f64> {
    let table = ContingencyTable::build(pred, reference, ignore_ref_zero)?;
    if table.total() == 0 {
        return Err(Error::Input("no positions to score (all reference labels ignored)".into()));
    }
    let joint = ContingencyTable::sum_squares(table.joint.values().copied()) as f64;
    let pred_sq = ContingencyTable::sum_squares(table.pred_marginal.values().copied()) as f64;
    let ref_sq = ContingencyTable::sum_squares(table.ref_marginal.values().copied()) as f64;
    let precision = joint / pred_sq;
    let recall = joint / ref_sq;
    Ok(2.0 * precision * recall / (precision + recall))
}

pub fn rand_f_score(
    pred: &LabelVolume,
    reference: &LabelVolume,
    ignore_ref_zero: bool,
) -> Result<f64> {
    check_shapes(pred, reference)?;
    rand_f_score_labels(pred.labels(), reference.labels(), ignore_ref_zero)
}

/// Variation of information split into its two conditional entropies:
/// `(vi_split, vi_merge) = (H(pred|ref), H(ref|pred))`, natural log. Their
/// sum is the total VI distance.
pub fn variation_of_information_labels(
    pred: &[u32],
    reference: &[u32],
    ignore_ref_zero: bool,
) -> Result<(f64, f64)> {
    let table = ContingencyTable::build(pred, reference, ignore_ref_zero)?;
    if table.total() == 0 {
        return Err(Error::Input("no positions to score (all reference labels ignored)".into()));
    }
    Ok(table.conditional_entropies())
}

pub fn variation_of_information(
    pred: &LabelVolume,
    reference: &LabelVolume,
    ignore_ref_zero: bool,
) -> Result<(f64, f64)> {
    check_shapes(pred, reference)?;
    variation_of_information_labels(pred.labels(), reference.labels(), ignore_ref_zero)
}
