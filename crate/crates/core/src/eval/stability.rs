use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::metrics::EvalReport;
use crate::error::{ProbeError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation (divides by n).
    pub std: f64,
}

pub fn mean_std(values: &[f64]) -> MeanStd {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    MeanStd { mean, std: var.sqrt() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilitySummary {
    pub runs: usize,
    pub per_relation: BTreeMap<String, BTreeMap<usize, MeanStd>>,
    pub macro_acc: BTreeMap<usize, MeanStd>,
}

/// Mean and population std of acc@k across runs, per relation and macro.
pub fn stability_summary(reports: &[EvalReport]) -> Result<StabilitySummary> {
    if reports.len() < 2 {
        return Err(ProbeError::Validation(format!(
            "stability needs at least 2 reports, got {}",
            reports.len()
        )));
    }
    let relations: BTreeSet<&String> = reports[0].per_relation.keys().collect();
    for (i, r) in reports.iter().enumerate().skip(1) {
        let other: BTreeSet<&String> = r.per_relation.keys().collect();
        if other != relations {
            return Err(ProbeError::Validation(format!(
                "report {i} covers a different relation set"
            )));
        }
        if r.ks != reports[0].ks {
            return Err(ProbeError::Validation(format!("report {i} uses different k values")));
        }
    }
    let ks = &reports[0].ks;
    let mut per_relation = BTreeMap::new();
    for rel in relations {
        let mut by_k = BTreeMap::new();
        for &k in ks {
            let vals: Vec<f64> = reports.iter().map(|r| r.relation_acc(rel, k).unwrap_or(0.0)).collect();
            by_k.insert(k, mean_std(&vals));
        }
        per_relation.insert(rel.clone(), by_k);
    }
    let macro_acc = ks
        .iter()
        .map(|&k| {
            let vals: Vec<f64> = reports.iter().map(|r| r.macro_at(k).unwrap_or(0.0)).collect();
            (k, mean_std(&vals))
        })
        .collect();
    Ok(StabilitySummary {
        runs: reports.len(),
        per_relation,
        macro_acc,
    })
}

/// One row of a per-relation training curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepCurveRow {
    pub step: usize,
    pub relation_id: String,
    pub acc1_mean: f64,
    pub acc1_std: f64,
}

/// One row of the macro-average training curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroCurveRow {
    pub step: usize,
    pub runs: usize,
    pub macro_acc1_mean: f64,
    pub macro_acc1_std: f64,
    pub macro_acc10_mean: f64,
    pub macro_acc10_std: f64,
}

/// Curve data from reports grouped by checkpoint step. A single report per
/// step gives zero spread.
pub fn step_curves(by_step: &BTreeMap<usize, Vec<EvalReport>>) -> Result<(Vec<StepCurveRow>, Vec<MacroCurveRow>)> {
    let mut rows = Vec::new();
    let mut macro_rows = Vec::new();
    for (&step, reports) in by_step {
        if reports.is_empty() {
            continue;
        }
        let relations: BTreeSet<&String> = reports.iter().flat_map(|r| r.per_relation.keys()).collect();
        for rel in relations {
            let vals: Vec<f64> = reports.iter().map(|r| r.relation_acc(rel, 1).unwrap_or(0.0)).collect();
            let ms = mean_std(&vals);
            rows.push(StepCurveRow {
                step,
                relation_id: rel.clone(),
                acc1_mean: ms.mean,
                acc1_std: ms.std,
            });
        }
        let m1 = mean_std(&reports.iter().map(|r| r.macro_at(1).unwrap_or(0.0)).collect::<Vec<_>>());
        let m10 = mean_std(
            &reports
                .iter()
                .map(|r| r.macro_at(10).unwrap_or(0.0))
                .collect::<Vec<_>>(),
        );
        macro_rows.push(MacroCurveRow {
            step,
            runs: reports.len(),
            macro_acc1_mean: m1.mean,
            macro_acc1_std: m1.std,
            macro_acc10_mean: m10.mean,
            macro_acc10_std: m10.std,
        });
    }
    Ok((rows, macro_rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::metrics::{aggregate, QueryHits};

    fn report(hits: &[(&str, bool)]) -> EvalReport {
        let recs: Vec<QueryHits> = hits
            .iter()
            .map(|(r, h)| QueryHits {
                query_id: String::new(),
                relation_id: r.to_string(),
                hits: vec![*h],
            })
            .collect();
        aggregate(&recs, &[1], &[])
    }

    #[test]
    fn identical_reports_have_zero_spread() {
        let r = report(&[("a", true), ("a", false), ("b", true)]);
        let s = stability_summary(&[r.clone(), r.clone(), r]).unwrap();
        assert!(s.per_relation.values().all(|m| m[&1].std == 0.0));
        assert_eq!(s.macro_acc[&1].std, 0.0);
    }

    #[test]
    fn two_runs_point_two_and_point_four() {
        let mut a = report(&[("a", true)]);
        let mut b = a.clone();
        a.per_relation.get_mut("a").unwrap().acc.insert(1, 0.2);
        b.per_relation.get_mut("a").unwrap().acc.insert(1, 0.4);
        let s = stability_summary(&[a, b]).unwrap();
        let ms = s.per_relation["a"][&1];
        assert!((ms.mean - 0.3).abs() < 1e-12);
        assert!((ms.std - 0.1).abs() < 1e-12);
    }

    #[test]
    fn one_report_or_mismatched_relations_fail() {
        assert!(stability_summary(&[report(&[("a", true)])]).is_err());
        assert!(stability_summary(&[report(&[("a", true)]), report(&[("b", true)])]).is_err());
    }
}
