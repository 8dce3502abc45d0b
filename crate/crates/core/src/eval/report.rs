//! JSON and CSV writers for evaluation output.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::bins::LengthBin;
use super::expert::ConfusionTable;
use super::metrics::EvalReport;
use super::stability::{MacroCurveRow, StabilitySummary, StepCurveRow};
use crate::error::{ProbeError, Result};

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| ProbeError::input(path, e))
}

pub fn save_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn load_report(path: &Path) -> Result<EvalReport> {
    let f = File::open(path).map_err(|e| ProbeError::input(path, e))?;
    Ok(serde_json::from_reader(std::io::BufReader::new(f))?)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `relation_id,count,acc1,acc10` (one `acc{k}` column per k in the report).
pub fn write_report_csv<W: Write>(w: W, report: &EvalReport) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["relation_id".to_string(), "count".to_string()];
    header.extend(report.ks.iter().map(|k| format!("acc{k}")));
    out.write_record(&header)?;
    for (rel, score) in &report.per_relation {
        let mut row = vec![rel.clone(), score.count.to_string()];
        row.extend(report.ks.iter().map(|k| fmt_opt(score.acc.get(k).copied())));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_report_csv(report: &EvalReport, path: &Path) -> Result<()> {
    write_report_csv(create(path)?, report)
}

/// `k,lower,upper,count,hits,acc`; an open upper edge or an empty bin's
/// accuracy is left blank.
pub fn save_length_bins_csv(bins: &[(usize, Vec<LengthBin>)], path: &Path) -> Result<()> {
    let mut out = csv::Writer::from_writer(create(path)?);
    out.write_record(["k", "lower", "upper", "count", "hits", "acc"])?;
    for (k, bins) in bins {
        for b in bins {
            out.write_record([
                k.to_string(),
                b.lower.to_string(),
                b.upper.map(|u| u.to_string()).unwrap_or_default(),
                b.count.to_string(),
                b.hits.to_string(),
                fmt_opt(b.acc),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn save_confusion_csv(table: &ConfusionTable, path: &Path) -> Result<()> {
    let mut out = csv::Writer::from_writer(create(path)?);
    out.write_record(["score", "top1_yes", "top1_no", "topk_yes", "topk_no", "sum"])?;
    for (score, r) in table.rows.iter().rev() {
        out.write_record([
            score.to_string(),
            r.top1_yes.to_string(),
            r.top1_no.to_string(),
            r.topk_yes.to_string(),
            r.topk_no.to_string(),
            r.sum().to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSweepRow {
    pub layer_limit: usize,
    pub macro_acc1: f64,
    pub macro_acc10: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskRatioRow {
    pub mask_ratio: f64,
    pub macro_acc1: f64,
    pub macro_acc10: f64,
}

pub fn save_rows_csv<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    let mut out = csv::Writer::from_writer(create(path)?);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_step_curve_csv(rows: &[StepCurveRow], path: &Path) -> Result<()> {
    save_rows_csv(rows, path)
}

pub fn save_macro_curve_csv(rows: &[MacroCurveRow], path: &Path) -> Result<()> {
    save_rows_csv(rows, path)
}

/// `relation_id,k,mean,std`, with the macro average under `relation_id = "macro"`.
pub fn save_stability_csv(summary: &StabilitySummary, path: &Path) -> Result<()> {
    let mut out = csv::Writer::from_writer(create(path)?);
    out.write_record(["relation_id", "k", "mean", "std"])?;
    for (rel, by_k) in &summary.per_relation {
        for (k, ms) in by_k {
            out.write_record([rel.clone(), k.to_string(), ms.mean.to_string(), ms.std.to_string()])?;
        }
    }
    for (k, ms) in &summary.macro_acc {
        out.write_record([
            "macro".to_string(),
            k.to_string(),
            ms.mean.to_string(),
            ms.std.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::metrics::{aggregate, QueryHits};

    #[test]
    fn report_csv_columns() {
        let recs = vec![QueryHits {
            query_id: "q".into(),
            relation_id: "may_treat".into(),
            hits: vec![false, true],
        }];
        let r = aggregate(&recs, &[1, 10], &[]);
        let mut buf = Vec::new();
        write_report_csv(&mut buf, &r).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "relation_id,count,acc1,acc10\nmay_treat,1,0,1\n"
        );
    }
}
