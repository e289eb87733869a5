use std::fmt::Write as _;
use std::path::Path;

use super::{AblationRow, CvSummary, FoldResult, Metrics};
use crate::Error;

fn write(path: &Path, text: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn json(value: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(value).expect("serializable report") + "\n"
}

fn cells(m: &Metrics) -> String {
    m.values().iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join("\t")
}

/// One row per fold, then `mean` and `std`, all metrics at 4 decimals.
pub fn cv_tsv(summary: &CvSummary) -> String {
    let mut out = format!("fold\t{}\tthreshold\ttp\tfp\ttn\tfn\n", Metrics::NAMES.join("\t"));
    for f in &summary.folds {
        let c = &f.report.confusion;
        let _ = writeln!(
            out,
            "{}\t{}\t{:.4}\t{}\t{}\t{}\t{}",
            f.fold,
            cells(&f.report.metrics),
            f.report.threshold,
            c.tp,
            c.fp,
            c.tn,
            c.fn_
        );
    }
    let _ = writeln!(out, "mean\t{}\t\t\t\t\t", cells(&summary.mean));
    let _ = writeln!(out, "std\t{}\t\t\t\t\t", cells(&summary.std));
    out
}

/// Aligned plain-text table.
pub fn cv_table(summary: &CvSummary) -> String {
    let mut out = format!("{:<6}", "fold");
    for n in Metrics::NAMES {
        let _ = write!(out, " {n:>11}");
    }
    out.push('\n');
    let mut row = |label: &str, m: &Metrics| {
        let _ = write!(out, "{label:<6}");
        for v in m.values() {
            let _ = write!(out, " {v:>11.4}");
        }
        out.push('\n');
    };
    for f in &summary.folds {
        row(&f.fold.to_string(), &f.report.metrics);
    }
    row("mean", &summary.mean);
    row("std", &summary.std);
    out
}

pub(super) fn write_fold(dir: &Path, result: &FoldResult) -> Result<(), Error> {
    write(&dir.join("report.json"), &json(result))?;
    let mut losses = String::from("epoch\tloss\n");
    for (i, l) in result.losses.iter().enumerate() {
        let _ = writeln!(losses, "{i}\t{l:.8e}");
    }
    write(&dir.join("losses.tsv"), &losses)
}

pub fn write_cv_reports(summary: &CvSummary, dir: &Path) -> Result<(), Error> {
    write(&dir.join("cv_folds.tsv"), &cv_tsv(summary))?;
    write(&dir.join("cv_summary.txt"), &cv_table(summary))?;
    write(&dir.join("cv_summary.json"), &json(summary))
}

/// Mean metrics per ε.
pub fn ablation_table(rows: &[AblationRow]) -> String {
    let mut out = format!("epsilon\tremoved\t{}\n", Metrics::NAMES.join("\t"));
    for r in rows {
        let _ = writeln!(out, "{:.2}\t{}\t{}", r.epsilon, r.removed, cells(&r.summary.mean));
    }
    out
}

pub fn write_ablation_reports(rows: &[AblationRow], dir: &Path) -> Result<(), Error> {
    write(&dir.join("ablation.tsv"), &ablation_table(rows))?;
    write(&dir.join("ablation.json"), &json(&rows))
}
