//! Report emission: per-document CSV for boxplots and JSON summary tables.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ComparisonRow, EvaluationError, LikertSummary, ReadabilityReport};
use crate::readability::constants::{SMOG_NORM_SENTENCES, TARGET_GRADE};
use crate::stats::SummaryStat;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown report format {other:?} (csv|json)")),
        }
    }
}

/// Everything a report is built from. Comparisons are matched to reports by
/// `system_id`; a report without one is the reference row.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub reports: Vec<ReadabilityReport>,
    #[serde(default)]
    pub comparisons: Vec<ComparisonRow>,
    #[serde(default)]
    pub likert: Vec<LikertSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub system_id: String,
    pub n: usize,
    pub fk_grade: SummaryStat,
    /// `/` for the reference row.
    pub fk_p: String,
    pub smog_index: SummaryStat,
    pub smog_p: String,
    pub smog_low_confidence: usize,
    pub excluded_empty: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Row {
    pub system_id: String,
    pub n: usize,
    pub raters: usize,
    pub simplicity: SummaryStat,
    pub accuracy: SummaryStat,
    pub completeness: SummaryStat,
    pub brevity: SummaryStat,
    pub total_score: SummaryStat,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    schema_version: u32,
    grade_target: f64,
    smog_norm_sentences: u32,
    notes: Vec<String>,
    readability: Vec<Table1Row>,
    qualitative: Vec<Table2Row>,
    comparisons: &'a [ComparisonRow],
}

#[derive(Serialize)]
struct CsvRow<'a> {
    system_id: &'a str,
    sample_id: &'a str,
    fk_grade: f64,
    smog_index: f64,
    smog_low_confidence: bool,
    below_grade_target: bool,
}

impl ReportBundle {
    pub fn table1(&self) -> Vec<Table1Row> {
        self.reports
            .iter()
            .map(|r| {
                let cmp = self.comparisons.iter().find(|c| c.system_id == r.system_id);
                Table1Row {
                    system_id: r.system_id.clone(),
                    n: r.per_document.len(),
                    fk_grade: r.summary.fk_grade,
                    fk_p: cmp.map_or_else(|| "/".to_string(), |c| c.fk_grade.p_display()),
                    smog_index: r.summary.smog_index,
                    smog_p: cmp.map_or_else(|| "/".to_string(), |c| c.smog_index.p_display()),
                    smog_low_confidence: r.summary.smog_low_confidence_count,
                    excluded_empty: r.excluded_empty.len(),
                }
            })
            .collect()
    }

    pub fn table2(&self) -> Vec<Table2Row> {
        self.likert
            .iter()
            .map(|l| Table2Row {
                system_id: l.system_id.clone(),
                n: l.n,
                raters: l.raters,
                simplicity: l.simplicity,
                accuracy: l.accuracy,
                completeness: l.completeness,
                brevity: l.brevity,
                total_score: l.total_score,
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let flagged: usize = self.reports.iter().map(|r| r.summary.smog_low_confidence_count).sum();
        let mut notes = Vec::new();
        if flagged > 0 {
            notes.push(format!(
                "{flagged} SMOG value(s) come from documents shorter than {SMOG_NORM_SENTENCES} sentences and are low-confidence; FK is the headline metric"
            ));
        }
        let report = JsonReport {
            schema_version: REPORT_SCHEMA_VERSION,
            grade_target: TARGET_GRADE,
            smog_norm_sentences: SMOG_NORM_SENTENCES,
            notes,
            readability: self.table1(),
            qualitative: self.table2(),
            comparisons: &self.comparisons,
        };
        let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.reports {
            for d in &r.per_document {
                w.serialize(CsvRow {
                    system_id: &r.system_id,
                    sample_id: d.sample_id.as_str(),
                    fk_grade: d.fk_grade,
                    smog_index: d.smog_index,
                    smog_low_confidence: d.smog_low_confidence,
                    below_grade_target: d.fk_grade < TARGET_GRADE,
                })
                .expect("in-memory csv");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
    }
}

/// Write the bundle in `format` to `out`. Output is byte-identical for equal inputs.
pub fn emit_report(bundle: &ReportBundle, format: ReportFormat, out: impl AsRef<Path>) -> Result<(), EvaluationError> {
    if bundle.reports.is_empty() && bundle.likert.is_empty() {
        return Err(EvaluationError::NothingToReport);
    }
    let out = out.as_ref();
    let body = match format {
        ReportFormat::Csv => bundle.to_csv(),
        ReportFormat::Json => bundle.to_json(),
    };
    std::fs::write(out, body).map_err(|e| EvaluationError::Io { path: out.display().to_string(), message: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SampleId;
    use std::collections::BTreeMap;

    fn bundle() -> ReportBundle {
        let docs: BTreeMap<SampleId, Vec<String>> = [
            ("q/1/1", "The cat sat on the mat. It was happy."),
            ("q/2/1", "Cardiovascular disease remains the leading cause of mortality worldwide."),
        ]
        .into_iter()
        .map(|(id, t)| (SampleId::from(id), vec![t.to_string()]))
        .collect();
        ReportBundle { reports: vec![ReadabilityReport::from_documents("sys", &docs).unwrap()], ..Default::default() }
    }

    #[test]
    fn csv_shape() {
        let csv = bundle().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "system_id,sample_id,fk_grade,smog_index,smog_low_confidence,below_grade_target");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("sys,q/1/1,"));
    }

    #[test]
    fn deterministic_files() {
        let dir = tempfile::tempdir().unwrap();
        let b = bundle();
        for f in [ReportFormat::Csv, ReportFormat::Json] {
            let (p1, p2) = (dir.path().join("a"), dir.path().join("b"));
            emit_report(&b, f, &p1).unwrap();
            emit_report(&b, f, &p2).unwrap();
            assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
        }
    }

    #[test]
    fn json_carries_grade_target() {
        let v: serde_json::Value = serde_json::from_str(&bundle().to_json()).unwrap();
        assert_eq!(v["grade_target"], 8.0);
        assert_eq!(v["readability"][0]["fk_p"], "/");
        assert_eq!(v["notes"].as_array().unwrap().len(), 1);
    }

    #[test]
    fn unwritable_and_empty() {
        assert!(matches!(emit_report(&bundle(), ReportFormat::Csv, "/nonexistent/dir/x.csv"), Err(EvaluationError::Io { .. })));
        assert!(matches!(emit_report(&ReportBundle::default(), ReportFormat::Json, "x"), Err(EvaluationError::NothingToReport)));
    }
}
