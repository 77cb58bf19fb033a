//! Six systems against a reference, checked against numpy/scipy values frozen
//! in `fixtures/table1_golden.json` (see `fixtures/table1_golden.py`).

use plainlang::evaluation::{compare_to_ground_truth, DocumentScore, ReadabilityReport, ReportBundle};
use serde_json::Value;

fn fixture() -> Vec<(String, Vec<DocumentScore>)> {
    let v: serde_json::Map<String, Value> = serde_json::from_str(include_str!("fixtures/table1_fixture.json")).unwrap();
    v.into_iter().map(|(k, rows)| (k, serde_json::from_value(rows).unwrap())).collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1.0)
}

#[test]
fn six_systems_match_golden() {
    let mut reports: Vec<ReadabilityReport> = fixture().into_iter().map(|(id, rows)| ReadabilityReport::from_scores(id, rows).unwrap()).collect();
    let gt_pos = reports.iter().position(|r| r.system_id == "ground_truth").unwrap();
    let gt = reports.remove(gt_pos);
    let comparisons = reports.iter().map(|r| compare_to_ground_truth(r, &gt).unwrap()).collect();
    reports.push(gt);
    let bundle = ReportBundle { reports, comparisons, likert: vec![] };

    let golden: Vec<Value> = serde_json::from_str(include_str!("fixtures/table1_golden.json")).unwrap();
    let table = bundle.table1();
    assert_eq!(table.len(), 7);
    assert_eq!(table.iter().filter(|r| r.fk_p != "/").count(), 6);

    for g in &golden {
        let id = g["system_id"].as_str().unwrap();
        let row = table.iter().find(|r| r.system_id == id).unwrap();
        assert_eq!(row.n as u64, g["n"].as_u64().unwrap());
        assert!(close(row.fk_grade.mean, g["fk_grade"]["mean"].as_f64().unwrap()), "{id} fk mean");
        assert!(close(row.fk_grade.sd, g["fk_grade"]["sd"].as_f64().unwrap()), "{id} fk sd");
        assert!(close(row.smog_index.mean, g["smog_index"]["mean"].as_f64().unwrap()), "{id} smog mean");
        assert!(close(row.smog_index.sd, g["smog_index"]["sd"].as_f64().unwrap()), "{id} smog sd");
        if id == "ground_truth" {
            assert_eq!((row.fk_p.as_str(), row.smog_p.as_str()), ("/", "/"));
            continue;
        }
        let cmp = bundle.comparisons.iter().find(|c| c.system_id == id).unwrap();
        for (metric, got) in [("fk_grade", &cmp.fk_grade), ("smog_index", &cmp.smog_index)] {
            let t = got.test.unwrap();
            assert!((t.t - g[format!("{metric}_t")].as_f64().unwrap()).abs() < 1e-9, "{id} {metric} t");
            assert!((t.p_two_sided - g[format!("{metric}_p")].as_f64().unwrap()).abs() < 1e-9, "{id} {metric} p");
        }
    }

    let json: Value = serde_json::from_str(&bundle.to_json()).unwrap();
    let rows = json["readability"].as_array().unwrap();
    assert_eq!(rows.len(), 7);
    let keys: Vec<&str> = rows[0].as_object().unwrap().keys().map(String::as_str).collect();
    for k in ["system_id", "fk_grade", "fk_p", "smog_index", "smog_p"] {
        assert!(keys.contains(&k), "missing column {k}");
    }
}
