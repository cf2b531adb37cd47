//! Human-readable tables and JSON reports.

use std::fmt::Write as _;

use codemix_core::eval::{ConfusionMatrix, CvReport, HoldoutReport, MetricSummary, Metrics};
use codemix_core::{Label, StatsReport};
use serde_json::{json, Map, Value};

/// Metric values are kept to 4 decimals in reports.
pub fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

pub fn confusion_json(cm: &ConfusionMatrix) -> Value {
    json!({ "tp": cm.tp, "fp": cm.fp, "fn": cm.fn_, "tn": cm.tn })
}

pub fn metrics_json(m: &Metrics) -> Value {
    let mut per_class = Map::new();
    for l in Label::ALL {
        let c = m.class(l);
        per_class.insert(
            l.as_str().into(),
            json!({
                "precision": round4(c.precision),
                "recall": round4(c.recall),
                "f1": round4(c.f1),
                "support": c.support,
            }),
        );
    }
    json!({
        "accuracy": round4(m.accuracy),
        "per_class": per_class,
        "macro": {
            "precision": round4(m.macro_precision),
            "recall": round4(m.macro_recall),
            "f1": round4(m.macro_f1),
        },
        "weighted_f1": round4(m.weighted_f1),
    })
}

fn summary_map(values: &[f64; 11]) -> Value {
    Value::Object(
        Metrics::NAMES
            .iter()
            .zip(values)
            .map(|(n, v)| (n.to_string(), json!(round4(*v))))
            .collect(),
    )
}

pub fn summary_json(s: &MetricSummary) -> Value {
    json!({ "mean": summary_map(&s.mean), "std": summary_map(&s.std) })
}

pub fn holdout_json(r: &HoldoutReport) -> Value {
    json!({
        "n_train": r.n_train,
        "n_test": r.n_test,
        "confusion": confusion_json(&r.confusion),
        "metrics": metrics_json(&r.metrics),
    })
}

pub fn cv_json(r: &CvReport) -> Value {
    let folds: Vec<Value> = r
        .folds
        .iter()
        .enumerate()
        .map(|(k, f)| {
            json!({
                "fold": k + 1,
                "n_train": f.n_train,
                "n_validation": f.n_validation,
                "confusion": confusion_json(&f.confusion),
                "metrics": metrics_json(&f.metrics),
            })
        })
        .collect();
    json!({
        "folds": folds,
        "summary": summary_json(&r.summary),
        "pooled": {
            "confusion": confusion_json(&r.pooled),
            "metrics": metrics_json(&r.pooled_metrics),
        },
    })
}

pub fn stats_json(reports: &[StatsReport]) -> Value {
    let rows: Vec<Value> = reports
        .iter()
        .map(|r| {
            json!({
                "dataset": r.name,
                "total": r.total,
                "NOT": { "count": r.count(Label::Not), "percent": r.percentage(Label::Not) },
                "OFF": { "count": r.count(Label::Off), "percent": r.percentage(Label::Off) },
            })
        })
        .collect();
    json!({ "command": "stats", "datasets": rows })
}

pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn stats_table(reports: &[StatsReport]) -> String {
    let width = reports.iter().map(|r| r.name.len()).max().unwrap_or(0).max(7);
    let mut out = String::new();
    writeln!(
        out,
        "{:<width$}  {:>16}  {:>16}  {:>7}",
        "Dataset", "NOT", "OFF", "Total"
    )
    .unwrap();
    for r in reports {
        let cell = |l| format!("{} ({:.2}%)", r.count(l), r.percentage(l));
        writeln!(
            out,
            "{:<width$}  {:>16}  {:>16}  {:>7}",
            r.name,
            cell(Label::Not),
            cell(Label::Off),
            r.total
        )
        .unwrap();
    }
    out
}

fn metrics_row(out: &mut String, name: &str, m: &Metrics) {
    writeln!(
        out,
        "{:<14} {:>8.2} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>9.2}",
        name,
        m.accuracy,
        m.class(Label::Not).f1,
        m.class(Label::Off).f1,
        m.macro_precision,
        m.macro_recall,
        m.macro_f1,
    )
    .unwrap();
    // weighted F1 on its own line keeps the table narrow
    writeln!(out, "{:<14} weighted F1 {:.2}", "", m.weighted_f1).unwrap();
}

fn metrics_header(out: &mut String) {
    writeln!(
        out,
        "{:<14} {:>8} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "", "Accuracy", "NOT F1", "OFF F1", "Precision", "Recall", "F1"
    )
    .unwrap();
}

pub fn evaluation_table(title: &str, holdout: Option<&HoldoutReport>, cv: Option<&CvReport>) -> String {
    let mut out = String::new();
    writeln!(out, "{title}").unwrap();
    metrics_header(&mut out);
    if let Some(h) = holdout {
        metrics_row(&mut out, &format!("holdout n={}", h.n_test), &h.metrics);
    }
    if let Some(cv) = cv {
        for (k, f) in cv.folds.iter().enumerate() {
            metrics_row(&mut out, &format!("fold {}", k + 1), &f.metrics);
        }
        let get = |name| cv.summary.mean_of(name).unwrap_or(0.0);
        let std = |name: &str| {
            Metrics::NAMES
                .iter()
                .position(|n| *n == name)
                .map_or(0.0, |i| cv.summary.std[i])
        };
        writeln!(
            out,
            "{:<14} {:>8.2} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>9.2}",
            "cv mean",
            get("accuracy"),
            get("not_f1"),
            get("off_f1"),
            get("macro_precision"),
            get("macro_recall"),
            get("macro_f1"),
        )
        .unwrap();
        writeln!(
            out,
            "{:<14} {:>8.2} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>9.2}",
            "cv std",
            std("accuracy"),
            std("not_f1"),
            std("off_f1"),
            std("macro_precision"),
            std("macro_recall"),
            std("macro_f1"),
        )
        .unwrap();
        let cm = &cv.pooled;
        writeln!(
            out,
            "pooled confusion: tp={} fp={} fn={} tn={}",
            cm.tp, cm.fp, cm.fn_, cm.tn
        )
        .unwrap();
    }
    if let Some(h) = holdout {
        let cm = &h.confusion;
        writeln!(
            out,
            "holdout confusion: tp={} fp={} fn={} tn={}",
            cm.tp, cm.fp, cm.fn_, cm.tn
        )
        .unwrap();
    }
    out
}

/// One line of the model × analyzer comparison.
#[derive(Debug, Clone)]
pub struct GridRow {
    pub model: String,
    pub analyzer: String,
    pub features: Option<usize>,
    pub holdout: Option<HoldoutReport>,
    pub cv: Option<CvReport>,
}

pub fn grid_table(rows: &[GridRow]) -> String {
    let mut out = String::new();
    write!(out, "{:<9} {:<9} {:>9}", "Model", "Analyzer", "Features").unwrap();
    let has_h = rows.iter().any(|r| r.holdout.is_some());
    let has_cv = rows.iter().any(|r| r.cv.is_some());
    if has_h {
        write!(out, " {:>8} {:>8} {:>8}", "Acc", "F1", "W-F1").unwrap();
    }
    if has_cv {
        write!(out, " {:>8} {:>8} {:>8}", "CV Acc", "CV F1", "CV W-F1").unwrap();
    }
    out.push('\n');
    for r in rows {
        let feats = r.features.map_or("-".to_string(), |d| d.to_string());
        write!(out, "{:<9} {:<9} {:>9}", r.model, r.analyzer, feats).unwrap();
        if let Some(h) = &r.holdout {
            let m = &h.metrics;
            write!(out, " {:>8.4} {:>8.4} {:>8.4}", m.accuracy, m.macro_f1, m.weighted_f1).unwrap();
        }
        if let Some(cv) = &r.cv {
            let g = |n| cv.summary.mean_of(n).unwrap_or(0.0);
            write!(
                out,
                " {:>8.4} {:>8.4} {:>8.4}",
                g("accuracy"),
                g("macro_f1"),
                g("weighted_f1")
            )
            .unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn grid_json(rows: &[GridRow]) -> Value {
    let rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            let mut o = Map::new();
            o.insert("model".into(), json!(r.model));
            o.insert("analyzer".into(), json!(r.analyzer));
            o.insert("features".into(), json!(r.features));
            if let Some(h) = &r.holdout {
                o.insert("holdout".into(), holdout_json(h));
            }
            if let Some(cv) = &r.cv {
                o.insert("cv".into(), cv_json(cv));
            }
            Value::Object(o)
        })
        .collect();
    json!({ "command": "grid", "rows": rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use codemix_core::eval::metrics;

    #[test]
    fn metrics_json_shape() {
        let m = metrics(&ConfusionMatrix {
            tp: 2,
            fp: 1,
            fn_: 0,
            tn: 1,
        });
        let v = metrics_json(&m);
        assert_eq!(v["accuracy"], json!(0.75));
        assert_eq!(v["per_class"]["OFF"]["precision"], json!(0.6667));
        assert_eq!(v["per_class"]["NOT"]["support"], json!(2));
        assert!(v["macro"]["f1"].is_number());
    }

    #[test]
    fn rounding() {
        assert_eq!(round4(0.76084), 0.7608);
        assert_eq!(round4(1.0), 1.0);
    }
}
