//! Plain-text rendering of metrics in percentage points.

use std::fmt::Write;

use crate::label::Label;

use super::metrics::MetricsReport;

fn pct(v: f64) -> String {
    format!("{:.2}", v * 100.0)
}

fn opt_pct(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), pct)
}

fn signed_pct(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |d| format!("{:+.2}", d * 100.0))
}

/// Renders accuracy, macro-F1, imperfect-context statistics, the confusion
/// matrix and the article breakdown.
pub fn render_text_report(title: &str, r: &MetricsReport<f64>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{title}");
    let _ = writeln!(s, "{:<8} {:>8} {:>9} {:>15}", "Cases", "Acc", "Macro-F1", "Parse failures");
    let _ = writeln!(s, "{:<8} {:>8} {:>9} {:>15}", r.cases, pct(r.accuracy), pct(r.macro_f1), r.parse_failures);
    let _ = writeln!(s);
    let _ = writeln!(s, "Per-class F1: {}", Label::ALL
        .iter()
        .map(|l| format!("{l} {}", opt_pct(r.per_class_f1.get(l).copied().flatten())))
        .collect::<Vec<_>>()
        .join(", "));
    let _ = writeln!(s);
    let _ = writeln!(s, "Imperfect context");
    let _ = writeln!(s, "{:<8} {:>8}", "Ratio", "Avg #");
    let _ = writeln!(
        s,
        "{:<8} {:>8}",
        opt_pct(r.imperfect_ratio),
        r.avg_factors.map_or_else(|| "-".to_string(), |a| format!("{a:.2}"))
    );
    let _ = writeln!(s);
    let _ = writeln!(s, "Confusion (rows: truth, columns: predicted)");
    let _ = writeln!(s, "{:<16} {:>10} {:>10} {:>14} {:>13}", "", "permitted", "prohibited", "not_applicable", "parse_failure");
    for l in Label::ALL {
        let row = &r.confusion.matrix[l.index()];
        let _ = writeln!(
            s,
            "{:<16} {:>10} {:>10} {:>14} {:>13}",
            l.as_str(),
            row[0],
            row[1],
            row[2],
            r.confusion.failures[l.index()]
        );
    }
    if !r.article_breakdown.is_empty() {
        let _ = writeln!(s);
        let _ = writeln!(s, "Imperfect ratio by article");
        let _ = writeln!(s, "{:<28} {:>8} {:>8} {:>8}", "Article", "Correct", "Wrong", "Δ");
        for b in &r.article_breakdown {
            let _ = writeln!(
                s,
                "{:<28} {:>8} {:>8} {:>8}",
                b.group,
                opt_pct(b.correct_ratio),
                opt_pct(b.wrong_ratio),
                signed_pct(b.delta)
            );
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::metrics::Confusion;

    #[test]
    fn renders_headers() {
        let r = MetricsReport {
            cases: 2,
            accuracy: 0.5,
            macro_f1: 0.5,
            per_class_f1: Label::ALL.iter().map(|&l| (l, None)).collect(),
            confusion: Confusion::default(),
            parse_failures: 0,
            imperfect_ratio: Some(1.0),
            avg_factors: Some(5.22),
            article_breakdown: vec![],
        };
        let text = render_text_report("t", &r);
        for h in ["Acc", "Macro-F1", "Ratio", "Avg #", "5.22", "100.00"] {
            assert!(text.contains(h), "{h} missing");
        }
    }
}
