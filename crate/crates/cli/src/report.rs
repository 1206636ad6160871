//! Rendering of metrics reports: console tables and CSV.

use gustosonic_core::learn::MetricsReport;
use gustosonic_core::sensor_data::ActivityLabel;

/// Console table in the usual classification-report shape: one row per
/// class, then macro and weighted average rows.
pub fn render_table(report: &MetricsReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<14} {:>9} {:>8} {:>8} {:>8}\n",
        "", "precision", "recall", "f1", "support"
    ));
    for class in ActivityLabel::ALL {
        let m = report.class(class);
        out.push_str(&format!(
            "{:<14} {:>9.2} {:>8.2} {:>8.2} {:>8}\n",
            class.as_str(),
            m.precision,
            m.recall,
            m.f1,
            m.support
        ));
    }
    out.push('\n');
    out.push_str(&format!(
        "{:<14} {:>9.2} {:>8.2} {:>8.2} {:>8}\n",
        "macro avg",
        report.macro_avg.precision,
        report.macro_avg.recall,
        report.macro_avg.f1,
        report.total
    ));
    out.push_str(&format!(
        "{:<14} {:>9.2} {:>8.2} {:>8.2} {:>8}\n",
        "weighted avg",
        report.weighted_avg.precision,
        report.weighted_avg.recall,
        report.weighted_avg.f1,
        report.total
    ));
    out
}

/// CSV with the same row structure:
/// `class,precision,recall,f1,support` plus `macro_avg` / `weighted_avg`.
pub fn metrics_csv(report: &MetricsReport) -> String {
    let mut out = String::from("class,precision,recall,f1,support\n");
    for class in ActivityLabel::ALL {
        let m = report.class(class);
        out.push_str(&format!(
            "{},{:.4},{:.4},{:.4},{}\n",
            class.as_str(),
            m.precision,
            m.recall,
            m.f1,
            m.support
        ));
    }
    out.push_str(&format!(
        "macro_avg,{:.4},{:.4},{:.4},{}\n",
        report.macro_avg.precision, report.macro_avg.recall, report.macro_avg.f1, report.total
    ));
    out.push_str(&format!(
        "weighted_avg,{:.4},{:.4},{:.4},{}\n",
        report.weighted_avg.precision,
        report.weighted_avg.recall,
        report.weighted_avg.f1,
        report.total
    ));
    out
}
