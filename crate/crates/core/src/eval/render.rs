use alloc::format;
use alloc::string::String;

use super::{AggregateReport, MetricStat};

/// A std is printed only when strictly greater than this.
pub const STD_DISPLAY_THRESHOLD: f64 = 0.01;

/// `0.681 (± 0.022)`, or just `0.681` when the std is small or undefined.
pub fn format_stat(stat: &MetricStat) -> String {
    match stat.std {
        Some(s) if s > STD_DISPLAY_THRESHOLD => format!("{:.3} (± {:.3})", stat.mean, s),
        _ => format!("{:.3}", stat.mean),
    }
}

/// Markdown table with one row per labelled aggregate and one column per
/// metric. Missing metrics render as `-`.
pub fn render_table(rows: &[(&str, &AggregateReport)], columns: &[&str]) -> String {
    let mut out = String::from("| run |");
    for c in columns {
        out.push_str(&format!(" {c} |"));
    }
    out.push_str("\n|---|");
    for _ in columns {
        out.push_str("---|");
    }
    out.push('\n');
    for (label, agg) in rows {
        out.push_str(&format!("| {label} |"));
        for c in columns {
            let cell = agg.metrics.get(*c).map(format_stat).unwrap_or_else(|| String::from("-"));
            out.push_str(&format!(" {cell} |"));
        }
        out.push('\n');
    }
    out
}
