//! Plain-text rendering of reports and bundles.

use std::fmt::Write;

use ijd_core::checker::{Condition, ConditionReport, Verdict};

use crate::verifier::VerdictBundle;

fn verdict(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "FAIL",
        Verdict::NotApplicable => "n/a",
    }
}

fn num(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.3e}"))
}

/// One line per condition: verdict, entry counts, worst residual, smallest margin.
pub fn render_report(report: &ConditionReport) -> String {
    let mut seen: Vec<Condition> = Vec::new();
    for e in &report.entries {
        if !seen.contains(&e.condition) {
            seen.push(e.condition);
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "{:<26} {:>7} {:>7} {:>12} {:>12}", "condition", "verdict", "failed", "max resid", "min margin");
    for c in seen {
        let total = report.entries_for(c).count();
        let failed = report.entries_for(c).filter(|e| e.verdict == Verdict::Fail).count();
        let mut v = verdict(report.verdict_of(c)).to_string();
        if c.is_informational() {
            v.push('*');
        }
        let _ = writeln!(
            out,
            "{:<26} {:>7} {:>7} {:>12} {:>12}",
            c.id(),
            v,
            format!("{failed}/{total}"),
            num(report.max_residual(c)),
            num(report.min_margin(c)),
        );
    }
    let _ = writeln!(out, "summary: {} ({})", verdict(report.summary), report.scope);
    if report.entries.iter().any(|e| e.condition.is_informational()) {
        let _ = writeln!(out, "* informational, does not affect the summary");
    }
    out
}

pub fn render_bundle(b: &VerdictBundle) -> String {
    let mut out = render_report(&b.report);
    for s in [&b.ambient, &b.chart].into_iter().flatten() {
        let _ = writeln!(
            out,
            "{:?} dt={:e} paths={}: max_dist={:.3e} mean_dist={:.3e} violations={} truncated={}",
            s.scheme, s.dt, s.n_paths, s.max_dist, s.mean_dist, s.boundary_violations, s.truncated_paths
        );
    }
    for row in &b.convergence {
        let _ = writeln!(out, "  dt={:<10e} mean max dist={:.4e}", row.dt, row.mean_max_dist);
    }
    let _ = writeln!(out, "agreement: {}", b.agreement);
    if let Some(d) = &b.discrepancy {
        let _ = writeln!(out, "discrepancy: {d}");
    }
    for n in &b.notes {
        let _ = writeln!(out, "note: {n}");
    }
    out
}
