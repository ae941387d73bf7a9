//! Plain-text renderings for stdout.

use std::fmt::Write;

use exo_core::intent::ScreeningReport;
use exo_core::outcomes::{CohortReport, GroupMean, TestResult};
use exo_core::protocol::{SessionLog, TrainingTask};

fn opt(v: Option<f64>, decimals: usize) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.decimals$}"))
}

fn test_rows(out: &mut String, rows: &[TestResult]) {
    let _ = writeln!(
        out,
        "{:<18} {:>4} {:>6} {:>9} {:>8} {:>9} {:>4} {:>9}  sig",
        "test", "n", "sum", "mean", "kind", "p", "rank", "threshold"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<18} {:>4} {:>6} {:>9} {:>8} {:>9} {:>4} {:>9}  {}",
            r.label,
            r.n,
            r.gain_sum,
            r.mean_display,
            r.kind.as_str(),
            opt(r.p, 4),
            r.rank.map_or_else(|| "-".into(), |k| k.to_string()),
            opt(r.threshold, 4),
            if r.significant { "*" } else { "" }
        );
        if let Some(e) = &r.error {
            let _ = writeln!(out, "    error: {e}");
        }
    }
}

fn group_rows(out: &mut String, rows: &[GroupMean]) {
    for g in rows {
        let _ = writeln!(
            out,
            "{:<18} {:<14} {:>3} {:>4} {:>6} {:>9}",
            g.measure.label(),
            g.group,
            g.comparison.as_str(),
            g.n,
            g.gain_sum,
            g.mean_display.as_deref().unwrap_or("-")
        );
    }
}

pub fn cohort_text(r: &CohortReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "cohort: {} subjects, BH q = {}, gate alpha = {}, m = {}",
        r.n_subjects, r.q, r.alpha, r.m
    );
    let _ = writeln!(s, "\nnormality / homogeneity gates");
    for g in &r.gates {
        let sw: Vec<String> = g
            .normality_p
            .iter()
            .map(|(c, p)| format!("{}={}", c.as_str(), opt(*p, 4)))
            .collect();
        let _ = writeln!(
            s,
            "{:<14} shapiro-wilk {:<32} levene {:>7} -> {}",
            g.measure.label(),
            sw.join(" "),
            opt(g.levene_p, 4),
            if g.parametric { "paired-t" } else { "wilcoxon" }
        );
    }
    let _ = writeln!(s, "\nFM gains");
    test_rows(&mut s, &r.fm);
    let _ = writeln!(s, "\nARAT gains");
    test_rows(&mut s, &r.arat);
    let _ = writeln!(s, "\nmean gains by control group");
    group_rows(&mut s, &r.by_group);
    let _ = writeln!(s, "\nBBT mean gains by baseline function");
    group_rows(&mut s, &r.bbt_by_function);
    let _ = writeln!(
        s,
        "\nMCID: FM {}-{}, ARAT {}",
        r.fm_mcid.0, r.fm_mcid.1, r.arat_mcid
    );
    for w in &r.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}

pub fn tasks_text(tasks: &[TrainingTask]) -> String {
    let mut s = format!(
        "{:>3}  {:<17} {:<12} {:>4}  object\n",
        "id", "phase", "support", "reps"
    );
    for t in tasks {
        let _ = writeln!(
            s,
            "{:>3}  {:<17} {:<12} {:>4}  {}",
            t.id,
            t.phase.as_str(),
            t.support.as_str(),
            t.reps,
            t.object
        );
    }
    s
}

pub fn screening_text(r: &ScreeningReport) -> String {
    let mut s = String::new();
    for c in &r.conditions {
        let holds: Vec<String> = c.hold_s.iter().map(|h| format!("{h:.2}")).collect();
        let _ = writeln!(
            s,
            "{:<18} holds [{}] s  {}",
            c.condition.key(),
            holds.join(", "),
            if c.passed { "pass" } else { "fail" }
        );
    }
    let _ = writeln!(s, "verdict: {}", r.verdict.as_str());
    s
}

pub fn session_line(log: &SessionLog, date: Option<&str>) -> String {
    format!(
        "session {:02}{}: active {:.1} min, last completed task {}, overflow {}, free training {:.1} min, safety events {}",
        log.session,
        date.map(|d| format!(" {d}")).unwrap_or_default(),
        log.active_s / 60.0,
        log.last_completed.map_or_else(|| "none".into(), |t| t.to_string()),
        if log.overflow { "yes" } else { "no" },
        log.free_training_s / 60.0,
        log.adjustments
    )
}
