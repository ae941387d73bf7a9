//! Session plan text format:
//!
//! ```text
//! schema exo.session_plan 1
//! sessions_per_week 3
//! weeks 4
//! budget_s 1800
//! tasks 23
//! session 1 2024-01-08
//! session 2 2024-01-10
//! ```
//!
//! `budget_s` and `tasks` are optional. `tasks n` keeps the first `n`
//! protocol tasks.

use chrono::{Days, NaiveDate};
use exo_core::protocol::{
    build_protocol, ProgramPlan, SessionPlan, SESSIONS_PER_WEEK, SESSION_BUDGET_S, WEEKS,
};

use crate::error::{CliError, Result};

pub const PLAN_SCHEMA: &str = "exo.session_plan";

/// Day offsets within a week for the three weekly sessions.
const WEEKDAY_OFFSETS: [u64; 3] = [0, 2, 4];

pub fn schedule_dates(start: NaiveDate) -> Vec<NaiveDate> {
    (0..WEEKS as u64)
        .flat_map(|w| WEEKDAY_OFFSETS.map(move |d| w * 7 + d))
        .map(|off| {
            start
                .checked_add_days(Days::new(off))
                .expect("date in range")
        })
        .collect()
}

pub fn standard_plan(start: Option<NaiveDate>) -> ProgramPlan {
    let dates: Option<Vec<String>> =
        start.map(|s| schedule_dates(s).iter().map(|d| d.to_string()).collect());
    ProgramPlan::standard(dates.as_deref()).expect("twelve dates")
}

pub fn format_plan(plan: &ProgramPlan) -> String {
    let mut s = format!(
        "schema {PLAN_SCHEMA} 1\nsessions_per_week {}\nweeks {}\n",
        plan.sessions_per_week, plan.weeks
    );
    if let Some(first) = plan.sessions.first() {
        s.push_str(&format!(
            "budget_s {}\ntasks {}\n",
            first.budget_s,
            first.tasks.len()
        ));
    }
    for sp in &plan.sessions {
        match &sp.date {
            Some(d) => s.push_str(&format!("session {} {d}\n", sp.index)),
            None => s.push_str(&format!("session {}\n", sp.index)),
        }
    }
    s
}

pub fn parse_plan(text: &str) -> Result<ProgramPlan> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let bad = |line: usize, msg: &str| CliError::Data(format!("plan line {line}: {msg}"));
    match lines.next() {
        Some((_, l)) if l == format!("schema {PLAN_SCHEMA} 1") => {}
        Some((n, _)) => return Err(bad(n, "expected `schema exo.session_plan 1`")),
        None => return Err(CliError::Data("plan is empty".into())),
    }
    let (mut per_week, mut weeks) = (SESSIONS_PER_WEEK, WEEKS);
    let mut budget = SESSION_BUDGET_S;
    let protocol = build_protocol();
    let mut n_tasks = protocol.len();
    let mut sessions: Vec<(u8, Option<String>)> = Vec::new();
    for (n, line) in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(n, "expected a number"));
        match parts.as_slice() {
            ["sessions_per_week", v] => per_week = num(v)? as u8,
            ["weeks", v] => weeks = num(v)? as u8,
            ["budget_s", v] => budget = num(v)?,
            ["tasks", v] => {
                n_tasks = v.parse().map_err(|_| bad(n, "expected a task count"))?;
                if n_tasks > protocol.len() {
                    return Err(bad(n, "more tasks than the protocol has"));
                }
            }
            ["session", idx, rest @ ..] if rest.len() <= 1 => {
                let idx: u8 = idx.parse().map_err(|_| bad(n, "bad session index"))?;
                let date = match rest {
                    [d] => {
                        NaiveDate::parse_from_str(d, "%Y-%m-%d")
                            .map_err(|_| bad(n, "date must be YYYY-MM-DD"))?;
                        Some(d.to_string())
                    }
                    _ => None,
                };
                sessions.push((idx, date));
            }
            _ => return Err(bad(n, "unrecognised line")),
        }
    }
    let plan = ProgramPlan {
        sessions_per_week: per_week,
        weeks,
        sessions: sessions
            .into_iter()
            .map(|(index, date)| SessionPlan {
                index,
                date,
                tasks: protocol[..n_tasks].to_vec(),
                budget_s: budget,
            })
            .collect(),
    };
    plan.validate().map_err(CliError::data)?;
    Ok(plan)
}
