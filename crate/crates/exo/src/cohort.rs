//! Long-format cohort CSV:
//! `subject_id,group,measure,subscale,phase,score`, one score per row.

use std::io::Read;
use std::path::Path;

use exo_core::intent::ControlGroup;
use exo_core::outcomes::{CohortBuilder, Phase, ScoreField, SubjectOutcomes};

use crate::error::{CliError, Result};

pub const COLUMNS: [&str; 6] = [
    "subject_id",
    "group",
    "measure",
    "subscale",
    "phase",
    "score",
];

pub fn read_cohort(path: &Path) -> Result<Vec<SubjectOutcomes>> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    parse_cohort(file).map_err(|e| match e {
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_cohort(input: impl Read) -> Result<Vec<SubjectOutcomes>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(input);
    let headers = rdr.headers().map_err(CliError::data)?.clone();
    if headers.iter().ne(COLUMNS) {
        return Err(CliError::Data(format!(
            "line 1: expected header `{}`",
            COLUMNS.join(",")
        )));
    }
    let mut builder = CohortBuilder::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Data(format!("line {line}: {e}"))
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |msg: String| CliError::Data(format!("line {line}: {msg}"));
        if rec.len() != COLUMNS.len() {
            return Err(bad(format!(
                "expected {} fields, found {}",
                COLUMNS.len(),
                rec.len()
            )));
        }
        let group = ControlGroup::parse(&rec[1])
            .ok_or_else(|| bad(format!("unknown group `{}`", &rec[1])))?;
        let field = ScoreField::parse(&rec[2], &rec[3]).ok_or_else(|| {
            bad(format!(
                "unknown measure/subscale `{}`/`{}`",
                &rec[2], &rec[3]
            ))
        })?;
        let phase =
            Phase::parse(&rec[4]).ok_or_else(|| bad(format!("unknown phase `{}`", &rec[4])))?;
        let score: u32 = rec[5]
            .parse()
            .map_err(|_| bad(format!("score `{}` is not a non-negative integer", &rec[5])))?;
        if rec[0].is_empty() {
            return Err(bad("empty subject_id".into()));
        }
        builder
            .add(&rec[0], group, field, phase, score)
            .map_err(|e| bad(e.to_string()))?;
    }
    builder.finish().map_err(CliError::data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn malformed_score_cites_line() {
        let csv = "subject_id,group,measure,subscale,phase,score\nA,EMG,BBT,,baseline,3\nA,EMG,BBT,,post_unassisted,x\n";
        let err = parse_cohort(csv.as_bytes()).unwrap_err().to_string();
        assert!(err.starts_with("line 3:"), "{err}");
    }

    #[test]
    fn wrong_header() {
        let err = parse_cohort("a,b\n".as_bytes()).unwrap_err().to_string();
        assert!(err.starts_with("line 1:"), "{err}");
    }

    #[test]
    fn short_row_cites_line() {
        let csv = "subject_id,group,measure,subscale,phase,score\nA,EMG,BBT\n";
        let err = parse_cohort(csv.as_bytes()).unwrap_err().to_string();
        assert!(err.starts_with("line 2:"), "{err}");
    }
}
