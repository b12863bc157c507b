use std::io::Read;

use super::{parse_date, validate_return, Observation, ReturnPanel};
use crate::error::{Error, Result};

/// Layout of a `date,security_id,return` text file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PanelFormat {
    pub delimiter: u8,
}

impl Default for PanelFormat {
    fn default() -> Self {
        Self { delimiter: b',' }
    }
}

const COLUMNS: [&str; 3] = ["date", "security_id", "return"];

/// Reads a headed CSV of `date,security_id,return` rows.
///
/// Errors carry the 1-based line number of the offending row; the header is
/// line 1.
pub fn load_panel<R: Read>(source: R, format: PanelFormat) -> Result<ReturnPanel> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter)
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(source);

    let header = reader.headers().map_err(|e| csv_error(e, 1))?.clone();
    let names: Vec<&str> = header.iter().collect();
    if names != COLUMNS {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `date,security_id,return`, found `{}`", names.join(",")),
        });
    }

    let mut observations = Vec::new();
    let mut keys = std::collections::HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(e, 0))?;
        let line = record.position().map_or(0, |p| p.line());
        let parse = |message: String| Error::Parse { line, message };
        if record.len() != 3 {
            return Err(parse(format!("expected 3 fields, found {}", record.len())));
        }
        let date = parse_date(&record[0]).ok_or_else(|| parse(format!("invalid date `{}`", &record[0])))?;
        let security_id = record[1].to_string();
        if security_id.is_empty() {
            return Err(parse("empty security_id".into()));
        }
        let ret: f64 = record[2]
            .parse()
            .map_err(|_| parse(format!("invalid return `{}`", &record[2])))?;
        validate_return(ret).map_err(|m| parse(m.into()))?;
        if !keys.insert((date, security_id.clone())) {
            return Err(Error::DuplicateKey {
                date: date.to_string(),
                security: security_id,
            });
        }
        observations.push(Observation { date, security_id, ret });
    }
    ReturnPanel::from_observations(observations)
}

fn csv_error(e: csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line());
    match e.kind() {
        csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
        _ => Error::Parse {
            line,
            message: e.to_string(),
        },
    }
}
