//! Cut files: one comma-separated record per line,
//!
//! ```text
//! # label, a_1, ..., a_n, <= beta [, class]
//! c1, 1, 1, <= 2
//! c2, 1/2, 0, ≤ 0.75, gomory
//! ```
//!
//! `≤` and `<=` are interchangeable. Numbers are exact decimals or `p/q`.
//! Blank lines and text after `#` are ignored. Records are dense: every
//! record lists all `n` coefficients.

use std::fmt::Write as _;

use thiserror::Error;

use crate::linalg::{parse_rational, render, ParseRationalError};
use crate::model::{normalize_cut, Inequality};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CutFileError {
    #[error("line {line}: expected {expected} coefficients, found {found}")]
    CoefficientCount { line: usize, expected: usize, found: usize },
    #[error("line {line}: {source}")]
    Number { line: usize, source: ParseRationalError },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

/// Reads cuts for an `n`-variable instance, normalized to max-norm 1.
pub fn read_cuts(text: &str, n: usize) -> Result<Vec<Inequality>, CutFileError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let malformed = |message: &str| CutFileError::Malformed {
            line,
            message: message.to_string(),
        };
        let fields: Vec<&str> = content.split(',').map(str::trim).collect();
        let label = fields[0];
        if label.is_empty() {
            return Err(malformed("empty label"));
        }
        let sense = fields
            .iter()
            .position(|f| f.starts_with('≤') || f.starts_with("<="))
            .ok_or_else(|| malformed("missing '<=' field"))?;
        let coefficient_fields = &fields[1..sense];
        if coefficient_fields.len() != n {
            return Err(CutFileError::CoefficientCount {
                line,
                expected: n,
                found: coefficient_fields.len(),
            });
        }
        let number = |s: &str| parse_rational(s).map_err(|source| CutFileError::Number { line, source });
        let coefficients = coefficient_fields
            .iter()
            .map(|s| number(s))
            .collect::<Result<Vec<_>, _>>()?;
        let rhs_text = fields[sense].trim_start_matches('≤').trim_start_matches("<=");
        let rhs = number(rhs_text)?;
        let mut cut = Inequality::new(label, coefficients, rhs);
        match &fields[sense + 1..] {
            [] => {}
            [class] if !class.is_empty() => cut = cut.with_class(*class),
            _ => return Err(malformed("unexpected fields after the class tag")),
        }
        out.push(normalize_cut(&cut));
    }
    Ok(out)
}

/// Writes cuts in the format [`read_cuts`] accepts.
pub fn write_cuts(cuts: &[Inequality]) -> String {
    let mut out = String::new();
    for cut in cuts {
        out.push_str(&cut.label);
        for c in &cut.coefficients {
            let _ = write!(out, ", {}", render(c));
        }
        let _ = write!(out, ", <= {}", render(&cut.rhs));
        if let Some(class) = &cut.class {
            let _ = write!(out, ", {class}");
        }
        out.push('\n');
    }
    out
}
