//! Free-format MPS reader and writer.
//!
//! Grammar accepted (one record per line, fields separated by whitespace,
//! lines starting with `*` are comments):
//!
//! ```text
//! NAME      [name]
//! OBJSENSE  [MAX|MIN]          sense on the same or the next line
//! ROWS      N|L|G|E rowname    exactly one N row
//! COLUMNS   col row value [row value]
//!           name 'MARKER' 'INTORG' | 'INTEND'
//! RHS       [set] row value [row value]
//! RANGES    [set] row value [row value]
//! BOUNDS    type [set] col [value]     UP LO FX FR MI PL BV LI UI
//! ENDATA
//! ```
//!
//! Numbers are read exactly (`0.1` is `1/10`); `p/q` literals are accepted
//! too. Columns have lower bound 0 and no upper bound unless BOUNDS says
//! otherwise. The objective is minimized unless `OBJSENSE MAX` is given;
//! since [`MipInstance`] always maximizes, a minimization objective is
//! stored negated. `G` and `E` rows, and ranged rows, become one or two
//! `<=` rows in ROWS order. Any other section is an error.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::linalg::{int, parse_rational, Rational, RationalMatrix, RationalVector};
use crate::model::MipInstance;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct MpsError {
    pub line: usize,
    pub kind: MpsErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MpsErrorKind {
    #[error("unsupported section: {0}")]
    UnsupportedSection(String),
    #[error("unsupported {what}: {value}")]
    Unsupported { what: &'static str, value: String },
    #[error("record outside of any section")]
    NoSection,
    #[error("malformed record: {0}")]
    Malformed(String),
    #[error("bad number {0:?}")]
    Number(String),
    #[error("unknown row {0}")]
    UnknownRow(String),
    #[error("unknown column {0}")]
    UnknownColumn(String),
    #[error("duplicate row {0}")]
    DuplicateRow(String),
    #[error("more than one objective row")]
    MultipleObjectives,
    #[error("no objective row")]
    NoObjective,
    #[error("right-hand side on the objective row")]
    ObjectiveConstant,
    #[error("missing ENDATA")]
    MissingEnd,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Name,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum RowType {
    N,
    L,
    G,
    E,
}

struct Row {
    kind: RowType,
    coefficients: HashMap<usize, Rational>,
    rhs: Rational,
    range: Option<Rational>,
}

/// Parses an MPS model from text.
pub fn parse_mps(text: &str) -> Result<MipInstance, MpsError> {
    let mut name = String::new();
    let mut maximize = false;
    let mut section = None;
    let mut rows: Vec<Row> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut objective_row: Option<usize> = None;
    let mut columns: Vec<String> = Vec::new();
    let mut column_index: HashMap<String, usize> = HashMap::new();
    let mut objective: HashMap<usize, Rational> = HashMap::new();
    let mut integer = Vec::new();
    let mut lower: Vec<Option<Rational>> = Vec::new();
    let mut upper: Vec<Option<Rational>> = Vec::new();
    let mut in_integer_block = false;
    let mut ended = false;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |kind| MpsError { line, kind };
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        let number = |s: &str| parse_rational(s).map_err(|_| err(MpsErrorKind::Number(s.to_string())));

        if !raw.starts_with([' ', '\t']) {
            let header = fields[0].to_ascii_uppercase();
            section = Some(match header.as_str() {
                "NAME" => {
                    name = fields.get(1..).map(|f| f.join(" ")).unwrap_or_default();
                    Section::Name
                }
                "OBJSENSE" => {
                    if let Some(s) = fields.get(1) {
                        maximize = parse_sense(s).ok_or_else(|| err(MpsErrorKind::Malformed(raw.to_string())))?;
                    }
                    Section::ObjSense
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => {
                    ended = true;
                    break;
                }
                _ => return Err(err(MpsErrorKind::UnsupportedSection(header))),
            });
            continue;
        }

        match section.ok_or_else(|| err(MpsErrorKind::NoSection))? {
            Section::Name => return Err(err(MpsErrorKind::Malformed(raw.to_string()))),
            Section::ObjSense => {
                maximize = parse_sense(fields[0]).ok_or_else(|| err(MpsErrorKind::Malformed(raw.to_string())))?;
            }
            Section::Rows => {
                let [kind, row_name] = fields[..] else {
                    return Err(err(MpsErrorKind::Malformed(raw.to_string())));
                };
                let kind = match kind.to_ascii_uppercase().as_str() {
                    "N" => RowType::N,
                    "L" => RowType::L,
                    "G" => RowType::G,
                    "E" => RowType::E,
                    other => {
                        return Err(err(MpsErrorKind::Unsupported {
                            what: "row type",
                            value: other.to_string(),
                        }))
                    }
                };
                if row_index.contains_key(row_name) {
                    return Err(err(MpsErrorKind::DuplicateRow(row_name.to_string())));
                }
                if kind == RowType::N {
                    if objective_row.is_some() {
                        return Err(err(MpsErrorKind::MultipleObjectives));
                    }
                    objective_row = Some(rows.len());
                }
                row_index.insert(row_name.to_string(), rows.len());
                rows.push(Row {
                    kind,
                    coefficients: HashMap::new(),
                    rhs: Rational::zero(),
                    range: None,
                });
            }
            Section::Columns => {
                if fields.len() == 3 && fields[1].trim_matches('\'').eq_ignore_ascii_case("MARKER") {
                    match fields[2].trim_matches('\'').to_ascii_uppercase().as_str() {
                        "INTORG" => in_integer_block = true,
                        "INTEND" => in_integer_block = false,
                        other => {
                            return Err(err(MpsErrorKind::Unsupported {
                                what: "marker",
                                value: other.to_string(),
                            }))
                        }
                    }
                    continue;
                }
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(err(MpsErrorKind::Malformed(raw.to_string())));
                }
                let col = match column_index.get(fields[0]) {
                    Some(&j) => j,
                    None => {
                        let j = columns.len();
                        column_index.insert(fields[0].to_string(), j);
                        columns.push(fields[0].to_string());
                        lower.push(Some(Rational::zero()));
                        upper.push(None);
                        if in_integer_block {
                            integer.push(j);
                        }
                        j
                    }
                };
                for pair in fields[1..].chunks(2) {
                    let r = *row_index
                        .get(pair[0])
                        .ok_or_else(|| err(MpsErrorKind::UnknownRow(pair[0].to_string())))?;
                    let v = number(pair[1])?;
                    if Some(r) == objective_row {
                        objective.insert(col, v);
                    } else {
                        rows[r].coefficients.insert(col, v);
                    }
                }
            }
            Section::Rhs | Section::Ranges => {
                let pairs = if fields.len() % 2 == 1 {
                    &fields[1..]
                } else {
                    &fields[..]
                };
                if pairs.is_empty() {
                    return Err(err(MpsErrorKind::Malformed(raw.to_string())));
                }
                for pair in pairs.chunks(2) {
                    let r = *row_index
                        .get(pair[0])
                        .ok_or_else(|| err(MpsErrorKind::UnknownRow(pair[0].to_string())))?;
                    let v = number(pair[1])?;
                    if Some(r) == objective_row {
                        if v.is_zero() {
                            continue;
                        }
                        return Err(err(if section == Some(Section::Rhs) {
                            MpsErrorKind::ObjectiveConstant
                        } else {
                            MpsErrorKind::Malformed(raw.to_string())
                        }));
                    }
                    if section == Some(Section::Rhs) {
                        rows[r].rhs = v;
                    } else {
                        rows[r].range = Some(v);
                    }
                }
            }
            Section::Bounds => {
                let kind = fields[0].to_ascii_uppercase();
                let takes_value = !matches!(kind.as_str(), "FR" | "MI" | "PL" | "BV");
                let (col, value) = match (fields.len(), takes_value) {
                    (4, true) => (fields[2], Some(fields[3])),
                    (3, true) => (fields[1], Some(fields[2])),
                    (3, false) => (fields[2], None),
                    (2, false) => (fields[1], None),
                    (4, false) if kind == "BV" => (fields[2], None),
                    _ => return Err(err(MpsErrorKind::Malformed(raw.to_string()))),
                };
                let j = *column_index
                    .get(col)
                    .ok_or_else(|| err(MpsErrorKind::UnknownColumn(col.to_string())))?;
                let value = value.map(number).transpose()?;
                match kind.as_str() {
                    "UP" => upper[j] = value,
                    "LO" => lower[j] = value,
                    "FX" => {
                        lower[j] = value.clone();
                        upper[j] = value;
                    }
                    "FR" => {
                        lower[j] = None;
                        upper[j] = None;
                    }
                    "MI" => lower[j] = None,
                    "PL" => upper[j] = None,
                    "BV" => {
                        lower[j] = Some(int(0));
                        upper[j] = Some(int(1));
                        integer.push(j);
                    }
                    "LI" => {
                        lower[j] = value;
                        integer.push(j);
                    }
                    "UI" => {
                        upper[j] = value;
                        integer.push(j);
                    }
                    other => {
                        return Err(err(MpsErrorKind::Unsupported {
                            what: "bound type",
                            value: other.to_string(),
                        }))
                    }
                }
            }
        }
    }
    let last = text.lines().count();
    if !ended {
        return Err(MpsError {
            line: last,
            kind: MpsErrorKind::MissingEnd,
        });
    }
    if objective_row.is_none() {
        return Err(MpsError {
            line: last,
            kind: MpsErrorKind::NoObjective,
        });
    }

    let n = columns.len();
    let dense = |coefficients: &HashMap<usize, Rational>| -> RationalVector {
        (0..n)
            .map(|j| coefficients.get(&j).cloned().unwrap_or_else(Rational::zero))
            .collect()
    };
    let mut matrix = RationalMatrix::new(n);
    let mut rhs = Vec::new();
    let mut push = |row: RationalVector, b: Rational, negate: bool| {
        if negate {
            matrix.push_row(row.into_iter().map(|v| -v).collect());
            rhs.push(-b);
        } else {
            matrix.push_row(row);
            rhs.push(b);
        }
    };
    for row in &rows {
        let a = dense(&row.coefficients);
        let b = row.rhs.clone();
        // (lower, upper) bounds on a^T x
        let (lo, hi) = match (row.kind, &row.range) {
            (RowType::N, _) => continue,
            (RowType::L, None) => (None, Some(b)),
            (RowType::G, None) => (Some(b), None),
            (RowType::E, None) => (Some(b.clone()), Some(b)),
            (RowType::L, Some(r)) => (Some(&b - r.abs()), Some(b)),
            (RowType::G, Some(r)) => (Some(b.clone()), Some(&b + r.abs())),
            (RowType::E, Some(r)) if r.is_negative() => (Some(&b + r), Some(b)),
            (RowType::E, Some(r)) => (Some(b.clone()), Some(&b + r)),
        };
        if let Some(hi) = hi {
            push(a.clone(), hi, false);
        }
        if let Some(lo) = lo {
            push(a, lo, true);
        }
    }
    let mut c = dense(&objective);
    if !maximize {
        c = c.into_iter().map(|v| -v).collect();
    }
    let mut inst = MipInstance::new(name, matrix, rhs, c).with_integers(integer);
    inst.lower_bounds = lower;
    inst.upper_bounds = upper;
    Ok(inst)
}

fn parse_sense(s: &str) -> Option<bool> {
    match s.to_ascii_uppercase().as_str() {
        "MAX" | "MAXIMIZE" => Some(true),
        "MIN" | "MINIMIZE" => Some(false),
        _ => None,
    }
}

/// Exact text for a number: a terminating decimal when one exists,
/// otherwise `p/q`.
fn number_text(q: &Rational) -> String {
    let mut den = q.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let mut twos = 0usize;
    let mut fives = 0usize;
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return q.to_string();
    }
    crate::linalg::render_decimal(q, twos.max(fives))
}

/// Writes an instance as `OBJSENSE MAX` MPS with generated names
/// `R0, R1, ...` and `C0, C1, ...`. [`parse_mps`] reads it back to an
/// identical instance.
pub fn write_mps(inst: &MipInstance) -> String {
    let n = inst.num_vars;
    let mut out = String::new();
    let name = if inst.name.is_empty() { "UNNAMED" } else { &inst.name };
    let _ = writeln!(out, "NAME          {name}");
    out.push_str("OBJSENSE\n    MAX\nROWS\n N  OBJ\n");
    for i in 0..inst.num_rows() {
        let _ = writeln!(out, " L  R{i}");
    }
    out.push_str("COLUMNS\n");
    let mut in_integer_block = false;
    let mut markers = 0;
    for j in 0..n {
        let is_int = inst.is_integer_var(j);
        if is_int != in_integer_block {
            let tag = if is_int { "INTORG" } else { "INTEND" };
            let _ = writeln!(out, "    MARKER{markers}  'MARKER'  '{tag}'");
            markers += 1;
            in_integer_block = is_int;
        }
        let _ = writeln!(out, "    C{j}  OBJ  {}", number_text(&inst.objective[j]));
        for (i, row) in inst.constraint_matrix.rows().iter().enumerate() {
            if !row[j].is_zero() {
                let _ = writeln!(out, "    C{j}  R{i}  {}", number_text(&row[j]));
            }
        }
    }
    if in_integer_block {
        let _ = writeln!(out, "    MARKER{markers}  'MARKER'  'INTEND'");
    }
    out.push_str("RHS\n");
    for (i, b) in inst.rhs.iter().enumerate() {
        if !b.is_zero() {
            let _ = writeln!(out, "    RHS  R{i}  {}", number_text(b));
        }
    }
    out.push_str("BOUNDS\n");
    for j in 0..n {
        match (&inst.lower_bounds[j], &inst.upper_bounds[j]) {
            (Some(l), Some(u)) if l == u => {
                let _ = writeln!(out, " FX BND  C{j}  {}", number_text(l));
                continue;
            }
            (None, None) => {
                let _ = writeln!(out, " FR BND  C{j}");
                continue;
            }
            (None, _) => {
                let _ = writeln!(out, " MI BND  C{j}");
            }
            (Some(l), _) if !l.is_zero() => {
                let _ = writeln!(out, " LO BND  C{j}  {}", number_text(l));
            }
            _ => {}
        }
        if let Some(u) = &inst.upper_bounds[j] {
            let _ = writeln!(out, " UP BND  C{j}  {}", number_text(u));
        }
    }
    out.push_str("ENDATA\n");
    out
}
