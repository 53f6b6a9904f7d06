//! Exact rational scalars, vectors and dense matrices.
//!
//! Everything here works over `BigRational`, so rank and span decisions are
//! exact. Elimination is plain Gauss-Jordan with the largest-magnitude entry
//! of each column as pivot.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational number, always kept in lowest terms.
pub type Rational = BigRational;

/// A dense vector of rationals.
pub type RationalVector = Vec<Rational>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseRationalError {
    #[error("malformed rational literal {0:?}")]
    Malformed(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

/// Parses an integer, a finite decimal (optionally with an exponent) or a
/// `p/q` fraction into its exact value.
///
/// `"0.1"` becomes `1/10`; no binary floating point is involved.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let s = text.trim();
    let malformed = || ParseRationalError::Malformed(text.to_string());
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_decimal(num.trim()).ok_or_else(malformed)?;
        let den = parse_decimal(den.trim()).ok_or_else(malformed)?;
        if den.is_zero() {
            return Err(ParseRationalError::ZeroDenominator(text.to_string()));
        }
        return Ok(num / den);
    }
    parse_decimal(s).ok_or_else(malformed)
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(all_digits.parse::<BigInt>().ok()?);
    let scale = exponent - frac_part.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Some(if negative { -value } else { value })
}

/// Renders `p/q`, or just `p` for integers. Inverse of [`parse_rational`].
pub fn render(q: &Rational) -> String {
    q.to_string()
}

/// Renders a rational as a decimal string with `digits` fractional digits
/// (rounded half away from zero). Used only for human-facing output.
pub fn render_decimal(q: &Rational, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = (q * Rational::from_integer(scale.clone())).round().to_integer();
    let negative = scaled.is_negative();
    let (int, frac) = scaled.abs().div_rem(&scale);
    let sign = if negative { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{:0>width$}", frac.to_string(), width = digits)
    }
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int_vector(values: &[i64]) -> RationalVector {
    values.iter().map(|&v| int(v)).collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| {
        if x.is_zero() || y.is_zero() {
            acc
        } else {
            acc + x * y
        }
    })
}

pub fn sub(a: &[Rational], b: &[Rational]) -> RationalVector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[Rational], b: &[Rational]) -> RationalVector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[Rational], factor: &Rational) -> RationalVector {
    a.iter().map(|x| x * factor).collect()
}

pub fn is_zero_vector(a: &[Rational]) -> bool {
    a.iter().all(Zero::is_zero)
}

pub fn nonzero_count(a: &[Rational]) -> usize {
    a.iter().filter(|x| !x.is_zero()).count()
}

/// Scales `v` to the primitive integer vector on the same ray: denominators
/// cleared, entries coprime. The zero vector is returned unchanged.
pub fn primitive_integer_vector(v: &[Rational]) -> RationalVector {
    if is_zero_vector(v) {
        return v.to_vec();
    }
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &lcm).to_integer()).collect();
    let gcd = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    ints.into_iter().map(|x| Rational::from_integer(x / &gcd)).collect()
}

/// Dense rectangular matrix. The column count is stored so that a matrix
/// with zero rows still knows its width.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    rows: Vec<RationalVector>,
    ncols: usize,
}

impl RationalMatrix {
    pub fn new(ncols: usize) -> Self {
        Self {
            rows: Vec::new(),
            ncols,
        }
    }

    /// Builds a matrix from rows. Panics if the rows are ragged.
    pub fn from_rows(rows: Vec<RationalVector>, ncols: usize) -> Self {
        assert!(
            rows.iter().all(|r| r.len() == ncols),
            "all rows must have {ncols} columns"
        );
        Self { rows, ncols }
    }

    pub fn from_i64(rows: &[&[i64]], ncols: usize) -> Self {
        Self::from_rows(rows.iter().map(|r| int_vector(r)).collect(), ncols)
    }

    pub fn push_row(&mut self, row: RationalVector) {
        assert_eq!(row.len(), self.ncols, "row length mismatch");
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[RationalVector] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.rows[i]
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn mul_vec(&self, x: &[Rational]) -> RationalVector {
        self.rows.iter().map(|r| dot(r, x)).collect()
    }

    pub fn rank(&self) -> usize {
        rank_of_rows(&self.rows, self.ncols)
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(render).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// Reduced row echelon form of a list of rows.
struct Echelon {
    rows: Vec<RationalVector>,
    pivots: Vec<usize>,
}

fn reduced_row_echelon(input: &[RationalVector], ncols: usize) -> Echelon {
    let mut rows: Vec<RationalVector> = input.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(best) = (r..rows.len())
            .filter(|&i| !rows[i][col].is_zero())
            .max_by(|&i, &j| rows[i][col].abs().cmp(&rows[j][col].abs()).then(j.cmp(&i)))
        else {
            continue;
        };
        rows.swap(r, best);
        let inv = rows[r][col].recip();
        for x in rows[r].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &factor * p;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    Echelon { rows, pivots }
}

fn rank_of_rows(rows: &[RationalVector], ncols: usize) -> usize {
    reduced_row_echelon(rows, ncols).pivots.len()
}

/// Exact rank. An empty matrix has rank 0.
pub fn rank(m: &RationalMatrix) -> usize {
    m.rank()
}

/// Basis of the orthogonal complement of `span(vectors)` in `R^n`.
///
/// Returns `n - rank(vectors)` vectors, each a primitive integer vector with
/// exact zero dot product against every input.
pub fn orthogonal_complement_basis(vectors: &[RationalVector], n: usize) -> Vec<RationalVector> {
    let ech = reduced_row_echelon(vectors, n);
    let mut is_pivot = vec![false; n];
    for &p in &ech.pivots {
        is_pivot[p] = true;
    }
    (0..n)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = vec![Rational::zero(); n];
            v[free] = Rational::one();
            for (row, &p) in ech.rows.iter().zip(&ech.pivots) {
                v[p] = -row[free].clone();
            }
            primitive_integer_vector(&v)
        })
        .collect()
}

/// True iff `d` lies in the linear span of `rows`.
pub fn is_in_span(d: &[Rational], rows: &[RationalVector]) -> bool {
    if is_zero_vector(d) {
        return true;
    }
    let n = d.len();
    let base = rank_of_rows(rows, n);
    let mut extended = rows.to_vec();
    extended.push(d.to_vec());
    rank_of_rows(&extended, n) == base
}

/// Dimension of the affine hull of `points`; `-1` for the empty set.
pub fn affine_rank(points: &[RationalVector]) -> isize {
    let Some(first) = points.first() else {
        return -1;
    };
    let diffs: Vec<RationalVector> = points[1..].iter().map(|p| sub(p, first)).collect();
    rank_of_rows(&diffs, first.len()) as isize
}
