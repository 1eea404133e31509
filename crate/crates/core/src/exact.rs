//! Exact big-rational arithmetic mode.
//!
//! Probabilities of empirical-measure events are polynomials in the entries
//! of `λ`, so with rational `λ` they are exact rationals. The functions in
//! the kernel and empirical modules that have an `_exact` twin use the types
//! here.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::finite_measures::{Alphabet, JointDist, JointJson};

/// Parses `"3/8"`, `"0.375"`, `"-2"`, `"1e-3"` or `"2.5E2"` exactly.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("{int_part}{frac_part}0").parse::<BigInt>().map_err(|_| bad())? / BigInt::from(10);
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut q = if scale >= 0 {
        BigRational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        q = -q;
    }
    Ok(q)
}

/// Nearest `f64` (via the ratio of the leading bits; exact for dyadic values).
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    let sign = if q.is_negative() { -1.0 } else { 1.0 };
    let n = q.numer().abs().to_biguint().unwrap();
    let d = q.denom().to_biguint().unwrap();
    sign * ratio_f64(&n, &d)
}

fn ratio_f64(n: &BigUint, d: &BigUint) -> f64 {
    let shift = 64 - (n.bits() as i64 - d.bits() as i64);
    let q = if shift >= 0 { (n << shift as usize) / d } else { n / (d << (-shift) as usize) };
    ldexp(q.to_f64().unwrap_or(f64::INFINITY), -shift)
}

fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

/// `ln q` for a positive rational, accurate to double precision even when
/// `q` is far outside the `f64` range.
pub fn rational_ln(q: &BigRational) -> f64 {
    if q.is_zero() {
        return f64::NEG_INFINITY;
    }
    let x = rational_to_f64(q);
    if x.is_normal() {
        return x.ln();
    }
    let n = q.numer().abs().to_biguint().unwrap();
    let d = q.denom().to_biguint().unwrap();
    let (nb, db) = (n.bits() as i64, d.bits() as i64);
    let shift = 64 - (nb - db);
    let scaled = if shift >= 0 { (n << shift as usize) / d } else { n / (d << (-shift) as usize) };
    scaled.to_f64().unwrap().ln() - shift as f64 * std::f64::consts::LN_2
}

/// `k!` for `k = 0..=n` as big integers.
pub fn factorials(n: usize) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = BigInt::one();
    out.push(acc.clone());
    for k in 1..=n {
        acc *= k;
        out.push(acc.clone());
    }
    out
}

/// Joint probability matrix with exact rational entries summing to exactly 1.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactJoint {
    rows: Alphabet,
    cols: Alphabet,
    weights: Vec<BigRational>,
}

impl ExactJoint {
    pub fn new(rows: Alphabet, cols: Alphabet, weights: Vec<BigRational>) -> Result<Self> {
        if weights.len() != rows.size() * cols.size() {
            return Err(Error::arg("exact joint matrix has the wrong number of entries"));
        }
        if weights.iter().any(Signed::is_negative) {
            return Err(Error::arg("exact joint matrix has a negative entry"));
        }
        let total: BigRational = weights.iter().cloned().sum();
        if !total.is_one() {
            return Err(Error::arg(format!("exact joint matrix sums to {total}, not 1")));
        }
        Ok(Self { rows, cols, weights })
    }

    /// Exact binary value of each `f64` entry, renormalized by the exact
    /// total so the result sums to exactly 1.
    pub fn from_joint(lambda: &JointDist) -> Self {
        use crate::finite_measures::FiniteMeasure;
        let w: Vec<BigRational> = lambda
            .weights()
            .iter()
            .map(|&x| BigRational::from_float(x).expect("finite weight"))
            .collect();
        let total: BigRational = w.iter().cloned().sum();
        Self {
            rows: lambda.rows().clone(),
            cols: lambda.cols().clone(),
            weights: w.into_iter().map(|x| x / &total).collect(),
        }
    }

    pub fn from_json(j: &JointJson) -> Result<Self> {
        let rows = Alphabet::new(j.rows.clone())?;
        let cols = Alphabet::new(j.cols.clone())?;
        if j.matrix.len() != rows.size() || j.matrix.iter().any(|r| r.len() != cols.size()) {
            return Err(Error::arg("matrix shape does not match the alphabets"));
        }
        let w = j
            .matrix
            .iter()
            .flatten()
            .map(|v| v.to_rational())
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows, cols, w)
    }

    pub fn rows(&self) -> &Alphabet {
        &self.rows
    }

    pub fn cols(&self) -> &Alphabet {
        &self.cols
    }

    pub fn nrows(&self) -> usize {
        self.rows.size()
    }

    pub fn ncols(&self) -> usize {
        self.cols.size()
    }

    pub fn get(&self, r: usize, s: usize) -> &BigRational {
        &self.weights[r * self.ncols() + s]
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn col_marginal(&self) -> Vec<BigRational> {
        (0..self.ncols())
            .map(|s| (0..self.nrows()).map(|r| self.get(r, s).clone()).sum())
            .collect()
    }

    /// `θ(s, r) = λ(r,s) / λ(R×{s})`, indexed `[s][r]`.
    pub fn theta(&self) -> Result<Vec<Vec<BigRational>>> {
        let col = self.col_marginal();
        (0..self.ncols())
            .map(|s| {
                if col[s].is_zero() {
                    return Err(Error::Precondition(format!(
                        "column {:?} has zero mass",
                        self.cols.label(s)
                    )));
                }
                Ok((0..self.nrows()).map(|r| self.get(r, s) / &col[s]).collect())
            })
            .collect()
    }

    pub fn to_joint(&self) -> JointDist {
        JointDist::from_raw(
            self.rows.clone(),
            self.cols.clone(),
            self.weights.iter().map(rational_to_f64).collect(),
        )
    }
}

/// Table `base^k` for `k = 0..=n`.
pub(crate) fn powers(base: &BigRational, n: usize) -> Vec<BigRational> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = BigRational::one();
    out.push(acc.clone());
    for _ in 0..n {
        acc *= base;
        out.push(acc.clone());
    }
    out
}
