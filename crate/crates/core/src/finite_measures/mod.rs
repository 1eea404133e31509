//! Probability measures on finite alphabets.
//!
//! Everything here is immutable after construction. Weights are `f64`; the
//! exact big-rational counterparts live in [`crate::exact`].

mod json;
pub mod logspace;

use std::fmt;
use std::sync::Arc;

pub use json::{DistJson, JointJson, WeightValue};
pub use logspace::{log_add, log_sum, LogAccumulator, LogFactorials};

use crate::error::{Error, Result};

/// Tolerance on `|Σ weights - 1|` accepted by the constructors.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Ordered set of distinct symbol labels.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    labels: Arc<[String]>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::arg("alphabet must have at least one symbol"));
        }
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(Error::arg(format!("duplicate alphabet label {a:?}")));
            }
        }
        Ok(Self { labels: labels.into() })
    }

    /// Labels `prefix1, prefix2, …, prefix{k}`.
    pub fn numbered(prefix: &str, k: usize) -> Self {
        assert!(k >= 1, "alphabet size must be positive");
        Self {
            labels: (1..=k).map(|i| format!("{prefix}{i}")).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.labels.iter()).finish()
    }
}

/// Shared access to the weight vector of a finite measure, for the
/// operations that work identically on `Dist` and `JointDist`.
pub trait FiniteMeasure {
    fn weights(&self) -> &[f64];
    fn same_space(&self, other: &Self) -> bool;
    /// Number of atoms of the underlying space.
    fn cardinality(&self) -> usize {
        self.weights().len()
    }
}

fn validate_weights(mut weights: Vec<f64>, what: impl Fn() -> String) -> Result<Vec<f64>> {
    for (i, w) in weights.iter().enumerate() {
        if !w.is_finite() || *w < 0.0 {
            return Err(Error::arg(format!("{}: weight {i} is {w}, expected a finite nonnegative number", what())));
        }
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::arg(format!("{}: weights sum to {sum}, not 1", what())));
    }
    if sum != 1.0 {
        weights.iter_mut().for_each(|w| *w /= sum);
    }
    Ok(weights)
}

/// Probability vector on an alphabet.
#[derive(Clone, PartialEq)]
pub struct Dist {
    alphabet: Alphabet,
    weights: Vec<f64>,
}

impl Dist {
    pub fn new(alphabet: Alphabet, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != alphabet.size() {
            return Err(Error::arg(format!(
                "distribution has {} weights for an alphabet of size {}",
                weights.len(),
                alphabet.size()
            )));
        }
        let weights = validate_weights(weights, || "distribution".to_string())?;
        Ok(Self { alphabet, weights })
    }

    /// Normalizes nonnegative weights with a positive total.
    pub fn from_unnormalized(alphabet: Alphabet, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::arg("weights must be nonnegative with positive total"));
        }
        Self::new(alphabet, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let k = alphabet.size();
        Self { alphabet, weights: vec![1.0 / k as f64; k] }
    }

    pub fn point_mass(alphabet: Alphabet, at: usize) -> Self {
        let mut weights = vec![0.0; alphabet.size()];
        weights[at] = 1.0;
        Self { alphabet, weights }
    }

    /// The distribution `counts / n`.
    pub fn from_counts(alphabet: Alphabet, counts: &[u32]) -> Result<Self> {
        let n: u64 = counts.iter().map(|&c| c as u64).sum();
        if n == 0 {
            return Err(Error::arg("counts must have a positive total"));
        }
        if counts.len() != alphabet.size() {
            return Err(Error::arg("count vector does not match the alphabet"));
        }
        Ok(Self {
            alphabet,
            weights: counts.iter().map(|&c| c as f64 / n as f64).collect(),
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.weights.iter().enumerate().filter(|(_, w)| **w > 0.0).map(|(i, _)| i)
    }

    /// Product measure `self ⊗ other` on `self.alphabet × other.alphabet`.
    pub fn product(&self, other: &Dist) -> JointDist {
        let weights = self
            .weights
            .iter()
            .flat_map(|a| other.weights.iter().map(move |b| a * b))
            .collect();
        JointDist {
            rows: self.alphabet.clone(),
            cols: other.alphabet.clone(),
            weights,
        }
    }
}

impl FiniteMeasure for Dist {
    fn weights(&self) -> &[f64] {
        &self.weights
    }
    fn same_space(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet
    }
}

impl fmt::Debug for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dist{:?}", self.weights)
    }
}

/// Probability matrix on `R × S`, stored row-major (`r * #S + s`).
#[derive(Clone, PartialEq)]
pub struct JointDist {
    rows: Alphabet,
    cols: Alphabet,
    weights: Vec<f64>,
}

impl JointDist {
    pub fn new(rows: Alphabet, cols: Alphabet, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != rows.size() * cols.size() {
            return Err(Error::arg(format!(
                "joint matrix has {} entries, expected {}x{}",
                weights.len(),
                rows.size(),
                cols.size()
            )));
        }
        let ncols = cols.size();
        let row_sums = |w: &[f64]| -> String {
            rows.labels()
                .iter()
                .enumerate()
                .map(|(r, l)| format!("row {l:?} sums to {}", w[r * ncols..(r + 1) * ncols].iter().sum::<f64>()))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let described = weights.clone();
        let weights = validate_weights(weights, || format!("joint matrix ({})", row_sums(&described)))?;
        Ok(Self { rows, cols, weights })
    }

    /// Builds from a nested matrix `matrix[r][s]`.
    pub fn from_matrix(rows: Alphabet, cols: Alphabet, matrix: &[Vec<f64>]) -> Result<Self> {
        if matrix.len() != rows.size() {
            return Err(Error::arg(format!(
                "matrix has {} rows, alphabet has {}",
                matrix.len(),
                rows.size()
            )));
        }
        for (r, row) in matrix.iter().enumerate() {
            if row.len() != cols.size() {
                return Err(Error::arg(format!(
                    "row {:?} has {} entries, expected {}",
                    rows.label(r),
                    row.len(),
                    cols.size()
                )));
            }
        }
        Self::new(rows, cols, matrix.concat())
    }

    /// Square-matrix convenience with labels `r1..`, `s1..`.
    pub fn from_rows(matrix: &[Vec<f64>]) -> Result<Self> {
        let nr = matrix.len();
        let ns = matrix.first().map_or(0, Vec::len);
        if nr == 0 || ns == 0 {
            return Err(Error::arg("empty matrix"));
        }
        Self::from_matrix(Alphabet::numbered("r", nr), Alphabet::numbered("s", ns), matrix)
    }

    pub fn point_mass(rows: Alphabet, cols: Alphabet, r: usize, s: usize) -> Self {
        let mut weights = vec![0.0; rows.size() * cols.size()];
        weights[r * cols.size() + s] = 1.0;
        Self { rows, cols, weights }
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

    /// `M = #R · #S`.
    pub fn m(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    pub fn get(&self, r: usize, s: usize) -> f64 {
        self.weights[r * self.cols.size() + s]
    }

    pub fn row_marginal(&self) -> Dist {
        let ns = self.ncols();
        let w = (0..self.nrows())
            .map(|r| self.weights[r * ns..(r + 1) * ns].iter().sum())
            .collect();
        Dist { alphabet: self.rows.clone(), weights: w }
    }

    pub fn col_marginal(&self) -> Dist {
        let ns = self.ncols();
        let w = (0..ns)
            .map(|s| (0..self.nrows()).map(|r| self.weights[r * ns + s]).sum())
            .collect();
        Dist { alphabet: self.cols.clone(), weights: w }
    }

    /// `λ(R × {s}) > 0` for every `s`.
    pub fn check_column_support(&self) -> Result<()> {
        let cm = self.col_marginal();
        for s in 0..self.ncols() {
            if !(cm.get(s) > 0.0) {
                return Err(Error::Precondition(format!(
                    "column {:?} has zero mass: λ(R×{{{}}}) = 0",
                    self.cols.label(s),
                    self.cols.label(s)
                )));
            }
        }
        Ok(())
    }

    /// `true` when `self(x) = 0` wherever `other(x) = 0`.
    pub fn absolutely_continuous_wrt(&self, other: &JointDist) -> bool {
        self.weights
            .iter()
            .zip(&other.weights)
            .all(|(a, b)| *a == 0.0 || *b > 0.0)
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        self.weights.chunks(self.ncols()).map(<[f64]>::to_vec).collect()
    }

    /// Wraps weights produced internally (already a probability matrix up to
    /// rounding); renormalizes without the strict constructor check.
    pub(crate) fn from_raw(rows: Alphabet, cols: Alphabet, mut weights: Vec<f64>) -> Self {
        let sum: f64 = weights.iter().sum();
        if sum > 0.0 && sum != 1.0 {
            weights.iter_mut().for_each(|w| *w /= sum);
        }
        Self { rows, cols, weights }
    }
}

impl FiniteMeasure for JointDist {
    fn weights(&self) -> &[f64] {
        &self.weights
    }
    fn same_space(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }
}

impl fmt::Debug for JointDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "JointDist{:?}", self.matrix())
    }
}

/// Markov kernel from `S` to `R`: one distribution over `R` per source symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    source: Alphabet,
    target: Alphabet,
    rows: Vec<Dist>,
}

impl Kernel {
    pub fn new(source: Alphabet, target: Alphabet, rows: Vec<Dist>) -> Result<Self> {
        if rows.len() != source.size() {
            return Err(Error::arg("kernel needs one row per source symbol"));
        }
        if rows.iter().any(|d| d.alphabet() != &target) {
            return Err(Error::arg("kernel rows must live on the target alphabet"));
        }
        Ok(Self { source, target, rows })
    }

    pub fn source(&self) -> &Alphabet {
        &self.source
    }

    pub fn target(&self) -> &Alphabet {
        &self.target
    }

    pub fn row(&self, s: usize) -> &Dist {
        &self.rows[s]
    }

    /// `θ(s, {r})`.
    #[inline]
    pub fn prob(&self, s: usize, r: usize) -> f64 {
        self.rows[s].get(r)
    }

    /// Reassembles `ξ(r,s) = σ(s) · θ(s,r)`.
    pub fn compose_with(&self, sigma: &Dist) -> Result<JointDist> {
        if sigma.alphabet() != &self.source {
            return Err(Error::arg("mixing distribution must live on the kernel source"));
        }
        let ns = self.source.size();
        let mut w = vec![0.0; self.target.size() * ns];
        for s in 0..ns {
            for r in 0..self.target.size() {
                w[r * ns + s] = sigma.get(s) * self.prob(s, r);
            }
        }
        Ok(JointDist::from_raw(self.target.clone(), self.source.clone(), w))
    }
}

fn check_same<M: FiniteMeasure>(a: &M, b: &M) -> Result<()> {
    if !a.same_space(b) {
        return Err(Error::arg("measures live on different spaces"));
    }
    Ok(())
}

/// Relative entropy `H(ξ | λ) = Σ ξ log(ξ/λ)`, `+∞` off absolute continuity.
pub fn relative_entropy<M: FiniteMeasure>(xi: &M, lambda: &M) -> Result<f64> {
    check_same(xi, lambda)?;
    Ok(relative_entropy_slices(xi.weights(), lambda.weights()))
}

pub(crate) fn relative_entropy_slices(xi: &[f64], lambda: &[f64]) -> f64 {
    let mut h = 0.0;
    for (&x, &l) in xi.iter().zip(lambda) {
        if x > 0.0 {
            if l <= 0.0 {
                return f64::INFINITY;
            }
            h += x * (x / l).ln();
        }
    }
    h.max(0.0)
}

/// Prohorov distance for the discrete metric, i.e. the total-variation
/// distance `sup_A |μ(A) − ν(A)| = ½ Σ |μ(x) − ν(x)|`.
pub fn prohorov_distance<M: FiniteMeasure>(mu: &M, nu: &M) -> Result<f64> {
    check_same(mu, nu)?;
    Ok(tv_slices(mu.weights(), nu.weights()))
}

pub(crate) fn tv_slices(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
    (0.5 * d).min(1.0)
}

/// `max_x |μ(x) − ν(x)|`.
pub fn max_entry_gap<M: FiniteMeasure>(mu: &M, nu: &M) -> Result<f64> {
    check_same(mu, nu)?;
    Ok(mu.weights()
        .iter()
        .zip(nu.weights())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// The pair of marginals `(ξ(· × S), ξ(R × ·))`.
pub fn marginals(xi: &JointDist) -> (Dist, Dist) {
    (xi.row_marginal(), xi.col_marginal())
}

/// `θ(s, ·) = λ(· × S | R × {s})`.
pub fn conditional_theta(lambda: &JointDist) -> Result<Kernel> {
    lambda.check_column_support()?;
    let col = lambda.col_marginal();
    let rows = (0..lambda.ncols())
        .map(|s| {
            let w: Vec<f64> = (0..lambda.nrows()).map(|r| lambda.get(r, s) / col.get(s)).collect();
            let total: f64 = w.iter().sum();
            Dist {
                alphabet: lambda.rows.clone(),
                weights: w.into_iter().map(|x| x / total).collect(),
            }
        })
        .collect();
    Ok(Kernel {
        source: lambda.cols.clone(),
        target: lambda.rows.clone(),
        rows,
    })
}
