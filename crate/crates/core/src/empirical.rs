//! Empirical measures: the grids `P_emp^n`, exact multinomial laws of the
//! empirical map `L_n`, and the denseness construction.
//!
//! Count vectors are enumerated in descending lexicographic order, starting
//! at `(n, 0, …, 0)` and ending at `(0, …, 0, n)`. Wherever this crate says
//! "first" or "lexicographically smallest" it means earliest in that order.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exact::{self, ExactJoint};
use crate::finite_measures::{tv_slices, Alphabet, Dist, FiniteMeasure, JointDist, LogAccumulator, LogFactorials};

/// Enumeration limits. Exceeding one is a [`Error::Resource`], never a
/// silent truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Maximum number of grid elements one enumeration may produce.
    pub elements: u128,
    /// Maximum number of contingency-table search nodes.
    pub table_nodes: u128,
}

impl Default for Caps {
    fn default() -> Self {
        Self { elements: 10_000_000, table_nodes: 100_000_000 }
    }
}

/// `#P_emp^n` over `k` symbols: `binom(n + k - 1, k - 1)`, saturating.
pub fn count_compositions(n: usize, k: usize) -> u128 {
    if k == 0 {
        return u128::from(n == 0);
    }
    let mut c: u128 = 1;
    for i in 1..k {
        c = match c.checked_mul((n + i) as u128) {
            Some(v) => v / i as u128,
            None => return u128::MAX,
        };
    }
    c
}

/// All compositions of `n` into `k` nonnegative parts, in descending
/// lexicographic order.
#[derive(Debug, Clone)]
pub struct Compositions {
    current: Option<Vec<u32>>,
}

impl Compositions {
    pub fn new(n: u32, k: usize) -> Self {
        assert!(k >= 1);
        let mut first = vec![0; k];
        first[0] = n;
        Self { current: Some(first) }
    }
}

impl Iterator for Compositions {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let out = self.current.take()?;
        let k = out.len();
        if k > 1 {
            if let Some(j) = (0..k - 1).rev().find(|&j| out[j] > 0) {
                let mut nxt = out.clone();
                let tail = nxt[k - 1];
                nxt[j] -= 1;
                nxt[k - 1] = 0;
                nxt[j + 1] = tail + 1;
                self.current = Some(nxt);
            }
        }
        Some(out)
    }
}

/// Dense index of a composition in the enumeration order of
/// [`Compositions`].
#[derive(Debug, Clone)]
pub struct CompositionRanker {
    n: usize,
    k: usize,
    // counts[m][p] = number of compositions of m into p parts
    counts: Vec<Vec<usize>>,
}

impl CompositionRanker {
    pub fn new(n: usize, k: usize) -> Self {
        let counts = (0..=n)
            .map(|m| (0..=k).map(|p| count_compositions(m, p).min(usize::MAX as u128) as usize).collect())
            .collect();
        Self { n, k, counts }
    }

    pub fn len(&self) -> usize {
        self.counts[self.n][self.k]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn rank(&self, c: &[u32]) -> usize {
        debug_assert_eq!(c.len(), self.k);
        let mut rem = self.n;
        let mut idx = 0;
        for (i, &ci) in c.iter().enumerate().take(self.k - 1) {
            let ci = ci as usize;
            // compositions whose i-th part exceeds ci come first
            if rem > ci {
                idx += self.counts[rem - ci - 1][self.k - i];
            }
            rem -= ci;
        }
        idx
    }
}

/// Element of `P_emp^n` over one alphabet.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EmpiricalMeasure {
    alphabet: Alphabet,
    n: u32,
    counts: Vec<u32>,
}

impl EmpiricalMeasure {
    pub fn new(alphabet: Alphabet, counts: Vec<u32>) -> Result<Self> {
        if counts.len() != alphabet.size() {
            return Err(Error::arg(format!(
                "{} counts for an alphabet of size {}",
                counts.len(),
                alphabet.size()
            )));
        }
        let n: u64 = counts.iter().map(|&c| c as u64).sum();
        if n == 0 || n > u32::MAX as u64 {
            return Err(Error::arg("empirical counts must sum to a positive n"));
        }
        Ok(Self { alphabet, n: n as u32, counts })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn value(&self, i: usize) -> f64 {
        self.counts[i] as f64 / self.n as f64
    }

    pub fn to_dist(&self) -> Dist {
        Dist::from_counts(self.alphabet.clone(), &self.counts).expect("valid counts")
    }
}

/// Element of `P_emp^n(R × S)`, counts stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EmpiricalCoupling {
    rows: Alphabet,
    cols: Alphabet,
    n: u32,
    counts: Vec<u32>,
}

impl EmpiricalCoupling {
    pub fn new(rows: Alphabet, cols: Alphabet, counts: Vec<u32>) -> Result<Self> {
        if counts.len() != rows.size() * cols.size() {
            return Err(Error::arg("coupling counts do not match the alphabets"));
        }
        let n: u64 = counts.iter().map(|&c| c as u64).sum();
        if n == 0 || n > u32::MAX as u64 {
            return Err(Error::arg("coupling counts must sum to a positive n"));
        }
        Ok(Self { rows, cols, n: n as u32, counts })
    }

    pub fn rows(&self) -> &Alphabet {
        &self.rows
    }

    pub fn cols(&self) -> &Alphabet {
        &self.cols
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn get(&self, r: usize, s: usize) -> u32 {
        self.counts[r * self.cols.size() + s]
    }

    pub fn row_counts(&self) -> Vec<u32> {
        self.counts.chunks(self.cols.size()).map(|c| c.iter().sum()).collect()
    }

    pub fn col_counts(&self) -> Vec<u32> {
        let ns = self.cols.size();
        (0..ns).map(|s| (0..self.rows.size()).map(|r| self.counts[r * ns + s]).sum()).collect()
    }

    pub fn r_marginal(&self) -> EmpiricalMeasure {
        EmpiricalMeasure { alphabet: self.rows.clone(), n: self.n, counts: self.row_counts() }
    }

    pub fn s_marginal(&self) -> EmpiricalMeasure {
        EmpiricalMeasure { alphabet: self.cols.clone(), n: self.n, counts: self.col_counts() }
    }

    pub fn to_joint(&self) -> JointDist {
        let n = self.n as f64;
        JointDist::from_raw(
            self.rows.clone(),
            self.cols.clone(),
            self.counts.iter().map(|&c| c as f64 / n).collect(),
        )
    }
}

pub(crate) fn check_cap(needed: u128, cap: u128, what: &'static str) -> Result<()> {
    if needed > cap {
        Err(Error::Resource { what, needed, cap })
    } else {
        Ok(())
    }
}

/// `P_emp^n` over `alphabet`, every element exactly once, in enumeration order.
pub fn enumerate_empirical(n: u32, alphabet: &Alphabet, caps: &Caps) -> Result<Vec<EmpiricalMeasure>> {
    if n == 0 {
        return Err(Error::arg("n must be at least 1"));
    }
    check_cap(count_compositions(n as usize, alphabet.size()), caps.elements, "empirical simplex elements")?;
    Ok(Compositions::new(n, alphabet.size())
        .map(|counts| EmpiricalMeasure { alphabet: alphabet.clone(), n, counts })
        .collect())
}

/// `P_emp^n(R × S)` in enumeration order of the row-major count vectors.
pub fn enumerate_couplings(n: u32, rows: &Alphabet, cols: &Alphabet, caps: &Caps) -> Result<Vec<EmpiricalCoupling>> {
    if n == 0 {
        return Err(Error::arg("n must be at least 1"));
    }
    let m = rows.size() * cols.size();
    check_cap(count_compositions(n as usize, m), caps.elements, "empirical coupling elements")?;
    Ok(Compositions::new(n, m)
        .map(|counts| EmpiricalCoupling { rows: rows.clone(), cols: cols.clone(), n, counts })
        .collect())
}

pub(crate) fn check_coupling_space(nu: &EmpiricalCoupling, rows: &Alphabet, cols: &Alphabet) -> Result<()> {
    if nu.rows() != rows || nu.cols() != cols {
        return Err(Error::arg("empirical coupling and λ live on different alphabet pairs"));
    }
    Ok(())
}

/// Log of a multinomial atom, `ln[ n!/Π c! · Π λ^c ]`, with precomputed
/// `ln λ` (`-inf` for zero cells).
#[inline]
pub(crate) fn log_multinomial_atom(counts: &[u32], log_lambda: &[f64], lf: &LogFactorials) -> f64 {
    let mut v = 0.0;
    let mut n = 0usize;
    for (&c, &ll) in counts.iter().zip(log_lambda) {
        if c > 0 {
            if ll == f64::NEG_INFINITY {
                return f64::NEG_INFINITY;
            }
            v += c as f64 * ll - lf.get(c as usize);
            n += c as usize;
        }
    }
    v + lf.get(n)
}

pub(crate) fn log_weights(lambda: &JointDist) -> Vec<f64> {
    lambda.weights().iter().map(|&w| if w > 0.0 { w.ln() } else { f64::NEG_INFINITY }).collect()
}

/// `ln (⊗ⁿλ)(L_n^{-1}{ν})`: the log-probability that `n` i.i.d. draws from
/// `λ` have empirical measure `ν`.
pub fn log_multinomial_prob(nu: &EmpiricalCoupling, lambda: &JointDist) -> Result<f64> {
    check_coupling_space(nu, lambda.rows(), lambda.cols())?;
    let lf = LogFactorials::new(nu.n() as usize);
    Ok(log_multinomial_atom(nu.counts(), &log_weights(lambda), &lf))
}

/// Exact-mode twin of [`log_multinomial_prob`] (linear, not log).
pub fn multinomial_prob_exact(nu: &EmpiricalCoupling, lambda: &ExactJoint) -> Result<BigRational> {
    check_coupling_space(nu, lambda.rows(), lambda.cols())?;
    let facts = exact::factorials(nu.n() as usize);
    Ok(multinomial_atom_exact(nu.counts(), lambda.weights(), &facts))
}

pub(crate) fn multinomial_atom_exact(counts: &[u32], lambda: &[BigRational], facts: &[num_bigint::BigInt]) -> BigRational {
    let n: usize = counts.iter().map(|&c| c as usize).sum();
    let mut p = BigRational::from_integer(facts[n].clone());
    for (&c, l) in counts.iter().zip(lambda) {
        if c > 0 {
            p *= num_traits::pow(l.clone(), c as usize);
            p /= BigRational::from_integer(facts[c as usize].clone());
        }
    }
    p
}

/// Predicate on a distribution; events `A ⊂ P(R)` and `B ⊂ P(S)`.
pub type Event<'a> = &'a dyn Fn(&Dist) -> bool;

/// Caches predicate values per count vector.
pub(crate) struct EventMemo<'a> {
    alphabet: Alphabet,
    event: Event<'a>,
    seen: HashMap<Vec<u32>, bool>,
}

impl<'a> EventMemo<'a> {
    pub(crate) fn new(alphabet: Alphabet, event: Event<'a>) -> Self {
        Self { alphabet, event, seen: HashMap::new() }
    }

    pub(crate) fn contains(&mut self, counts: Vec<u32>) -> bool {
        if let Some(&v) = self.seen.get(&counts) {
            return v;
        }
        let v = (self.event)(&Dist::from_counts(self.alphabet.clone(), &counts).expect("counts"));
        self.seen.insert(counts, v);
        v
    }
}

/// `μ_n(A × B) = (⊗ⁿλ)(L_n^{-1} 𝔪^{-1}(A × B))` by exact summation over
/// `P_emp^n(R × S)`.
pub fn joint_empirical_law(n: u32, lambda: &JointDist, a: Event<'_>, b: Event<'_>, caps: &Caps) -> Result<f64> {
    let lf = LogFactorials::new(n as usize);
    let ll = log_weights(lambda);
    let mut ma = EventMemo::new(lambda.rows().clone(), a);
    let mut mb = EventMemo::new(lambda.cols().clone(), b);
    let mut acc = LogAccumulator::new();
    for nu in enumerate_couplings(n, lambda.rows(), lambda.cols(), caps)? {
        if ma.contains(nu.row_counts()) && mb.contains(nu.col_counts()) {
            acc.add(log_multinomial_atom(nu.counts(), &ll, &lf));
        }
    }
    Ok(acc.value().exp().min(1.0))
}

/// Exact-mode twin of [`joint_empirical_law`].
pub fn joint_empirical_law_exact(n: u32, lambda: &ExactJoint, a: Event<'_>, b: Event<'_>, caps: &Caps) -> Result<BigRational> {
    let facts = exact::factorials(n as usize);
    let mut ma = EventMemo::new(lambda.rows().clone(), a);
    let mut mb = EventMemo::new(lambda.cols().clone(), b);
    let mut total = BigRational::zero();
    for nu in enumerate_couplings(n, lambda.rows(), lambda.cols(), caps)? {
        if ma.contains(nu.row_counts()) && mb.contains(nu.col_counts()) {
            total += multinomial_atom_exact(nu.counts(), lambda.weights(), &facts);
        }
    }
    Ok(total)
}

#[cfg(test)]
/// `H(ν | λ)` for an empirical coupling, from counts.
pub(crate) fn empirical_relative_entropy(counts: &[u32], n: u32, lambda: &[f64]) -> f64 {
    let n = n as f64;
    let mut h = 0.0;
    for (&c, &l) in counts.iter().zip(lambda) {
        if c > 0 {
            if l <= 0.0 {
                return f64::INFINITY;
            }
            let p = c as f64 / n;
            h += crate::finite_measures::logspace::xlogy(p, p / l);
        }
    }
    h.max(0.0)
}

/// Mixture construction of the denseness lemma: with `l' = ⌊m/k⌋` and
/// `i = m − l'k` (`k = ζ.n`), returns `(l'k/m)·ζ + (i/m)·ξ` where the filler
/// `ξ` puts all `i` units on the first label.
///
/// The result lies in `P_emp^m` and `fd(result, ζ) ≤ 2/l' ≤ 2/l`.
pub fn densify(zeta: &EmpiricalMeasure, l: u32, m: u32) -> Result<EmpiricalMeasure> {
    let k = zeta.n();
    if l == 0 || (m as u64) < k as u64 * l as u64 {
        return Err(Error::arg(format!("densify needs m ≥ k·l, got m={m}, k={k}, l={l}")));
    }
    let lp = m / k;
    let i = m - lp * k;
    let mut counts: Vec<u32> = zeta.counts().iter().map(|&c| c * lp).collect();
    counts[0] += i;
    EmpiricalMeasure::new(zeta.alphabet().clone(), counts)
}

/// The fd-nearest element of `P_emp^n` to `target`; ties go to the earliest
/// count vector in enumeration order. `fd(result, target) ≤ k/(2n)`.
pub fn nearest_empirical(target: &Dist, n: u32) -> Result<EmpiricalMeasure> {
    if n == 0 {
        return Err(Error::arg("n must be at least 1"));
    }
    let scaled: Vec<f64> = target.weights().iter().map(|&w| w * n as f64).collect();
    let mut counts: Vec<u32> = scaled.iter().map(|x| x.floor() as u32).collect();
    let assigned: i64 = counts.iter().map(|&c| c as i64).sum();
    let mut extra = n as i64 - assigned;
    // Optimal L1 roundings only ever move a cell from floor to ceil; the
    // largest fractional parts go up first, earlier symbols first on ties.
    let mut order: Vec<usize> = (0..counts.len()).collect();
    let frac = |i: usize| scaled[i] - counts[i] as f64;
    let fracs: Vec<f64> = (0..counts.len()).map(frac).collect();
    order.sort_by(|&a, &b| fracs[b].total_cmp(&fracs[a]).then(a.cmp(&b)));
    let mut idx = 0;
    while extra > 0 {
        counts[order[idx % order.len()]] += 1;
        idx += 1;
        extra -= 1;
    }
    // (only reachable when the weights overshoot 1 through rounding)
    let mut idx = order.len();
    while extra < 0 {
        idx -= 1;
        let c = order[idx % order.len()];
        if counts[c] > 0 {
            counts[c] -= 1;
            extra += 1;
        }
        if idx == 0 {
            idx = order.len();
        }
    }
    EmpiricalMeasure::new(target.alphabet().clone(), counts)
}

/// An `N` such that for every `n ≥ N` the ball `B(center, δ)` contains an
/// element of `P_emp^n`.
///
/// Follows the constructive proof: `ζ ∈ P_emp^k` with `fd(ζ, center) < δ/2`,
/// `l` with `2/l < δ/2`, `N = l·k`. Witnesses for `n ∈ N..=N+k` are built with
/// [`densify`] and checked before returning.
pub fn find_n_for_ball(center: &Dist, delta: f64) -> Result<u32> {
    if !(delta > 0.0) {
        return Err(Error::arg("ball radius must be positive"));
    }
    if delta >= 1.0 {
        return Ok(1);
    }
    let mut k = 1u32;
    let zeta = loop {
        let z = nearest_empirical(center, k)?;
        if tv_slices(z.to_dist().weights(), center.weights()) < delta / 2.0 {
            break z;
        }
        k += 1;
    };
    let l = (4.0 / delta).floor() as u32 + 1;
    let big_n = l * k;
    for n in big_n..=big_n + k {
        let w = densify(&zeta, l, n)?;
        if !(tv_slices(w.to_dist().weights(), center.weights()) < delta) {
            return Err(Error::Internal(format!("denseness witness at n={n} left the ball")));
        }
    }
    Ok(big_n)
}
