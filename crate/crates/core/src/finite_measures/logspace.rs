//! Log-domain accumulation and log-factorials.

use libm::lgamma;

use crate::error::{Error, Result};

/// `log Σ exp(v)` for a nonempty slice, stable against overflow.
///
/// Always satisfies `max(v) <= log_sum(v) <= max(v) + log k`.
pub fn log_sum(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::arg("log_sum of an empty list"));
    }
    if values.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
        return Err(Error::arg("log_sum entries must lie in [-inf, +inf)"));
    }
    let mut acc = LogAccumulator::new();
    for &v in values {
        acc.add(v);
    }
    Ok(acc.value())
}

/// `log(exp(a) + exp(b))`.
#[inline]
pub fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Streaming log-sum-exp with a running maximum.
///
/// Terms are kept as `sum = Σ exp(v - max)`; the sum is rescaled whenever a
/// new maximum arrives, so each `add` costs at most one `exp` in the common
/// case.
#[derive(Debug, Clone, Copy)]
pub struct LogAccumulator {
    max: f64,
    sum: f64,
}

impl Default for LogAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl LogAccumulator {
    pub fn new() -> Self {
        Self { max: f64::NEG_INFINITY, sum: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        if v == f64::NEG_INFINITY {
            return;
        }
        if v <= self.max {
            self.sum += (v - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - v).exp() + 1.0;
            self.max = v;
        }
    }

    pub fn merge(&mut self, other: &LogAccumulator) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if other.max <= self.max {
            self.sum += other.sum * (other.max - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - other.max).exp() + other.sum;
            self.max = other.max;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.max == f64::NEG_INFINITY
    }

    /// `log Σ exp(v)`, or `-inf` when nothing (finite) was added.
    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// Table of `ln k!` for `k = 0..=n`, built from the log-gamma function.
#[derive(Debug, Clone)]
pub struct LogFactorials {
    table: Vec<f64>,
}

impl LogFactorials {
    pub fn new(n: usize) -> Self {
        let table = (0..=n)
            .map(|k| if k < 2 { 0.0 } else { lgamma(k as f64 + 1.0) })
            .collect();
        Self { table }
    }

    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        self.table[k]
    }

    pub fn max_n(&self) -> usize {
        self.table.len() - 1
    }

    /// `ln( n! / Π k_i! )` with `n = Σ k_i`.
    pub fn log_multinomial_coefficient(&self, parts: &[u32]) -> f64 {
        let n: usize = parts.iter().map(|&k| k as usize).sum();
        self.get(n) - parts.iter().map(|&k| self.get(k as usize)).sum::<f64>()
    }
}

/// `x ln y` with the convention `0 · ln 0 = 0`.
#[inline]
pub fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn singleton_and_absorbing_zero() {
        assert_eq!(log_sum(&[1.25]).unwrap(), 1.25);
        assert_eq!(log_sum(&[-3.5, f64::NEG_INFINITY]).unwrap(), -3.5);
        assert!((log_sum(&[0.0, 0.0]).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(log_sum(&[f64::NEG_INFINITY]).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn empty_and_nan_rejected() {
        assert!(log_sum(&[]).is_err());
        assert!(log_sum(&[0.0, f64::NAN]).is_err());
        assert!(log_sum(&[f64::INFINITY]).is_err());
    }

    #[test]
    fn max_bounds_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let k = rng.gen_range(1..20);
            let v: Vec<f64> = (0..k)
                .map(|_| {
                    if rng.gen_bool(0.1) {
                        f64::NEG_INFINITY
                    } else {
                        rng.gen_range(-800.0..50.0)
                    }
                })
                .collect();
            let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let s = log_sum(&v).unwrap();
            if m == f64::NEG_INFINITY {
                assert_eq!(s, m);
                continue;
            }
            assert!(s >= m - 1e-12 * m.abs().max(1.0));
            assert!(s <= m + (k as f64).ln() + 1e-12 * m.abs().max(1.0));
            let finite = v.iter().filter(|x| x.is_finite()).count();
            if finite == 1 {
                assert_eq!(s, m);
            }
        }
    }

    #[test]
    fn accumulator_matches_pairwise() {
        let vals = [-1.0, 3.0, -700.0, 2.5, 3.0];
        let mut acc = LogAccumulator::new();
        let mut pair = f64::NEG_INFINITY;
        for v in vals {
            acc.add(v);
            pair = log_add(pair, v);
        }
        assert!((acc.value() - pair).abs() < 1e-14);
        let mut a = LogAccumulator::new();
        let mut b = LogAccumulator::new();
        vals[..2].iter().for_each(|&v| a.add(v));
        vals[2..].iter().for_each(|&v| b.add(v));
        a.merge(&b);
        assert!((a.value() - pair).abs() < 1e-14);
    }

    #[test]
    fn log_factorials_small() {
        let f = LogFactorials::new(10);
        assert_eq!(f.get(0), 0.0);
        assert!((f.get(5) - 120f64.ln()).abs() < 1e-13);
        assert!((f.log_multinomial_coefficient(&[2, 1, 1]) - 12f64.ln()).abs() < 1e-13);
    }
}
