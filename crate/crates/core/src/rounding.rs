//! Rounding couplings onto `P_emp^n(R × S)` with a prescribed `S`-marginal.

use serde::Serialize;

use crate::empirical::{EmpiricalCoupling, EmpiricalMeasure};
use crate::error::{Error, Result};
use crate::finite_measures::{tv_slices, FiniteMeasure, JointDist};

/// Quantitative form of the rounding lemma: every `n ≥ n_min` and every
/// `ζ ∈ P_emp^n(S)` within `kappa` of the `S`-marginal admit a matched
/// coupling within `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundingCertificate {
    pub delta: f64,
    pub kappa: f64,
    pub n_min: u32,
}

impl RoundingCertificate {
    /// `M²κ + (2/N)(M³ + M²) < δ`.
    pub fn holds(&self, m: usize) -> bool {
        let m = m as f64;
        m * m * self.kappa + 2.0 / self.n_min as f64 * (m * m * m + m * m) < self.delta
    }
}

/// Nearest-grid rounding of `ξ` to `P_emp^n(R × S)` that never creates mass
/// outside the support of `ξ`: floor every positive cell, then hand out the
/// remaining units by decreasing fractional part (row-major order on ties).
/// Every entry moves by at most `1/n`.
pub fn round_to_grid(xi: &JointDist, n: u32) -> Result<EmpiricalCoupling> {
    if n == 0 {
        return Err(Error::arg("n must be at least 1"));
    }
    let nf = n as f64;
    let scaled: Vec<f64> = xi.weights().iter().map(|&w| w * nf).collect();
    let mut counts: Vec<u32> = scaled.iter().map(|&x| if x > 0.0 { x.floor() as u32 } else { 0 }).collect();
    let frac: Vec<f64> = scaled.iter().zip(&counts).map(|(&x, &c)| x - c as f64).collect();
    let mut order: Vec<usize> = (0..counts.len()).filter(|&i| scaled[i] > 0.0).collect();
    order.sort_by(|&a, &b| frac[b].total_cmp(&frac[a]).then(a.cmp(&b)));
    let mut left = n as i64 - counts.iter().map(|&c| c as i64).sum::<i64>();
    let mut i = 0;
    while left > 0 {
        counts[order[i % order.len()]] += 1;
        i += 1;
        left -= 1;
    }
    // floating overshoot: take back from the smallest remainders
    let mut i = order.len();
    while left < 0 {
        i = if i == 0 { order.len() - 1 } else { i - 1 };
        let c = order[i];
        if counts[c] > 0 {
            counts[c] -= 1;
            left += 1;
        }
    }
    EmpiricalCoupling::new(xi.rows().clone(), xi.cols().clone(), counts)
}

/// An element `ν ∈ P_emp^n(R × S)` with `S`-marginal exactly `ζ`, `ν ≪ λ`,
/// and close to `ξ`.
///
/// Starts from [`round_to_grid`], then repairs each column: a column above
/// its budget loses units from cells in increasing order of `λ_rs`; a column
/// below it gains the missing units on the row maximizing `λ_rs`.
pub fn match_s_margin(xi: &JointDist, zeta: &EmpiricalMeasure, lambda: &JointDist) -> Result<EmpiricalCoupling> {
    if xi.rows() != lambda.rows() || xi.cols() != lambda.cols() {
        return Err(Error::arg("ξ and λ live on different alphabet pairs"));
    }
    if zeta.alphabet() != lambda.cols() {
        return Err(Error::arg("ζ does not live on the column alphabet of λ"));
    }
    if !xi.absolutely_continuous_wrt(lambda) {
        return Err(Error::arg("ξ is not absolutely continuous with respect to λ"));
    }
    lambda.check_column_support().map_err(|e| Error::arg(e.to_string()))?;
    let (nr, ns) = (lambda.nrows(), lambda.ncols());
    let start = round_to_grid(xi, zeta.n())?;
    let mut counts = start.counts().to_vec();
    for s in 0..ns {
        let budget = zeta.counts()[s];
        let have: u32 = (0..nr).map(|r| counts[r * ns + s]).sum();
        if have > budget {
            let mut excess = have - budget;
            let mut rows: Vec<usize> = (0..nr).collect();
            rows.sort_by(|&a, &b| lambda.get(a, s).total_cmp(&lambda.get(b, s)).then(a.cmp(&b)));
            for r in rows {
                let take = excess.min(counts[r * ns + s]);
                counts[r * ns + s] -= take;
                excess -= take;
                if excess == 0 {
                    break;
                }
            }
        } else if have < budget {
            let target = (0..nr)
                .reduce(|best, r| if lambda.get(r, s) > lambda.get(best, s) { r } else { best })
                .expect("nonempty R");
            counts[target * ns + s] += budget - have;
        }
    }
    EmpiricalCoupling::new(lambda.rows().clone(), lambda.cols().clone(), counts)
}

/// The four conclusions of the rounding lemma, measured.
#[derive(Debug, Clone, Serialize)]
pub struct MatchCheck {
    pub kappa: f64,
    pub margin_exact: bool,
    pub absolutely_continuous: bool,
    pub fd: f64,
    pub fd_bound: f64,
    pub fd_r: f64,
    pub fd_r_bound: f64,
}

impl MatchCheck {
    pub fn passed(&self) -> bool {
        self.margin_exact && self.absolutely_continuous && self.fd <= self.fd_bound && self.fd_r <= self.fd_r_bound
    }
}

/// Evaluates `ν` against `fd(ν,ξ) ≤ Mκ + (2/n)(M² + M)` and
/// `fd(ν_R, ξ_R) ≤ M²κ + (2/n)(M³ + M²)`, with `κ = max_s |ζ(s) − ξ_S(s)|`.
pub fn check_match(xi: &JointDist, zeta: &EmpiricalMeasure, lambda: &JointDist, nu: &EmpiricalCoupling) -> MatchCheck {
    let m = xi.m() as f64;
    let n = zeta.n() as f64;
    let xs = xi.col_marginal();
    let kappa = (0..zeta.counts().len()).map(|s| (zeta.value(s) - xs.get(s)).abs()).fold(0.0, f64::max);
    let joint = nu.to_joint();
    let ns = lambda.ncols();
    MatchCheck {
        kappa,
        margin_exact: nu.col_counts() == zeta.counts(),
        absolutely_continuous: nu.counts().iter().enumerate().all(|(i, &c)| c == 0 || lambda.get(i / ns, i % ns) > 0.0),
        fd: tv_slices(joint.weights(), xi.weights()),
        fd_bound: m * kappa + 2.0 / n * (m * m + m),
        fd_r: tv_slices(joint.row_marginal().weights(), xi.row_marginal().weights()),
        fd_r_bound: m * m * kappa + 2.0 / n * (m * m * m + m * m),
    }
}

/// `κ = δ/(4M²)` and the least `N` with `(2/N)(M³ + M²) < δ/2`.
pub fn certificate_for(xi: &JointDist, delta: f64) -> Result<RoundingCertificate> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::arg("δ must be positive"));
    }
    let m = xi.m() as f64;
    let c = m * m * m + m * m;
    let ok = |n: f64| 2.0 / n * c < delta / 2.0;
    let mut n = (4.0 * c / delta).floor().max(1.0);
    while n > 1.0 && ok(n - 1.0) {
        n -= 1.0;
    }
    while !ok(n) {
        n += 1.0;
    }
    if n > u32::MAX as f64 {
        return Err(Error::arg("δ too small for a representable N"));
    }
    let cert = RoundingCertificate { delta, kappa: delta / (4.0 * m * m), n_min: n as u32 };
    debug_assert!(cert.holds(xi.m()));
    Ok(cert)
}
