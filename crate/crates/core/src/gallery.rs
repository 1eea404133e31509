//! Closed forms for the one-dimensional continuous examples: the correlated
//! Gaussian pair, the two-component mixture kernels, the counterexample where
//! conditioning on shrinking neighbourhoods loses the lower bound, and the
//! calibration of the Gaussian ramp width.

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use libm::{erf, erfc};

use crate::error::{Error, Result};
use crate::report::{cell, Table};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// Standard normal density.
pub fn normal_density(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

/// `ln Φ̄(x) = ln P(Z > x)` for a standard normal `Z`.
///
/// Uses `erfc` up to 8 and the asymptotic expansion
/// `Φ̄(x) ≈ φ(x)/x · Σ (−1)^k (2k−1)!! / x^{2k}` beyond, summed until the
/// terms stop shrinking, so the value stays finite long after `Φ̄` itself
/// underflows.
pub fn ln_normal_tail(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 8.0 {
        return (0.5 * erfc(x / SQRT_2)).ln();
    }
    if x == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    let inv = 1.0 / (x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..64 {
        let next = -term * (2 * k - 1) as f64 * inv;
        if next.abs() >= term.abs() || next.abs() < 1e-17 * sum {
            break;
        }
        term = next;
        sum += term;
    }
    -0.5 * x * x - LN_SQRT_2PI - x.ln() + sum.ln()
}

pub fn normal_tail(x: f64) -> f64 {
    ln_normal_tail(x).exp()
}

/// `P(a < Z < b)` for standard normal `Z`, computed on whichever side keeps
/// both tails small.
pub fn normal_interval(a: f64, b: f64) -> f64 {
    if !(a < b) {
        return 0.0;
    }
    if a >= 0.0 {
        (normal_tail(a) - normal_tail(b)).max(0.0)
    } else if b <= 0.0 {
        (normal_tail(-b) - normal_tail(-a)).max(0.0)
    } else {
        (1.0 - normal_tail(-a) - normal_tail(b)).max(0.0)
    }
}

/// `∫_0^a e^{−t} dt = 1 − e^{−a}`.
fn exp_mass(a: f64) -> f64 {
    -(-a).exp_m1()
}

/// `∫_0^a t e^{−t} dt = 1 − e^{−a}(1 + a)`, by series where the direct form
/// cancels.
fn ramp_mass(a: f64) -> f64 {
    if a < 0.5 {
        // Σ_{k≥2} (−1)^k (k−1) a^k / k!
        let mut pow_over_fact = a; // a^k / k! at k = 1
        let mut sum = 0.0;
        for k in 2..60 {
            pow_over_fact *= a / k as f64;
            let term = (k - 1) as f64 * pow_over_fact;
            sum += if k % 2 == 0 { term } else { -term };
            if term < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        exp_mass(a) - a * (-a).exp()
    }
}

/// Jointly Gaussian pair with density proportional to
/// `exp(−n/2 (x² − 2rxy + y²))`; the kernel given `y` is `Normal(r·y, 1/n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPairFamily {
    r: f64,
}

impl GaussianPairFamily {
    pub fn new(r: f64) -> Result<Self> {
        if r == 0.0 || !r.is_finite() {
            return Err(Error::arg(format!("coupling coefficient must be finite and nonzero, got {r}")));
        }
        Ok(GaussianPairFamily { r })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `J(x, y) = ½(x² − 2rxy + y²)`.
    pub fn joint_rate(&self, x: f64, y: f64) -> f64 {
        0.5 * (x * x - 2.0 * self.r * x * y + y * y)
    }

    /// `inf_x J(x, y) = ½(1 − r²)y²`.
    pub fn section_infimum(&self, y: f64) -> f64 {
        0.5 * (1.0 - self.r * self.r) * y * y
    }
}

/// `(1/n) log ∫ e^{nλx} dη_n(y_n, ·)` for `η_n(y_n, ·) = Normal(r y_n, 1/n)`.
///
/// The Gaussian moment generating function gives
/// `(1/n)(nλ r y_n + n²λ²/(2n)) = λ r y_n + λ²/2` for every `n`; `n` only
/// fixes which kernel is meant.
pub fn gaussian_cumulant(n: u32, y_n: f64, lam: f64, family: &GaussianPairFamily) -> f64 {
    debug_assert!(n >= 1);
    lam * family.r * y_n + 0.5 * lam * lam
}

/// Rational twin of [`gaussian_cumulant`] for exact gap checks.
pub fn gaussian_cumulant_exact(y_n: &BigRational, lam: &BigRational, r: &BigRational) -> BigRational {
    let half = BigRational::new(1.into(), 2.into());
    lam * r * y_n + half * lam * lam
}

/// The conditional rate `x ↦ (x − r y)²`.
pub fn gaussian_rate(x: f64, y: f64, family: &GaussianPairFamily) -> f64 {
    let d = x - family.r * y;
    d * d
}

/// `(∫_0^{1/n} min(ny,1) n e^{−ny} dy, ∫_0^{1/n} (1 − min(ny,1)) n e^{−ny} dy)`.
///
/// Substituting `t = ny` removes `n`: the pair is `(1 − 2/e, 1/e)`.
pub fn exponential_mixture_weights(n: u32) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::arg("n must be at least 1"));
    }
    let w1 = ramp_mass(1.0);
    Ok((w1, exp_mass(1.0) - w1))
}

/// `ln μ_n(U × Y | X × V_m)` for `U = (1, ∞)`, `V_m = [0, 1/m)` in the
/// exponential-ramp mixture with Gaussian first component and `δ_{1/n}`
/// second component.
///
/// On `V_m` the ramp is `ny`, and `1/n ∉ U`, so the ratio is
/// `Φ̄(√n) · ∫_0^{n/m} t e^{−t} dt / ∫_0^{n/m} e^{−t} dt`.
pub fn counterexample_log_ratio(n: u32, m: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::arg("n must be at least 1"));
    }
    if m < n {
        return Err(Error::arg(format!("the ratio is only computed for m ≥ n (got n = {n}, m = {m})")));
    }
    let a = n as f64 / m as f64;
    Ok(ln_normal_tail((n as f64).sqrt()) + ramp_mass(a).ln() - exp_mass(a).ln())
}

pub fn counterexample_ratio(n: u32, m: u32) -> Result<f64> {
    counterexample_log_ratio(n, m).map(f64::exp)
}

/// The bound `(n/m) Φ̄(√n)` on the counterexample ratio, in log form.
pub fn counterexample_log_bound(n: u32, m: u32) -> f64 {
    (n as f64 / m as f64).ln() + ln_normal_tail((n as f64).sqrt())
}

/// `β = Normal(0,1)([−1, 1])`.
pub fn calibration_mass() -> f64 {
    erf(1.0 / SQRT_2)
}

/// Mass the ramp `min(|z|/ε, 1)` and its complement put on `[−κ_n, κ_n]`
/// under `Normal(0, 1/n)`, with `κ_n = 1/√n`.
///
/// In standard units `u = z√n` the window is `[−1, 1]` and the ramp width is
/// `e = ε√n`: ramp mass `2[(φ(0) − φ(e))/e + Φ(1) − Φ(e)]`.
pub fn ramp_window_masses(n: u32, eps: f64) -> (f64, f64) {
    let e = eps * (n as f64).sqrt();
    let beta = calibration_mass();
    if e >= 1.0 {
        // ramp below one on the whole window
        let ramp = 2.0 * normal_density(0.0) * -(-0.5_f64).exp_m1() / e;
        return (ramp, beta - ramp);
    }
    let inner = normal_density(0.0) * -(-0.5 * e * e).exp_m1() / e;
    let flat = 0.5 * (erf(1.0 / SQRT_2) - erf(e / SQRT_2));
    let ramp = 2.0 * (inner + flat);
    (ramp, beta - ramp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonCalibration {
    pub n: u32,
    pub kappa: f64,
    pub epsilon: f64,
    pub beta: f64,
    /// `∫_{[−κ,κ]} φ_ε dν_n`.
    pub ramp: f64,
    /// `∫_{[−κ,κ]} (1 − φ_ε) dν_n`.
    pub flat: f64,
    pub residual: f64,
    pub iterations: u32,
}

/// Solves `∫_{[−κ_n,κ_n]} min(|z|/ε, 1) dNormal(0,1/n)(z) = β/2` for
/// `ε ∈ (0, κ_n)` by bisection.
pub fn find_epsilon_n(n: u32) -> Result<EpsilonCalibration> {
    if n == 0 {
        return Err(Error::arg("n must be at least 1"));
    }
    let kappa = 1.0 / (n as f64).sqrt();
    let beta = calibration_mass();
    let g = |eps: f64| ramp_window_masses(n, eps).0 - 0.5 * beta;
    // the ramp mass falls from β to 2(φ(0) − φ(1)) < β/2 as ε grows
    let (mut lo, mut hi) = (1e-15 * kappa, kappa * (1.0 - 1e-12));
    let (glo, ghi) = (g(lo), g(hi));
    if !(glo > 0.0 && ghi < 0.0) {
        return Err(Error::Internal(format!("ε bracket does not change sign: g(lo) = {glo:e}, g(hi) = {ghi:e}")));
    }
    let mut iterations = 0;
    while iterations < 200 && hi - lo > f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let epsilon = 0.5 * (lo + hi);
    let (ramp, flat) = ramp_window_masses(n, epsilon);
    let residual = (ramp - 0.5 * beta).abs().max((flat - 0.5 * beta).abs());
    if residual > 1e-10 {
        return Err(Error::Internal(format!("ε bisection stalled with residual {residual:e}")));
    }
    Ok(EpsilonCalibration { n, kappa, epsilon, beta, ramp, flat, residual, iterations })
}

/// First mixture component `μ¹_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstComponent {
    /// `Normal(0, 1/n)` on the line.
    GaussianScaled,
    /// `Σ_{k≥1} 2^{−k} δ_k` on the naturals, the same for every `n`.
    GeometricOnNaturals,
}

/// Second mixture component `μ²_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondComponent {
    DiracAtOneOverN,
    DiracAtN,
}

/// Law `ν_n` of the conditioning coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditioningLaw {
    /// Density `n e^{−ny}` on `[0, ∞)`.
    ExponentialRateN,
    /// `Normal(0, 1/n)`.
    GaussianScaled,
    /// `½ δ_0 + ½ Normal(0, 1/n)`.
    GaussianScaledPlusAtom,
}

/// Mixing weight `α_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ramp {
    /// `min(ny, 1)` on `[0, ∞)`.
    LinearRamp,
    /// `min(|y|/ε_n, 1)` with `ε_n` from [`find_epsilon_n`].
    CalibratedPhiEpsilon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixtureFamily {
    pub mu1: FirstComponent,
    pub mu2: SecondComponent,
    pub nu: ConditioningLaw,
    pub alpha: Ramp,
}

impl MixtureFamily {
    /// Gaussian versus `δ_{1/n}`, exponential conditioning law, linear ramp.
    pub fn gaussian_exponential() -> Self {
        MixtureFamily {
            mu1: FirstComponent::GaussianScaled,
            mu2: SecondComponent::DiracAtOneOverN,
            nu: ConditioningLaw::ExponentialRateN,
            alpha: Ramp::LinearRamp,
        }
    }

    /// Gaussian versus `δ_{1/n}`, Gaussian conditioning law, calibrated ramp.
    pub fn gaussian_gaussian() -> Self {
        MixtureFamily {
            mu1: FirstComponent::GaussianScaled,
            mu2: SecondComponent::DiracAtOneOverN,
            nu: ConditioningLaw::GaussianScaled,
            alpha: Ramp::CalibratedPhiEpsilon,
        }
    }

    /// As [`Self::gaussian_gaussian`] with an atom of mass ½ at 0.
    pub fn gaussian_gaussian_atom() -> Self {
        MixtureFamily { nu: ConditioningLaw::GaussianScaledPlusAtom, ..Self::gaussian_gaussian() }
    }

    /// Geometric on the naturals versus `δ_n`, exponential law, linear ramp.
    pub fn geometric_exponential() -> Self {
        MixtureFamily {
            mu1: FirstComponent::GeometricOnNaturals,
            mu2: SecondComponent::DiracAtN,
            nu: ConditioningLaw::ExponentialRateN,
            alpha: Ramp::LinearRamp,
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "gaussian-exponential" => Ok(Self::gaussian_exponential()),
            "gaussian-gaussian" => Ok(Self::gaussian_gaussian()),
            "gaussian-gaussian-atom" => Ok(Self::gaussian_gaussian_atom()),
            "geometric-exponential" => Ok(Self::geometric_exponential()),
            _ => Err(Error::arg(format!(
                "unknown family {name:?}; expected gaussian-exponential, gaussian-gaussian, gaussian-gaussian-atom or geometric-exponential"
            ))),
        }
    }

    /// The components must live on a common space and the ramp on the
    /// support of the conditioning law.
    pub fn validate(&self) -> Result<()> {
        let space_ok = matches!(
            (self.mu1, self.mu2),
            (FirstComponent::GaussianScaled, SecondComponent::DiracAtOneOverN)
                | (FirstComponent::GeometricOnNaturals, SecondComponent::DiracAtN)
        );
        if !space_ok {
            return Err(Error::arg(format!("{:?} and {:?} do not share a state space", self.mu1, self.mu2)));
        }
        let ramp_ok = matches!(
            (self.nu, self.alpha),
            (ConditioningLaw::ExponentialRateN, Ramp::LinearRamp)
                | (ConditioningLaw::GaussianScaled | ConditioningLaw::GaussianScaledPlusAtom, Ramp::CalibratedPhiEpsilon)
        );
        if !ramp_ok {
            return Err(Error::arg(format!("ramp {:?} is not defined for {:?}", self.alpha, self.nu)));
        }
        Ok(())
    }

    fn on_naturals(&self) -> bool {
        self.mu1 == FirstComponent::GeometricOnNaturals
    }

    /// `α_n(y)`.
    pub fn alpha(&self, n: u32, y: f64) -> Result<f64> {
        if !y.is_finite() {
            return Err(Error::arg("conditioning point must be finite"));
        }
        match self.alpha {
            Ramp::LinearRamp => {
                if y < 0.0 {
                    return Err(Error::arg(format!("y = {y} lies outside [0, ∞)")));
                }
                Ok((n as f64 * y).min(1.0))
            }
            Ramp::CalibratedPhiEpsilon => Ok((y.abs() / find_epsilon_n(n)?.epsilon).min(1.0)),
        }
    }

    /// Half-width of the neighbourhood `W_n` outside which `α_n = 1`.
    pub fn window(&self, n: u32) -> Result<f64> {
        match self.alpha {
            Ramp::LinearRamp => Ok(1.0 / n as f64),
            Ramp::CalibratedPhiEpsilon => Ok(find_epsilon_n(n)?.epsilon),
        }
    }

    pub fn first_component(&self, n: u32, event: &IntervalSet) -> f64 {
        match self.mu1 {
            FirstComponent::GaussianScaled => {
                let s = (n as f64).sqrt();
                event.parts.iter().map(|i| normal_interval(i.lo * s, i.hi * s)).sum::<f64>().min(1.0)
            }
            FirstComponent::GeometricOnNaturals => event.parts.iter().map(geometric_mass).sum::<f64>().min(1.0),
        }
    }

    pub fn second_component(&self, n: u32, event: &IntervalSet) -> f64 {
        let at = match self.mu2 {
            SecondComponent::DiracAtOneOverN => 1.0 / n as f64,
            SecondComponent::DiracAtN => n as f64,
        };
        if event.contains(at) {
            1.0
        } else {
            0.0
        }
    }

    /// `(∫_{W_n} α_n dν_n, ∫_{W_n} (1 − α_n) dν_n)` in closed form.
    pub fn window_masses(&self, n: u32) -> Result<(f64, f64)> {
        match self.nu {
            ConditioningLaw::ExponentialRateN => exponential_mixture_weights(n),
            ConditioningLaw::GaussianScaled => {
                let c = find_epsilon_n(n)?;
                Ok(window_masses_gaussian(&c))
            }
            ConditioningLaw::GaussianScaledPlusAtom => {
                let c = find_epsilon_n(n)?;
                let (a, b) = window_masses_gaussian(&c);
                // the atom sits where α_n = 0
                Ok((0.5 * a, 0.5 * b + 0.5))
            }
        }
    }
}

/// On `W_n = [−ε_n, ε_n]` the ramp reaches 1 only at the edges, so both
/// integrals are the calibrated ramp masses restricted to `[−ε_n, ε_n]`.
fn window_masses_gaussian(c: &EpsilonCalibration) -> (f64, f64) {
    let u = c.epsilon * (c.n as f64).sqrt();
    let total = normal_interval(-u, u);
    let ramp = 2.0 * normal_density(0.0) * -(-0.5 * u * u).exp_m1() / u;
    (ramp, total - ramp)
}

fn geometric_mass(iv: &Interval) -> f64 {
    // smallest and largest naturals in the interval
    let mut lo = iv.lo.ceil().max(1.0);
    if lo == iv.lo && !iv.lo_closed {
        lo += 1.0;
    }
    let hi = if iv.hi == f64::INFINITY {
        f64::INFINITY
    } else {
        let mut h = iv.hi.floor();
        if h == iv.hi && !iv.hi_closed {
            h -= 1.0;
        }
        h
    };
    if hi < lo {
        return 0.0;
    }
    // Σ_{k=lo}^{hi} 2^{−k} = 2^{1−lo} − 2^{−hi}
    let upper = if hi.is_infinite() { 0.0 } else { (-hi).exp2() };
    (1.0 - lo).exp2() - upper
}

/// An interval with optional endpoints at `±∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub lo_closed: bool,
    #[serde(default)]
    pub hi_closed: bool,
}

impl Interval {
    pub fn open(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, lo_closed: false, hi_closed: false }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, lo_closed: true, hi_closed: true }
    }

    pub fn contains(&self, x: f64) -> bool {
        (x > self.lo || (self.lo_closed && x == self.lo)) && (x < self.hi || (self.hi_closed && x == self.hi))
    }
}

/// A finite union of intervals, merged into sorted disjoint parts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalSet {
    parts: Vec<Interval>,
}

impl IntervalSet {
    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        for iv in &intervals {
            if iv.lo.is_nan() || iv.hi.is_nan() {
                return Err(Error::arg("interval endpoint is NaN"));
            }
            if iv.lo > iv.hi {
                return Err(Error::arg(format!("interval with lo {} > hi {}", iv.lo, iv.hi)));
            }
            if (iv.lo_closed && iv.lo.is_infinite()) || (iv.hi_closed && iv.hi.is_infinite()) {
                return Err(Error::arg("an infinite endpoint cannot be closed"));
            }
        }
        let mut sorted: Vec<Interval> = intervals.into_iter().filter(|iv| !iv_empty(iv)).collect();
        sorted.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(b.lo_closed.cmp(&a.lo_closed)));
        let mut parts: Vec<Interval> = Vec::new();
        for iv in sorted {
            match parts.last_mut() {
                Some(last) if iv.lo < last.hi || (iv.lo == last.hi && (iv.lo_closed || last.hi_closed)) => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                        last.hi_closed = iv.hi_closed;
                    } else if iv.hi == last.hi {
                        last.hi_closed |= iv.hi_closed;
                    }
                }
                _ => parts.push(iv),
            }
        }
        Ok(IntervalSet { parts })
    }

    pub fn whole_line() -> Self {
        IntervalSet { parts: vec![Interval::open(f64::NEG_INFINITY, f64::INFINITY)] }
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn contains(&self, x: f64) -> bool {
        self.parts.iter().any(|iv| iv.contains(x))
    }

    /// The complement in the line.
    pub fn complement(&self) -> Self {
        let mut parts = Vec::new();
        let mut lo = f64::NEG_INFINITY;
        let mut lo_closed = false;
        for iv in &self.parts {
            let gap = Interval { lo, hi: iv.lo, lo_closed, hi_closed: !iv.lo_closed && iv.lo.is_finite() };
            if !iv_empty(&gap) {
                parts.push(gap);
            }
            lo = iv.hi;
            lo_closed = !iv.hi_closed && iv.hi.is_finite();
        }
        let tail = Interval { lo, hi: f64::INFINITY, lo_closed, hi_closed: false };
        if !iv_empty(&tail) {
            parts.push(tail);
        }
        IntervalSet { parts }
    }
}

fn iv_empty(iv: &Interval) -> bool {
    iv.lo > iv.hi || (iv.lo == iv.hi && !(iv.lo_closed && iv.hi_closed))
}

/// `η_n(y, A) = α_n(y) μ¹_n(A) + (1 − α_n(y)) μ²_n(A)`.
pub fn mixture_kernel_eval(n: u32, y: f64, family: &MixtureFamily, event: &IntervalSet) -> Result<f64> {
    if n == 0 {
        return Err(Error::arg("n must be at least 1"));
    }
    family.validate()?;
    let a = family.alpha(n, y)?;
    let p2 = family.second_component(n, event);
    if a == 0.0 {
        return Ok(p2);
    }
    let p1 = family.first_component(n, event);
    if a == 1.0 {
        return Ok(p1);
    }
    Ok(a * p1 + (1.0 - a) * p2)
}

/// One probe set for the log-comparison hypotheses, evaluated at one `n`.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonProbe {
    pub set: String,
    #[serde(serialize_with = "crate::report::ext_f64")]
    pub first_rate: f64,
    #[serde(serialize_with = "crate::report::ext_f64")]
    pub second_rate: f64,
    #[serde(serialize_with = "crate::report::ext_f64")]
    pub first_complement_rate: f64,
    #[serde(serialize_with = "crate::report::ext_f64")]
    pub second_complement_rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisRow {
    pub n: u32,
    pub window: f64,
    pub alpha_mass: f64,
    pub complement_mass: f64,
    #[serde(serialize_with = "crate::report::ext_f64")]
    pub alpha_rate: f64,
    #[serde(serialize_with = "crate::report::ext_f64")]
    pub complement_rate: f64,
    pub probes: Vec<ComparisonProbe>,
}

/// Numerical check of the mixture theorem's hypotheses on an `n`-grid.
///
/// The window masses must stay bounded away from 0, which on a finite grid
/// is read as: `ln` of each mass varies by at most `1e-9` across the grid,
/// so `(1/n) log` of it is `O(1/n)`. The comparisons `μ¹ ⪰ μ²` on open
/// sets and on their complements are read at the largest `n` with slack
/// `slack`.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesesReport {
    pub family: MixtureFamily,
    pub rows: Vec<HypothesisRow>,
    pub slack: f64,
    pub window_masses_stationary: bool,
    pub comparisons_hold: bool,
}

impl HypothesesReport {
    pub fn holds(&self) -> bool {
        self.window_masses_stationary && self.comparisons_hold
    }
}

fn probe_sets(family: &MixtureFamily) -> Vec<(&'static str, IntervalSet)> {
    let one = |iv: Interval| IntervalSet::new(vec![iv]).expect("probe sets are well formed");
    if family.on_naturals() {
        vec![
            ("{1}", one(Interval::closed(1.0, 1.0))),
            ("[5,inf)", one(Interval { lo: 5.0, hi: f64::INFINITY, lo_closed: true, hi_closed: false })),
            ("[1,10]", one(Interval::closed(1.0, 10.0))),
        ]
    } else {
        vec![
            ("(1,inf)", one(Interval::open(1.0, f64::INFINITY))),
            ("(-inf,-0.5)", one(Interval::open(f64::NEG_INFINITY, -0.5))),
            ("(-0.25,0.25)", one(Interval::open(-0.25, 0.25))),
            ("(0.5,2)", one(Interval::open(0.5, 2.0))),
        ]
    }
}

fn rate(n: u32, p: f64) -> f64 {
    p.ln() / n as f64
}

pub fn check_hypotheses(family: &MixtureFamily, n_values: &[u32], slack: f64) -> Result<HypothesesReport> {
    family.validate()?;
    if n_values.is_empty() || n_values.contains(&0) {
        return Err(Error::arg("n grid must be nonempty with every n ≥ 1"));
    }
    let probes = probe_sets(family);
    let mut rows = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let (a, b) = family.window_masses(n)?;
        let probes = probes
            .iter()
            .map(|(name, set)| {
                let comp = set.complement();
                ComparisonProbe {
                    set: name.to_string(),
                    first_rate: rate(n, family.first_component(n, set)),
                    second_rate: rate(n, family.second_component(n, set)),
                    first_complement_rate: rate(n, family.first_component(n, &comp)),
                    second_complement_rate: rate(n, family.second_component(n, &comp)),
                }
            })
            .collect();
        rows.push(HypothesisRow {
            n,
            window: family.window(n)?,
            alpha_mass: a,
            complement_mass: b,
            alpha_rate: rate(n, a),
            complement_rate: rate(n, b),
            probes,
        });
    }
    let spread = |f: fn(&HypothesisRow) -> f64| {
        let logs: Vec<f64> = rows.iter().map(|r| f(r).ln()).collect();
        let lo = logs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if lo.is_finite() {
            hi - lo
        } else {
            f64::INFINITY
        }
    };
    let window_masses_stationary = spread(|r| r.alpha_mass) <= 1e-9 && spread(|r| r.complement_mass) <= 1e-9;
    let last = rows.last().expect("nonempty grid");
    let ge = |a: f64, b: f64| b == f64::NEG_INFINITY || a >= b - slack;
    let comparisons_hold = last
        .probes
        .iter()
        .all(|p| ge(p.first_rate, p.second_rate) && ge(p.first_complement_rate, p.second_complement_rate));
    Ok(HypothesesReport { family: *family, rows, slack, window_masses_stationary, comparisons_hold })
}

/// `(n, y_n = y + 1/n, cumulant, limit, gap, λr(y_n − y))`.
pub fn gaussian_table(family: &GaussianPairFamily, lam: f64, y: f64, n_values: &[u32]) -> Result<Table> {
    let mut t = Table::new(&["n", "y_n", "cumulant", "limit", "gap", "expected_gap"]);
    for &n in n_values {
        if n == 0 {
            return Err(Error::arg("n must be at least 1"));
        }
        let y_n = y + 1.0 / n as f64;
        let c = gaussian_cumulant(n, y_n, lam, family);
        let lim = gaussian_cumulant(n, y, lam, family);
        t.push(vec![
            n.to_string(),
            cell(y_n),
            cell(c),
            cell(lim),
            cell(c - lim),
            cell(lam * family.r * (y_n - y)),
        ]);
    }
    Ok(t)
}

/// Rows `(n, m, ratio, (1/n) log ratio, (n/m) Φ̄(√n), −inf I(U))`.
pub fn counterexample_table(n_values: &[u32], m_values: &[u32]) -> Result<Table> {
    let mut t = Table::new(&["n", "m", "ratio", "log_rate", "bound", "target"]);
    for &n in n_values {
        for &m in m_values.iter().filter(|&&m| m >= n) {
            let l = counterexample_log_ratio(n, m)?;
            t.push(vec![
                n.to_string(),
                m.to_string(),
                cell(l.exp()),
                cell(l / n as f64),
                cell(counterexample_log_bound(n, m).exp()),
                cell(-0.5),
            ]);
        }
    }
    Ok(t)
}

/// `η_n(0, ·) = δ_n` against `η_n(1, ·) = μ¹` on the sets `{k ≥ n}` and
/// `{k < n}` for the geometric family. No limit is claimed.
pub fn quench_table(n_values: &[u32]) -> Result<Table> {
    let fam = MixtureFamily::geometric_exponential();
    let mut t = Table::new(&["n", "eta0_ge_n", "eta0_lt_n", "rate0_ge_n", "rate0_lt_n", "eta1_ge_n", "rate1_ge_n"]);
    for &n in n_values {
        if n == 0 {
            return Err(Error::arg("n must be at least 1"));
        }
        let ge = IntervalSet::new(vec![Interval { lo: n as f64, hi: f64::INFINITY, lo_closed: true, hi_closed: false }])?;
        let lt = ge.complement();
        let e0ge = mixture_kernel_eval(n, 0.0, &fam, &ge)?;
        let e0lt = mixture_kernel_eval(n, 0.0, &fam, &lt)?;
        let e1ge = mixture_kernel_eval(n, 1.0, &fam, &ge)?;
        t.push(vec![
            n.to_string(),
            cell(e0ge),
            cell(e0lt),
            cell(rate(n, e0ge)),
            cell(rate(n, e0lt)),
            cell(e1ge),
            cell(rate(n, e1ge)),
        ]);
    }
    Ok(t)
}

pub fn epsilon_table(n_values: &[u32]) -> Result<Table> {
    let mut t = Table::new(&["n", "kappa", "epsilon", "ramp", "flat", "half_beta", "residual"]);
    for &n in n_values {
        let c = find_epsilon_n(n)?;
        t.push(vec![
            n.to_string(),
            cell(c.kappa),
            cell(c.epsilon),
            cell(c.ramp),
            cell(c.flat),
            cell(0.5 * c.beta),
            cell(c.residual),
        ]);
    }
    Ok(t)
}

/// Exact gap `cumulant(y_n) − cumulant(y) = λ r (y_n − y)` in rationals.
pub fn exact_gap_holds(y: &BigRational, y_n: &BigRational, lam: &BigRational, r: &BigRational) -> bool {
    let gap = gaussian_cumulant_exact(y_n, lam, r) - gaussian_cumulant_exact(y, lam, r);
    let expected = lam * r * (y_n - y);
    (gap - expected).is_zero()
}

/// `1 − 2/e + 1/e + 1/e = 1`: the window masses plus the tail beyond `1/n`.
pub fn exponential_total_mass(n: u32) -> Result<f64> {
    let (w1, w2) = exponential_mixture_weights(n)?;
    Ok(w1 + w2 + (-1.0_f64).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tail_routine_is_continuous_across_the_switch() {
        let below = ln_normal_tail(8.0);
        let above = ln_normal_tail(8.0 + 1e-9);
        assert!((below - above).abs() < 1e-7, "{below} {above}");
        // Φ̄(√1500) underflows linear space but not log space
        let l = ln_normal_tail(1500f64.sqrt());
        assert!(l.is_finite() && l < -700.0);
        assert!((ln_normal_tail(0.0) - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn cumulant_examples() {
        let f = GaussianPairFamily::new(1.0).unwrap();
        assert_eq!(gaussian_cumulant(7, 3.0, 0.0, &f), 0.0);
        assert_eq!(gaussian_cumulant(1, 0.0, 2.0, &f), 2.0);
        let h = GaussianPairFamily::new(0.5).unwrap();
        for n in [1u32, 10, 1000] {
            let y_n = 1.0 + 1.0 / n as f64;
            let c = gaussian_cumulant(n, y_n, 1.0, &h);
            assert!((c - (1.0 + 0.5 / n as f64)).abs() < 1e-15);
        }
        assert!(GaussianPairFamily::new(0.0).is_err());
    }

    #[test]
    fn exact_gap() {
        let q = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        assert!(exact_gap_holds(&q(1, 1), &q(1001, 1000), &q(3, 7), &q(-2, 5)));
    }

    #[test]
    fn rate_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(crate::sampling::DEFAULT_SEED);
        for _ in 0..1000 {
            let (x, y, r): (f64, f64, f64) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(0.1..2.0));
            let f = GaussianPairFamily::new(r).unwrap();
            let res = f.joint_rate(x, y) - f.section_infimum(y) - 0.5 * gaussian_rate(x, y, &f);
            assert!(res.abs() <= 1e-14 * (1.0 + x * x + y * y), "{res}");
        }
        let f = GaussianPairFamily::new(1.0).unwrap();
        assert_eq!(gaussian_rate(1.0, 0.0, &f), 1.0);
        assert_eq!(gaussian_rate(2.0, 2.0, &f), 0.0);
    }

    #[test]
    fn mixture_weights_are_constant() {
        let e1 = (-1.0f64).exp();
        for n in [1, 10, 100, 1000] {
            let (a, b) = exponential_mixture_weights(n).unwrap();
            assert!((a - (1.0 - 2.0 * e1)).abs() < 1e-15 && (b - e1).abs() < 1e-15);
            assert!((exponential_total_mass(n).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn ramp_series_matches_direct_form() {
        for a in [0.3, 0.49, 0.5, 0.51] {
            let direct = 1.0 - (-a as f64).exp() * (1.0 + a);
            assert!((ramp_mass(a) - direct).abs() < 1e-15, "{a}");
        }
        let a = 1e-8_f64;
        assert!((ramp_mass(a) - (a * a / 2.0 - a * a * a / 3.0)).abs() < 1e-31);
    }

    #[test]
    fn counterexample_is_bounded_and_decreasing() {
        let n = 50;
        let v: Vec<f64> = [50, 500, 5000].iter().map(|&m| counterexample_ratio(n, m).unwrap()).collect();
        assert!(v[0] > v[1] && v[1] > v[2]);
        for (&m, &x) in [50u32, 500, 5000].iter().zip(&v) {
            assert!(x.ln() <= counterexample_log_bound(n, m));
        }
        assert!(counterexample_log_ratio(n, 5000).unwrap() / (n as f64) < -0.5);
        assert!(counterexample_ratio(5, 4).is_err());
    }

    #[test]
    fn epsilon_calibration() {
        let mut prev = f64::INFINITY;
        for n in [1u32, 4, 16, 64, 256] {
            let c = find_epsilon_n(n).unwrap();
            assert!(c.residual <= 1e-10 && (c.ramp - c.flat).abs() <= 1e-10);
            assert!(0.0 < c.epsilon && c.epsilon < c.kappa);
            assert!(c.epsilon < prev);
            prev = c.epsilon;
        }
    }

    #[test]
    fn mixture_kernel_components() {
        let fam = MixtureFamily::gaussian_exponential();
        let u = IntervalSet::new(vec![Interval::open(0.0, 0.5)]).unwrap();
        // η_n(0,·) = δ_{1/n}
        assert_eq!(mixture_kernel_eval(4, 0.0, &fam, &u).unwrap(), 1.0);
        assert_eq!(mixture_kernel_eval(1, 0.0, &fam, &u).unwrap(), 0.0);
        // α_n(y) = 1 beyond 1/n
        let p = mixture_kernel_eval(4, 1.0, &fam, &u).unwrap();
        assert!((p - normal_interval(0.0, 1.0)).abs() < 1e-15);
        for f in [fam, MixtureFamily::gaussian_gaussian(), MixtureFamily::geometric_exponential()] {
            for y in [0.0, 0.01, 0.3, 2.0] {
                let w = mixture_kernel_eval(9, y, &f, &IntervalSet::whole_line()).unwrap();
                assert!((w - 1.0).abs() < 1e-15, "{f:?} {y} {w}");
            }
        }
        let geo = MixtureFamily::geometric_exponential();
        let ge = IntervalSet::new(vec![Interval { lo: 6.0, hi: f64::INFINITY, lo_closed: true, hi_closed: false }]).unwrap();
        assert_eq!(mixture_kernel_eval(6, 0.0, &geo, &ge).unwrap(), 1.0);
        assert_eq!(mixture_kernel_eval(6, 0.0, &geo, &ge.complement()).unwrap(), 0.0);
        assert!((mixture_kernel_eval(6, 1.0, &geo, &ge).unwrap() - 2f64.powi(-5)).abs() < 1e-16);
    }

    #[test]
    fn malformed_inputs() {
        assert!(IntervalSet::new(vec![Interval::open(1.0, 0.0)]).is_err());
        assert!(IntervalSet::new(vec![Interval::open(f64::NAN, 0.0)]).is_err());
        let bad = MixtureFamily { mu2: SecondComponent::DiracAtN, ..MixtureFamily::gaussian_exponential() };
        assert!(mixture_kernel_eval(3, 0.5, &bad, &IntervalSet::whole_line()).is_err());
        let fam = MixtureFamily::gaussian_exponential();
        assert!(mixture_kernel_eval(3, -0.5, &fam, &IntervalSet::whole_line()).is_err());
    }

    #[test]
    fn interval_set_algebra() {
        let s = IntervalSet::new(vec![Interval::closed(2.0, 3.0), Interval::open(0.0, 2.0), Interval::open(5.0, 6.0)]).unwrap();
        assert_eq!(s.parts().len(), 2);
        assert!(s.contains(2.0) && s.contains(3.0) && !s.contains(0.0));
        let c = s.complement();
        assert!(c.contains(0.0) && !c.contains(1.0) && c.contains(5.0) && c.contains(4.0) && !c.contains(5.5));
        for x in [-1.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 5.5, 6.0, 7.0] {
            assert_ne!(s.contains(x), c.contains(x), "{x}");
        }
    }

    #[test]
    fn hypotheses_hold_for_every_family() {
        let grid = [10, 100, 1000];
        for f in [
            MixtureFamily::gaussian_exponential(),
            MixtureFamily::gaussian_gaussian(),
            MixtureFamily::gaussian_gaussian_atom(),
            MixtureFamily::geometric_exponential(),
        ] {
            let rep = check_hypotheses(&f, &grid, 1e-2).unwrap();
            assert!(rep.holds(), "{rep:#?}");
        }
        let g = MixtureFamily::gaussian_gaussian().window_masses(16).unwrap();
        let beta = calibration_mass();
        // 1 − α_n vanishes off W_n, so its mass is the calibrated β/2
        assert!((g.1 - 0.5 * beta).abs() < 1e-10 && g.0 + g.1 < beta);
    }
}
