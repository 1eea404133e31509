//! LDP experiments on finite alphabets: convergence of
//! `a_n = (1/n) log η_n(ψ_n, A)` inside its exact finite-n envelope, and
//! finite-n scans of the uniform conditions over small conditioning balls.
//!
//! Everything here is exact summation at fixed `n`. Limits are only ever
//! approximated by the last few configured `n`, and reports say so.

use std::collections::HashMap;
use std::rc::Rc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use crate::empirical::nearest_empirical;
use crate::empirical::{enumerate_empirical, Caps, EmpiricalMeasure};
use crate::error::{Error, Result};
use crate::finite_measures::{log_sum, tv_slices, Dist, DistJson, FiniteMeasure, JointDist, JointJson};
use crate::kernels::{coupling_sweep, multinomial_law, SweepEntry};
use crate::rate::{i_projection, inf_rate_over_set, IpfOptions, SetDescriptor};
use crate::report::{ext_f64, ext_opt};

/// How `ψ_n ∈ P_emp^n(S)` is chosen for each `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum PsiRule {
    NearestEmpirical,
    /// One count vector per entry of `n_values`.
    Explicit { counts: Vec<Vec<u32>> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub kernel_tol: f64,
    pub rate_tol: f64,
    pub envelope_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { kernel_tol: 1e-10, rate_tol: 1e-12, envelope_slack: 0.02 }
    }
}

/// A conditioning ball `B(center, delta)` in `P(S)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub delta: f64,
}

/// A Sanov-type experiment.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub lambda: JointDist,
    pub psi: Dist,
    pub psi_rule: PsiRule,
    pub event: SetDescriptor,
    pub n_values: Vec<u32>,
    pub tolerances: Tolerances,
    /// Grid resolution for rate infima over sets.
    pub resolution: f64,
    pub caps: Caps,
    pub epsilons: Vec<f64>,
    pub ball_grid: Vec<Ball>,
}

/// JSON form of [`ScenarioConfig`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub lambda: JointJson,
    pub psi: DistJson,
    #[serde(default = "default_rule")]
    pub psi_sequence: PsiRule,
    pub event: SetDescriptor,
    pub n_values: Vec<u32>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    #[serde(default)]
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub ball_grid: Vec<Ball>,
}

fn default_rule() -> PsiRule {
    PsiRule::NearestEmpirical
}

fn default_resolution() -> f64 {
    0.01
}

impl ScenarioFile {
    pub fn into_config(self, caps: Caps) -> Result<ScenarioConfig> {
        let cfg = ScenarioConfig {
            lambda: self.lambda.to_joint()?,
            psi: self.psi.to_dist()?,
            psi_rule: self.psi_sequence,
            event: self.event,
            n_values: self.n_values,
            tolerances: self.tolerances,
            resolution: self.resolution,
            caps,
            epsilons: self.epsilons,
            ball_grid: self.ball_grid,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ScenarioConfig {
    pub fn new(lambda: JointDist, psi: Dist, event: SetDescriptor, n_values: Vec<u32>) -> Self {
        Self {
            lambda,
            psi,
            psi_rule: PsiRule::NearestEmpirical,
            event,
            n_values,
            tolerances: Tolerances::default(),
            resolution: default_resolution(),
            caps: Caps::default(),
            epsilons: Vec::new(),
            ball_grid: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() || self.n_values[0] == 0 || self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::arg("n_values must be positive and strictly increasing"));
        }
        if self.psi.alphabet() != self.lambda.cols() {
            return Err(Error::arg("ψ does not live on the column alphabet of λ"));
        }
        self.lambda.check_column_support()?;
        self.event.validate(self.lambda.nrows())?;
        if let PsiRule::Explicit { counts } = &self.psi_rule {
            if counts.len() != self.n_values.len() {
                return Err(Error::arg("explicit ψ_n list must have one entry per n"));
            }
            for (c, &n) in counts.iter().zip(&self.n_values) {
                if c.len() != self.lambda.ncols() || c.iter().map(|&x| x as u64).sum::<u64>() != n as u64 {
                    return Err(Error::arg(format!("explicit ψ_n for n={n} is not in P_emp^n(S)")));
                }
            }
        }
        if !(self.resolution > 0.0) {
            return Err(Error::arg("resolution must be positive"));
        }
        for b in &self.ball_grid {
            if b.center.len() != self.lambda.ncols() || !(b.delta > 0.0) {
                return Err(Error::arg("ball grid entries need a center on S and a positive radius"));
            }
        }
        Ok(())
    }

    fn psi_n(&self, idx: usize) -> Result<EmpiricalMeasure> {
        let n = self.n_values[idx];
        match &self.psi_rule {
            PsiRule::NearestEmpirical => nearest_empirical(&self.psi, n),
            PsiRule::Explicit { counts } => EmpiricalMeasure::new(self.lambda.cols().clone(), counts[idx].clone()),
        }
    }
}

/// One row of a convergence experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub n: u32,
    pub psi_n: Vec<u32>,
    #[serde(serialize_with = "ext_f64")]
    pub a_n: f64,
    #[serde(serialize_with = "ext_f64")]
    pub envelope_lo: f64,
    #[serde(serialize_with = "ext_f64")]
    pub envelope_hi: f64,
    /// `−inf I(A°)`.
    #[serde(serialize_with = "ext_f64")]
    pub target_lo: f64,
    /// `−inf I(Ā)`.
    #[serde(serialize_with = "ext_f64")]
    pub target_hi: f64,
    #[serde(skip)]
    pub wall_ms: f64,
}

impl ConvergenceReport {
    pub fn contained(&self) -> bool {
        self.envelope_lo <= self.a_n && self.a_n <= self.envelope_hi
    }

    /// `(2M/n) log(n+1)`.
    pub fn envelope_width(&self, m: usize) -> f64 {
        2.0 * m as f64 / self.n as f64 * (self.n as f64 + 1.0).ln()
    }

    /// Distance from `a_n` to the target interval `[target_lo, target_hi]`.
    pub fn target_gap(&self) -> f64 {
        if self.a_n < self.target_lo {
            self.target_lo - self.a_n
        } else if self.a_n > self.target_hi {
            self.a_n - self.target_hi
        } else {
            0.0
        }
    }
}

/// Reports for every completed `n`, plus the error that stopped the run, if
/// any.
#[derive(Debug)]
pub struct SanovRun {
    pub reports: Vec<ConvergenceReport>,
    pub failure: Option<(u32, Error)>,
}

fn log_mass(entries: &[&SweepEntry]) -> f64 {
    if entries.is_empty() {
        return f64::NEG_INFINITY;
    }
    log_sum(&entries.iter().map(|e| e.log_mass).collect::<Vec<_>>()).unwrap_or(f64::NEG_INFINITY)
}

fn phi_dist(lambda: &JointDist, counts: &[u32]) -> Dist {
    Dist::from_counts(lambda.rows().clone(), counts).expect("counts")
}

/// `−inf I(A°)` and `−inf I(Ā)`.
pub fn rate_targets(lambda: &JointDist, psi: &Dist, event: &SetDescriptor, resolution: f64) -> Result<(f64, f64)> {
    let lo = -inf_rate_over_set(lambda, psi, &event.interior(), resolution)?.value;
    let hi = -inf_rate_over_set(lambda, psi, &event.closure(), resolution)?.value;
    Ok((lo, hi))
}

fn one_n(cfg: &ScenarioConfig, idx: usize, targets: (f64, f64)) -> Result<ConvergenceReport> {
    let start = Instant::now();
    let n = cfg.n_values[idx];
    let lambda = &cfg.lambda;
    let m = lambda.m() as f64;
    let psi_n = cfg.psi_n(idx)?;
    let sweep = coupling_sweep(n, &psi_n, lambda, &cfg.caps)?;
    let all: Vec<&SweepEntry> = sweep.iter().collect();
    let in_a: Vec<&SweepEntry> = sweep.iter().filter(|e| cfg.event.contains(&phi_dist(lambda, &e.phi))).collect();
    let nf = n as f64;
    let total = log_mass(&all);
    let a_n = (log_mass(&in_a) - total) / nf;
    let emp_all = all.iter().map(|e| e.min_entropy).fold(f64::INFINITY, f64::min);
    let emp_a = in_a.iter().map(|e| e.min_entropy).fold(f64::INFINITY, f64::min);
    // inf over all couplings with R-marginal in A ∩ P_emp^n(R), S-marginal ψ_n
    let psi_dist = psi_n.to_dist();
    let opts = IpfOptions { tol: cfg.tolerances.rate_tol, ..IpfOptions::default() };
    let mut all_a = f64::INFINITY;
    for e in &in_a {
        let j = i_projection(lambda, &phi_dist(lambda, &e.phi), &psi_dist, &opts)?.value;
        all_a = all_a.min(j);
    }
    let width = 2.0 * m / nf * (nf + 1.0).ln();
    Ok(ConvergenceReport {
        n,
        psi_n: psi_n.counts().to_vec(),
        a_n,
        envelope_lo: -width - emp_a + emp_all,
        envelope_hi: width - all_a + emp_all,
        target_lo: targets.0,
        target_hi: targets.1,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Runs the convergence experiment for every configured `n`.
pub fn sanov_convergence(cfg: &ScenarioConfig) -> Result<SanovRun> {
    cfg.validate()?;
    let targets = rate_targets(&cfg.lambda, &cfg.psi, &cfg.event, cfg.resolution)?;
    let mut reports = Vec::new();
    for idx in 0..cfg.n_values.len() {
        match one_n(cfg, idx, targets) {
            Ok(r) => reports.push(r),
            Err(e) => return Ok(SanovRun { reports, failure: Some((cfg.n_values[idx], e)) }),
        }
    }
    Ok(SanovRun { reports, failure: None })
}

/// `(1/n) log P(L_n ∈ A)` for `n` i.i.d. draws from `ρ`: the unconditioned
/// Sanov quantity that a product `λ` must reproduce.
pub fn unconditioned_rate(n: u32, rho: &Dist, event: &SetDescriptor, caps: &Caps) -> Result<f64> {
    let law = multinomial_law(n, rho, caps)?;
    let hits: Vec<f64> = law.iter().filter(|(phi, _)| event.contains(&phi.to_dist())).map(|(_, lp)| *lp).collect();
    Ok(if hits.is_empty() { f64::NEG_INFINITY } else { log_sum(&hits)? / n as f64 })
}

/// A conditional probability that may be undefined because the
/// conditioning event has no mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Conditional {
    Defined {
        #[serde(serialize_with = "ext_f64")]
        value: f64,
    },
    Undefined,
}

impl Conditional {
    pub fn value(&self) -> Option<f64> {
        match self {
            Conditional::Defined { value } => Some(*value),
            Conditional::Undefined => None,
        }
    }
}

/// Conditional probabilities `μ_n(A × B(z,δ)) / μ_n(P(R) × B(z,δ))` at one
/// `n`, with the per-`ζ` sweeps cached across queries.
pub struct BallConditioner<'a> {
    n: u32,
    lambda: &'a JointDist,
    caps: Caps,
    zetas: Vec<EmpiricalMeasure>,
    sweeps: HashMap<usize, Rc<Vec<SweepEntry>>>,
}

impl<'a> BallConditioner<'a> {
    pub fn new(n: u32, lambda: &'a JointDist, caps: &Caps) -> Result<Self> {
        lambda.check_column_support()?;
        Ok(Self { n, lambda, caps: *caps, zetas: enumerate_empirical(n, lambda.cols(), caps)?, sweeps: HashMap::new() })
    }

    fn sweep(&mut self, i: usize) -> Result<Rc<Vec<SweepEntry>>> {
        if let Some(s) = self.sweeps.get(&i) {
            return Ok(s.clone());
        }
        let s = Rc::new(coupling_sweep(self.n, &self.zetas[i], self.lambda, &self.caps)?);
        self.sweeps.insert(i, s.clone());
        Ok(s)
    }

    /// `ln` of the conditional probability, or `None` if the ball carries
    /// no mass at this `n`.
    pub fn log_conditional(&mut self, event: &SetDescriptor, center: &[f64], delta: f64) -> Result<Option<f64>> {
        if !(delta > 0.0) {
            return Err(Error::arg("ball radius must be positive"));
        }
        let mut num = Vec::new();
        let mut den = Vec::new();
        for i in 0..self.zetas.len() {
            if !(tv_slices(self.zetas[i].to_dist().weights(), center) < delta) {
                continue;
            }
            for e in self.sweep(i)?.iter() {
                den.push(e.log_mass);
                if event.contains(&phi_dist(self.lambda, &e.phi)) {
                    num.push(e.log_mass);
                }
            }
        }
        if den.is_empty() {
            return Ok(None);
        }
        let d = log_sum(&den)?;
        let nn = if num.is_empty() { f64::NEG_INFINITY } else { log_sum(&num)? };
        Ok(Some((nn - d).min(0.0)))
    }
}

/// `μ_n(A × B(z,δ)) / μ_n(P(R) × B(z,δ))`, or [`Conditional::Undefined`]
/// when no `ζ ∈ P_emp^n(S)` of positive mass lies in the open ball.
pub fn conditional_ball_probability(
    n: u32,
    lambda: &JointDist,
    event: &SetDescriptor,
    center: &Dist,
    delta: f64,
    caps: &Caps,
) -> Result<Conditional> {
    if center.alphabet() != lambda.cols() {
        return Err(Error::arg("ball center does not live on the column alphabet of λ"));
    }
    let mut c = BallConditioner::new(n, lambda, caps)?;
    Ok(match c.log_conditional(event, center.weights(), delta)? {
        Some(l) => Conditional::Defined { value: l.exp() },
        None => Conditional::Undefined,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanValue {
    pub n: u32,
    /// Infimum (A2) or supremum (B2) over admissible balls of
    /// `(1/n) log` of the conditional probability; absent if every
    /// admissible ball was undefined at this `n`.
    #[serde(serialize_with = "ext_opt")]
    pub value: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsilonRow {
    pub epsilon: f64,
    pub admissible_balls: usize,
    pub undefined: usize,
    pub per_n: Vec<ScanValue>,
    /// Min (A2) or max (B2) of the per-`n` values over the last three `n`.
    #[serde(serialize_with = "ext_opt")]
    pub proxy: Option<f64>,
}

/// Finite-n evidence for one of the uniform conditions.
#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub condition: &'static str,
    pub label: &'static str,
    pub rows: Vec<EpsilonRow>,
    /// Max over `ε` (A2) or min over `ε` (B2) of the row proxies.
    #[serde(serialize_with = "ext_opt")]
    pub proxy: Option<f64>,
    /// `−inf I(U)` (A2) or `−inf I(W)` (B2).
    #[serde(serialize_with = "ext_f64")]
    pub target: f64,
    /// `proxy − target` (A2) or `target − proxy` (B2); nonnegative when
    /// the finite evidence agrees with the condition.
    #[serde(serialize_with = "ext_opt")]
    pub margin: Option<f64>,
    pub undefined_total: usize,
}

const PROXY_LABEL: &str = "finite-n proxy over the last three n-values; evidence, not a limit";

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Lower,
    Upper,
}

fn scan(cfg: &ScenarioConfig, epsilons: &[f64], grid: &[Ball], side: Side) -> Result<ScanReport> {
    cfg.validate()?;
    if epsilons.is_empty() {
        return Err(Error::arg("scan needs at least one ε"));
    }
    let event = match side {
        Side::Lower => cfg.event.closure(),
        Side::Upper => cfg.event.interior(),
    };
    let tail: Vec<u32> = cfg.n_values.iter().rev().take(3).rev().copied().collect();
    let mut conditioners = tail
        .iter()
        .map(|&n| BallConditioner::new(n, &cfg.lambda, &cfg.caps))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut undefined_total = 0;
    for &eps in epsilons {
        if !(eps > 0.0) {
            return Err(Error::arg("ε must be positive"));
        }
        let admissible: Vec<&Ball> = grid
            .iter()
            .filter(|b| b.delta < eps && tv_slices(&b.center, cfg.psi.weights()) + b.delta <= eps)
            .collect();
        let mut undefined = 0;
        let mut per_n = Vec::new();
        for (k, &n) in tail.iter().enumerate() {
            let mut best: Option<f64> = None;
            for b in &admissible {
                match conditioners[k].log_conditional(&event, &b.center, b.delta)? {
                    None => undefined += 1,
                    Some(l) => {
                        let v = l / n as f64;
                        best = Some(match (best, side) {
                            (None, _) => v,
                            (Some(x), Side::Lower) => x.min(v),
                            (Some(x), Side::Upper) => x.max(v),
                        });
                    }
                }
            }
            per_n.push(ScanValue { n, value: best });
        }
        let vals = per_n.iter().filter_map(|v| v.value);
        let proxy = match side {
            Side::Lower => vals.reduce(f64::min),
            Side::Upper => vals.reduce(f64::max),
        };
        undefined_total += undefined;
        rows.push(EpsilonRow { epsilon: eps, admissible_balls: admissible.len(), undefined, per_n, proxy });
    }
    let proxies = rows.iter().filter_map(|r| r.proxy);
    let proxy = match side {
        Side::Lower => proxies.reduce(f64::max),
        Side::Upper => proxies.reduce(f64::min),
    };
    let target = -inf_rate_over_set(&cfg.lambda, &cfg.psi, &cfg.event, cfg.resolution)?.value;
    let margin = proxy.map(|p| {
        let d = match side {
            Side::Lower => p - target,
            Side::Upper => target - p,
        };
        // −∞ against −∞ agrees exactly
        if d.is_nan() { 0.0 } else { d }
    });
    Ok(ScanReport {
        condition: if side == Side::Lower { "A2" } else { "B2" },
        label: PROXY_LABEL,
        rows,
        proxy,
        target,
        margin,
        undefined_total,
    })
}

/// Lower-bound condition: `sup_ε liminf_n inf_{B(z,δ) ⊂ B(ψ,ε)} (1/n) log
/// μ_n(Ū × S | R × B(z,δ))` against `−inf I(U)`, with `U` the configured
/// event.
pub fn scan_condition_a2(cfg: &ScenarioConfig, epsilons: &[f64], grid: &[Ball]) -> Result<ScanReport> {
    scan(cfg, epsilons, grid, Side::Lower)
}

/// Upper-bound condition: `inf_ε limsup_n sup_{B(z,δ) ⊂ B(ψ,ε)} (1/n) log
/// μ_n(W° × S | R × B(z,δ))` against `−inf I(W)`, with `W` the configured
/// event.
pub fn scan_condition_b2(cfg: &ScenarioConfig, epsilons: &[f64], grid: &[Ball]) -> Result<ScanReport> {
    scan(cfg, epsilons, grid, Side::Upper)
}

/// Balls centred on a grid of points around `ψ` (for `#S = 2`, along the
/// segment; otherwise `ψ` itself) with the given radii.
pub fn default_ball_grid(psi: &Dist, radii: &[f64], offsets: &[f64]) -> Vec<Ball> {
    let mut out = Vec::new();
    let k = psi.len();
    for &off in offsets {
        let center: Vec<f64> = if k == 2 {
            let x = (psi.get(0) + off).clamp(0.0, 1.0);
            vec![x, 1.0 - x]
        } else if off == 0.0 {
            psi.weights().to_vec()
        } else {
            continue;
        };
        for &d in radii {
            out.push(Ball { center: center.clone(), delta: d });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rate::Comparison;

    fn lam() -> JointDist {
        JointDist::from_rows(&[vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap()
    }

    fn product() -> JointDist {
        let r = Dist::new(crate::finite_measures::Alphabet::numbered("r", 2), vec![0.3, 0.7]).unwrap();
        let s = Dist::new(crate::finite_measures::Alphabet::numbered("s", 2), vec![0.6, 0.4]).unwrap();
        r.product(&s)
    }

    #[test]
    fn whole_simplex_gives_zero() {
        let l = product();
        let cfg = ScenarioConfig::new(l.clone(), l.col_marginal(), SetDescriptor::Everything, vec![5, 10, 20]);
        let run = sanov_convergence(&cfg).unwrap();
        assert!(run.failure.is_none());
        for r in &run.reports {
            assert!(r.a_n.abs() < 1e-12 && r.contained());
            assert!(r.target_lo.abs() < 1e-12 && r.target_hi.abs() < 1e-12);
        }
    }

    #[test]
    fn envelope_contains_a_n() {
        let l = lam();
        let psi = Dist::uniform(l.cols().clone());
        let ev = SetDescriptor::Halfspace { coord: 0, cmp: Comparison::Ge, threshold: 0.8 };
        let cfg = ScenarioConfig::new(l, psi, ev, vec![10, 20, 50, 100]);
        let run = sanov_convergence(&cfg).unwrap();
        for r in &run.reports {
            assert!(r.contained(), "{r:?}");
            assert!(r.target_lo <= r.target_hi);
        }
    }

    #[test]
    fn empty_event() {
        let l = lam();
        let cfg = ScenarioConfig::new(l.clone(), l.col_marginal(), SetDescriptor::Nothing, vec![4, 8]);
        let run = sanov_convergence(&cfg).unwrap();
        for r in &run.reports {
            assert_eq!(r.a_n, f64::NEG_INFINITY);
            assert!(r.contained());
        }
    }

    #[test]
    fn ball_probability_edge_cases() {
        let l = lam();
        let caps = Caps::default();
        let ev = SetDescriptor::Halfspace { coord: 0, cmp: Comparison::Ge, threshold: 0.5 };
        let z = Dist::uniform(l.cols().clone());
        let full = conditional_ball_probability(4, &l, &ev, &z, 1.0, &caps).unwrap().value().unwrap();
        let all = |_: &Dist| true;
        let a = |d: &Dist| d.get(0) >= 0.5;
        let direct = crate::empirical::joint_empirical_law(4, &l, &a, &all, &caps).unwrap();
        assert!((full - direct).abs() < 1e-12);
        // no element of P_emp^3 within .1 of (.5,.5)
        assert_eq!(conditional_ball_probability(3, &l, &ev, &z, 0.1, &caps).unwrap(), Conditional::Undefined);
    }

    #[test]
    fn scans_on_trivial_sets() {
        let l = product();
        let mut cfg = ScenarioConfig::new(l.clone(), l.col_marginal(), SetDescriptor::Everything, vec![20, 30, 40]);
        let grid = default_ball_grid(&cfg.psi, &[0.02, 0.05], &[0.0, 0.03]);
        let a = scan_condition_a2(&cfg, &[0.2, 0.1], &grid).unwrap();
        assert!(a.proxy.unwrap().abs() < 1e-12 && a.target.abs() < 1e-12);
        let b = scan_condition_b2(&cfg, &[0.2, 0.1], &grid).unwrap();
        assert!(b.proxy.unwrap().abs() < 1e-12);
        cfg.event = SetDescriptor::Nothing;
        let a = scan_condition_a2(&cfg, &[0.2], &grid).unwrap();
        assert_eq!(a.proxy, Some(f64::NEG_INFINITY));
        assert_eq!(a.target, f64::NEG_INFINITY);
        assert_eq!(a.margin, Some(0.0));
    }

    #[test]
    fn scenario_file_parses() {
        let text = r#"{
            "lambda": {"rows": ["r1","r2"], "cols": ["s1","s2"], "matrix": [[0.4,0.1],[0.1,0.4]]},
            "psi": {"alphabet": ["s1","s2"], "weights": [0.5, 0.5]},
            "event": {"kind": "halfspace", "coord": 0, "cmp": "ge", "threshold": 0.8},
            "n_values": [10, 20]
        }"#;
        let f: ScenarioFile = serde_json::from_str(text).unwrap();
        let cfg = f.into_config(Caps::default()).unwrap();
        assert_eq!(cfg.psi_rule, PsiRule::NearestEmpirical);
        let bad = text.replace("[10, 20]", "[20, 10]");
        let f: ScenarioFile = serde_json::from_str(&bad).unwrap();
        assert!(f.into_config(Caps::default()).is_err());
    }
}
