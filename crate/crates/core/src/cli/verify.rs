//! The `verify` suite: every invariant checked on seeded instances, with a
//! second route wherever one exists. Output carries no timings so repeated
//! runs are byte-identical.

use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::Mode;
use crate::empirical::{enumerate_couplings, log_multinomial_prob, nearest_empirical, Caps};
use crate::error::Result;
use crate::exact::ExactJoint;
use crate::finite_measures::{relative_entropy, Dist, FiniteMeasure, JointDist};
use crate::gallery::{self, GaussianPairFamily, MixtureFamily};
use crate::harness::{sanov_convergence, ScenarioConfig};
use crate::kernels::{conditional_r_law, eta_law, verify_prcp_identity, verify_prcp_identity_exact};
use crate::rate::{column_scaling_projection, i_projection, inf_over_s_margin, Comparison, IpfOptions, SetDescriptor};
use crate::report::ext_f64;
use crate::rounding::{check_match, match_s_margin};
use crate::sampling;

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Worst observed value of the suite's metric.
    #[serde(serialize_with = "ext_f64")]
    pub worst: f64,
    /// What `worst` measures and the bound it must respect.
    pub criterion: &'static str,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySummary {
    pub suites: Vec<SuiteResult>,
    pub suite_count: usize,
    pub case_count: usize,
    pub failed_suites: usize,
    pub passed: bool,
}

struct Tally {
    name: &'static str,
    criterion: &'static str,
    cases: usize,
    failures: usize,
    worst: f64,
    /// `true` when larger metric values are worse.
    larger_is_worse: bool,
}

impl Tally {
    fn new(name: &'static str, criterion: &'static str, larger_is_worse: bool) -> Self {
        let worst = if larger_is_worse { 0.0 } else { f64::INFINITY };
        Tally { name, criterion, cases: 0, failures: 0, worst, larger_is_worse }
    }

    fn record(&mut self, metric: f64, ok: bool) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
        }
        self.worst = if self.larger_is_worse { self.worst.max(metric) } else { self.worst.min(metric) };
    }

    fn done(self) -> SuiteResult {
        SuiteResult { name: self.name, cases: self.cases, failures: self.failures, worst: self.worst, criterion: self.criterion }
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn run_verify(mode: Mode, seed: u64, caps: &Caps) -> Result<VerifySummary> {
    let suites = vec![
        prcp(mode, seed, caps)?,
        kernel_routes(seed, caps)?,
        sandwich(seed, caps)?,
        ipf_oracle(seed)?,
        support_feasibility(seed)?,
        one_marginal(seed)?,
        sanov(caps)?,
        rounding(seed)?,
        gaussian(seed),
        exponential_weights()?,
        counterexample()?,
        epsilon()?,
        hypotheses()?,
    ];
    let failed_suites = suites.iter().filter(|s| !s.passed()).count();
    Ok(VerifySummary {
        suite_count: suites.len(),
        case_count: suites.iter().map(|s| s.cases).sum(),
        failed_suites,
        passed: failed_suites == 0,
        suites,
    })
}

fn threshold_events<R: Rng>(rng: &mut R, nr: usize, ns: usize) -> (usize, f64, usize, f64) {
    let levels = [0.0, 1.0 / 3.0, 0.5, 2.0 / 3.0];
    (rng.gen_range(0..nr), levels[rng.gen_range(0..4)], rng.gen_range(0..ns), levels[rng.gen_range(1..4)])
}

fn prcp(mode: Mode, seed: u64, caps: &Caps) -> Result<SuiteResult> {
    let mut t = match mode {
        Mode::Double => Tally::new("prcp_identity", "|μ_n(A×B) − Σ_B η_n(ζ,A) μ_n(ζ)| ≤ 1e-12", true),
        Mode::Exact => Tally::new("prcp_identity", "double residual ≤ 1e-12 and exact residual = 0", true),
    };
    let mut rng = rng_for(seed, 1);
    for _ in 0..20 {
        let (nr, ns) = (sampling::size(&mut rng, 2, 3), sampling::size(&mut rng, 2, 3));
        let n = sampling::size(&mut rng, 1, 6) as u32;
        let lambda = sampling::joint_with_column_support(&mut rng, nr, ns, 0.25);
        let (ri, ta, si, tb) = threshold_events(&mut rng, nr, ns);
        let a = move |d: &Dist| d.get(ri) >= ta;
        let b = move |d: &Dist| d.get(si) <= tb;
        let res = verify_prcp_identity(n, &lambda, &a, &b, caps)?;
        let mut ok = res <= 1e-12;
        if mode == Mode::Exact {
            let ex = ExactJoint::from_joint(&lambda);
            ok &= verify_prcp_identity_exact(n, &ex, &a, &b, caps)?.is_zero();
        }
        t.record(res, ok);
    }
    Ok(t.done())
}

fn kernel_routes(seed: u64, caps: &Caps) -> Result<SuiteResult> {
    let mut t = Tally::new("kernel_routes", "max |table-route η − conditioning-route η| ≤ 1e-10", true);
    let mut rng = rng_for(seed, 2);
    for _ in 0..10 {
        let (nr, ns) = (sampling::size(&mut rng, 2, 3), sampling::size(&mut rng, 2, 3));
        let n = sampling::size(&mut rng, 2, 8) as u32;
        let lambda = sampling::joint_with_column_support(&mut rng, nr, ns, 0.25);
        let target = sampling::dist(&mut rng, lambda.cols().clone());
        let zeta = nearest_empirical(&target, n)?;
        let theta = crate::finite_measures::conditional_theta(&lambda)?;
        let tables = eta_law(n, &zeta, &theta, caps)?;
        let cond = conditional_r_law(n, &zeta, &lambda, caps)?;
        let mut worst = 0.0f64;
        for (phi, lp) in &tables {
            let other = cond.iter().find(|(q, _)| q.counts() == phi.counts()).map_or(0.0, |(_, l)| l.exp());
            worst = worst.max((lp.exp() - other).abs());
        }
        t.record(worst, worst <= 1e-10);
    }
    Ok(t.done())
}

fn sandwich(seed: u64, caps: &Caps) -> Result<SuiteResult> {
    let mut t = Tally::new("sandwich", "min log-slack of (n+1)^-M e^{-nH} ≤ μ_n(ν) ≤ e^{-nH}, ≥ -1e-9", false);
    let mut rng = rng_for(seed, 3);
    for _ in 0..6 {
        let (nr, ns) = (sampling::size(&mut rng, 1, 2), sampling::size(&mut rng, 1, 3));
        let lambda = sampling::joint_full_support(&mut rng, nr, ns);
        let m = (nr * ns) as f64;
        for n in 1..=6u32 {
            let mut worst = f64::INFINITY;
            for nu in enumerate_couplings(n, lambda.rows(), lambda.cols(), caps)? {
                let lp = log_multinomial_prob(&nu, &lambda)?;
                let h = relative_entropy(&nu.to_joint(), &lambda)?;
                let nf = n as f64;
                let lower = lp - (-m * (nf + 1.0).ln() - nf * h);
                let upper = -nf * h - lp;
                worst = worst.min(lower).min(upper);
            }
            t.record(worst, worst >= -1e-9);
        }
    }
    Ok(t.done())
}

/// `min_x H(ξ(x) | λ)` over the one free entry of a 2×2 coupling with
/// margins `(ρ, σ)`, by golden-section search.
fn golden_two_by_two(lambda: &JointDist, rho: &Dist, sigma: &Dist) -> f64 {
    let (r0, s0) = (rho.get(0), sigma.get(0));
    let h = |x: f64| {
        let xi = [x, r0 - x, s0 - x, 1.0 - r0 - s0 + x];
        xi.iter()
            .zip(lambda.weights())
            .map(|(&p, &l)| if p > 0.0 { p * (p / l).ln() } else { 0.0 })
            .sum::<f64>()
    };
    let (mut a, mut b) = ((r0 + s0 - 1.0).max(0.0), r0.min(s0));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if h(c) < h(d) {
            b = d;
        } else {
            a = c;
        }
    }
    h(0.5 * (a + b))
}

fn ipf_oracle(seed: u64) -> Result<SuiteResult> {
    let mut t = Tally::new("ipf_vs_golden_section", "|J_ipf − J_oracle| ≤ 1e-8 with margin residual ≤ 1e-10", true);
    let mut rng = rng_for(seed, 4);
    for _ in 0..50 {
        let lambda = sampling::joint_full_support(&mut rng, 2, 2);
        let rho = sampling::dist(&mut rng, lambda.rows().clone());
        let sigma = sampling::dist(&mut rng, lambda.cols().clone());
        let j = i_projection(&lambda, &rho, &sigma, &IpfOptions::default())?;
        let gap = (j.value - golden_two_by_two(&lambda, &rho, &sigma)).abs();
        t.record(gap, gap <= 1e-8 && j.margin_residual <= 1e-10);
    }
    Ok(t.done())
}

/// Feasibility of a transportation polytope on a support pattern by Hall's
/// condition over all row subsets.
fn hall_feasible(support: &[bool], rho: &[f64], sigma: &[f64]) -> bool {
    let (nr, ns) = (rho.len(), sigma.len());
    (1u32..(1 << nr)).all(|mask| {
        let rows = (0..nr).filter(|r| mask & (1 << r) != 0);
        let supply: f64 = rows.clone().map(|r| rho[r]).sum();
        let reach: f64 = (0..ns).filter(|&s| rows.clone().any(|r| support[r * ns + s])).map(|s| sigma[s]).sum();
        supply <= reach + 1e-12
    })
}

fn support_feasibility(seed: u64) -> Result<SuiteResult> {
    let mut t = Tally::new("support_feasibility", "J = +∞ exactly when Hall's condition fails (mismatches)", true);
    let mut rng = rng_for(seed, 5);
    for _ in 0..40 {
        let (nr, ns) = (sampling::size(&mut rng, 2, 3), sampling::size(&mut rng, 2, 3));
        let lambda = sampling::joint(&mut rng, nr, ns, 0.5);
        let rho = sampling::dist(&mut rng, lambda.rows().clone());
        let sigma = sampling::dist(&mut rng, lambda.cols().clone());
        let support: Vec<bool> = lambda.weights().iter().map(|&w| w > 0.0).collect();
        let feasible = hall_feasible(&support, rho.weights(), sigma.weights());
        let j = i_projection(&lambda, &rho, &sigma, &IpfOptions::default())?;
        let agree = feasible == j.value.is_finite();
        t.record(if agree { 0.0 } else { 1.0 }, agree);
    }
    Ok(t.done())
}

fn one_marginal(seed: u64) -> Result<SuiteResult> {
    let mut t = Tally::new("one_marginal", "|closed form − H(ψ|λ_S)| and |closed form − column scaling| ≤ 1e-10", true);
    let mut rng = rng_for(seed, 6);
    for _ in 0..50 {
        let (nr, ns) = (sampling::size(&mut rng, 1, 4), sampling::size(&mut rng, 1, 4));
        let lambda = sampling::joint_with_column_support(&mut rng, nr, ns, 0.3);
        let psi = sampling::dist(&mut rng, lambda.cols().clone());
        let (value, _) = inf_over_s_margin(&lambda, &psi)?;
        let direct = relative_entropy(&psi, &lambda.col_marginal())?;
        let scaled = relative_entropy(&column_scaling_projection(&lambda, &psi)?, &lambda)?;
        let gap = (value - direct).abs().max((value - scaled).abs());
        t.record(gap, gap <= 1e-10);
    }
    Ok(t.done())
}

fn sanov(caps: &Caps) -> Result<SuiteResult> {
    let mut t = Tally::new("sanov_envelope", "a_n inside [envelope_lo, envelope_hi] (min distance to an edge, ≥ 0)", false);
    let lambda = JointDist::from_rows(&[vec![0.4, 0.1], vec![0.1, 0.4]])?;
    let psi = Dist::uniform(lambda.cols().clone());
    let event = SetDescriptor::Halfspace { coord: 0, cmp: Comparison::Ge, threshold: 0.8 };
    let mut cfg = ScenarioConfig::new(lambda, psi, event, vec![50, 100, 200]);
    cfg.caps = *caps;
    let run = sanov_convergence(&cfg)?;
    if let Some((_, e)) = run.failure {
        return Err(e);
    }
    for r in &run.reports {
        let margin = (r.a_n - r.envelope_lo).min(r.envelope_hi - r.a_n);
        t.record(margin, r.contained());
    }
    Ok(t.done())
}

fn rounding(seed: u64) -> Result<SuiteResult> {
    let mut t = Tally::new("rounding", "exact S-margin, ν ≪ λ and both distance bounds (max fd / bound)", true);
    let mut rng = rng_for(seed, 7);
    for _ in 0..100 {
        let (nr, ns) = (sampling::size(&mut rng, 2, 3), sampling::size(&mut rng, 2, 3));
        let lambda = sampling::joint_with_column_support(&mut rng, nr, ns, 0.2);
        let raw: Vec<f64> = lambda.weights().iter().map(|&w| if w > 0.0 { rng.gen::<f64>() + 0.05 } else { 0.0 }).collect();
        let total: f64 = raw.iter().sum();
        let xi = JointDist::new(lambda.rows().clone(), lambda.cols().clone(), raw.iter().map(|w| w / total).collect())?;
        let n = sampling::size(&mut rng, 10, 200) as u32;
        let noise = sampling::dist(&mut rng, lambda.cols().clone());
        let xs = xi.col_marginal();
        let target = Dist::new(
            lambda.cols().clone(),
            xs.weights().iter().zip(noise.weights()).map(|(a, b)| 0.9 * a + 0.1 * b).collect(),
        )?;
        let zeta = nearest_empirical(&target, n)?;
        let nu = match_s_margin(&xi, &zeta, &lambda)?;
        let c = check_match(&xi, &zeta, &lambda, &nu);
        t.record((c.fd / c.fd_bound).max(c.fd_r / c.fd_r_bound), c.passed());
    }
    Ok(t.done())
}

fn gaussian(seed: u64) -> SuiteResult {
    let mut t = Tally::new("gaussian_gallery", "cumulant, exact limit gap and rate identity residuals (max)", true);
    let fam = GaussianPairFamily::new(-0.4).expect("nonzero");
    let (lam, y) = (1.3, 0.7);
    let q = |a: i64, b: i64| BigRational::new(a.into(), b.into());
    for n in (1..=10_000u32).step_by(101) {
        let y_n = y + 1.0 / n as f64;
        let c = gallery::gaussian_cumulant(n, y_n, lam, &fam);
        let res = (c - (lam * fam.r() * y_n + 0.5 * lam * lam)).abs();
        let exact = gallery::exact_gap_holds(&q(7, 10), &(q(7, 10) + q(1, n as i64)), &q(13, 10), &q(-2, 5));
        t.record(res, res <= 1e-12 && exact);
    }
    let mut rng = rng_for(seed, 8);
    for _ in 0..1000 {
        let (x, yy) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let f = GaussianPairFamily::new(rng.gen_range(0.1..2.0)).expect("nonzero");
        let res = (f.joint_rate(x, yy) - f.section_infimum(yy) - 0.5 * gallery::gaussian_rate(x, yy, &f)).abs();
        t.record(res, res <= 1e-14 * (1.0 + x * x + yy * yy));
    }
    t.done()
}

/// Composite Simpson rule with `panels` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for i in 1..panels {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn exponential_weights() -> Result<SuiteResult> {
    let mut t = Tally::new("exponential_weights", "|weights − (1−2/e, 1/e)| and |weights − Simpson| ≤ 1e-12", true);
    let e1 = (-1.0f64).exp();
    for n in [1u32, 10, 100, 1000] {
        let (w1, w2) = gallery::exponential_mixture_weights(n)?;
        let nf = n as f64;
        let q1 = simpson(|y| nf * y * nf * (-nf * y).exp(), 0.0, 1.0 / nf, 2000);
        let q2 = simpson(|y| (1.0 - nf * y) * nf * (-nf * y).exp(), 0.0, 1.0 / nf, 2000);
        let gap = [w1 - (1.0 - 2.0 * e1), w2 - e1, w1 - q1, w2 - q2].iter().map(|d| d.abs()).fold(0.0, f64::max);
        t.record(gap, gap <= 1e-12);
    }
    Ok(t.done())
}

fn counterexample() -> Result<SuiteResult> {
    let mut t = Tally::new("counterexample", "decreasing in m, below (n/m)Φ̄(√n), and (1/n) log < −1/2 at m = 5000 (max log-ratio minus log-bound)", true);
    let n = 50;
    let ms = [50u32, 500, 5000];
    let logs: Vec<f64> = ms.iter().map(|&m| gallery::counterexample_log_ratio(n, m)).collect::<Result<_>>()?;
    for (k, &m) in ms.iter().enumerate() {
        let over = logs[k] - gallery::counterexample_log_bound(n, m);
        let decreasing = k == 0 || logs[k] < logs[k - 1];
        t.record(over, over <= 0.0 && decreasing);
    }
    let rate = logs[2] / n as f64;
    t.record(rate + 0.5, rate < -0.5);
    Ok(t.done())
}

fn epsilon() -> Result<SuiteResult> {
    let mut t = Tally::new("epsilon_calibration", "bisection residual ≤ 1e-10, 0 < ε_n < 1/√n, ε_n decreasing", true);
    let mut prev = f64::INFINITY;
    for n in [1u32, 4, 16, 64, 256] {
        let c = gallery::find_epsilon_n(n)?;
        let ok = c.residual <= 1e-10 && (c.ramp - c.flat).abs() <= 1e-10 && 0.0 < c.epsilon && c.epsilon < c.kappa && c.epsilon < prev;
        prev = c.epsilon;
        t.record(c.residual, ok);
    }
    Ok(t.done())
}

fn hypotheses() -> Result<SuiteResult> {
    let mut t = Tally::new("mixture_hypotheses", "window masses stationary and μ¹ ⪰ μ² comparisons on probe sets", true);
    for f in [
        MixtureFamily::gaussian_exponential(),
        MixtureFamily::gaussian_gaussian(),
        MixtureFamily::gaussian_gaussian_atom(),
        MixtureFamily::geometric_exponential(),
    ] {
        let rep = gallery::check_hypotheses(&f, &[10, 100, 1000], 1e-2)?;
        t.record(if rep.holds() { 0.0 } else { 1.0 }, rep.holds());
    }
    Ok(t.done())
}
