//! Relative-entropy rate functions on `P(R) × P(S)`.
//!
//! `J(ρ, σ)` is the I-projection of `λ` onto couplings of `(ρ, σ)`, computed
//! by iterative proportional fitting after a max-flow support check. The
//! conditional rate is `I(φ) = J(φ, ψ) − inf_ρ J(ρ, ψ)`, and the second
//! term has the closed form `H(ψ | λ_S)` attained at `ψ ⊗ θ`.

mod flow;
mod sets;

pub use flow::{support_flow, SupportFlow};
pub use sets::{inf_rate_over_set, Comparison, SetDescriptor, SetInfimum};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::finite_measures::{
    conditional_theta, relative_entropy_slices, Dist, FiniteMeasure, JointDist,
};

/// Stopping rule for iterative proportional fitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IpfOptions {
    /// Sup-norm margin residual at which iteration stops.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for IpfOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 100_000 }
    }
}

/// Value of a two-marginal infimum with its diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct RateResult {
    /// `+∞` when no coupling `ξ ≪ λ` has the requested margins.
    #[serde(serialize_with = "crate::report::ext_f64")]
    pub value: f64,
    pub minimizer: Option<JointDist>,
    pub margin_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl RateResult {
    fn infeasible() -> Self {
        Self { value: f64::INFINITY, minimizer: None, margin_residual: 0.0, iterations: 0, converged: true }
    }
}

/// Feasibility margin for the max-flow check.
const FEASIBILITY_TOL: f64 = 1e-10;

fn check_margins(lambda: &JointDist, rho: &Dist, sigma: &Dist) -> Result<()> {
    if rho.alphabet() != lambda.rows() || sigma.alphabet() != lambda.cols() {
        return Err(Error::arg("margins do not live on the alphabets of λ"));
    }
    Ok(())
}

/// Support of an IPF run: the cells that can be positive in some coupling
/// `ξ ≪ λ` with margins `(ρ, σ)`, or `None` if there is no such coupling.
fn feasible_support(lambda: &JointDist, rho: &[f64], sigma: &[f64]) -> Option<Vec<bool>> {
    let support: Vec<bool> = lambda.weights().iter().map(|&w| w > 0.0).collect();
    let f = support_flow(&support, rho, sigma);
    (f.value >= 1.0 - FEASIBILITY_TOL).then_some(f.free)
}

struct Ipf<'a> {
    rho: &'a [f64],
    sigma: &'a [f64],
    ns: usize,
    xi: Vec<f64>,
}

impl Ipf<'_> {
    fn scale_rows(&mut self) {
        let ns = self.ns;
        for (r, row) in self.xi.chunks_mut(ns).enumerate() {
            let t: f64 = row.iter().sum();
            if t > 0.0 {
                let f = self.rho[r] / t;
                row.iter_mut().for_each(|x| *x *= f);
            }
        }
    }

    fn scale_cols(&mut self) {
        let ns = self.ns;
        for s in 0..ns {
            let t: f64 = self.xi.iter().skip(s).step_by(ns).sum();
            if t > 0.0 {
                let f = self.sigma[s] / t;
                self.xi.iter_mut().skip(s).step_by(ns).for_each(|x| *x *= f);
            }
        }
    }

    fn residual(&self) -> f64 {
        let ns = self.ns;
        let rows = self
            .xi
            .chunks(ns)
            .zip(self.rho)
            .map(|(row, &p)| (row.iter().sum::<f64>() - p).abs())
            .fold(0.0, f64::max);
        let cols = (0..ns)
            .map(|s| (self.xi.iter().skip(s).step_by(ns).sum::<f64>() - self.sigma[s]).abs())
            .fold(0.0, f64::max);
        rows.max(cols)
    }
}

/// Runs IPF from `λ` restricted to the feasible support, calling `trace`
/// after each row-then-column sweep with the iterate and its residual.
fn run_ipf(
    lambda: &JointDist,
    rho: &Dist,
    sigma: &Dist,
    opts: &IpfOptions,
    trace: &mut dyn FnMut(&[f64], f64),
) -> Result<RateResult> {
    check_margins(lambda, rho, sigma)?;
    if !(opts.tol > 0.0) {
        return Err(Error::arg("IPF tolerance must be positive"));
    }
    let Some(free) = feasible_support(lambda, rho.weights(), sigma.weights()) else {
        return Ok(RateResult::infeasible());
    };
    let xi: Vec<f64> = lambda.weights().iter().zip(&free).map(|(&w, &f)| if f { w } else { 0.0 }).collect();
    let mut ipf = Ipf { rho: rho.weights(), sigma: sigma.weights(), ns: lambda.ncols(), xi };
    let mut residual = ipf.residual();
    let mut it = 0;
    while residual > opts.tol {
        if it >= opts.max_iter {
            return Err(Error::NonConvergence {
                iterations: it,
                residual,
                last: Box::new(JointDist::from_raw(lambda.rows().clone(), lambda.cols().clone(), ipf.xi)),
            });
        }
        ipf.scale_rows();
        ipf.scale_cols();
        it += 1;
        residual = ipf.residual();
        trace(&ipf.xi, residual);
    }
    let value = relative_entropy_slices(&ipf.xi, lambda.weights());
    let minimizer = JointDist::from_raw(lambda.rows().clone(), lambda.cols().clone(), ipf.xi);
    Ok(RateResult { value, minimizer: Some(minimizer), margin_residual: residual, iterations: it, converged: true })
}

/// `J(ρ, σ) = inf { H(ξ | λ) : ξ has margins (ρ, σ) }`.
pub fn i_projection(lambda: &JointDist, rho: &Dist, sigma: &Dist, opts: &IpfOptions) -> Result<RateResult> {
    run_ipf(lambda, rho, sigma, opts, &mut |_, _| {})
}

/// One sweep (row then column scaling) of iterative proportional fitting.
#[derive(Debug, Clone)]
pub struct IpfStep {
    pub residual: f64,
    /// `H(iterate | λ)`. This is not monotone along the sweeps; the
    /// distance `H(ξ* | iterate)` to the limit is.
    pub entropy: f64,
    /// Row-major weights after the sweep.
    pub iterate: Vec<f64>,
}

/// Every IPF sweep, for at most `max_iter` sweeps or until `tol` is met.
pub fn ipf_trace(lambda: &JointDist, rho: &Dist, sigma: &Dist, opts: &IpfOptions) -> Result<Vec<IpfStep>> {
    let mut out = Vec::new();
    let lw = lambda.weights().to_vec();
    let res = run_ipf(lambda, rho, sigma, opts, &mut |xi, r| {
        out.push(IpfStep { residual: r, entropy: relative_entropy_slices(xi, &lw), iterate: xi.to_vec() })
    });
    match res {
        Ok(_) | Err(Error::NonConvergence { .. }) => Ok(out),
        Err(e) => Err(e),
    }
}

/// `inf { H(ξ|λ) : ξ(R × ·) = ψ } = H(ψ | λ_S)`, attained at `ψ ⊗ θ`.
pub fn inf_over_s_margin(lambda: &JointDist, psi: &Dist) -> Result<(f64, JointDist)> {
    if psi.alphabet() != lambda.cols() {
        return Err(Error::arg("ψ does not live on the column alphabet of λ"));
    }
    let theta = conditional_theta(lambda).map_err(|e| Error::arg(e.to_string()))?;
    let value = relative_entropy_slices(psi.weights(), lambda.col_marginal().weights());
    Ok((value, theta.compose_with(psi)?))
}

/// I-projection of `λ` onto couplings with `S`-marginal `ψ` by column
/// scaling alone.
pub fn column_scaling_projection(lambda: &JointDist, psi: &Dist) -> Result<JointDist> {
    if psi.alphabet() != lambda.cols() {
        return Err(Error::arg("ψ does not live on the column alphabet of λ"));
    }
    lambda.check_column_support().map_err(|e| Error::arg(e.to_string()))?;
    let mut ipf = Ipf { rho: &[], sigma: psi.weights(), ns: lambda.ncols(), xi: lambda.weights().to_vec() };
    ipf.scale_cols();
    Ok(JointDist::from_raw(lambda.rows().clone(), lambda.cols().clone(), ipf.xi))
}

/// The conditional rate `I(φ) = J(φ, ψ) − H(ψ | λ_S)`, clamped at 0.
pub fn rate_i(lambda: &JointDist, psi: &Dist, phi: &Dist, opts: &IpfOptions) -> Result<f64> {
    let (base, _) = inf_over_s_margin(lambda, psi)?;
    let j = i_projection(lambda, phi, psi, opts)?.value;
    Ok(if j.is_infinite() { j } else { (j - base).max(0.0) })
}

/// `φ* = (ψ ⊗ θ)(· × S)`, the zero of `I`.
pub fn rate_zero(lambda: &JointDist, psi: &Dist) -> Result<Dist> {
    Ok(inf_over_s_margin(lambda, psi)?.1.row_marginal())
}

/// Range of `φ(r₁)` over couplings `ξ ≪ λ` with `S`-marginal `ψ` when
/// `#R = 2`.
pub fn feasible_first_coordinate(lambda: &JointDist, psi: &Dist) -> (f64, f64) {
    let ns = lambda.ncols();
    let mut lo = 0.0;
    let mut hi = 0.0;
    for s in 0..ns {
        if lambda.get(1, s) == 0.0 {
            lo += psi.get(s);
        }
        if lambda.get(0, s) > 0.0 {
            hi += psi.get(s);
        }
    }
    (lo, hi)
}
