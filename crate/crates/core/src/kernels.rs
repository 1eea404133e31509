//! The product regular conditional kernel `η_n(ζ, ·)`: the law of the
//! `R`-empirical measure of independent draws `r_i ~ θ(s_i, ·)` along any
//! sequence `(s_i)` realizing `ζ`.
//!
//! Two independent routes are provided. The table route sums over
//! contingency tables with both margins fixed, weighting by `θ`. The
//! conditioning route sums the joint multinomial law of `λ` over couplings
//! with `S`-marginal `ζ` and divides by the mass of `{ζ}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::empirical::{
    check_cap, count_compositions, log_weights, multinomial_atom_exact, Caps, CompositionRanker,
    Compositions, EmpiricalMeasure, Event, EventMemo,
};
use crate::error::{Error, Result};
use crate::exact::{self, ExactJoint};
use crate::finite_measures::{conditional_theta, Alphabet, Dist, FiniteMeasure, JointDist, Kernel, LogAccumulator, LogFactorials};

/// Nonnegative integer matrix over `R × S` (row-major) with prescribed
/// margins.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContingencyTable {
    pub counts: Vec<u32>,
    pub row_margins: Vec<u32>,
    pub col_margins: Vec<u32>,
}

impl ContingencyTable {
    pub fn get(&self, r: usize, s: usize) -> u32 {
        self.counts[r * self.col_margins.len() + s]
    }
}

/// A kernel evaluation request: `η_n(ζ, event)`.
pub struct KernelQuery<'a> {
    pub n: u32,
    pub zeta: EmpiricalMeasure,
    pub event: Event<'a>,
}

impl KernelQuery<'_> {
    pub fn eval(&self, theta: &Kernel, caps: &Caps) -> Result<f64> {
        eta_event(self.n, &self.zeta, self.event, theta, caps)
    }
}

/// Depth-first walk over all tables with the given margins. `allowed(r,s)`
/// false forces the cell to zero. `visit` receives each completed table.
pub fn for_each_table(
    row_margins: &[u32],
    col_margins: &[u32],
    allowed: &dyn Fn(usize, usize) -> bool,
    cap: u128,
    visit: &mut dyn FnMut(&[u32]),
) -> Result<u128> {
    let nr = row_margins.len();
    let ns = col_margins.len();
    let rs: u64 = row_margins.iter().map(|&x| x as u64).sum();
    let cs: u64 = col_margins.iter().map(|&x| x as u64).sum();
    if rs != cs {
        return Ok(0);
    }
    let mut walk = TableWalk {
        nr,
        ns,
        row_margins,
        allowed,
        cap,
        nodes: 0,
        cells: vec![0; nr * ns],
        budget: col_margins.to_vec(),
        visit,
    };
    walk.cell(0, 0, row_margins.first().copied().unwrap_or(0))?;
    Ok(walk.nodes)
}

struct TableWalk<'a> {
    nr: usize,
    ns: usize,
    row_margins: &'a [u32],
    allowed: &'a dyn Fn(usize, usize) -> bool,
    cap: u128,
    nodes: u128,
    cells: Vec<u32>,
    budget: Vec<u32>,
    visit: &'a mut dyn FnMut(&[u32]),
}

impl TableWalk<'_> {
    fn cell(&mut self, r: usize, s: usize, row_left: u32) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.cap {
            return Err(Error::Resource { what: "contingency-table nodes", needed: self.nodes, cap: self.cap });
        }
        if r + 1 == self.nr {
            // last row is forced by the column budgets
            for s2 in 0..self.ns {
                let v = self.budget[s2];
                if v > 0 && !(self.allowed)(r, s2) {
                    return Ok(());
                }
                self.cells[r * self.ns + s2] = v;
            }
            (self.visit)(&self.cells);
            return Ok(());
        }
        if s + 1 == self.ns {
            if row_left > self.budget[s] || (row_left > 0 && !(self.allowed)(r, s)) {
                return Ok(());
            }
            self.cells[r * self.ns + s] = row_left;
            self.budget[s] -= row_left;
            let next = self.row_margins[r + 1];
            let res = self.cell(r + 1, 0, next);
            self.budget[s] += row_left;
            return res;
        }
        let hi = if (self.allowed)(r, s) { row_left.min(self.budget[s]) } else { 0 };
        // remaining columns in this row must be able to take the rest
        let room: u64 = self.budget[s + 1..].iter().map(|&b| b as u64).sum();
        let lo = (row_left as u64).saturating_sub(room) as u32;
        if lo > hi {
            return Ok(());
        }
        for v in (lo..=hi).rev() {
            self.cells[r * self.ns + s] = v;
            self.budget[s] -= v;
            let res = self.cell(r, s + 1, row_left - v);
            self.budget[s] += v;
            res?;
        }
        Ok(())
    }
}

/// Enumerates every contingency table with the given margins.
pub fn contingency_tables(row_margins: &[u32], col_margins: &[u32], caps: &Caps) -> Result<Vec<ContingencyTable>> {
    let mut out = Vec::new();
    for_each_table(row_margins, col_margins, &|_, _| true, caps.table_nodes, &mut |c| {
        out.push(ContingencyTable {
            counts: c.to_vec(),
            row_margins: row_margins.to_vec(),
            col_margins: col_margins.to_vec(),
        })
    })?;
    Ok(out)
}

fn check_query(n: u32, zeta: &EmpiricalMeasure, phi: Option<&EmpiricalMeasure>, theta_source: &Alphabet, theta_target: &Alphabet) -> Result<()> {
    if zeta.n() != n {
        return Err(Error::arg(format!("ζ has denominator {} but n = {n}", zeta.n())));
    }
    if zeta.alphabet() != theta_source {
        return Err(Error::arg("ζ does not live on the conditioning alphabet"));
    }
    if let Some(phi) = phi {
        if phi.n() != n {
            return Err(Error::arg(format!("φ has denominator {} but n = {n}", phi.n())));
        }
        if phi.alphabet() != theta_target {
            return Err(Error::arg("φ does not live on the target alphabet"));
        }
    }
    Ok(())
}

/// Log-domain table weights for a fixed `θ`.
struct TableWeights {
    log_theta: Vec<f64>, // [r * ns + s]
    lf: LogFactorials,
    nr: usize,
    ns: usize,
}

impl TableWeights {
    fn new(theta: &Kernel, n: usize) -> Self {
        let nr = theta.target().size();
        let ns = theta.source().size();
        let mut log_theta = vec![f64::NEG_INFINITY; nr * ns];
        for r in 0..nr {
            for s in 0..ns {
                let p = theta.prob(s, r);
                if p > 0.0 {
                    log_theta[r * ns + s] = p.ln();
                }
            }
        }
        Self { log_theta, lf: LogFactorials::new(n), nr, ns }
    }

    fn allowed(&self, r: usize, s: usize) -> bool {
        self.log_theta[r * self.ns + s] > f64::NEG_INFINITY
    }

    fn column_constant(&self, col_margins: &[u32]) -> f64 {
        col_margins.iter().map(|&c| self.lf.get(c as usize)).sum()
    }

    fn table(&self, cells: &[u32]) -> f64 {
        let mut v = 0.0;
        for (i, &c) in cells.iter().enumerate() {
            if c > 0 {
                v += c as f64 * self.log_theta[i] - self.lf.get(c as usize);
            }
        }
        v
    }

    fn log_point_mass(&self, zeta: &[u32], phi: &[u32], cap: u128) -> Result<f64> {
        let mut acc = LogAccumulator::new();
        for_each_table(phi, zeta, &|r, s| self.allowed(r, s), cap, &mut |cells| acc.add(self.table(cells)))?;
        debug_assert_eq!(phi.len(), self.nr);
        Ok(acc.value() + self.column_constant(zeta))
    }
}

/// `η_n(ζ, {φ})` by contingency-table summation.
pub fn eta_point_mass(n: u32, zeta: &EmpiricalMeasure, phi: &EmpiricalMeasure, theta: &Kernel, caps: &Caps) -> Result<f64> {
    check_query(n, zeta, Some(phi), theta.source(), theta.target())?;
    let w = TableWeights::new(theta, n as usize);
    Ok(w.log_point_mass(zeta.counts(), phi.counts(), caps.table_nodes)?.exp())
}

/// `ln η_n(ζ, {φ})` for every `φ ∈ P_emp^n(R)`, in enumeration order.
pub fn eta_law(n: u32, zeta: &EmpiricalMeasure, theta: &Kernel, caps: &Caps) -> Result<Vec<(EmpiricalMeasure, f64)>> {
    check_query(n, zeta, None, theta.source(), theta.target())?;
    let nr = theta.target().size();
    check_cap(count_compositions(n as usize, nr), caps.elements, "empirical simplex elements")?;
    let w = TableWeights::new(theta, n as usize);
    let mut nodes_left = caps.table_nodes;
    let mut out = Vec::new();
    for phi in Compositions::new(n, nr) {
        let mut acc = LogAccumulator::new();
        let used = for_each_table(&phi, zeta.counts(), &|r, s| w.allowed(r, s), nodes_left, &mut |cells| {
            acc.add(w.table(cells))
        })?;
        nodes_left = nodes_left.saturating_sub(used);
        let lp = acc.value() + w.column_constant(zeta.counts());
        out.push((EmpiricalMeasure::new(theta.target().clone(), phi)?, lp));
    }
    Ok(out)
}

/// `η_n(ζ, A)`: [`eta_point_mass`] summed over `φ ∈ A ∩ P_emp^n(R)`.
pub fn eta_event(n: u32, zeta: &EmpiricalMeasure, event: Event<'_>, theta: &Kernel, caps: &Caps) -> Result<f64> {
    let mut acc = LogAccumulator::new();
    for (phi, lp) in eta_law(n, zeta, theta, caps)? {
        if lp > f64::NEG_INFINITY && event(&phi.to_dist()) {
            acc.add(lp);
        }
    }
    Ok(acc.value().exp().min(1.0))
}

/// One `R`-count vector `φ` reachable together with a fixed `S`-marginal
/// `ζ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub phi: Vec<u32>,
    /// `ln μ_n({φ} × {ζ})`.
    pub log_mass: f64,
    /// `min H(ν | λ)` over `ν ∈ P_emp^n(R × S)` with margins `(φ, ζ)`.
    pub min_entropy: f64,
}

/// All `φ` with `μ_n({φ} × {ζ}) > 0`, in enumeration order, computed by a
/// sweep over the columns of the couplings with `S`-marginal `ζ`.
pub fn coupling_sweep(n: u32, zeta: &EmpiricalMeasure, lambda: &JointDist, caps: &Caps) -> Result<Vec<SweepEntry>> {
    if zeta.n() != n {
        return Err(Error::arg(format!("ζ has denominator {} but n = {n}", zeta.n())));
    }
    if zeta.alphabet() != lambda.cols() {
        return Err(Error::arg("ζ does not live on the column alphabet of λ"));
    }
    let nr = lambda.nrows();
    let ns = lambda.ncols();
    check_cap(count_compositions(n as usize, nr), caps.elements, "empirical simplex elements")?;
    let lf = LogFactorials::new(n as usize);
    let ll = log_weights(lambda);
    let nf = n as f64;
    let (states, values) = column_sweep(
        nr,
        ns,
        zeta.counts(),
        caps,
        || (0.0, 0.0),
        |acc: &mut (f64, f64), v: (f64, f64)| {
            acc.0 = crate::finite_measures::log_add(acc.0, v.0);
            acc.1 = acc.1.min(v.1);
        },
        (f64::NEG_INFINITY, f64::INFINITY),
        |s, col: &[u32]| {
            let mut v = 0.0;
            let mut h = 0.0;
            for (r, &c) in col.iter().enumerate() {
                if c > 0 {
                    let l = ll[r * ns + s];
                    if l == f64::NEG_INFINITY {
                        return None;
                    }
                    v += c as f64 * l - lf.get(c as usize);
                    let p = c as f64 / nf;
                    h += p * (p.ln() - l);
                }
            }
            Some((v, h))
        },
        |a: &(f64, f64), b: &(f64, f64)| (a.0 + b.0, a.1 + b.1),
    )?;
    let ln_nfact = lf.get(n as usize);
    Ok(states
        .into_iter()
        .zip(values)
        .filter(|(_, v)| v.0 > f64::NEG_INFINITY)
        .map(|(phi, (lm, h))| SweepEntry { phi, log_mass: lm + ln_nfact, min_entropy: h.max(0.0) })
        .collect())
}

/// The law of the `R`-empirical measure given `S`-empirical measure `ζ`
/// under `μ_n`, as `(φ, ln P(φ | ζ))` over reachable `φ` in enumeration
/// order.
pub fn conditional_r_law(n: u32, zeta: &EmpiricalMeasure, lambda: &JointDist, caps: &Caps) -> Result<Vec<(EmpiricalMeasure, f64)>> {
    let sweep = coupling_sweep(n, zeta, lambda, caps)?;
    let total = crate::finite_measures::log_sum(&sweep.iter().map(|e| e.log_mass).collect::<Vec<_>>())
        .map_err(|_| Error::Internal("conditioning on a ζ of zero probability".into()))?;
    sweep
        .into_iter()
        .map(|e| Ok((EmpiricalMeasure::new(lambda.rows().clone(), e.phi)?, e.log_mass - total)))
        .collect()
}

/// Dynamic program over columns: states are partial `R`-count vectors,
/// indexed by composition rank. Returns all final states and their
/// accumulated values (possibly `zero`).
#[allow(clippy::too_many_arguments)]
fn column_sweep<V: Clone>(
    nr: usize,
    ns: usize,
    zeta: &[u32],
    caps: &Caps,
    one: impl Fn() -> V,
    add_into: impl Fn(&mut V, V),
    zero: V,
    column_weight: impl Fn(usize, &[u32]) -> Option<V>,
    mul: impl Fn(&V, &V) -> V,
) -> Result<(Vec<Vec<u32>>, Vec<V>)> {
    let mut total = 0u32;
    let mut states: Vec<Vec<u32>> = vec![vec![0; nr]];
    let mut values: Vec<Option<V>> = vec![Some(one())];
    let mut nodes: u128 = 0;
    for s in 0..ns {
        let b = zeta[s];
        let cols: Vec<(Vec<u32>, V)> = Compositions::new(b, nr)
            .filter_map(|c| column_weight(s, &c).map(|w| (c, w)))
            .collect();
        let t = total + b;
        let ranker = CompositionRanker::new(t as usize, nr);
        let mut next: Vec<Option<V>> = vec![None; ranker.len()];
        let mut buf = vec![0u32; nr];
        for (st, val) in states.iter().zip(&values) {
            let Some(val) = val else { continue };
            for (c, w) in &cols {
                nodes += 1;
                if nodes > caps.table_nodes {
                    return Err(Error::Resource { what: "conditioning sweep nodes", needed: nodes, cap: caps.table_nodes });
                }
                for r in 0..nr {
                    buf[r] = st[r] + c[r];
                }
                let v = mul(val, w);
                let slot = &mut next[ranker.rank(&buf)];
                match slot {
                    Some(acc) => add_into(acc, v),
                    None => *slot = Some(v),
                }
            }
        }
        total = t;
        states = Compositions::new(t, nr).collect();
        values = next;
    }
    Ok((states, values.into_iter().map(|v| v.unwrap_or_else(|| zero.clone())).collect()))
}

/// `μ_n(A × {ζ}) / μ_n(P(R) × {ζ})`.
pub fn eta_via_conditioning(n: u32, zeta: &EmpiricalMeasure, event: Event<'_>, lambda: &JointDist, caps: &Caps) -> Result<f64> {
    let law = conditional_r_law(n, zeta, lambda, caps)?;
    let mut acc = LogAccumulator::new();
    for (phi, lp) in law {
        if event(&phi.to_dist()) {
            acc.add(lp);
        }
    }
    Ok(acc.value().exp().min(1.0))
}

/// `| μ_n(A×B) − Σ_{ζ ∈ B} η_n(ζ, A) · μ_n(P(R) × {ζ}) |`, with `η_n` from
/// the table route and `μ_n(A×B)` from direct coupling enumeration.
pub fn verify_prcp_identity(n: u32, lambda: &JointDist, a: Event<'_>, b: Event<'_>, caps: &Caps) -> Result<f64> {
    let theta = conditional_theta(lambda)?;
    let lhs = crate::empirical::joint_empirical_law(n, lambda, a, b, caps)?;
    let sigma = lambda.col_marginal();
    let lf = LogFactorials::new(n as usize);
    let ls: Vec<f64> = sigma.weights().iter().map(|&w| if w > 0.0 { w.ln() } else { f64::NEG_INFINITY }).collect();
    let mut rhs = 0.0;
    for zeta in crate::empirical::enumerate_empirical(n, lambda.cols(), caps)? {
        if !b(&zeta.to_dist()) {
            continue;
        }
        let mass = crate::empirical::log_multinomial_atom(zeta.counts(), &ls, &lf).exp();
        if mass > 0.0 {
            rhs += eta_event(n, &zeta, a, &theta, caps)? * mass;
        }
    }
    Ok((lhs - rhs).abs())
}

// ---- exact mode -------------------------------------------------------

/// `θ` in exact arithmetic, indexed `[s][r]`.
pub type ExactKernel = Vec<Vec<BigRational>>;

struct ExactTableWeights {
    pow: Vec<Vec<BigRational>>, // [r * ns + s][k] = θ(s,r)^k
    facts: Vec<BigInt>,
    ns: usize,
}

impl ExactTableWeights {
    fn new(theta: &ExactKernel, nr: usize, n: usize) -> Self {
        let ns = theta.len();
        let mut pow = Vec::with_capacity(nr * ns);
        for r in 0..nr {
            for row in theta.iter() {
                pow.push(exact::powers(&row[r], n));
            }
        }
        Self { pow, facts: exact::factorials(n), ns }
    }

    fn allowed(&self, r: usize, s: usize) -> bool {
        !self.pow[r * self.ns + s][1].is_zero()
    }

    fn point_mass(&self, zeta: &[u32], phi: &[u32], cap: u128) -> Result<BigRational> {
        let mut total = BigRational::zero();
        for_each_table(phi, zeta, &|r, s| self.allowed(r, s), cap, &mut |cells| {
            let mut num = BigInt::one();
            let mut den = BigInt::one();
            let mut p = BigRational::one();
            for (i, &c) in cells.iter().enumerate() {
                den *= &self.facts[c as usize];
                if c > 0 {
                    p *= &self.pow[i][c as usize];
                }
            }
            for &c in zeta {
                num *= &self.facts[c as usize];
            }
            total += p * BigRational::new(num, den);
        })?;
        Ok(total)
    }
}

fn check_exact_theta(theta: &ExactKernel, ns: usize, nr: usize) -> Result<()> {
    if theta.len() != ns || theta.iter().any(|row| row.len() != nr) {
        return Err(Error::arg("exact kernel has the wrong shape"));
    }
    if theta.iter().flatten().any(|x| x.is_negative()) {
        return Err(Error::arg("exact kernel has a negative entry"));
    }
    Ok(())
}

/// Exact-mode twin of [`eta_point_mass`].
pub fn eta_point_mass_exact(n: u32, zeta: &EmpiricalMeasure, phi: &EmpiricalMeasure, theta: &ExactKernel, caps: &Caps) -> Result<BigRational> {
    if zeta.n() != n || phi.n() != n {
        return Err(Error::arg("ζ and φ must both have denominator n"));
    }
    check_exact_theta(theta, zeta.alphabet().size(), phi.alphabet().size())?;
    ExactTableWeights::new(theta, phi.alphabet().size(), n as usize).point_mass(zeta.counts(), phi.counts(), caps.table_nodes)
}

/// Exact-mode twin of [`eta_event`]; `target` names the `R` alphabet.
pub fn eta_event_exact(n: u32, zeta: &EmpiricalMeasure, event: Event<'_>, theta: &ExactKernel, target: &Alphabet, caps: &Caps) -> Result<BigRational> {
    if zeta.n() != n {
        return Err(Error::arg("ζ must have denominator n"));
    }
    let nr = target.size();
    check_exact_theta(theta, zeta.alphabet().size(), nr)?;
    check_cap(count_compositions(n as usize, nr), caps.elements, "empirical simplex elements")?;
    let w = ExactTableWeights::new(theta, nr, n as usize);
    let mut memo = EventMemo::new(target.clone(), event);
    let mut total = BigRational::zero();
    for phi in Compositions::new(n, nr) {
        if memo.contains(phi.clone()) {
            total += w.point_mass(zeta.counts(), &phi, caps.table_nodes)?;
        }
    }
    Ok(total)
}

/// Exact-mode twin of [`eta_via_conditioning`].
pub fn eta_via_conditioning_exact(n: u32, zeta: &EmpiricalMeasure, event: Event<'_>, lambda: &ExactJoint, caps: &Caps) -> Result<BigRational> {
    if zeta.n() != n || zeta.alphabet() != lambda.cols() {
        return Err(Error::arg("ζ must live on the column alphabet with denominator n"));
    }
    let nr = lambda.nrows();
    let ns = lambda.ncols();
    let facts = exact::factorials(n as usize);
    let (states, values) = column_sweep(
        nr,
        ns,
        zeta.counts(),
        caps,
        BigRational::one,
        |acc: &mut BigRational, v| *acc += v,
        BigRational::zero(),
        |s, col: &[u32]| {
            let cells: Vec<BigRational> = (0..nr).map(|r| lambda.get(r, s).clone()).collect();
            let p = multinomial_atom_exact(col, &cells, &facts);
            (!p.is_zero()).then_some(p)
        },
        |a, b| a * b,
    )?;
    let mut memo = EventMemo::new(lambda.rows().clone(), event);
    let mut num = BigRational::zero();
    let mut den = BigRational::zero();
    for (phi, v) in states.into_iter().zip(values) {
        if v.is_zero() {
            continue;
        }
        if memo.contains(phi) {
            num += &v;
        }
        den += v;
    }
    if den.is_zero() {
        return Err(Error::Internal("conditioning on a ζ of zero probability".into()));
    }
    Ok(num / den)
}

/// Exact-mode twin of [`verify_prcp_identity`]; the residual is an exact
/// rational and is zero whenever the identity holds.
pub fn verify_prcp_identity_exact(n: u32, lambda: &ExactJoint, a: Event<'_>, b: Event<'_>, caps: &Caps) -> Result<BigRational> {
    let theta = lambda.theta()?;
    let lhs = crate::empirical::joint_empirical_law_exact(n, lambda, a, b, caps)?;
    let sigma = lambda.col_marginal();
    let facts = exact::factorials(n as usize);
    let mut rhs = BigRational::zero();
    for zeta in crate::empirical::enumerate_empirical(n, lambda.cols(), caps)? {
        if !b(&zeta.to_dist()) {
            continue;
        }
        let mass = multinomial_atom_exact(zeta.counts(), &sigma, &facts);
        if !mass.is_zero() {
            rhs += eta_event_exact(n, &zeta, a, &theta, lambda.rows(), caps)? * mass;
        }
    }
    Ok((lhs - rhs).abs())
}

/// `P(L_n = φ)` for `n` i.i.d. draws from `ρ`; the independent-coordinates
/// reference law.
pub fn multinomial_law(n: u32, rho: &Dist, caps: &Caps) -> Result<Vec<(EmpiricalMeasure, f64)>> {
    let lf = LogFactorials::new(n as usize);
    let lr: Vec<f64> = rho.weights().iter().map(|&w| if w > 0.0 { w.ln() } else { f64::NEG_INFINITY }).collect();
    Ok(crate::empirical::enumerate_empirical(n, rho.alphabet(), caps)?
        .into_iter()
        .map(|phi| {
            let lp = crate::empirical::log_multinomial_atom(phi.counts(), &lr, &lf);
            (phi, lp)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lam() -> JointDist {
        JointDist::from_rows(&[vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap()
    }

    fn em(a: &Alphabet, c: &[u32]) -> EmpiricalMeasure {
        EmpiricalMeasure::new(a.clone(), c.to_vec()).unwrap()
    }

    #[test]
    fn tables_respect_margins() {
        let caps = Caps::default();
        let t = contingency_tables(&[2, 1], &[1, 2], &caps).unwrap();
        // c11 ∈ {0, 1}
        assert_eq!(t.len(), 2);
        for tab in &t {
            assert_eq!(tab.get(0, 0) + tab.get(0, 1), 2);
            assert_eq!(tab.get(0, 0) + tab.get(1, 0), 1);
        }
        assert!(contingency_tables(&[2], &[1], &caps).unwrap().is_empty());
        let t = contingency_tables(&[2, 2, 1], &[1, 3, 1], &caps).unwrap();
        let mut brute = 0;
        for code in 0..6u32.pow(9) {
            let mut x = code;
            let c: Vec<u32> = (0..9).map(|_| { let v = x % 6; x /= 6; v }).collect();
            let ok = (0..3).all(|r| c[3 * r..3 * r + 3].iter().sum::<u32>() == [2, 2, 1][r])
                && (0..3).all(|s| c[s] + c[3 + s] + c[6 + s] == [1, 3, 1][s]);
            brute += ok as usize;
        }
        assert_eq!(t.len(), brute);
    }

    #[test]
    fn node_cap_is_resource_error() {
        let caps = Caps { table_nodes: 5, ..Caps::default() };
        let r = contingency_tables(&[5, 5, 5], &[5, 5, 5], &caps);
        assert!(matches!(r, Err(Error::Resource { .. })));
    }

    #[test]
    fn point_mass_examples() {
        let l = lam();
        let theta = conditional_theta(&l).unwrap();
        let caps = Caps::default();
        let (r, s) = (l.rows().clone(), l.cols().clone());
        let p = eta_point_mass(1, &em(&s, &[0, 1]), &em(&r, &[1, 0]), &theta, &caps).unwrap();
        assert!((p - 0.2).abs() < 1e-15);
        let u = JointDist::from_rows(&[vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        let tu = conditional_theta(&u).unwrap();
        let p = eta_point_mass(2, &em(&s, &[1, 1]), &em(&r, &[1, 1]), &tu, &caps).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert!(eta_point_mass(2, &em(&s, &[1, 0]), &em(&r, &[1, 1]), &tu, &caps).is_err());
    }

    #[test]
    fn exact_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let caps = Caps::default();
        for _ in 0..8 {
            let (nr, ns) = (rng.gen_range(1..=3), rng.gen_range(1..=2));
            let l = sampling::joint_with_column_support(&mut rng, nr, ns, 0.2);
            let ex = ExactJoint::from_joint(&l);
            let n = rng.gen_range(1..=5);
            let zetas = crate::empirical::enumerate_empirical(n, l.cols(), &caps).unwrap();
            let zeta = &zetas[rng.gen_range(0..zetas.len())];
            let thr = rng.gen::<f64>();
            let event = move |d: &Dist| d.get(0) >= thr;
            let a = eta_event_exact(n, zeta, &event, &ex.theta().unwrap(), l.rows(), &caps).unwrap();
            let b = eta_via_conditioning_exact(n, zeta, &event, &ex, &caps).unwrap();
            assert_eq!(a, b);
            let t = eta_event_exact(n, zeta, &|_| true, &ex.theta().unwrap(), l.rows(), &caps).unwrap();
            assert!(t.is_one());
            let d = eta_event(n, zeta, &event, &conditional_theta(&l).unwrap(), &caps).unwrap();
            assert!((d - exact::rational_to_f64(&a)).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_prcp_residual_is_zero() {
        let l = lam();
        let ex = ExactJoint::from_joint(&l);
        let caps = Caps::default();
        let a = |d: &Dist| d.get(0) > 0.3;
        let b = |d: &Dist| d.get(1) < 0.8;
        assert!(verify_prcp_identity_exact(4, &ex, &a, &b, &caps).unwrap().is_zero());
        assert!(verify_prcp_identity(4, &l, &a, &b, &caps).unwrap() < 1e-12);
    }

    #[test]
    fn conditioning_rejects_null_zeta() {
        let l = JointDist::from_rows(&[vec![0.5, 0.0], vec![0.5, 0.0]]).unwrap();
        let zeta = em(l.cols(), &[1, 1]);
        assert!(matches!(eta_via_conditioning(2, &zeta, &|_| true, &l, &Caps::default()), Err(Error::Internal(_))));
    }

    #[test]
    fn sweep_matches_coupling_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let caps = Caps::default();
        for _ in 0..10 {
            let (nr, ns) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
            let l = sampling::joint_with_column_support(&mut rng, nr, ns, 0.3);
            let n = rng.gen_range(1..=6);
            for zeta in crate::empirical::enumerate_empirical(n, l.cols(), &caps).unwrap() {
                let sweep = coupling_sweep(n, &zeta, &l, &caps).unwrap();
                let mut want: std::collections::BTreeMap<Vec<u32>, (f64, f64)> = Default::default();
                for nu in crate::empirical::enumerate_couplings(n, l.rows(), l.cols(), &caps).unwrap() {
                    if nu.col_counts() != zeta.counts() {
                        continue;
                    }
                    let lp = crate::empirical::log_multinomial_prob(&nu, &l).unwrap();
                    if lp == f64::NEG_INFINITY {
                        continue;
                    }
                    let h = crate::finite_measures::relative_entropy(&nu.to_joint(), &l).unwrap();
                    let e = want.entry(nu.row_counts()).or_insert((0.0, f64::INFINITY));
                    e.0 += lp.exp();
                    e.1 = e.1.min(h);
                }
                assert_eq!(sweep.len(), want.len());
                for e in &sweep {
                    let (p, h) = want[&e.phi];
                    assert!((e.log_mass.exp() - p).abs() < 1e-13);
                    assert!((e.min_entropy - h).abs() < 1e-12);
                }
            }
        }
    }
}
