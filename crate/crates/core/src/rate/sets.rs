//! Infima of the conditional rate over sets of `R`-distributions.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{feasible_first_coordinate, rate_i, IpfOptions};
use crate::empirical::Compositions;
use crate::error::{Error, Result};
use crate::finite_measures::{tv_slices, Dist, FiniteMeasure, JointDist, NORMALIZATION_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparison {
    Ge,
    Gt,
    Le,
    Lt,
}

impl Comparison {
    fn holds(self, x: f64, t: f64) -> bool {
        match self {
            Comparison::Ge => x >= t,
            Comparison::Gt => x > t,
            Comparison::Le => x <= t,
            Comparison::Lt => x < t,
        }
    }

    fn mirrored(self) -> Self {
        match self {
            Comparison::Ge => Comparison::Le,
            Comparison::Gt => Comparison::Lt,
            Comparison::Le => Comparison::Ge,
            Comparison::Lt => Comparison::Gt,
        }
    }
}

/// A subset of `P(R)`, given by the shapes that appear as basic open and
/// closed sets in LDP bounds. Distances are total variation.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetDescriptor {
    Everything,
    Nothing,
    /// `{φ : fd(φ, center) < radius}`, or `≤` when `closed`.
    TvBall { center: Vec<f64>, radius: f64, closed: bool },
    /// `{φ : fd(φ, c_i) ≥ r_i ∀i}` when `closed`, else with `>`.
    ComplementOfBalls { balls: Vec<(Vec<f64>, f64)>, closed: bool },
    /// `{φ : φ(coord) ⋈ threshold}`.
    Halfspace { coord: usize, cmp: Comparison, threshold: f64 },
    #[serde(skip)]
    Explicit(Arc<dyn Fn(&Dist) -> bool + Send + Sync>),
}

impl fmt::Debug for SetDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetDescriptor::Everything => write!(f, "Everything"),
            SetDescriptor::Nothing => write!(f, "Nothing"),
            SetDescriptor::TvBall { center, radius, closed } => {
                write!(f, "TvBall({center:?}, {radius}, closed={closed})")
            }
            SetDescriptor::ComplementOfBalls { balls, closed } => {
                write!(f, "ComplementOfBalls({balls:?}, closed={closed})")
            }
            SetDescriptor::Halfspace { coord, cmp, threshold } => {
                write!(f, "Halfspace(φ[{coord}] {cmp:?} {threshold})")
            }
            SetDescriptor::Explicit(_) => write!(f, "Explicit(..)"),
        }
    }
}

impl SetDescriptor {
    pub fn explicit(pred: impl Fn(&Dist) -> bool + Send + Sync + 'static) -> Self {
        SetDescriptor::Explicit(Arc::new(pred))
    }

    pub fn contains(&self, phi: &Dist) -> bool {
        self.contains_weights(phi.weights(), &|| phi.clone())
    }

    fn contains_weights(&self, w: &[f64], as_dist: &dyn Fn() -> Dist) -> bool {
        match self {
            SetDescriptor::Everything => true,
            SetDescriptor::Nothing => false,
            SetDescriptor::TvBall { center, radius, closed } => {
                let d = tv_slices(w, center);
                if *closed { d <= *radius } else { d < *radius }
            }
            SetDescriptor::ComplementOfBalls { balls, closed } => balls.iter().all(|(c, r)| {
                let d = tv_slices(w, c);
                if *closed { d >= *r } else { d > *r }
            }),
            SetDescriptor::Halfspace { coord, cmp, threshold } => cmp.holds(w[*coord], *threshold),
            SetDescriptor::Explicit(p) => p(&as_dist()),
        }
    }

    /// Closure in `P(R)`; explicit predicates are returned unchanged.
    pub fn closure(&self) -> Self {
        match self {
            SetDescriptor::TvBall { center, radius, .. } => {
                SetDescriptor::TvBall { center: center.clone(), radius: *radius, closed: true }
            }
            SetDescriptor::ComplementOfBalls { balls, .. } => {
                SetDescriptor::ComplementOfBalls { balls: balls.clone(), closed: true }
            }
            SetDescriptor::Halfspace { coord, cmp, threshold } => SetDescriptor::Halfspace {
                coord: *coord,
                cmp: match cmp {
                    Comparison::Gt => Comparison::Ge,
                    Comparison::Lt => Comparison::Le,
                    c => *c,
                },
                threshold: *threshold,
            },
            other => other.clone(),
        }
    }

    /// Interior in `P(R)`; explicit predicates are returned unchanged.
    pub fn interior(&self) -> Self {
        match self {
            SetDescriptor::TvBall { center, radius, .. } => {
                SetDescriptor::TvBall { center: center.clone(), radius: *radius, closed: false }
            }
            SetDescriptor::ComplementOfBalls { balls, .. } => {
                SetDescriptor::ComplementOfBalls { balls: balls.clone(), closed: false }
            }
            SetDescriptor::Halfspace { coord, cmp, threshold } => SetDescriptor::Halfspace {
                coord: *coord,
                cmp: match cmp {
                    Comparison::Ge => Comparison::Gt,
                    Comparison::Le => Comparison::Lt,
                    c => *c,
                },
                threshold: *threshold,
            },
            other => other.clone(),
        }
    }

    /// Checks the parameters against an alphabet of size `k`.
    pub fn validate(&self, k: usize) -> Result<()> {
        let center_ok = |c: &[f64]| {
            c.len() == k
                && c.iter().all(|x| x.is_finite() && *x >= 0.0)
                && (c.iter().sum::<f64>() - 1.0).abs() <= NORMALIZATION_TOL
        };
        match self {
            SetDescriptor::TvBall { center, radius, closed } => {
                if !center_ok(center) {
                    return Err(Error::arg("ball center is not a distribution on R"));
                }
                if !(radius.is_finite() && (*radius > 0.0 || (*closed && *radius == 0.0))) {
                    return Err(Error::arg("ball radius must be positive"));
                }
            }
            SetDescriptor::ComplementOfBalls { balls, .. } => {
                for (c, r) in balls {
                    if !center_ok(c) {
                        return Err(Error::arg("ball center is not a distribution on R"));
                    }
                    if !(r.is_finite() && *r > 0.0) {
                        return Err(Error::arg("ball radius must be positive"));
                    }
                }
            }
            SetDescriptor::Halfspace { coord, threshold, .. } => {
                if *coord >= k || !threshold.is_finite() {
                    return Err(Error::arg("halfspace coordinate or threshold out of range"));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// `inf_{φ ∈ set} I(φ)` and a point where it is attained (in the closure).
#[derive(Debug, Clone, Serialize)]
pub struct SetInfimum {
    #[serde(serialize_with = "crate::report::ext_f64")]
    pub value: f64,
    pub argmin: Option<Dist>,
}

impl SetInfimum {
    fn empty() -> Self {
        Self { value: f64::INFINITY, argmin: None }
    }
}

/// Interval of `x = φ(r₁)` when `#R = 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Interval {
    lo: f64,
    hi: f64,
    lo_closed: bool,
    hi_closed: bool,
}

impl Interval {
    fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_closed: true, hi_closed: true }
    }

    fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    fn intersect(&self, o: &Interval) -> Interval {
        let (lo, lo_closed) = if self.lo > o.lo {
            (self.lo, self.lo_closed)
        } else if o.lo > self.lo {
            (o.lo, o.lo_closed)
        } else {
            (self.lo, self.lo_closed && o.lo_closed)
        };
        let (hi, hi_closed) = if self.hi < o.hi {
            (self.hi, self.hi_closed)
        } else if o.hi < self.hi {
            (o.hi, o.hi_closed)
        } else {
            (self.hi, self.hi_closed && o.hi_closed)
        };
        Interval { lo, hi, lo_closed, hi_closed }
    }
}

/// `[0, 1]` minus a union of intervals.
fn complement(mut removed: Vec<Interval>) -> Vec<Interval> {
    removed.retain(|i| !i.is_empty());
    removed.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(b.lo_closed.cmp(&a.lo_closed)));
    let mut out = Vec::new();
    let mut cur = Interval::closed(0.0, 1.0);
    for r in removed {
        let left = Interval { lo: cur.lo, hi: r.lo, lo_closed: cur.lo_closed, hi_closed: !r.lo_closed };
        let piece = left.intersect(&cur);
        if !piece.is_empty() {
            out.push(piece);
        }
        // advance the start past r
        if r.hi > cur.lo || (r.hi == cur.lo && r.hi_closed && cur.lo_closed) {
            cur.lo = r.hi;
            cur.lo_closed = !r.hi_closed;
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn ball_interval(c: f64, r: f64, closed: bool) -> Interval {
    Interval { lo: c - r, hi: c + r, lo_closed: closed, hi_closed: closed }
}

fn halfspace_interval(cmp: Comparison, t: f64) -> Interval {
    match cmp {
        Comparison::Ge => Interval { lo: t, hi: f64::INFINITY, lo_closed: true, hi_closed: true },
        Comparison::Gt => Interval { lo: t, hi: f64::INFINITY, lo_closed: false, hi_closed: true },
        Comparison::Le => Interval { lo: f64::NEG_INFINITY, hi: t, lo_closed: true, hi_closed: true },
        Comparison::Lt => Interval { lo: f64::NEG_INFINITY, hi: t, lo_closed: true, hi_closed: false },
    }
}

fn point(x: f64, template: &Dist) -> Dist {
    let x = x.clamp(0.0, 1.0);
    Dist::new(template.alphabet().clone(), vec![x, 1.0 - x]).expect("two-point distribution")
}

/// The set as a union of `x`-intervals, `x = φ(r₁)`, for `#R = 2`.
fn intervals_on_segment(set: &SetDescriptor, template: &Dist, resolution: f64) -> Vec<Interval> {
    let unit = Interval::closed(0.0, 1.0);
    let raw = match set {
        SetDescriptor::Everything => vec![unit],
        SetDescriptor::Nothing => vec![],
        // on two points fd(φ, c) = |φ(r₁) − c(r₁)|
        SetDescriptor::TvBall { center, radius, closed } => vec![ball_interval(center[0], *radius, *closed)],
        SetDescriptor::ComplementOfBalls { balls, closed } => {
            complement(balls.iter().map(|(c, r)| ball_interval(c[0], *r, !*closed)).collect())
        }
        SetDescriptor::Halfspace { coord, cmp, threshold } => vec![if *coord == 0 {
            halfspace_interval(*cmp, *threshold)
        } else {
            halfspace_interval(cmp.mirrored(), 1.0 - threshold)
        }],
        SetDescriptor::Explicit(p) => sampled_intervals(&|x| p(&point(x, template)), resolution),
    };
    raw.iter().map(|i| i.intersect(&unit)).filter(|i| !i.is_empty()).collect()
}

/// Runs of a predicate on `[0, 1]`, sampled on a grid and with run
/// endpoints refined by bisection.
fn sampled_intervals(p: &dyn Fn(f64) -> bool, resolution: f64) -> Vec<Interval> {
    let k = (1.0 / resolution).ceil().max(1.0) as usize;
    let xs: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
    let inside: Vec<bool> = xs.iter().map(|&x| p(x)).collect();
    let edge = |mut a: f64, mut b: f64, a_in: bool| {
        // p(a) = a_in, p(b) = !a_in
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if p(m) == a_in {
                a = m;
            } else {
                b = m;
            }
        }
        if a_in { a } else { b }
    };
    let mut out = Vec::new();
    let mut start: Option<f64> = None;
    for i in 0..=k {
        match (inside[i], start) {
            (true, None) => start = Some(if i == 0 { 0.0 } else { edge(xs[i - 1], xs[i], false) }),
            (false, Some(s)) => {
                out.push(Interval::closed(s, edge(xs[i - 1], xs[i], true)));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Interval::closed(s, 1.0));
    }
    out
}

const GOLDEN_TOL: f64 = 1e-12;

/// Minimum of a convex function on `[a, b]`, endpoints included.
fn golden_min(f: &mut dyn FnMut(f64) -> Result<f64>, a: f64, b: f64) -> Result<(f64, f64)> {
    let fa = f(a)?;
    if b <= a {
        return Ok((a, fa));
    }
    let fb = f(b)?;
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > GOLDEN_TOL {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2)?;
        }
    }
    let mut best = (a, fa);
    for cand in [(x1, f1), (x2, f2), (b, fb)] {
        if cand.1 < best.1 {
            best = cand;
        }
    }
    Ok(best)
}

/// `inf_{φ ∈ set} I(φ)`.
///
/// For `#R = 2` the set is converted to intervals of `φ(r₁)` and `I`, which
/// is convex there, is minimized on each interval. For larger `R` the simplex
/// grid with spacing `1/⌈1/resolution⌉` is scanned and the best grid point
/// is refined by a pattern search along the edge directions `e_i − e_j`
/// inside the set. Ties go to the earliest grid point in enumeration order.
/// The empty set gives `+∞`.
pub fn inf_rate_over_set(lambda: &JointDist, psi: &Dist, set: &SetDescriptor, resolution: f64) -> Result<SetInfimum> {
    if !(resolution > 0.0) {
        return Err(Error::arg("resolution must be positive"));
    }
    let nr = lambda.nrows();
    set.validate(nr)?;
    let opts = IpfOptions::default();
    let template = Dist::uniform(lambda.rows().clone());
    if nr == 2 {
        let (flo, fhi) = feasible_first_coordinate(lambda, psi);
        let feasible = Interval::closed(flo, fhi);
        let mut best = SetInfimum::empty();
        for iv in intervals_on_segment(set, &template, resolution) {
            let iv = iv.intersect(&feasible);
            if iv.is_empty() {
                continue;
            }
            let mut f = |x: f64| rate_i(lambda, psi, &point(x, &template), &opts);
            let (x, v) = golden_min(&mut f, iv.lo, iv.hi)?;
            if v < best.value {
                best = SetInfimum { value: v, argmin: Some(point(x, &template)) };
            }
        }
        return Ok(best);
    }
    let k = (1.0 / resolution).ceil() as u32;
    let count = crate::empirical::count_compositions(k as usize, nr);
    if count > crate::empirical::Caps::default().elements {
        return Err(Error::Resource { what: "rate grid points", needed: count, cap: crate::empirical::Caps::default().elements });
    }
    let alphabet = lambda.rows().clone();
    let eval = |w: &[f64]| -> Result<f64> { rate_i(lambda, psi, &Dist::new(alphabet.clone(), w.to_vec())?, &opts) };
    let mut best: Option<(Vec<f64>, f64)> = None;
    for c in Compositions::new(k, nr) {
        let w: Vec<f64> = c.iter().map(|&x| x as f64 / k as f64).collect();
        let d = Dist::new(alphabet.clone(), w.clone())?;
        if !set.contains(&d) {
            continue;
        }
        let v = eval(&w)?;
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((w, v));
        }
    }
    let Some((mut w, mut v)) = best else {
        return Ok(SetInfimum::empty());
    };
    if v.is_finite() {
        let mut h = 1.0 / k as f64;
        while h > 1e-10 {
            let mut moved = false;
            'pairs: for i in 0..nr {
                for j in 0..nr {
                    if i == j || w[j] < h {
                        continue;
                    }
                    let mut cand = w.clone();
                    cand[i] += h;
                    cand[j] -= h;
                    cand[j] = cand[j].max(0.0);
                    let d = Dist::from_unnormalized(alphabet.clone(), cand.clone())?;
                    if !set.contains(&d) {
                        continue;
                    }
                    let cv = eval(d.weights())?;
                    if cv < v {
                        w = d.weights().to_vec();
                        v = cv;
                        moved = true;
                        break 'pairs;
                    }
                }
            }
            if !moved {
                h /= 2.0;
            }
        }
    } else {
        return Ok(SetInfimum::empty());
    }
    Ok(SetInfimum { value: v, argmin: Some(Dist::new(alphabet, w)?) })
}
