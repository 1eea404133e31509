//! Independent oracles for the integration tests. Nothing here calls into
//! the library's numerical routines.

#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, (k - g).abs() * h)
}

/// Adaptive Gauss–Kronrod (7/15) integral of `f` over `[a, b]`: the
/// interval with the largest error estimate is bisected until the summed
/// estimate is below `tol` (absolute) or roundoff level.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let mut parts = vec![(a, b, gk15(&f, a, b))];
    for _ in 0..2000 {
        let total: f64 = parts.iter().map(|p| p.2 .0).sum();
        let err: f64 = parts.iter().map(|p| p.2 .1).sum();
        if err <= tol.max(1e-15 * total.abs()) {
            break;
        }
        let (i, _) = parts.iter().enumerate().max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1)).expect("nonempty");
        let (lo, hi, _) = parts.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        parts.push((lo, mid, gk15(&f, lo, mid)));
        parts.push((mid, hi, gk15(&f, mid, hi)));
    }
    parts.iter().map(|p| p.2 .0).sum()
}

/// Standard normal density.
pub fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Golden-section minimum of a unimodal `f` on `[a, b]`.
pub fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..300 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let candidates = [(x, f(x)), (a, f(a)), (b, f(b))];
    candidates.into_iter().fold((x, f64::INFINITY), |best, p| if p.1 < best.1 { p } else { best })
}

fn xlogx_over(p: f64, l: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else if l <= 0.0 {
        f64::INFINITY
    } else {
        p * (p / l).ln()
    }
}

/// `H(ξ | λ)` for row-major weight slices.
pub fn kl(xi: &[f64], lambda: &[f64]) -> f64 {
    xi.iter().zip(lambda).map(|(&p, &l)| xlogx_over(p, l)).sum()
}

/// `J(ρ, σ)` for a 2×2 `λ` (row-major) by minimizing over the one free
/// entry `ξ₁₁` of couplings with margins `(ρ₁, σ₁)`.
pub fn j_two_by_two(lambda: &[f64], r1: f64, s1: f64) -> f64 {
    let h = |x: f64| {
        let xi = [x, r1 - x, s1 - x, 1.0 - r1 - s1 + x].map(|v| v.max(0.0));
        kl(&xi, lambda)
    };
    golden_min(h, (r1 + s1 - 1.0).max(0.0), r1.min(s1)).1
}

/// `inf { I(φ) : φ₁ ∈ [lo, hi] }` for a full-support 2×2 `λ`, with
/// `I(φ) = J(φ, ψ) − H(ψ | λ_S)`. `J(·, ψ)` is convex, so a nested golden
/// section is exact up to its tolerance.
pub fn inf_rate_on_interval(lambda: &[f64], psi1: f64, lo: f64, hi: f64) -> f64 {
    let ls1 = lambda[0] + lambda[2];
    let base = kl(&[psi1, 1.0 - psi1], &[ls1, 1.0 - ls1]);
    golden_min(|x| j_two_by_two(lambda, x, psi1), lo, hi).1 - base
}

/// All count vectors of length `k` summing to `n`.
pub fn compositions(n: u32, k: usize) -> Vec<Vec<u32>> {
    if k == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in compositions(n - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All words of length `n` over `0..k`.
pub fn sequences(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..k).map(move |c| {
                    let mut v = w.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
    }
    out
}

/// Type (count vector) of a word.
pub fn type_of(word: &[usize], k: usize) -> Vec<u32> {
    let mut c = vec![0u32; k];
    for &w in word {
        c[w] += 1;
    }
    c
}

/// `sup_A |μ(A) − ν(A)|` on a finite set.
pub fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// fd-nearest count vector to `target` by exhaustive search, first in the
/// descending-lexicographic order on ties.
pub fn nearest_exhaustive(target: &[f64], n: u32) -> Vec<u32> {
    let mut all = compositions(n, target.len());
    all.sort_by(|a, b| b.cmp(a));
    let mut best: Option<(f64, Vec<u32>)> = None;
    for c in all {
        let p: Vec<f64> = c.iter().map(|&x| x as f64 / n as f64).collect();
        let d = tv(&p, target);
        if best.as_ref().is_none_or(|(bd, _)| d < *bd - 1e-15) {
            best = Some((d, c));
        }
    }
    best.expect("nonempty simplex").1
}
