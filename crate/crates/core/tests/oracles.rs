//! Library routines against brute-force and quadrature oracles.

mod common;

use common::*;
use condldp::empirical::{enumerate_couplings, log_multinomial_prob, nearest_empirical, Caps, EmpiricalMeasure};
use condldp::finite_measures::{conditional_theta, Dist, FiniteMeasure};
use condldp::gallery::{self, GaussianPairFamily};
use condldp::kernels::eta_point_mass;
use condldp::rate::{i_projection, IpfOptions};
use condldp::sampling;
use rand::seq::SliceRandom;

#[test]
fn multinomial_law_matches_sequence_sums() {
    let mut rng = rng(11);
    for _ in 0..6 {
        let (nr, ns) = (sampling::size(&mut rng, 1, 2), sampling::size(&mut rng, 1, 2));
        let lambda = sampling::joint(&mut rng, nr, ns, 0.2);
        let m = nr * ns;
        for n in 1..=4u32 {
            let mut by_type = std::collections::HashMap::new();
            for word in sequences(n as usize, m) {
                let p: f64 = word.iter().map(|&c| lambda.weights()[c]).product();
                *by_type.entry(type_of(&word, m)).or_insert(0.0) += p;
            }
            for nu in enumerate_couplings(n, lambda.rows(), lambda.cols(), &Caps::default()).unwrap() {
                let want = by_type[nu.counts()];
                let got = log_multinomial_prob(&nu, &lambda).unwrap().exp();
                assert!((got - want).abs() <= 1e-13, "n={n} counts={:?}: {got} vs {want}", nu.counts());
            }
        }
    }
}

/// `P(L_n(X) = φ | Y = y)` for `X_i ~ θ(y_i, ·)` independently.
fn conditional_type_prob(theta: &condldp::finite_measures::Kernel, y: &[usize], phi: &[u32]) -> f64 {
    let nr = phi.len();
    sequences(y.len(), nr)
        .into_iter()
        .filter(|x| type_of(x, nr) == phi)
        .map(|x| x.iter().zip(y).map(|(&r, &s)| theta.prob(s, r)).product::<f64>())
        .sum()
}

#[test]
fn kernel_depends_on_zeta_only() {
    let mut rng = rng(12);
    for _ in 0..8 {
        let (nr, ns) = (sampling::size(&mut rng, 2, 3), sampling::size(&mut rng, 2, 3));
        let lambda = sampling::joint_with_column_support(&mut rng, nr, ns, 0.25);
        let theta = conditional_theta(&lambda).unwrap();
        let n = sampling::size(&mut rng, 2, 5) as u32;
        let target = sampling::dist(&mut rng, lambda.cols().clone());
        let zeta = nearest_empirical(&target, n).unwrap();
        let mut y: Vec<usize> = zeta.counts().iter().enumerate().flat_map(|(s, &c)| std::iter::repeat_n(s, c as usize)).collect();
        let mut y2 = y.clone();
        y2.shuffle(&mut rng);
        y.reverse();
        for phi in compositions(n, nr) {
            let a = conditional_type_prob(&theta, &y, &phi);
            let b = conditional_type_prob(&theta, &y2, &phi);
            let lib = eta_point_mass(n, &zeta, &EmpiricalMeasure::new(lambda.rows().clone(), phi.clone()).unwrap(), &theta, &Caps::default())
                .unwrap();
            assert!((a - b).abs() <= 1e-14, "two realizations of ζ disagree: {a} vs {b}");
            assert!((lib - a).abs() <= 1e-13, "table route {lib} vs sequences {a} at φ={phi:?}");
        }
    }
}

#[test]
fn nearest_empirical_is_a_minimizer() {
    let mut rng = rng(13);
    for _ in 0..60 {
        let k = sampling::size(&mut rng, 2, 4);
        let n = sampling::size(&mut rng, 1, 12) as u32;
        let target = sampling::dist(&mut rng, condldp::finite_measures::Alphabet::numbered("s", k));
        let got = nearest_empirical(&target, n).unwrap();
        let best = nearest_exhaustive(target.weights(), n);
        let d = |c: &[u32]| tv(&c.iter().map(|&x| x as f64 / n as f64).collect::<Vec<_>>(), target.weights());
        assert!(d(got.counts()) <= d(&best) + 1e-15);
        assert!(d(got.counts()) <= k as f64 / (2.0 * n as f64) + 1e-15);
    }
}

#[test]
fn ipf_matches_one_dof_search() {
    let mut rng = rng(14);
    for _ in 0..100 {
        let lambda = sampling::joint_full_support(&mut rng, 2, 2);
        let rho = sampling::dist(&mut rng, lambda.rows().clone());
        let sigma = sampling::dist(&mut rng, lambda.cols().clone());
        let got = i_projection(&lambda, &rho, &sigma, &IpfOptions::default()).unwrap().value;
        let want = j_two_by_two(lambda.weights(), rho.get(0), sigma.get(0));
        assert!((got - want).abs() <= 1e-8, "{got} vs {want}");
    }
}

#[test]
fn cumulant_matches_quadrature() {
    let fam = GaussianPairFamily::new(-0.4).unwrap();
    let (lam, y) = (1.3, 0.7);
    for n in [1u32, 2, 5, 10] {
        let nf = n as f64;
        let y_n = y + 1.0 / nf;
        let mean = fam.r() * y_n;
        let sd = 1.0 / nf.sqrt();
        let closed = gallery::gaussian_cumulant(n, y_n, lam, &fam);
        let scale = (nf * closed).exp();
        let centre = mean + lam;
        let mgf = integrate(|x| (nf * lam * x).exp() * phi((x - mean) / sd) / sd, centre - 40.0 * sd, centre + 40.0 * sd, 1e-15 * scale);
        let quad = mgf.ln() / nf;
        assert!((quad - closed).abs() <= 1e-12, "n={n}: {quad} vs {closed}");
    }
}

#[test]
fn exponential_weights_match_quadrature() {
    for n in [1u32, 10, 100] {
        let nf = n as f64;
        let ramp = |y: f64| (nf * y).min(1.0);
        let dens = |y: f64| nf * (-nf * y).exp();
        let w1 = integrate(|y| ramp(y) * dens(y), 0.0, 1.0 / nf, 1e-15);
        let w2 = integrate(|y| (1.0 - ramp(y)) * dens(y), 0.0, 1.0 / nf, 1e-15);
        let (a, b) = gallery::exponential_mixture_weights(n).unwrap();
        assert!((a - w1).abs() <= 1e-12 && (b - w2).abs() <= 1e-12, "n={n}: ({a}, {b}) vs ({w1}, {w2})");
    }
}

/// Counterexample ratio with the Gaussian tail written as `φ(√n)` times a
/// Mills-ratio integral, both window integrals by quadrature.
fn counterexample_by_quadrature(n: u32, m: u32) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    let s = nf.sqrt();
    let mills = integrate(|u| (-u * s - 0.5 * u * u).exp(), 0.0, 60.0 / s, 1e-16);
    let tail = phi(s) * mills;
    let dens = |y: f64| nf * (-nf * y).exp();
    let top = integrate(|y| nf * y * dens(y), 0.0, 1.0 / mf, 1e-17);
    let bottom = integrate(dens, 0.0, 1.0 / mf, 1e-17);
    tail * top / bottom
}

#[test]
fn counterexample_matches_quadrature() {
    for m in [50u32, 500, 5000] {
        let q = counterexample_by_quadrature(50, m);
        let c = gallery::counterexample_ratio(50, m).unwrap();
        assert!(((c - q) / q).abs() <= 1e-12, "m={m}: {c} vs {q}");
    }
}

#[test]
fn epsilon_calibration_matches_quadrature() {
    let beta = integrate(phi, -1.0, 1.0, 1e-15);
    for n in [1u32, 4, 16, 100] {
        let c = gallery::find_epsilon_n(n).unwrap();
        let nf = n as f64;
        let sd = 1.0 / nf.sqrt();
        let dens = |z: f64| phi(z / sd) / sd;
        let (e, k) = (c.epsilon, c.kappa);
        let ramp = |z: f64| (z.abs() / e).min(1.0) * dens(z);
        let r = integrate(ramp, -e, 0.0, 1e-15) + integrate(ramp, 0.0, e, 1e-15) + 2.0 * integrate(dens, e, k, 1e-15);
        let window = integrate(dens, -k, k, 1e-15);
        assert!((r - 0.5 * beta).abs() <= 1e-10, "n={n}: ramp {r} vs β/2 {}", 0.5 * beta);
        assert!(((window - r) - 0.5 * beta).abs() <= 1e-10, "n={n}: flat part");
        assert!((c.beta - beta).abs() <= 1e-13);
    }
}

#[test]
fn ball_consistency_of_ipf_values() {
    // J(φ, ·) restricted to shrinking S-balls around ψ rises to J(φ, ψ).
    let mut rng = rng(15);
    for _ in 0..20 {
        let lambda = sampling::joint_full_support(&mut rng, 2, 2);
        let phi_d = sampling::dist(&mut rng, lambda.rows().clone());
        let psi = sampling::dist(&mut rng, lambda.cols().clone());
        let opts = IpfOptions::default();
        let j = |s1: f64| {
            let sigma = Dist::new(lambda.cols().clone(), vec![s1, 1.0 - s1]).unwrap();
            i_projection(&lambda, &phi_d, &sigma, &opts).unwrap().value
        };
        let at = j(psi.get(0));
        let mut prev = f64::NEG_INFINITY;
        for eps in [0.1, 0.01, 0.001] {
            let lo = (psi.get(0) - eps).max(1e-9);
            let hi = (psi.get(0) + eps).min(1.0 - 1e-9);
            let v = golden_min(j, lo, hi).1;
            assert!(v >= prev - 1e-9 && v <= at + 1e-9, "ε={eps}: {v} not in [{prev}, {at}]");
            prev = v;
        }
        assert!(at - prev <= 0.02, "inf over the 0.001-ball {prev} far from J(φ,ψ) = {at}");
    }
}
