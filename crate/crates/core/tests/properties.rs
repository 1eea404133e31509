//! Invariants over seeded random instances. Each case draws its instance
//! from a ChaCha stream keyed by the proptest-chosen seed, so shrinking
//! works on the seed and failures replay exactly.

mod common;

use common::rng;
use condldp::empirical::{count_compositions, densify, enumerate_couplings, enumerate_empirical, log_multinomial_prob, nearest_empirical, Caps};
use condldp::finite_measures::{
    conditional_theta, log_sum, max_entry_gap, prohorov_distance, relative_entropy, Alphabet, Dist, FiniteMeasure, JointDist,
};
use condldp::gallery;
use condldp::harness::{rate_targets, sanov_convergence, unconditioned_rate, ScenarioConfig};
use condldp::kernels::{eta_event, eta_via_conditioning};
use condldp::rate::{i_projection, inf_over_s_margin, ipf_trace, rate_i, rate_zero, Comparison, IpfOptions, SetDescriptor};
use condldp::rounding::{certificate_for, check_match, match_s_margin, round_to_grid};
use condldp::sampling;
use proptest::prelude::*;
use rand::Rng;

fn tv(a: &[f64], b: &[f64]) -> f64 {
    common::tv(a, b)
}

/// `ξ ≪ λ` with random positive weights on the support of `λ`.
fn dominated<R: Rng>(rng: &mut R, lambda: &JointDist) -> JointDist {
    let raw: Vec<f64> = lambda.weights().iter().map(|&w| if w > 0.0 { rng.gen::<f64>() + 0.05 } else { 0.0 }).collect();
    let t: f64 = raw.iter().sum();
    JointDist::new(lambda.rows().clone(), lambda.cols().clone(), raw.iter().map(|w| w / t).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn relative_entropy_is_a_divergence(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (nr, ns) = (sampling::size(&mut r, 1, 3), sampling::size(&mut r, 1, 3));
        let lambda = sampling::joint_full_support(&mut r, nr, ns);
        let xi = sampling::joint(&mut r, nr, ns, 0.3);
        let h = relative_entropy(&xi, &lambda).unwrap();
        prop_assert!(h >= 0.0);
        prop_assert!(relative_entropy(&lambda, &lambda).unwrap().abs() <= 1e-15);
        if max_entry_gap(&xi, &lambda).unwrap() > 1e-6 {
            prop_assert!(h > 0.0);
        }
    }

    #[test]
    fn prohorov_is_a_metric_bounded_by_entry_gaps(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = sampling::size(&mut r, 1, 6);
        let a = Alphabet::numbered("x", k);
        let (p, q, s) = (sampling::dist(&mut r, a.clone()), sampling::dist(&mut r, a.clone()), sampling::dist(&mut r, a));
        let d = |x: &Dist, y: &Dist| prohorov_distance(x, y).unwrap();
        prop_assert_eq!(d(&p, &q), d(&q, &p));
        prop_assert!(d(&p, &s) <= d(&p, &q) + d(&q, &s) + 1e-15);
        prop_assert!(d(&p, &q) <= k as f64 * max_entry_gap(&p, &q).unwrap() + 1e-15);
        prop_assert!((d(&p, &q) - tv(p.weights(), q.weights())).abs() <= 1e-15);
    }

    #[test]
    fn theta_reassembles_lambda(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (nr, ns) = (sampling::size(&mut r, 1, 4), sampling::size(&mut r, 1, 4));
        let lambda = sampling::joint_with_column_support(&mut r, nr, ns, 0.3);
        let back = conditional_theta(&lambda).unwrap().compose_with(&lambda.col_marginal()).unwrap();
        prop_assert!(max_entry_gap(&back, &lambda).unwrap() <= 1e-15);
    }

    #[test]
    fn log_sum_is_between_max_and_max_plus_log_k(values in prop::collection::vec(-700.0f64..700.0, 1..20)) {
        let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let s = log_sum(&values).unwrap();
        prop_assert!(m <= s && s <= m + (values.len() as f64).ln() + 1e-12);
    }

    #[test]
    fn simplex_enumeration_is_complete_and_distinct(n in 1u32..9, k in 1usize..5) {
        let all = enumerate_empirical(n, &Alphabet::numbered("s", k), &Caps::default()).unwrap();
        prop_assert_eq!(all.len() as u128, count_compositions(n as usize, k));
        let set: std::collections::HashSet<Vec<u32>> = all.iter().map(|e| e.counts().to_vec()).collect();
        prop_assert_eq!(set.len(), all.len());
        prop_assert!(all.iter().all(|e| e.counts().iter().sum::<u32>() == n));
    }

    #[test]
    fn densify_lands_on_the_finer_grid(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = sampling::size(&mut r, 1, 4);
        let kn = sampling::size(&mut r, 1, 8) as u32;
        let zeta = nearest_empirical(&sampling::dist(&mut r, Alphabet::numbered("s", k)), kn).unwrap();
        let l = sampling::size(&mut r, 1, 10) as u32;
        let m = kn * l + r.gen_range(0..3 * kn);
        let out = densify(&zeta, l, m).unwrap();
        prop_assert_eq!(out.n(), m);
        prop_assert!(tv(out.to_dist().weights(), zeta.to_dist().weights()) <= 2.0 / (m / kn) as f64 + 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn multinomial_law_sums_to_one(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (nr, ns) = (sampling::size(&mut r, 1, 3), sampling::size(&mut r, 1, 2));
        let lambda = sampling::joint(&mut r, nr, ns, 0.2);
        let n = sampling::size(&mut r, 1, 10) as u32;
        let lps: Vec<f64> = enumerate_couplings(n, lambda.rows(), lambda.cols(), &Caps::default())
            .unwrap()
            .iter()
            .map(|nu| log_multinomial_prob(nu, &lambda).unwrap())
            .collect();
        prop_assert!((log_sum(&lps).unwrap().exp() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn kernel_is_normalized_and_both_routes_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (nr, ns) = (sampling::size(&mut r, 2, 3), sampling::size(&mut r, 2, 3));
        let lambda = sampling::joint_with_column_support(&mut r, nr, ns, 0.3);
        let theta = conditional_theta(&lambda).unwrap();
        let n = sampling::size(&mut r, 1, 6) as u32;
        let zeta = nearest_empirical(&sampling::dist(&mut r, lambda.cols().clone()), n).unwrap();
        let caps = Caps::default();
        let all = |_: &Dist| true;
        prop_assert!((eta_event(n, &zeta, &all, &theta, &caps).unwrap() - 1.0).abs() <= 1e-10);
        let (i, t) = (r.gen_range(0..nr), r.gen::<f64>());
        let ev = move |d: &Dist| d.get(i) >= t;
        let a = eta_event(n, &zeta, &ev, &theta, &caps).unwrap();
        let b = eta_via_conditioning(n, &zeta, &ev, &lambda, &caps).unwrap();
        prop_assert!((a - b).abs() <= 1e-10, "{} vs {}", a, b);
    }

    #[test]
    fn ipf_approaches_its_limit_monotonically(seed in any::<u64>()) {
        // H(ξ* | ξ_k) falls at every sweep: each half-step is an I-projection
        // onto a linear family containing ξ*. H(ξ_k | λ) itself need not be
        // monotone.
        let mut r = rng(seed);
        let (nr, ns) = (sampling::size(&mut r, 2, 4), sampling::size(&mut r, 2, 4));
        let lambda = sampling::joint_full_support(&mut r, nr, ns);
        let rho = sampling::dist(&mut r, lambda.rows().clone());
        let sigma = sampling::dist(&mut r, lambda.cols().clone());
        let steps = ipf_trace(&lambda, &rho, &sigma, &IpfOptions::default()).unwrap();
        let limit = i_projection(&lambda, &rho, &sigma, &IpfOptions::default()).unwrap().minimizer.unwrap();
        let gaps: Vec<f64> = steps.iter().map(|s| common::kl(limit.weights(), &s.iterate)).collect();
        for w in gaps.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-13, "{} then {}", w[0], w[1]);
        }
        prop_assert!((steps.last().unwrap().entropy - relative_entropy(&limit, &lambda).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn rate_is_nonnegative_and_vanishes_at_its_zero(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (nr, ns) = (sampling::size(&mut r, 2, 3), sampling::size(&mut r, 2, 3));
        let lambda = sampling::joint_full_support(&mut r, nr, ns);
        let psi = sampling::dist(&mut r, lambda.cols().clone());
        let phi = sampling::dist(&mut r, lambda.rows().clone());
        let (base, _) = inf_over_s_margin(&lambda, &psi).unwrap();
        let j = i_projection(&lambda, &phi, &psi, &IpfOptions::default()).unwrap().value;
        prop_assert!(j >= base - 1e-12);
        let zero = rate_zero(&lambda, &psi).unwrap();
        prop_assert!(rate_i(&lambda, &psi, &zero, &IpfOptions::default()).unwrap() <= 1e-12);
    }

    #[test]
    fn rate_is_continuous_inside_the_feasible_region(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (nr, ns) = (sampling::size(&mut r, 2, 3), sampling::size(&mut r, 2, 3));
        let lambda = sampling::joint_full_support(&mut r, nr, ns);
        let psi = sampling::dist(&mut r, lambda.cols().clone());
        let phi = sampling::dist(&mut r, lambda.rows().clone());
        let shift: f64 = r.gen_range(0.0..1e-4);
        let (from, to) = (r.gen_range(0..nr), r.gen_range(0..nr));
        let mut w = phi.weights().to_vec();
        let moved = shift.min(w[from]);
        w[from] -= moved;
        w[to] += moved;
        let phi2 = Dist::new(lambda.rows().clone(), w).unwrap();
        prop_assert!(tv(phi.weights(), phi2.weights()) <= 1e-4);
        let opts = IpfOptions::default();
        let gap = (rate_i(&lambda, &psi, &phi, &opts).unwrap() - rate_i(&lambda, &psi, &phi2, &opts).unwrap()).abs();
        prop_assert!(gap <= 1e-2, "gap {}", gap);
    }

    #[test]
    fn grid_rounding_keeps_support_and_mass(seed in any::<u64>()) {
        let mut r = rng(seed);
        for _ in 0..10 {
            let (nr, ns) = (sampling::size(&mut r, 1, 4), sampling::size(&mut r, 1, 4));
            let xi = sampling::joint(&mut r, nr, ns, 0.3);
            let n = sampling::size(&mut r, 1, 300) as u32;
            let nu = round_to_grid(&xi, n).unwrap();
            prop_assert_eq!(nu.counts().iter().sum::<u32>(), n);
            for (i, &c) in nu.counts().iter().enumerate() {
                prop_assert!(c == 0 || xi.weights()[i] > 0.0);
                prop_assert!((c as f64 / n as f64 - xi.weights()[i]).abs() <= 2.0 / n as f64);
            }
        }
    }

    #[test]
    fn margin_matching_meets_every_bound(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (nr, ns) = (sampling::size(&mut r, 1, 3), sampling::size(&mut r, 1, 3));
        let lambda = sampling::joint_with_column_support(&mut r, nr, ns, 0.2);
        let xi = dominated(&mut r, &lambda);
        let n = sampling::size(&mut r, 10, 200) as u32;
        let zeta = nearest_empirical(&sampling::dist(&mut r, lambda.cols().clone()), n).unwrap();
        let nu = match_s_margin(&xi, &zeta, &lambda).unwrap();
        let c = check_match(&xi, &zeta, &lambda, &nu);
        prop_assert!(c.passed(), "{:?}", c);
    }

    #[test]
    fn certificate_realizes_the_rounding_lemma(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (nr, ns) = (sampling::size(&mut r, 1, 2), sampling::size(&mut r, 1, 2));
        let lambda = sampling::joint_with_column_support(&mut r, nr, ns, 0.2);
        let xi = dominated(&mut r, &lambda);
        let delta = r.gen_range(0.05..0.5);
        let cert = certificate_for(&xi, delta).unwrap();
        prop_assert!(cert.holds(xi.m()));
        // ζ = nearest grid point has fd ≤ #S/(2n), so this n puts it inside κ
        let need = (ns as f64 / (2.0 * cert.kappa)).floor() as u32 + 1;
        let n = cert.n_min.max(need) + r.gen_range(0..50);
        let zeta = nearest_empirical(&xi.col_marginal(), n).unwrap();
        prop_assert!(tv(zeta.to_dist().weights(), xi.col_marginal().weights()) < cert.kappa);
        let nu = match_s_margin(&xi, &zeta, &lambda).unwrap();
        let joint = nu.to_joint();
        prop_assert!(tv(joint.weights(), xi.weights()) < delta);
        prop_assert!(tv(joint.row_marginal().weights(), xi.row_marginal().weights()) < delta);
    }

    #[test]
    fn interior_target_never_exceeds_closure_target(seed in any::<u64>()) {
        let mut r = rng(seed);
        let lambda = sampling::joint(&mut r, 2, 2, 0.2);
        if lambda.check_column_support().is_err() {
            return Ok(());
        }
        let psi = sampling::dist(&mut r, lambda.cols().clone());
        let cmp = [Comparison::Ge, Comparison::Gt, Comparison::Le, Comparison::Lt][r.gen_range(0..4)];
        let event = SetDescriptor::Halfspace { coord: r.gen_range(0..2), cmp, threshold: r.gen::<f64>() };
        let (lo, hi) = rate_targets(&lambda, &psi, &event, 0.01).unwrap();
        prop_assert!(lo <= hi, "{} > {}", lo, hi);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn product_lambda_reproduces_unconditioned_sanov(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = sampling::dist(&mut r, Alphabet::numbered("r", 2));
        let sigma = sampling::dist(&mut r, Alphabet::numbered("s", 2));
        let lambda = rho.product(&sigma);
        let event = SetDescriptor::Halfspace { coord: 0, cmp: Comparison::Ge, threshold: r.gen_range(0.0..1.0) };
        let psi = sampling::dist(&mut r, lambda.cols().clone());
        let cfg = ScenarioConfig::new(lambda, psi, event.clone(), vec![20, 60, 150]);
        let run = sanov_convergence(&cfg).unwrap();
        prop_assert!(run.failure.is_none());
        for rep in &run.reports {
            let u = unconditioned_rate(rep.n, &rho, &event, &Caps::default()).unwrap();
            prop_assert!((rep.a_n - u).abs() <= 1e-10 || (rep.a_n == u), "n={}: {} vs {}", rep.n, rep.a_n, u);
        }
    }

    #[test]
    fn sublevel_sets_refine_consistently(seed in any::<u64>()) {
        // On nested grids 1/10, 1/100, 1/1000 of φ(r₁), the smallest grid
        // point of {I ≤ α} decreases and stays within one step of the true
        // edge.
        let mut r = rng(seed);
        let lambda = sampling::joint_full_support(&mut r, 2, 2);
        let psi = sampling::dist(&mut r, lambda.cols().clone());
        let zero = rate_zero(&lambda, &psi).unwrap().get(0);
        let opts = IpfOptions::default();
        let rate = |x: f64| rate_i(&lambda, &psi, &Dist::new(lambda.rows().clone(), vec![x, 1.0 - x]).unwrap(), &opts).unwrap();
        let alpha = r.gen_range(0.01..0.3) * rate(1e-9).min(1.0);
        let (mut lo, mut hi) = (1e-12, zero);
        if rate(lo) <= alpha {
            return Ok(());
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if rate(mid) <= alpha { hi = mid } else { lo = mid }
        }
        let edge = hi;
        let mut prev = f64::INFINITY;
        for steps in [10u32, 100, 1000] {
            let h = 1.0 / steps as f64;
            let first = (1..steps).map(|i| i as f64 * h).find(|&x| x <= zero && rate(x) <= alpha);
            if let Some(x) = first {
                prop_assert!(x <= prev + 1e-12);
                prop_assert!(x >= edge - 1e-9 && x <= edge + h + 1e-9, "grid {} point {} edge {}", steps, x, edge);
                prev = x;
            }
        }
    }

    #[test]
    fn counterexample_stays_under_its_bound(n in 1u32..400, m_exp in 0u32..6) {
        let m = n * 10u32.pow(m_exp.min(4));
        let log_ratio = gallery::counterexample_log_ratio(n, m).unwrap();
        prop_assert!(log_ratio <= gallery::counterexample_log_bound(n, m));
        if m_exp < 4 {
            prop_assert!(gallery::counterexample_log_ratio(n, 10 * m).unwrap() < log_ratio);
        }
    }
}
