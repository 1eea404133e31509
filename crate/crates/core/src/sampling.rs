//! Seeded random instances for property checks and the `verify` suite.

use rand::Rng;

use crate::finite_measures::{Alphabet, Dist, JointDist};

/// Seed used whenever the caller does not supply one.
pub const DEFAULT_SEED: u64 = 0x5EED_C0DE;

pub fn size<R: Rng>(rng: &mut R, lo: usize, hi: usize) -> usize {
    rng.gen_range(lo..=hi)
}

/// Exponential(1) weights, normalized; every entry is positive.
fn positive_weights<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln() + 1e-3).collect();
    let t: f64 = w.iter().sum();
    w.into_iter().map(|x| x / t).collect()
}

pub fn dist<R: Rng>(rng: &mut R, alphabet: Alphabet) -> Dist {
    let w = positive_weights(rng, alphabet.size());
    Dist::from_unnormalized(alphabet, w).expect("positive weights")
}

pub fn joint_full_support<R: Rng>(rng: &mut R, nr: usize, ns: usize) -> JointDist {
    let w = positive_weights(rng, nr * ns);
    JointDist::from_raw(Alphabet::numbered("r", nr), Alphabet::numbered("s", ns), w)
}

/// Random joint distribution where each cell is zero with probability `p_zero`
/// (at least one cell stays positive).
pub fn joint<R: Rng>(rng: &mut R, nr: usize, ns: usize, p_zero: f64) -> JointDist {
    let mut w = positive_weights(rng, nr * ns);
    let keep = rng.gen_range(0..w.len());
    for (i, x) in w.iter_mut().enumerate() {
        if i != keep && rng.gen_bool(p_zero) {
            *x = 0.0;
        }
    }
    JointDist::from_raw(Alphabet::numbered("r", nr), Alphabet::numbered("s", ns), w)
}

/// Random joint distribution with every column carrying positive mass.
pub fn joint_with_column_support<R: Rng>(rng: &mut R, nr: usize, ns: usize, p_zero: f64) -> JointDist {
    let mut w = positive_weights(rng, nr * ns);
    for s in 0..ns {
        let keep = rng.gen_range(0..nr);
        for r in 0..nr {
            if r != keep && rng.gen_bool(p_zero) {
                w[r * ns + s] = 0.0;
            }
        }
    }
    JointDist::from_raw(Alphabet::numbered("r", nr), Alphabet::numbered("s", ns), w)
}
