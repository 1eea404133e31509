//! Support feasibility of a transportation polytope by maximum flow.

use std::collections::VecDeque;

/// Result of pushing `ρ` through the support graph of `λ` to `σ`.
#[derive(Debug, Clone)]
pub struct SupportFlow {
    /// Total flow; the polytope is nonempty iff this reaches 1.
    pub value: f64,
    /// Flow on each cell, row-major.
    pub cells: Vec<f64>,
    /// Cells that are positive in some feasible coupling, row-major.
    pub free: Vec<bool>,
}

const FLOW_EPS: f64 = 1e-13;

/// Edmonds–Karp on source → rows → columns → sink. Row `r` has supply
/// `rho[r]`, column `s` demand `sigma[s]`, and `r → s` is an uncapacitated
/// arc when `support[r * ns + s]`.
pub fn support_flow(support: &[bool], rho: &[f64], sigma: &[f64]) -> SupportFlow {
    let nr = rho.len();
    let ns = sigma.len();
    let nodes = nr + ns + 2;
    let (src, sink) = (nr + ns, nr + ns + 1);
    let mut cap = vec![vec![0.0f64; nodes]; nodes];
    for r in 0..nr {
        cap[src][r] = rho[r];
        for s in 0..ns {
            if support[r * ns + s] {
                cap[r][nr + s] = f64::INFINITY;
            }
        }
    }
    for s in 0..ns {
        cap[nr + s][sink] = sigma[s];
    }
    let mut flow = vec![vec![0.0f64; nodes]; nodes];
    let mut total = 0.0;
    loop {
        let mut prev = vec![usize::MAX; nodes];
        prev[src] = src;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            if u == sink {
                break;
            }
            for v in 0..nodes {
                if prev[v] == usize::MAX && cap[u][v] - flow[u][v] > FLOW_EPS {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[sink] == usize::MAX {
            break;
        }
        let mut push = f64::INFINITY;
        let mut v = sink;
        while v != src {
            let u = prev[v];
            push = push.min(cap[u][v] - flow[u][v]);
            v = u;
        }
        let mut v = sink;
        while v != src {
            let u = prev[v];
            flow[u][v] += push;
            flow[v][u] -= push;
            v = u;
        }
        total += push;
    }
    let cells: Vec<f64> = (0..nr * ns).map(|i| flow[i / ns][nr + i % ns].max(0.0)).collect();
    // (r,s) can carry mass iff it already does, or the residual graph has a
    // path s → … → r closing a cycle through r → s.
    let mut free = vec![false; nr * ns];
    for s0 in 0..ns {
        let mut seen_r = vec![false; nr];
        let mut seen_s = vec![false; ns];
        seen_s[s0] = true;
        let mut stack = vec![s0];
        while let Some(s) = stack.pop() {
            for r in 0..nr {
                if !seen_r[r] && cells[r * ns + s] > FLOW_EPS {
                    seen_r[r] = true;
                    for s2 in 0..ns {
                        if support[r * ns + s2] && !seen_s[s2] {
                            seen_s[s2] = true;
                            stack.push(s2);
                        }
                    }
                }
            }
        }
        for r in 0..nr {
            let i = r * ns + s0;
            free[i] = support[i] && (cells[i] > FLOW_EPS || seen_r[r]);
        }
    }
    SupportFlow { value: total, cells, free }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_support_forces_equal_margins() {
        let sup = [true, false, false, true];
        let f = support_flow(&sup, &[0.5, 0.5], &[0.5, 0.5]);
        assert!((f.value - 1.0).abs() < 1e-15);
        let f = support_flow(&sup, &[0.6, 0.4], &[0.5, 0.5]);
        assert!((f.value - 0.9).abs() < 1e-15);
    }

    #[test]
    fn forced_zero_cells_are_detected() {
        // full support, but σ puts everything on column 0 except what row 1 must send
        let sup = [true, true, false, true];
        // row 0 → col 0 or 1, row 1 → col 1 only; ρ = (.5,.5), σ = (.5,.5)
        let f = support_flow(&sup, &[0.5, 0.5], &[0.5, 0.5]);
        assert!((f.value - 1.0).abs() < 1e-15);
        assert_eq!(f.free, vec![true, false, false, true]);
        let f = support_flow(&sup, &[0.7, 0.3], &[0.5, 0.5]);
        assert_eq!(f.free, vec![true, true, false, true]);
    }
}
