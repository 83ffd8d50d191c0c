use crate::network::Instance;
use crate::profiles::ProfileMatrix;

use super::decode::{finish, step, DecodeState, Eval};
use super::solution::{penalized_cost, Penalties, RoutePlan};

/// Optimal partition of `perm` into at most `inst.vehicles` consecutive routes
/// minimizing the penalized total duration. `window` caps the number of
/// services per route. The plan has exactly `inst.vehicles` route slots.
pub fn split_giant_tour(
    inst: &Instance,
    pm: &ProfileMatrix,
    perm: &[usize],
    w: Penalties,
    window: Option<usize>,
) -> RoutePlan {
    let n = perm.len();
    let m = inst.vehicles.max(1);
    let window = window.unwrap_or(n).max(1);
    // cost[i][len-1]: route perm[i..i+len]
    let mut cost = vec![Vec::new(); n];
    for (i, row) in cost.iter_mut().enumerate() {
        let mut state = DecodeState::DEPOT;
        let mut load = 0.0;
        for &s in &perm[i..n.min(i + window)] {
            state = step(pm, Eval::Extended, &state, s).0;
            load += inst.demand(s);
            let d = finish(pm, Eval::Extended, &state).0;
            row.push(penalized_cost(d, load, inst.duration_limit, inst.capacity, w));
        }
    }
    let mut dp = vec![vec![f64::INFINITY; n + 1]; m + 1];
    let mut pred = vec![vec![0usize; n + 1]; m + 1];
    dp[0][0] = 0.0;
    for k in 1..=m {
        for j in 1..=n {
            for i in j.saturating_sub(window)..j {
                let c = dp[k - 1][i] + cost[i][j - i - 1];
                if c < dp[k][j] {
                    dp[k][j] = c;
                    pred[k][j] = i;
                }
            }
        }
    }
    let best_k = (1..=m).fold(0, |b, k| if dp[k][n] < dp[b][n] { k } else { b });
    if best_k == 0 && n > 0 {
        if window < n {
            // Window too small for the fleet: fall back to an unbounded split.
            return split_giant_tour(inst, pm, perm, w, None);
        }
        let mut routes = vec![perm.to_vec()];
        routes.resize(m, Vec::new());
        return RoutePlan::evaluate(inst, pm, routes);
    }
    let mut routes = Vec::with_capacity(m);
    let (mut k, mut j) = (best_k, n);
    while k > 0 {
        let i = pred[k][j];
        routes.push(perm[i..j].to_vec());
        j = i;
        k -= 1;
    }
    routes.reverse();
    routes.resize(m, Vec::new());
    RoutePlan::evaluate(inst, pm, routes)
}
