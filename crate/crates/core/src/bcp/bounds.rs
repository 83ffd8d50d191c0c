use super::column::Duals;
use super::pricing::PricingContext;

/// Largest table, in cells, before the time grid is coarsened.
const MAX_CELLS: f64 = 4e6;

/// Lower bounds on the reduced cost of completing a partial route, from a
/// backward pass over static maximum-speed times on a time grid.
#[derive(Debug, Clone)]
pub struct CompletionBounds {
    width: f64,
    cap: usize,
    slots: usize,
    table: Vec<f64>,
}

impl CompletionBounds {
    /// Grid step in time units.
    pub fn width(&self) -> f64 {
        self.width
    }

    /// Bound for a label at oriented service `o = 2s + mode`, load `q` and
    /// time `t`; infinite when no relaxed completion exists.
    #[inline]
    pub fn lookup(&self, o: usize, q: u64, t: f64) -> f64 {
        let k = ((t / self.width).floor().max(0.0) as usize).min(self.slots - 1);
        self.table[(o * (self.cap + 1) + q as usize) * self.slots + k]
    }
}

/// Builds the bounds for `duals`. Returns `None` when a demand is zero (the
/// load recursion would not progress) or when the context has no horizon.
pub fn build_completion_bounds(ctx: &PricingContext, duals: &Duals, width: f64) -> Option<CompletionBounds> {
    let n = ctx.service_count();
    if ctx.demand.iter().any(|&d| d == 0) || !(ctx.horizon > 0.0) {
        return None;
    }
    let cap = ctx.capacity as usize;
    let orients = 2 * n;
    let mut width = width.max(1e-9);
    let cells = |w: f64| orients as f64 * (cap + 1) as f64 * ((ctx.horizon / w).floor() + 1.0);
    if cells(width) > MAX_CELLS {
        width = ctx.horizon * orients as f64 * (cap + 1) as f64 / MAX_CELLS;
    }
    let slots = (ctx.horizon / width).floor() as usize + 1;
    let mut table = vec![f64::INFINITY; orients * (cap + 1) * slots];
    let at = |o: usize, q: usize, k: usize| (o * (cap + 1) + q) * slots + k;
    let valid: Vec<(usize, usize)> =
        (0..n).flat_map(|s| (0..ctx.pm.mode_count(s)).map(move |m| (s, m))).collect();
    let ends: Vec<usize> = (0..orients).map(|o| if o % 2 < ctx.pm.mode_count(o / 2) { ctx.pm.service(o / 2, o % 2).end } else { 0 }).collect();
    for k in (0..slots).rev() {
        let time = k as f64 * width;
        for q in (0..=cap).rev() {
            for &(s, m) in &valid {
                let o = 2 * s + m;
                let a = ends[o];
                let mut best = f64::INFINITY;
                let dt = ctx.static_travel[a][0];
                if time + dt <= ctx.horizon && !ctx.deadhead_forbidden(a, 0) && !ctx.required_forbidden(s, n) {
                    best = dt - duals.deadhead_dual(a, 0) - duals.required_dual(s, n);
                }
                for &(s2, m2) in &valid {
                    if s2 == s {
                        continue;
                    }
                    let q2 = q + ctx.demand[s2] as usize;
                    if q2 > cap {
                        continue;
                    }
                    let o2 = 2 * s2 + m2;
                    let b = ctx.pm.service(s2, m2).start;
                    let dt = ctx.static_travel[a][b] + ctx.static_service[o2];
                    if !(time + dt <= ctx.horizon) {
                        continue;
                    }
                    let k2 = (((time + dt) / width).floor() as usize).min(slots - 1);
                    let rest = table[at(o2, q2, k2)];
                    if rest.is_infinite() {
                        continue;
                    }
                    let step = dt - duals.beta[s2] - duals.deadhead_dual(a, b) - duals.required_dual(s, s2);
                    best = best.min(step + rest);
                }
                table[at(o, q, k)] = best;
            }
        }
    }
    Some(CompletionBounds { width, cap, slots, table })
}
