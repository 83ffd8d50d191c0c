use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use crate::network::{Instance, OrdF64};
use crate::profiles::ProfileMatrix;

use super::bounds::CompletionBounds;
use super::column::{Column, Duals};
use super::BcpError;

/// Size of the ng neighborhoods, the service itself included.
pub const NG_SIZE: usize = 4;
const RC_TOL: f64 = 1e-9;
const NONE: u32 = u32::MAX;

/// Instance data shared by every pricing call, plus branching filters.
#[derive(Debug, Clone)]
pub struct PricingContext<'a> {
    pub pm: &'a ProfileMatrix,
    pub demand: Vec<u64>,
    pub capacity: u64,
    pub horizon: f64,
    /// For each service, its ng neighborhood (itself first).
    pub ng: Vec<Vec<usize>>,
    /// Travel time lower bounds at maximum link speed, `[from][to]`.
    pub static_travel: Vec<Vec<f64>>,
    /// Service time at maximum speed per oriented service `2s + mode`.
    pub static_service: Vec<f64>,
    pub forbidden_deadheads: Vec<bool>,
    pub forbidden_required: Vec<bool>,
    pub max_columns: usize,
    pub label_limit: usize,
}

impl<'a> PricingContext<'a> {
    pub fn new(inst: &Instance, pm: &'a ProfileMatrix) -> Self {
        let n = inst.service_count();
        let v = inst.vertex_count;
        let static_travel = inst.static_travel_matrix(|id, dir| {
            inst.links[id].distance / inst.speeds(id, dir).map_or(1.0, |s| s.travel.max_speed())
        });
        let mut static_service = vec![f64::INFINITY; 2 * n];
        for s in 0..n {
            let link = inst.service_link(s);
            for m in 0..inst.mode_count(s) {
                let speed = inst.speeds(link, inst.mode_dir(m)).map_or(1.0, |x| x.service.max_speed());
                static_service[2 * s + m] = inst.links[link].distance / speed;
            }
        }
        Self {
            pm,
            demand: (0..n).map(|s| inst.demand(s).round() as u64).collect(),
            capacity: (inst.capacity + 1e-9).floor() as u64,
            horizon: inst.duration_limit,
            ng: ng_sets(pm, NG_SIZE),
            static_travel,
            static_service,
            forbidden_deadheads: vec![false; v * v],
            forbidden_required: vec![false; (n + 1) * (n + 1)],
            max_columns: 200,
            label_limit: 2_000_000,
        }
    }

    pub fn service_count(&self) -> usize {
        self.demand.len()
    }

    fn vertices(&self) -> usize {
        self.static_travel.len()
    }

    #[inline]
    pub fn deadhead_forbidden(&self, a: usize, b: usize) -> bool {
        a != b && self.forbidden_deadheads[a * self.vertices() + b]
    }

    #[inline]
    pub fn required_forbidden(&self, u: usize, v: usize) -> bool {
        self.forbidden_required[u * (self.service_count() + 1) + v]
    }

    pub fn column_allowed(&self, col: &Column) -> bool {
        let n = self.service_count();
        !col.deadheads(self.pm).iter().any(|&(a, b)| self.deadhead_forbidden(a, b))
            && !col.required_arcs(n).iter().any(|&(u, v)| self.required_forbidden(u, v))
    }

    #[inline]
    fn end_of(&self, o: u32) -> usize {
        if o == NONE {
            0
        } else {
            self.pm.service(o as usize / 2, o as usize % 2).end
        }
    }

    #[inline]
    fn prev_node(&self, o: u32) -> usize {
        if o == NONE {
            self.service_count()
        } else {
            o as usize / 2
        }
    }

    /// Completion time and dual increment of extending from `o` (or the depot)
    /// at time `t` to the oriented service `(s, m)`; `None` when infeasible.
    #[inline]
    fn step(&self, duals: &Duals, o: u32, t: f64, s: usize, m: usize) -> Option<(f64, f64)> {
        let a = self.end_of(o);
        let sm = self.pm.service(s, m);
        let p = self.prev_node(o);
        if self.deadhead_forbidden(a, sm.start) || self.required_forbidden(p, s) {
            return None;
        }
        let arrive = self.pm.arrival(a, sm.start, t)?;
        let done = self.pm.service_completion(s, m, arrive)?;
        if done > self.horizon {
            return None;
        }
        Some((done, duals.beta[s] + duals.deadhead_dual(a, sm.start) + duals.required_dual(p, s)))
    }

    /// Return time and dual increment of closing the route after `o`.
    #[inline]
    fn close(&self, duals: &Duals, o: u32, t: f64) -> Option<(f64, f64)> {
        let a = self.end_of(o);
        let p = self.prev_node(o);
        let n = self.service_count();
        if self.deadhead_forbidden(a, 0) || self.required_forbidden(p, n) {
            return None;
        }
        let back = self.pm.arrival(a, 0, t)?;
        (back <= self.horizon).then(|| (back, duals.deadhead_dual(a, 0) + duals.required_dual(p, n)))
    }

    /// ng memory of the extension to `s`, as a bit mask over `ng[s]`.
    #[inline]
    fn extend_memory(&self, o: u32, mem: u8, s: usize) -> Option<u8> {
        let in_mem = |x: usize| {
            if o == NONE {
                return false;
            }
            let list = &self.ng[o as usize / 2];
            list.iter().enumerate().any(|(k, &y)| y == x && mem >> k & 1 == 1)
        };
        if in_mem(s) {
            return None;
        }
        let mut out = 0u8;
        for (k, &y) in self.ng[s].iter().enumerate() {
            if y == s || in_mem(y) {
                out |= 1 << k;
            }
        }
        Some(out)
    }
}

/// For each service, itself and its `size - 1` closest services by the static
/// estimate `Φ̂(0)/2 + Ψ(0) + Φ̂(0)/2` minimized over mode pairs.
pub fn ng_sets(pm: &ProfileMatrix, size: usize) -> Vec<Vec<usize>> {
    pm.neighbor_lists(size.saturating_sub(1))
        .into_iter()
        .enumerate()
        .map(|(s, mut list)| {
            list.insert(0, s);
            list
        })
        .collect()
}

/// Label dominance rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dominance {
    /// Earlier, lighter, larger dual sum and smaller memory.
    Exact,
    /// As `Exact` with the dual sum test relaxed to `ξ1 + μ(Φ2 − Φ1) ≥ ξ2`.
    Heuristic(f64),
    /// Single reduced-cost comparison. Not valid under time dependency; kept
    /// for comparison only.
    ReducedCostOnly,
}

#[inline]
fn dominates(rule: Dominance, a: (u64, f64, f64), b: (u64, f64, f64), mem_subset: bool) -> bool {
    let (q1, t1, x1) = a;
    let (q2, t2, x2) = b;
    if !mem_subset || q1 > q2 {
        return false;
    }
    match rule {
        Dominance::Exact => t1 <= t2 && x1 >= x2,
        Dominance::Heuristic(mu) => t1 <= t2 && x1 + mu * (t2 - t1) >= x2,
        Dominance::ReducedCostOnly => t1 - x1 <= t2 - x2,
    }
}

/// A partial path, as seen by the dominance rules.
#[derive(Debug, Clone, PartialEq)]
pub struct PathLabel {
    /// Last oriented service, `None` at the depot.
    pub last: Option<(usize, usize)>,
    pub load: u64,
    /// Completion time of the last service.
    pub time: f64,
    /// Dual sum, fleet dual included.
    pub dual_sum: f64,
    /// Memory of serviced links (ng-relaxed).
    pub memory: Vec<usize>,
}

impl PathLabel {
    pub fn depot(duals: &Duals) -> Self {
        Self { last: None, load: 0, time: 0.0, dual_sum: duals.gamma, memory: Vec::new() }
    }

    pub fn reduced_cost(&self) -> f64 {
        self.time - self.dual_sum
    }

    pub fn dominates(&self, other: &PathLabel, rule: Dominance) -> bool {
        self.last == other.last
            && dominates(
                rule,
                (self.load, self.time, self.dual_sum),
                (other.load, other.time, other.dual_sum),
                self.memory.iter().all(|x| other.memory.contains(x)),
            )
    }

    /// Extension to the oriented service `(s, m)`.
    pub fn extend(&self, ctx: &PricingContext, duals: &Duals, s: usize, m: usize) -> Option<PathLabel> {
        if self.memory.contains(&s) || self.load + ctx.demand[s] > ctx.capacity {
            return None;
        }
        let o = self.last.map_or(NONE, |(x, k)| (2 * x + k) as u32);
        let (time, delta) = ctx.step(duals, o, self.time, s, m)?;
        let mut memory: Vec<usize> = ctx.ng[s].iter().copied().filter(|&y| y == s || self.memory.contains(&y)).collect();
        memory.sort_unstable();
        Some(PathLabel { last: Some((s, m)), load: self.load + ctx.demand[s], time, dual_sum: self.dual_sum + delta, memory })
    }
}

#[derive(Debug, Clone, Copy)]
struct Label {
    o: u32,
    q: u64,
    t: f64,
    xi: f64,
    mem: u8,
    parent: u32,
    alive: bool,
}

/// Counters of one labeling run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PricingStats {
    pub labels_created: u64,
    pub labels_dominated: u64,
    pub labels_fathomed: u64,
}

fn oriented(ctx: &PricingContext) -> Vec<(usize, usize)> {
    (0..ctx.service_count()).flat_map(|s| (0..ctx.pm.mode_count(s)).map(move |m| (s, m))).collect()
}

fn reconstruct(arena: &[Label], mut idx: u32) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    while idx != NONE {
        let l = &arena[idx as usize];
        out.push((l.o as usize / 2, l.o as usize % 2));
        idx = l.parent;
    }
    out.reverse();
    out
}

/// Turns completed paths into verified columns: sorted by reduced cost,
/// deduplicated, recomputed from scratch and kept only when negative.
fn finalize(
    ctx: &PricingContext,
    duals: &Duals,
    arena: &[Label],
    mut done: Vec<(f64, u32)>,
) -> Vec<Column> {
    done.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (_, idx) in done {
        if out.len() >= ctx.max_columns {
            break;
        }
        let seq = reconstruct(arena, idx);
        if !seen.insert(seq.clone()) {
            continue;
        }
        if let Ok(col) = Column::new(ctx.pm, seq) {
            if duals.reduced_cost(&col, ctx.pm) < -RC_TOL {
                out.push(col);
            }
        }
    }
    out
}

/// Columns found by a labeling run and the least reduced cost among
/// completed paths (0 when none is negative).
#[derive(Debug, Clone, Default)]
pub struct PricingOutcome {
    pub columns: Vec<Column>,
    pub min_reduced_cost: f64,
}

/// Forward labeling under `rule`, fathoming with `bounds` when given.
pub fn price_labels(
    ctx: &PricingContext,
    duals: &Duals,
    rule: Dominance,
    bounds: Option<&CompletionBounds>,
    stats: &mut PricingStats,
) -> Result<PricingOutcome, BcpError> {
    let services = oriented(ctx);
    let mut arena: Vec<Label> = Vec::new();
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); 2 * ctx.service_count()];
    let mut heap = BinaryHeap::new();
    let mut done = Vec::new();
    let root = Label { o: NONE, q: 0, t: 0.0, xi: duals.gamma, mem: 0, parent: NONE, alive: true };
    let expand = |from: &Label,
                      from_idx: u32,
                      arena: &mut Vec<Label>,
                      buckets: &mut Vec<Vec<u32>>,
                      heap: &mut BinaryHeap<Reverse<(OrdF64, u32)>>,
                      stats: &mut PricingStats|
     -> Result<(), BcpError> {
        for &(s, m) in &services {
            let q = from.q + ctx.demand[s];
            if q > ctx.capacity {
                continue;
            }
            let Some(mem) = ctx.extend_memory(from.o, from.mem, s) else { continue };
            let Some((t, delta)) = ctx.step(duals, from.o, from.t, s, m) else { continue };
            let o = (2 * s + m) as u32;
            let xi = from.xi + delta;
            stats.labels_created += 1;
            if let Some(b) = bounds {
                if t - xi + b.lookup(o as usize, q, t) >= -RC_TOL {
                    stats.labels_fathomed += 1;
                    continue;
                }
            }
            let bucket = &mut buckets[o as usize];
            let subset = |a: u8, b: u8| a & !b == 0;
            if bucket.iter().any(|&i| {
                let l = &arena[i as usize];
                dominates(rule, (l.q, l.t, l.xi), (q, t, xi), subset(l.mem, mem))
            }) {
                stats.labels_dominated += 1;
                continue;
            }
            bucket.retain(|&i| {
                let l = &mut arena[i as usize];
                if dominates(rule, (q, t, xi), (l.q, l.t, l.xi), subset(mem, l.mem)) {
                    l.alive = false;
                    stats.labels_dominated += 1;
                    false
                } else {
                    true
                }
            });
            if arena.len() >= ctx.label_limit {
                return Err(BcpError::LabelLimit(ctx.label_limit));
            }
            let idx = arena.len() as u32;
            arena.push(Label { o, q, t, xi, mem, parent: from_idx, alive: true });
            bucket.push(idx);
            heap.push(Reverse((OrdF64(t), idx)));
        }
        Ok(())
    };
    expand(&root, NONE, &mut arena, &mut buckets, &mut heap, stats)?;
    while let Some(Reverse((_, idx))) = heap.pop() {
        let label = arena[idx as usize];
        if !label.alive {
            continue;
        }
        if let Some((back, delta)) = ctx.close(duals, label.o, label.t) {
            let rc = back - label.xi - delta;
            if rc < -RC_TOL {
                done.push((rc, idx));
            }
        }
        expand(&label, idx, &mut arena, &mut buckets, &mut heap, stats)?;
    }
    let min_reduced_cost = done.iter().map(|d| d.0).fold(0.0, f64::min);
    Ok(PricingOutcome { columns: finalize(ctx, duals, &arena, done), min_reduced_cost })
}

/// Exact pricing: exact dominance, ng memory, optional completion bounds.
/// An empty result proves that no ng-feasible route has negative reduced cost.
pub fn price_exact(
    ctx: &PricingContext,
    duals: &Duals,
    bounds: Option<&CompletionBounds>,
    stats: &mut PricingStats,
) -> Result<PricingOutcome, BcpError> {
    price_labels(ctx, duals, Dominance::Exact, bounds, stats)
}

/// Pricing with heuristic dominance weighted by `mu`; may miss columns.
pub fn price_heuristic_dominance(
    ctx: &PricingContext,
    duals: &Duals,
    mu: f64,
    bounds: Option<&CompletionBounds>,
    stats: &mut PricingStats,
) -> Result<PricingOutcome, BcpError> {
    price_labels(ctx, duals, Dominance::Heuristic(mu), bounds, stats)
}

/// Keeps a single label, the one of least reduced cost, per oriented service
/// and load.
pub fn price_fast(ctx: &PricingContext, duals: &Duals) -> Vec<Column> {
    let services = oriented(ctx);
    let cap = ctx.capacity as usize;
    let mut slot = vec![NONE; 2 * ctx.service_count() * (cap + 1)];
    let mut arena: Vec<Label> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut done = Vec::new();
    let root = Label { o: NONE, q: 0, t: 0.0, xi: duals.gamma, mem: 0, parent: NONE, alive: true };
    let mut queue = vec![(root, NONE)];
    loop {
        for (from, from_idx) in queue.drain(..) {
            for &(s, m) in &services {
                let q = from.q + ctx.demand[s];
                if q > ctx.capacity {
                    continue;
                }
                let Some(mem) = ctx.extend_memory(from.o, from.mem, s) else { continue };
                let Some((t, delta)) = ctx.step(duals, from.o, from.t, s, m) else { continue };
                let o = 2 * s + m;
                let xi = from.xi + delta;
                let k = o * (cap + 1) + q as usize;
                if slot[k] != NONE {
                    let cur = &arena[slot[k] as usize];
                    if cur.t - cur.xi <= t - xi {
                        continue;
                    }
                }
                if arena.len() >= ctx.label_limit {
                    break;
                }
                let idx = arena.len() as u32;
                arena.push(Label { o: o as u32, q, t, xi, mem, parent: from_idx, alive: true });
                slot[k] = idx;
                heap.push(Reverse((q, OrdF64(t), idx)));
            }
        }
        let Some(Reverse((q, _, idx))) = heap.pop() else { break };
        let label = arena[idx as usize];
        if slot[label.o as usize * (cap + 1) + q as usize] != idx {
            continue;
        }
        if let Some((back, delta)) = ctx.close(duals, label.o, label.t) {
            let rc = back - label.xi - delta;
            if rc < -RC_TOL {
                done.push((rc, idx));
            }
        }
        queue.push((label, idx));
    }
    finalize(ctx, duals, &arena, done)
}
