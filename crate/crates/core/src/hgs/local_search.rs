use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::network::Instance;
use crate::pl_time::tolerance;
use crate::profiles::ProfileMatrix;

use super::bounds::{move_lower_bound, seq_concat, seq_single, SeqBound};
use super::decode::{finish, step, DecodeState, Eval};
use super::solution::{penalized_cost, Penalties, RoutePlan};

/// Move counters of the local search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LsStats {
    pub moves_evaluated: u64,
    pub moves_filtered: u64,
    pub exact_evaluations: u64,
    pub improvements: u64,
    /// Filtered moves that the exact decoder found improving (audit mode only).
    pub audit_checked: u64,
    pub audit_violations: u64,
    /// Evaluations where a route lower bound exceeded its exact duration.
    pub bound_violations: u64,
}

impl LsStats {
    pub fn filter_rate(&self) -> f64 {
        if self.moves_evaluated == 0 {
            0.0
        } else {
            self.moves_filtered as f64 / self.moves_evaluated as f64
        }
    }

    pub fn add(&mut self, o: &LsStats) {
        self.moves_evaluated += o.moves_evaluated;
        self.moves_filtered += o.moves_filtered;
        self.exact_evaluations += o.exact_evaluations;
        self.improvements += o.improvements;
        self.audit_checked += o.audit_checked;
        self.audit_violations += o.audit_violations;
        self.bound_violations += o.bound_violations;
    }
}

/// Position of a service in the incumbent: (route, index).
type Tok = (usize, usize);

/// Contiguous piece of an incumbent route, positions `i..=j`, possibly reversed.
#[derive(Debug, Clone, Copy)]
struct Segment {
    route: usize,
    i: usize,
    j: usize,
    reversed: bool,
}

struct RouteData {
    seq: Vec<usize>,
    /// Exact decoder state after each position.
    fwd: Vec<DecodeState>,
    /// `sub[i * L + j]`: bound of positions `i..=j`; `rev[i * L + j]`: of `j..=i` reversed.
    sub: Vec<SeqBound>,
    rev: Vec<SeqBound>,
    load_prefix: Vec<f64>,
    cost: f64,
}

impl RouteData {
    fn new(ls: &Context, seq: Vec<usize>) -> Self {
        let l = seq.len();
        let mut fwd = Vec::with_capacity(l);
        let mut state = DecodeState::DEPOT;
        for &s in &seq {
            state = step(ls.pm, Eval::Extended, &state, s).0;
            fwd.push(state);
        }
        let duration = finish(ls.pm, Eval::Extended, &state).0;
        let singles: Vec<SeqBound> = seq.iter().map(|&s| seq_single(ls.pm, s)).collect();
        let blank = SeqBound { first: 0, last: 0, t: [[f64::INFINITY; 2]; 2] };
        let mut sub = vec![blank; l * l];
        let mut rev = sub.clone();
        for j in 0..l {
            sub[j * l + j] = singles[j];
            rev[j * l + j] = singles[j];
        }
        for i in 0..l {
            for j in i + 1..l {
                sub[i * l + j] = seq_concat(ls.pm, &sub[i * l + j - 1], &singles[j]);
            }
        }
        for j in 0..l {
            for i in (0..j).rev() {
                rev[i * l + j] = seq_concat(ls.pm, &rev[(i + 1) * l + j], &singles[i]);
            }
        }
        let mut load_prefix = vec![0.0; l + 1];
        for (k, &s) in seq.iter().enumerate() {
            load_prefix[k + 1] = load_prefix[k] + ls.inst.demand(s);
        }
        let cost = ls.cost(duration, load_prefix[l]);
        Self { seq, fwd, sub, rev, load_prefix, cost }
    }

    fn bound(&self, seg: &Segment) -> &SeqBound {
        let k = seg.i * self.seq.len() + seg.j;
        if seg.reversed {
            &self.rev[k]
        } else {
            &self.sub[k]
        }
    }
}

struct Context<'a> {
    inst: &'a Instance,
    pm: &'a ProfileMatrix,
    w: Penalties,
}

impl Context<'_> {
    fn cost(&self, duration: f64, load: f64) -> f64 {
        penalized_cost(duration, load, self.inst.duration_limit, self.inst.capacity, self.w)
    }
}

/// Local search settings.
#[derive(Debug, Clone, Copy)]
pub struct LsOptions {
    pub penalties: Penalties,
    /// Decode every filtered move and count the ones that would have improved.
    pub audit: bool,
    /// Skip bound filtering entirely (every move is decoded exactly).
    pub disable_filter: bool,
}

struct Search<'a> {
    ctx: Context<'a>,
    neighbors: &'a [Vec<usize>],
    opts: LsOptions,
    eps: f64,
    routes: Vec<RouteData>,
    pos: Vec<Tok>,
    stats: LsStats,
}

fn compress(tokens: &[Tok]) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::new();
    for &(r, i) in tokens {
        if let Some(last) = out.last_mut() {
            if last.route == r {
                let len1 = last.i == last.j;
                let end = if last.reversed { last.i } else { last.j };
                if (len1 || !last.reversed) && i == end + 1 {
                    last.j = i;
                    last.reversed = false;
                    continue;
                }
                if (len1 || last.reversed) && i + 1 == end {
                    last.i = i;
                    last.reversed = true;
                    continue;
                }
            }
        }
        out.push(Segment { route: r, i, j: i, reversed: false });
    }
    out
}

impl Search<'_> {
    fn tokens(&self, r: usize) -> Vec<Tok> {
        (0..self.routes[r].seq.len()).map(|i| (r, i)).collect()
    }

    fn service(&self, t: Tok) -> usize {
        self.routes[t.0].seq[t.1]
    }

    fn load(&self, segs: &[Segment]) -> f64 {
        segs.iter()
            .map(|s| {
                let p = &self.routes[s.route].load_prefix;
                p[s.j + 1] - p[s.i]
            })
            .sum()
    }

    fn exact_prefix(&self, segs: &[Segment]) -> (DecodeState, usize) {
        match segs.first() {
            Some(s) if s.i == 0 && !s.reversed => (self.routes[s.route].fwd[s.j], 1),
            _ => (DecodeState::DEPOT, 0),
        }
    }

    fn lower_bound(&self, segs: &[Segment]) -> f64 {
        let (prefix, from) = self.exact_prefix(segs);
        let pm = self.ctx.pm;
        let rest = segs[from..]
            .iter()
            .map(|s| *self.routes[s.route].bound(s))
            .reduce(|a, b| seq_concat(pm, &a, &b));
        move_lower_bound(pm, &prefix, rest.as_ref())
    }

    fn exact(&self, segs: &[Segment], tokens: &[Tok]) -> f64 {
        let (mut state, from) = self.exact_prefix(segs);
        let skip: usize = segs[..from].iter().map(|s| s.j - s.i + 1).sum();
        for &t in &tokens[skip..] {
            state = step(self.ctx.pm, Eval::Extended, &state, self.service(t)).0;
        }
        finish(self.ctx.pm, Eval::Extended, &state).0
    }

    /// Evaluates replacing each listed route with its new token list, and
    /// applies the change when it improves the penalized cost.
    fn try_move(&mut self, changes: &[(usize, Vec<Tok>)]) -> bool {
        self.stats.moves_evaluated += 1;
        let segs: Vec<Vec<Segment>> = changes.iter().map(|(_, t)| compress(t)).collect();
        let loads: Vec<f64> = segs.iter().map(|s| self.load(s)).collect();
        let old: f64 = changes.iter().map(|(r, _)| self.routes[*r].cost).sum();
        let bounds: Vec<f64> =
            segs.iter().map(|s| if s.is_empty() { 0.0 } else { self.lower_bound(s) }).collect();
        if !self.opts.disable_filter {
            let lb: f64 = bounds.iter().zip(&loads).map(|(&d, &q)| self.ctx.cost(d, q)).sum::<f64>() - old;
            if lb >= -self.eps {
                self.stats.moves_filtered += 1;
                if self.opts.audit {
                    self.stats.audit_checked += 1;
                    let exact = self.exact_all(changes, &segs, &bounds);
                    let delta = exact.iter().zip(&loads).map(|(&d, &q)| self.ctx.cost(d, q)).sum::<f64>() - old;
                    if delta < -self.eps {
                        self.stats.audit_violations += 1;
                    }
                }
                return false;
            }
        }
        self.stats.exact_evaluations += 1;
        let exact = self.exact_all(changes, &segs, &bounds);
        let delta = exact.iter().zip(&loads).map(|(&d, &q)| self.ctx.cost(d, q)).sum::<f64>() - old;
        if delta >= -self.eps {
            return false;
        }
        let seqs: Vec<Vec<usize>> =
            changes.iter().map(|(_, t)| t.iter().map(|&x| self.service(x)).collect()).collect();
        for ((r, _), seq) in changes.iter().zip(seqs) {
            for (i, &s) in seq.iter().enumerate() {
                self.pos[s] = (*r, i);
            }
            self.routes[*r] = RouteData::new(&self.ctx, seq);
        }
        self.stats.improvements += 1;
        true
    }

    fn exact_all(&mut self, changes: &[(usize, Vec<Tok>)], segs: &[Vec<Segment>], bounds: &[f64]) -> Vec<f64> {
        let tol = 10.0 * tolerance(self.ctx.inst.duration_limit);
        let mut out = Vec::with_capacity(changes.len());
        for (k, (_, tokens)) in changes.iter().enumerate() {
            let d = if tokens.is_empty() { 0.0 } else { self.exact(&segs[k], tokens) };
            if bounds[k] > d + tol * (1.0 + d.abs() / self.ctx.inst.duration_limit) {
                self.stats.bound_violations += 1;
            }
            out.push(d);
        }
        out
    }

    /// Tries the relocate, swap and 2-opt families between `u` and `v`;
    /// `v = (r, None)` stands for the depot at the start of route `r`.
    fn try_pair(&mut self, u: Tok, v: (usize, Option<usize>)) -> bool {
        let (ru, iu) = u;
        let (rv, iv) = v;
        let lu = self.routes[ru].seq.len();
        let x = (iu + 1 < lu).then_some((ru, iu + 1));
        let after_v = iv.map_or(0, |i| i + 1);
        // M1-M3: relocate u, (u, x) or (x, u) after v.
        let mut blocks: Vec<Vec<Tok>> = vec![vec![u]];
        if let Some(x) = x {
            blocks.push(vec![u, x]);
            blocks.push(vec![x, u]);
        }
        for block in blocks {
            if iv.is_some_and(|i| block.contains(&(rv, i))) {
                continue;
            }
            if rv == ru && iv.map_or(iu == 0, |i| i + 1 == iu) && block[0] == u {
                continue;
            }
            let changes = if ru == rv {
                let mut list: Vec<Tok> = self.tokens(ru).into_iter().filter(|t| !block.contains(t)).collect();
                let at = match iv {
                    Some(i) => list.iter().position(|&t| t == (rv, i)).unwrap() + 1,
                    None => 0,
                };
                list.splice(at..at, block.iter().copied());
                vec![(ru, list)]
            } else {
                let a: Vec<Tok> = self.tokens(ru).into_iter().filter(|t| !block.contains(t)).collect();
                let mut b = self.tokens(rv);
                b.splice(after_v..after_v, block.iter().copied());
                vec![(ru, a), (rv, b)]
            };
            if self.try_move(&changes) {
                return true;
            }
        }
        let Some(iv) = iv else {
            return self.try_tails(u, rv, None);
        };
        let v = (rv, iv);
        let lv = self.routes[rv].seq.len();
        let y = (iv + 1 < lv).then_some((rv, iv + 1));
        // M4-M6: swap u or (u, x) with v or (v, y).
        let mut pairs: Vec<(Vec<Tok>, Vec<Tok>)> = vec![(vec![u], vec![v])];
        if let Some(x) = x {
            pairs.push((vec![u, x], vec![v]));
            if let Some(y) = y {
                pairs.push((vec![u, x], vec![v, y]));
            }
        }
        for (a, b) in pairs {
            if a.iter().any(|t| b.contains(t)) {
                continue;
            }
            let changes = if ru == rv {
                let (p, q) = if a[0].1 < b[0].1 { (&a, &b) } else { (&b, &a) };
                if p.last().unwrap().1 >= q[0].1 {
                    continue;
                }
                let list = self.tokens(ru);
                let (ps, pe, qs, qe) = (p[0].1, p.last().unwrap().1 + 1, q[0].1, q.last().unwrap().1 + 1);
                let mut out = list[..ps].to_vec();
                out.extend_from_slice(q);
                out.extend_from_slice(&list[pe..qs]);
                out.extend_from_slice(p);
                out.extend_from_slice(&list[qe..]);
                vec![(ru, out)]
            } else {
                let replace = |r: usize, old: &[Tok], new: &[Tok]| {
                    let list = self.tokens(r);
                    let s = old[0].1;
                    let mut out = list[..s].to_vec();
                    out.extend_from_slice(new);
                    out.extend_from_slice(&list[s + old.len()..]);
                    out
                };
                vec![(ru, replace(ru, &a, &b)), (rv, replace(rv, &b, &a))]
            };
            if self.try_move(&changes) {
                return true;
            }
        }
        if ru == rv {
            // M7: reverse the services strictly after the earlier and up to the later one.
            let (a, b) = (iu.min(iv), iu.max(iv));
            if b > a + 1 {
                let list = self.tokens(ru);
                let mut out = list[..=a].to_vec();
                out.extend(list[a + 1..=b].iter().rev());
                out.extend_from_slice(&list[b + 1..]);
                return self.try_move(&[(ru, out)]);
            }
            false
        } else {
            self.try_tails(u, rv, Some(iv))
        }
    }

    /// M8 and M9: exchange route tails after `u` and after `v`, or join the
    /// head of one with the reversed head of the other.
    fn try_tails(&mut self, u: Tok, rv: usize, iv: Option<usize>) -> bool {
        let (ru, iu) = u;
        if ru == rv {
            return false;
        }
        let a = self.tokens(ru);
        let b = self.tokens(rv);
        let cut = iv.map_or(0, |i| i + 1);
        let mut a1 = a[..=iu].to_vec();
        a1.extend_from_slice(&b[cut..]);
        let mut b1 = b[..cut].to_vec();
        b1.extend_from_slice(&a[iu + 1..]);
        if self.try_move(&[(ru, a1), (rv, b1)]) {
            return true;
        }
        let mut a2 = a[..=iu].to_vec();
        a2.extend(b[..cut].iter().rev());
        let mut b2: Vec<Tok> = a[iu + 1..].iter().rev().copied().collect();
        b2.extend_from_slice(&b[cut..]);
        self.try_move(&[(ru, a2), (rv, b2)])
    }

    fn run(&mut self, rng: &mut impl Rng) {
        let n = self.pos.len();
        let mut order: Vec<usize> = (0..n).collect();
        loop {
            order.shuffle(rng);
            let mut improved = false;
            for &su in &order {
                let nb = self.neighbors[su].clone();
                'v: for sv in nb {
                    let v = self.pos[sv];
                    if self.try_pair(self.pos[su], (v.0, Some(v.1))) {
                        improved = true;
                        break 'v;
                    }
                    if v.1 == 0 && self.try_pair(self.pos[su], (v.0, None)) {
                        improved = true;
                        break 'v;
                    }
                }
                if let Some(empty) = self.routes.iter().position(|r| r.seq.is_empty()) {
                    if self.try_pair(self.pos[su], (empty, None)) {
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }
}

/// First-improvement descent over relocate, swap, 2-opt and 2-opt* moves
/// restricted to `neighbors`. Returns the improved plan and the move counters.
pub fn local_search(
    inst: &Instance,
    pm: &ProfileMatrix,
    neighbors: &[Vec<usize>],
    plan: &RoutePlan,
    opts: LsOptions,
    rng: &mut impl Rng,
) -> (RoutePlan, LsStats) {
    let ctx = Context { inst, pm, w: opts.penalties };
    let mut pos = vec![(0, 0); inst.service_count()];
    for (r, route) in plan.routes.iter().enumerate() {
        for (i, &s) in route.iter().enumerate() {
            pos[s] = (r, i);
        }
    }
    let routes = plan.routes.iter().map(|r| RouteData::new(&ctx, r.clone())).collect();
    let eps = tolerance(inst.duration_limit).max(1e-9);
    let mut search = Search { ctx, neighbors, opts, eps, routes, pos, stats: LsStats::default() };
    search.run(rng);
    let routes = search.routes.into_iter().map(|r| r.seq).collect();
    (RoutePlan::evaluate(inst, pm, routes), search.stats)
}
