use std::collections::HashSet;
use std::time::Instant;

use crate::hgs::{decode_route, RoutePlan};
use crate::network::Instance;
use crate::profiles::ProfileMatrix;

use super::bounds::build_completion_bounds;
use super::column::{Column, Duals, Row, RowKind};
use super::cuts::{separate_capacity_cuts, separate_odd_edge_cuts, ArcFlows};
use super::lp::{DenseSimplex, LpBackend, Sense};
use super::pricing::{price_exact, price_fast, price_heuristic_dominance, PricingContext, PricingOutcome, PricingStats};
use super::{BcpError, BcpParams, BcpResult, BcpTelemetry};

const EMPTY: usize = usize::MAX;
const INT_TOL: f64 = 1e-6;
const PRUNE_TOL: f64 = 1e-6;
const INFEASIBLE_TOL: f64 = 1e-7;
const INFEASIBLE_DELTA: f64 = 1e12;

/// Strong branching score of a candidate from its two child bound gains.
pub fn strong_branching_rank(delta_a: f64, delta_b: f64) -> f64 {
    0.75 * delta_a.min(delta_b) + 0.25 * delta_a.max(delta_b)
}

struct PoolColumn {
    col: Column,
    dead: Vec<(usize, usize)>,
    req: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
enum Branch {
    ForbidDeadhead(usize, usize),
    ForbidRequired(usize, usize),
    Row(Row),
}

#[derive(Debug, Clone, Default)]
struct Node {
    rows: Vec<Row>,
    forbid_dead: Vec<(usize, usize)>,
    forbid_req: Vec<(usize, usize)>,
    bound: f64,
    estimate: f64,
}

impl Node {
    fn child(&self, branch: &Branch, bound: f64, estimate: f64) -> Node {
        let mut c = Node { bound, estimate, ..self.clone() };
        match branch {
            Branch::ForbidDeadhead(a, b) => c.forbid_dead.push((*a, *b)),
            Branch::ForbidRequired(u, v) => c.forbid_req.push((*u, *v)),
            Branch::Row(r) => c.rows.push(r.clone()),
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CgMode {
    Exact,
    FastOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CgStatus {
    Converged,
    /// Lagrangian bound reached the incumbent.
    Pruned,
    IterationLimit,
    Aborted,
}

struct CgResult {
    status: CgStatus,
    lb: f64,
    lp_value: f64,
    infeasible: bool,
    /// `(pool index, value)` of the positive structural columns.
    primal: Vec<(usize, f64)>,
    exact_calls: u32,
}

struct Solver<'a> {
    inst: &'a Instance,
    pm: &'a ProfileMatrix,
    params: &'a BcpParams,
    start: Instant,
    base: PricingContext<'a>,
    n: usize,
    v: usize,
    m: usize,
    big_m: f64,
    pool: Vec<PoolColumn>,
    seen: HashSet<Vec<(usize, usize)>>,
    cuts: Vec<Row>,
    ub: f64,
    best: Vec<Column>,
    stats: PricingStats,
    telemetry: BcpTelemetry,
    nodes_exact: u64,
    nodes_heuristic: u64,
    /// The time limit applies once the root relaxation is solved.
    root_done: bool,
}

impl<'a> Solver<'a> {
    fn out_of_time(&self) -> bool {
        self.root_done && self.start.elapsed().as_secs_f64() >= self.params.time_limit
    }

    fn add_to_pool(&mut self, col: Column) -> Option<usize> {
        if col.services.is_empty() || !self.seen.insert(col.services.clone()) {
            return None;
        }
        let dead = col.deadheads(self.pm);
        let req = col.required_arcs(self.n);
        self.pool.push(PoolColumn { col, dead, req });
        Some(self.pool.len() - 1)
    }

    fn context(&self, node: &Node) -> PricingContext<'a> {
        let mut ctx = self.base.clone();
        for &(a, b) in &node.forbid_dead {
            ctx.forbidden_deadheads[a * self.v + b] = true;
        }
        for &(u, w) in &node.forbid_req {
            ctx.forbidden_required[u * (self.n + 1) + w] = true;
        }
        ctx
    }

    fn allowed(&self, node: &Node, pc: &PoolColumn) -> bool {
        !pc.dead.iter().any(|d| node.forbid_dead.contains(d)) && !pc.req.iter().any(|r| node.forbid_req.contains(r))
    }

    fn row_coef(row: &Row, pc: &PoolColumn) -> f64 {
        pc.dead.iter().map(|&(a, b)| row.kind.deadhead_coef(a, b)).sum::<f64>()
            + pc.req.iter().map(|&(u, w)| row.kind.required_coef(u, w)).sum::<f64>()
    }

    fn column_entries(&self, pc: &PoolColumn, rows: &[Row]) -> Vec<(usize, f64)> {
        let mut counts = vec![0.0; self.n];
        for &(s, _) in &pc.col.services {
            counts[s] += 1.0;
        }
        let mut e = vec![(0, 1.0)];
        e.extend(counts.iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(s, &c)| (1 + s, c)));
        for (k, row) in rows.iter().enumerate() {
            let c = Self::row_coef(row, pc);
            if c != 0.0 {
                e.push((1 + self.n + k, c));
            }
        }
        e
    }

    fn add_row(&self, lp: &mut DenseSimplex, lp_cols: &[usize], row: &Row) {
        let coefs: Vec<(usize, f64)> = lp_cols
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != EMPTY)
            .map(|(j, &p)| (j, Self::row_coef(row, &self.pool[p])))
            .filter(|(_, c)| *c != 0.0)
            .collect();
        lp.add_row(&coefs, if row.ge { Sense::Ge } else { Sense::Le }, row.rhs);
    }

    fn duals(&self, y: &[f64], rows: &[Row]) -> Duals {
        let extra: Vec<(&Row, f64)> = rows.iter().zip(&y[1 + self.n..]).map(|(r, &v)| (r, v)).collect();
        Duals::from_rows(self.n, self.v, y[0], &y[1..=self.n], &extra)
    }

    fn rhs_term(&self, y: &[f64], rows: &[Row]) -> f64 {
        y[1..=self.n].iter().sum::<f64>() + rows.iter().zip(&y[1 + self.n..]).map(|(r, v)| r.rhs * v).sum::<f64>()
    }

    fn price(&mut self, ctx: &PricingContext, duals: &Duals, exact: bool) -> Result<(Vec<Column>, Option<f64>), BcpError> {
        self.telemetry.fast_pricing_calls += 1;
        let cols = price_fast(ctx, duals);
        if !cols.is_empty() {
            return Ok((cols, None));
        }
        self.telemetry.heuristic_pricing_calls += 1;
        match price_heuristic_dominance(ctx, duals, self.params.heuristic_mu, None, &mut self.stats) {
            Ok(out) if !out.columns.is_empty() => return Ok((out.columns, None)),
            Ok(_) | Err(BcpError::LabelLimit(_)) => {}
            Err(e) => return Err(e),
        }
        if !exact {
            return Ok((Vec::new(), None));
        }
        let bounds =
            if self.params.completion_bounds { build_completion_bounds(ctx, duals, self.params.bound_width) } else { None };
        let PricingOutcome { columns, min_reduced_cost } = price_exact(ctx, duals, bounds.as_ref(), &mut self.stats)?;
        Ok((columns, Some(min_reduced_cost)))
    }

    fn column_generation(&mut self, node: &Node, mode: CgMode) -> CgResult {
        let ctx = self.context(node);
        let mut rows: Vec<Row> = self.cuts.iter().chain(&node.rows).cloned().collect();
        let mut lp = DenseSimplex::new(self.big_m);
        lp.add_row(&[], Sense::Eq, self.m as f64);
        for _ in 0..self.n {
            lp.add_row(&[], Sense::Eq, 1.0);
        }
        for r in &rows {
            lp.add_row(&[], if r.ge { Sense::Ge } else { Sense::Le }, r.rhs);
        }
        let mut lp_cols = vec![EMPTY];
        lp.add_column(0.0, &[(0, 1.0)]);
        for p in 0..self.pool.len() {
            if self.allowed(node, &self.pool[p]) {
                let e = self.column_entries(&self.pool[p], &rows);
                lp.add_column(self.pool[p].col.duration, &e);
                lp_cols.push(p);
            }
        }
        let mut alpha = if mode == CgMode::Exact { self.params.stabilization } else { 0.0 };
        let mut center: Option<Duals> = None;
        let mut lagrangian = f64::NEG_INFINITY;
        let mut exact_calls = 0u32;
        let mut iterations = 0usize;
        let mut cut_rounds = 0usize;
        let finish = |status, lb: f64, sol: Option<&super::lp::LpSolution>, lp_cols: &[usize], exact_calls| {
            let (lp_value, infeasible, primal) = match sol {
                Some(s) => (
                    s.objective,
                    s.infeasibility > INFEASIBLE_TOL,
                    lp_cols
                        .iter()
                        .zip(&s.primal)
                        .filter(|(&p, &x)| p != EMPTY && x > 1e-9)
                        .map(|(&p, &x)| (p, x))
                        .collect(),
                ),
                None => (f64::NEG_INFINITY, false, Vec::new()),
            };
            CgResult { status, lb, lp_value, infeasible, primal, exact_calls }
        };
        loop {
            let sol = match lp.solve() {
                Ok(s) => s,
                Err(_) => return finish(CgStatus::Aborted, lagrangian, None, &lp_cols, exact_calls),
            };
            if self.out_of_time() {
                return finish(CgStatus::Aborted, lagrangian, Some(&sol), &lp_cols, exact_calls);
            }
            if mode == CgMode::FastOnly && iterations >= self.params.strong_iterations {
                return finish(CgStatus::IterationLimit, sol.objective, Some(&sol), &lp_cols, exact_calls);
            }
            iterations += 1;
            let y = self.duals(&sol.duals, &rows);
            let center_duals = center.get_or_insert_with(|| y.clone()).clone();
            let pi = if alpha > 0.0 { center_duals.blend(&y, alpha) } else { y.clone() };
            let exact_now = mode == CgMode::Exact && alpha == 0.0;
            let (found, min_rc) = if mode == CgMode::FastOnly {
                self.telemetry.fast_pricing_calls += 1;
                (price_fast(&ctx, &pi), None)
            } else {
                match self.price(&ctx, &pi, exact_now) {
                    Ok(r) => r,
                    Err(BcpError::LabelLimit(_)) => {
                        self.telemetry.label_limit_hits += 1;
                        return finish(CgStatus::Aborted, lagrangian, Some(&sol), &lp_cols, exact_calls);
                    }
                    Err(_) => return finish(CgStatus::Aborted, lagrangian, Some(&sol), &lp_cols, exact_calls),
                }
            };
            if let Some(rc) = min_rc {
                exact_calls += 1;
                let l = self.rhs_term(&sol.duals, &rows) + self.m as f64 * (pi.gamma + rc.min(0.0) - 1e-9).min(0.0);
                lagrangian = lagrangian.max(l);
                if lagrangian >= self.ub - PRUNE_TOL {
                    return finish(CgStatus::Pruned, lagrangian, Some(&sol), &lp_cols, exact_calls);
                }
            }
            let mut added = 0;
            for col in found {
                if let Some(p) = self.add_to_pool(col) {
                    if self.allowed(node, &self.pool[p]) {
                        let e = self.column_entries(&self.pool[p], &rows);
                        lp.add_column(self.pool[p].col.duration, &e);
                        lp_cols.push(p);
                        added += 1;
                    }
                }
            }
            if added > 0 {
                continue;
            }
            if alpha > 0.0 {
                alpha = ((alpha - 0.1) * 1e9).round() / 1e9;
                if alpha < 1e-9 {
                    alpha = 0.0;
                }
                continue;
            }
            if mode == CgMode::FastOnly {
                return finish(CgStatus::Converged, sol.objective, Some(&sol), &lp_cols, exact_calls);
            }
            if self.params.cuts && cut_rounds < self.params.cut_rounds && sol.infeasibility <= INFEASIBLE_TOL {
                cut_rounds += 1;
                let support: Vec<(&Column, f64)> = lp_cols
                    .iter()
                    .zip(&sol.primal)
                    .filter(|(&p, &x)| p != EMPTY && x > 1e-9)
                    .map(|(&p, &x)| (&self.pool[p].col, x))
                    .collect();
                let flows = ArcFlows::from_columns(self.pm, self.v, &support);
                let limit = self.params.cuts_per_round;
                let mut new_cuts = separate_odd_edge_cuts(self.inst, &flows, limit);
                new_cuts.extend(separate_capacity_cuts(
                    &self.base.demand,
                    self.base.capacity,
                    &flows,
                    limit,
                    self.params.capacity_exhaustive_max,
                ));
                new_cuts.retain(|c| !self.cuts.contains(c));
                new_cuts.truncate(limit);
                if !new_cuts.is_empty() {
                    for c in new_cuts {
                        self.add_row(&mut lp, &lp_cols, &c);
                        rows.push(c.clone());
                        self.cuts.push(c);
                    }
                    continue;
                }
            }
            let lb = if sol.infeasibility <= INFEASIBLE_TOL { sol.objective.max(lagrangian) } else { lagrangian };
            return finish(CgStatus::Converged, lb, Some(&sol), &lp_cols, exact_calls);
        }
    }

    fn plan_value(&self, cols: &[Column]) -> f64 {
        cols.iter().map(|c| c.duration).sum()
    }

    fn offer(&mut self, cols: Vec<Column>) {
        let v = self.plan_value(&cols);
        if v < self.ub - 1e-9 {
            self.ub = v;
            self.best = cols;
        }
    }

    /// Routes read off an integral required-graph flow, with optimal modes.
    fn recover(&self, flows: &ArcFlows) -> Option<Vec<Column>> {
        let n = self.n;
        let near_one = |x: f64| (x - 1.0).abs() <= INT_TOL;
        let mut succ = vec![usize::MAX; n];
        for (u, s) in succ.iter_mut().enumerate() {
            let next: Vec<usize> = (0..=n).filter(|&w| near_one(flows.required(u, w))).collect();
            if next.len() != 1 {
                return None;
            }
            *s = next[0];
        }
        let starts: Vec<usize> = (0..n).filter(|&w| near_one(flows.required(n, w))).collect();
        if starts.len() > self.m {
            return None;
        }
        let mut visited = vec![false; n];
        let mut out = Vec::new();
        for s0 in starts {
            let mut seq = Vec::new();
            let mut u = s0;
            while u != n {
                if visited[u] {
                    return None;
                }
                visited[u] = true;
                seq.push(u);
                u = succ[u];
            }
            let load: u64 = seq.iter().map(|&s| self.base.demand[s]).sum();
            if load > self.base.capacity {
                return None;
            }
            let d = decode_route(self.pm, &seq).ok()?;
            out.push(Column { services: seq.into_iter().zip(d.modes).collect(), duration: d.duration });
        }
        visited.iter().all(|&x| x).then_some(out)
    }

    fn candidates(&self, flows: &ArcFlows) -> Vec<(f64, [Branch; 2])> {
        let n = self.n;
        let frac = |x: f64| x - x.floor();
        let fractional = |x: f64| frac(x) > INT_TOL && frac(x) < 1.0 - INT_TOL;
        let mut out: Vec<(f64, [Branch; 2])> = Vec::new();
        for u in 0..=n {
            for w in 0..=n {
                let x = flows.required(u, w);
                if fractional(x) {
                    let row = Row { kind: RowKind::Required { from: u, to: w }, ge: true, rhs: 1.0 };
                    out.push((frac(x).min(1.0 - frac(x)), [Branch::ForbidRequired(u, w), Branch::Row(row)]));
                }
            }
        }
        for a in 0..self.v {
            for b in 0..self.v {
                let x = flows.deadhead(a, b);
                if a != b && fractional(x) {
                    let lo = x.floor();
                    let down = if lo == 0.0 {
                        Branch::ForbidDeadhead(a, b)
                    } else {
                        Branch::Row(Row { kind: RowKind::Deadhead { from: a, to: b }, ge: false, rhs: lo })
                    };
                    let up = Branch::Row(Row { kind: RowKind::Deadhead { from: a, to: b }, ge: true, rhs: lo + 1.0 });
                    out.push((frac(x).min(1.0 - frac(x)), [down, up]));
                }
            }
        }
        for vtx in 0..self.v {
            let d: f64 = (0..self.v).filter(|&b| b != vtx).map(|b| flows.deadhead(vtx, b) + flows.deadhead(b, vtx)).sum();
            let parity = self.required_parity(vtx);
            let mut lo = d.floor();
            if (lo as u64) % 2 != parity {
                lo -= 1.0;
            }
            if lo < 0.0 || d - lo <= INT_TOL || lo + 2.0 - d <= INT_TOL {
                continue;
            }
            let kind = RowKind::Degree { vertex: vtx };
            let down = Branch::Row(Row { kind: kind.clone(), ge: false, rhs: lo });
            let up = Branch::Row(Row { kind, ge: true, rhs: lo + 2.0 });
            let dist = (d - lo).min(lo + 2.0 - d) / 2.0;
            out.push((dist, [down, up]));
        }
        out.sort_by(|a, b| b.0.total_cmp(&a.0));
        out.truncate(self.params.strong_candidates.max(1));
        out
    }

    /// Parity of the number of required links incident to `vtx`, loops
    /// counted twice; every feasible plan has deadhead degree of this parity.
    fn required_parity(&self, vtx: usize) -> u64 {
        self.inst
            .service_links()
            .iter()
            .map(|&l| {
                let k = &self.inst.links[l];
                u64::from(k.tail == vtx) + u64::from(k.head == vtx)
            })
            .sum::<u64>()
            % 2
    }

    fn child_delta(&mut self, node: &Node, branch: &Branch, parent_lb: f64) -> (f64, f64) {
        let child = node.child(branch, parent_lb, parent_lb);
        self.nodes_heuristic += 1;
        let r = self.column_generation(&child, CgMode::FastOnly);
        if r.infeasible || r.status == CgStatus::Aborted && r.lp_value == f64::NEG_INFINITY {
            return (INFEASIBLE_DELTA, f64::INFINITY);
        }
        ((r.lp_value - parent_lb).max(0.0), r.lp_value)
    }

    fn select_branch(&mut self, node: &Node, lb: f64, cands: Vec<(f64, [Branch; 2])>) -> ([Branch; 2], [f64; 2]) {
        if cands.len() == 1 {
            let (_, b) = cands.into_iter().next().unwrap();
            return (b, [lb, lb]);
        }
        let mut best: Option<(f64, [Branch; 2], [f64; 2])> = None;
        for (_, pair) in cands {
            if self.out_of_time() && best.is_some() {
                break;
            }
            let (da, ea) = self.child_delta(node, &pair[0], lb);
            let (db, eb) = self.child_delta(node, &pair[1], lb);
            let rank = strong_branching_rank(da, db);
            if best.as_ref().is_none_or(|(r, _, _)| rank > *r) {
                best = Some((rank, pair, [ea, eb]));
            }
        }
        let (_, b, e) = best.unwrap();
        (b, e)
    }
}

/// Solves the instance by branch-cut-and-price. `initial` seeds the column
/// pool and the incumbent.
pub fn run_bcp(inst: &Instance, pm: &ProfileMatrix, params: &BcpParams, initial: Option<&RoutePlan>) -> BcpResult {
    let start = Instant::now();
    let mut base = PricingContext::new(inst, pm);
    base.max_columns = params.max_columns;
    base.label_limit = params.label_limit;
    let n = inst.service_count();
    let m = inst.vehicles;
    let mut solver = Solver {
        inst,
        pm,
        params,
        start,
        base,
        n,
        v: inst.vertex_count,
        m,
        big_m: 10.0 * m as f64 * inst.duration_limit + 1000.0,
        pool: Vec::new(),
        seen: HashSet::new(),
        cuts: Vec::new(),
        ub: f64::INFINITY,
        best: Vec::new(),
        stats: PricingStats::default(),
        telemetry: BcpTelemetry::default(),
        nodes_exact: 0,
        nodes_heuristic: 0,
        root_done: false,
    };
    for s in 0..n {
        for mode in 0..pm.mode_count(s) {
            if let Ok(c) = Column::new(pm, vec![(s, mode)]) {
                solver.add_to_pool(c);
            }
        }
    }
    if let Some(plan) = initial {
        let mut cols = Vec::new();
        let mut ok = plan.capacity_feasible;
        for r in plan.routes.iter().filter(|r| !r.is_empty()) {
            match decode_route(pm, r) {
                Ok(d) => cols.push(Column { services: r.iter().copied().zip(d.modes).collect(), duration: d.duration }),
                Err(_) => ok = false,
            }
        }
        for c in &cols {
            solver.add_to_pool(c.clone());
        }
        if ok && cols.len() <= m {
            solver.offer(cols);
        }
    }

    let mut open = vec![Node { bound: f64::NEG_INFINITY, estimate: f64::NEG_INFINITY, ..Node::default() }];
    let mut unresolved = f64::INFINITY;
    let mut root = true;
    while !open.is_empty() {
        let idx = (0..open.len())
            .min_by(|&a, &b| open[a].bound.total_cmp(&open[b].bound).then(open[a].estimate.total_cmp(&open[b].estimate)))
            .unwrap();
        let node = open.swap_remove(idx);
        if node.bound >= solver.ub - PRUNE_TOL {
            continue;
        }
        if solver.out_of_time() || params.node_limit.is_some_and(|l| solver.nodes_exact >= l) {
            open.push(node);
            break;
        }
        solver.nodes_exact += 1;
        let r = solver.column_generation(&node, CgMode::Exact);
        solver.root_done = true;
        solver.telemetry.exact_pricing_per_node.push(r.exact_calls);
        if r.status == CgStatus::Aborted {
            unresolved = unresolved.min(node.bound.max(r.lb));
            if solver.out_of_time() {
                break;
            }
            continue;
        }
        if r.infeasible && r.status == CgStatus::Converged {
            continue;
        }
        if node.bound.is_finite() && r.lb < node.bound - PRUNE_TOL {
            solver.telemetry.lb_monotonicity_violations += 1;
        }
        let lb = r.lb.max(node.bound);
        if root {
            solver.telemetry.root_lb = lb;
            root = false;
        }
        if r.status == CgStatus::Pruned || lb >= solver.ub - PRUNE_TOL {
            continue;
        }
        if r.primal.iter().all(|&(_, x)| x >= 1.0 - INT_TOL) {
            let cols: Vec<Column> = r.primal.iter().map(|&(p, _)| solver.pool[p].col.clone()).collect();
            solver.offer(cols);
            continue;
        }
        let support: Vec<(&Column, f64)> = r.primal.iter().map(|&(p, x)| (&solver.pool[p].col, x)).collect();
        let flows = ArcFlows::from_columns(pm, solver.v, &support);
        if let Some(cols) = solver.recover(&flows) {
            let value = solver.plan_value(&cols);
            solver.offer(cols);
            if value <= lb + PRUNE_TOL {
                continue;
            }
        }
        let cands = solver.candidates(&flows);
        if cands.is_empty() {
            unresolved = unresolved.min(lb);
            continue;
        }
        let (branches, estimates) = solver.select_branch(&node, lb, cands);
        for (b, e) in branches.iter().zip(estimates) {
            if e < solver.ub - PRUNE_TOL {
                open.push(node.child(b, lb, e));
            }
        }
        if open.len() > params.max_open_nodes {
            open.sort_by(|a, b| a.bound.total_cmp(&b.bound));
            for dropped in open.drain(params.max_open_nodes..) {
                unresolved = unresolved.min(dropped.bound);
                solver.telemetry.dropped_nodes += 1;
            }
        }
    }
    let open_bound = open.iter().map(|nd| nd.bound).fold(f64::INFINITY, f64::min);
    let lb = unresolved.min(open_bound).min(solver.ub);
    let ub = solver.ub;
    let optimal = ub.is_finite() && lb >= ub - PRUNE_TOL;
    let gap_percent = if optimal {
        0.0
    } else if ub.is_finite() && lb > 0.0 {
        100.0 * (ub - lb) / lb
    } else {
        f64::INFINITY
    };
    solver.telemetry.labels_created = solver.stats.labels_created;
    solver.telemetry.labels_dominated = solver.stats.labels_dominated;
    solver.telemetry.labels_fathomed = solver.stats.labels_fathomed;
    BcpResult {
        lb,
        ub,
        gap_percent,
        nodes_exact: solver.nodes_exact,
        nodes_heuristic: solver.nodes_heuristic,
        columns: solver.pool.len(),
        cuts: solver.cuts.len(),
        wall_seconds: start.elapsed().as_secs_f64(),
        optimal,
        routes: solver.best,
        telemetry: solver.telemetry,
    }
}
