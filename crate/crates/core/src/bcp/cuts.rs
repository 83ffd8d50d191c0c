use crate::network::Instance;
use crate::profiles::ProfileMatrix;

use super::column::{Column, Row, RowKind};

const VIOLATION: f64 = 1e-6;
const THRESHOLDS: [f64; 4] = [0.0, 0.25, 0.5, 0.75];

/// Aggregated arc flows of a master solution.
#[derive(Debug, Clone)]
pub struct ArcFlows {
    pub vertices: usize,
    pub services: usize,
    /// `vertices × vertices` deadhead flow.
    pub deadhead: Vec<f64>,
    /// `(n + 1) × (n + 1)` required-graph flow, `n` being the depot.
    pub required: Vec<f64>,
}

impl ArcFlows {
    pub fn from_columns(pm: &ProfileMatrix, vertices: usize, cols: &[(&Column, f64)]) -> Self {
        let n = pm.service_count();
        let mut f = Self { vertices, services: n, deadhead: vec![0.0; vertices * vertices], required: vec![0.0; (n + 1) * (n + 1)] };
        for &(col, x) in cols {
            if x <= 0.0 {
                continue;
            }
            for (a, b) in col.deadheads(pm) {
                f.deadhead[a * vertices + b] += x;
            }
            for (u, v) in col.required_arcs(n) {
                f.required[u * (n + 1) + v] += x;
            }
        }
        f
    }

    pub fn deadhead(&self, a: usize, b: usize) -> f64 {
        self.deadhead[a * self.vertices + b]
    }

    pub fn required(&self, u: usize, v: usize) -> f64 {
        self.required[u * (self.services + 1) + v]
    }

    fn deadhead_crossing(&self, in_set: &[bool]) -> f64 {
        let v = self.vertices;
        (0..v).flat_map(|a| (0..v).map(move |b| (a, b))).filter(|&(a, b)| in_set[a] != in_set[b]).map(|(a, b)| self.deadhead(a, b)).sum()
    }

    fn required_crossing(&self, in_set: &[bool]) -> f64 {
        let m = self.services + 1;
        let inside = |x: usize| x < in_set.len() && in_set[x];
        (0..m).flat_map(|u| (0..m).map(move |v| (u, v))).filter(|&(u, v)| inside(u) != inside(v)).map(|(u, v)| self.required(u, v)).sum()
    }
}

/// Number of required links with exactly one endpoint in the set.
fn required_degree(inst: &Instance, in_set: &[bool]) -> usize {
    inst.service_links().iter().filter(|&&l| in_set[inst.links[l].tail] != in_set[inst.links[l].head]).count()
}

fn components(v: usize, edge: impl Fn(usize, usize) -> bool) -> Vec<usize> {
    let mut comp = vec![usize::MAX; v];
    let mut next = 0;
    for s in 0..v {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = next;
        let mut stack = vec![s];
        while let Some(a) = stack.pop() {
            for b in 0..v {
                if comp[b] == usize::MAX && edge(a, b) {
                    comp[b] = next;
                    stack.push(b);
                }
            }
        }
        next += 1;
    }
    comp
}

/// Vertex sets `S ∌ 0` with an odd number of required links across `δ(S)`
/// and deadhead flow across `δ(S)` below one.
pub fn separate_odd_edge_cuts(inst: &Instance, flows: &ArcFlows, limit: usize) -> Vec<Row> {
    let v = flows.vertices;
    let mut candidates: Vec<Vec<bool>> = Vec::new();
    for &thr in &THRESHOLDS {
        let comp = components(v, |a, b| {
            a != b && (flows.deadhead(a, b) + flows.deadhead(b, a) > thr || {
                let adjacent = inst.service_links().iter().any(|&l| {
                    let k = &inst.links[l];
                    (k.tail == a && k.head == b) || (k.tail == b && k.head == a)
                });
                adjacent && thr == 0.0
            })
        });
        let count = comp.iter().max().map_or(0, |m| m + 1);
        for c in 0..count {
            candidates.push(comp.iter().map(|&x| x == c).collect());
        }
    }
    for s in 1..v {
        candidates.push((0..v).map(|x| x == s).collect());
    }
    let mut out: Vec<Row> = Vec::new();
    for mut set in candidates {
        if set[0] {
            set.iter_mut().for_each(|x| *x = !*x);
        }
        if !set.iter().any(|&x| x) || required_degree(inst, &set) % 2 == 0 {
            continue;
        }
        if flows.deadhead_crossing(&set) < 1.0 - VIOLATION {
            let row = Row { kind: RowKind::OddEdge { in_set: set }, ge: true, rhs: 1.0 };
            if !out.contains(&row) {
                out.push(row);
            }
        }
        if out.len() >= limit {
            break;
        }
    }
    out
}

fn capacity_row(demand: &[u64], capacity: u64, flows: &ArcFlows, set: &[bool]) -> Option<Row> {
    let q: u64 = set.iter().zip(demand).filter(|(x, _)| **x).map(|(_, d)| d).sum();
    if q == 0 {
        return None;
    }
    let rhs = 2.0 * q.div_ceil(capacity) as f64;
    (flows.required_crossing(set) < rhs - VIOLATION)
        .then(|| Row { kind: RowKind::Capacity { in_set: set.to_vec() }, ge: true, rhs })
}

/// Service sets whose required-graph crossing is below `2⌈q(S)/Q⌉`:
/// exhaustive over subsets up to `exhaustive_max` services, greedy growth
/// from each seed otherwise.
pub fn separate_capacity_cuts(demand: &[u64], capacity: u64, flows: &ArcFlows, limit: usize, exhaustive_max: usize) -> Vec<Row> {
    let n = demand.len();
    let mut out: Vec<Row> = Vec::new();
    let push = |row: Row, out: &mut Vec<Row>| {
        if !out.contains(&row) {
            out.push(row);
        }
    };
    if n <= exhaustive_max {
        let mut found: Vec<(f64, Row)> = Vec::new();
        for mask in 1u32..(1u32 << n) {
            let set: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            if let Some(row) = capacity_row(demand, capacity, flows, &set) {
                let RowKind::Capacity { in_set } = &row.kind else { unreachable!() };
                found.push((flows.required_crossing(in_set) - row.rhs, row));
            }
        }
        found.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (_, row) in found.into_iter().take(limit) {
            push(row, &mut out);
        }
        return out;
    }
    for seed in 0..n {
        let mut set = vec![false; n];
        set[seed] = true;
        for _ in 1..n {
            if let Some(row) = capacity_row(demand, capacity, flows, &set) {
                push(row, &mut out);
                break;
            }
            let best = (0..n)
                .filter(|&u| !set[u])
                .map(|u| {
                    let link: f64 = (0..n).filter(|&v| set[v]).map(|v| flows.required(u, v) + flows.required(v, u)).sum();
                    (link, u)
                })
                .max_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
            match best {
                Some((link, u)) if link > 0.0 => set[u] = true,
                _ => break,
            }
        }
        if out.len() >= limit {
            break;
        }
    }
    out
}
