use serde::{Deserialize, Serialize};

use crate::profiles::ProfileMatrix;

use super::BcpError;

/// A route as oriented services `(service, mode)`, with its duration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub services: Vec<(usize, usize)>,
    pub duration: f64,
}

/// Route duration from the depot at time 0 with fixed modes; fails when a
/// step leaves the horizon.
pub fn route_duration(pm: &ProfileMatrix, services: &[(usize, usize)]) -> Result<f64, BcpError> {
    let mut t = 0.0;
    let mut at = 0;
    for &(s, m) in services {
        let sm = pm.service(s, m);
        t = pm.arrival(at, sm.start, t).ok_or(BcpError::Infeasible)?;
        t = pm.service_completion(s, m, t).ok_or(BcpError::Infeasible)?;
        at = sm.end;
    }
    pm.arrival(at, 0, t).ok_or(BcpError::Infeasible)
}

impl Column {
    pub fn new(pm: &ProfileMatrix, services: Vec<(usize, usize)>) -> Result<Self, BcpError> {
        let duration = route_duration(pm, &services)?;
        Ok(Self { services, duration })
    }

    /// Deadheads `(from, to)` between consecutive services, depot legs
    /// included, skipping zero-length ones.
    pub fn deadheads(&self, pm: &ProfileMatrix) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.services.len() + 1);
        let mut at = 0;
        for &(s, m) in &self.services {
            let sm = pm.service(s, m);
            if at != sm.start {
                out.push((at, sm.start));
            }
            at = sm.end;
        }
        if at != 0 {
            out.push((at, 0));
        }
        out
    }

    /// Arcs of the required graph, with `n` standing for the depot.
    pub fn required_arcs(&self, n: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.services.len() + 1);
        let mut prev = n;
        for &(s, _) in &self.services {
            out.push((prev, s));
            prev = s;
        }
        if !self.services.is_empty() {
            out.push((prev, n));
        }
        out
    }

    pub fn load(&self, demand: &[u64]) -> u64 {
        self.services.iter().map(|&(s, _)| demand[s]).sum()
    }
}

/// A branching restriction or a cut over aggregated incidences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RowKind {
    /// Lifted odd-edge cutset: deadheads crossing the vertex set.
    OddEdge { in_set: Vec<bool> },
    /// Lifted capacity cut: required-graph arcs crossing the service set.
    Capacity { in_set: Vec<bool> },
    /// Deadheads incident to a vertex.
    Degree { vertex: usize },
    /// One deadhead arc.
    Deadhead { from: usize, to: usize },
    /// One required-graph arc (`n` is the depot).
    Required { from: usize, to: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub kind: RowKind,
    pub ge: bool,
    pub rhs: f64,
}

impl RowKind {
    pub fn deadhead_coef(&self, a: usize, b: usize) -> f64 {
        match self {
            RowKind::OddEdge { in_set } => f64::from(u8::from(in_set[a] != in_set[b])),
            RowKind::Degree { vertex } => f64::from(u8::from(a == *vertex) + u8::from(b == *vertex)),
            RowKind::Deadhead { from, to } => f64::from(u8::from(a == *from && b == *to)),
            _ => 0.0,
        }
    }

    pub fn required_coef(&self, u: usize, v: usize) -> f64 {
        let inside = |x: usize, s: &[bool]| x < s.len() && s[x];
        match self {
            RowKind::Capacity { in_set } => f64::from(u8::from(inside(u, in_set) != inside(v, in_set))),
            RowKind::Required { from, to } => f64::from(u8::from(u == *from && v == *to)),
            _ => 0.0,
        }
    }

    pub fn coef(&self, col: &Column, pm: &ProfileMatrix, n: usize) -> f64 {
        let d: f64 = col.deadheads(pm).iter().map(|&(a, b)| self.deadhead_coef(a, b)).sum();
        let r: f64 = col.required_arcs(n).iter().map(|&(u, v)| self.required_coef(u, v)).sum();
        d + r
    }
}

/// Dual values of the master rows, expanded into per-transition weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Duals {
    pub gamma: f64,
    pub beta: Vec<f64>,
    /// `vertices × vertices`, dual weight of each deadhead arc.
    pub deadhead: Vec<f64>,
    /// `(n + 1) × (n + 1)`, dual weight of each required-graph arc.
    pub required: Vec<f64>,
    pub vertices: usize,
}

impl Duals {
    pub fn zero(n: usize, vertices: usize) -> Self {
        Self {
            gamma: 0.0,
            beta: vec![0.0; n],
            deadhead: vec![0.0; vertices * vertices],
            required: vec![0.0; (n + 1) * (n + 1)],
            vertices,
        }
    }

    pub fn from_rows(n: usize, vertices: usize, gamma: f64, beta: &[f64], rows: &[(&Row, f64)]) -> Self {
        let mut d = Self::zero(n, vertices);
        d.gamma = gamma;
        d.beta.copy_from_slice(beta);
        for &(row, y) in rows {
            if y == 0.0 {
                continue;
            }
            match &row.kind {
                RowKind::OddEdge { .. } | RowKind::Degree { .. } | RowKind::Deadhead { .. } => {
                    for a in 0..vertices {
                        for b in 0..vertices {
                            if a != b {
                                d.deadhead[a * vertices + b] += y * row.kind.deadhead_coef(a, b);
                            }
                        }
                    }
                }
                RowKind::Capacity { .. } | RowKind::Required { .. } => {
                    for u in 0..=n {
                        for v in 0..=n {
                            d.required[u * (n + 1) + v] += y * row.kind.required_coef(u, v);
                        }
                    }
                }
            }
        }
        d
    }

    /// `α · self + (1 − α) · other`.
    pub fn blend(&self, other: &Duals, alpha: f64) -> Duals {
        let mix = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| alpha * x + (1.0 - alpha) * y).collect();
        Duals {
            gamma: alpha * self.gamma + (1.0 - alpha) * other.gamma,
            beta: mix(&self.beta, &other.beta),
            deadhead: mix(&self.deadhead, &other.deadhead),
            required: mix(&self.required, &other.required),
            vertices: self.vertices,
        }
    }

    #[inline]
    pub fn deadhead_dual(&self, a: usize, b: usize) -> f64 {
        if a == b {
            0.0
        } else {
            self.deadhead[a * self.vertices + b]
        }
    }

    #[inline]
    pub fn required_dual(&self, u: usize, v: usize) -> f64 {
        self.required[u * (self.beta.len() + 1) + v]
    }

    /// Reduced cost of a column recomputed from scratch.
    pub fn reduced_cost(&self, col: &Column, pm: &ProfileMatrix) -> f64 {
        let n = self.beta.len();
        let mut xi = self.gamma;
        xi += col.services.iter().map(|&(s, _)| self.beta[s]).sum::<f64>();
        xi += col.deadheads(pm).iter().map(|&(a, b)| self.deadhead_dual(a, b)).sum::<f64>();
        xi += col.required_arcs(n).iter().map(|&(u, v)| self.required_dual(u, v)).sum::<f64>();
        col.duration - xi
    }
}
