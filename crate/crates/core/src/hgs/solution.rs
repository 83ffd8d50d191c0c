use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::network::Instance;
use crate::pl_time::tolerance;
use crate::profiles::ProfileMatrix;

use super::decode::{decode_route, decode_route_extended};
use super::HgsError;

/// Linear penalty weights on duration and capacity excess.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Penalties {
    pub duration: f64,
    pub capacity: f64,
}

impl Penalties {
    pub fn scaled(self, factor: f64) -> Self {
        Self { duration: self.duration * factor, capacity: self.capacity * factor }
    }
}

/// Route cost with penalized duration and load excess.
#[inline]
pub fn penalized_cost(duration: f64, load: f64, limit: f64, capacity: f64, w: Penalties) -> f64 {
    duration + w.duration * (duration - limit).max(0.0) + w.capacity * (load - capacity).max(0.0)
}

/// A solution as mode-free service sequences, one per vehicle slot (possibly
/// empty), with the decoded durations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutePlan {
    pub routes: Vec<Vec<usize>>,
    pub durations: Vec<f64>,
    pub loads: Vec<f64>,
    pub total_duration: f64,
    pub capacity_feasible: bool,
    pub duration_feasible: bool,
}

impl RoutePlan {
    /// Decodes every route, continuing past the horizon for routes that exceed it.
    pub fn evaluate(inst: &Instance, pm: &ProfileMatrix, routes: Vec<Vec<usize>>) -> Self {
        let durations: Vec<f64> = routes.iter().map(|r| decode_route_extended(pm, r).duration).collect();
        let loads: Vec<f64> = routes.iter().map(|r| r.iter().map(|&s| inst.demand(s)).sum()).collect();
        let eps = tolerance(inst.duration_limit);
        let capacity_feasible = loads.iter().all(|&q| q <= inst.capacity + 1e-9);
        let duration_feasible = durations.iter().all(|&d| d <= inst.duration_limit + eps);
        Self {
            total_duration: durations.iter().sum(),
            routes,
            durations,
            loads,
            capacity_feasible,
            duration_feasible,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.capacity_feasible && self.duration_feasible
    }

    pub fn penalized(&self, inst: &Instance, w: Penalties) -> f64 {
        self.durations
            .iter()
            .zip(&self.loads)
            .map(|(&d, &q)| penalized_cost(d, q, inst.duration_limit, inst.capacity, w))
            .sum()
    }

    /// Checks that every service appears exactly once and the vehicle count holds.
    pub fn check_coverage(&self, inst: &Instance) -> Result<(), HgsError> {
        let mut seen = vec![false; inst.service_count()];
        for &s in self.routes.iter().flatten() {
            if s >= seen.len() || std::mem::replace(&mut seen[s], true) {
                return Err(HgsError::InvalidPlan(format!("service {s} repeated or unknown")));
            }
        }
        if let Some(s) = seen.iter().position(|&x| !x) {
            return Err(HgsError::InvalidPlan(format!("service {s} missing")));
        }
        if self.routes.iter().filter(|r| !r.is_empty()).count() > inst.vehicles {
            return Err(HgsError::InvalidPlan("more routes than vehicles".into()));
        }
        Ok(())
    }

    /// Successor of each service, `n` for the depot.
    pub fn successors(&self, n: usize) -> Vec<usize> {
        let mut succ = vec![n; n];
        for r in &self.routes {
            for w in r.windows(2) {
                succ[w[0]] = w[1];
            }
        }
        succ
    }
}

/// Writes the solution text: one `ROUTE` line per nonempty route with
/// `link_id:mode` tokens (modes numbered from 1), then `OBJECTIVE` and one
/// `STAT key value` line per statistic.
pub fn write_solution(
    inst: &Instance,
    pm: &ProfileMatrix,
    plan: &RoutePlan,
    stats: &[(String, f64)],
) -> Result<String, HgsError> {
    let mut out = String::new();
    for (k, r) in plan.routes.iter().filter(|r| !r.is_empty()).enumerate() {
        let decoded = decode_route(pm, r).map_err(|_| HgsError::InvalidPlan(format!("route {k} exceeds the horizon")))?;
        let load: f64 = r.iter().map(|&s| inst.demand(s)).sum();
        write!(out, "ROUTE {} DUR {} LOAD {} :", k + 1, decoded.duration, load).unwrap();
        for (&s, &m) in r.iter().zip(&decoded.modes) {
            write!(out, " {}:{}", inst.service_link(s), m + 1).unwrap();
        }
        out.push('\n');
    }
    writeln!(out, "OBJECTIVE {}", plan.total_duration).unwrap();
    for (key, value) in stats {
        writeln!(out, "STAT {key} {value}").unwrap();
    }
    Ok(out)
}

/// A parsed solution file.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFile {
    /// Per route, `(service, mode)` pairs.
    pub routes: Vec<Vec<(usize, usize)>>,
    pub objective: f64,
    pub stats: Vec<(String, f64)>,
}

pub fn parse_solution(inst: &Instance, text: &str) -> Result<SolutionFile, HgsError> {
    let mut service_of = vec![usize::MAX; inst.links.len()];
    for (s, &l) in inst.service_links().iter().enumerate() {
        service_of[l] = s;
    }
    let bad = |line: usize, msg: &str| HgsError::InvalidPlan(format!("line {}: {msg}", line + 1));
    let mut file = SolutionFile { routes: Vec::new(), objective: f64::NAN, stats: Vec::new() };
    for (no, line) in text.lines().enumerate() {
        let mut words = line.split_whitespace();
        match words.next() {
            Some("ROUTE") => {
                let (_, services) = line.split_once(':').ok_or_else(|| bad(no, "missing ':'"))?;
                let mut route = Vec::new();
                for tok in services.split_whitespace() {
                    let (l, m) = tok.split_once(':').ok_or_else(|| bad(no, "expected link:mode"))?;
                    let l: usize = l.parse().map_err(|_| bad(no, "bad link id"))?;
                    let m: usize = m.parse().map_err(|_| bad(no, "bad mode"))?;
                    let s = *service_of.get(l).filter(|&&s| s != usize::MAX).ok_or_else(|| bad(no, "not a service"))?;
                    if m == 0 || m > inst.mode_count(s) {
                        return Err(bad(no, "mode out of range"));
                    }
                    route.push((s, m - 1));
                }
                file.routes.push(route);
            }
            Some("OBJECTIVE") => {
                file.objective = words.next().and_then(|w| w.parse().ok()).ok_or_else(|| bad(no, "bad objective"))?;
            }
            Some("STAT") => {
                let key = words.next().ok_or_else(|| bad(no, "missing key"))?;
                let value = words.next().and_then(|w| w.parse().ok()).ok_or_else(|| bad(no, "bad value"))?;
                file.stats.push((key.to_string(), value));
            }
            None => {}
            Some(_) => return Err(bad(no, "unknown record")),
        }
    }
    Ok(file)
}
