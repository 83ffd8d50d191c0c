//! Instance model, file formats and speed-profile generation.

mod classic;
mod generate;
mod native;
mod synthetic;

pub use classic::parse_classic;
pub use generate::{
    generate_speed_profiles, greedy_duration_limit, perturb_scenario, perturb_speeds, uniform_equivalent,
    ScenarioSpec, SpeedLevel, BREAKPOINT_GRID, SERVICE_SPEED_RATIO,
};
pub use native::{parse_native, serialize_instance};
pub use synthetic::{synthetic_instance, SyntheticSpec};

use std::collections::BinaryHeap;
use std::cmp::Reverse;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pl_time::{PlError, SpeedFunction};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invariant violated by {entity}: {message}")]
    InvariantViolation { entity: String, message: String },
    #[error(transparent)]
    Speed(#[from] PlError),
}

impl NetworkError {
    fn invariant(entity: impl Into<String>, message: impl Into<String>) -> Self {
        Self::InvariantViolation { entity: entity.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InstanceFormat {
    /// BMCV/EGL-style `.dat` files (`LISTA_ARISTAS_REQ`, `DEPOSITO`, ...).
    ClassicCarp,
    /// Line-oriented native format carrying speed profiles.
    TdNative,
}

impl FromStr for InstanceFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "classic" | "classic_carp" | "dat" => Ok(Self::ClassicCarp),
            "native" | "td_native" | "td" => Ok(Self::TdNative),
            other => Err(format!("unknown instance format `{other}`")),
        }
    }
}

pub fn parse_instance(text: &str, format: InstanceFormat) -> Result<Instance, NetworkError> {
    match format {
        InstanceFormat::ClassicCarp => parse_classic(text),
        InstanceFormat::TdNative => parse_native(text),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkKind {
    Edge,
    Arc,
}

/// Travel orientation of a link: `Forward` goes tail to head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dir {
    Forward,
    Backward,
}

impl Dir {
    pub const BOTH: [Dir; 2] = [Dir::Forward, Dir::Backward];

    pub fn index(self) -> usize {
        match self {
            Dir::Forward => 0,
            Dir::Backward => 1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Dir::Forward => '+',
            Dir::Backward => '-',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub kind: LinkKind,
    pub tail: usize,
    pub head: usize,
    pub distance: f64,
    /// `Some(q)` for required links.
    pub demand: Option<f64>,
}

impl Link {
    pub fn directions(&self) -> &'static [Dir] {
        match self.kind {
            LinkKind::Edge => &Dir::BOTH,
            LinkKind::Arc => &Dir::BOTH[..1],
        }
    }

    pub fn endpoints(&self, dir: Dir) -> (usize, usize) {
        match dir {
            Dir::Forward => (self.tail, self.head),
            Dir::Backward => (self.head, self.tail),
        }
    }
}

/// Travel and service speed profiles of one oriented link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSpeeds {
    pub travel: SpeedFunction,
    pub service: SpeedFunction,
}

/// One required link served in one of its modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ServiceRef {
    pub service: usize,
    pub mode: usize,
}

impl fmt::Display for ServiceRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.service, self.mode + 1)
    }
}

/// A TDCARP instance. Vertex 0 is the depot; required links are numbered as
/// services `0..n` in link order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub name: String,
    pub vertex_count: usize,
    pub links: Vec<Link>,
    pub vehicles: usize,
    pub capacity: f64,
    pub duration_limit: f64,
    /// Indexed by link then `Dir::index()`; arcs only carry the forward entry.
    speeds: Vec<Vec<LinkSpeeds>>,
    services: Vec<usize>,
}

impl Instance {
    /// New instance with uniform unit travel and service speeds.
    pub fn new(
        name: impl Into<String>,
        vertex_count: usize,
        links: Vec<Link>,
        vehicles: usize,
        capacity: f64,
        duration_limit: f64,
    ) -> Result<Self, NetworkError> {
        if !(duration_limit.is_finite() && duration_limit > 0.0) {
            return Err(NetworkError::invariant("DURATION_LIMIT", format!("{duration_limit} must be positive")));
        }
        let unit = SpeedFunction::constant(1.0, duration_limit)?;
        let speeds = links
            .iter()
            .map(|l| {
                l.directions()
                    .iter()
                    .map(|_| LinkSpeeds { travel: unit.clone(), service: unit.clone() })
                    .collect()
            })
            .collect();
        let services = links.iter().enumerate().filter(|(_, l)| l.demand.is_some()).map(|(i, _)| i).collect();
        Ok(Self { name: name.into(), vertex_count, links, vehicles, capacity, duration_limit, speeds, services })
    }

    pub fn validate(&self) -> Result<(), NetworkError> {
        if self.vertex_count == 0 {
            return Err(NetworkError::invariant("VERTICES", "the depot vertex 0 must exist"));
        }
        if self.services.is_empty() {
            return Err(NetworkError::invariant("required links", "at least one required link is needed"));
        }
        if self.vehicles == 0 {
            return Err(NetworkError::invariant("VEHICLES", "fleet size must be positive"));
        }
        if !(self.capacity > 0.0) {
            return Err(NetworkError::invariant("CAPACITY", "capacity must be positive"));
        }
        for (id, l) in self.links.iter().enumerate() {
            let entity = || format!("link {id}");
            if l.tail >= self.vertex_count || l.head >= self.vertex_count {
                return Err(NetworkError::invariant(entity(), "endpoint out of range"));
            }
            if !(l.distance > 0.0 && l.distance.is_finite()) {
                return Err(NetworkError::invariant(entity(), format!("distance {} must be positive", l.distance)));
            }
            if let Some(q) = l.demand {
                if !(q >= 0.0) {
                    return Err(NetworkError::invariant(entity(), format!("demand {q} must be nonnegative")));
                }
                if q > self.capacity {
                    return Err(NetworkError::invariant(
                        entity(),
                        format!("demand {q} exceeds capacity {}", self.capacity),
                    ));
                }
            }
            for s in &self.speeds[id] {
                for f in [&s.travel, &s.service] {
                    if f.horizon() != self.duration_limit {
                        return Err(NetworkError::invariant(entity(), "speed horizon differs from DURATION_LIMIT"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Number of services `n`.
    pub fn service_count(&self) -> usize {
        self.services.len()
    }

    /// Link id of service `s`.
    pub fn service_link(&self, s: usize) -> usize {
        self.services[s]
    }

    pub fn service_links(&self) -> &[usize] {
        &self.services
    }

    pub fn demand(&self, s: usize) -> f64 {
        self.links[self.services[s]].demand.unwrap_or(0.0)
    }

    pub fn total_demand(&self) -> f64 {
        (0..self.service_count()).map(|s| self.demand(s)).sum()
    }

    /// Number of modes (1 for arcs, 2 for edges).
    pub fn mode_count(&self, s: usize) -> usize {
        self.links[self.services[s]].directions().len()
    }

    pub fn mode_dir(&self, mode: usize) -> Dir {
        Dir::BOTH[mode]
    }

    /// `(start, end)` vertices of service `s` operated in `mode`.
    pub fn service_endpoints(&self, s: usize, mode: usize) -> (usize, usize) {
        self.links[self.services[s]].endpoints(Dir::BOTH[mode])
    }

    pub fn speeds(&self, link: usize, dir: Dir) -> Option<&LinkSpeeds> {
        self.speeds[link].get(dir.index())
    }

    pub fn set_speeds(&mut self, link: usize, dir: Dir, speeds: LinkSpeeds) -> Result<(), NetworkError> {
        let slot = self.speeds[link]
            .get_mut(dir.index())
            .ok_or_else(|| NetworkError::invariant(format!("link {link}"), "arcs have no backward orientation"))?;
        *slot = speeds;
        Ok(())
    }

    /// Every oriented link `(link, dir, from, to)`.
    pub fn oriented_links(&self) -> impl Iterator<Item = (usize, Dir, usize, usize)> + '_ {
        self.links.iter().enumerate().flat_map(|(id, l)| {
            l.directions().iter().map(move |&d| {
                let (a, b) = l.endpoints(d);
                (id, d, a, b)
            })
        })
    }

    /// Depot plus every endpoint of a required link, sorted and deduplicated.
    pub fn relevant_vertices(&self) -> Vec<usize> {
        let mut v = vec![0];
        for &l in &self.services {
            v.push(self.links[l].tail);
            v.push(self.links[l].head);
        }
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Changes the horizon, rescaling nothing: speed profiles keep their
    /// breakpoints that fall inside the new horizon.
    pub fn with_duration_limit(&self, duration_limit: f64) -> Result<Self, NetworkError> {
        let mut out = self.clone();
        out.duration_limit = duration_limit;
        for per_link in &mut out.speeds {
            for s in per_link {
                s.travel = s.travel.with_horizon(duration_limit)?;
                s.service = s.service.with_horizon(duration_limit)?;
            }
        }
        Ok(out)
    }

    /// Travel times on a static copy of the network where every link takes
    /// `weight(link, dir)`; returns the full matrix `[from][to]`.
    pub fn static_travel_matrix(&self, weight: impl Fn(usize, Dir) -> f64) -> Vec<Vec<f64>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for (id, dir, a, b) in self.oriented_links() {
            adj[a].push((b, weight(id, dir)));
        }
        (0..self.vertex_count).map(|s| dijkstra(&adj, s)).collect()
    }
}

fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    dist[source] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((OrdF64(0.0), source)));
    while let Some(Reverse((OrdF64(d), u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((OrdF64(nd), v)));
            }
        }
    }
    dist
}

/// Total order over non-NaN floats for heaps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct OrdF64(pub f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Rescales demands and capacity by a power of ten so that every demand is
/// integral (load resources are indexed at unit granularity).
pub(crate) fn integralize_demands(links: &mut [Link], capacity: &mut f64) {
    let is_int = |x: f64| (x - x.round()).abs() < 1e-9;
    let mut scale = 1.0;
    while scale < 1e6 && !links.iter().filter_map(|l| l.demand).all(|q| is_int(q * scale)) {
        scale *= 10.0;
    }
    if scale > 1.0 {
        for l in links.iter_mut() {
            if let Some(q) = l.demand.as_mut() {
                *q = (*q * scale).round();
            }
        }
        *capacity = (*capacity * scale).floor();
    }
}
