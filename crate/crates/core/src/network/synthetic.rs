use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::generate::{generate_speed_profiles, greedy_duration_limit, greedy_route_durations, SpeedLevel};
use super::{Instance, Link, LinkKind, NetworkError};

/// Random planar-ish test networks: vertices scattered in a square, joined by
/// a random spanning tree plus short extra edges. Required edges are picked
/// among the edges; required arcs run parallel to existing edges, so the
/// network stays strongly connected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub vertices: usize,
    /// Edges added on top of the spanning tree.
    pub extra_edges: usize,
    pub required_edges: usize,
    pub required_arcs: usize,
    /// Demands are drawn uniformly from `1..=max_demand`.
    pub max_demand: u32,
    pub capacity: f64,
    /// `None` picks one more vehicle than the greedy solution uses.
    pub vehicles: Option<usize>,
    /// Multiplies the greedy duration limit.
    pub duration_factor: f64,
    pub level: Option<SpeedLevel>,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            vertices: 10,
            extra_edges: 5,
            required_edges: 6,
            required_arcs: 2,
            max_demand: 5,
            capacity: 12.0,
            vehicles: None,
            duration_factor: 1.0,
            level: Some(SpeedLevel::M),
            seed: 0,
        }
    }
}

pub fn synthetic_instance(spec: &SyntheticSpec) -> Result<Instance, NetworkError> {
    let n = spec.vertices;
    if n < 2 {
        return Err(NetworkError::invariant("vertices", "at least two vertices are needed"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pos: Vec<(f64, f64)> = (0..n).map(|_| (rng.random_range(0.0..100.0), rng.random_range(0.0..100.0))).collect();
    let dist = |a: usize, b: usize| {
        let (dx, dy) = (pos[a].0 - pos[b].0, pos[a].1 - pos[b].1);
        ((dx * dx + dy * dy).sqrt().round()).max(1.0)
    };

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let has = |pairs: &[(usize, usize)], a: usize, b: usize| pairs.iter().any(|&p| p == (a.min(b), a.max(b)));
    let mut order: Vec<usize> = (0..n).collect();
    order[1..].shuffle(&mut rng);
    for k in 1..n {
        let v = order[k];
        let u = order[..k].iter().copied().min_by(|&a, &b| dist(a, v).total_cmp(&dist(b, v))).unwrap();
        pairs.push((u.min(v), u.max(v)));
    }
    let mut candidates: Vec<(f64, usize, usize)> =
        (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).map(|(a, b)| (dist(a, b), a, b)).collect();
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut added = 0;
    let pool = (candidates.len()).min(3 * n);
    let mut extra: Vec<_> = candidates[..pool].iter().filter(|c| !has(&pairs, c.1, c.2)).copied().collect();
    extra.shuffle(&mut rng);
    for (_, a, b) in extra {
        if added == spec.extra_edges {
            break;
        }
        pairs.push((a, b));
        added += 1;
    }

    if spec.required_edges > pairs.len() {
        return Err(NetworkError::invariant(
            "required_edges",
            format!("{} requested but the network has {} edges", spec.required_edges, pairs.len()),
        ));
    }
    let mut links: Vec<Link> = pairs
        .iter()
        .map(|&(a, b)| Link { kind: LinkKind::Edge, tail: a, head: b, distance: dist(a, b), demand: None })
        .collect();
    let mut ids: Vec<usize> = (0..links.len()).collect();
    ids.shuffle(&mut rng);
    for &id in &ids[..spec.required_edges] {
        links[id].demand = Some(rng.random_range(1..=spec.max_demand) as f64);
    }
    for _ in 0..spec.required_arcs {
        let (a, b) = pairs[rng.random_range(0..pairs.len())];
        let (tail, head) = if rng.random_bool(0.5) { (a, b) } else { (b, a) };
        let demand = Some(rng.random_range(1..=spec.max_demand) as f64);
        links.push(Link { kind: LinkKind::Arc, tail, head, distance: dist(a, b), demand });
    }

    let name = format!("syn-v{n}-s{}", spec.seed);
    let provisional = Instance::new(name, n, links, 1, spec.capacity, 1.0)?;
    let vehicles = spec.vehicles.unwrap_or_else(|| greedy_route_durations(&provisional).len() + 1);
    let limit = spec.duration_factor * greedy_duration_limit(&provisional);
    let mut inst = provisional.with_duration_limit(limit)?;
    inst.vehicles = vehicles;
    inst.validate()?;
    match spec.level {
        Some(level) => generate_speed_profiles(&inst, level, spec.seed),
        None => Ok(inst),
    }
}
