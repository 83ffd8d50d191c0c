use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Instance, LinkSpeeds, NetworkError};
use crate::pl_time::SpeedFunction;

/// Candidate breakpoints, as fractions of the horizon: 0.05, 0.10, ..., 0.95.
pub const BREAKPOINT_GRID: [f64; 19] = [
    0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95,
];

/// Service speed as a fraction of the travel speed on the same oriented link.
pub const SERVICE_SPEED_RATIO: f64 = 0.7;

const BREAKPOINTS_PER_LINK: usize = 6;

/// Degree of time dependency of generated speed profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpeedLevel {
    L,
    M,
    H,
}

impl SpeedLevel {
    pub const ALL: [SpeedLevel; 3] = [SpeedLevel::L, SpeedLevel::M, SpeedLevel::H];

    /// Uniform sampling interval for each of the seven segments.
    pub fn bounds(self) -> [(f64, f64); 7] {
        match self {
            SpeedLevel::L => [(0.6, 0.9), (0.8, 1.0), (1.0, 1.3), (0.9, 1.1), (1.0, 1.3), (0.8, 1.0), (0.6, 0.9)],
            SpeedLevel::M => [(0.5, 0.8), (0.7, 1.0), (1.0, 1.4), (0.8, 1.2), (1.0, 1.4), (0.7, 1.0), (0.5, 0.8)],
            SpeedLevel::H => [(0.4, 0.7), (0.6, 1.0), (1.0, 1.6), (0.7, 1.3), (1.0, 1.6), (0.6, 1.0), (0.4, 0.7)],
        }
    }
}

impl FromStr for SpeedLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "L" => Ok(SpeedLevel::L),
            "M" => Ok(SpeedLevel::M),
            "H" => Ok(SpeedLevel::H),
            other => Err(format!("unknown speed level `{other}` (expected L, M or H)")),
        }
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws independent travel profiles for every oriented link and derives the
/// service profiles from them. Link `l` in direction `d` uses ChaCha8 stream
/// `2l + d`, so draws for a link do not depend on how many links precede it.
pub fn generate_speed_profiles(inst: &Instance, level: SpeedLevel, seed: u64) -> Result<Instance, NetworkError> {
    let mut out = inst.clone();
    let h = inst.duration_limit;
    let bounds = level.bounds();
    let oriented: Vec<_> = inst.oriented_links().collect();
    for (id, dir, _, _) in oriented {
        let mut rng = stream_rng(seed, 2 * id as u64 + dir.index() as u64);
        let mut picks = sample(&mut rng, BREAKPOINT_GRID.len(), BREAKPOINTS_PER_LINK).into_vec();
        picks.sort_unstable();
        let breakpoints: Vec<f64> = picks.iter().map(|&k| BREAKPOINT_GRID[k] * h).collect();
        let speeds: Vec<f64> = bounds.iter().map(|&(a, b)| rng.random_range(a..=b)).collect();
        let travel = SpeedFunction::new(breakpoints, speeds, h)?;
        let service = travel.scaled(SERVICE_SPEED_RATIO)?;
        out.set_speeds(id, dir, LinkSpeeds { travel, service })?;
    }
    Ok(out)
}

/// Perturbation experiment settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub sigma: f64,
    pub seed: u64,
    pub count: usize,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<(), NetworkError> {
        if !(0.0..1.0).contains(&self.sigma) {
            return Err(NetworkError::invariant("sigma", format!("{} must lie in [0, 1)", self.sigma)));
        }
        Ok(())
    }
}

fn truncated_normal(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 1.0;
    }
    let normal = Normal::new(1.0, sigma).expect("sigma is positive");
    loop {
        let c = normal.sample(rng);
        if (1.0 - sigma..=1.0 + sigma).contains(&c) {
            return c;
        }
    }
}

/// Multiplies every travel piece by an independent factor drawn from a normal
/// law centred on 1 and truncated to `[1 - sigma, 1 + sigma]`. Each service
/// piece receives the factor of the travel piece containing its start.
pub fn perturb_speeds(inst: &Instance, sigma: f64, rng: &mut ChaCha8Rng) -> Result<Instance, NetworkError> {
    let mut out = inst.clone();
    let oriented: Vec<_> = inst.oriented_links().collect();
    for (id, dir, _, _) in oriented {
        let s = inst.speeds(id, dir).expect("oriented link has speeds");
        let factors: Vec<f64> = (0..s.travel.piece_count()).map(|_| truncated_normal(rng, sigma)).collect();
        let travel = SpeedFunction::new(
            s.travel.breakpoints().to_vec(),
            s.travel.speeds().iter().zip(&factors).map(|(v, c)| v * c).collect(),
            s.travel.horizon(),
        )?;
        let starts = std::iter::once(0.0).chain(s.service.breakpoints().iter().copied());
        let service_speeds = starts
            .zip(s.service.speeds())
            .map(|(t, v)| v * factors[s.travel.breakpoints().partition_point(|&b| b <= t)])
            .collect();
        let service =
            SpeedFunction::new(s.service.breakpoints().to_vec(), service_speeds, s.service.horizon())?;
        out.set_speeds(id, dir, LinkSpeeds { travel, service })?;
    }
    Ok(out)
}

/// `spec.count` perturbed copies of `inst`; scenario `k` uses ChaCha8 stream `k`.
pub fn perturb_scenario(inst: &Instance, spec: &ScenarioSpec) -> Result<Vec<Instance>, NetworkError> {
    spec.validate()?;
    (0..spec.count)
        .map(|k| perturb_speeds(inst, spec.sigma, &mut stream_rng(spec.seed, k as u64)))
        .collect()
}

/// Static counterpart of `inst`: every oriented link gets the same constant
/// travel speed, the distance-weighted mean of the time-averaged travel
/// speeds, and likewise for service speeds.
pub fn uniform_equivalent(inst: &Instance) -> Result<Instance, NetworkError> {
    let (mut wt, mut ws, mut total) = (0.0, 0.0, 0.0);
    for (id, dir, _, _) in inst.oriented_links() {
        let s = inst.speeds(id, dir).expect("oriented link has speeds");
        let d = inst.links[id].distance;
        wt += d * s.travel.mean_speed();
        ws += d * s.service.mean_speed();
        total += d;
    }
    let h = inst.duration_limit;
    let speeds = LinkSpeeds {
        travel: SpeedFunction::constant(wt / total, h)?,
        service: SpeedFunction::constant(ws / total, h)?,
    };
    let mut out = inst.clone();
    let oriented: Vec<_> = inst.oriented_links().collect();
    for (id, dir, _, _) in oriented {
        out.set_speeds(id, dir, speeds.clone())?;
    }
    Ok(out)
}

/// Routes of a path-scanning heuristic at travel speed 1 and service speed
/// `SERVICE_SPEED_RATIO`: from the current vertex, serve the closest service
/// that still fits, otherwise return to the depot. Returns route durations.
pub(crate) fn greedy_route_durations(inst: &Instance) -> Vec<f64> {
    let dist = inst.static_travel_matrix(|l, _| inst.links[l].distance);
    let n = inst.service_count();
    let mut served = vec![false; n];
    let mut durations = Vec::new();
    let mut remaining = n;
    while remaining > 0 {
        let (mut at, mut load, mut time, mut count) = (0usize, 0.0, 0.0, 0usize);
        loop {
            let mut best: Option<(f64, usize, usize)> = None;
            for s in (0..n).filter(|&s| !served[s] && load + inst.demand(s) <= inst.capacity) {
                for mode in 0..inst.mode_count(s) {
                    let (a, _) = inst.service_endpoints(s, mode);
                    let d = dist[at][a];
                    if d.is_finite() && best.is_none_or(|(bd, _, _)| d < bd) {
                        best = Some((d, s, mode));
                    }
                }
            }
            let Some((d, s, mode)) = best else { break };
            let (_, b) = inst.service_endpoints(s, mode);
            time += d + inst.links[inst.service_link(s)].distance / SERVICE_SPEED_RATIO;
            load += inst.demand(s);
            served[s] = true;
            remaining -= 1;
            count += 1;
            at = b;
        }
        if count == 0 {
            // Nothing reachable fits; leave the rest unserved rather than loop.
            break;
        }
        durations.push(time + dist[at][0]);
    }
    durations
}

/// Twice the longest route of the greedy uniform-speed solution.
pub fn greedy_duration_limit(inst: &Instance) -> f64 {
    2.0 * greedy_route_durations(inst).into_iter().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Dir, Link, LinkKind};

    fn line(n: usize) -> Instance {
        let links = (0..n)
            .map(|i| Link { kind: LinkKind::Edge, tail: i, head: i + 1, distance: 2.0, demand: Some(1.0) })
            .collect();
        Instance::new("line", n + 1, links, 2, 10.0, 100.0).unwrap()
    }

    #[test]
    fn generated_speeds_follow_the_level_table() {
        let inst = generate_speed_profiles(&line(4), SpeedLevel::L, 7).unwrap();
        for (id, dir, _, _) in inst.oriented_links() {
            let s = inst.speeds(id, dir).unwrap();
            assert_eq!(s.travel.breakpoints().len(), 6);
            for (v, (a, b)) in s.travel.speeds().iter().zip(SpeedLevel::L.bounds()) {
                assert!((a..=b).contains(v));
            }
            assert!((s.travel.speeds()[2] >= 1.0) && (s.travel.speeds()[2] <= 1.3));
            for (vs, vt) in s.service.speeds().iter().zip(s.travel.speeds()) {
                assert!((vs / vt - 0.7).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn generation_is_deterministic_and_stream_split() {
        let a = generate_speed_profiles(&line(3), SpeedLevel::H, 11).unwrap();
        let b = generate_speed_profiles(&line(3), SpeedLevel::H, 11).unwrap();
        assert_eq!(a, b);
        let longer = generate_speed_profiles(&line(5), SpeedLevel::H, 11).unwrap();
        assert_eq!(a.speeds(1, Dir::Backward), longer.speeds(1, Dir::Backward));
    }

    #[test]
    fn perturbation_stays_in_truncation_range() {
        let inst = generate_speed_profiles(&line(3), SpeedLevel::M, 3).unwrap();
        let spec = ScenarioSpec { sigma: 0.6, seed: 5, count: 4 };
        for sc in perturb_scenario(&inst, &spec).unwrap() {
            for (id, dir, _, _) in inst.oriented_links() {
                let (a, b) = (inst.speeds(id, dir).unwrap(), sc.speeds(id, dir).unwrap());
                for (x, y) in a.travel.speeds().iter().zip(b.travel.speeds()) {
                    assert!(*y >= 0.4 * x - 1e-12 && *y <= 1.6 * x + 1e-12);
                }
                for k in 0..a.travel.piece_count() {
                    let c = b.travel.speeds()[k] / a.travel.speeds()[k];
                    let cs = b.service.speeds()[k] / a.service.speeds()[k];
                    assert!((c - cs).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn zero_sigma_leaves_speeds_unchanged() {
        let inst = generate_speed_profiles(&line(2), SpeedLevel::M, 3).unwrap();
        let spec = ScenarioSpec { sigma: 0.0, seed: 1, count: 2 };
        assert!(perturb_scenario(&inst, &spec).unwrap().iter().all(|s| *s == inst));
    }

    #[test]
    fn uniform_equivalent_is_constant() {
        let inst = generate_speed_profiles(&line(3), SpeedLevel::H, 2).unwrap();
        let u = uniform_equivalent(&inst).unwrap();
        let first = u.speeds(0, Dir::Forward).unwrap().clone();
        assert_eq!(first.travel.piece_count(), 1);
        assert!((first.service.speeds()[0] / first.travel.speeds()[0] - 0.7).abs() < 1e-12);
        for (id, dir, _, _) in u.oriented_links() {
            assert_eq!(u.speeds(id, dir).unwrap(), &first);
        }
    }

    #[test]
    fn greedy_limit_on_a_line() {
        // Capacity 10 fits all four services in one route: 4·2/0.7 out, 8 back.
        let d = greedy_duration_limit(&line(4));
        assert!((d - 2.0 * (8.0 + 8.0 / 0.7)).abs() < 1e-9);
    }
}
