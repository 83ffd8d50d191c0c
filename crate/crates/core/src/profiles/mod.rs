//! Earliest-arrival profiles between the depot and the service endpoints, for
//! every departure time, together with per-service arrival functions.

mod cache;
mod oracle;

pub use cache::{instance_hash, read_cache, write_cache, CACHE_VERSION};
pub use oracle::{discrete_quickest_path, earliest_arrivals, DiscretePath};

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{Dir, Instance, ServiceRef};
use crate::pl_time::{
    build_arrival_function, compose, default_bucket_count, lower_envelope, tolerance, ArrivalFunction,
    IndexedArrival, PlError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("profile from origin {origin} did not stabilise after {rounds} rounds")]
    NonTermination { origin: usize, rounds: usize },
    #[error("vertex {to} cannot be reached from {from} when departing at {t}")]
    Unreachable { from: usize, to: usize, t: f64 },
    #[error("service {service} in mode {mode} cannot be completed within the horizon")]
    DegenerateService { service: usize, mode: usize },
    #[error("vertex {0} is not a profile origin")]
    NotAnOrigin(usize),
    #[error("profile cache: {0}")]
    Cache(String),
    #[error(transparent)]
    Pl(#[from] PlError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileOptions {
    /// Buckets per indexed function; `None` uses `default_bucket_count`.
    pub buckets: Option<usize>,
    /// Plain binary search instead of bucket lookups when false.
    pub use_buckets: bool,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self { buckets: None, use_buckets: true }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ProfileTelemetry {
    pub origins: usize,
    pub functions: usize,
    pub total_pieces: usize,
    pub mean_pieces: f64,
    pub max_pieces: usize,
    pub rounds: usize,
    pub build_seconds: f64,
}

/// Start and end vertices of a service in one mode, with its service function.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceMode {
    pub start: usize,
    pub end: usize,
    pub function: IndexedArrival,
    /// `min_t { Φ̂(t) - t }`.
    pub min_time: f64,
    /// Service time at time 0, `Φ̂(0)`.
    pub time_at_zero: f64,
}

/// Quickest-path profiles Ψ from every relevant origin to every vertex, and
/// the service arrival functions Φ̂ of every service mode.
#[derive(Debug, Clone)]
pub struct ProfileMatrix {
    horizon: f64,
    vertex_count: usize,
    origins: Vec<usize>,
    origin_slot: Vec<u32>,
    psi: Vec<IndexedArrival>,
    gaps: Vec<f64>,
    services: Vec<Vec<ServiceMode>>,
    options: ProfileOptions,
    telemetry: ProfileTelemetry,
}

const NO_SLOT: u32 = u32::MAX;

impl ProfileMatrix {
    pub(crate) fn assemble(
        inst: &Instance,
        origins: Vec<usize>,
        functions: Vec<Vec<ArrivalFunction>>,
        service_functions: Vec<Vec<ArrivalFunction>>,
        options: ProfileOptions,
        mut telemetry: ProfileTelemetry,
    ) -> Self {
        let index = |f: ArrivalFunction| match options.buckets {
            Some(b) => IndexedArrival::with_buckets(f, b),
            None => {
                let b = default_bucket_count(&f);
                IndexedArrival::with_buckets(f, b)
            }
        };
        let mut origin_slot = vec![NO_SLOT; inst.vertex_count];
        for (k, &o) in origins.iter().enumerate() {
            origin_slot[o] = k as u32;
        }
        let mut psi = Vec::with_capacity(origins.len() * inst.vertex_count);
        let mut gaps = Vec::with_capacity(psi.capacity());
        let (mut total, mut count, mut max) = (0, 0, 0);
        for row in functions {
            for f in row {
                if !f.is_infinite() {
                    total += f.piece_count();
                    max = max.max(f.piece_count());
                    count += 1;
                }
                gaps.push(f.min_gap());
                psi.push(index(f));
            }
        }
        telemetry.origins = origins.len();
        telemetry.functions = count;
        telemetry.total_pieces = total;
        telemetry.max_pieces = max;
        telemetry.mean_pieces = if count == 0 { 0.0 } else { total as f64 / count as f64 };
        let services = service_functions
            .into_iter()
            .enumerate()
            .map(|(s, modes)| {
                modes
                    .into_iter()
                    .enumerate()
                    .map(|(mode, f)| {
                        let (start, end) = inst.service_endpoints(s, mode);
                        let min_time = f.min_gap();
                        let time_at_zero = f.points()[0].1;
                        ServiceMode { start, end, function: index(f), min_time, time_at_zero }
                    })
                    .collect()
            })
            .collect();
        Self {
            horizon: inst.duration_limit,
            vertex_count: inst.vertex_count,
            origins,
            origin_slot,
            psi,
            gaps,
            services,
            options,
            telemetry,
        }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn origins(&self) -> &[usize] {
        &self.origins
    }

    pub fn options(&self) -> ProfileOptions {
        self.options
    }

    pub fn telemetry(&self) -> &ProfileTelemetry {
        &self.telemetry
    }

    pub fn is_origin(&self, v: usize) -> bool {
        self.origin_slot.get(v).is_some_and(|&s| s != NO_SLOT)
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        let s = self.origin_slot[i];
        assert!(s != NO_SLOT, "vertex {i} is not a profile origin");
        s as usize * self.vertex_count + j
    }

    /// Ψ_ij with its bucket index. Panics when `i` is not an origin.
    pub fn profile(&self, i: usize, j: usize) -> &IndexedArrival {
        &self.psi[self.slot(i, j)]
    }

    /// `min_t { Ψ_ij(t) - t }`; infinite when `j` is unreachable.
    #[inline]
    pub fn min_gap(&self, i: usize, j: usize) -> f64 {
        self.gaps[self.slot(i, j)]
    }

    #[inline]
    fn eval(&self, f: &IndexedArrival, t: f64) -> Option<f64> {
        if self.options.use_buckets {
            f.query(t)
        } else {
            f.function.eval(t)
        }
    }

    #[inline]
    fn eval_extended(&self, f: &IndexedArrival, t: f64) -> Option<f64> {
        match self.eval(f, t) {
            Some(v) => Some(v),
            None => f.function.eval_extended(t),
        }
    }

    /// Ψ_ij(t); `None` outside the domain (arrival after the horizon).
    #[inline]
    pub fn arrival(&self, i: usize, j: usize, t: f64) -> Option<f64> {
        if i == j {
            return (t <= self.horizon + tolerance(self.horizon)).then_some(t);
        }
        self.eval(self.profile(i, j), t)
    }

    /// Ψ_ij(t) continued past the domain end with unit slope. `None` only when
    /// `j` cannot be reached from `i` at all.
    #[inline]
    pub fn arrival_extended(&self, i: usize, j: usize, t: f64) -> Option<f64> {
        if i == j {
            return Some(t);
        }
        self.eval_extended(self.profile(i, j), t)
    }

    pub fn service_count(&self) -> usize {
        self.services.len()
    }

    pub fn mode_count(&self, s: usize) -> usize {
        self.services[s].len()
    }

    #[inline]
    pub fn service(&self, s: usize, mode: usize) -> &ServiceMode {
        &self.services[s][mode]
    }

    /// Φ̂ of service `s` in `mode` at start time `t`.
    #[inline]
    pub fn service_completion(&self, s: usize, mode: usize, t: f64) -> Option<f64> {
        self.eval(&self.services[s][mode].function, t)
    }

    #[inline]
    pub fn service_completion_extended(&self, s: usize, mode: usize, t: f64) -> Option<f64> {
        self.eval_extended(&self.services[s][mode].function, t)
    }

    /// Arrival at the start of `to` when leaving the end of `from` at `t`.
    pub fn mode_pair_arrival(&self, from: ServiceRef, to: ServiceRef, t: f64) -> Result<f64, PlError> {
        let a = self.services[from.service][from.mode].end;
        let b = self.services[to.service][to.mode].start;
        self.arrival(a, b, t).ok_or(PlError::QueryOutOfDomain { t })
    }

    /// Static closeness of two services: half of each service time at time 0
    /// plus the quickest path between them at time 0, minimised over modes.
    pub fn service_distance(&self, u: usize, v: usize) -> f64 {
        let mut best = f64::INFINITY;
        for a in &self.services[u] {
            for b in &self.services[v] {
                let gap = self.arrival_extended(a.end, b.start, 0.0).unwrap_or(f64::INFINITY);
                best = best.min(0.5 * a.time_at_zero + gap + 0.5 * b.time_at_zero);
            }
        }
        best
    }

    /// For each service, the other services ordered by `service_distance`
    /// (ties by index), truncated to `k`.
    pub fn neighbor_lists(&self, k: usize) -> Vec<Vec<usize>> {
        let n = self.service_count();
        (0..n)
            .map(|u| {
                let mut others: Vec<(f64, usize)> =
                    (0..n).filter(|&v| v != u).map(|v| (self.service_distance(u, v), v)).collect();
                others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                others.into_iter().take(k).map(|(_, v)| v).collect()
            })
            .collect()
    }

    pub(crate) fn raw_functions(&self) -> (&[IndexedArrival], &[Vec<ServiceMode>]) {
        (&self.psi, &self.services)
    }
}

/// Closed-form travel function of every oriented link; infinite when the
/// link cannot be traversed within the horizon.
pub fn travel_functions(inst: &Instance) -> Result<Vec<Vec<ArrivalFunction>>, PlError> {
    inst.links
        .iter()
        .enumerate()
        .map(|(id, link)| {
            link.directions()
                .iter()
                .map(|&d| {
                    let v = &inst.speeds(id, d).expect("oriented link has speeds").travel;
                    match build_arrival_function(v, link.distance, inst.duration_limit) {
                        Err(PlError::DegenerateHorizon { .. }) => Ok(ArrivalFunction::infinite(inst.duration_limit)),
                        other => other,
                    }
                })
                .collect()
        })
        .collect()
}

/// Service function Φ̂ of every service mode.
pub fn service_functions(inst: &Instance) -> Result<Vec<Vec<ArrivalFunction>>, ProfileError> {
    (0..inst.service_count())
        .map(|s| {
            let link = inst.service_link(s);
            (0..inst.mode_count(s))
                .map(|mode| {
                    let v = &inst.speeds(link, Dir::BOTH[mode]).expect("service has speeds").service;
                    build_arrival_function(v, inst.links[link].distance, inst.duration_limit).map_err(|e| match e {
                        PlError::DegenerateHorizon { .. } => ProfileError::DegenerateService { service: s, mode },
                        other => other.into(),
                    })
                })
                .collect()
        })
        .collect()
}

/// Label-correcting profile search from `origin` in synchronous rounds: every
/// vertex whose profile changed in the previous round relaxes its outgoing
/// links through `compose` and `lower_envelope`. Returns the profiles of all
/// vertices and the number of rounds.
pub fn profile_from_origin(
    inst: &Instance,
    travel: &[Vec<ArrivalFunction>],
    origin: usize,
) -> Result<(Vec<ArrivalFunction>, usize), ProfileError> {
    let n = inst.vertex_count;
    let h = inst.duration_limit;
    let eps = tolerance(h);
    let mut out_links: Vec<Vec<(usize, &ArrivalFunction)>> = vec![Vec::new(); n];
    for (id, dir, a, b) in inst.oriented_links() {
        let f = &travel[id][dir.index()];
        if !f.is_infinite() && a != b {
            out_links[a].push((b, f));
        }
    }
    let mut psi = vec![ArrivalFunction::infinite(h); n];
    psi[origin] = ArrivalFunction::identity(h);
    let mut active = vec![origin];
    let mut rounds = 0;
    while !active.is_empty() {
        rounds += 1;
        if rounds > n + 1 {
            return Err(ProfileError::NonTermination { origin, rounds });
        }
        let mut next = psi.clone();
        for &x in &active {
            for &(y, phi) in &out_links[x] {
                if y == origin {
                    continue;
                }
                let candidate = compose(phi, &psi[x]);
                if !candidate.is_infinite() {
                    next[y] = lower_envelope(&next[y], &candidate);
                }
            }
        }
        active.clear();
        for y in 0..n {
            if !next[y].approx_eq(&psi[y], eps) {
                active.push(y);
                psi[y] = std::mem::replace(&mut next[y], ArrivalFunction::infinite(h));
            }
        }
    }
    Ok((psi, rounds))
}

/// Profiles from the depot and every endpoint of a required link, computed
/// in parallel.
pub fn build_profile_matrix(inst: &Instance, options: ProfileOptions) -> Result<ProfileMatrix, ProfileError> {
    let started = Instant::now();
    let travel = travel_functions(inst)?;
    let services = service_functions(inst)?;
    let origins = inst.relevant_vertices();
    let rows: Vec<(Vec<ArrivalFunction>, usize)> =
        origins.par_iter().map(|&o| profile_from_origin(inst, &travel, o)).collect::<Result<_, _>>()?;
    let rounds = rows.iter().map(|r| r.1).max().unwrap_or(0);
    let functions = rows.into_iter().map(|r| r.0).collect();
    let telemetry =
        ProfileTelemetry { rounds, build_seconds: started.elapsed().as_secs_f64(), ..Default::default() };
    Ok(ProfileMatrix::assemble(inst, origins, functions, services, options, telemetry))
}
