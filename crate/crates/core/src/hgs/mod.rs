//! Hybrid genetic search over mode-free routes.
//!
//! Individuals are giant tours split into at most `m` routes. Each route is a
//! service sequence whose traversal modes are chosen optimally by a dynamic
//! program over the service modes ([`decode_route`]). Local search moves are
//! screened with duration lower bounds built from minimum service and
//! travel gaps ([`SeqBound`]); only moves whose bound shows a possible gain
//! are decoded exactly.

mod bounds;
mod decode;
mod local_search;
mod population;
mod solution;
mod split;

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::Instance;
use crate::pl_time::{enable_query_stats, query_stats, reset_query_stats};
use crate::profiles::ProfileMatrix;

pub use bounds::{move_lower_bound, seq_concat, seq_single, SeqBound};
pub use decode::{decode_route, decode_route_extended, evaluate_fixed_modes, DecodeState, DecodedRoute};
pub use local_search::{local_search, LsOptions, LsStats};
pub use population::{broken_pairs_distance, crossover_ox, ox_with_cut, Individual, Population, PopulationParams};
pub use solution::{parse_solution, penalized_cost, write_solution, Penalties, RoutePlan, SolutionFile};
pub use split::split_giant_tour;

#[derive(Debug, Error)]
pub enum HgsError {
    #[error("invalid solution: {0}")]
    InvalidPlan(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HgsParams {
    pub mu: usize,
    pub lambda: usize,
    pub elite_fraction: f64,
    pub n_close: usize,
    /// Proximity list length for local search.
    pub neighbors: usize,
    /// Iterations without improvement before the population is rebuilt.
    pub restart_after: u64,
    /// The initial population has `initial_factor * mu` individuals.
    pub initial_factor: usize,
    pub repair_probability: f64,
    pub repair_factor: f64,
    pub feasible_target: f64,
    pub penalty_interval: u64,
    pub time_limit: f64,
    pub max_iterations: Option<u64>,
    pub max_no_improve: Option<u64>,
    pub split_window: Option<usize>,
    pub audit: bool,
    pub disable_filter: bool,
}

impl Default for HgsParams {
    fn default() -> Self {
        Self {
            mu: 25,
            lambda: 40,
            elite_fraction: 0.4,
            n_close: 5,
            neighbors: 15,
            restart_after: 10_000,
            initial_factor: 4,
            repair_probability: 0.5,
            repair_factor: 10.0,
            feasible_target: 0.25,
            penalty_interval: 100,
            time_limit: 3600.0,
            max_iterations: None,
            max_no_improve: None,
            split_window: None,
            audit: false,
            disable_filter: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HgsStats {
    pub iterations: u64,
    pub restarts: u64,
    pub best_iteration: u64,
    pub ls: LsStats,
    pub bucket_direct_hits: u64,
    pub bucket_binary_searches: u64,
    pub seconds: f64,
    pub final_duration_penalty: f64,
    pub final_capacity_penalty: f64,
}

impl HgsStats {
    pub fn bucket_hit_rate(&self) -> f64 {
        let total = self.bucket_direct_hits + self.bucket_binary_searches;
        if total == 0 {
            0.0
        } else {
            self.bucket_direct_hits as f64 / total as f64
        }
    }

    /// Key/value pairs for the solution file trailer.
    pub fn as_pairs(&self) -> Vec<(String, f64)> {
        let l = &self.ls;
        [
            ("iterations", self.iterations as f64),
            ("restarts", self.restarts as f64),
            ("best_iteration", self.best_iteration as f64),
            ("moves_evaluated", l.moves_evaluated as f64),
            ("moves_filtered", l.moves_filtered as f64),
            ("filter_rate", l.filter_rate()),
            ("exact_evaluations", l.exact_evaluations as f64),
            ("improvements", l.improvements as f64),
            ("audit_checked", l.audit_checked as f64),
            ("audit_violations", l.audit_violations as f64),
            ("bound_violations", l.bound_violations as f64),
            ("bucket_hit_rate", self.bucket_hit_rate()),
            ("seconds", self.seconds),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

#[derive(Debug, Clone)]
pub struct HgsResult {
    /// Best feasible plan found, or the least penalized one if none was feasible.
    pub best: RoutePlan,
    pub stats: HgsStats,
}

struct Runner<'a> {
    inst: &'a Instance,
    pm: &'a ProfileMatrix,
    params: &'a HgsParams,
    neighbors: Vec<Vec<usize>>,
    rng: ChaCha8Rng,
    w: Penalties,
    stats: HgsStats,
    best: Option<RoutePlan>,
    best_penalized: Option<(f64, RoutePlan)>,
    recent: Vec<(bool, bool)>,
}

impl Runner<'_> {
    fn educate(&mut self, plan: &RoutePlan, w: Penalties) -> RoutePlan {
        let opts = LsOptions { penalties: w, audit: self.params.audit, disable_filter: self.params.disable_filter };
        let (out, ls) = local_search(self.inst, self.pm, &self.neighbors, plan, opts, &mut self.rng);
        self.stats.ls.add(&ls);
        out
    }

    /// Records `plan` as incumbent if better; returns whether it improved.
    fn record(&mut self, plan: &RoutePlan) -> bool {
        let eps = 1e-9 * self.inst.duration_limit.max(1.0);
        if plan.is_feasible() {
            if self.best.as_ref().is_none_or(|b| plan.total_duration < b.total_duration - eps) {
                self.best = Some(plan.clone());
                return true;
            }
        } else if self.best.is_none() {
            let p = plan.penalized(self.inst, self.w);
            if self.best_penalized.as_ref().is_none_or(|(b, _)| p < *b) {
                self.best_penalized = Some((p, plan.clone()));
            }
        }
        false
    }

    /// Splits, educates, optionally repairs and inserts one offspring.
    fn offspring(&mut self, pop: &mut Population, perm: &[usize]) -> bool {
        let split = split_giant_tour(self.inst, self.pm, perm, self.w, self.params.split_window);
        let plan = self.educate(&split, self.w);
        self.recent.push((plan.duration_feasible, plan.capacity_feasible));
        let mut improved = self.record(&plan);
        let feasible = plan.is_feasible();
        pop.insert(Individual::new(self.inst, plan.clone(), self.w));
        if !feasible && self.rng.random::<f64>() < self.params.repair_probability {
            let repaired = self.educate(&plan, self.w.scaled(self.params.repair_factor));
            if repaired.is_feasible() {
                improved |= self.record(&repaired);
                pop.insert(Individual::new(self.inst, repaired, self.w));
            }
        }
        improved
    }

    fn random_perm(&mut self) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..self.inst.service_count()).collect();
        perm.shuffle(&mut self.rng);
        perm
    }

    fn initialize(&mut self, pop: &mut Population, start: &Instant) {
        for _ in 0..self.params.initial_factor * self.params.mu {
            if start.elapsed().as_secs_f64() >= self.params.time_limit {
                break;
            }
            let perm = self.random_perm();
            self.offspring(pop, &perm);
        }
    }

    fn adjust_penalties(&mut self, pop: &mut Population) {
        if self.recent.is_empty() {
            return;
        }
        let n = self.recent.len() as f64;
        let dur = self.recent.iter().filter(|r| r.0).count() as f64 / n;
        let cap = self.recent.iter().filter(|r| r.1).count() as f64 / n;
        let target = self.params.feasible_target;
        let adjust = |w: f64, frac: f64| {
            let w = if frac < target - 0.05 {
                w * 1.2
            } else if frac > target + 0.05 {
                w / 1.15
            } else {
                w
            };
            w.clamp(0.1, 1e5)
        };
        self.w.duration = adjust(self.w.duration, dur);
        self.w.capacity = adjust(self.w.capacity, cap);
        self.recent.clear();
        pop.reprice_infeasible(self.inst, self.w);
    }
}

/// Runs the genetic search until the time limit, the iteration budget or the
/// no-improvement budget is exhausted. Deterministic for a given seed when
/// the time limit does not bind.
pub fn run_hgs(inst: &Instance, pm: &ProfileMatrix, params: &HgsParams, seed: u64) -> HgsResult {
    let start = Instant::now();
    enable_query_stats(true);
    reset_query_stats();
    let init_w = Penalties { duration: 1.0, capacity: (inst.duration_limit / inst.capacity).clamp(0.1, 1000.0) };
    let mut runner = Runner {
        inst,
        pm,
        params,
        neighbors: pm.neighbor_lists(params.neighbors),
        rng: ChaCha8Rng::seed_from_u64(seed),
        w: init_w,
        stats: HgsStats::default(),
        best: None,
        best_penalized: None,
        recent: Vec::new(),
    };
    let pop_params = PopulationParams {
        mu: params.mu,
        lambda: params.lambda,
        elite_fraction: params.elite_fraction,
        n_close: params.n_close,
    };
    let mut pop = Population::new(pop_params);
    runner.initialize(&mut pop, &start);
    let mut since_improve = 0u64;
    let mut since_restart = 0u64;
    while !pop.is_empty()
        && params.max_iterations.is_none_or(|m| runner.stats.iterations < m)
        && params.max_no_improve.is_none_or(|m| since_improve < m)
        && start.elapsed().as_secs_f64() < params.time_limit
    {
        pop.update_fitness();
        let p1 = pop.tournament(&mut runner.rng).giant_tour();
        let p2 = pop.tournament(&mut runner.rng).giant_tour();
        let child = crossover_ox(&p1, &p2, &mut runner.rng);
        let improved = runner.offspring(&mut pop, &child);
        runner.stats.iterations += 1;
        if improved {
            since_improve = 0;
            since_restart = 0;
            runner.stats.best_iteration = runner.stats.iterations;
        } else {
            since_improve += 1;
            since_restart += 1;
        }
        if runner.stats.iterations % params.penalty_interval == 0 {
            runner.adjust_penalties(&mut pop);
        }
        if since_restart >= params.restart_after {
            pop.clear();
            runner.stats.restarts += 1;
            since_restart = 0;
            runner.initialize(&mut pop, &start);
        }
    }
    let qs = query_stats();
    enable_query_stats(false);
    let mut stats = runner.stats.clone();
    stats.bucket_direct_hits = qs.direct_hits;
    stats.bucket_binary_searches = qs.binary_searches;
    stats.seconds = start.elapsed().as_secs_f64();
    stats.final_duration_penalty = runner.w.duration;
    stats.final_capacity_penalty = runner.w.capacity;
    let best = match (runner.best, runner.best_penalized) {
        (Some(b), _) => b,
        (None, Some((_, p))) => p,
        (None, None) => {
            let mut routes = vec![Vec::new(); inst.vehicles.max(1)];
            routes[0] = (0..inst.service_count()).collect();
            RoutePlan::evaluate(inst, pm, routes)
        }
    };
    HgsResult { best, stats }
}
