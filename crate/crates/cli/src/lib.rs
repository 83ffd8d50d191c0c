//! Experiment plumbing behind the `tdarc` binary: instance and profile
//! loading with an on-disk cache, solver runs, the speed-inaccuracy
//! comparison and the speedup statistics.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tdarc::bcp::{run_bcp, BcpParams, BcpResult};
use tdarc::hgs::{run_hgs, HgsParams, HgsStats, RoutePlan};
use tdarc::network::{
    parse_instance, perturb_scenario, uniform_equivalent, Instance, InstanceFormat, ScenarioSpec,
};
use tdarc::profiles::{build_profile_matrix, instance_hash, read_cache, write_cache, ProfileMatrix, ProfileOptions};

/// Environment variable naming the profile cache directory.
pub const CACHE_ENV: &str = "TDARC_CACHE_DIR";

/// Reads an instance; `.dat` files use the classic layout, anything else the
/// native one.
pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let format = if path.extension().is_some_and(|e| e == "dat") { InstanceFormat::ClassicCarp } else { InstanceFormat::TdNative };
    parse_instance(&text, format).with_context(|| format!("parsing {}", path.display()))
}

/// Cache file for `inst` under `options` inside `dir`.
pub fn cache_path(dir: &Path, inst: &Instance, options: ProfileOptions) -> PathBuf {
    let hash: String = instance_hash(inst).iter().map(|b| format!("{b:02x}")).collect();
    let buckets = options.buckets.map_or("auto".to_string(), |b| b.to_string());
    dir.join(format!("{hash}-b{buckets}-{}.tdpm", u8::from(options.use_buckets)))
}

/// Builds the profile matrix, reading and filling the cache in `cache_dir`
/// when given. Returns whether the matrix came from the cache.
pub fn load_profiles(inst: &Instance, options: ProfileOptions, cache_dir: Option<&Path>) -> Result<(ProfileMatrix, bool)> {
    if let Some(dir) = cache_dir {
        let path = cache_path(dir, inst, options);
        if let Ok(file) = fs::File::open(&path) {
            if let Ok(pm) = read_cache(inst, BufReader::new(file)) {
                return Ok((pm, true));
            }
        }
        let pm = build_profile_matrix(inst, options)?;
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        write_cache(&pm, inst, std::io::BufWriter::new(file))?;
        return Ok((pm, false));
    }
    Ok((build_profile_matrix(inst, options)?, false))
}

/// Cache directory from the environment, if set.
pub fn env_cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Hgs,
    Bcp,
    Both,
}

/// Outcome of `solve`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveRecord {
    pub instance: String,
    pub engine: Engine,
    pub lb: Option<f64>,
    pub ub: Option<f64>,
    pub gap_percent: Option<f64>,
    pub feasible: bool,
    pub wall_seconds: f64,
    pub hgs: Option<HgsStats>,
    pub bcp: Option<BcpResult>,
    #[serde(skip)]
    pub plan: Option<RoutePlan>,
}

/// Runs the requested engines; `Both` feeds the genetic search result to
/// branch-cut-and-price as its incumbent.
pub fn solve(inst: &Instance, pm: &ProfileMatrix, engine: Engine, hgs: &HgsParams, bcp: &BcpParams, seed: u64) -> SolveRecord {
    let start = std::time::Instant::now();
    let mut plan = None;
    let mut hgs_stats = None;
    if engine != Engine::Bcp {
        let r = run_hgs(inst, pm, hgs, seed);
        hgs_stats = Some(r.stats);
        plan = Some(r.best);
    }
    let mut bcp_result = None;
    if engine != Engine::Hgs {
        let warm = plan.as_ref().filter(|p| p.is_feasible());
        let r = run_bcp(inst, pm, bcp, warm);
        if !r.routes.is_empty() {
            let routes = r.routes.iter().map(|c| c.services.iter().map(|x| x.0).collect()).collect();
            let mut bp = RoutePlan::evaluate(inst, pm, routes);
            bp.routes.resize(inst.vehicles.max(bp.routes.len()), Vec::new());
            if plan.as_ref().is_none_or(|p: &RoutePlan| !p.is_feasible() || bp.total_duration < p.total_duration) {
                plan = Some(bp);
            }
        }
        bcp_result = Some(r);
    }
    let feasible = plan.as_ref().is_some_and(|p| p.is_feasible());
    let ub = plan.as_ref().filter(|p| p.is_feasible()).map(|p| p.total_duration);
    let lb = bcp_result.as_ref().map(|r| r.lb).filter(|v| v.is_finite());
    let gap_percent = match (lb, ub) {
        (Some(l), Some(u)) if l > 0.0 => Some((100.0 * (u - l) / l).max(0.0)),
        _ => None,
    };
    SolveRecord {
        instance: inst.name.clone(),
        engine,
        lb,
        ub,
        gap_percent,
        feasible,
        wall_seconds: start.elapsed().as_secs_f64(),
        hgs: hgs_stats,
        bcp: bcp_result,
        plan,
    }
}

/// Settings of the speed-inaccuracy experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareConfig {
    pub sigma: f64,
    pub scenarios: usize,
    pub seed: u64,
    pub hgs: HgsParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRow {
    pub scenario: usize,
    pub baseline: f64,
    pub td_value: f64,
    pub carp_value: f64,
    pub td_feasible: bool,
    pub carp_feasible: bool,
    pub td_gap_percent: f64,
    pub carp_gap_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub instance: String,
    pub sigma: f64,
    /// Nominal-speed durations of the two fixed plans.
    pub td_nominal: f64,
    pub carp_nominal: f64,
    pub td_mean_gap: f64,
    pub carp_mean_gap: f64,
    /// `carp_mean_gap - td_mean_gap`.
    pub value_of_time_dependency: f64,
    pub rows: Vec<ScenarioRow>,
}

fn sequences(plan: &RoutePlan) -> Vec<Vec<usize>> {
    plan.routes.clone()
}

/// Plans routes once with nominal time-dependent speeds and once with a
/// uniform static speed, then replays both fixed route sequences on each
/// perturbed scenario (modes re-chosen, order kept) against a plan built
/// with full knowledge of that scenario.
pub fn compare(inst: &Instance, cfg: &CompareConfig) -> Result<CompareReport> {
    let pm = build_profile_matrix(inst, ProfileOptions::default())?;
    let td = run_hgs(inst, &pm, &cfg.hgs, cfg.seed).best;
    let static_inst = uniform_equivalent(inst)?;
    let static_pm = build_profile_matrix(&static_inst, ProfileOptions::default())?;
    let carp = run_hgs(&static_inst, &static_pm, &cfg.hgs, cfg.seed).best;
    let td_nominal = RoutePlan::evaluate(inst, &pm, sequences(&td)).total_duration;
    let carp_nominal = RoutePlan::evaluate(inst, &pm, sequences(&carp)).total_duration;
    let spec = ScenarioSpec { sigma: cfg.sigma, seed: cfg.seed, count: cfg.scenarios };
    let scenarios = perturb_scenario(inst, &spec)?;
    let rows = scenarios
        .par_iter()
        .enumerate()
        .map(|(k, sc)| -> Result<ScenarioRow> {
            let spm = build_profile_matrix(sc, ProfileOptions::default())?;
            let tv = RoutePlan::evaluate(sc, &spm, sequences(&td));
            let cv = RoutePlan::evaluate(sc, &spm, sequences(&carp));
            let own = run_hgs(sc, &spm, &cfg.hgs, cfg.seed.wrapping_add(k as u64 + 1)).best;
            let mut baseline = if own.is_feasible() { own.total_duration } else { f64::INFINITY };
            for p in [&tv, &cv] {
                if p.is_feasible() {
                    baseline = baseline.min(p.total_duration);
                }
            }
            let gap = |v: f64| 100.0 * (v - baseline) / baseline;
            Ok(ScenarioRow {
                scenario: k,
                baseline,
                td_value: tv.total_duration,
                carp_value: cv.total_duration,
                td_feasible: tv.is_feasible(),
                carp_feasible: cv.is_feasible(),
                td_gap_percent: gap(tv.total_duration),
                carp_gap_percent: gap(cv.total_duration),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = |f: fn(&ScenarioRow) -> f64| rows.iter().map(f).sum::<f64>() / rows.len().max(1) as f64;
    let td_mean_gap = mean(|r| r.td_gap_percent);
    let carp_mean_gap = mean(|r| r.carp_gap_percent);
    Ok(CompareReport {
        instance: inst.name.clone(),
        sigma: cfg.sigma,
        td_nominal,
        carp_nominal,
        td_mean_gap,
        carp_mean_gap,
        value_of_time_dependency: carp_mean_gap - td_mean_gap,
        rows,
    })
}

/// One configuration of the speedup study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub instance: String,
    pub filters: bool,
    pub buckets: bool,
    pub objective: f64,
    pub filter_rate: f64,
    pub bucket_hit_rate: f64,
    pub audit_violations: u64,
    pub seconds: f64,
}

impl StatsRow {
    pub const CSV_HEADER: &'static str = "instance,filters,buckets,objective,filter_rate,bucket_hit_rate,audit_violations,seconds";

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{:.6},{:.6},{:.6},{},{:.3}",
            self.instance,
            u8::from(self.filters),
            u8::from(self.buckets),
            self.objective,
            self.filter_rate,
            self.bucket_hit_rate,
            self.audit_violations,
            self.seconds
        )
    }
}

/// Runs the genetic search with move filters and bucket lookups toggled
/// on and off, same seed and budget each time.
pub fn speedup_stats(inst: &Instance, hgs: &HgsParams, bucket_count: Option<usize>, seed: u64) -> Result<Vec<StatsRow>> {
    let mut rows = Vec::new();
    for buckets in [true, false] {
        let pm = build_profile_matrix(inst, ProfileOptions { buckets: bucket_count, use_buckets: buckets })?;
        for filters in [true, false] {
            let params = HgsParams { disable_filter: !filters, ..hgs.clone() };
            let r = run_hgs(inst, &pm, &params, seed);
            rows.push(StatsRow {
                instance: inst.name.clone(),
                filters,
                buckets,
                objective: r.best.total_duration,
                filter_rate: r.stats.ls.filter_rate(),
                bucket_hit_rate: r.stats.bucket_hit_rate(),
                audit_violations: r.stats.ls.audit_violations,
                seconds: r.stats.seconds,
            });
        }
    }
    Ok(rows)
}
