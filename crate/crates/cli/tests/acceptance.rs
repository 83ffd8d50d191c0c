//! End-to-end acceptance checks. Each criterion prints one PASS or FAIL line;
//! the test fails if any criterion does.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tdarc::bcp::{run_bcp, BcpParams, Dominance, Duals, PathLabel, PricingContext};
use tdarc::hgs::{decode_route, evaluate_fixed_modes, run_hgs, HgsParams};
use tdarc::network::{synthetic_instance, Dir, Instance, Link, LinkKind, LinkSpeeds, SpeedLevel, SyntheticSpec};
use tdarc::pl_time::{
    arrival_query_iterative, build_arrival_function, build_bucket_index, default_bucket_count, enable_query_stats, query,
    query_stats, reset_query_stats, ArrivalFunction, SpeedFunction,
};
use tdarc::profiles::{
    build_profile_matrix, earliest_arrivals, service_functions, travel_functions, ProfileMatrix, ProfileOptions,
};
use tdarc_cli::{compare, CompareConfig};

type Outcome = (bool, String);

fn random_speed(rng: &mut impl Rng, max_pieces: usize, horizon: f64) -> SpeedFunction {
    let h = rng.random_range(1..=max_pieces);
    let mut bps: Vec<f64> = (0..h - 1).map(|_| rng.random_range(0.5..horizon - 0.5)).collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    let speeds = (0..=bps.len()).map(|_| rng.random_range(0.3..2.0)).collect();
    SpeedFunction::new(bps, speeds, horizon).unwrap()
}

fn pm_of(inst: &Instance) -> ProfileMatrix {
    build_profile_matrix(inst, ProfileOptions::default()).unwrap()
}

fn pl_kernel() -> Outcome {
    let start = Instant::now();
    let d_max = 100.0;
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut checked, mut worst, mut breakpoint_excess) = (0usize, 0.0f64, 0usize);
    while checked < 10_000 {
        let v = random_speed(&mut rng, 10, d_max);
        let d = rng.random_range(0.5..40.0);
        let Ok(f) = build_arrival_function(&v, d, d_max) else { continue };
        if f.piece_count() - 1 > 2 * (v.piece_count() - 1) {
            breakpoint_excess += 1;
        }
        let end = f.domain_end().unwrap();
        for _ in 0..10 {
            let t = rng.random_range(0.0..=end);
            let exact = arrival_query_iterative(&v, d, t).unwrap();
            worst = worst.max((f.eval(t).unwrap() - exact).abs());
            checked += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = worst <= 1e-9 * d_max && breakpoint_excess == 0 && secs < 10.0;
    (ok, format!("{checked} triples, max error {worst:.2e}, {breakpoint_excess} over the breakpoint bound, {secs:.2}s"))
}

fn profile_optimality() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut worst, mut mismatches, mut samples) = (0.0f64, 0usize, 0usize);
    for seed in 0..50u64 {
        let vertices = rng.random_range(6..=30);
        let spec = SyntheticSpec {
            vertices,
            extra_edges: vertices / 2,
            required_edges: rng.random_range(2..=6),
            required_arcs: rng.random_range(0..=2),
            level: Some(SpeedLevel::ALL[seed as usize % 3]),
            seed,
            ..Default::default()
        };
        let inst = synthetic_instance(&spec).unwrap();
        let pm = pm_of(&inst);
        let eps = 1e-9 * inst.duration_limit;
        for &o in pm.origins() {
            for _ in 0..100 {
                let t = rng.random_range(0.0..inst.duration_limit);
                let (best, _) = earliest_arrivals(&inst, o, t);
                for (j, &b) in best.iter().enumerate() {
                    samples += 1;
                    match pm.arrival(o, j, t) {
                        Some(a) => {
                            worst = worst.max((a - b).abs() / inst.duration_limit);
                            mismatches += usize::from((a - b).abs() > eps);
                        }
                        None => mismatches += usize::from(b <= inst.duration_limit - eps),
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    (mismatches == 0 && secs < 60.0, format!("{samples} samples, {mismatches} mismatches, max error {worst:.2e}·D, {secs:.2}s"))
}

/// Violations of monotonicity, counting breakpoints and a dense sample grid.
fn fifo_count(f: &ArrivalFunction) -> usize {
    let mut bad = f.fifo_violations();
    if let (Some(a), Some(b)) = (f.domain_start(), f.domain_end()) {
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=2000 {
            let t = a + (b - a) * k as f64 / 2000.0;
            let x = f.eval(t).unwrap();
            bad += usize::from(x < prev);
            prev = x;
        }
    }
    bad
}

fn fifo_suite() -> Outcome {
    let (mut functions, mut violations) = (0usize, 0usize);
    for seed in 0..9u64 {
        let spec = SyntheticSpec {
            vertices: 12,
            extra_edges: 6,
            required_edges: 6,
            required_arcs: 3,
            level: Some(SpeedLevel::ALL[seed as usize % 3]),
            seed,
            ..Default::default()
        };
        let inst = synthetic_instance(&spec).unwrap();
        for f in travel_functions(&inst).unwrap().iter().chain(&service_functions(&inst).unwrap()).flatten() {
            functions += 1;
            violations += fifo_count(f);
        }
        let pm = pm_of(&inst);
        for &i in pm.origins() {
            for j in 0..inst.vertex_count {
                functions += 1;
                violations += fifo_count(&pm.profile(i, j).function);
            }
        }
    }
    (violations == 0, format!("{functions} functions, {violations} violations"))
}

fn enumerate_modes(pm: &ProfileMatrix, route: &[usize]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << route.len()) {
        if route.iter().enumerate().any(|(i, &s)| mask >> i & 1 == 1 && pm.mode_count(s) == 1) {
            continue;
        }
        let modes: Vec<usize> = (0..route.len()).map(|i| (mask >> i & 1) as usize).collect();
        if let Some(d) = evaluate_fixed_modes(pm, route, &modes) {
            best = Some(best.map_or(d, |b: f64| b.min(d)));
        }
    }
    best
}

fn decoder_optimality() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let (mut checked, mut mismatches) = (0usize, 0usize);
    for seed in 0..10u64 {
        let spec = SyntheticSpec {
            vertices: 18,
            extra_edges: 10,
            required_edges: 12,
            required_arcs: 0,
            level: Some(SpeedLevel::ALL[seed as usize % 3]),
            seed,
            ..Default::default()
        };
        let inst = synthetic_instance(&spec).unwrap();
        let pm = pm_of(&inst);
        for _ in 0..50 {
            let mut services: Vec<usize> = (0..inst.service_count()).collect();
            services.shuffle(&mut rng);
            services.truncate(rng.random_range(1..=10));
            let got = decode_route(&pm, &services).ok().map(|r| r.duration);
            mismatches += usize::from(got != enumerate_modes(&pm, &services));
            checked += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    (mismatches == 0 && secs < 30.0, format!("{checked} routes, {mismatches} mismatches, {secs:.2}s"))
}

fn move_bounds() -> Outcome {
    let spec = SyntheticSpec {
        vertices: 22,
        extra_edges: 12,
        required_edges: 14,
        required_arcs: 6,
        max_demand: 5,
        capacity: 20.0,
        level: Some(SpeedLevel::H),
        seed: 5,
        ..Default::default()
    };
    let inst = synthetic_instance(&spec).unwrap();
    let pm = pm_of(&inst);
    let params = HgsParams { audit: true, max_iterations: Some(2000), time_limit: 120.0, ..Default::default() };
    let r = run_hgs(&inst, &pm, &params, 1);
    let ls = &r.stats.ls;
    let rate = ls.filter_rate();
    let ok = inst.service_count() == 20 && ls.audit_violations == 0 && ls.audit_checked > 0 && rate >= 0.5;
    (
        ok,
        format!(
            "{} services, {} filtered moves audited, {} violations, filter rate {:.1}%",
            inst.service_count(),
            ls.audit_checked,
            ls.audit_violations,
            100.0 * rate
        ),
    )
}

fn bucket_identity() -> Outcome {
    let d_max = 100.0;
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    enable_query_stats(true);
    reset_query_stats();
    let (mut total, mut mismatches) = (0u64, 0u64);
    while total < 10_000 {
        let v = random_speed(&mut rng, 10, d_max);
        let Ok(f) = build_arrival_function(&v, rng.random_range(0.5..30.0), d_max) else { continue };
        let idx = build_bucket_index(&f, default_bucket_count(&f));
        let end = f.domain_end().unwrap();
        for _ in 0..100 {
            let t = rng.random_range(0.0..=end);
            mismatches += u64::from(query(&f, &idx, t).unwrap() != f.eval(t).unwrap());
            total += 1;
        }
    }
    let stats = query_stats();
    enable_query_stats(false);
    (mismatches == 0, format!("{total} queries, {mismatches} mismatches, direct-hit rate {:.1}%", 100.0 * stats.direct_hit_rate()))
}

fn small_instances() -> Vec<Instance> {
    (0..30u64)
        .map(|seed| {
            let services = 4 + (seed % 5) as usize;
            let arcs = (seed % 3) as usize;
            let spec = SyntheticSpec {
                vertices: 5 + services / 2,
                extra_edges: 3,
                required_edges: services - arcs,
                required_arcs: arcs,
                max_demand: 4,
                capacity: 8.0,
                level: Some(SpeedLevel::ALL[(seed / 5 % 3) as usize]),
                seed,
                ..Default::default()
            };
            synthetic_instance(&spec).unwrap()
        })
        .collect()
}

/// Least duration per service subset over every order and every mode
/// combination, with no dominance between partial routes.
fn best_routes(inst: &Instance, pm: &ProfileMatrix) -> Vec<f64> {
    fn dfs(inst: &Instance, pm: &ProfileMatrix, states: &[(usize, f64)], mask: usize, load: f64, best: &mut [f64]) {
        for s in 0..inst.service_count() {
            if mask >> s & 1 == 1 || load + inst.demand(s) > inst.capacity + 1e-9 {
                continue;
            }
            let mut next = Vec::new();
            for &(at, t) in states {
                for m in 0..pm.mode_count(s) {
                    let sm = pm.service(s, m);
                    let Some(a) = pm.arrival(at, sm.start, t) else { continue };
                    let Some(b) = pm.service_completion(s, m, a) else { continue };
                    next.push((sm.end, b));
                }
            }
            if next.is_empty() {
                continue;
            }
            let m2 = mask | 1 << s;
            for &(at, t) in &next {
                if let Some(back) = pm.arrival(at, 0, t) {
                    best[m2] = best[m2].min(back);
                }
            }
            dfs(inst, pm, &next, m2, load + inst.demand(s), best);
        }
    }
    let mut best = vec![f64::INFINITY; 1 << inst.service_count()];
    best[0] = 0.0;
    dfs(inst, pm, &[(0, 0.0)], 0, 0.0, &mut best);
    best
}

/// Optimal plan value over every assignment of services to at most `m` routes.
fn brute_force(inst: &Instance, pm: &ProfileMatrix) -> f64 {
    let n = inst.service_count();
    let full = (1usize << n) - 1;
    let best = best_routes(inst, pm);
    let mut dp = vec![f64::INFINITY; 1 << n];
    dp[0] = 0.0;
    for _ in 0..inst.vehicles {
        let prev = dp.clone();
        for mask in 1..=full {
            let low = mask & mask.wrapping_neg();
            let mut sub = mask;
            while sub > 0 {
                if sub & low != 0 && best[sub].is_finite() {
                    dp[mask] = dp[mask].min(prev[mask ^ sub] + best[sub]);
                }
                sub = (sub - 1) & mask;
            }
        }
    }
    dp[full]
}

fn bcp_optima(instances: &[Instance]) -> Vec<f64> {
    instances
        .iter()
        .map(|inst| {
            let pm = pm_of(inst);
            let params = BcpParams { time_limit: 600.0, strong_candidates: 8, ..Default::default() };
            let r = run_bcp(inst, &pm, &params, None);
            if r.optimal {
                r.ub
            } else {
                f64::NAN
            }
        })
        .collect()
}

fn bcp_exactness(instances: &[Instance], optima: &[f64], secs: f64) -> Outcome {
    let mut mismatches = Vec::new();
    for (k, (inst, &opt)) in instances.iter().zip(optima).enumerate() {
        let brute = brute_force(inst, &pm_of(inst));
        if !((opt - brute).abs() <= 1e-6 || (opt.is_infinite() && brute.is_infinite())) {
            mismatches.push(format!("#{k}: {opt} vs {brute}"));
        }
    }
    let arcs = instances.iter().filter(|i| i.service_links().iter().any(|&l| i.links[l].kind == LinkKind::Arc)).count();
    let ok = mismatches.is_empty() && secs < 600.0;
    (ok, format!("{} instances ({arcs} with required arcs), mismatches {mismatches:?}, {secs:.1}s", instances.len()))
}

fn hgs_quality(instances: &[Instance], optima: &[f64]) -> Outcome {
    let (mut hits, mut slowest) = (0, 0.0f64);
    for (inst, &opt) in instances.iter().zip(optima) {
        let pm = pm_of(inst);
        let params = HgsParams { time_limit: 60.0, max_iterations: Some(5000), max_no_improve: Some(2000), ..Default::default() };
        let r = run_hgs(inst, &pm, &params, 7);
        slowest = slowest.max(r.stats.seconds);
        if r.best.is_feasible() && r.stats.seconds <= 60.0 && (r.best.total_duration - opt).abs() <= 1e-6 * opt.max(1.0) {
            hits += 1;
        }
    }
    (hits >= 28, format!("{hits}/{} optima attained, slowest run {slowest:.2}s", instances.len()))
}

/// Service `k` of the chain has length `Δ / 2^(k-1)` and speeds 1 then 2,
/// switching when the earliest label finishes it.
fn compression_chain(x: usize, delta: f64, t0: f64) -> (Instance, ProfileMatrix) {
    let mut links = vec![Link { kind: LinkKind::Arc, tail: 0, head: 1, distance: 1.0, demand: Some(1.0) }];
    let mut lengths = Vec::new();
    for k in 0..x {
        let d = delta / 2f64.powi(k as i32);
        lengths.push(d);
        links.push(Link { kind: LinkKind::Arc, tail: k + 1, head: k + 2, distance: d, demand: Some(1.0) });
    }
    links.push(Link { kind: LinkKind::Arc, tail: x + 1, head: 0, distance: 1.0, demand: None });
    let mut inst = Instance::new("chain", x + 2, links, 1, 100.0, 100.0).unwrap();
    let unit = SpeedFunction::constant(1.0, 100.0).unwrap();
    let mut finish = t0;
    for (k, d) in lengths.iter().enumerate() {
        finish += d;
        let v = SpeedFunction::new(vec![finish], vec![1.0, 2.0], 100.0).unwrap();
        inst.set_speeds(k + 1, Dir::Forward, LinkSpeeds { travel: unit.clone(), service: v }).unwrap();
    }
    let pm = pm_of(&inst);
    (inst, pm)
}

fn chain_times(x: usize) -> Vec<(f64, f64)> {
    let (inst, pm) = compression_chain(x, 4.0, 1.0);
    let ctx = PricingContext::new(&inst, &pm);
    let duals = Duals::zero(inst.service_count(), inst.vertex_count);
    let mut a = PathLabel { last: Some((0, 0)), load: 1, time: 1.0, dual_sum: 0.0, memory: vec![0] };
    let mut b = PathLabel { time: 5.0, ..a.clone() };
    (1..=x)
        .map(|s| {
            a = a.extend(&ctx, &duals, s, 0).unwrap();
            b = b.extend(&ctx, &duals, s, 0).unwrap();
            (a.time, b.time)
        })
        .collect()
}

fn completion_fixture() -> Outcome {
    let times = chain_times(3);
    let expect = [(5.0, 7.0), (7.0, 8.0), (8.0, 8.5)];
    let completions = times.iter().zip(expect).all(|((a, b), (ea, eb))| (a - ea).abs() < 1e-9 && (b - eb).abs() < 1e-9);
    let gaps_ok = (1..=6).all(|x| {
        let &(a, b) = chain_times(x).last().unwrap();
        (b - a - 4.0 * 0.5f64.powi(x as i32)).abs() < 1e-9
    });
    (completions && gaps_ok, format!("completions {times:?}, gap Δ/2^x for x = 1..6: {gaps_ok}"))
}

fn dominance_fixture() -> Outcome {
    let links = vec![
        Link { kind: LinkKind::Arc, tail: 0, head: 1, distance: 1.0, demand: Some(1.0) },
        Link { kind: LinkKind::Arc, tail: 1, head: 2, distance: 3.0, demand: Some(1.0) },
        Link { kind: LinkKind::Arc, tail: 2, head: 0, distance: 1.0, demand: None },
    ];
    let mut inst = Instance::new("fixture", 3, links, 1, 10.0, 100.0).unwrap();
    let v = SpeedFunction::new(vec![15.0], vec![1.0, 3.0], 100.0).unwrap();
    let unit = SpeedFunction::constant(1.0, 100.0).unwrap();
    inst.set_speeds(1, Dir::Forward, LinkSpeeds { travel: unit, service: v }).unwrap();
    let pm = pm_of(&inst);
    let ctx = PricingContext::new(&inst, &pm);
    let mut duals = Duals::zero(2, 3);
    duals.beta[1] = 1.0;
    let p1 = PathLabel { last: Some((0, 0)), load: 1, time: 10.0, dual_sum: 1.0, memory: vec![0] };
    let p2 = PathLabel { time: 20.0, dual_sum: 10.0, ..p1.clone() };
    let e1 = p1.extend(&ctx, &duals, 1, 0).unwrap();
    let e2 = p2.extend(&ctx, &duals, 1, 0).unwrap();
    let rc = (e1.reduced_cost(), e2.reduced_cost());
    let ok = (rc.0 - 11.0).abs() < 1e-9
        && (rc.1 - 10.0).abs() < 1e-9
        && p1.dominates(&p2, Dominance::ReducedCostOnly)
        && !p1.dominates(&p2, Dominance::Exact);
    (ok, format!("extended reduced costs {:.3} and {:.3}; exact rule keeps P2, reduced-cost rule discards it", rc.0, rc.1))
}

fn scenario_direction() -> Outcome {
    let start = Instant::now();
    let mut cells = Vec::new();
    let mut ok = true;
    for seed in 0..5u64 {
        let spec = SyntheticSpec {
            vertices: 14,
            extra_edges: 8,
            required_edges: 8,
            required_arcs: 4,
            max_demand: 5,
            capacity: 20.0,
            level: Some(SpeedLevel::H),
            seed: 1100 + seed,
            ..Default::default()
        };
        let inst = synthetic_instance(&spec).unwrap();
        for sigma in [0.05, 0.2, 0.6] {
            let hgs = HgsParams { max_iterations: Some(1500), max_no_improve: Some(600), time_limit: 60.0, ..Default::default() };
            let cfg = CompareConfig { sigma, scenarios: 20, seed: 17 + seed, hgs };
            let r = compare(&inst, &cfg).unwrap();
            ok &= r.td_mean_gap <= r.carp_mean_gap;
            cells.push(format!("{seed}/{sigma}: {:.2}% vs {:.2}%", r.td_mean_gap, r.carp_mean_gap));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 1800.0;
    (ok, format!("TD vs static mean gap per instance/σ [{}], {secs:.1}s", cells.join("; ")))
}

fn preprocessing_scaling() -> Outcome {
    let mut points = Vec::new();
    let mut log = Vec::new();
    for vertices in [20usize, 40, 80] {
        let (mut pieces, mut secs) = (0.0, 0.0);
        for seed in 0..3u64 {
            let spec = SyntheticSpec {
                vertices,
                extra_edges: vertices / 2,
                required_edges: 10,
                required_arcs: 4,
                level: Some(SpeedLevel::H),
                seed,
                ..Default::default()
            };
            let pm = pm_of(&synthetic_instance(&spec).unwrap());
            pieces += pm.telemetry().mean_pieces / 3.0;
            secs += pm.telemetry().build_seconds;
        }
        points.push(((vertices as f64).ln(), f64::ln(pieces)));
        log.push(format!("|V| {vertices}: {pieces:.1} pieces, {secs:.3}s"));
    }
    let n = points.len() as f64;
    let (mx, my) = (points.iter().map(|p| p.0).sum::<f64>() / n, points.iter().map(|p| p.1).sum::<f64>() / n);
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    (slope < 2.0, format!("{}; growth exponent {slope:.2}", log.join(", ")))
}

fn run(id: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let (ok, detail) = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
        (false, format!("panicked: {}", msg.unwrap_or_default()))
    });
    println!("[{}] criterion {id:2} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

#[test]
fn acceptance() {
    let mut passed = Vec::new();
    passed.push(run(1, "PL kernel equivalence", pl_kernel));
    passed.push(run(2, "profile optimality", profile_optimality));
    passed.push(run(3, "FIFO suite", fifo_suite));
    passed.push(run(4, "decoder optimality", decoder_optimality));
    passed.push(run(5, "move-bound admissibility", move_bounds));
    passed.push(run(6, "bucket-query identity", bucket_identity));
    let instances = small_instances();
    let start = Instant::now();
    let optima = bcp_optima(&instances);
    let secs = start.elapsed().as_secs_f64();
    passed.push(run(7, "BCP exactness", || bcp_exactness(&instances, &optima, secs)));
    passed.push(run(8, "HGS quality", || hgs_quality(&instances, &optima)));
    passed.push(run(9, "completion-bound fixture", completion_fixture));
    passed.push(run(10, "dominance fixture", dominance_fixture));
    passed.push(run(11, "scenario harness direction", scenario_direction));
    passed.push(run(12, "preprocessing scaling", preprocessing_scaling));
    let failed: Vec<usize> = passed.iter().enumerate().filter(|(_, &ok)| !ok).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
