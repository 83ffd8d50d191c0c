use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tdarc::bcp::*;
use tdarc::hgs::{decode_route, run_hgs, HgsParams};
use tdarc::network::{synthetic_instance, Dir, Instance, Link, LinkKind, LinkSpeeds, SpeedLevel, SyntheticSpec};
use tdarc::pl_time::SpeedFunction;
use tdarc::profiles::{build_profile_matrix, ProfileMatrix};

fn small(seed: u64, edges: usize, arcs: usize, level: SpeedLevel) -> Instance {
    let spec = SyntheticSpec {
        vertices: 5 + edges / 2,
        extra_edges: 3,
        required_edges: edges,
        required_arcs: arcs,
        max_demand: 4,
        capacity: 8.0,
        level: Some(level),
        seed,
        ..Default::default()
    };
    synthetic_instance(&spec).unwrap()
}

fn setup(inst: &Instance) -> ProfileMatrix {
    build_profile_matrix(inst, Default::default()).unwrap()
}

/// Least duration per service subset over all orderings, by enumeration.
fn best_routes(inst: &Instance, pm: &ProfileMatrix) -> Vec<f64> {
    let n = inst.service_count();
    let mut best = vec![f64::INFINITY; 1 << n];
    best[0] = 0.0;
    let mut seq = Vec::new();
    fn dfs(inst: &Instance, pm: &ProfileMatrix, seq: &mut Vec<usize>, mask: usize, load: f64, best: &mut [f64]) {
        for s in 0..inst.service_count() {
            if mask >> s & 1 == 1 || load + inst.demand(s) > inst.capacity + 1e-9 {
                continue;
            }
            seq.push(s);
            if let Ok(r) = decode_route(pm, seq) {
                let m2 = mask | 1 << s;
                best[m2] = best[m2].min(r.duration);
            }
            // A prefix that misses the horizon cannot be completed.
            if decode_prefix_ok(pm, seq) {
                dfs(inst, pm, seq, mask | 1 << s, load + inst.demand(s), best);
            }
            seq.pop();
        }
    }
    dfs(inst, pm, &mut seq, 0, 0.0, &mut best);
    best
}

/// Whether some mode choice serves the whole sequence within the horizon.
fn decode_prefix_ok(pm: &ProfileMatrix, seq: &[usize]) -> bool {
    let k = seq.len();
    (0u32..1 << k).any(|mask| {
        let mut t = 0.0;
        let mut at = 0;
        for (i, &s) in seq.iter().enumerate() {
            let m = (mask >> i & 1) as usize;
            if m >= pm.mode_count(s) {
                return false;
            }
            let sm = pm.service(s, m);
            let Some(a) = pm.arrival(at, sm.start, t) else { return false };
            let Some(b) = pm.service_completion(s, m, a) else { return false };
            t = b;
            at = sm.end;
        }
        true
    })
}

/// Optimal plan value by partitioning services into at most `m` routes.
fn brute_force(inst: &Instance, pm: &ProfileMatrix) -> f64 {
    let n = inst.service_count();
    let full = (1usize << n) - 1;
    let best = best_routes(inst, pm);
    let mut dp = vec![vec![f64::INFINITY; 1 << n]; inst.vehicles + 1];
    dp[0][0] = 0.0;
    for k in 1..=inst.vehicles {
        for mask in 0..=full {
            dp[k][mask] = dp[k - 1][mask];
            if mask == 0 {
                continue;
            }
            let low = mask & mask.wrapping_neg();
            let mut sub = mask;
            while sub > 0 {
                if sub & low != 0 && best[sub].is_finite() {
                    dp[k][mask] = dp[k][mask].min(dp[k - 1][mask ^ sub] + best[sub]);
                }
                sub = (sub - 1) & mask;
            }
        }
    }
    dp[inst.vehicles][full]
}

fn random_duals(rng: &mut ChaCha8Rng, inst: &Instance, scale: f64) -> Duals {
    let n = inst.service_count();
    let mut d = Duals::zero(n, inst.vertex_count);
    d.gamma = -rng.random_range(0.0..scale);
    for b in &mut d.beta {
        *b = rng.random_range(0.0..2.0 * scale);
    }
    for x in &mut d.deadhead {
        *x = rng.random_range(0.0..0.3 * scale);
    }
    for x in &mut d.required {
        *x = rng.random_range(-0.2 * scale..0.2 * scale);
    }
    d
}

/// All elementary routes, as columns.
fn all_routes(inst: &Instance, pm: &ProfileMatrix) -> Vec<Column> {
    let mut out = Vec::new();
    fn dfs(inst: &Instance, pm: &ProfileMatrix, seq: &mut Vec<(usize, usize)>, load: f64, out: &mut Vec<Column>) {
        for s in 0..inst.service_count() {
            if seq.iter().any(|x| x.0 == s) || load + inst.demand(s) > inst.capacity + 1e-9 {
                continue;
            }
            for m in 0..pm.mode_count(s) {
                seq.push((s, m));
                if let Ok(c) = Column::new(pm, seq.clone()) {
                    out.push(c);
                }
                if prefix_feasible(pm, seq) {
                    dfs(inst, pm, seq, load + inst.demand(s), out);
                }
                seq.pop();
            }
        }
    }
    dfs(inst, pm, &mut Vec::new(), 0.0, &mut out);
    out
}

fn prefix_feasible(pm: &ProfileMatrix, seq: &[(usize, usize)]) -> bool {
    let mut t = 0.0;
    let mut at = 0;
    for &(s, m) in seq {
        let sm = pm.service(s, m);
        let Some(a) = pm.arrival(at, sm.start, t) else { return false };
        let Some(b) = pm.service_completion(s, m, a) else { return false };
        t = b;
        at = sm.end;
    }
    true
}

fn params(time_limit: f64) -> BcpParams {
    BcpParams { time_limit, strong_candidates: 8, ..Default::default() }
}

/// Three chained arcs: the first ends where the second starts; the second is
/// served at speed 1 until time 15 and speed 3 afterwards.
fn dominance_fixture() -> (Instance, ProfileMatrix) {
    let links = vec![
        Link { kind: LinkKind::Arc, tail: 0, head: 1, distance: 1.0, demand: Some(1.0) },
        Link { kind: LinkKind::Arc, tail: 1, head: 2, distance: 3.0, demand: Some(1.0) },
        Link { kind: LinkKind::Arc, tail: 2, head: 0, distance: 1.0, demand: None },
    ];
    let mut inst = Instance::new("fixture", 3, links, 1, 10.0, 100.0).unwrap();
    let v = SpeedFunction::new(vec![15.0], vec![1.0, 3.0], 100.0).unwrap();
    let unit = SpeedFunction::constant(1.0, 100.0).unwrap();
    inst.set_speeds(1, Dir::Forward, LinkSpeeds { travel: unit, service: v }).unwrap();
    let pm = setup(&inst);
    (inst, pm)
}

#[test]
fn exact_dominance_keeps_the_late_label() {
    let (inst, pm) = dominance_fixture();
    let ctx = PricingContext::new(&inst, &pm);
    let mut duals = Duals::zero(2, 3);
    duals.beta[1] = 1.0;
    let p1 = PathLabel { last: Some((0, 0)), load: 1, time: 10.0, dual_sum: 1.0, memory: vec![0] };
    let p2 = PathLabel { last: Some((0, 0)), load: 1, time: 20.0, dual_sum: 10.0, memory: vec![0] };
    assert!(p1.reduced_cost() < p2.reduced_cost());
    assert!(p1.dominates(&p2, Dominance::ReducedCostOnly));
    assert!(!p1.dominates(&p2, Dominance::Exact));
    assert!(!p1.dominates(&p2, Dominance::Heuristic(0.5)));

    let e1 = p1.extend(&ctx, &duals, 1, 0).unwrap();
    let e2 = p2.extend(&ctx, &duals, 1, 0).unwrap();
    assert!((e1.time - 13.0).abs() < 1e-9);
    assert!((e2.time - 21.0).abs() < 1e-9);
    assert!((e1.reduced_cost() - 11.0).abs() < 1e-9);
    assert!((e2.reduced_cost() - 10.0).abs() < 1e-9);
    assert!(e2.reduced_cost() < e1.reduced_cost());
}

#[test]
fn dominance_rules_agree_on_clear_cases() {
    let base = PathLabel { last: Some((0, 0)), load: 2, time: 5.0, dual_sum: 3.0, memory: vec![0, 1] };
    let worse = PathLabel { load: 3, time: 6.0, dual_sum: 2.0, memory: vec![0, 1, 2], ..base.clone() };
    for rule in [Dominance::Exact, Dominance::Heuristic(0.5), Dominance::ReducedCostOnly] {
        assert!(base.dominates(&worse, rule));
        assert!(!worse.dominates(&base, rule));
    }
    let other_end = PathLabel { last: Some((1, 0)), ..worse.clone() };
    assert!(!base.dominates(&other_end, Dominance::Exact));
    let bigger_memory = PathLabel { memory: vec![0, 1, 3], ..base.clone() };
    assert!(!bigger_memory.dominates(&worse, Dominance::Exact));
}

/// A chain of services where service `k` has length `Δ / 2^(k-1)` and speeds
/// 1 then 2, switching exactly when the earliest label finishes it.
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
    let pm = setup(&inst);
    (inst, pm)
}

#[test]
fn completion_gap_halves_per_service() {
    let (inst, pm) = compression_chain(3, 4.0, 1.0);
    let ctx = PricingContext::new(&inst, &pm);
    let duals = Duals::zero(inst.service_count(), inst.vertex_count);
    let mut a = PathLabel { last: Some((0, 0)), load: 1, time: 1.0, dual_sum: 0.0, memory: vec![0] };
    let mut b = PathLabel { time: 5.0, ..a.clone() };
    let mut times = Vec::new();
    for s in 1..=3 {
        a = a.extend(&ctx, &duals, s, 0).unwrap();
        b = b.extend(&ctx, &duals, s, 0).unwrap();
        times.push((a.time, b.time));
    }
    let expect = [(5.0, 7.0), (7.0, 8.0), (8.0, 8.5)];
    for ((ta, tb), (ea, eb)) in times.iter().zip(expect) {
        assert!((ta - ea).abs() < 1e-9 && (tb - eb).abs() < 1e-9, "{times:?}");
    }
    for x in 1..=6 {
        let (inst, pm) = compression_chain(x, 4.0, 1.0);
        let ctx = PricingContext::new(&inst, &pm);
        let duals = Duals::zero(inst.service_count(), inst.vertex_count);
        let mut a = PathLabel { last: Some((0, 0)), load: 1, time: 1.0, dual_sum: 0.0, memory: vec![0] };
        let mut b = PathLabel { time: 5.0, ..a.clone() };
        for s in 1..=x {
            a = a.extend(&ctx, &duals, s, 0).unwrap();
            b = b.extend(&ctx, &duals, s, 0).unwrap();
        }
        let gap = 4.0 * 0.5f64.powi(x as i32);
        assert!((b.time - a.time - gap).abs() < 1e-9, "x = {x}");
    }
}

#[test]
fn exact_pricing_finds_the_most_negative_route() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut negative_cases = 0;
    for seed in 0..12 {
        let inst = small(seed, 4, 2, SpeedLevel::ALL[seed as usize % 3]);
        let pm = setup(&inst);
        let ctx = PricingContext::new(&inst, &pm);
        let routes = all_routes(&inst, &pm);
        for _ in 0..4 {
            let scale = inst.duration_limit / inst.service_count() as f64;
            let duals = random_duals(&mut rng, &inst, scale);
            let brute = routes.iter().map(|c| duals.reduced_cost(c, &pm)).fold(f64::INFINITY, f64::min);
            let mut stats = PricingStats::default();
            let plain = price_exact(&ctx, &duals, None, &mut stats).unwrap();
            let bounds = build_completion_bounds(&ctx, &duals, 1.0);
            let bounded = price_exact(&ctx, &duals, bounds.as_ref(), &mut stats).unwrap();
            for out in [&plain, &bounded] {
                for c in &out.columns {
                    assert!(duals.reduced_cost(c, &pm) < -1e-9);
                    assert!((route_duration(&pm, &c.services).unwrap() - c.duration).abs() < 1e-9);
                }
                if brute < -1e-6 {
                    assert!(!out.columns.is_empty());
                    assert!(out.min_reduced_cost <= brute + 1e-6);
                } else {
                    assert!(out.columns.iter().all(|c| duals.reduced_cost(c, &pm) >= brute - 1e-6));
                }
            }
            if brute < -1e-6 {
                negative_cases += 1;
            }
            for c in price_fast(&ctx, &duals) {
                assert!(duals.reduced_cost(&c, &pm) < -1e-9);
            }
        }
    }
    assert!(negative_cases > 10);
}

#[test]
fn completion_bounds_never_overestimate() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for seed in 0..6 {
        let inst = small(seed + 40, 4, 1, SpeedLevel::ALL[seed as usize % 3]);
        let pm = setup(&inst);
        let ctx = PricingContext::new(&inst, &pm);
        let scale = inst.duration_limit / inst.service_count() as f64;
        let duals = random_duals(&mut rng, &inst, scale);
        let bounds = build_completion_bounds(&ctx, &duals, 1.0).unwrap();
        for route in all_routes(&inst, &pm) {
            let total = duals.reduced_cost(&route, &pm);
            let mut label = PathLabel::depot(&duals);
            for &(s, m) in &route.services {
                label = label.extend(&ctx, &duals, s, m).unwrap();
                let b = bounds.lookup(2 * s + m, label.load, label.time);
                assert!(label.reduced_cost() + b <= total + 1e-6, "{} + {} > {}", label.reduced_cost(), b, total);
            }
        }
    }
}

#[test]
fn inequalities_hold_for_every_feasible_plan() {
    for seed in 0..5 {
        let inst = small(seed + 60, 5, 1, SpeedLevel::M);
        let pm = setup(&inst);
        let n = inst.service_count();
        let demand: Vec<u64> = (0..n).map(|s| inst.demand(s) as u64).collect();
        let q = inst.capacity as u64;
        let plan = run_hgs(&inst, &pm, &HgsParams { max_iterations: Some(50), ..Default::default() }, seed).best;
        if !plan.is_feasible() {
            continue;
        }
        let cols: Vec<Column> = plan
            .routes
            .iter()
            .filter(|r| !r.is_empty())
            .map(|r| {
                let d = decode_route(&pm, r).unwrap();
                Column::new(&pm, r.iter().copied().zip(d.modes).collect()).unwrap()
            })
            .collect();
        let v = inst.vertex_count;
        for mask in 1usize..(1 << (v - 1)) {
            let in_set: Vec<bool> = (0..v).map(|x| x > 0 && mask >> (x - 1) & 1 == 1).collect();
            let odd = inst.service_links().iter().filter(|&&l| in_set[inst.links[l].tail] != in_set[inst.links[l].head]).count() % 2 == 1;
            if odd {
                let kind = RowKind::OddEdge { in_set };
                let lhs: f64 = cols.iter().map(|c| kind.coef(c, &pm, n)).sum();
                assert!(lhs >= 1.0);
            }
        }
        for mask in 1usize..(1 << n) {
            let in_set: Vec<bool> = (0..n).map(|s| mask >> s & 1 == 1).collect();
            let load: u64 = (0..n).filter(|&s| in_set[s]).map(|s| demand[s]).sum();
            let kind = RowKind::Capacity { in_set };
            let lhs: f64 = cols.iter().map(|c| kind.coef(c, &pm, n)).sum();
            assert!(lhs >= 2.0 * load.div_ceil(q) as f64);
        }
        let flows = ArcFlows::from_columns(&pm, v, &cols.iter().map(|c| (c, 1.0)).collect::<Vec<_>>());
        assert!(separate_odd_edge_cuts(&inst, &flows, 100).is_empty());
        assert!(separate_capacity_cuts(&demand, q, &flows, 100, 12).is_empty());
    }
}

#[test]
fn branch_and_price_matches_brute_force() {
    let mut solved = 0;
    for seed in 0..8 {
        let inst = small(seed + 100, 4 + (seed as usize % 2), 2, SpeedLevel::ALL[seed as usize % 3]);
        let pm = setup(&inst);
        let expect = brute_force(&inst, &pm);
        let res = run_bcp(&inst, &pm, &params(120.0), None);
        if expect.is_infinite() {
            assert!(res.ub.is_infinite());
            continue;
        }
        assert!(res.optimal, "seed {seed}: lb {} ub {} expect {expect}", res.lb, res.ub);
        assert!((res.ub - expect).abs() <= 1e-6 * expect.max(1.0), "seed {seed}: {} vs {expect}", res.ub);
        assert!(res.lb <= expect + 1e-6);
        assert_eq!(res.telemetry.lb_monotonicity_violations, 0);
        let total: f64 = res.routes.iter().map(|c| route_duration(&pm, &c.services).unwrap()).sum();
        assert!((total - res.ub).abs() < 1e-6);
        let mut covered: Vec<usize> = res.routes.iter().flat_map(|c| c.services.iter().map(|x| x.0)).collect();
        covered.sort_unstable();
        assert_eq!(covered, (0..inst.service_count()).collect::<Vec<_>>());
        solved += 1;
    }
    assert!(solved >= 6);
}

#[test]
fn warm_start_does_not_change_the_optimum() {
    let inst = small(7, 5, 1, SpeedLevel::H);
    let pm = setup(&inst);
    let expect = brute_force(&inst, &pm);
    let plan = run_hgs(&inst, &pm, &HgsParams { max_iterations: Some(200), ..Default::default() }, 1).best;
    let res = run_bcp(&inst, &pm, &params(120.0), Some(&plan));
    assert!(res.optimal);
    assert!((res.ub - expect).abs() <= 1e-6 * expect.max(1.0));
    if plan.is_feasible() {
        assert!(res.ub <= plan.total_duration + 1e-6);
    }
}

#[test]
fn single_service_is_solved_at_the_root() {
    let links = vec![
        Link { kind: LinkKind::Edge, tail: 0, head: 1, distance: 2.0, demand: None },
        Link { kind: LinkKind::Edge, tail: 1, head: 2, distance: 3.0, demand: Some(2.0) },
        Link { kind: LinkKind::Edge, tail: 2, head: 0, distance: 4.0, demand: None },
    ];
    let inst = Instance::new("one", 3, links, 2, 5.0, 100.0).unwrap();
    let pm = setup(&inst);
    let res = run_bcp(&inst, &pm, &params(10.0), None);
    assert!(res.optimal);
    assert_eq!(res.nodes_exact, 1);
    assert!((res.ub - 9.0).abs() < 1e-9);
    assert!((res.lb - 9.0).abs() < 1e-6);
    assert_eq!(res.gap_percent, 0.0);
}

#[test]
fn strong_branching_rank_weights_the_weaker_child() {
    assert_eq!(strong_branching_rank(10.0, 20.0), 12.5);
    assert_eq!(strong_branching_rank(20.0, 10.0), 12.5);
}

#[test]
fn result_serializes_to_json() {
    let inst = small(3, 4, 0, SpeedLevel::L);
    let pm = setup(&inst);
    let res = run_bcp(&inst, &pm, &params(60.0), None);
    let json = serde_json::to_value(&res).unwrap();
    for key in ["lb", "ub", "gap_percent", "nodes_exact", "nodes_heuristic", "columns", "cuts", "wall_seconds"] {
        assert!(json.get(key).is_some(), "{key}");
    }
}

#[test]
fn zero_duals_price_nothing() {
    let inst = small(5, 4, 2, SpeedLevel::H);
    let pm = setup(&inst);
    let ctx = PricingContext::new(&inst, &pm);
    let duals = Duals::zero(inst.service_count(), inst.vertex_count);
    let mut stats = PricingStats::default();
    assert!(price_fast(&ctx, &duals).is_empty());
    assert!(price_heuristic_dominance(&ctx, &duals, 0.5, None, &mut stats).unwrap().columns.is_empty());
    assert!(price_exact(&ctx, &duals, None, &mut stats).unwrap().columns.is_empty());
}

#[test]
fn fast_pricing_on_one_service() {
    let links = vec![
        Link { kind: LinkKind::Edge, tail: 0, head: 1, distance: 2.0, demand: None },
        Link { kind: LinkKind::Edge, tail: 1, head: 2, distance: 3.0, demand: Some(2.0) },
        Link { kind: LinkKind::Edge, tail: 2, head: 0, distance: 4.0, demand: None },
    ];
    let inst = Instance::new("one", 3, links, 1, 5.0, 100.0).unwrap();
    let pm = setup(&inst);
    let ctx = PricingContext::new(&inst, &pm);
    // Both modes of the edge take 9.
    for beta in [8.0, 8.999, 9.5, 12.0] {
        let mut duals = Duals::zero(1, 3);
        duals.beta[0] = beta;
        let cols = price_fast(&ctx, &duals);
        assert_eq!(cols.len(), 2 * usize::from(beta > 9.0), "beta {beta}");
    }
}

#[test]
fn heuristic_dominance_can_miss_the_best_route() {
    // Serving 0 then 1 finishes later than serving 1 alone but collects a
    // much larger dual; a huge μ lets the early label discard it.
    let links = vec![
        Link { kind: LinkKind::Arc, tail: 0, head: 1, distance: 2.0, demand: Some(1.0) },
        Link { kind: LinkKind::Arc, tail: 1, head: 2, distance: 3.0, demand: Some(1.0) },
        Link { kind: LinkKind::Edge, tail: 2, head: 0, distance: 1.0, demand: None },
        Link { kind: LinkKind::Edge, tail: 0, head: 1, distance: 1.0, demand: None },
    ];
    let inst = Instance::new("miss", 3, links, 1, 10.0, 100.0).unwrap();
    let pm = setup(&inst);
    let ctx = PricingContext::new(&inst, &pm);
    let mut duals = Duals::zero(2, 3);
    duals.beta = vec![100.0, 10.0];
    let mut stats = PricingStats::default();
    let exact = price_exact(&ctx, &duals, None, &mut stats).unwrap();
    let greedy = price_heuristic_dominance(&ctx, &duals, 1e9, None, &mut stats).unwrap();
    let half = price_heuristic_dominance(&ctx, &duals, 0.5, None, &mut stats).unwrap();
    assert!((exact.min_reduced_cost + 104.0).abs() < 1e-9);
    assert!((greedy.min_reduced_cost + 97.0).abs() < 1e-9);
    assert!((half.min_reduced_cost + 104.0).abs() < 1e-9);
    assert!(exact.columns.iter().any(|c| c.services == vec![(0, 0), (1, 0)]));
    assert!(!greedy.columns.iter().any(|c| c.services == vec![(0, 0), (1, 0)]));
}

#[test]
fn heuristic_pricing_never_beats_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..8 {
        let inst = small(seed + 200, 5, 1, SpeedLevel::ALL[seed as usize % 3]);
        let pm = setup(&inst);
        let ctx = PricingContext::new(&inst, &pm);
        let duals = random_duals(&mut rng, &inst, inst.duration_limit / inst.service_count() as f64);
        let mut stats = PricingStats::default();
        let exact = price_exact(&ctx, &duals, None, &mut stats).unwrap();
        let heur = price_heuristic_dominance(&ctx, &duals, 0.5, None, &mut stats).unwrap();
        assert!(heur.min_reduced_cost >= exact.min_reduced_cost - 1e-9);
        for c in &heur.columns {
            assert!(duals.reduced_cost(c, &pm) < -1e-9);
        }
    }
}

#[test]
fn constructed_fractional_points_violate_cuts() {
    let (inst, _) = dominance_fixture();
    // Vertex 2 touches one required link and no deadhead flow.
    let flows = ArcFlows { vertices: 3, services: 2, deadhead: vec![0.0; 9], required: vec![0.0; 9] };
    let cuts = separate_odd_edge_cuts(&inst, &flows, 10);
    assert!(cuts.iter().any(|r| r.kind == RowKind::OddEdge { in_set: vec![false, false, true] }));

    // One route serves two services whose demands exceed the capacity.
    let mut required = vec![0.0; 9];
    required[2 * 3] = 1.0;
    required[1] = 1.0;
    required[3 + 2] = 1.0;
    let flows = ArcFlows { vertices: 3, services: 2, deadhead: vec![0.0; 9], required };
    let cuts = separate_capacity_cuts(&[3, 3], 5, &flows, 10, 12);
    let both = cuts.iter().find(|r| r.kind == RowKind::Capacity { in_set: vec![true, true] }).unwrap();
    assert_eq!(both.rhs, 4.0);
    assert!(cuts.iter().all(|r| r.kind != RowKind::Capacity { in_set: vec![true, false] }));
}
