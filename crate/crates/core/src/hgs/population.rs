use rand::Rng;

use super::solution::{Penalties, RoutePlan};
use crate::network::Instance;

/// Ordered crossover on giant tours: the child copies `p1` on the cyclic
/// positions `start..=end` and fills the other positions, from `end + 1`
/// onward, with the remaining services in `p2` order.
pub fn ox_with_cut(p1: &[usize], p2: &[usize], start: usize, end: usize) -> Vec<usize> {
    let n = p1.len();
    if n == 0 {
        return Vec::new();
    }
    let mut child = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let mut k = start;
    loop {
        child[k] = p1[k];
        used[p1[k]] = true;
        if k == end {
            break;
        }
        k = (k + 1) % n;
    }
    let mut at = (end + 1) % n;
    for i in 0..n {
        let s = p2[(end + 1 + i) % n];
        if !used[s] {
            while child[at] != usize::MAX {
                at = (at + 1) % n;
            }
            child[at] = s;
            used[s] = true;
        }
    }
    child
}

/// `ox_with_cut` with random cut points.
pub fn crossover_ox(p1: &[usize], p2: &[usize], rng: &mut impl Rng) -> Vec<usize> {
    let n = p1.len();
    if n < 2 {
        return p1.to_vec();
    }
    let start = rng.random_range(0..n);
    let mut end = rng.random_range(0..n);
    while end == start {
        end = rng.random_range(0..n);
    }
    ox_with_cut(p1, p2, start, end)
}

/// Fraction of services whose successor (next service or depot) differs.
pub fn broken_pairs_distance(a: &[usize], b: &[usize]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.iter().zip(b).filter(|(x, y)| x != y).count() as f64 / a.len() as f64
}

#[derive(Debug, Clone)]
pub struct Individual {
    pub plan: RoutePlan,
    pub successors: Vec<usize>,
    pub penalized: f64,
    pub biased_fitness: f64,
}

impl Individual {
    pub fn new(inst: &Instance, plan: RoutePlan, w: Penalties) -> Self {
        let successors = plan.successors(inst.service_count());
        let penalized = plan.penalized(inst, w);
        Self { plan, successors, penalized, biased_fitness: 0.0 }
    }

    /// Giant tour: the routes concatenated in slot order.
    pub fn giant_tour(&self) -> Vec<usize> {
        self.plan.routes.iter().flatten().copied().collect()
    }
}

/// Population sizing and diversity settings.
#[derive(Debug, Clone, Copy)]
pub struct PopulationParams {
    pub mu: usize,
    pub lambda: usize,
    pub elite_fraction: f64,
    pub n_close: usize,
}

/// Feasible and infeasible subpopulations.
#[derive(Debug, Clone)]
pub struct Population {
    pub feasible: Vec<Individual>,
    pub infeasible: Vec<Individual>,
    params: PopulationParams,
}

impl Population {
    pub fn new(params: PopulationParams) -> Self {
        Self { feasible: Vec::new(), infeasible: Vec::new(), params }
    }

    pub fn len(&self) -> usize {
        self.feasible.len() + self.infeasible.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Adds `ind` to its subpopulation unless an identical genotype is there.
    /// Returns whether it was inserted.
    pub fn insert(&mut self, ind: Individual) -> bool {
        let params = self.params;
        let sub = if ind.plan.is_feasible() { &mut self.feasible } else { &mut self.infeasible };
        if sub.iter().any(|o| o.successors == ind.successors) {
            return false;
        }
        sub.push(ind);
        if sub.len() > params.mu + params.lambda {
            while sub.len() > params.mu {
                update_biased_fitness(sub, params);
                let victim = worst(sub);
                sub.remove(victim);
            }
        }
        true
    }

    pub fn update_fitness(&mut self) {
        update_biased_fitness(&mut self.feasible, self.params);
        update_biased_fitness(&mut self.infeasible, self.params);
    }

    pub fn reprice_infeasible(&mut self, inst: &Instance, w: Penalties) {
        for ind in &mut self.infeasible {
            ind.penalized = ind.plan.penalized(inst, w);
        }
    }

    fn get(&self, k: usize) -> &Individual {
        if k < self.feasible.len() {
            &self.feasible[k]
        } else {
            &self.infeasible[k - self.feasible.len()]
        }
    }

    /// Binary tournament on biased fitness over both subpopulations.
    pub fn tournament(&self, rng: &mut impl Rng) -> &Individual {
        let n = self.len();
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        let (x, y) = (self.get(a), self.get(b));
        if y.biased_fitness < x.biased_fitness {
            y
        } else {
            x
        }
    }

    pub fn clear(&mut self) {
        self.feasible.clear();
        self.infeasible.clear();
    }
}

fn distances(sub: &[Individual]) -> Vec<Vec<f64>> {
    let n = sub.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = broken_pairs_distance(&sub[i].successors, &sub[j].successors);
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    d
}

/// Biased fitness: cost rank plus weighted rank of the diversity
/// contribution (mean distance to the `n_close` closest individuals).
fn update_biased_fitness(sub: &mut [Individual], params: PopulationParams) {
    let n = sub.len();
    if n <= 1 {
        sub.iter_mut().for_each(|i| i.biased_fitness = 0.0);
        return;
    }
    let d = distances(sub);
    let diversity: Vec<f64> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| d[i][j]).collect();
            row.sort_by(f64::total_cmp);
            let k = params.n_close.min(row.len());
            row[..k].iter().sum::<f64>() / k as f64
        })
        .collect();
    let mut by_cost: Vec<usize> = (0..n).collect();
    by_cost.sort_by(|&a, &b| sub[a].penalized.total_cmp(&sub[b].penalized).then(a.cmp(&b)));
    let mut by_div: Vec<usize> = (0..n).collect();
    by_div.sort_by(|&a, &b| diversity[b].total_cmp(&diversity[a]).then(a.cmp(&b)));
    let elite = (params.elite_fraction * params.mu as f64).round();
    let weight = (1.0 - elite / n as f64).max(0.0);
    let mut fit_rank = vec![0.0; n];
    for (r, &i) in by_cost.iter().enumerate() {
        fit_rank[i] = r as f64 / (n - 1) as f64;
    }
    for (r, &i) in by_div.iter().enumerate() {
        sub[i].biased_fitness = fit_rank[i] + weight * r as f64 / (n - 1) as f64;
    }
}

/// Index to remove: the worst biased fitness among clones if any, else overall.
fn worst(sub: &[Individual]) -> usize {
    let is_clone =
        |i: usize| sub.iter().enumerate().any(|(j, o)| j != i && o.successors == sub[i].successors);
    let clones: Vec<usize> = (0..sub.len()).filter(|&i| is_clone(i)).collect();
    let pool: Vec<usize> = if clones.is_empty() { (0..sub.len()).collect() } else { clones };
    pool.into_iter().fold(None, |best: Option<usize>, i| match best {
        Some(b) if sub[b].biased_fitness >= sub[i].biased_fitness => Some(b),
        _ => Some(i),
    })
    .unwrap()
}
