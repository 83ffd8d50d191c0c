use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::ProfileError;
use crate::network::{Dir, Instance, OrdF64};
use crate::pl_time::arrival_query_iterative;

/// A concrete quickest path for one departure time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretePath {
    pub vertices: Vec<usize>,
    /// `(link id, direction)` of each traversed link.
    pub links: Vec<(usize, Dir)>,
    pub departure: f64,
    pub arrival: f64,
}

/// Earliest arrival at every vertex when leaving `origin` at `t`, by a
/// time-dependent Dijkstra over iterative link queries (exact under FIFO).
/// Also returns the predecessor `(vertex, link, dir)` of each reached vertex.
#[allow(clippy::type_complexity)]
pub fn earliest_arrivals(inst: &Instance, origin: usize, t: f64) -> (Vec<f64>, Vec<Option<(usize, usize, Dir)>>) {
    let n = inst.vertex_count;
    let mut adj: Vec<Vec<(usize, usize, Dir)>> = vec![Vec::new(); n];
    for (id, dir, a, b) in inst.oriented_links() {
        adj[a].push((b, id, dir));
    }
    let mut best = vec![f64::INFINITY; n];
    let mut pred = vec![None; n];
    best[origin] = t;
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((OrdF64(t), origin)));
    while let Some(Reverse((OrdF64(at), u))) = heap.pop() {
        if at > best[u] {
            continue;
        }
        for &(v, id, dir) in &adj[u] {
            let speed = &inst.speeds(id, dir).expect("oriented link has speeds").travel;
            let Ok(arr) = arrival_query_iterative(speed, inst.links[id].distance, at) else {
                continue;
            };
            if arr < best[v] {
                best[v] = arr;
                pred[v] = Some((u, id, dir));
                heap.push(Reverse((OrdF64(arr), v)));
            }
        }
    }
    (best, pred)
}

/// Quickest path from `i` to `j` departing at `t`.
pub fn discrete_quickest_path(inst: &Instance, i: usize, j: usize, t: f64) -> Result<DiscretePath, ProfileError> {
    let (best, pred) = earliest_arrivals(inst, i, t);
    if !best[j].is_finite() {
        return Err(ProfileError::Unreachable { from: i, to: j, t });
    }
    let mut vertices = vec![j];
    let mut links = Vec::new();
    let mut at = j;
    while at != i {
        let (u, id, dir) = pred[at].expect("reached vertex has a predecessor");
        links.push((id, dir));
        vertices.push(u);
        at = u;
    }
    vertices.reverse();
    links.reverse();
    Ok(DiscretePath { vertices, links, departure: t, arrival: best[j] })
}
