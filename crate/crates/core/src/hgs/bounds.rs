use crate::profiles::ProfileMatrix;

use super::decode::{finish, DecodeState, Eval};

const INF: f64 = f64::INFINITY;

/// Lower bound on the travel and service time of a contiguous service
/// sequence, per (first-service mode, last-service mode). Unused modes of
/// arc services stay at `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeqBound {
    pub first: usize,
    pub last: usize,
    pub t: [[f64; 2]; 2],
}

/// Bound of a single service: its minimum service time on the diagonal.
pub fn seq_single(pm: &ProfileMatrix, s: usize) -> SeqBound {
    let mut t = [[INF; 2]; 2];
    for (k, row) in t.iter_mut().enumerate().take(pm.mode_count(s)) {
        row[k] = pm.service(s, k).min_time;
    }
    SeqBound { first: s, last: s, t }
}

/// Bound of `a` followed by `b`.
pub fn seq_concat(pm: &ProfileMatrix, a: &SeqBound, b: &SeqBound) -> SeqBound {
    let (ma, mb) = (pm.mode_count(a.last), pm.mode_count(b.first));
    let mut join = [[INF; 2]; 2];
    for (x, row) in join.iter_mut().enumerate().take(ma) {
        let end = pm.service(a.last, x).end;
        for (y, cell) in row.iter_mut().enumerate().take(mb) {
            *cell = pm.min_gap(end, pm.service(b.first, y).start);
        }
    }
    let mut t = [[INF; 2]; 2];
    for k in 0..pm.mode_count(a.first) {
        for l in 0..pm.mode_count(b.last) {
            let mut best = INF;
            for (x, row) in join.iter().enumerate().take(ma) {
                for (y, gap) in row.iter().enumerate().take(mb) {
                    best = best.min(a.t[k][x] + gap + b.t[y][l]);
                }
            }
            t[k][l] = best;
        }
    }
    SeqBound { first: a.first, last: b.last, t }
}

/// Bound of `rest` from the start of its first service in each mode back to
/// the depot.
fn to_depot(pm: &ProfileMatrix, rest: &SeqBound) -> [f64; 2] {
    let mut out = [INF; 2];
    for (y, slot) in out.iter_mut().enumerate().take(pm.mode_count(rest.first)) {
        for z in 0..pm.mode_count(rest.last) {
            let back = pm.min_gap(pm.service(rest.last, z).end, 0);
            *slot = slot.min(rest.t[y][z] + back);
        }
    }
    out
}

/// Lower bound on the duration of a route made of an exactly known prefix
/// (its decoder state; `DecodeState::DEPOT` when empty) followed by services
/// bounded by `rest`. Exact when `rest` is `None`.
pub fn move_lower_bound(pm: &ProfileMatrix, prefix: &DecodeState, rest: Option<&SeqBound>) -> f64 {
    let Some(rest) = rest else {
        return finish(pm, Eval::Extended, prefix).0;
    };
    let tail = to_depot(pm, rest);
    let modes = prefix.last.map_or(1, |s| pm.mode_count(s));
    let mut best = INF;
    for x in 0..modes {
        let t = prefix.times[x];
        if !t.is_finite() {
            continue;
        }
        let from = prefix.last.map_or(0, |s| pm.service(s, x).end);
        for (y, rest_time) in tail.iter().enumerate().take(pm.mode_count(rest.first)) {
            let arrive = Eval::Extended.travel(pm, from, pm.service(rest.first, y).start, t);
            best = best.min(arrive + rest_time);
        }
    }
    best
}
