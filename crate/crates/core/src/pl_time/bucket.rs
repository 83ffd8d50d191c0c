use std::cell::Cell;

use serde::{Deserialize, Serialize};

use super::{ArrivalFunction, PlError};

/// Uniform time buckets over `[0, horizon]`, each boundary pointing to the
/// piece that contains it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketIndex {
    bucket_to_piece: Vec<u32>,
    horizon: f64,
}

pub const MAX_BUCKETS: usize = 1024;

/// Four buckets per piece, capped.
pub fn default_bucket_count(f: &ArrivalFunction) -> usize {
    (4 * f.piece_count()).clamp(1, MAX_BUCKETS)
}

impl BucketIndex {
    #[inline]
    fn boundary(&self, i: usize) -> f64 {
        boundary_time(i, self.bucket_count(), self.horizon)
    }

    pub fn bucket_count(&self) -> usize {
        self.bucket_to_piece.len() - 1
    }

    pub fn entries(&self) -> &[u32] {
        &self.bucket_to_piece
    }
}

#[inline]
fn boundary_time(i: usize, buckets: usize, horizon: f64) -> f64 {
    i as f64 * horizon / buckets as f64
}

pub fn build_bucket_index(f: &ArrivalFunction, buckets: usize) -> BucketIndex {
    let buckets = buckets.max(1);
    let horizon = f.horizon();
    let last = f.piece_count().saturating_sub(1);
    let bucket_to_piece = (0..=buckets)
        .map(|i| {
            let t = boundary_time(i, buckets, horizon);
            if f.piece_count() == 0 {
                0
            } else {
                f.search_piece(t, 0, last) as u32
            }
        })
        .collect();
    BucketIndex { bucket_to_piece, horizon }
}

thread_local! {
    static STATS: Cell<(bool, u64, u64)> = const { Cell::new((false, 0, 0)) };
}

/// Per-thread counters of bucket queries answered directly versus by search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryStats {
    pub direct_hits: u64,
    pub binary_searches: u64,
}

impl QueryStats {
    pub fn direct_hit_rate(&self) -> f64 {
        let total = self.direct_hits + self.binary_searches;
        if total == 0 {
            1.0
        } else {
            self.direct_hits as f64 / total as f64
        }
    }
}

pub fn enable_query_stats(enabled: bool) {
    STATS.with(|s| {
        let (_, d, b) = s.get();
        s.set((enabled, d, b));
    });
}

pub fn reset_query_stats() {
    STATS.with(|s| {
        let (e, _, _) = s.get();
        s.set((e, 0, 0));
    });
}

pub fn query_stats() -> QueryStats {
    STATS.with(|s| {
        let (_, direct_hits, binary_searches) = s.get();
        QueryStats { direct_hits, binary_searches }
    })
}

#[inline]
fn record(direct: bool) {
    STATS.with(|s| {
        let (e, d, b) = s.get();
        if e {
            s.set(if direct { (e, d + 1, b) } else { (e, d, b + 1) });
        }
    });
}

/// Bucket-accelerated evaluation: constant time when both bracketing bucket
/// boundaries point to the same piece, binary search between them otherwise.
pub fn query(f: &ArrivalFunction, idx: &BucketIndex, t: f64) -> Result<f64, PlError> {
    query_opt(f, idx, t).ok_or(PlError::QueryOutOfDomain { t })
}

#[inline]
pub(crate) fn query_opt(f: &ArrivalFunction, idx: &BucketIndex, t: f64) -> Option<f64> {
    if !f.in_domain(t) {
        return None;
    }
    let pieces = f.piece_count();
    if pieces == 0 {
        return Some(f.points()[0].1);
    }
    let last = idx.bucket_to_piece.len() - 1;
    let x = (t * last as f64 / idx.horizon).max(0.0);
    let mut lo = (x.floor() as usize).min(last);
    let mut hi = (x.ceil() as usize).min(last);
    // Rounding in `x` must not put the bracketing boundaries on the wrong side of `t`.
    if lo > 0 && idx.boundary(lo) > t {
        lo -= 1;
    }
    if hi < last && idx.boundary(hi) < t {
        hi += 1;
    }
    let (plo, phi) = (idx.bucket_to_piece[lo] as usize, idx.bucket_to_piece[hi] as usize);
    let end_of = |k: usize| f.points()[k + 1].0;
    let piece = if plo == phi && (t <= end_of(plo) || plo == pieces - 1) {
        record(true);
        plo
    } else {
        record(false);
        let hi_piece = if t <= end_of(phi) { phi } else { pieces - 1 };
        f.search_piece(t, plo, hi_piece)
    };
    Some(f.eval_piece(piece, t))
}

/// An arrival function bundled with its bucket index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedArrival {
    pub function: ArrivalFunction,
    pub index: BucketIndex,
}

impl IndexedArrival {
    pub fn new(function: ArrivalFunction) -> Self {
        let b = default_bucket_count(&function);
        Self::with_buckets(function, b)
    }

    pub fn with_buckets(function: ArrivalFunction, buckets: usize) -> Self {
        let index = build_bucket_index(&function, buckets);
        Self { function, index }
    }

    #[inline]
    pub fn query(&self, t: f64) -> Option<f64> {
        query_opt(&self.function, &self.index, t)
    }

    /// Bucket query inside the domain, unit-slope continuation past its end.
    #[inline]
    pub fn query_extended(&self, t: f64) -> Option<f64> {
        match self.query(t) {
            Some(v) => Some(v),
            None => self.function.eval_extended(t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_piece_points_everywhere_to_zero() {
        let f = ArrivalFunction::shift(2.0, 8.0, 10.0);
        let idx = build_bucket_index(&f, 7);
        assert!(idx.entries().iter().all(|&e| e == 0));
        assert_eq!(query(&f, &idx, 3.0).unwrap(), 5.0);
        assert_eq!(query(&f, &idx, 0.0).unwrap(), 2.0);
    }

    #[test]
    fn boundary_ties_resolve_to_earlier_piece() {
        let f = ArrivalFunction::from_points(vec![(0.0, 1.0), (5.0, 7.0), (10.0, 12.0)], 10.0);
        let idx = build_bucket_index(&f, 2);
        assert_eq!(idx.entries(), &[0, 0, 1]);
    }

    #[test]
    fn out_of_domain_query_fails() {
        let f = ArrivalFunction::shift(2.0, 8.0, 10.0);
        let idx = build_bucket_index(&f, 4);
        assert!(matches!(query(&f, &idx, 9.0), Err(PlError::QueryOutOfDomain { .. })));
    }

    #[test]
    fn statistics_count_only_when_enabled() {
        let f = ArrivalFunction::from_points(vec![(0.0, 1.0), (5.0, 7.0), (10.0, 12.0)], 10.0);
        let idx = build_bucket_index(&f, 4);
        enable_query_stats(false);
        reset_query_stats();
        query(&f, &idx, 1.0).unwrap();
        assert_eq!(query_stats(), QueryStats::default());
        enable_query_stats(true);
        query(&f, &idx, 1.0).unwrap();
        query(&f, &idx, 4.0).unwrap();
        let s = query_stats();
        assert_eq!(s.direct_hits + s.binary_searches, 2);
        enable_query_stats(false);
    }
}
