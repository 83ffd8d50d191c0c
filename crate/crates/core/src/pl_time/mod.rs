//! Piecewise-constant speed profiles and the piecewise-linear arrival-time
//! functions they induce.
//!
//! Every time comparison uses the absolute tolerance `1e-9 * D`, where `D` is
//! the planning horizon.

mod arrival;
mod bucket;
mod speed;

pub use arrival::{build_arrival_function, compose, lower_envelope, ArrivalFunction};
pub use bucket::{
    build_bucket_index, default_bucket_count, enable_query_stats, query, query_stats, reset_query_stats,
    BucketIndex, IndexedArrival, QueryStats, MAX_BUCKETS,
};
pub use speed::{arrival_query_iterative, departure_query_iterative, SpeedFunction};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlError {
    #[error("invalid speed function: {0}")]
    InvalidSpeed(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("departure at {departure} cannot arrive before the hard cap {cap}")]
    ArrivalBeyondHorizon { departure: f64, cap: f64 },
    #[error("arrival at {arrival} would require departing before time 0")]
    DepartureBeforeZero { arrival: f64 },
    #[error("earliest arrival {earliest_arrival} is past the horizon {horizon}")]
    DegenerateHorizon { earliest_arrival: f64, horizon: f64 },
    #[error("query time {t} is outside the function domain")]
    QueryOutOfDomain { t: f64 },
}

/// Absolute time tolerance for a horizon `D`.
#[inline]
pub fn tolerance(horizon: f64) -> f64 {
    1e-9 * horizon
}

/// `min_t { f(t) - t }` over the domain of `f`.
pub fn min_gap(f: &ArrivalFunction) -> f64 {
    f.min_gap()
}
