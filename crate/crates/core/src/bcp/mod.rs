//! Branch-cut-and-price over the set-partitioning formulation.
//!
//! The master selects at most `m` routes covering every service once. Routes
//! are priced by forward labeling over oriented services with ng-route
//! memory. Because arrival times depend on departure times, a label only
//! dominates another when it is no later, no heavier, has no smaller dual sum
//! and remembers no more services; reduced cost alone is not enough.
//! Completion bounds from a backward pass at maximum speeds fathom labels
//! that cannot reach a negative reduced cost. Odd-edge and capacity cuts
//! strengthen the master, and branching acts on aggregated flows.

mod bounds;
mod column;
mod cuts;
mod lp;
mod pricing;
mod tree;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bounds::{build_completion_bounds, CompletionBounds};
pub use column::{route_duration, Column, Duals, Row, RowKind};
pub use cuts::{separate_capacity_cuts, separate_odd_edge_cuts, ArcFlows};
pub use lp::{DenseSimplex, LpBackend, LpError, LpSolution, Sense};
pub use pricing::{
    ng_sets, price_exact, price_fast, price_heuristic_dominance, price_labels, Dominance, PathLabel, PricingContext,
    PricingOutcome, PricingStats, NG_SIZE,
};
pub use tree::{run_bcp, strong_branching_rank};

#[derive(Debug, Error)]
pub enum BcpError {
    #[error("route leaves the planning horizon")]
    Infeasible,
    #[error("label limit of {0} reached")]
    LabelLimit(usize),
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BcpParams {
    /// Seconds; checked once the root relaxation is solved.
    pub time_limit: f64,
    pub node_limit: Option<u64>,
    /// Open nodes kept; the worst are dropped beyond this.
    pub max_open_nodes: usize,
    pub strong_candidates: usize,
    /// Column generation iterations per strong branching child.
    pub strong_iterations: usize,
    pub stabilization: f64,
    pub heuristic_mu: f64,
    pub max_columns: usize,
    pub cut_rounds: usize,
    pub cuts_per_round: usize,
    pub capacity_exhaustive_max: usize,
    pub completion_bounds: bool,
    /// Time step of the completion bound grid.
    pub bound_width: f64,
    pub cuts: bool,
    pub label_limit: usize,
}

impl Default for BcpParams {
    fn default() -> Self {
        Self {
            time_limit: 3600.0,
            node_limit: None,
            max_open_nodes: 10_000,
            strong_candidates: 50,
            strong_iterations: 25,
            stabilization: 0.9,
            heuristic_mu: 0.5,
            max_columns: 200,
            cut_rounds: 5,
            cuts_per_round: 20,
            capacity_exhaustive_max: 12,
            completion_bounds: true,
            bound_width: 1.0,
            cuts: true,
            label_limit: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BcpTelemetry {
    /// Exact pricing calls of each node solved exactly, in processing order.
    pub exact_pricing_per_node: Vec<u32>,
    pub fast_pricing_calls: u64,
    pub heuristic_pricing_calls: u64,
    pub labels_created: u64,
    pub labels_dominated: u64,
    pub labels_fathomed: u64,
    pub lb_monotonicity_violations: u64,
    pub label_limit_hits: u64,
    pub root_lb: f64,
    pub dropped_nodes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BcpResult {
    pub lb: f64,
    pub ub: f64,
    pub gap_percent: f64,
    pub nodes_exact: u64,
    pub nodes_heuristic: u64,
    pub columns: usize,
    pub cuts: usize,
    pub wall_seconds: f64,
    pub optimal: bool,
    pub routes: Vec<Column>,
    pub telemetry: BcpTelemetry,
}
