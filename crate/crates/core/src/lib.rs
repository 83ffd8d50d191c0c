//! Solver suite for the time-dependent capacitated arc routing problem.
//!
//! * [`pl_time`]: speed profiles, closed-form arrival functions and their algebra.
//! * [`network`]: instances, file formats, speed-profile generation and perturbation.
//! * [`profiles`]: continuous quickest-path profiles between service endpoints.
//! * [`hgs`]: hybrid genetic search with a mode-optimal route decoder.
//! * [`bcp`]: branch-cut-and-price over the set-partitioning formulation.

pub mod pl_time;
pub mod network;
pub mod profiles;
pub mod hgs;
pub mod bcp;
