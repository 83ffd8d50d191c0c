use serde::{Deserialize, Serialize};

use crate::pl_time::PlError;
use crate::profiles::ProfileMatrix;

/// Optimal mode choices and timings of one route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodedRoute {
    /// Completion time of the return to the depot, i.e. the route duration.
    pub duration: f64,
    /// Mode of each service, in route order.
    pub modes: Vec<usize>,
    /// Completion time of each service in its chosen mode.
    pub completions: Vec<f64>,
}

/// Completion times `T[l]` of the last decoded service for each of its modes,
/// or the depot start when `last` is `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeState {
    pub last: Option<usize>,
    pub times: [f64; 2],
}

impl DecodeState {
    pub const DEPOT: DecodeState = DecodeState { last: None, times: [0.0, f64::INFINITY] };
}

/// Ψ and Φ̂ evaluation, strict (`None` past the horizon) or extended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Eval {
    Strict,
    Extended,
}

impl Eval {
    #[inline]
    pub(crate) fn travel(self, pm: &ProfileMatrix, i: usize, j: usize, t: f64) -> f64 {
        let v = match self {
            Eval::Strict => pm.arrival(i, j, t),
            Eval::Extended => pm.arrival_extended(i, j, t),
        };
        v.unwrap_or(f64::INFINITY)
    }

    #[inline]
    pub(crate) fn service(self, pm: &ProfileMatrix, s: usize, mode: usize, t: f64) -> f64 {
        let v = match self {
            Eval::Strict => pm.service_completion(s, mode, t),
            Eval::Extended => pm.service_completion_extended(s, mode, t),
        };
        v.unwrap_or(f64::INFINITY)
    }
}

#[inline]
fn end_vertex(pm: &ProfileMatrix, state: &DecodeState, k: usize) -> usize {
    match state.last {
        Some(s) => pm.service(s, k).end,
        None => 0,
    }
}

#[inline]
fn state_modes(pm: &ProfileMatrix, state: &DecodeState) -> usize {
    state.last.map_or(1, |s| pm.mode_count(s))
}

/// Appends service `s` to `state`: `T'[l] = min_k Φ̂^l(Ψ^{kl}(T[k]))`, lowest
/// `k` on ties. Returns the new state and the argmin `k` for each `l`.
#[inline]
pub(crate) fn step(pm: &ProfileMatrix, eval: Eval, state: &DecodeState, s: usize) -> (DecodeState, [usize; 2]) {
    let mut times = [f64::INFINITY; 2];
    let mut arg = [0; 2];
    for (l, slot) in times.iter_mut().enumerate().take(pm.mode_count(s)) {
        let start = pm.service(s, l).start;
        for k in 0..state_modes(pm, state) {
            let t = state.times[k];
            if !t.is_finite() {
                continue;
            }
            let arrive = eval.travel(pm, end_vertex(pm, state, k), start, t);
            let done = eval.service(pm, s, l, arrive);
            if done < *slot {
                *slot = done;
                arg[l] = k;
            }
        }
    }
    (DecodeState { last: Some(s), times }, arg)
}

/// Time back at the depot from `state`, with the argmin mode.
#[inline]
pub(crate) fn finish(pm: &ProfileMatrix, eval: Eval, state: &DecodeState) -> (f64, usize) {
    let mut best = (f64::INFINITY, 0);
    for k in 0..state_modes(pm, state) {
        let t = state.times[k];
        if t.is_finite() {
            let back = eval.travel(pm, end_vertex(pm, state, k), 0, t);
            if back < best.0 {
                best = (back, k);
            }
        }
    }
    if state.last.is_none() {
        best = (0.0, 0);
    }
    best
}

pub(crate) fn decode_with(pm: &ProfileMatrix, eval: Eval, services: &[usize]) -> DecodedRoute {
    if services.is_empty() {
        return DecodedRoute { duration: 0.0, modes: Vec::new(), completions: Vec::new() };
    }
    let mut states = Vec::with_capacity(services.len());
    let mut args = Vec::with_capacity(services.len());
    let mut state = DecodeState::DEPOT;
    for &s in services {
        let (next, arg) = step(pm, eval, &state, s);
        states.push(next);
        args.push(arg);
        state = next;
    }
    let (duration, mut mode) = finish(pm, eval, &state);
    let mut modes = vec![0; services.len()];
    let mut completions = vec![0.0; services.len()];
    for i in (0..services.len()).rev() {
        modes[i] = mode;
        completions[i] = states[i].times[mode];
        mode = args[i][mode];
    }
    DecodedRoute { duration, modes, completions }
}

/// Optimal modes for a mode-free service sequence leaving the depot at time 0.
/// Fails when the route cannot return to the depot within the horizon.
pub fn decode_route(pm: &ProfileMatrix, services: &[usize]) -> Result<DecodedRoute, PlError> {
    let r = decode_with(pm, Eval::Strict, services);
    if r.duration.is_finite() {
        Ok(r)
    } else {
        Err(PlError::QueryOutOfDomain { t: pm.horizon() })
    }
}

/// Same as `decode_route`, but past the horizon every function continues with
/// its last travel time, so over-long routes get a finite duration.
pub fn decode_route_extended(pm: &ProfileMatrix, services: &[usize]) -> DecodedRoute {
    decode_with(pm, Eval::Extended, services)
}

/// Route duration with every mode fixed. `None` past the horizon.
pub fn evaluate_fixed_modes(pm: &ProfileMatrix, services: &[usize], modes: &[usize]) -> Option<f64> {
    let mut t = 0.0;
    let mut at = 0;
    for (&s, &m) in services.iter().zip(modes) {
        let sm = pm.service(s, m);
        t = pm.arrival(at, sm.start, t)?;
        t = pm.service_completion(s, m, t)?;
        at = sm.end;
    }
    pm.arrival(at, 0, t)
}
