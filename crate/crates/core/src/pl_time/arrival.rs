use serde::{Deserialize, Serialize};

use super::speed::{arrival_uncapped, departure_query_iterative, SpeedFunction};
use super::{tolerance, PlError};

/// Continuous, nondecreasing piecewise-linear map from departure time to
/// arrival time, stored as its breakpoints.
///
/// Piece `k` joins `points[k]` and `points[k + 1]`. An empty point list is the
/// everywhere-infinite function (no feasible departure). Two consecutive points
/// sharing a time encode an upward jump; only envelopes of functions whose
/// domains end at different heights produce one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalFunction {
    points: Vec<(f64, f64)>,
    horizon: f64,
}

impl ArrivalFunction {
    /// Builds a function from raw breakpoints. Times must be nondecreasing.
    pub fn from_points(points: Vec<(f64, f64)>, horizon: f64) -> Self {
        debug_assert!(points.windows(2).all(|w| w[0].0 <= w[1].0));
        Self { points, horizon }
    }

    pub fn infinite(horizon: f64) -> Self {
        Self { points: Vec::new(), horizon }
    }

    pub fn identity(horizon: f64) -> Self {
        Self { points: vec![(0.0, 0.0), (horizon, horizon)], horizon }
    }

    /// `t + offset` on `[0, end]`.
    pub fn shift(offset: f64, end: f64, horizon: f64) -> Self {
        Self { points: vec![(0.0, offset), (end, end + offset)], horizon }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn is_infinite(&self) -> bool {
        self.points.is_empty()
    }

    pub fn piece_count(&self) -> usize {
        self.points.len().saturating_sub(1)
    }

    pub fn domain_start(&self) -> Option<f64> {
        self.points.first().map(|p| p.0)
    }

    /// Latest admissible departure.
    pub fn domain_end(&self) -> Option<f64> {
        self.points.last().map(|p| p.0)
    }

    /// Breakpoints as `[t, value]` pairs, the layout used by debug dumps.
    pub fn breakpoint_pairs(&self) -> Vec<[f64; 2]> {
        self.points.iter().map(|&(t, y)| [t, y]).collect()
    }

    pub(crate) fn in_domain(&self, t: f64) -> bool {
        match (self.points.first(), self.points.last()) {
            (Some(a), Some(b)) => {
                let eps = tolerance(self.horizon);
                t >= a.0 - eps && t <= b.0 + eps
            }
            _ => false,
        }
    }

    /// Evaluates piece `k` at `t`, clamped to the piece's value range so that
    /// evaluation stays monotone across breakpoints in floating point.
    #[inline]
    pub(crate) fn eval_piece(&self, k: usize, t: f64) -> f64 {
        let (t0, y0) = self.points[k];
        let Some(&(t1, y1)) = self.points.get(k + 1) else {
            return y0;
        };
        if t1 <= t0 {
            return y0;
        }
        let y = y0 + (t - t0) * ((y1 - y0) / (t1 - t0));
        if y1 >= y0 {
            y.clamp(y0, y1)
        } else {
            y.clamp(y1, y0)
        }
    }

    /// Index of the first piece whose end is at or after `t` (earlier piece on
    /// ties), searching pieces `lo..=hi`.
    #[inline]
    pub(crate) fn search_piece(&self, t: f64, lo: usize, hi: usize) -> usize {
        let ends = &self.points[lo + 1..=hi + 1];
        (lo + ends.partition_point(|p| p.0 < t)).min(hi)
    }

    /// Evaluation by binary search over all pieces; `None` outside the domain.
    pub fn eval(&self, t: f64) -> Option<f64> {
        if !self.in_domain(t) {
            return None;
        }
        if self.points.len() == 1 {
            return Some(self.points[0].1);
        }
        let k = self.search_piece(t, 0, self.points.len() - 2);
        Some(self.eval_piece(k, t))
    }

    /// Evaluation that continues past the domain end with unit slope, i.e.
    /// keeping the travel time of the latest feasible departure. Used only to
    /// price horizon violations; `None` only for the infinite function.
    pub fn eval_extended(&self, t: f64) -> Option<f64> {
        let &(t_end, y_end) = self.points.last()?;
        if t > t_end {
            Some(y_end + (t - t_end))
        } else {
            self.eval(t.max(self.points[0].0))
        }
    }

    /// `min_t { f(t) - t }`, exact because the minimum sits on a breakpoint.
    pub fn min_gap(&self) -> f64 {
        self.points.iter().map(|&(t, y)| y - t).fold(f64::INFINITY, f64::min)
    }

    /// `max_t { f(t) - t }`.
    pub fn max_gap(&self) -> f64 {
        self.points.iter().map(|&(t, y)| y - t).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Number of adjacent breakpoint pairs whose values decrease.
    pub fn fifo_violations(&self) -> usize {
        self.points.windows(2).filter(|w| w[1].1 < w[0].1).count()
    }

    /// True when the two functions agree within `eps` on the union of their
    /// breakpoints and have the same domain.
    pub fn approx_eq(&self, other: &Self, eps: f64) -> bool {
        match (self.domain_end(), other.domain_end()) {
            (None, None) => return true,
            (Some(a), Some(b)) if (a - b).abs() <= eps => {}
            _ => return false,
        }
        let probe = |f: &Self, g: &Self| {
            f.points.iter().all(|&(t, _)| match (f.eval(t), g.eval(t)) {
                (Some(x), Some(y)) => (x - y).abs() <= eps,
                _ => true,
            })
        };
        probe(self, other) && probe(other, self)
    }

    /// Drops breakpoints lying on the line through their neighbours (within
    /// `tol`), checking every dropped point against the final segment.
    pub fn simplify(&mut self, tol: f64) {
        let pts = &self.points;
        if pts.len() <= 2 {
            return;
        }
        let mut out = Vec::with_capacity(pts.len());
        out.push(pts[0]);
        let mut anchor = 0;
        for i in 2..pts.len() {
            let (ta, ya) = pts[anchor];
            let (tc, yc) = pts[i];
            let collinear = tc > ta
                && pts[anchor + 1..i].iter().all(|&(tb, yb)| {
                    tb > ta && tb < tc && (ya + (tb - ta) * (yc - ya) / (tc - ta) - yb).abs() <= tol
                });
            if !collinear {
                out.push(pts[i - 1]);
                anchor = i - 1;
            }
        }
        out.push(*pts.last().unwrap());
        self.points = out;
    }
}

/// Appends a breakpoint, skipping exact repeats and keeping jumps.
fn push_point(points: &mut Vec<(f64, f64)>, t: f64, y: f64, eps: f64) {
    if let Some(&(lt, ly)) = points.last() {
        if t <= lt + eps * 1e-3 {
            if (y - ly).abs() <= eps {
                return;
            }
            points.push((lt, y));
            return;
        }
    }
    points.push((t, y));
}

fn merge_tolerance(horizon: f64) -> f64 {
    1e-3 * tolerance(horizon)
}

/// Closed-form arrival function of a link of length `distance` under speed
/// profile `v`, defined for departures in `[0, Φ⁻¹(horizon)]`.
///
/// Breakpoints are the speed breakpoints reachable as departures plus the
/// departures that arrive exactly on a speed breakpoint.
pub fn build_arrival_function(v: &SpeedFunction, distance: f64, horizon: f64) -> Result<ArrivalFunction, PlError> {
    if !(distance > 0.0) {
        return Err(PlError::InvalidQuery(format!("distance {distance} must be positive")));
    }
    let first_arrival = arrival_uncapped(v, distance, 0.0);
    if first_arrival > horizon {
        return Err(PlError::DegenerateHorizon { earliest_arrival: first_arrival, horizon });
    }
    let eps = tolerance(horizon);
    let last_departure = departure_query_iterative(v, distance, horizon)?;

    let mut raw = Vec::with_capacity(2 * v.breakpoints().len() + 2);
    raw.push((0.0, first_arrival));
    for &b in v.breakpoints().iter().take_while(|&&b| b <= last_departure) {
        raw.push((b, arrival_uncapped(v, distance, b)));
    }
    for &b in v.breakpoints().iter().filter(|&&b| b >= first_arrival && b <= horizon) {
        raw.push((departure_query_iterative(v, distance, b)?, b));
    }
    raw.push((last_departure, horizon));
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut points: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
    for (t, y) in raw {
        match points.last_mut() {
            Some(last) if t - last.0 <= eps => {
                // Keep the later time only when it is the domain end.
                if y >= horizon {
                    *last = (t, y);
                }
            }
            _ => points.push((t, y)),
        }
    }
    Ok(ArrivalFunction { points, horizon })
}

/// Pointwise minimum of two arrival functions (infinite outside their domains).
pub fn lower_envelope(f: &ArrivalFunction, g: &ArrivalFunction) -> ArrivalFunction {
    let horizon = f.horizon.max(g.horizon);
    if f.points.len() < 2 {
        return if g.points.len() < 2 && f.points.len() == 1 { f.clone() } else { g.clone() };
    }
    if g.points.len() < 2 {
        return f.clone();
    }
    let eps = tolerance(horizon);

    let mut times: Vec<f64> = f.points.iter().chain(g.points.iter()).map(|p| p.0).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();

    let line = |h: &ArrivalFunction, a: f64, b: f64| -> Option<(f64, f64)> {
        let (start, end) = (h.points[0].0, h.points.last().unwrap().0);
        let mid = 0.5 * (a + b);
        if mid < start || mid > end {
            return None;
        }
        let k = h.search_piece(mid, 0, h.points.len() - 2);
        let (t0, y0) = h.points[k];
        let (t1, y1) = h.points[k + 1];
        let slope = (y1 - y0) / (t1 - t0);
        Some((y0 + (a - t0) * slope, y0 + (b - t0) * slope))
    };

    let mut points = Vec::with_capacity(times.len() + 8);
    for w in times.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        match (line(f, a, b), line(g, a, b)) {
            (None, None) => {}
            (Some((ya, yb)), None) | (None, Some((ya, yb))) => {
                push_point(&mut points, a, ya, eps);
                push_point(&mut points, b, yb, eps);
            }
            (Some((fa, fb)), Some((ga, gb))) => {
                let (da, db) = (fa - ga, fb - gb);
                push_point(&mut points, a, fa.min(ga), eps);
                if (da > 0.0 && db < 0.0) || (da < 0.0 && db > 0.0) {
                    let s = da / (da - db);
                    let tc = a + (b - a) * s;
                    let yc = fa + (fb - fa) * s;
                    if tc > a && tc < b {
                        push_point(&mut points, tc, yc, eps);
                    }
                }
                push_point(&mut points, b, fb.min(gb), eps);
            }
        }
    }
    let mut result = ArrivalFunction { points, horizon };
    result.simplify(merge_tolerance(horizon));
    result
}

/// `outer ∘ inner`: arrival after traversing `inner` then `outer`. Infinite
/// wherever `inner` lands beyond the domain of `outer`.
pub fn compose(outer: &ArrivalFunction, inner: &ArrivalFunction) -> ArrivalFunction {
    let horizon = outer.horizon.max(inner.horizon);
    if outer.points.is_empty() || inner.points.is_empty() {
        return ArrivalFunction::infinite(horizon);
    }
    let eps = tolerance(horizon);
    let (o_start, o_end) = (outer.points[0].0, outer.points.last().unwrap().0);
    let outer_at = |y: f64| -> f64 {
        let y = y.clamp(o_start, o_end);
        if outer.points.len() == 1 {
            outer.points[0].1
        } else {
            outer.eval_piece(outer.search_piece(y, 0, outer.points.len() - 2), y)
        }
    };

    let mut points = Vec::with_capacity(inner.points.len() + outer.points.len());
    if inner.points.len() == 1 {
        let (t, y) = inner.points[0];
        if y >= o_start - eps && y <= o_end + eps {
            points.push((t, outer_at(y)));
        }
        return ArrivalFunction { points, horizon };
    }

    'segments: for w in inner.points.windows(2) {
        let ((t0, y0), (t1, y1)) = (w[0], w[1]);
        if y0 > o_end + eps {
            break;
        }
        if t1 <= t0 {
            // Jump in the inner function.
            push_point(&mut points, t1, outer_at(y1), eps);
            if y1 > o_end + eps {
                break;
            }
            continue;
        }
        let slope = (y1 - y0) / (t1 - t0);
        if slope <= 0.0 {
            if y0 >= o_start - eps {
                let v = outer_at(y0);
                push_point(&mut points, t0, v, eps);
                push_point(&mut points, t1, v, eps);
            }
            continue;
        }
        let preimage = |y: f64| (t0 + (y - y0) / slope).clamp(t0, t1);
        let lo_y = y0.max(o_start);
        if lo_y > y1 {
            continue;
        }
        let t_lo = if y0 < o_start { preimage(o_start) } else { t0 };
        push_point(&mut points, t_lo, outer_at(lo_y), eps);
        let first = outer.points.partition_point(|p| p.0 <= lo_y);
        for &(x, ox) in &outer.points[first..] {
            if x >= y1 {
                break;
            }
            push_point(&mut points, preimage(x), ox, eps);
        }
        if y1 > o_end {
            let t_hi = preimage(o_end);
            push_point(&mut points, t_hi, outer.points.last().unwrap().1, eps);
            break 'segments;
        }
        push_point(&mut points, t1, outer_at(y1), eps);
    }
    let mut result = ArrivalFunction { points, horizon };
    result.simplify(merge_tolerance(horizon));
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(points: &[(f64, f64)]) -> ArrivalFunction {
        ArrivalFunction::from_points(points.to_vec(), 10.0)
    }

    #[test]
    fn constant_speed_gives_one_piece() {
        let v = SpeedFunction::constant(2.0, 100.0).unwrap();
        let f = build_arrival_function(&v, 8.0, 100.0).unwrap();
        assert_eq!(f.points(), &[(0.0, 4.0), (96.0, 100.0)]);
    }

    #[test]
    fn degenerate_horizon_is_rejected() {
        let v = SpeedFunction::constant(1.0, 5.0).unwrap();
        assert!(matches!(
            build_arrival_function(&v, 6.0, 5.0),
            Err(PlError::DegenerateHorizon { .. })
        ));
    }

    #[test]
    fn envelope_single_crossing() {
        let f = line(&[(0.0, 2.0), (10.0, 12.0)]);
        let g = line(&[(0.0, 1.0), (10.0, 16.0)]);
        let e = lower_envelope(&f, &g);
        assert_eq!(e.points(), &[(0.0, 1.0), (2.0, 4.0), (10.0, 12.0)]);
        assert_eq!(lower_envelope(&f, &f), f);
    }

    #[test]
    fn envelope_with_infinite_returns_other() {
        let f = line(&[(0.0, 2.0), (10.0, 12.0)]);
        assert_eq!(lower_envelope(&f, &ArrivalFunction::infinite(10.0)), f);
        assert_eq!(lower_envelope(&ArrivalFunction::infinite(10.0), &f), f);
    }

    #[test]
    fn envelope_of_unequal_domains_jumps_up() {
        let f = line(&[(0.0, 1.0), (4.0, 5.0)]);
        let g = line(&[(0.0, 3.0), (10.0, 13.0)]);
        let e = lower_envelope(&f, &g);
        assert_eq!(e.eval(4.0), Some(5.0));
        assert_eq!(e.eval(5.0), Some(8.0));
        assert_eq!(e.fifo_violations(), 0);
    }

    #[test]
    fn affine_composition() {
        let outer = ArrivalFunction::shift(3.0, 50.0, 100.0);
        let inner = ArrivalFunction::from_points(vec![(0.0, 1.0), (4.0, 9.0)], 100.0);
        let c = compose(&outer, &inner);
        assert_eq!(c.points(), &[(0.0, 4.0), (4.0, 12.0)]);
        let id = ArrivalFunction::identity(100.0);
        assert_eq!(compose(&outer, &id), outer);
    }

    #[test]
    fn composition_truncates_past_outer_domain() {
        let outer = ArrivalFunction::shift(1.0, 5.0, 10.0);
        let inner = ArrivalFunction::shift(2.0, 8.0, 10.0);
        let c = compose(&outer, &inner);
        assert_eq!(c.points(), &[(0.0, 3.0), (3.0, 6.0)]);
        assert!(c.eval(3.5).is_none());
    }

    #[test]
    fn min_gap_scans_breakpoints() {
        let f = line(&[(0.0, 6.0), (5.0, 9.0), (8.0, 13.0)]);
        assert_eq!(f.min_gap(), 4.0);
        assert_eq!(ArrivalFunction::shift(4.0, 5.0, 10.0).min_gap(), 4.0);
    }

    #[test]
    fn simplify_merges_collinear_points() {
        let mut f = line(&[(0.0, 1.0), (1.0, 2.0), (2.0, 3.0), (3.0, 5.0)]);
        f.simplify(1e-12);
        assert_eq!(f.points(), &[(0.0, 1.0), (2.0, 3.0), (3.0, 5.0)]);
    }
}
