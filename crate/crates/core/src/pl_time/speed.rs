use serde::{Deserialize, Serialize};

use super::PlError;

/// Piecewise-constant, strictly positive speed profile of one oriented link.
///
/// Piece `k` covers `[breakpoints[k-1], breakpoints[k])`; the first piece
/// starts at time 0 and the last piece extends past the horizon indefinitely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedFunction {
    breakpoints: Vec<f64>,
    speeds: Vec<f64>,
    horizon: f64,
}

impl SpeedFunction {
    pub fn new(breakpoints: Vec<f64>, speeds: Vec<f64>, horizon: f64) -> Result<Self, PlError> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(PlError::InvalidSpeed(format!("horizon must be positive, got {horizon}")));
        }
        if speeds.len() != breakpoints.len() + 1 {
            return Err(PlError::InvalidSpeed(format!(
                "{} breakpoints need {} speeds, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                speeds.len()
            )));
        }
        if let Some(s) = speeds.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(PlError::InvalidSpeed(format!("speed {s} is not positive and finite")));
        }
        let mut prev = 0.0;
        for &b in &breakpoints {
            if !(b > prev && b < horizon) {
                return Err(PlError::InvalidSpeed(format!(
                    "breakpoint {b} is not strictly increasing inside (0, {horizon})"
                )));
            }
            prev = b;
        }
        Ok(Self { breakpoints, speeds, horizon })
    }

    pub fn constant(speed: f64, horizon: f64) -> Result<Self, PlError> {
        Self::new(Vec::new(), vec![speed], horizon)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn piece_count(&self) -> usize {
        self.speeds.len()
    }

    pub fn max_speed(&self) -> f64 {
        self.speeds.iter().copied().fold(f64::MIN, f64::max)
    }

    pub fn min_speed(&self) -> f64 {
        self.speeds.iter().copied().fold(f64::MAX, f64::min)
    }

    /// Speed just after `t`, i.e. `v(t+)`.
    pub fn speed_after(&self, t: f64) -> f64 {
        self.speeds[self.breakpoints.partition_point(|&b| b <= t)]
    }

    /// Speed just before `t`, i.e. `v(t-)`.
    pub fn speed_before(&self, t: f64) -> f64 {
        self.speeds[self.breakpoints.partition_point(|&b| b < t)]
    }

    /// Same breakpoints, every speed multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, PlError> {
        Self::new(
            self.breakpoints.clone(),
            self.speeds.iter().map(|s| s * factor).collect(),
            self.horizon,
        )
    }

    /// Same speeds with a different horizon. Breakpoints at or beyond the new
    /// horizon are dropped together with the pieces they open.
    pub fn with_horizon(&self, horizon: f64) -> Result<Self, PlError> {
        let keep = self.breakpoints.partition_point(|&b| b < horizon);
        Self::new(
            self.breakpoints[..keep].to_vec(),
            self.speeds[..=keep].to_vec(),
            horizon,
        )
    }

    /// Time-average of the speed over `[0, horizon]`.
    pub fn mean_speed(&self) -> f64 {
        let mut start = 0.0;
        let mut acc = 0.0;
        for (k, &s) in self.speeds.iter().enumerate() {
            let end = self.breakpoints.get(k).copied().unwrap_or(self.horizon);
            acc += s * (end - start);
            start = end;
        }
        acc / self.horizon
    }
}

/// Arrival time when covering `distance` from `departure` (no cap).
pub(crate) fn arrival_uncapped(v: &SpeedFunction, distance: f64, departure: f64) -> f64 {
    let bps = &v.breakpoints;
    let mut t = departure;
    let mut remaining = distance;
    let mut piece = bps.partition_point(|&b| b <= t);
    loop {
        let speed = v.speeds[piece];
        let arrival = t + remaining / speed;
        match bps.get(piece) {
            Some(&next) if arrival > next => {
                remaining -= speed * (next - t);
                t = next;
                piece += 1;
            }
            _ => return arrival,
        }
    }
}

/// Iterative arrival-time query: walks the speed pieces from `departure`
/// until `distance` is covered. Linear in the number of pieces.
pub fn arrival_query_iterative(v: &SpeedFunction, distance: f64, departure: f64) -> Result<f64, PlError> {
    if !(distance > 0.0) || departure < 0.0 {
        return Err(PlError::InvalidQuery(format!(
            "distance {distance} must be positive and departure {departure} nonnegative"
        )));
    }
    let arrival = arrival_uncapped(v, distance, departure);
    let cap = 2.0 * v.horizon;
    if arrival > cap {
        return Err(PlError::ArrivalBeyondHorizon { departure, cap });
    }
    Ok(arrival)
}

/// Iterative departure-time query: latest departure that arrives exactly at
/// `arrival` after covering `distance`.
pub fn departure_query_iterative(v: &SpeedFunction, distance: f64, arrival: f64) -> Result<f64, PlError> {
    if !(distance > 0.0) || !(arrival > 0.0) {
        return Err(PlError::InvalidQuery(format!(
            "distance {distance} and arrival {arrival} must be positive"
        )));
    }
    if arrival_uncapped(v, distance, 0.0) > arrival {
        return Err(PlError::DepartureBeforeZero { arrival });
    }
    let bps = &v.breakpoints;
    let mut t = arrival;
    let mut remaining = distance;
    let mut piece = bps.partition_point(|&b| b < t);
    loop {
        let speed = v.speeds[piece];
        let departure = t - remaining / speed;
        if piece > 0 && departure < bps[piece - 1] {
            let prev = bps[piece - 1];
            remaining -= speed * (t - prev);
            t = prev;
            piece -= 1;
        } else {
            return Ok(departure.max(0.0));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step() -> SpeedFunction {
        SpeedFunction::new(vec![5.0], vec![1.0, 2.0], 20.0).unwrap()
    }

    #[test]
    fn arrival_crosses_one_breakpoint() {
        assert_eq!(arrival_query_iterative(&step(), 6.0, 0.0).unwrap(), 5.5);
    }

    #[test]
    fn constant_speed_arrival_and_departure() {
        let v = SpeedFunction::constant(2.0, 20.0).unwrap();
        for t in [0.0, 1.5, 7.0] {
            assert_eq!(arrival_query_iterative(&v, 4.0, t).unwrap(), t + 2.0);
        }
        assert_eq!(departure_query_iterative(&v, 4.0, 10.0).unwrap(), 8.0);
    }

    #[test]
    fn departure_inverts_the_step_example() {
        assert_eq!(departure_query_iterative(&step(), 6.0, 5.5).unwrap(), 0.0);
        let x = departure_query_iterative(&step(), 6.0, 9.0).unwrap();
        assert!((arrival_query_iterative(&step(), 6.0, x).unwrap() - 9.0).abs() < 1e-12);
    }

    #[test]
    fn departure_before_zero_is_rejected() {
        assert!(matches!(
            departure_query_iterative(&step(), 6.0, 5.0),
            Err(PlError::DepartureBeforeZero { .. })
        ));
    }

    #[test]
    fn arrival_past_cap_is_rejected() {
        let v = SpeedFunction::constant(1.0, 10.0).unwrap();
        assert!(matches!(
            arrival_query_iterative(&v, 15.0, 6.0),
            Err(PlError::ArrivalBeyondHorizon { .. })
        ));
    }

    #[test]
    fn invalid_profiles_are_rejected() {
        assert!(SpeedFunction::new(vec![3.0, 2.0], vec![1.0; 3], 10.0).is_err());
        assert!(SpeedFunction::new(vec![10.0], vec![1.0; 2], 10.0).is_err());
        assert!(SpeedFunction::new(vec![], vec![0.0], 10.0).is_err());
        assert!(SpeedFunction::new(vec![1.0], vec![1.0], 10.0).is_err());
    }

    #[test]
    fn mean_speed_weights_by_duration() {
        assert!((step().mean_speed() - (5.0 + 30.0) / 20.0).abs() < 1e-12);
    }
}
