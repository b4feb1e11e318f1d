//! Generalized travel cost and schedule-delay penalty.

/// Behavioural cost parameters. Rates are monetary units per hour, times are
/// clock seconds since midnight.
#[derive(Debug, Clone, PartialEq)]
pub struct CostParams {
    /// Value of travel time (monetary units per hour of walk/wait/ride).
    pub value_of_time: f64,
    /// Penalty per mode change.
    pub transfer_penalty: f64,
    /// Penalty rate per hour of early arrival.
    pub early_penalty: f64,
    /// Penalty rate per hour of late arrival.
    pub late_penalty: f64,
    /// Desired arrival time at the destination, seconds since midnight.
    pub desired_arrival_s: f64,
    /// Half of the tolerable schedule-delay interval, seconds.
    pub tolerance_s: f64,
    /// Flat fare applied to every path unless overridden.
    pub default_fare: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            value_of_time: 7.0,
            transfer_penalty: 0.0,
            early_penalty: 4.0,
            late_penalty: 15.0,
            desired_arrival_s: 9.0 * 3600.0,
            tolerance_s: 300.0,
            default_fare: 0.0,
        }
    }
}

/// Schedule-delay penalty for arriving at `arrival_s`: zero inside the
/// tolerance window around the desired arrival, otherwise linear in the
/// early/late excess at the respective hourly rate.
pub fn schedule_penalty(arrival_s: f64, params: &CostParams) -> f64 {
    let early = (params.desired_arrival_s - params.tolerance_s - arrival_s).max(0.0);
    let late = (arrival_s - params.desired_arrival_s - params.tolerance_s).max(0.0);
    params.early_penalty * early / 3600.0 + params.late_penalty * late / 3600.0
}

/// Time and money components of one realized (or estimated) trip.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostComponents {
    pub walk_s: f64,
    pub invehicle_s: f64,
    pub wait_s: f64,
    pub transfers: u32,
    pub penalty: f64,
    pub fare: f64,
}

/// Generalized travel cost: monetized travel time plus transfer penalty,
/// schedule-delay penalty and fare.
pub fn generalized_cost(c: &CostComponents, params: &CostParams) -> f64 {
    params.value_of_time * (c.walk_s + c.invehicle_s + c.wait_s) / 3600.0
        + c.transfers as f64 * params.transfer_penalty
        + c.penalty
        + c.fare
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> CostParams {
        CostParams::default()
    }

    #[test]
    fn penalty_zero_inside_tolerance() {
        let p = params();
        assert_eq!(schedule_penalty(p.desired_arrival_s, &p), 0.0);
        assert_eq!(schedule_penalty(p.desired_arrival_s - 300.0, &p), 0.0);
        assert_eq!(schedule_penalty(p.desired_arrival_s + 300.0, &p), 0.0);
    }

    #[test]
    fn penalty_early_ten_minutes() {
        // 08:50 against a 09:00 target with 300 s tolerance: 300 s excess
        let p = params();
        assert_relative_eq!(
            schedule_penalty(8.0 * 3600.0 + 50.0 * 60.0, &p),
            4.0 * 300.0 / 3600.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn penalty_late_ten_minutes() {
        let p = params();
        assert_relative_eq!(
            schedule_penalty(9.0 * 3600.0 + 10.0 * 60.0, &p),
            15.0 * 300.0 / 3600.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn cost_zero_for_zero_components() {
        assert_eq!(generalized_cost(&CostComponents::default(), &params()), 0.0);
    }

    #[test]
    fn cost_pure_travel_time() {
        let c = CostComponents {
            walk_s: 600.0,
            invehicle_s: 1800.0,
            wait_s: 300.0,
            ..Default::default()
        };
        assert_relative_eq!(generalized_cost(&c, &params()), 5.25, max_relative = 1e-12);
    }

    #[test]
    fn cost_with_late_arrival() {
        let p = params();
        let c = CostComponents {
            walk_s: 600.0,
            invehicle_s: 1800.0,
            wait_s: 300.0,
            penalty: schedule_penalty(9.0 * 3600.0 + 600.0, &p),
            ..Default::default()
        };
        assert_relative_eq!(generalized_cost(&c, &p), 6.50, max_relative = 1e-12);
    }
}
