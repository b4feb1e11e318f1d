//! Cross-entropy learning towards dynamic user equilibrium.
//!
//! Each iteration, every passenger samples a departure window and a path
//! from per-OD probability distributions, the loading is simulated, and the
//! distributions are tilted multiplicatively towards cheaper alternatives.
//! The tilt temperature is chosen each iteration as the smallest value whose
//! induced update stays inside an L1 trust region that shrinks as `kappa/w`,
//! so early iterations move aggressively and later ones settle.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::equilibrium::{
    build_validation, estimate_unused_cost, gap_stabilized, relative_gap, CostAggregate,
    EquilibriumRun, IterStats,
};
use crate::error::Result;
use crate::network::FrequencyVector;
use crate::rng::{derive, TAG_CHOICE, TAG_SIM};
use crate::scenario::Problem;
use crate::sim::{simulate, AssignmentState};

/// Smallest representable probability kept for alternatives that still carry
/// mass; prevents the multiplicative update from flooring a live alternative
/// to exactly zero, which could never recover.
const PROB_FLOOR: f64 = 1e-300;

/// Per-OD departure-window and path choice distributions.
#[derive(Debug, Clone)]
pub struct ChoiceState {
    pub window_probs: Vec<Vec<f64>>,
    pub path_probs: Vec<Vec<f64>>,
    pub iteration: usize,
    pub kappa: f64,
    pub w_max: usize,
}

impl ChoiceState {
    pub fn uniform(problem: &Problem, kappa: f64, w_max: usize) -> ChoiceState {
        let windows = problem.horizon.windows;
        ChoiceState {
            window_probs: problem
                .paths
                .iter()
                .map(|_| vec![1.0 / windows as f64; windows])
                .collect(),
            path_probs: problem
                .paths
                .iter()
                .map(|paths| vec![1.0 / paths.len() as f64; paths.len()])
                .collect(),
            iteration: 0,
            kappa,
            w_max,
        }
    }
}

/// Multiplicative-exponential probability update: each alternative's mass is
/// scaled by `exp(-cost/temperature)` and the result renormalized. Computed
/// in log space; alternatives with zero mass stay at zero.
pub fn update_probabilities(probs: &[f64], costs: &[f64], temperature: f64) -> Vec<f64> {
    assert!(temperature > 0.0, "temperature must be positive");
    assert_eq!(probs.len(), costs.len());
    let mut logw: Vec<f64> = probs
        .iter()
        .zip(costs)
        .map(|(&p, &c)| {
            if p > 0.0 {
                p.ln() - c / temperature
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let max = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(max.is_finite(), "distribution has no mass");
    let lse = max
        + logw
            .iter()
            .map(|&w| (w - max).exp())
            .sum::<f64>()
            .ln();
    for w in &mut logw {
        *w = (*w - lse).exp();
    }
    // keep live alternatives representable and renormalize
    let mut sum = 0.0;
    for (w, &p) in logw.iter_mut().zip(probs) {
        if p > 0.0 && *w < PROB_FLOOR {
            *w = PROB_FLOOR;
        }
        sum += *w;
    }
    for w in &mut logw {
        *w /= sum;
    }
    logw
}

fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Smallest temperature in a wide bracket whose probability update moves the
/// distribution by at most `l1_budget` in L1 distance. The distance shrinks
/// towards zero as the temperature grows, so the feasible set is a right
/// half-interval; a monotonicity check at the bracket ends guards the
/// bisection, with a logarithmic grid scan as fallback.
pub fn solve_temperature(probs: &[f64], costs: &[f64], l1_budget: f64) -> f64 {
    assert!(l1_budget > 0.0, "budget must be positive");
    let scale = costs.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
    let cmin = costs.iter().cloned().fold(f64::INFINITY, f64::min);
    let cmax = costs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo_bracket = 1e-4 * scale;
    let hi_bracket = 1e6 * scale;
    if scale == 0.0 || cmax - cmin <= 1e-15 * scale {
        // all costs equal: the update is the identity for any temperature
        return lo_bracket.max(f64::MIN_POSITIVE);
    }

    let dist = |gamma: f64| l1_distance(&update_probabilities(probs, costs, gamma), probs);

    if dist(lo_bracket) <= l1_budget {
        return lo_bracket;
    }
    let mut lo = lo_bracket;
    let mut hi = hi_bracket;
    if dist(hi) > l1_budget {
        // cannot happen for a true L1 distance (it vanishes as gamma grows);
        // treat as already-converged rather than looping
        debug_assert!(false, "L1 distance does not vanish at the upper bracket");
        return hi;
    }
    if dist(lo) < dist(hi) {
        // monotonicity violated at the bracket ends: locate a feasible
        // transition by log grid scan, then bisect inside it
        let steps = 128;
        let ratio = (hi / lo).ln() / steps as f64;
        let mut prev = lo;
        for i in 1..=steps {
            let g = lo * (ratio * i as f64).exp();
            if dist(g) <= l1_budget {
                lo = prev;
                hi = g;
                break;
            }
            prev = g;
        }
    }
    // log-space bisection keeping `hi` feasible
    while hi / lo > 1.0 + 1e-12 {
        let mid = (lo * hi).sqrt();
        if dist(mid) <= l1_budget {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn sample_index<R: Rng>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut cum = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        cum += p;
        if u < cum {
            return i;
        }
    }
    // numerical tail: last alternative with mass
    probs
        .iter()
        .rposition(|&p| p > 0.0)
        .expect("distribution has mass")
}

/// Sample every passenger's (window, path) pair from the current choice state.
pub fn sample_assignment(
    problem: &Problem,
    state: &ChoiceState,
    seed: u64,
) -> AssignmentState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let paths_per_od: Vec<usize> = problem.paths.iter().map(|p| p.len()).collect();
    let mut assignment = AssignmentState::zeros(&paths_per_od, problem.horizon.windows);
    for (od, demand) in problem.demands.iter().enumerate() {
        for _ in 0..*demand {
            let h = sample_index(&state.window_probs[od], &mut rng);
            let r = sample_index(&state.path_probs[od], &mut rng);
            assignment.counts[od][h][r] += 1;
        }
    }
    assignment
}

/// Mean experienced cost per departure window for one OD; windows without
/// served samples fall back to the cheapest path estimate for that window.
fn window_costs(
    problem: &Problem,
    freqs: &FrequencyVector,
    agg: &CostAggregate,
    od: usize,
) -> Vec<f64> {
    (0..problem.horizon.windows)
        .map(|h| {
            agg.window_mean(od, h).unwrap_or_else(|| {
                (0..problem.paths[od].len())
                    .map(|r| estimate_unused_cost(problem, freqs, od, h, r))
                    .fold(f64::INFINITY, f64::min)
            })
        })
        .collect()
}

/// Mean experienced cost per path for one OD; unused paths fall back to
/// their cheapest per-window estimate.
fn path_costs(
    problem: &Problem,
    freqs: &FrequencyVector,
    agg: &CostAggregate,
    od: usize,
) -> Vec<f64> {
    (0..problem.paths[od].len())
        .map(|r| {
            agg.path_mean(od, r).unwrap_or_else(|| {
                (0..problem.horizon.windows)
                    .map(|h| estimate_unused_cost(problem, freqs, od, h, r))
                    .fold(f64::INFINITY, f64::min)
            })
        })
        .collect()
}

/// Run cross-entropy learning for up to `w_max` iterations (stopping early
/// once the gap trajectory stabilizes) and return the final loading with the
/// gap trajectory.
pub fn ce_equilibrium(
    problem: &Problem,
    freqs: &FrequencyVector,
    w_max: usize,
    seed: u64,
) -> Result<EquilibriumRun> {
    ce_equilibrium_opts(problem, freqs, w_max, seed, true)
}

/// As [`ce_equilibrium`], with the stabilization stop switchable so
/// experiments can record a full fixed-length trajectory.
pub fn ce_equilibrium_opts(
    problem: &Problem,
    freqs: &FrequencyVector,
    w_max: usize,
    seed: u64,
    early_stop: bool,
) -> Result<EquilibriumRun> {
    let mut state = ChoiceState::uniform(problem, problem.kappa, w_max);
    let mut gaps = Vec::new();
    let mut stats = Vec::new();
    let mut last: Option<(AssignmentState, crate::sim::SimOutput, CostAggregate)> = None;

    for w in 1..=w_max {
        let started = Instant::now();
        let assignment = sample_assignment(problem, &state, derive(seed, TAG_CHOICE, w as u64));
        let out = simulate(
            &problem.network,
            freqs,
            &assignment,
            &problem.paths,
            &problem.params,
            &problem.horizon,
            derive(seed, TAG_SIM, w as u64),
        )?;
        let agg = CostAggregate::from_records(problem, &out.records);
        gaps.push(relative_gap(problem, freqs, &agg, w));

        let budget = state.kappa / w as f64;
        for od in 0..problem.paths.len() {
            let wc = window_costs(problem, freqs, &agg, od);
            let gamma = solve_temperature(&state.window_probs[od], &wc, budget);
            let updated = update_probabilities(&state.window_probs[od], &wc, gamma);
            debug_assert!(l1_distance(&updated, &state.window_probs[od]) <= budget + 1e-6);
            state.window_probs[od] = updated;

            let pc = path_costs(problem, freqs, &agg, od);
            let gamma = solve_temperature(&state.path_probs[od], &pc, budget);
            let updated = update_probabilities(&state.path_probs[od], &pc, gamma);
            debug_assert!(l1_distance(&updated, &state.path_probs[od]) <= budget + 1e-6);
            state.path_probs[od] = updated;
        }
        state.iteration = w;

        stats.push(IterStats {
            iteration: w,
            gap: gaps.last().unwrap().gap,
            total_cost: out.records.iter().filter_map(|r| r.cost).sum(),
            wall_s: started.elapsed().as_secs_f64(),
            unserved: out.unserved,
        });
        last = Some((assignment, out, agg));

        if early_stop && w < w_max && gap_stabilized(&gaps, 1e-3) {
            break;
        }
    }

    let (assignment, out, agg) = last.expect("at least one iteration runs");
    let validation = build_validation(problem, freqs, &agg);
    Ok(EquilibriumRun {
        assignment,
        records: out.records,
        gaps,
        stats,
        validation,
        link_times: out.link_times,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn equal_costs_leave_distribution_unchanged() {
        let p = vec![0.3, 0.2, 0.5];
        let p2 = update_probabilities(&p, &[4.0, 4.0, 4.0], 1.0);
        for (a, b) in p.iter().zip(&p2) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn two_alternative_update_matches_closed_form() {
        let p2 = update_probabilities(&[0.5, 0.5], &[1.0, 2.0], 1.0);
        assert_relative_eq!(p2[0], 1.0 / (1.0 + (-1.0f64).exp()), max_relative = 1e-12);
        assert!((p2[0] - 0.7311).abs() < 1e-4);
        assert!((p2[1] - 0.2689).abs() < 1e-4);
    }

    #[test]
    fn huge_temperature_is_identity() {
        let p = vec![0.5, 0.5];
        let p2 = update_probabilities(&p, &[1.0, 2.0], 1e9);
        assert!((p2[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn zero_mass_alternatives_stay_at_zero() {
        let p2 = update_probabilities(&[0.7, 0.0, 0.3], &[1.0, 0.1, 2.0], 1.0);
        assert_eq!(p2[1], 0.0);
        assert!((p2.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn temperature_equal_costs_returns_bracket_floor() {
        let g = solve_temperature(&[0.5, 0.5], &[3.0, 3.0], 0.2);
        assert_relative_eq!(g, 1e-4 * 3.0, max_relative = 1e-9);
    }

    #[test]
    fn temperature_two_alternatives_closed_form() {
        // moving (0.5,0.5) to (0.6,0.4) costs exactly 0.2 in L1 and needs
        // gamma = 1 / ln(1.5)
        let g = solve_temperature(&[0.5, 0.5], &[1.0, 2.0], 0.2);
        assert_relative_eq!(g, 1.0 / 1.5f64.ln(), max_relative = 1e-9);
        let p2 = update_probabilities(&[0.5, 0.5], &[1.0, 2.0], g);
        assert!((p2[0] - 0.6).abs() < 1e-9);
    }

    #[test]
    fn temperature_slack_budget_returns_bracket_floor() {
        let g = solve_temperature(&[0.5, 0.5], &[1.0, 2.0], 1e6);
        assert_relative_eq!(g, 1e-4 * 2.0, max_relative = 1e-9);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_dist(n: usize) -> impl Strategy<Value = Vec<f64>> {
            proptest::collection::vec(0.05f64..1.0, n).prop_map(|raw| {
                let sum: f64 = raw.iter().sum();
                raw.into_iter().map(|x| x / sum).collect()
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn update_preserves_normalization(
                p in arb_dist(5),
                costs in proptest::collection::vec(0.0f64..50.0, 5),
                gamma in 0.01f64..100.0,
            ) {
                let p2 = update_probabilities(&p, &costs, gamma);
                prop_assert!((p2.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
                prop_assert!(p2.iter().all(|&x| x >= 0.0));
            }

            #[test]
            fn update_moves_towards_unique_cheapest(
                p in arb_dist(4),
                mut costs in proptest::collection::vec(1.0f64..50.0, 4),
                gamma in 0.05f64..50.0,
            ) {
                // force a unique minimum
                costs[2] = 0.5;
                let p2 = update_probabilities(&p, &costs, gamma);
                prop_assert!(p2[2] > p[2], "cheapest alternative must gain mass");
            }

            #[test]
            fn trust_region_is_respected(
                p in arb_dist(6),
                costs in proptest::collection::vec(0.0f64..100.0, 6),
                budget in 0.01f64..1.9,
            ) {
                let gamma = solve_temperature(&p, &costs, budget);
                let p2 = update_probabilities(&p, &costs, gamma);
                prop_assert!(l1_distance(&p2, &p) <= budget + 1e-6);
            }

            #[test]
            fn solved_temperature_is_minimal(
                p in arb_dist(4),
                costs in proptest::collection::vec(0.0f64..20.0, 4),
                budget in 0.05f64..1.5,
            ) {
                let gamma = solve_temperature(&p, &costs, budget);
                let lo = 1e-4 * costs.iter().cloned().fold(0.0f64, f64::max);
                if gamma > lo * (1.0 + 1e-9) {
                    // just below the solution the budget must be violated
                    let g2 = gamma / (1.0 + 1e-6);
                    let p2 = update_probabilities(&p, &costs, g2);
                    prop_assert!(l1_distance(&p2, &p) > budget - 1e-9);
                }
            }
        }
    }
}
