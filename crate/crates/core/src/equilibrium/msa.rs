//! Method of successive averages towards dynamic user equilibrium.
//!
//! Demand starts on the cheapest departure windows of the free-flow shortest
//! path, capped by the path's per-window passenger throughput. Each
//! iteration the loading is simulated, experienced link times are fed back
//! into time-dependent best paths, and the time-dependent demand and path
//! flows are averaged towards the current best responses with step
//! `1/(w+1)`. Fractional flows are apportioned back to integers by largest
//! remainder so flow conservation holds exactly at every iteration.

use std::time::Instant;

use crate::cost::schedule_penalty;
use crate::equilibrium::{
    build_validation, estimate_unused_cost, gap_stabilized, relative_gap, CostAggregate,
    EquilibriumRun, IterStats,
};
use crate::error::Result;
use crate::network::FrequencyVector;
use crate::paths::{LinkTimeTable, TransitPath};
use crate::rng::{derive, TAG_SIM};
use crate::scenario::Problem;
use crate::sim::{simulate, AssignmentState};
use crate::time::{ms_to_s, TimeMs};

/// Iteration state of the averaging scheme.
#[derive(Debug, Clone)]
pub struct MsaState {
    /// Current best path per (od, window).
    pub current_shortest: Vec<Vec<usize>>,
    /// Paths that have ever been a best response, per (od, window).
    pub shortest_sets: Vec<Vec<Vec<usize>>>,
    /// Fractional time-dependent demand per (od, window).
    pub demand: Vec<Vec<f64>>,
    /// Windows that have ever received demand, per od.
    pub used_windows: Vec<Vec<usize>>,
    /// Fractional path shares per (od, window).
    pub shares: Vec<Vec<Vec<f64>>>,
    /// Integerized loading handed to the simulator.
    pub flows: AssignmentState,
    pub iteration: usize,
}

/// Integer apportionment by largest remainder: the result sums to `total`
/// exactly and is proportional to `weights` up to rounding.
pub fn largest_remainder(weights: &[f64], total: u32) -> Vec<u32> {
    let mut out = vec![0u32; weights.len()];
    if total == 0 || weights.is_empty() {
        return out;
    }
    let sum: f64 = weights.iter().sum();
    assert!(sum > 0.0, "cannot apportion over zero weights");
    let mut fracs: Vec<(f64, usize)> = Vec::with_capacity(weights.len());
    let mut assigned = 0u32;
    for (i, &w) in weights.iter().enumerate() {
        let quota = w / sum * total as f64;
        let base = quota.floor() as u32;
        out[i] = base;
        assigned += base;
        fracs.push((quota - base as f64, i));
    }
    // distribute the remainder to the largest fractional parts; ties go to
    // the lower index for determinism
    fracs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut left = total - assigned;
    for (_, i) in fracs {
        if left == 0 {
            break;
        }
        out[i] += 1;
        left -= 1;
    }
    out
}

/// Averaging update of the time-dependent demand (step `1/(w+1)`): known
/// windows shrink by `w/(w+1)`; the current best window receives `total/(w+1)`
/// on top of its share when already used, or as its whole allocation when new.
pub fn update_demand(
    demand: &mut [f64],
    used: &mut Vec<usize>,
    best: usize,
    w: usize,
    total: f64,
) {
    let keep = w as f64 / (w + 1) as f64;
    let step = total / (w + 1) as f64;
    if used.contains(&best) {
        for (h, d) in demand.iter_mut().enumerate() {
            if h != best {
                *d *= keep;
            }
        }
        demand[best] = keep * demand[best] + step;
    } else {
        for d in demand.iter_mut() {
            *d *= keep;
        }
        demand[best] = step;
        used.push(best);
        used.sort_unstable();
    }
}

/// Averaging update of path shares within one (od, window) cell, mirroring
/// the demand update with the best path as the target.
fn update_shares(shares: &mut [f64], set: &mut Vec<usize>, best: usize, w: usize) {
    let keep = w as f64 / (w + 1) as f64;
    let step = 1.0 / (w + 1) as f64;
    if set.contains(&best) {
        for (r, s) in shares.iter_mut().enumerate() {
            if r != best {
                *s *= keep;
            }
        }
        shares[best] = keep * shares[best] + step;
    } else {
        for s in shares.iter_mut() {
            *s *= keep;
        }
        shares[best] = step;
        set.push(best);
        set.sort_unstable();
    }
}

/// Arrival time travelling `path` from `depart_ms` under experienced link
/// times (free flow where no observation exists).
fn experienced_arrival(
    problem: &Problem,
    table: &LinkTimeTable,
    path: &TransitPath,
    depart_ms: TimeMs,
) -> TimeMs {
    let mut t = depart_ms;
    for &arc in &path.arcs {
        t += table.traverse_ms(&problem.network, arc, t);
    }
    t
}

/// Best candidate path per (od, window) under the experienced times.
fn best_paths_by_time(problem: &Problem, table: &LinkTimeTable) -> Vec<Vec<usize>> {
    (0..problem.paths.len())
        .map(|od| {
            (0..problem.horizon.windows)
                .map(|h| {
                    let depart = problem.horizon.window_start_ms(h);
                    let mut best = 0;
                    let mut best_t = TimeMs::MAX;
                    for (r, path) in problem.paths[od].iter().enumerate() {
                        let t = experienced_arrival(problem, table, path, depart);
                        if t < best_t {
                            best_t = t;
                            best = r;
                        }
                    }
                    best
                })
                .collect()
        })
        .collect()
}

/// Per-window passenger throughput of a path: the tightest line leg's
/// capacity times its vehicles per window, floored. Walk-only paths are
/// unconstrained.
fn path_window_throughput(
    problem: &Problem,
    freqs: &FrequencyVector,
    path: &TransitPath,
) -> Option<u32> {
    let window_s = ms_to_s(problem.horizon.window_ms);
    path.legs
        .iter()
        .map(|leg| {
            let line = &problem.network.lines[leg.line];
            let headway = freqs.headway_s(&line.printed).expect("frequency declared");
            line.capacity as f64 * window_s / headway
        })
        .fold(None, |acc: Option<f64>, q| {
            Some(acc.map_or(q, |a| a.min(q)))
        })
        .map(|q| q.floor() as u32)
}

fn integerize(state: &mut MsaState, problem: &Problem) {
    let paths_per_od: Vec<usize> = problem.paths.iter().map(|p| p.len()).collect();
    let mut flows = AssignmentState::zeros(&paths_per_od, problem.horizon.windows);
    for od in 0..problem.paths.len() {
        let d_int = largest_remainder(&state.demand[od], problem.demands[od]);
        for h in 0..problem.horizon.windows {
            if d_int[h] == 0 {
                continue;
            }
            let f = largest_remainder(&state.shares[od][h], d_int[h]);
            flows.counts[od][h] = f;
        }
    }
    state.flows = flows;
}

/// Free-flow initialization: demand spread uniformly over the `s` cheapest
/// departure windows of the free-flow best path, where `s` is the smallest
/// count of windows whose combined throughput covers the OD demand.
pub fn msa_initialize(problem: &Problem, freqs: &FrequencyVector) -> MsaState {
    let n_od = problem.paths.len();
    let windows = problem.horizon.windows;
    let mut state = MsaState {
        current_shortest: vec![Vec::new(); n_od],
        shortest_sets: vec![Vec::new(); n_od],
        demand: vec![vec![0.0; windows]; n_od],
        used_windows: vec![Vec::new(); n_od],
        shares: (0..n_od)
            .map(|od| vec![vec![0.0; problem.paths[od].len()]; windows])
            .collect(),
        flows: AssignmentState::zeros(
            &problem.paths.iter().map(|p| p.len()).collect::<Vec<_>>(),
            windows,
        ),
        iteration: 0,
    };

    for od in 0..n_od {
        let paths = &problem.paths[od];
        let best = (0..paths.len())
            .min_by(|&a, &b| {
                paths[a]
                    .cost_basis(&problem.params)
                    .partial_cmp(&paths[b].cost_basis(&problem.params))
                    .unwrap()
            })
            .expect("OD pairs with demand have candidate paths");
        state.current_shortest[od] = vec![best; windows];
        state.shortest_sets[od] = (0..windows).map(|_| vec![best]).collect();

        // estimated cost per window on the best path when departing at the
        // window start: free-flow basis plus the schedule penalty
        let path = &paths[best];
        let basis = path.cost_basis(&problem.params);
        let mut order: Vec<(f64, usize)> = (0..windows)
            .map(|h| {
                let depart = ms_to_s(problem.horizon.window_start_ms(h));
                let arrive = depart + path.free_flow_walk_s + path.free_flow_invehicle_s;
                (basis + schedule_penalty(arrive, &problem.params), h)
            })
            .collect();
        order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));

        let demand = problem.demands[od];
        if demand == 0 {
            continue;
        }
        let s = match path_window_throughput(problem, freqs, path) {
            Some(q) if q > 0 => ((demand / q.max(1)) as usize).clamp(1, windows),
            Some(_) => windows, // zero throughput: spread over everything
            None => 1,          // walk-only path carries any demand
        };
        let share = demand as f64 / s as f64;
        for &(_, h) in order.iter().take(s) {
            state.demand[od][h] = share;
            state.shares[od][h][best] = 1.0;
            state.used_windows[od].push(h);
        }
        state.used_windows[od].sort_unstable();
    }
    integerize(&mut state, problem);
    state
}

/// Run the averaging scheme for up to `w_max` iterations (stopping early
/// when the gap stabilizes).
pub fn msa_equilibrium(
    problem: &Problem,
    freqs: &FrequencyVector,
    w_max: usize,
    seed: u64,
) -> Result<EquilibriumRun> {
    msa_equilibrium_opts(problem, freqs, w_max, seed, true)
}

/// As [`msa_equilibrium`], with the stabilization stop switchable.
pub fn msa_equilibrium_opts(
    problem: &Problem,
    freqs: &FrequencyVector,
    w_max: usize,
    seed: u64,
    early_stop: bool,
) -> Result<EquilibriumRun> {
    let mut state = msa_initialize(problem, freqs);
    let mut gaps = Vec::new();
    let mut stats = Vec::new();
    let mut last = None;

    for w in 1..=w_max {
        let started = Instant::now();
        let out = simulate(
            &problem.network,
            freqs,
            &state.flows,
            &problem.paths,
            &problem.params,
            &problem.horizon,
            derive(seed, TAG_SIM, w as u64),
        )?;
        let agg = CostAggregate::from_records(problem, &out.records);
        gaps.push(relative_gap(problem, freqs, &agg, w));
        stats.push(IterStats {
            iteration: w,
            gap: gaps.last().unwrap().gap,
            total_cost: out.records.iter().filter_map(|r| r.cost).sum(),
            wall_s: started.elapsed().as_secs_f64(),
            unserved: out.unserved,
        });

        let stop = w == w_max || (early_stop && gap_stabilized(&gaps, 1e-3));
        if stop {
            last = Some((out, agg));
            break;
        }

        // best responses under the experienced times
        let best = best_paths_by_time(problem, &out.link_times);

        for od in 0..problem.paths.len() {
            if problem.demands[od] == 0 {
                continue;
            }
            // cheapest window by realized mean cost; unloaded windows are
            // compared through their free-flow estimates
            let mut best_h = 0;
            let mut best_cost = f64::INFINITY;
            for h in 0..problem.horizon.windows {
                let cost = agg.window_mean(od, h).unwrap_or_else(|| {
                    (0..problem.paths[od].len())
                        .map(|r| estimate_unused_cost(problem, freqs, od, h, r))
                        .fold(f64::INFINITY, f64::min)
                });
                if cost < best_cost {
                    best_cost = cost;
                    best_h = h;
                }
            }

            update_demand(
                &mut state.demand[od],
                &mut state.used_windows[od],
                best_h,
                w,
                problem.demands[od] as f64,
            );

            for h in 0..problem.horizon.windows {
                state.current_shortest[od][h] = best[od][h];
                if state.demand[od][h] <= 0.0 {
                    continue;
                }
                if state.shares[od][h].iter().all(|&s| s == 0.0) {
                    // window freshly opened: everything on its best path
                    state.shares[od][h][best[od][h]] = 1.0;
                    if !state.shortest_sets[od][h].contains(&best[od][h]) {
                        state.shortest_sets[od][h].push(best[od][h]);
                        state.shortest_sets[od][h].sort_unstable();
                    }
                } else {
                    update_shares(
                        &mut state.shares[od][h],
                        &mut state.shortest_sets[od][h],
                        best[od][h],
                        w,
                    );
                }
            }
        }
        integerize(&mut state, problem);
        state.iteration = w;
        last = Some((out, agg));
    }

    let (out, agg) = last.expect("at least one iteration runs");
    let validation = build_validation(problem, freqs, &agg);
    Ok(EquilibriumRun {
        assignment: state.flows,
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
    fn apportionment_sums_exactly() {
        let out = largest_remainder(&[1.0, 1.0, 1.0], 100);
        assert_eq!(out.iter().sum::<u32>(), 100);
        assert_eq!(out, vec![34, 33, 33]);
        // quotas 3.5/1.75/1.75: the two larger remainders take the extras
        let out = largest_remainder(&[0.5, 0.25, 0.25], 7);
        assert_eq!(out, vec![3, 2, 2]);
    }

    #[test]
    fn demand_update_new_best_window() {
        // averaging step at w=1: half stays, half moves to the new window
        let mut d = vec![100.0, 0.0];
        let mut used = vec![0];
        update_demand(&mut d, &mut used, 1, 1, 100.0);
        assert_relative_eq!(d[0], 50.0);
        assert_relative_eq!(d[1], 50.0);
        assert_eq!(used, vec![0, 1]);
    }

    #[test]
    fn demand_update_repeated_best_window() {
        let mut d = vec![100.0, 0.0];
        let mut used = vec![0];
        update_demand(&mut d, &mut used, 0, 1, 100.0);
        assert_relative_eq!(d[0], 100.0);
        assert_relative_eq!(d[1], 0.0);
    }

    #[test]
    fn demand_update_conserves_total() {
        let mut d = vec![40.0, 35.0, 25.0, 0.0];
        let mut used = vec![0, 1, 2];
        for w in 1..10 {
            update_demand(&mut d, &mut used, w % 4, w, 100.0);
            assert_relative_eq!(d.iter().sum::<f64>(), 100.0, max_relative = 1e-12);
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(128))]

            #[test]
            fn apportionment_is_exact_and_close(
                weights in proptest::collection::vec(0.0f64..10.0, 1..8),
                total in 0u32..5000,
            ) {
                prop_assume!(weights.iter().sum::<f64>() > 0.0);
                let out = largest_remainder(&weights, total);
                prop_assert_eq!(out.iter().sum::<u32>(), total);
                let sum: f64 = weights.iter().sum();
                for (i, &w) in weights.iter().enumerate() {
                    let quota = w / sum * total as f64;
                    prop_assert!((out[i] as f64 - quota).abs() < 1.0 + 1e-9);
                }
            }
        }
    }
}
