//! Equilibrium solvers and equilibrium-quality measurement.
//!
//! Both solvers iterate simulation runs day-to-day: cross-entropy learning
//! ([`ce`]) adapts per-OD departure-window and path choice distributions,
//! the method of successive averages ([`msa`]) averages flows towards
//! time-dependent best responses. Quality is certified by the relative gap
//! and by the share of cells whose used paths cost no more than their best
//! unused alternative.

pub mod ce;
pub mod msa;

use crate::cost::{generalized_cost, schedule_penalty, CostComponents};
use crate::network::FrequencyVector;
use crate::paths::LinkTimeTable;
use crate::scenario::Problem;
use crate::sim::{AssignmentState, PassengerRecord};

/// Served flow and realized mean generalized cost per (od, window, path) cell.
#[derive(Debug, Clone)]
pub struct CostAggregate {
    /// `cells[od][h][r] = (served_flow, cost_sum)`
    pub cells: Vec<Vec<Vec<(u32, f64)>>>,
}

impl CostAggregate {
    pub fn from_records(problem: &Problem, records: &[PassengerRecord]) -> CostAggregate {
        let mut cells: Vec<Vec<Vec<(u32, f64)>>> = problem
            .paths
            .iter()
            .map(|paths| vec![vec![(0u32, 0.0); paths.len()]; problem.horizon.windows])
            .collect();
        for rec in records {
            if let Some(cost) = rec.cost {
                let slot = &mut cells[rec.od][rec.window][rec.path];
                slot.0 += 1;
                slot.1 += cost;
            }
        }
        CostAggregate { cells }
    }

    pub fn mean(&self, od: usize, h: usize, r: usize) -> Option<f64> {
        let (n, sum) = self.cells[od][h][r];
        (n > 0).then(|| sum / n as f64)
    }

    pub fn flow(&self, od: usize, h: usize, r: usize) -> u32 {
        self.cells[od][h][r].0
    }

    /// Served demand of an (od, window) cell.
    pub fn cell_demand(&self, od: usize, h: usize) -> u32 {
        self.cells[od][h].iter().map(|(n, _)| *n).sum()
    }

    /// Mean realized cost over all paths of an (od, window) cell.
    pub fn window_mean(&self, od: usize, h: usize) -> Option<f64> {
        let n: u32 = self.cell_demand(od, h);
        if n == 0 {
            return None;
        }
        let sum: f64 = self.cells[od][h].iter().map(|(_, s)| *s).sum();
        Some(sum / n as f64)
    }

    /// Mean realized cost of one path over all windows.
    pub fn path_mean(&self, od: usize, r: usize) -> Option<f64> {
        let mut n = 0u32;
        let mut sum = 0.0;
        for h in 0..self.cells[od].len() {
            let (cn, cs) = self.cells[od][h][r];
            n += cn;
            sum += cs;
        }
        (n > 0).then(|| sum / n as f64)
    }
}

/// Estimated generalized cost of taking path `r` in window `h` without any
/// congestion information: free-flow walk and ride time, half a headway of
/// waiting per boarded line, and the schedule penalty at the resulting
/// arrival when departing at the window midpoint.
pub fn estimate_unused_cost(
    problem: &Problem,
    freqs: &FrequencyVector,
    od: usize,
    h: usize,
    r: usize,
) -> f64 {
    let path = &problem.paths[od][r];
    let depart = problem.horizon.window_mid_s(h);
    let mut wait = 0.0;
    for leg in &path.legs {
        let printed = &problem.network.lines[leg.line].printed;
        wait += freqs.headway_s(printed).unwrap_or(0.0) / 2.0;
    }
    let arrive = depart + path.free_flow_walk_s + path.free_flow_invehicle_s + wait;
    let components = CostComponents {
        walk_s: path.free_flow_walk_s,
        invehicle_s: path.free_flow_invehicle_s,
        wait_s: wait,
        transfers: path.transfers,
        penalty: schedule_penalty(arrive, &problem.params),
        fare: path.fare,
    };
    generalized_cost(&components, &problem.params)
}

/// Relative gap over (od, window) cells given per-alternative served flows
/// and costs (realized means for used alternatives, estimates for unused).
/// `None` when no demand is present.
pub fn relative_gap_cells(cells: &[Vec<(u32, f64)>]) -> Option<f64> {
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for cell in cells {
        let demand: u32 = cell.iter().map(|(f, _)| *f).sum();
        if demand == 0 {
            continue;
        }
        let min_cost = cell
            .iter()
            .map(|(_, c)| *c)
            .fold(f64::INFINITY, f64::min);
        for &(flow, cost) in cell {
            numerator += flow as f64 * (cost - min_cost);
        }
        denominator += demand as f64 * min_cost;
    }
    (denominator != 0.0).then(|| numerator / denominator)
}

/// One (od, window) cell of a [`GapReport`].
#[derive(Debug, Clone)]
pub struct GapCell {
    pub od: usize,
    pub window: usize,
    pub demand: u32,
    /// Realized mean cost over used paths.
    pub mean_cost: f64,
    /// Candidate-set minimum (used realized means and unused estimates).
    pub min_cost: f64,
    /// Cheapest unused alternative, when one exists.
    pub min_unused_estimate: Option<f64>,
}

/// Relative gap of one iteration plus its per-cell breakdown.
#[derive(Debug, Clone)]
pub struct GapReport {
    pub iteration: usize,
    pub gap: Option<f64>,
    pub cells: Vec<GapCell>,
}

/// Build the gap report for one iteration from realized costs; unused
/// alternatives enter the candidate minimum through their estimates.
pub fn relative_gap(
    problem: &Problem,
    freqs: &FrequencyVector,
    agg: &CostAggregate,
    iteration: usize,
) -> GapReport {
    let mut flat: Vec<Vec<(u32, f64)>> = Vec::new();
    let mut cells = Vec::new();
    for od in 0..problem.paths.len() {
        for h in 0..problem.horizon.windows {
            let demand = agg.cell_demand(od, h);
            if demand == 0 {
                continue;
            }
            let mut alts = Vec::with_capacity(problem.paths[od].len());
            let mut min_unused: Option<f64> = None;
            for r in 0..problem.paths[od].len() {
                match agg.mean(od, h, r) {
                    Some(mean) => alts.push((agg.flow(od, h, r), mean)),
                    None => {
                        let est = estimate_unused_cost(problem, freqs, od, h, r);
                        min_unused = Some(min_unused.map_or(est, |m: f64| m.min(est)));
                        alts.push((0, est));
                    }
                }
            }
            let min_cost = alts.iter().map(|(_, c)| *c).fold(f64::INFINITY, f64::min);
            cells.push(GapCell {
                od,
                window: h,
                demand,
                mean_cost: agg.window_mean(od, h).unwrap(),
                min_cost,
                min_unused_estimate: min_unused,
            });
            flat.push(alts);
        }
    }
    GapReport {
        iteration,
        gap: relative_gap_cells(&flat),
        cells,
    }
}

/// Per-path row of the validation table: realized flow and mean cost for
/// used cells, the free-flow estimate for unused ones.
#[derive(Debug, Clone, Copy)]
pub struct ValidationCell {
    pub flow: u32,
    pub cost: f64,
    pub used: bool,
}

/// Per (od, window, path-rank) validation layout over the whole horizon.
#[derive(Debug, Clone)]
pub struct ValidationTable {
    /// `(od, window, per-path cells)`
    pub rows: Vec<(usize, usize, Vec<ValidationCell>)>,
}

pub fn build_validation(
    problem: &Problem,
    freqs: &FrequencyVector,
    agg: &CostAggregate,
) -> ValidationTable {
    let mut rows = Vec::new();
    for od in 0..problem.paths.len() {
        for h in 0..problem.horizon.windows {
            let mut cells = Vec::with_capacity(problem.paths[od].len());
            for r in 0..problem.paths[od].len() {
                match agg.mean(od, h, r) {
                    Some(mean) => cells.push(ValidationCell {
                        flow: agg.flow(od, h, r),
                        cost: mean,
                        used: true,
                    }),
                    None => cells.push(ValidationCell {
                        flow: 0,
                        cost: estimate_unused_cost(problem, freqs, od, h, r),
                        used: false,
                    }),
                }
            }
            rows.push((od, h, cells));
        }
    }
    ValidationTable { rows }
}

impl ValidationTable {
    /// Fraction of positive-flow (od, window) cells whose flow-weighted used
    /// cost does not exceed the cheapest unused alternative by more than
    /// `slack` times the cell minimum. Returns (satisfied, total).
    pub fn equilibrium_share(&self, slack: f64) -> (usize, usize) {
        let mut satisfied = 0;
        let mut total = 0;
        for (_, _, cells) in &self.rows {
            let flow: u32 = cells.iter().map(|c| c.flow).sum();
            if flow == 0 {
                continue;
            }
            total += 1;
            let used_mean = cells
                .iter()
                .filter(|c| c.flow > 0)
                .map(|c| c.flow as f64 * c.cost)
                .sum::<f64>()
                / flow as f64;
            let min_cost = cells.iter().map(|c| c.cost).fold(f64::INFINITY, f64::min);
            let min_unused = cells
                .iter()
                .filter(|c| !c.used)
                .map(|c| c.cost)
                .fold(f64::INFINITY, f64::min);
            if used_mean <= min_unused + slack * min_cost {
                satisfied += 1;
            }
        }
        (satisfied, total)
    }
}

/// Per-iteration summary of an equilibrium run.
#[derive(Debug, Clone)]
pub struct IterStats {
    pub iteration: usize,
    pub gap: Option<f64>,
    /// Total generalized cost over served passengers.
    pub total_cost: f64,
    pub wall_s: f64,
    pub unserved: usize,
}

/// Result of a full equilibrium run: the final realized assignment and
/// records, plus per-iteration gap and cost trajectories.
#[derive(Debug, Clone)]
pub struct EquilibriumRun {
    pub assignment: AssignmentState,
    pub records: Vec<PassengerRecord>,
    pub gaps: Vec<GapReport>,
    pub stats: Vec<IterStats>,
    pub validation: ValidationTable,
    pub link_times: LinkTimeTable,
}

impl EquilibriumRun {
    pub fn total_cost(&self) -> f64 {
        self.records.iter().filter_map(|r| r.cost).sum()
    }

    /// Total generalized cost averaged over the last (up to) three
    /// iterations: a steadier estimate of the equilibrium cost than the
    /// final-iteration snapshot, used when design points are compared.
    pub fn stabilized_cost(&self) -> f64 {
        let n = self.stats.len().min(3);
        if n == 0 {
            return 0.0;
        }
        self.stats[self.stats.len() - n..]
            .iter()
            .map(|s| s.total_cost)
            .sum::<f64>()
            / n as f64
    }

    pub fn final_gap(&self) -> Option<f64> {
        self.gaps.last().and_then(|g| g.gap)
    }
}

/// Gap trajectory stabilization: relative spread of the last three gap
/// values below `tol`.
pub(crate) fn gap_stabilized(gaps: &[GapReport], tol: f64) -> bool {
    if gaps.len() < 3 {
        return false;
    }
    let last: Vec<f64> = gaps[gaps.len() - 3..]
        .iter()
        .filter_map(|g| g.gap)
        .collect();
    if last.len() < 3 {
        return false;
    }
    let max = last.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = last.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        return true;
    }
    (max - min) / max.abs() < tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_zero_when_all_flow_at_minimum() {
        let cells = vec![vec![(10, 5.0), (0, 7.0)], vec![(3, 2.0), (0, 2.5)]];
        assert_eq!(relative_gap_cells(&cells), Some(0.0));
    }

    #[test]
    fn gap_single_cell_direct_evaluation() {
        // 10 passengers on a path of mean cost 10, candidate minimum 8
        let cells = vec![vec![(10, 10.0), (0, 8.0)]];
        assert_eq!(relative_gap_cells(&cells), Some(10.0 * 2.0 / (10.0 * 8.0)));
    }

    #[test]
    fn gap_is_homogeneous_across_identical_cells() {
        let one = vec![vec![(10, 10.0), (0, 8.0)]];
        let two = vec![vec![(10, 10.0), (0, 8.0)], vec![(10, 10.0), (0, 8.0)]];
        assert_eq!(relative_gap_cells(&one), relative_gap_cells(&two));
    }

    #[test]
    fn gap_undefined_without_demand() {
        assert_eq!(relative_gap_cells(&[]), None);
        let empty_cells = vec![vec![(0, 10.0)]];
        assert_eq!(relative_gap_cells(&empty_cells), None);
    }

    #[test]
    fn stabilization_needs_three_flat_gaps() {
        let mk = |vals: &[f64]| -> Vec<GapReport> {
            vals.iter()
                .enumerate()
                .map(|(i, &v)| GapReport {
                    iteration: i + 1,
                    gap: Some(v),
                    cells: vec![],
                })
                .collect()
        };
        assert!(!gap_stabilized(&mk(&[3.0, 3.0]), 1e-3));
        assert!(gap_stabilized(&mk(&[5.0, 3.0, 3.0, 3.0]), 1e-3));
        assert!(!gap_stabilized(&mk(&[3.0, 3.0, 3.5]), 1e-3));
    }
}
