//! Path enumeration over the multilayer graph.
//!
//! `k_shortest_paths` enumerates loopless candidate paths per OD pair with
//! Yen's algorithm under the free-flow generalized cost basis; they form the
//! fixed choice set the equilibrium solvers work over.
//! `time_dependent_shortest_path` finds a least-arrival-time path under
//! piecewise-constant experienced link times from a simulation run.

use std::collections::{BinaryHeap, HashMap, HashSet};

use crate::cost::CostParams;
use crate::network::{Arc, ArcIdx, ArcKind, LineIdx, Mode, NodeIdx, TransitNetwork};
use crate::time::{ms_to_s, TimeMs};

/// One boarded service run inside a path: board at `board`, ride `segments`
/// consecutive segments of `line`, leave at `alight`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Leg {
    pub line: LineIdx,
    pub board: NodeIdx,
    pub alight: NodeIdx,
    pub segments: usize,
}

/// An acyclic origin-to-destination path through the multilayer graph with
/// its free-flow statistics. Time fields are free-flow values; realized
/// times come out of the simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitPath {
    pub origin: NodeIdx,
    pub destination: NodeIdx,
    pub arcs: Vec<ArcIdx>,
    pub legs: Vec<Leg>,
    /// Number of mode changes along the path.
    pub transfers: u32,
    pub fare: f64,
    /// Walk time over access/boarding/alighting/transfer arcs, seconds.
    pub free_flow_walk_s: f64,
    /// Ride time over segments plus dwells at intermediate stops, seconds.
    pub free_flow_invehicle_s: f64,
}

impl TransitPath {
    /// Assemble a path from an arc sequence, computing legs and free-flow
    /// statistics. The sequence must be a connected origin-to-destination
    /// walk through the graph.
    pub fn from_arcs(
        net: &TransitNetwork,
        arcs: Vec<ArcIdx>,
        fare: f64,
    ) -> TransitPath {
        assert!(!arcs.is_empty(), "a path needs at least one arc");
        let origin = net.arcs[arcs[0]].from;
        let destination = net.arcs[*arcs.last().unwrap()].to;

        let mut legs: Vec<Leg> = Vec::new();
        let mut walk_ms: TimeMs = 0;
        let mut ride_ms: TimeMs = 0;
        for &ai in &arcs {
            let arc = &net.arcs[ai];
            match arc.kind {
                ArcKind::LineSegment => {
                    let line = arc.line.expect("segments carry their line");
                    match legs.last_mut() {
                        Some(leg) if leg.line == line && leg.alight == arc.from => {
                            // continuing the current ride: dwell at the shared
                            // stop counts as in-vehicle time
                            ride_ms += net.lines[line].stop_ms();
                            ride_ms += net.segment_run_ms(arc);
                            leg.alight = arc.to;
                            leg.segments += 1;
                        }
                        _ => {
                            ride_ms += net.segment_run_ms(arc);
                            legs.push(Leg {
                                line,
                                board: arc.from,
                                alight: arc.to,
                                segments: 1,
                            });
                        }
                    }
                }
                _ => walk_ms += net.walk_ms(arc),
            }
        }

        let mut transfers = 0u32;
        for pair in legs.windows(2) {
            if net.lines[pair[0].line].mode != net.lines[pair[1].line].mode {
                transfers += 1;
            }
        }

        TransitPath {
            origin,
            destination,
            arcs,
            legs,
            transfers,
            fare,
            free_flow_walk_s: ms_to_s(walk_ms),
            free_flow_invehicle_s: ms_to_s(ride_ms),
        }
    }

    /// Free-flow generalized cost basis used to rank candidate paths:
    /// monetized walk and ride time plus transfer penalty and fare (no
    /// waiting, no schedule penalty).
    pub fn cost_basis(&self, params: &CostParams) -> f64 {
        params.value_of_time * (self.free_flow_walk_s + self.free_flow_invehicle_s) / 3600.0
            + self.transfers as f64 * params.transfer_penalty
            + self.fare
    }

    /// Node sequence visited by the path (origin first).
    pub fn node_seq(&self, net: &TransitNetwork) -> Vec<NodeIdx> {
        let mut seq = vec![self.origin];
        for &ai in &self.arcs {
            seq.push(net.arcs[ai].to);
        }
        seq
    }
}

// ---------------------------------------------------------------------------
// Expanded-state Dijkstra under the free-flow cost basis.
//
// The search state carries the mode of the last boarded line (for the
// transfer penalty) and whether the previous arc was a segment (so dwells at
// intermediate stops, and only those, are charged to ride time).

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct SearchState {
    node: NodeIdx,
    last_mode: Option<Mode>,
    riding: bool,
}

struct HeapEntry {
    cost: f64,
    seq: u64,
    state: SearchState,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cost == other.cost && self.seq == other.seq
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // min-heap through Reverse at the call sites; ties broken by
        // insertion order for determinism
        self.cost
            .partial_cmp(&other.cost)
            .expect("path costs are finite")
            .then(self.seq.cmp(&other.seq))
    }
}

fn arc_step_cost(net: &TransitNetwork, params: &CostParams, arc: &Arc, state: &SearchState) -> f64 {
    match arc.kind {
        ArcKind::LineSegment => {
            let line = &net.lines[arc.line.expect("segments carry their line")];
            let mut secs = ms_to_s(net.segment_run_ms(arc));
            if state.riding {
                secs += line.stop_time_s;
            }
            params.value_of_time * secs / 3600.0
        }
        ArcKind::Boarding => {
            let mut cost = params.value_of_time * ms_to_s(net.walk_ms(arc)) / 3600.0;
            let mode = net.lines[arc.line.expect("boarding arcs carry their line")].mode;
            if let Some(prev) = state.last_mode {
                if prev != mode {
                    cost += params.transfer_penalty;
                }
            }
            cost
        }
        _ => params.value_of_time * ms_to_s(net.walk_ms(arc)) / 3600.0,
    }
}

fn arc_step_state(net: &TransitNetwork, arc: &Arc, state: &SearchState) -> SearchState {
    match arc.kind {
        ArcKind::LineSegment => SearchState {
            node: arc.to,
            last_mode: state.last_mode,
            riding: true,
        },
        ArcKind::Boarding => SearchState {
            node: arc.to,
            last_mode: Some(net.lines[arc.line.expect("boarding arcs carry their line")].mode),
            riding: false,
        },
        _ => SearchState {
            node: arc.to,
            last_mode: state.last_mode,
            riding: false,
        },
    }
}

/// Cheapest path from `start` (in `start_state`) to `target` avoiding banned
/// original nodes and banned arcs. Returns the arc sequence.
fn dijkstra_basis(
    net: &TransitNetwork,
    params: &CostParams,
    start_state: SearchState,
    target: NodeIdx,
    banned_nodes: &HashSet<NodeIdx>,
    banned_arcs: &HashSet<ArcIdx>,
) -> Option<Vec<ArcIdx>> {
    let mut dist: HashMap<SearchState, f64> = HashMap::new();
    let mut parent: HashMap<SearchState, (SearchState, ArcIdx)> = HashMap::new();
    let mut heap: BinaryHeap<std::cmp::Reverse<HeapEntry>> = BinaryHeap::new();
    let mut seq = 0u64;

    dist.insert(start_state, 0.0);
    heap.push(std::cmp::Reverse(HeapEntry {
        cost: 0.0,
        seq,
        state: start_state,
    }));

    while let Some(std::cmp::Reverse(entry)) = heap.pop() {
        let state = entry.state;
        if entry.cost > dist[&state] {
            continue;
        }
        if state.node == target {
            // reconstruct
            let mut arcs = Vec::new();
            let mut cur = state;
            while let Some((prev, arc)) = parent.get(&cur) {
                arcs.push(*arc);
                cur = *prev;
            }
            arcs.reverse();
            return Some(arcs);
        }
        for &ai in net.out_arcs(state.node) {
            if banned_arcs.contains(&ai) {
                continue;
            }
            let arc = &net.arcs[ai];
            if banned_nodes.contains(&arc.to) {
                continue;
            }
            let next = arc_step_state(net, arc, &state);
            let cost = entry.cost + arc_step_cost(net, params, arc, &state);
            let better = match dist.get(&next) {
                Some(&d) => cost < d,
                None => true,
            };
            if better {
                dist.insert(next, cost);
                parent.insert(next, (state, ai));
                seq += 1;
                heap.push(std::cmp::Reverse(HeapEntry {
                    cost,
                    seq,
                    state: next,
                }));
            }
        }
    }
    None
}

fn path_has_node_loop(net: &TransitNetwork, arcs: &[ArcIdx]) -> bool {
    let mut seen = HashSet::new();
    seen.insert(net.arcs[arcs[0]].from);
    for &ai in arcs {
        if !seen.insert(net.arcs[ai].to) {
            return true;
        }
    }
    false
}

fn state_after(net: &TransitNetwork, arcs: &[ArcIdx], start: SearchState) -> SearchState {
    let mut state = start;
    for &ai in arcs {
        state = arc_step_state(net, &net.arcs[ai], &state);
    }
    state
}

fn arc_id_key<'a>(net: &'a TransitNetwork, arcs: &[ArcIdx]) -> Vec<&'a str> {
    arcs.iter().map(|&a| net.arcs[a].id.as_str()).collect()
}

/// Up to `k` loopless cheapest paths from `origin` to `destination` under the
/// free-flow cost basis, in nondecreasing basis order; ties broken by the
/// lexicographic arc-id sequence. An unreachable destination yields an empty
/// list.
pub fn k_shortest_paths(
    net: &TransitNetwork,
    origin: NodeIdx,
    destination: NodeIdx,
    k: usize,
    params: &CostParams,
) -> Vec<TransitPath> {
    assert!(k >= 1, "k must be at least 1");
    let start = SearchState {
        node: origin,
        last_mode: None,
        riding: false,
    };
    let no_nodes = HashSet::new();
    let no_arcs = HashSet::new();
    let Some(first) = dijkstra_basis(net, params, start, destination, &no_nodes, &no_arcs) else {
        return Vec::new();
    };
    if path_has_node_loop(net, &first) {
        return Vec::new();
    }

    let mut found: Vec<Vec<ArcIdx>> = vec![first];
    let mut candidates: Vec<Vec<ArcIdx>> = Vec::new();
    let mut seen: HashSet<Vec<ArcIdx>> = HashSet::new();
    seen.insert(found[0].clone());

    while found.len() < k {
        let prev = found.last().unwrap().clone();
        let prev_nodes: Vec<NodeIdx> = {
            let mut seq = vec![net.arcs[prev[0]].from];
            for &ai in &prev {
                seq.push(net.arcs[ai].to);
            }
            seq
        };

        for spur_idx in 0..prev.len() {
            let spur_node = prev_nodes[spur_idx];
            let root = &prev[..spur_idx];

            // arcs already taken out of the spur node by paths sharing this root
            let mut banned_arcs = HashSet::new();
            for path in found.iter().chain(candidates.iter()) {
                if path.len() > spur_idx && path[..spur_idx] == *root {
                    banned_arcs.insert(path[spur_idx]);
                }
            }
            let banned_nodes: HashSet<NodeIdx> =
                prev_nodes[..spur_idx].iter().copied().collect();

            let spur_state = state_after(net, root, start);
            debug_assert_eq!(spur_state.node, spur_node);
            if let Some(spur) = dijkstra_basis(
                net,
                params,
                spur_state,
                destination,
                &banned_nodes,
                &banned_arcs,
            ) {
                let mut total = root.to_vec();
                total.extend(spur);
                if !path_has_node_loop(net, &total) && seen.insert(total.clone()) {
                    candidates.push(total);
                }
            }
        }

        // take the cheapest candidate, breaking ties by arc-id sequence
        if candidates.is_empty() {
            break;
        }
        let best = candidates
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                let ca = TransitPath::from_arcs(net, (*a).clone(), params.default_fare)
                    .cost_basis(params);
                let cb = TransitPath::from_arcs(net, (*b).clone(), params.default_fare)
                    .cost_basis(params);
                ca.partial_cmp(&cb)
                    .unwrap()
                    .then_with(|| arc_id_key(net, a).cmp(&arc_id_key(net, b)))
            })
            .map(|(i, _)| i)
            .unwrap();
        found.push(candidates.swap_remove(best));
    }

    let mut paths: Vec<TransitPath> = found
        .into_iter()
        .map(|arcs| TransitPath::from_arcs(net, arcs, params.default_fare))
        .collect();
    paths.sort_by(|a, b| {
        a.cost_basis(params)
            .partial_cmp(&b.cost_basis(params))
            .unwrap()
            .then_with(|| arc_id_key(net, &a.arcs).cmp(&arc_id_key(net, &b.arcs)))
    });
    paths
}

// ---------------------------------------------------------------------------
// Time-dependent shortest path.

/// Mean experienced traversal time per arc per departure-window-sized bin,
/// collected from a simulation run. Lookups for missing entries fall back to
/// free-flow times.
#[derive(Debug, Clone, Default)]
pub struct LinkTimeTable {
    pub t0_ms: TimeMs,
    pub bin_ms: TimeMs,
    means: HashMap<(ArcIdx, i64), f64>,
}

impl LinkTimeTable {
    pub fn new(t0_ms: TimeMs, bin_ms: TimeMs) -> LinkTimeTable {
        LinkTimeTable {
            t0_ms,
            bin_ms,
            means: HashMap::new(),
        }
    }

    pub fn insert(&mut self, arc: ArcIdx, bin: i64, mean_ms: f64) {
        self.means.insert((arc, bin), mean_ms);
    }

    pub fn bin_of(&self, t: TimeMs) -> i64 {
        if self.bin_ms <= 0 {
            return 0;
        }
        (t - self.t0_ms).max(0) / self.bin_ms
    }

    /// Experienced traversal time entering `arc` at `entry`; free-flow when
    /// the bin has no observation.
    pub fn traverse_ms(&self, net: &TransitNetwork, arc: ArcIdx, entry: TimeMs) -> TimeMs {
        match self.means.get(&(arc, self.bin_of(entry))) {
            Some(&mean) => mean.round() as TimeMs,
            None => net.experienced_freeflow_ms(arc),
        }
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }
}

struct TimeHeapEntry {
    arrival: TimeMs,
    seq: u64,
    node: NodeIdx,
}

impl PartialEq for TimeHeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.arrival == other.arrival && self.seq == other.seq
    }
}
impl Eq for TimeHeapEntry {}
impl PartialOrd for TimeHeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for TimeHeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.arrival
            .cmp(&other.arrival)
            .then(self.seq.cmp(&other.seq))
    }
}

/// Least-arrival-time path from `origin` departing at `depart_ms`, with
/// FIFO link traversal: the time to cross an arc is looked up at its entry
/// time. Returns `None` when the destination is unreachable.
pub fn time_dependent_shortest_path(
    net: &TransitNetwork,
    origin: NodeIdx,
    destination: NodeIdx,
    depart_ms: TimeMs,
    table: &LinkTimeTable,
    fare: f64,
) -> Option<TransitPath> {
    let mut best: HashMap<NodeIdx, TimeMs> = HashMap::new();
    let mut parent: HashMap<NodeIdx, (NodeIdx, ArcIdx)> = HashMap::new();
    let mut heap: BinaryHeap<std::cmp::Reverse<TimeHeapEntry>> = BinaryHeap::new();
    let mut seq = 0u64;

    best.insert(origin, depart_ms);
    heap.push(std::cmp::Reverse(TimeHeapEntry {
        arrival: depart_ms,
        seq,
        node: origin,
    }));

    while let Some(std::cmp::Reverse(entry)) = heap.pop() {
        if entry.arrival > best[&entry.node] {
            continue;
        }
        if entry.node == destination {
            let mut arcs = Vec::new();
            let mut cur = destination;
            while let Some(&(prev, arc)) = parent.get(&cur) {
                arcs.push(arc);
                cur = prev;
            }
            arcs.reverse();
            return Some(TransitPath::from_arcs(net, arcs, fare));
        }
        for &ai in net.out_arcs(entry.node) {
            let arc = &net.arcs[ai];
            let arrival = entry.arrival + table.traverse_ms(net, ai, entry.arrival);
            let better = match best.get(&arc.to) {
                Some(&t) => arrival < t,
                None => true,
            };
            if better {
                best.insert(arc.to, arrival);
                parent.insert(arc.to, (entry.node, ai));
                seq += 1;
                heap.push(std::cmp::Reverse(TimeHeapEntry {
                    arrival,
                    seq,
                    node: arc.to,
                }));
            }
        }
    }
    None
}

#[cfg(test)]
pub(crate) mod testutil {
    use crate::network::{
        ArcDecl, ArcKind, LineDecl, Mode, NetworkDecl, NodeDecl, NodeKind, TransitNetwork,
    };

    /// Diamond: one OD, two parallel single-segment lines between the same
    /// stations, with configurable segment lengths.
    pub fn diamond(len_p: f64, len_q: f64) -> TransitNetwork {
        let mut nodes = vec![
            NodeDecl { id: "o".into(), kind: NodeKind::Origin, station: None },
            NodeDecl { id: "d".into(), kind: NodeKind::Destination, station: None },
            NodeDecl { id: "s1".into(), kind: NodeKind::Station, station: None },
            NodeDecl { id: "s2".into(), kind: NodeKind::Station, station: None },
        ];
        let mut arcs = vec![
            ArcDecl {
                id: "acc.o".into(),
                from: "o".into(),
                to: "s1".into(),
                kind: ArcKind::Access,
                length_m: 300.0,
            },
            ArcDecl {
                id: "acc.d".into(),
                from: "s2".into(),
                to: "d".into(),
                kind: ArcKind::Access,
                length_m: 300.0,
            },
        ];
        let mut lines = Vec::new();
        for (line, len) in [("P", len_p), ("Q", len_q)] {
            for (pos, st) in ["s1", "s2"].iter().enumerate() {
                nodes.push(NodeDecl {
                    id: format!("{line}.a.{}", pos + 1),
                    kind: NodeKind::Line,
                    station: Some((*st).into()),
                });
            }
            arcs.push(ArcDecl {
                id: format!("seg.{line}"),
                from: format!("{line}.a.1"),
                to: format!("{line}.a.2"),
                kind: ArcKind::LineSegment,
                length_m: len,
            });
            lines.push(LineDecl {
                id: format!("{line}.a"),
                mode: Mode::Tramway,
                stops: vec![format!("{line}.a.1"), format!("{line}.a.2")],
                capacity: 100,
                speed_mps: 5.0,
                stop_time_s: 20.0,
                theta: 100.0,
            });
        }
        TransitNetwork::build(&NetworkDecl {
            nodes,
            arcs,
            lines,
            walk_speed_mps: 1.4,
            board_length_m: 100.0,
            alight_length_m: 100.0,
        })
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::diamond;
    use super::*;
    use crate::network::testutil::minimal_decl;
    use crate::network::TransitNetwork;

    fn params() -> CostParams {
        CostParams::default()
    }

    #[test]
    fn single_line_yields_exactly_one_path() {
        let net = TransitNetwork::build(&minimal_decl()).unwrap();
        let (o, d) = (net.node("o").unwrap(), net.node("d").unwrap());
        let paths = k_shortest_paths(&net, o, d, 5, &params());
        assert_eq!(paths.len(), 1);
        let p = &paths[0];
        assert_eq!(p.legs.len(), 1);
        assert_eq!(p.transfers, 0);
        // 300 + 100 walk in, 100 + 300 walk out at 1.4 m/s
        assert!((p.free_flow_walk_s - 800.0 / 1.4).abs() < 0.01);
        // one 3000 m segment at 5 m/s, no intermediate stop
        assert!((p.free_flow_invehicle_s - 600.0).abs() < 0.01);
    }

    #[test]
    fn diamond_orders_by_cost_basis() {
        let net = diamond(1000.0, 1500.0);
        let (o, d) = (net.node("o").unwrap(), net.node("d").unwrap());
        let paths = k_shortest_paths(&net, o, d, 2, &params());
        assert_eq!(paths.len(), 2);
        // enumerating by hand: the 1000 m line is strictly cheaper
        assert!(paths[0].arcs.contains(&net.arc("seg.P").unwrap()));
        assert!(paths[1].arcs.contains(&net.arc("seg.Q").unwrap()));
        let p = &params();
        assert!(paths[0].cost_basis(p) < paths[1].cost_basis(p));
    }

    #[test]
    fn equal_cost_ties_break_lexicographically() {
        let net = diamond(1000.0, 1000.0);
        let (o, d) = (net.node("o").unwrap(), net.node("d").unwrap());
        let paths = k_shortest_paths(&net, o, d, 2, &params());
        assert_eq!(paths.len(), 2);
        let key0 = arc_id_key(&net, &paths[0].arcs);
        let key1 = arc_id_key(&net, &paths[1].arcs);
        assert!(key0 < key1);
    }

    #[test]
    fn disconnected_od_yields_empty() {
        let net = diamond(1000.0, 1500.0);
        // destination to origin direction has no arcs
        let (o, d) = (net.node("o").unwrap(), net.node("d").unwrap());
        assert!(k_shortest_paths(&net, d, o, 3, &params()).is_empty());
    }

    #[test]
    fn tdsp_at_free_flow_matches_static_shortest() {
        let net = diamond(1000.0, 1500.0);
        let (o, d) = (net.node("o").unwrap(), net.node("d").unwrap());
        let stat = k_shortest_paths(&net, o, d, 1, &params());
        let table = LinkTimeTable::new(0, 300_000);
        let td = time_dependent_shortest_path(&net, o, d, 25_200_000, &table, 0.0).unwrap();
        assert_eq!(td.arcs, stat[0].arcs);
    }

    #[test]
    fn tdsp_switches_when_a_bin_is_congested() {
        let net = diamond(1000.0, 1500.0);
        let (o, d) = (net.node("o").unwrap(), net.node("d").unwrap());
        let seg_p = net.arc("seg.P").unwrap();
        let mut table = LinkTimeTable::new(25_200_000, 300_000);
        // free-flow on seg.P is 1000/5 s run + 20 s dwell = 220 s
        let ff = net.experienced_freeflow_ms(seg_p) as f64;
        // departure at 07:00 walks ~286 s to s1 (access + boarding): the
        // segment is entered in bin 0 or 1; inflate both tenfold
        table.insert(seg_p, 0, ff * 10.0);
        table.insert(seg_p, 1, ff * 10.0);
        let td = time_dependent_shortest_path(&net, o, d, 25_200_000, &table, 0.0).unwrap();
        assert!(td.arcs.contains(&net.arc("seg.Q").unwrap()));
        // departing long after the last recorded bin falls back to free flow
        let late = time_dependent_shortest_path(&net, o, d, 40_000_000, &table, 0.0).unwrap();
        assert!(late.arcs.contains(&net.arc("seg.P").unwrap()));
    }

    #[test]
    fn returned_paths_satisfy_structural_invariants() {
        let net = diamond(1000.0, 1500.0);
        let (o, d) = (net.node("o").unwrap(), net.node("d").unwrap());
        for path in k_shortest_paths(&net, o, d, 5, &params()) {
            assert_eq!(path.origin, o);
            assert_eq!(path.destination, d);
            assert!(!path_has_node_loop(&net, &path.arcs));
            let seq = path.node_seq(&net);
            assert_eq!(seq.first(), Some(&o));
            assert_eq!(seq.last(), Some(&d));
        }
    }
}
