//! Multilayer transit graph: origin/destination, station and line nodes,
//! typed arcs between them, and the line services running over the line-node
//! layer.
//!
//! The graph is immutable once built; solvers and simulators only read it.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::time::{travel_ms, TimeMs};

pub type NodeIdx = usize;
pub type ArcIdx = usize;
pub type LineIdx = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Tramway,
    Metro,
}

impl Mode {
    pub fn parse(text: &str) -> Option<Mode> {
        match text {
            "tramway" | "tram" => Some(Mode::Tramway),
            "metro" => Some(Mode::Metro),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Tramway => "tramway",
            Mode::Metro => "metro",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Origin,
    Destination,
    Station,
    Line,
}

impl NodeKind {
    pub fn parse(text: &str) -> Option<NodeKind> {
        match text {
            "origin" => Some(NodeKind::Origin),
            "destination" => Some(NodeKind::Destination),
            "station" => Some(NodeKind::Station),
            "line" => Some(NodeKind::Line),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    /// Station a line node belongs to; `None` for every other kind.
    pub station: Option<NodeIdx>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcKind {
    /// Origin -> station or station -> destination walk.
    Access,
    /// Station -> line node walk onto the platform.
    Boarding,
    /// Line node -> station walk off the platform.
    Alighting,
    /// Station -> station walk inside a multimodal station.
    Transfer,
    /// Line node -> next line node of the same line.
    LineSegment,
}

impl ArcKind {
    pub fn parse(text: &str) -> Option<ArcKind> {
        match text {
            "access" => Some(ArcKind::Access),
            "boarding" => Some(ArcKind::Boarding),
            "alighting" => Some(ArcKind::Alighting),
            "transfer" => Some(ArcKind::Transfer),
            "line_segment" => Some(ArcKind::LineSegment),
            _ => None,
        }
    }

    pub fn is_walk(&self) -> bool {
        !matches!(self, ArcKind::LineSegment)
    }
}

#[derive(Debug, Clone)]
pub struct Arc {
    pub id: String,
    pub from: NodeIdx,
    pub to: NodeIdx,
    pub kind: ArcKind,
    pub length_m: f64,
    /// Transit mode, set on line segments only.
    pub mode: Option<Mode>,
    /// Owning line for segments; serving line for boarding/alighting arcs.
    pub line: Option<LineIdx>,
}

/// One direction of service on a line: an ordered run over its own line
/// nodes. The opposite direction is a distinct `LineSpec` sharing the same
/// printed line id (the id up to the first `.`), and therefore the same
/// frequency decision variable.
#[derive(Debug, Clone)]
pub struct LineSpec {
    pub id: String,
    pub printed: String,
    pub mode: Mode,
    pub stops: Vec<NodeIdx>,
    pub capacity: u32,
    pub speed_mps: f64,
    pub stop_time_s: f64,
    /// Operation cost per unit frequency charged to this direction.
    pub theta: f64,
}

impl LineSpec {
    pub fn stop_ms(&self) -> TimeMs {
        (self.stop_time_s * 1_000.0).round() as TimeMs
    }
}

/// Frequency decision variables, one per printed line, with their bounds
/// (vehicles per hour).
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyVector {
    printed: Vec<String>,
    index: HashMap<String, usize>,
    y: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl FrequencyVector {
    pub fn new(entries: Vec<(String, f64, f64, f64)>) -> FrequencyVector {
        let mut fv = FrequencyVector {
            printed: Vec::new(),
            index: HashMap::new(),
            y: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
        };
        for (id, y, lower, upper) in entries {
            fv.index.insert(id.clone(), fv.printed.len());
            fv.printed.push(id);
            fv.y.push(y);
            fv.lower.push(lower);
            fv.upper.push(upper);
        }
        fv
    }

    pub fn printed_lines(&self) -> &[String] {
        &self.printed
    }

    pub fn len(&self) -> usize {
        self.printed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.printed.is_empty()
    }

    pub fn get(&self, printed: &str) -> Option<f64> {
        self.index.get(printed).map(|&i| self.y[i])
    }

    pub fn get_at(&self, i: usize) -> f64 {
        self.y[i]
    }

    pub fn set_at(&mut self, i: usize, y: f64) {
        self.y[i] = y;
    }

    pub fn set(&mut self, printed: &str, y: f64) {
        let i = self.index[printed];
        self.y[i] = y;
    }

    pub fn bounds_at(&self, i: usize) -> (f64, f64) {
        (self.lower[i], self.upper[i])
    }

    pub fn set_bounds_all(&mut self, lower: f64, upper: f64) {
        for i in 0..self.y.len() {
            self.lower[i] = lower;
            self.upper[i] = upper;
        }
    }

    /// Headway in seconds for printed line `printed`.
    pub fn headway_s(&self, printed: &str) -> Option<f64> {
        self.get(printed).map(|y| 3600.0 / y)
    }

    /// Check every frequency against its bounds.
    pub fn validate(&self) -> Result<()> {
        for i in 0..self.y.len() {
            if self.y[i] < self.lower[i] || self.y[i] > self.upper[i] {
                return Err(Error::FrequencyOutOfBounds {
                    line: self.printed[i].clone(),
                    value: self.y[i],
                    lower: self.lower[i],
                    upper: self.upper[i],
                });
            }
        }
        Ok(())
    }

    pub fn pairs(&self) -> Vec<(&str, f64)> {
        self.printed
            .iter()
            .map(|s| s.as_str())
            .zip(self.y.iter().copied())
            .collect()
    }
}

/// Printed line id: the line id up to the first `.` separator. The two
/// directions `1.a` / `1.b` share the printed line `1`.
pub fn printed_line_id(line_id: &str) -> &str {
    line_id.split('.').next().unwrap_or(line_id)
}

// ---------------------------------------------------------------------------
// Declarations consumed by the builder (produced by the scenario parser or by
// tests directly).

#[derive(Debug, Clone, PartialEq)]
pub struct NodeDecl {
    pub id: String,
    pub kind: NodeKind,
    pub station: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArcDecl {
    pub id: String,
    pub from: String,
    pub to: String,
    pub kind: ArcKind,
    pub length_m: f64,
}

#[derive(Debug, Clone)]
pub struct LineDecl {
    pub id: String,
    pub mode: Mode,
    pub stops: Vec<String>,
    pub capacity: u32,
    pub speed_mps: f64,
    pub stop_time_s: f64,
    pub theta: f64,
}

#[derive(Debug, Clone)]
pub struct NetworkDecl {
    pub nodes: Vec<NodeDecl>,
    pub arcs: Vec<ArcDecl>,
    pub lines: Vec<LineDecl>,
    pub walk_speed_mps: f64,
    pub board_length_m: f64,
    pub alight_length_m: f64,
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct TransitNetwork {
    pub nodes: Vec<Node>,
    pub arcs: Vec<Arc>,
    pub lines: Vec<LineSpec>,
    /// Printed line ids in declaration order.
    pub printed_lines: Vec<String>,
    pub walk_speed_mps: f64,
    node_index: HashMap<String, NodeIdx>,
    arc_index: HashMap<String, ArcIdx>,
    out: Vec<Vec<ArcIdx>>,
    /// Owning line of each line node.
    line_of_node: Vec<Option<LineIdx>>,
    /// Position of each line node within its line's stop sequence.
    stop_pos: Vec<Option<usize>>,
}

impl TransitNetwork {
    /// Validate the declarations and assemble the graph. Boarding and
    /// alighting arcs missing from the declaration are generated with the
    /// declared default lengths, one pair per line node.
    pub fn build(decl: &NetworkDecl) -> Result<TransitNetwork> {
        let mut nodes = Vec::with_capacity(decl.nodes.len());
        let mut node_index: HashMap<String, NodeIdx> = HashMap::new();

        for nd in &decl.nodes {
            if node_index.contains_key(&nd.id) {
                return Err(Error::network(format!("duplicate node id '{}'", nd.id)));
            }
            node_index.insert(nd.id.clone(), nodes.len());
            nodes.push(Node {
                id: nd.id.clone(),
                kind: nd.kind,
                station: None, // resolved below once all nodes are indexed
            });
        }

        for nd in &decl.nodes {
            let idx = node_index[&nd.id];
            match (nd.kind, &nd.station) {
                (NodeKind::Line, Some(st)) => {
                    let st_idx = *node_index.get(st).ok_or_else(|| {
                        Error::network(format!(
                            "line node '{}' references unknown station '{st}'",
                            nd.id
                        ))
                    })?;
                    if nodes[st_idx].kind != NodeKind::Station {
                        return Err(Error::network(format!(
                            "line node '{}' references '{st}' which is not a station",
                            nd.id
                        )));
                    }
                    nodes[idx].station = Some(st_idx);
                }
                (NodeKind::Line, None) => {
                    return Err(Error::network(format!(
                        "line node '{}' must reference a station",
                        nd.id
                    )));
                }
                (_, Some(st)) => {
                    return Err(Error::network(format!(
                        "node '{}' of kind {:?} must not reference a station ('{st}')",
                        nd.id, nd.kind
                    )));
                }
                _ => {}
            }
        }

        // Lines over the line-node layer.
        let mut lines = Vec::with_capacity(decl.lines.len());
        let mut line_of_node: Vec<Option<LineIdx>> = vec![None; nodes.len()];
        let mut stop_pos: Vec<Option<usize>> = vec![None; nodes.len()];
        let mut printed_lines: Vec<String> = Vec::new();
        for ld in &decl.lines {
            if lines
                .iter()
                .any(|l: &LineSpec| l.id == ld.id)
            {
                return Err(Error::network(format!("duplicate line id '{}'", ld.id)));
            }
            if ld.stops.len() < 2 {
                return Err(Error::network(format!(
                    "line '{}' must have at least two stops",
                    ld.id
                )));
            }
            if ld.capacity < 1 {
                return Err(Error::network(format!("line '{}' capacity must be >= 1", ld.id)));
            }
            if ld.speed_mps <= 0.0 {
                return Err(Error::network(format!("line '{}' speed must be > 0", ld.id)));
            }
            if ld.stop_time_s < 0.0 || ld.theta < 0.0 {
                return Err(Error::network(format!(
                    "line '{}' stop_time and theta must be >= 0",
                    ld.id
                )));
            }
            let line_idx = lines.len();
            let mut stops = Vec::with_capacity(ld.stops.len());
            for (pos, sid) in ld.stops.iter().enumerate() {
                let idx = *node_index.get(sid).ok_or_else(|| {
                    Error::network(format!("line '{}' references unknown node '{sid}'", ld.id))
                })?;
                if nodes[idx].kind != NodeKind::Line {
                    return Err(Error::network(format!(
                        "line '{}' sequence visits node '{sid}' which is not a line node",
                        ld.id
                    )));
                }
                if let Some(other) = line_of_node[idx] {
                    return Err(Error::network(format!(
                        "line node '{sid}' appears in both line '{}' and line '{}'",
                        lines[other].id, ld.id
                    )));
                }
                line_of_node[idx] = Some(line_idx);
                stop_pos[idx] = Some(pos);
                stops.push(idx);
            }
            let printed = printed_line_id(&ld.id).to_string();
            if !printed_lines.contains(&printed) {
                printed_lines.push(printed.clone());
            }
            lines.push(LineSpec {
                id: ld.id.clone(),
                printed,
                mode: ld.mode,
                stops,
                capacity: ld.capacity,
                speed_mps: ld.speed_mps,
                stop_time_s: ld.stop_time_s,
                theta: ld.theta,
            });
        }

        // Declared arcs.
        let mut arcs = Vec::with_capacity(decl.arcs.len());
        let mut arc_index: HashMap<String, ArcIdx> = HashMap::new();
        for ad in &decl.arcs {
            if arc_index.contains_key(&ad.id) {
                return Err(Error::network(format!("duplicate arc id '{}'", ad.id)));
            }
            if ad.length_m <= 0.0 {
                return Err(Error::network(format!("arc '{}' length must be > 0", ad.id)));
            }
            let from = *node_index.get(&ad.from).ok_or_else(|| {
                Error::network(format!("arc '{}' references unknown node '{}'", ad.id, ad.from))
            })?;
            let to = *node_index.get(&ad.to).ok_or_else(|| {
                Error::network(format!("arc '{}' references unknown node '{}'", ad.id, ad.to))
            })?;
            let (fk, tk) = (nodes[from].kind, nodes[to].kind);
            let mut mode = None;
            let mut line = None;
            match ad.kind {
                ArcKind::Access => {
                    let ok = (fk == NodeKind::Origin && tk == NodeKind::Station)
                        || (fk == NodeKind::Station && tk == NodeKind::Destination);
                    if !ok {
                        return Err(Error::network(format!(
                            "access arc '{}' must go origin->station or station->destination",
                            ad.id
                        )));
                    }
                }
                ArcKind::Boarding => {
                    if fk != NodeKind::Station || tk != NodeKind::Line {
                        return Err(Error::network(format!(
                            "boarding arc '{}' must go station->line node",
                            ad.id
                        )));
                    }
                    if nodes[to].station != Some(from) {
                        return Err(Error::network(format!(
                            "boarding arc '{}' does not start at the station of its line node",
                            ad.id
                        )));
                    }
                    line = line_of_node[to];
                }
                ArcKind::Alighting => {
                    if fk != NodeKind::Line || tk != NodeKind::Station {
                        return Err(Error::network(format!(
                            "alighting arc '{}' must go line node->station",
                            ad.id
                        )));
                    }
                    if nodes[from].station != Some(to) {
                        return Err(Error::network(format!(
                            "alighting arc '{}' does not end at the station of its line node",
                            ad.id
                        )));
                    }
                    line = line_of_node[from];
                }
                ArcKind::Transfer => {
                    if fk != NodeKind::Station || tk != NodeKind::Station || from == to {
                        return Err(Error::network(format!(
                            "transfer arc '{}' must connect two distinct stations",
                            ad.id
                        )));
                    }
                }
                ArcKind::LineSegment => {
                    if fk != NodeKind::Line || tk != NodeKind::Line {
                        return Err(Error::network(format!(
                            "line segment '{}' must connect line nodes",
                            ad.id
                        )));
                    }
                    let lf = line_of_node[from];
                    if lf.is_none() || lf != line_of_node[to] {
                        return Err(Error::network(format!(
                            "line segment '{}' must connect nodes of one line",
                            ad.id
                        )));
                    }
                    let li = lf.unwrap();
                    match (stop_pos[from], stop_pos[to]) {
                        (Some(p), Some(q)) if q == p + 1 => {}
                        _ => {
                            return Err(Error::network(format!(
                                "line segment '{}' must connect consecutive stops of line '{}'",
                                ad.id, lines[li].id
                            )));
                        }
                    }
                    mode = Some(lines[li].mode);
                    line = Some(li);
                }
            }
            arc_index.insert(ad.id.clone(), arcs.len());
            arcs.push(Arc {
                id: ad.id.clone(),
                from,
                to,
                kind: ad.kind,
                length_m: ad.length_m,
                mode,
                line,
            });
        }

        // Every consecutive stop pair needs a declared segment.
        let mut seg_exists: HashMap<(NodeIdx, NodeIdx), ()> = HashMap::new();
        for a in &arcs {
            if a.kind == ArcKind::LineSegment {
                seg_exists.insert((a.from, a.to), ());
            }
        }
        for l in &lines {
            for pair in l.stops.windows(2) {
                if !seg_exists.contains_key(&(pair[0], pair[1])) {
                    return Err(Error::network(format!(
                        "line '{}' has no line_segment arc from '{}' to '{}'",
                        l.id, nodes[pair[0]].id, nodes[pair[1]].id
                    )));
                }
            }
        }

        // Generate missing boarding/alighting arcs between each line node and
        // its station.
        let mut has_boarding: Vec<bool> = vec![false; nodes.len()];
        let mut has_alighting: Vec<bool> = vec![false; nodes.len()];
        for a in &arcs {
            match a.kind {
                ArcKind::Boarding => has_boarding[a.to] = true,
                ArcKind::Alighting => has_alighting[a.from] = true,
                _ => {}
            }
        }
        for idx in 0..nodes.len() {
            if nodes[idx].kind != NodeKind::Line {
                continue;
            }
            let station = nodes[idx].station.expect("validated above");
            if !has_boarding[idx] {
                let id = format!("board:{}", nodes[idx].id);
                if arc_index.contains_key(&id) {
                    return Err(Error::network(format!("duplicate arc id '{id}'")));
                }
                arc_index.insert(id.clone(), arcs.len());
                arcs.push(Arc {
                    id,
                    from: station,
                    to: idx,
                    kind: ArcKind::Boarding,
                    length_m: decl.board_length_m,
                    mode: None,
                    line: line_of_node[idx],
                });
            }
            if !has_alighting[idx] {
                let id = format!("alight:{}", nodes[idx].id);
                if arc_index.contains_key(&id) {
                    return Err(Error::network(format!("duplicate arc id '{id}'")));
                }
                arc_index.insert(id.clone(), arcs.len());
                arcs.push(Arc {
                    id,
                    from: idx,
                    to: station,
                    kind: ArcKind::Alighting,
                    length_m: decl.alight_length_m,
                    mode: None,
                    line: line_of_node[idx],
                });
            }
        }

        let mut out: Vec<Vec<ArcIdx>> = vec![Vec::new(); nodes.len()];
        for (i, a) in arcs.iter().enumerate() {
            out[a.from].push(i);
        }

        Ok(TransitNetwork {
            nodes,
            arcs,
            lines,
            printed_lines,
            walk_speed_mps: decl.walk_speed_mps,
            node_index,
            arc_index,
            out,
            line_of_node,
            stop_pos,
        })
    }

    pub fn node(&self, id: &str) -> Option<NodeIdx> {
        self.node_index.get(id).copied()
    }

    pub fn arc(&self, id: &str) -> Option<ArcIdx> {
        self.arc_index.get(id).copied()
    }

    pub fn out_arcs(&self, node: NodeIdx) -> &[ArcIdx] {
        &self.out[node]
    }

    pub fn line_of_node(&self, node: NodeIdx) -> Option<LineIdx> {
        self.line_of_node[node]
    }

    pub fn stop_position(&self, node: NodeIdx) -> Option<usize> {
        self.stop_pos[node]
    }

    /// Free-flow walk duration of a walk arc.
    pub fn walk_ms(&self, arc: &Arc) -> TimeMs {
        debug_assert!(arc.kind.is_walk());
        travel_ms(arc.length_m, self.walk_speed_mps)
    }

    /// Pure run time of a line segment, excluding the dwell at its far end.
    pub fn segment_run_ms(&self, arc: &Arc) -> TimeMs {
        debug_assert_eq!(arc.kind, ArcKind::LineSegment);
        let line = &self.lines[arc.line.expect("segments carry their line")];
        travel_ms(arc.length_m, line.speed_mps)
    }

    /// Free-flow traversal time as experienced by a rider or walker: walk
    /// arcs at walking speed, segments at line speed plus the dwell at the
    /// downstream stop. Boarding arcs carry no waiting here.
    pub fn experienced_freeflow_ms(&self, arc_idx: ArcIdx) -> TimeMs {
        let arc = &self.arcs[arc_idx];
        match arc.kind {
            ArcKind::LineSegment => {
                let line = &self.lines[arc.line.expect("segments carry their line")];
                self.segment_run_ms(arc) + line.stop_ms()
            }
            _ => self.walk_ms(arc),
        }
    }

    /// Default frequency vector skeleton: one entry per printed line with the
    /// supplied value and bounds.
    pub fn uniform_frequencies(&self, y: f64, lower: f64, upper: f64) -> FrequencyVector {
        FrequencyVector::new(
            self.printed_lines
                .iter()
                .map(|p| (p.clone(), y, lower, upper))
                .collect(),
        )
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    /// Minimal declaration: one origin, one destination, one two-stop line,
    /// explicit access arcs, everything else defaulted.
    pub fn minimal_decl() -> NetworkDecl {
        NetworkDecl {
            nodes: vec![
                NodeDecl { id: "o".into(), kind: NodeKind::Origin, station: None },
                NodeDecl { id: "d".into(), kind: NodeKind::Destination, station: None },
                NodeDecl { id: "s1".into(), kind: NodeKind::Station, station: None },
                NodeDecl { id: "s2".into(), kind: NodeKind::Station, station: None },
                NodeDecl { id: "L.a.1".into(), kind: NodeKind::Line, station: Some("s1".into()) },
                NodeDecl { id: "L.a.2".into(), kind: NodeKind::Line, station: Some("s2".into()) },
            ],
            arcs: vec![
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
                ArcDecl {
                    id: "seg.L.1".into(),
                    from: "L.a.1".into(),
                    to: "L.a.2".into(),
                    kind: ArcKind::LineSegment,
                    length_m: 3000.0,
                },
            ],
            lines: vec![LineDecl {
                id: "L.a".into(),
                mode: Mode::Tramway,
                stops: vec!["L.a.1".into(), "L.a.2".into()],
                capacity: 100,
                speed_mps: 5.0,
                stop_time_s: 20.0,
                theta: 100.0,
            }],
            walk_speed_mps: 1.4,
            board_length_m: 100.0,
            alight_length_m: 100.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::minimal_decl;
    use super::*;

    #[test]
    fn minimal_network_builds_with_generated_platform_arcs() {
        let net = TransitNetwork::build(&minimal_decl()).unwrap();
        assert_eq!(net.nodes.len(), 6);
        // 2 access + 1 segment declared, 2 boarding + 2 alighting generated
        assert_eq!(net.arcs.len(), 7);
        assert_eq!(
            net.arcs.iter().filter(|a| a.kind == ArcKind::Boarding).count(),
            2
        );
        assert_eq!(
            net.arcs.iter().filter(|a| a.kind == ArcKind::Alighting).count(),
            2
        );
        let board = net.arc("board:L.a.1").unwrap();
        assert_eq!(net.arcs[board].length_m, 100.0);
        assert_eq!(net.arcs[board].line, Some(0));
        assert_eq!(net.printed_lines, vec!["L".to_string()]);
    }

    #[test]
    fn line_visiting_station_node_is_rejected() {
        let mut decl = minimal_decl();
        decl.lines[0].stops[1] = "s2".into();
        let err = TransitNetwork::build(&decl).unwrap_err();
        assert!(err.to_string().contains("not a line node"), "{err}");
    }

    #[test]
    fn dangling_reference_is_rejected() {
        let mut decl = minimal_decl();
        decl.arcs[0].to = "nowhere".into();
        let err = TransitNetwork::build(&decl).unwrap_err();
        assert!(err.to_string().contains("unknown node"), "{err}");
    }

    #[test]
    fn duplicate_arc_id_is_rejected() {
        let mut decl = minimal_decl();
        let mut dup = decl.arcs[0].clone();
        dup.from = "s2".into();
        dup.to = "d".into();
        decl.arcs.push(dup);
        let err = TransitNetwork::build(&decl).unwrap_err();
        assert!(err.to_string().contains("duplicate arc id"), "{err}");
    }

    #[test]
    fn missing_segment_is_rejected() {
        let mut decl = minimal_decl();
        decl.arcs.retain(|a| a.kind != ArcKind::LineSegment);
        let err = TransitNetwork::build(&decl).unwrap_err();
        assert!(err.to_string().contains("no line_segment arc"), "{err}");
    }

    #[test]
    fn frequency_bounds_are_enforced() {
        let net = TransitNetwork::build(&minimal_decl()).unwrap();
        let mut fv = net.uniform_frequencies(10.0, 1.0, 20.0);
        assert!(fv.validate().is_ok());
        fv.set("L", 25.0);
        assert!(matches!(
            fv.validate(),
            Err(Error::FrequencyOutOfBounds { .. })
        ));
        assert_eq!(fv.headway_s("L"), Some(3600.0 / 25.0));
    }

    #[test]
    fn printed_line_grouping() {
        assert_eq!(printed_line_id("1.a"), "1");
        assert_eq!(printed_line_id("A.back"), "A");
        assert_eq!(printed_line_id("shuttle"), "shuttle");
    }
}
