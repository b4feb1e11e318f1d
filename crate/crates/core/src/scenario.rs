//! Line-oriented sectioned scenario format and problem assembly.
//!
//! ```text
//! # comment
//! [nodes]
//! # id kind [station]
//! o1    origin
//! s1    station
//! 1.a.1 line s1
//! [arcs]
//! # id from to kind length_m
//! acc.o1.s1 o1 s1 access 300
//! [lines]
//! # id mode frequency capacity speed stop_time theta stops...
//! 1.a tramway 2min 500 5.0 20 100 1.a.1 1.a.3
//! [demand]
//! # origin destination count
//! o1 d13 2000
//! [params]
//! t0 07:00
//! ```
//!
//! Whitespace-delimited columns, `#` starts a comment. Clock values accept
//! `HH:MM` or bare seconds since midnight. The per-line frequency accepts
//! vehicles per hour (`30`) or a headway (`2min`, `120s`); both directions of
//! a printed line must declare the same value.

use std::collections::HashMap;

use crate::cost::CostParams;
use crate::error::{Error, Result};
use crate::network::{
    ArcDecl, ArcKind, FrequencyVector, LineDecl, Mode, NetworkDecl, NodeDecl, NodeIdx, NodeKind,
    TransitNetwork,
};
use crate::paths::{k_shortest_paths, TransitPath};
use crate::time::{format_clock, parse_clock, Horizon};

/// One `[lines]` row: a directional service declaration plus its operating
/// frequency in vehicles per hour.
#[derive(Debug, Clone, PartialEq)]
pub struct LineRow {
    pub id: String,
    pub mode: Mode,
    pub frequency: f64,
    pub capacity: u32,
    pub speed_mps: f64,
    pub stop_time_s: f64,
    pub theta: f64,
    pub stops: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemandRow {
    pub origin: String,
    pub destination: String,
    pub count: u32,
}

/// Global parameters with their defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub cost: CostParams,
    pub t0_s: f64,
    pub window_s: f64,
    pub windows: usize,
    pub tmax_h: f64,
    pub walk_speed_mps: f64,
    pub board_length_m: f64,
    pub alight_length_m: f64,
    pub kappa: f64,
    pub k_paths: usize,
    pub seed: u64,
    pub w_max: usize,
    pub inner_iters: usize,
    pub y_lower: f64,
    pub y_upper: f64,
    pub y0: f64,
    pub step0: f64,
    pub xi: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            cost: CostParams::default(),
            t0_s: 7.0 * 3600.0,
            window_s: 300.0,
            windows: 24,
            tmax_h: 12.0,
            walk_speed_mps: 1.4,
            board_length_m: 100.0,
            alight_length_m: 100.0,
            kappa: 1.6,
            k_paths: 5,
            seed: 42,
            w_max: 20,
            inner_iters: 10,
            y_lower: 1.0,
            y_upper: 20.0,
            y0: 10.0,
            step0: 4.0,
            xi: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scenario {
    pub nodes: Vec<NodeDecl>,
    pub arcs: Vec<ArcDecl>,
    pub lines: Vec<LineRow>,
    pub demand: Vec<DemandRow>,
    pub params: ScenarioParams,
}

/// Everything a solver needs, assembled once per run: the validated network,
/// the per-OD demand and candidate path sets, cost parameters and horizon.
#[derive(Debug, Clone)]
pub struct Problem {
    pub network: TransitNetwork,
    pub od_ids: Vec<(String, String)>,
    pub od_nodes: Vec<(NodeIdx, NodeIdx)>,
    pub demands: Vec<u32>,
    pub paths: Vec<Vec<TransitPath>>,
    pub params: CostParams,
    pub horizon: Horizon,
    pub kappa: f64,
}

fn parse_frequency(text: &str, line: usize) -> Result<f64> {
    if let Some(mins) = text.strip_suffix("min") {
        let m: f64 = mins
            .parse()
            .map_err(|_| Error::scenario(line, format!("bad headway '{text}'")))?;
        return Ok(3600.0 / (m * 60.0));
    }
    if let Some(secs) = text.strip_suffix('s') {
        let s: f64 = secs
            .parse()
            .map_err(|_| Error::scenario(line, format!("bad headway '{text}'")))?;
        return Ok(3600.0 / s);
    }
    text.parse()
        .map_err(|_| Error::scenario(line, format!("bad frequency '{text}'")))
}

fn parse_num<T: std::str::FromStr>(text: &str, what: &str, line: usize) -> Result<T> {
    text.parse()
        .map_err(|_| Error::scenario(line, format!("bad {what} '{text}'")))
}

fn parse_clock_or_seconds(text: &str, line: usize) -> Result<f64> {
    if text.contains(':') {
        parse_clock(text, line)
    } else {
        parse_num(text, "time", line)
    }
}

/// Parse and validate a scenario file.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut scenario = Scenario {
        nodes: Vec::new(),
        arcs: Vec::new(),
        lines: Vec::new(),
        demand: Vec::new(),
        params: ScenarioParams::default(),
    };
    let mut section = String::new();
    let mut line_rows: Vec<(usize, usize)> = Vec::new(); // (lines index, file line)

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            if !content.ends_with(']') {
                return Err(Error::scenario(lineno, format!("bad section header '{content}'")));
            }
            let name = &content[1..content.len() - 1];
            match name {
                "nodes" | "arcs" | "lines" | "demand" | "params" => section = name.to_string(),
                other => {
                    return Err(Error::scenario(lineno, format!("unknown section '[{other}]'")));
                }
            }
            continue;
        }
        let cols: Vec<&str> = content.split_whitespace().collect();
        match section.as_str() {
            "nodes" => {
                if cols.len() < 2 || cols.len() > 3 {
                    return Err(Error::scenario(lineno, "expected: id kind [station]"));
                }
                let kind = NodeKind::parse(cols[1])
                    .ok_or_else(|| Error::scenario(lineno, format!("unknown node kind '{}'", cols[1])))?;
                scenario.nodes.push(NodeDecl {
                    id: cols[0].to_string(),
                    kind,
                    station: cols.get(2).map(|s| s.to_string()),
                });
            }
            "arcs" => {
                if cols.len() != 5 {
                    return Err(Error::scenario(lineno, "expected: id from to kind length_m"));
                }
                let kind = ArcKind::parse(cols[3])
                    .ok_or_else(|| Error::scenario(lineno, format!("unknown arc kind '{}'", cols[3])))?;
                scenario.arcs.push(ArcDecl {
                    id: cols[0].to_string(),
                    from: cols[1].to_string(),
                    to: cols[2].to_string(),
                    kind,
                    length_m: parse_num(cols[4], "length", lineno)?,
                });
            }
            "lines" => {
                if cols.len() < 9 {
                    return Err(Error::scenario(
                        lineno,
                        "expected: id mode frequency capacity speed stop_time theta stops...",
                    ));
                }
                let mode = Mode::parse(cols[1])
                    .ok_or_else(|| Error::scenario(lineno, format!("unknown mode '{}'", cols[1])))?;
                let stop_time = if cols[5] == "-" {
                    20.0
                } else {
                    parse_num(cols[5], "stop_time", lineno)?
                };
                line_rows.push((scenario.lines.len(), lineno));
                scenario.lines.push(LineRow {
                    id: cols[0].to_string(),
                    mode,
                    frequency: parse_frequency(cols[2], lineno)?,
                    capacity: parse_num(cols[3], "capacity", lineno)?,
                    speed_mps: parse_num(cols[4], "speed", lineno)?,
                    stop_time_s: stop_time,
                    theta: parse_num(cols[6], "theta", lineno)?,
                    stops: cols[7..].iter().map(|s| s.to_string()).collect(),
                });
            }
            "demand" => {
                if cols.len() != 3 {
                    return Err(Error::scenario(lineno, "expected: origin destination count"));
                }
                scenario.demand.push(DemandRow {
                    origin: cols[0].to_string(),
                    destination: cols[1].to_string(),
                    count: parse_num(cols[2], "count", lineno)?,
                });
            }
            "params" => {
                if cols.len() != 2 {
                    return Err(Error::scenario(lineno, "expected: key value"));
                }
                let p = &mut scenario.params;
                let v = cols[1];
                match cols[0] {
                    "t0" => p.t0_s = parse_clock_or_seconds(v, lineno)?,
                    "window_s" => p.window_s = parse_num(v, "window_s", lineno)?,
                    "windows" => p.windows = parse_num(v, "windows", lineno)?,
                    "tmax_h" => p.tmax_h = parse_num(v, "tmax_h", lineno)?,
                    "desired_arrival" => {
                        p.cost.desired_arrival_s = parse_clock_or_seconds(v, lineno)?
                    }
                    "tolerance_s" => p.cost.tolerance_s = parse_num(v, "tolerance_s", lineno)?,
                    "value_of_time" => p.cost.value_of_time = parse_num(v, "value_of_time", lineno)?,
                    "transfer_penalty" => {
                        p.cost.transfer_penalty = parse_num(v, "transfer_penalty", lineno)?
                    }
                    "early_penalty" => p.cost.early_penalty = parse_num(v, "early_penalty", lineno)?,
                    "late_penalty" => p.cost.late_penalty = parse_num(v, "late_penalty", lineno)?,
                    "fare" => p.cost.default_fare = parse_num(v, "fare", lineno)?,
                    "walk_speed" => p.walk_speed_mps = parse_num(v, "walk_speed", lineno)?,
                    "board_length_m" => p.board_length_m = parse_num(v, "board_length_m", lineno)?,
                    "alight_length_m" => {
                        p.alight_length_m = parse_num(v, "alight_length_m", lineno)?
                    }
                    "kappa" => p.kappa = parse_num(v, "kappa", lineno)?,
                    "k_paths" => p.k_paths = parse_num(v, "k_paths", lineno)?,
                    "seed" => p.seed = parse_num(v, "seed", lineno)?,
                    "wmax" => p.w_max = parse_num(v, "wmax", lineno)?,
                    "inner_iters" => p.inner_iters = parse_num(v, "inner_iters", lineno)?,
                    "y_lower" => p.y_lower = parse_num(v, "y_lower", lineno)?,
                    "y_upper" => p.y_upper = parse_num(v, "y_upper", lineno)?,
                    "y0" => p.y0 = parse_num(v, "y0", lineno)?,
                    "step0" => p.step0 = parse_num(v, "step0", lineno)?,
                    "xi" => p.xi = parse_num(v, "xi", lineno)?,
                    other => {
                        return Err(Error::scenario(lineno, format!("unknown parameter '{other}'")));
                    }
                }
            }
            "" => return Err(Error::scenario(lineno, "content before any section header")),
            _ => unreachable!(),
        }
    }

    // Cross-row validation now that params are known.
    if scenario.params.windows == 0 {
        return Err(Error::scenario(0, "windows must be positive"));
    }
    if scenario.params.y_lower > scenario.params.y_upper {
        return Err(Error::scenario(
            0,
            format!(
                "y_lower {} exceeds y_upper {}",
                scenario.params.y_lower, scenario.params.y_upper
            ),
        ));
    }
    let mut by_printed: HashMap<String, (usize, f64)> = HashMap::new();
    for &(idx, lineno) in &line_rows {
        let row = &scenario.lines[idx];
        let y = row.frequency;
        if y < scenario.params.y_lower || y > scenario.params.y_upper {
            return Err(Error::scenario(
                lineno,
                format!(
                    "frequency {y} for line '{}' violates bounds [{}, {}]",
                    row.id, scenario.params.y_lower, scenario.params.y_upper
                ),
            ));
        }
        let printed = crate::network::printed_line_id(&row.id).to_string();
        match by_printed.get(&printed) {
            Some(&(_, prev)) if prev != y => {
                return Err(Error::scenario(
                    lineno,
                    format!(
                        "line '{}' declares frequency {y} but its other direction declared {prev}",
                        row.id
                    ),
                ));
            }
            None => {
                by_printed.insert(printed, (lineno, y));
            }
            _ => {}
        }
    }
    let node_ids: HashMap<&str, NodeKind> = scenario
        .nodes
        .iter()
        .map(|n| (n.id.as_str(), n.kind))
        .collect();
    for row in &scenario.demand {
        match node_ids.get(row.origin.as_str()) {
            Some(NodeKind::Origin) => {}
            _ => {
                return Err(Error::scenario(
                    0,
                    format!("demand references '{}' which is not an origin node", row.origin),
                ));
            }
        }
        match node_ids.get(row.destination.as_str()) {
            Some(NodeKind::Destination) => {}
            _ => {
                return Err(Error::scenario(
                    0,
                    format!(
                        "demand references '{}' which is not a destination node",
                        row.destination
                    ),
                ));
            }
        }
    }

    Ok(scenario)
}

impl Scenario {
    pub fn network_decl(&self) -> NetworkDecl {
        NetworkDecl {
            nodes: self.nodes.clone(),
            arcs: self.arcs.clone(),
            lines: self
                .lines
                .iter()
                .map(|row| LineDecl {
                    id: row.id.clone(),
                    mode: row.mode,
                    stops: row.stops.clone(),
                    capacity: row.capacity,
                    speed_mps: row.speed_mps,
                    stop_time_s: row.stop_time_s,
                    theta: row.theta,
                })
                .collect(),
            walk_speed_mps: self.params.walk_speed_mps,
            board_length_m: self.params.board_length_m,
            alight_length_m: self.params.alight_length_m,
        }
    }

    pub fn horizon(&self) -> Horizon {
        Horizon::new(
            self.params.t0_s,
            self.params.window_s,
            self.params.windows,
            self.params.tmax_h,
        )
    }

    /// Operating frequencies as declared in the file, with the global bounds.
    pub fn declared_frequencies(&self, net: &TransitNetwork) -> FrequencyVector {
        let mut by_printed: HashMap<&str, f64> = HashMap::new();
        for row in &self.lines {
            by_printed.insert(crate::network::printed_line_id(&row.id), row.frequency);
        }
        FrequencyVector::new(
            net.printed_lines
                .iter()
                .map(|p| {
                    (
                        p.clone(),
                        by_printed[p.as_str()],
                        self.params.y_lower,
                        self.params.y_upper,
                    )
                })
                .collect(),
        )
    }

    /// Design starting point: `y0` on every printed line.
    pub fn initial_design_frequencies(&self, net: &TransitNetwork) -> FrequencyVector {
        net.uniform_frequencies(self.params.y0, self.params.y_lower, self.params.y_upper)
    }

    /// Build the network, enumerate candidate paths and bundle everything a
    /// solver needs. Demand on an unreachable OD pair is an error.
    pub fn build_problem(&self) -> Result<Problem> {
        let network = TransitNetwork::build(&self.network_decl())?;
        let mut od_ids = Vec::new();
        let mut od_nodes = Vec::new();
        let mut demands = Vec::new();
        let mut paths = Vec::new();
        for row in &self.demand {
            let o = network.node(&row.origin).expect("validated at parse");
            let d = network.node(&row.destination).expect("validated at parse");
            let candidates = k_shortest_paths(&network, o, d, self.params.k_paths, &self.params.cost);
            if candidates.is_empty() && row.count > 0 {
                return Err(Error::NoPathForOd {
                    origin: row.origin.clone(),
                    destination: row.destination.clone(),
                });
            }
            od_ids.push((row.origin.clone(), row.destination.clone()));
            od_nodes.push((o, d));
            demands.push(row.count);
            paths.push(candidates);
        }
        Ok(Problem {
            network,
            od_ids,
            od_nodes,
            demands,
            paths,
            params: self.params.cost.clone(),
            horizon: self.horizon(),
            kappa: self.params.kappa,
        })
    }

    // --- in-memory experiment overrides -----------------------------------

    /// Set every OD pair's demand.
    pub fn set_demand_per_od(&mut self, count: u32) {
        for row in &mut self.demand {
            row.count = count;
        }
    }

    /// Set every line's operating frequency (vehicles per hour), widening the
    /// upper bound when needed.
    pub fn set_frequency_all(&mut self, veh_per_hour: f64) {
        for row in &mut self.lines {
            row.frequency = veh_per_hour;
        }
        if veh_per_hour > self.params.y_upper {
            self.params.y_upper = veh_per_hour;
        }
        if veh_per_hour < self.params.y_lower {
            self.params.y_lower = veh_per_hour;
        }
    }

    /// Set the vehicle capacity of every line of `mode`.
    pub fn set_capacity(&mut self, mode: Mode, capacity: u32) {
        for row in &mut self.lines {
            if row.mode == mode {
                row.capacity = capacity;
            }
        }
    }

    /// Canonical text form; `parse_scenario` of the output reproduces `self`.
    pub fn serialize(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        out.push_str("[nodes]\n");
        for n in &self.nodes {
            let kind = match n.kind {
                NodeKind::Origin => "origin",
                NodeKind::Destination => "destination",
                NodeKind::Station => "station",
                NodeKind::Line => "line",
            };
            match &n.station {
                Some(s) => writeln!(out, "{} {} {}", n.id, kind, s).unwrap(),
                None => writeln!(out, "{} {}", n.id, kind).unwrap(),
            }
        }
        out.push_str("[arcs]\n");
        for a in &self.arcs {
            let kind = match a.kind {
                ArcKind::Access => "access",
                ArcKind::Boarding => "boarding",
                ArcKind::Alighting => "alighting",
                ArcKind::Transfer => "transfer",
                ArcKind::LineSegment => "line_segment",
            };
            writeln!(out, "{} {} {} {} {}", a.id, a.from, a.to, kind, a.length_m).unwrap();
        }
        out.push_str("[lines]\n");
        for l in &self.lines {
            writeln!(
                out,
                "{} {} {} {} {} {} {} {}",
                l.id,
                l.mode.as_str(),
                l.frequency,
                l.capacity,
                l.speed_mps,
                l.stop_time_s,
                l.theta,
                l.stops.join(" ")
            )
            .unwrap();
        }
        out.push_str("[demand]\n");
        for d in &self.demand {
            writeln!(out, "{} {} {}", d.origin, d.destination, d.count).unwrap();
        }
        out.push_str("[params]\n");
        let p = &self.params;
        writeln!(out, "t0 {}", p.t0_s).unwrap();
        writeln!(out, "window_s {}", p.window_s).unwrap();
        writeln!(out, "windows {}", p.windows).unwrap();
        writeln!(out, "tmax_h {}", p.tmax_h).unwrap();
        writeln!(out, "desired_arrival {}", p.cost.desired_arrival_s).unwrap();
        writeln!(out, "tolerance_s {}", p.cost.tolerance_s).unwrap();
        writeln!(out, "value_of_time {}", p.cost.value_of_time).unwrap();
        writeln!(out, "transfer_penalty {}", p.cost.transfer_penalty).unwrap();
        writeln!(out, "early_penalty {}", p.cost.early_penalty).unwrap();
        writeln!(out, "late_penalty {}", p.cost.late_penalty).unwrap();
        writeln!(out, "fare {}", p.cost.default_fare).unwrap();
        writeln!(out, "walk_speed {}", p.walk_speed_mps).unwrap();
        writeln!(out, "board_length_m {}", p.board_length_m).unwrap();
        writeln!(out, "alight_length_m {}", p.alight_length_m).unwrap();
        writeln!(out, "kappa {}", p.kappa).unwrap();
        writeln!(out, "k_paths {}", p.k_paths).unwrap();
        writeln!(out, "seed {}", p.seed).unwrap();
        writeln!(out, "wmax {}", p.w_max).unwrap();
        writeln!(out, "inner_iters {}", p.inner_iters).unwrap();
        writeln!(out, "y_lower {}", p.y_lower).unwrap();
        writeln!(out, "y_upper {}", p.y_upper).unwrap();
        writeln!(out, "y0 {}", p.y0).unwrap();
        writeln!(out, "step0 {}", p.step0).unwrap();
        writeln!(out, "xi {}", p.xi).unwrap();
        out
    }

    /// Short human summary used by `validate`.
    pub fn summary(&self, net: &TransitNetwork) -> String {
        let trams = self
            .lines
            .iter()
            .filter(|l| l.mode == Mode::Tramway)
            .count();
        let metros = self.lines.iter().filter(|l| l.mode == Mode::Metro).count();
        format!(
            "{} nodes, {} arcs, {} line directions ({} tram, {} metro, {} printed lines), {} OD pairs, total demand {}, {} departure windows of {} s from {}",
            net.nodes.len(),
            net.arcs.len(),
            self.lines.len(),
            trams,
            metros,
            net.printed_lines.len(),
            self.demand.len(),
            self.demand.iter().map(|d| d.count).sum::<u32>(),
            self.params.windows,
            self.params.window_s,
            format_clock(self.params.t0_s),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = "
[nodes]
o origin
d destination
s1 station
s2 station
L.a.1 line s1
L.a.2 line s2
[arcs]
acc.o o s1 access 300
acc.d s2 d access 300
seg.1 L.a.1 L.a.2 line_segment 3000
[lines]
L.a tramway 12 100 5.0 20 100 L.a.1 L.a.2
[demand]
o d 10
";

    #[test]
    fn minimal_file_parses_with_defaults() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.params.window_s, 300.0);
        assert_eq!(s.params.windows, 24);
        assert_eq!(s.params.cost.value_of_time, 7.0);
        assert_eq!(s.params.cost.early_penalty, 4.0);
        assert_eq!(s.params.cost.late_penalty, 15.0);
        assert_eq!(s.params.kappa, 1.6);
        assert_eq!(s.params.k_paths, 5);
        assert_eq!(s.params.t0_s, 25200.0);
        assert_eq!(s.params.cost.desired_arrival_s, 32400.0);
        let problem = s.build_problem().unwrap();
        assert_eq!(problem.paths.len(), 1);
        assert_eq!(problem.paths[0].len(), 1);
    }

    #[test]
    fn frequency_above_bound_is_rejected_with_line_number() {
        let text = MINIMAL.replace("L.a tramway 12", "L.a tramway 25");
        let err = parse_scenario(&text).unwrap_err();
        match err {
            Error::Scenario { line, message } => {
                assert!(message.contains("violates bounds"), "{message}");
                assert!(line > 0);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn headway_suffixes_convert_to_frequency() {
        let text = MINIMAL
            .replace("L.a tramway 12", "L.a tramway 5min")
            .replace("[demand]", "[params]\ny_upper 20\n[demand]");
        let s = parse_scenario(&text).unwrap();
        assert_eq!(s.lines[0].frequency, 12.0);
        let text2 = MINIMAL.replace("L.a tramway 12", "L.a tramway 300s");
        let s2 = parse_scenario(&text2).unwrap();
        assert_eq!(s2.lines[0].frequency, 12.0);
    }

    #[test]
    fn mismatched_direction_frequencies_are_rejected() {
        let text = MINIMAL.replace(
            "[demand]",
            "L.b tramway 10 100 5.0 20 100 L.b.1 L.b.2\n[demand]",
        );
        // add the second direction's nodes so parsing reaches the check
        let text = text.replace(
            "L.a.2 line s2",
            "L.a.2 line s2\nL.b.1 line s2\nL.b.2 line s1",
        );
        let err = parse_scenario(&text).unwrap_err();
        assert!(err.to_string().contains("other direction"), "{err}");
    }

    #[test]
    fn unknown_section_and_key_are_rejected() {
        assert!(parse_scenario("[nope]\n").is_err());
        assert!(parse_scenario("[params]\nfrobnicate 3\n").is_err());
    }

    #[test]
    fn roundtrip_parse_serialize() {
        let s = parse_scenario(MINIMAL).unwrap();
        let s2 = parse_scenario(&s.serialize()).unwrap();
        assert_eq!(s, s2);
    }
}
