//! CSV report writers and the run manifest.
//!
//! Format contract: comma delimiter, header row, `.` decimal separator, LF
//! line endings; costs and gaps with two decimals, times as integer seconds.
//! Identical run results serialize to byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::design::DesignLog;
use crate::equilibrium::EquilibriumRun;
use crate::error::Result;
use crate::scenario::Problem;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub scenario_hash: String,
    pub seed: u64,
    pub solver: String,
    pub iterations: usize,
    pub outputs: Vec<String>,
    pub wall_clock_s: f64,
}

pub fn scenario_hash(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    format!("sha256:{:x}", hasher.finalize())
}

fn fmt_cost(x: f64) -> String {
    format!("{x:.2}")
}

fn fmt_time(x: f64) -> String {
    format!("{}", x.round() as i64)
}

fn passengers_csv(problem: &Problem, run: &EquilibriumRun) -> String {
    let mut out = String::from(
        "id,origin,destination,window,path_rank,status,depart_s,arrive_s,walk_s,invehicle_s,wait_s,transfers,penalty,fare,cost\n",
    );
    for rec in &run.records {
        let (origin, destination) = &problem.od_ids[rec.od];
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            rec.id,
            origin,
            destination,
            rec.window,
            rec.path + 1,
            if rec.served { "served" } else { "unserved" },
            fmt_time(rec.depart_s),
            rec.arrive_s.map(fmt_time).unwrap_or_default(),
            fmt_time(rec.walk_s),
            fmt_time(rec.invehicle_s),
            fmt_time(rec.wait_s),
            rec.transfers,
            fmt_cost(rec.penalty),
            fmt_cost(rec.fare),
            rec.cost.map(fmt_cost).unwrap_or_default(),
        ));
    }
    out
}

fn gap_csv(run: &EquilibriumRun) -> String {
    let mut out = String::from("iteration,gap,total_cost,compute_s\n");
    for stat in &run.stats {
        out.push_str(&format!(
            "{},{},{},{}\n",
            stat.iteration,
            stat.gap.map(fmt_cost).unwrap_or_default(),
            fmt_cost(stat.total_cost),
            stat.wall_s.floor() as i64,
        ));
    }
    out
}

fn validation_csv(problem: &Problem, run: &EquilibriumRun) -> String {
    let k = problem.paths.iter().map(|p| p.len()).max().unwrap_or(0);
    let mut out = String::from("origin,destination,window");
    for r in 1..=k {
        out.push_str(&format!(",pax_r{r}"));
    }
    for r in 1..=k {
        out.push_str(&format!(",cost_r{r}"));
    }
    out.push('\n');
    for (od, h, cells) in &run.validation.rows {
        let (origin, destination) = &problem.od_ids[*od];
        out.push_str(&format!("{origin},{destination},{h}"));
        for r in 0..k {
            match cells.get(r) {
                Some(c) => out.push_str(&format!(",{}", c.flow)),
                None => out.push(','),
            }
        }
        for r in 0..k {
            match cells.get(r) {
                Some(c) => out.push_str(&format!(",{}", fmt_cost(c.cost))),
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

fn design_csv(log: &DesignLog) -> String {
    let mut out = String::from("delta");
    for printed in &log.printed_lines {
        out.push_str(&format!(",f_{printed}"));
    }
    out.push_str(",Z\n");
    for row in &log.rows {
        match row.step {
            Some(s) => out.push_str(&format!("{s}")),
            None => {}
        }
        for y in &row.frequencies {
            out.push_str(&format!(",{y}"));
        }
        out.push_str(&format!(",{}\n", fmt_cost(row.objective)));
    }
    out
}

/// What a run wants written.
pub struct ReportInputs<'a> {
    pub problem: &'a Problem,
    pub run: &'a EquilibriumRun,
    pub design: Option<&'a DesignLog>,
    pub scenario_hash: String,
    pub seed: u64,
    pub solver: String,
    pub wall_clock_s: f64,
}

/// Write the CSV reports plus `manifest.json` into `out_dir` (creating it),
/// returning the manifest.
pub fn write_reports(inputs: &ReportInputs, out_dir: &Path) -> Result<RunManifest> {
    fs::create_dir_all(out_dir)?;
    let mut outputs: Vec<(String, String)> = vec![
        (
            "passengers.csv".into(),
            passengers_csv(inputs.problem, inputs.run),
        ),
        ("gap.csv".into(), gap_csv(inputs.run)),
        (
            "validation.csv".into(),
            validation_csv(inputs.problem, inputs.run),
        ),
    ];
    if let Some(log) = inputs.design {
        outputs.push(("design_log.csv".into(), design_csv(log)));
    }
    let mut names = Vec::new();
    for (name, content) in &outputs {
        fs::write(out_dir.join(name), content)?;
        names.push(name.clone());
    }
    let manifest = RunManifest {
        scenario_hash: inputs.scenario_hash.clone(),
        seed: inputs.seed,
        solver: inputs.solver.clone(),
        iterations: inputs.run.stats.len(),
        outputs: names,
        wall_clock_s: inputs.wall_clock_s,
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    fs::write(out_dir.join("manifest.json"), json)?;
    Ok(manifest)
}

/// Paths of the files a successful run writes.
pub fn output_paths(out_dir: &Path, with_design: bool) -> Vec<PathBuf> {
    let mut v = vec![
        out_dir.join("passengers.csv"),
        out_dir.join("gap.csv"),
        out_dir.join("validation.csv"),
    ];
    if with_design {
        v.push(out_dir.join("design_log.csv"));
    }
    v.push(out_dir.join("manifest.json"));
    v
}
