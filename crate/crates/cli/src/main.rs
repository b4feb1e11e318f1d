use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use tndp_core::design::{run_design, DesignConfig, SolverMethod};
use tndp_core::equilibrium::{ce::ce_equilibrium, msa::msa_equilibrium, EquilibriumRun};
use tndp_core::report::{scenario_hash, write_reports, ReportInputs};
use tndp_core::scenario::parse_scenario;
use tndp_core::Error;

#[derive(Parser)]
#[command(name = "tndp", version, about = "Simulation-based transit frequency design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Drive the loading towards user equilibrium and write reports
    Assign {
        /// Scenario file
        #[arg(long)]
        scenario: PathBuf,
        /// Equilibrium method: ce or msa
        #[arg(long, default_value = "ce")]
        method: String,
        /// Iteration cap (defaults to the scenario's wmax)
        #[arg(long)]
        iters: Option<usize>,
        /// Base seed (defaults to the scenario's seed)
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Search line frequencies minimizing user plus operation cost
    Design {
        /// Scenario file
        #[arg(long)]
        scenario: PathBuf,
        /// Inner equilibrium method: ce or msa
        #[arg(long, default_value = "ce")]
        method: String,
        /// Inner equilibrium iterations per evaluation
        #[arg(long = "inner-iters")]
        inner_iters: Option<usize>,
        /// Initial exploratory step (vehicles/hour)
        #[arg(long)]
        step: Option<f64>,
        /// Stop once the step falls below this threshold
        #[arg(long)]
        xi: Option<f64>,
        /// Base seed (defaults to the scenario's seed)
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse a scenario and check its invariants
    Validate {
        /// Scenario file
        #[arg(long)]
        scenario: PathBuf,
    },
}

const EXIT_SCENARIO: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn fail(code: u8, err: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(code)
}

fn classify(err: &Error) -> u8 {
    if err.is_input_error() {
        EXIT_SCENARIO
    } else {
        EXIT_RUNTIME
    }
}

fn load(path: &PathBuf) -> Result<(String, tndp_core::Scenario), (u8, String)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| (EXIT_SCENARIO, format!("cannot read {}: {e}", path.display())))?;
    let scenario = parse_scenario(&text).map_err(|e| (classify(&e), e.to_string()))?;
    Ok((text, scenario))
}

fn parse_method(text: &str) -> Result<SolverMethod, (u8, String)> {
    SolverMethod::parse(text)
        .ok_or_else(|| (EXIT_SCENARIO, format!("unknown method '{text}' (use ce or msa)")))
}

fn summarize(run: &EquilibriumRun) {
    let gap = run
        .final_gap()
        .map(|g| format!("{g:.4}"))
        .unwrap_or_else(|| "undefined".into());
    let unserved: usize = run.stats.last().map(|s| s.unserved).unwrap_or(0);
    println!(
        "iterations: {}  gap: {gap}  total generalized cost: {:.1}  unserved: {unserved}",
        run.stats.len(),
        run.total_cost(),
    );
}

fn main() -> ExitCode {
    env_logger::init();
    if let Ok(threads) = std::env::var("TNDP_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => return fail(EXIT_SCENARIO, "TNDP_THREADS must be a positive integer"),
        }
    }

    let cli = Cli::parse();
    match cli.command {
        Command::Assign {
            scenario,
            method,
            iters,
            seed,
            out,
        } => {
            let started = Instant::now();
            let (text, scn) = match load(&scenario) {
                Ok(v) => v,
                Err((code, msg)) => return fail(code, msg),
            };
            let method = match parse_method(&method) {
                Ok(m) => m,
                Err((code, msg)) => return fail(code, msg),
            };
            let problem = match scn.build_problem() {
                Ok(p) => p,
                Err(e) => return fail(classify(&e), e),
            };
            let freqs = scn.declared_frequencies(&problem.network);
            let iters = iters.unwrap_or(scn.params.w_max);
            let seed = seed.unwrap_or(scn.params.seed);
            let run = match method {
                SolverMethod::Ce => ce_equilibrium(&problem, &freqs, iters, seed),
                SolverMethod::Msa => msa_equilibrium(&problem, &freqs, iters, seed),
            };
            let run = match run {
                Ok(r) => r,
                Err(e) => return fail(classify(&e), e),
            };
            let inputs = ReportInputs {
                problem: &problem,
                run: &run,
                design: None,
                scenario_hash: scenario_hash(&text),
                seed,
                solver: method.as_str().into(),
                wall_clock_s: started.elapsed().as_secs_f64(),
            };
            if let Err(e) = write_reports(&inputs, &out) {
                return fail(EXIT_RUNTIME, e);
            }
            summarize(&run);
            println!("reports written to {}", out.display());
            ExitCode::SUCCESS
        }
        Command::Design {
            scenario,
            method,
            inner_iters,
            step,
            xi,
            seed,
            out,
        } => {
            let started = Instant::now();
            let (text, scn) = match load(&scenario) {
                Ok(v) => v,
                Err((code, msg)) => return fail(code, msg),
            };
            let method = match parse_method(&method) {
                Ok(m) => m,
                Err((code, msg)) => return fail(code, msg),
            };
            let problem = match scn.build_problem() {
                Ok(p) => p,
                Err(e) => return fail(classify(&e), e),
            };
            let seed = seed.unwrap_or(scn.params.seed);
            let config = DesignConfig {
                initial: scn.initial_design_frequencies(&problem.network),
                step0: step.unwrap_or(scn.params.step0),
                xi: xi.unwrap_or(scn.params.xi),
                method,
                inner_iters: inner_iters.unwrap_or(scn.params.inner_iters),
                seed,
            };
            let outcome = match run_design(&problem, &config) {
                Ok(o) => o,
                Err(e) => return fail(classify(&e), e),
            };
            let inputs = ReportInputs {
                problem: &problem,
                run: &outcome.final_run,
                design: Some(&outcome.log),
                scenario_hash: scenario_hash(&text),
                seed,
                solver: method.as_str().into(),
                wall_clock_s: started.elapsed().as_secs_f64(),
            };
            if let Err(e) = write_reports(&inputs, &out) {
                return fail(EXIT_RUNTIME, e);
            }
            let best: Vec<String> = outcome
                .best
                .pairs()
                .into_iter()
                .map(|(id, y)| format!("{id}={y}"))
                .collect();
            println!(
                "best frequencies: {}  Z: {:.1}  evaluations logged: {}",
                best.join(" "),
                outcome.objective,
                outcome.log.rows.len(),
            );
            summarize(&outcome.final_run);
            println!("reports written to {}", out.display());
            ExitCode::SUCCESS
        }
        Command::Validate { scenario } => {
            let (_, scn) = match load(&scenario) {
                Ok(v) => v,
                Err((code, msg)) => return fail(code, msg),
            };
            let problem = match scn.build_problem() {
                Ok(p) => p,
                Err(e) => return fail(classify(&e), e),
            };
            println!("{}", scn.summary(&problem.network));
            for (i, (o, d)) in problem.od_ids.iter().enumerate() {
                println!(
                    "  {o} -> {d}: demand {}, {} candidate paths",
                    problem.demands[i],
                    problem.paths[i].len()
                );
                for (r, path) in problem.paths[i].iter().enumerate() {
                    let legs: Vec<String> = path
                        .legs
                        .iter()
                        .map(|leg| {
                            let line = &problem.network.lines[leg.line];
                            format!(
                                "{}[{}->{}]",
                                line.id,
                                problem.network.nodes[leg.board].id,
                                problem.network.nodes[leg.alight].id
                            )
                        })
                        .collect();
                    println!(
                        "    r{}: walk {:.0}s ride {:.0}s cost {:.2}  {}",
                        r + 1,
                        path.free_flow_walk_s,
                        path.free_flow_invehicle_s,
                        path.cost_basis(&problem.params),
                        if legs.is_empty() {
                            "walk only".to_string()
                        } else {
                            legs.join(" + ")
                        }
                    );
                }
            }
            println!("scenario OK");
            ExitCode::SUCCESS
        }
    }
}
