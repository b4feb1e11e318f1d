use tndp_core::design::{evaluate_design, SolverMethod};
use tndp_core::scenario::parse_scenario;

fn main() {
    let text = std::fs::read_to_string("scenarios/sioux_falls.scn").unwrap();
    let scn = parse_scenario(&text).unwrap();
    let problem = scn.build_problem().unwrap();
    let cases: &[[f64; 5]] = &[
        [10., 10., 10., 10., 10.],
        [14., 10., 10., 10., 10.],
        [10., 10., 14., 10., 6.],
        [14., 10., 14., 10., 6.],
        [10., 10., 14., 10., 2.],
        [10., 10., 18., 10., 6.],
    ];
    for base in [42u64, 999] {
        for ys in cases {
            let mut f = scn.initial_design_frequencies(&problem.network);
            for (i, y) in ys.iter().enumerate() {
                f.set_at(i, *y);
            }
            let (z, run) = evaluate_design(&problem, &f, SolverMethod::Ce, 10, base).unwrap();
            println!(
                "base {base} y={ys:?} Z={z:.0} user={:.0} unserved={}",
                run.total_cost(),
                run.stats.last().unwrap().unserved
            );
        }
        println!();
    }
}
