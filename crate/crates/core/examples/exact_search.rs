//! Branch-and-bound against exhaustive enumeration on tiny instances.

use std::time::{Duration, Instant};

use mec_alloc::exact::{branch_and_bound, enumerate_optimum};
use mec_alloc::lpcore::{relax, solve_program, LpOptions};
use mec_alloc::model::build_milp;
use mec_alloc::scenario::tiny_instance;

fn main() -> mec_alloc::Result<()> {
    println!("{:>4} {:>5} {:>4} {:>10} {:>10} {:>10} {:>6}", "seed", "hosts", "svc", "LP", "B&B", "enum", "nodes");
    let start = Instant::now();
    for seed in 0..12 {
        let (s, req) = tiny_instance(seed)?;
        let m = build_milp(&s, &req);
        let lp = solve_program(&relax(&m).lp, &LpOptions::default());
        let bnb = branch_and_bound(&m, Duration::from_secs(10), seed);
        let (_, opt) = enumerate_optimum(&s, &req)?;
        println!(
            "{seed:>4} {:>5} {:>4} {:>10.4} {:>10.4} {:>10.4} {:>6}",
            s.n_hosts(),
            req.len(),
            lp.objective,
            bnb.incumbent_objective,
            opt,
            bnb.nodes_explored
        );
        assert!((bnb.incumbent_objective - opt).abs() <= 1e-6);
    }
    println!("{:.2} s", start.elapsed().as_secs_f64());
    Ok(())
}
