//! Builds the mixed-integer program of a desk instance, exports it in LP
//! format and solves its linear relaxation.

use mec_alloc::harness::{generate_instance, Axis, ExperimentConfig};
use mec_alloc::lpcore::{relax, solve_program, LpOptions};
use mec_alloc::model::{build_milp, export_lp};
use mec_alloc::policies::PolicyKind;

fn main() -> mec_alloc::Result<()> {
    let cfg = ExperimentConfig::new(Axis::Alpha, vec![0.6], vec![PolicyKind::Lr]);
    let inst = generate_instance(&cfg, None, 0.6, 1)?;
    let (s, req) = (&inst.scenario, &inst.requests);

    let model = build_milp(s, req);
    println!(
        "{} columns ({} binary), {} rows",
        model.lp.n_vars(),
        model.lp.n_binaries(),
        model.lp.n_rows()
    );
    let text = export_lp(&model);
    for line in text.lines().take(4) {
        println!("  {}", if line.len() > 96 { &line[..96] } else { line });
    }
    println!("  ... {} lines", text.lines().count());

    let sol = solve_program(&relax(&model).lp, &LpOptions::default());
    println!("relaxation {:?}: J = {:.4} after {} pivots", sol.status, sol.objective, sol.iterations);
    for (j, _) in req.iter().enumerate().take(6) {
        let y: Vec<String> = model.y_vars.iter().map(|row| format!("{:.2}", sol.values[row[j]])).collect();
        println!("  service {j}: y = [{}]", y.join(", "));
    }
    Ok(())
}
