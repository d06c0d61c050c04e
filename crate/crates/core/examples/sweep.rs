//! A small parameter sweep: per-replication CSV rows, the summary table and
//! an SVG chart, written to a temporary directory.

use std::fs;

use mec_alloc::harness::{run_suite, summarize, summary_to_csv, svg_plot, write_csv, ExperimentConfig};

const CONFIG: &str = r#"
axis = "alpha"
values = [0.0, 0.6, 1.5]
policies = ["lr", "gbf", "gff"]
replications = 3
base_seed = 42

[scenario]
preset = "paper-desk"
slice = "scen-b"

[requests]
service_count = 12
"#;

fn main() -> mec_alloc::Result<()> {
    let cfg = ExperimentConfig::from_toml(CONFIG)?;
    let rows = run_suite(&cfg)?;
    let dir = std::env::temp_dir().join("mec-alloc-sweep");
    fs::create_dir_all(&dir).expect("temporary directory is writable");
    write_csv(dir.join("rows.csv"), &rows)?;

    let summary = summarize(&rows);
    fs::write(dir.join("summary.csv"), summary_to_csv(&summary)).expect("temporary directory is writable");
    for s in summary.iter().filter(|s| s.metric == "deployed_frac") {
        println!(
            "{:<4} alpha {:<4} mean {:.3} [{:.3}, {:.3}]",
            s.policy, s.axis_value, s.stat.mean, s.stat.p5, s.stat.p95
        );
    }
    let svg = svg_plot(&summary, "deployed_frac", "admitted fraction").expect("metric is present");
    fs::write(dir.join("deployed_frac.svg"), svg).expect("temporary directory is writable");
    println!("{} rows written to {}", rows.len(), dir.display());
    Ok(())
}
