//! Runs the rounding heuristic and the three benchmarks on one desk instance
//! at high PoI concentration and breaks the rejects down by cause.

use mec_alloc::harness::{generate_instance, run_checked, Axis, ExperimentConfig, SliceName, SliceSpec};
use mec_alloc::policies::{PolicyKind, RejectCause};

fn main() -> mec_alloc::Result<()> {
    let kinds = vec![PolicyKind::Lr, PolicyKind::Dsp, PolicyKind::Gbf, PolicyKind::Gff];
    let mut cfg = ExperimentConfig::new(Axis::Alpha, vec![1.5], kinds.clone());
    cfg.scenario.slice = Some(SliceSpec::Named(SliceName::ScenB));
    let seed = std::env::args().nth(1).map_or(3, |s| s.parse().expect("seed is an integer"));
    let inst = generate_instance(&cfg, None, 1.5, seed)?;

    println!("{} requests, seed {seed}", inst.requests.len());
    println!("{:<5} {:>8} {:>9} {:>9}  cpu sto  fh  bh", "", "deployed", "J", "ms");
    for kind in kinds {
        let rep = run_checked(&cfg, kind, &inst)?;
        let c = RejectCause::ALL.map(|cause| rep.rejects(cause));
        println!(
            "{:<5} {:>8} {:>9.4} {:>9.2}  {:>3} {:>3} {:>3} {:>3}",
            kind,
            rep.deployed(),
            rep.objective.j,
            rep.runtime_s * 1e3,
            c[0],
            c[1],
            c[2],
            c[3]
        );
    }
    Ok(())
}
