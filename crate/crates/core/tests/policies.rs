//! Cross-module properties on randomized tiny instances.

use std::time::Duration;

use proptest::prelude::*;

use mec_alloc::exact::{branch_and_bound, enumerate_optimum, BnbStatus};
use mec_alloc::lpcore::{relax, solve_program, LpOptions, LpStatus};
use mec_alloc::model::{build_milp, check_feasibility, DEFAULT_TOL};
use mec_alloc::policies::{run_exact, run_policy, Outcome, PolicyKind, PolicyParams, DEFAULT_MU};
use mec_alloc::scenario::{tiny_instance, Document};

const HEURISTICS: [PolicyKind; 4] = [PolicyKind::Lr, PolicyKind::Gff, PolicyKind::Gbf, PolicyKind::Dsp];

#[test]
fn branch_and_bound_matches_enumeration() {
    for seed in 500..530 {
        let (s, req) = tiny_instance(seed).unwrap();
        let m = build_milp(&s, &req);
        let bnb = branch_and_bound(&m, Duration::from_secs(30), seed);
        let (_, opt) = enumerate_optimum(&s, &req).unwrap();
        assert_eq!(bnb.status, BnbStatus::Optimal, "seed {seed}");
        assert!((bnb.incumbent_objective - opt).abs() <= 1e-6, "seed {seed}: {} vs {opt}", bnb.incumbent_objective);
        assert!(bnb.best_bound + 1e-6 >= opt);
    }
}

#[test]
fn exact_policy_dominates_its_warm_start() {
    for seed in 0..20 {
        let (s, req) = tiny_instance(seed).unwrap();
        let lr = run_policy(PolicyKind::Lr, &s, &req, &PolicyParams { seed, ..PolicyParams::default() });
        let ex = run_exact(&s, &req, DEFAULT_MU, seed, Duration::from_secs(30));
        assert!(ex.objective.j + 1e-9 >= lr.objective.j, "seed {seed}");
        assert_eq!(ex.exact.unwrap().status, BnbStatus::Optimal);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn heuristics_are_feasible_and_bounded(seed in 0u64..100_000) {
        let (s, req) = tiny_instance(seed).unwrap();
        let lp = solve_program(&relax(&build_milp(&s, &req)).lp, &LpOptions::default());
        prop_assert_eq!(lp.status, LpStatus::Optimal);
        for kind in HEURISTICS {
            let rep = run_policy(kind, &s, &req, &PolicyParams { seed, ..PolicyParams::default() });
            prop_assert!(check_feasibility(&s, &req, &rep.allocation, DEFAULT_TOL).is_empty(), "{}", kind);
            prop_assert_eq!(rep.outcomes.len(), req.len());
            for (j, o) in rep.outcomes.iter().enumerate() {
                prop_assert_eq!(*o == Outcome::Deployed, rep.allocation.is_placed(j));
            }
            prop_assert_eq!(rep.deployed() as f64, rep.objective.j_r);
            prop_assert!(lp.objective + 1e-6 >= rep.objective.j, "{} above the relaxation", kind);
        }
    }

    #[test]
    fn policies_are_deterministic(seed in 0u64..100_000) {
        let (s, req) = tiny_instance(seed).unwrap();
        let p = PolicyParams { seed, ..PolicyParams::default() };
        for kind in HEURISTICS {
            let a = run_policy(kind, &s, &req, &p);
            let b = run_policy(kind, &s, &req, &p);
            prop_assert_eq!(a.allocation, b.allocation);
            prop_assert_eq!(a.outcomes, b.outcomes);
        }
    }

    #[test]
    fn documents_round_trip(seed in 0u64..100_000) {
        let (s, req) = tiny_instance(seed).unwrap();
        let doc = Document::new(Some(s), req);
        let back = Document::from_json(&doc.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), doc.to_json());
    }
}
