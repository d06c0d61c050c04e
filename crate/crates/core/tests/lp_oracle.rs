//! The simplex against brute-force vertex enumeration on small random LPs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mec_alloc::lpcore::{solve_program, LpOptions, LpStatus};
use mec_alloc::model::{LinearProgram, Sense, VarKind};

/// A row `a x (sense) b` in dense form.
struct Row {
    a: Vec<f64>,
    sense: Sense,
    b: f64,
}

fn random_lp(rng: &mut ChaCha8Rng, infeasible: bool) -> (LinearProgram, Vec<Row>, Vec<(f64, f64)>) {
    let n = rng.gen_range(2..=4);
    let m = rng.gen_range(1..=5);
    let mut lp = LinearProgram::default();
    let mut bounds = Vec::new();
    let mut x0 = Vec::new();
    for v in 0..n {
        let lo = -(rng.gen_range(0..=3) as f64);
        let hi = rng.gen_range(1..=5) as f64;
        let obj = rng.gen_range(-5..=5) as f64;
        lp.add_variable(format!("v{v}"), VarKind::Continuous, lo, hi, obj);
        bounds.push((lo, hi));
        x0.push(rng.gen_range(lo..=hi));
    }
    let mut rows = Vec::new();
    for r in 0..m {
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
        let at: f64 = a.iter().zip(&x0).map(|(a, x)| a * x).sum();
        let slack = rng.gen_range(0..=4) as f64;
        let (sense, b) = match rng.gen_range(0..3) {
            0 => (Sense::Le, (at + slack).round()),
            1 => (Sense::Ge, (at - slack).round()),
            _ => (Sense::Eq, at),
        };
        lp.add_constraint(
            format!("r{r}"),
            a.iter().enumerate().filter(|p| *p.1 != 0.0).map(|(j, &c)| (j, c)).collect(),
            sense,
            b,
        );
        rows.push(Row { a, sense, b });
    }
    if infeasible {
        // x_0 at least its upper bound plus one.
        let mut a = vec![0.0; n];
        a[0] = 1.0;
        let b = bounds[0].1 + 1.0;
        lp.add_constraint("cut".into(), vec![(0, 1.0)], Sense::Ge, b);
        rows.push(Row { a, sense: Sense::Ge, b });
    }
    (lp, rows, bounds)
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-10 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Best objective over all basic feasible points, `None` when there is none.
fn vertex_optimum(obj: &[f64], rows: &[Row], bounds: &[(f64, f64)]) -> Option<f64> {
    let n = bounds.len();
    let mut planes: Vec<(Vec<f64>, f64)> = rows.iter().map(|r| (r.a.clone(), r.b)).collect();
    for (v, &(lo, hi)) in bounds.iter().enumerate() {
        let mut e = vec![0.0; n];
        e[v] = 1.0;
        planes.push((e.clone(), lo));
        planes.push((e, hi));
    }
    let feasible = |x: &[f64]| {
        let tol = 1e-7;
        bounds.iter().zip(x).all(|(&(lo, hi), &v)| v >= lo - tol && v <= hi + tol)
            && rows.iter().all(|r| {
                let lhs: f64 = r.a.iter().zip(x).map(|(a, x)| a * x).sum();
                match r.sense {
                    Sense::Le => lhs <= r.b + tol,
                    Sense::Ge => lhs >= r.b - tol,
                    Sense::Eq => (lhs - r.b).abs() <= tol,
                }
            })
    };
    let mut best: Option<f64> = None;
    for pick in subsets(planes.len(), n) {
        let a = pick.iter().map(|&p| planes[p].0.clone()).collect();
        let b = pick.iter().map(|&p| planes[p].1).collect();
        if let Some(x) = solve_dense(a, b) {
            if feasible(&x) {
                let z: f64 = obj.iter().zip(&x).map(|(c, x)| c * x).sum();
                best = Some(best.map_or(z, |b: f64| b.max(z)));
            }
        }
    }
    best
}

#[test]
fn simplex_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let (mut optimal, mut infeasible) = (0, 0);
    for case in 0..60 {
        let (lp, rows, bounds) = random_lp(&mut rng, case % 10 == 9);
        let sol = solve_program(&lp, &LpOptions::default());
        match vertex_optimum(&lp.objective, &rows, &bounds) {
            Some(z) => {
                optimal += 1;
                assert_eq!(sol.status, LpStatus::Optimal, "case {case}");
                assert!((sol.objective - z).abs() <= 1e-7 * (1.0 + z.abs()), "case {case}: {} vs {z}", sol.objective);
                assert!(lp.max_violation(&sol.values) <= 1e-7, "case {case}");
            }
            None => {
                infeasible += 1;
                assert_eq!(sol.status, LpStatus::Infeasible, "case {case}");
            }
        }
    }
    assert!(optimal >= 30, "only {optimal} feasible cases");
    assert!(infeasible >= 6);
}
