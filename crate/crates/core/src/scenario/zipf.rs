use super::{Cell, Point};
use crate::{Error, Result};

/// Cell popularity around points of interest.
///
/// For each PoI the cells are ranked by distance from it (rank 1 is the PoI
/// cell, ties by lower id) and weighted `rank^-alpha`; each per-PoI
/// distribution is normalized, the distributions are summed, and the sum is
/// normalized again. `alpha = 0` gives the uniform distribution.
pub fn zipf_cell_popularity(pois: &[usize], alpha: f64, cells: &[Cell]) -> Result<Vec<f64>> {
    if pois.is_empty() {
        return Err(Error::Config("at least one point of interest is required".into()));
    }
    if !(alpha >= 0.0) {
        return Err(Error::Config(format!("zipf exponent must be >= 0, got {alpha}")));
    }
    if let Some(&p) = pois.iter().find(|&&p| p >= cells.len()) {
        return Err(Error::Config(format!("point of interest {p} is not a cell")));
    }
    let k = cells.len();
    let mut total = vec![0.0; k];
    let mut order: Vec<usize> = (0..k).collect();
    let mut weights = vec![0.0; k];
    for &poi in pois {
        let origin = cells[poi].center;
        order.sort_by(|&a, &b| {
            let da = origin.dist2(&cells[a].center);
            let db = origin.dist2(&cells[b].center);
            da.total_cmp(&db).then(a.cmp(&b))
        });
        let mut norm = 0.0;
        for (rank, &c) in order.iter().enumerate() {
            let w = ((rank + 1) as f64).powf(-alpha);
            weights[c] = w;
            norm += w;
        }
        for (t, w) in total.iter_mut().zip(&weights) {
            *t += w / norm;
        }
    }
    let sum: f64 = total.iter().sum();
    total.iter_mut().for_each(|p| *p /= sum);
    Ok(total)
}

/// Cells nearest to the given fractional positions of the area (lowest id on
/// ties). `(0.25, 0.25)` and `(0.75, 0.75)` give the two-PoI layout.
pub fn poi_cells(cells: &[Cell], area_side: f64, at: &[[f64; 2]]) -> Vec<usize> {
    at.iter()
        .map(|[fx, fy]| {
            let p = Point::new(fx * area_side, fy * area_side);
            let mut best = (usize::MAX, f64::INFINITY);
            for c in cells {
                let d = p.dist2(&c.center);
                if d < best.1 {
                    best = (c.id, d);
                }
            }
            best.0
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{generate_grid_scenario, GridParams};

    fn desk_cells() -> Vec<Cell> {
        generate_grid_scenario(&GridParams::desk(), 1).unwrap().cells
    }

    #[test]
    fn alpha_zero_is_uniform() {
        let s = generate_grid_scenario(&GridParams::paper(), 1).unwrap();
        let p = zipf_cell_popularity(&[5, 200], 0.0, &s.cells).unwrap();
        assert_eq!(p.len(), 400);
        for v in p {
            assert!((v - 1.0 / 400.0).abs() < 1e-15);
        }
    }

    #[test]
    fn large_alpha_concentrates_on_the_poi() {
        let cells = desk_cells();
        let p = zipf_cell_popularity(&[27], 8.0, &cells).unwrap();
        let (argmax, _) = p
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert_eq!(argmax, 27);
        assert!(p[27] > 0.99);
    }

    #[test]
    fn two_pois_match_a_direct_recomputation() {
        let cells = desk_cells();
        let pois = poi_cells(&cells, 160.0, &[[0.25, 0.25], [0.75, 0.75]]);
        assert_eq!(pois, vec![9, 45]);
        let p = zipf_cell_popularity(&pois, 0.6, &cells).unwrap();
        let sum: f64 = p.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);

        // Oracle: rank by integer squared grid distance, then id.
        let mut expect = vec![0.0; 64];
        for &poi in &pois {
            let (pr, pc) = ((poi / 8) as i64, (poi % 8) as i64);
            let mut ranked: Vec<(i64, usize)> = (0..64usize)
                .map(|c| {
                    let (r, cc) = ((c / 8) as i64, (c % 8) as i64);
                    ((r - pr).pow(2) + (cc - pc).pow(2), c)
                })
                .collect();
            ranked.sort();
            let z: f64 = (1..=64).map(|r| (r as f64).powf(-0.6)).sum();
            for (rank, (_, c)) in ranked.iter().enumerate() {
                expect[*c] += ((rank + 1) as f64).powf(-0.6) / z;
            }
        }
        for v in &mut expect {
            *v /= 2.0;
        }
        for (a, b) in p.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn empty_pois_is_a_config_error() {
        assert!(matches!(
            zipf_cell_popularity(&[], 0.6, &desk_cells()),
            Err(Error::Config(_))
        ));
    }
}
