use crate::model::LinearProgram;

/// Power-of-two row and column factors from a few rounds of geometric-mean
/// equilibration, plus one objective factor. Scaled entries are
/// `a * row[r] * col[j]`.
pub(crate) struct Scaling {
    pub row: Vec<f64>,
    pub col: Vec<f64>,
    pub obj: f64,
}

fn pow2(v: f64) -> f64 {
    if v.is_finite() && v > 0.0 {
        2f64.powi(v.log2().round() as i32)
    } else {
        1.0
    }
}

impl Scaling {
    pub fn compute(lp: &LinearProgram) -> Self {
        let (m, n) = (lp.n_rows(), lp.n_vars());
        let mut row = vec![1.0; m];
        let mut col = vec![1.0; n];
        for _ in 0..4 {
            let mut cmin = vec![f64::INFINITY; n];
            let mut cmax = vec![0.0f64; n];
            for (r, c) in lp.constraints.iter().enumerate() {
                let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
                for &(j, a) in &c.coeffs {
                    let v = (a * col[j]).abs();
                    if v > 0.0 {
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                }
                if hi > 0.0 {
                    row[r] = pow2(1.0 / (lo * hi).sqrt());
                }
                for &(j, a) in &c.coeffs {
                    let v = (a * row[r]).abs();
                    if v > 0.0 {
                        cmin[j] = cmin[j].min(v);
                        cmax[j] = cmax[j].max(v);
                    }
                }
            }
            for j in 0..n {
                if cmax[j] > 0.0 {
                    col[j] = pow2(1.0 / (cmin[j] * cmax[j]).sqrt());
                }
            }
        }
        let cmax = lp
            .objective
            .iter()
            .zip(&col)
            .map(|(c, s)| (c * s).abs())
            .fold(0.0, f64::max);
        Scaling {
            row,
            col,
            obj: pow2(1.0 / cmax),
        }
    }
}
