/// Product-form basis inverse: `B = E_1 E_2 ... E_k`, each `E` an identity
/// with one column replaced.
#[derive(Debug, Clone, Default)]
pub(crate) struct EtaFile {
    piv_row: Vec<usize>,
    piv_val: Vec<f64>,
    start: Vec<usize>,
    idx: Vec<usize>,
    val: Vec<f64>,
}

impl EtaFile {
    pub fn new() -> Self {
        EtaFile {
            start: vec![0],
            ..Default::default()
        }
    }

    pub fn clear(&mut self) {
        self.piv_row.clear();
        self.piv_val.clear();
        self.start.clear();
        self.start.push(0);
        self.idx.clear();
        self.val.clear();
    }

    pub fn nnz(&self) -> usize {
        self.idx.len()
    }

    /// Appends the eta for a dense transformed column pivoting on `p`.
    pub fn push(&mut self, p: usize, col: &[f64]) {
        self.piv_row.push(p);
        self.piv_val.push(col[p]);
        for (i, &v) in col.iter().enumerate() {
            if i != p && v != 0.0 {
                self.idx.push(i);
                self.val.push(v);
            }
        }
        self.start.push(self.idx.len());
    }

    /// `x <- B^-1 x`
    pub fn ftran(&self, x: &mut [f64]) {
        for k in 0..self.piv_row.len() {
            let p = self.piv_row[k];
            if x[p] == 0.0 {
                continue;
            }
            let xp = x[p] / self.piv_val[k];
            x[p] = xp;
            for t in self.start[k]..self.start[k + 1] {
                x[self.idx[t]] -= self.val[t] * xp;
            }
        }
    }

    /// `z^T <- z^T B^-1`
    pub fn btran(&self, z: &mut [f64]) {
        for k in (0..self.piv_row.len()).rev() {
            let p = self.piv_row[k];
            let mut acc = z[p];
            for t in self.start[k]..self.start[k + 1] {
                acc -= self.val[t] * z[self.idx[t]];
            }
            z[p] = acc / self.piv_val[k];
        }
    }
}
