//! Compressed sparse row matrices built from triplets.

use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

/// `(row, col, value)` contributions; duplicates are summed.
pub type Triplet = (usize, usize, f64);

impl CsrMatrix {
    /// Sums duplicate entries in the order they appear, so equal triplet
    /// sequences give bitwise equal matrices.
    pub fn from_triplets(n: usize, mut triplets: Vec<Triplet>) -> Self {
        // stable: equal keys keep their input order
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = alloc::vec![0usize; n + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *values.last_mut().expect("previous entry") += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, col_idx, values }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn from_dense(n: usize, a: &[f64]) -> Self {
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if a[i * n + j] != 0.0 {
                    t.push((i, j, a[i * n + j]));
                }
            }
        }
        Self::from_triplets(n, t)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(p) => self.values[r.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = alloc::vec![0.0; self.n];
        self.mul_vec(x, &mut y);
        y
    }

    /// `xᵀ A y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.n).map(|i| x[i] * self.row(i).map(|(j, v)| v * y[j]).sum::<f64>()).sum()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut a = alloc::vec![0.0; self.n * self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                a[i * self.n + j] = v;
            }
        }
        a
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|A_ij − A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m = m.max((v - self.get(j, i)).abs());
            }
        }
        m
    }

    /// `self + s·other`, on the union pattern.
    pub fn add_scaled(&self, s: f64, other: &CsrMatrix) -> CsrMatrix {
        let mut t = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.n {
            t.extend(self.row(i).map(|(j, v)| (i, j, v)));
            t.extend(other.row(i).map(|(j, v)| (i, j, s * v)));
        }
        CsrMatrix::from_triplets(self.n, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let a = CsrMatrix::from_triplets(2, alloc::vec![(1, 0, 1.0), (0, 1, 2.0), (1, 0, 3.0), (0, 0, 5.0)]);
        assert_eq!(a.to_dense(), alloc::vec![5.0, 2.0, 4.0, 0.0]);
        assert_eq!(a.get(1, 1), 0.0);
        assert_eq!(a.apply(&[1.0, 1.0]), alloc::vec![7.0, 4.0]);
        assert_eq!(a.asymmetry(), 2.0);
    }
}
