//! Envelope (skyline) Cholesky factorization of sparse SPD matrices under a
//! reverse Cuthill–McKee ordering.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::sparse::CsrMatrix;

/// Reverse Cuthill–McKee permutation: `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n;
    let degree: Vec<usize> = (0..n).map(|i| a.row_ptr[i + 1] - a.row_ptr[i]).collect();
    let mut visited = alloc::vec![false; n];
    let mut order = Vec::with_capacity(n);
    let bfs_levels = |start: usize, mark: &mut Vec<bool>| -> (usize, Vec<usize>) {
        // returns eccentricity and the last level
        let mut seen = mark.clone();
        let mut frontier = alloc::vec![start];
        seen[start] = true;
        let mut depth = 0;
        loop {
            let mut next = Vec::new();
            for &u in &frontier {
                for (v, _) in a.row(u) {
                    if !seen[v] {
                        seen[v] = true;
                        next.push(v);
                    }
                }
            }
            if next.is_empty() {
                return (depth, frontier);
            }
            depth += 1;
            frontier = next;
        }
    };
    while order.len() < n {
        let seed = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| degree[i]).expect("unvisited node");
        // pseudo-peripheral start
        let mut start = seed;
        let (mut ecc, mut last) = bfs_levels(start, &mut visited);
        for _ in 0..8 {
            let cand = *last.iter().min_by_key(|&&v| degree[v]).expect("non-empty level");
            let (e2, l2) = bfs_levels(cand, &mut visited);
            if e2 > ecc {
                start = cand;
                ecc = e2;
                last = l2;
            } else {
                break;
            }
        }
        let mut queue = VecDeque::new();
        queue.push_back(start);
        visited[start] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            let mut nbrs: Vec<usize> = a.row(u).map(|(v, _)| v).filter(|&v| !visited[v]).collect();
            nbrs.sort_by_key(|&v| (degree[v], v));
            for v in nbrs {
                visited[v] = true;
                queue.push_back(v);
            }
        }
    }
    order.reverse();
    order
}

/// `L Lᵀ = P K Pᵀ` in row-envelope storage.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    n: usize,
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    values: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(k: &CsrMatrix) -> Result<Self> {
        let n = k.n;
        let perm = reverse_cuthill_mckee(k);
        let mut inv = alloc::vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for (j, _) in k.row(old) {
                first[new] = first[new].min(inv[j]);
            }
        }
        let mut start = alloc::vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut values = alloc::vec![0.0; start[n]];
        for (new, &old) in perm.iter().enumerate() {
            for (j, v) in k.row(old) {
                let jn = inv[j];
                if jn <= new {
                    values[start[new] + jn - first[new]] = v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let lo = fi.max(fj);
                let ri = start[i] - fi;
                let rj = start[j] - fj;
                let orig = values[ri + j];
                let mut s = orig;
                s -= values[ri + lo..ri + j].iter().zip(&values[rj + lo..rj + j]).map(|(a, b)| a * b).sum::<f64>();
                if j < i {
                    values[ri + j] = s / values[rj + j];
                } else {
                    if !(s > 1e-13 * orig.abs()) {
                        return Err(Error::SingularShift { pivot: perm[i], value: s });
                    }
                    values[ri + i] = math::sqrt(s);
                }
            }
        }
        Ok(Self { n, perm, first, start, values })
    }

    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    /// Solves `K x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let ri = self.start[i] - fi;
            let s: f64 = self.values[ri + fi..ri + i].iter().zip(&y[fi..i]).map(|(a, b)| a * b).sum();
            y[i] = (y[i] - s) / self.values[ri + i];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let ri = self.start[i] - fi;
            y[i] /= self.values[ri + i];
            let yi = y[i];
            for (yj, l) in y[fi..i].iter_mut().zip(&self.values[ri + fi..ri + i]) {
                *yj -= l * yi;
            }
        }
        let mut x = alloc::vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}
