//! Dense symmetric eigen routines: Cholesky, Householder tridiagonalization,
//! Sturm bisection with inverse iteration, and cyclic Jacobi for small
//! Rayleigh–Ritz problems. Matrices are row-major `n × n` slices.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// In-place lower Cholesky factor; the strict upper triangle is zeroed.
pub fn cholesky(a: &mut [f64], n: usize) -> Result<()> {
    for j in 0..n {
        let row_j = &mut a[j * n..(j + 1) * n];
        let s = row_j[j] - row_j[..j].iter().map(|v| v * v).sum::<f64>();
        if !(s > 0.0) {
            return Err(Error::IndefiniteMass { pivot: j, value: s });
        }
        row_j[j] = math::sqrt(s);
        for v in row_j[j + 1..].iter_mut() {
            *v = 0.0;
        }
        let ljj = row_j[j];
        let lj: Vec<f64> = row_j[..j].to_vec();
        for i in j + 1..n {
            let row_i = &mut a[i * n..(i + 1) * n];
            let dot: f64 = row_i[..j].iter().zip(&lj).map(|(x, y)| x * y).sum();
            row_i[j] = (row_i[j] - dot) / ljj;
        }
    }
    Ok(())
}

/// Overwrites `b` (row-major, `n × n`) with `L⁻¹ b` for lower `l`.
fn forward_solve_rows(l: &[f64], b: &mut [f64], n: usize) {
    for i in 0..n {
        let (done, rest) = b.split_at_mut(i * n);
        let row_i = &mut rest[..n];
        for k in 0..i {
            let lik = l[i * n + k];
            if lik != 0.0 {
                let row_k = &done[k * n..(k + 1) * n];
                for (x, y) in row_i.iter_mut().zip(row_k) {
                    *x -= lik * y;
                }
            }
        }
        let inv = 1.0 / l[i * n + i];
        row_i.iter_mut().for_each(|x| *x *= inv);
    }
}

fn transpose(a: &[f64], n: usize) -> Vec<f64> {
    let mut t = alloc::vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = a[i * n + j];
        }
    }
    t
}

/// Solves `Lᵀ x = z` in place.
fn back_solve_transposed(l: &[f64], z: &mut [f64], n: usize) {
    for i in (0..n).rev() {
        z[i] /= l[i * n + i];
        let xi = z[i];
        for k in 0..i {
            z[k] -= l[i * n + k] * xi;
        }
    }
}

/// Householder reduction `C = Q T Qᵀ` of a symmetric matrix. Returns the
/// diagonal, off-diagonal, and the reflectors `(v, β)` with `H = I − βvvᵀ`
/// acting on indices `k+1..n`.
fn tridiagonalize(c: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>, Vec<(Vec<f64>, f64)>) {
    let mut d = alloc::vec![0.0; n];
    let mut e = alloc::vec![0.0; n.saturating_sub(1)];
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    let mut p = alloc::vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let x: Vec<f64> = c[k * n + k + 1..(k + 1) * n].to_vec();
        let xnorm = math::sqrt(x.iter().map(|v| v * v).sum());
        let alpha = if x[0] > 0.0 { -xnorm } else { xnorm };
        let mut v = x;
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|t| t * t).sum();
        d[k] = c[k * n + k];
        e[k] = alpha;
        if vv == 0.0 {
            reflectors.push((v, 0.0));
            continue;
        }
        let beta = 2.0 / vv;
        let m = n - k - 1;
        let off = k + 1;
        // p = β S v
        for i in 0..m {
            let row = &c[(off + i) * n + off..(off + i + 1) * n];
            p[i] = beta * row.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
        }
        let pv: f64 = p[..m].iter().zip(&v).map(|(a, b)| a * b).sum();
        let half = 0.5 * beta * pv;
        for i in 0..m {
            p[i] -= half * v[i];
        }
        // S ← S − v wᵀ − w vᵀ
        for i in 0..m {
            let vi = v[i];
            let wi = p[i];
            let row = &mut c[(off + i) * n + off..(off + i + 1) * n];
            for ((s, vj), wj) in row.iter_mut().zip(&v).zip(&p[..m]) {
                *s -= vi * wj + wi * vj;
            }
        }
        reflectors.push((v, beta));
    }
    if n >= 2 {
        d[n - 2] = c[(n - 2) * n + n - 2];
        e[n - 2] = c[(n - 2) * n + n - 1];
    }
    if n >= 1 {
        d[n - 1] = c[(n - 1) * n + n - 1];
    }
    (d, e, reflectors)
}

/// Number of eigenvalues of the tridiagonal `(d, e)` below `x`.
fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let e2 = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] };
        q = d[i] - x - if i == 0 { 0.0 } else { e2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (d[i].abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `index`-th smallest eigenvalue (0-based) of a tridiagonal matrix.
fn bisect(d: &[f64], e: &[f64], index: usize, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(d, e, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `(T − λI) y = x` by Gaussian elimination with partial pivoting.
fn tridiagonal_shifted_solve(d: &[f64], e: &[f64], lambda: f64, x: &mut [f64], tiny: f64) {
    let n = d.len();
    // rows stored as (diag, super, super2) after pivoting
    let mut a = alloc::vec![0.0; n];
    let mut b = alloc::vec![0.0; n];
    let mut c2 = alloc::vec![0.0; n];
    let mut sub: Vec<f64> = e.to_vec();
    for i in 0..n {
        a[i] = d[i] - lambda;
        b[i] = if i + 1 < n { e[i] } else { 0.0 };
    }
    let mut mult = alloc::vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let s = sub[i];
        if s.abs() > a[i].abs() {
            // swap rows i and i+1
            let (ai, bi, ci) = (a[i], b[i], c2[i]);
            a[i] = s;
            b[i] = a[i + 1];
            c2[i] = b[i + 1];
            let m = ai / s;
            mult[i] = m;
            a[i + 1] = bi - m * b[i];
            b[i + 1] = ci - m * c2[i];
            x.swap(i, i + 1);
        } else {
            if a[i] == 0.0 {
                a[i] = tiny;
            }
            let m = s / a[i];
            mult[i] = m;
            a[i + 1] -= m * b[i];
            b[i + 1] -= m * c2[i];
        }
        x[i + 1] -= mult[i] * x[i];
        sub[i] = 0.0;
    }
    if a[n - 1] == 0.0 {
        a[n - 1] = tiny;
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        if i + 1 < n {
            s -= b[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= c2[i] * x[i + 2];
        }
        let piv = if a[i] == 0.0 { tiny } else { a[i] };
        x[i] = s / piv;
    }
}

fn normalize(v: &mut [f64]) {
    let s = math::sqrt(v.iter().map(|x| x * x).sum());
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
}

/// Smallest `count` eigenpairs of a symmetric tridiagonal matrix.
fn tridiagonal_smallest(d: &[f64], e: &[f64], count: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = (if i > 0 { e[i - 1].abs() } else { 0.0 }) + (if i + 1 < n { e[i].abs() } else { 0.0 });
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    let norm = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    lo -= 1e-12 * norm;
    hi += 1e-12 * norm;
    let values: Vec<f64> = (0..count).map(|i| bisect(d, e, i, lo, hi)).collect();
    let tiny = f64::EPSILON * norm;
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(count);
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    for &lambda in &values {
        let mut v: Vec<f64> = (0..n)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        for _ in 0..4 {
            tridiagonal_shifted_solve(d, e, lambda, &mut v, tiny);
            normalize(&mut v);
            for prev in &vectors {
                let dot: f64 = v.iter().zip(prev).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(prev).for_each(|(a, b)| *a -= dot * b);
            }
            normalize(&mut v);
        }
        vectors.push(v);
    }
    (values, vectors)
}

/// Smallest `count` eigenpairs of the pencil `(A, M)` by full reduction:
/// `M = LLᵀ`, `C = L⁻¹AL⁻ᵀ`, tridiagonalization, bisection and inverse
/// iteration. Vectors are `M`-orthonormal; values are Rayleigh quotients in
/// the original pencil.
pub fn pencil_smallest(a: &[f64], m: &[f64], n: usize, count: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if count > n {
        return Err(Error::InvalidArgument("more eigenpairs requested than the matrix order".into()));
    }
    let mut l = m.to_vec();
    cholesky(&mut l, n)?;
    let mut w = a.to_vec();
    forward_solve_rows(&l, &mut w, n);
    let mut c = transpose(&w, n);
    drop(w);
    forward_solve_rows(&l, &mut c, n);
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (c[i * n + j] + c[j * n + i]);
            c[i * n + j] = s;
            c[j * n + i] = s;
        }
    }
    let (d, e, reflectors) = tridiagonalize(&mut c, n);
    drop(c);
    let (_, tvecs) = tridiagonal_smallest(&d, &e, count);
    let mut values = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count);
    for y in tvecs {
        let mut z = y;
        for (k, (v, beta)) in reflectors.iter().enumerate().rev() {
            if *beta == 0.0 {
                continue;
            }
            let seg = &mut z[k + 1..];
            let dot: f64 = seg.iter().zip(v).map(|(a, b)| a * b).sum();
            let s = beta * dot;
            seg.iter_mut().zip(v).for_each(|(a, b)| *a -= s * b);
        }
        back_solve_transposed(&l, &mut z, n);
        let xm = sym_bilinear(m, n, &z, &z);
        let xa = sym_bilinear(a, n, &z, &z);
        let s = 1.0 / math::sqrt(xm);
        z.iter_mut().for_each(|x| *x *= s);
        values.push(xa / xm);
        vectors.push(z);
    }
    Ok((values, vectors))
}

fn sym_bilinear(a: &[f64], n: usize, x: &[f64], y: &[f64]) -> f64 {
    (0..n)
        .map(|i| x[i] * a[i * n..(i + 1) * n].iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .sum()
}

/// All eigenpairs of a small symmetric matrix by cyclic Jacobi, ascending.
/// Returned vectors are the columns, stored as separate `Vec`s.
pub fn jacobi_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut a = a.to_vec();
    let mut v = alloc::vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        let mut diag = 0.0;
        for i in 0..n {
            diag += a[i * n + i] * a[i * n + i];
            for j in i + 1..n {
                off += a[i * n + j] * a[i * n + j];
            }
        }
        if off <= 1e-34 * diag || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + math::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / math::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order.iter().map(|&j| (0..n).map(|i| v[i * n + j]).collect()).collect();
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_spd(n: usize, seed: u64) -> Vec<f64> {
        let mut s = seed;
        let mut b = alloc::vec![0.0; n * n];
        for x in b.iter_mut() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            *x = (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
        }
        let mut a = alloc::vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = (0..n).map(|k| b[i * n + k] * b[j * n + k]).sum::<f64>();
            }
            a[i * n + i] += n as f64 * 0.1;
        }
        a
    }

    #[test]
    fn cholesky_reconstructs() {
        let n = 7;
        let a = random_spd(n, 3);
        let mut l = a.clone();
        cholesky(&mut l, n).unwrap();
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..n).map(|k| l[i * n + k] * l[j * n + k]).sum();
                assert!((s - a[i * n + j]).abs() < 1e-12);
            }
        }
        let mut bad = alloc::vec![1.0, 2.0, 2.0, 1.0];
        assert!(matches!(cholesky(&mut bad, 2), Err(Error::IndefiniteMass { pivot: 1, .. })));
    }

    #[test]
    fn diagonal_pencil() {
        let a = alloc::vec![2.0, 0.0, 0.0, 8.0];
        let m = alloc::vec![1.0, 0.0, 0.0, 2.0];
        let (vals, _) = pencil_smallest(&a, &m, 2, 2).unwrap();
        assert!((vals[0] - 2.0).abs() < 1e-14 && (vals[1] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn pencil_matches_jacobi_on_reduced_matrix() {
        let n = 12;
        let a = random_spd(n, 11);
        let m = random_spd(n, 5);
        let (vals, vecs) = pencil_smallest(&a, &m, n, 5).unwrap();
        // reference: Jacobi on L⁻¹AL⁻ᵀ
        let mut l = m.clone();
        cholesky(&mut l, n).unwrap();
        let mut w = a.clone();
        forward_solve_rows(&l, &mut w, n);
        let mut c = transpose(&w, n);
        forward_solve_rows(&l, &mut c, n);
        let (ref_vals, _) = jacobi_eigen(&c, n);
        for i in 0..5 {
            assert!((vals[i] - ref_vals[i]).abs() < 1e-11 * ref_vals[n - 1]);
            let r: Vec<f64> = (0..n)
                .map(|p| (0..n).map(|q| (a[p * n + q] - vals[i] * m[p * n + q]) * vecs[i][q]).sum())
                .collect();
            assert!(r.iter().map(|x| x.abs()).fold(0.0, f64::max) < 1e-9);
            for j in 0..=i {
                let mij = sym_bilinear(&m, n, &vecs[i], &vecs[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((mij - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn repeated_eigenvalues_get_orthogonal_vectors() {
        let n = 6;
        let mut a = alloc::vec![0.0; n * n];
        for (i, v) in [1.0, 1.0, 1.0, 2.0, 3.0, 3.0].iter().enumerate() {
            a[i * n + i] = *v;
        }
        let mut id = alloc::vec![0.0; n * n];
        for i in 0..n {
            id[i * n + i] = 1.0;
        }
        let (vals, vecs) = pencil_smallest(&a, &id, n, 6).unwrap();
        assert!((vals[2] - 1.0).abs() < 1e-14 && (vals[5] - 3.0).abs() < 1e-14);
        for i in 0..n {
            for j in 0..i {
                let d: f64 = vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a * b).sum();
                assert!(d.abs() < 1e-12);
            }
        }
    }
}
