//! Smallest eigenpairs of `A U = Λ M U` on the mean-zero subspace
//! `{v : 1ᵀMv = 0}`, by dense pencil reduction or shift-invert block
//! Lanczos, plus cluster matching against exact eigenvalues.

use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::AssembledForms;
use crate::dense;
use crate::error::{Error, Result};
use crate::math;
use crate::skyline::EnvelopeCholesky;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    /// Dense up to [`SolverOptions::dense_limit`] unknowns, Lanczos above.
    Auto,
    Dense,
    ShiftInvertLanczos,
}

impl SolverMethod {
    pub fn name(self) -> &'static str {
        match self {
            SolverMethod::Auto => "auto",
            SolverMethod::Dense => "dense",
            SolverMethod::ShiftInvertLanczos => "lanczos",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "auto" => Some(SolverMethod::Auto),
            "dense" => Some(SolverMethod::Dense),
            "lanczos" | "shift_invert_lanczos" => Some(SolverMethod::ShiftInvertLanczos),
            _ => None,
        }
    }
}

/// Treatment of the constant null vector of `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deflation {
    /// Restrict to `1ᵀMv = 0`.
    ConstantMode,
    /// Solve the plain pencil.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub method: SolverMethod,
    pub deflation: Deflation,
    pub tol_eig: f64,
    pub tol_ortho: f64,
    /// Lanczos shift `σ`; `K = A − σM` must be positive definite, so the
    /// shift has to lie below the smallest eigenvalue of the pencil.
    pub shift: Option<f64>,
    /// Rough size of the smallest wanted eigenvalue, used for the default
    /// shift `σ = −0.1·estimate`.
    pub lambda_estimate: f64,
    pub dense_limit: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            method: SolverMethod::Auto,
            deflation: Deflation::ConstantMode,
            tol_eig: 1e-10,
            tol_ortho: 1e-10,
            shift: None,
            lambda_estimate: 1.0,
            dense_limit: 3000,
            max_restarts: 60,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `M`-orthonormal coefficient vectors.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `‖AU − ΛMU‖₂ / (Λ‖MU‖₂)` per pair.
    pub residual_norms: Vec<f64>,
    /// `max |UᵢᵀMUⱼ − δᵢⱼ|`
    pub ortho_defect: f64,
    /// `max |1ᵀMUᵢ|`
    pub mean_defect: f64,
    pub method: SolverMethod,
}

pub fn solve_smallest(forms: &AssembledForms, m: usize, options: &SolverOptions) -> Result<SpectralResult> {
    solve_pencil(&forms.stiffness, &forms.mass, m, options)
}

/// Smallest `m` eigenpairs of `(a, mass)`, deflated as configured.
pub fn solve_pencil(a: &CsrMatrix, mass: &CsrMatrix, m: usize, options: &SolverOptions) -> Result<SpectralResult> {
    let n = a.n;
    let deflate = options.deflation == Deflation::ConstantMode;
    let available = if deflate { n.saturating_sub(1) } else { n };
    if m == 0 || m > available {
        return Err(Error::InvalidArgument(alloc::format!(
            "cannot compute {m} eigenpairs of a pencil of order {n}"
        )));
    }
    let method = match options.method {
        SolverMethod::Auto if n <= options.dense_limit => SolverMethod::Dense,
        SolverMethod::Auto => SolverMethod::ShiftInvertLanczos,
        other => other,
    };
    let ones_m = mass.apply(&alloc::vec![1.0; n]);
    let total: f64 = ones_m.iter().sum();
    let project = |v: &mut [f64]| {
        if deflate {
            let c = math_dot(&ones_m, v) / total;
            v.iter_mut().for_each(|x| *x -= c);
        }
    };
    let (values, mut vectors) = match method {
        SolverMethod::Dense => {
            let extra = usize::from(deflate);
            let want = (m + 4).min(available);
            let (vals, vecs) = dense::pencil_smallest(&a.to_dense(), &mass.to_dense(), n, want + extra)?;
            let top = vals.last().copied().unwrap_or(1.0).abs();
            let first = vals[extra..].iter().copied().find(|v| v.abs() > 1e-8 * top).unwrap_or(1.0);
            let sigma = options.shift.unwrap_or(-0.1 * first.abs());
            let (mut vals, mut vecs) = refine(a, mass, vecs[extra..].to_vec(), sigma, &project)?;
            vals.truncate(m);
            vecs.truncate(m);
            (vals, vecs)
        }
        _ => lanczos(a, mass, m, options, &project)?,
    };
    for v in vectors.iter_mut() {
        project(v);
        let s = 1.0 / math::sqrt(mass.bilinear(v, v));
        v.iter_mut().for_each(|x| *x *= s);
    }
    finish(a, mass, values, vectors, &ones_m, method)
}

fn math_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn finish(
    a: &CsrMatrix,
    mass: &CsrMatrix,
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    ones_m: &[f64],
    method: SolverMethod,
) -> Result<SpectralResult> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let eigenvectors: Vec<Vec<f64>> = order.iter().map(|&i| vectors[i].clone()).collect();
    let residual_norms = eigenvalues
        .iter()
        .zip(&eigenvectors)
        .map(|(l, v)| relative_residual(a, mass, *l, v))
        .collect();
    let mv: Vec<Vec<f64>> = eigenvectors.iter().map(|v| mass.apply(v)).collect();
    let mut ortho_defect: f64 = 0.0;
    for i in 0..eigenvectors.len() {
        for j in 0..=i {
            let d = math_dot(&mv[i], &eigenvectors[j]) - if i == j { 1.0 } else { 0.0 };
            ortho_defect = ortho_defect.max(d.abs());
        }
    }
    let mean_defect = eigenvectors.iter().map(|v| math_dot(ones_m, v).abs()).fold(0.0, f64::max);
    Ok(SpectralResult { eigenvalues, eigenvectors, residual_norms, ortho_defect, mean_defect, method })
}

/// `‖Av − λMv‖₂ / (|λ|‖Mv‖₂)`, with `|λ|` floored to keep zero modes finite.
pub fn relative_residual(a: &CsrMatrix, mass: &CsrMatrix, lambda: f64, v: &[f64]) -> f64 {
    let av = a.apply(v);
    let mv = mass.apply(v);
    let r = math::sqrt(av.iter().zip(&mv).map(|(x, y)| (x - lambda * y) * (x - lambda * y)).sum());
    let s = math::sqrt(mv.iter().map(|y| y * y).sum());
    r / (lambda.abs().max(f64::EPSILON) * s)
}

/// Two steps of block inverse iteration with `(A − σM)⁻¹M`, each followed by
/// Rayleigh–Ritz. Removes the high-frequency error a dense reduction leaves
/// at the level of `ε·λ_max`.
fn refine(
    a: &CsrMatrix,
    mass: &CsrMatrix,
    mut vectors: Vec<Vec<f64>>,
    sigma: f64,
    project: &dyn Fn(&mut [f64]),
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let factor = EnvelopeCholesky::factor(&a.add_scaled(-sigma, mass))?;
    let mut values = Vec::new();
    for _ in 0..2 {
        let images: Vec<Vec<f64>> = vectors
            .iter()
            .map(|x| {
                let mut y = factor.solve(&mass.apply(x));
                project(&mut y);
                y
            })
            .collect();
        (values, vectors) = rayleigh_ritz(a, mass, images);
    }
    Ok((values, vectors))
}

/// Ritz pairs of `(A, M)` on `span(basis)`, ascending.
fn rayleigh_ritz(a: &CsrMatrix, mass: &CsrMatrix, basis: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(basis.len());
    let mut mq: Vec<Vec<f64>> = Vec::with_capacity(basis.len());
    for mut v in basis {
        let before = math::sqrt(mass.bilinear(&v, &v));
        for _ in 0..2 {
            for (qi, mqi) in q.iter().zip(&mq) {
                let c = math_dot(mqi, &v);
                v.iter_mut().zip(qi).for_each(|(x, y)| *x -= c * y);
            }
        }
        let mv = mass.apply(&v);
        let norm = math::sqrt(math_dot(&mv, &v));
        if !(norm > 1e-10 * before) {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        mq.push(mv.iter().map(|x| x / norm).collect());
        q.push(v);
    }
    let p = q.len();
    let aq: Vec<Vec<f64>> = q.iter().map(|x| a.apply(x)).collect();
    let mut h = alloc::vec![0.0; p * p];
    for i in 0..p {
        for j in 0..=i {
            let s = 0.5 * (math_dot(&aq[i], &q[j]) + math_dot(&aq[j], &q[i]));
            h[i * p + j] = s;
            h[j * p + i] = s;
        }
    }
    let (_, ys) = dense::jacobi_eigen(&h, p);
    let n = a.n;
    let mut values = Vec::with_capacity(p);
    let mut vectors = Vec::with_capacity(p);
    for y in ys {
        let mut x = alloc::vec![0.0; n];
        for (b, c) in q.iter().zip(&y) {
            x.iter_mut().zip(b).for_each(|(s, t)| *s += c * t);
        }
        values.push(a.bilinear(&x, &x) / mass.bilinear(&x, &x));
        vectors.push(x);
    }
    (values, vectors)
}

/// Shift-invert block Lanczos with full `M`-reorthogonalization and thick
/// restarts. The operator `T = (A − σM)⁻¹M` is self-adjoint in the `M` inner
/// product; its largest eigenvalues `θ = 1/(λ − σ)` give the smallest `λ`.
fn lanczos(
    a: &CsrMatrix,
    mass: &CsrMatrix,
    m: usize,
    options: &SolverOptions,
    project: &dyn Fn(&mut [f64]),
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = a.n;
    let sigma = options.shift.unwrap_or(-0.1 * options.lambda_estimate.abs().max(f64::MIN_POSITIVE));
    let k = a.add_scaled(-sigma, mass);
    let factor = EnvelopeCholesky::factor(&k)?;
    let apply_t = |v: &[f64]| -> Vec<f64> {
        let mut w = factor.solve(&mass.apply(v));
        project(&mut w);
        w
    };
    let effective = if options.deflation == Deflation::ConstantMode { n - 1 } else { n };
    let block = (m + m / 2 + 4).min(effective);
    let max_basis = (4 * block).max(block + 40).min(effective);

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut random_vector = || -> Vec<f64> {
        let mut v: Vec<f64> = (0..n).map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5).collect();
        project(&mut v);
        v
    };

    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut mq: Vec<Vec<f64>> = Vec::new();
    let mut tq: Vec<Vec<f64>> = Vec::new();
    let mut pending: Vec<Vec<f64>> = (0..block).map(|_| random_vector()).collect();
    let mut worst = f64::INFINITY;

    for _restart in 0..options.max_restarts {
        while q.len() < max_basis {
            if pending.is_empty() {
                pending.push(random_vector());
            }
            let mut next = Vec::new();
            for mut v in core::mem::take(&mut pending) {
                if q.len() == max_basis {
                    break;
                }
                let before = math::sqrt(mass.bilinear(&v, &v));
                for _ in 0..2 {
                    for (qi, mqi) in q.iter().zip(&mq) {
                        let c = math_dot(mqi, &v);
                        v.iter_mut().zip(qi).for_each(|(x, y)| *x -= c * y);
                    }
                }
                project(&mut v);
                let mv = mass.apply(&v);
                let norm = math::sqrt(math_dot(&mv, &v));
                if !(norm > 1e-10 * before) || norm == 0.0 {
                    continue;
                }
                let inv = 1.0 / norm;
                v.iter_mut().for_each(|x| *x *= inv);
                let mv: Vec<f64> = mv.iter().map(|x| x * inv).collect();
                let w = apply_t(&v);
                next.push(w.clone());
                q.push(v);
                mq.push(mv);
                tq.push(w);
            }
            pending = next;
        }

        // Rayleigh–Ritz: H = Qᵀ M T Q
        let p = q.len();
        let mut h = alloc::vec![0.0; p * p];
        for i in 0..p {
            for j in 0..p {
                h[i * p + j] = math_dot(&mq[i], &tq[j]);
            }
        }
        for i in 0..p {
            for j in 0..i {
                let s = 0.5 * (h[i * p + j] + h[j * p + i]);
                h[i * p + j] = s;
                h[j * p + i] = s;
            }
        }
        let (_, ys) = dense::jacobi_eigen(&h, p);
        // largest θ first
        let keep: Vec<&Vec<f64>> = ys.iter().rev().take(block.min(p)).collect();
        let combine = |basis: &[Vec<f64>], y: &[f64]| -> Vec<f64> {
            let mut x = alloc::vec![0.0; n];
            for (b, c) in basis.iter().zip(y) {
                x.iter_mut().zip(b).for_each(|(s, t)| *s += c * t);
            }
            x
        };
        let ritz: Vec<Vec<f64>> = keep.iter().map(|y| combine(&q, y)).collect();
        let images: Vec<Vec<f64>> = keep.iter().map(|y| combine(&tq, y)).collect();

        // test the smoothed pairs: combinations of the stored basis carry
        // rounding in every mode, which A amplifies by λ_max
        let (mut values, mut smooth) = rayleigh_ritz(a, mass, images.clone());
        worst = 0.0;
        let converged = smooth.len() >= m
            && values.iter().zip(&smooth).take(m).fold(true, |ok, (l, x)| {
                let r = relative_residual(a, mass, *l, x);
                worst = worst.max(r);
                ok && r <= options.tol_eig
            });
        if converged {
            values.truncate(m);
            smooth.truncate(m);
            return Ok((values, smooth));
        }

        // thick restart: keep the Ritz block, continue from its images
        q = ritz;
        mq = q.iter().map(|x| mass.apply(x)).collect();
        tq = images.clone();
        pending = images;
    }
    Err(Error::NoConvergence { iterations: options.max_restarts, residual: worst })
}

/// Indices (0-based, into the ascending computed spectrum) of a cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub target: f64,
    pub indices: Vec<usize>,
    /// `max_{j∈J} |Λ_j − λ|`
    pub spread: f64,
    /// `min_{j∉J} |Λ_j − λ|`; infinite when `J` covers every value.
    pub gap: f64,
}

/// The `multiplicity` consecutive discrete eigenvalues nearest `target`.
/// Fails unless the rest of the computed spectrum is farther from `target`
/// than every cluster member.
pub fn match_cluster(eigenvalues: &[f64], target: f64, multiplicity: usize) -> Result<Cluster> {
    let n = eigenvalues.len();
    if multiplicity == 0 || multiplicity > n {
        return Err(Error::InvalidArgument(alloc::format!(
            "cluster of size {multiplicity} in a spectrum of {n} values"
        )));
    }
    let dev = |j: usize| (eigenvalues[j] - target).abs();
    let mut best = 0;
    let mut best_spread = f64::INFINITY;
    for s in 0..=n - multiplicity {
        let spread = (s..s + multiplicity).map(dev).fold(0.0, f64::max);
        if spread < best_spread {
            best_spread = spread;
            best = s;
        }
    }
    let indices: Vec<usize> = (best..best + multiplicity).collect();
    let gap = (0..n).filter(|j| !indices.contains(j)).map(dev).fold(f64::INFINITY, f64::min);
    if !(gap > best_spread) {
        return Err(Error::ClusterNotSeparated { target, gap, spread: best_spread });
    }
    Ok(Cluster { target, indices, spread: best_spread, gap })
}
