//! Error measurement against exact eigenpairs, spectral separation `μ(J)`,
//! geometric-consistency probes and Richardson extrapolation.
//!
//! A function `u` on `γ` is carried to the discrete surface `Γ` by the
//! extension `ū = u∘ψ`. The lifted forms `Ã`, `M̃` satisfy
//! `Ã(ṽ, w̃) = A(v, w)`, `M̃(ṽ, w̃) = M(v, w)` by construction, so every norm
//! below is evaluated as an integral over `Γ`.

use alloc::vec::Vec;

use crate::assembly::FeSpace;
use crate::error::{Error, Result};
use crate::exact::{ExactEigenpair, ExactFunction};
use crate::geometry::{CurvatureData, Projection};
use crate::lift::{combine_points, discrete_normal};
use crate::math::{self, Mat3, Metric, Vec3};
use crate::quadrature::QuadratureRule;
use crate::spectral::Cluster;

/// Everything known at one quadrature point of a lifted cell.
#[derive(Debug, Clone, Copy)]
pub struct LiftedPoint<'a> {
    pub cell: usize,
    /// Reference quadrature weight.
    pub weight: f64,
    /// `x = F_T(x̂)` on `Γ`.
    pub x: Vec3,
    /// Columns of `DF_T`.
    pub cols: [Vec3; 2],
    pub metric: Metric,
    /// Columns of `Dψ·DF_T`, the Jacobian of `ψ∘F_T`.
    pub gamma_cols: [Vec3; 2],
    pub gamma_metric: Metric,
    pub projection: Projection,
    pub curvature: CurvatureData,
    pub dpsi: Mat3,
    pub fe_values: &'a [f64],
    pub fe_grads: &'a [[f64; 2]],
    pub dofs: &'a [usize],
}

impl LiftedPoint<'_> {
    /// `dΣ` in reference units.
    pub fn d_sigma_h(&self) -> f64 {
        self.weight * self.metric.area_factor
    }

    /// `dσ` in reference units.
    pub fn d_sigma(&self) -> f64 {
        self.weight * self.gamma_metric.area_factor
    }
}

/// Visits every quadrature point of `rule` on every cell of `space`.
pub fn for_each_point(
    space: &FeSpace,
    rule: &QuadratureRule,
    mut f: impl FnMut(&LiftedPoint<'_>) -> Result<()>,
) -> Result<()> {
    let tables = space.tables(rule);
    let dim = space.dim();
    let surface = &space.lifted.base.surface;
    for c in 0..space.lifted.n_cells() {
        for q in 0..tables.n_points() {
            let (cols, metric) = space.geometry_at(c, &tables, q)?;
            let x = combine_points(space.lifted.cell_controls(c), tables.geo.values_at(q));
            let (projection, curvature, dpsi) = surface.projection_jacobian(x)?;
            let gamma_cols = [math::mat_vec(&dpsi, cols[0]), math::mat_vec(&dpsi, cols[1])];
            let gamma_metric = Metric::new(&gamma_cols, dim);
            f(&LiftedPoint {
                cell: c,
                weight: tables.weights[q],
                x,
                cols,
                metric,
                gamma_cols,
                gamma_metric,
                projection,
                curvature,
                dpsi,
                fe_values: tables.fe.values_at(q),
                fe_grads: tables.fe.grads_at(q),
                dofs: space.dofs.cell(c),
            })?;
        }
    }
    Ok(())
}

/// Quadrature exact through `2r + 2k + 4` per direction.
pub fn oracle_rule(space: &FeSpace) -> QuadratureRule {
    QuadratureRule::with_exactness(space.lifted.base.cell_kind, 2 * space.degree() + 2 * space.lifted.degree + 4)
}

/// A function on `Γ` known through its value and reference gradient.
pub trait LiftedFunction {
    fn value_and_reference_grad(&self, pt: &LiftedPoint<'_>) -> (f64, [f64; 2]);
}

impl LiftedFunction for ExactFunction {
    /// `ū = u∘ψ`; `∇̂ū = DFᵀ Dψ ∇_γ u`.
    fn value_and_reference_grad(&self, pt: &LiftedPoint<'_>) -> (f64, [f64; 2]) {
        let (u, g) = self.eval(pt.projection.point);
        (u, [math::dot(pt.gamma_cols[0], g), math::dot(pt.gamma_cols[1], g)])
    }
}

/// A finite element coefficient vector.
#[derive(Debug, Clone, Copy)]
pub struct Discrete<'a>(pub &'a [f64]);

impl LiftedFunction for Discrete<'_> {
    fn value_and_reference_grad(&self, pt: &LiftedPoint<'_>) -> (f64, [f64; 2]) {
        let mut v = 0.0;
        let mut g = [0.0; 2];
        for ((&d, &phi), dphi) in pt.dofs.iter().zip(pt.fe_values).zip(pt.fe_grads) {
            let c = self.0[d];
            v += c * phi;
            g[0] += c * dphi[0];
            g[1] += c * dphi[1];
        }
        (v, g)
    }
}

/// Geometric quantities relating `Γ` and `γ` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricFactors {
    /// `dσ = Q dΣ`
    pub q: f64,
    /// `∫_Γ ∇_Γv·∇_Γw dΣ = ∫_γ A_γ∇_γṽ·∇_γw̃ dσ`
    pub a_gamma: Mat3,
    /// Exact normal `ν` at `ψ(x)`.
    pub nu: Vec3,
    /// Discrete normal `N` of `Γ`.
    pub normal_h: Vec3,
    pub distance: f64,
    pub curvatures: [f64; 2],
    pub mean_curvature_sum: f64,
}

impl GeometricFactors {
    pub fn at(pt: &LiftedPoint<'_>, dim: usize) -> Self {
        let q = pt.gamma_metric.area_factor / pt.metric.area_factor;
        let p_h = pt.metric.tangent_projector(&pt.cols);
        let p = math::tangent_projector(pt.projection.normal);
        let p = if dim == 1 {
            // the curve tangent projector
            let t = pt.curvature.principal_directions[0];
            math::outer(t, t)
        } else {
            p
        };
        let inner = math::mat_mul(&math::mat_mul(&pt.dpsi, &p_h), &pt.dpsi);
        let a = math::mat_mul(&math::mat_mul(&p, &inner), &p);
        let mut a_gamma = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                a_gamma[i][j] = a[i][j] / q;
            }
        }
        GeometricFactors {
            q,
            a_gamma,
            nu: pt.projection.normal,
            normal_h: discrete_normal(&pt.cols, dim),
            distance: pt.projection.distance,
            curvatures: pt.curvature.principal_curvatures,
            mean_curvature_sum: pt.curvature.mean_curvature_sum,
        }
    }

    /// `‖A_γ − P‖` in the max-entry norm, with `P` the tangent projector of `γ`.
    pub fn a_gamma_defect(&self, tangent_projector: &Mat3) -> f64 {
        math::mat_max_abs(&math::mat_add_scaled(&self.a_gamma, -1.0, tangent_projector))
    }
}

/// Extremes of the geometric factors over all oracle points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometrySummary {
    /// `max |1 − 1/Q|`
    pub inverse_area_defect: f64,
    /// `max |A_γ − P|`
    pub a_gamma_defect: f64,
    /// `max |Q − (1 − dℋ)|`
    pub q_expansion_defect: f64,
    pub min_q: f64,
    pub max_distance: f64,
    pub max_curvature: f64,
    /// `max|d|·max|ℋ|`, a computable stand-in for the broken norm of `dℋ`.
    pub d_h_surrogate: f64,
}

pub fn geometry_summary(space: &FeSpace, rule: &QuadratureRule) -> Result<GeometrySummary> {
    let dim = space.dim();
    let mut s = GeometrySummary {
        inverse_area_defect: 0.0,
        a_gamma_defect: 0.0,
        q_expansion_defect: 0.0,
        min_q: f64::INFINITY,
        max_distance: 0.0,
        max_curvature: 0.0,
        d_h_surrogate: 0.0,
    };
    let mut max_h: f64 = 0.0;
    for_each_point(space, rule, |pt| {
        let g = GeometricFactors::at(pt, dim);
        let p = if dim == 1 {
            let t = pt.curvature.principal_directions[0];
            math::outer(t, t)
        } else {
            math::tangent_projector(g.nu)
        };
        s.inverse_area_defect = s.inverse_area_defect.max((1.0 - 1.0 / g.q).abs());
        s.a_gamma_defect = s.a_gamma_defect.max(g.a_gamma_defect(&p));
        s.q_expansion_defect = s.q_expansion_defect.max((g.q - (1.0 - g.distance * g.mean_curvature_sum)).abs());
        s.min_q = s.min_q.min(g.q);
        s.max_distance = s.max_distance.max(g.distance.abs());
        let kmax = g.curvatures[..dim].iter().fold(0.0f64, |m, k| m.max(k.abs()));
        s.max_curvature = s.max_curvature.max(kmax);
        max_h = max_h.max(g.mean_curvature_sum.abs());
        Ok(())
    })?;
    s.d_h_surrogate = s.max_distance * max_h;
    Ok(s)
}

/// `M̃(f, g)` and `Ã(f, g)` for any pair of lifted functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormPair {
    pub mass: f64,
    pub stiffness: f64,
}

/// Lifted forms of several functions against each other, in one sweep.
/// Entry `(i, j)` is stored at `i * n + j`.
pub fn lifted_gram(space: &FeSpace, rule: &QuadratureRule, funcs: &[&dyn LiftedFunction]) -> Result<Vec<FormPair>> {
    let n = funcs.len();
    let mut out = alloc::vec![FormPair { mass: 0.0, stiffness: 0.0 }; n * n];
    let mut vals = alloc::vec![(0.0, [0.0; 2]); n];
    for_each_point(space, rule, |pt| {
        for (v, f) in vals.iter_mut().zip(funcs) {
            *v = f.value_and_reference_grad(pt);
        }
        let w = pt.d_sigma_h();
        for i in 0..n {
            for j in 0..=i {
                let e = &mut out[i * n + j];
                e.mass += w * vals[i].0 * vals[j].0;
                e.stiffness += w * pt.metric.inner(vals[i].1, vals[j].1);
            }
        }
        Ok(())
    })?;
    for i in 0..n {
        for j in 0..i {
            out[j * n + i] = out[i * n + j];
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaPolicy {
    /// Subtract the `M̃`-mean of the error.
    MeanShift,
    Zero,
}

/// Errors of one exact eigenfunction against a discrete eigenspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenfunctionError {
    /// `‖u − Pu − α‖_M̃`
    pub l2: f64,
    /// `‖u − Pu‖_Ã`
    pub energy: f64,
    /// `‖u − Zu‖_Ã`, never larger than `energy`.
    pub energy_galerkin: f64,
    pub alpha: f64,
}

/// Errors of every eigenfunction of `exact` against `span{U_j : j ∈ J}`.
pub fn lifted_error_norms(
    space: &FeSpace,
    eigenvectors: &[Vec<f64>],
    cluster: &Cluster,
    exact: &ExactEigenpair,
    alpha_policy: AlphaPolicy,
) -> Result<Vec<EigenfunctionError>> {
    let rule = oracle_rule(space);
    let discrete: Vec<Discrete<'_>> = cluster.indices.iter().map(|&j| Discrete(&eigenvectors[j])).collect();
    let exact_fns: Vec<&dyn LiftedFunction> = exact.functions.iter().map(|f| f as &dyn LiftedFunction).collect();
    subspace_errors(space, &rule, &discrete, &exact_fns, alpha_policy)
}

/// Core of [`lifted_error_norms`]: `targets` against `span(basis)`.
pub fn subspace_errors(
    space: &FeSpace,
    rule: &QuadratureRule,
    basis: &[Discrete<'_>],
    targets: &[&dyn LiftedFunction],
    alpha_policy: AlphaPolicy,
) -> Result<Vec<EigenfunctionError>> {
    let nb = basis.len();
    let one = Constant(1.0);
    let mut funcs: Vec<&dyn LiftedFunction> = basis.iter().map(|b| b as &dyn LiftedFunction).collect();
    funcs.extend_from_slice(targets);
    funcs.push(&one);
    let n = funcs.len();
    let g = lifted_gram(space, rule, &funcs)?;
    let at = |i: usize, j: usize| g[i * n + j];
    let mass_gram: Vec<f64> = (0..nb * nb).map(|k| at(k / nb, k % nb).mass).collect();
    let stiff_gram: Vec<f64> = (0..nb * nb).map(|k| at(k / nb, k % nb).stiffness).collect();
    let ic = n - 1;
    let area = at(ic, ic).mass;
    let solve = |rhs: Vec<f64>, gram: &[f64]| -> Result<Vec<f64>> {
        let mut c = rhs;
        let mut g = gram.to_vec();
        if !math::solve_small(&mut g, &mut c, nb) {
            return Err(Error::InvalidArgument("singular Gram matrix of the discrete eigenspace".into()));
        }
        Ok(c)
    };
    let mut coeffs = Vec::with_capacity(targets.len());
    for t in 0..targets.len() {
        let it = nb + t;
        // P: M̃-projection, Z: Ã-projection
        let cp = solve((0..nb).map(|j| at(j, it).mass).collect(), &mass_gram)?;
        let cz = solve((0..nb).map(|j| at(j, it).stiffness).collect(), &stiff_gram)?;
        let mean = at(it, ic).mass - (0..nb).map(|j| cp[j] * at(j, ic).mass).sum::<f64>();
        let alpha = match alpha_policy {
            AlphaPolicy::MeanShift => mean / area,
            AlphaPolicy::Zero => 0.0,
        };
        coeffs.push((cp, cz, alpha));
    }

    // second sweep on the pointwise errors; expanding ‖u − Σc_jU_j‖² through
    // the Gram entries would cancel down to rounding level
    let mut sums = alloc::vec![[0.0f64; 3]; targets.len()];
    let mut basis_vals = alloc::vec![(0.0, [0.0; 2]); nb];
    for_each_point(space, rule, |pt| {
        for (bv, b) in basis_vals.iter_mut().zip(basis) {
            *bv = b.value_and_reference_grad(pt);
        }
        let w = pt.d_sigma_h();
        for ((f, (cp, cz, alpha)), acc) in targets.iter().zip(&coeffs).zip(sums.iter_mut()) {
            let (u, gu) = f.value_and_reference_grad(pt);
            let (mut ep, mut gp, mut gz) = (u - alpha, gu, gu);
            for ((v, g), (p, z)) in basis_vals.iter().zip(cp.iter().zip(cz)) {
                ep -= p * v;
                gp = [gp[0] - p * g[0], gp[1] - p * g[1]];
                gz = [gz[0] - z * g[0], gz[1] - z * g[1]];
            }
            acc[0] += w * ep * ep;
            acc[1] += w * pt.metric.inner(gp, gp);
            acc[2] += w * pt.metric.inner(gz, gz);
        }
        Ok(())
    })?;
    Ok(sums
        .iter()
        .zip(&coeffs)
        .map(|(s, (_, _, alpha))| EigenfunctionError {
            l2: math::sqrt(s[0]),
            energy: math::sqrt(s[1]),
            energy_galerkin: math::sqrt(s[2]),
            alpha: *alpha,
        })
        .collect())
}

#[derive(Debug, Clone, Copy)]
struct Constant(f64);

impl LiftedFunction for Constant {
    fn value_and_reference_grad(&self, _: &LiftedPoint<'_>) -> (f64, [f64; 2]) {
        (self.0, [0.0; 2])
    }
}

/// Eigenvalue errors of one cluster and its separation from the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenvalueErrors {
    /// `|λ − Λ_j|` for `j ∈ J` in cluster order.
    pub per_index: Vec<f64>,
    /// `max_{j∈J} |λ − Λ_j|`
    pub cluster: f64,
    /// `μ(J)` over the computed complement.
    pub mu: f64,
    /// Always true: only computed eigenvalues enter the maximum.
    pub mu_truncated: bool,
}

/// `|λ − Λ_j|` and `μ(J) = max_{j∉J} |λ/(Λ_j − λ)|`.
pub fn eigenvalue_errors_and_mu(eigenvalues: &[f64], cluster: &Cluster, lambda: f64) -> Result<EigenvalueErrors> {
    let per_index: Vec<f64> = cluster.indices.iter().map(|&j| (lambda - eigenvalues[j]).abs()).collect();
    let complement: Vec<f64> = (0..eigenvalues.len())
        .filter(|j| !cluster.indices.contains(j))
        .map(|j| eigenvalues[j])
        .collect();
    if complement.is_empty() {
        return Err(Error::EmptyComplement);
    }
    let eps_gap = 1e-12 * lambda.abs().max(1.0);
    let mut mu: f64 = 0.0;
    for l in complement {
        let gap = l - lambda;
        if gap.abs() < eps_gap {
            return Err(Error::ClusterNotSeparated { target: lambda, gap: gap.abs(), spread: cluster.spread });
        }
        mu = mu.max((lambda / gap).abs());
    }
    let cluster_error = per_index.iter().copied().fold(0.0, f64::max);
    Ok(EigenvalueErrors { per_index, cluster: cluster_error, mu, mu_truncated: true })
}

/// Mismatches between the exact-surface forms of `Ṽ` and their lifted
/// counterparts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyProbe {
    /// `|a(Ṽ,Ṽ) − Ã(Ṽ,Ṽ)|`
    pub stiffness: f64,
    /// `|m(Ṽ,Ṽ) − M̃(Ṽ,Ṽ)|`
    pub mass: f64,
}

fn probe_with(space: &FeSpace, rule: &QuadratureRule, v: &dyn LiftedFunction) -> Result<(f64, f64, f64)> {
    let mut ds = 0.0;
    let mut dm = 0.0;
    let mut scale = 0.0;
    for_each_point(space, rule, |pt| {
        let (val, g) = v.value_and_reference_grad(pt);
        let gamma = pt.weight * pt.gamma_metric.area_factor;
        let flat = pt.weight * pt.metric.area_factor;
        dm += val * val * (gamma - flat);
        ds += gamma * pt.gamma_metric.inner(g, g) - flat * pt.metric.inner(g, g);
        scale += flat * (val * val + pt.metric.inner(g, g));
        Ok(())
    })?;
    Ok((ds, dm, scale))
}

/// Geometric-consistency mismatches of a lifted function, with an
/// over-resolution check on the oracle rule.
pub fn geometric_consistency_probe(space: &FeSpace, v: &dyn LiftedFunction) -> Result<ConsistencyProbe> {
    let kind = space.lifted.base.cell_kind;
    let base = 2 * space.degree() + 2 * space.lifted.degree + 4;
    let (s1, m1, scale) = probe_with(space, &QuadratureRule::with_exactness(kind, base), v)?;
    let (s2, m2, _) = probe_with(space, &QuadratureRule::with_exactness(kind, base + 6), v)?;
    for (a, b, what) in [(s1, s2, "stiffness"), (m1, m2, "mass")] {
        let tol = 1e-3 * b.abs() + 1e-14 * scale;
        if (a - b).abs() > tol {
            return Err(Error::OracleInsufficient(alloc::format!(
                "{what} mismatch changes by {:e} under refinement of the rule",
                (a - b).abs()
            )));
        }
    }
    Ok(ConsistencyProbe { stiffness: s2.abs(), mass: m2.abs() })
}

/// `Ã(Ṽ, W̃)` and `M̃(Ṽ, W̃)` computed on `γ` with the factors `Q` and
/// `A_γ`, for comparison with the assembled `A(V, W)` and `M(V, W)`.
pub fn lifted_forms_on_gamma(space: &FeSpace, rule: &QuadratureRule, v: &[f64], w: &[f64]) -> Result<FormPair> {
    let dim = space.dim();
    let mut out = FormPair { mass: 0.0, stiffness: 0.0 };
    for_each_point(space, rule, |pt| {
        let g = GeometricFactors::at(pt, dim);
        let (fv, gv) = Discrete(v).value_and_reference_grad(pt);
        let (fw, gw) = Discrete(w).value_and_reference_grad(pt);
        let sigma = pt.d_sigma();
        let grad_v = pt.gamma_metric.push_forward(&pt.gamma_cols, gv);
        let grad_w = pt.gamma_metric.push_forward(&pt.gamma_cols, gw);
        out.mass += sigma * fv * fw / g.q;
        out.stiffness += sigma * math::dot(math::mat_vec(&g.a_gamma, grad_v), grad_w);
        Ok(())
    })?;
    Ok(out)
}

/// Richardson-extrapolated reference value from a sequence of halved levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolated {
    pub value: f64,
    /// `|E_last − E_previous|`
    pub estimate: f64,
}

/// Extrapolates the last three values of `values` (one per halved level)
/// assuming error `∝ h^rate`.
pub fn richardson(values: &[f64], rate: f64, limit: f64) -> Result<Extrapolated> {
    if values.len() < 3 {
        return Err(Error::InvalidArgument("Richardson extrapolation needs at least three levels".into()));
    }
    let f = math::pow(2.0, rate) - 1.0;
    let n = values.len();
    let e = |i: usize| values[i + 1] + (values[i + 1] - values[i]) / f;
    let (e1, e2) = (e(n - 3), e(n - 2));
    let estimate = (e2 - e1).abs();
    if !(estimate <= limit) {
        return Err(Error::ExtrapolationUnstable { estimate, limit });
    }
    Ok(Extrapolated { value: e2, estimate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::match_cluster;

    #[test]
    fn mu_examples() {
        let vals = [2.0, 6.1, 6.3];
        let c = match_cluster(&vals, 2.0, 1).unwrap();
        let e = eigenvalue_errors_and_mu(&vals, &c, 2.0).unwrap();
        assert!((e.mu - 2.0 / 4.1).abs() < 1e-15);
        assert!(e.mu_truncated);
        let all = match_cluster(&[2.0, 2.0], 2.0, 2).unwrap();
        assert!(matches!(eigenvalue_errors_and_mu(&[2.0, 2.0], &all, 2.0), Err(Error::EmptyComplement)));
    }

    #[test]
    fn richardson_recovers_geometric_sequence() {
        // Λ(h) = 1 + h²
        let vals = [1.25, 1.0625, 1.015625];
        let r = richardson(&vals, 2.0, 1e-12).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15 && r.estimate < 1e-15);
        let noisy = [1.25, 1.1, 1.0];
        assert!(matches!(richardson(&noisy, 2.0, 1e-6), Err(Error::ExtrapolationUnstable { .. })));
    }
}
