//! Quadrature rules on the reference segment `[0, 1]`, unit square and the
//! Kuhn triangle, with their exactness degree and the order `ℓ` for which
//! the quadrature error vanishes on all polynomials of degree `ℓ − 1`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::mesh::CellKind;
use crate::triangle_rules;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleFamily {
    GaussLegendre,
    GaussLobatto,
    NewtonCotes,
    SymmetricTriangle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub cell_kind: CellKind,
    pub family: RuleFamily,
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// Largest (per-direction for tensor cells) polynomial degree integrated
    /// exactly.
    pub exactness_degree: usize,
    /// `ℓ = exactness_degree + 1`.
    pub order_ell: usize,
}

/// Measure of the reference cell.
pub fn reference_measure(kind: CellKind) -> f64 {
    match kind {
        CellKind::Triangle => 0.5,
        _ => 1.0,
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    // P_n and P_n' by the three-term recurrence on [-1, 1]
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// `n`-point Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = math::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, z);
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        // z is in (0, 1]; mirror
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wi;
        w[n - 1 - i] = 0.5 * wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.5;
    }
    (x, w)
}

/// `n`-point Gauss–Lobatto nodes (including both endpoints) and weights on
/// `[0, 1]`; exact through degree `2n − 3`.
pub fn gauss_lobatto(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let m = n - 1;
    let mf = m as f64;
    let mut x = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // interior nodes are the roots of P_m'; Newton on (1 − z²)P_m'
        let mut z = -math::cos(core::f64::consts::PI * i as f64 / mf);
        if i > 0 {
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(m, z);
                // (1 − z²)P'' = 2zP' − m(m+1)P
                let ddp = (2.0 * z * dp - mf * (mf + 1.0) * p) / (1.0 - z * z);
                let dz = dp / ddp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
        }
        let (p, _) = legendre_with_derivative(m, z);
        let wi = 2.0 / (mf * (mf + 1.0) * p * p);
        x[i] = 0.5 * (1.0 + z);
        x[n - 1 - i] = 0.5 * (1.0 - z);
        w[i] = 0.5 * wi;
        w[n - 1 - i] = 0.5 * wi;
    }
    x[0] = 0.0;
    x[n - 1] = 1.0;
    if n % 2 == 1 {
        x[n / 2] = 0.5;
    }
    (x, w)
}

/// Closed `n`-point Newton–Cotes rule on `[0, 1]`.
pub fn newton_cotes(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let x: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let mut a = alloc::vec![0.0; n * n];
    let mut b = alloc::vec![0.0; n];
    for p in 0..n {
        for (i, xi) in x.iter().enumerate() {
            a[p * n + i] = math::powi(*xi, p as i32);
        }
        b[p] = 1.0 / (p as f64 + 1.0);
    }
    let ok = math::solve_small(&mut a, &mut b, n);
    debug_assert!(ok);
    // enforce the symmetry the exact weights have
    for i in 0..n / 2 {
        let avg = 0.5 * (b[i] + b[n - 1 - i]);
        b[i] = avg;
        b[n - 1 - i] = avg;
    }
    (x, b)
}

fn line_exactness(family: RuleFamily, n: usize) -> usize {
    match family {
        RuleFamily::GaussLegendre => 2 * n - 1,
        RuleFamily::GaussLobatto => 2 * n - 3,
        RuleFamily::NewtonCotes => {
            if n % 2 == 1 {
                n
            } else {
                n - 1
            }
        }
        RuleFamily::SymmetricTriangle => unreachable!(),
    }
}

fn line_rule(family: RuleFamily, n: usize) -> (Vec<f64>, Vec<f64>) {
    match family {
        RuleFamily::GaussLegendre => gauss_legendre(n),
        RuleFamily::GaussLobatto => gauss_lobatto(n),
        RuleFamily::NewtonCotes => newton_cotes(n),
        RuleFamily::SymmetricTriangle => unreachable!(),
    }
}

impl QuadratureRule {
    /// Builds a rule of the given family. For segments `n_points` is the
    /// point count, for quads the count per direction, for triangles with
    /// [`RuleFamily::GaussLegendre`] the count per direction of the collapsed
    /// (Duffy) product rule, and for [`RuleFamily::SymmetricTriangle`] the
    /// tabulated point count.
    pub fn new(cell_kind: CellKind, family: RuleFamily, n_points: usize) -> Result<Self> {
        let unsupported = || {
            Err(Error::UnsupportedCombination(format!(
                "{family:?} rule with {n_points} points on {cell_kind:?}"
            )))
        };
        let min_points = match family {
            RuleFamily::GaussLobatto | RuleFamily::NewtonCotes => 2,
            _ => 1,
        };
        if n_points < min_points {
            return unsupported();
        }
        match (cell_kind, family) {
            (CellKind::Triangle, RuleFamily::SymmetricTriangle) => {
                let Some((points, w, exactness)) = triangle_rules::symmetric_rule_with_points(n_points) else {
                    return unsupported();
                };
                Ok(Self::finish(cell_kind, family, points, w.iter().map(|w| 0.5 * w).collect(), exactness))
            }
            (CellKind::Triangle, RuleFamily::GaussLegendre) => {
                let (x, w) = gauss_legendre(n_points);
                let mut points = Vec::with_capacity(n_points * n_points);
                let mut weights = Vec::with_capacity(n_points * n_points);
                for (u, wu) in x.iter().zip(&w) {
                    for (v, wv) in x.iter().zip(&w) {
                        points.push([*u, *v * (1.0 - u)]);
                        weights.push(wu * wv * (1.0 - u));
                    }
                }
                Ok(Self::finish(cell_kind, family, points, weights, 2 * n_points - 2))
            }
            (CellKind::Triangle, _) | (_, RuleFamily::SymmetricTriangle) => unsupported(),
            (CellKind::Segment, f) => {
                let (x, w) = line_rule(f, n_points);
                let points = x.iter().map(|t| [*t, 0.0]).collect();
                Ok(Self::finish(cell_kind, family, points, w, line_exactness(f, n_points)))
            }
            (CellKind::Quad, f) => {
                let (x, w) = line_rule(f, n_points);
                let mut points = Vec::with_capacity(n_points * n_points);
                let mut weights = Vec::with_capacity(n_points * n_points);
                for (t, wt) in x.iter().zip(&w) {
                    for (s, ws) in x.iter().zip(&w) {
                        points.push([*s, *t]);
                        weights.push(ws * wt);
                    }
                }
                Ok(Self::finish(cell_kind, family, points, weights, line_exactness(f, n_points)))
            }
        }
    }

    fn finish(
        cell_kind: CellKind,
        family: RuleFamily,
        points: Vec<[f64; 2]>,
        weights: Vec<f64>,
        exactness_degree: usize,
    ) -> Self {
        Self { cell_kind, family, points, weights, exactness_degree, order_ell: exactness_degree + 1 }
    }

    /// Gauss rule (collapsed on triangles) exact through `degree`.
    pub fn with_exactness(cell_kind: CellKind, degree: usize) -> Self {
        let n = match cell_kind {
            CellKind::Triangle => (degree + 2).div_ceil(2),
            _ => (degree + 1).div_ceil(2),
        };
        Self::new(cell_kind, RuleFamily::GaussLegendre, n.max(1)).expect("gauss rules always exist")
    }

    /// Tabulated symmetric triangle rule exact through `degree` (≤ 7).
    pub fn symmetric_triangle(degree: usize) -> Result<Self> {
        let (points, w, exactness) = triangle_rules::symmetric_rule(degree).ok_or_else(|| {
            Error::UnsupportedCombination(format!(
                "symmetric triangle rules are tabulated up to degree {}",
                triangle_rules::MAX_SYMMETRIC_EXACTNESS
            ))
        })?;
        Ok(Self::finish(
            CellKind::Triangle,
            RuleFamily::SymmetricTriangle,
            points,
            w.iter().map(|w| 0.5 * w).collect(),
            exactness,
        ))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate(&self, f: impl Fn([f64; 2]) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(*p)).sum()
    }
}

/// Quadrature error `∫_T̂ f − Σ ŵ_i f(q̂_i)` on the reference cell, with the
/// exact integral taken from a Gauss oracle of exactness at least twice the
/// rule's plus six. The oracle is cross-checked against a refined oracle.
pub fn quadrature_error(rule: &QuadratureRule, f: impl Fn([f64; 2]) -> f64) -> Result<f64> {
    let target = 2 * rule.exactness_degree + 6;
    let oracle = QuadratureRule::with_exactness(rule.cell_kind, target);
    let refined = QuadratureRule::with_exactness(rule.cell_kind, target + 12);
    let exact = oracle.integrate(&f);
    let check = refined.integrate(&f);
    let scale = exact.abs().max(1.0);
    if (exact - check).abs() > 1e-13 * scale {
        return Err(Error::OracleInsufficient(format!(
            "oracle {exact:e} vs refined {check:e}"
        )));
    }
    Ok(check - rule.integrate(&f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn lobatto_three_points() {
        let (x, w) = gauss_lobatto(3);
        assert_abs_diff_eq!(x[1], 0.5, epsilon = 1e-16);
        assert_abs_diff_eq!(w[0], 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w[2], 1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn lobatto_four_points_interior_nodes() {
        let (x, _) = gauss_lobatto(4);
        let s = 1.0 / math::sqrt(5.0);
        assert_abs_diff_eq!(x[1], 0.5 * (1.0 - s), epsilon = 1e-15);
        assert_abs_diff_eq!(x[2], 0.5 * (1.0 + s), epsilon = 1e-15);
    }

    #[test]
    fn legendre_two_points() {
        let (x, w) = gauss_legendre(2);
        let s = 1.0 / math::sqrt(3.0);
        assert_abs_diff_eq!(x[0], 0.5 * (1.0 - s), epsilon = 1e-15);
        assert_abs_diff_eq!(x[1], 0.5 * (1.0 + s), epsilon = 1e-15);
        assert_abs_diff_eq!(w[0], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn simpson_is_newton_cotes_three() {
        let (_, w) = newton_cotes(3);
        assert_abs_diff_eq!(w[0], 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1], 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn exactness_bookkeeping() {
        let r = QuadratureRule::new(CellKind::Segment, RuleFamily::GaussLobatto, 4).unwrap();
        assert_eq!((r.exactness_degree, r.order_ell), (5, 6));
        let r = QuadratureRule::new(CellKind::Segment, RuleFamily::NewtonCotes, 4).unwrap();
        assert_eq!(r.order_ell, 4);
        let r = QuadratureRule::new(CellKind::Segment, RuleFamily::NewtonCotes, 3).unwrap();
        assert_eq!(r.order_ell, 4);
    }

    #[test]
    fn unsupported_combinations() {
        assert!(QuadratureRule::new(CellKind::Triangle, RuleFamily::GaussLobatto, 3).is_err());
        assert!(QuadratureRule::new(CellKind::Quad, RuleFamily::SymmetricTriangle, 3).is_err());
        assert!(QuadratureRule::new(CellKind::Triangle, RuleFamily::SymmetricTriangle, 5).is_err());
        assert!(QuadratureRule::new(CellKind::Segment, RuleFamily::GaussLobatto, 1).is_err());
        assert!(QuadratureRule::symmetric_triangle(8).is_err());
    }

    #[test]
    fn quadrature_error_of_x4_under_three_point_lobatto() {
        let r = QuadratureRule::new(CellKind::Segment, RuleFamily::GaussLobatto, 3).unwrap();
        let e = quadrature_error(&r, |p| math::powi(p[0], 4)).unwrap();
        assert_abs_diff_eq!(e, -1.0 / 120.0, epsilon = 1e-15);
        let e3 = quadrature_error(&r, |p| math::powi(p[0], 3)).unwrap();
        assert!(e3.abs() < 1e-15);
    }

    #[test]
    fn tensor_lobatto_cubic_product() {
        let r = QuadratureRule::new(CellKind::Quad, RuleFamily::GaussLobatto, 3).unwrap();
        let e = quadrature_error(&r, |p| math::powi(p[0], 3) * math::powi(p[1], 3)).unwrap();
        assert!(e.abs() < 1e-15);
    }
}
