//! Exact descriptions of the smooth surface `γ`: signed distance `d`,
//! closest-point projection `ψ`, normal `ν = ∇d` and curvature data.
//!
//! Every point of the tubular neighborhood decomposes as
//! `x = ψ(x) + d(x)·ν(ψ(x))`. Closed-form kinds evaluate `d` and `ψ`
//! directly; implicit kinds run a damped Newton iteration on the foot-point
//! equations with tolerance `1e-12` and at most 50 steps.

use crate::error::{Error, Result};
use crate::implicit;
pub use crate::implicit::LevelSet;
use crate::math::{self, Mat3, Vec3};

/// Which smooth surface is being approximated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceKind {
    /// Circle of the given radius in the `z = 0` plane, centered at the origin.
    Circle { radius: f64 },
    Sphere { radius: f64 },
    /// Torus around the `z` axis with tube radius `minor < major`.
    Torus { major: f64, minor: f64 },
    Implicit(LevelSet),
}

/// A closed surface together with the half-width of the strip in which the
/// closest-point projection is trusted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceDescription {
    pub kind: SurfaceKind,
    pub strip_halfwidth: f64,
}

/// Result of projecting an ambient point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    /// `ψ(x)`
    pub point: Vec3,
    /// `d(x)`
    pub distance: f64,
    /// `ν(ψ(x))`, outward.
    pub normal: Vec3,
}

/// Principal curvature data of `γ` at a surface point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureData {
    /// Intrinsic dimension `D`; only the first `dim` curvature slots are used.
    pub dim: usize,
    pub principal_curvatures: [f64; 2],
    pub principal_directions: [Vec3; 2],
    /// `ℋ = Σ κ_i`
    pub mean_curvature_sum: f64,
    /// Hessian of `d` on `γ`: `Σ κ_i e_i ⊗ e_i`.
    pub hessian: Mat3,
    pub normal: Vec3,
}

impl CurvatureData {
    fn from_parts(dim: usize, kappa: [f64; 2], dirs: [Vec3; 2], normal: Vec3) -> Self {
        let mut hessian = [[0.0; 3]; 3];
        let mut sum = 0.0;
        for i in 0..dim {
            hessian = math::mat_add_scaled(&hessian, kappa[i], &math::outer(dirs[i], dirs[i]));
            sum += kappa[i];
        }
        CurvatureData {
            dim,
            principal_curvatures: kappa,
            principal_directions: dirs,
            mean_curvature_sum: sum,
            hessian,
            normal,
        }
    }
}

impl SurfaceDescription {
    pub fn circle(radius: f64) -> Self {
        Self { kind: SurfaceKind::Circle { radius }, strip_halfwidth: 0.5 * radius }
    }

    pub fn sphere(radius: f64) -> Self {
        Self { kind: SurfaceKind::Sphere { radius }, strip_halfwidth: 0.5 * radius }
    }

    pub fn torus(major: f64, minor: f64) -> Self {
        Self {
            kind: SurfaceKind::Torus { major, minor },
            strip_halfwidth: 0.5 * minor.min(major - minor),
        }
    }

    pub fn implicit(level_set: LevelSet) -> Self {
        Self {
            kind: SurfaceKind::Implicit(level_set),
            strip_halfwidth: level_set.default_strip_halfwidth(),
        }
    }

    pub fn with_strip_halfwidth(mut self, halfwidth: f64) -> Self {
        self.strip_halfwidth = halfwidth;
        self
    }

    /// Checks radii and the strip width.
    pub fn validate(&self) -> Result<()> {
        let ok = match self.kind {
            SurfaceKind::Circle { radius } | SurfaceKind::Sphere { radius } => radius > 0.0,
            SurfaceKind::Torus { major, minor } => minor > 0.0 && major > minor,
            SurfaceKind::Implicit(_) => true,
        };
        if !ok {
            return Err(Error::InvalidArgument("surface radii must satisfy 0 < minor < major".into()));
        }
        if !(self.strip_halfwidth > 0.0) {
            return Err(Error::InvalidArgument("strip half-width must be positive".into()));
        }
        Ok(())
    }

    /// Ambient dimension `D + 1`.
    pub fn ambient_dim(&self) -> usize {
        self.dim() + 1
    }

    /// Intrinsic dimension `D`.
    pub fn dim(&self) -> usize {
        match self.kind {
            SurfaceKind::Circle { .. } => 1,
            _ => 2,
        }
    }

    /// Exact length or area when known in closed form.
    pub fn measure(&self) -> Option<f64> {
        use core::f64::consts::PI;
        match self.kind {
            SurfaceKind::Circle { radius } => Some(2.0 * PI * radius),
            SurfaceKind::Sphere { radius } => Some(4.0 * PI * radius * radius),
            SurfaceKind::Torus { major, minor } => Some(4.0 * PI * PI * major * minor),
            SurfaceKind::Implicit(LevelSet::UnitSphere) => Some(4.0 * PI),
            SurfaceKind::Implicit(_) => None,
        }
    }

    /// Decomposes `x = ψ(x) + d(x)·ν(ψ(x))`.
    pub fn project(&self, x: Vec3) -> Result<Projection> {
        match self.kind {
            SurfaceKind::Circle { radius } => {
                let r = math::sqrt(x[0] * x[0] + x[1] * x[1]);
                if r == 0.0 {
                    return Err(Error::OutsideStrip { distance: -radius, halfwidth: self.strip_halfwidth });
                }
                let normal = [x[0] / r, x[1] / r, 0.0];
                Ok(Projection { point: math::scale(normal, radius), distance: r - radius, normal })
            }
            SurfaceKind::Sphere { radius } => {
                let r = math::norm(x);
                if r == 0.0 {
                    return Err(Error::OutsideStrip { distance: -radius, halfwidth: self.strip_halfwidth });
                }
                let normal = math::scale(x, 1.0 / r);
                Ok(Projection { point: math::scale(normal, radius), distance: r - radius, normal })
            }
            SurfaceKind::Torus { major, minor } => {
                let rho = math::sqrt(x[0] * x[0] + x[1] * x[1]);
                if rho == 0.0 {
                    return Err(Error::OutsideStrip { distance: major, halfwidth: self.strip_halfwidth });
                }
                let center = [major * x[0] / rho, major * x[1] / rho, 0.0];
                let off = math::sub(x, center);
                let q = math::norm(off);
                if q == 0.0 {
                    return Err(Error::OutsideStrip { distance: -minor, halfwidth: self.strip_halfwidth });
                }
                let normal = math::scale(off, 1.0 / q);
                Ok(Projection {
                    point: math::axpy(center, minor, normal),
                    distance: q - minor,
                    normal,
                })
            }
            SurfaceKind::Implicit(ls) => {
                let foot = implicit::project(ls, x, self.strip_halfwidth)?;
                Ok(Projection { point: foot.point, distance: foot.distance, normal: foot.normal })
            }
        }
    }

    /// Oriented distance, negative inside.
    pub fn signed_distance(&self, x: Vec3) -> Result<f64> {
        Ok(self.project(x)?.distance)
    }

    /// `ψ(x)`.
    pub fn closest_point(&self, x: Vec3) -> Result<Vec3> {
        Ok(self.project(x)?.point)
    }

    /// `ν(ψ(x)) = ∇d(x)`.
    pub fn normal(&self, x: Vec3) -> Result<Vec3> {
        Ok(self.project(x)?.normal)
    }

    /// Principal curvatures and directions at a point of `γ`.
    pub fn curvature_at(&self, p: Vec3) -> Result<CurvatureData> {
        match self.kind {
            SurfaceKind::Circle { radius } => {
                let proj = self.project(p)?;
                self.check_on_surface(proj.distance)?;
                let n = proj.normal;
                let e = [-n[1], n[0], 0.0];
                Ok(CurvatureData::from_parts(1, [1.0 / radius, 0.0], [e, [0.0; 3]], n))
            }
            SurfaceKind::Sphere { radius } => {
                let proj = self.project(p)?;
                self.check_on_surface(proj.distance)?;
                let n = proj.normal;
                let e1 = math::any_orthogonal(n);
                let e2 = math::cross(n, e1);
                Ok(CurvatureData::from_parts(2, [1.0 / radius; 2], [e1, e2], n))
            }
            SurfaceKind::Torus { minor, .. } => {
                let proj = self.project(p)?;
                self.check_on_surface(proj.distance)?;
                let n = proj.normal;
                let y = proj.point;
                let rho = math::sqrt(y[0] * y[0] + y[1] * y[1]);
                let azimuth = [-y[1] / rho, y[0] / rho, 0.0];
                let meridian = math::cross(n, azimuth);
                let cos_theta = (n[0] * y[0] + n[1] * y[1]) / rho;
                Ok(CurvatureData::from_parts(
                    2,
                    [1.0 / minor, cos_theta / rho],
                    [meridian, azimuth],
                    n,
                ))
            }
            SurfaceKind::Implicit(ls) => {
                let d = ls.value(p) / math::norm(ls.gradient(p));
                self.check_on_surface(d)?;
                let g = ls.gradient(p);
                let gnorm = math::norm(g);
                let n = math::scale(g, 1.0 / gnorm);
                let proj = math::tangent_projector(n);
                let hphi = ls.hessian(p);
                let shape = math::mat_mul(&math::mat_mul(&proj, &hphi), &proj);
                let mut shape_scaled = [[0.0; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        // symmetrize against rounding in the triple product
                        shape_scaled[i][j] = 0.5 * (shape[i][j] + shape[j][i]) / gnorm;
                    }
                }
                let (vals, vecs) = math::sym3_eigen(&shape_scaled).ok_or(Error::DegenerateHessian)?;
                // the normal direction is the (near) null eigenvector
                let mut order = [0usize, 1, 2];
                order.sort_by(|&a, &b| {
                    math::dot(vecs[a], n)
                        .abs()
                        .partial_cmp(&math::dot(vecs[b], n).abs())
                        .unwrap_or(core::cmp::Ordering::Equal)
                });
                if math::dot(vecs[order[2]], n).abs() < 0.9 {
                    return Err(Error::DegenerateHessian);
                }
                let e1 = math::normalize(math::axpy(vecs[order[0]], -math::dot(vecs[order[0]], n), n));
                let e2 = math::cross(n, e1);
                let k1 = math::dot(e1, math::mat_vec(&shape_scaled, e1));
                let k2 = math::dot(e2, math::mat_vec(&shape_scaled, e2));
                let _ = vals;
                Ok(CurvatureData::from_parts(2, [k1, k2], [e1, e2], n))
            }
        }
    }

    fn check_on_surface(&self, d: f64) -> Result<()> {
        if d.abs() > 1e-9 * (1.0 + self.strip_halfwidth) {
            return Err(Error::InvalidArgument("curvature requested off the surface".into()));
        }
        Ok(())
    }

    /// Hessian of `d` at an arbitrary strip point: `Σ κ_i/(1 + dκ_i) e_i⊗e_i`.
    pub fn distance_hessian(&self, x: Vec3) -> Result<Mat3> {
        let proj = self.project(x)?;
        let curv = self.curvature_at(proj.point)?;
        let mut h = [[0.0; 3]; 3];
        for i in 0..curv.dim {
            let k = curv.principal_curvatures[i];
            let e = curv.principal_directions[i];
            h = math::mat_add_scaled(&h, k / (1.0 + proj.distance * k), &math::outer(e, e));
        }
        Ok(h)
    }

    /// Jacobian of the closest-point map, `Dψ(x) = Σ e_i⊗e_i / (1 + dκ_i)`.
    /// Symmetric; its range is the tangent space of `γ` at `ψ(x)`.
    pub fn projection_jacobian(&self, x: Vec3) -> Result<(Projection, CurvatureData, Mat3)> {
        let proj = self.project(x)?;
        let curv = self.curvature_at(proj.point)?;
        let mut m = [[0.0; 3]; 3];
        for i in 0..curv.dim {
            let k = curv.principal_curvatures[i];
            let e = curv.principal_directions[i];
            m = math::mat_add_scaled(&m, 1.0 / (1.0 + proj.distance * k), &math::outer(e, e));
        }
        Ok((proj, curv, m))
    }

    /// Point of `γ` attached to the unit-sphere parameter `dir`: the radial
    /// point on circles and spheres, a sheared-sphere chart on the built-in
    /// level sets. Undefined on the torus.
    pub fn chart_point(&self, dir: Vec3) -> Result<Vec3> {
        match self.kind {
            SurfaceKind::Circle { radius } => {
                let d = [dir[0], dir[1], 0.0];
                Ok(math::scale(math::normalize(d), radius))
            }
            SurfaceKind::Sphere { radius } => Ok(math::scale(math::normalize(dir), radius)),
            SurfaceKind::Torus { .. } => Err(Error::UnsupportedCombination("sphere chart on a torus".into())),
            SurfaceKind::Implicit(ls) => implicit::chart_point(ls, dir),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sphere_distance_and_projection() {
        let s = SurfaceDescription::sphere(1.0);
        assert_abs_diff_eq!(s.signed_distance([2.0, 0.0, 0.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(s.signed_distance([1.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(s.closest_point([2.0, 0.0, 0.0]).unwrap(), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn torus_outer_equator_is_on_surface() {
        let t = SurfaceDescription::torus(2.0, 1.0);
        assert_abs_diff_eq!(t.signed_distance([3.0, 0.0, 0.0]).unwrap(), 0.0);
        let c = t.curvature_at([3.0, 0.0, 0.0]).unwrap();
        let mut k = c.principal_curvatures;
        k.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_abs_diff_eq!(k[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(k[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn circle_projection_is_radial() {
        let c = SurfaceDescription::circle(1.0);
        let p = c.closest_point([0.5, 0.5, 0.0]).unwrap();
        let r = 1.0 / math::sqrt(2.0);
        assert_abs_diff_eq!(p[0], r, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], r, epsilon = 1e-15);
        let k = c.curvature_at([0.0, 1.0, 0.0]).unwrap();
        assert_eq!(k.dim, 1);
        assert_abs_diff_eq!(k.principal_curvatures[0], 1.0);
    }

    #[test]
    fn sphere_curvatures() {
        let s = SurfaceDescription::sphere(1.0);
        let p = math::normalize([0.3, -0.4, 0.5]);
        let c = s.curvature_at(p).unwrap();
        assert_abs_diff_eq!(c.mean_curvature_sum, 2.0);
        assert!(math::dot(c.principal_directions[0], c.normal).abs() < 1e-15);
        assert!(math::dot(c.principal_directions[0], c.principal_directions[1]).abs() < 1e-15);
    }

    #[test]
    fn implicit_point_on_surface_is_fixed() {
        let s = SurfaceDescription::implicit(LevelSet::BentSphere);
        let p = s.chart_point([0.4, 0.1, 0.7]).unwrap();
        let q = s.closest_point(p).unwrap();
        assert!(math::dist(p, q) < 1e-12);
    }

    #[test]
    fn implicit_unit_sphere_agrees_with_closed_form() {
        let imp = SurfaceDescription::implicit(LevelSet::UnitSphere);
        let exact = SurfaceDescription::sphere(1.0);
        for x in [[1.2, 0.3, -0.1], [0.1, 0.7, 0.6], [-0.5, -0.5, -0.6]] {
            let a = imp.project(x).unwrap();
            let b = exact.project(x).unwrap();
            assert!(math::dist(a.point, b.point) < 1e-12);
            assert_abs_diff_eq!(a.distance, b.distance, epsilon = 1e-12);
            let ca = imp.curvature_at(a.point).unwrap();
            assert_abs_diff_eq!(ca.mean_curvature_sum, 2.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn implicit_far_point_is_rejected() {
        let s = SurfaceDescription::implicit(LevelSet::BentSphere);
        let err = s.project([0.0, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::OutsideStrip { .. } | Error::NonConvergence { .. }));
    }

    #[test]
    fn singular_points_are_reported() {
        assert!(SurfaceDescription::sphere(1.0).project([0.0; 3]).is_err());
        assert!(SurfaceDescription::torus(2.0, 1.0).project([2.0, 0.0, 0.0]).is_err());
        assert!(SurfaceDescription::torus(2.0, 1.0).chart_point([1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn validation() {
        assert!(SurfaceDescription::torus(1.0, 2.0).validate().is_err());
        assert!(SurfaceDescription::sphere(1.0).with_strip_halfwidth(0.0).validate().is_err());
        assert!(SurfaceDescription::sphere(2.0).validate().is_ok());
    }
}
