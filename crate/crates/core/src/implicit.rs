use crate::error::{Error, Result};
use crate::math::{self, Mat3, Vec3};

/// Built-in level-set functions `φ` with `γ = {φ = 0}`, negative inside.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelSet {
    /// `|x|² − 1`; the unit sphere written implicitly, used to cross-check
    /// the Newton projection against the closed-form sphere.
    UnitSphere,
    /// `(x − z²)² + y² + z² − 1`
    BentSphere,
    /// `(x − z²)² + y² + z² + ½(x − 0.1)(y + 0.1)(z + 0.2) − 1`
    SkewedBentSphere,
}

impl LevelSet {
    pub const ALL: [LevelSet; 3] = [
        LevelSet::UnitSphere,
        LevelSet::BentSphere,
        LevelSet::SkewedBentSphere,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LevelSet::UnitSphere => "unit_sphere",
            LevelSet::BentSphere => "bent_sphere",
            LevelSet::SkewedBentSphere => "skewed_bent_sphere",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.name() == name)
    }

    /// Conservative tubular-neighborhood half-width.
    pub fn default_strip_halfwidth(self) -> f64 {
        match self {
            LevelSet::UnitSphere => 0.5,
            // half the smallest radius of curvature, sampled near the folds
            // (about 0.10 and 0.067)
            LevelSet::BentSphere => 0.05,
            LevelSet::SkewedBentSphere => 0.03,
        }
    }

    fn skew(self) -> f64 {
        match self {
            LevelSet::SkewedBentSphere => 0.5,
            _ => 0.0,
        }
    }

    pub fn value(self, p: Vec3) -> f64 {
        let [x, y, z] = p;
        match self {
            LevelSet::UnitSphere => x * x + y * y + z * z - 1.0,
            _ => {
                let a = x - z * z;
                a * a + y * y + z * z - 1.0 + self.skew() * (x - 0.1) * (y + 0.1) * (z + 0.2)
            }
        }
    }

    pub fn gradient(self, p: Vec3) -> Vec3 {
        let [x, y, z] = p;
        match self {
            LevelSet::UnitSphere => [2.0 * x, 2.0 * y, 2.0 * z],
            _ => {
                let c = self.skew();
                let a = x - z * z;
                [
                    2.0 * a + c * (y + 0.1) * (z + 0.2),
                    2.0 * y + c * (x - 0.1) * (z + 0.2),
                    -4.0 * a * z + 2.0 * z + c * (x - 0.1) * (y + 0.1),
                ]
            }
        }
    }

    pub fn hessian(self, p: Vec3) -> Mat3 {
        let [x, y, z] = p;
        match self {
            LevelSet::UnitSphere => [[2.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 2.0]],
            _ => {
                let c = self.skew();
                let a = x - z * z;
                let xy = c * (z + 0.2);
                let xz = -4.0 * z + c * (y + 0.1);
                let yz = c * (x - 0.1);
                let zz = 8.0 * z * z - 4.0 * a + 2.0;
                [[2.0, xy, xz], [xy, 2.0, yz], [xz, yz, zz]]
            }
        }
    }
}

pub(crate) struct Foot {
    pub point: Vec3,
    pub distance: f64,
    pub normal: Vec3,
}

pub(crate) const TOL_SURFACE: f64 = 1e-12;
pub(crate) const MAX_ITER: usize = 50;

/// Foot point of `x` on `{φ = 0}` from damped Newton on the stationarity
/// system `p − x + μ∇φ(p) = 0`, `φ(p) = 0`.
pub(crate) fn project(ls: LevelSet, x: Vec3, halfwidth: f64) -> Result<Foot> {
    // pull onto the level set first so Newton starts near the foot point
    let mut p = x;
    for _ in 0..MAX_ITER {
        let phi = ls.value(p);
        let g = ls.gradient(p);
        let gg = math::dot(g, g);
        if gg == 0.0 {
            return Err(Error::NonConvergence { iterations: 0, residual: phi.abs() });
        }
        let step = math::scale(g, phi / gg);
        p = math::sub(p, step);
        if math::norm(step) <= 1e-3 * halfwidth {
            break;
        }
    }
    let g = ls.gradient(p);
    let mut mu = math::dot(math::sub(x, p), g) / math::dot(g, g);

    let residual = |p: Vec3, mu: f64| -> ([f64; 4], f64) {
        let g = ls.gradient(p);
        let f = [
            p[0] - x[0] + mu * g[0],
            p[1] - x[1] + mu * g[1],
            p[2] - x[2] + mu * g[2],
            ls.value(p),
        ];
        let n = math::sqrt(f.iter().map(|v| v * v).sum());
        (f, n)
    };

    let (mut f, mut fnorm) = residual(p, mu);
    let mut iterations = 0;
    while fnorm > TOL_SURFACE {
        if iterations == MAX_ITER {
            return Err(Error::NonConvergence { iterations, residual: fnorm });
        }
        iterations += 1;
        let g = ls.gradient(p);
        let h = ls.hessian(p);
        let mut jac = [0.0; 16];
        for i in 0..3 {
            for j in 0..3 {
                jac[i * 4 + j] = mu * h[i][j] + if i == j { 1.0 } else { 0.0 };
            }
            jac[i * 4 + 3] = g[i];
            jac[12 + i] = g[i];
        }
        let mut rhs = [-f[0], -f[1], -f[2], -f[3]];
        if !math::solve_small(&mut jac, &mut rhs, 4) {
            return Err(Error::NonConvergence { iterations, residual: fnorm });
        }
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let p_new = [p[0] + alpha * rhs[0], p[1] + alpha * rhs[1], p[2] + alpha * rhs[2]];
            let mu_new = mu + alpha * rhs[3];
            let (f_new, n_new) = residual(p_new, mu_new);
            if n_new < fnorm || n_new <= TOL_SURFACE {
                p = p_new;
                mu = mu_new;
                f = f_new;
                fnorm = n_new;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // no descent possible at this precision; accept if already tiny
            if fnorm <= 100.0 * TOL_SURFACE {
                break;
            }
            return Err(Error::NonConvergence { iterations, residual: fnorm });
        }
    }
    let g = ls.gradient(p);
    let gnorm = math::norm(g);
    let normal = math::scale(g, 1.0 / gnorm);
    let distance = mu * gnorm;
    if distance.abs() > halfwidth {
        return Err(Error::OutsideStrip { distance, halfwidth });
    }
    Ok(Foot { point: p, distance, normal })
}

/// Point of `{φ = 0}` attached to the unit vector `dir`. The bent spheres
/// are (up to the skew term) the unit sphere sheared by `x ↦ x + z²`, so the
/// sheared point seeds a Newton walk along `∇φ` onto the level set. Meshes
/// built through this chart follow the fold instead of the radial rays.
pub(crate) fn chart_point(ls: LevelSet, dir: Vec3) -> Result<Vec3> {
    let u = math::normalize(dir);
    let mut p = match ls {
        LevelSet::UnitSphere => u,
        _ => [u[0] + u[2] * u[2], u[1], u[2]],
    };
    for iterations in 0..MAX_ITER {
        let phi = ls.value(p);
        let g = ls.gradient(p);
        let gg = math::dot(g, g);
        if phi.abs() <= TOL_SURFACE * math::sqrt(gg) {
            return Ok(p);
        }
        if gg == 0.0 {
            return Err(Error::NonConvergence { iterations, residual: phi.abs() });
        }
        p = math::sub(p, math::scale(g, phi / gg));
    }
    Err(Error::NonConvergence { iterations: MAX_ITER, residual: ls.value(p).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_gradient(ls: LevelSet, p: Vec3) -> Vec3 {
        let h = 1e-6;
        let mut g = [0.0; 3];
        for i in 0..3 {
            let mut a = p;
            let mut b = p;
            a[i] += h;
            b[i] -= h;
            g[i] = (ls.value(a) - ls.value(b)) / (2.0 * h);
        }
        g
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let pts = [[0.3, -0.2, 0.7], [1.1, 0.4, -0.5], [-0.6, 0.9, 0.2]];
        for ls in LevelSet::ALL {
            for p in pts {
                let g = ls.gradient(p);
                let fd = fd_gradient(ls, p);
                assert!(math::dist(g, fd) < 1e-8, "{ls:?} gradient");
                let h = ls.hessian(p);
                for i in 0..3 {
                    let step = 1e-5;
                    let mut a = p;
                    let mut b = p;
                    a[i] += step;
                    b[i] -= step;
                    let ga = ls.gradient(a);
                    let gb = ls.gradient(b);
                    for j in 0..3 {
                        let fd = (ga[j] - gb[j]) / (2.0 * step);
                        assert!((h[i][j] - fd).abs() < 1e-7, "{ls:?} hessian {i}{j}");
                    }
                }
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for ls in LevelSet::ALL {
            assert_eq!(LevelSet::from_name(ls.name()), Some(ls));
        }
        assert_eq!(LevelSet::from_name("nope"), None);
    }

    #[test]
    fn chart_lands_on_the_surface() {
        for ls in LevelSet::ALL {
            for dir in [[1.0, 0.0, 0.0], [0.2, -0.5, 0.8], [-1.0, -1.0, -1.0], [0.0, 0.0, 1.0]] {
                let p = chart_point(ls, dir).unwrap();
                assert!(ls.value(p).abs() < 1e-12);
            }
        }
        let p = chart_point(LevelSet::BentSphere, [0.6, 0.0, 0.8]).unwrap();
        assert!(math::dist(p, [0.6 + 0.64, 0.0, 0.8]) < 1e-15);
    }
}
