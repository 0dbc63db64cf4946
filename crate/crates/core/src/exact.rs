//! Closed-form Laplace–Beltrami eigenpairs of circles and spheres.
//!
//! Sphere eigenfunctions are real spherical harmonics, evaluated as
//! homogeneous harmonic polynomials `S(x)` restricted to the unit sphere.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::geometry::{SurfaceDescription, SurfaceKind};
use crate::math::{self, Vec3};

/// One normalized eigenfunction of `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExactFunction {
    /// `cos(nθ) / √(πR)`
    CircleCos { n: usize, radius: f64 },
    /// `sin(nθ) / √(πR)`
    CircleSin { n: usize, radius: f64 },
    /// Real spherical harmonic of degree `l` and order `m` (negative orders
    /// are the sine family), scaled to unit `L²` norm on the sphere.
    Harmonic { l: usize, m: i64, radius: f64 },
}

impl ExactFunction {
    /// Value and tangential gradient at a point `p` of `γ`.
    pub fn eval(&self, p: Vec3) -> (f64, Vec3) {
        match *self {
            ExactFunction::CircleCos { n, radius } | ExactFunction::CircleSin { n, radius } => {
                let theta = math::atan2(p[1], p[0]);
                let t = [-math::sin(theta), math::cos(theta), 0.0];
                let c = 1.0 / math::sqrt(PI * radius);
                let nt = n as f64 * theta;
                let (u, du) = match self {
                    ExactFunction::CircleCos { .. } => (math::cos(nt), -math::sin(nt)),
                    _ => (math::sin(nt), math::cos(nt)),
                };
                (c * u, math::scale(t, c * du * n as f64 / radius))
            }
            ExactFunction::Harmonic { l, m, radius } => {
                let x = math::scale(p, 1.0 / radius);
                let s = solid_harmonic(l, m, x);
                let nu = math::normalize(x);
                let g = math::mat_vec(&math::tangent_projector(nu), s.grad);
                (s.value / radius, math::scale(g, 1.0 / (radius * radius)))
            }
        }
    }
}

/// An eigenvalue with an orthonormal basis of its eigenspace.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactEigenpair {
    pub eigenvalue: f64,
    pub functions: Vec<ExactFunction>,
}

impl ExactEigenpair {
    pub fn multiplicity(&self) -> usize {
        self.functions.len()
    }
}

/// The first `count` nonzero eigenvalues of `γ` with their eigenspaces.
pub fn exact_spectrum(surface: &SurfaceDescription, count: usize) -> Result<Vec<ExactEigenpair>> {
    match surface.kind {
        SurfaceKind::Circle { radius } => Ok((1..=count)
            .map(|n| ExactEigenpair {
                eigenvalue: (n * n) as f64 / (radius * radius),
                functions: alloc::vec![
                    ExactFunction::CircleCos { n, radius },
                    ExactFunction::CircleSin { n, radius },
                ],
            })
            .collect()),
        SurfaceKind::Sphere { radius } => Ok((1..=count)
            .map(|l| ExactEigenpair {
                eigenvalue: (l * (l + 1)) as f64 / (radius * radius),
                functions: (-(l as i64)..=l as i64).map(|m| ExactFunction::Harmonic { l, m, radius }).collect(),
            })
            .collect()),
        SurfaceKind::Torus { .. } | SurfaceKind::Implicit(_) => Err(Error::UnsupportedSurface),
    }
}

/// Value with ambient gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Dual {
    value: f64,
    grad: Vec3,
}

impl Dual {
    fn constant(value: f64) -> Self {
        Dual { value, grad: [0.0; 3] }
    }

    fn coordinate(x: Vec3, i: usize) -> Self {
        let mut grad = [0.0; 3];
        grad[i] = 1.0;
        Dual { value: x[i], grad }
    }

    fn scale(self, s: f64) -> Self {
        Dual { value: s * self.value, grad: math::scale(self.grad, s) }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual { value: self.value + o.value, grad: math::add(self.grad, o.grad) }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual { value: self.value - o.value, grad: math::sub(self.grad, o.grad) }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual {
            value: self.value * o.value,
            grad: math::add(math::scale(self.grad, o.value), math::scale(o.grad, self.value)),
        }
    }
}

/// Normalized harmonic polynomial `r^l Y_lm(x/r)`, homogeneous of degree `l`.
fn solid_harmonic(l: usize, m: i64, x: Vec3) -> Dual {
    let am = m.unsigned_abs() as usize;
    let (px, py, pz) = (Dual::coordinate(x, 0), Dual::coordinate(x, 1), Dual::coordinate(x, 2));
    let r2 = px * px + py * py + pz * pz;

    // Re and Im of (x + iy)^|m|
    let (mut c, mut s) = (Dual::constant(1.0), Dual::constant(0.0));
    for _ in 0..am {
        let (c2, s2) = (px * c - py * s, px * s + py * c);
        c = c2;
        s = s2;
    }

    // r^{l-m} P_l^{(m)}(z/r) by the three-term recurrence in l
    let double_factorial: f64 = (1..=am).map(|i| (2 * i - 1) as f64).product();
    let mut prev = Dual::constant(double_factorial);
    let mut cur = if l > am { pz.scale((2 * am + 1) as f64) * prev } else { prev };
    if l > am {
        for ll in am + 2..=l {
            let next = (pz * cur).scale((2 * ll - 1) as f64) - (r2 * prev).scale((ll + am - 1) as f64);
            prev = cur;
            cur = next.scale(1.0 / (ll - am) as f64);
        }
    }

    let ratio: f64 = (l - am + 1..=l + am).map(|i| i as f64).product();
    let mut norm = math::sqrt((2 * l + 1) as f64 / (4.0 * PI) / ratio);
    if m != 0 {
        norm *= math::sqrt(2.0);
    }
    let angular = if m >= 0 { c } else { s };
    (cur * angular).scale(norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre;

    #[test]
    fn sphere_and_circle_values() {
        let s = exact_spectrum(&SurfaceDescription::sphere(1.0), 10).unwrap();
        assert_eq!((s[0].eigenvalue, s[0].multiplicity()), (2.0, 3));
        assert_eq!((s[1].eigenvalue, s[1].multiplicity()), (6.0, 5));
        assert_eq!((s[9].eigenvalue, s[9].multiplicity()), (110.0, 21));
        let c = exact_spectrum(&SurfaceDescription::circle(1.0), 3).unwrap();
        let flat: Vec<f64> = c.iter().flat_map(|e| e.functions.iter().map(move |_| e.eigenvalue)).collect();
        assert_eq!(flat, alloc::vec![1.0, 1.0, 4.0, 4.0, 9.0, 9.0]);
        assert!(matches!(
            exact_spectrum(&SurfaceDescription::torus(2.0, 1.0), 1),
            Err(Error::UnsupportedSurface)
        ));
    }

    #[test]
    fn harmonics_are_orthonormal() {
        // product rule: Gauss in cos θ, trapezoid in φ
        let radius = 1.3;
        let (zs, wz) = gauss_legendre(16);
        let nphi = 32;
        let funcs: Vec<ExactFunction> = exact_spectrum(&SurfaceDescription::sphere(radius), 4)
            .unwrap()
            .into_iter()
            .flat_map(|e| e.functions)
            .collect();
        let nf = funcs.len();
        let mut gram = alloc::vec![0.0; nf * nf];
        let mut means = alloc::vec![0.0; nf];
        for (z01, w) in zs.iter().zip(&wz) {
            let z = 2.0 * z01 - 1.0;
            let rho = math::sqrt(1.0 - z * z);
            for k in 0..nphi {
                let phi = 2.0 * PI * k as f64 / nphi as f64;
                let p = math::scale([rho * math::cos(phi), rho * math::sin(phi), z], radius);
                let weight = 2.0 * w * 2.0 * PI / nphi as f64 * radius * radius;
                let vals: Vec<f64> = funcs.iter().map(|f| f.eval(p).0).collect();
                for i in 0..nf {
                    means[i] += weight * vals[i];
                    for j in 0..nf {
                        gram[i * nf + j] += weight * vals[i] * vals[j];
                    }
                }
            }
        }
        for i in 0..nf {
            assert!(means[i].abs() < 1e-12);
            for j in 0..nf {
                let d = if i == j { 1.0 } else { 0.0 };
                assert!((gram[i * nf + j] - d).abs() < 1e-12, "{i} {j} {}", gram[i * nf + j]);
            }
        }
    }

    #[test]
    fn solid_harmonics_are_harmonic_and_homogeneous() {
        let x = [0.3, -0.7, 0.45];
        let h = 1e-3;
        for l in 0..6 {
            for m in -(l as i64)..=l as i64 {
                let s = solid_harmonic(l, m, x);
                let f = |y: Vec3| solid_harmonic(l, m, y).value;
                let mut lap = 0.0;
                for i in 0..3 {
                    let mut xp = x;
                    let mut xm = x;
                    xp[i] += h;
                    xm[i] -= h;
                    lap += (f(xp) - 2.0 * s.value + f(xm)) / (h * h);
                    // gradient against central differences
                    let fd = (f(xp) - f(xm)) / (2.0 * h);
                    assert!((fd - s.grad[i]).abs() < 1e-5 * (1.0 + fd.abs()));
                }
                assert!(lap.abs() < 1e-4, "l={l} m={m} lap={lap}");
                assert!((math::dot(x, s.grad) - l as f64 * s.value).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn circle_gradient_is_tangential_derivative() {
        let f = ExactFunction::CircleSin { n: 3, radius: 2.0 };
        let theta: f64 = 0.4;
        let p = [2.0 * math::cos(theta), 2.0 * math::sin(theta), 0.0];
        let (u, g) = f.eval(p);
        assert!((u - math::sin(1.2) / math::sqrt(2.0 * PI)).abs() < 1e-15);
        let ds = 1e-6;
        let q = |t: f64| f.eval([2.0 * math::cos(t), 2.0 * math::sin(t), 0.0]).0;
        let fd = (q(theta + ds / 2.0) - q(theta - ds / 2.0)) / ds / 2.0;
        let t = [-math::sin(theta), math::cos(theta), 0.0];
        assert!((math::dot(g, t) - fd).abs() < 1e-8);
    }
}
