//! Small fixed-size linear algebra and the float functions `core` lacks.

/// A point or vector in the ambient space. Curves in the plane use `z = 0`.
pub type Vec3 = [f64; 3];

/// Row-major 3×3 matrix.
pub type Mat3 = [[f64; 3]; 3];

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn powi(x: f64, n: i32) -> f64 {
    let mut acc = 1.0;
    let mut base = if n < 0 { 1.0 / x } else { x };
    let mut e = n.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

#[inline]
pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// `a + s·b`
#[inline]
pub fn axpy(a: Vec3, s: f64, b: Vec3) -> Vec3 {
    [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]]
}

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    sqrt(dot(a, a))
}

#[inline]
pub fn dist(a: Vec3, b: Vec3) -> f64 {
    norm(sub(a, b))
}

#[inline]
pub fn normalize(a: Vec3) -> Vec3 {
    scale(a, 1.0 / norm(a))
}

#[inline]
pub fn outer(a: Vec3, b: Vec3) -> Mat3 {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = a[i] * b[j];
        }
    }
    m
}

#[inline]
pub fn identity3() -> Mat3 {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

#[inline]
pub fn mat_vec(m: &Mat3, v: Vec3) -> Vec3 {
    [dot(m[0], v), dot(m[1], v), dot(m[2], v)]
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    c
}

pub fn mat_add_scaled(a: &Mat3, s: f64, b: &Mat3) -> Mat3 {
    let mut c = *a;
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] += s * b[i][j];
        }
    }
    c
}

/// Max-entry norm.
pub fn mat_max_abs(a: &Mat3) -> f64 {
    a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Tangent projector `I - n⊗n` for a unit normal.
pub fn tangent_projector(n: Vec3) -> Mat3 {
    mat_add_scaled(&identity3(), -1.0, &outer(n, n))
}

/// Unit vector orthogonal to `n`.
pub fn any_orthogonal(n: Vec3) -> Vec3 {
    let trial = if n[0].abs() < 0.6 {
        [1.0, 0.0, 0.0]
    } else if n[1].abs() < 0.6 {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    normalize(axpy(trial, -dot(trial, n), n))
}

/// Solves a small dense system in place by Gaussian elimination with partial
/// pivoting. `a` is row-major `n×n`. Returns `false` if the matrix is singular
/// to working precision.
pub fn solve_small(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for row in col + 1..n {
            let v = a[row * n + col].abs();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return false;
        }
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                a[row * n + j] -= f * a[col * n + j];
            }
            b[row] -= f * b[col];
        }
    }
    for row in (0..n).rev() {
        let mut s = b[row];
        for j in row + 1..n {
            s -= a[row * n + j] * b[j];
        }
        b[row] = s / a[row * n + row];
    }
    true
}

/// Eigen-decomposition of a symmetric 3×3 matrix by cyclic Jacobi rotations.
/// Returns eigenvalues and the matching unit eigenvectors, or `None` if the
/// sweep limit is exhausted.
pub fn sym3_eigen(m: &Mat3) -> Option<([f64; 3], [Vec3; 3])> {
    let mut a = *m;
    let mut v = identity3();
    let scale_ref = mat_max_abs(&a).max(f64::MIN_POSITIVE);
    for _ in 0..64 {
        let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
        if off <= 1e-15 * scale_ref {
            let vals = [a[0][0], a[1][1], a[2][2]];
            let vecs = [
                [v[0][0], v[1][0], v[2][0]],
                [v[0][1], v[1][1], v[2][1]],
                [v[0][2], v[1][2], v[2][2]],
            ];
            return Some((vals, vecs));
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q].abs() < f64::MIN_POSITIVE {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + sqrt(theta * theta + 1.0));
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / sqrt(t * t + 1.0);
            let s = t * c;
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for k in 0..3 {
                let vkp = v[k][p];
                let vkq = v[k][q];
                v[k][p] = c * vkp - s * vkq;
                v[k][q] = s * vkp + c * vkq;
            }
        }
    }
    None
}

/// Metric tensor `G = JᵀJ` of a `3×dim` Jacobian given by its columns, with
/// inverse and `sqrt(det G)`. Unused entries are zero when `dim == 1`.
#[derive(Debug, Clone, Copy)]
pub struct Metric {
    pub g: [[f64; 2]; 2],
    pub g_inv: [[f64; 2]; 2],
    pub area_factor: f64,
}

impl Metric {
    pub fn new(cols: &[Vec3; 2], dim: usize) -> Self {
        if dim == 1 {
            let g00 = dot(cols[0], cols[0]);
            Metric {
                g: [[g00, 0.0], [0.0, 0.0]],
                g_inv: [[1.0 / g00, 0.0], [0.0, 0.0]],
                area_factor: sqrt(g00),
            }
        } else {
            let g00 = dot(cols[0], cols[0]);
            let g01 = dot(cols[0], cols[1]);
            let g11 = dot(cols[1], cols[1]);
            let det = g00 * g11 - g01 * g01;
            let inv = 1.0 / det;
            Metric {
                g: [[g00, g01], [g01, g11]],
                g_inv: [[g11 * inv, -g01 * inv], [-g01 * inv, g00 * inv]],
                area_factor: sqrt(det.max(0.0)),
            }
        }
    }

    /// `aᵀ G⁻¹ b` for reference-coordinate covectors.
    #[inline]
    pub fn inner(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let gi = &self.g_inv;
        a[0] * (gi[0][0] * b[0] + gi[0][1] * b[1]) + a[1] * (gi[1][0] * b[0] + gi[1][1] * b[1])
    }

    /// Ambient tangential gradient `J G⁻¹ ĝ` of a field whose reference
    /// gradient is `ghat`.
    pub fn push_forward(&self, cols: &[Vec3; 2], ghat: [f64; 2]) -> Vec3 {
        let c0 = self.g_inv[0][0] * ghat[0] + self.g_inv[0][1] * ghat[1];
        let c1 = self.g_inv[1][0] * ghat[0] + self.g_inv[1][1] * ghat[1];
        axpy(scale(cols[0], c0), c1, cols[1])
    }

    /// Orthogonal projector onto the column space of `J`.
    pub fn tangent_projector(&self, cols: &[Vec3; 2]) -> Mat3 {
        let mut p = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        s += cols[a][i] * self.g_inv[a][b] * cols[b][j];
                    }
                }
                p[i][j] = s;
            }
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_recovers_diagonal_after_rotation() {
        let c = cos(0.3);
        let s = sin(0.3);
        let r: Mat3 = [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]];
        let d: Mat3 = [[3.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 0.5]];
        let rt: Mat3 = [[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]];
        let m = mat_mul(&mat_mul(&r, &d), &rt);
        let (vals, vecs) = sym3_eigen(&m).unwrap();
        let mut sorted = vals;
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((sorted[0] + 1.0).abs() < 1e-14);
        assert!((sorted[2] - 3.0).abs() < 1e-14);
        for (lam, v) in vals.iter().zip(vecs.iter()) {
            let mv = mat_vec(&m, *v);
            assert!(norm(sub(mv, scale(*v, *lam))) < 1e-13);
        }
    }

    #[test]
    fn small_solver_handles_pivoting() {
        let mut a = [0.0, 1.0, 1.0, 1.0];
        let mut b = [2.0, 3.0];
        assert!(solve_small(&mut a, &mut b, 2));
        assert!((b[0] - 1.0).abs() < 1e-15 && (b[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn powi_matches_repeated_product() {
        assert_eq!(powi(2.0, 10), 1024.0);
        assert!((powi(0.5, -3) - 8.0).abs() < 1e-15);
        assert_eq!(powi(3.0, 0), 1.0);
    }
}
