//! Fully symmetric quadrature rules on the reference triangle
//! `{x, y ≥ 0, x + y ≤ 1}`, Dunavant (1985) and Radon (1948) tables.
//!
//! Table entries are stored with 15 significant digits and polished by a
//! Gauss–Newton solve of the moment equations, so the shipped rules are
//! exact to rounding. Weights here sum to one; the caller scales by the area.

use alloc::vec::Vec;

use crate::math;

#[derive(Clone, Copy)]
enum Orbit {
    /// centroid
    S3,
    /// barycentric `(a, a, 1 − 2a)` and permutations
    S21(f64),
    /// barycentric `(a, b, 1 − a − b)` and permutations
    S111(f64, f64),
}

struct Table {
    exactness: usize,
    orbits: &'static [(Orbit, f64)],
}

const TABLES: &[Table] = &[
    Table { exactness: 1, orbits: &[(Orbit::S3, 1.0)] },
    Table { exactness: 2, orbits: &[(Orbit::S21(1.0 / 6.0), 1.0 / 3.0)] },
    Table {
        exactness: 3,
        orbits: &[(Orbit::S3, -27.0 / 48.0), (Orbit::S21(0.2), 25.0 / 48.0)],
    },
    Table {
        exactness: 4,
        orbits: &[
            (Orbit::S21(0.445948490915965), 0.223381589678011),
            (Orbit::S21(0.091576213509771), 0.109951743655322),
        ],
    },
    Table {
        exactness: 5,
        orbits: &[
            (Orbit::S3, 0.225),
            (Orbit::S21(0.101286507323456), 0.125939180544827),
            (Orbit::S21(0.470142064105115), 0.132394152788506),
        ],
    },
    Table {
        exactness: 6,
        orbits: &[
            (Orbit::S21(0.249286745170910), 0.116786275726379),
            (Orbit::S21(0.063089014491502), 0.050844906370207),
            (Orbit::S111(0.053145049844817, 0.310352451033784), 0.082851075618374),
        ],
    },
    Table {
        exactness: 7,
        orbits: &[
            (Orbit::S3, -0.149570044467682),
            (Orbit::S21(0.260345966079040), 0.175615257433208),
            (Orbit::S21(0.065130102902216), 0.053347235608838),
            (Orbit::S111(0.048690315425316, 0.312865496004874), 0.077113760890257),
        ],
    },
];

fn orbit_points(orbit: Orbit, out: &mut Vec<[f64; 2]>) {
    // points are (λ1, λ2) = (x, y); λ0 = 1 − x − y
    match orbit {
        Orbit::S3 => out.push([1.0 / 3.0, 1.0 / 3.0]),
        Orbit::S21(a) => {
            let b = 1.0 - 2.0 * a;
            out.extend_from_slice(&[[a, a], [b, a], [a, b]]);
        }
        Orbit::S111(a, b) => {
            let c = 1.0 - a - b;
            out.extend_from_slice(&[[a, b], [b, a], [b, c], [c, b], [a, c], [c, a]]);
        }
    }
}

fn orbit_len(orbit: Orbit) -> usize {
    match orbit {
        Orbit::S3 => 1,
        Orbit::S21(_) => 3,
        Orbit::S111(..) => 6,
    }
}

/// Parameters: every free orbit coordinate followed by every weight.
fn unpack(orbits: &[(Orbit, f64)]) -> Vec<f64> {
    let mut p = Vec::new();
    for (o, _) in orbits {
        match *o {
            Orbit::S3 => {}
            Orbit::S21(a) => p.push(a),
            Orbit::S111(a, b) => {
                p.push(a);
                p.push(b);
            }
        }
    }
    p.extend(orbits.iter().map(|(_, w)| *w));
    p
}

fn repack(template: &[(Orbit, f64)], p: &[f64]) -> Vec<(Orbit, f64)> {
    let mut it = 0;
    let mut orbits = Vec::with_capacity(template.len());
    for (o, _) in template {
        let o = match *o {
            Orbit::S3 => Orbit::S3,
            Orbit::S21(_) => {
                it += 1;
                Orbit::S21(p[it - 1])
            }
            Orbit::S111(..) => {
                it += 2;
                Orbit::S111(p[it - 2], p[it - 1])
            }
        };
        orbits.push((o, 0.0));
    }
    for (slot, w) in orbits.iter_mut().zip(&p[it..]) {
        slot.1 = *w;
    }
    orbits
}

fn expand(orbits: &[(Orbit, f64)]) -> (Vec<[f64; 2]>, Vec<f64>) {
    let mut pts = Vec::new();
    let mut wts = Vec::new();
    for (o, w) in orbits {
        orbit_points(*o, &mut pts);
        for _ in 0..orbit_len(*o) {
            wts.push(*w);
        }
    }
    (pts, wts)
}

/// Exact normalized moment `2·∫_T x^a y^b = 2·a! b! / (a + b + 2)!`.
pub(crate) fn normalized_moment(a: usize, b: usize) -> f64 {
    let mut num = 2.0;
    for i in 1..=a {
        num *= i as f64;
    }
    for i in 1..=b {
        num *= i as f64;
    }
    let mut den = 1.0;
    for i in 1..=(a + b + 2) {
        den *= i as f64;
    }
    num / den
}

fn residuals(orbits: &[(Orbit, f64)], degree: usize) -> Vec<f64> {
    let (pts, wts) = expand(orbits);
    let mut r = Vec::new();
    for total in 0..=degree {
        for a in 0..=total {
            let b = total - a;
            let q: f64 = pts
                .iter()
                .zip(&wts)
                .map(|(p, w)| w * math::powi(p[0], a as i32) * math::powi(p[1], b as i32))
                .sum();
            r.push(q - normalized_moment(a, b));
        }
    }
    r
}

fn polish(table: &Table) -> Vec<(Orbit, f64)> {
    let mut p = unpack(table.orbits);
    let np = p.len();
    for _ in 0..8 {
        let orbits = repack(table.orbits, &p);
        let r = residuals(&orbits, table.exactness);
        let rn: f64 = r.iter().map(|v| v * v).sum();
        if rn < 1e-32 {
            break;
        }
        let nr = r.len();
        let mut jac = alloc::vec![0.0; nr * np];
        for j in 0..np {
            let step = 1e-7;
            let mut pp = p.clone();
            pp[j] += step;
            let rp = residuals(&repack(table.orbits, &pp), table.exactness);
            pp[j] -= 2.0 * step;
            let rm = residuals(&repack(table.orbits, &pp), table.exactness);
            for i in 0..nr {
                jac[i * np + j] = (rp[i] - rm[i]) / (2.0 * step);
            }
        }
        // normal equations JᵀJ δ = −Jᵀr
        let mut jtj = alloc::vec![0.0; np * np];
        let mut jtr = alloc::vec![0.0; np];
        for a in 0..np {
            for b in 0..np {
                jtj[a * np + b] = (0..nr).map(|i| jac[i * np + a] * jac[i * np + b]).sum();
            }
            jtr[a] = -(0..nr).map(|i| jac[i * np + a] * r[i]).sum::<f64>();
        }
        if !math::solve_small(&mut jtj, &mut jtr, np) {
            break;
        }
        for (pi, d) in p.iter_mut().zip(&jtr) {
            *pi += d;
        }
    }
    repack(table.orbits, &p)
}

/// Symmetric rule with the fewest points exact through `degree`, as points,
/// weights summing to one, and the advertised exactness.
pub(crate) fn symmetric_rule(min_exactness: usize) -> Option<(Vec<[f64; 2]>, Vec<f64>, usize)> {
    let table = TABLES.iter().find(|t| t.exactness >= min_exactness)?;
    let (pts, wts) = expand(&polish(table));
    Some((pts, wts, table.exactness))
}

/// Symmetric rule with exactly `n_points` points, if one is tabulated.
pub(crate) fn symmetric_rule_with_points(n_points: usize) -> Option<(Vec<[f64; 2]>, Vec<f64>, usize)> {
    let table = TABLES
        .iter()
        .find(|t| t.orbits.iter().map(|(o, _)| orbit_len(*o)).sum::<usize>() == n_points)?;
    let (pts, wts) = expand(&polish(table));
    Some((pts, wts, table.exactness))
}

pub(crate) const MAX_SYMMETRIC_EXACTNESS: usize = 7;
