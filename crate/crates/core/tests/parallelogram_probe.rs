//! Interpolatory quadrature of the equispaced P2 triangle: exact for
//! quadratics on one triangle, and for cubics on two triangles that form a
//! parallelogram.

use lb_spectra_core::quadrature::QuadratureRule;
use lb_spectra_core::reference::{LagrangeElement, NodeFamily};
use lb_spectra_core::CellKind;
use proptest::prelude::*;

/// `∫ φ_i` over the reference triangle.
fn interpolatory_weights() -> (Vec<[f64; 2]>, Vec<f64>) {
    let el = LagrangeElement::new(CellKind::Triangle, 2, NodeFamily::Equispaced).unwrap();
    let q = QuadratureRule::symmetric_triangle(4).unwrap();
    let mut w = vec![0.0; el.n_nodes()];
    let mut val = vec![0.0; el.n_nodes()];
    for (p, qw) in q.points.iter().zip(&q.weights) {
        el.eval(*p, &mut val);
        for (wi, v) in w.iter_mut().zip(&val) {
            *wi += qw * v;
        }
    }
    (el.nodes.clone(), w)
}

type Cubic = [f64; 10];

fn cubic(c: &Cubic, x: f64, y: f64) -> f64 {
    c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y
        + c[6] * x * x * x + c[7] * x * x * y + c[8] * x * y * y + c[9] * y * y * y
}

/// Triangle `(a, b, c)` integral: interpolatory rule vs a degree-7 rule.
fn on_triangle(c: &Cubic, a: [f64; 2], b: [f64; 2], d: [f64; 2]) -> (f64, f64) {
    let map = |p: [f64; 2]| {
        [a[0] + p[0] * (b[0] - a[0]) + p[1] * (d[0] - a[0]), a[1] + p[0] * (b[1] - a[1]) + p[1] * (d[1] - a[1])]
    };
    let jac = ((b[0] - a[0]) * (d[1] - a[1]) - (b[1] - a[1]) * (d[0] - a[0])).abs();
    let (nodes, w) = interpolatory_weights();
    let rule: f64 = nodes.iter().zip(&w).map(|(p, w)| {
        let x = map(*p);
        w * cubic(c, x[0], x[1])
    }).sum::<f64>() * jac;
    let exact_rule = QuadratureRule::symmetric_triangle(7).unwrap();
    let exact = exact_rule.integrate(|p| {
        let x = map(p);
        cubic(c, x[0], x[1])
    }) * jac;
    (rule, exact)
}

#[test]
fn single_triangle_is_only_quadratic() {
    let a = [0.0, 0.0];
    let b = [1.0, 0.2];
    let d = [0.3, 0.9];
    let mut quadratic = [0.0; 10];
    quadratic[..6].copy_from_slice(&[0.3, -1.0, 0.5, 2.0, 0.7, -1.1]);
    let (r, e) = on_triangle(&quadratic, a, b, d);
    assert!((r - e).abs() < 1e-14);
    let mut x3 = [0.0; 10];
    x3[6] = 1.0;
    let (r, e) = on_triangle(&x3, a, b, d);
    assert!((r - e).abs() > 1e-4);
}

proptest! {
    #[test]
    fn parallelogram_pair_is_cubic_exact(
        coeffs in proptest::array::uniform10(-2.0f64..2.0),
        origin in proptest::array::uniform2(-1.0f64..1.0),
        u in proptest::array::uniform2(0.2f64..1.5),
        v in proptest::array::uniform2(-1.5f64..0.2),
    ) {
        let a = origin;
        let b = [a[0] + u[0], a[1] + u[1]];
        let d = [a[0] + v[0], a[1] + v[1]];
        let area = (u[0] * v[1] - u[1] * v[0]).abs();
        prop_assume!(area > 0.05);
        let c = [b[0] + v[0], b[1] + v[1]];
        // split along the diagonal b–d
        let (r1, e1) = on_triangle(&coeffs, a, b, d);
        let (r2, e2) = on_triangle(&coeffs, c, d, b);
        let scale = 1.0 + (e1 + e2).abs();
        prop_assert!(((r1 + r2) - (e1 + e2)).abs() <= 1e-12 * scale);
    }
}
