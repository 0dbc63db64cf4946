use lb_spectra_core::quadrature::{QuadratureRule, RuleFamily};
use lb_spectra_core::CellKind;
use proptest::prelude::*;

const TOL: f64 = 1e-13;

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `∫ x^a y^b` over the reference cell.
fn moment(kind: CellKind, a: u32, b: u32) -> f64 {
    match kind {
        CellKind::Segment => {
            if b == 0 {
                1.0 / f64::from(a + 1)
            } else {
                0.0
            }
        }
        CellKind::Quad => 1.0 / (f64::from(a + 1) * f64::from(b + 1)),
        CellKind::Triangle => factorial(a) * factorial(b) / factorial(a + b + 2),
    }
}

fn monomial(a: u32, b: u32) -> impl Fn([f64; 2]) -> f64 {
    move |p| p[0].powi(a as i32) * p[1].powi(b as i32)
}

fn check_table(q: &QuadratureRule) {
    let d = q.exactness_degree as u32;
    for a in 0..=d {
        let bmax = match q.cell_kind {
            CellKind::Segment => 0,
            CellKind::Quad => d,
            CellKind::Triangle => d - a,
        };
        for b in 0..=bmax {
            let got = q.integrate(monomial(a, b));
            let want = moment(q.cell_kind, a, b);
            assert!(
                (got - want).abs() <= TOL,
                "{:?} {:?} n={} x^{a} y^{b}: {got} vs {want}",
                q.cell_kind,
                q.family,
                q.len()
            );
        }
    }
}

#[test]
fn line_and_tensor_rules_reproduce_moment_tables() {
    for kind in [CellKind::Segment, CellKind::Quad] {
        for n in 1..=10 {
            check_table(&QuadratureRule::new(kind, RuleFamily::GaussLegendre, n).unwrap());
        }
        for n in 2..=10 {
            check_table(&QuadratureRule::new(kind, RuleFamily::GaussLobatto, n).unwrap());
        }
        for n in 2..=8 {
            check_table(&QuadratureRule::new(kind, RuleFamily::NewtonCotes, n).unwrap());
        }
    }
}

#[test]
fn triangle_rules_reproduce_moment_tables() {
    for n in 1..=8 {
        check_table(&QuadratureRule::new(CellKind::Triangle, RuleFamily::GaussLegendre, n).unwrap());
    }
    for degree in 1..=7 {
        let q = QuadratureRule::symmetric_triangle(degree).unwrap();
        assert!(q.exactness_degree >= degree);
        check_table(&q);
    }
    assert!(QuadratureRule::symmetric_triangle(8).is_err());
}

#[test]
fn advertised_exactness_is_sharp() {
    // the first monomial past the advertised degree is integrated with an error
    for (family, ns) in [
        (RuleFamily::GaussLegendre, 1..=8),
        (RuleFamily::GaussLobatto, 2..=8),
        (RuleFamily::NewtonCotes, 2..=8),
    ] {
        for n in ns {
            let q = QuadratureRule::new(CellKind::Segment, family, n).unwrap();
            let d = q.exactness_degree as u32 + 1;
            let err = (q.integrate(monomial(d, 0)) - moment(CellKind::Segment, d, 0)).abs();
            assert!(err > 1e-11, "{family:?} n={n} should not integrate x^{d}");
        }
    }
}

#[test]
fn gauss_weights_are_positive_and_triangle_points_inside() {
    for n in 1..=10 {
        let q = QuadratureRule::new(CellKind::Segment, RuleFamily::GaussLegendre, n).unwrap();
        assert!(q.weights.iter().all(|&w| w > 0.0));
    }
    for degree in 1..=7 {
        let q = QuadratureRule::symmetric_triangle(degree).unwrap();
        assert!((q.weights.iter().sum::<f64>() - 0.5).abs() < TOL);
        assert!(q.points.iter().all(|p| p[0] >= -1e-15 && p[1] >= -1e-15 && p[0] + p[1] <= 1.0 + 1e-15));
    }
}

proptest! {
    #[test]
    fn random_polynomials_within_exactness(
        coeffs in proptest::collection::vec(-1.0f64..1.0, 36),
        n in 1usize..7,
        tri in any::<bool>(),
    ) {
        let kind = if tri { CellKind::Triangle } else { CellKind::Quad };
        let q = QuadratureRule::new(kind, RuleFamily::GaussLegendre, n).unwrap();
        let d = q.exactness_degree as u32;
        let terms: Vec<(u32, u32, f64)> = (0..=d)
            .flat_map(|a| (0..=d).map(move |b| (a, b)))
            .filter(|&(a, b)| !tri || a + b <= d)
            .zip(&coeffs)
            .map(|((a, b), &c)| (a, b, c))
            .collect();
        let got = q.integrate(|p| terms.iter().map(|&(a, b, c)| c * monomial(a, b)(p)).sum());
        let want: f64 = terms.iter().map(|&(a, b, c)| c * moment(kind, a, b)).sum();
        prop_assert!((got - want).abs() <= 1e-12);
    }
}
