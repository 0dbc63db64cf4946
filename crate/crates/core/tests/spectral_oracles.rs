use std::f64::consts::PI;

use lb_spectra_core::mesh::BaseOptions;
use lb_spectra_core::pipeline::{self, Discretization};
use lb_spectra_core::spectral::{relative_residual, SolverMethod, SolverOptions};
use lb_spectra_core::{CellKind, SurfaceDescription};

fn options(method: SolverMethod) -> SolverOptions {
    SolverOptions { method, ..SolverOptions::default() }
}

fn circle(n: usize, k: usize, r: usize) -> Discretization {
    let mut d = Discretization::new(SurfaceDescription::circle(1.0), CellKind::Segment, k, r);
    d.base = BaseOptions { circle_segments: n, ..BaseOptions::default() };
    d
}

/// Eigenvalues of the periodic P1 pencil on a regular n-gon inscribed in
/// the unit circle: `λ_j = (6/h²)(1 − cos θ)/(2 + cos θ)`, `θ = 2πj/n`.
fn p1_polygon_eigenvalues(n: usize) -> Vec<f64> {
    let h = 2.0 * (PI / n as f64).sin();
    let mut v: Vec<f64> = (1..n)
        .map(|j| {
            let c = (2.0 * PI * j as f64 / n as f64).cos();
            6.0 / (h * h) * (1.0 - c) / (2.0 + c)
        })
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn circle_p1_matches_the_periodic_pencil() {
    for n in [8, 16] {
        let sol = pipeline::solve_level(&circle(n, 1, 1), 0, n - 1, &options(SolverMethod::Dense)).unwrap();
        let want = p1_polygon_eigenvalues(n);
        assert_eq!(sol.eigenvalues().len(), want.len());
        for (got, want) in sol.eigenvalues().iter().zip(&want) {
            assert!((got - want).abs() <= 1e-10 * want, "n={n}: {got} vs {want}");
        }
    }
}

#[test]
fn regular_polygon_eigenvalues_come_in_equal_pairs() {
    for (n, k, r) in [(8, 1, 1), (12, 2, 2), (10, 3, 4)] {
        let sol = pipeline::solve_level(&circle(n, k, r), 1, 12, &options(SolverMethod::Dense)).unwrap();
        for pair in sol.eigenvalues()[..12].chunks(2) {
            assert!((pair[0] - pair[1]).abs() <= 1e-10 * pair[1], "n={n} k={k} r={r}: {pair:?}");
        }
        // and distinct pairs are well separated
        assert!(sol.eigenvalues()[2] > 1.5 * sol.eigenvalues()[1]);
    }
}

#[test]
fn eigenpairs_are_mass_orthonormal_with_small_residuals() {
    let cases = [
        (Discretization::new(SurfaceDescription::sphere(1.0), CellKind::Quad, 2, 2), 2, SolverMethod::Dense),
        (Discretization::new(SurfaceDescription::sphere(1.0), CellKind::Quad, 2, 2), 2, SolverMethod::ShiftInvertLanczos),
        (Discretization::new(SurfaceDescription::torus(2.0, 1.0), CellKind::Quad, 2, 2), 1, SolverMethod::ShiftInvertLanczos),
    ];
    for (disc, level, method) in cases {
        let sol = pipeline::solve_level(&disc, level, 16, &options(method)).unwrap();
        let sp = &sol.spectrum;
        assert_eq!(sp.method, method);
        assert!(sp.ortho_defect <= 1e-10, "{method:?}: ortho {:e}", sp.ortho_defect);
        assert!(sp.mean_defect <= 1e-10, "{method:?}: mean {:e}", sp.mean_defect);
        // residuals recomputed here, not taken from the solver's own report
        for (l, u) in sp.eigenvalues.iter().zip(&sp.eigenvectors) {
            let res = relative_residual(&sol.forms.stiffness, &sol.forms.mass, *l, u);
            assert!(res <= 1e-10, "{method:?}: residual {res:e} at {l}");
        }
        for (i, u) in sp.eigenvectors.iter().enumerate() {
            for (j, w) in sp.eigenvectors.iter().enumerate() {
                let m = sol.forms.mass.bilinear(u, w);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((m - want).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn dense_and_lanczos_agree() {
    let disc = Discretization::new(SurfaceDescription::sphere(1.0), CellKind::Triangle, 2, 2);
    let mut disc = disc;
    disc.point_kind = lb_spectra_core::lift::PointKind::Equispaced;
    let a = pipeline::solve_level(&disc, 1, 10, &options(SolverMethod::Dense)).unwrap();
    let b = pipeline::solve_level(&disc, 1, 10, &options(SolverMethod::ShiftInvertLanczos)).unwrap();
    for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
        assert!((x - y).abs() <= 1e-10 * x);
    }
}

#[test]
fn extrapolated_reference_agrees_with_closed_form() {
    let opts = options(SolverMethod::Auto);
    // circle λ = 1 (pair), sphere λ = 2 (triple)
    let c = pipeline::extrapolated_reference(&circle(8, 2, 2), 0..=3, &[0], 4.0, &opts).unwrap();
    assert!((c[0].value - 1.0).abs() <= c[0].estimate.max(1e-12), "{:?}", c[0]);
    let s = Discretization::new(SurfaceDescription::sphere(1.0), CellKind::Quad, 2, 2);
    let e = pipeline::extrapolated_reference(&s, 1..=3, &[0], 4.0, &opts).unwrap();
    assert!((e[0].value - 2.0).abs() <= e[0].estimate, "{:?}", e[0]);
    assert!(e[0].estimate < 1e-4);
}

#[test]
fn torus_reference_from_two_high_order_runs() {
    let opts = options(SolverMethod::Auto);
    let run = |r: usize| {
        let d = Discretization::new(SurfaceDescription::torus(2.0, 1.0), CellKind::Quad, 4, r);
        pipeline::extrapolated_reference(&d, 0..=2, &[0], 8.0, &opts).unwrap()[0]
    };
    let (a, b) = (run(4), run(5));
    assert!((a.value - b.value).abs() <= 1e-8, "{a:?} vs {b:?}");
}
