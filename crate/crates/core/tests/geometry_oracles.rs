use std::f64::consts::PI;

use lb_spectra_core::math::{add, cross, dist, dot, norm, normalize, scale, sub};
use lb_spectra_core::{LevelSet, SurfaceDescription, Vec3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SAMPLES: usize = 1_000_000;

fn unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let n = norm(v);
        if n > 0.1 && n <= 1.0 {
            return scale(v, 1.0 / n);
        }
    }
}

/// A strip point built from a known foot, normal and offset, so the
/// decomposition `x = ψ(x) + d(x)ν(ψ(x))` has a known answer.
struct Sample {
    x: Vec3,
    foot: Vec3,
    offset: f64,
}

fn closed_form_sample(surface: &SurfaceDescription, rng: &mut ChaCha8Rng, which: usize) -> Sample {
    let w = surface.strip_halfwidth;
    let t = rng.random_range(-0.95 * w..0.95 * w);
    let (foot, nu) = match which {
        0 => {
            let a = rng.random_range(0.0..2.0 * PI);
            let n = [a.cos(), a.sin(), 0.0];
            (scale(n, 1.3), n)
        }
        1 => {
            let n = unit(rng);
            (scale(n, 0.8), n)
        }
        _ => {
            let (th, ph) = (rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI));
            let n = [ph.cos() * th.cos(), ph.cos() * th.sin(), ph.sin()];
            let c = [2.0 * th.cos(), 2.0 * th.sin(), 0.0];
            (add(c, n), n)
        }
    };
    Sample { x: add(foot, scale(nu, t)), foot, offset: t }
}

#[test]
fn closed_form_decomposition_residual_at_a_million_strip_points() {
    let surfaces = [SurfaceDescription::circle(1.3), SurfaceDescription::sphere(0.8), SurfaceDescription::torus(2.0, 1.0)];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for i in 0..SAMPLES {
        let which = i % 3;
        let s = closed_form_sample(&surfaces[which], &mut rng, which);
        let p = surfaces[which].project(s.x).unwrap();
        let residual = dist(s.x, add(p.point, scale(p.normal, p.distance)));
        let foot = dist(p.point, s.foot);
        let offset = (p.distance - s.offset).abs();
        worst = worst.max(residual).max(foot).max(offset);
    }
    assert!(worst <= 1e-10, "worst residual {worst:e}");
}

#[test]
fn implicit_decomposition_residual_at_a_million_strip_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst_residual: f64 = 0.0;
    let mut worst_optimality: f64 = 0.0;
    for i in 0..SAMPLES {
        let ls = LevelSet::ALL[i % 3];
        let surface = SurfaceDescription::implicit(ls);
        let w = surface.strip_halfwidth;
        let foot = surface.chart_point(unit(&mut rng)).unwrap();
        let nu = normalize(ls.gradient(foot));
        let t = rng.random_range(-0.9 * w..0.9 * w);
        let x = add(foot, scale(nu, t));
        let p = surface.project(x).unwrap();
        // decomposition, the known answer, and first-order optimality of the foot
        let residual = dist(x, add(p.point, scale(p.normal, p.distance)))
            .max(dist(p.point, foot))
            .max((p.distance - t).abs());
        let g = ls.gradient(p.point);
        let on_surface = ls.value(p.point).abs() / norm(g);
        let parallel = norm(cross(sub(x, p.point), normalize(g)));
        worst_residual = worst_residual.max(residual);
        worst_optimality = worst_optimality.max(on_surface).max(parallel);
    }
    assert!(worst_residual <= 1e-8, "worst residual {worst_residual:e}");
    assert!(worst_optimality <= 1e-8, "worst optimality defect {worst_optimality:e}");
}

#[test]
fn points_beyond_the_strip_are_refused() {
    for ls in LevelSet::ALL {
        let surface = SurfaceDescription::implicit(ls);
        let foot = surface.chart_point([0.0, 0.6, 0.8]).unwrap();
        let x = add(foot, scale(normalize(ls.gradient(foot)), 3.0 * surface.strip_halfwidth));
        assert!(surface.project(x).is_err(), "{}", ls.name());
    }
}

fn surfaces() -> Vec<SurfaceDescription> {
    let mut v = vec![SurfaceDescription::sphere(1.0), SurfaceDescription::torus(2.0, 1.0)];
    v.extend(LevelSet::ALL.map(SurfaceDescription::implicit));
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn projection_is_a_fixed_point_and_gradient_of_distance_is_the_normal(
        seed in any::<u64>(), which in 0usize..5, frac in -0.8f64..0.8,
    ) {
        let surface = surfaces()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dir = unit(&mut rng);
        let foot = match which {
            1 => {
                let th = dir[1].atan2(dir[0]);
                let ph = dir[2].asin();
                add([2.0 * th.cos(), 2.0 * th.sin(), 0.0], [ph.cos() * th.cos(), ph.cos() * th.sin(), ph.sin()])
            }
            _ => surface.chart_point(dir).unwrap(),
        };
        let nu = surface.normal(foot).unwrap();
        let x = add(foot, scale(nu, frac * surface.strip_halfwidth));
        let p = surface.project(x).unwrap();
        let again = surface.project(p.point).unwrap();
        prop_assert!(dist(again.point, p.point) <= 1e-12);
        prop_assert!(again.distance.abs() <= 1e-12);

        // central differences of d against ν(ψ(x))
        let h = 1e-6;
        let mut fd = [0.0; 3];
        for (i, slot) in fd.iter_mut().enumerate() {
            let mut e = [0.0; 3];
            e[i] = h;
            *slot = (surface.signed_distance(add(x, e)).unwrap() - surface.signed_distance(sub(x, e)).unwrap()) / (2.0 * h);
        }
        prop_assert!(dist(fd, p.normal) <= 1e-6, "fd {:?} vs {:?}", fd, p.normal);
        prop_assert!((dot(p.normal, p.normal) - 1.0).abs() <= 1e-12);
    }
}
