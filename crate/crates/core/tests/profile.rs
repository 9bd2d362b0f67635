use critnls::grid::{Field, Grid};
use critnls::profile::{build_profile, free_propagate, hat_w, FinalData, FinalProfile};
use num_complex::Complex64;
use proptest::prelude::*;

fn rel_l2(a: &Field, b: &Field) -> f64 {
    a.sub(b).unwrap().norm_l2() / b.norm_l2()
}

/// `e^{itΔ}` applied to `a σ e^{−σ²x²/2}` in one dimension.
fn free_gaussian_1d(grid: Grid, amp: f64, sigma: f64, t: f64) -> Field {
    let z = Complex64::new(1.0, 2.0 * sigma * sigma * t);
    Field::from_fn(grid, |x| {
        amp * sigma / z.sqrt() * (-(sigma * sigma * x[0] * x[0]) / (2.0 * z)).exp()
    })
}

#[test]
fn hat_w_keeps_the_l2_norm() {
    let fd = FinalData::gaussian(2, 0.3, 0.5, 1.25).unwrap();
    let base = fd.samples().norm_l2();
    for t in [1.0, 3.0, 100.0, 1e6] {
        for g1 in [0.0, 1.0, -4.0] {
            let w = hat_w(&fd, t, g1).unwrap();
            assert!((w.norm_l2() - base).abs() <= 1e-14 * base.max(1.0));
        }
    }
    assert!(hat_w(&fd, 0.5, 1.0).is_err());
}

#[test]
fn profile_keeps_the_l2_norm() {
    let grid = Grid::new(1, 4096, 1024.0).unwrap();
    let fd = FinalData::gaussian(1, 0.2, 1.0, 0.75).unwrap();
    for t in [1.0, 10.0, 50.0] {
        for g1 in [0.0, 1.0] {
            let up = build_profile(&fd, &grid, t, g1).unwrap();
            assert!((up.norm_l2() - fd.norms().l2).abs() <= 1e-10, "t = {t}");
        }
    }
    let grid2 = Grid::new(2, 256, 128.0).unwrap();
    let fd2 = FinalData::new(2, FinalProfile::Bump { amplitude: 0.1, radius: 0.5 }, 1.25).unwrap();
    let up = build_profile(&fd2, &grid2, 20.0, 0.4).unwrap();
    assert!((up.norm_l2() - fd2.norms().l2).abs() <= 1e-6 * fd2.norms().l2, "{} {}", up.norm_l2(), fd2.norms().l2);
}

#[test]
fn profile_approaches_free_evolution_without_phase() {
    let (amp, sigma) = (0.1, 1.0);
    let grid = Grid::new(1, 16384, 4096.0).unwrap();
    let fd = FinalData::gaussian(1, amp, sigma, 0.75).unwrap();
    let errs: Vec<f64> = [25.0, 50.0, 100.0]
        .iter()
        .map(|&t| {
            let up = build_profile(&fd, &grid, t, 0.0).unwrap();
            rel_l2(&up, &free_gaussian_1d(grid, amp, sigma, t))
        })
        .collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    // The difference is M D ℱ (M − 1) u₊, which is O(1/t).
    assert!((errs[0] / errs[2] - 4.0).abs() < 0.2, "{errs:?}");
}

#[test]
fn gaussian_free_evolution_matches_closed_form() {
    let grid = Grid::new(1, 1024, 128.0).unwrap();
    let u0 = Field::from_fn(grid, |x| Complex64::new((-x[0] * x[0] / 2.0).exp(), 0.0));
    for t in [0.5, 1.0, 2.5, 5.0] {
        let exact = free_gaussian_1d(grid, 1.0, 1.0, t);
        assert!(rel_l2(&free_propagate(&u0, t), &exact) <= 1e-8, "t = {t}");
    }
    let grid2 = Grid::new(2, 256, 128.0).unwrap();
    let v0 = Field::from_fn(grid2, |x| Complex64::new((-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp(), 0.0));
    let t = 3.0;
    let z = Complex64::new(1.0, 2.0 * t);
    let exact = Field::from_fn(grid2, |x| (-(x[0] * x[0] + x[1] * x[1]) / (2.0 * z)).exp() / z);
    assert!(rel_l2(&free_propagate(&v0, t), &exact) <= 1e-8);
}

#[test]
fn modulus_does_not_depend_on_g1() {
    let grid = Grid::new(2, 64, 64.0).unwrap();
    let fd = FinalData::gaussian(2, 0.5, 0.3, 1.25).unwrap();
    let a = build_profile(&fd, &grid, 7.0, 0.0).unwrap();
    let b = build_profile(&fd, &grid, 7.0, 2.0).unwrap();
    for (x, y) in a.values().iter().zip(b.values()) {
        assert!((x.norm() - y.norm()).abs() <= 1e-15 * x.norm().max(1e-300) + 1e-300);
    }
}

fn random_field(grid: Grid, re: Vec<f64>, im: Vec<f64>) -> Field {
    let values = re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect();
    Field::new(grid, values, critnls::grid::Side::Space).unwrap()
}

proptest! {
    #[test]
    fn free_group_property(
        re in prop::collection::vec(-1.0f64..1.0, 256),
        im in prop::collection::vec(-1.0f64..1.0, 256),
        s in -5.0f64..5.0,
        t in -5.0f64..5.0,
        two_d in any::<bool>(),
    ) {
        let grid = if two_d { Grid::new(2, 16, 10.0).unwrap() } else { Grid::new(1, 256, 30.0).unwrap() };
        let f = random_field(grid, re, im);
        let lhs = free_propagate(&free_propagate(&f, t), s);
        let rhs = free_propagate(&f, s + t);
        prop_assert!(lhs.sub(&rhs).unwrap().norm_l2() <= 1e-12 * f.norm_l2());
        let back = free_propagate(&free_propagate(&f, t), -t);
        prop_assert!(back.sub(&f).unwrap().norm_l2() <= 1e-13 * f.norm_l2());
        prop_assert!((free_propagate(&f, t).norm_l2() - f.norm_l2()).abs() <= 1e-13 * f.norm_l2());
    }
}
