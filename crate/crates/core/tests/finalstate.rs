use critnls::analysis::{error_series, fit_decay};
use critnls::finalstate::{
    construct_backward, geometric_nodes, operator_r, weighted_norm_parts, weighted_norm_x, PicardMap, Scenario,
    TheoremParameters,
};
use critnls::grid::{Field, Grid, Side};
use critnls::nonlinearity::AngularFunction;
use critnls::profile::{build_profile, free_propagate, FinalData};
use critnls::spectral::{Integrator, Trajectory};
use num_complex::Complex64;
use proptest::prelude::*;

fn small_scenario(nl: AngularFunction, eps: f64) -> Scenario {
    let grid = Grid::new(1, 2048, 1024.0).unwrap();
    let fd = FinalData::gaussian(1, eps, 1.0, 0.75).unwrap();
    let p = TheoremParameters::with_defaults(1, 5.0, 40.0, eps).unwrap();
    Scenario::new(grid, fd, nl, p, 64, 8).unwrap()
}

#[test]
fn zero_final_data_gives_zero_solution() {
    let sc = small_scenario(AngularFunction::gauge(1.0, 1).unwrap(), 0.0);
    let traj = construct_backward(&sc, 200, &Integrator::default()).unwrap();
    assert!(traj.fields().iter().all(|f| f.norm_linf() == 0.0));
    for s in error_series(&traj, &sc.final_data, sc.g1()).unwrap() {
        assert_eq!((s.l2_error, s.xd_norm), (0.0, 0.0));
    }
    assert_eq!(weighted_norm_x(&traj, &sc.params), 0.0);
}

#[test]
fn backward_run_starts_from_the_profile() {
    let sc = small_scenario(AngularFunction::gauge(1.0, 1).unwrap(), 0.1);
    let traj = construct_backward(&sc, 200, &Integrator::default()).unwrap();
    assert_eq!(traj.times(), &sc.nodes[..]);
    let (t, last) = traj.last();
    let up = build_profile(&sc.final_data, &sc.grid, t, sc.g1()).unwrap();
    assert_eq!(last.sub(&up).unwrap().norm_l2(), 0.0);
}

#[test]
fn zero_nonlinearity_gives_free_evolution_of_the_final_profile() {
    let sc = small_scenario(AngularFunction::gauge(1.0, 1).unwrap().scaled(0.0), 0.1);
    assert_eq!(sc.g1(), 0.0);
    let traj = construct_backward(&sc, 100, &Integrator::default()).unwrap();
    let tm = sc.params.t_max;
    let start = build_profile(&sc.final_data, &sc.grid, tm, 0.0).unwrap();
    let series = error_series(&traj, &sc.final_data, 0.0).unwrap();
    for ((t, u), s) in traj.times().iter().zip(traj.fields()).zip(&series) {
        let free = free_propagate(&start, t - tm);
        assert!(u.sub(&free).unwrap().norm_l2() <= 1e-12 * free.norm_l2(), "t = {t}");
        let up = build_profile(&sc.final_data, &sc.grid, *t, 0.0).unwrap();
        let expected = free.sub(&up).unwrap().norm_l2();
        assert!((s.l2_error - expected).abs() <= 1e-12 + 1e-10 * expected);
    }
}

#[test]
fn operator_r_decays() {
    let grid = Grid::new(1, 16384, 4096.0).unwrap();
    let fd = FinalData::gaussian(1, 0.1, 1.0, 0.75).unwrap();
    let norms: Vec<f64> = [10.0, 40.0, 160.0]
        .iter()
        .map(|&t| operator_r(&fd, &grid, t, 1.0).unwrap().norm_l2())
        .collect();
    assert!(norms[0] > norms[1] && norms[1] > norms[2], "{norms:?}");
    let series: Vec<(f64, f64)> = geometric_nodes(16.0, 160.0, 9)
        .unwrap()
        .into_iter()
        .map(|t| (t, operator_r(&fd, &grid, t, 1.0).unwrap().norm_l2()))
        .collect();
    let fit = fit_decay(&series, 16.0).unwrap();
    assert!(fit.exponent >= 0.75 / 2.0 - 0.1, "{}", fit.exponent);
    let zero = FinalData::gaussian(1, 0.0, 1.0, 0.75).unwrap();
    assert_eq!(operator_r(&zero, &grid, 20.0, 1.0).unwrap().norm_linf(), 0.0);
}

#[test]
fn picard_map_ignores_its_argument_without_nonlinearity() {
    let sc = small_scenario(AngularFunction::gauge(1.0, 1).unwrap().scaled(0.0), 0.1);
    let map = PicardMap::new(&sc).unwrap();
    let from_profile = map.apply(map.profile()).unwrap();
    let noise = Trajectory::new(
        sc.nodes.clone(),
        sc.nodes
            .iter()
            .map(|&t| Field::from_fn(sc.grid, |x| Complex64::new((x[0] * t).sin(), 0.01 * x[0]).scale(1e-3)))
            .collect(),
    )
    .unwrap();
    let from_noise = map.apply(&noise).unwrap();
    for ((t, a), b) in sc.nodes.iter().zip(from_profile.fields()).zip(from_noise.fields()) {
        let up = build_profile(&sc.final_data, &sc.grid, *t, 0.0).unwrap();
        let expected = up.add(&operator_r(&sc.final_data, &sc.grid, *t, 0.0).unwrap()).unwrap();
        assert!(a.sub(&expected).unwrap().norm_l2() <= 1e-14);
        assert!(b.sub(&expected).unwrap().norm_l2() <= 1e-14);
    }
}

#[test]
fn picard_rejects_other_nodes() {
    let sc = small_scenario(AngularFunction::gauge(1.0, 1).unwrap(), 0.05);
    let map = PicardMap::new(&sc).unwrap();
    let wrong = Trajectory::new(vec![5.0, 40.0], vec![Field::zeros(sc.grid), Field::zeros(sc.grid)]).unwrap();
    assert!(map.apply(&wrong).is_err());
}

#[test]
fn picard_distances_shrink_at_small_amplitude() {
    let sc = small_scenario(AngularFunction::gauge(1.0, 1).unwrap(), 0.05);
    let run = PicardMap::new(&sc).unwrap().iterate(5).unwrap();
    assert!(run.distances.windows(2).all(|w| w[1] < w[0]), "{:?}", run.distances);
    assert!(run.ratios.iter().all(|&r| r <= 0.9), "{:?}", run.ratios);
}

#[test]
fn validity_cap_is_enforced() {
    let grid = Grid::new(1, 256, 64.0).unwrap();
    let fd = FinalData::gaussian(1, 0.1, 1.0, 0.75).unwrap();
    let p = TheoremParameters::with_defaults(1, 5.0, 40.0, 0.1).unwrap();
    let sc = Scenario::new(grid, fd, AngularFunction::gauge(1.0, 1).unwrap(), p, 64, 8).unwrap();
    assert!(sc.check_validity().is_err());
    assert!(construct_backward(&sc, 10, &Integrator::default()).is_err());
}

#[test]
fn parameter_invariants() {
    assert!(TheoremParameters::new(1, 0.75, 0.3, 0.5, 10.0, 160.0, 0.1).is_ok());
    assert!(TheoremParameters::new(1, 0.75, 0.2, 0.5, 10.0, 160.0, 0.1).is_err());
    assert!(TheoremParameters::new(1, 0.75, 0.3, 0.5, 160.0, 160.0, 0.1).is_err());
    assert!(TheoremParameters::new(1, 0.75, 0.3, 0.5, 0.5, 160.0, 0.1).is_err());
    assert!(TheoremParameters::new(1, 0.75, 0.3, 0.1, 10.0, 160.0, 0.1).is_err());
    assert!(TheoremParameters::new(2, 1.25, 0.55, 0.5, 10.0, 160.0, 0.1).is_err());
    let p = TheoremParameters::new(2, 1.4, 0.55, 0.5, 10.0, 160.0, 0.1).unwrap();
    assert!((p.gamma - 3.4 / 6.0).abs() < 1e-15);
}

fn constant_trajectory(times: &[f64], f: &Field) -> Trajectory {
    Trajectory::new(times.to_vec(), vec![f.clone(); times.len()]).unwrap()
}

#[test]
fn weighted_norm_of_a_constant_field() {
    let grid = Grid::new(2, 16, 4.0).unwrap();
    let f = Field::from_fn(grid, |x| Complex64::new(1.0 + x[0], x[1]));
    let times: Vec<f64> = (0..=200).map(|k| 1.0 + k as f64 / 200.0).collect();
    let traj = constant_trajectory(&times, &f);
    let w = weighted_norm_parts(&traj, 0.0);
    assert!((w.total - (f.norm_l2() + f.norm_l4())).abs() <= 1e-12 * w.total);
    assert_eq!(w.truncated_at, 2.0);
    // With b > 0 the supremum of t^b (2 − t)^{1/4} is attained inside [1, 2].
    let b = 0.3;
    let w = weighted_norm_parts(&traj, b);
    let expected_tail = times
        .iter()
        .map(|t| t.powf(b) * (2.0 - t).powf(0.25))
        .fold(0.0, f64::max)
        * f.norm_l4();
    assert!((w.energy - 2f64.powf(b) * f.norm_l2()).abs() <= 1e-12);
    assert!((w.strichartz - expected_tail).abs() <= 1e-10 * expected_tail);
}

proptest! {
    #[test]
    fn weighted_norm_is_absolutely_homogeneous(
        re in -3.0f64..3.0,
        im in -3.0f64..3.0,
        b in 0.0f64..0.6,
        one_d in any::<bool>(),
    ) {
        let grid = if one_d { Grid::new(1, 32, 8.0).unwrap() } else { Grid::new(2, 16, 8.0).unwrap() };
        let times = [1.0, 1.5, 3.0, 7.0];
        let fields: Vec<Field> = times
            .iter()
            .map(|&t| Field::from_fn(grid, |x| Complex64::new((x[0] - t).cos(), x[1] * t).scale((-x[0] * x[0]).exp())))
            .collect();
        let v = Trajectory::new(times.to_vec(), fields).unwrap();
        let lambda = Complex64::new(re, im);
        let a = weighted_norm_parts(&v.scaled(lambda), b).total;
        let base = weighted_norm_parts(&v, b).total;
        prop_assert!((a - lambda.norm() * base).abs() <= 1e-12 * (1.0 + a));
    }
}

#[test]
fn field_side_does_not_matter_for_trajectories() {
    let grid = Grid::new(1, 32, 8.0).unwrap();
    let f = Field::from_fn(grid, |x| Complex64::new(x[0].sin(), 0.0));
    let hat = Field::new(grid, f.to_frequency().into_values(), Side::Frequency).unwrap();
    let traj = Trajectory::new(vec![1.0], vec![hat]).unwrap();
    assert!(traj.fields()[0].sub(&f).unwrap().norm_l2() < 1e-13);
}
