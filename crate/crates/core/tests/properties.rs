use nalgebra::{Vector2, Vector3};
use proptest::prelude::*;
use tracking_error::estimate::{accomplishment, finite_n_error, limit_error, AccomplishmentModel, Sampling};
use tracking_error::lti::{simulate_switching_reference, simulate_with_reference, ClosedLoopModel};
use tracking_error::numfmt::sig17;
use tracking_error::quad::trajectory::quintic_reference;
use tracking_error::quad::{dynamics_step, run_flight, FlightConfig, QuadrotorParams, QuadrotorState, Trajectory};
use tracking_error::tuner::{place_altitude_gains, solve_eigenvalue_for_error};
use tracking_error::{Velocity, VelocityProfile};

fn eigen_pair() -> impl Strategy<Value = (f64, f64)> {
    (0.1f64..50.0, 1.05f64..20.0).prop_map(|(slow, ratio)| (-slow * ratio, -slow))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn accomplishment_lies_in_unit_interval(dt in 0.0f64..20.0, (l1, l2) in eigen_pair(), l in -50.0f64..-0.01) {
        for model in [AccomplishmentModel::first_order(l).unwrap(), AccomplishmentModel::second_order(l1, l2).unwrap()] {
            let p = accomplishment(&model, dt).unwrap();
            let keep = model.retention(dt);
            prop_assert!((0.0..=1.0).contains(&p), "p({dt}) = {p} for {model:?}");
            prop_assert!((0.0..=1.0).contains(&keep));
            // 1 - p only rounds to 0 once the retention drops below half an ulp of 1
            if keep >= f64::EPSILON {
                prop_assert!(p < 1.0, "p({dt}) = {p} for {model:?}");
            }
        }
    }

    #[test]
    fn default_constants_sum_to_one((l1, l2) in eigen_pair()) {
        let model = AccomplishmentModel::second_order(l1, l2).unwrap();
        let AccomplishmentModel::SecondOrder { c1, c2, .. } = model else { unreachable!() };
        prop_assert!((c1 + c2 - 1.0).abs() <= 1e-12);
        // rounding in 1 - c1 - c2 grows with |c1| + |c2| as the eigenvalues approach each other
        let floor = 4.0 * f64::EPSILON * (c1.abs() + c2.abs());
        prop_assert!(accomplishment(&model, 0.0).unwrap().abs() <= floor);
    }

    #[test]
    fn finite_sum_is_the_switching_process(
        coeffs in prop::collection::vec(0.0f64..3.0, 1..4),
        lambda in -30.0f64..-0.05,
        t in 0.1f64..8.0,
        n in 1usize..=64,
        start_sampling in any::<bool>(),
    ) {
        let mut coeffs = coeffs;
        coeffs[0] += 0.01;
        let profile = VelocityProfile::new(Velocity::Polynomial(coeffs), 0.0, t).unwrap();
        let sampling = if start_sampling { Sampling::SegmentStart } else { Sampling::SegmentEnd };
        let model = AccomplishmentModel::first_order(lambda).unwrap();
        let sum = finite_n_error(&profile, &model, t, n, sampling).unwrap().value;
        let sim = simulate_switching_reference(lambda, &profile, t, n, sampling).unwrap();
        prop_assert!((sum - sim).abs() <= 1e-12 * sim.abs(), "{sum} vs {sim}");
    }

    #[test]
    fn error_scales_with_velocity(scale in -5.0f64..5.0, lambda in -10.0f64..-0.1, n in 1usize..200) {
        let base = VelocityProfile::new(Velocity::Polynomial(vec![0.4, 0.3]), 0.0, 3.0).unwrap();
        let scaled = VelocityProfile::new(Velocity::Polynomial(vec![0.4 * scale, 0.3 * scale]), 0.0, 3.0).unwrap();
        let model = AccomplishmentModel::first_order(lambda).unwrap();
        let e = finite_n_error(&base, &model, 3.0, n, Sampling::SegmentEnd).unwrap().value;
        let es = finite_n_error(&scaled, &model, 3.0, n, Sampling::SegmentEnd).unwrap().value;
        prop_assert!((es - scale * e).abs() <= 1e-12 * e.abs().max(1e-300) * scale.abs().max(1.0));
    }

    #[test]
    fn constant_velocity_limit_matches_closed_form(v in 0.01f64..10.0, lambda in -20.0f64..-0.05, t in 0.1f64..20.0) {
        let profile = VelocityProfile::constant(v).unwrap();
        let model = AccomplishmentModel::first_order(lambda).unwrap();
        let est = limit_error(&profile, &model, t, 1e-11).unwrap();
        let exact = v / -lambda * (1.0 - (lambda * t).exp());
        prop_assert!(est.converged);
        prop_assert!((est.value - exact).abs() <= 1e-10 + 1e-12 * exact, "{} vs {exact}", est.value);
    }

    #[test]
    fn gains_have_zero_steady_state_error((l1, l2) in eigen_pair(), mass in 0.05f64..20.0, reference in -50.0f64..50.0) {
        let g = place_altitude_gains(mass, (l1, l2)).unwrap();
        let a = g.closed_loop_matrix(mass);
        let forcing = Vector2::new(0.0, g.n[0] * reference / mass);
        let rest = Vector2::new(reference, 0.0);
        let residual = a * rest + forcing;
        prop_assert!(residual.amax() <= 1e-9 * (1.0 + g.k[0] * reference.abs() / mass));
    }

    #[test]
    fn sig17_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let s = sig17(x);
        prop_assert_eq!(s.parse::<f64>().unwrap(), x);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn tuner_inverts_the_prediction(slow in 0.5f64..40.0, a in 0.2f64..5.0) {
        let ramp = VelocityProfile::ramp(a).unwrap();
        let model = AccomplishmentModel::first_order(-slow).unwrap();
        let target = limit_error(&ramp, &model, 2.0, 1e-12).unwrap().value;
        let found = solve_eigenvalue_for_error(&ramp, 2.0, target, (-100.0, -0.1)).unwrap();
        prop_assert!((found + slow).abs() <= 1e-5 * slow, "{found} vs {}", -slow);
    }
}

#[test]
fn quaternion_stays_unit() {
    let params = QuadrotorParams::default();
    let mut s = QuadrotorState::at_rest(Vector3::zeros());
    s.rates = Vector3::new(3.0, -2.0, 1.5);
    let forces = [1.4, 1.2, 1.1, 1.3];
    for _ in 0..10 {
        for _ in 0..1000 {
            s = dynamics_step(&s, &forces, &params, 1e-3).unwrap();
        }
        assert!((s.attitude.quaternion().norm() - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn altitude_only_flight_matches_double_integrator() {
    let params = QuadrotorParams::default();
    let gains = place_altitude_gains(params.mass, (-100.0, -10.0)).unwrap();
    let mut cfg = FlightConfig::new(Trajectory::QuinticAltitude, gains);
    cfg.t_end = 2.0;
    let log = run_flight(&params, &cfg).unwrap();

    let model = ClosedLoopModel::second_order(-100.0, -10.0).unwrap();
    let reference = |t: f64| quintic_reference(t.clamp(0.0, 4.0)).unwrap().0;
    let lti = simulate_with_reference(&model, reference, 0.0, [0.0, 0.0], 2.0, cfg.dt).unwrap();
    assert_eq!(lti.len(), log.samples.len());
    let worst = log
        .samples
        .iter()
        .zip(&lti.position)
        .map(|(s, y)| (s.state.position.z - y).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-3, "worst z gap {worst}");
    assert_eq!(log.thrust_clamps + log.rotor_clamps + log.tilt_clamps, 0);
}

#[test]
fn quintic_flight_reaches_the_end_point() {
    let params = QuadrotorParams::default();
    let gains = place_altitude_gains(params.mass, (-100.0, -10.0)).unwrap();
    let log = run_flight(&params, &FlightConfig::new(Trajectory::Quintic, gains)).unwrap();
    let z = log.last().state.position.z;
    assert!((z - 10.0).abs() <= 0.2, "z(4) = {z}");
    let z2 = log.sample_at(2.0).unwrap().state.position.z;
    assert!((z2 - 4.55).abs() <= 0.15, "z(2) = {z2}");
}
