use horocurv::geodesic::{self, FrameSeeding, IntegratorConfig};
use horocurv::linalg;
use horocurv::models::{MetricModel, TangentVector};
use nalgebra::DVector;

fn h3() -> MetricModel {
    MetricModel::hyperbolic(3, 1.0).unwrap()
}

/// Unit-speed geodesic of H² (k = 1) on the semicircle of radius 2 through
/// (0, 1): `x = c + 2 tanh(t + s0)`, `y = 2 sech(t + s0)`, `cosh s0 = 2`.
fn semicircle(t: f64) -> (f64, f64) {
    let s0 = 2.0_f64.acosh();
    let c = -2.0 * s0.tanh();
    (c + 2.0 * (t + s0).tanh(), 2.0 / (t + s0).cosh())
}

fn semicircle_start() -> TangentVector {
    let s0 = 2.0_f64.acosh();
    TangentVector::from_slices(&[0.0, 0.0, 1.0], &[0.5, 0.0, -s0.tanh()])
}

#[test]
fn vertical_geodesic_reaches_height_e_to_the_t() {
    let m = h3();
    let v = TangentVector::from_slices(&[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]);
    let frame = geodesic::seed_frame(&m, &v, FrameSeeding::CoordinateAxes).unwrap();
    let traj = geodesic::transport_frame(&m, &v, &frame, 1.0, &IntegratorConfig::with_step(1e-3)).unwrap();
    let last = traj.last().unwrap();
    assert_eq!(last.t, 1.0);
    assert!((last.position.coords[2] - 1.0_f64.exp()).abs() < 1e-6);
}

#[test]
fn semicircle_geodesic_matches_closed_form() {
    let m = h3();
    let v = semicircle_start();
    let frame = geodesic::seed_frame(&m, &v, FrameSeeding::CoordinateAxes).unwrap();
    let traj = geodesic::transport_frame(&m, &v, &frame, 3.0, &IntegratorConfig::with_step(1e-3)).unwrap();
    for s in traj.iter().step_by(500) {
        let (x, y) = semicircle(s.t);
        assert!((s.position.coords[0] - x).abs() < 1e-9 && (s.position.coords[2] - y).abs() < 1e-9);
    }
}

#[test]
fn step_zero_leaves_state_unchanged() {
    for m in [h3(), MetricModel::complex_hyperbolic().unwrap()] {
        let v = m.unit_vector(&m.default_point(), &vec![0.5; m.dimension()]).unwrap();
        let s = geodesic::initial_state(&m, &v, FrameSeeding::CoordinateAxes).unwrap();
        assert_eq!(geodesic::geodesic_step(&m, &s, &IntegratorConfig::with_step(0.0)).unwrap(), s);
    }
}

#[test]
fn speed_drift_without_renormalization_is_tiny() {
    let m = h3();
    let v = m.unit_vector(&m.default_point(), &[0.6, -0.3, 0.2]).unwrap();
    let frame = geodesic::seed_frame(&m, &v, FrameSeeding::CoordinateAxes).unwrap();
    let mut drifts = Vec::new();
    for step in [2e-3, 1e-3] {
        let cfg = IntegratorConfig { step, renormalize_every: usize::MAX, ..Default::default() };
        let traj = geodesic::transport_frame(&m, &v, &frame, 20.0, &cfg).unwrap();
        let drift = traj
            .iter()
            .map(|s| (linalg::norm(&m.metric_at(&s.position).unwrap(), &s.velocity) - 1.0).abs())
            .fold(0.0, f64::max);
        drifts.push(drift);
    }
    assert!(drifts.iter().all(|&d| d < 1e-9), "{drifts:?}");
}

#[test]
fn parallel_frame_stays_orthonormal_on_h3() {
    let m = h3();
    let v = m.unit_vector(&m.default_point(), &[0.2, 0.7, -0.4]).unwrap();
    let frame = geodesic::seed_frame(&m, &v, FrameSeeding::CoordinateAxes).unwrap();
    let traj = geodesic::transport_frame(&m, &v, &frame, 10.0, &IntegratorConfig::default()).unwrap();
    let last = traj.last().unwrap();
    assert!((last.t - 10.0).abs() < 1e-12);
    assert!(last.frame_deviation(&m).unwrap() < 1e-7);
}

#[test]
fn frame_gramian_stays_near_identity_between_renormalizations() {
    let m = MetricModel::perturbed(3, 1.0, 0.05).unwrap();
    let v = m.unit_vector(&m.probe_point(), &[-0.5, 0.2, 0.1]).unwrap();
    let frame = geodesic::seed_frame(&m, &v, FrameSeeding::CoordinateAxes).unwrap();
    for horizon in [8.0, -8.0] {
        let traj = geodesic::transport_frame(&m, &v, &frame, horizon, &IntegratorConfig::default()).unwrap();
        let worst = traj.iter().map(|s| s.frame_deviation(&m).unwrap()).fold(0.0, f64::max);
        assert!(worst < 1e-7, "{worst:e}");
    }
}

#[test]
fn complex_structure_applied_to_velocity_is_parallel() {
    let m = MetricModel::complex_hyperbolic().unwrap();
    let v = m.unit_vector(&m.default_point(), &[0.3, -0.4, 0.5, 0.2]).unwrap();
    let frame = geodesic::seed_frame(&m, &v, FrameSeeding::ComplexAdapted).unwrap();
    let check = |traj: &[geodesic::GeodesicState]| {
        traj.iter()
            .map(|s| {
                let g = m.metric_at(&s.position).unwrap();
                let jv = m.complex_structure(&s.position).unwrap() * &s.velocity;
                let e1: DVector<f64> = s.frame.column(0).into_owned();
                linalg::norm(&g, &(e1 - jv))
            })
            .fold(0.0, f64::max)
    };
    let cfg = IntegratorConfig::default();
    for horizon in [4.0, -4.0] {
        let traj = geodesic::transport_frame(&m, &v, &frame, horizon, &cfg).unwrap();
        assert!(check(&traj) < 1e-6);
    }
    // long runs only stay accurate with the chart re-centred along the way
    let traj = geodesic::transport_frame_recentred(&m, &v, &frame, -30.0, &cfg).unwrap();
    assert!(check(&traj) < 1e-6);
    assert!(traj.iter().map(|s| s.frame_deviation(&m).unwrap()).fold(0.0, f64::max) < 1e-8);
}

#[test]
fn forward_then_backward_returns_the_seed_frame() {
    for m in [h3(), MetricModel::complex_hyperbolic().unwrap(), MetricModel::perturbed(3, 1.0, 0.05).unwrap()] {
        let n = m.dimension();
        let dir: Vec<f64> = (0..n).map(|i| 0.3 + 0.2 * i as f64 * if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let v = m.unit_vector(&m.default_point(), &dir).unwrap();
        let frame = geodesic::seed_frame(&m, &v, FrameSeeding::CoordinateAxes).unwrap();
        let cfg = IntegratorConfig::default();
        let there = geodesic::transport_frame(&m, &v, &frame, 5.0, &cfg).unwrap();
        let end = there.last().unwrap();
        let back = geodesic::transport_frame(&m, &end.tangent(), &end.frame, -5.0, &cfg).unwrap();
        let home = back.last().unwrap();
        assert!((&home.position.coords - &v.base.coords).amax() < 1e-6, "{}", m.name());
        assert!((&home.frame - &frame).amax() < 1e-6, "{}", m.name());
    }
}

#[test]
fn integrator_is_fourth_order() {
    let m = h3();
    let v = semicircle_start();
    let frame = geodesic::seed_frame(&m, &v, FrameSeeding::CoordinateAxes).unwrap();
    let (x, y) = semicircle(10.0);
    let error = |step: f64| {
        let cfg = IntegratorConfig { step, renormalize_every: usize::MAX, ..Default::default() };
        let end = geodesic::transport_frame(&m, &v, &frame, 10.0, &cfg).unwrap().pop().unwrap();
        // chart displacement in units of the local length scale y
        ((end.position.coords[0] - x).powi(2) + (end.position.coords[2] - y).powi(2)).sqrt() / y
    };
    let (e1, e2) = (error(0.1), error(0.05));
    let order = (e1 / e2).log2();
    assert!((3.5..=4.5).contains(&order), "errors {e1:e} {e2:e}, order {order}");
}

#[test]
fn bad_inputs_are_rejected() {
    let m = h3();
    let v = TangentVector::from_slices(&[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]);
    let frame = geodesic::seed_frame(&m, &v, FrameSeeding::CoordinateAxes).unwrap();
    let slow = TangentVector::from_slices(&[0.0, 0.0, 1.0], &[0.0, 0.0, 0.5]);
    assert!(geodesic::transport_frame(&m, &slow, &frame, 1.0, &IntegratorConfig::default()).is_err());
    assert!(geodesic::transport_frame(&m, &v, &frame, f64::NAN, &IntegratorConfig::default()).is_err());
    let cfg = IntegratorConfig { renormalize_every: 0, ..Default::default() };
    assert!(geodesic::transport_frame(&m, &v, &frame, 1.0, &cfg).is_err());
    assert!(geodesic::transport_frame(&m, &v, &frame, 2000.0, &IntegratorConfig::with_step(1e-3)).is_err());
    assert!(geodesic::seed_frame(&m, &v, FrameSeeding::ComplexAdapted).is_err());
}
