//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::time::Instant;

use horocurv::horosphere::{self, lemma_gap};
use horocurv::linalg;
use horocurv::liouville::{self, verify_integrated_identity};
use horocurv::models::half_space::Bump;
use horocurv::models::{CurvatureMode, MetricModel, Point, TangentVector};
use horocurv::report::suite_direction;
use horocurv::riccati::{self, InitialCondition, RiccatiConfig, RiccatiPath, TimeWindow};
use horocurv::IntegratorConfig;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

type Outcome = (bool, String);

fn fmt_all(parts: &[String]) -> String {
    parts.join("; ")
}

fn max_dev(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

fn direction(m: &MetricModel) -> TangentVector {
    let n = m.dimension();
    let dir: Vec<f64> = (0..n).map(|i| [0.3, -0.4, 0.5, 0.2, -0.1, 0.25][i % 6]).collect();
    m.unit_vector(&m.default_point(), &dir).unwrap()
}

fn probe_direction(m: &MetricModel) -> TangentVector {
    m.unit_vector(&m.probe_point(), &[-0.6, 0.3, 0.4]).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let m = MetricModel::hyperbolic(3, 1.0).unwrap();
    let cfg = RiccatiConfig { horizon: 30.0, integrator: IntegratorConfig::with_step(1e-3), ..Default::default() };
    let v = direction(&m);
    let run = riccati::stable_shape_operator(&m, &v, &cfg).unwrap();
    let rep = horosphere::gauss_scalar(&m, &v, &run.s0).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let dev = max_dev(&run.s0.matrix, &DMatrix::identity(2, 2));
    let ok = dev <= 1e-6 && rep.s.abs() <= 1e-5 && secs < 5.0;
    (ok, format!("|S - Id| = {dev:.2e} (tol 1e-6), s = {:.2e} (tol 1e-5), runtime {secs:.2} s (limit 5 s)", rep.s))
}

fn criterion_2() -> Outcome {
    let m = MetricModel::hyperbolic(4, 2.0).unwrap();
    let v = direction(&m);
    let run = riccati::stable_shape_operator(&m, &v, &RiccatiConfig::default()).unwrap();
    let rep = horosphere::gauss_scalar(&m, &v, &run.s0).unwrap();
    let dev = max_dev(&run.s0.matrix, &(DMatrix::identity(3, 3) * 2.0));
    let traced = riccati::traced_riccati_residual(&m, &run, TimeWindow::default_for(&run)).unwrap();
    let ok = dev <= 1e-6 && rep.s.abs() <= 1e-4 && traced < 1e-8;
    (
        ok,
        format!("|S - 2Id| = {dev:.2e} (tol 1e-6), s = {:.2e} (tol 1e-4), traced residual {traced:.2e} (tol 1e-8)", rep.s),
    )
}

fn criterion_3() -> Outcome {
    let m = MetricModel::complex_hyperbolic().unwrap();
    let v = direction(&m);
    let cfg = RiccatiConfig::default();
    let run = riccati::stable_shape_operator(&m, &v, &cfg).unwrap();
    let eig = run.s0.eigenvalues();
    let eig_dev = eig.iter().zip([1.0, 1.0, 2.0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let rep = horosphere::gauss_scalar(&m, &v, &run.s0).unwrap();
    let p = m.default_point();
    let id = verify_integrated_identity(&m, &p, 4, 42, &cfg).unwrap();
    let spread = horosphere::sectional_spread(&m, &p, 4096, 42).unwrap();
    let ok = eig_dev <= 1e-4
        && (rep.s + 2.0).abs() <= 1e-3
        && (id.mean_trace_s2 - 6.0).abs() <= 1e-3
        && (id.minus_scal_over_n - 6.0).abs() <= 1e-3
        && (spread - 3.0).abs() <= 1e-6;
    (
        ok,
        fmt_all(&[
            format!("eigenvalues {eig:.6?} (tol 1e-4)"),
            format!("s = {:.6} (tol 1e-3)", rep.s),
            format!("mean tr S^2 = {:.6}, -Scal/n = {:.6} (tol 1e-3)", id.mean_trace_s2, id.minus_scal_over_n),
            format!("spread = {spread:.9} (tol 1e-6)"),
        ]),
    )
}

/// Tuples drawn from four families: all equal, equal up to jitter of at most
/// 1e-7, generic, and equal except for one entry offset by at least 1e-3.
fn lemma_tuple(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = rng.random_range(3..=8);
    let base = rng.random_range(0.0..5.0);
    match rng.random_range(0..4) {
        0 => vec![base; n],
        1 => (0..n).map(|_| base + rng.random_range(0.0..1e-7)).collect(),
        2 => (0..n).map(|_| rng.random_range(0.0..5.0)).collect(),
        _ => {
            let mut l = vec![base; n];
            let i = rng.random_range(0..n);
            l[i] = base + rng.random_range(1e-3..1.0);
            l
        }
    }
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut min_gap, mut mismatches, mut equal_count) = (f64::INFINITY, 0, 0);
    for _ in 0..10_000 {
        let l = lemma_tuple(&mut rng);
        let gap = lemma_gap(&l).unwrap();
        min_gap = min_gap.min(gap);
        let hi = l.iter().cloned().fold(f64::MIN, f64::max);
        let lo = l.iter().cloned().fold(f64::MAX, f64::min);
        let equal = hi - lo <= 1e-6;
        equal_count += equal as usize;
        if equal != (gap.abs() <= 1e-10) {
            mismatches += 1;
        }
    }
    let ok = min_gap >= -1e-12 && mismatches == 0;
    (
        ok,
        format!("10000 tuples ({equal_count} equal), min gap {min_gap:.2e} (floor -1e-12), iff mismatches {mismatches}"),
    )
}

fn criterion_5() -> Outcome {
    let m = MetricModel::perturbed(3, 1.0, 0.05).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for (label, v) in [("suite", suite_direction(&m, 42).unwrap()), ("probe", probe_direction(&m))] {
        let residual = |step: f64| {
            let cfg = RiccatiConfig { integrator: IntegratorConfig::with_step(step), ..Default::default() };
            let run = riccati::stable_shape_operator(&m, &v, &cfg).unwrap();
            riccati::traced_riccati_residual(&m, &run, TimeWindow::new(-2.0, 0.0)).unwrap()
        };
        let (coarse, fine) = (residual(1e-3), residual(5e-4));
        let ratio = coarse / fine;
        ok &= coarse < 1e-3 && fine < 1e-3 && ratio >= 4.0;
        parts.push(format!("{label}: residual {coarse:.2e} at 1e-3, {fine:.2e} at 5e-4, ratio {ratio:.1} (need < 1e-3, >= 4)"));
    }
    (ok, fmt_all(&parts))
}

fn criterion_6() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (m, target) in [(MetricModel::hyperbolic(3, 1.0).unwrap(), -2.0f64), (MetricModel::complex_hyperbolic().unwrap(), -6.0)] {
        let p = m.default_point();
        let a = liouville::ricci_average(&m, &p, 100_000, 42).unwrap();
        let b = liouville::ricci_average(&m, &p, 100_000, 42).unwrap();
        let band = 3.0 * a.std_error + horocurv::report::MONTE_CARLO_FLOOR * target.abs();
        let repeat = a.mean.to_bits() == b.mean.to_bits() && a.std_error.to_bits() == b.std_error.to_bits();
        ok &= (a.mean - target).abs() <= band && repeat;
        parts.push(format!(
            "{}: mean {:.12} vs {target} (band {band:.1e}), repeatable {repeat}",
            m.name(),
            a.mean
        ));
    }
    (ok, fmt_all(&parts))
}

fn criterion_7() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let cases = [
        (MetricModel::perturbed(3, 1.0, 0.05).unwrap(), true),
        (MetricModel::complex_hyperbolic().unwrap(), false),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (m, probe) in cases {
        let v = if probe { probe_direction(&m) } else { direction(&m) };
        let base = RiccatiConfig::default();
        let a = riccati::stable_shape_operator(&m, &v, &base).unwrap();
        let guess = RiccatiConfig { initial: InitialCondition::ConstantCurvatureGuess, ..base };
        let b = riccati::stable_shape_operator(&m, &v, &guess).unwrap();
        let kinds = max_dev(&a.s0.matrix, &b.s0.matrix);

        // S(0) from the accepted horizon and from twice it, on one path
        let t2 = 2.0 * a.horizon;
        let path = RiccatiPath::build(&m, &v, t2, &base).unwrap();
        let steps = (t2 / base.step()).round() as usize;
        let solve_from = |back: usize| {
            let init = path.initial_matrix(&m, InitialCondition::LargeMultiple, None, back).unwrap();
            path.solve(&init, back).unwrap().matrix
        };
        let doubled = max_dev(&solve_from(steps), &solve_from(steps / 2));

        let dim = m.dimension() - 1;
        let floor = m.curvature_bound().sqrt();
        let mut worst = f64::INFINITY;
        for _ in 0..100 {
            let c2 = floor + rng.random_range(0.0..5.0);
            let c1 = c2 + rng.random_range(0.01..10.0);
            let back = rng.random_range(500..=steps / 4);
            let s1 = path.integrate(&(DMatrix::identity(dim, dim) * c1), back).unwrap();
            let s2 = path.integrate(&(DMatrix::identity(dim, dim) * c2), back).unwrap();
            for (x, y) in s1.iter().zip(&s2) {
                worst = worst.min(linalg::sym_eigenvalues(&(&x.shape - &y.shape))[0]);
            }
        }
        ok &= kinds <= 2e-6 && doubled < 1e-6 && worst >= -1e-10;
        parts.push(format!(
            "{}: kinds differ {kinds:.2e} (tol 2e-6), doubling {doubled:.2e} (tol 1e-6), min eig(S1 - S2) over 100 pairs {worst:.2e}",
            m.name()
        ));
    }
    (ok, fmt_all(&parts))
}

fn random_triple(m: &MetricModel, rng: &mut ChaCha8Rng, near_bump: bool) -> (TangentVector, DMatrix<f64>) {
    let n = m.dimension();
    let x = if near_bump {
        let mut x = Bump::default().interior_point(n);
        for i in 0..n - 1 {
            x[i] += rng.random_range(-0.3..0.3);
        }
        x[n - 1] *= rng.random_range(0.7..1.4);
        x
    } else {
        let mut x = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        x[n - 1] = rng.random_range(0.3..3.0);
        x
    };
    let p = Point::from(x);
    let g = m.metric_at(&p).unwrap();
    let gauss = |rng: &mut ChaCha8Rng| DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
    let v = gauss(rng);
    let v = &v / linalg::norm(&g, &v);
    let extra: Vec<DVector<f64>> = (0..n - 1).map(|_| gauss(rng)).collect();
    let frame = linalg::gram_schmidt(&g, &v, &extra).unwrap();
    (TangentVector::new(p, v), frame)
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_h = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(3..=6);
        let k = rng.random_range(0.5..2.0);
        let m = MetricModel::hyperbolic(n, k).unwrap();
        let fd = m.clone().with_mode(CurvatureMode::FiniteDifference);
        let (v, frame) = random_triple(&m, &mut rng, false);
        worst_h = worst_h.max(max_dev(&m.curvature_operator(&v, &frame).unwrap(), &fd.curvature_operator(&v, &frame).unwrap()));
    }
    let mut worst_p = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(3..=5);
        let m = MetricModel::perturbed(n, 1.0, 0.0).unwrap();
        let fd = m.clone().with_mode(CurvatureMode::FiniteDifference);
        let (v, frame) = random_triple(&m, &mut rng, true);
        worst_p = worst_p.max(max_dev(&m.curvature_operator(&v, &frame).unwrap(), &fd.curvature_operator(&v, &frame).unwrap()));
    }
    let ok = worst_h <= 1e-5 && worst_p <= 1e-5;
    (ok, format!("max |closed - FD| on H^n {worst_h:.2e}, on unperturbed limit {worst_p:.2e} (tol 1e-5, 1000 triples each)"))
}

fn main() {
    let criteria: [fn() -> Outcome; 8] =
        [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8];
    let mut failed = Vec::new();
    for (i, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = c();
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("criterion {} {verdict}: {detail} [{:.1} s]", i + 1, start.elapsed().as_secs_f64());
        if !ok {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 8 criteria pass");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
