//! Horosphere shape operators as stable solutions of the matrix Riccati
//! equation `Ṡ + S² + R_ċ = 0` in a parallel frame along a geodesic.
//!
//! The geodesic through `v` is integrated backward to `−2T` at half the
//! Riccati step, so that RK4 stages for `S` find `R_ċ` at grid points and
//! midpoints. `S` is then integrated forward from a large initial condition
//! at `−2T` and at `−T`; forward Riccati flow contracts towards the stable
//! solution, and the difference of the two values at `t = 0` is the
//! convergence gap.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{GeomError, Result};
use crate::geodesic::{self, FrameSeeding, GeodesicState, IntegratorConfig};
use crate::linalg;
use crate::models::{self, MetricModel, TangentVector};

/// Entry magnitude treated as blow-up.
pub const BLOW_UP: f64 = 1e6;
/// Lower tolerance on eigenvalues of a shape operator (positive semi-definiteness).
pub const PSD_TOL: f64 = 1e-8;
/// Slack on the comparison upper bound `√|K|max`.
pub const UPPER_BOUND_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialCondition {
    /// `S(−T) = c·Id` with `c = 10·√|K|max` unless overridden.
    #[default]
    LargeMultiple,
    /// `S(−T) = √κ·Id` with `κ` the mean sectional curvature magnitude along `ċ(−T)`.
    ConstantCurvatureGuess,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiccatiConfig {
    /// `integrator.step` is the Riccati step; the geodesic is sampled at half of it.
    pub integrator: IntegratorConfig,
    pub horizon: f64,
    pub convergence_tol: f64,
    /// Largest horizon tried when the gap exceeds the tolerance.
    pub max_horizon: f64,
    pub initial: InitialCondition,
    pub initial_scale: Option<f64>,
    pub seeding: FrameSeeding,
}

impl Default for RiccatiConfig {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig::default(),
            horizon: 30.0,
            convergence_tol: 1e-6,
            max_horizon: 60.0,
            initial: InitialCondition::LargeMultiple,
            initial_scale: None,
            seeding: FrameSeeding::CoordinateAxes,
        }
    }
}

impl RiccatiConfig {
    pub fn step(&self) -> f64 {
        self.integrator.step
    }

    pub fn validate(&self) -> Result<()> {
        self.integrator.validate()?;
        if !(self.integrator.step > 0.0) {
            return Err(GeomError::InvalidParameter("Riccati step must be positive".into()));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(GeomError::InvalidParameter(format!("horizon must be positive, got {}", self.horizon)));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(GeomError::InvalidParameter("convergence tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Symmetric matrix of the shape operator in the parallel frame at `at_time`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeOperator {
    pub matrix: DMatrix<f64>,
    pub at_time: f64,
    /// Frame (columns, chart components) in which `matrix` is expressed.
    pub frame: DMatrix<f64>,
}

impl ShapeOperator {
    pub fn new(mut matrix: DMatrix<f64>, at_time: f64, frame: DMatrix<f64>) -> Self {
        linalg::symmetrize(&mut matrix);
        Self { matrix, at_time, frame }
    }

    /// Principal curvatures, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::sym_eigenvalues(&self.matrix)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn trace_of_square(&self) -> f64 {
        (&self.matrix * &self.matrix).trace()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Positive semi-definiteness and the comparison bound `λ ≤ √|K|max`.
    pub fn check_invariants(&self, curvature_bound: f64) -> Result<()> {
        let eig = self.eigenvalues();
        let lo = eig[0];
        let hi = eig[eig.len() - 1];
        if lo < -PSD_TOL {
            return Err(GeomError::ShapeOperator(format!("smallest eigenvalue {lo:.3e} is negative")));
        }
        let cap = curvature_bound.sqrt() + UPPER_BOUND_SLACK;
        if hi > cap {
            return Err(GeomError::ShapeOperator(format!("largest eigenvalue {hi} exceeds comparison bound {cap}")));
        }
        Ok(())
    }
}

/// `S` and `R_ċ` at one Riccati grid time.
#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiSample {
    pub t: f64,
    pub shape: DMatrix<f64>,
    pub curvature: DMatrix<f64>,
}

impl RiccatiSample {
    pub fn trace(&self) -> f64 {
        self.shape.trace()
    }

    pub fn trace_of_square(&self) -> f64 {
        (&self.shape * &self.shape).trace()
    }

    /// `Ric(ċ)` as the trace of the stored curvature operator.
    pub fn ricci(&self) -> f64 {
        self.curvature.trace()
    }
}

/// Geodesic, parallel frame and curvature operators on `[−horizon, 0]`,
/// sampled at half the Riccati step in ascending time.
#[derive(Debug, Clone)]
pub struct RiccatiPath {
    step: f64,
    horizon_steps: usize,
    states: Vec<GeodesicState>,
    curvature: Vec<DMatrix<f64>>,
}

impl RiccatiPath {
    pub fn build(model: &MetricModel, v: &TangentVector, horizon: f64, cfg: &RiccatiConfig) -> Result<Self> {
        cfg.validate()?;
        let step = cfg.step();
        let horizon_steps = (horizon / step).round().max(1.0) as usize;
        let frame = geodesic::seed_frame(model, v, cfg.seeding)?;
        let half = IntegratorConfig { step: 0.5 * step, ..cfg.integrator };
        let mut states =
            geodesic::transport_frame_recentred(model, v, &frame, -(horizon_steps as f64) * step, &half)?;
        states.reverse();
        let curvature = states
            .par_iter()
            .map(|s| {
                let riemann = model.riemann_at(&s.position)?;
                Ok(models::curvature_operator_from(&riemann, &s.velocity, &s.frame))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { step, horizon_steps, states, curvature })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn horizon(&self) -> f64 {
        self.horizon_steps as f64 * self.step
    }

    /// States on the half-step grid, ascending in time.
    pub fn states(&self) -> &[GeodesicState] {
        &self.states
    }

    fn grid_index(&self, steps_back: usize) -> Result<usize> {
        if steps_back > self.horizon_steps {
            return Err(GeomError::WindowOutsideTrajectory {
                start: -(steps_back as f64) * self.step,
                end: 0.0,
                lo: -self.horizon(),
                hi: 0.0,
            });
        }
        Ok(2 * (self.horizon_steps - steps_back))
    }

    /// Initial matrix of the requested kind at the grid time `steps_back` steps before 0.
    pub fn initial_matrix(
        &self,
        model: &MetricModel,
        kind: InitialCondition,
        scale: Option<f64>,
        steps_back: usize,
    ) -> Result<DMatrix<f64>> {
        let m = model.dimension() - 1;
        let c = match kind {
            InitialCondition::LargeMultiple => scale.unwrap_or(10.0 * model.curvature_bound().sqrt()),
            InitialCondition::ConstantCurvatureGuess => {
                let r = &self.curvature[self.grid_index(steps_back)?];
                (-r.trace() / m as f64).max(0.0).sqrt()
            }
        };
        Ok(DMatrix::identity(m, m) * c)
    }

    /// RK4 for `Ṡ = −S² − R_ċ` from `steps_back` grid steps before 0 up to 0.
    pub fn integrate(&self, initial: &DMatrix<f64>, steps_back: usize) -> Result<Vec<RiccatiSample>> {
        let start = self.grid_index(steps_back)?;
        let h = self.step;
        let rhs = |s: &DMatrix<f64>, r: &DMatrix<f64>| -(s * s) - r;
        let mut s = initial.clone();
        let mut out = Vec::with_capacity(steps_back + 1);
        out.push(RiccatiSample { t: self.states[start].t, shape: s.clone(), curvature: self.curvature[start].clone() });
        for j in 0..steps_back {
            let i = start + 2 * j;
            let (r0, rh, r1) = (&self.curvature[i], &self.curvature[i + 1], &self.curvature[i + 2]);
            let k1 = rhs(&s, r0);
            let k2 = rhs(&(&s + &k1 * (0.5 * h)), rh);
            let k3 = rhs(&(&s + &k2 * (0.5 * h)), rh);
            let k4 = rhs(&(&s + &k3 * h), r1);
            s += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            linalg::symmetrize(&mut s);
            let magnitude = linalg::max_abs(&s);
            if !(magnitude <= BLOW_UP) {
                return Err(GeomError::RiccatiBlowUp { t: self.states[i + 2].t, magnitude });
            }
            out.push(RiccatiSample { t: self.states[i + 2].t, shape: s.clone(), curvature: r1.clone() });
        }
        Ok(out)
    }

    /// Shape operator at `t = 0` from an initial matrix `steps_back` steps earlier.
    pub fn solve(&self, initial: &DMatrix<f64>, steps_back: usize) -> Result<ShapeOperator> {
        let samples = self.integrate(initial, steps_back)?;
        let last = samples.last().expect("at least the initial sample");
        Ok(ShapeOperator::new(last.shape.clone(), 0.0, self.states.last().unwrap().frame.clone()))
    }
}

/// Stable Riccati solution along the geodesic through one unit vector.
#[derive(Debug, Clone)]
pub struct RiccatiRun {
    pub direction: TangentVector,
    pub horizon: f64,
    pub step: f64,
    pub convergence_tol: f64,
    pub convergence_gap: f64,
    pub initial_condition: InitialCondition,
    pub s0: ShapeOperator,
    /// `S` and `R_ċ` on the Riccati grid over `[−horizon, 0]`.
    pub samples: Vec<RiccatiSample>,
    /// Geodesic states matching `samples` one to one.
    pub trajectory: Vec<GeodesicState>,
}

#[derive(Serialize)]
struct RiccatiRunRecord<'a> {
    direction_base: &'a [f64],
    direction: &'a [f64],
    horizon: f64,
    step: f64,
    convergence_tol: f64,
    convergence_gap: f64,
    initial_condition: InitialCondition,
    matrix: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
}

impl Serialize for RiccatiRun {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RiccatiRunRecord {
            direction_base: self.direction.base.coords.as_slice(),
            direction: self.direction.components.as_slice(),
            horizon: self.horizon,
            step: self.step,
            convergence_tol: self.convergence_tol,
            convergence_gap: self.convergence_gap,
            initial_condition: self.initial_condition,
            matrix: linalg::to_rows(&self.s0.matrix),
            eigenvalues: self.s0.eigenvalues(),
        }
        .serialize(serializer)
    }
}

/// Closed interval of flow times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: f64,
    pub end: f64,
}

impl TimeWindow {
    pub fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    /// `[−2, 0]`, clipped to the run's horizon.
    pub fn default_for(run: &RiccatiRun) -> Self {
        Self { start: (-2.0_f64).max(-run.horizon), end: 0.0 }
    }
}

impl RiccatiRun {
    /// Samples whose time lies in `window` and which have `reach` neighbours on
    /// both sides, as indices into `samples`.
    fn window_indices(&self, window: TimeWindow, reach: usize) -> Result<Vec<usize>> {
        let lo = self.samples.first().map(|s| s.t).unwrap_or(0.0);
        let hi = self.samples.last().map(|s| s.t).unwrap_or(0.0);
        let slack = 1e-9 * self.step.max(1.0);
        if !(window.start <= window.end) || window.start < lo - slack || window.end > hi + slack {
            return Err(GeomError::WindowOutsideTrajectory { start: window.start, end: window.end, lo, hi });
        }
        let len = self.samples.len();
        let idx: Vec<usize> = (reach..len.saturating_sub(reach))
            .filter(|&i| {
                let t = self.samples[i].t;
                t >= window.start - slack && t <= window.end + slack
            })
            .collect();
        if idx.is_empty() {
            return Err(GeomError::WindowOutsideTrajectory { start: window.start, end: window.end, lo, hi });
        }
        Ok(idx)
    }

    /// `d/dt trace S` at sample `i` by a fourth-order central difference.
    fn trace_rate(&self, i: usize) -> f64 {
        central_rate(|j| self.samples[j].trace(), i, self.step)
    }

    /// Largest `|d/dt trace S|` over the window.
    pub fn max_trace_rate(&self, window: TimeWindow) -> Result<f64> {
        let idx = self.window_indices(window, STENCIL_REACH)?;
        Ok(idx.iter().map(|&i| self.trace_rate(i).abs()).fold(0.0, f64::max))
    }
}

/// Neighbours needed on each side by [`central_rate`].
pub const STENCIL_REACH: usize = 2;

/// Fourth-order central difference `(f_{i−2} − 8f_{i−1} + 8f_{i+1} − f_{i+2}) / 12h`.
pub fn central_rate(f: impl Fn(usize) -> f64, i: usize, h: f64) -> f64 {
    (f(i - 2) - 8.0 * f(i - 1) + 8.0 * f(i + 1) - f(i + 2)) / (12.0 * h)
}

fn central_rate_matrix(samples: &[RiccatiSample], i: usize, h: f64) -> DMatrix<f64> {
    (&samples[i - 2].shape - &samples[i - 1].shape * 8.0 + &samples[i + 1].shape * 8.0 - &samples[i + 2].shape)
        / (12.0 * h)
}

/// Computes the stable shape operator of the horosphere with normal `v`.
pub fn stable_shape_operator(model: &MetricModel, v: &TangentVector, cfg: &RiccatiConfig) -> Result<RiccatiRun> {
    cfg.validate()?;
    let g = model.metric_at(&v.base)?;
    let speed = linalg::norm(&g, &v.components);
    if (speed - 1.0).abs() > models::UNIT_TOL {
        return Err(GeomError::NotUnit { norm: speed });
    }
    let step = cfg.step();
    let mut steps = (cfg.horizon / step).round().max(1.0) as usize;
    loop {
        let horizon = steps as f64 * step;
        let path = RiccatiPath::build(model, v, 2.0 * horizon, cfg)?;
        let long_init = path.initial_matrix(model, cfg.initial, cfg.initial_scale, 2 * steps)?;
        let long = path.solve(&long_init, 2 * steps)?;
        let short_init = path.initial_matrix(model, cfg.initial, cfg.initial_scale, steps)?;
        let samples = path.integrate(&short_init, steps)?;
        let s0 = ShapeOperator::new(
            samples.last().unwrap().shape.clone(),
            0.0,
            path.states().last().unwrap().frame.clone(),
        );
        let gap = linalg::max_abs(&(&s0.matrix - &long.matrix));
        if gap <= cfg.convergence_tol {
            s0.check_invariants(model.curvature_bound())?;
            let first = path.states().len() - 1 - 2 * steps;
            let trajectory = path.states()[first..].iter().step_by(2).cloned().collect();
            return Ok(RiccatiRun {
                direction: v.clone(),
                horizon,
                step,
                convergence_tol: cfg.convergence_tol,
                convergence_gap: gap,
                initial_condition: cfg.initial,
                s0,
                samples,
                trajectory,
            });
        }
        if 2.0 * horizon > cfg.max_horizon + 1e-9 {
            return Err(GeomError::NonConvergence { gap, tol: cfg.convergence_tol, horizon });
        }
        steps *= 2;
    }
}

/// Largest `|d/dt trace S + trace S² + Ric(ċ)|` over the window.
///
/// The derivative comes from the stored trace sequence and `Ric(ċ)` is
/// re-evaluated from the model's Ricci tensor at each trajectory state, so the
/// check shares neither the right-hand side nor the frame contraction used by
/// the integration.
pub fn traced_riccati_residual(model: &MetricModel, run: &RiccatiRun, window: TimeWindow) -> Result<f64> {
    let idx = run.window_indices(window, STENCIL_REACH)?;
    let residuals = idx
        .par_iter()
        .map(|&i| {
            let state = &run.trajectory[i];
            let ginv = model.inverse_metric_at(&state.position)?;
            let ricci = model.riemann_at(&state.position)?.ricci(&ginv);
            let v: &DVector<f64> = &state.velocity;
            let ric = (v.transpose() * ricci * v)[(0, 0)];
            Ok((run.trace_rate(i) + run.samples[i].trace_of_square() + ric).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(residuals.into_iter().fold(0.0, f64::max))
}

/// Largest Frobenius norm of `Ṡ + S² + R_ċ` over the window, with `Ṡ` from
/// central differences of the stored matrices.
pub fn matrix_riccati_residual(run: &RiccatiRun, window: TimeWindow) -> Result<f64> {
    let idx = run.window_indices(window, STENCIL_REACH)?;
    Ok(idx
        .iter()
        .map(|&i| {
            let s = &run.samples[i];
            (central_rate_matrix(&run.samples, i, run.step) + &s.shape * &s.shape + &s.curvature).norm()
        })
        .fold(0.0, f64::max))
}
