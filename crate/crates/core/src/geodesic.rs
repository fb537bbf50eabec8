//! Unit-speed geodesics carrying a parallel orthonormal frame of `ċ^⊥`.
//!
//! State `(x, v, e_1..e_{n−1})` evolves by
//! `ẋ = v`, `v̇^k = −Γ^k_{ij} v^i v^j`, `ė_a^k = −Γ^k_{ij} v^i e_a^j`
//! with classical fixed-step RK4. Every `renormalize_every` steps the velocity
//! is rescaled to unit length and the frame is re-orthonormalized against it.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::linalg;
use crate::models::{MetricModel, Point, TangentVector};

/// Longest trajectory kept in memory.
pub const MAX_TRAJECTORY_STEPS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepMethod {
    #[default]
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub step: f64,
    pub renormalize_every: usize,
    pub method: StepMethod,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { step: 1e-3, renormalize_every: 10, method: StepMethod::Rk4 }
    }
}

impl IntegratorConfig {
    pub fn with_step(step: f64) -> Self {
        Self { step, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step >= 0.0 && self.step.is_finite()) {
            return Err(GeomError::InvalidParameter(format!("step must be finite and non-negative, got {}", self.step)));
        }
        if self.renormalize_every == 0 {
            return Err(GeomError::InvalidParameter("renormalize_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// How the initial frame of `v^⊥` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameSeeding {
    /// Gram–Schmidt on the chart axes.
    #[default]
    CoordinateAxes,
    /// `Jv` first, then chart axes. Only on models with a complex structure.
    ComplexAdapted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicState {
    pub t: f64,
    pub position: Point,
    pub velocity: DVector<f64>,
    /// Columns are the frame vectors.
    pub frame: DMatrix<f64>,
    /// Steps taken since the trajectory started; drives renormalization.
    pub steps: u64,
}

impl GeodesicState {
    pub fn tangent(&self) -> TangentVector {
        TangentVector::new(self.position.clone(), self.velocity.clone())
    }

    /// Largest departure from g-orthonormality of `(velocity, frame)`.
    pub fn frame_deviation(&self, model: &MetricModel) -> Result<f64> {
        let g = model.metric_at(&self.position)?;
        let speed = (linalg::norm(&g, &self.velocity) - 1.0).abs();
        Ok(speed.max(linalg::frame_deviation(&g, &self.velocity, &self.frame)))
    }
}

/// Frame of `v^⊥` chosen by `seeding`.
pub fn seed_frame(model: &MetricModel, v: &TangentVector, seeding: FrameSeeding) -> Result<DMatrix<f64>> {
    let g = model.metric_at(&v.base)?;
    match seeding {
        FrameSeeding::CoordinateAxes => linalg::complete_frame(&g, &v.components, &[]),
        FrameSeeding::ComplexAdapted => {
            let j = model.complex_structure(&v.base).ok_or_else(|| {
                GeomError::InvalidParameter(format!("model `{}` has no complex structure", model.name()))
            })?;
            linalg::complete_frame(&g, &v.components, &[&j * &v.components])
        }
    }
}

pub fn initial_state(model: &MetricModel, v: &TangentVector, seeding: FrameSeeding) -> Result<GeodesicState> {
    let frame = seed_frame(model, v, seeding)?;
    Ok(GeodesicState { t: 0.0, position: v.base.clone(), velocity: v.components.clone(), frame, steps: 0 })
}

struct Derivative {
    dx: DVector<f64>,
    dv: DVector<f64>,
    de: DMatrix<f64>,
}

fn derivative(model: &MetricModel, x: &DVector<f64>, v: &DVector<f64>, e: &DMatrix<f64>) -> Result<Derivative> {
    let gamma = model.christoffel_at(&Point::from(x.clone()))?;
    let dv = gamma.contract(v, v);
    let mut de = DMatrix::zeros(e.nrows(), e.ncols());
    for (a, col) in e.column_iter().enumerate() {
        de.set_column(a, &gamma.contract(v, &col.into_owned()));
    }
    Ok(Derivative { dx: v.clone(), dv, de })
}

fn rk4(model: &MetricModel, state: &GeodesicState, dt: f64) -> Result<(DVector<f64>, DVector<f64>, DMatrix<f64>)> {
    let x = &state.position.coords;
    let v = &state.velocity;
    let e = &state.frame;
    let k1 = derivative(model, x, v, e)?;
    let h2 = 0.5 * dt;
    let k2 = derivative(model, &(x + &k1.dx * h2), &(v + &k1.dv * h2), &(e + &k1.de * h2))?;
    let k3 = derivative(model, &(x + &k2.dx * h2), &(v + &k2.dv * h2), &(e + &k2.de * h2))?;
    let k4 = derivative(model, &(x + &k3.dx * dt), &(v + &k3.dv * dt), &(e + &k3.de * dt))?;
    let w = dt / 6.0;
    let x1 = x + (k1.dx + &k2.dx * 2.0 + &k3.dx * 2.0 + k4.dx) * w;
    let v1 = v + (k1.dv + &k2.dv * 2.0 + &k3.dv * 2.0 + k4.dv) * w;
    let e1 = e + (k1.de + &k2.de * 2.0 + &k3.de * 2.0 + k4.de) * w;
    Ok((x1, v1, e1))
}

/// Re-normalizes the velocity and re-orthonormalizes the frame against it.
pub fn renormalize(model: &MetricModel, state: &mut GeodesicState) -> Result<()> {
    let g = model.metric_at(&state.position)?;
    let speed = linalg::norm(&g, &state.velocity);
    state.velocity /= speed;
    let cols: Vec<DVector<f64>> = state.frame.column_iter().map(|c| c.into_owned()).collect();
    state.frame = linalg::gram_schmidt(&g, &state.velocity, &cols)?;
    Ok(())
}

fn advance(
    model: &MetricModel,
    state: &GeodesicState,
    dt: f64,
    renormalize_every: usize,
    recenter: bool,
) -> Result<GeodesicState> {
    if dt == 0.0 {
        return Ok(state.clone());
    }
    let (x, v, e) = rk4(model, state, dt)?;
    let position = Point::from(x);
    model.validate_point(&position)?;
    let mut next = GeodesicState { t: state.t + dt, position, velocity: v, frame: e, steps: state.steps + 1 };
    if next.steps.is_multiple_of(renormalize_every as u64) {
        renormalize(model, &mut next)?;
        if recenter {
            if let Some((origin, d)) = model.recentering(&next.position) {
                next.position = origin;
                next.velocity = &d * &next.velocity;
                next.frame = &d * &next.frame;
            }
        }
    }
    Ok(next)
}

/// One integrator step of length `cfg.step`. A zero step returns the state unchanged.
pub fn geodesic_step(model: &MetricModel, state: &GeodesicState, cfg: &IntegratorConfig) -> Result<GeodesicState> {
    cfg.validate()?;
    advance(model, state, cfg.step, cfg.renormalize_every, false)
}

/// Integrates from `initial` with the given seed frame over `horizon` (negative
/// horizons run backward in time) and returns every state, the initial one
/// first. The step is `cfg.step` adjusted so that it divides the horizon.
pub fn transport_frame(
    model: &MetricModel,
    initial: &TangentVector,
    seed_frame: &DMatrix<f64>,
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<Vec<GeodesicState>> {
    integrate(model, initial, seed_frame, horizon, cfg, false)
}

/// Like [`transport_frame`], but on models exposing a re-centring isometry
/// each renormalized state is moved back to the chart origin. Positions are
/// then chart-local; quantities expressed in the frame (curvature operators,
/// inner products) are unchanged.
pub fn transport_frame_recentred(
    model: &MetricModel,
    initial: &TangentVector,
    seed_frame: &DMatrix<f64>,
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<Vec<GeodesicState>> {
    integrate(model, initial, seed_frame, horizon, cfg, true)
}

fn integrate(
    model: &MetricModel,
    initial: &TangentVector,
    seed_frame: &DMatrix<f64>,
    horizon: f64,
    cfg: &IntegratorConfig,
    recenter: bool,
) -> Result<Vec<GeodesicState>> {
    cfg.validate()?;
    let g = model.metric_at(&initial.base)?;
    let speed = linalg::norm(&g, &initial.components);
    if (speed - 1.0).abs() > crate::models::UNIT_TOL {
        return Err(GeomError::NotUnit { norm: speed });
    }
    if seed_frame.nrows() != model.dimension() || seed_frame.ncols() + 1 != model.dimension() {
        return Err(GeomError::DimensionMismatch { expected: model.dimension() - 1, got: seed_frame.ncols() });
    }
    let deviation = linalg::frame_deviation(&g, &initial.components, seed_frame);
    if deviation > linalg::FRAME_TOL {
        return Err(GeomError::FrameNotOrthonormal { deviation });
    }
    if !horizon.is_finite() {
        return Err(GeomError::InvalidParameter(format!("horizon must be finite, got {horizon}")));
    }
    let mut state = GeodesicState {
        t: 0.0,
        position: initial.base.clone(),
        velocity: initial.components.clone(),
        frame: seed_frame.clone(),
        steps: 0,
    };
    if horizon == 0.0 || cfg.step == 0.0 {
        return Ok(vec![state]);
    }
    let count = (horizon.abs() / cfg.step).round().max(1.0);
    if count > MAX_TRAJECTORY_STEPS as f64 {
        return Err(GeomError::InvalidParameter(format!(
            "trajectory of {count} steps exceeds the in-memory limit of {MAX_TRAJECTORY_STEPS}"
        )));
    }
    let count = count as usize;
    let dt = horizon / count as f64;
    let mut out = Vec::with_capacity(count + 1);
    out.push(state.clone());
    for i in 1..=count {
        state = advance(model, &state, dt, cfg.renormalize_every, recenter)?;
        // keep the time grid exact rather than accumulating dt
        state.t = dt * i as f64;
        out.push(state.clone());
    }
    Ok(out)
}
