//! Monte-Carlo averages over the unit tangent sphere at a point.
//!
//! Sample `i` comes from a ChaCha8 generator keyed by `(seed, i / CHUNK)`, so
//! every sample is a pure function of the seed and its index. Chunks are
//! reduced in a fixed binary tree of mean/variance partials, which keeps the
//! result bit-identical for any number of worker threads.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::linalg;
use crate::models::{self, MetricModel, Point, TangentVector};
use crate::riccati::{self, RiccatiConfig, RiccatiRun, TimeWindow};

/// Samples drawn from one generator stream.
pub const CHUNK: usize = 1024;
/// Smallest count accepted by [`sphere_average`].
pub const MIN_AVERAGE_COUNT: usize = 100;

/// Uniform unit vectors at `base` with respect to the model metric there.
#[derive(Debug, Clone)]
pub struct SphereSampler {
    pub seed: u64,
    pub base: Point,
    pub count: usize,
    /// `L⁻ᵀ` for the Cholesky factor `g = L Lᵀ` at `base`.
    whitening: DMatrix<f64>,
}

impl SphereSampler {
    pub fn new(model: &MetricModel, base: &Point, count: usize, seed: u64) -> Result<Self> {
        let g = model.metric_at(base)?;
        let l = linalg::cholesky_lower(&g)?;
        let whitening = l
            .transpose()
            .try_inverse()
            .ok_or_else(|| GeomError::InvalidParameter("singular Cholesky factor".into()))?;
        Ok(Self { seed, base: base.clone(), count, whitening })
    }

    pub fn dim(&self) -> usize {
        self.whitening.nrows()
    }

    /// `L⁻ᵀξ/|ξ|` for standard normal `ξ`: unit in `g` since `|L⁻ᵀξ|_g = |ξ|`.
    fn whiten(&self, xi: DVector<f64>) -> TangentVector {
        let r = xi.norm();
        TangentVector::new(self.base.clone(), &self.whitening * xi / r)
    }

    fn chunk(&self, c: usize) -> Vec<TangentVector> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(c as u64);
        let len = CHUNK.min(self.count - c * CHUNK);
        let n = self.dim();
        (0..len)
            .map(|_| loop {
                let xi: DVector<f64> = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
                if xi.norm() > 0.0 {
                    break self.whiten(xi);
                }
            })
            .collect()
    }

    fn chunks(&self) -> usize {
        self.count.div_ceil(CHUNK)
    }

    /// All samples in index order.
    pub fn samples(&self) -> Vec<TangentVector> {
        (0..self.chunks()).into_par_iter().flat_map_iter(|c| self.chunk(c)).collect()
    }
}

/// Count, mean and sum of squared deviations of a batch.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    const EMPTY: Moments = Moments { count: 0.0, mean: 0.0, m2: 0.0 };

    fn of(values: &[f64]) -> Self {
        values.iter().fold(Self::EMPTY, |mut m, &x| {
            m.count += 1.0;
            let d = x - m.mean;
            m.mean += d / m.count;
            m.m2 += d * (x - m.mean);
            m
        })
    }

    fn merge(a: Self, b: Self) -> Self {
        if a.count == 0.0 {
            return b;
        }
        if b.count == 0.0 {
            return a;
        }
        let count = a.count + b.count;
        let d = b.mean - a.mean;
        Self { count, mean: a.mean + d * (b.count / count), m2: a.m2 + b.m2 + d * d * (a.count * b.count / count) }
    }
}

/// Pairwise reduction in a fixed tree over the slice order.
fn reduce(parts: &[Moments]) -> Moments {
    match parts.len() {
        0 => Moments::EMPTY,
        1 => parts[0],
        len => {
            let (a, b) = parts.split_at(len / 2);
            Moments::merge(reduce(a), reduce(b))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphereAverage {
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
    pub seed: u64,
}

/// Mean and standard error of `f` over uniform unit vectors at `base`.
pub fn sphere_average<F>(model: &MetricModel, base: &Point, f: F, count: usize, seed: u64) -> Result<SphereAverage>
where
    F: Fn(&TangentVector) -> Result<f64> + Sync,
{
    if count < MIN_AVERAGE_COUNT {
        return Err(GeomError::TooFewSamples { min: MIN_AVERAGE_COUNT, got: count });
    }
    let sampler = SphereSampler::new(model, base, count, seed)?;
    average(&sampler, f)
}

fn average<F>(sampler: &SphereSampler, f: F) -> Result<SphereAverage>
where
    F: Fn(&TangentVector) -> Result<f64> + Sync,
{
    let parts = (0..sampler.chunks())
        .into_par_iter()
        .map(|c| {
            let values = sampler.chunk(c).iter().map(&f).collect::<Result<Vec<f64>>>()?;
            Ok(Moments::of(&values))
        })
        .collect::<Result<Vec<_>>>()?;
    let m = reduce(&parts);
    let std_error = if m.count > 1.0 { (m.m2 / (m.count - 1.0) / m.count).sqrt() } else { 0.0 };
    Ok(SphereAverage { mean: m.mean, std_error, count: sampler.count, seed: sampler.seed })
}

/// `Ric(v)` as the trace of the curvature operator, with the curvature tensor
/// evaluated once at `base`.
pub fn ricci_average(model: &MetricModel, base: &Point, count: usize, seed: u64) -> Result<SphereAverage> {
    let riemann = model.riemann_at(base)?;
    let g = model.metric_at(base)?;
    sphere_average(
        model,
        base,
        |v| {
            let frame = linalg::complete_frame(&g, &v.components, &[])?;
            Ok(models::curvature_operator_from(&riemann, &v.components, &frame).trace())
        },
        count,
        seed,
    )
}

/// Both sides of `∫ tr(S²) = −(1/n) Scal` on a homogeneous model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratedIdentity {
    /// Sphere average of `tr(S²)`.
    pub mean_trace_s2: f64,
    pub std_error: f64,
    /// `−Scal / n`.
    pub minus_scal_over_n: f64,
    pub residual: f64,
    pub count: usize,
    pub seed: u64,
}

/// Averages `tr(S²)` over `count` sampled directions at `base` and compares it
/// with `−Scal/n`. Refused on models that are not locally symmetric, where the
/// integral identity needs a closed manifold that is not available here.
pub fn verify_integrated_identity(
    model: &MetricModel,
    base: &Point,
    count: usize,
    seed: u64,
    cfg: &RiccatiConfig,
) -> Result<IntegratedIdentity> {
    if !model.is_locally_symmetric() {
        return Err(GeomError::NotLocallySymmetric(model.name().to_string()));
    }
    if count == 0 {
        return Err(GeomError::TooFewSamples { min: 1, got: 0 });
    }
    let sampler = SphereSampler::new(model, base, count, seed)?;
    let avg = average(&sampler, |v| Ok(riccati::stable_shape_operator(model, v, cfg)?.s0.trace_of_square()))?;
    let minus_scal_over_n = -model.scalar_curvature(base)? / model.dimension() as f64;
    Ok(IntegratedIdentity {
        mean_trace_s2: avg.mean,
        std_error: avg.std_error,
        minus_scal_over_n,
        residual: (avg.mean - minus_scal_over_n).abs(),
        count,
        seed,
    })
}

/// Largest `|d/dt tr S|` over `window`. It vanishes on homogeneous models; on
/// the others it is a diagnostic only.
pub fn flow_derivative_check(run: &RiccatiRun, window: TimeWindow) -> Result<f64> {
    run.max_trace_rate(window)
}
