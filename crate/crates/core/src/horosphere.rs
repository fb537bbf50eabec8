//! Horosphere quantities derived from a shape operator: intrinsic scalar
//! curvature through the Gauss equation, the sum-product gap of the principal
//! curvatures, umbilicity, and the spread of ambient sectional curvature.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::linalg;
use crate::models::{self, MetricModel, Point, TangentVector};
use crate::riccati::{self, RiccatiConfig, RiccatiRun, ShapeOperator};

/// Largest asymmetry accepted in a shape operator passed in from outside.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Alternating eigenvector sweeps used to polish extreme planes.
const POLISH_SWEEPS: usize = 64;

/// Horosphere data at the base point of one unit normal `v`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorosphereReport {
    pub base: Vec<f64>,
    pub direction: Vec<f64>,
    /// Intrinsic scalar curvature of the horosphere.
    pub s: f64,
    pub trace_s: f64,
    pub trace_s2: f64,
    /// Ascending.
    pub principal_curvatures: Vec<f64>,
    pub umbilicity_deviation: f64,
    pub lemma_gap: f64,
    pub ric_v: f64,
    pub scal: f64,
}

impl HorosphereReport {
    /// Left minus right side of `tr(S)² − tr(S²) = 2 Ric(v) − Scal + s`.
    pub fn gauss_defect(&self) -> f64 {
        self.trace_s * self.trace_s - self.trace_s2 - (2.0 * self.ric_v - self.scal + self.s)
    }

    pub fn csv_header(dim: usize) -> String {
        let mut cols: Vec<String> = (0..dim).map(|i| format!("v{i}")).collect();
        cols.extend(["s", "trace_s", "trace_s2"].map(String::from));
        cols.extend((1..dim).map(|i| format!("lambda{i}")));
        cols.extend(["umbilicity_deviation", "lemma_gap", "ric_v", "scal"].map(String::from));
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut vals: Vec<f64> = self.direction.clone();
        vals.extend([self.s, self.trace_s, self.trace_s2]);
        vals.extend(&self.principal_curvatures);
        vals.extend([self.umbilicity_deviation, self.lemma_gap, self.ric_v, self.scal]);
        vals.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",")
    }

    /// Header line plus the single data row.
    pub fn to_csv(&self) -> String {
        format!("{}\n{}\n", Self::csv_header(self.direction.len()), self.csv_row())
    }
}

/// Scalar curvature of the horosphere with normal `v` and shape operator `shape`:
/// `s = tr(S)² − tr(S²) − 2 Ric(v) + Scal`.
pub fn gauss_scalar(model: &MetricModel, v: &TangentVector, shape: &ShapeOperator) -> Result<HorosphereReport> {
    let m = model.dimension() - 1;
    if shape.dim() != m {
        return Err(GeomError::DimensionMismatch { expected: m, got: shape.dim() });
    }
    let asym = linalg::asymmetry(&shape.matrix);
    if asym > SYMMETRY_TOL {
        return Err(GeomError::ShapeOperator(format!("asymmetry {asym:.3e} exceeds {SYMMETRY_TOL:e}")));
    }
    shape.check_invariants(model.curvature_bound())?;
    let (ric_v, scal) = model.ricci_and_scalar(v)?;
    let trace_s = shape.trace();
    let trace_s2 = shape.trace_of_square();
    let principal_curvatures = shape.eigenvalues();
    let s = trace_s * trace_s - trace_s2 - 2.0 * ric_v + scal;
    Ok(HorosphereReport {
        base: v.base.coords.as_slice().to_vec(),
        direction: v.components.as_slice().to_vec(),
        s,
        trace_s,
        trace_s2,
        umbilicity_deviation: spread_of(&principal_curvatures),
        lemma_gap: lemma_gap(&principal_curvatures)?,
        principal_curvatures,
        ric_v,
        scal,
    })
}

/// Stable shape operator and horosphere report for one direction.
pub fn analyze(model: &MetricModel, v: &TangentVector, cfg: &RiccatiConfig) -> Result<(RiccatiRun, HorosphereReport)> {
    let run = riccati::stable_shape_operator(model, v, cfg)?;
    let report = gauss_scalar(model, v, &run.s0)?;
    Ok((run, report))
}

/// `Σλ_i² − Σ_{i≠j} λ_iλ_j / (n−2)` for the `n−1` principal curvatures of a
/// hypersurface in an `n`-manifold, the sum over ordered pairs.
///
/// Evaluated as `Σ_{i<j} (λ_i − λ_j)² / (n−2)`, which is the same polynomial
/// and cannot go negative in floating point.
pub fn lemma_gap(lambda: &[f64]) -> Result<f64> {
    let m = lambda.len();
    if m < 2 {
        return Err(GeomError::InvalidParameter(format!(
            "lemma gap needs at least 2 principal curvatures (n ≥ 3), got {m}"
        )));
    }
    let mut sum = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            sum += (lambda[i] - lambda[j]).powi(2);
        }
    }
    Ok(sum / (m - 1) as f64)
}

/// The gap in its expanded form `Σλ² − ((Σλ)² − Σλ²)/(n−2)`.
pub fn lemma_gap_expanded(lambda: &[f64]) -> Result<f64> {
    let m = lambda.len();
    if m < 2 {
        return Err(GeomError::InvalidParameter(format!("need at least 2 values, got {m}")));
    }
    let sum: f64 = lambda.iter().sum();
    let sq: f64 = lambda.iter().map(|x| x * x).sum();
    Ok(sq - (sum * sum - sq) / (m - 1) as f64)
}

/// Largest difference between principal curvatures.
pub fn umbilicity_deviation(shape: &ShapeOperator) -> f64 {
    spread_of(&shape.eigenvalues())
}

fn spread_of(values: &[f64]) -> f64 {
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    (hi - lo).max(0.0)
}

/// Range of sectional curvature at `p` over random 2-planes.
///
/// `samples` planes spanned by pairs of Gaussian chart vectors are drawn from
/// a ChaCha8 stream seeded with `seed`. The planes attaining the smallest and
/// largest curvature are then refined by alternating maximization: with `u`
/// fixed, the extremal `w ⟂ u` is an eigenvector of the curvature operator of
/// `u`, and the roles swap. Each sweep can only widen the range, so the result
/// is still the range over a set of planes, converged to the true extremes on
/// models where the sampled extremes lie in their basins.
pub fn sectional_spread(model: &MetricModel, p: &Point, samples: usize, seed: u64) -> Result<f64> {
    if samples < 2 {
        return Err(GeomError::TooFewSamples { min: 2, got: samples });
    }
    let n = model.dimension();
    let g = model.metric_at(p)?;
    let riemann = model.riemann_at(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lo = (f64::INFINITY, DVector::zeros(n), DVector::zeros(n));
    let mut hi = (f64::NEG_INFINITY, DVector::zeros(n), DVector::zeros(n));
    let mut drawn = 0;
    while drawn < samples {
        let u: DVector<f64> = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        let w: DVector<f64> = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        let Ok(k) = models::sectional_from(&riemann, &g, &u, &w) else { continue };
        drawn += 1;
        if k < lo.0 {
            lo = (k, u.clone(), w.clone());
        }
        if k > hi.0 {
            hi = (k, u, w);
        }
    }
    let kmin = polish(&riemann, &g, lo.1, lo.2, -1.0)?.min(lo.0);
    let kmax = polish(&riemann, &g, hi.1, hi.2, 1.0)?.max(hi.0);
    Ok(kmax - kmin)
}

/// Alternating eigenvector ascent of `sign · K(u, w)`; returns the final `K`.
fn polish(
    riemann: &models::Riemann,
    g: &DMatrix<f64>,
    mut u: DVector<f64>,
    mut w: DVector<f64>,
    sign: f64,
) -> Result<f64> {
    let mut best = models::sectional_from(riemann, g, &u, &w)?;
    for _ in 0..POLISH_SWEEPS {
        u /= linalg::norm(g, &u);
        let frame = linalg::complete_frame(g, &u, std::slice::from_ref(&w))?;
        let op = models::curvature_operator_from(riemann, &u, &frame);
        let (vals, vecs) = linalg::sym_eigen_sorted(&op);
        let pick = if sign > 0.0 { vals.len() - 1 } else { 0 };
        let k = vals[pick];
        let next = &frame * vecs.column(pick);
        let improved = sign * (k - best);
        if sign * k >= sign * best {
            best = k;
        }
        w = u;
        u = next;
        if improved <= 1e-15 * best.abs().max(1.0) {
            break;
        }
    }
    Ok(best)
}
