//! Chart metrics of negatively curved model spaces.
//!
//! A [`MetricModel`] evaluates the metric, Christoffel symbols and curvature
//! tensor of one chart, either in closed form or by central finite
//! differences of the metric. Models are immutable once registered and can be
//! shared freely across threads.

pub mod complex_hyperbolic;
pub mod half_space;
pub mod tensor;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::linalg;
use half_space::{Bump, HalfSpace};
pub use tensor::{Christoffel, Riemann};

/// First-derivative stencil step (metric → Christoffel), in units of the local
/// chart length scale.
pub const FD_STEP: f64 = 1e-5;
/// Outer stencil step for the nested second derivative (Christoffel → curvature).
pub const FD_OUTER_STEP: f64 = 1e-4;
/// Tolerance on the g-norm of vectors flagged as unit.
pub const UNIT_TOL: f64 = 1e-8;

/// Registry identifiers accepted by [`ModelSpec`].
pub const MODEL_NAMES: [&str; 3] = ["hyperbolic", "complex-hyperbolic", "perturbed"];

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub coords: DVector<f64>,
}

impl Point {
    pub fn new(coords: &[f64]) -> Self {
        Self { coords: DVector::from_column_slice(coords) }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl From<DVector<f64>> for Point {
    fn from(coords: DVector<f64>) -> Self {
        Self { coords }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: Point,
    pub components: DVector<f64>,
}

impl TangentVector {
    pub fn new(base: Point, components: DVector<f64>) -> Self {
        Self { base, components }
    }

    pub fn from_slices(base: &[f64], components: &[f64]) -> Self {
        Self::new(Point::new(base), DVector::from_column_slice(components))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurvatureMode {
    #[default]
    ClosedForm,
    FiniteDifference,
}

impl std::str::FromStr for CurvatureMode {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed-form" | "closed" => Ok(Self::ClosedForm),
            "finite-difference" | "fd" => Ok(Self::FiniteDifference),
            other => Err(GeomError::InvalidParameter(format!("unknown curvature mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for CurvatureMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::ClosedForm => "closed-form",
            Self::FiniteDifference => "finite-difference",
        })
    }
}

/// Sampling used to confirm strict negativity of sectional curvature when a
/// model is registered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegistrationOptions {
    pub points: usize,
    pub planes_per_point: usize,
    pub seed: u64,
}

impl Default for RegistrationOptions {
    fn default() -> Self {
        Self { points: 256, planes_per_point: 4, seed: 0x5eed_c0de }
    }
}

/// String-addressable description of a model, as supplied by the CLI config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub dim: Option<usize>,
    pub k: f64,
    pub amplitude: f64,
    pub curvature_mode: CurvatureMode,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            name: "hyperbolic".into(),
            dim: None,
            k: 1.0,
            amplitude: 0.05,
            curvature_mode: CurvatureMode::ClosedForm,
        }
    }
}

impl ModelSpec {
    pub fn build(&self) -> Result<MetricModel> {
        let model = match self.name.as_str() {
            "hyperbolic" => MetricModel::hyperbolic(self.dim.unwrap_or(3), self.k)?,
            "complex-hyperbolic" => {
                if let Some(d) = self.dim {
                    if d != complex_hyperbolic::DIM {
                        return Err(GeomError::DimensionMismatch { expected: complex_hyperbolic::DIM, got: d });
                    }
                }
                MetricModel::complex_hyperbolic()?
            }
            "perturbed" => MetricModel::perturbed(self.dim.unwrap_or(3), self.k, self.amplitude)?,
            other => return Err(GeomError::UnknownModel(other.to_string())),
        };
        Ok(model.with_mode(self.curvature_mode))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Geometry {
    Flat,
    HalfSpace(HalfSpace),
    ComplexHyperbolic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricModel {
    name: String,
    dim: usize,
    geometry: Geometry,
    mode: CurvatureMode,
    curvature_bound: f64,
    locally_symmetric: bool,
}

impl MetricModel {
    /// Real hyperbolic space of curvature `−k²` in the half-space chart.
    pub fn hyperbolic(dim: usize, k: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(k > 0.0 && k.is_finite()) {
            return Err(GeomError::InvalidParameter(format!("curvature scale k must be positive, got {k}")));
        }
        let model = Self {
            name: "hyperbolic".into(),
            dim,
            geometry: Geometry::HalfSpace(HalfSpace { k, bump: None }),
            mode: CurvatureMode::ClosedForm,
            curvature_bound: k * k,
            locally_symmetric: true,
        };
        model.register(RegistrationOptions::default())
    }

    /// Complex hyperbolic plane with holomorphic sectional curvature −4.
    pub fn complex_hyperbolic() -> Result<Self> {
        let model = Self {
            name: "complex-hyperbolic".into(),
            dim: complex_hyperbolic::DIM,
            geometry: Geometry::ComplexHyperbolic,
            mode: CurvatureMode::ClosedForm,
            curvature_bound: -complex_hyperbolic::HOLOMORPHIC_CURVATURE,
            locally_symmetric: true,
        };
        model.register(RegistrationOptions::default())
    }

    /// Hyperbolic half-space with the conformal bump of the given amplitude.
    pub fn perturbed(dim: usize, k: f64, amplitude: f64) -> Result<Self> {
        Self::perturbed_with(dim, k, Bump { amplitude, ..Bump::default() }, RegistrationOptions::default())
    }

    pub fn perturbed_with(dim: usize, k: f64, bump: Bump, opts: RegistrationOptions) -> Result<Self> {
        check_dim(dim)?;
        if !(k > 0.0 && k.is_finite()) {
            return Err(GeomError::InvalidParameter(format!("curvature scale k must be positive, got {k}")));
        }
        if !bump.amplitude.is_finite() || !(bump.radius > 0.0) || !(bump.center_height > 0.0) {
            return Err(GeomError::InvalidParameter(format!("invalid bump profile {bump:?}")));
        }
        let model = Self {
            name: "perturbed".into(),
            dim,
            geometry: Geometry::HalfSpace(HalfSpace { k, bump: Some(bump) }),
            mode: CurvatureMode::ClosedForm,
            curvature_bound: k * k,
            locally_symmetric: bump.amplitude == 0.0,
        };
        model.register(opts)
    }

    /// Euclidean space. Used as a zero-curvature reference in tests; it is not
    /// part of the registry and skips the negativity check.
    pub fn flat(dim: usize) -> Self {
        Self {
            name: "flat".into(),
            dim,
            geometry: Geometry::Flat,
            mode: CurvatureMode::ClosedForm,
            curvature_bound: 0.0,
            locally_symmetric: true,
        }
    }

    pub fn with_mode(mut self, mode: CurvatureMode) -> Self {
        self.mode = mode;
        self
    }

    /// Samples sectional curvatures and fails if any is non-negative. For the
    /// perturbed family the samples concentrate on the bump support and also
    /// tighten the curvature bound.
    fn register(mut self, opts: RegistrationOptions) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let n = self.dim;
        let mut max_abs = self.curvature_bound;
        for i in 0..opts.points {
            let p = self.registration_point(i, &mut rng);
            for _ in 0..opts.planes_per_point {
                let u = gaussian_vector(n, &mut rng);
                let w = gaussian_vector(n, &mut rng);
                let k = self.sectional_curvature_closed(&p, &u, &w)?;
                if !(k < 0.0) {
                    return Err(GeomError::Registration(format!(
                        "model `{}` has sectional curvature {k:.3e} >= 0 at {:?}",
                        self.name,
                        p.coords.as_slice()
                    )));
                }
                max_abs = max_abs.max(-k);
            }
        }
        if let Geometry::HalfSpace(HalfSpace { bump: Some(_), .. }) = self.geometry {
            // sampled maximum, padded for planes between the samples
            self.curvature_bound = max_abs * 1.05;
        }
        Ok(self)
    }

    fn registration_point(&self, i: usize, rng: &mut ChaCha8Rng) -> Point {
        let n = self.dim;
        let uniform = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| lo + (hi - lo) * rand::Rng::random::<f64>(rng);
        match &self.geometry {
            Geometry::HalfSpace(hs) => {
                let (h, rho) = hs.bump.map(|b| (b.center_height, b.radius)).unwrap_or((1.0, 1.0));
                let mut x = DVector::zeros(n);
                if i > 0 {
                    let span = h * rho.sinh();
                    for c in 0..n - 1 {
                        x[c] = uniform(rng, -span, span);
                    }
                    x[n - 1] = h * uniform(rng, -rho, rho).exp();
                } else {
                    x[n - 1] = h;
                }
                Point::from(x)
            }
            Geometry::ComplexHyperbolic => {
                Point::from(DVector::from_fn(n, |_, _| uniform(rng, -2.0, 2.0)))
            }
            Geometry::Flat => Point::from(DVector::zeros(n)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn curvature_mode(&self) -> CurvatureMode {
        self.mode
    }

    /// Upper bound on `|K|` over all 2-planes (exact for the homogeneous models,
    /// a padded sample maximum for the perturbed family).
    pub fn curvature_bound(&self) -> f64 {
        self.curvature_bound
    }

    /// Whether curvature quantities are point- and direction-homogeneous.
    pub fn is_locally_symmetric(&self) -> bool {
        self.locally_symmetric
    }

    /// Model parameters, echoed into reports.
    pub fn parameters(&self) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        match &self.geometry {
            Geometry::HalfSpace(hs) => {
                out.insert("k".into(), hs.k);
                if let Some(b) = &hs.bump {
                    out.insert("amplitude".into(), b.amplitude);
                    out.insert("bump_center_height".into(), b.center_height);
                    out.insert("bump_radius".into(), b.radius);
                }
            }
            Geometry::ComplexHyperbolic => {
                out.insert("holomorphic_curvature".into(), complex_hyperbolic::HOLOMORPHIC_CURVATURE);
            }
            Geometry::Flat => {}
        }
        out
    }

    /// Canonical base point: the bump centre for half-space charts, the origin otherwise.
    pub fn default_point(&self) -> Point {
        let mut x = DVector::zeros(self.dim);
        if let Geometry::HalfSpace(hs) = &self.geometry {
            x[self.dim - 1] = hs.bump.map(|b| b.center_height).unwrap_or(1.0);
        }
        Point::from(x)
    }

    /// Point used for the sectional spread: off the bump centre inside its
    /// support on perturbed models (at the centre the perturbation is
    /// isotropic), the default point otherwise.
    pub fn probe_point(&self) -> Point {
        match &self.geometry {
            Geometry::HalfSpace(HalfSpace { bump: Some(b), .. }) => Point::from(b.interior_point(self.dim)),
            _ => self.default_point(),
        }
    }

    /// Curvature scale `k` of half-space models.
    pub fn half_space_scale(&self) -> Option<f64> {
        match &self.geometry {
            Geometry::HalfSpace(hs) => Some(hs.k),
            _ => None,
        }
    }

    pub fn bump(&self) -> Option<Bump> {
        match &self.geometry {
            Geometry::HalfSpace(hs) => hs.bump,
            _ => None,
        }
    }

    pub fn validate_point(&self, p: &Point) -> Result<()> {
        if p.dim() != self.dim {
            return Err(GeomError::DimensionMismatch { expected: self.dim, got: p.dim() });
        }
        let ok = match &self.geometry {
            Geometry::HalfSpace(hs) => hs.in_domain(&p.coords),
            Geometry::ComplexHyperbolic => complex_hyperbolic::in_domain(&p.coords),
            Geometry::Flat => p.coords.iter().all(|c| c.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(GeomError::OutsideChart { model: self.name.clone(), coords: p.coords.iter().copied().collect() })
        }
    }

    fn validate_vector(&self, v: &TangentVector) -> Result<()> {
        self.validate_point(&v.base)?;
        if v.components.len() != self.dim {
            return Err(GeomError::DimensionMismatch { expected: self.dim, got: v.components.len() });
        }
        Ok(())
    }

    fn metric_unchecked(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match &self.geometry {
            Geometry::HalfSpace(hs) => hs.metric(x),
            Geometry::ComplexHyperbolic => complex_hyperbolic::metric(x),
            Geometry::Flat => DMatrix::identity(self.dim, self.dim),
        }
    }

    /// Symmetric positive-definite metric matrix at `p`.
    pub fn metric_at(&self, p: &Point) -> Result<DMatrix<f64>> {
        self.validate_point(p)?;
        Ok(self.metric_unchecked(&p.coords))
    }

    fn inverse_metric_unchecked(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match &self.geometry {
            Geometry::HalfSpace(hs) => hs.inverse_metric(x),
            Geometry::ComplexHyperbolic => complex_hyperbolic::inverse_metric(x),
            Geometry::Flat => DMatrix::identity(self.dim, self.dim),
        }
    }

    pub fn inverse_metric_at(&self, p: &Point) -> Result<DMatrix<f64>> {
        self.validate_point(p)?;
        Ok(self.inverse_metric_unchecked(&p.coords))
    }

    /// Complex structure `J` (column `b` is `J ∂_b`) on the Kähler model.
    pub fn complex_structure(&self, p: &Point) -> Option<DMatrix<f64>> {
        match self.geometry {
            Geometry::ComplexHyperbolic => Some(complex_hyperbolic::complex_structure(&p.coords)),
            _ => None,
        }
    }

    fn length_scale(&self, x: &DVector<f64>) -> f64 {
        match &self.geometry {
            Geometry::HalfSpace(hs) => hs.length_scale(x),
            _ => 1.0,
        }
    }

    fn offset_point(&self, x: &DVector<f64>, axis: usize, delta: f64) -> Result<DVector<f64>> {
        let mut y = x.clone();
        y[axis] += delta;
        self.validate_point(&Point::from(y.clone()))?;
        Ok(y)
    }

    fn christoffel_fd(&self, x: &DVector<f64>) -> Result<Christoffel> {
        let n = self.dim;
        let h = FD_STEP * self.length_scale(x);
        let mut dg = Vec::with_capacity(n);
        for l in 0..n {
            let plus = self.metric_unchecked(&self.offset_point(x, l, h)?);
            let minus = self.metric_unchecked(&self.offset_point(x, l, -h)?);
            dg.push((plus - minus) / (2.0 * h));
        }
        let ginv = self.inverse_metric_unchecked(x);
        Ok(Christoffel::from_metric_derivatives(&ginv, &dg))
    }

    fn christoffel_closed(&self, x: &DVector<f64>) -> Christoffel {
        match &self.geometry {
            Geometry::HalfSpace(hs) => hs.christoffel(x),
            Geometry::ComplexHyperbolic => complex_hyperbolic::christoffel(x),
            Geometry::Flat => Christoffel::zeros(self.dim),
        }
    }

    /// Christoffel symbols `Γ^k_{ij}` at `p`, symmetric in the lower indices.
    pub fn christoffel_at(&self, p: &Point) -> Result<Christoffel> {
        self.validate_point(p)?;
        match self.mode {
            CurvatureMode::ClosedForm => Ok(self.christoffel_closed(&p.coords)),
            CurvatureMode::FiniteDifference => self.christoffel_fd(&p.coords),
        }
    }

    fn riemann_closed(&self, x: &DVector<f64>) -> Riemann {
        match &self.geometry {
            Geometry::HalfSpace(hs) => hs.riemann(x),
            Geometry::ComplexHyperbolic => complex_hyperbolic::riemann(x),
            Geometry::Flat => Riemann::zeros(self.dim),
        }
    }

    fn riemann_fd(&self, x: &DVector<f64>) -> Result<Riemann> {
        let n = self.dim;
        let h = FD_OUTER_STEP * self.length_scale(x);
        let gamma = self.christoffel_fd(x)?;
        let mut dgamma = Vec::with_capacity(n);
        for i in 0..n {
            let plus = self.christoffel_fd(&self.offset_point(x, i, h)?)?;
            let minus = self.christoffel_fd(&self.offset_point(x, i, -h)?)?;
            let mut d = Christoffel::zeros(n);
            for k in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        d.set(k, a, b, (plus.get(k, a, b) - minus.get(k, a, b)) / (2.0 * h));
                    }
                }
            }
            dgamma.push(d);
        }
        Ok(tensor::riemann_from_christoffel(&self.metric_unchecked(x), &gamma, &dgamma))
    }

    /// Full curvature tensor at `p` in the model's curvature mode.
    pub fn riemann_at(&self, p: &Point) -> Result<Riemann> {
        self.validate_point(p)?;
        match self.mode {
            CurvatureMode::ClosedForm => Ok(self.riemann_closed(&p.coords)),
            CurvatureMode::FiniteDifference => self.riemann_fd(&p.coords),
        }
    }

    fn unit_check(&self, g: &DMatrix<f64>, v: &DVector<f64>) -> Result<()> {
        let norm = linalg::norm(g, v);
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(GeomError::NotUnit { norm });
        }
        Ok(())
    }

    /// Matrix of `⟨R(e_i, v)v, e_j⟩` for a g-orthonormal frame `e` of `v^⊥`
    /// (frame vectors are the columns of `frame`).
    pub fn curvature_operator(&self, v: &TangentVector, frame: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.validate_vector(v)?;
        let g = self.metric_unchecked(&v.base.coords);
        self.unit_check(&g, &v.components)?;
        if frame.nrows() != self.dim || frame.ncols() != self.dim - 1 {
            return Err(GeomError::DimensionMismatch { expected: self.dim - 1, got: frame.ncols() });
        }
        let deviation = linalg::frame_deviation(&g, &v.components, frame);
        if deviation > linalg::FRAME_TOL {
            return Err(GeomError::FrameNotOrthonormal { deviation });
        }
        let riemann = self.riemann_at(&v.base)?;
        Ok(curvature_operator_from(&riemann, &v.components, frame))
    }

    /// `(Ric(v), Scal)` at the base point of unit `v`.
    pub fn ricci_and_scalar(&self, v: &TangentVector) -> Result<(f64, f64)> {
        self.validate_vector(v)?;
        let g = self.metric_unchecked(&v.base.coords);
        self.unit_check(&g, &v.components)?;
        let frame = linalg::complete_frame(&g, &v.components, &[])?;
        let riemann = self.riemann_at(&v.base)?;
        let ric_v = curvature_operator_from(&riemann, &v.components, &frame).trace();
        let ginv = self.inverse_metric_unchecked(&v.base.coords);
        let scal = (&ginv * riemann.ricci(&ginv)).trace();
        Ok((ric_v, scal))
    }

    /// Scalar curvature of the ambient metric at `p`.
    pub fn scalar_curvature(&self, p: &Point) -> Result<f64> {
        let ginv = self.inverse_metric_at(p)?;
        Ok((&ginv * self.riemann_at(p)?.ricci(&ginv)).trace())
    }

    /// Sectional curvature of the plane spanned by `u` and `w` at `p`.
    pub fn sectional_curvature(&self, p: &Point, u: &DVector<f64>, w: &DVector<f64>) -> Result<f64> {
        let riemann = self.riemann_at(p)?;
        let g = self.metric_unchecked(&p.coords);
        sectional_from(&riemann, &g, u, w)
    }

    fn sectional_curvature_closed(&self, p: &Point, u: &DVector<f64>, w: &DVector<f64>) -> Result<f64> {
        self.validate_point(p)?;
        let riemann = self.riemann_closed(&p.coords);
        sectional_from(&riemann, &self.metric_unchecked(&p.coords), u, w)
    }

    /// Isometry re-centring the chart at `p`, as `(image of p, differential)`.
    /// Only charts of homogeneous models whose coordinates lose precision far
    /// out provide one.
    pub fn recentering(&self, p: &Point) -> Option<(Point, DMatrix<f64>)> {
        match self.geometry {
            Geometry::ComplexHyperbolic => Some((
                Point::from(DVector::zeros(self.dim)),
                complex_hyperbolic::recentering_differential(&p.coords),
            )),
            _ => None,
        }
    }

    /// Normalizes `components` to unit g-length at `base`.
    pub fn unit_vector(&self, base: &Point, components: &[f64]) -> Result<TangentVector> {
        let g = self.metric_at(base)?;
        let c = DVector::from_column_slice(components);
        if c.len() != self.dim {
            return Err(GeomError::DimensionMismatch { expected: self.dim, got: c.len() });
        }
        let norm = linalg::norm(&g, &c);
        if !(norm > 0.0) {
            return Err(GeomError::InvalidParameter("zero direction".into()));
        }
        Ok(TangentVector::new(base.clone(), c / norm))
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 3 {
        return Err(GeomError::InvalidParameter(format!("dimension must be at least 3, got {dim}")));
    }
    Ok(())
}

fn gaussian_vector(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

pub(crate) fn curvature_operator_from(riemann: &Riemann, v: &DVector<f64>, frame: &DMatrix<f64>) -> DMatrix<f64> {
    let form = riemann.jacobi_form(v);
    let mut m = frame.transpose() * form * frame;
    linalg::symmetrize(&mut m);
    m
}

pub(crate) fn sectional_from(riemann: &Riemann, g: &DMatrix<f64>, u: &DVector<f64>, w: &DVector<f64>) -> Result<f64> {
    let area = linalg::inner(g, u, u) * linalg::inner(g, w, w) - linalg::inner(g, u, w).powi(2);
    if !(area > 0.0) {
        return Err(GeomError::InvalidParameter("vectors do not span a 2-plane".into()));
    }
    Ok(riemann.eval(u, w, w, u) / area)
}
