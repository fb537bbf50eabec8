//! Verification suites, direction scans and their JSON/CSV forms.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::SuiteConfig;
use crate::error::{GeomError, Result};
use crate::horosphere::{self, HorosphereReport};
use crate::liouville::{self, SphereSampler};
use crate::models::{complex_hyperbolic, MetricModel, TangentVector};
use crate::riccati::{self, RiccatiRun, TimeWindow};

pub const SCHEMA_VERSION: u32 = 1;

/// Identity or inequality a check record belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EquationTag {
    Eq1,
    Eq3,
    Eq4,
    #[serde(rename = "Eq5-6")]
    Eq5_6,
    Eq7,
    Lemma1,
    Schur,
}

/// How `value` is judged against `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// `|value − reference| ≤ tolerance`.
    Reference,
    /// `value ≤ tolerance`.
    AtMost,
    /// `value ≥ tolerance`.
    AtLeast,
    /// Reported only; always passes.
    Diagnostic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub tag: EquationTag,
    pub comparison: Comparison,
    pub value: f64,
    pub reference: Option<f64>,
    pub residual: f64,
    pub tolerance: Option<f64>,
    pub passed: bool,
}

impl CheckRecord {
    fn reference(name: &str, tag: EquationTag, value: f64, reference: f64, tolerance: f64) -> Self {
        let residual = (value - reference).abs();
        Self {
            name: name.into(),
            tag,
            comparison: Comparison::Reference,
            value,
            reference: Some(reference),
            residual,
            tolerance: Some(tolerance),
            passed: residual <= tolerance,
        }
    }

    fn at_most(name: &str, tag: EquationTag, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            tag,
            comparison: Comparison::AtMost,
            value,
            reference: None,
            residual: value,
            tolerance: Some(tolerance),
            passed: value <= tolerance,
        }
    }

    fn at_least(name: &str, tag: EquationTag, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            tag,
            comparison: Comparison::AtLeast,
            value,
            reference: None,
            residual: (bound - value).max(0.0),
            tolerance: Some(bound),
            passed: value >= bound,
        }
    }

    fn diagnostic(name: &str, tag: EquationTag, value: f64) -> Self {
        Self {
            name: name.into(),
            tag,
            comparison: Comparison::Diagnostic,
            value,
            reference: None,
            residual: value,
            tolerance: None,
            passed: true,
        }
    }
}

/// Known closed-form answers on the homogeneous models.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelReference {
    pub principal_curvatures: Vec<f64>,
    pub s: f64,
    pub spread: f64,
    pub trace_s2: f64,
}

impl ModelReference {
    pub fn for_model(model: &MetricModel) -> Option<Self> {
        if !model.is_locally_symmetric() {
            return None;
        }
        let n = model.dimension();
        if let Some(k) = model.half_space_scale() {
            return Some(Self {
                principal_curvatures: vec![k; n - 1],
                s: 0.0,
                spread: 0.0,
                trace_s2: (n - 1) as f64 * k * k,
            });
        }
        if model.complex_structure(&model.default_point()).is_some() {
            let c = -complex_hyperbolic::HOLOMORPHIC_CURVATURE;
            let (hi, lo) = (c.sqrt(), (c / 4.0).sqrt());
            return Some(Self { principal_curvatures: vec![lo, lo, hi], s: -2.0 * c / 4.0, spread: 3.0 * c / 4.0, trace_s2: hi * hi + 2.0 * lo * lo });
        }
        None
    }
}

/// Per-model tolerances of the suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub frame: f64,
    pub shape: f64,
    pub matrix_riccati: f64,
    pub traced_riccati: f64,
    pub flow: f64,
    pub scalar: f64,
    pub integrated: f64,
    pub spread: f64,
    pub gauss_consistency: f64,
    pub lemma_floor: f64,
}

impl Tolerances {
    pub fn for_model(model: &MetricModel) -> Self {
        let base = Self {
            frame: 1e-7,
            shape: 1e-6,
            matrix_riccati: 1e-8,
            traced_riccati: 1e-8,
            flow: 1e-8,
            scalar: 1e-5,
            integrated: 1e-5,
            spread: 1e-8,
            gauss_consistency: 1e-9,
            lemma_floor: -1e-10,
        };
        if let Some(k) = model.half_space_scale() {
            if model.is_locally_symmetric() {
                // s is quadratic in the curvature scale
                return Self { scalar: 1e-5 * (k * k).max(1.0), ..base };
            }
            return Self { matrix_riccati: 1e-3, traced_riccati: 1e-3, flow: f64::INFINITY, scalar: f64::INFINITY, ..base };
        }
        Self { shape: 1e-4, traced_riccati: 1e-6, flow: 1e-6, scalar: 1e-3, integrated: 1e-3, spread: 1e-6, ..base }
    }
}

/// Minimum sectional spread asserted inside the bump of a perturbed model.
pub const PERTURBED_SPREAD_FLOOR: f64 = 1e-4;
/// Absolute floor on the Monte-Carlo acceptance band, for integrands that are
/// constant up to round-off and so have a vanishing standard error.
pub const MONTE_CARLO_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelDescriptor {
    pub name: String,
    pub dimension: usize,
    pub parameters: BTreeMap<String, f64>,
    pub curvature_mode: String,
    pub curvature_bound: f64,
    pub locally_symmetric: bool,
}

impl ModelDescriptor {
    pub fn of(model: &MetricModel) -> Self {
        Self {
            name: model.name().to_string(),
            dimension: model.dimension(),
            parameters: model.parameters(),
            curvature_mode: model.curvature_mode().to_string(),
            curvature_bound: model.curvature_bound(),
            locally_symmetric: model.is_locally_symmetric(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiccatiDiagnostics {
    pub horizon: f64,
    pub step: f64,
    pub convergence_tol: f64,
    pub convergence_gap: f64,
    pub matrix: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
}

impl RiccatiDiagnostics {
    fn of(run: &RiccatiRun) -> Self {
        Self {
            horizon: run.horizon,
            step: run.step,
            convergence_tol: run.convergence_tol,
            convergence_gap: run.convergence_gap,
            matrix: crate::linalg::to_rows(&run.s0.matrix),
            eigenvalues: run.s0.eigenvalues(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingMetadata {
    pub seed: u64,
    pub count: usize,
    pub mean: f64,
    pub std_error: f64,
    pub target: f64,
    pub identity_directions: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    /// Process exit code: 0 on pass, 1 on a failed check, 2 on a hard error.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Error => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub model: ModelDescriptor,
    pub config: SuiteConfig,
    pub direction: Option<DirectionRecord>,
    pub checks: Vec<CheckRecord>,
    pub riccati: Option<RiccatiDiagnostics>,
    pub horosphere: Option<HorosphereReport>,
    pub sampling: Option<SamplingMetadata>,
    /// Checks the model does not support, with the reason.
    pub skipped: Vec<String>,
    pub status: Status,
    pub error: Option<String>,
    /// Wall-clock seconds per stage; the only non-deterministic section.
    pub timing: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionRecord {
    pub base: Vec<f64>,
    pub components: Vec<f64>,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One line per check: `name,tag,comparison,value,reference,residual,tolerance,passed`.
    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
        let mut out = String::from("name,tag,comparison,value,reference,residual,tolerance,passed\n");
        for c in &self.checks {
            let tag = serde_json::to_value(c.tag).unwrap();
            let cmp = serde_json::to_value(c.comparison).unwrap();
            out.push_str(&format!(
                "{},{},{},{:e},{},{:e},{},{}\n",
                c.name,
                tag.as_str().unwrap(),
                cmp.as_str().unwrap(),
                c.value,
                opt(c.reference),
                c.residual,
                opt(c.tolerance),
                c.passed
            ));
        }
        out
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Direction used by the suite: the first uniform unit vector at the model's
/// default point for the configured seed.
pub fn suite_direction(model: &MetricModel, seed: u64) -> Result<TangentVector> {
    let sampler = SphereSampler::new(model, &model.default_point(), 1, seed)?;
    Ok(sampler.samples().remove(0))
}

struct Timer<'a>(&'a mut BTreeMap<String, f64>);

impl Timer<'_> {
    fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.0.insert(name.into(), start.elapsed().as_secs_f64());
        out
    }
}

/// Builds the model and runs all checks in order: geodesic frame, Riccati
/// solution, Gauss equation and gap, Monte-Carlo averages. Configuration and
/// registration failures are errors; a failure inside a stage ends the suite
/// and returns the partial report with status `error`.
pub fn run_suite(cfg: &SuiteConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let model = cfg.model_spec().build()?;
    let mut report = VerificationReport {
        schema_version: SCHEMA_VERSION,
        model: ModelDescriptor::of(&model),
        config: cfg.clone(),
        direction: None,
        checks: Vec::new(),
        riccati: None,
        horosphere: None,
        sampling: None,
        skipped: Vec::new(),
        status: Status::Pass,
        error: None,
        timing: BTreeMap::new(),
    };
    if let Err(e) = run_stages(&model, cfg, &mut report) {
        report.status = Status::Error;
        report.error = Some(e.to_string());
        return Ok(report);
    }
    if report.checks.iter().any(|c| !c.passed) {
        report.status = Status::Fail;
    }
    Ok(report)
}

fn run_stages(model: &MetricModel, cfg: &SuiteConfig, report: &mut VerificationReport) -> Result<()> {
    use EquationTag::*;
    let tol = Tolerances::for_model(model);
    let reference = ModelReference::for_model(model);
    let rcfg = cfg.riccati();
    let v = suite_direction(model, cfg.seed)?;
    report.direction =
        Some(DirectionRecord { base: v.base.coords.as_slice().to_vec(), components: v.components.as_slice().to_vec() });
    let mut timing = BTreeMap::new();
    let mut timer = Timer(&mut timing);

    let run = timer.time("riccati", || riccati::stable_shape_operator(model, &v, &rcfg));
    let run = run?;
    report.riccati = Some(RiccatiDiagnostics::of(&run));
    let frame_dev = run
        .trajectory
        .iter()
        .map(|s| s.frame_deviation(model))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    report.checks.push(CheckRecord::at_most("parallel-frame", Eq1, frame_dev, tol.frame));
    report.checks.push(CheckRecord::at_most("riccati-convergence", Eq1, run.convergence_gap, rcfg.convergence_tol));
    let window = TimeWindow::default_for(&run);
    let matrix_res = riccati::matrix_riccati_residual(&run, window)?;
    report.checks.push(CheckRecord::at_most("riccati-matrix-residual", Eq1, matrix_res, tol.matrix_riccati));
    let eig = run.s0.eigenvalues();
    if let Some(r) = &reference {
        let dev = eig.iter().zip(&r.principal_curvatures).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        report.checks.push(CheckRecord::at_most("shape-operator-reference", Eq1, dev, tol.shape));
    }
    let traced = timer.time("traced-riccati", || riccati::traced_riccati_residual(model, &run, window))?;
    report.checks.push(CheckRecord::at_most("traced-riccati", Eq3, traced, tol.traced_riccati));
    let flow = liouville::flow_derivative_check(&run, window)?;
    report.checks.push(if tol.flow.is_finite() {
        CheckRecord::at_most("flow-invariance", Eq4, flow, tol.flow)
    } else {
        CheckRecord::diagnostic("flow-invariance", Eq4, flow)
    });

    let horo = horosphere::gauss_scalar(model, &v, &run.s0)?;
    report.checks.push(CheckRecord::at_most("gauss-consistency", Eq7, horo.gauss_defect().abs(), tol.gauss_consistency));
    match &reference {
        Some(r) => report.checks.push(CheckRecord::reference("horosphere-scalar", Eq7, horo.s, r.s, tol.scalar)),
        None => report.checks.push(CheckRecord::diagnostic("horosphere-scalar", Eq7, horo.s)),
    }
    report.checks.push(CheckRecord::at_least("lemma-gap", Lemma1, horo.lemma_gap, tol.lemma_floor));
    let probe = model.probe_point();
    let spread =
        timer.time("sectional-spread", || horosphere::sectional_spread(model, &probe, cfg.spread_samples, cfg.seed))?;
    match &reference {
        Some(r) => {
            report.checks.push(CheckRecord::reference("sectional-spread", Schur, spread, r.spread, tol.spread));
            if r.spread == 0.0 {
                // flat horosphere, umbilic, zero gap and constant curvature together
                let chain = [horo.s.abs(), horo.lemma_gap.abs(), horo.umbilicity_deviation, spread]
                    .into_iter()
                    .fold(0.0, f64::max);
                report.checks.push(CheckRecord::at_most("equality-chain", Schur, chain, tol.scalar));
            } else {
                // negative s alongside non-constant curvature
                report.checks.push(CheckRecord::at_least("equality-chain", Schur, (-horo.s).min(spread), tol.scalar));
            }
        }
        None => report.checks.push(CheckRecord::at_least("sectional-spread", Schur, spread, PERTURBED_SPREAD_FLOOR)),
    }
    report.horosphere = Some(horo);

    let p = model.default_point();
    let count = cfg.mc_samples();
    let avg = timer.time("fubini-ricci", || liouville::ricci_average(model, &p, count, cfg.seed))?;
    let target = model.scalar_curvature(&p)? / model.dimension() as f64;
    let band = 3.0 * avg.std_error + MONTE_CARLO_FLOOR * target.abs().max(1.0);
    report.checks.push(CheckRecord::reference("fubini-ricci", Eq5_6, avg.mean, target, band));
    let mut sampling = SamplingMetadata {
        seed: cfg.seed,
        count,
        mean: avg.mean,
        std_error: avg.std_error,
        target,
        identity_directions: None,
    };
    match timer.time("integrated-identity", || {
        liouville::verify_integrated_identity(model, &p, cfg.directions, cfg.seed, &rcfg)
    }) {
        Ok(id) => {
            sampling.identity_directions = Some(id.count);
            report.checks.push(CheckRecord::reference(
                "integrated-identity",
                Eq5_6,
                id.mean_trace_s2,
                id.minus_scal_over_n,
                tol.integrated,
            ));
        }
        Err(e @ GeomError::NotLocallySymmetric(_)) => report.skipped.push(format!("integrated-identity: {e}")),
        Err(e) => return Err(e),
    }
    report.sampling = Some(sampling);
    report.timing = timing;
    Ok(())
}

/// Horosphere reports for `scan_samples` uniform directions at the default point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanTable {
    pub schema_version: u32,
    pub model: ModelDescriptor,
    pub config: SuiteConfig,
    pub rows: Vec<HorosphereReport>,
}

impl ScanTable {
    pub fn to_csv(&self) -> String {
        let mut out = HorosphereReport::csv_header(self.model.dimension);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scan serializes")
    }
}

pub fn scan(cfg: &SuiteConfig) -> Result<ScanTable> {
    cfg.validate()?;
    let count = cfg.scan_samples();
    if count == 0 {
        return Err(GeomError::TooFewSamples { min: 1, got: 0 });
    }
    let model = cfg.model_spec().build()?;
    let rcfg = cfg.riccati();
    let sampler = SphereSampler::new(&model, &model.default_point(), count, cfg.seed)?;
    let rows = sampler
        .samples()
        .par_iter()
        .map(|v| horosphere::analyze(&model, v, &rcfg).map(|(_, r)| r))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanTable { schema_version: SCHEMA_VERSION, model: ModelDescriptor::of(&model), config: cfg.clone(), rows })
}

/// Trajectory of a Riccati run: time, chart position and velocity, traces of
/// `S` and `S²`, `Ric(ċ)` and the principal curvatures. Positions on models
/// with a re-centring chart are local to each state.
pub fn trajectory_csv(run: &RiccatiRun) -> String {
    let n = run.direction.components.len();
    let mut cols = vec!["t".to_string()];
    cols.extend((0..n).map(|i| format!("x{i}")));
    cols.extend((0..n).map(|i| format!("v{i}")));
    cols.extend(["trace_s", "trace_s2", "ric"].map(String::from));
    cols.extend((1..n).map(|i| format!("lambda{i}")));
    let mut out = cols.join(",");
    out.push('\n');
    for (state, sample) in run.trajectory.iter().zip(&run.samples) {
        let mut vals = vec![state.t];
        vals.extend(state.position.coords.iter());
        vals.extend(state.velocity.iter());
        vals.extend([sample.trace(), sample.trace_of_square(), sample.ricci()]);
        vals.extend(crate::linalg::sym_eigenvalues(&sample.shape));
        out.push_str(&vals.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}
