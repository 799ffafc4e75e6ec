//! JSON model specification files.
//!
//! ```json
//! {
//!   "spec_version": 1,
//!   "model": {"builtin": {"kind": "ball_model", "a": 0.25}},
//!   "chart": {"builtin": {"kind": "ball_annulus", "outer": 1.0, "inner": 0.02}},
//!   "levy": {"components": [{"density": {"kind": "power", "params": {"scale": 1.0, "beta": 0.5, "hi": 0.5}},
//!                            "singularity": 0.5, "support": "positive"}]},
//!   "plan": {"interior_points": 64, "boundary_points": 16},
//!   "sim": {"dt": 0.001, "horizon": 1.0, "n_paths": 100, "seed": 1, "start": [0.5, 0.0]}
//! }
//! ```

use std::sync::Arc;

use ijd_core::checker::{SamplePlan, Tolerances};
use ijd_core::examples;
use ijd_core::geometry::{AffineChart, Atlas, BallAnnulusChart, Chart, CircleChart, CoordinateRange, DomainBox};
use ijd_core::levy::{DensityProfile, LevyComponent, LevyMeasure, Support};
use ijd_core::sde::{Diffusion, JumpDiffusionModel, LevyDecomposition, VectorField};
use ijd_core::sim::{Scheme, SimConfig};
use ijd_core::{Matrix, Vector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{IjdError, Result};

pub const SPEC_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpecFile {
    pub spec_version: u32,
    pub model: ModelSpec,
    pub chart: ChartSpec,
    /// Further charts of the atlas; the first chart is the one sampled.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_charts: Vec<ChartSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levy: Option<LevySpec>,
    #[serde(default)]
    pub plan: PlanSpec,
    #[serde(default)]
    pub sim: SimSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Builtin(BuiltinModel),
    Affine(AffineModelSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BuiltinModel {
    CircleModel {
        /// Adds `c·h` to the drift; any nonzero value breaks tangency.
        #[serde(default, skip_serializing_if = "is_zero")]
        radial_drift: f64,
    },
    BallModel {
        a: f64,
    },
    OuCone {
        /// Rows of `A`.
        generator: Vec<Vec<f64>>,
        alpha: Vec<f64>,
        direction: Vec<f64>,
    },
    Subordinator {
        alpha: f64,
        #[serde(default)]
        sigma: f64,
    },
}

/// `dr = (Ar + α)dt + Σ σʲ dβʲ + ∫ Σ_k x_k u_k (μ − F dt)` with constant
/// `α`, `σʲ` and jump directions `u_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineModelSpec {
    #[serde(default)]
    pub generator: Option<Vec<Vec<f64>>>,
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub sigma: Vec<Vec<f64>>,
    #[serde(default)]
    pub jump_directions: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ChartSpec {
    Builtin(BuiltinChart),
    Affine(AffineChartSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BuiltinChart {
    Circle {
        #[serde(default = "one")]
        radius: f64,
    },
    BallAnnulus {
        #[serde(default = "one")]
        outer: f64,
        inner: f64,
    },
    Cone {
        generators: Vec<Vec<f64>>,
    },
    Interval {
        lo: f64,
        len: f64,
        #[serde(default)]
        hi_open: bool,
    },
}

fn one() -> f64 {
    1.0
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineChartSpec {
    pub offset: Vec<f64>,
    /// Columns of `Dφ`.
    pub basis: Vec<Vec<f64>>,
    pub ranges: Vec<RangeSpec>,
    #[serde(default)]
    pub half_space: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    #[serde(default)]
    pub lo: Option<f64>,
    #[serde(default)]
    pub hi: Option<f64>,
    #[serde(default)]
    pub hi_open: bool,
    #[serde(default)]
    pub period: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevySpec {
    pub components: Vec<ComponentSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    #[serde(default)]
    pub density: Option<DensityProfile>,
    /// `[location, mass]` pairs.
    #[serde(default)]
    pub atoms: Vec<(f64, f64)>,
    #[serde(default)]
    pub singularity: Option<f64>,
    #[serde(default = "two_sided")]
    pub support: Support,
}

fn two_sided() -> Support {
    Support::TwoSided
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanSpec {
    pub interior_points: usize,
    pub boundary_points: usize,
    pub nodes_per_shell: usize,
    pub random_marks: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cone: Option<Vec<Vec<f64>>>,
}

impl Default for PlanSpec {
    fn default() -> Self {
        Self {
            interior_points: 64,
            boundary_points: 16,
            nodes_per_shell: 8,
            random_marks: 1000,
            seed: 0,
            tolerances: Tolerances::default(),
            cone: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSpec {
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub truncation_epsilon: f64,
    pub scheme: Scheme,
    /// Starting point in ambient coordinates; defaults to the first interior sample.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<f64>>,
}

impl Default for SimSpec {
    fn default() -> Self {
        let c = SimConfig::default();
        Self {
            dt: c.dt,
            horizon: c.horizon,
            n_paths: c.n_paths,
            seed: c.seed,
            truncation_epsilon: c.truncation_epsilon,
            scheme: c.scheme,
            start: None,
        }
    }
}

/// A spec turned into core objects.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub spec: ModelSpecFile,
    pub name: String,
    pub model: JumpDiffusionModel,
    pub atlas: Atlas,
    pub plan: SamplePlan,
    pub sim: SimConfig,
    pub start: Vector,
    pub hash: String,
}

/// Command-line overrides applied on top of a spec.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub dt: Option<f64>,
    pub tol: Option<f64>,
}

impl ModelSpecFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| {
            let full = e.to_string();
            let suffix = format!(" at line {} column {}", e.line(), e.column());
            let message = full.strip_suffix(&suffix).unwrap_or(&full).to_string();
            IjdError::Spec { message, line: e.line(), column: e.column() }
        })?;
        if spec.spec_version != SPEC_VERSION {
            return Err(IjdError::spec(format!(
                "unsupported spec_version {} (expected {SPEC_VERSION})",
                spec.spec_version
            )));
        }
        Ok(spec)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("spec serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.sim.seed = s;
            self.plan.seed = s;
        }
        if let Some(p) = o.paths {
            self.sim.n_paths = p;
        }
        if let Some(dt) = o.dt {
            self.sim.dt = dt;
        }
        if let Some(t) = o.tol {
            self.plan.tolerances.tangency = t;
            self.plan.tolerances.closure = t;
        }
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let levy = match &self.levy {
            Some(l) => Some(build_levy(l)?),
            None => None,
        };
        let (name, model) = build_model(&self.model, levy)?;
        let primary = build_chart(&self.chart)?;
        if primary.dim_ambient() != model.dim() {
            return Err(IjdError::spec(format!(
                "chart lives in dimension {} but the model in {}",
                primary.dim_ambient(),
                model.dim()
            )));
        }
        let mut charts = vec![primary];
        for c in &self.extra_charts {
            charts.push(build_chart(c)?);
        }
        let atlas = Atlas::new(charts)?;

        let p = &self.plan;
        check_finite("plan.tolerances", &[p.tolerances.tangency, p.tolerances.inequality, p.tolerances.closure])?;
        let mut plan = SamplePlan::grid(atlas.primary().as_ref(), p.interior_points, p.boundary_points)
            .with_seed(p.seed)
            .with_tolerances(p.tolerances);
        plan.nodes_per_shell = p.nodes_per_shell;
        plan.random_marks = p.random_marks;
        if let Some(cone) = &p.cone {
            plan = plan.with_cone(cone.iter().map(|v| vector("plan.cone", v, model.dim())).collect::<Result<_>>()?);
        }

        let s = &self.sim;
        check_finite("sim", &[s.dt, s.horizon, s.truncation_epsilon])?;
        let sim = SimConfig {
            dt: s.dt,
            horizon: s.horizon,
            n_paths: s.n_paths,
            seed: s.seed,
            truncation_epsilon: s.truncation_epsilon,
            scheme: s.scheme,
        };
        sim.validate()?;
        let start = match &s.start {
            Some(v) => vector("sim.start", v, model.dim())?,
            None => match plan.interior_points.first() {
                Some(y) => atlas.primary().phi(y),
                None => return Err(IjdError::spec("sim.start is required when the plan has no interior points")),
            },
        };
        Ok(Resolved { spec: self.clone(), name, model, atlas, plan, sim, start, hash: self.hash() })
    }
}

fn check_finite(what: &str, xs: &[f64]) -> Result<()> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(IjdError::spec(format!("{what}: numeric fields must be finite")))
    }
}

fn vector(what: &str, v: &[f64], dim: usize) -> Result<Vector> {
    check_finite(what, v)?;
    if v.len() != dim {
        return Err(IjdError::spec(format!("{what}: expected {dim} entries, found {}", v.len())));
    }
    Ok(Vector::from_column_slice(v))
}

fn matrix_rows(what: &str, rows: &[Vec<f64>], dim: usize) -> Result<Matrix> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(IjdError::spec(format!("{what}: expected a {dim}×{dim} matrix")));
    }
    for r in rows {
        check_finite(what, r)?;
    }
    Ok(Matrix::from_fn(dim, dim, |i, j| rows[i][j]))
}

fn build_levy(spec: &LevySpec) -> Result<LevyMeasure> {
    let mut comps = Vec::new();
    for (k, c) in spec.components.iter().enumerate() {
        let comp = LevyComponent::new(c.density, c.atoms.clone(), c.singularity, c.support)
            .map_err(|e| IjdError::spec(format!("levy.components[{k}]: {e}")))?;
        comps.push(comp);
    }
    if comps.is_empty() {
        return Err(IjdError::spec("levy.components must not be empty"));
    }
    Ok(LevyMeasure::new(comps))
}

fn build_model(spec: &ModelSpec, levy: Option<LevyMeasure>) -> Result<(String, JumpDiffusionModel)> {
    let scalar = |l: &LevyMeasure, what: &str| -> Result<()> {
        if l.dim() == 1 {
            Ok(())
        } else {
            Err(IjdError::spec(format!("{what} takes a single mark component")))
        }
    };
    Ok(match spec {
        ModelSpec::Builtin(BuiltinModel::CircleModel { radial_drift }) => {
            check_finite("model", &[*radial_drift])?;
            let l = levy.unwrap_or_else(examples::circle_uniform_measure);
            scalar(&l, "circle_model")?;
            let mut model = examples::circle_model(l)?;
            if *radial_drift != 0.0 {
                let base = model.drift_field();
                let c = *radial_drift;
                model = model.with_drift(move |h| base(h) + h * c);
            }
            ("circle".into(), model)
        }
        ModelSpec::Builtin(BuiltinModel::BallModel { a }) => {
            let l = levy.unwrap_or_else(examples::ball_measure);
            scalar(&l, "ball_model")?;
            ("ball".into(), examples::ball_model(*a, l)?)
        }
        ModelSpec::Builtin(BuiltinModel::OuCone { generator, alpha, direction }) => {
            let d = alpha.len();
            let l = match levy {
                Some(l) => l,
                None => examples::exp_tilted_measure(1.0, 2.0)?,
            };
            scalar(&l, "ou_cone")?;
            let a = matrix_rows("model.generator", generator, d)?;
            let model = examples::ou_model(a, vector("model.alpha", alpha, d)?, vector("model.direction", direction, d)?, l)?;
            ("ou_cone".into(), model)
        }
        ModelSpec::Builtin(BuiltinModel::Subordinator { alpha, sigma }) => {
            check_finite("model", &[*alpha, *sigma])?;
            let l = levy.unwrap_or_else(examples::subordinator_measure);
            scalar(&l, "subordinator")?;
            ("subordinator".into(), examples::subordinator_model(*alpha, *sigma, l)?)
        }
        ModelSpec::Affine(a) => ("affine".into(), affine_model(a, levy)?),
    })
}

fn affine_model(spec: &AffineModelSpec, levy: Option<LevyMeasure>) -> Result<JumpDiffusionModel> {
    let d = spec.alpha.len();
    if d == 0 {
        return Err(IjdError::spec("model.alpha must not be empty"));
    }
    let alpha = vector("model.alpha", &spec.alpha, d)?;
    let mut model = JumpDiffusionModel::new(d, move |_| alpha.clone()).with_name("affine");
    if let Some(g) = &spec.generator {
        model = model.with_generator(matrix_rows("model.generator", g, d)?);
    }
    for s in &spec.sigma {
        model = model.with_diffusion(Diffusion::constant(vector("model.sigma", s, d)?));
    }
    match levy {
        Some(l) => {
            if spec.jump_directions.len() != l.dim() {
                return Err(IjdError::spec(format!(
                    "model.jump_directions: need one direction per mark component ({})",
                    l.dim()
                )));
            }
            let dirs: Vec<Vector> =
                spec.jump_directions.iter().map(|u| vector("model.jump_directions", u, d)).collect::<Result<_>>()?;
            let linear: Vec<VectorField> = dirs
                .iter()
                .map(|u| {
                    let u = u.clone();
                    Arc::new(move |_: &Vector| u.clone()) as VectorField
                })
                .collect();
            model = model
                .with_jumps(l, move |_, x| {
                    let mut out = Vector::zeros(d);
                    for (k, u) in dirs.iter().enumerate() {
                        out.axpy(x[k], u, 1.0);
                    }
                    out
                })
                .with_decomposition(LevyDecomposition::new(move |_, _| Vector::zeros(d), linear));
        }
        None if !spec.jump_directions.is_empty() => {
            return Err(IjdError::spec("model.jump_directions given without a levy block"));
        }
        None => {}
    }
    Ok(model)
}

fn build_chart(spec: &ChartSpec) -> Result<Arc<dyn Chart>> {
    Ok(match spec {
        ChartSpec::Builtin(BuiltinChart::Circle { radius }) => Arc::new(CircleChart::new(*radius)?),
        ChartSpec::Builtin(BuiltinChart::BallAnnulus { outer, inner }) => Arc::new(BallAnnulusChart::new(*outer, *inner)?),
        ChartSpec::Builtin(BuiltinChart::Cone { generators }) => {
            let d = generators.first().map_or(0, Vec::len);
            let gens: Vec<Vector> = generators.iter().map(|g| vector("chart.generators", g, d)).collect::<Result<_>>()?;
            Arc::new(AffineChart::cone(&gens)?)
        }
        ChartSpec::Builtin(BuiltinChart::Interval { lo, len, hi_open }) => {
            check_finite("chart", &[*lo, *len])?;
            Arc::new(AffineChart::interval(*lo, *len, *hi_open)?)
        }
        ChartSpec::Affine(a) => {
            let d = a.offset.len();
            let offset = vector("chart.offset", &a.offset, d)?;
            let cols: Vec<Vector> = a.basis.iter().map(|c| vector("chart.basis", c, d)).collect::<Result<_>>()?;
            if cols.len() != a.ranges.len() || cols.is_empty() {
                return Err(IjdError::spec("chart: need one range per basis vector"));
            }
            let ranges = a
                .ranges
                .iter()
                .map(|r| match r.period {
                    Some(p) => CoordinateRange::periodic(r.lo.unwrap_or(0.0), p),
                    None => CoordinateRange {
                        lo: r.lo.unwrap_or(f64::NEG_INFINITY),
                        hi: r.hi.unwrap_or(f64::INFINITY),
                        lo_open: false,
                        hi_open: r.hi_open,
                        period: None,
                    },
                })
                .collect();
            let domain = DomainBox::new(ranges, a.half_space)?;
            Arc::new(AffineChart::new("affine", offset, Matrix::from_columns(&cols), domain)?)
        }
    })
}

fn power(scale: f64, beta: f64, lo: f64, hi: f64, support: Support) -> ComponentSpec {
    ComponentSpec {
        density: Some(DensityProfile::Power { scale, beta, lo, hi: Some(hi) }),
        atoms: vec![],
        singularity: Some(beta),
        support,
    }
}

/// Spec files equivalent to the builtin examples.
pub fn example_spec(name: &str) -> Result<ModelSpecFile> {
    let e = |v: &[f64]| v.to_vec();
    let base = |model, chart, levy, plan: PlanSpec, start: Vec<f64>| ModelSpecFile {
        spec_version: SPEC_VERSION,
        model,
        chart,
        extra_charts: vec![],
        levy,
        plan,
        sim: SimSpec { start: Some(start), seed: 1, ..SimSpec::default() },
    };
    let ex = examples::builtin_example(name)?;
    let plan = PlanSpec {
        interior_points: ex.plan.interior_points.len(),
        boundary_points: ex.plan.boundary_points.len(),
        seed: ex.plan.seed,
        cone: ex.plan.cone_generators.as_ref().map(|g| g.iter().map(|v| v.iter().copied().collect()).collect()),
        ..PlanSpec::default()
    };
    let start: Vec<f64> = ex.start.iter().copied().collect();
    Ok(match name {
        "circle" => base(
            ModelSpec::Builtin(BuiltinModel::CircleModel { radial_drift: 0.0 }),
            ChartSpec::Builtin(BuiltinChart::Circle { radius: 1.0 }),
            Some(LevySpec {
                components: vec![ComponentSpec {
                    density: Some(DensityProfile::Uniform { rate: 1.0, lo: 0.0, hi: std::f64::consts::PI }),
                    atoms: vec![],
                    singularity: None,
                    support: Support::TwoSided,
                }],
            }),
            plan,
            start,
        ),
        "ball" => {
            let mut s = base(
                ModelSpec::Builtin(BuiltinModel::BallModel { a: 0.25 }),
                ChartSpec::Builtin(BuiltinChart::BallAnnulus { outer: 1.0, inner: 0.02 }),
                Some(LevySpec { components: vec![power(1.0, 0.5, 0.0, 0.5, Support::Positive)] }),
                plan,
                start,
            );
            s.extra_charts.push(ChartSpec::Affine(AffineChartSpec {
                offset: e(&[0.0, 0.0]),
                basis: vec![e(&[1.0, 0.0]), e(&[0.0, 1.0])],
                ranges: vec![
                    RangeSpec { lo: Some(-0.6), hi: Some(0.6), hi_open: false, period: None },
                    RangeSpec { lo: Some(-0.6), hi: Some(0.6), hi_open: false, period: None },
                ],
                half_space: false,
            }));
            s
        }
        "ou_cone" => base(
            ModelSpec::Builtin(BuiltinModel::OuCone {
                generator: vec![e(&[-1.0, 0.5]), e(&[0.0, -1.0])],
                alpha: e(&[0.75, 0.75]),
                direction: e(&[1.0, 1.0]),
            }),
            ChartSpec::Builtin(BuiltinChart::Cone { generators: vec![e(&[1.0, 0.0]), e(&[0.0, 1.0])] }),
            Some(LevySpec {
                components: vec![ComponentSpec {
                    density: Some(DensityProfile::ExpTilted { scale: 1.0, lambda: 2.0 }),
                    atoms: vec![],
                    singularity: None,
                    support: Support::Positive,
                }],
            }),
            plan,
            start,
        ),
        "subordinator" => base(
            ModelSpec::Builtin(BuiltinModel::Subordinator { alpha: 1.0, sigma: 0.0 }),
            ChartSpec::Builtin(BuiltinChart::Cone { generators: vec![e(&[1.0])] }),
            Some(LevySpec { components: vec![power(0.25, 0.5, 0.0, 1.0, Support::Positive)] }),
            plan,
            start,
        ),
        "hjm_affine_toy" => base(
            ModelSpec::Affine(AffineModelSpec {
                generator: Some(vec![e(&[0.0, 1.0, 0.0]), e(&[0.0, 0.0, 1.0]), e(&[0.0, 0.0, 0.0])]),
                alpha: e(&[0.0, 0.5, 0.0]),
                sigma: vec![e(&[0.2, 0.0, 0.0])],
                jump_directions: vec![e(&[0.0, 1.0, 0.0])],
            }),
            ChartSpec::Affine(AffineChartSpec {
                offset: e(&[0.0, 0.0, 0.0]),
                basis: vec![e(&[0.0, 1.0, 0.0]), e(&[1.0, 0.0, 0.0])],
                ranges: vec![
                    RangeSpec { lo: Some(0.0), hi: None, hi_open: false, period: None },
                    RangeSpec { lo: None, hi: None, hi_open: false, period: None },
                ],
                half_space: true,
            }),
            Some(LevySpec {
                components: vec![ComponentSpec {
                    density: Some(DensityProfile::ExpTilted { scale: 1.0, lambda: 2.0 }),
                    atoms: vec![],
                    singularity: None,
                    support: Support::Positive,
                }],
            }),
            plan,
            start,
        ),
        other => return Err(IjdError::Core(ijd_core::Error::UnknownExample(other.into()))),
    })
}
