//! Sampled evaluation of the invariance conditions.
//!
//! Every check walks the points of a [`SamplePlan`] (chart coordinates of the
//! atlas' primary chart) and emits one [`ConditionEntry`] per point. A
//! passing report is evidence at the samples only, not a proof.

use alloc::{format, string::String, vec::Vec};

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::geometry::{project_tangent, tangent_frame, Atlas, Chart, CoordinateRange, TangentFrame};
use crate::levy::{Activity, BSubclass, EventSampler, Region, Support};
use crate::linalg::{expm, left_inverse};
use crate::sde::JumpDiffusionModel;
use crate::{Error, Matrix, Result, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tangency: f64,
    pub inequality: f64,
    pub closure: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { tangency: 1e-8, inequality: 1e-10, closure: 1e-8 }
    }
}

/// Where the conditions are evaluated and with which marks.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePlan {
    pub interior_points: Vec<Vector>,
    /// Chart coordinates with `y₁ = 0`.
    pub boundary_points: Vec<Vector>,
    /// Gauss nodes per dyadic shell used as deterministic marks.
    pub nodes_per_shell: usize,
    /// Marks are taken with `mark_floor ≤ |x| ≤ mark_ceil`.
    pub mark_floor: f64,
    pub mark_ceil: f64,
    /// Additional user marks in `ℝ^e`.
    pub extra_marks: Vec<Vector>,
    /// Number of marks drawn from the (truncated) measure.
    pub random_marks: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    /// Cone generators `v₁…v_m`; enables the cone checks for state-independent models.
    pub cone_generators: Option<Vec<Vector>>,
}

impl SamplePlan {
    pub fn new(interior_points: Vec<Vector>, boundary_points: Vec<Vector>) -> Self {
        Self {
            interior_points,
            boundary_points,
            nodes_per_shell: 8,
            mark_floor: 1e-6,
            mark_ceil: 1e3,
            extra_marks: Vec::new(),
            random_marks: 1000,
            seed: 0,
            tolerances: Tolerances::default(),
            cone_generators: None,
        }
    }

    /// Evenly spread interior points and, for half-space charts, boundary
    /// points with `y₁ = 0`. Unbounded coordinates are sampled in `[lo, lo + 2]`.
    pub fn grid(chart: &dyn Chart, n_interior: usize, n_boundary: usize) -> Self {
        let dom = chart.domain();
        let m = dom.dim();
        let interior = (0..n_interior)
            .map(|i| {
                Vector::from_fn(m, |c, _| {
                    let frac = if c == 0 {
                        (i as f64 + 0.5) / n_interior as f64
                    } else {
                        van_der_corput(i as u64 + 1, PRIMES[(c - 1) % PRIMES.len()])
                    };
                    place(&dom.ranges()[c], frac, c == 0 && dom.half_space())
                })
            })
            .collect();
        let mut boundary: Vec<Vector> = Vec::new();
        if dom.half_space() {
            let count = if m == 1 { n_boundary.min(1) } else { n_boundary };
            for i in 0..count {
                let y = Vector::from_fn(m, |c, _| {
                    if c == 0 {
                        0.0
                    } else {
                        let frac = (i as f64 + 0.5) / count as f64;
                        let frac = if c == 1 { frac } else { van_der_corput(i as u64 + 1, PRIMES[(c - 2) % PRIMES.len()]) };
                        place(&dom.ranges()[c], frac, false)
                    }
                });
                boundary.push(y);
            }
        }
        Self::new(interior, boundary)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = tolerances;
        self
    }

    pub fn with_cone(mut self, generators: Vec<Vector>) -> Self {
        self.cone_generators = Some(generators);
        self
    }
}

const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

fn van_der_corput(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    out
}

fn place(r: &CoordinateRange, frac: f64, keep_off_boundary: bool) -> f64 {
    if let Some(p) = r.period {
        return r.lo + frac * p;
    }
    let (lo, hi) = (if r.lo.is_finite() { r.lo } else { -1.0 }, if r.hi.is_finite() { r.hi } else { r.lo.max(-1.0) + 2.0 });
    let v = lo + frac * (hi - lo);
    if keep_off_boundary {
        v.max(lo + 1e-6)
    } else {
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// The manifold lies in the generator's domain (structural for matrices).
    Domain,
    /// Volatilities are tangent, and boundary-tangent on the boundary.
    SigmaTangent,
    /// `h + γ(h,x)` lies in the closure of the manifold.
    JumpClosure,
    /// `h + γ(h,x)` lies in the manifold itself (informational).
    JumpStrict,
    /// Finite-variation form: `Ah + α − ½ΣDσσ − ∫γF` tangent / inward.
    FvDrift,
    /// `∫|⟨η_h, γ(h,x)⟩|F(dx) < ∞` on the boundary.
    BoundaryJumpVariation,
    /// `Ah + α − ½ΣDσσ − ∫Π_⊥γF` tangent.
    DriftTangent,
    /// `⟨η_h, Ah+α⟩ − ½Σ⟨η_h, Dσσ⟩ − ∫⟨η_h, γ⟩F ≥ 0` on the boundary.
    DriftInward,
    /// `δᵏ` boundary-tangent for infinite-variation components.
    LevyBoundaryLinear,
    /// `Ah + α − ½ΣDσσ − ∫(Δ + Σ_{A∪B} δᵏx_k)F` tangent / inward.
    LevyDrift,
    /// `δᵏ` tangent, inward or boundary-tangent according to the activity class.
    LevyLinearTangent,
    /// `D_xγ(h,0)e_k` admissible for the support of `F_k`.
    JumpDerivativeTangent,
    OuSigmaZero,
    OuJumpCone,
    OuDriftCone,
    OuGeneratorInvariant,
    OuSemigroupCone,
}

impl Condition {
    /// Informational conditions are reported but do not gate the summary.
    pub fn is_informational(self) -> bool {
        matches!(self, Condition::JumpStrict)
    }

    pub fn id(self) -> &'static str {
        match self {
            Condition::Domain => "domain",
            Condition::SigmaTangent => "sigma_tangent",
            Condition::JumpClosure => "jump_closure",
            Condition::JumpStrict => "jump_strict",
            Condition::FvDrift => "fv_drift",
            Condition::BoundaryJumpVariation => "boundary_jump_variation",
            Condition::DriftTangent => "drift_tangent",
            Condition::DriftInward => "drift_inward",
            Condition::LevyBoundaryLinear => "levy_boundary_linear",
            Condition::LevyDrift => "levy_drift",
            Condition::LevyLinearTangent => "levy_linear_tangent",
            Condition::JumpDerivativeTangent => "jump_derivative_tangent",
            Condition::OuSigmaZero => "ou_sigma_zero",
            Condition::OuJumpCone => "ou_jump_cone",
            Condition::OuDriftCone => "ou_drift_cone",
            Condition::OuGeneratorInvariant => "ou_generator_invariant",
            Condition::OuSemigroupCone => "ou_semigroup_cone",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionEntry {
    #[serde(rename = "id")]
    pub condition: Condition,
    /// Ambient point `h` (empty for point-free entries).
    pub point: Vec<f64>,
    pub residual: f64,
    pub verdict: Verdict,
    /// Signed boundary margin, where the condition has one.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl ConditionEntry {
    fn new(condition: Condition, h: &Vector, residual: f64, pass: bool) -> Self {
        Self {
            condition,
            point: h.iter().copied().collect(),
            residual: residual.max(0.0),
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
            margin: None,
            note: None,
        }
    }

    fn not_applicable(condition: Condition, h: &Vector, note: String) -> Self {
        Self {
            condition,
            point: h.iter().copied().collect(),
            residual: 0.0,
            verdict: Verdict::NotApplicable,
            margin: None,
            note: Some(note),
        }
    }

    fn failed(condition: Condition, h: &Vector, err: &Error) -> Self {
        Self {
            condition,
            point: h.iter().copied().collect(),
            residual: f64::INFINITY,
            verdict: Verdict::Fail,
            margin: None,
            note: Some(format!("{err}")),
        }
    }

    fn with_margin(mut self, margin: f64) -> Self {
        self.margin = Some(margin);
        self
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub model_hash: Option<String>,
    pub seed: u64,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    #[serde(rename = "conditions")]
    pub entries: Vec<ConditionEntry>,
    pub summary: Verdict,
    pub scope: String,
    pub provenance: Provenance,
}

pub const REPORT_SCOPE: &str = "sampled verification at the listed points; local verification only";

impl ConditionReport {
    pub fn from_entries(entries: Vec<ConditionEntry>, plan: &SamplePlan) -> Self {
        let pass = entries
            .iter()
            .filter(|e| !e.condition.is_informational())
            .all(|e| e.verdict != Verdict::Fail);
        Self {
            entries,
            summary: if pass { Verdict::Pass } else { Verdict::Fail },
            scope: REPORT_SCOPE.into(),
            provenance: Provenance { model_hash: None, seed: plan.seed, tolerances: plan.tolerances },
        }
    }

    pub fn passed(&self) -> bool {
        self.summary == Verdict::Pass
    }

    pub fn entries_for(&self, c: Condition) -> impl Iterator<Item = &ConditionEntry> {
        self.entries.iter().filter(move |e| e.condition == c)
    }

    /// Largest residual over the applicable entries of a condition.
    pub fn max_residual(&self, c: Condition) -> Option<f64> {
        self.entries_for(c)
            .filter(|e| e.verdict != Verdict::NotApplicable)
            .map(|e| e.residual)
            .fold(None, |acc, r| Some(acc.map_or(r, |a: f64| a.max(r))))
    }

    /// Smallest boundary margin of a condition.
    pub fn min_margin(&self, c: Condition) -> Option<f64> {
        self.entries_for(c)
            .filter_map(|e| e.margin)
            .fold(None, |acc, m| Some(acc.map_or(m, |a: f64| a.min(m))))
    }

    pub fn verdict_of(&self, c: Condition) -> Verdict {
        let mut any = false;
        for e in self.entries_for(c) {
            match e.verdict {
                Verdict::Fail => return Verdict::Fail,
                Verdict::Pass => any = true,
                Verdict::NotApplicable => {}
            }
        }
        if any {
            Verdict::Pass
        } else {
            Verdict::NotApplicable
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionEntry> {
        self.entries
            .iter()
            .filter(|e| e.verdict == Verdict::Fail && !e.condition.is_informational())
    }
}

struct Site {
    h: Vector,
    frame: core::result::Result<TangentFrame, Error>,
}

fn sites(atlas: &Atlas, plan: &SamplePlan) -> Vec<Site> {
    let chart = atlas.primary();
    plan.interior_points
        .iter()
        .chain(plan.boundary_points.iter())
        .map(|y| Site { h: chart.phi(y), frame: tangent_frame(chart.as_ref(), y) })
        .collect()
}

fn perp_norm(frame: &TangentFrame, v: &Vector) -> f64 {
    project_tangent(frame, v).1.norm()
}

fn tangent_ok(frame: &TangentFrame, v: &Vector, tol: f64) -> (f64, bool) {
    let r = perp_norm(frame, v);
    (r, r <= tol * (1.0 + v.norm()))
}

/// Marks at which "for F-almost every x" is tested: shell nodes, user marks
/// and draws from `F` restricted to `|x| ≥ mark_floor` (all of `F` when it
/// has finite activity).
pub fn sample_marks(model: &JumpDiffusionModel, plan: &SamplePlan) -> Vec<Vector> {
    let levy = model.levy();
    let mut marks = levy.mark_nodes(plan.nodes_per_shell, plan.mark_floor, plan.mark_ceil);
    marks.extend(plan.extra_marks.iter().cloned());
    let region = if levy.all_finite_activity() { Region::All } else { Region::Big(plan.mark_floor) };
    if plan.random_marks > 0 {
        if let Ok(sampler) = EventSampler::new(levy, region.intersect(model.jump_region())) {
            marks.extend(sampler.sample_marks(plan.random_marks, plan.seed));
        }
    }
    marks.retain(|x| model.jump_region().contains(x.amax()));
    marks
}

/// The domain condition; with a matrix generator it holds by construction.
pub fn check_domain(model: &JumpDiffusionModel) -> Vec<ConditionEntry> {
    let h = Vector::zeros(model.dim());
    let mut e = ConditionEntry::new(Condition::Domain, &h, 0.0, true)
        .with_note("structural: the generator is a bounded matrix");
    e.point.clear();
    alloc::vec![e]
}

pub fn check_sigma_tangency(model: &JumpDiffusionModel, atlas: &Atlas, plan: &SamplePlan) -> Vec<ConditionEntry> {
    let tol = plan.tolerances.tangency;
    let mut out = Vec::new();
    for site in sites(atlas, plan) {
        let frame = match &site.frame {
            Ok(f) => f,
            Err(e) => {
                out.push(ConditionEntry::failed(Condition::SigmaTangent, &site.h, e));
                continue;
            }
        };
        let mut residual: f64 = 0.0;
        for j in 0..model.diffusions().len() {
            let s = model.sigma(j, &site.h);
            let mut r = perp_norm(frame, &s);
            if let Some(eta) = &frame.inward_normal {
                r = r.max(eta.dot(&s).abs());
            }
            residual = residual.max(r);
        }
        out.push(ConditionEntry::new(Condition::SigmaTangent, &site.h, residual, residual <= tol));
    }
    out
}

/// Closure and strict membership of the jump targets.
pub fn check_jump_closure(model: &JumpDiffusionModel, atlas: &Atlas, plan: &SamplePlan) -> Vec<ConditionEntry> {
    let tol = plan.tolerances.closure;
    let marks = sample_marks(model, plan);
    let mut out = Vec::new();
    for site in sites(atlas, plan) {
        let mut worst: f64 = 0.0;
        let mut outside = 0usize;
        let mut err = None;
        for x in &marks {
            let target = &site.h + model.gamma(&site.h, x);
            match atlas.distance_to_closure(&target) {
                Ok(d) => worst = worst.max(d),
                Err(e) => {
                    err.get_or_insert(e);
                }
            }
            match atlas.contains(&target, tol) {
                Ok(true) => {}
                _ => outside += 1,
            }
        }
        match err {
            Some(e) => out.push(ConditionEntry::failed(Condition::JumpClosure, &site.h, &e)),
            None => out.push(ConditionEntry::new(Condition::JumpClosure, &site.h, worst, worst <= tol)),
        }
        let frac = if marks.is_empty() { 0.0 } else { outside as f64 / marks.len() as f64 };
        out.push(
            ConditionEntry::new(Condition::JumpStrict, &site.h, frac, outside == 0)
                .with_note(format!("{outside} of {} jump targets outside the manifold proper", marks.len())),
        );
    }
    out
}

fn has_infinite_variation(model: &JumpDiffusionModel) -> bool {
    model.levy().classes().iter().any(|c| c.class == Activity::C)
}

/// Drift condition in finite-variation form.
pub fn check_fv_drift(model: &JumpDiffusionModel, atlas: &Atlas, plan: &SamplePlan) -> Vec<ConditionEntry> {
    let tol = plan.tolerances;
    let mut out = Vec::new();
    let infinite_variation = has_infinite_variation(model);
    for site in sites(atlas, plan) {
        let frame = match &site.frame {
            Ok(f) => f,
            Err(e) => {
                out.push(ConditionEntry::failed(Condition::FvDrift, &site.h, e));
                continue;
            }
        };
        if infinite_variation {
            out.push(ConditionEntry::not_applicable(
                Condition::FvDrift,
                &site.h,
                "infinite-variation jump measure; see the general drift conditions".into(),
            ));
            continue;
        }
        let compensator = match model.jump_integral(&site.h, Region::All) {
            Ok(c) => c,
            Err(_) => {
                out.push(ConditionEntry::not_applicable(
                    Condition::FvDrift,
                    &site.h,
                    "∫γF does not converge; see the general drift conditions".into(),
                ));
                continue;
            }
        };
        let v = model.total_drift(&site.h) - model.stratonovich_correction(&site.h) - compensator;
        let (perp, tangent) = tangent_ok(frame, &v, tol.tangency);
        let entry = match &frame.inward_normal {
            Some(eta) => {
                let margin = eta.dot(&v);
                let residual = perp.max(-margin);
                ConditionEntry::new(Condition::FvDrift, &site.h, residual, tangent && margin >= -tol.inequality)
                    .with_margin(margin)
            }
            None => ConditionEntry::new(Condition::FvDrift, &site.h, perp, tangent),
        };
        out.push(entry);
    }
    out
}

/// Drift conditions in the form that also covers infinite variation:
/// boundary jump variation, tangency of the corrected drift and the
/// boundary inequality.
pub fn check_general_drift(model: &JumpDiffusionModel, atlas: &Atlas, plan: &SamplePlan) -> Vec<ConditionEntry> {
    let tol = plan.tolerances;
    let d = model.dim();
    let mut out = Vec::new();
    for site in sites(atlas, plan) {
        let frame = match &site.frame {
            Ok(f) => f,
            Err(e) => {
                out.push(ConditionEntry::failed(Condition::DriftTangent, &site.h, e));
                continue;
            }
        };
        let h = &site.h;
        let base = model.total_drift(h) - model.stratonovich_correction(h);

        let mut variation_ok = true;
        if let Some(eta) = &frame.inward_normal {
            match model.levy().integrate_scalar(Region::All.intersect(model.jump_region()), |x| eta.dot(&model.gamma(h, x)).abs()) {
                Ok(v) => out.push(ConditionEntry::new(Condition::BoundaryJumpVariation, h, 0.0, true).with_margin(v)),
                Err(Error::NonIntegrable { partial }) => {
                    variation_ok = false;
                    out.push(
                        ConditionEntry::new(Condition::BoundaryJumpVariation, h, partial, false)
                            .with_note("shell sums of ∫|⟨η,γ⟩|F do not decay"),
                    );
                }
                Err(e) => {
                    variation_ok = false;
                    out.push(ConditionEntry::failed(Condition::BoundaryJumpVariation, h, &e));
                }
            }
        }

        let normal_part = model.integrate(d, Region::All, |x| project_tangent(frame, &model.gamma(h, x)).1);
        match normal_part {
            Ok(np) => {
                let w = &base - np;
                let (perp, ok) = tangent_ok(frame, &w, tol.tangency);
                out.push(ConditionEntry::new(Condition::DriftTangent, h, perp, ok));
            }
            Err(e) => out.push(
                ConditionEntry::failed(Condition::DriftTangent, h, &e)
                    .with_note("∫Π_⊥γF diverges: jump targets leave the manifold to first order"),
            ),
        }

        if let Some(eta) = &frame.inward_normal {
            if !variation_ok {
                out.push(ConditionEntry::not_applicable(
                    Condition::DriftInward,
                    h,
                    "boundary jump variation is infinite".into(),
                ));
                continue;
            }
            let jumps = model
                .levy()
                .integrate_scalar(Region::All.intersect(model.jump_region()), |x| eta.dot(&model.gamma(h, x)));
            match jumps {
                Ok(j) => {
                    let margin = eta.dot(&base) - j;
                    out.push(
                        ConditionEntry::new(Condition::DriftInward, h, -margin, margin >= -tol.inequality)
                            .with_margin(margin),
                    );
                }
                Err(e) => out.push(ConditionEntry::failed(Condition::DriftInward, h, &e)),
            }
        }
    }
    out
}

/// Conditions in terms of the decomposition `γ = Δ + Σ δᵏ x_k`.
pub fn check_levy_conditions(model: &JumpDiffusionModel, atlas: &Atlas, plan: &SamplePlan) -> Result<Vec<ConditionEntry>> {
    let dec = model.decomposition().ok_or(Error::MissingDecomposition)?;
    let tol = plan.tolerances;
    let d = model.dim();
    let classes = model.levy().classes();
    let mut out = Vec::new();
    for site in sites(atlas, plan) {
        let h = &site.h;
        let frame = match &site.frame {
            Ok(f) => f,
            Err(e) => {
                out.push(ConditionEntry::failed(Condition::LevyDrift, h, e));
                continue;
            }
        };
        let eta = frame.inward_normal.as_ref();

        for (k, class) in classes.iter().enumerate() {
            let delta = dec.delta(k, h);
            let perp = perp_norm(frame, &delta);
            let along = eta.map(|n| n.dot(&delta));
            if class.class == Activity::C {
                if let Some(a) = along {
                    let r = perp + a.abs();
                    out.push(ConditionEntry::new(Condition::LevyBoundaryLinear, h, r, r <= tol.tangency).with_margin(a));
                }
            }
            let entry = match (class.class, along) {
                (Activity::A, _) => ConditionEntry::not_applicable(
                    Condition::LevyLinearTangent,
                    h,
                    format!("component {k} has finite activity"),
                ),
                (_, None) => {
                    let ok = perp <= tol.tangency * (1.0 + delta.norm());
                    ConditionEntry::new(Condition::LevyLinearTangent, h, perp, ok)
                }
                (Activity::C, Some(a)) => {
                    let r = perp.max(a.abs());
                    ConditionEntry::new(Condition::LevyLinearTangent, h, r, r <= tol.tangency).with_margin(a)
                }
                (Activity::B, Some(a)) => {
                    let tangent = perp <= tol.tangency * (1.0 + delta.norm());
                    let (r, ok) = match class.b_subclass {
                        BSubclass::BPlus => (perp.max(-a), tangent && a >= -tol.inequality),
                        BSubclass::BMinus => (perp.max(a), tangent && a <= tol.inequality),
                        _ => (perp.max(a.abs()), tangent && a.abs() <= tol.tangency),
                    };
                    ConditionEntry::new(Condition::LevyLinearTangent, h, r, ok).with_margin(a)
                }
            };
            out.push(entry);
        }

        // drift with the linear parts of the finite-variation components removed
        let remainder = model.integrate(d, Region::All, |x| dec.remainder(h, x));
        let mut linear = Vector::zeros(d);
        let mut err = remainder.as_ref().err().cloned();
        for (k, class) in classes.iter().enumerate() {
            if class.class == Activity::C {
                continue;
            }
            match model.levy().integrate_component(k, 1, Region::All.intersect(model.jump_region()), |xi| {
                Vector::from_element(1, xi)
            }) {
                Ok(m) => linear.axpy(m[0], &dec.delta(k, h), 1.0),
                Err(e) => {
                    err.get_or_insert(e);
                }
            }
        }
        if let Some(e) = err {
            out.push(ConditionEntry::failed(Condition::LevyDrift, h, &e));
            continue;
        }
        let w = model.total_drift(h) - model.stratonovich_correction(h) - remainder.expect("checked") - linear;
        let (perp, tangent) = tangent_ok(frame, &w, tol.tangency);
        let entry = match eta {
            Some(n) => {
                let margin = n.dot(&w);
                ConditionEntry::new(Condition::LevyDrift, h, perp.max(-margin), tangent && margin >= -tol.inequality)
                    .with_margin(margin)
            }
            None => ConditionEntry::new(Condition::LevyDrift, h, perp, tangent),
        };
        out.push(entry);
    }
    Ok(out)
}

/// `D_xγ(h, 0)e_k` by central differences.
pub fn jump_derivative(model: &JumpDiffusionModel, h: &Vector, k: usize) -> Vector {
    let e = model.levy().dim();
    let s = f64::EPSILON.cbrt();
    let mut xp = Vector::zeros(e);
    let mut xm = Vector::zeros(e);
    xp[k] = s;
    xm[k] = -s;
    // the raw jump field, so that a jump-region restriction does not cut the stencil
    let jump = model.jump_field();
    (jump(h, &xp) - jump(h, &xm)) / (2.0 * s)
}

/// Derivative condition at `x = 0` for components whose support accumulates at 0.
pub fn check_diff_tangency(model: &JumpDiffusionModel, atlas: &Atlas, plan: &SamplePlan) -> Vec<ConditionEntry> {
    let tol = plan.tolerances;
    let comps = model.levy().components();
    let mut out = Vec::new();
    for site in sites(atlas, plan) {
        let h = &site.h;
        let frame = match &site.frame {
            Ok(f) => f,
            Err(e) => {
                out.push(ConditionEntry::failed(Condition::JumpDerivativeTangent, h, e));
                continue;
            }
        };
        for (k, comp) in comps.iter().enumerate() {
            let reaches_zero = comp
                .density_profile()
                .is_some_and(|d| d.range().0 == 0.0)
                && model.jump_region().bounds().0 == 0.0;
            if !reaches_zero {
                out.push(ConditionEntry::not_applicable(
                    Condition::JumpDerivativeTangent,
                    h,
                    format!("support of component {k} stays away from 0"),
                ));
                continue;
            }
            let zero = model.jump_field()(h, &Vector::zeros(comps.len()));
            if zero.norm() > 1e-10 {
                out.push(ConditionEntry::not_applicable(
                    Condition::JumpDerivativeTangent,
                    h,
                    "γ(h, 0) ≠ 0".into(),
                ));
                continue;
            }
            let dv = jump_derivative(model, h, k);
            let (perp, tangent) = tangent_ok(frame, &dv, 1e-6_f64.max(tol.tangency));
            let entry = match &frame.inward_normal {
                None => ConditionEntry::new(Condition::JumpDerivativeTangent, h, perp, tangent),
                Some(eta) => {
                    let a = eta.dot(&dv);
                    let (r, ok) = match comp.support() {
                        Support::Positive => (perp.max(-a), tangent && a >= -tol.inequality),
                        Support::Negative => (perp.max(a), tangent && a <= tol.inequality),
                        Support::TwoSided => (perp.max(a.abs()), tangent && a.abs() <= 1e-6_f64.max(tol.tangency)),
                    };
                    ConditionEntry::new(Condition::JumpDerivativeTangent, h, r, ok).with_margin(a)
                }
            };
            out.push(entry);
        }
    }
    out
}

/// Conditions for state-independent coefficients on the cone spanned by `generators`.
pub fn check_ou_cone(model: &JumpDiffusionModel, generators: &[Vector], plan: &SamplePlan) -> Vec<ConditionEntry> {
    let tol = plan.tolerances;
    let d = model.dim();
    let origin = Vector::zeros(d);
    let v = Matrix::from_columns(generators);
    let Some(vinv) = left_inverse(&v) else {
        let e = Error::DegenerateChart { ratio: 0.0 };
        return alloc::vec![ConditionEntry::failed(Condition::OuGeneratorInvariant, &origin, &e)];
    };
    // distance outside the cone via coordinates in the generator basis
    let cone_residual = |w: &Vector| -> (f64, f64) {
        let c = &vinv * w;
        let off_span = (w - &v * &c).norm();
        let min = c.iter().copied().fold(f64::INFINITY, f64::min);
        (off_span.max(-min), min)
    };
    let mut out = Vec::new();

    let sigma = model.diffusions().iter().map(|s| s.eval(&origin).norm()).fold(0.0, f64::max);
    out.push(ConditionEntry::new(Condition::OuSigmaZero, &origin, sigma, sigma == 0.0));

    let marks = sample_marks(model, plan);
    let mut worst: f64 = 0.0;
    for x in &marks {
        let (r, _) = cone_residual(&model.gamma(&origin, x));
        worst = worst.max(r);
    }
    out.push(ConditionEntry::new(Condition::OuJumpCone, &origin, worst, worst <= tol.closure));

    match model.jump_integral(&origin, Region::All) {
        Ok(comp) => {
            let w = model.alpha(&origin) - comp;
            let (r, min) = cone_residual(&w);
            out.push(
                ConditionEntry::new(Condition::OuDriftCone, &w, r, r <= tol.inequality)
                    .with_margin(min)
                    .with_note("point is α − ∫γF"),
            );
        }
        Err(e) => out.push(
            ConditionEntry::failed(Condition::OuDriftCone, &origin, &e).with_note("∫γF must be finite"),
        ),
    }

    let a = model.generator();
    let mut span: f64 = 0.0;
    for g in generators {
        let av = a * g;
        span = span.max((&av - &v * (&vinv * &av)).norm());
    }
    out.push(ConditionEntry::new(Condition::OuGeneratorInvariant, &origin, span, span <= tol.tangency));

    let mut semigroup: f64 = 0.0;
    for p in -10..=4 {
        let t = 2f64.powi(p);
        let et = expm(&(a * t));
        for g in generators {
            let (r, _) = cone_residual(&(&et * g));
            semigroup = semigroup.max(r);
        }
    }
    out.push(
        ConditionEntry::new(Condition::OuSemigroupCone, &origin, semigroup, semigroup <= tol.tangency)
            .with_note("e^{tA}v_i tested for t = 2^-10 … 2^4"),
    );
    out
}

/// Runs every applicable check.
pub fn run_full_report(model: &JumpDiffusionModel, atlas: &Atlas, plan: &SamplePlan) -> ConditionReport {
    let mut entries = check_domain(model);
    entries.extend(check_sigma_tangency(model, atlas, plan));
    entries.extend(check_jump_closure(model, atlas, plan));
    entries.extend(check_fv_drift(model, atlas, plan));
    entries.extend(check_general_drift(model, atlas, plan));
    if model.decomposition().is_some() {
        match check_levy_conditions(model, atlas, plan) {
            Ok(e) => entries.extend(e),
            Err(e) => entries.push(ConditionEntry::failed(Condition::LevyDrift, &Vector::zeros(model.dim()), &e)),
        }
    }
    entries.extend(check_diff_tangency(model, atlas, plan));
    if let Some(gens) = &plan.cone_generators {
        entries.extend(check_ou_cone(model, gens, plan));
    }
    ConditionReport::from_entries(entries, plan)
}
