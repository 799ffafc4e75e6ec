//! Path simulation: a jump-adapted Euler scheme in ambient coordinates and a
//! projected Euler scheme in chart coordinates.
//!
//! Jumps with `|x| < ε` are not simulated. Their compensator is left out of
//! the drift as well, so only their (zero-mean) martingale part is lost.

use alloc::{format, string::String, sync::Arc, vec::Vec};

#[allow(unused_imports)]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::checker::{check_jump_closure, check_sigma_tangency, SamplePlan, Verdict};
use crate::geometry::{nearest_parameter, Atlas, Chart};
use crate::levy::{EventSampler, JumpEvent, Region};
use crate::linalg::derive_seed;
use crate::sde::{project_chart_model, pullback_coefficients, ChartModel, JumpDiffusionModel};
use crate::{Error, Result, Vector};

/// Paths are stopped once `‖r‖` exceeds this multiple of `max(1, ‖h₀‖)`.
pub const EXPLOSION_FACTOR: f64 = 1e3;
/// Chart states with `y₁` below this count as boundary violations.
pub const BOUNDARY_VIOLATION_TOL: f64 = 1e-12;
const COMPENSATOR_NODES: usize = 16;
const TABLE_NODES_1D: usize = 513;
const TABLE_NODES_2D: usize = 65;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Ambient,
    ChartProjected,
}

impl Scheme {
    pub fn id(self) -> u32 {
        match self {
            Scheme::Ambient => 0,
            Scheme::ChartProjected => 1,
        }
    }

    pub fn from_id(id: u32) -> Option<Self> {
        match id {
            0 => Some(Scheme::Ambient),
            1 => Some(Scheme::ChartProjected),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Jumps with `|x| < ε` are dropped together with their compensator.
    #[serde(default = "default_epsilon")]
    pub truncation_epsilon: f64,
    pub scheme: Scheme,
}

fn default_epsilon() -> f64 {
    0.01
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { dt: 1e-3, horizon: 1.0, n_paths: 100, seed: 0, truncation_epsilon: 0.01, scheme: Scheme::Ambient }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            return Err(Error::Config(format!("horizon {} must be at least dt {}", self.horizon, self.dt)));
        }
        if !(self.truncation_epsilon > 0.0 && self.truncation_epsilon.is_finite()) {
            return Err(Error::Config("truncation_epsilon must be positive".into()));
        }
        Ok(())
    }

    fn steps(&self) -> usize {
        ((self.horizon / self.dt).round() as usize).max(1)
    }

    fn grid_time(&self, k: usize) -> f64 {
        if k == self.steps() {
            self.horizon
        } else {
            k as f64 * self.dt
        }
    }
}

/// Why a path stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    Exploded { time: f64 },
    LeftDomain { time: f64 },
    ChartEscape { time: f64 },
}

impl Termination {
    pub fn is_truncated(self) -> bool {
        self != Termination::Completed
    }
}

/// One trajectory, stored flat: state `i` occupies `states[i·dim .. (i+1)·dim]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub index: u64,
    pub seed: u64,
    pub dim: usize,
    pub times: Vec<f64>,
    pub states: Vec<f64>,
    /// Chart coordinates (chart scheme only), `chart_dim` values per time.
    pub chart_dim: usize,
    pub chart_states: Vec<f64>,
    /// Jumps actually applied.
    pub jumps: Vec<JumpEvent>,
    pub termination: Termination,
}

impl SamplePath {
    fn new(index: u64, seed: u64, dim: usize, chart_dim: usize) -> Self {
        Self {
            index,
            seed,
            dim,
            times: Vec::new(),
            states: Vec::new(),
            chart_dim,
            chart_states: Vec::new(),
            jumps: Vec::new(),
            termination: Termination::Completed,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, i: usize) -> Vector {
        Vector::from_column_slice(&self.states[i * self.dim..(i + 1) * self.dim])
    }

    pub fn chart_state(&self, i: usize) -> Option<Vector> {
        (self.chart_dim > 0)
            .then(|| Vector::from_column_slice(&self.chart_states[i * self.chart_dim..(i + 1) * self.chart_dim]))
    }

    pub fn final_state(&self) -> Vector {
        self.state(self.len() - 1)
    }

    fn push(&mut self, t: f64, h: &Vector) {
        self.times.push(t);
        self.states.extend(h.iter());
    }

    fn push_chart(&mut self, t: f64, y: &Vector, h: &Vector) {
        self.push(t, h);
        self.chart_states.extend(y.iter());
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEnsemble {
    pub scheme: Scheme,
    pub dim: usize,
    pub config: SimConfig,
    pub paths: Vec<SamplePath>,
}

impl PathEnsemble {
    pub fn truncated(&self) -> usize {
        self.paths.iter().filter(|p| p.termination.is_truncated()).count()
    }
}

/// `ε`-compensator `c_ε(h) = ∫_{|x| ≥ ε} γ(h,x) F(dx)` as a fixed node sum.
#[derive(Debug, Clone)]
struct Compensator {
    nodes: Vec<(Vector, f64)>,
}

impl Compensator {
    fn new(model: &JumpDiffusionModel, epsilon: f64) -> Result<Self> {
        let region = Region::Big(epsilon).intersect(model.jump_region());
        let nodes = model.levy().quadrature_rule(region, COMPENSATOR_NODES, |r| r + r * r)?;
        Ok(Self { nodes })
    }

    fn eval(&self, model: &JumpDiffusionModel, h: &Vector) -> Vector {
        let mut out = Vector::zeros(h.len());
        for (x, w) in &self.nodes {
            out.axpy(*w, &model.gamma(h, x), 1.0);
        }
        out
    }
}

fn jump_sampler(model: &JumpDiffusionModel, epsilon: f64) -> Result<EventSampler> {
    EventSampler::new(model.levy(), Region::Big(epsilon).intersect(model.jump_region()))
}

/// Brownian increments `√τ Z` for `n` drivers.
fn normals(rng: &mut ChaCha8Rng, n: usize, tau: f64) -> Vec<f64> {
    let s = tau.sqrt();
    (0..n).map(|_| s * Distribution::<f64>::sample(&StandardNormal, rng)).collect()
}

/// Jump-adapted Euler scheme for `r` in `ℝ^d`.
#[derive(Debug, Clone)]
pub struct AmbientSimulator {
    model: JumpDiffusionModel,
    config: SimConfig,
    start: Vector,
    compensator: Compensator,
    sampler: EventSampler,
}

impl AmbientSimulator {
    pub fn new(model: &JumpDiffusionModel, start: Vector, config: SimConfig) -> Result<Self> {
        config.validate()?;
        if start.len() != model.dim() {
            return Err(Error::Config("start point has the wrong dimension".into()));
        }
        let compensator = Compensator::new(model, config.truncation_epsilon)?;
        let sampler = jump_sampler(model, config.truncation_epsilon)?;
        Ok(Self { model: model.clone(), config, start, compensator, sampler })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    /// Drift `Ah + α(h) − c_ε(h)` used between jumps.
    pub fn effective_drift(&self, h: &Vector) -> Vector {
        self.model.total_drift(h) - self.compensator.eval(&self.model, h)
    }

    pub fn simulate_path(&self, index: u64) -> SamplePath {
        let seed = derive_seed(self.config.seed, index);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let events = self.sampler.sample_with(self.config.horizon, &mut rng);
        let e = self.model.levy().dim();
        let limit = EXPLOSION_FACTOR * self.start.norm().max(1.0);
        let n_sigma = self.model.diffusions().len();

        let mut path = SamplePath::new(index, seed, self.model.dim(), 0);
        let mut r = self.start.clone();
        let mut t = 0.0;
        path.push(t, &r);
        let mut next_event = 0;
        let steps = self.config.steps();
        'grid: for k in 1..=steps {
            let t_grid = self.config.grid_time(k);
            loop {
                let jump = events.get(next_event).filter(|ev| ev.time <= t_grid).copied();
                let target = jump.map_or(t_grid, |ev| ev.time);
                let tau = target - t;
                if tau > 0.0 {
                    let mut inc = self.effective_drift(&r) * tau;
                    for (j, z) in normals(&mut rng, n_sigma, tau).into_iter().enumerate() {
                        inc.axpy(z, &self.model.sigma(j, &r), 1.0);
                    }
                    r += inc;
                }
                t = target;
                if let Some(ev) = jump {
                    let x = crate::levy::axis_mark(e, ev.component, ev.value);
                    r += self.model.gamma(&r, &x);
                    path.jumps.push(ev);
                    next_event += 1;
                }
                if let Some(reason) = self.stop_reason(&r, t, limit) {
                    if r.iter().all(|v| v.is_finite()) {
                        path.push(t, &r);
                    }
                    path.termination = reason;
                    break 'grid;
                }
                path.push(t, &r);
                if jump.is_none() {
                    break;
                }
            }
        }
        path
    }

    fn stop_reason(&self, r: &Vector, t: f64, limit: f64) -> Option<Termination> {
        if !r.iter().all(|v| v.is_finite()) || r.norm() > limit {
            return Some(Termination::Exploded { time: t });
        }
        if let Some(ball) = self.model.domain() {
            if (r - &ball.center).norm() > ball.radius {
                return Some(Termination::LeftDomain { time: t });
            }
        }
        None
    }

    pub fn simulate(&self) -> PathEnsemble {
        let paths = (0..self.config.n_paths as u64).map(|i| self.simulate_path(i)).collect();
        PathEnsemble { scheme: Scheme::Ambient, dim: self.model.dim(), config: self.config, paths }
    }
}

/// Chart drift `Θ^ε(y) = Θ_{B}(y) − Dg·c_ε(h)`, optionally tabulated on a grid
/// and interpolated (multi-)linearly.
#[derive(Debug, Clone)]
enum ChartDrift {
    Direct,
    Table { lo: Vec<f64>, step: Vec<f64>, n: usize, periodic: Vec<bool>, values: Vec<Option<Vector>> },
}

/// Projected Euler scheme in chart coordinates: `Y ← Π(Y + ΔY)` after every
/// increment, jumps applied through `Γ(y,x) = g(φ(y) + γ) − y`.
#[derive(Debug, Clone)]
pub struct ChartSimulator {
    chart_model: ChartModel,
    config: SimConfig,
    start: Vector,
    compensator: Compensator,
    sampler: EventSampler,
    drift: ChartDrift,
}

impl ChartSimulator {
    /// Refuses models whose volatilities are not tangent or whose jumps leave
    /// the closure of the manifold at the plan's sample points.
    pub fn new(model: &JumpDiffusionModel, atlas: &Atlas, plan: &SamplePlan, start: Vector, config: SimConfig) -> Result<Self> {
        config.validate()?;
        for entries in [check_sigma_tangency(model, atlas, plan), check_jump_closure(model, atlas, plan)] {
            if let Some(bad) = entries.iter().find(|e| e.verdict == Verdict::Fail && !e.condition.is_informational()) {
                return Err(Error::NotInvariant(format!(
                    "{} fails at {:?} (residual {:.3e})",
                    bad.condition.id(),
                    bad.point,
                    bad.residual
                )));
            }
        }
        let chart: Arc<dyn Chart> = atlas.primary().clone();
        let inv = nearest_parameter(chart.as_ref(), &start)?;
        if inv.residual > 1e-8 * (1.0 + start.norm()) {
            return Err(Error::Config("start point is not on the primary chart patch".into()));
        }
        let chart_model = project_chart_model(&pullback_coefficients(chart, model)?);
        let compensator = Compensator::new(model, config.truncation_epsilon)?;
        let sampler = jump_sampler(model, config.truncation_epsilon)?;
        let mut sim = Self { chart_model, config, start: inv.y, compensator, sampler, drift: ChartDrift::Direct };
        sim.drift = sim.tabulate();
        Ok(sim)
    }

    pub fn chart_model(&self) -> &ChartModel {
        &self.chart_model
    }

    pub fn start_parameter(&self) -> &Vector {
        &self.start
    }

    fn exact_drift(&self, y: &Vector) -> Result<Vector> {
        let cm = &self.chart_model;
        let yy = cm.effective(y);
        let h = cm.point(&yy);
        let theta = cm.theta_on(&yy, Region::Small(self.config.truncation_epsilon))?;
        let dg = cm.inverse_derivative(&yy)?;
        Ok(theta - dg * self.compensator.eval(cm.model(), &h))
    }

    // Non-affine charts need a jump integral with one inversion per node, so
    // their drift is tabulated once on bounded one- and two-dimensional boxes.
    fn tabulate(&self) -> ChartDrift {
        let chart = self.chart_model.chart();
        let dom = chart.domain();
        let m = dom.dim();
        let has_jumps = self.chart_model.model().levy().components().iter().any(|c| {
            c.density_profile().is_some() || !c.atoms().is_empty()
        });
        if chart.is_affine() || !has_jumps || !dom.is_bounded() || m > 2 {
            return ChartDrift::Direct;
        }
        let n = if m == 1 { TABLE_NODES_1D } else { TABLE_NODES_2D };
        let ranges = dom.ranges();
        let lo: Vec<f64> = ranges.iter().map(|r| r.lo).collect();
        let periodic: Vec<bool> = ranges.iter().map(|r| r.period.is_some()).collect();
        let step: Vec<f64> = ranges
            .iter()
            .map(|r| r.period.map_or((r.hi - r.lo) / (n - 1) as f64, |p| p / (n - 1) as f64))
            .collect();
        let total = n.pow(m as u32);
        let values = (0..total)
            .map(|idx| {
                let y = Vector::from_fn(m, |c, _| {
                    let i = (idx / n.pow(c as u32)) % n;
                    let v = lo[c] + i as f64 * step[c];
                    if periodic[c] { v } else { v.min(ranges[c].hi) }
                });
                self.exact_drift(&y).ok()
            })
            .collect();
        ChartDrift::Table { lo, step, n, periodic, values }
    }

    fn drift(&self, y: &Vector) -> Result<Vector> {
        let ChartDrift::Table { lo, step, n, periodic, values } = &self.drift else {
            return self.exact_drift(y);
        };
        let m = lo.len();
        let y = self.chart_model.effective(y);
        let mut base = [0usize; 2];
        let mut frac = [0.0; 2];
        for c in 0..m {
            let mut s = (y[c] - lo[c]) / step[c];
            if periodic[c] {
                s = s.rem_euclid((n - 1) as f64);
            }
            let i = (s.floor().max(0.0) as usize).min(n - 2);
            base[c] = i;
            frac[c] = (s - i as f64).clamp(0.0, 1.0);
        }
        let mut out = Vector::zeros(m);
        for corner in 0..(1usize << m) {
            let mut w = 1.0;
            let mut idx = 0;
            for c in 0..m {
                let up = (corner >> c) & 1;
                w *= if up == 1 { frac[c] } else { 1.0 - frac[c] };
                idx += (base[c] + up) * n.pow(c as u32);
            }
            if w == 0.0 {
                continue;
            }
            match &values[idx] {
                Some(v) => out.axpy(w, v, 1.0),
                None => return Err(Error::ChartEscape),
            }
        }
        Ok(out)
    }

    /// Applies `Π` and wraps periodic coordinates; fails outside the box.
    fn settle(&self, y: Vector) -> Result<Vector> {
        let dom = self.chart_model.chart().domain();
        let y = dom.wrap(&self.chart_model.effective(&y));
        if !y.iter().all(|v| v.is_finite()) || !dom.contains(&y, 1e-12) {
            return Err(Error::ChartEscape);
        }
        Ok(y)
    }

    pub fn simulate_path(&self, index: u64) -> SamplePath {
        let seed = derive_seed(self.config.seed, index);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let events = self.sampler.sample_with(self.config.horizon, &mut rng);
        let cm = &self.chart_model;
        let model = cm.model();
        let e = model.levy().dim();
        let n_sigma = model.diffusions().len();
        let m = self.start.len();

        let mut path = SamplePath::new(index, seed, model.dim(), m);
        let mut y = self.start.clone();
        let mut t = 0.0;
        path.push_chart(t, &y, &cm.point(&y));
        let mut next_event = 0;
        'grid: for k in 1..=self.config.steps() {
            let t_grid = self.config.grid_time(k);
            loop {
                let jump = events.get(next_event).filter(|ev| ev.time <= t_grid).copied();
                let target = jump.map_or(t_grid, |ev| ev.time);
                let tau = target - t;
                let step = (|| -> Result<Vector> {
                    let mut y_new = y.clone();
                    if tau > 0.0 {
                        let mut inc = self.drift(&y)? * tau;
                        let sig = cm.sigmas(&y)?;
                        for (s, z) in sig.iter().zip(normals(&mut rng, n_sigma, tau)) {
                            inc.axpy(z, s, 1.0);
                        }
                        y_new = self.settle(&y + inc)?;
                    }
                    if let Some(ev) = jump {
                        let x = crate::levy::axis_mark(e, ev.component, ev.value);
                        y_new = self.settle(&y_new + cm.gamma(&y_new, &x)?)?;
                    }
                    Ok(y_new)
                })();
                t = target;
                match step {
                    Ok(y_new) => y = y_new,
                    Err(_) => {
                        path.termination = Termination::ChartEscape { time: t };
                        break 'grid;
                    }
                }
                if let Some(ev) = jump {
                    path.jumps.push(ev);
                    next_event += 1;
                }
                path.push_chart(t, &y, &cm.point(&y));
                if jump.is_none() {
                    break;
                }
            }
        }
        path
    }

    pub fn simulate(&self) -> PathEnsemble {
        let paths = (0..self.config.n_paths as u64).map(|i| self.simulate_path(i)).collect();
        PathEnsemble { scheme: Scheme::ChartProjected, dim: self.chart_model.model().dim(), config: self.config, paths }
    }
}

/// Either scheme behind one interface.
#[derive(Debug, Clone)]
pub enum Simulator {
    Ambient(AmbientSimulator),
    Chart(ChartSimulator),
}

impl Simulator {
    pub fn new(model: &JumpDiffusionModel, atlas: &Atlas, plan: &SamplePlan, start: Vector, config: SimConfig) -> Result<Self> {
        Ok(match config.scheme {
            Scheme::Ambient => Simulator::Ambient(AmbientSimulator::new(model, start, config)?),
            Scheme::ChartProjected => Simulator::Chart(ChartSimulator::new(model, atlas, plan, start, config)?),
        })
    }

    pub fn config(&self) -> &SimConfig {
        match self {
            Simulator::Ambient(s) => &s.config,
            Simulator::Chart(s) => &s.config,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Simulator::Ambient(s) => s.model.dim(),
            Simulator::Chart(s) => s.chart_model.model().dim(),
        }
    }

    pub fn simulate_path(&self, index: u64) -> SamplePath {
        match self {
            Simulator::Ambient(s) => s.simulate_path(index),
            Simulator::Chart(s) => s.simulate_path(index),
        }
    }

    pub fn simulate(&self) -> PathEnsemble {
        match self {
            Simulator::Ambient(s) => s.simulate(),
            Simulator::Chart(s) => s.simulate(),
        }
    }

    /// Ensemble from paths simulated elsewhere (e.g. in parallel).
    pub fn assemble(&self, mut paths: Vec<SamplePath>) -> PathEnsemble {
        paths.sort_by_key(|p| p.index);
        let config = *self.config();
        PathEnsemble { scheme: config.scheme, dim: self.dim(), config, paths }
    }
}

pub fn simulate_ambient(model: &JumpDiffusionModel, start: Vector, config: SimConfig) -> Result<PathEnsemble> {
    Ok(AmbientSimulator::new(model, start, config)?.simulate())
}

pub fn simulate_chart(
    model: &JumpDiffusionModel,
    atlas: &Atlas,
    plan: &SamplePlan,
    start: Vector,
    config: SimConfig,
) -> Result<PathEnsemble> {
    Ok(ChartSimulator::new(model, atlas, plan, start, config)?.simulate())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceStatistics {
    /// Largest distance to the closure over all paths and times.
    pub max_dist: f64,
    /// Mean over paths of the per-path maximum distance.
    pub mean_dist: f64,
    /// Chart states with `y₁ < −1e-12`.
    pub boundary_violations: usize,
    pub per_path_max: Vec<f64>,
    pub truncated_paths: usize,
    /// Distances that could not be evaluated.
    pub failed_queries: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

pub fn distance_statistics(ensemble: &PathEnsemble, atlas: &Atlas) -> DistanceStatistics {
    let mut per_path = Vec::with_capacity(ensemble.paths.len());
    let mut violations = 0;
    let mut failed = 0;
    for p in &ensemble.paths {
        let mut worst: f64 = 0.0;
        for i in 0..p.len() {
            match atlas.distance_to_closure(&p.state(i)) {
                Ok(d) => worst = worst.max(d),
                Err(_) => failed += 1,
            }
            if let Some(y) = p.chart_state(i) {
                if y[0] < -BOUNDARY_VIOLATION_TOL && atlas.primary().domain().half_space() {
                    violations += 1;
                }
            }
        }
        per_path.push(worst);
    }
    let max_dist = per_path.iter().copied().fold(0.0, f64::max);
    let mean_dist = if per_path.is_empty() { 0.0 } else { per_path.iter().sum::<f64>() / per_path.len() as f64 };
    DistanceStatistics {
        max_dist,
        mean_dist,
        boundary_violations: violations,
        per_path_max: per_path,
        truncated_paths: ensemble.truncated(),
        failed_queries: failed,
        note: (failed > 0).then(|| format!("{failed} distance queries did not converge")),
    }
}
