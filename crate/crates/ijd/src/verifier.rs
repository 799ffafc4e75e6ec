//! Conditions, both schemes and a step-size refinement table, combined into
//! one verdict.

use ijd_core::checker::{run_full_report, ConditionReport};
use ijd_core::sim::{distance_statistics, DistanceStatistics, Scheme, SimConfig, Simulator};
use serde::{Deserialize, Serialize};

use crate::parallel;
use crate::spec::Resolved;

/// Chart paths of an invariant model must stay this close to the manifold.
pub const CHART_DISTANCE_TOL: f64 = 1e-8;
/// A refinement step counts as shrinking when the mean distance drops by at
/// least this factor.
pub const SHRINK_FACTOR: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeStats {
    pub scheme: Scheme,
    pub dt: f64,
    pub n_paths: usize,
    pub max_dist: f64,
    pub mean_dist: f64,
    pub boundary_violations: usize,
    pub truncated_paths: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl SchemeStats {
    fn new(config: &SimConfig, s: &DistanceStatistics) -> Self {
        Self {
            scheme: config.scheme,
            dt: config.dt,
            n_paths: config.n_paths,
            max_dist: s.max_dist,
            mean_dist: s.mean_dist,
            boundary_violations: s.boundary_violations,
            truncated_paths: s.truncated_paths,
            note: s.note.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub dt: f64,
    /// Mean over paths of the largest distance to the manifold.
    pub mean_max_dist: f64,
    pub max_dist: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictBundle {
    pub model: String,
    pub model_hash: String,
    pub conditions_pass: bool,
    pub report: ConditionReport,
    pub ambient: Option<SchemeStats>,
    pub chart: Option<SchemeStats>,
    pub convergence: Vec<ConvergenceRow>,
    /// Whether the simulations behave as the conditions predict.
    pub agreement: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub discrepancy: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl VerdictBundle {
    pub fn passed(&self) -> bool {
        self.conditions_pass && self.agreement
    }
}

/// Whether every refinement step shrinks the mean distance.
pub fn shrinks(table: &[ConvergenceRow]) -> bool {
    table.len() >= 2 && table.windows(2).all(|w| w[1].mean_max_dist <= SHRINK_FACTOR * w[0].mean_max_dist)
}

fn run(r: &Resolved, config: SimConfig) -> ijd_core::Result<SchemeStats> {
    let sim = Simulator::new(&r.model, &r.atlas, &r.plan, r.start.clone(), config)?;
    let ensemble = parallel::simulate(&sim);
    Ok(SchemeStats::new(&config, &distance_statistics(&ensemble, &r.atlas)))
}

/// Runs the report, the ambient scheme at `dt`, `dt/2`, `dt/4` and the chart
/// scheme at `dt`.
pub fn verify(r: &Resolved) -> VerdictBundle {
    let mut report = run_full_report(&r.model, &r.atlas, &r.plan);
    report.provenance.model_hash = Some(r.hash.clone());
    let conditions_pass = report.passed();
    let mut notes = Vec::new();

    let mut convergence = Vec::new();
    let mut ambient = None;
    for k in 0..3 {
        let config = SimConfig { dt: r.sim.dt / f64::from(1 << k), scheme: Scheme::Ambient, ..r.sim };
        match run(r, config) {
            Ok(s) => {
                convergence.push(ConvergenceRow { dt: config.dt, mean_max_dist: s.mean_dist, max_dist: s.max_dist });
                if k == 0 {
                    ambient = Some(s);
                }
            }
            Err(e) => {
                notes.push(format!("ambient scheme at dt = {}: {e}", config.dt));
                break;
            }
        }
    }
    let chart = match run(r, SimConfig { scheme: Scheme::ChartProjected, ..r.sim }) {
        Ok(s) => Some(s),
        Err(e) => {
            notes.push(format!("chart scheme: {e}"));
            None
        }
    };

    let shrinking = shrinks(&convergence);
    let chart_exact = chart
        .as_ref()
        .is_some_and(|c| c.max_dist < CHART_DISTANCE_TOL && c.boundary_violations == 0);
    let on_manifold = convergence.iter().all(|row| row.max_dist < CHART_DISTANCE_TOL);
    let (agreement, discrepancy) = if conditions_pass {
        // exact ambient paths (e.g. affine models) need no refinement
        let ambient_ok = shrinking || on_manifold;
        let ok = chart_exact && ambient_ok;
        let note = (!ok).then(|| {
            let mut parts = Vec::new();
            if !chart_exact {
                parts.push(match &chart {
                    Some(c) => format!("chart scheme reached distance {:.3e}", c.max_dist),
                    None => "chart scheme did not run".to_string(),
                });
            }
            if !ambient_ok {
                parts.push("ambient distances do not shrink under step refinement".to_string());
            }
            format!("conditions pass but {}", parts.join("; "))
        });
        (ok, note)
    } else {
        let ok = !shrinking && !on_manifold;
        let note = (!ok).then(|| {
            "conditions fail but the ambient paths stay on the manifold or approach it under refinement".to_string()
        });
        (ok, note)
    };

    VerdictBundle {
        model: r.name.clone(),
        model_hash: r.hash.clone(),
        conditions_pass,
        report,
        ambient,
        chart,
        convergence,
        agreement,
        discrepancy,
        notes,
    }
}
