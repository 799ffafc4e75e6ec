//! Acceptance gate: one line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use ijd::parallel;
use ijd_core::checker::{
    check_diff_tangency, check_fv_drift, check_general_drift, check_sigma_tangency, run_full_report, Condition,
    ConditionEntry, Verdict,
};
use ijd_core::examples::{
    ball_atlas, ball_example, ball_measure, builtin_example, circle_example, circle_model, circle_power_measure,
    circle_uniform_measure, ou_cone_example, subordinator_example,
};
use ijd_core::geometry::{tangent_frame, AffineChart, BallAnnulusChart, Chart, CircleChart, CoordinateRange, DomainBox};
use ijd_core::levy::{DensityProfile, LevyComponent, LevyMeasure, Region, Support};
use ijd_core::sde::{Diffusion, JumpDiffusionModel, LevyDecomposition, VectorField};
use ijd_core::sim::{distance_statistics, PathEnsemble, Scheme, SimConfig, Simulator, Termination};
use ijd_core::{Matrix, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);

fn v(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

fn rotation() -> Matrix {
    Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])
}

fn run(example: &ijd_core::examples::Example, start: Vector, config: SimConfig) -> PathEnsemble {
    let sim = Simulator::new(&example.model, &example.atlas, &example.plan, start, config).expect("simulator");
    parallel::simulate(&sim)
}

fn config(dt: f64, horizon: f64, n_paths: usize, seed: u64, scheme: Scheme) -> SimConfig {
    SimConfig { dt, horizon, n_paths, seed, scheme, ..SimConfig::default() }
}

fn max_residual(entries: &[ConditionEntry]) -> f64 {
    entries.iter().map(|e| e.residual).fold(0.0, f64::max)
}

fn criterion_1() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let measures = [
        ("unit density", circle_uniform_measure()),
        ("|x|^-2.2", circle_power_measure(1.2, 1e-6).expect("measure")),
    ];
    for (label, levy) in measures {
        let ex = circle_example(levy).expect("circle");
        let report = run_full_report(&ex.model, &ex.atlas, &ex.plan);
        let worst = max_residual(&report.entries);
        let points = ex.plan.interior_points.len();

        // tangential drift must be the rotation field (h₂, −h₁)
        let mut anchor: f64 = 0.0;
        let chart = ex.atlas.primary();
        for y in &ex.plan.interior_points {
            let frame = tangent_frame(chart.as_ref(), y).expect("frame");
            let h = chart.phi(y);
            let p = frame.projector();
            let normal = Matrix::identity(2, 2) - &p;
            let jumps = ex.model.integrate(2, Region::All, |x| &normal * ex.model.gamma(&h, x)).expect("integral");
            let w = ex.model.total_drift(&h) - ex.model.stratonovich_correction(&h) - jumps;
            anchor = anchor.max((w - v(&[h[1], -h[0]])).norm());
        }
        let pass = report.passed() && worst < 1e-8 && anchor < 1e-8 && points == 64;
        ok &= pass;
        notes.push(format!("{label}: summary {} max residual {worst:.2e} drift vs (h2,-h1) {anchor:.2e}", report.passed()));
    }
    (ok, notes.join("; "))
}

fn criterion_2() -> Outcome {
    let ex = circle_example(circle_uniform_measure()).expect("circle");
    let base = circle_model(circle_uniform_measure()).expect("circle");

    let drift = base.drift_field();
    let tampered_drift = base.clone().with_drift(move |h| drift(h) + h * 1e-2);
    let general = check_general_drift(&tampered_drift, &ex.atlas, &ex.plan);
    let tangent: Vec<_> = general.iter().filter(|e| e.condition == Condition::DriftTangent).cloned().collect();
    let drift_fail = tangent.iter().any(|e| e.verdict == Verdict::Fail);
    let drift_res = max_residual(&tangent);

    let tampered_sigma = base
        .clone()
        .with_diffusions(vec![Diffusion::linear(rotation() + Matrix::identity(2, 2) * 1e-2)]);
    let sigma = check_sigma_tangency(&tampered_sigma, &ex.atlas, &ex.plan);
    let sigma_fail = sigma.iter().any(|e| e.verdict == Verdict::Fail);
    let sigma_res = max_residual(&sigma);

    let within = |r: f64| (0.9e-2..=1.1e-2).contains(&r);
    let ok = drift_fail && sigma_fail && within(drift_res) && within(sigma_res);
    (ok, format!("drift_tangent fails with residual {drift_res:.4e}; sigma_tangent fails with residual {sigma_res:.4e}"))
}

/// Ball model with `∫x²F = (2/3)·0.5^{3/2}` in closed form.
fn ball_closed_form(a: f64) -> JumpDiffusionModel {
    let second = 2.0 / 3.0 * 0.5f64.powf(1.5);
    let rate = a + 0.5 + 2.0 * second;
    let zero: VectorField = Arc::new(|h: &Vector| Vector::zeros(h.len()));
    JumpDiffusionModel::new(2, move |h| h * -rate)
        .with_diffusion(Diffusion::linear(rotation()))
        .with_jumps(ball_measure(), |h, x| h * (-2.0 * x[0] * x[0]))
        .with_decomposition(LevyDecomposition::new(|h, x| h * (-2.0 * x[0] * x[0]), vec![zero]))
}

fn criterion_3() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let plan = ball_example(0.0).expect("ball").plan;
    let atlas = ball_atlas();
    for a in [0.0, 0.25, 1.0] {
        let model = ball_closed_form(a);
        let entries = check_general_drift(&model, &atlas, &plan);
        let margin = entries
            .iter()
            .filter(|e| e.condition == Condition::DriftInward)
            .filter_map(|e| e.margin)
            .fold(f64::INFINITY, f64::min);
        let pass = (margin - a).abs() <= 1e-6;
        ok &= pass;
        notes.push(format!("a={a}: margin {margin:.9}"));
    }
    (ok, notes.join("; "))
}

fn criterion_4() -> Outcome {
    let t0 = Instant::now();
    let mut ok = true;
    let mut notes = Vec::new();
    let circle = builtin_example("circle").expect("circle");
    let ball = ball_example(0.0).expect("ball");
    // the ball run starts on the boundary sphere
    for (ex, start) in [(&circle, v(&[1.0, 0.0])), (&ball, v(&[1.0, 0.0]))] {
        let ens = run(ex, start, config(1e-3, 1.0, 1000, 4, Scheme::ChartProjected));
        let stats = distance_statistics(&ens, &ex.atlas);
        let pass = stats.max_dist < 1e-8 && stats.boundary_violations == 0 && ens.paths.len() == 1000;
        ok &= pass;
        notes.push(format!(
            "{}: max dist {:.2e}, violations {}, truncated {}",
            ex.name, stats.max_dist, stats.boundary_violations, stats.truncated_paths
        ));
    }
    let secs = t0.elapsed().as_secs_f64();
    ok &= secs < 30.0;
    notes.push(format!("{secs:.1} s"));
    (ok, notes.join("; "))
}

fn criterion_5() -> Outcome {
    let ex = builtin_example("circle").expect("circle");
    let means: Vec<f64> = [4e-3, 2e-3, 1e-3]
        .iter()
        .map(|&dt| {
            let ens = run(&ex, v(&[1.0, 0.0]), config(dt, 1.0, 200, 5, Scheme::Ambient));
            distance_statistics(&ens, &ex.atlas).mean_dist
        })
        .collect();
    let ratios: Vec<f64> = means.windows(2).map(|w| w[0] / w[1]).collect();
    let ok = ratios.iter().all(|&r| r >= 1.3);
    (ok, format!("mean max dist {means:.3?}, ratios {ratios:.3?}"))
}

fn negative_increment(ens: &PathEnsemble) -> Vec<bool> {
    ens.paths
        .iter()
        .map(|p| p.states.windows(2).any(|w| w[1] - w[0] < -1e-12))
        .collect()
}

fn criterion_6() -> Outcome {
    let compliant = subordinator_example(1.0, 0.0).expect("subordinator");
    let drift = 1.0 - compliant.model.levy().integrate_scalar(Region::All, |x| x[0]).expect("mean");
    let ens = run(&compliant, v(&[0.0]), config(1e-3, 1.0, 1000, 6, Scheme::Ambient));
    let worst = ens
        .paths
        .iter()
        .flat_map(|p| p.states.windows(2).map(|w| w[1] - w[0]))
        .fold(f64::INFINITY, f64::min);

    let noisy = subordinator_example(1.0, 0.3).expect("subordinator");
    let ens = run(&noisy, v(&[0.0]), config(1e-3, 1.0, 1000, 6, Scheme::Ambient));
    let flags = negative_increment(&ens);
    let fraction = flags.iter().filter(|&&b| b).count() as f64 / flags.len() as f64;

    let ok = (drift - 0.5).abs() < 1e-9 && worst >= -1e-12 && fraction >= 0.05;
    (ok, format!("α − ∫xF = {drift:.6}; smallest increment {worst:.3e}; σ = 0.3: {:.1}% of paths decrease", 100.0 * fraction))
}

fn criterion_7() -> Outcome {
    let good = ou_cone_example(true).expect("cone");
    let report = run_full_report(&good.model, &good.atlas, &good.plan);
    let semigroup = report.verdict_of(Condition::OuSemigroupCone);
    let ens = run(&good, v(&[0.0, 0.0]), config(1e-3, 2.0, 1000, 7, Scheme::ChartProjected));
    let min_coord = ens.paths.iter().flat_map(|p| p.states.iter().copied()).fold(f64::INFINITY, f64::min);

    let bad = ou_cone_example(false).expect("cone");
    let bad_report = run_full_report(&bad.model, &bad.atlas, &bad.plan);
    let drift_margin = bad_report.min_margin(Condition::OuDriftCone).unwrap_or(f64::NAN);
    let ens = run(&bad, v(&[1.0, 1.0]), config(1e-3, 2.0, 1000, 7, Scheme::Ambient));
    let exits = ens
        .paths
        .iter()
        .filter(|p| matches!(p.termination, Termination::LeftDomain { .. }) || p.states.iter().any(|&x| x < -1e-12))
        .count();
    let fraction = exits as f64 / ens.paths.len() as f64;

    let ok = report.passed()
        && semigroup == Verdict::Pass
        && min_coord >= -1e-12
        && !bad_report.passed()
        && (drift_margin + 0.5).abs() < 1e-6
        && fraction > 0.05;
    (
        ok,
        format!(
            "compliant: report {} semigroup {semigroup:?}, min coordinate {min_coord:.3e}; violating: margin {drift_margin:.6}, exit fraction {:.1}%",
            report.passed(),
            100.0 * fraction
        ),
    )
}

fn criterion_8() -> Outcome {
    let e1 = v(&[1.0, 0.0, 0.0]);
    let e2 = v(&[0.0, 1.0, 0.0]);
    let charts: Vec<Arc<dyn Chart>> = vec![
        Arc::new(CircleChart::unit()),
        Arc::new(BallAnnulusChart::new(1.0, 0.02).expect("annulus")),
        Arc::new(AffineChart::cone(&[v(&[1.0, 0.0]), v(&[0.0, 1.0])]).expect("cone")),
        Arc::new(AffineChart::cone(&[v(&[1.0])]).expect("half line")),
        Arc::new(AffineChart::interval(0.0, 1.0, true).expect("interval")),
        Arc::new(
            AffineChart::new(
                "half_plane",
                Vector::zeros(3),
                Matrix::from_columns(&[e2, e1]),
                DomainBox::new(vec![CoordinateRange::half_line(), CoordinateRange::line()], true).expect("box"),
            )
            .expect("half plane"),
        ),
        ball_atlas().charts()[1].clone(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut idem, mut ortho, mut unit, mut decomp) = (0f64, 0f64, 0f64, 0f64);
    let mut min_inward = f64::INFINITY;
    let (mut points, mut boundary) = (0, 0);
    for chart in &charts {
        let dom = chart.domain();
        for i in 0..1000 {
            let mut y = Vector::from_fn(dom.dim(), |c, _| {
                let r = dom.ranges()[c];
                let hi = if r.hi.is_finite() { r.hi } else { r.lo.max(-2.0) + 4.0 };
                let lo = if r.lo.is_finite() { r.lo } else { hi - 4.0 };
                lo + (hi - lo) * rng.random::<f64>() * 0.999
            });
            if dom.half_space() && i % 4 == 0 {
                y[0] = dom.ranges()[0].lo;
            }
            let frame = tangent_frame(chart.as_ref(), &y).expect("frame");
            let p = frame.projector();
            idem = idem.max((&p * &p - &p).abs().max());
            let m = frame.basis.ncols();
            ortho = ortho.max((frame.basis.transpose() * &frame.basis - Matrix::identity(m, m)).abs().max());
            points += 1;
            if let (Some(eta), Some(bb)) = (&frame.inward_normal, &frame.boundary_basis) {
                boundary += 1;
                unit = unit.max((eta.norm() - 1.0).abs());
                min_inward = min_inward.min(eta.dot(&frame.jacobian.column(0)));
                let w = &frame.jacobian * Vector::from_fn(m, |_, _| rng.random::<f64>() * 2.0 - 1.0);
                let rest = &w - eta * eta.dot(&w) - bb * (bb.transpose() * &w);
                decomp = decomp.max(rest.norm());
            }
        }
    }
    let ok = idem < 1e-12 && ortho < 1e-12 && unit < 1e-12 && min_inward > 0.0 && decomp < 1e-10 && boundary > 0;
    (
        ok,
        format!(
            "{points} points ({boundary} boundary): idempotence {idem:.1e}, orthonormality {ortho:.1e}, |η|−1 {unit:.1e}, min ⟨η,Dφe1⟩ {min_inward:.3}, decomposition {decomp:.1e}"
        ),
    )
}

/// Trapezoid rule in `u = ln x` on `n` nodes.
fn log_trapezoid(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let (a, b) = (lo.ln(), hi.ln());
    let h = (b - a) / (n - 1) as f64;
    let g = |i: usize| {
        let x = (a + i as f64 * h).exp();
        f(x) * x
    };
    let inner: f64 = (1..n - 1).map(g).sum();
    h * (inner + 0.5 * (g(0) + g(n - 1)))
}

fn criterion_9() -> Outcome {
    const NODES: usize = 1_000_000;
    struct Case {
        label: &'static str,
        profile: DensityProfile,
        beta: Option<f64>,
        support: Support,
        density: fn(f64) -> f64,
        lo: f64,
        hi: f64,
        closed: f64,
    }
    let cases = [
        Case {
            label: "exp-tilted λ=2",
            profile: DensityProfile::ExpTilted { scale: 1.0, lambda: 2.0 },
            beta: None,
            support: Support::Positive,
            density: |x| (-2.0 * x).exp(),
            lo: 1e-12,
            hi: 60.0,
            closed: 0.25,
        },
        Case {
            label: "x^-1.5 on (0,1]",
            profile: DensityProfile::Power { scale: 1.0, beta: 0.5, lo: 0.0, hi: Some(1.0) },
            beta: Some(0.5),
            support: Support::Positive,
            density: |x| x.powf(-1.5),
            lo: 1e-16,
            hi: 1.0,
            closed: 2.0 / 3.0,
        },
        Case {
            label: "|x|^-2.2 on (1e-6,π]",
            profile: DensityProfile::Power { scale: 1.0, beta: 1.2, lo: 1e-6, hi: Some(PI) },
            beta: Some(1.2),
            support: Support::TwoSided,
            density: |x| x.powf(-2.2),
            lo: 1e-6,
            hi: PI,
            closed: 2.0 * (PI.powf(0.8) - 1e-6f64.powf(0.8)) / 0.8,
        },
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for c in cases {
        let sides = if c.support == Support::TwoSided { 2.0 } else { 1.0 };
        let density = c.density;
        let oracle = sides * log_trapezoid(|x| x * x * density(x), c.lo, c.hi, NODES);
        let levy = LevyMeasure::new(vec![LevyComponent::new(Some(c.profile), vec![], c.beta, c.support).expect("component")]);
        let value = levy.integrate_scalar(Region::All, |x| x[0] * x[0]).expect("integral");
        let rel = ((value - oracle) / oracle).abs();
        let oracle_vs_closed = ((oracle - c.closed) / c.closed).abs();
        ok &= rel < 1e-6 && oracle_vs_closed < 1e-6;
        notes.push(format!("{}: {value:.10} vs oracle {oracle:.10} (rel {rel:.1e})", c.label));
    }
    (ok, notes.join("; "))
}

fn combined(entries: &[ConditionEntry], conditions: &[Condition]) -> (bool, Option<f64>) {
    let relevant: Vec<_> = entries.iter().filter(|e| conditions.contains(&e.condition)).collect();
    let fail = relevant.iter().any(|e| e.verdict == Verdict::Fail);
    let margin = relevant.iter().filter_map(|e| e.margin).reduce(f64::min);
    (!fail, margin)
}

fn criterion_10() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for name in ["circle", "ball", "ou_cone", "subordinator"] {
        let ex = builtin_example(name).expect("example");
        let fv = check_fv_drift(&ex.model, &ex.atlas, &ex.plan);
        let general = check_general_drift(&ex.model, &ex.atlas, &ex.plan);
        let (fv_pass, fv_margin) = combined(&fv, &[Condition::FvDrift]);
        let (g_pass, g_margin) = combined(&general, &[Condition::DriftTangent, Condition::DriftInward]);
        let margins_agree = match (fv_margin, g_margin) {
            (Some(a), Some(b)) => (a - b).abs() <= 1e-6,
            (None, None) => true,
            _ => false,
        };
        let pass = fv_pass == g_pass && margins_agree && !fv.is_empty();
        ok &= pass;
        notes.push(format!("{name}: {fv_pass}/{g_pass} margins {fv_margin:.6?}/{g_margin:.6?}"));
    }

    // α − ∫_{B^c}γF − ∫_Bγ F does not depend on the split
    let ex = ball_example(0.25).expect("ball");
    let mut spread: f64 = 0.0;
    let mut margins = Vec::new();
    for y in ex.plan.interior_points.iter().chain(&ex.plan.boundary_points) {
        let h = ex.atlas.primary().phi(y);
        let values: Vec<Vector> = [0.05, 0.1, 0.2]
            .iter()
            .map(|&eps| {
                ex.model.adjusted_drift_b(eps, &h).expect("drift") - ex.model.jump_integral(&h, Region::Small(eps)).expect("small")
            })
            .collect();
        for w in values.windows(2) {
            spread = spread.max((&w[1] - &w[0]).norm());
        }
    }
    for eps in [0.05, 0.1, 0.2] {
        let restricted = ex.model.restricted_to_small_jumps(eps);
        let (_, m) = combined(&check_fv_drift(&restricted, &ex.atlas, &ex.plan), &[Condition::FvDrift]);
        margins.push(m.unwrap_or(f64::NAN));
    }
    let margin_spread = margins.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - margins.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    ok &= spread <= 1e-6 && margin_spread <= 1e-6;
    notes.push(format!("split ε∈{{0.05,0.1,0.2}}: drift spread {spread:.1e}, margin spread {margin_spread:.1e}"));
    (ok, notes.join("; "))
}

fn criterion_11() -> Outcome {
    let ex = builtin_example("circle").expect("circle");
    let entries = check_diff_tangency(&ex.model, &ex.atlas, &ex.plan);
    let worst = max_residual(&entries);
    let ok = !entries.is_empty() && entries.iter().all(|e| e.verdict == Verdict::Pass) && worst < 1e-6;
    (ok, format!("{} points, max FD tangency residual {worst:.2e}", entries.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("circle positive control", criterion_1),
        ("circle negative controls", criterion_2),
        ("ball boundary margin", criterion_3),
        ("chart scheme exactness", criterion_4),
        ("ambient refinement", criterion_5),
        ("subordinator dichotomy", criterion_6),
        ("cone invariance", criterion_7),
        ("geometry properties", criterion_8),
        ("quadrature oracle", criterion_9),
        ("code path equivalence", criterion_10),
        ("jump derivative tangency", criterion_11),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = f();
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<26} {}  ({:.1} s) {detail}",
            i + 1,
            name,
            if ok { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} passed in {:.1} s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
