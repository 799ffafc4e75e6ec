use ijd_core::examples::{builtin_example, circle_example, circle_uniform_measure};
use ijd_core::geometry::{Atlas, CircleChart};
use ijd_core::levy::{DensityProfile, LevyComponent, LevyMeasure, Support};
use ijd_core::sde::{Diffusion, DomainBall, JumpDiffusionModel};
use ijd_core::sim::{distance_statistics, simulate_ambient, simulate_chart, AmbientSimulator, Scheme, SimConfig, Termination};
use ijd_core::Vector;

fn v(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

fn cfg(dt: f64, horizon: f64, n_paths: usize, seed: u64) -> SimConfig {
    SimConfig { dt, horizon, n_paths, seed, scheme: Scheme::Ambient, ..SimConfig::default() }
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

#[test]
fn compensated_jumps_have_zero_mean() {
    let levy = LevyMeasure::new(vec![LevyComponent::new(
        Some(DensityProfile::ExpTilted { scale: 3.0, lambda: 2.0 }),
        vec![],
        None,
        Support::Positive,
    )
    .unwrap()]);
    let model = JumpDiffusionModel::new(1, |_| Vector::zeros(1)).with_jumps(levy, |_, x| Vector::from_element(1, x[0]));
    let ens = simulate_ambient(&model, v(&[0.0]), cfg(0.01, 1.0, 4000, 2)).unwrap();
    let finals: Vec<f64> = ens.paths.iter().map(|p| p.final_state()[0]).collect();
    let (m, sd) = mean_sd(&finals);
    assert!(m.abs() < 4.0 * sd / (finals.len() as f64).sqrt(), "mean {m}");
    // Var = ∫x²F over the simulated big jumps, close to 3·2/λ³ = 0.75
    assert!((sd * sd - 0.75).abs() < 0.1, "variance {}", sd * sd);
}

#[test]
fn brownian_variance() {
    let model = JumpDiffusionModel::new(1, |_| Vector::zeros(1)).with_diffusion(Diffusion::constant(v(&[0.5])));
    let ens = simulate_ambient(&model, v(&[1.0]), cfg(0.05, 2.0, 4000, 9)).unwrap();
    let finals: Vec<f64> = ens.paths.iter().map(|p| p.final_state()[0]).collect();
    let (m, sd) = mean_sd(&finals);
    assert!((m - 1.0).abs() < 0.04);
    assert!((sd * sd - 0.5).abs() < 0.05);
}

#[test]
fn paths_depend_only_on_seed_and_index() {
    let ex = builtin_example("circle").unwrap();
    let small = simulate_ambient(&ex.model, ex.start.clone(), cfg(0.01, 0.5, 3, 11)).unwrap();
    let large = simulate_ambient(&ex.model, ex.start.clone(), cfg(0.01, 0.5, 8, 11)).unwrap();
    assert_eq!(small.paths[..], large.paths[..3]);
    let other = simulate_ambient(&ex.model, ex.start.clone(), cfg(0.01, 0.5, 3, 12)).unwrap();
    assert_ne!(small.paths[0].states, other.paths[0].states);
}

#[test]
fn chart_paths_stay_on_the_circle() {
    let ex = circle_example(circle_uniform_measure()).unwrap();
    let config = SimConfig { scheme: Scheme::ChartProjected, ..cfg(0.01, 1.0, 50, 3) };
    let ens = simulate_chart(&ex.model, &ex.atlas, &ex.plan, v(&[0.0, 1.0]), config).unwrap();
    let stats = distance_statistics(&ens, &ex.atlas);
    assert!(stats.max_dist < 1e-12);
    assert_eq!(stats.truncated_paths, 0);
    assert!(ens.paths.iter().any(|p| !p.jumps.is_empty()));
}

#[test]
fn zero_coefficients_do_not_move() {
    let model = JumpDiffusionModel::new(2, |_| Vector::zeros(2));
    let atlas = Atlas::from_chart(CircleChart::unit());
    let ens = simulate_ambient(&model, v(&[0.6, 0.8]), cfg(0.1, 1.0, 4, 0)).unwrap();
    let stats = distance_statistics(&ens, &atlas);
    assert_eq!(stats.max_dist, 0.0);
    assert!(ens.paths.iter().all(|p| p.final_state() == v(&[0.6, 0.8])));
}

#[test]
fn blow_up_and_domain_exit_truncate() {
    let cubic = JumpDiffusionModel::new(1, |h| h.map(|x| x * x * x));
    let ens = simulate_ambient(&cubic, v(&[1.0]), cfg(0.01, 2.0, 1, 0)).unwrap();
    assert!(matches!(ens.paths[0].termination, Termination::Exploded { .. }));

    let drift = JumpDiffusionModel::new(1, |_| Vector::from_element(1, 1.0))
        .with_domain(DomainBall { center: v(&[0.0]), radius: 0.5, lipschitz: 0.0 });
    let sim = AmbientSimulator::new(&drift, v(&[0.0]), cfg(0.01, 1.0, 1, 0)).unwrap();
    match sim.simulate_path(0).termination {
        Termination::LeftDomain { time } => assert!((time - 0.5).abs() < 0.02),
        other => panic!("{other:?}"),
    }
}

#[test]
fn invalid_configurations_are_rejected() {
    let model = JumpDiffusionModel::new(1, |_| Vector::zeros(1));
    assert!(AmbientSimulator::new(&model, v(&[0.0]), cfg(0.0, 1.0, 1, 0)).is_err());
    assert!(AmbientSimulator::new(&model, v(&[0.0]), cfg(0.1, -1.0, 1, 0)).is_err());
    assert!(AmbientSimulator::new(&model, v(&[0.0, 1.0]), cfg(0.1, 1.0, 1, 0)).is_err());
}
