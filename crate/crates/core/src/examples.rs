//! Worked examples: the unit circle, the closed unit ball, an
//! Ornstein-Uhlenbeck process on a cone, a subordinator and an affine toy.

use alloc::{string::ToString, sync::Arc, vec, vec::Vec};
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::checker::SamplePlan;
use crate::geometry::{AffineChart, Atlas, BallAnnulusChart, Chart, CircleChart, CoordinateRange, DomainBox};
use crate::levy::{DensityProfile, LevyComponent, LevyMeasure, Region, Support};
use crate::sde::{Diffusion, JumpDiffusionModel, LevyDecomposition, VectorField};
use crate::{Error, Matrix, Result, Vector};

pub const EXAMPLE_NAMES: [&str; 5] = ["circle", "ball", "ou_cone", "subordinator", "hjm_affine_toy"];

/// A model together with the manifold it should leave invariant.
#[derive(Debug, Clone)]
pub struct Example {
    pub name: &'static str,
    pub model: JumpDiffusionModel,
    pub atlas: Atlas,
    pub plan: SamplePlan,
    /// Default starting point for simulations.
    pub start: Vector,
    pub description: &'static str,
}

pub fn builtin_example(name: &str) -> Result<Example> {
    match name {
        "circle" => circle_example(circle_uniform_measure()),
        "ball" => ball_example(0.25),
        "ou_cone" => ou_cone_example(true),
        "subordinator" => subordinator_example(1.0, 0.0),
        "hjm_affine_toy" => hjm_affine_toy(),
        other => Err(Error::UnknownExample(other.to_string())),
    }
}

fn rotate(h: &Vector) -> Vector {
    Vector::from_vec(vec![h[1], -h[0]])
}

fn rotation_generator() -> Matrix {
    Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])
}

/// Unit density on `[−π, π]`, finite activity.
pub fn circle_uniform_measure() -> LevyMeasure {
    let c = LevyComponent::new(
        Some(DensityProfile::Uniform { rate: 1.0, lo: 0.0, hi: PI }),
        vec![],
        None,
        Support::TwoSided,
    )
    .expect("valid density");
    LevyMeasure::new(vec![c])
}

/// `|x|^{−1−β}` on `ε₀ < |x| ≤ π`.
pub fn circle_power_measure(beta: f64, inner: f64) -> Result<LevyMeasure> {
    let c = LevyComponent::new(
        Some(DensityProfile::Power { scale: 1.0, beta, lo: inner, hi: Some(PI) }),
        vec![],
        Some(beta),
        Support::TwoSided,
    )?;
    Ok(LevyMeasure::new(vec![c]))
}

/// Rotations of the unit circle with rotation-angle jumps:
/// `α(h) = Jh − (½ − ∫(cos x − 1)F(dx))h`, `σ(h) = Jh`, `γ(h,x) = R(x)h − h`.
pub fn circle_model(levy: LevyMeasure) -> Result<JumpDiffusionModel> {
    if levy.dim() != 1 {
        return Err(Error::Model("the circle model takes scalar marks".into()));
    }
    let c = levy.integrate_scalar(Region::All, |x| x[0].cos() - 1.0)?;
    let shrink = 0.5 - c;
    let jump = |h: &Vector, x: &Vector| {
        let (s, co) = x[0].sin_cos();
        Vector::from_vec(vec![(co - 1.0) * h[0] + s * h[1], -s * h[0] + (co - 1.0) * h[1]])
    };
    let delta: VectorField = Arc::new(rotate);
    let decomposition = LevyDecomposition::new(
        |h: &Vector, x: &Vector| {
            let (s, co) = x[0].sin_cos();
            h * (co - 1.0) + rotate(h) * (s - x[0])
        },
        vec![delta],
    );
    Ok(JumpDiffusionModel::new(2, move |h| rotate(h) - h * shrink)
        .with_name("circle")
        .with_diffusion(Diffusion::linear(rotation_generator()))
        .with_jumps(levy, jump)
        .with_decomposition(decomposition))
}

pub fn circle_example(levy: LevyMeasure) -> Result<Example> {
    let model = circle_model(levy)?;
    let chart = CircleChart::unit();
    let plan = SamplePlan::grid(&chart, 64, 0).with_seed(0x5eed_c1c1e);
    Ok(Example {
        name: "circle",
        model,
        atlas: Atlas::from_chart(chart),
        plan,
        start: Vector::from_vec(vec![1.0, 0.0]),
        description: "unit circle in the plane, rotation noise and rotation jumps",
    })
}

/// Jump marks of the ball example: `x^{−1.5}` on `(0, ½]`, infinite activity
/// with finite variation.
pub fn ball_measure() -> LevyMeasure {
    let c = LevyComponent::new(
        Some(DensityProfile::Power { scale: 1.0, beta: 0.5, lo: 0.0, hi: Some(0.5) }),
        vec![],
        Some(0.5),
        Support::Positive,
    )
    .expect("valid density");
    LevyMeasure::new(vec![c])
}

/// Closed unit ball: `α(h) = −(a + ½ + 2∫x²F)h`, `σ(h) = Jh`, `γ(h,x) = −2x²h`
/// (the exponent function is taken constant equal to 2).
pub fn ball_model(a: f64, levy: LevyMeasure) -> Result<JumpDiffusionModel> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::Model("the ball model needs a ≥ 0".into()));
    }
    if levy.dim() != 1 {
        return Err(Error::Model("the ball model takes scalar marks".into()));
    }
    let second = levy.integrate_scalar(Region::All, |x| x[0] * x[0])?;
    let rate = a + 0.5 + 2.0 * second;
    let zero: VectorField = Arc::new(|h: &Vector| Vector::zeros(h.len()));
    Ok(JumpDiffusionModel::new(2, move |h| h * -rate)
        .with_name("ball")
        .with_diffusion(Diffusion::linear(rotation_generator()))
        .with_jumps(levy, |h, x| h * (-2.0 * x[0] * x[0]))
        .with_decomposition(LevyDecomposition::new(|h, x| h * (-2.0 * x[0] * x[0]), vec![zero])))
}

/// Annulus `0.02 ≤ ‖h‖ ≤ 1` as primary chart, plus the square `[−0.6, 0.6]²`
/// covering the centre.
pub fn ball_atlas() -> Atlas {
    let annulus: Arc<dyn Chart> = Arc::new(BallAnnulusChart::new(1.0, 0.02).expect("valid radii"));
    let square = AffineChart::new(
        "ball_centre",
        Vector::zeros(2),
        Matrix::identity(2, 2),
        DomainBox::new(vec![CoordinateRange::closed(-0.6, 0.6); 2], false).expect("valid box"),
    )
    .expect("identity chart");
    Atlas::new(vec![annulus, Arc::new(square)]).expect("consistent charts")
}

pub fn ball_example(a: f64) -> Result<Example> {
    let model = ball_model(a, ball_measure())?;
    let atlas = ball_atlas();
    let plan = SamplePlan::grid(atlas.primary().as_ref(), 64, 16).with_seed(0x5eed_ba11);
    Ok(Example {
        name: "ball",
        model,
        atlas,
        plan,
        start: Vector::from_vec(vec![0.5, 0.0]),
        description: "closed unit ball with rotation noise and radial contractions",
    })
}

/// `c·e^{−λx}` on `x > 0`.
pub fn exp_tilted_measure(scale: f64, lambda: f64) -> Result<LevyMeasure> {
    let c = LevyComponent::new(
        Some(DensityProfile::ExpTilted { scale, lambda }),
        vec![],
        None,
        Support::Positive,
    )?;
    Ok(LevyMeasure::new(vec![c]))
}

/// Ornstein-Uhlenbeck type model `dr = (Ar + α)dt + ∫ x·u (μ − F dt)` with
/// state-independent coefficients and no Brownian part.
pub fn ou_model(a: Matrix, alpha: Vector, direction: Vector, levy: LevyMeasure) -> Result<JumpDiffusionModel> {
    let d = alpha.len();
    if a.shape() != (d, d) || direction.len() != d {
        return Err(Error::Model("generator, drift and jump direction disagree in dimension".into()));
    }
    if levy.dim() != 1 {
        return Err(Error::Model("the cone model takes scalar marks".into()));
    }
    let dir = direction.clone();
    let dir2 = direction;
    let linear: VectorField = Arc::new(move |_| dir2.clone());
    Ok(JumpDiffusionModel::new(d, move |_| alpha.clone())
        .with_name("ou_cone")
        .with_generator(a)
        .with_jumps(levy, move |_, x| &dir * x[0])
        .with_decomposition(LevyDecomposition::new(move |_, _| Vector::zeros(d), vec![linear])))
}

/// `A = [[−1, ½], [0, −1]]` on the positive quadrant with jumps `x·(1,1)`,
/// `F(dx) = e^{−2x}dx`. With `compliant` the drift is `(¾, ¾)`, otherwise
/// `(¾, −¼)` so that `α − ∫γF = (½, −½)` leaves the cone.
pub fn ou_cone_example(compliant: bool) -> Result<Example> {
    let a = Matrix::from_row_slice(2, 2, &[-1.0, 0.5, 0.0, -1.0]);
    let alpha = if compliant {
        Vector::from_vec(vec![0.75, 0.75])
    } else {
        Vector::from_vec(vec![0.75, -0.25])
    };
    let model = ou_model(a, alpha, Vector::from_vec(vec![1.0, 1.0]), exp_tilted_measure(1.0, 2.0)?)?;
    let gens = vec![Vector::from_vec(vec![1.0, 0.0]), Vector::from_vec(vec![0.0, 1.0])];
    let chart = AffineChart::cone(&gens)?;
    let plan = SamplePlan::grid(&chart, 64, 16).with_seed(0x05ee_dc0e).with_cone(gens);
    Ok(Example {
        name: "ou_cone",
        model,
        atlas: Atlas::from_chart(chart),
        plan,
        start: Vector::from_vec(vec![0.0, 0.0]),
        description: "Ornstein-Uhlenbeck process on the positive quadrant",
    })
}

/// `0.25·x^{−1.5}` on `(0, 1]`; `∫x F(dx) = ½`.
pub fn subordinator_measure() -> LevyMeasure {
    let c = LevyComponent::new(
        Some(DensityProfile::Power { scale: 0.25, beta: 0.5, lo: 0.0, hi: Some(1.0) }),
        vec![],
        Some(0.5),
        Support::Positive,
    )
    .expect("valid density");
    LevyMeasure::new(vec![c])
}

/// Scalar `dr = α dt + σ dβ + ∫ x (μ − F dt)` on `[0, ∞)`.
pub fn subordinator_model(alpha: f64, sigma: f64, levy: LevyMeasure) -> Result<JumpDiffusionModel> {
    let one: VectorField = Arc::new(|_| Vector::from_element(1, 1.0));
    let mut model = JumpDiffusionModel::new(1, move |_| Vector::from_element(1, alpha))
        .with_name("subordinator")
        .with_jumps(levy, |_, x| Vector::from_element(1, x[0]))
        .with_decomposition(LevyDecomposition::new(|_, _| Vector::zeros(1), vec![one]));
    if sigma != 0.0 {
        model = model.with_diffusion(Diffusion::constant(Vector::from_element(1, sigma)));
    }
    Ok(model)
}

pub fn subordinator_example(alpha: f64, sigma: f64) -> Result<Example> {
    let model = subordinator_model(alpha, sigma, subordinator_measure())?;
    let gens = vec![Vector::from_element(1, 1.0)];
    let chart = AffineChart::cone(&gens)?;
    let plan = SamplePlan::grid(&chart, 32, 1).with_seed(0x005e_ed5b).with_cone(gens);
    Ok(Example {
        name: "subordinator",
        model,
        atlas: Atlas::from_chart(chart),
        plan,
        start: Vector::from_element(1, 0.0),
        description: "scalar Lévy process with nondecreasing paths",
    })
}

/// Three-factor toy with the nilpotent shift `A e₂ = e₁, A e₃ = e₂`, kept on
/// the half-plane `{h₃ = 0, h₂ ≥ 0}` by constant coefficients.
///
/// Only illustrates the shape of a finite-dimensional realization; it is not a
/// discretization of forward-curve dynamics.
pub fn hjm_affine_toy() -> Result<Example> {
    let mut a = Matrix::zeros(3, 3);
    a[(0, 1)] = 1.0;
    a[(1, 2)] = 1.0;
    let e1 = Vector::from_vec(vec![1.0, 0.0, 0.0]);
    let e2 = Vector::from_vec(vec![0.0, 1.0, 0.0]);
    let model = ou_model(a, &e2 * 0.5, e2.clone(), exp_tilted_measure(1.0, 2.0)?)?
        .with_name("hjm_affine_toy")
        .with_diffusion(Diffusion::constant(&e1 * 0.2));
    let chart = AffineChart::new(
        "half_plane",
        Vector::zeros(3),
        Matrix::from_columns(&[e2, e1]),
        DomainBox::new(vec![CoordinateRange::half_line(), CoordinateRange::line()], true)?,
    )?;
    let plan = SamplePlan::grid(&chart, 32, 8).with_seed(0x005e_ed4a);
    Ok(Example {
        name: "hjm_affine_toy",
        model,
        atlas: Atlas::from_chart(chart),
        plan,
        start: Vector::zeros(3),
        description: "illustrative affine toy with a nilpotent shift generator",
    })
}

/// Names with their one-line descriptions.
pub fn list_examples() -> Vec<(&'static str, &'static str)> {
    EXAMPLE_NAMES
        .iter()
        .filter_map(|n| builtin_example(n).ok().map(|e| (e.name, e.description)))
        .collect()
}
