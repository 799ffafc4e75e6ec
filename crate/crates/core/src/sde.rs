//! Jump-diffusion coefficients and their pull-back to chart coordinates.
//!
//! The ambient equation is
//! `dr = (A r + α(r))dt + Σ_j σʲ(r)dβʲ + ∫ γ(r−, x)(μ(dt,dx) − F(dx)dt)`.

use alloc::{string::String, sync::Arc, vec::Vec};
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{chart_jacobian, refine_parameter, second_derivative, Chart};
use crate::levy::{LevyMeasure, Region};
use crate::linalg::{fd_jacobian, left_inverse};
use crate::{Error, Matrix, Result, Vector};

pub type VectorField = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
pub type JacobianField = Arc<dyn Fn(&Vector) -> Matrix + Send + Sync>;
pub type JumpField = Arc<dyn Fn(&Vector, &Vector) -> Vector + Send + Sync>;

/// Residual allowed when mapping a jump target back into the chart.
pub const CHART_ESCAPE_TOL: f64 = 1e-8;
/// Jump remainders at or below this (relative to `1 + |y|`) are roundoff.
pub const REMAINDER_ROUNDOFF: f64 = 64.0 * f64::EPSILON;

/// One Brownian volatility `σʲ` with an optional analytic Jacobian.
#[derive(Clone)]
pub struct Diffusion {
    field: VectorField,
    jacobian: Option<JacobianField>,
}

impl fmt::Debug for Diffusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Diffusion").field("analytic_jacobian", &self.jacobian.is_some()).finish()
    }
}

impl Diffusion {
    pub fn new(field: impl Fn(&Vector) -> Vector + Send + Sync + 'static) -> Self {
        Self { field: Arc::new(field), jacobian: None }
    }

    pub fn with_jacobian(mut self, jac: impl Fn(&Vector) -> Matrix + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    /// Linear field `h ↦ M h` with its exact Jacobian.
    pub fn linear(m: Matrix) -> Self {
        let mj = m.clone();
        Self::new(move |h| &m * h).with_jacobian(move |_| mj.clone())
    }

    pub fn constant(v: Vector) -> Self {
        let n = v.len();
        Self::new(move |_| v.clone()).with_jacobian(move |_| Matrix::zeros(n, n))
    }

    pub fn eval(&self, h: &Vector) -> Vector {
        (self.field)(h)
    }

    /// `Dσ(h)`: analytic when available, else central differences.
    pub fn jacobian(&self, h: &Vector) -> Matrix {
        match &self.jacobian {
            Some(j) => j(h),
            None => fd_jacobian(|x| (self.field)(x), h),
        }
    }
}

/// `γ(h, x) = Δ(h, x) + Σ_k δᵏ(h) x_k`.
#[derive(Clone)]
pub struct LevyDecomposition {
    pub remainder: JumpField,
    pub linear: Vec<VectorField>,
}

impl fmt::Debug for LevyDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LevyDecomposition").field("components", &self.linear.len()).finish()
    }
}

impl LevyDecomposition {
    pub fn new(
        remainder: impl Fn(&Vector, &Vector) -> Vector + Send + Sync + 'static,
        linear: Vec<VectorField>,
    ) -> Self {
        Self { remainder: Arc::new(remainder), linear }
    }

    pub fn delta(&self, k: usize, h: &Vector) -> Vector {
        (self.linear[k])(h)
    }

    pub fn remainder(&self, h: &Vector, x: &Vector) -> Vector {
        (self.remainder)(h, x)
    }
}

/// Ball on which the coefficients are declared, with a Lipschitz bound for `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBall {
    pub center: Vector,
    pub radius: f64,
    pub lipschitz: f64,
}

/// Coefficients `(A, α, σ¹…σᴶ, γ, F)` of a finite-dimensional jump-diffusion.
#[derive(Clone)]
pub struct JumpDiffusionModel {
    name: String,
    dim: usize,
    generator: Matrix,
    drift: VectorField,
    diffusions: Vec<Diffusion>,
    jump: JumpField,
    levy: LevyMeasure,
    decomposition: Option<LevyDecomposition>,
    jump_region: Region,
    domain: Option<DomainBall>,
}

impl fmt::Debug for JumpDiffusionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JumpDiffusionModel")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("generator", &self.generator)
            .field("diffusions", &self.diffusions.len())
            .field("levy", &self.levy)
            .field("decomposition", &self.decomposition)
            .field("jump_region", &self.jump_region)
            .field("domain", &self.domain)
            .finish()
    }
}

impl JumpDiffusionModel {
    /// Model with drift `α`, zero generator, no noise and no jumps.
    pub fn new(dim: usize, drift: impl Fn(&Vector) -> Vector + Send + Sync + 'static) -> Self {
        Self {
            name: String::from("custom"),
            dim,
            generator: Matrix::zeros(dim, dim),
            drift: Arc::new(drift),
            diffusions: Vec::new(),
            jump: Arc::new(move |_, _| Vector::zeros(dim)),
            levy: LevyMeasure::zero(1),
            decomposition: None,
            jump_region: Region::All,
            domain: None,
        }
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_generator(mut self, a: Matrix) -> Self {
        assert_eq!(a.shape(), (self.dim, self.dim), "generator must be d×d");
        self.generator = a;
        self
    }

    pub fn with_drift(mut self, drift: impl Fn(&Vector) -> Vector + Send + Sync + 'static) -> Self {
        self.drift = Arc::new(drift);
        self
    }

    pub fn with_drift_field(mut self, drift: VectorField) -> Self {
        self.drift = drift;
        self
    }

    pub fn with_diffusion(mut self, sigma: Diffusion) -> Self {
        self.diffusions.push(sigma);
        self
    }

    pub fn with_diffusions(mut self, sigmas: Vec<Diffusion>) -> Self {
        self.diffusions = sigmas;
        self
    }

    pub fn with_jumps(
        mut self,
        levy: LevyMeasure,
        jump: impl Fn(&Vector, &Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        self.levy = levy;
        self.jump = Arc::new(jump);
        self
    }

    pub fn with_jump_field(mut self, jump: JumpField) -> Self {
        self.jump = jump;
        self
    }

    pub fn with_decomposition(mut self, decomposition: LevyDecomposition) -> Self {
        self.decomposition = Some(decomposition);
        self
    }

    pub fn without_decomposition(mut self) -> Self {
        self.decomposition = None;
        self
    }

    pub fn with_domain(mut self, ball: DomainBall) -> Self {
        self.domain = Some(ball);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    pub fn diffusions(&self) -> &[Diffusion] {
        &self.diffusions
    }

    pub fn levy(&self) -> &LevyMeasure {
        &self.levy
    }

    pub fn decomposition(&self) -> Option<&LevyDecomposition> {
        self.decomposition.as_ref()
    }

    pub fn jump_region(&self) -> Region {
        self.jump_region
    }

    pub fn domain(&self) -> Option<&DomainBall> {
        self.domain.as_ref()
    }

    pub fn drift_field(&self) -> VectorField {
        self.drift.clone()
    }

    pub fn jump_field(&self) -> JumpField {
        self.jump.clone()
    }

    /// `α(h)`.
    pub fn alpha(&self, h: &Vector) -> Vector {
        (self.drift)(h)
    }

    /// `A h + α(h)`.
    pub fn total_drift(&self, h: &Vector) -> Vector {
        &self.generator * h + (self.drift)(h)
    }

    pub fn sigma(&self, j: usize, h: &Vector) -> Vector {
        self.diffusions[j].eval(h)
    }

    /// `γ(h, x)`, zero for marks outside the model's jump region.
    pub fn gamma(&self, h: &Vector, x: &Vector) -> Vector {
        if self.jump_region.contains(x.amax()) {
            (self.jump)(h, x)
        } else {
            Vector::zeros(self.dim)
        }
    }

    /// `∫_{region} g(x) F(dx)` restricted to the model's jump region.
    pub fn integrate<G>(&self, out_dim: usize, region: Region, g: G) -> Result<Vector>
    where
        G: FnMut(&Vector) -> Vector,
    {
        self.levy.integrate(out_dim, region.intersect(self.jump_region), g)
    }

    /// `∫_{region} γ(h, x) F(dx)`.
    pub fn jump_integral(&self, h: &Vector, region: Region) -> Result<Vector> {
        self.integrate(self.dim, region, |x| (self.jump)(h, x))
    }

    /// `½ Σ_j Dσʲ(h) σʲ(h)`.
    pub fn stratonovich_correction(&self, h: &Vector) -> Vector {
        let mut out = Vector::zeros(self.dim);
        for s in &self.diffusions {
            out += s.jacobian(h) * s.eval(h);
        }
        out * 0.5
    }

    /// `α^B(h) = α(h) − ∫_{B^c} γ(h,x) F(dx)` with `B = {|x| < ε}`.
    pub fn adjusted_drift_b(&self, epsilon: f64, h: &Vector) -> Result<Vector> {
        Ok(self.alpha(h) - self.jump_integral(h, Region::Big(epsilon))?)
    }

    /// The model `(α^B, γ^B = γ·1_B)` driven by the small jumps only.
    pub fn restricted_to_small_jumps(&self, epsilon: f64) -> Self {
        let base = self.clone();
        let mut out = self.clone();
        out.drift = Arc::new(move |h| base.adjusted_drift_b(epsilon, h).unwrap_or_else(|_| Vector::repeat(h.len(), f64::NAN)));
        out.jump_region = self.jump_region.intersect(Region::Small(epsilon));
        out
    }

    /// Spot checks of the structural assumptions: `α` Lipschitz on the
    /// declared ball (100 random pairs), the jump decomposition to `1e-10`
    /// and `γ(h, 0) = 0` when a decomposition is present.
    pub fn validate(&self, points: &[Vector], seed: u64) -> Result<()> {
        if let Some(ball) = &self.domain {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let draw = |rng: &mut ChaCha8Rng| {
                let dir = Vector::from_fn(self.dim, |_, _| rng.random::<f64>() * 2.0 - 1.0);
                let n = dir.norm().max(1e-300);
                &ball.center + dir * (ball.radius * rng.random::<f64>() / n)
            };
            for _ in 0..100 {
                let (a, b) = (draw(&mut rng), draw(&mut rng));
                let lhs = (self.alpha(&a) - self.alpha(&b)).norm();
                let rhs = ball.lipschitz * (&a - &b).norm();
                if lhs > rhs * (1.0 + 1e-9) + 1e-14 {
                    return Err(Error::Model(alloc::format!(
                        "drift violates the declared Lipschitz bound ({lhs:.3e} > {rhs:.3e})"
                    )));
                }
            }
        }
        if let Some(dec) = &self.decomposition {
            let e = self.levy.dim();
            if dec.linear.len() != e {
                return Err(Error::Model("decomposition needs one δ per mark coordinate".into()));
            }
            let marks = self.levy.mark_nodes(4, 1e-4, 1e4);
            for h in points {
                let g0 = (self.jump)(h, &Vector::zeros(e));
                if g0.norm() > 1e-10 {
                    return Err(Error::Model("γ(h, 0) must vanish".into()));
                }
                for x in &marks {
                    let g = (self.jump)(h, x);
                    let mut rebuilt = dec.remainder(h, x);
                    for k in 0..e {
                        rebuilt.axpy(x[k], &dec.delta(k, h), 1.0);
                    }
                    if (&g - &rebuilt).norm() > 1e-10 * (1.0 + g.norm()) {
                        return Err(Error::Model("jump decomposition does not reproduce γ".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Half-space metric projection `Π(y) = (y₁⁺, y₂, …, y_m)`.
pub fn half_space_projection(y: &Vector) -> Vector {
    let mut out = y.clone();
    if out[0] < 0.0 {
        out[0] = 0.0;
    }
    out
}

/// Coefficients `Θ, Σʲ, Γ` of the chart equation
/// `dY = Θ(Y)dt + Σ_j Σʲ(Y)dβʲ + ∫ Γ(Y−, x)(μ − F dt)`, obtained from the
/// ambient model through a chart inverse `g` with `h = φ(y)`.
#[derive(Clone)]
pub struct ChartModel {
    chart: Arc<dyn Chart>,
    model: JumpDiffusionModel,
    projected: bool,
}

impl fmt::Debug for ChartModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartModel")
            .field("chart", &self.chart.name())
            .field("model", &self.model.name())
            .field("projected", &self.projected)
            .finish()
    }
}

pub fn pullback_coefficients(chart: Arc<dyn Chart>, model: &JumpDiffusionModel) -> Result<ChartModel> {
    if chart.dim_ambient() != model.dim() {
        return Err(Error::Model("chart and model live in different dimensions".into()));
    }
    Ok(ChartModel { chart, model: model.clone(), projected: false })
}

/// Precomposes every coefficient with the half-space projection.
pub fn project_chart_model(cm: &ChartModel) -> ChartModel {
    ChartModel { projected: true, ..cm.clone() }
}

impl ChartModel {
    pub fn chart(&self) -> &Arc<dyn Chart> {
        &self.chart
    }

    pub fn model(&self) -> &JumpDiffusionModel {
        &self.model
    }

    pub fn is_projected(&self) -> bool {
        self.projected
    }

    /// Parameter at which coefficients are evaluated (`Π(y)` when projected).
    pub fn effective(&self, y: &Vector) -> Vector {
        if self.projected && self.chart.domain().half_space() {
            half_space_projection(y)
        } else {
            y.clone()
        }
    }

    /// `Dg(h) = Dφ(y)⁺`, the inverse of `Dφ(y)` on `T_hM`.
    pub fn inverse_derivative(&self, y: &Vector) -> Result<Matrix> {
        let y = self.effective(y);
        let jac = chart_jacobian(self.chart.as_ref(), &y)?;
        left_inverse(&jac).ok_or(Error::DegenerateChart { ratio: 0.0 })
    }

    /// `Σʲ(y) = Dg(h) σʲ(h)`.
    pub fn sigma(&self, j: usize, y: &Vector) -> Result<Vector> {
        let dg = self.inverse_derivative(y)?;
        let h = self.chart.phi(&self.effective(y));
        Ok(dg * self.model.sigma(j, &h))
    }

    pub fn sigmas(&self, y: &Vector) -> Result<Vec<Vector>> {
        let dg = self.inverse_derivative(y)?;
        let h = self.chart.phi(&self.effective(y));
        Ok(self.model.diffusions().iter().map(|s| &dg * s.eval(&h)).collect())
    }

    /// `Γ(y, x) = g(h + γ(h,x)) − g(h)`; periodic coordinates are unwrapped.
    pub fn gamma(&self, y: &Vector, x: &Vector) -> Result<Vector> {
        let y = self.effective(y);
        let h = self.chart.phi(&y);
        self.gamma_at(&y, &h, &self.model.gamma(&h, x))
    }

    fn gamma_at(&self, y: &Vector, h: &Vector, jump: &Vector) -> Result<Vector> {
        if jump.iter().all(|v| *v == 0.0) {
            return Ok(Vector::zeros(y.len()));
        }
        let target = h + jump;
        let inv = refine_parameter(self.chart.as_ref(), &target, y)?;
        if inv.residual > CHART_ESCAPE_TOL * (1.0 + target.norm()) {
            return Err(Error::ChartEscape);
        }
        Ok(self.chart.domain().difference(&inv.y, y))
    }

    /// `Θ(y) = Dg(Ah+α) + ½ Σ D²g(σʲ,σʲ) + ∫_{region}[g(h+γ) − g(h) − Dg γ] F(dx)`.
    ///
    /// `D²g(w,w) = −Dg D²φ(u,u)` with `u = Dg w`, valid for tangent `w`.
    pub fn theta_on(&self, y: &Vector, region: Region) -> Result<Vector> {
        let y = self.effective(y);
        let h = self.chart.phi(&y);
        let dg = self.inverse_derivative(&y)?;
        let mut theta = &dg * self.model.total_drift(&h);
        if !self.chart.is_affine() && !self.model.diffusions().is_empty() {
            let d2 = second_derivative(self.chart.as_ref(), &y);
            for s in self.model.diffusions() {
                let u = &dg * s.eval(&h);
                theta -= &dg * d2.apply(&u, &u) * 0.5;
            }
        }
        if !self.chart.is_affine() {
            let m = y.len();
            let floor = REMAINDER_ROUNDOFF * (1.0 + y.norm());
            let mut failure = None;
            let integral = self.model.integrate(m, region, |x| {
                let jump = self.model.gamma(&h, x);
                match self.gamma_at(&y, &h, &jump) {
                    Ok(big) => {
                        let r = big - &dg * jump;
                        // inversion roundoff does not vanish as x → 0 and
                        // would otherwise be summed against infinite mass
                        if r.norm() <= floor { Vector::zeros(m) } else { r }
                    }
                    Err(e) => {
                        failure.get_or_insert(e);
                        Vector::zeros(m)
                    }
                }
            })?;
            if let Some(e) = failure {
                return Err(e);
            }
            theta += integral;
        }
        Ok(theta)
    }

    pub fn theta(&self, y: &Vector) -> Result<Vector> {
        self.theta_on(y, Region::All)
    }

    /// Ambient point `φ(Π y)`.
    pub fn point(&self, y: &Vector) -> Vector {
        self.chart.phi(&self.effective(y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{AffineChart, CircleChart};
    use crate::levy::LevyComponent;
    use alloc::vec;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn rot() -> Matrix {
        Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])
    }

    #[test]
    fn stratonovich_examples() {
        let circle = JumpDiffusionModel::new(2, |_| Vector::zeros(2)).with_diffusion(Diffusion::linear(rot()));
        let h = v(&[0.6, 0.8]);
        assert!((circle.stratonovich_correction(&h) + &h * 0.5).norm() < 1e-15);

        let constant = JumpDiffusionModel::new(2, |_| Vector::zeros(2)).with_diffusion(Diffusion::constant(v(&[1.0, 2.0])));
        assert_eq!(constant.stratonovich_correction(&h), Vector::zeros(2));

        // σ(h) = 2h in one dimension: ½·2·2h = 2h; oracle by finite differences
        let scaling = JumpDiffusionModel::new(1, |_| Vector::zeros(1)).with_diffusion(Diffusion::new(|h| h * 2.0));
        let x = v(&[0.7]);
        assert!((scaling.stratonovich_correction(&x)[0] - 1.4).abs() < 1e-9);
    }

    #[test]
    fn adjusted_drift_examples() {
        let h = v(&[0.3]);
        let plain = JumpDiffusionModel::new(1, |_| v(&[1.0]));
        assert_eq!(plain.adjusted_drift_b(0.5, &h).unwrap(), v(&[1.0]));

        let atom = LevyMeasure::new(vec![LevyComponent::atoms_only(vec![(1.0, 1.0)]).unwrap()]);
        let m = JumpDiffusionModel::new(1, |_| v(&[1.0])).with_jumps(atom, |h, _| v(&[1.0 - 2.0 * h[0]]));
        assert!((m.adjusted_drift_b(0.5, &h).unwrap()[0] - 0.6).abs() < 1e-15);

        let pair = LevyMeasure::new(vec![LevyComponent::atoms_only(vec![(1.0, 2.0), (-1.0, 2.0)]).unwrap()]);
        let m = JumpDiffusionModel::new(1, |_| v(&[0.4])).with_jumps(pair, |_, x| v(&[x[0]]));
        assert!((m.adjusted_drift_b(0.5, &h).unwrap()[0] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn circle_sigma_pullback_is_constant() {
        let model = JumpDiffusionModel::new(2, |_| Vector::zeros(2)).with_diffusion(Diffusion::linear(rot()));
        let cm = pullback_coefficients(Arc::new(CircleChart::unit()), &model).unwrap();
        for y in [0.1, 1.0, 2.5, 4.0, 6.0] {
            let s = cm.sigma(0, &v(&[y])).unwrap();
            assert!((s[0] + 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn pushforward_round_trip() {
        let model = JumpDiffusionModel::new(2, |_| Vector::zeros(2)).with_diffusion(Diffusion::linear(rot()));
        let chart: Arc<dyn Chart> = Arc::new(CircleChart::unit());
        let cm = pullback_coefficients(chart.clone(), &model).unwrap();
        for y in [0.3, 2.0, 5.0] {
            let y = v(&[y]);
            let h = chart.phi(&y);
            let back = chart.jacobian_exact(&y).unwrap() * cm.sigma(0, &y).unwrap();
            assert!((back - model.sigma(0, &h)).norm() < 1e-12);
        }
    }

    #[test]
    fn drift_only_pullback_is_exact() {
        let a = Matrix::from_row_slice(2, 2, &[-1.0, 0.5, 0.0, -1.0]);
        let model = JumpDiffusionModel::new(2, |_| v(&[0.3, 0.2])).with_generator(a.clone());
        let chart = AffineChart::cone(&[v(&[1.0, 0.0]), v(&[1.0, 1.0])]).unwrap();
        let basis = chart.basis().clone();
        let cm = pullback_coefficients(Arc::new(chart), &model).unwrap();
        let y = v(&[0.4, 0.9]);
        let h = &basis * &y;
        let expected = basis.clone().try_inverse().unwrap() * (&a * &h + v(&[0.3, 0.2]));
        assert!((cm.theta(&y).unwrap() - expected).norm() < 1e-13);
    }

    #[test]
    fn projection_examples() {
        let model = JumpDiffusionModel::new(2, |h| v(&[h[0] + 1.0, h[1]]));
        let chart = AffineChart::cone(&[v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        let cm = project_chart_model(&pullback_coefficients(Arc::new(chart), &model).unwrap());
        let inside = v(&[0.2, 0.5]);
        assert_eq!(cm.theta(&inside).unwrap(), v(&[1.2, 0.5]));
        assert_eq!(cm.theta(&v(&[-0.3, 0.5])).unwrap(), cm.theta(&v(&[0.0, 0.5])).unwrap());
    }

    #[test]
    fn restricted_model_keeps_small_jumps() {
        let atoms = LevyMeasure::new(vec![LevyComponent::atoms_only(vec![(0.05, 1.0), (1.0, 2.0)]).unwrap()]);
        let m = JumpDiffusionModel::new(1, |_| v(&[1.0])).with_jumps(atoms, |_, x| v(&[x[0]]));
        let r = m.restricted_to_small_jumps(0.1);
        let h = v(&[0.0]);
        assert!((r.alpha(&h)[0] - (1.0 - 2.0)).abs() < 1e-15);
        assert_eq!(r.gamma(&h, &v(&[1.0])), v(&[0.0]));
        assert_eq!(r.gamma(&h, &v(&[0.05])), v(&[0.05]));
    }

    #[test]
    fn decomposition_validation() {
        let atoms = LevyMeasure::new(vec![LevyComponent::atoms_only(vec![(0.5, 1.0)]).unwrap()]);
        let good = JumpDiffusionModel::new(1, |_| v(&[0.0]))
            .with_jumps(atoms.clone(), |h, x| v(&[h[0] * x[0] + x[0] * x[0]]))
            .with_decomposition(LevyDecomposition::new(|_, x| v(&[x[0] * x[0]]), vec![Arc::new(|h: &Vector| h.clone())]));
        assert!(good.validate(&[v(&[0.3])], 1).is_ok());
        let bad = good.clone().with_decomposition(LevyDecomposition::new(|_, _| v(&[0.0]), vec![Arc::new(|h: &Vector| h.clone())]));
        assert!(bad.validate(&[v(&[0.3])], 1).is_err());
        let lip = JumpDiffusionModel::new(1, |h| h * 3.0).with_domain(DomainBall { center: v(&[0.0]), radius: 1.0, lipschitz: 1.0 });
        assert!(lip.validate(&[], 1).is_err());
    }
}
