//! Charts of submanifolds with boundary and the tangent geometry built on them.
//!
//! A chart maps a box `V` in parameter space onto a patch of the manifold in
//! `ℝ^d`. When [`DomainBox::half_space`] is set, the face `y₁ = 0` is the
//! manifold boundary; every other box face is an artificial chart edge.

use alloc::{boxed::Box, string::String, sync::Arc, vec::Vec};
use core::f64::consts::PI;
use core::fmt::Debug;

#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::{least_squares, left_inverse, orthonormal_columns, singular_value_ratio};
use crate::{Error, Matrix, Result, Vector};

/// Below this value of `y₁` a point counts as a boundary point.
pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-9;
/// Minimum admissible ratio of smallest to largest singular value of `Dφ`.
pub const RANK_TOL: f64 = 1e-10;
/// Iteration cap of the Gauss-Newton chart inversion.
pub const MAX_INVERSION_ITERATIONS: usize = 50;
/// Number of starting points used by [`distance_to_closure`].
pub const MULTI_START_COUNT: usize = 8;

/// One coordinate interval of a chart domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateRange {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
    /// Period of an angular coordinate; `lo..lo + period` is the fundamental cell.
    pub period: Option<f64>,
}

impl CoordinateRange {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_open: false, hi_open: false, period: None }
    }

    pub fn periodic(lo: f64, period: f64) -> Self {
        Self { lo, hi: lo + period, lo_open: false, hi_open: true, period: Some(period) }
    }

    pub fn half_line() -> Self {
        Self::closed(0.0, f64::INFINITY)
    }

    pub fn line() -> Self {
        Self::closed(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn with_hi_open(mut self, open: bool) -> Self {
        self.hi_open = open;
        self
    }

    fn is_bounded(&self) -> bool {
        self.period.is_some() || (self.lo.is_finite() && self.hi.is_finite())
    }
}

/// Axis-aligned parameter box of a chart.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBox {
    ranges: Vec<CoordinateRange>,
    half_space: bool,
}

impl DomainBox {
    pub fn new(ranges: Vec<CoordinateRange>, half_space: bool) -> Result<Self> {
        if ranges.is_empty() {
            return Err(Error::Model("chart domain needs at least one coordinate".into()));
        }
        for r in &ranges {
            let ok = match r.period {
                Some(p) => p > 0.0 && p.is_finite() && r.lo.is_finite(),
                None => r.lo < r.hi && !r.lo.is_nan() && !r.hi.is_nan(),
            };
            if !ok {
                return Err(Error::Model("malformed chart coordinate range".into()));
            }
        }
        if half_space && (ranges[0].lo != 0.0 || ranges[0].period.is_some()) {
            return Err(Error::Model("half-space coordinate must have lower bound 0".into()));
        }
        Ok(Self { ranges, half_space })
    }

    pub fn dim(&self) -> usize {
        self.ranges.len()
    }

    pub fn ranges(&self) -> &[CoordinateRange] {
        &self.ranges
    }

    /// Whether `y₁ ≥ 0` is the manifold boundary.
    pub fn half_space(&self) -> bool {
        self.half_space
    }

    pub fn is_bounded(&self) -> bool {
        self.ranges.iter().all(CoordinateRange::is_bounded)
    }

    /// Wraps periodic coordinates into their fundamental cell.
    pub fn wrap(&self, y: &Vector) -> Vector {
        let mut out = y.clone();
        for (i, r) in self.ranges.iter().enumerate() {
            if let Some(p) = r.period {
                let mut v = (out[i] - r.lo) % p;
                if v < 0.0 {
                    v += p;
                }
                if v >= p {
                    v = 0.0;
                }
                out[i] = r.lo + v;
            }
        }
        out
    }

    /// Metric projection onto the closed box (periodic coordinates wrapped).
    pub fn project(&self, y: &Vector) -> Vector {
        let mut out = self.wrap(y);
        for (i, r) in self.ranges.iter().enumerate() {
            if r.period.is_none() {
                out[i] = out[i].max(r.lo).min(r.hi);
            }
        }
        out
    }

    /// `a − b` with periodic coordinates folded into `[-p/2, p/2)`.
    pub fn difference(&self, a: &Vector, b: &Vector) -> Vector {
        let mut d = a - b;
        for (i, r) in self.ranges.iter().enumerate() {
            if let Some(p) = r.period {
                let mut v = (d[i] + 0.5 * p) % p;
                if v < 0.0 {
                    v += p;
                }
                d[i] = v - 0.5 * p;
            }
        }
        d
    }

    /// Membership in the closed box, up to `tol`.
    pub fn contains(&self, y: &Vector, tol: f64) -> bool {
        self.ranges.iter().enumerate().all(|(i, r)| {
            r.period.is_some() || (y[i] >= r.lo - tol && y[i] <= r.hi + tol)
        })
    }

    /// Membership in the box with open ends excluded.
    pub fn contains_strict(&self, y: &Vector, tol: f64) -> bool {
        self.ranges.iter().enumerate().all(|(i, r)| {
            if r.period.is_some() {
                return true;
            }
            let lo_ok = if r.lo_open { y[i] > r.lo } else { y[i] >= r.lo - tol };
            let hi_ok = if r.hi_open { y[i] < r.hi } else { y[i] <= r.hi + tol };
            lo_ok && hi_ok
        })
    }

    /// Low-discrepancy starting points spread over the box; unbounded
    /// directions are covered up to `±2·scale`.
    pub fn start_points(&self, count: usize, scale: f64) -> Vec<Vector> {
        const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
        (0..count)
            .map(|i| {
                Vector::from_iterator(
                    self.dim(),
                    self.ranges.iter().enumerate().map(|(c, r)| {
                        let frac = if c == 0 {
                            (i as f64 + 0.5) / count as f64
                        } else {
                            radical_inverse(i as u64 + 1, PRIMES[(c - 1) % PRIMES.len()])
                        };
                        map_fraction(r, frac, scale)
                    }),
                )
            })
            .collect()
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    out
}

fn map_fraction(r: &CoordinateRange, frac: f64, scale: f64) -> f64 {
    if let Some(p) = r.period {
        return r.lo + frac * p;
    }
    match (r.lo.is_finite(), r.hi.is_finite()) {
        (true, true) => r.lo + frac * (r.hi - r.lo),
        (true, false) => r.lo + frac * 2.0 * scale,
        (false, true) => r.hi - frac * 2.0 * scale,
        (false, false) => (2.0 * frac - 1.0) * 2.0 * scale,
    }
}

/// Second derivative `D²φ(y)` stored as the `m×m` symmetric table of
/// ambient vectors `∂²φ/∂yᵢ∂yⱼ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondDerivative {
    dim: usize,
    entries: Vec<Vector>,
}

impl SecondDerivative {
    pub fn from_entries(dim: usize, entries: Vec<Vector>) -> Self {
        assert_eq!(entries.len(), dim * dim);
        Self { dim, entries }
    }

    pub fn zeros(dim_domain: usize, dim_ambient: usize) -> Self {
        Self {
            dim: dim_domain,
            entries: (0..dim_domain * dim_domain).map(|_| Vector::zeros(dim_ambient)).collect(),
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> &Vector {
        &self.entries[i * self.dim + j]
    }

    /// Bilinear form `D²φ(y)(u, v)`.
    pub fn apply(&self, u: &Vector, v: &Vector) -> Vector {
        let mut out = Vector::zeros(self.entries[0].len());
        for i in 0..self.dim {
            for j in 0..self.dim {
                let c = u[i] * v[j];
                if c != 0.0 {
                    out.axpy(c, self.entry(i, j), 1.0);
                }
            }
        }
        out
    }

    /// Operator norm bound `max_{|u|=1} |D²φ(u,u)|` estimated by the
    /// Frobenius norm of the table.
    pub fn norm_bound(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_squared()).sum::<f64>().sqrt()
    }
}

/// A parametrization `φ: V ⊂ ℝ^m₊ → ℝ^d` of a manifold patch.
///
/// Only [`Chart::phi`] and [`Chart::domain`] are mandatory; derivatives fall
/// back to finite differences.
pub trait Chart: Debug + Send + Sync {
    fn name(&self) -> &str;
    fn dim_domain(&self) -> usize;
    fn dim_ambient(&self) -> usize;
    fn domain(&self) -> &DomainBox;
    fn phi(&self, y: &Vector) -> Vector;

    fn jacobian_exact(&self, _y: &Vector) -> Option<Matrix> {
        None
    }

    fn second_derivative_exact(&self, _y: &Vector) -> Option<SecondDerivative> {
        None
    }

    /// Closed-form nearest parameter in the closed domain box, when known.
    fn closest_parameter(&self, _h: &Vector) -> Option<Vector> {
        None
    }

    /// `φ` affine: second derivatives vanish and the inverse extends linearly.
    fn is_affine(&self) -> bool {
        false
    }

    fn boundary_tol(&self) -> f64 {
        DEFAULT_BOUNDARY_TOL
    }
}

/// `Dφ(y)` without the rank check.
pub fn raw_jacobian<C: Chart + ?Sized>(chart: &C, y: &Vector) -> Matrix {
    chart.jacobian_exact(y).unwrap_or_else(|| fd_chart_jacobian(chart, y))
}

/// Finite-difference `Dφ(y)`: central differences with step
/// `cbrt(eps)·max(1, |yᵢ|)`, second-order one-sided at the `y₁ = 0` face.
pub fn fd_chart_jacobian<C: Chart + ?Sized>(chart: &C, y: &Vector) -> Matrix {
    let d = chart.dim_ambient();
    let m = chart.dim_domain();
    let mut jac = Matrix::zeros(d, m);
    let half_space = chart.domain().half_space();
    for i in 0..m {
        let h = f64::EPSILON.cbrt() * y[i].abs().max(1.0);
        let col = if i == 0 && half_space && y[0] - h < 0.0 {
            let base = y.clone();
            let mut y1 = y.clone();
            let mut y2 = y.clone();
            y1[0] += h;
            y2[0] += 2.0 * h;
            (chart.phi(&y1) * 4.0 - chart.phi(&base) * 3.0 - chart.phi(&y2)) / (2.0 * h)
        } else {
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp[i] += h;
            ym[i] -= h;
            (chart.phi(&yp) - chart.phi(&ym)) / (2.0 * h)
        };
        jac.set_column(i, &col);
    }
    jac
}

/// `Dφ(y)`; fails with [`Error::DegenerateChart`] when the Jacobian loses rank.
pub fn chart_jacobian<C: Chart + ?Sized>(chart: &C, y: &Vector) -> Result<Matrix> {
    let jac = raw_jacobian(chart, y);
    let ratio = singular_value_ratio(&jac);
    if !(ratio > RANK_TOL) {
        return Err(Error::DegenerateChart { ratio });
    }
    Ok(jac)
}

/// `D²φ(y)`; analytic if the chart provides it, else central second
/// differences with step `eps^{1/4}·max(1, |yᵢ|)`.
pub fn second_derivative<C: Chart + ?Sized>(chart: &C, y: &Vector) -> SecondDerivative {
    if chart.is_affine() {
        return SecondDerivative::zeros(chart.dim_domain(), chart.dim_ambient());
    }
    chart
        .second_derivative_exact(y)
        .unwrap_or_else(|| fd_second_derivative(chart, y))
}

pub fn fd_second_derivative<C: Chart + ?Sized>(chart: &C, y: &Vector) -> SecondDerivative {
    let m = chart.dim_domain();
    let steps: Vec<f64> = (0..m)
        .map(|i| f64::EPSILON.powf(0.25) * y[i].abs().max(1.0))
        .collect();
    let at = |shifts: &[(usize, f64)]| {
        let mut z = y.clone();
        for &(i, s) in shifts {
            z[i] += s;
        }
        chart.phi(&z)
    };
    let center = chart.phi(y);
    let mut entries = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            let (si, sj) = (steps[i], steps[j]);
            let e = if i == j {
                (at(&[(i, si)]) - &center * 2.0 + at(&[(i, -si)])) / (si * si)
            } else {
                (at(&[(i, si), (j, sj)]) - at(&[(i, si), (j, -sj)]) - at(&[(i, -si), (j, sj)])
                    + at(&[(i, -si), (j, -sj)]))
                    / (4.0 * si * sj)
            };
            entries.push(e);
        }
    }
    SecondDerivative::from_entries(m, entries)
}

/// Orthonormal tangent frame at `h = φ(y)`, with boundary data at boundary points.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentFrame {
    pub base_point: Vector,
    pub parameter: Vector,
    pub jacobian: Matrix,
    /// `d×m`, orthonormal columns spanning `T_hM`.
    pub basis: Matrix,
    pub is_boundary: bool,
    /// `d×(m−1)`, orthonormal columns spanning `T_h∂M`.
    pub boundary_basis: Option<Matrix>,
    /// Inward pointing unit normal `η_h` (tangent to `M`, normal to `∂M`).
    pub inward_normal: Option<Vector>,
}

impl TangentFrame {
    /// Orthogonal projector `B·Bᵀ` onto `T_hM`.
    pub fn projector(&self) -> Matrix {
        &self.basis * self.basis.transpose()
    }
}

pub fn tangent_frame<C: Chart + ?Sized>(chart: &C, y: &Vector) -> Result<TangentFrame> {
    let jacobian = chart_jacobian(chart, y)?;
    let basis = orthonormal_columns(&jacobian);
    let is_boundary = chart.domain().half_space() && y[0] <= chart.boundary_tol();
    let (boundary_basis, inward_normal) = if is_boundary {
        let m = jacobian.ncols();
        let rest = jacobian.columns(1, m - 1).into_owned();
        let bb = orthonormal_columns(&rest);
        let first = jacobian.column(0).into_owned();
        let eta = if m > 1 { &first - &bb * (bb.transpose() * &first) } else { first };
        let norm = eta.norm();
        if !(norm > 0.0) {
            return Err(Error::DegenerateChart { ratio: 0.0 });
        }
        (Some(bb), Some(eta / norm))
    } else {
        (None, None)
    };
    Ok(TangentFrame {
        base_point: chart.phi(y),
        parameter: y.clone(),
        jacobian,
        basis,
        is_boundary,
        boundary_basis,
        inward_normal,
    })
}

/// Splits `v` into its tangential part `B·Bᵀ·v` and the normal remainder.
pub fn project_tangent(frame: &TangentFrame, v: &Vector) -> (Vector, Vector) {
    let tan = &frame.basis * (frame.basis.transpose() * v);
    let perp = v - &tan;
    (tan, perp)
}

/// Position of a vector relative to `T_hM`, `(T_hM)₊` and `T_h∂M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    InteriorTangent,
    BoundaryTangent,
    Inward,
    Outward,
    NotTangent,
}

impl Direction {
    /// Member of the inward tangent cone `(T_hM)₊`.
    pub fn is_admissible(self) -> bool {
        matches!(self, Direction::InteriorTangent | Direction::BoundaryTangent | Direction::Inward)
    }
}

pub fn classify_direction(frame: &TangentFrame, v: &Vector, tol: f64) -> Direction {
    let (_, perp) = project_tangent(frame, v);
    if perp.norm() > tol * (1.0 + v.norm()) {
        return Direction::NotTangent;
    }
    match &frame.inward_normal {
        Some(eta) => {
            let c = eta.dot(v);
            if c.abs() <= tol {
                Direction::BoundaryTangent
            } else if c > tol {
                Direction::Inward
            } else {
                Direction::Outward
            }
        }
        None => Direction::InteriorTangent,
    }
}

/// Result of a chart inversion.
#[derive(Debug, Clone, PartialEq)]
pub struct Inversion {
    pub y: Vector,
    /// `‖φ(y) − h‖`.
    pub residual: f64,
    pub iterations: usize,
}

// Newton step on ‖φ(y) − h‖² with the curvature term Σ rᵢ D²φᵢ; `None`
// when that Hessian is not positive definite.
fn newton_step<C: Chart + ?Sized>(chart: &C, y: &Vector, jac: &Matrix, r: &Vector) -> Option<Vector> {
    let m = jac.ncols();
    let mut hess = jac.transpose() * jac;
    if !chart.is_affine() {
        let d2 = second_derivative(chart, y);
        for a in 0..m {
            for b in 0..m {
                hess[(a, b)] += r.dot(d2.entry(a, b));
            }
        }
    }
    let grad = jac.transpose() * r;
    hess.cholesky().map(|c| -c.solve(&grad))
}

/// Minimises `‖φ(y) − h‖²` by damped Gauss-Newton, projecting every iterate
/// onto the closed domain box (in particular `y₁ ≥ 0`). Where the full
/// Hessian is positive definite the Newton step replaces the Gauss-Newton
/// one, which keeps convergence fast for points far off the manifold.
pub fn invert_chart<C: Chart + ?Sized>(chart: &C, h: &Vector, guess: &Vector) -> Result<Inversion> {
    let dom = chart.domain();
    let mut y = dom.project(guess);
    let mut r = chart.phi(&y) - h;
    let mut f = r.norm_squared();
    for it in 1..=MAX_INVERSION_ITERATIONS {
        let jac = raw_jacobian(chart, &y);
        let step = newton_step(chart, &y, &jac, &r).unwrap_or_else(|| least_squares(&jac, &(-&r)));
        let mut t = 1.0;
        let mut accepted = None;
        while t >= 1e-10 {
            let trial = dom.project(&(&y + &step * t));
            let rt = chart.phi(&trial) - h;
            let ft = rt.norm_squared();
            if ft < f {
                accepted = Some((trial, rt, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((trial, rt, ft)) = accepted else {
            // no descent left: stationary to working precision
            return Ok(Inversion { y, residual: f.sqrt(), iterations: it });
        };
        let moved = dom.difference(&trial, &y).norm();
        y = trial;
        r = rt;
        f = ft;
        if moved < 1e-12 * y.norm().max(1.0) {
            return Ok(Inversion { y, residual: f.sqrt(), iterations: it });
        }
    }
    Err(Error::NoConvergence { residual: f.sqrt() })
}

/// Multi-start nearest point of the closed chart patch.
pub fn closest_point<C: Chart + ?Sized>(chart: &C, h: &Vector) -> Result<Inversion> {
    let starts = chart.domain().start_points(MULTI_START_COUNT, 1.0 + h.norm());
    let mut best: Option<Inversion> = None;
    let mut last_err = None;
    for s in starts {
        match invert_chart(chart, h, &s) {
            Ok(inv) => {
                if best.as_ref().is_none_or(|b| inv.residual < b.residual) {
                    best = Some(inv);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or(Error::NoConvergence { residual: f64::INFINITY }))
}

/// Distance from `h` to the closure of the chart patch.
pub fn distance_to_closure<C: Chart + ?Sized>(chart: &C, h: &Vector) -> Result<f64> {
    closest_point(chart, h).map(|inv| inv.residual)
}

/// Nearest parameter: closed form when the chart has one, else multi-start.
pub fn nearest_parameter<C: Chart + ?Sized>(chart: &C, h: &Vector) -> Result<Inversion> {
    if let Some(y) = chart.closest_parameter(h) {
        let residual = (chart.phi(&y) - h).norm();
        return Ok(Inversion { y, residual, iterations: 0 });
    }
    closest_point(chart, h)
}

/// Nearest parameter near a known parameter `hint`: closed form, else
/// Gauss-Newton from the hint, else multi-start.
pub fn refine_parameter<C: Chart + ?Sized>(chart: &C, h: &Vector, hint: &Vector) -> Result<Inversion> {
    if let Some(y) = chart.closest_parameter(h) {
        let residual = (chart.phi(&y) - h).norm();
        return Ok(Inversion { y, residual, iterations: 0 });
    }
    match invert_chart(chart, h, hint) {
        Ok(inv) if inv.residual <= 1e-10 * (1.0 + h.norm()) => Ok(inv),
        _ => closest_point(chart, h),
    }
}

/// Unit circle (or circle of radius `r`) in the plane, angle chart.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleChart {
    radius: f64,
    domain: DomainBox,
}

impl CircleChart {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Model("circle radius must be positive".into()));
        }
        let domain = DomainBox::new(alloc::vec![CoordinateRange::periodic(0.0, 2.0 * PI)], false)?;
        Ok(Self { radius, domain })
    }

    pub fn unit() -> Self {
        Self::new(1.0).expect("unit circle")
    }
}

impl Chart for CircleChart {
    fn name(&self) -> &str {
        "circle"
    }
    fn dim_domain(&self) -> usize {
        1
    }
    fn dim_ambient(&self) -> usize {
        2
    }
    fn domain(&self) -> &DomainBox {
        &self.domain
    }
    fn phi(&self, y: &Vector) -> Vector {
        Vector::from_vec(alloc::vec![self.radius * y[0].cos(), self.radius * y[0].sin()])
    }
    fn jacobian_exact(&self, y: &Vector) -> Option<Matrix> {
        Some(Matrix::from_column_slice(2, 1, &[-self.radius * y[0].sin(), self.radius * y[0].cos()]))
    }
    fn second_derivative_exact(&self, y: &Vector) -> Option<SecondDerivative> {
        Some(SecondDerivative::from_entries(
            1,
            alloc::vec![Vector::from_vec(alloc::vec![
                -self.radius * y[0].cos(),
                -self.radius * y[0].sin()
            ])],
        ))
    }
    fn closest_parameter(&self, h: &Vector) -> Option<Vector> {
        let angle = if h.norm() == 0.0 { 0.0 } else { h[1].atan2(h[0]) };
        Some(self.domain.wrap(&Vector::from_vec(alloc::vec![angle])))
    }
}

/// Polar chart of the annulus `inner ≤ |h| ≤ outer`:
/// `φ(y) = (outer − y₁)(cos y₂, sin y₂)`, boundary `y₁ = 0` on the outer circle.
#[derive(Debug, Clone, PartialEq)]
pub struct BallAnnulusChart {
    outer: f64,
    inner: f64,
    domain: DomainBox,
}

impl BallAnnulusChart {
    pub fn new(outer: f64, inner: f64) -> Result<Self> {
        if !(inner > 0.0 && inner < outer && outer.is_finite()) {
            return Err(Error::Model("annulus needs 0 < inner < outer".into()));
        }
        let domain = DomainBox::new(
            alloc::vec![
                CoordinateRange::closed(0.0, outer - inner),
                CoordinateRange::periodic(0.0, 2.0 * PI)
            ],
            true,
        )?;
        Ok(Self { outer, inner, domain })
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer
    }
}

impl Chart for BallAnnulusChart {
    fn name(&self) -> &str {
        "ball_annulus"
    }
    fn dim_domain(&self) -> usize {
        2
    }
    fn dim_ambient(&self) -> usize {
        2
    }
    fn domain(&self) -> &DomainBox {
        &self.domain
    }
    fn phi(&self, y: &Vector) -> Vector {
        let r = self.outer - y[0];
        Vector::from_vec(alloc::vec![r * y[1].cos(), r * y[1].sin()])
    }
    fn jacobian_exact(&self, y: &Vector) -> Option<Matrix> {
        let r = self.outer - y[0];
        let (s, c) = y[1].sin_cos();
        Some(Matrix::from_column_slice(2, 2, &[-c, -s, -r * s, r * c]))
    }
    fn second_derivative_exact(&self, y: &Vector) -> Option<SecondDerivative> {
        let r = self.outer - y[0];
        let (s, c) = y[1].sin_cos();
        let d11 = Vector::zeros(2);
        let d12 = Vector::from_vec(alloc::vec![s, -c]);
        let d22 = Vector::from_vec(alloc::vec![-r * c, -r * s]);
        Some(SecondDerivative::from_entries(2, alloc::vec![d11, d12.clone(), d12, d22]))
    }
    fn closest_parameter(&self, h: &Vector) -> Option<Vector> {
        let r = h.norm();
        let angle = if r == 0.0 { 0.0 } else { h[1].atan2(h[0]) };
        let y1 = (self.outer - r).max(0.0).min(self.outer - self.inner);
        Some(self.domain.wrap(&Vector::from_vec(alloc::vec![y1, angle])))
    }
}

/// Affine chart `φ(y) = offset + Σ yᵢ vᵢ` over a box; covers polyhedral
/// cones, intervals and flat pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineChart {
    name: String,
    offset: Vector,
    basis: Matrix,
    left_inverse: Matrix,
    domain: DomainBox,
}

impl AffineChart {
    pub fn new(name: &str, offset: Vector, basis: Matrix, domain: DomainBox) -> Result<Self> {
        if basis.nrows() != offset.len() || basis.ncols() != domain.dim() {
            return Err(Error::Model("affine chart dimensions disagree".into()));
        }
        if !(singular_value_ratio(&basis) > RANK_TOL) {
            return Err(Error::DegenerateChart { ratio: singular_value_ratio(&basis) });
        }
        let left_inverse = left_inverse(&basis).ok_or(Error::DegenerateChart { ratio: 0.0 })?;
        Ok(Self { name: name.into(), offset, basis, left_inverse, domain })
    }

    /// Polyhedral cone `{Σ yᵢ vᵢ : yᵢ ≥ 0}`; the facet `y₁ = 0` is the chart boundary.
    pub fn cone(generators: &[Vector]) -> Result<Self> {
        let d = generators.first().map(Vector::len).unwrap_or(0);
        if d == 0 || generators.iter().any(|g| g.len() != d) {
            return Err(Error::Model("cone generators must share a positive dimension".into()));
        }
        let basis = Matrix::from_columns(generators);
        let ranges = generators.iter().map(|_| CoordinateRange::half_line()).collect();
        Self::new("cone", Vector::zeros(d), basis, DomainBox::new(ranges, true)?)
    }

    /// The interval `[lo, lo + len]` (or `[lo, lo + len)`) of the real line.
    pub fn interval(lo: f64, len: f64, hi_open: bool) -> Result<Self> {
        let domain = DomainBox::new(
            alloc::vec![CoordinateRange::closed(0.0, len).with_hi_open(hi_open)],
            true,
        )?;
        Self::new(
            "interval",
            Vector::from_vec(alloc::vec![lo]),
            Matrix::from_element(1, 1, 1.0),
            domain,
        )
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn offset(&self) -> &Vector {
        &self.offset
    }

    /// Linear extension of the inverse, `Dφ⁺(h − offset)`.
    pub fn linear_inverse(&self, h: &Vector) -> Vector {
        &self.left_inverse * (h - &self.offset)
    }
}

impl Chart for AffineChart {
    fn name(&self) -> &str {
        &self.name
    }
    fn dim_domain(&self) -> usize {
        self.basis.ncols()
    }
    fn dim_ambient(&self) -> usize {
        self.basis.nrows()
    }
    fn domain(&self) -> &DomainBox {
        &self.domain
    }
    fn phi(&self, y: &Vector) -> Vector {
        &self.offset + &self.basis * y
    }
    fn jacobian_exact(&self, _y: &Vector) -> Option<Matrix> {
        Some(self.basis.clone())
    }
    fn closest_parameter(&self, h: &Vector) -> Option<Vector> {
        let y = self.linear_inverse(h);
        self.domain.contains(&y, 0.0).then_some(y)
    }
    fn is_affine(&self) -> bool {
        true
    }
}

/// A list of charts covering a manifold; queries use the chart whose
/// inversion residual is smallest. The first chart is the primary one.
#[derive(Debug, Clone)]
pub struct Atlas {
    charts: Vec<Arc<dyn Chart>>,
}

impl Atlas {
    pub fn new(charts: Vec<Arc<dyn Chart>>) -> Result<Self> {
        let Some(first) = charts.first() else {
            return Err(Error::Model("atlas needs at least one chart".into()));
        };
        let (d, m) = (first.dim_ambient(), first.dim_domain());
        if charts.iter().any(|c| c.dim_ambient() != d || c.dim_domain() != m) {
            return Err(Error::Model("atlas charts disagree in dimension".into()));
        }
        Ok(Self { charts })
    }

    pub fn single(chart: Arc<dyn Chart>) -> Self {
        Self { charts: alloc::vec![chart] }
    }

    pub fn from_chart<C: Chart + 'static>(chart: C) -> Self {
        Self::single(Arc::new(chart))
    }

    pub fn primary(&self) -> &Arc<dyn Chart> {
        &self.charts[0]
    }

    pub fn charts(&self) -> &[Arc<dyn Chart>] {
        &self.charts
    }

    pub fn dim_ambient(&self) -> usize {
        self.charts[0].dim_ambient()
    }

    pub fn dim_domain(&self) -> usize {
        self.charts[0].dim_domain()
    }

    /// Chart with the smallest inversion residual at `h`.
    pub fn select(&self, h: &Vector) -> Result<(usize, Inversion)> {
        let mut best: Option<(usize, Inversion)> = None;
        let mut err = None;
        for (i, c) in self.charts.iter().enumerate() {
            match nearest_parameter(c.as_ref(), h) {
                Ok(inv) => {
                    let exact = inv.residual <= 1e-14 * (1.0 + h.norm());
                    if best.as_ref().is_none_or(|(_, b)| inv.residual < b.residual) {
                        best = Some((i, inv));
                    }
                    if exact {
                        break;
                    }
                }
                Err(e) => err = Some(e),
            }
        }
        best.ok_or_else(|| err.unwrap_or(Error::NoConvergence { residual: f64::INFINITY }))
    }

    /// Distance from `h` to the closure of the union of the chart patches.
    pub fn distance_to_closure(&self, h: &Vector) -> Result<f64> {
        self.select(h).map(|(_, inv)| inv.residual)
    }

    /// Strict membership: some chart reaches `h` within `tol` at a parameter
    /// inside its domain with open ends excluded.
    pub fn contains(&self, h: &Vector, tol: f64) -> Result<bool> {
        for c in &self.charts {
            let inv = nearest_parameter(c.as_ref(), h)?;
            if inv.residual <= tol && c.domain().contains_strict(&inv.y, 1e-12) {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Boxed form of a chart, convenient for builders.
pub type BoxedChart = Box<dyn Chart>;
