//! Product-form Lévy measures `F(B) = Σ_k ∫ 1_B(x e_k) F_k(dx)` on `ℝ^e`.
//!
//! Each scalar measure `F_k` is a density profile plus atoms. Integrals are
//! computed on dyadic shells with a Gauss-Legendre rule per shell; big jumps
//! are sampled as a compound Poisson stream.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::quadrature::GaussLegendre;
use crate::{Error, Result, Vector};

/// Nodes per shell of the integration rule.
pub const SHELL_NODES: usize = 32;
/// Shells are cut off after this many halvings or doublings.
pub const MAX_SHELLS: usize = 200;
/// Contribution below this fraction of the running total counts as negligible.
pub const SHELL_REL_TOL: f64 = 1e-12;
/// Shell contributions below this are roundoff, whatever the running total.
pub const SHELL_ABS_TOL: f64 = 1e-14;
/// Shell ratio that, sustained over [`DIVERGENCE_RUN`] shells, signals divergence.
pub const DIVERGENCE_RATIO: f64 = 0.9;
pub const DIVERGENCE_RUN: usize = 5;

const CELLS_PER_SHELL: usize = 32;
const CELL_NODES: usize = 8;

/// Which half-lines carry the density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    Positive,
    Negative,
    TwoSided,
}

impl Support {
    fn signs(self) -> &'static [f64] {
        match self {
            Support::Positive => &[1.0],
            Support::Negative => &[-1.0],
            Support::TwoSided => &[1.0, -1.0],
        }
    }
}

/// Shape of `|x| ↦ density` on one side of the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum DensityProfile {
    /// `scale·|x|^{−1−beta}` on `lo < |x| ≤ hi` (`hi = None` means unbounded).
    Power {
        scale: f64,
        beta: f64,
        #[serde(default)]
        lo: f64,
        #[serde(default)]
        hi: Option<f64>,
    },
    /// `scale·e^{−lambda·|x|}` on `|x| > 0`.
    ExpTilted { scale: f64, lambda: f64 },
    /// `rate` on `lo < |x| ≤ hi`.
    Uniform {
        rate: f64,
        #[serde(default)]
        lo: f64,
        hi: f64,
    },
}

impl DensityProfile {
    /// Closed interval of magnitudes carrying mass.
    pub fn range(&self) -> (f64, f64) {
        match *self {
            DensityProfile::Power { lo, hi, .. } => (lo, hi.unwrap_or(f64::INFINITY)),
            DensityProfile::ExpTilted { .. } => (0.0, f64::INFINITY),
            DensityProfile::Uniform { lo, hi, .. } => (lo, hi),
        }
    }

    /// Density formula at magnitude `r > 0`, ignoring the range cut-offs.
    fn formula(&self, r: f64) -> f64 {
        match *self {
            DensityProfile::Power { scale, beta, .. } => scale * r.powf(-1.0 - beta),
            DensityProfile::ExpTilted { scale, lambda } => scale * (-lambda * r).exp(),
            DensityProfile::Uniform { rate, .. } => rate,
        }
    }

    /// Density at magnitude `r`.
    pub fn value(&self, r: f64) -> f64 {
        let (lo, hi) = self.range();
        if r > lo && r <= hi && r > 0.0 {
            self.formula(r)
        } else {
            0.0
        }
    }

    fn heavy_tailed(&self) -> bool {
        matches!(self, DensityProfile::Power { hi: None, .. })
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            DensityProfile::Power { scale, beta, lo, hi } => {
                scale >= 0.0
                    && beta.is_finite()
                    && lo >= 0.0
                    && hi.is_none_or(|h| h > lo && h.is_finite())
                    && scale.is_finite()
            }
            DensityProfile::ExpTilted { scale, lambda } => {
                scale >= 0.0 && scale.is_finite() && lambda > 0.0 && lambda.is_finite()
            }
            DensityProfile::Uniform { rate, lo, hi } => {
                rate >= 0.0 && rate.is_finite() && lo >= 0.0 && hi > lo && hi.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Model("malformed density parameters".into()))
        }
    }
}

/// Activity of a scalar Lévy measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activity {
    /// Finite mass.
    A,
    /// Infinite mass, `∫|x|F < ∞`.
    B,
    /// `∫|x|F = ∞`.
    C,
}

/// Sidedness of an infinite-activity, finite-variation measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BSubclass {
    BPlus,
    BPlusMinus,
    /// Mirror image of `BPlus`: infinite mass only on the negative half-line.
    BMinus,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityClass {
    pub class: Activity,
    pub b_subclass: BSubclass,
}

/// One scalar Lévy measure `F_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyComponent {
    density: Option<DensityProfile>,
    atoms: Vec<(f64, f64)>,
    singularity: Option<f64>,
    support: Support,
}

impl LevyComponent {
    /// Builds and validates a component. `singularity` is the declared `β`
    /// with `density ~ c·|x|^{−1−β}` near 0; `None` declares a bounded density.
    pub fn new(
        density: Option<DensityProfile>,
        atoms: Vec<(f64, f64)>,
        singularity: Option<f64>,
        support: Support,
    ) -> Result<Self> {
        if let Some(d) = &density {
            d.validate()?;
        }
        for &(loc, mass) in &atoms {
            if loc == 0.0 || !loc.is_finite() {
                return Err(Error::Model("atoms must sit away from the origin".into()));
            }
            if !(mass >= 0.0 && mass.is_finite()) {
                return Err(Error::Model("atom masses must be finite and nonnegative".into()));
            }
        }
        if let Some(beta) = singularity {
            if !(beta > -1.0 && beta < 2.0) {
                return Err(Error::Model(alloc::format!(
                    "singularity exponent {beta} outside (-1, 2); ∫x²F would diverge"
                )));
            }
            if density.is_none() {
                return Err(Error::Model("a singularity exponent needs a density".into()));
            }
        }
        let c = Self { density, atoms, singularity, support };
        c.check_declaration()?;
        Ok(c)
    }

    pub fn atoms_only(atoms: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(None, atoms, None, Support::TwoSided)
    }

    pub fn density_profile(&self) -> Option<&DensityProfile> {
        self.density.as_ref()
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn singularity(&self) -> Option<f64> {
        self.singularity
    }

    pub fn support(&self) -> Support {
        self.support
    }

    /// Density at a signed mark value.
    pub fn density_at(&self, x: f64) -> f64 {
        let Some(d) = &self.density else { return 0.0 };
        let side_ok = match self.support {
            Support::Positive => x > 0.0,
            Support::Negative => x < 0.0,
            Support::TwoSided => x != 0.0,
        };
        if side_ok {
            d.value(x.abs())
        } else {
            0.0
        }
    }

    // Compares the density decay between x_s and 16·x_s with the declared exponent.
    fn check_declaration(&self) -> Result<()> {
        let Some(d) = &self.density else { return Ok(()) };
        let (lo, hi) = d.range();
        let top = hi.min(1.0) * 0.5;
        let xs = top / 16.0;
        if xs <= lo {
            return Ok(());
        }
        let (near, far) = (d.formula(xs), d.formula(top));
        if !(near > 0.0 && far > 0.0) {
            return Ok(());
        }
        let exponent = self.singularity.map_or(0.0, |b| 1.0 + b);
        let predicted = 16f64.powf(exponent);
        let observed = near / far;
        let mismatch = (observed / predicted).max(predicted / observed);
        if mismatch > 10.0 {
            return Err(Error::Model(alloc::format!(
                "declared singularity contradicts the density (ratio {observed:.3e} vs {predicted:.3e})"
            )));
        }
        Ok(())
    }

    pub fn classify(&self) -> ActivityClass {
        let class = match self.singularity {
            None => Activity::A,
            Some(b) if b < 0.0 => Activity::A,
            Some(b) if b < 1.0 => Activity::B,
            Some(_) => Activity::C,
        };
        let b_subclass = if class == Activity::B {
            match self.support {
                Support::Positive => BSubclass::BPlus,
                Support::Negative => BSubclass::BMinus,
                Support::TwoSided => BSubclass::BPlusMinus,
            }
        } else {
            BSubclass::NotApplicable
        };
        ActivityClass { class, b_subclass }
    }

    /// `(lo, hi)` magnitude interval of the density intersected with a band.
    fn band(&self, region: Region) -> Option<(f64, f64)> {
        let d = self.density.as_ref()?;
        let (dlo, dhi) = d.range();
        let (blo, bhi) = region.bounds();
        let lo = dlo.max(blo);
        let hi = dhi.min(bhi);
        (lo < hi).then_some((lo, hi))
    }
}

/// Mark magnitude band `lo ≤ |x| < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    All,
    /// `B^c = {|x| ≥ ε}`.
    Big(f64),
    /// `B = {|x| < ε}`.
    Small(f64),
    Band { lo: f64, hi: f64 },
}

impl Region {
    pub fn bounds(self) -> (f64, f64) {
        match self {
            Region::All => (0.0, f64::INFINITY),
            Region::Big(eps) => (eps, f64::INFINITY),
            Region::Small(eps) => (0.0, eps),
            Region::Band { lo, hi } => (lo, hi),
        }
    }

    pub fn contains(self, x: f64) -> bool {
        let (lo, hi) = self.bounds();
        let r = x.abs();
        r >= lo && r < hi
    }

    pub fn intersect(self, other: Region) -> Region {
        let (a, b) = self.bounds();
        let (c, d) = other.bounds();
        Region::Band { lo: a.max(c), hi: b.min(d) }
    }
}

enum Step {
    Continue,
    Stop,
    Diverge,
}

struct DecayTracker {
    prev: Option<f64>,
    high: usize,
    small: usize,
    divergence: bool,
}

impl DecayTracker {
    fn new(divergence: bool) -> Self {
        Self { prev: None, high: 0, small: 0, divergence }
    }

    fn push(&mut self, c: f64, scale: f64) -> Step {
        if c <= SHELL_REL_TOL * scale || c <= SHELL_ABS_TOL {
            self.small += 1;
            if self.small >= 2 {
                return Step::Stop;
            }
            // noise does not count towards divergence
            self.prev = None;
            return Step::Continue;
        } else {
            self.small = 0;
        }
        if self.divergence {
            if let Some(p) = self.prev {
                if p > 0.0 && c / p >= DIVERGENCE_RATIO {
                    self.high += 1;
                    if self.high >= DIVERGENCE_RUN {
                        return Step::Diverge;
                    }
                } else {
                    self.high = 0;
                }
            }
        }
        self.prev = Some(c);
        Step::Continue
    }
}

/// Walks dyadic shells covering `(lo, hi]`: doubling shells `[2^j, 2^{j+1}]`
/// above 1 and halving shells below `min(hi, 1)`. `eval(a, b)` integrates one
/// shell and returns the norm of its contribution.
fn walk_shells<F>(lo: f64, hi: f64, heavy_tail: bool, mut eval: F) -> core::result::Result<(), f64>
where
    F: FnMut(f64, f64) -> f64,
{
    let mut scale = 0.0;
    if hi > 1.0 {
        let start = lo.max(1.0);
        let mut j = start.log2().floor() as i32;
        let mut tracker = DecayTracker::new(heavy_tail);
        for _ in 0..MAX_SHELLS {
            let a = 2f64.powi(j).max(start);
            if a >= hi {
                break;
            }
            let b = 2f64.powi(j + 1).min(hi);
            let c = eval(a, b);
            scale += c;
            if hi.is_infinite() {
                match tracker.push(c, scale) {
                    Step::Continue => {}
                    Step::Stop => break,
                    Step::Diverge => return Err(scale),
                }
            }
            j += 1;
        }
    }
    if lo < 1.0 {
        let mut b = hi.min(1.0);
        let mut tracker = DecayTracker::new(lo == 0.0);
        for _ in 0..MAX_SHELLS {
            let a = (0.5 * b).max(lo);
            let c = eval(a, b);
            scale += c;
            if a <= lo {
                break;
            }
            match tracker.push(c, scale) {
                Step::Continue => {}
                Step::Stop => break,
                Step::Diverge => return Err(scale),
            }
            b = a;
        }
    }
    Ok(())
}

/// Result of a big/small jump split at threshold `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BigSmallSplit {
    pub epsilon: f64,
    /// `B = {|x| < ε}` per coordinate axis.
    pub small: Region,
    pub big: Region,
    /// `F(B^c)`.
    pub big_mass: f64,
}

/// Product-form Lévy measure on `ℝ^e`.
#[derive(Debug, Clone)]
pub struct LevyMeasure {
    components: Vec<LevyComponent>,
    quad: GaussLegendre,
}

impl PartialEq for LevyMeasure {
    fn eq(&self, other: &Self) -> bool {
        self.components == other.components
    }
}

impl LevyMeasure {
    pub fn new(components: Vec<LevyComponent>) -> Self {
        Self { components, quad: GaussLegendre::new(SHELL_NODES) }
    }

    /// The zero measure on `ℝ^e`.
    pub fn zero(e: usize) -> Self {
        Self::new((0..e).map(|_| LevyComponent::atoms_only(Vec::new()).expect("empty")).collect())
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[LevyComponent] {
        &self.components
    }

    pub fn classes(&self) -> Vec<ActivityClass> {
        self.components.iter().map(LevyComponent::classify).collect()
    }

    pub fn all_finite_activity(&self) -> bool {
        self.classes().iter().all(|c| c.class == Activity::A)
    }

    /// `∫_{region} g(ξ) F_k(dξ)` for a scalar mark `ξ` of component `k`.
    pub fn integrate_component<G>(&self, k: usize, out_dim: usize, region: Region, mut g: G) -> Result<Vector>
    where
        G: FnMut(f64) -> Vector,
    {
        let comp = &self.components[k];
        let mut total = Vector::zeros(out_dim);
        for &(loc, mass) in &comp.atoms {
            if region.contains(loc) && mass > 0.0 {
                total.axpy(mass, &g(loc), 1.0);
            }
        }
        if let (Some(d), Some((lo, hi))) = (comp.density.as_ref(), comp.band(region)) {
            for &sign in comp.support.signs() {
                let mut side = Vector::zeros(out_dim);
                let walked = walk_shells(lo, hi, d.heavy_tailed(), |a, b| {
                    let mut shell = Vector::zeros(out_dim);
                    for (r, w) in self.quad.mapped(a, b) {
                        let dens = d.formula(r);
                        if dens != 0.0 {
                            shell.axpy(w * dens, &g(sign * r), 1.0);
                        }
                    }
                    let n = shell.norm();
                    side += shell;
                    n
                });
                if let Err(partial) = walked {
                    return Err(Error::NonIntegrable { partial });
                }
                total += side;
            }
        }
        Ok(total)
    }

    /// `∫_{region} g(x) F(dx) = Σ_k ∫ g(ξ e_k) F_k(dξ)`.
    pub fn integrate<G>(&self, out_dim: usize, region: Region, mut g: G) -> Result<Vector>
    where
        G: FnMut(&Vector) -> Vector,
    {
        let e = self.dim();
        let mut total = Vector::zeros(out_dim);
        for k in 0..e {
            total += self.integrate_component(k, out_dim, region, |xi| g(&axis_mark(e, k, xi)))?;
        }
        Ok(total)
    }

    pub fn integrate_scalar<G>(&self, region: Region, mut g: G) -> Result<f64>
    where
        G: FnMut(&Vector) -> f64,
    {
        self.integrate(1, region, |x| Vector::from_element(1, g(x))).map(|v| v[0])
    }

    /// `F(region)`; infinite mass is reported as [`Error::InfiniteMass`].
    pub fn mass(&self, region: Region) -> Result<f64> {
        match self.integrate_scalar(region, |_| 1.0) {
            Err(Error::NonIntegrable { .. }) => Err(Error::InfiniteMass),
            other => other,
        }
    }

    pub fn component_mass(&self, k: usize, region: Region) -> Result<f64> {
        match self.integrate_component(k, 1, region, |_| Vector::from_element(1, 1.0)) {
            Err(Error::NonIntegrable { .. }) => Err(Error::InfiniteMass),
            other => other.map(|v| v[0]),
        }
    }

    /// Splits marks at `|x| = ε` and returns `F(B^c)`.
    pub fn split_big_small(&self, epsilon: f64) -> Result<BigSmallSplit> {
        if !(epsilon > 0.0) {
            return Err(Error::Config("split threshold must be positive".into()));
        }
        Ok(BigSmallSplit {
            epsilon,
            small: Region::Small(epsilon),
            big: Region::Big(epsilon),
            big_mass: self.mass(Region::Big(epsilon))?,
        })
    }

    /// Nodes and weights of the shell quadrature on `region`, so that
    /// `Σ w·g(x)` approximates `∫_{region} g dF` for integrands that grow no
    /// faster than `proxy(|x|)`. Fails where `proxy` is not integrable.
    pub fn quadrature_rule<P>(&self, region: Region, per_shell: usize, mut proxy: P) -> Result<Vec<(Vector, f64)>>
    where
        P: FnMut(f64) -> f64,
    {
        let e = self.dim();
        let rule = GaussLegendre::new(per_shell.max(1));
        let mut out = Vec::new();
        for (k, comp) in self.components.iter().enumerate() {
            for &(loc, mass) in &comp.atoms {
                if region.contains(loc) && mass > 0.0 {
                    out.push((axis_mark(e, k, loc), mass));
                }
            }
            let (Some(d), Some((lo, hi))) = (comp.density.as_ref(), comp.band(region)) else { continue };
            for &sign in comp.support.signs() {
                let walked = walk_shells(lo, hi, d.heavy_tailed(), |a, b| {
                    let mut shell = 0.0;
                    for (r, w) in rule.mapped(a, b) {
                        let wd = w * d.formula(r);
                        if wd != 0.0 {
                            out.push((axis_mark(e, k, sign * r), wd));
                            shell += wd * proxy(r);
                        }
                    }
                    shell
                });
                if let Err(partial) = walked {
                    return Err(Error::NonIntegrable { partial });
                }
            }
        }
        Ok(out)
    }

    /// Deterministic mark grid: atoms plus `per_shell` Gauss nodes on each
    /// dyadic shell between `floor` and `ceil` (clipped to the support).
    pub fn mark_nodes(&self, per_shell: usize, floor: f64, ceil: f64) -> Vec<Vector> {
        let e = self.dim();
        let rule = GaussLegendre::new(per_shell.max(1));
        let mut out = Vec::new();
        for (k, comp) in self.components.iter().enumerate() {
            for &(loc, _) in &comp.atoms {
                out.push(axis_mark(e, k, loc));
            }
            let Some((lo, hi)) = comp.band(Region::All) else { continue };
            let (lo, hi) = (lo.max(floor), hi.min(ceil));
            if lo >= hi {
                continue;
            }
            for &sign in comp.support.signs() {
                let mut b = hi;
                while b > lo {
                    let a = if b > 1.0 { (0.5 * b).max(1.0).max(lo) } else { (0.5 * b).max(lo) };
                    for (r, _) in rule.mapped(a, b) {
                        out.push(axis_mark(e, k, sign * r));
                    }
                    b = a;
                }
            }
        }
        out
    }
}

/// `ξ e_k ∈ ℝ^e`.
pub fn axis_mark(e: usize, k: usize, xi: f64) -> Vector {
    let mut x = Vector::zeros(e);
    x[k] = xi;
    x
}

/// One sampled jump: time, component index and scalar mark value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub time: f64,
    pub component: usize,
    pub value: f64,
}

/// Time-ordered jump events on `(0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpEventStream {
    pub events: Vec<JumpEvent>,
    pub horizon: f64,
    pub seed: u64,
}

impl JumpEventStream {
    pub fn mark(&self, event: &JumpEvent, e: usize) -> Vector {
        axis_mark(e, event.component, event.value)
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    component: usize,
    sign: f64,
    a: f64,
    b: f64,
    density: Option<DensityProfile>,
}

/// Compound-Poisson sampler of the marks of `F` restricted to a region of
/// finite mass, driven by an inverse-CDF table on the shell grid.
#[derive(Debug, Clone)]
pub struct EventSampler {
    cells: Vec<Cell>,
    cdf: Vec<f64>,
    total: f64,
    dim: usize,
}

impl EventSampler {
    pub fn new(measure: &LevyMeasure, region: Region) -> Result<Self> {
        let rule = GaussLegendre::new(CELL_NODES);
        let mut cells = Vec::new();
        let mut masses = Vec::new();
        for (k, comp) in measure.components().iter().enumerate() {
            for &(loc, mass) in &comp.atoms {
                if region.contains(loc) && mass > 0.0 {
                    cells.push(Cell { component: k, sign: loc.signum(), a: loc.abs(), b: loc.abs(), density: None });
                    masses.push(mass);
                }
            }
            let (Some(d), Some((lo, hi))) = (comp.density, comp.band(region)) else { continue };
            if lo == 0.0 && comp.classify().class != Activity::A {
                return Err(Error::InfiniteMass);
            }
            for &sign in comp.support.signs() {
                let walked = walk_shells(lo, hi, d.heavy_tailed(), |a, b| {
                    let width = (b - a) / CELLS_PER_SHELL as f64;
                    let mut shell = 0.0;
                    for i in 0..CELLS_PER_SHELL {
                        let (ca, cb) = (a + i as f64 * width, if i + 1 == CELLS_PER_SHELL { b } else { a + (i + 1) as f64 * width });
                        let m = rule.integrate(ca, cb, |r| d.formula(r));
                        if m > 0.0 {
                            cells.push(Cell { component: k, sign, a: ca, b: cb, density: Some(d) });
                            masses.push(m);
                            shell += m;
                        }
                    }
                    shell
                });
                if walked.is_err() {
                    return Err(Error::InfiniteMass);
                }
            }
        }
        let mut cdf = Vec::with_capacity(masses.len());
        let mut acc = 0.0;
        for m in &masses {
            acc += m;
            cdf.push(acc);
        }
        if !acc.is_finite() {
            return Err(Error::InfiniteMass);
        }
        Ok(Self { cells, cdf, total: acc, dim: measure.dim() })
    }

    /// `F(region)` as tabulated.
    pub fn total_mass(&self) -> f64 {
        self.total
    }

    /// Draws one `(component, value)` from the normalised restricted measure.
    pub fn sample_mark<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, f64) {
        let u = rng.random::<f64>() * self.total;
        let idx = self.cdf.partition_point(|&c| c <= u).min(self.cells.len() - 1);
        let cell = self.cells[idx];
        let r = match cell.density {
            None => cell.a,
            Some(d) => {
                // the in-scope densities are monotone in |x|, so the cell
                // endpoints bound the density from above
                let bound = d.formula(cell.a).max(d.formula(cell.b));
                loop {
                    let r = cell.a + (cell.b - cell.a) * rng.random::<f64>();
                    if rng.random::<f64>() * bound <= d.formula(r) {
                        break r;
                    }
                }
            }
        };
        (cell.component, cell.sign * r)
    }

    /// Marks of `n` independent draws, as vectors in `ℝ^e`.
    pub fn sample_marks(&self, n: usize, seed: u64) -> Vec<Vector> {
        if self.total <= 0.0 {
            return Vec::new();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let (k, v) = self.sample_mark(&mut rng);
                axis_mark(self.dim, k, v)
            })
            .collect()
    }

    /// Events on `(0, T]` using `rng`.
    pub fn sample_with<R: Rng + ?Sized>(&self, horizon: f64, rng: &mut R) -> Vec<JumpEvent> {
        let lambda = self.total * horizon;
        if !(lambda > 0.0) {
            return Vec::new();
        }
        let count = Poisson::new(lambda).map(|p| p.sample(rng)).unwrap_or(0.0) as usize;
        let mut times: Vec<f64> = (0..count).map(|_| horizon * (1.0 - rng.random::<f64>())).collect();
        times.sort_by(f64::total_cmp);
        for i in 1..times.len() {
            if times[i] <= times[i - 1] {
                times[i] = times[i - 1].next_up();
            }
        }
        times
            .into_iter()
            .map(|time| {
                let (component, value) = self.sample_mark(rng);
                JumpEvent { time, component, value }
            })
            .collect()
    }

    pub fn sample(&self, horizon: f64, seed: u64) -> JumpEventStream {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        JumpEventStream { events: self.sample_with(horizon, &mut rng), horizon, seed }
    }
}

/// One-shot compound-Poisson stream of the marks of `F` in `region`.
pub fn sample_events(measure: &LevyMeasure, region: Region, horizon: f64, seed: u64) -> Result<JumpEventStream> {
    Ok(EventSampler::new(measure, region)?.sample(horizon, seed))
}
