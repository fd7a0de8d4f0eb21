//! One-parameter automorphism groups: axioms, generators, the group-integral
//! identities, the Hille–Yosida necessity checks, and Yosida synthesis.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::{boundedness, QuasiAlgebra};
use crate::derivations::Derivation;
use crate::element::Element;
use crate::error::{QuasiError, Result};
use crate::extrapolate::{neville_at_zero, simpson};
use crate::forms::{max_seminorm, FormFamily, Topology};
use crate::linalg::{c, identity, inverse, matrix_power, singular_extremes, CMatrix};
use crate::operator::Operator;
use crate::weak::{WeakOutcome, WeakProduct};

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Conjugation(Element),
    Yosida,
    Translation,
    Custom(String),
}

impl Provenance {
    pub fn name(&self) -> &'static str {
        match self {
            Provenance::Conjugation(_) => "conjugation",
            Provenance::Yosida => "yosida",
            Provenance::Translation => "translation",
            Provenance::Custom(_) => "custom",
        }
    }
}

pub type GroupMap = Arc<dyn Fn(f64) -> Result<Operator> + Send + Sync>;

/// `t ↦ β_t`. `β_0` is the identity exactly.
#[derive(Clone)]
pub struct AutoGroup {
    dim: usize,
    provenance: Provenance,
    bound: f64,
    evaluate: GroupMap,
}

impl fmt::Debug for AutoGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AutoGroup")
            .field("dim", &self.dim)
            .field("provenance", &self.provenance)
            .field("bound", &self.bound)
            .finish()
    }
}

impl AutoGroup {
    pub fn new<F>(dim: usize, provenance: Provenance, bound: f64, f: F) -> Self
    where
        F: Fn(f64) -> Result<Operator> + Send + Sync + 'static,
    {
        Self {
            dim,
            provenance,
            bound,
            evaluate: Arc::new(f),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Certified `sup_t ‖β_t‖` on the construction grid.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn at(&self, t: f64) -> Result<Operator> {
        if t == 0.0 {
            return Ok(Operator::Identity(self.dim));
        }
        (self.evaluate)(t)
    }

    pub fn apply(&self, t: f64, a: &Element) -> Result<Element> {
        Ok(self.at(t)?.apply(a))
    }
}

/// Largest induced-norm upper bound of `β_t` over `times`.
pub fn certify_bound(model: &dyn QuasiAlgebra, group: &AutoGroup, times: &[f64]) -> Result<f64> {
    let mut best: f64 = 1.0;
    for t in times {
        best = best.max(model.operator_norm(&group.at(*t)?).upper);
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutomorphismReport {
    pub star_residual: f64,
    pub product_residual: f64,
    /// Pairs where exactly one of `a □ b`, `θ(a) □ θ(b)` is defined.
    pub definedness_mismatches: usize,
    pub boundedness_preserved: bool,
    pub pairs_checked: usize,
    pub passed: bool,
}

fn is_invertible(theta: &Operator) -> bool {
    let ok = |m: &CMatrix| {
        let (lo, hi) = singular_extremes(m);
        hi > 0.0 && lo > 1e-12 * hi
    };
    match theta {
        Operator::Identity(_) => true,
        Operator::Dense(m) => ok(m),
        Operator::Conjugation { left, right } => ok(left) && ok(right),
    }
}

/// Elements used for exhaustive checks: the subalgebra basis when small,
/// seeded samples otherwise.
pub fn check_elements(model: &dyn QuasiAlgebra, count: usize, seed: u64) -> Vec<Element> {
    if model.dim() <= 64 {
        model.subalgebra_basis()
    } else {
        model.sample_elements(seed, count)
    }
}

/// Star preservation, weak-product preservation (including definedness) and
/// preservation of bounded elements, over `elements`.
pub fn automorphism_check(
    theta: &Operator,
    product: &dyn WeakProduct,
    elements: &[Element],
    tol: f64,
) -> Result<AutomorphismReport> {
    let model = product.model();
    if !is_invertible(theta) {
        return Err(QuasiError::Precondition("θ is not invertible".into()));
    }
    let images: Vec<Element> = elements.iter().map(|a| theta.apply(a)).collect();
    let mut star_residual: f64 = 0.0;
    let mut bounded_ok = true;
    for (a, ta) in elements.iter().zip(&images) {
        let lhs = theta.apply(&model.involution(a));
        let rhs = model.involution(ta);
        star_residual = star_residual.max(model.norm(&(&lhs - &rhs)) / model.norm(a).max(1e-300));
        let ba = boundedness(model, a)?.is_bounded;
        let bt = boundedness(model, ta)?.is_bounded;
        bounded_ok &= ba == bt;
    }
    let mut product_residual: f64 = 0.0;
    let mut mismatches = 0;
    let mut pairs = 0;
    for (i, a) in elements.iter().enumerate() {
        for (j, b) in elements.iter().enumerate() {
            pairs += 1;
            let ab = product.weak_mult(a, b)?;
            let tab = product.weak_mult(&images[i], &images[j])?;
            match (ab, tab) {
                (WeakOutcome::Defined { product: p, .. }, WeakOutcome::Defined { product: q, .. }) => {
                    let tp = theta.apply(&p);
                    let scale = model.norm(&q).max(model.norm(&tp)).max(1.0);
                    product_residual = product_residual.max(model.norm(&(&tp - &q)) / scale);
                }
                (WeakOutcome::Undefined { .. }, WeakOutcome::Undefined { .. }) => {}
                _ => mismatches += 1,
            }
        }
    }
    let passed = star_residual <= tol && product_residual <= tol && mismatches == 0 && bounded_ok;
    Ok(AutomorphismReport {
        star_residual,
        product_residual,
        definedness_mismatches: mismatches,
        boundedness_preserved: bounded_ok,
        pairs_checked: pairs,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorResult {
    pub element_image: Element,
    pub topology: Topology,
    pub converged: bool,
    /// Observed order of the extrapolated differences (≈ 2 for smooth orbits).
    pub rate: f64,
    /// τ-distances between successive extrapolants.
    pub increments: Vec<f64>,
}

const GENERATOR_T0: f64 = 0.1;
const GENERATOR_LEVELS: usize = 24;

/// `δ_τ(a)` from difference quotients at `t₀ 2^{−k}` with one Richardson step.
pub fn generator(
    group: &AutoGroup,
    model: &dyn QuasiAlgebra,
    a: &Element,
    tau: Topology,
    family: &FormFamily,
    tol: f64,
) -> Result<GeneratorResult> {
    let dist = |x: &Element, y: &Element| max_seminorm(model, family, &(x - y), tau);
    let quotient = |t: f64| -> Result<Element> { Ok((&group.apply(t, a)? - a).scale_real(1.0 / t)) };
    let mut prev_q = quotient(GENERATOR_T0)?;
    let mut extrap: Vec<Element> = Vec::new();
    let mut increments = Vec::new();
    let mut converged = false;
    for k in 1..GENERATOR_LEVELS {
        let q = quotient(GENERATOR_T0 * 0.5f64.powi(k as i32))?;
        let e = &q.scale_real(2.0) - &prev_q;
        prev_q = q;
        if let Some(last) = extrap.last() {
            increments.push(dist(&e, last));
        }
        extrap.push(e);
        let m = increments.len();
        if m >= 2 && increments[m - 1] <= tol && increments[m - 2] <= tol {
            converged = true;
            break;
        }
    }
    let rate = rate_from(&increments);
    // Without convergence the last levels are dominated by rounding; keep
    // the level with the smallest increment.
    let pick = if converged {
        extrap.len() - 1
    } else {
        increments
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map_or(extrap.len() - 1, |(i, _)| i + 1)
    };
    Ok(GeneratorResult {
        element_image: extrap.swap_remove(pick),
        topology: tau,
        converged,
        rate,
        increments,
    })
}

/// `log₂` ratio of the last informative pair of successive differences.
fn rate_from(increments: &[f64]) -> f64 {
    let useful: Vec<f64> = increments.iter().copied().filter(|v| *v > 1e-13).collect();
    if useful.len() < 2 {
        return f64::NAN;
    }
    let m = useful.len();
    (useful[m - 2] / useful[m - 1]).log2()
}

/// Residual of `φ(δ_w(a□b)x, y) = φ(bx, δ_{s*}(a)*y) + φ(δ_{s*}(b)x, a*y)`
/// with all three generator values extracted from the group.
pub fn generator_weak_leibniz(
    group: &AutoGroup,
    product: &dyn WeakProduct,
    family: &FormFamily,
    a: &Element,
    b: &Element,
    tol: f64,
) -> Result<f64> {
    let model = product.model();
    let ab = product.defined(a, b)?;
    let da = generator(group, model, a, Topology::StrongStar, family, tol)?;
    let db = generator(group, model, b, Topology::StrongStar, family, tol)?;
    let dab = generator(group, model, &ab, Topology::Weak, family, tol)?;
    if !da.converged || !db.converged || !dab.converged {
        return Err(QuasiError::Domain("generator did not converge on a, b or a □ b".into()));
    }
    let da_star = model.involution(&da.element_image);
    let a_star = model.involution(a);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for phi in &family.forms {
        for x in &family.probes {
            let l = phi.factor(&model.product(&dab.element_image, x));
            let bx = phi.factor(&model.product(b, x));
            let dbx = phi.factor(&model.product(&db.element_image, x));
            for y in &family.probes {
                let fy = phi.factor(y);
                let lhs = fy.dotc(&l);
                let r1 = phi.factor(&model.product(&da_star, y)).dotc(&bx);
                let r2 = phi.factor(&model.product(&a_star, y)).dotc(&dbx);
                worst = worst.max((lhs - r1 - r2).norm());
                scale = scale.max(lhs.norm());
            }
        }
    }
    Ok(worst / scale.max(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    pub residual: f64,
    pub tolerance: f64,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupIntegralsReport {
    /// `(1/h)∫_t^{t+h} β_s(a) ds → β_t(a)`.
    pub average: IdentityCheck,
    /// `δ(∫₀^t β_s(a) ds) = β_t(a) − a`.
    pub integral: IdentityCheck,
    /// `d/dt β_t(a) = δ(β_t(a))`.
    pub derivative: IdentityCheck,
    /// `δ(β_t(a)) = β_t(δ(a))`.
    pub commutation: IdentityCheck,
    /// `β_t(a) − β_s(a) = ∫_s^t β_r(δ(a)) dr` with `s = t/2`.
    pub difference: IdentityCheck,
}

impl GroupIntegralsReport {
    pub fn passed(&self) -> bool {
        [self.average, self.integral, self.derivative, self.commutation, self.difference]
            .iter()
            .all(|c| c.passed())
    }
}

/// Absolute roundoff floor for checks whose exact value is zero.
fn floor(model: &dyn QuasiAlgebra, delta_norm: f64, a: &Element, t: f64) -> f64 {
    1e-12 * (1.0 + delta_norm) * (1.0 + model.norm(a)) * (1.0 + t.abs())
}

/// The group-integral identities by composite Simpson, each with its
/// certified quadrature tolerance.
pub fn group_integrals_check(
    group: &AutoGroup,
    delta: &Derivation,
    a: &Element,
    t: f64,
    quad_step: f64,
) -> Result<GroupIntegralsReport> {
    let model = delta.model().as_ref();
    let n = model.dim();
    let cb = group.bound();
    let dnorm = model.induced_norm(&delta.dense()).upper;
    let fl = floor(model, dnorm, a, t);
    let pow = |k: usize| -> Result<f64> { Ok(model.norm(&delta.power_apply(a, k)?)) };
    let (d1, d3, d5) = (pow(1)?, pow(3)?, pow(5)?);
    let orbit = |s: f64| -> CVectorResult { group.apply(s, a).map(Element::into_coeffs) };

    // (1) window h = quad_step.
    let h = quad_step;
    let avg = simpson_checked(t, t + h, h / 8.0, n, &orbit)?;
    let avg = Element::new(avg).scale_real(1.0 / h);
    let bt = group.apply(t, a)?;
    let average = IdentityCheck {
        residual: model.norm(&(&avg - &bt)),
        tolerance: h * cb * d1 / 2.0 + fl,
    };

    // (2)
    let integral = Element::new(simpson_checked(0.0, t, quad_step, n, &orbit)?);
    let lhs = delta.apply(&integral)?;
    let rhs = &bt - a;
    let integral_check = IdentityCheck {
        residual: model.norm(&(&lhs - &rhs)),
        tolerance: t.abs() * quad_step.powi(4) * cb * d5 / 180.0 + fl,
    };

    // (3)
    let central = (&group.apply(t + quad_step, a)? - &group.apply(t - quad_step, a)?).scale_real(0.5 / quad_step);
    let dbt = delta.apply(&bt)?;
    let derivative = IdentityCheck {
        residual: model.norm(&(&central - &dbt)),
        tolerance: quad_step * quad_step * cb * d3 / 6.0 + fl / quad_step,
    };
    let bda = group.apply(t, &delta.apply(a)?)?;
    let commutation = IdentityCheck {
        residual: model.norm(&(&dbt - &bda)),
        tolerance: fl * (1.0 + dnorm),
    };

    // (4)
    let s = t / 2.0;
    let da = delta.apply(a)?;
    let dorbit = |r: f64| -> CVectorResult { group.apply(r, &da).map(Element::into_coeffs) };
    let int_d = Element::new(simpson_checked(s, t, quad_step, n, &dorbit)?);
    let diff = &bt - &group.apply(s, a)?;
    let difference = IdentityCheck {
        residual: model.norm(&(&diff - &int_d)),
        tolerance: (t - s).abs() * quad_step.powi(4) * cb * d5 / 180.0 + fl,
    };
    Ok(GroupIntegralsReport {
        average,
        integral: integral_check,
        derivative,
        commutation,
        difference,
    })
}

type CVectorResult = Result<crate::linalg::CVector>;

fn simpson_checked<F>(a: f64, b: f64, step: f64, n: usize, f: &F) -> Result<crate::linalg::CVector>
where
    F: Fn(f64) -> CVectorResult,
{
    let mut err = None;
    let v = simpson(a, b, step, n, |s| match f(s) {
        Ok(v) => v,
        Err(e) => {
            err.get_or_insert(e);
            crate::linalg::CVector::zeros(n)
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Laplace quadrature for `R_λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quadrature {
    /// Step and horizon chosen from the error budget for each sample.
    Auto,
    Fixed { step: f64, horizon: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hy1Row {
    pub sample: usize,
    pub lambda: f64,
    /// `‖δa − λa‖ − |λ|‖a‖/C`.
    pub slack: f64,
    /// `‖(λ − δ)R_λ(a) − a‖`.
    pub left_inverse: Option<f64>,
    /// `‖R_λ((λ − δ)a) − a‖`.
    pub right_inverse: Option<f64>,
    /// `‖R_λ(a)‖ − C‖a‖/|λ|`.
    pub resolvent_excess: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hy1Report {
    /// Graph-limit defect of `(a + b/n, δa + δb/n)`.
    pub closedness: f64,
    pub rows: Vec<Hy1Row>,
    pub min_slack: f64,
    pub max_inverse_residual: f64,
    pub max_resolvent_excess: f64,
    pub bound: f64,
}

/// `R_λ(a)`: `∫₀^∞ e^{−λt} β_t(a) dt` for `λ > 0` and
/// `−∫₀^∞ e^{λt} β_{−t}(a) dt` for `λ < 0`, so that `R_λ = (λ − δ)^{−1}`.
pub fn laplace_resolvent(
    group: &AutoGroup,
    delta: &Derivation,
    a: &Element,
    lambda: f64,
    quadrature: Quadrature,
    tol: f64,
) -> Result<Element> {
    if lambda == 0.0 {
        return Err(QuasiError::Precondition("λ must be nonzero".into()));
    }
    let model = delta.model().as_ref();
    let cb = group.bound();
    let mu = lambda.abs();
    let sign = lambda.signum();
    let (step, horizon) = match quadrature {
        Quadrature::Fixed { step, horizon } => (step, horizon),
        Quadrature::Auto => {
            let na = model.norm(a).max(f64::MIN_POSITIVE);
            let horizon = ((2.0 * cb * na / (mu * tol)).ln() / mu).max(1.0 / mu);
            // |d⁴/dt⁴ e^{−μt}β_t(a)| ≤ C Σ_j C(4,j) μ^{4−j} ‖δ^j a‖.
            let binom = [1.0, 4.0, 6.0, 4.0, 1.0];
            let mut bound = 0.0;
            for (j, bj) in binom.iter().enumerate() {
                bound += bj * mu.powi(4 - j as i32) * model.norm(&delta.power_apply(a, j)?);
            }
            let bound = (cb * bound).max(f64::MIN_POSITIVE);
            let step = (180.0 * tol / (2.0 * horizon * bound)).powf(0.25).min(horizon / 2.0);
            (step, horizon)
        }
    };
    let n = model.dim();
    let integrand = |s: f64| -> CVectorResult {
        let v = group.apply(sign * s, a)?;
        Ok(v.into_coeffs() * c((-mu * s).exp(), 0.0))
    };
    let v = simpson_checked(0.0, horizon, step, n, &integrand)?;
    Ok(Element::new(v).scale_real(sign))
}

#[allow(clippy::too_many_arguments)]
pub fn hy1_verify(
    group: &AutoGroup,
    delta: &Derivation,
    lambdas: &[f64],
    samples: &[Element],
    quadrature: Option<Quadrature>,
    tol: f64,
) -> Result<Hy1Report> {
    let model = delta.model().as_ref();
    let cb = group.bound();

    // (i) closedness surrogate.
    let mut closedness: f64 = 0.0;
    if samples.len() >= 2 {
        let (a, b) = (&samples[0], &samples[1]);
        let (da, db) = (delta.apply(a)?, delta.apply(b)?);
        let ns = [250.0, 500.0, 1000.0];
        let xs: Vec<Element> = ns.iter().map(|n| a + &b.scale_real(1.0 / n)).collect();
        let ys: Vec<Element> = xs.iter().map(|x| delta.apply(x)).collect::<Result<_>>()?;
        let nodes: Vec<f64> = ns.iter().map(|n| 1.0 / n).collect();
        let lim = |v: &[Element]| -> Element {
            let dim = v[0].len();
            Element::new(crate::linalg::CVector::from_iterator(
                dim,
                (0..dim).map(|i| {
                    let col: Vec<Complex64> = v.iter().map(|e| e.coeffs()[i]).collect();
                    neville_at_zero(&nodes, &col)
                }),
            ))
        };
        let (xl, yl) = (lim(&xs), lim(&ys));
        closedness = model.norm(&(&yl - &delta.apply(&xl)?)) / (1.0 + model.norm(&da) + model.norm(&db));
    }

    let mut rows = Vec::new();
    let mut min_slack = f64::INFINITY;
    let mut max_inv: f64 = 0.0;
    let mut max_excess = f64::NEG_INFINITY;
    for (si, a) in samples.iter().enumerate() {
        let na = model.norm(a);
        let da = delta.apply(a)?;
        for &lambda in lambdas {
            if lambda == 0.0 {
                return Err(QuasiError::Precondition("λ must be nonzero".into()));
            }
            let slack = model.norm(&(&da - &a.scale_real(lambda))) - lambda.abs() * na / cb;
            min_slack = min_slack.min(slack);
            let (mut li, mut ri, mut ex) = (None, None, None);
            if let Some(q) = quadrature {
                let r = laplace_resolvent(group, delta, a, lambda, q, tol)?;
                let lr = &r.scale_real(lambda) - &delta.apply(&r)?;
                let l_res = model.norm(&(&lr - a));
                let b = &a.scale_real(lambda) - &da;
                let rb = laplace_resolvent(group, delta, &b, lambda, q, tol)?;
                let r_res = model.norm(&(&rb - a));
                let excess = model.norm(&r) - cb * na / lambda.abs();
                max_inv = max_inv.max(l_res).max(r_res);
                max_excess = max_excess.max(excess);
                li = Some(l_res);
                ri = Some(r_res);
                ex = Some(excess);
            }
            rows.push(Hy1Row {
                sample: si,
                lambda,
                slack,
                left_inverse: li,
                right_inverse: ri,
                resolvent_excess: ex,
            });
        }
    }
    Ok(Hy1Report {
        closedness,
        rows,
        min_slack,
        max_inverse_residual: max_inv,
        max_resolvent_excess: max_excess,
        bound: cb,
    })
}

const SINGULAR_TOL: f64 = 1e-13;

fn yosida_resolvent(d: &CMatrix, t: f64, n: u64) -> Result<CMatrix> {
    let m = identity(d.nrows()) - d * c(t / n as f64, 0.0);
    inverse(&m, SINGULAR_TOL).map_err(|e| match e {
        QuasiError::Singular { smallest, largest } => QuasiError::SpectralHypothesis {
            lambda: n as f64 / t,
            detail: format!("λ − δ singular (σ_min = {smallest:.3e}, σ_max = {largest:.3e})"),
        },
        other => other,
    })
}

/// `(I − (t/n) D)^{−n}`.
pub fn yosida_approximant(d: &CMatrix, t: f64, n: u64) -> Result<CMatrix> {
    if t == 0.0 || n == 0 {
        return Ok(identity(d.nrows()));
    }
    Ok(matrix_power(&yosida_resolvent(d, t, n)?, n))
}

#[derive(Debug, Clone)]
pub struct YosidaResult {
    pub operator: CMatrix,
    pub n: u64,
    /// Induced-norm distances between successive `n = 2^k` approximants.
    pub increments: Vec<f64>,
    /// `‖β_t‖ − 1` (upper bound).
    pub contraction_excess: f64,
}

fn full_domain_matrix(delta: &Derivation) -> Result<CMatrix> {
    if !delta.has_full_domain() {
        return Err(QuasiError::Precondition("Yosida synthesis needs δ defined on all of A₀".into()));
    }
    Ok(delta.dense())
}

/// Plain Yosida approximation, doubling `n = 2^k` until successive
/// approximants agree within `tol`.
pub fn yosida_group(delta: &Derivation, t: f64, tol: f64, n_max: u64) -> Result<YosidaResult> {
    let model = delta.model().as_ref();
    let d = full_domain_matrix(delta)?;
    if t == 0.0 {
        return Ok(YosidaResult {
            operator: identity(d.nrows()),
            n: 1,
            increments: Vec::new(),
            contraction_excess: 0.0,
        });
    }
    let mut increments = Vec::new();
    let mut prev = yosida_approximant(&d, t, 1)?;
    let mut n: u64 = 1;
    let mut last_inc = f64::INFINITY;
    while n.saturating_mul(2) <= n_max {
        n *= 2;
        let cur = yosida_approximant(&d, t, n)?;
        last_inc = model.induced_norm(&(&cur - &prev)).upper;
        increments.push(last_inc);
        prev = cur;
        if last_inc <= tol {
            let excess = model.induced_norm(&prev).upper - 1.0;
            return Ok(YosidaResult {
                operator: prev,
                n,
                increments,
                contraction_excess: excess,
            });
        }
    }
    Err(QuasiError::Convergence {
        n,
        increment: last_inc,
        tol,
    })
}

/// Yosida approximants at `n = 2^k` combined by Richardson extrapolation in
/// `1/n`; the error expansion of `(I − tD/n)^{−n}` is in integer powers of `1/n`.
pub fn yosida_extrapolated(d: &CMatrix, t: f64, tol: f64, max_k: u32) -> Result<(CMatrix, f64)> {
    if t == 0.0 {
        return Ok((identity(d.nrows()), 0.0));
    }
    let mut table: Vec<Vec<CMatrix>> = Vec::new();
    let mut last_inc = f64::INFINITY;
    for k in 2..=max_k {
        let y = yosida_approximant(d, t, 1u64 << k)?;
        let mut row = vec![y];
        if let Some(prev) = table.last() {
            for j in 1..=prev.len() {
                let f = (1u64 << j) as f64;
                let v = (&row[j - 1] * c(f, 0.0) - &prev[j - 1]) * c(1.0 / (f - 1.0), 0.0);
                row.push(v);
            }
            let cur = row.last().expect("nonempty row");
            let prev_best = prev.last().expect("nonempty row");
            last_inc = (cur - prev_best).norm();
            if last_inc <= tol {
                return Ok((cur.clone(), last_inc));
            }
        }
        table.push(row);
    }
    Err(QuasiError::Convergence {
        n: 1u64 << max_k,
        increment: last_inc,
        tol,
    })
}

/// Group synthesized from `δ` by extrapolated Yosida approximation.
pub fn yosida_synthesized_group(delta: &Derivation, tol: f64, certify_times: &[f64]) -> Result<AutoGroup> {
    let d = Arc::new(full_domain_matrix(delta)?);
    let dim = d.nrows();
    let dd = d.clone();
    let mut group = AutoGroup::new(dim, Provenance::Yosida, 1.0, move |t| {
        Ok(Operator::Dense(yosida_extrapolated(&dd, t, tol, 16)?.0))
    });
    let bound = certify_bound(delta.model().as_ref(), &group, certify_times)?;
    group.bound = bound;
    Ok(group)
}

/// Largest relative residual of `δⁿ(a□b) = Σ_k C(n,k) δ^{n−k}(a) □ δ^k(b)`
/// over orders `1..=n`.
pub fn binomial_leibniz_check(delta: &Derivation, product: &dyn WeakProduct, a: &Element, b: &Element, n: usize) -> Result<f64> {
    let model = product.model();
    let ab = product
        .defined(a, b)
        .map_err(|_| QuasiError::Precondition("a □ b undefined".into()))?;
    let mut da = vec![a.clone()];
    let mut db = vec![b.clone()];
    for k in 1..=n {
        da.push(delta.apply(&da[k - 1])?);
        db.push(delta.apply(&db[k - 1])?);
    }
    let mut lhs = ab;
    let mut worst: f64 = 0.0;
    for m in 1..=n {
        lhs = delta.apply(&lhs)?;
        let mut rhs = Element::zeros(model.dim());
        let mut binom = 1.0;
        let mut scale = 0.0;
        for k in 0..=m {
            let term = product
                .defined(&da[m - k], &db[k])
                .map_err(|_| QuasiError::Precondition(format!("δ^{}(a) □ δ^{}(b) undefined", m - k, k)))?;
            scale += binom * model.norm(&term);
            rhs = &rhs + &term.scale_real(binom);
            binom = binom * (m - k) as f64 / (k + 1) as f64;
        }
        worst = worst.max(model.norm(&(&lhs - &rhs)) / scale.max(1.0));
    }
    Ok(worst)
}
