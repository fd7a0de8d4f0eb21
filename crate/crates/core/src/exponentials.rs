//! `e^{ith}` for self-adjoint `h`: a scaled-and-squared series when `h` is
//! bounded, and a limit of resolvent powers otherwise; conjugation groups.

use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::{boundedness, QuasiAlgebra};
use crate::element::Element;
use crate::error::{check_dim, QuasiError, Result};
use crate::groups::{certify_bound, AutoGroup, Provenance};
use crate::linalg::{c, solve, CMatrix, CVector, KahanSum};
use crate::weak::{element_resolvent, spectral_radius, WeakProduct};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpMethod {
    SeriesScalingSquaring,
    ResolventLimit,
}

/// Post-condition diagnostics; they are reported, not enforced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpChecks {
    /// `|‖e^{ith}‖_b − 1|`.
    pub norm_b_defect: f64,
    /// `max(‖e* □ e − 𝟙‖, ‖e □ e* − 𝟙‖)`.
    pub unitarity: f64,
    /// `‖e^{ith} □ e^{ish} − e^{i(t+s)h}‖` at `s = t/2`.
    pub group_law: f64,
    /// Spectral radius `r_b(e^{ith})`.
    pub spectral_radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialResult {
    pub element: Element,
    pub method: ExpMethod,
    /// `‖e^{ith}‖_b`.
    pub certified_bound: f64,
    pub checks: ExpChecks,
    /// Scaling exponent `s` (series) or final `n` (resolvent limit).
    pub steps: u64,
}

fn require_self_adjoint(model: &dyn QuasiAlgebra, h: &Element) -> Result<()> {
    let defect = (h - &model.involution(h)).coeff_norm() / h.coeff_norm().max(1.0);
    if defect > 1e-12 {
        return Err(QuasiError::NotSelfAdjoint { defect });
    }
    Ok(())
}

fn unit_of(model: &dyn QuasiAlgebra) -> Result<Element> {
    model
        .unit()
        .ok_or_else(|| QuasiError::Precondition("model has no unit".into()))
}

/// Series for `e^{ith}` with scaling `‖(t/2^s) h‖_b ≤ 0.5` and `s` squarings.
/// Terms are bounded a priori by `0.5^k / k!` in `‖·‖_b`.
fn exp_series(model: &dyn QuasiAlgebra, h: &Element, t: f64, norm_b: f64, tol: f64) -> Result<(Element, u64)> {
    let unit = unit_of(model)?;
    if t == 0.0 {
        return Ok((unit, 0));
    }
    let mut s: u32 = 0;
    while t.abs() * norm_b / 2f64.powi(s as i32) > 0.5 {
        s += 1;
    }
    let x = h.scale(c(0.0, t / 2f64.powi(s as i32)));
    let xb = t.abs() * norm_b / 2f64.powi(s as i32);
    let target = tol.min(f64::EPSILON) / 2f64.powi(s as i32 + 2);
    let mut sum = KahanSum::new(model.dim());
    let mut term = unit;
    let mut bound = 1.0;
    sum.add(term.coeffs());
    for k in 1..64 {
        term = model.product(&term, &x).scale_real(1.0 / k as f64);
        sum.add(term.coeffs());
        bound *= xb / k as f64;
        if bound <= target {
            break;
        }
    }
    let mut e = Element::new(sum.into_value());
    for _ in 0..s {
        e = model.product(&e, &e);
    }
    Ok((e, s as u64))
}

fn unitarity(model: &dyn QuasiAlgebra, product: &dyn WeakProduct, e: &Element) -> Result<f64> {
    let unit = unit_of(model)?;
    let es = model.involution(e);
    let scale = model.norm(&unit);
    let a = product.defined(&es, e)?;
    let b = product.defined(e, &es)?;
    Ok((model.norm(&(&a - &unit)).max(model.norm(&(&b - &unit)))) / scale)
}

/// `e^{ith}` for bounded self-adjoint `h`.
pub fn exp_bounded(product: &dyn WeakProduct, h: &Element, t: f64, tol: f64) -> Result<ExponentialResult> {
    let model = product.model();
    check_dim(model.dim(), h.len())?;
    require_self_adjoint(model, h)?;
    let nb = boundedness(model, h)?;
    if !nb.is_bounded {
        return Err(QuasiError::Precondition(
            "h is not bounded; use the resolvent-limit exponential".into(),
        ));
    }
    let (e, s) = exp_series(model, h, t, nb.norm_b, tol)?;
    let (half, _) = exp_series(model, h, t / 2.0, nb.norm_b, tol)?;
    let (whole, _) = exp_series(model, h, 1.5 * t, nb.norm_b, tol)?;
    let gl = product.defined(&e, &half)?;
    let norm_b = boundedness(model, &e)?.norm_b;
    let checks = ExpChecks {
        norm_b_defect: (norm_b - 1.0).abs(),
        unitarity: unitarity(model, product, &e)?,
        group_law: model.norm(&(&gl - &whole)) / model.norm(&whole).max(1e-300),
        spectral_radius: spectral_radius(model, &e),
    };
    Ok(ExponentialResult {
        element: e,
        method: ExpMethod::SeriesScalingSquaring,
        certified_bound: norm_b,
        checks,
        steps: s,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolventBoundRow {
    pub gamma: f64,
    /// `‖(h + iγ)^{−1}‖_b`.
    pub norm_b: f64,
    /// `1/|γ| − ‖(h + iγ)^{−1}‖_b`.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolventBoundReport {
    pub rows: Vec<ResolventBoundRow>,
    pub worst_slack: f64,
}

pub fn resolvent_bound_check(product: &dyn WeakProduct, h: &Element, gammas: &[f64], tol: f64) -> Result<ResolventBoundReport> {
    let model = product.model();
    require_self_adjoint(model, h)?;
    let mut rows = Vec::new();
    let mut worst = f64::INFINITY;
    for &gamma in gammas {
        if gamma == 0.0 {
            return Err(QuasiError::Precondition("γ must be nonzero".into()));
        }
        // λ𝟙 − h with λ = −iγ is −(h + iγ).
        let r = element_resolvent(product, h, c(0.0, -gamma), tol.min(1e-12))?;
        let inv = r.inverse.ok_or_else(|| {
            QuasiError::Inconsistent(format!("h + iγ is not invertible at γ = {gamma} although h = h*"))
        })?;
        let nb = boundedness(model, &inv)?.norm_b;
        let slack = 1.0 / gamma.abs() - nb;
        worst = worst.min(slack);
        rows.push(ResolventBoundRow { gamma, norm_b: nb, slack });
    }
    Ok(ResolventBoundReport { rows, worst_slack: worst })
}

/// Left and right resolvent solves `(I − s L_h)^{−1}(a)`, `(I − s R_h)^{−1}(a)`.
struct ResolventSolver<'a> {
    model: &'a dyn QuasiAlgebra,
    h: Element,
    left: Option<CMatrix>,
    right: Option<CMatrix>,
}

impl<'a> ResolventSolver<'a> {
    fn new(model: &'a dyn QuasiAlgebra, h: &Element) -> Self {
        let (left, right) = match model.matrix_size() {
            Some(_) => (None, None),
            None => (Some(model.left_multiplication(h)), Some(model.right_multiplication(h))),
        };
        Self {
            model,
            h: h.clone(),
            left,
            right,
        }
    }

    fn solve_left(&self, s: Complex64, a: &Element) -> Result<Element> {
        match (&self.left, self.model.matrix_size()) {
            (Some(l), _) => {
                let m = CMatrix::identity(l.nrows(), l.ncols()) - l * s;
                Ok(Element::new(solve(&m, a.coeffs(), 1e-14)?))
            }
            (None, Some(d)) => {
                let m = CMatrix::identity(d, d) - self.h.to_matrix(d) * s;
                let rhs = a.to_matrix(d);
                let x = m.lu().solve(&rhs).ok_or(QuasiError::Singular { smallest: 0.0, largest: 0.0 })?;
                Ok(Element::from_matrix(&x))
            }
            (None, None) => unreachable!("dense multiplier built when not a matrix model"),
        }
    }

    /// `X (I − s h) = a`, solved through the transposed system.
    fn solve_right(&self, s: Complex64, a: &Element) -> Result<Element> {
        match (&self.right, self.model.matrix_size()) {
            (Some(r), _) => {
                let m = CMatrix::identity(r.nrows(), r.ncols()) - r * s;
                Ok(Element::new(solve(&m, a.coeffs(), 1e-14)?))
            }
            (None, Some(d)) => {
                let m = CMatrix::identity(d, d) - self.h.to_matrix(d) * s;
                let rhs = a.to_matrix(d).transpose();
                let xt = m
                    .transpose()
                    .lu()
                    .solve(&rhs)
                    .ok_or(QuasiError::Singular { smallest: 0.0, largest: 0.0 })?;
                Ok(Element::from_matrix(&xt.transpose()))
            }
            (None, None) => unreachable!("dense multiplier built when not a matrix model"),
        }
    }
}

fn weak_power(product: &dyn WeakProduct, r: &Element, k: u32) -> Result<Element> {
    let mut u = r.clone();
    for _ in 0..k {
        u = product.defined(&u, &u)?;
    }
    Ok(u)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnboundedDiagnostics {
    /// `‖u_L − u_R‖` at the final `n`.
    pub left_right: f64,
    /// Largest star-identity residual over the `n` visited.
    pub star_identity: f64,
    /// Successive `‖u(n) − u(n/2)‖`.
    pub increments: Vec<f64>,
}

/// Resolvent-power approximants `u_L(n)`, `u_R(n)` at `n = 2^k`.
fn resolvent_powers(
    product: &dyn WeakProduct,
    solver: &ResolventSolver,
    unit: &Element,
    t: f64,
    k: u32,
) -> Result<(Element, Element)> {
    let n = 2f64.powi(k as i32);
    let s = c(0.0, t / n);
    let rl = solver.solve_left(s, unit)?;
    let rr = solver.solve_right(s, unit)?;
    Ok((weak_power(product, &rl, k)?, weak_power(product, &rr, k)?))
}

/// `u_L(t) = lim (I − (it/n) L_h)^{−n} 𝟙`, checked against `u_R(t)`.
pub fn exp_unbounded(
    product: &dyn WeakProduct,
    h: &Element,
    t: f64,
    tol: f64,
    n_max: u64,
) -> Result<(ExponentialResult, UnboundedDiagnostics)> {
    let model = product.model();
    check_dim(model.dim(), h.len())?;
    require_self_adjoint(model, h)?;
    let unit = unit_of(model)?;
    if t == 0.0 {
        let checks = ExpChecks {
            norm_b_defect: (boundedness(model, &unit)?.norm_b - 1.0).abs(),
            unitarity: 0.0,
            group_law: 0.0,
            spectral_radius: 1.0,
        };
        return Ok((
            ExponentialResult {
                element: unit,
                method: ExpMethod::ResolventLimit,
                certified_bound: 1.0,
                checks,
                steps: 1,
            },
            UnboundedDiagnostics {
                left_right: 0.0,
                star_identity: 0.0,
                increments: Vec::new(),
            },
        ));
    }
    let solver = ResolventSolver::new(model, h);
    let sample = model.sample_elements(0x57a5, 1).remove(0);
    let sample_star = model.involution(&sample);
    let scale = model.norm(&unit);
    let max_k = (n_max.max(2) as f64).log2().floor() as u32;

    let mut star_identity: f64 = 0.0;
    let mut increments = Vec::new();
    let mut prev: Option<Element> = None;
    let mut result = None;
    for k in 1..=max_k {
        let n = 2f64.powi(k as i32);
        let s = c(0.0, t / n);
        // ((I − s L_h)^{−1} a)* = (I + s R_h)^{−1} a*.
        let lhs = model.involution(&solver.solve_left(s, &sample)?);
        let rhs = solver.solve_right(-s, &sample_star)?;
        star_identity = star_identity.max(model.norm(&(&lhs - &rhs)) / model.norm(&sample));

        let (ul, ur) = resolvent_powers(product, &solver, &unit, t, k)?;
        if let Some(p) = &prev {
            let inc = model.norm(&(&ul - p)) / scale;
            increments.push(inc);
            if inc <= tol {
                result = Some((ul, ur, k));
                break;
            }
        }
        prev = Some(ul);
    }
    let (ul, ur, k) = result.ok_or_else(|| QuasiError::Convergence {
        n: 1u64 << max_k,
        increment: increments.last().copied().unwrap_or(f64::INFINITY),
        tol,
    })?;
    let left_right = model.norm(&(&ul - &ur)) / scale;
    if left_right > tol.max(1e-8) {
        return Err(QuasiError::Inconsistent(format!(
            "u_L(t) and u_R(t) differ by {left_right:.3e}"
        )));
    }
    let (half, _) = resolvent_powers(product, &solver, &unit, t / 2.0, k)?;
    let (whole, _) = resolvent_powers(product, &solver, &unit, 1.5 * t, k)?;
    let gl = product.defined(&ul, &half)?;
    let norm_b = boundedness(model, &ul)?.norm_b;
    let checks = ExpChecks {
        norm_b_defect: (norm_b - 1.0).abs(),
        unitarity: unitarity(model, product, &ul)?,
        group_law: model.norm(&(&gl - &whole)) / model.norm(&whole).max(1e-300),
        spectral_radius: spectral_radius(model, &ul),
    };
    Ok((
        ExponentialResult {
            element: ul,
            method: ExpMethod::ResolventLimit,
            certified_bound: norm_b,
            checks,
            steps: 1u64 << k,
        },
        UnboundedDiagnostics {
            left_right,
            star_identity,
            increments,
        },
    ))
}

/// `β_t(a) = e^{ith} □ a □ e^{−ith}`, with `e^{−ith}` taken as `(e^{ith})*`.
/// The bound is certified over `certify_times`.
pub fn conjugation_group(product: Arc<dyn WeakProduct>, h: &Element, certify_times: &[f64]) -> Result<AutoGroup> {
    let model = product.model();
    require_self_adjoint(model, h)?;
    let nb = boundedness(model, h)?.norm_b;
    if !nb.is_finite() {
        return Err(QuasiError::Precondition("h is not bounded".into()));
    }
    let hh = h.clone();
    let p = product.clone();
    let group = AutoGroup::new(model.dim(), Provenance::Conjugation(h.clone()), 1.0, move |t| {
        let m = p.model();
        let (e, _) = exp_series(m, &hh, t, nb, f64::EPSILON)?;
        Ok(m.conjugation_operator(&e, &m.involution(&e)))
    });
    let bound = certify_bound(model, &group, certify_times)?;
    Ok(AutoGroup::new(model.dim(), Provenance::Conjugation(h.clone()), bound, {
        let g = group.clone();
        move |t| g.at(t)
    }))
}

/// `e^{ith}` by the series alone, for bounded self-adjoint `h`.
pub fn exp_element(model: &dyn QuasiAlgebra, h: &Element, t: f64) -> Result<Element> {
    require_self_adjoint(model, h)?;
    let nb = boundedness(model, h)?.norm_b;
    Ok(exp_series(model, h, t, nb, f64::EPSILON)?.0)
}

/// `diag(e^{itλ_k})` as a matrix-model element.
pub fn diagonal_exponential(eigs: &[f64], t: f64) -> Element {
    let v: Vec<Complex64> = eigs.iter().map(|l| Complex64::from_polar(1.0, t * l)).collect();
    Element::from_matrix(&CMatrix::from_diagonal(&CVector::from_column_slice(&v)))
}
