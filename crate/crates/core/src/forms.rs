//! Positive invariant sesquilinear forms, their families, and the seminorm
//! topologies they generate.

use num_complex::Complex64;

use crate::algebra::QuasiAlgebra;
use crate::element::Element;
use crate::error::{check_dim, QuasiError, Result};
use crate::linalg::{hermitian_eigenvalues, CMatrix, CVector, LeastSquares, ZERO};
use crate::sampling;

/// Concrete representation of a form as `φ(a, b) = ⟨B a, B b⟩`.
#[derive(Debug, Clone, PartialEq)]
pub enum FormDescriptor {
    /// Vector state on `d × d` matrices: `φ(a, b) = ⟨aξ, bξ⟩`.
    Vector { d: usize, xi: CVector },
    /// Weighted pairing on grid functions: `φ(f, g) = h Σ f ḡ w`.
    Weight { h: f64, w: Vec<f64> },
    Zero { dim: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SesquilinearForm {
    pub descriptor: FormDescriptor,
}

impl SesquilinearForm {
    pub fn vector(d: usize, xi: CVector) -> Self {
        Self {
            descriptor: FormDescriptor::Vector { d, xi },
        }
    }

    pub fn weight(h: f64, w: Vec<f64>) -> Self {
        Self {
            descriptor: FormDescriptor::Weight { h, w },
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            descriptor: FormDescriptor::Zero { dim },
        }
    }

    pub fn dim(&self) -> usize {
        match &self.descriptor {
            FormDescriptor::Vector { d, .. } => d * d,
            FormDescriptor::Weight { w, .. } => w.len(),
            FormDescriptor::Zero { dim } => *dim,
        }
    }

    /// The factor `B a`.
    pub fn factor(&self, a: &Element) -> CVector {
        let v = a.coeffs();
        match &self.descriptor {
            FormDescriptor::Vector { d, xi } => {
                let d = *d;
                let mut out = CVector::zeros(d);
                for j in 0..d {
                    let x = xi[j];
                    if x == ZERO {
                        continue;
                    }
                    for i in 0..d {
                        out[i] += v[i + j * d] * x;
                    }
                }
                out
            }
            FormDescriptor::Weight { h, w } => CVector::from_iterator(
                w.len(),
                w.iter()
                    .zip(v.iter())
                    .map(|(wi, f)| f * (h * wi).sqrt()),
            ),
            FormDescriptor::Zero { .. } => CVector::zeros(0),
        }
    }

    pub fn evaluate(&self, a: &Element, b: &Element) -> Complex64 {
        self.factor(b).dotc(&self.factor(a))
    }
}

/// Finite stand-in for the cone of admissible forms, plus the probe elements
/// `x, y ∈ A₀` used to test identities of the type `φ(a x, y)`.
#[derive(Debug, Clone)]
pub struct FormFamily {
    pub forms: Vec<SesquilinearForm>,
    pub probes: Vec<Element>,
}

impl FormFamily {
    /// Probes are the full subalgebra basis for `dim ≤ 64`; otherwise 16
    /// seeded random elements plus the unit.
    pub fn new(model: &dyn QuasiAlgebra, forms: Vec<SesquilinearForm>, seed: u64) -> Self {
        let probes = if model.dim() <= 64 {
            model.subalgebra_basis()
        } else {
            let mut p = model.sample_elements(seed ^ 0x9e37_79b9, 16);
            if let Some(u) = model.unit() {
                p.push(u);
            }
            p
        };
        Self { forms, probes }
    }

    pub fn with_probes(forms: Vec<SesquilinearForm>, probes: Vec<Element>) -> Self {
        Self { forms, probes }
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }
}

/// Row layout of the stacked constraint system: one row per `(φ, x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstraintRow {
    pub form: usize,
    pub x: usize,
    pub y: usize,
}

/// Matrix of `c ↦ φ(c x, y)` over all `(φ, x, y)` in fixed order.
pub fn constraint_matrix(model: &dyn QuasiAlgebra, family: &FormFamily) -> (CMatrix, Vec<ConstraintRow>) {
    let n = model.dim();
    let px = family.probes.len();
    let mut rows = Vec::with_capacity(family.len() * px * px);
    let mut mat = CMatrix::zeros(family.len() * px * px, n);
    let basis: Vec<Element> = (0..n).map(|k| Element::basis(n, k)).collect();
    let mut r = 0;
    for (fi, phi) in family.forms.iter().enumerate() {
        let fy: Vec<CVector> = family.probes.iter().map(|y| phi.factor(y)).collect();
        for (xi, x) in family.probes.iter().enumerate() {
            // Columns: B(e_k x).
            let cols: Vec<CVector> = basis.iter().map(|e| phi.factor(&model.product(e, x))).collect();
            for (yi, by) in fy.iter().enumerate() {
                for (k, col) in cols.iter().enumerate() {
                    mat[(r, k)] = by.dotc(col);
                }
                rows.push(ConstraintRow { form: fi, x: xi, y: yi });
                r += 1;
            }
        }
    }
    (mat, rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Norm,
    Weak,
    Strong,
    StrongStar,
}

impl Topology {
    pub fn name(&self) -> &'static str {
        match self {
            Topology::Norm => "norm",
            Topology::Weak => "weak",
            Topology::Strong => "strong",
            Topology::StrongStar => "strong_star",
        }
    }
}

/// One seminorm of the chosen topology; `x, y` are used only by `Weak`.
pub fn seminorm(
    model: &dyn QuasiAlgebra,
    a: &Element,
    tau: Topology,
    phi: &SesquilinearForm,
    x: &Element,
    y: &Element,
) -> Result<f64> {
    check_dim(model.dim(), a.len())?;
    Ok(match tau {
        Topology::Norm => model.norm(a),
        Topology::Weak => {
            if !model.in_subalgebra(x) || !model.in_subalgebra(y) {
                return Err(QuasiError::Domain("weak seminorm needs x, y in A₀".into()));
            }
            phi.evaluate(&model.product(a, x), y).norm()
        }
        Topology::Strong => phi.evaluate(a, a).re.max(0.0).sqrt(),
        Topology::StrongStar => {
            let s = model.involution(a);
            let p = phi.evaluate(a, a).re.max(0.0).sqrt();
            let q = phi.evaluate(&s, &s).re.max(0.0).sqrt();
            p.max(q)
        }
    })
}

/// Largest seminorm of `a` over the family (and probe pairs for `Weak`).
pub fn max_seminorm(model: &dyn QuasiAlgebra, family: &FormFamily, a: &Element, tau: Topology) -> f64 {
    match tau {
        Topology::Norm => model.norm(a),
        Topology::Weak => {
            let mut best: f64 = 0.0;
            let ax: Vec<Element> = family.probes.iter().map(|x| model.product(a, x)).collect();
            for phi in &family.forms {
                let fy: Vec<CVector> = family.probes.iter().map(|y| phi.factor(y)).collect();
                for v in &ax {
                    let fv = phi.factor(v);
                    for by in &fy {
                        best = best.max(by.dotc(&fv).norm());
                    }
                }
            }
            best
        }
        Topology::Strong | Topology::StrongStar => {
            let s = model.involution(a);
            let mut best: f64 = 0.0;
            for phi in &family.forms {
                best = best.max(phi.evaluate(a, a).re.max(0.0).sqrt());
                if tau == Topology::StrongStar {
                    best = best.max(phi.evaluate(&s, &s).re.max(0.0).sqrt());
                }
            }
            best
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub check: &'static str,
    pub form: usize,
    pub a: Element,
    pub b: Element,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// Largest `max(−Re φ(a,a), |Im φ(a,a)|) / ‖a‖²`.
    pub positivity: f64,
    /// Largest `|φ(ax, y) − φ(x, a*y)|`, relative to `1 + |φ(ax, y)|`.
    pub invariance: f64,
    /// Largest `|φ(a,b)| / (‖a‖‖b‖) − 1`.
    pub bound_excess: f64,
    /// Lower bound on `min_{‖a‖=1} max_φ φ(a,a)`.
    pub separation_margin: f64,
    /// Null-space dimensions of `R*`, `R₁` and `R₂` (the last only for small models).
    pub radical_dims: (usize, usize, Option<usize>),
    pub radicals_agree: bool,
    pub witnesses: Vec<Witness>,
    pub passed: bool,
}

const RANK_TOL: f64 = 1e-10;

fn null_dim_psd(g: &CMatrix) -> usize {
    let ev = hermitian_eigenvalues(g);
    let top = ev.last().copied().unwrap_or(0.0).max(0.0);
    if top == 0.0 {
        return g.nrows();
    }
    ev.iter().filter(|v| **v <= RANK_TOL * top).count()
}

pub fn form_family_validate(model: &dyn QuasiAlgebra, family: &FormFamily, tol: f64) -> Result<ValidationReport> {
    if family.is_empty() {
        return Err(QuasiError::Precondition("form family is empty".into()));
    }
    for phi in &family.forms {
        check_dim(model.dim(), phi.dim())?;
    }
    let n = model.dim();
    let mut samples: Vec<Element> = (0..n.min(16)).map(|k| Element::basis(n, k)).collect();
    if let Some(u) = model.unit() {
        samples.push(u);
    }
    samples.extend(model.sample_elements(0xf0f0, 8));
    let probes: Vec<&Element> = family.probes.iter().take(16).collect();

    let mut witnesses = Vec::new();
    let mut positivity: f64 = 0.0;
    let mut invariance: f64 = 0.0;
    let mut bound_excess = f64::NEG_INFINITY;

    let norms: Vec<f64> = samples.iter().map(|a| model.norm(a)).collect();
    let stars: Vec<Element> = samples.iter().map(|a| model.involution(a)).collect();
    for (fi, phi) in family.forms.iter().enumerate() {
        let factors: Vec<CVector> = samples.iter().map(|a| phi.factor(a)).collect();
        for (i, a) in samples.iter().enumerate() {
            let q = factors[i].dotc(&factors[i]);
            let scale = norms[i] * norms[i];
            if scale > 0.0 {
                let neg = (-q.re).max(q.im.abs()) / scale;
                positivity = positivity.max(neg);
                if neg > tol {
                    witnesses.push(Witness { check: "positivity", form: fi, a: a.clone(), b: a.clone(), value: neg });
                }
            }
            for (j, b) in samples.iter().enumerate() {
                let s = norms[i] * norms[j];
                if s == 0.0 {
                    continue;
                }
                let ex = factors[j].dotc(&factors[i]).norm() / s - 1.0;
                bound_excess = bound_excess.max(ex);
                if ex > tol {
                    witnesses.push(Witness { check: "bound", form: fi, a: a.clone(), b: b.clone(), value: ex });
                }
            }
        }
        for (i, a) in samples.iter().enumerate() {
            for x in &probes {
                let lhs_factor = phi.factor(&model.product(a, x));
                let x_factor = phi.factor(x);
                for y in &probes {
                    let lhs = phi.factor(y).dotc(&lhs_factor);
                    let rhs = phi.factor(&model.product(&stars[i], y)).dotc(&x_factor);
                    let d = (lhs - rhs).norm() / (1.0 + lhs.norm());
                    invariance = invariance.max(d);
                    if d > tol {
                        witnesses.push(Witness {
                            check: "invariance",
                            form: fi,
                            a: a.clone(),
                            b: (*x).clone(),
                            value: d,
                        });
                    }
                }
            }
        }
    }

    // Separation: Σ_φ φ(a,a) ≥ λ_min |a|₂² ≥ λ_min ‖a‖² / hi², and the max
    // over K forms is at least the average.
    let (_, hi) = model.norm_equivalence();
    let k = family.len() as f64;
    let (separation_margin, r_star) = if n <= 256 {
        let mut g = CMatrix::zeros(n, n);
        for phi in &family.forms {
            let cols: Vec<CVector> = (0..n).map(|c| phi.factor(&Element::basis(n, c))).collect();
            for (i, ci) in cols.iter().enumerate() {
                for (j, cj) in cols.iter().enumerate() {
                    g[(i, j)] += ci.dotc(cj);
                }
            }
        }
        let ev = hermitian_eigenvalues(&g);
        (ev[0].max(0.0) / (k * hi * hi), null_dim_psd(&g))
    } else {
        let mut margin = f64::INFINITY;
        for (i, a) in samples.iter().enumerate() {
            if norms[i] == 0.0 {
                continue;
            }
            let best = family
                .forms
                .iter()
                .map(|phi| phi.evaluate(a, a).re)
                .fold(f64::NEG_INFINITY, f64::max);
            margin = margin.min(best / (norms[i] * norms[i]));
        }
        (margin, if margin > tol { 0 } else { 1 })
    };
    if separation_margin <= tol {
        let a = model.unit().unwrap_or_else(|| Element::basis(n, 0));
        witnesses.push(Witness {
            check: "separation",
            form: 0,
            a: a.clone(),
            b: a,
            value: separation_margin,
        });
    }

    let (r1, r2) = if n <= 256 {
        let (mat, _) = constraint_matrix(model, family);
        let ls = LeastSquares::new(mat, RANK_TOL);
        let r1 = n - ls.rank();
        let r2 = if n <= 64 {
            let mut g2 = CMatrix::zeros(n, n);
            for phi in &family.forms {
                for x in &family.probes {
                    let cols: Vec<CVector> =
                        (0..n).map(|c| phi.factor(&model.product(&Element::basis(n, c), x))).collect();
                    for (i, ci) in cols.iter().enumerate() {
                        for (j, cj) in cols.iter().enumerate() {
                            g2[(i, j)] += ci.dotc(cj);
                        }
                    }
                }
            }
            Some(null_dim_psd(&g2))
        } else {
            None
        };
        (r1, r2)
    } else {
        (r_star, None)
    };
    let radicals_agree = r_star == r1 && r2.is_none_or(|v| v == r_star);

    let passed = positivity <= tol
        && invariance <= tol
        && bound_excess <= tol
        && separation_margin > tol
        && radicals_agree
        && r_star == 0;
    Ok(ValidationReport {
        positivity,
        invariance,
        bound_excess,
        separation_margin,
        radical_dims: (r_star, r1, r2),
        radicals_agree,
        witnesses,
        passed,
    })
}

/// Random unit vectors scaled by `scale`, in a fixed seeded order.
pub(crate) fn seeded_unit_vectors(seed: u64, d: usize, count: usize, scale: f64) -> Vec<CVector> {
    let mut rng = sampling::rng(seed);
    (0..count)
        .map(|_| sampling::random_unit_vector(&mut rng, d) * Complex64::new(scale, 0.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::lp_circle::build_lp_circle_model;
    use crate::models::weighted::build_weighted_matrix_model;
    use proptest::prelude::*;

    #[test]
    fn weighted_family_validates() {
        let (m, fam) = build_weighted_matrix_model(3, &[0.0, 0.5, 1.0], 6, 7).unwrap();
        let r = form_family_validate(m.as_ref(), &fam, 1e-10).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.radical_dims, (0, 0, Some(0)));
        assert!(r.witnesses.is_empty());
    }

    #[test]
    fn zero_family_fails_separation_at_unit() {
        let (m, fam) = build_weighted_matrix_model(2, &[0.0, 1.0], 3, 1).unwrap();
        let zero = FormFamily::with_probes(vec![SesquilinearForm::zero(4)], fam.probes.clone());
        let r = form_family_validate(m.as_ref(), &zero, 1e-10).unwrap();
        assert!(!r.passed);
        assert_eq!(r.radical_dims.0, 4);
        let w = r.witnesses.iter().find(|w| w.check == "separation").unwrap();
        assert_eq!(w.a, m.unit().unwrap());
    }

    #[test]
    fn lp_weights_obey_hoelder() {
        let (m, fam, _) = build_lp_circle_model(64, 4.0, 5, 3).unwrap();
        let r = form_family_validate(m.as_ref(), &fam, 1e-10).unwrap();
        assert!(r.bound_excess <= 1e-12, "{}", r.bound_excess);
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn seminorms_vanish_at_zero() {
        let (m, fam) = build_weighted_matrix_model(2, &[0.0, 1.0], 4, 2).unwrap();
        let z = Element::zeros(4);
        let (x, y) = (&fam.probes[0], &fam.probes[1]);
        for tau in [Topology::Norm, Topology::Weak, Topology::Strong, Topology::StrongStar] {
            for phi in &fam.forms {
                assert_eq!(seminorm(m.as_ref(), &z, tau, phi, x, y).unwrap(), 0.0);
            }
            assert_eq!(max_seminorm(m.as_ref(), &fam, &z, tau), 0.0);
        }
    }

    #[test]
    fn strong_star_equals_strong_on_self_adjoint() {
        let (m, fam) = build_weighted_matrix_model(3, &[0.0, 0.3, 0.9], 5, 4).unwrap();
        for a in m.sample_elements(9, 6) {
            let h = (&a + &m.involution(&a)).scale_real(0.5);
            let s = max_seminorm(m.as_ref(), &fam, &h, Topology::Strong);
            let ss = max_seminorm(m.as_ref(), &fam, &h, Topology::StrongStar);
            assert!((s - ss).abs() <= 1e-14 * s.max(1.0));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn weak_seminorm_bound(seed in any::<u64>()) {
            let (m, fam) = build_weighted_matrix_model(3, &[0.0, 0.4, 1.1], 5, seed).unwrap();
            let s = m.sample_elements(seed, 3);
            let (a, x, y) = (&s[0], &s[1], &s[2]);
            let (_, x0) = crate::algebra::norm_pair(m.as_ref(), x).unwrap();
            let bound = m.norm(a) * x0 * m.norm(y);
            for phi in &fam.forms {
                let v = seminorm(m.as_ref(), a, Topology::Weak, phi, x, y).unwrap();
                prop_assert!(v <= bound * (1.0 + 1e-12));
            }
        }

        #[test]
        fn strong_dominated_by_norm(seed in any::<u64>()) {
            let (m, fam) = build_weighted_matrix_model(3, &[0.0, 0.4, 1.1], 5, seed).unwrap();
            let a = m.sample_elements(seed, 1).remove(0);
            let ss = max_seminorm(m.as_ref(), &fam, &a, Topology::StrongStar);
            prop_assert!(ss <= m.norm(&a) * (1.0 + 1e-12));
        }
    }
}
