//! Derivations: inner derivations, axiom defects, closability, closures
//! across truncations, weak Leibniz rules and Hilbert-model adjoints.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::QuasiAlgebra;
use crate::element::Element;
use crate::error::{check_dim, QuasiError, Result};
use crate::extrapolate::neville_at_zero;
use crate::forms::FormFamily;
use crate::linalg::{op_norm, CMatrix, CVector, LeastSquares, I};
use crate::models::hilbert::TraceModel;
use crate::weak::{FormProduct, WeakOutcome, WeakProduct};

#[derive(Debug, Clone, PartialEq)]
pub enum DerivationKind {
    QuStar,
    Weak,
    Inner(Element),
    /// Anything built from an arbitrary map; no axioms are assumed.
    Custom,
}

pub type ElementMap = Arc<dyn Fn(&Element) -> Element + Send + Sync>;

#[derive(Clone)]
enum Action {
    /// Coefficient-space matrix acting on the whole ambient space.
    Matrix(CMatrix),
    Inner(Element),
    Map(ElementMap),
}

/// A linear map defined on a subspace `D(δ)` of the ambient space.
#[derive(Clone)]
pub struct Derivation {
    model: Arc<dyn QuasiAlgebra>,
    action: Action,
    kind: DerivationKind,
    /// Orthonormal basis of a proper domain; `None` means the whole space.
    domain: Option<CMatrix>,
}

impl fmt::Debug for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Derivation")
            .field("model", &self.model.label())
            .field("kind", &self.kind)
            .field("restricted_domain", &self.domain.as_ref().map(|q| q.ncols()))
            .finish()
    }
}

const DOMAIN_TOL: f64 = 1e-10;

impl Derivation {
    pub fn from_matrix(model: Arc<dyn QuasiAlgebra>, matrix: CMatrix, kind: DerivationKind) -> Result<Self> {
        check_dim(model.dim(), matrix.ncols())?;
        check_dim(model.dim(), matrix.nrows())?;
        Ok(Self {
            model,
            action: Action::Matrix(matrix),
            kind,
            domain: None,
        })
    }

    /// Derivation given by an arbitrary map (assumed linear by `dense`).
    pub fn from_map(model: Arc<dyn QuasiAlgebra>, kind: DerivationKind, map: ElementMap) -> Self {
        Self {
            model,
            action: Action::Map(map),
            kind,
            domain: None,
        }
    }

    /// Restricts the domain to the span of `basis`.
    pub fn restricted(&self, basis: &[Element]) -> Result<Self> {
        let n = self.model.dim();
        let mut m = CMatrix::zeros(n, basis.len());
        for (k, b) in basis.iter().enumerate() {
            check_dim(n, b.len())?;
            m.set_column(k, b.coeffs());
        }
        let q = if basis.is_empty() { m } else { m.qr().q() };
        Ok(Self {
            domain: Some(q),
            ..self.clone()
        })
    }

    pub fn model(&self) -> &Arc<dyn QuasiAlgebra> {
        &self.model
    }

    pub fn kind(&self) -> &DerivationKind {
        &self.kind
    }

    pub fn has_full_domain(&self) -> bool {
        self.domain.is_none()
    }

    /// Basis of `D(δ)`.
    pub fn domain_basis(&self) -> Vec<Element> {
        match &self.domain {
            None => self.model.subalgebra_basis(),
            Some(q) => (0..q.ncols()).map(|k| Element::new(q.column(k).into_owned())).collect(),
        }
    }

    pub fn in_domain(&self, x: &Element) -> bool {
        match &self.domain {
            None => x.len() == self.model.dim(),
            Some(q) => {
                let proj = q * (q.adjoint() * x.coeffs());
                (x.coeffs() - proj).norm() <= DOMAIN_TOL * x.coeff_norm().max(1.0)
            }
        }
    }

    pub fn apply(&self, x: &Element) -> Result<Element> {
        check_dim(self.model.dim(), x.len())?;
        if !self.in_domain(x) {
            return Err(QuasiError::Domain("element outside D(δ)".into()));
        }
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &Element) -> Element {
        match &self.action {
            Action::Matrix(m) => Element::new(m * x.coeffs()),
            Action::Inner(h) => {
                let c = &self.model.product(h, x) - &self.model.product(x, h);
                c.scale(I)
            }
            Action::Map(f) => f(x),
        }
    }

    /// `δ^k(x)`.
    pub fn power_apply(&self, x: &Element, k: usize) -> Result<Element> {
        let mut v = x.clone();
        for _ in 0..k {
            v = self.apply(&v)?;
        }
        Ok(v)
    }

    /// Coefficient matrix of the action on the ambient space.
    pub fn dense(&self) -> CMatrix {
        match &self.action {
            Action::Matrix(m) => m.clone(),
            Action::Inner(h) => {
                (self.model.left_multiplication(h) - self.model.right_multiplication(h)) * I
            }
            Action::Map(_) => {
                let n = self.model.dim();
                crate::linalg::dense_from_fn(n, n, |e| self.apply_unchecked(&Element::new(e.clone())).into_coeffs())
            }
        }
    }
}

fn self_adjoint_defect(model: &dyn QuasiAlgebra, h: &Element) -> f64 {
    (h - &model.involution(h)).coeff_norm() / h.coeff_norm().max(1.0)
}

/// `δ_h(x) = i(hx − xh)` on A₀.
pub fn inner_derivation(model: Arc<dyn QuasiAlgebra>, h: &Element) -> Result<Derivation> {
    check_dim(model.dim(), h.len())?;
    let defect = self_adjoint_defect(model.as_ref(), h);
    if defect > 1e-12 {
        return Err(QuasiError::NotSelfAdjoint { defect });
    }
    Ok(Derivation {
        model,
        action: Action::Inner(h.clone()),
        kind: DerivationKind::Inner(h.clone()),
        domain: None,
    })
}

/// `(‖δ(xy) − δ(x)y − xδ(y)‖, ‖δ(x*) − δ(x)*‖)`.
pub fn derivation_defects(delta: &Derivation, x: &Element, y: &Element) -> Result<(f64, f64)> {
    let m = delta.model().as_ref();
    let xy = m.product(x, y);
    let lhs = delta.apply(&xy)?;
    let rhs = &m.product(&delta.apply(x)?, y) + &m.product(x, &delta.apply(y)?);
    let leibniz = m.norm(&(&lhs - &rhs));
    let star = m.norm(&(&delta.apply(&m.involution(x))? - &m.involution(&delta.apply(x)?)));
    Ok((leibniz, star))
}

/// Worst Leibniz and star defects over all pairs of `D(δ)` basis vectors.
pub fn derivation_defect_grid(delta: &Derivation) -> Result<(f64, f64)> {
    let basis = delta.domain_basis();
    let mut worst = (0.0f64, 0.0f64);
    for x in &basis {
        for y in &basis {
            let (l, s) = derivation_defects(delta, x, y)?;
            worst = (worst.0.max(l), worst.1.max(s));
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosabilityEvidence {
    pub closable: bool,
    /// `max |φ(w u, v)|` over forms and probes.
    pub residual: f64,
    /// Extrapolated limit `w` of `δ(x_n)`.
    pub limit: Element,
    /// Extrapolated limit of `‖x_n‖`.
    pub vanishing: f64,
}

/// Geometric tail positions `len, len/2, len/4` (1-based) for extrapolation in `1/n`.
fn tail_positions(len: usize) -> Vec<usize> {
    let mut pos = vec![len];
    let mut p = len;
    while pos.len() < 3 && p / 2 >= 1 && p / 2 < p {
        p /= 2;
        pos.push(p);
    }
    pos.dedup();
    pos
}

fn extrapolate_sequence(values: &[Element]) -> Element {
    let pos = tail_positions(values.len());
    let nodes: Vec<f64> = pos.iter().map(|p| 1.0 / *p as f64).collect();
    let n = values[0].len();
    Element::new(CVector::from_iterator(
        n,
        (0..n).map(|i| {
            let col: Vec<Complex64> = pos.iter().map(|p| values[p - 1].coeffs()[i]).collect();
            neville_at_zero(&nodes, &col)
        }),
    ))
}

/// Closability evidence along `x_n → 0` (`n = 1, 2, …`): the limit `w` of
/// `δ(x_n)` must pair to zero against every `φ(· u, v)`.
pub fn closability_probe(
    delta: &Derivation,
    family: &FormFamily,
    sequence: &[Element],
    tol: f64,
) -> Result<ClosabilityEvidence> {
    let model = delta.model().as_ref();
    if sequence.is_empty() {
        return Err(QuasiError::Precondition("empty sequence".into()));
    }
    let norms: Vec<Element> = sequence
        .iter()
        .map(|x| Element::from_real(&[model.norm(x)]))
        .collect();
    let vanishing = extrapolate_sequence(&norms).coeffs()[0].re.abs();
    let first = model.norm(&sequence[0]);
    let last = model.norm(&sequence[sequence.len() - 1]);
    if vanishing > tol.max(1e-12) * first.max(1.0) || (sequence.len() > 1 && last >= first && first > 0.0) {
        return Err(QuasiError::Precondition(format!(
            "sequence does not vanish (extrapolated norm {vanishing:.3e})"
        )));
    }
    let images: Vec<Element> = sequence.iter().map(|x| delta.apply(x)).collect::<Result<_>>()?;
    let limit = extrapolate_sequence(&images);
    let mut residual: f64 = 0.0;
    for phi in &family.forms {
        let fv: Vec<CVector> = family.probes.iter().map(|v| phi.factor(v)).collect();
        for u in &family.probes {
            let wu = phi.factor(&model.product(&limit, u));
            for v in &fv {
                residual = residual.max(v.dotc(&wu).norm());
            }
        }
    }
    Ok(ClosabilityEvidence {
        closable: residual <= tol,
        residual,
        limit,
        vanishing,
    })
}

/// One model in a truncation family with its derivation and the embedding
/// of its coefficients into the next level.
#[derive(Clone)]
pub struct TruncationLevel {
    pub delta: Derivation,
    pub embed_next: Option<CMatrix>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateReport {
    pub admitted: bool,
    /// Successive-difference norms of `(x_k, δ_k x_k)` at the finest level.
    pub increments: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct ClosureResult {
    pub derivation: Derivation,
    /// Admitted candidates, expressed at the finest level.
    pub domain: Vec<Element>,
    pub candidates: Vec<CandidateReport>,
}

/// Graph closure across truncations. `candidates[c][k]` is candidate `c`
/// realized at level `k`; it is admitted into `D(δ̄)` when the last successive
/// differences of both graph components are below `tol` (ties reject).
pub fn closure(levels: &[TruncationLevel], candidates: &[Vec<Element>], tol: f64) -> Result<ClosureResult> {
    if levels.is_empty() {
        return Err(QuasiError::Precondition("no truncation levels".into()));
    }
    let finest = &levels[levels.len() - 1];
    let fmodel = finest.delta.model().clone();
    // Cumulative embeddings into the finest level.
    let mut embeds: Vec<CMatrix> = Vec::with_capacity(levels.len());
    let nf = fmodel.dim();
    let mut acc = CMatrix::identity(nf, nf);
    for (k, lvl) in levels.iter().enumerate().rev() {
        if k + 1 < levels.len() {
            let e = lvl
                .embed_next
                .as_ref()
                .ok_or_else(|| QuasiError::Precondition(format!("level {k} lacks an embedding")))?;
            acc = &acc * e;
        }
        embeds.push(acc.clone());
    }
    embeds.reverse();

    let mut reports = Vec::new();
    let mut domain = Vec::new();
    for cand in candidates {
        check_dim(levels.len(), cand.len())?;
        let mut xs = Vec::new();
        let mut ds = Vec::new();
        for (k, x) in cand.iter().enumerate() {
            let dx = levels[k].delta.apply(x)?;
            xs.push(Element::new(&embeds[k] * x.coeffs()));
            ds.push(Element::new(&embeds[k] * dx.coeffs()));
        }
        let increments: Vec<(f64, f64)> = (1..xs.len())
            .map(|k| (fmodel.norm(&(&xs[k] - &xs[k - 1])), fmodel.norm(&(&ds[k] - &ds[k - 1]))))
            .collect();
        let admitted = match increments.last() {
            None => true,
            Some((a, b)) => *a < tol && *b < tol,
        };
        let xf = &xs[xs.len() - 1];
        let df = &ds[ds.len() - 1];
        if admitted && fmodel.norm(xf) < tol && fmodel.norm(df) >= tol {
            return Err(QuasiError::NotClosable(format!(
                "x → 0 while δx → w with ‖w‖ = {:.3e}",
                fmodel.norm(df)
            )));
        }
        if admitted {
            domain.push(xf.clone());
        }
        reports.push(CandidateReport { admitted, increments });
    }
    Ok(ClosureResult {
        derivation: finest.delta.clone(),
        domain,
        candidates: reports,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakLeibniz {
    /// `‖c − δ(a □ b)‖` for the solved `c`.
    pub defect: f64,
    /// Relative residual of the constraint system for `c`.
    pub constraint_residual: f64,
}

/// Solves `φ(c u, v) = φ(b u, δ(a)* v) + φ(δ(b) u, a* v)` for `c` and
/// compares it with `δ(a □ b)`.
pub fn weak_leibniz_defect(delta: &Derivation, product: &FormProduct, a: &Element, b: &Element) -> Result<WeakLeibniz> {
    let model = product.model();
    let ab = match product.weak_mult(a, b)? {
        WeakOutcome::Defined { product, .. } => product,
        WeakOutcome::Undefined { residual } => {
            return Err(QuasiError::Precondition(format!(
                "a □ b undefined (residual {residual:.3e})"
            )))
        }
    };
    let da = delta.apply(a)?;
    let db = delta.apply(b)?;
    let da_star = model.involution(&da);
    let a_star = model.involution(a);
    let rhs1 = product.functional(|u| model.product(b, u), |v| model.product(&da_star, v));
    let rhs2 = product.functional(|u| model.product(&db, u), |v| model.product(&a_star, v));
    let (c, constraint_residual) = product.solve_functional(&(rhs1 + rhs2));
    let dab = delta.apply(&ab)?;
    Ok(WeakLeibniz {
        defect: model.norm(&(&c - &dab)),
        constraint_residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdjointReport {
    /// Largest `‖δ⋆(yz) − δ⋆(y)z + yδ(z)‖` over basis pairs.
    pub anti_derivation: f64,
    /// `‖δ⋆ + δ‖` as an operator on the trace Hilbert space.
    pub skew: f64,
    /// Largest `|⟨δx, y⟩ + ⟨x, δy⟩|` over basis pairs.
    pub skew_pairing: f64,
    /// `D(δ̄) ⊂ ∩_y D(R̄_{δ(y)})`; every operator is everywhere defined here.
    pub domain_condition: bool,
}

/// Adjoint identities of `δ_h` in the trace model, where `δ⋆ = D^H`.
pub fn adjoint_identity_check(h: &Element, model: Arc<TraceModel>) -> Result<AdjointReport> {
    let dyn_model: Arc<dyn QuasiAlgebra> = model.clone();
    let delta = inner_derivation(dyn_model, h)?;
    let d = delta.dense();
    let dstar = d.adjoint();
    let star = |x: &Element| Element::new(&dstar * x.coeffs());
    let basis = model.subalgebra_basis();
    let mut anti: f64 = 0.0;
    let mut pairing: f64 = 0.0;
    for y in &basis {
        let sy = star(y);
        let dy = delta.apply(y)?;
        for z in &basis {
            let yz = model.product(y, z);
            let lhs = star(&yz);
            let rhs = &model.product(&sy, z) - &model.product(y, &delta.apply(z)?);
            anti = anti.max(model.norm(&(&lhs - &rhs)));
            let dz = delta.apply(z)?;
            pairing = pairing.max((model.inner(&dy, z) + model.inner(y, &dz)).norm());
        }
    }
    Ok(AdjointReport {
        anti_derivation: anti,
        skew: op_norm(&(&dstar + &d)),
        skew_pairing: pairing,
        domain_condition: true,
    })
}

/// Rank of the graph columns `[x; δx]` over a basis, a finite check that the
/// graph is a subspace of the expected dimension.
pub fn graph_rank(delta: &Derivation) -> usize {
    let basis = delta.domain_basis();
    let n = delta.model().dim();
    let mut g = CMatrix::zeros(2 * n, basis.len());
    for (k, b) in basis.iter().enumerate() {
        let db = delta.apply_unchecked(b);
        for i in 0..n {
            g[(i, k)] = b.coeffs()[i];
            g[(n + i, k)] = db.coeffs()[i];
        }
    }
    LeastSquares::new(g, 1e-12).rank()
}
