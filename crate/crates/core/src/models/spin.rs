//! Finite Pauli spin chains with the flipped-spin weighted norm.
//!
//! Basis states are `|s_0 … s_{N−1}⟩` with `s_p = 0` for spin up; the index
//! is `Σ_p s_p 2^{N−1−p}`, so site 0 is the most significant tensor factor.

use std::sync::Arc;

use crate::algebra::QuasiAlgebra;
use crate::derivations::{inner_derivation, Derivation};
use crate::element::Element;
use crate::error::{QuasiError, Result};
use crate::exponentials::{conjugation_group, exp_bounded};
use crate::forms::FormFamily;
use crate::groups::AutoGroup;
use crate::linalg::{c, identity, kron, matmul, op_norm, pauli_x, pauli_y, pauli_z, CMatrix};
use crate::models::weighted::{weighted_vector_forms, WeightedMatrixModel};
use crate::operator::Operator;
use crate::sampling;
use crate::weak::{ModuleProduct, WeakProduct};

pub const MAX_SITES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interaction {
    /// `J σᶻσᶻ`.
    Ising,
    /// `J (σˣσˣ + σʸσʸ + σᶻσᶻ)`.
    Heisenberg,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Range {
    Nearest,
    /// `J(p, q) = J |p − q|^{−α}`.
    LongRange { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub interaction: Interaction,
    pub range: Range,
    pub j: f64,
    /// Uniform field `b` along `σᶻ`.
    pub field: f64,
}

impl Default for Coupling {
    fn default() -> Self {
        Self {
            interaction: Interaction::Ising,
            range: Range::Nearest,
            j: 1.0,
            field: 0.5,
        }
    }
}

impl Coupling {
    pub fn strength(&self, p: usize, q: usize) -> f64 {
        let r = p.abs_diff(q);
        if r == 0 {
            return 0.0;
        }
        match self.range {
            Range::Nearest => {
                if r == 1 {
                    self.j
                } else {
                    0.0
                }
            }
            Range::LongRange { alpha } => self.j * (r as f64).powf(-alpha),
        }
    }

    /// Largest `|p − q|` with nonzero coupling on a chain of `sites`.
    pub fn range_on(&self, sites: usize) -> usize {
        match self.range {
            Range::Nearest => 1,
            Range::LongRange { .. } => sites.saturating_sub(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub k: usize,
    /// `|V_k|`.
    pub volume: usize,
    pub delta_weighted: f64,
    pub delta_cstar: f64,
}

#[derive(Debug, Clone)]
pub struct SpinLatticeModel {
    sites: usize,
    coupling: Coupling,
    ground: Vec<bool>,
    algebra: Arc<WeightedMatrixModel>,
}

impl SpinLatticeModel {
    /// `ground[p] = true` means site `p` points down in the reference
    /// pattern. `M` counts sites differing from it; `weights = false` sets
    /// `M = 0`.
    pub fn new(sites: usize, coupling: Coupling, ground: Option<Vec<bool>>, weights: bool) -> Result<Self> {
        if sites == 0 {
            return Err(QuasiError::Precondition("lattice must have at least one site".into()));
        }
        if sites > MAX_SITES {
            return Err(QuasiError::Size {
                requested: sites,
                cap: MAX_SITES,
            });
        }
        let ground = ground.unwrap_or_else(|| vec![false; sites]);
        if ground.len() != sites {
            return Err(QuasiError::Dimension {
                expected: sites,
                got: ground.len(),
            });
        }
        if let Range::LongRange { alpha } = coupling.range {
            if !(alpha > 0.0) {
                return Err(QuasiError::Precondition(format!("long-range exponent {alpha} must be positive")));
            }
        }
        let d = 1usize << sites;
        let exponents: Vec<f64> = (0..d)
            .map(|idx| {
                if weights {
                    (0..sites).filter(|p| bit(idx, sites, *p) != ground[*p]).count() as f64
                } else {
                    0.0
                }
            })
            .collect();
        let algebra = Arc::new(WeightedMatrixModel::new(d, &exponents)?);
        Ok(Self {
            sites,
            coupling,
            ground,
            algebra,
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn matrix_size(&self) -> usize {
        1 << self.sites
    }

    pub fn coupling(&self) -> &Coupling {
        &self.coupling
    }

    pub fn ground_pattern(&self) -> &[bool] {
        &self.ground
    }

    /// Diagonal of `M`.
    pub fn number_operator(&self) -> &[f64] {
        self.algebra.exponents()
    }

    pub fn algebra(&self) -> &Arc<WeightedMatrixModel> {
        &self.algebra
    }

    /// `I_{2^first} ⊗ op ⊗ I`, for `op` acting on consecutive sites from `first`.
    pub fn embed(&self, op: &CMatrix, first: usize) -> Result<CMatrix> {
        let width = op.nrows().trailing_zeros() as usize;
        if !op.nrows().is_power_of_two() || op.ncols() != op.nrows() || first + width > self.sites {
            return Err(QuasiError::Precondition(format!(
                "{}×{} operator at site {first} does not fit {} sites",
                op.nrows(),
                op.ncols(),
                self.sites
            )));
        }
        let left = identity(1 << first);
        let right = identity(1 << (self.sites - first - width));
        Ok(kron(&kron(&left, op), &right))
    }

    /// `σ_p^{axis}` with axis 1, 2, 3 for x, y, z.
    pub fn pauli(&self, site: usize, axis: usize) -> Result<CMatrix> {
        self.embed(&pauli_matrix(axis)?, site)
    }

    fn check_volume(&self, volume: &[usize]) -> Result<()> {
        for (i, p) in volume.iter().enumerate() {
            if *p >= self.sites || volume[..i].contains(p) {
                return Err(QuasiError::Precondition(format!(
                    "volume {volume:?} is not a set of sites of a {}-site chain",
                    self.sites
                )));
            }
        }
        Ok(())
    }

    /// `h_V = Σ_{p<q ∈ V} J(p,q) (pair term) + b Σ_{p ∈ V} σ_p^z`.
    pub fn hamiltonian_matrix(&self, volume: &[usize]) -> Result<CMatrix> {
        self.check_volume(volume)?;
        let n = self.sites;
        let d = 1usize << n;
        let mut h = CMatrix::zeros(d, d);
        let axes: &[usize] = match self.coupling.interaction {
            Interaction::Ising => &[3],
            Interaction::Heisenberg => &[1, 2, 3],
        };
        for (i, &p) in volume.iter().enumerate() {
            for &q in &volume[i + 1..] {
                let j = self.coupling.strength(p, q);
                if j == 0.0 {
                    continue;
                }
                for &axis in axes {
                    h += self.site_product(&[(p, axis), (q, axis)])? * c(j, 0.0);
                }
            }
            if self.coupling.field != 0.0 {
                h += self.site_product(&[(p, 3)])? * c(self.coupling.field, 0.0);
            }
        }
        Ok(h)
    }

    pub fn hamiltonian(&self, volume: &[usize]) -> Result<Element> {
        Ok(Element::from_matrix(&self.hamiltonian_matrix(volume)?))
    }

    /// Tensor product of Paulis at distinct sites, identity elsewhere.
    fn site_product(&self, factors: &[(usize, usize)]) -> Result<CMatrix> {
        let mut m = CMatrix::identity(1, 1);
        for site in 0..self.sites {
            let f = match factors.iter().find(|(p, _)| *p == site) {
                Some((_, axis)) => pauli_matrix(*axis)?,
                None => identity(2),
            };
            m = kron(&m, &f);
        }
        Ok(m)
    }

    /// `δ_V(x) = i[h_V, x]`.
    pub fn derivation(&self, volume: &[usize]) -> Result<Derivation> {
        inner_derivation(self.algebra.clone(), &self.hamiltonian(volume)?)
    }

    /// `α_t^V = e^{ith_V} · e^{−ith_V}` at a single time.
    pub fn local_dynamics(&self, volume: &[usize], t: f64) -> Result<Operator> {
        let h = self.hamiltonian(volume)?;
        let product = ModuleProduct::new(self.algebra.clone());
        let e = exp_bounded(&product, &h, t, f64::EPSILON)?.element;
        Ok(self.algebra.conjugation_operator(&e, &self.algebra.involution(&e)))
    }

    pub fn local_group(&self, volume: &[usize], certify_times: &[f64]) -> Result<AutoGroup> {
        let h = self.hamiltonian(volume)?;
        let product: Arc<dyn WeakProduct> = Arc::new(ModuleProduct::new(self.algebra.clone()));
        conjugation_group(product, &h, certify_times)
    }

    /// True when `x` commutes with every Pauli outside `support`.
    pub fn is_supported_in(&self, x: &Element, support: &[usize]) -> Result<bool> {
        let d = self.matrix_size();
        if x.len() != d * d {
            return Err(QuasiError::Dimension {
                expected: d * d,
                got: x.len(),
            });
        }
        let xm = x.to_matrix(d);
        let scale = xm.norm().max(1.0);
        for p in (0..self.sites).filter(|p| !support.contains(p)) {
            for axis in 1..=3 {
                let s = self.pauli(p, axis)?;
                if (matmul(&s, &xm) - matmul(&xm, &s)).norm() > 1e-12 * scale {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// `Δ_k = ‖δ_{V_{k+1}}(x) − δ_{V_k}(x)‖` for the chain `V_k = [0, k]`,
    /// starting at the smallest `V_k` containing `support`.
    pub fn thermodynamic_limit_probe(&self, x: &Element, support: &[usize]) -> Result<Vec<ProbeRow>> {
        self.check_volume(support)?;
        if support.is_empty() {
            return Err(QuasiError::Precondition("support must be nonempty".into()));
        }
        if !self.is_supported_in(x, support)? {
            return Err(QuasiError::Precondition(format!("observable is not local to sites {support:?}")));
        }
        let d = self.matrix_size();
        let xm = x.to_matrix(d);
        let k0 = *support.iter().max().unwrap_or(&0);
        let delta = |k: usize| -> Result<CMatrix> {
            let v: Vec<usize> = (0..=k).collect();
            let h = self.hamiltonian_matrix(&v)?;
            Ok((matmul(&h, &xm) - matmul(&xm, &h)) * c(0.0, 1.0))
        };
        let mut rows = Vec::new();
        let mut prev = delta(k0)?;
        for k in k0..self.sites.saturating_sub(1) {
            let next = delta(k + 1)?;
            let diff = &next - &prev;
            rows.push(ProbeRow {
                k,
                volume: k + 1,
                delta_weighted: self.algebra.matrix_norm(&diff),
                delta_cstar: op_norm(&diff),
            });
            prev = next;
        }
        Ok(rows)
    }

    /// Random operator on sites `first .. first + width`, embedded.
    pub fn random_local_observable(&self, rng: &mut sampling::SampleRng, first: usize, width: usize) -> Result<Element> {
        let a = sampling::random_matrix(rng, 1 << width);
        Ok(Element::from_matrix(&self.embed(&a, first)?))
    }

    /// Seeded local observables on blocks of at most `max_width` sites.
    pub fn local_observables(&self, seed: u64, count: usize, max_width: usize) -> Result<Vec<Element>> {
        let mut rng = sampling::rng(seed);
        let max_width = max_width.clamp(1, self.sites);
        (0..count)
            .map(|_| {
                let width = rand::Rng::random_range(&mut rng, 1..=max_width);
                let first = rand::Rng::random_range(&mut rng, 0..=self.sites - width);
                self.random_local_observable(&mut rng, first, width)
            })
            .collect()
    }
}

fn bit(idx: usize, sites: usize, p: usize) -> bool {
    (idx >> (sites - 1 - p)) & 1 == 1
}

fn pauli_matrix(axis: usize) -> Result<CMatrix> {
    match axis {
        1 => Ok(pauli_x()),
        2 => Ok(pauli_y()),
        3 => Ok(pauli_z()),
        _ => Err(QuasiError::Precondition(format!("Pauli axis {axis} not in 1..=3"))),
    }
}

/// Number of vector states in the default family: every basis direction
/// plus a few generic ones.
fn default_family_size(d: usize) -> usize {
    d + 4
}

pub fn build_spin_lattice_model(
    sites: usize,
    coupling: Coupling,
    weights: bool,
) -> Result<(Arc<WeightedMatrixModel>, SpinLatticeModel, FormFamily)> {
    let lattice = SpinLatticeModel::new(sites, coupling, None, weights)?;
    let model = lattice.algebra().clone();
    let forms = weighted_vector_forms(&model, default_family_size(model.d()), sites as u64);
    let family = FormFamily::new(model.as_ref(), forms, sites as u64);
    Ok((model, lattice, family))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::QuasiAlgebra;
    use crate::forms::form_family_validate;
    use crate::groups::{automorphism_check, hy1_verify};
    use crate::linalg::hermitian_defect;

    #[test]
    fn single_site_number_operator() {
        let (_, lat, _) = build_spin_lattice_model(1, Coupling::default(), true).unwrap();
        assert_eq!(lat.number_operator(), &[0.0, 1.0]);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            build_spin_lattice_model(11, Coupling::default(), true),
            Err(QuasiError::Size { requested: 11, cap: 10 })
        ));
    }

    #[test]
    fn two_site_flip_norms() {
        let (m, lat, _) = build_spin_lattice_model(2, Coupling::default(), true).unwrap();
        let x = Element::from_matrix(&lat.pauli(0, 1).unwrap());
        assert!((m.cstar_norm(&x).unwrap() - 1.0).abs() < 1e-15);
        // σˣ ⊗ I pairs M = 0 with M = 1 and M = 1 with M = 2.
        assert!((m.norm(&x) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn hamiltonians_are_hermitian() {
        for interaction in [Interaction::Ising, Interaction::Heisenberg] {
            for range in [Range::Nearest, Range::LongRange { alpha: 2.0 }] {
                let coupling = Coupling {
                    interaction,
                    range,
                    j: 0.7,
                    field: -0.3,
                };
                let lat = SpinLatticeModel::new(4, coupling, None, true).unwrap();
                let h = lat.hamiltonian_matrix(&[0, 1, 3]).unwrap();
                assert_eq!(hermitian_defect(&h), 0.0);
            }
        }
    }

    #[test]
    fn embedding_is_consistent() {
        let coupling = Coupling {
            interaction: Interaction::Heisenberg,
            ..Coupling::default()
        };
        let small = SpinLatticeModel::new(3, coupling, None, true).unwrap();
        let big = SpinLatticeModel::new(4, coupling, None, true).unwrap();
        let hs = small.hamiltonian_matrix(&[0, 1, 2]).unwrap();
        let hb = big.hamiltonian_matrix(&[0, 1, 2]).unwrap();
        assert_eq!(kron(&hs, &identity(2)), hb);
    }

    #[test]
    fn qubit_rotation() {
        let b = 1.3;
        let coupling = Coupling {
            field: b / 2.0,
            ..Coupling::default()
        };
        let lat = SpinLatticeModel::new(1, coupling, None, true).unwrap();
        let t = 0.9;
        let theta = lat.local_dynamics(&[0], t).unwrap();
        let x = Element::from_matrix(&pauli_x());
        let got = theta.apply(&x).to_matrix(2);
        let want = pauli_x() * c((b * t).cos(), 0.0) - pauli_y() * c((b * t).sin(), 0.0);
        assert!((got - want).norm() < 1e-14);
        assert!(lat.local_dynamics(&[0], 0.0).unwrap().dense() == identity(4));
    }

    #[test]
    fn generator_matches_commutator() {
        let coupling = Coupling {
            interaction: Interaction::Heisenberg,
            ..Coupling::default()
        };
        let lat = SpinLatticeModel::new(2, coupling, None, true).unwrap();
        let delta = lat.derivation(&[0, 1]).unwrap();
        let eps = 1e-3;
        let at = |t: f64| lat.local_dynamics(&[0, 1], t).unwrap();
        let (p1, m1, p2, m2) = (at(eps), at(-eps), at(2.0 * eps), at(-2.0 * eps));
        for x in lat.algebra().subalgebra_basis() {
            // Five-point stencil.
            let near = &p1.apply(&x) - &m1.apply(&x);
            let far = &p2.apply(&x) - &m2.apply(&x);
            let fd = (&near.scale_real(8.0) - &far).scale_real(1.0 / (12.0 * eps));
            let exact = delta.apply(&x).unwrap();
            assert!((&fd - &exact).coeff_norm() < 1e-8);
        }
    }

    #[test]
    fn probe_terminates_for_nearest_neighbour_ising() {
        let lat = SpinLatticeModel::new(5, Coupling::default(), None, true).unwrap();
        let x = Element::from_matrix(&lat.pauli(0, 1).unwrap());
        let rows = lat.thermodynamic_limit_probe(&x, &[0]).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows[0].delta_cstar > 0.1);
        for r in &rows[1..] {
            assert_eq!(r.delta_cstar, 0.0);
            assert_eq!(r.delta_weighted, 0.0);
        }
    }

    #[test]
    fn probe_rejects_nonlocal_observable() {
        let lat = SpinLatticeModel::new(3, Coupling::default(), None, true).unwrap();
        let x = Element::from_matrix(&lat.pauli(2, 1).unwrap());
        assert!(matches!(
            lat.thermodynamic_limit_probe(&x, &[0]),
            Err(QuasiError::Precondition(_))
        ));
    }

    #[test]
    fn long_range_probe_is_dominated() {
        let coupling = Coupling {
            range: Range::LongRange { alpha: 2.0 },
            ..Coupling::default()
        };
        let lat = SpinLatticeModel::new(6, coupling, None, true).unwrap();
        let x = Element::from_matrix(&lat.pauli(0, 1).unwrap());
        let rows = lat.thermodynamic_limit_probe(&x, &[0]).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].delta_cstar < w[0].delta_cstar);
        }
        for r in &rows {
            assert!(r.delta_weighted <= r.delta_cstar + 1e-15);
        }
    }

    #[test]
    fn unweighted_columns_coincide() {
        let coupling = Coupling {
            range: Range::LongRange { alpha: 2.0 },
            ..Coupling::default()
        };
        let lat = SpinLatticeModel::new(4, coupling, None, false).unwrap();
        let x = Element::from_matrix(&lat.pauli(0, 1).unwrap());
        for r in lat.thermodynamic_limit_probe(&x, &[0]).unwrap() {
            assert_eq!(r.delta_weighted, r.delta_cstar);
        }
    }

    #[test]
    fn small_lattice_family_validates() {
        let (m, _, family) = build_spin_lattice_model(2, Coupling::default(), true).unwrap();
        let report = form_family_validate(m.as_ref(), &family, 1e-9).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn local_dynamics_is_automorphism_with_hy1() {
        let coupling = Coupling {
            interaction: Interaction::Heisenberg,
            ..Coupling::default()
        };
        let lat = SpinLatticeModel::new(2, coupling, None, true).unwrap();
        let product = ModuleProduct::new(lat.algebra().clone());
        let basis = lat.algebra().subalgebra_basis();
        for t in [0.3, 1.7] {
            let theta = lat.local_dynamics(&[0, 1], t).unwrap();
            let rep = automorphism_check(&theta, &product, &basis, 1e-8).unwrap();
            assert!(rep.passed, "{rep:?}");
        }
        let group = lat.local_group(&[0, 1], &[-1.0, -0.5, 0.5, 1.0]).unwrap();
        let delta = lat.derivation(&[0, 1]).unwrap();
        let samples = lat.algebra().sample_elements(4, 6);
        let rep = hy1_verify(&group, &delta, &[-2.0, -1.0, 1.0, 2.0], &samples, None, 1e-6).unwrap();
        assert!(rep.min_slack >= -1e-10, "{rep:?}");
    }
}
