//! End-to-end acceptance checks, one verdict line per criterion.
//!
//! Runs without the libtest harness so that the verdict lines always reach
//! the output. The process fails when a criterion fails unexpectedly, or
//! when a criterion listed in `KNOWN_FAILURES` starts passing.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;

use quasalg::algebra::QuasiAlgebra;
use quasalg::derivations::{
    adjoint_identity_check, closability_probe, inner_derivation, weak_leibniz_defect, Derivation,
    DerivationKind,
};
use quasalg::exponentials::{conjugation_group, exp_bounded, exp_unbounded, resolvent_bound_check};
use quasalg::extrapolate::log_log_slope;
use quasalg::groups::{
    automorphism_check, binomial_leibniz_check, hy1_verify, laplace_resolvent, yosida_approximant,
    yosida_group, yosida_synthesized_group, AutoGroup, Quadrature,
};
use quasalg::linalg::{c, pauli_x, pauli_y, pauli_z, CMatrix};
use quasalg::models::boundary::{boundary_pairing_check, closed_grid};
use quasalg::models::hilbert::{build_trace_model, TraceModel};
use quasalg::models::lp_circle::{build_lp_circle_model, translation_group, LpCircleModel};
use quasalg::models::spin::{Coupling, Interaction, SpinLatticeModel};
use quasalg::models::weighted::build_weighted_matrix_model;
use quasalg::sampling;
use quasalg::{Element, FormProduct, ModuleProduct, Operator, WeakProduct};

/// Criteria whose failure is a documented property of the underlying theory
/// rather than of this implementation.
const KNOWN_FAILURES: &[usize] = &[6];

struct Check {
    name: String,
    value: f64,
    limit: f64,
    /// `true` for `value ≤ limit`, `false` for `value ≥ limit`.
    upper: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            upper: true,
        }
    }

    fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            upper: false,
        }
    }

    fn passed(&self) -> bool {
        if self.upper {
            self.value <= self.limit
        } else {
            self.value >= self.limit
        }
    }
}

type Outcome = Result<Vec<Check>, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn mat(m: &CMatrix) -> Element {
    Element::from_matrix(m)
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn qubit_setup() -> Result<(Arc<quasalg::models::weighted::WeightedMatrixModel>, Element), String> {
    let (model, _) = build_weighted_matrix_model(2, &[0.0, 1.0], 4, 1).map_err(err)?;
    Ok((model, mat(&(pauli_z() * c(0.5, 0.0)))))
}

fn rotation(t: f64) -> Element {
    mat(&(pauli_x() * c(t.cos(), 0.0) - pauli_y() * c(t.sin(), 0.0)))
}

fn criterion_1() -> Outcome {
    let (model, h) = qubit_setup()?;
    let delta = inner_derivation(model.clone(), &h).map_err(err)?;
    let d = delta.dense();
    let x = mat(&pauli_x());
    let mut checks = Vec::new();
    for t in [0.1, 1.0, PI] {
        let mut inv_n = Vec::new();
        let mut errors = Vec::new();
        for k in 10..=20 {
            let n = 1u64 << k;
            let y = yosida_approximant(&d, t, n).map_err(err)?;
            let e = model.norm(&(&Element::new(&y * x.coeffs()) - &rotation(t)));
            inv_n.push(1.0 / n as f64);
            errors.push(e);
        }
        checks.push(Check::at_most(&format!("error at n = 2^20, t = {t:.4}"), errors[errors.len() - 1], 1e-4));
        let order = log_log_slope(&inv_n, &errors);
        checks.push(Check::at_least(&format!("order at t = {t:.4} (low)"), order, 0.8));
        checks.push(Check::at_most(&format!("order at t = {t:.4} (high)"), order, 1.2));
        // The doubling driver reaches the same accuracy on its own.
        let plain = yosida_group(&delta, t, 1e-5, 1 << 20).map_err(err)?;
        let e = model.norm(&(&Element::new(&plain.operator * x.coeffs()) - &rotation(t)));
        checks.push(Check::at_most(&format!("yosida_group error, t = {t:.4}"), e, 1e-4));
    }
    Ok(checks)
}

fn criterion_2() -> Outcome {
    let (model, _, group) = build_lp_circle_model(256, 2.0, 4, 7).map_err(err)?;
    let delta = Derivation::from_matrix(model.clone(), model.derivative_matrix().clone(), DerivationKind::Weak)
        .map_err(err)?;
    let mut samples = model.sample_elements(2024, 50);
    samples.extend(model.smooth_samples(2025, 50 - 9, 8));
    let lambdas = [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0];
    let report = hy1_verify(&group, &delta, &lambdas, &samples, None, 1e-8).map_err(err)?;
    Ok(vec![
        Check::at_most("group bound", report.bound, 1.0 + 1e-12),
        Check::at_least("min slack", report.min_slack, -1e-10),
    ])
}

fn qubit_group() -> Result<(Arc<quasalg::models::weighted::WeightedMatrixModel>, Derivation, AutoGroup), String> {
    let (model, h) = qubit_setup()?;
    let product: Arc<dyn WeakProduct> = Arc::new(ModuleProduct::new(model.clone()));
    let times: Vec<f64> = (0..16).map(|k| k as f64 * 0.4 - 3.0).collect();
    let group = conjugation_group(product, &h, &times).map_err(err)?;
    let delta = inner_derivation(model.clone(), &h).map_err(err)?;
    Ok((model, delta, group))
}

fn criterion_3() -> Outcome {
    let (model, delta, group) = qubit_group()?;
    let q = Quadrature::Fixed {
        step: 1e-3,
        horizon: 40.0,
    };
    let x = mat(&pauli_x());
    let r = laplace_resolvent(&group, &delta, &x, 1.0, q, 1e-10).map_err(err)?;
    let want = mat(&((pauli_x() - pauli_y()) * c(0.5, 0.0)));
    let mut samples = model.subalgebra_basis();
    samples.extend(model.sample_elements(33, 4));
    let report = hy1_verify(&group, &delta, &[1.0], &samples, Some(q), 1e-10).map_err(err)?;
    Ok(vec![
        Check::at_most("‖R₁(σx) − (σx − σy)/2‖", model.norm(&(&r - &want)), 1e-6),
        Check::at_most("max ‖(λ − δ)R_λ(a) − a‖ and ‖R_λ((λ − δ)a) − a‖", report.max_inverse_residual, 1e-8),
        Check::at_most("max ‖R_λ(a)‖ − ‖a‖/|λ|", report.max_resolvent_excess, 1e-10),
        Check::at_most("group bound", report.bound, 1.0 + 1e-12),
    ])
}

fn group_axioms(name: &str, model: &dyn QuasiAlgebra, group: &AutoGroup, seed: u64) -> Result<Vec<Check>, String> {
    let zero_is_identity = group.at(0.0).map_err(err)?.is_identity();
    let times: Vec<f64> = (0..10).map(|k| -1.8 + 0.4 * k as f64).collect();
    let ops: Vec<Operator> = times.iter().map(|t| group.at(*t)).collect::<Result<_, _>>().map_err(err)?;
    let mut law: f64 = 0.0;
    for (i, t) in times.iter().enumerate() {
        for (j, s) in times.iter().enumerate() {
            let whole = group.at(t + s).map_err(err)?;
            let composed = ops[i].compose(&ops[j]);
            law = law.max(model.operator_distance(&whole, &composed).upper);
        }
    }
    let samples = model.sample_elements(seed, 50);
    let mut excess = f64::NEG_INFINITY;
    for (op, _) in ops.iter().zip(&times) {
        for a in &samples {
            excess = excess.max(model.norm(&op.apply(a)) - model.norm(a));
        }
    }
    Ok(vec![
        Check::at_least(&format!("{name}: β₀ is the identity"), f64::from(u8::from(zero_is_identity)), 1.0),
        Check::at_most(&format!("{name}: max ‖β_(t+s) − β_t β_s‖"), law, 1e-8),
        Check::at_most(&format!("{name}: max ‖β_t(a)‖ − ‖a‖"), excess, 1e-10),
    ])
}

fn criterion_4() -> Outcome {
    let mut checks = Vec::new();
    let (qmodel, qdelta, qgroup) = qubit_group()?;
    checks.extend(group_axioms("qubit conjugation", qmodel.as_ref(), &qgroup, 1)?);

    let times: Vec<f64> = (0..8).map(|k| -3.5 + k as f64).collect();
    let ygroup = yosida_synthesized_group(&qdelta, 1e-10, &times).map_err(err)?;
    checks.extend(group_axioms("qubit Yosida synthesis", qmodel.as_ref(), &ygroup, 2)?);

    let circle = Arc::new(LpCircleModel::new(64, 2.0).map_err(err)?);
    let tgroup = translation_group(circle.clone());
    checks.extend(group_axioms("L² translation", circle.as_ref(), &tgroup, 3)?);

    for interaction in [Interaction::Ising, Interaction::Heisenberg] {
        let coupling = Coupling {
            interaction,
            ..Coupling::default()
        };
        let lattice = SpinLatticeModel::new(3, coupling, None, true).map_err(err)?;
        let sgroup = lattice.local_group(&[0, 1, 2], &times).map_err(err)?;
        checks.extend(group_axioms(
            &format!("{interaction:?} chain, 3 sites"),
            lattice.algebra().as_ref(),
            &sgroup,
            4,
        )?);
    }
    Ok(checks)
}

fn criterion_5() -> Outcome {
    let (model, family) = build_weighted_matrix_model(4, &[0.0, 1.0, 1.0, 2.0], 20, 5).map_err(err)?;
    let product = FormProduct::new(model.clone(), family, 1e-9).map_err(err)?;
    let basis = model.subalgebra_basis();
    let mut rng = sampling::rng(55);
    let mut leibniz: f64 = 0.0;
    let mut constraint: f64 = 0.0;
    let mut binomial: f64 = 0.0;
    for _ in 0..3 {
        let h = mat(&sampling::random_hermitian(&mut rng, 4));
        let delta = inner_derivation(model.clone(), &h).map_err(err)?;
        for a in &basis {
            for b in &basis {
                let w = weak_leibniz_defect(&delta, &product, a, b).map_err(err)?;
                leibniz = leibniz.max(w.defect);
                constraint = constraint.max(w.constraint_residual);
            }
        }
        for pair in model.sample_elements(rng_seed(&mut rng), 4).chunks(2) {
            binomial = binomial.max(binomial_leibniz_check(&delta, &product, &pair[0], &pair[1], 8).map_err(err)?);
        }
    }
    Ok(vec![
        Check::at_most("max weak Leibniz defect over basis pairs", leibniz, 1e-8),
        Check::at_most("max constraint residual", constraint, 1e-8),
        Check::at_most("max binomial Leibniz residual, n ≤ 8", binomial, 1e-6),
    ])
}

fn rng_seed(rng: &mut sampling::SampleRng) -> u64 {
    rand::Rng::random(rng)
}

fn criterion_6() -> Outcome {
    let (model, family) = build_weighted_matrix_model(4, &[0.0, 1.0, 1.0, 2.0], 20, 6).map_err(err)?;
    let product = FormProduct::new(model.clone(), family, 1e-9).map_err(err)?;
    let mut rng = sampling::rng(66);
    let mut worst_norm_b: f64 = 0.0;
    let mut agreement: f64 = 0.0;
    for k in 0..20 {
        let h = mat(&sampling::random_hermitian(&mut rng, 4));
        let e = exp_bounded(&product, &h, 1.0, 1e-14).map_err(err)?;
        worst_norm_b = worst_norm_b.max(e.checks.norm_b_defect);
        if k < 3 {
            let (u, _) = exp_unbounded(&product, &h, 1.0, 2e-8, 1 << 30).map_err(err)?;
            agreement = agreement.max(model.norm(&(&u.element - &e.element)));
        }
    }

    // Diagonal family with growing spectrum.
    let d = 16;
    let exponents: Vec<f64> = (0..d).map(|k| (k % 4) as f64).collect();
    let (dmodel, dfamily) = build_weighted_matrix_model(d, &exponents, d + 4, 16).map_err(err)?;
    let dproduct = ModuleProduct::new(dmodel.clone());
    let _ = dfamily;
    let eigs: Vec<Complex64> = (0..d).map(|k| c((k * k) as f64 / 8.0 - 4.0, 0.0)).collect();
    let hd = mat(&CMatrix::from_diagonal(&quasalg::linalg::CVector::from_vec(eigs)));
    let (_, diag) = exp_unbounded(&dproduct, &hd, 1.0, 1e-9, 1 << 34).map_err(err)?;
    let gammas = [-10.0, -1.0, -0.1, 0.1, 1.0, 10.0];
    let rb = resolvent_bound_check(&dproduct, &hd, &gammas, 1e-12).map_err(err)?;
    Ok(vec![
        Check::at_most("max |‖e^{ith}‖_b − 1| over 20 seeded h", worst_norm_b, 1e-9),
        Check::at_most("series vs resolvent-limit exponential", agreement, 1e-6),
        Check::at_most("‖u_L − u_R‖, diagonal family d = 16", diag.left_right, 1e-8),
        Check::at_least("min 1/|γ| − ‖(h + iγ)^{−1}‖_b", rb.worst_slack, -1e-10),
    ])
}

fn criterion_7() -> Outcome {
    let mut checks = Vec::new();
    let sequence = |x0: &Element| -> Vec<Element> {
        (1..=10_000).map(|n| x0.scale_real(1.0 / n as f64)).collect()
    };
    let mut rng = sampling::rng(77);
    let mut cases: Vec<(String, Arc<dyn QuasiAlgebra>, quasalg::FormFamily)> = Vec::new();
    let (w2, f2) = build_weighted_matrix_model(2, &[0.0, 1.0], 4, 71).map_err(err)?;
    cases.push(("weighted d = 2".into(), w2, f2));
    let (w4, f4) = build_weighted_matrix_model(4, &[0.0, 1.0, 1.0, 2.0], 20, 72).map_err(err)?;
    cases.push(("weighted d = 4".into(), w4, f4));
    let (t3, ft) = build_trace_model(3, 12, 73).map_err(err)?;
    cases.push(("trace d = 3".into(), t3, ft));
    let (s2, _, fs) = quasalg::models::spin::build_spin_lattice_model(2, Coupling::default(), true).map_err(err)?;
    cases.push(("spin chain, 2 sites".into(), s2, fs));

    let mut control = None;
    for (name, model, family) in &cases {
        let d = model.matrix_size().ok_or("matrix model expected")?;
        let h = mat(&sampling::random_hermitian(&mut rng, d));
        let delta = inner_derivation(model.clone(), &h).map_err(err)?;
        let x0 = model.sample_elements(rng_seed(&mut rng), 1).remove(0);
        let ev = closability_probe(&delta, family, &sequence(&x0), 1e-8).map_err(err)?;
        checks.push(Check::at_most(&format!("{name}: closability residual"), ev.residual, 1e-8));
        if control.is_none() {
            // δ(x) = i[h, x] + w₀ is affine, so δ(x_n) → w₀ ≠ 0.
            let offset = model.unit().ok_or("unit expected")?;
            let hh = h.clone();
            let m = model.clone();
            let map = Arc::new(move |x: &Element| {
                let hx = m.product(&hh, x);
                let xh = m.product(x, &hh);
                &(&hx - &xh).scale(c(0.0, 1.0)) + &offset
            });
            let bad = Derivation::from_map(model.clone(), DerivationKind::Custom, map);
            let ev = closability_probe(&bad, family, &sequence(&x0), 1e-8).map_err(err)?;
            control = Some(Check::at_least(&format!("{name}: negative control residual"), ev.residual, 1e-3));
        }
    }
    checks.extend(control);
    Ok(checks)
}

fn criterion_8() -> Outcome {
    let model = Arc::new(TraceModel::new(3).map_err(err)?);
    let mut rng = sampling::rng(88);
    let mut skew: f64 = 0.0;
    let mut anti: f64 = 0.0;
    for _ in 0..20 {
        let h = mat(&sampling::random_hermitian(&mut rng, 3));
        let r = adjoint_identity_check(&h, model.clone()).map_err(err)?;
        skew = skew.max(r.skew);
        anti = anti.max(r.anti_derivation);
    }
    Ok(vec![
        Check::at_most("max ‖δ⋆ + δ‖", skew, 1e-10),
        Check::at_most("max anti-derivation residual", anti, 1e-10),
    ])
}

fn criterion_9() -> Outcome {
    let lattice = SpinLatticeModel::new(8, Coupling::default(), None, true).map_err(err)?;
    let model = lattice.algebra().clone();
    let mut rng = sampling::rng(99);
    let mut single = vec![mat(&lattice.pauli(0, 1).map_err(err)?)];
    single.push(lattice.random_local_observable(&mut rng, 0, 1).map_err(err)?);
    let mut tail: f64 = 0.0;
    for x in &single {
        for row in lattice.thermodynamic_limit_probe(x, &[0]).map_err(err)? {
            if row.k >= 2 {
                tail = tail.max(row.delta_weighted).max(row.delta_cstar);
            }
        }
    }
    let mut domination = f64::NEG_INFINITY;
    for x in lattice.local_observables(909, 100, 3).map_err(err)? {
        let c0 = model.cstar_norm(&x).ok_or("C*-norm expected")?;
        domination = domination.max(model.norm(&x) - c0);
    }
    let product = ModuleProduct::new(model.clone());
    let elements = lattice.local_observables(919, 5, 2).map_err(err)?;
    let volume: Vec<usize> = (0..8).collect();
    let mut auto: f64 = 0.0;
    let mut passed = true;
    for t in [0.3, 1.7] {
        let theta = lattice.local_dynamics(&volume, t).map_err(err)?;
        let r = automorphism_check(&theta, &product, &elements, 1e-8).map_err(err)?;
        auto = auto.max(r.star_residual).max(r.product_residual);
        passed &= r.passed;
    }
    Ok(vec![
        Check::at_most("max Δ_k for k ≥ 2", tail, 1e-12),
        Check::at_most("max ‖x‖ − ‖x‖₀ over 100 observables", domination, 0.0),
        Check::at_most("automorphism residual at t = 0.3, 1.7", auto, 1e-8),
        Check::at_least("automorphism check verdict", f64::from(u8::from(passed)), 1.0),
    ])
}

fn criterion_10() -> Outcome {
    let ns = [64usize, 128, 256];
    let mut residuals = Vec::new();
    for &n in &ns {
        let f = closed_grid(n, |x| c(x * x, 0.0));
        let g = closed_grid(n, |x| Complex64::from_polar(1.0, 2.0 * PI * x));
        residuals.push(boundary_pairing_check(n, &f, &g).map_err(err)?.residual);
    }
    let hs: Vec<f64> = ns.iter().map(|n| 1.0 / *n as f64).collect();
    let order = log_log_slope(&hs, &residuals);
    Ok(vec![Check::at_least("fitted order", order, 1.8)])
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("Yosida synthesis vs closed form", criterion_1),
        ("Hille–Yosida lower bound, L² translation", criterion_2),
        ("resolvent quadrature, qubit group", criterion_3),
        ("group axioms", criterion_4),
        ("weak Leibniz rules", criterion_5),
        ("exponentials", criterion_6),
        ("closability", criterion_7),
        ("Hilbert-model adjoint identities", criterion_8),
        ("spin lattice", criterion_9),
        ("boundary pairing", criterion_10),
    ];
    let mut unexpected = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let (ok, lines) = match &outcome {
            Ok(checks) => {
                let lines: Vec<String> = checks
                    .iter()
                    .map(|c| {
                        format!(
                            "    [{}] {}: {:.3e} (limit {} {:.1e})",
                            if c.passed() { "ok" } else { "FAIL" },
                            c.name,
                            c.value,
                            if c.upper { "≤" } else { "≥" },
                            c.limit
                        )
                    })
                    .collect();
                (checks.iter().all(Check::passed), lines)
            }
            Err(e) => (false, vec![format!("    error: {e}")]),
        };
        let expected_fail = KNOWN_FAILURES.contains(&id);
        let tag = match (ok, expected_fail) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("criterion {id:>2} {tag}: {name} [{secs:.1}s]");
        for l in lines {
            println!("{l}");
        }
        if ok == expected_fail {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected verdicts for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
