use std::sync::Arc;

use rand::Rng;

use quasalg::algebra::boundedness_growth;
use quasalg::derivations::{closability_probe, inner_derivation, weak_leibniz_defect, Derivation, DerivationKind};
use quasalg::exponentials::{diagonal_exponential, exp_unbounded, resolvent_bound_check};
use quasalg::groups::binomial_leibniz_check;
use quasalg::linalg::{c, real_diag};
use quasalg::models::hilbert::build_trace_model;
use quasalg::models::spin::{build_spin_lattice_model, Coupling};
use quasalg::models::weighted::{build_weighted_matrix_model, WeightedMatrixModel};
use quasalg::sampling;
use quasalg::{Element, FormFamily, FormProduct, ModuleProduct, QuasiAlgebra, QuasiError};

use super::{mat, Outcome};
use crate::config::ExperimentConfig;
use crate::report::{Cell, Table, Verdict};

pub const ANCHOR_WEAK_LEIBNIZ: &str = "φ(δ(a□b)x, y) = φ(bx, δ(a)*y) + φ(δ(b)x, a*y) for all φ in the family and x, y in A₀";
pub const ANCHOR_BINOMIAL: &str = "δⁿ(a□b) = Σ_k C(n,k) δ^{n−k}(a) □ δ^k(b)";
pub const ANCHOR_EXP: &str = "e^{ith} = lim (I − (it/n) L_h)^{-n} 𝟙 for self-adjoint h";
pub const ANCHOR_RESOLVENT: &str = "‖(h + iγ𝟙)^{-1}‖_b ≤ 1/|γ| for self-adjoint h";
pub const ANCHOR_GROWTH: &str = "‖h‖_b grows without bound along the truncations of an unbounded h";
pub const ANCHOR_CLOSABLE: &str = "x_n → 0 and δ(x_n) → w imply w = 0 (closability)";

fn weighted_params(cfg: &ExperimentConfig, default: &[f64]) -> quasalg::Result<(usize, Vec<f64>)> {
    let exps = match (&cfg.exponents, cfg.d) {
        (Some(m), _) => m.clone(),
        (None, Some(d)) if d != default.len() => (0..d).map(|k| default[k % default.len()]).collect(),
        _ => default.to_vec(),
    };
    Ok((exps.len(), exps))
}

pub fn weak_leibniz_matrix(cfg: &ExperimentConfig) -> quasalg::Result<Outcome> {
    let (d, exps) = weighted_params(cfg, &[0.0, 1.0, 1.0, 2.0])?;
    let tol = cfg.tol_or(1e-8);
    let (model, family) = build_weighted_matrix_model(d, &exps, cfg.family_size.unwrap_or(5 * d), cfg.seed)?;
    let product = FormProduct::new(model.clone(), family, 1e-9)?;
    let basis = model.subalgebra_basis();
    let mut rng = sampling::rng(cfg.seed);

    let mut defects = Table::new("defects", &["h", "a", "b", "defect", "constraint_residual"]);
    let mut binomial = Table::new("binomial", &["h", "pair", "order", "residual"]);
    let (mut leibniz, mut constraint, mut worst_binomial) = (0.0f64, 0.0f64, 0.0f64);
    let order = 8;
    for hi in 0..3usize {
        let h = mat(&sampling::random_hermitian(&mut rng, d));
        let delta = inner_derivation(model.clone(), &h)?;
        for (ai, a) in basis.iter().enumerate() {
            for (bi, b) in basis.iter().enumerate() {
                let w = weak_leibniz_defect(&delta, &product, a, b)?;
                leibniz = leibniz.max(w.defect);
                constraint = constraint.max(w.constraint_residual);
                defects.push(vec![
                    Cell::from(hi),
                    Cell::from(ai),
                    Cell::from(bi),
                    Cell::from(w.defect),
                    Cell::from(w.constraint_residual),
                ]);
            }
        }
        let pairs = model.sample_elements(rng.random(), 4);
        for (pi, pair) in pairs.chunks(2).enumerate() {
            let r = binomial_leibniz_check(&delta, &product, &pair[0], &pair[1], order)?;
            worst_binomial = worst_binomial.max(r);
            binomial.push(vec![Cell::from(hi), Cell::from(pi), Cell::from(order), Cell::from(r)]);
        }
    }
    let verdicts = vec![
        Verdict::at_most("max weak Leibniz defect over basis pairs", ANCHOR_WEAK_LEIBNIZ, leibniz, tol),
        Verdict::at_most("max constraint residual", ANCHOR_WEAK_LEIBNIZ, constraint, tol),
        Verdict::at_most(format!("max binomial residual, n ≤ {order}"), ANCHOR_BINOMIAL, worst_binomial, 1e-6),
    ];
    Ok((verdicts, vec![defects, binomial]))
}

pub fn exp_unbounded_diagonal(cfg: &ExperimentConfig) -> quasalg::Result<Outcome> {
    let d = cfg.d.or(cfg.exponents.as_ref().map(Vec::len)).unwrap_or(16);
    let exps = cfg.exponents.clone().unwrap_or_else(|| (0..d).map(|k| (k % 4) as f64).collect());
    let tol = cfg.tol_or(1e-5);
    let times = cfg.t_grid.clone().unwrap_or_else(|| vec![0.5, 1.0]);
    let gammas = cfg.lambda_list.clone().unwrap_or_else(|| vec![-10.0, -1.0, -0.1, 0.1, 1.0, 10.0]);
    let n_max = cfg.n_max.unwrap_or(1 << 30);
    let model: Arc<dyn QuasiAlgebra> = Arc::new(WeightedMatrixModel::new(d, &exps)?);
    let product = ModuleProduct::new(model.clone());
    let eigs: Vec<f64> = (1..=d).map(|k| k as f64).collect();
    let h = mat(&real_diag(&eigs));

    let mut increments = Table::new("increments", &["t", "n", "increment"]);
    let mut summary = Table::new("summary", &["t", "n", "error_norm", "left_right", "norm_b_defect", "unitarity"]);
    let mut verdicts = Vec::new();
    for &t in &times {
        let (e, diag) = exp_unbounded(&product, &h, t, tol / 10.0, n_max)?;
        for (i, inc) in diag.increments.iter().enumerate() {
            increments.push(vec![Cell::from(t), Cell::from(1u64 << (i + 2)), Cell::from(*inc)]);
        }
        let err = model.norm(&(&e.element - &diagonal_exponential(&eigs, t)));
        summary.push(vec![
            Cell::from(t),
            Cell::from(e.steps),
            Cell::from(err),
            Cell::from(diag.left_right),
            Cell::from(e.checks.norm_b_defect),
            Cell::from(e.checks.unitarity),
        ]);
        verdicts.push(Verdict::at_most(format!("‖u(t) − diag(e^{{itk}})‖ at t = {t}"), ANCHOR_EXP, err, tol));
        verdicts.push(Verdict::at_most(format!("‖u_L − u_R‖ at t = {t}"), ANCHOR_EXP, diag.left_right, 1e-8));
        // |(1 − itk/n)^{-n}| = 1 − O(t²k²/n), the same order as the error.
        verdicts.push(Verdict::at_most(
            format!("|‖e^{{ith}}‖_b − 1| at t = {t}"),
            ANCHOR_EXP,
            e.checks.norm_b_defect,
            tol,
        ));
    }
    let rb = resolvent_bound_check(&product, &h, &gammas, 1e-12)?;
    let mut resolvent = Table::new("resolvent_bound", &["gamma", "norm_b", "slack"]);
    for row in &rb.rows {
        resolvent.push(vec![Cell::from(row.gamma), Cell::from(row.norm_b), Cell::from(row.slack)]);
    }
    verdicts.push(Verdict::at_least("min 1/|γ| − ‖(h + iγ)^{-1}‖_b", ANCHOR_RESOLVENT, rb.worst_slack, -1e-10));

    let sizes: Vec<usize> = std::iter::successors(Some(2usize), |k| Some(k * 2)).take_while(|k| *k <= d).collect();
    let levels: Vec<WeightedMatrixModel> = sizes
        .iter()
        .map(|&k| WeightedMatrixModel::new(k, &exps[..k]))
        .collect::<quasalg::Result<_>>()?;
    let pairs: Vec<(&dyn QuasiAlgebra, Element)> = levels
        .iter()
        .map(|m| {
            let k = m.d();
            (m as &dyn QuasiAlgebra, mat(&real_diag(&eigs[..k])))
        })
        .collect();
    let growth = boundedness_growth(&pairs)?;
    let mut gt = Table::new("growth", &["d", "norm_b"]);
    for (k, nb) in sizes.iter().zip(&growth.norms) {
        gt.push(vec![Cell::from(*k), Cell::from(*nb)]);
    }
    verdicts.push(Verdict::holds("diag(1..d) flagged effectively unbounded", ANCHOR_GROWTH, growth.effectively_unbounded));
    Ok((verdicts, vec![increments, summary, resolvent, gt]))
}

pub fn closability_suite(cfg: &ExperimentConfig) -> quasalg::Result<Outcome> {
    let tol = cfg.tol_or(1e-8);
    let len = cfg.n_max.unwrap_or(10_000) as usize;
    let seed = cfg.seed;
    let mut cases: Vec<(String, Arc<dyn QuasiAlgebra>, FormFamily)> = Vec::new();
    let (w2, f2) = build_weighted_matrix_model(2, &[0.0, 1.0], 4, seed)?;
    cases.push(("weighted d = 2".into(), w2, f2));
    let (w4, f4) = build_weighted_matrix_model(4, &[0.0, 1.0, 1.0, 2.0], 20, seed.wrapping_add(1))?;
    cases.push(("weighted d = 4".into(), w4, f4));
    let (t3, ft) = build_trace_model(3, 12, seed.wrapping_add(2))?;
    cases.push(("trace d = 3".into(), t3, ft));
    let (s2, _, fs) = build_spin_lattice_model(2, Coupling::default(), true)?;
    cases.push(("spin chain, 2 sites".into(), s2, fs));

    let mut rng = sampling::rng(seed);
    let mut table = Table::new("closability", &["case", "residual", "vanishing", "closable"]);
    let mut verdicts = Vec::new();
    let mut control = None;
    for (name, model, family) in &cases {
        let d = model
            .matrix_size()
            .ok_or_else(|| QuasiError::Precondition("matrix model expected".into()))?;
        let h = mat(&sampling::random_hermitian(&mut rng, d));
        let delta = inner_derivation(model.clone(), &h)?;
        let x0 = model.sample_elements(rng.random(), 1).remove(0);
        let seq: Vec<Element> = (1..=len).map(|n| x0.scale_real(1.0 / n as f64)).collect();
        let ev = closability_probe(&delta, family, &seq, tol)?;
        table.push(vec![
            Cell::from(name.as_str()),
            Cell::from(ev.residual),
            Cell::from(ev.vanishing),
            Cell::from(usize::from(ev.closable)),
        ]);
        verdicts.push(Verdict::at_most(format!("{name}: residual"), ANCHOR_CLOSABLE, ev.residual, tol));
        if control.is_none() {
            // i[h, x] + 𝟙 is affine: δ(x_n) → 𝟙 while x_n → 0.
            let unit = model.unit().ok_or_else(|| QuasiError::Precondition("unit expected".into()))?;
            let (m, hh) = (model.clone(), h.clone());
            let map = Arc::new(move |x: &Element| &(&m.product(&hh, x) - &m.product(x, &hh)).scale(c(0.0, 1.0)) + &unit);
            let bad = Derivation::from_map(model.clone(), DerivationKind::Custom, map);
            let ev = closability_probe(&bad, family, &seq, tol)?;
            table.push(vec![
                Cell::from(format!("{name}, affine control")),
                Cell::from(ev.residual),
                Cell::from(ev.vanishing),
                Cell::from(usize::from(ev.closable)),
            ]);
            control = Some(Verdict::at_least(
                format!("{name}: affine control detected"),
                ANCHOR_CLOSABLE,
                ev.residual,
                1e-3,
            ));
        }
    }
    verdicts.extend(control);
    Ok((verdicts, vec![table]))
}
