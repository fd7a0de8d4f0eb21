use std::f64::consts::PI;
use std::sync::Arc;

use quasalg::derivations::{inner_derivation, Derivation, DerivationKind};
use quasalg::exponentials::conjugation_group;
use quasalg::extrapolate::log_log_slope;
use quasalg::groups::{automorphism_check, check_elements, hy1_verify, yosida_approximant};
use quasalg::linalg::{c, pauli_x, pauli_z};
use quasalg::models::lp_circle::{build_lp_circle_model, LpCircleModel};
use quasalg::models::weighted::build_weighted_matrix_model;
use quasalg::{Element, ModuleProduct, QuasiAlgebra, QuasiError, WeakProduct};

use super::{mat, rotation, Outcome};
use crate::config::ExperimentConfig;
use crate::report::{Cell, Table, Verdict};

pub const ANCHOR_INNER_GROUP: &str = "β_t(a) = e^{ith} a e^{-ith} is a *-automorphism group generated by δ_h = i[h, ·]";
pub const ANCHOR_YOSIDA: &str = "(I − tδ/n)^{-n} → β_t as n → ∞ for the generator δ of a uniformly bounded group";
pub const ANCHOR_HY1: &str = "‖λa − δ(a)‖ ≥ |λ| ‖a‖ / C for the generator δ of a group with ‖β_t‖ ≤ C";

fn log2_floor(n: u64) -> u32 {
    63 - n.max(2).leading_zeros()
}

/// Fitted order of `error(n)` over the indices `n ≥ 2^10`.
fn tail_order(rows: &[(u64, f64)]) -> f64 {
    let tail: Vec<&(u64, f64)> = rows.iter().filter(|(n, e)| *n >= 1 << 10 && *e > 0.0).collect();
    if tail.len() < 2 {
        return f64::NAN;
    }
    let x: Vec<f64> = tail.iter().map(|(n, _)| 1.0 / *n as f64).collect();
    let y: Vec<f64> = tail.iter().map(|(_, e)| *e).collect();
    log_log_slope(&x, &y)
}

pub fn qubit_conjugation(cfg: &ExperimentConfig) -> quasalg::Result<Outcome> {
    let exps = cfg.exponents.clone().unwrap_or_else(|| vec![0.0, 1.0]);
    if exps.len() != 2 {
        return Err(QuasiError::Precondition("the qubit model needs exactly two exponents".into()));
    }
    let tol = cfg.tol_or(1e-4);
    let times = cfg.t_grid.clone().unwrap_or_else(|| vec![0.1, 0.5, 1.0, 2.0, PI]);
    let n_max = cfg.n_max.unwrap_or(1 << 20);
    let (model, _) = build_weighted_matrix_model(2, &exps, cfg.family_size.unwrap_or(4), cfg.seed)?;
    let h = mat(&(pauli_z() * c(0.5, 0.0)));
    let d = inner_derivation(model.clone(), &h)?.dense();
    let product: Arc<dyn WeakProduct> = Arc::new(ModuleProduct::new(model.clone()));
    let group = conjugation_group(product.clone(), &h, &times)?;
    let x = mat(&pauli_x());

    let mut yosida = Table::new("yosida", &["t", "n", "error_norm"]);
    let mut closed = Table::new("group", &["t", "conjugation_error"]);
    let mut verdicts = Vec::new();
    let mut worst_group: f64 = 0.0;
    for &t in &times {
        let exact = rotation(t);
        let mut rows = Vec::new();
        for k in 1..=log2_floor(n_max) {
            let n = 1u64 << k;
            let y = yosida_approximant(&d, t, n)?;
            let err = model.norm(&(&Element::new(&y * x.coeffs()) - &exact));
            yosida.push(vec![Cell::from(t), Cell::from(n), Cell::from(err)]);
            rows.push((n, err));
        }
        let last = rows.last().map_or(f64::NAN, |r| r.1);
        verdicts.push(Verdict::at_most(format!("Yosida error at n = {}, t = {t}", rows.last().map_or(0, |r| r.0)), ANCHOR_YOSIDA, last, tol));
        let order = tail_order(&rows);
        verdicts.push(Verdict::at_most(format!("|order − 1| at t = {t}"), ANCHOR_YOSIDA, (order - 1.0).abs(), 0.2));
        let ge = model.norm(&(&group.apply(t, &x)? - &exact));
        closed.push(vec![Cell::from(t), Cell::from(ge)]);
        worst_group = worst_group.max(ge);
    }
    verdicts.push(Verdict::at_most("max ‖β_t(σx) − (cos t σx − sin t σy)‖", ANCHOR_INNER_GROUP, worst_group, 1e-12));
    let elements = check_elements(model.as_ref(), 8, cfg.seed);
    let theta = group.at(times[0])?;
    let r = automorphism_check(&theta, product.as_ref(), &elements, 1e-10)?;
    verdicts.push(
        Verdict::at_most("automorphism residual of β_t", ANCHOR_INNER_GROUP, r.star_residual.max(r.product_residual), 1e-10)
            .with_detail(format!("{} pairs, {} definedness mismatches", r.pairs_checked, r.definedness_mismatches)),
    );
    Ok((verdicts, vec![yosida, closed]))
}

fn translation_derivation(model: &Arc<LpCircleModel>) -> quasalg::Result<Derivation> {
    let m: Arc<dyn QuasiAlgebra> = model.clone();
    Derivation::from_matrix(m, model.derivative_matrix().clone(), DerivationKind::Weak)
}

pub fn hy1_translation(cfg: &ExperimentConfig) -> quasalg::Result<Outcome> {
    let n = cfg.grid.unwrap_or(256);
    let p = cfg.p.unwrap_or(2.0);
    let tol = cfg.tol_or(1e-10);
    let lambdas = cfg.lambda_list.clone().unwrap_or_else(|| vec![-2.0, -1.0, -0.5, 0.5, 1.0, 2.0]);
    let (model, _, group) = build_lp_circle_model(n, p, cfg.family_size.unwrap_or(4), cfg.seed)?;
    let delta = translation_derivation(&model)?;
    let mut samples = model.sample_elements(cfg.seed, 20);
    samples.extend(model.smooth_samples(cfg.seed.wrapping_add(1), 20, 8));
    let report = hy1_verify(&group, &delta, &lambdas, &samples, None, 1e-8)?;

    let mut table = Table::new("slack", &["sample", "lambda", "slack"]);
    for row in &report.rows {
        table.push(vec![Cell::from(row.sample), Cell::from(row.lambda), Cell::from(row.slack)]);
    }
    let verdicts = vec![
        Verdict::at_least("min slack", ANCHOR_HY1, report.min_slack, -tol),
        Verdict::at_most("certified group bound C", ANCHOR_HY1, report.bound, if p == 2.0 { 1.0 + 1e-12 } else { f64::INFINITY }),
        Verdict::at_most("closedness surrogate", ANCHOR_HY1, report.closedness, 1e-8),
    ];
    Ok((verdicts, vec![table]))
}

pub fn yosida_convergence(cfg: &ExperimentConfig) -> quasalg::Result<Outcome> {
    let n = cfg.grid.unwrap_or(32);
    let p = cfg.p.unwrap_or(2.0);
    let tol = cfg.tol_or(1e-3);
    let times = cfg.t_grid.clone().unwrap_or_else(|| vec![0.05, 0.1, 0.25]);
    let n_max = cfg.n_max.unwrap_or(1 << 20);
    let model = Arc::new(LpCircleModel::new(n, p)?);
    let d = translation_derivation(&model)?.dense();

    let mut table = Table::new("convergence", &["n", "t", "error_norm", "contraction_excess"]);
    let mut verdicts = Vec::new();
    let mut excess = f64::NEG_INFINITY;
    for &t in &times {
        let exact = model.translation_matrix(t);
        let mut rows = Vec::new();
        for k in 1..=log2_floor(n_max) {
            let m = 1u64 << k;
            let y = yosida_approximant(&d, t, m)?;
            let err = model.induced_norm(&(&y - &exact)).upper;
            let ex = model.induced_norm(&y).upper - 1.0;
            excess = excess.max(ex);
            table.push(vec![Cell::from(m), Cell::from(t), Cell::from(err), Cell::from(ex)]);
            rows.push((m, err));
        }
        let (last_n, last) = rows.last().copied().unwrap_or((0, f64::NAN));
        verdicts.push(Verdict::at_most(format!("error at n = {last_n}, t = {t}"), ANCHOR_YOSIDA, last, tol));
        let order = tail_order(&rows);
        verdicts.push(Verdict::at_most(format!("|order − 1| at t = {t}"), ANCHOR_YOSIDA, (order - 1.0).abs(), 0.2));
    }
    if p == 2.0 {
        // Contractive in exact arithmetic; squarings amplify rounding by up to n.
        verdicts.push(Verdict::at_most(
            "max ‖(I − tD/n)^{-n}‖ − 1",
            ANCHOR_YOSIDA,
            excess,
            n_max as f64 * 1e-14,
        ));
    }
    Ok((verdicts, vec![table]))
}
