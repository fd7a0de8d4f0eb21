use std::f64::consts::PI;

use quasalg::extrapolate::log_log_slope;
use quasalg::linalg::c;
use quasalg::models::boundary::{boundary_pairing_check, closed_grid};
use quasalg::models::spin::{Coupling, Interaction, Range, SpinLatticeModel};
use quasalg::{QuasiAlgebra, QuasiError};

use super::{mat, Outcome};
use crate::config::ExperimentConfig;
use crate::report::{Cell, Table, Verdict};

pub const ANCHOR_LOCAL: &str = "δ_V(x) = i[H_V, x] on local x, and the limit of δ_V(x) as V grows";
pub const ANCHOR_DOMINATION: &str = "‖x‖ ≤ ‖x‖₀ for local observables of the weighted spin algebra";
pub const ANCHOR_BOUNDARY: &str = "−⟨f, g′⟩ = ⟨f′, g⟩ − (f(1) − f(0)) ḡ(0) for periodic g";

pub fn spin_lattice_probe(cfg: &ExperimentConfig) -> quasalg::Result<Outcome> {
    let sites = cfg.sites.unwrap_or(6);
    let coupling = Coupling {
        interaction: cfg.interaction.unwrap_or(Interaction::Ising),
        range: cfg.range.unwrap_or(Range::LongRange { alpha: 2.0 }),
        j: cfg.j.unwrap_or(1.0),
        field: cfg.field.unwrap_or(0.5),
    };
    let tol = cfg.tol_or(1e-12);
    let lattice = SpinLatticeModel::new(sites, coupling, None, true)?;
    let model = lattice.algebra().clone();
    let x = mat(&lattice.pauli(0, 1)?);
    let rows = lattice.thermodynamic_limit_probe(&x, &[0])?;

    let mut table = Table::new("probe", &["k", "volume", "delta_weighted", "delta_cstar"]);
    let mut excess = f64::NEG_INFINITY;
    for r in &rows {
        table.push(vec![
            Cell::from(r.k),
            Cell::from(r.volume),
            Cell::from(r.delta_weighted),
            Cell::from(r.delta_cstar),
        ]);
        excess = excess.max(r.delta_weighted - r.delta_cstar);
    }
    let mut verdicts = vec![Verdict::at_most(
        "max Δ_k(weighted) − Δ_k(C*)",
        ANCHOR_LOCAL,
        excess,
        tol * rows.iter().map(|r| r.delta_cstar).fold(1.0, f64::max),
    )];
    match coupling.range {
        Range::Nearest => {
            let tail = rows
                .iter()
                .filter(|r| r.k >= 1)
                .map(|r| r.delta_weighted.max(r.delta_cstar))
                .fold(0.0, f64::max);
            verdicts.push(Verdict::at_most("max Δ_k once V_k covers the range", ANCHOR_LOCAL, tail, tol));
        }
        Range::LongRange { .. } => {
            let (first, last) = match (rows.first(), rows.last()) {
                (Some(f), Some(l)) => (f.delta_cstar, l.delta_cstar),
                _ => return Err(QuasiError::Precondition("need at least two sites".into())),
            };
            verdicts.push(Verdict::at_most("last Δ_k(C*) / first Δ_k(C*)", ANCHOR_LOCAL, last / first, 1.0));
        }
    }
    let mut domination = f64::NEG_INFINITY;
    for y in lattice.local_observables(cfg.seed, 50, 3.min(sites))? {
        let c0 = model
            .cstar_norm(&y)
            .ok_or_else(|| QuasiError::Precondition("C*-norm expected".into()))?;
        domination = domination.max(model.norm(&y) - c0);
    }
    verdicts.push(Verdict::at_most("max ‖x‖ − ‖x‖₀ over 50 local observables", ANCHOR_DOMINATION, domination, 0.0));
    Ok((verdicts, vec![table]))
}

pub fn boundary_pairing(cfg: &ExperimentConfig) -> quasalg::Result<Outcome> {
    let n = cfg.grid.unwrap_or(256);
    let tol = cfg.tol_or(1e-3);
    let ns = [n / 4, n / 2, n];
    // ∫₀¹ 2x e^{−2πix} dx = i/π and f(1) − f(0) = 1.
    let exact = c(-1.0, 1.0 / PI);
    let mut table = Table::new("pairing", &["n", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "residual"]);
    let mut residuals = Vec::new();
    let mut finest = None;
    for &m in &ns {
        let f = closed_grid(m, |x| c(x * x, 0.0));
        let g = closed_grid(m, |x| c((2.0 * PI * x).cos(), (2.0 * PI * x).sin()));
        let r = boundary_pairing_check(m, &f, &g)?;
        table.push(vec![
            Cell::from(m),
            Cell::from(r.lhs.re),
            Cell::from(r.lhs.im),
            Cell::from(r.rhs.re),
            Cell::from(r.rhs.im),
            Cell::from(r.residual),
        ]);
        residuals.push(r.residual);
        finest = Some(r);
    }
    let hs: Vec<f64> = ns.iter().map(|m| 1.0 / *m as f64).collect();
    let order = log_log_slope(&hs, &residuals);
    let r = finest.ok_or_else(|| QuasiError::Precondition("no grids".into()))?;
    let verdicts = vec![
        Verdict::at_least("fitted order of the discrepancy", ANCHOR_BOUNDARY, order, 1.8),
        Verdict::at_most(format!("|lhs − (i/π − 1)| at N = {n}"), ANCHOR_BOUNDARY, (r.lhs - exact).norm(), tol),
        Verdict::at_most(format!("|rhs − (i/π − 1)| at N = {n}"), ANCHOR_BOUNDARY, (r.rhs - exact).norm(), tol),
    ];
    Ok((verdicts, vec![table]))
}
