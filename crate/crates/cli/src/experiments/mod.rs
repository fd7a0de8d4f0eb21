//! The experiment registry.

use std::time::Instant;

use quasalg::linalg::{c, pauli_x, pauli_y, CMatrix};
use quasalg::Element;

use crate::config::{ConfigError, ExperimentConfig};
use crate::report::{ExperimentReport, Table, Verdict};

mod algebraic;
mod dynamics;
mod lattice;

pub type Outcome = (Vec<Verdict>, Vec<Table>);
type Runner = fn(&ExperimentConfig) -> quasalg::Result<Outcome>;

pub struct Experiment {
    pub name: &'static str,
    pub summary: &'static str,
    pub anchors: &'static [&'static str],
    run: Runner,
}

pub const REGISTRY: &[Experiment] = &[
    Experiment {
        name: "qubit-conjugation",
        summary: "Yosida approximants of the qubit rotation group against the closed form",
        anchors: &[dynamics::ANCHOR_INNER_GROUP, dynamics::ANCHOR_YOSIDA],
        run: dynamics::qubit_conjugation,
    },
    Experiment {
        name: "hy1-translation",
        summary: "lower bound ‖λa − δa‖ ≥ |λ|‖a‖/C for translations on the circle",
        anchors: &[dynamics::ANCHOR_HY1],
        run: dynamics::hy1_translation,
    },
    Experiment {
        name: "yosida-convergence",
        summary: "error and contraction of (I − tD/n)^{-n} against exact translation",
        anchors: &[dynamics::ANCHOR_YOSIDA],
        run: dynamics::yosida_convergence,
    },
    Experiment {
        name: "weak-leibniz-matrix",
        summary: "weak and binomial Leibniz rules for inner derivations of a weighted matrix model",
        anchors: &[algebraic::ANCHOR_WEAK_LEIBNIZ, algebraic::ANCHOR_BINOMIAL],
        run: algebraic::weak_leibniz_matrix,
    },
    Experiment {
        name: "exp-unbounded-diagonal",
        summary: "resolvent-limit exponential of diag(1..d) and the resolvent bound",
        anchors: &[algebraic::ANCHOR_EXP, algebraic::ANCHOR_RESOLVENT, algebraic::ANCHOR_GROWTH],
        run: algebraic::exp_unbounded_diagonal,
    },
    Experiment {
        name: "spin-lattice-probe",
        summary: "increments of δ_V(x) along growing volumes of a spin chain",
        anchors: &[lattice::ANCHOR_LOCAL, lattice::ANCHOR_DOMINATION],
        run: lattice::spin_lattice_probe,
    },
    Experiment {
        name: "closability-suite",
        summary: "closability evidence for inner derivations, with an affine negative control",
        anchors: &[algebraic::ANCHOR_CLOSABLE],
        run: algebraic::closability_suite,
    },
    Experiment {
        name: "boundary-pairing",
        summary: "integration by parts with boundary term for the derivative on [0, 1]",
        anchors: &[lattice::ANCHOR_BOUNDARY],
        run: lattice::boundary_pairing,
    },
];

pub fn find(name: &str) -> Option<&'static Experiment> {
    REGISTRY.iter().find(|e| e.name == name)
}

/// Runs the configured experiment. Numeric failures become a failing
/// `run` verdict rather than an error.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport, ConfigError> {
    let exp = find(&config.experiment).ok_or_else(|| ConfigError::UnknownExperiment(config.experiment.clone()))?;
    config.validate()?;
    let start = Instant::now();
    let (verdicts, tables) = match (exp.run)(config) {
        Ok(out) => out,
        Err(e) => (
            vec![Verdict::at_most("run", exp.anchors[0], f64::NAN, 0.0).with_detail(e.to_string())],
            Vec::new(),
        ),
    };
    Ok(ExperimentReport {
        experiment: exp.name.into(),
        anchors: exp.anchors.to_vec(),
        verdicts,
        tables,
        config: config.echo(),
        version: env!("CARGO_PKG_VERSION"),
        wall_time: start.elapsed(),
    })
}

fn mat(m: &CMatrix) -> Element {
    Element::from_matrix(m)
}

/// `cos t σx − sin t σy`, the orbit of σx under conjugation by `e^{itσz/2}`.
fn rotation(t: f64) -> Element {
    mat(&(pauli_x() * c(t.cos(), 0.0) - pauli_y() * c(t.sin(), 0.0)))
}
