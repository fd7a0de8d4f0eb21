//! Finite-dimensional models of Banach quasi *-algebras, together with
//! derivations, automorphism groups and exponentials acting on them.

pub mod algebra;
pub mod derivations;
pub mod element;
pub mod error;
pub mod exponentials;
pub mod extrapolate;
pub mod forms;
pub mod groups;
pub mod linalg;
pub mod models;
pub mod operator;
pub mod sampling;
pub mod weak;

pub use algebra::{InducedNorm, QuasiAlgebra};
pub use element::Element;
pub use error::{QuasiError, Result};
pub use forms::{FormFamily, SesquilinearForm, Topology};
pub use operator::Operator;
pub use weak::{FormProduct, ModuleProduct, WeakOutcome, WeakProduct};
