//! Hodge theory for chain complexes of Hilbert C*-modules over
//! finite-dimensional C*-algebras, with an analytic laboratory on the flat
//! torus.

pub mod algebra;
pub mod complex;
pub mod config;
pub mod error;
pub mod hom;
pub mod io;
pub mod linalg;
pub mod module;
pub mod par;
pub mod random;
pub mod report;
pub mod suite;
pub mod symbol;
pub mod torus;

pub use algebra::{AlgebraElement, AlgebraSpec};
pub use complex::{ChainComplex, Parametrix};
pub use error::{Error, Result};
pub use hom::{Morphism, RankDecision};
pub use linalg::{CMat, C64};
pub use module::{ModuleSpec, ModuleVector};
