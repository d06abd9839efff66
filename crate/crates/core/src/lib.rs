//! Workbench for order-invariant two-variable first-order logic on finite structures.
//!
//! Modules, bottom-up: [`structure`] and [`io`] (finite structures and their
//! file format), [`canon`] (canonical keys and enumeration), [`formula`] and
//! [`parser`] (syntax), [`eval`] (model checking), [`solver`] (normal form,
//! small-model search, invariance checks), [`locality`] (neighbourhood types
//! and order construction), [`games`] (pebble games and the explicit
//! duplicator strategy) and [`dendroid`] (the dendroid separating example).

pub mod canon;
pub mod dendroid;
pub mod eval;
pub mod formula;
pub mod games;
pub mod io;
pub mod locality;
pub mod parser;
pub mod solver;
pub mod structure;

pub use canon::{
    canonical_key, enumerate_structures, find_isomorphism, is_isomorphic, pointed_isomorphism, structure_key,
    CanonicalKey,
};
pub use formula::{analyze, print_formula, substitute_symbol, Formula, FragmentReport, LogicError, Var};
pub use io::{parse_structure, print_structure};
pub use parser::{parse_formula, parse_formula_file, Fragment};
pub use structure::{
    AtomicType1, AtomicType2, Element, GaifmanGraph, LinearOrder, PointedStructure, RelSymbol,
    Signature, Structure, StructureError,
};
