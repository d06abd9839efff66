//! Scott-style normal forms, bounded model search, model shrinking and the
//! invariance and validity checks built on them.

mod invariance;
mod model;
mod normal_form;
mod shrink;

pub use invariance::{check_invariance, check_invariance_brute_force, validity_via_invariance, InvarianceVerdict};
pub use model::{find_model, find_model_of_size, ModelSearch};
pub use normal_form::{
    completeness_bound, normal_form_of_sentence, parse_normal_form, scott_normal_form, FreshDef,
    NormalForm, Side,
};
pub use shrink::{shrink_model, Repair, ShrinkTrace};

use thiserror::Error;

use crate::eval::EvalError;
use crate::formula::LogicError;
use crate::structure::{Element, StructureError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("formula is not in the two-variable fragment: {0}")]
    NotTwoVariable(String),
    #[error("counting quantifiers are not supported by the normal form")]
    Counting,
    #[error("relation `{0}` has arity above 2")]
    ArityTooLarge(String),
    #[error("order symbol `{0}` is not allowed here")]
    UnexpectedOrder(String),
    #[error("input is not a model of the normal form: {0}")]
    NotAModel(String),
    #[error("no partner repairs the witness of element {element} for conjunct {side}.{conjunct}")]
    RepairFailed {
        element: Element,
        side: usize,
        conjunct: usize,
    },
    #[error("internal consistency check failed: {0}")]
    Internal(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Logic(#[from] LogicError),
}
