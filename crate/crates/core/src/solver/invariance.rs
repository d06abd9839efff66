//! Order-invariance and validity checks for two-variable sentences.

use num_bigint::BigUint;

use super::{find_model, scott_normal_form, SolverError};
use crate::canon::enumerate_structures;
use crate::eval::{holds_under_orders, Evaluator, OrderMode, OrderVerdict};
use crate::formula::{Formula, Var};
use crate::parser::infer_signature;
use crate::structure::{LinearOrder, Structure};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InvarianceVerdict {
    /// `structure` satisfies the sentence under `order0` and falsifies it under `order1`.
    NotInvariant {
        structure: Structure,
        order0: LinearOrder,
        order1: LinearOrder,
    },
    /// No witness of non-invariance with at most `max_size` elements.
    InvariantUpTo {
        max_size: usize,
        completeness_bound: BigUint,
    },
}

impl InvarianceVerdict {
    pub fn is_invariant(&self) -> bool {
        matches!(self, InvarianceVerdict::InvariantUpTo { .. })
    }
}

/// Searches for a structure of size at most `max_size` on which `phi`
/// (a sentence using the order symbol `<`) changes truth value between two orders.
pub fn check_invariance(phi: &Formula, max_size: usize) -> Result<InvarianceVerdict, SolverError> {
    let nf = scott_normal_form(phi)?;
    let search = find_model(&nf, max_size)?;
    let Some(model) = search.model else {
        return Ok(InvarianceVerdict::InvariantUpTo {
            max_size,
            completeness_bound: search.completeness_bound,
        });
    };
    let structure = model.reduct(nf.base.clone())?.without_orders();
    let order0 = model.order("<0").expect("model has <0").clone();
    let order1 = model.order("<1").expect("model has <1").clone();
    let mut ev = Evaluator::new(phi);
    let t0 = ev.eval(&structure, &[("<", &order0)], &[])?;
    let t1 = ev.eval(&structure, &[("<", &order1)], &[])?;
    if !t0 || t1 {
        return Err(SolverError::Internal(
            "decoded witness does not separate the two orders".into(),
        ));
    }
    Ok(InvarianceVerdict::NotInvariant {
        structure,
        order0,
        order1,
    })
}

/// Decides validity of `phi` by reduction to order invariance: if the
/// negation has a one-element model the answer is `false`; otherwise `phi`
/// is valid iff `!phi -> exists x (P(x) & forall y (y <= x))` is order
/// invariant, with `P` a symbol not occurring in `phi`.
pub fn validity_via_invariance(phi: &Formula, max_size: usize) -> Result<bool, SolverError> {
    if !phi.is_sentence() {
        return Err(SolverError::NotTwoVariable("formula has free variables".into()));
    }
    let sig = infer_signature(phi)?;
    let one = LinearOrder::identity(1);
    let mut ev = Evaluator::new(phi);
    for s in enumerate_structures(sig.clone(), 1, None)
        .map_err(|e| SolverError::Internal(e.to_string()))?
        .iter()
    {
        if !ev.eval(&s, &[("<", &one)], &[])? {
            return Ok(false);
        }
    }
    let mut p = "P".to_string();
    let mut k = 0;
    while sig.relation_index(&p).is_some() {
        k += 1;
        p = format!("P{k}");
    }
    let (x, y) = (Var::x(), Var::y());
    let psi = Formula::exists(
        &x,
        Formula::and(
            Formula::atom(&p, &[&x]),
            Formula::forall(
                &y,
                Formula::or(Formula::atom("<", &[&y, &x]), Formula::eq(&y, &x)),
            ),
        ),
    );
    let chi = Formula::implies(Formula::not(phi.clone()), psi);
    Ok(check_invariance(&chi, max_size)?.is_invariant())
}

/// Exhaustive counterpart of [`check_invariance`]: every structure over the
/// symbols of `phi` with at most `max_size` elements, up to isomorphism,
/// under every order.
pub fn check_invariance_brute_force(phi: &Formula, max_size: usize) -> Result<InvarianceVerdict, SolverError> {
    let sig = infer_signature(phi)?;
    let catalog = enumerate_structures(sig, max_size, None).map_err(|e| SolverError::Internal(e.to_string()))?;
    for s in catalog.iter() {
        if let OrderVerdict::Varies {
            satisfying,
            falsifying,
        } = holds_under_orders(&s, phi, "<", OrderMode::default())?
        {
            return Ok(InvarianceVerdict::NotInvariant {
                structure: s,
                order0: satisfying,
                order1: falsifying,
            });
        }
    }
    Ok(InvarianceVerdict::InvariantUpTo {
        max_size,
        completeness_bound: scott_normal_form(phi)?.completeness_bound(),
    })
}
