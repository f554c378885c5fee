//! Formula derivatives and the ACI normal form that keeps their closure
//! finite.

use crate::syntax::{Action, ShmlFormula};

/// Deep normal form: every conjunction is flattened into a sorted,
/// duplicate-free, left-nested chain; `tt` units vanish; an `ff` conjunct
/// absorbs the whole conjunction; `[a]tt` is `tt`; a `max` whose variable no
/// longer occurs is replaced by its body.
pub fn normalize(f: &ShmlFormula) -> ShmlFormula {
    match f {
        ShmlFormula::Tt | ShmlFormula::Ff | ShmlFormula::Var(_) => f.clone(),
        ShmlFormula::Box(a, body) => match normalize(body) {
            ShmlFormula::Tt => ShmlFormula::Tt,
            body => ShmlFormula::boxed(a.clone(), body),
        },
        ShmlFormula::And(..) => {
            let mut units = Vec::new();
            if !collect_conjuncts(f, &mut units) {
                return ShmlFormula::Ff;
            }
            rebuild_conjunction(units)
        }
        ShmlFormula::Max(x, body) => {
            let body = normalize(body);
            if body.has_free(x) {
                ShmlFormula::max(x.clone(), body)
            } else {
                body
            }
        }
    }
}

/// Pushes normalized non-`tt` conjuncts; returns false when one is `ff`.
fn collect_conjuncts(f: &ShmlFormula, out: &mut Vec<ShmlFormula>) -> bool {
    match f {
        ShmlFormula::And(l, r) => collect_conjuncts(l, out) && collect_conjuncts(r, out),
        _ => match normalize(f) {
            ShmlFormula::Tt => true,
            ShmlFormula::Ff => false,
            // normalizing a `max` can surface a conjunction
            g @ ShmlFormula::And(..) => collect_conjuncts(&g, out),
            g => {
                out.push(g);
                true
            }
        },
    }
}

fn rebuild_conjunction(mut units: Vec<ShmlFormula>) -> ShmlFormula {
    units.sort();
    units.dedup();
    let mut iter = units.into_iter();
    match iter.next() {
        None => ShmlFormula::Tt,
        Some(first) => iter.fold(first, ShmlFormula::and),
    }
}

/// Residual obligation after observing `action`, in normal form.
pub fn derivative(f: &ShmlFormula, action: &Action) -> ShmlFormula {
    normalize(&raw_derivative(f, action))
}

fn raw_derivative(f: &ShmlFormula, action: &Action) -> ShmlFormula {
    match f {
        ShmlFormula::Tt => ShmlFormula::Tt,
        ShmlFormula::Ff => ShmlFormula::Ff,
        ShmlFormula::Box(b, body) if b == action => (**body).clone(),
        ShmlFormula::Box(..) => ShmlFormula::Tt,
        ShmlFormula::And(l, r) => ShmlFormula::and(raw_derivative(l, action), raw_derivative(r, action)),
        // guardedness makes this recursion terminate: the unfolded body
        // reaches the binder again only under a box
        ShmlFormula::Max(..) => raw_derivative(&f.unfold(), action),
        ShmlFormula::Var(x) => panic!("derivative of open formula (free `{x}`)"),
    }
}
