//! Formula and trace-suite syntax.
//!
//! Two layers: [`ShmlFormula`] is the trace-local safety logic (boxes,
//! conjunction, greatest fixpoints), and [`HyperFormula`] puts exactly one
//! trace quantifier over each body and combines the results with top-level
//! `/\` and `\/`.

mod parser;
mod print;
mod suite;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use indexmap::IndexSet;

pub use parser::{parse_hyper, parse_shml, ParseError, ParseErrorKind};
pub use suite::{parse_suite, SuiteError};

/// A single observable event name.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action(Arc<str>);

impl Action {
    /// Builds an action, checking the `[a-z][a-z0-9_]*` token shape.
    pub fn new(symbol: &str) -> Option<Action> {
        if is_action_token(symbol) {
            Some(Action(Arc::from(symbol)))
        } else {
            None
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_action_token(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

/// Ordered, duplicate-free set of actions. The order fixes action indices
/// used by compiled monitors and the sum order of printed monitor terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    actions: IndexSet<Action>,
}

impl Alphabet {
    /// Returns `None` on an empty list or a duplicate action.
    pub fn new(actions: impl IntoIterator<Item = Action>) -> Option<Alphabet> {
        let mut set = IndexSet::new();
        for a in actions {
            if !set.insert(a) {
                return None;
            }
        }
        if set.is_empty() {
            None
        } else {
            Some(Alphabet { actions: set })
        }
    }

    /// Parses a whitespace separated action list such as `"a b c"`.
    pub fn parse(text: &str) -> Option<Alphabet> {
        let actions: Option<Vec<Action>> = text.split_whitespace().map(Action::new).collect();
        Alphabet::new(actions?)
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn index_of(&self, action: &Action) -> Option<usize> {
        self.actions.get_index_of(action)
    }

    pub fn lookup(&self, symbol: &str) -> Option<usize> {
        self.actions.iter().position(|a| a.as_str() == symbol)
    }

    pub fn get(&self, index: usize) -> Option<&Action> {
        self.actions.get_index(index)
    }

    pub fn contains(&self, action: &Action) -> bool {
        self.actions.contains(action)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Action> {
        self.actions.iter()
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.actions.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// Safety fragment of linear-time HML with greatest fixpoints.
///
/// The derived `Ord` is the canonical conjunct order used by normalization.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ShmlFormula {
    Tt,
    Ff,
    Box(Action, Box<ShmlFormula>),
    And(Box<ShmlFormula>, Box<ShmlFormula>),
    Max(String, Box<ShmlFormula>),
    Var(String),
}

impl ShmlFormula {
    pub fn boxed(action: Action, body: ShmlFormula) -> ShmlFormula {
        ShmlFormula::Box(action, Box::new(body))
    }

    pub fn and(left: ShmlFormula, right: ShmlFormula) -> ShmlFormula {
        ShmlFormula::And(Box::new(left), Box::new(right))
    }

    pub fn max(var: impl Into<String>, body: ShmlFormula) -> ShmlFormula {
        ShmlFormula::Max(var.into(), Box::new(body))
    }

    pub fn var(name: impl Into<String>) -> ShmlFormula {
        ShmlFormula::Var(name.into())
    }

    /// Capture-free substitution of a closed formula for the free
    /// occurrences of `var`.
    pub fn substitute(&self, var: &str, replacement: &ShmlFormula) -> ShmlFormula {
        match self {
            ShmlFormula::Tt | ShmlFormula::Ff => self.clone(),
            ShmlFormula::Var(x) if x == var => replacement.clone(),
            ShmlFormula::Var(_) => self.clone(),
            ShmlFormula::Box(a, body) => ShmlFormula::boxed(a.clone(), body.substitute(var, replacement)),
            ShmlFormula::And(l, r) => ShmlFormula::and(l.substitute(var, replacement), r.substitute(var, replacement)),
            ShmlFormula::Max(x, _) if x == var => self.clone(),
            ShmlFormula::Max(x, body) => ShmlFormula::max(x.clone(), body.substitute(var, replacement)),
        }
    }

    /// One-step unfolding of a top-level `max`; other formulas are returned
    /// unchanged.
    pub fn unfold(&self) -> ShmlFormula {
        match self {
            ShmlFormula::Max(x, body) => body.substitute(x, self),
            _ => self.clone(),
        }
    }

    pub fn has_free(&self, var: &str) -> bool {
        match self {
            ShmlFormula::Tt | ShmlFormula::Ff => false,
            ShmlFormula::Var(x) => x == var,
            ShmlFormula::Box(_, body) => body.has_free(var),
            ShmlFormula::And(l, r) => l.has_free(var) || r.has_free(var),
            ShmlFormula::Max(x, body) => x != var && body.has_free(var),
        }
    }

    /// Actions mentioned in box modalities.
    pub fn actions(&self) -> BTreeSet<Action> {
        let mut out = BTreeSet::new();
        self.collect_actions(&mut out);
        out
    }

    fn collect_actions(&self, out: &mut BTreeSet<Action>) {
        match self {
            ShmlFormula::Box(a, body) => {
                out.insert(a.clone());
                body.collect_actions(out);
            }
            ShmlFormula::And(l, r) => {
                l.collect_actions(out);
                r.collect_actions(out);
            }
            ShmlFormula::Max(_, body) => body.collect_actions(out),
            _ => {}
        }
    }

    pub fn size(&self) -> usize {
        match self {
            ShmlFormula::Tt | ShmlFormula::Ff | ShmlFormula::Var(_) => 1,
            ShmlFormula::Box(_, body) | ShmlFormula::Max(_, body) => 1 + body.size(),
            ShmlFormula::And(l, r) => 1 + l.size() + r.size(),
        }
    }

    /// Checks closedness and guardedness.
    pub fn check_well_formed(&self) -> Result<(), FormulaError> {
        fn go<'a>(f: &'a ShmlFormula, scope: &mut Vec<(&'a str, bool)>) -> Result<(), FormulaError> {
            match f {
                ShmlFormula::Tt | ShmlFormula::Ff => Ok(()),
                ShmlFormula::Var(x) => match scope.iter().rev().find(|(v, _)| v == x) {
                    None => Err(FormulaError::Unbound(x.clone())),
                    Some((_, false)) => Err(FormulaError::Unguarded(x.clone())),
                    Some(_) => Ok(()),
                },
                ShmlFormula::Box(_, body) => {
                    let saved: Vec<bool> = scope.iter().map(|(_, g)| *g).collect();
                    scope.iter_mut().for_each(|(_, g)| *g = true);
                    let res = go(body, scope);
                    scope.iter_mut().zip(saved).for_each(|((_, g), s)| *g = s);
                    res
                }
                ShmlFormula::And(l, r) => {
                    go(l, scope)?;
                    go(r, scope)
                }
                ShmlFormula::Max(x, body) => {
                    scope.push((x, false));
                    let res = go(body, scope);
                    scope.pop();
                    res
                }
            }
        }
        go(self, &mut Vec::new())
    }
}

/// Closedness/guardedness violations found on an AST built in code.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FormulaError {
    #[error("unbound recursion variable `{0}`")]
    Unbound(String),
    #[error("unguarded recursion variable `{0}`")]
    Unguarded(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
}

/// Top layer: one quantifier per sHML body, combined by meet and join.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum HyperFormula {
    Exists(String, ShmlFormula),
    Forall(String, ShmlFormula),
    Join(Box<HyperFormula>, Box<HyperFormula>),
    Meet(Box<HyperFormula>, Box<HyperFormula>),
}

impl HyperFormula {
    pub fn join(left: HyperFormula, right: HyperFormula) -> HyperFormula {
        HyperFormula::Join(Box::new(left), Box::new(right))
    }

    pub fn meet(left: HyperFormula, right: HyperFormula) -> HyperFormula {
        HyperFormula::Meet(Box::new(left), Box::new(right))
    }

    /// Nesting depth of `/\` and `\/`; a lone quantifier has depth 0.
    pub fn connective_depth(&self) -> usize {
        match self {
            HyperFormula::Exists(..) | HyperFormula::Forall(..) => 0,
            HyperFormula::Join(l, r) | HyperFormula::Meet(l, r) => 1 + l.connective_depth().max(r.connective_depth()),
        }
    }

    pub fn check_well_formed(&self, alphabet: &Alphabet) -> Result<(), FormulaError> {
        match self {
            HyperFormula::Exists(_, body) | HyperFormula::Forall(_, body) => {
                body.check_well_formed()?;
                match body.actions().into_iter().find(|a| !alphabet.contains(a)) {
                    Some(a) => Err(FormulaError::UnknownAction(a.to_string())),
                    None => Ok(()),
                }
            }
            HyperFormula::Join(l, r) | HyperFormula::Meet(l, r) => {
                l.check_well_formed(alphabet)?;
                r.check_well_formed(alphabet)
            }
        }
    }
}

/// Finite encoding `prefix · loop^ω` of an ultimately periodic trace.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LassoTrace {
    prefix: Vec<Action>,
    cycle: Vec<Action>,
}

impl LassoTrace {
    /// Returns `None` when the loop part is empty.
    pub fn new(prefix: Vec<Action>, cycle: Vec<Action>) -> Option<LassoTrace> {
        if cycle.is_empty() {
            None
        } else {
            Some(LassoTrace { prefix, cycle })
        }
    }

    pub fn prefix(&self) -> &[Action] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[Action] {
        &self.cycle
    }

    /// Number of distinct positions: `|u| + |v|`.
    pub fn positions(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    /// Position reached from `pos` after one step.
    pub fn next_position(&self, pos: usize) -> usize {
        if pos + 1 == self.positions() {
            self.prefix.len()
        } else {
            pos + 1
        }
    }

    /// The `i`-th action of the infinite trace.
    pub fn at(&self, i: usize) -> &Action {
        if i < self.prefix.len() {
            &self.prefix[i]
        } else {
            &self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }

    pub fn head(&self) -> &Action {
        self.at(0)
    }

    /// The trace `action · self`.
    pub fn prepend(&self, action: Action) -> LassoTrace {
        let mut prefix = Vec::with_capacity(self.prefix.len() + 1);
        prefix.push(action);
        prefix.extend(self.prefix.iter().cloned());
        LassoTrace { prefix, cycle: self.cycle.clone() }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Action> + '_ {
        (0..).map(move |i| self.at(i))
    }
}

impl fmt::Display for LassoTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.prefix {
            write!(f, "{a} ")?;
        }
        f.write_str("|")?;
        for a in &self.cycle {
            write!(f, " {a}")?;
        }
        Ok(())
    }
}

/// Alphabet plus an ordered, nonempty list of lassos; list position is the
/// trace index for the whole run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceSuite {
    alphabet: Alphabet,
    traces: Vec<LassoTrace>,
}

impl TraceSuite {
    pub fn new(alphabet: Alphabet, traces: Vec<LassoTrace>) -> Result<TraceSuite, SuiteError> {
        if traces.is_empty() {
            return Err(SuiteError::NoTraces);
        }
        for t in &traces {
            if let Some(a) = t.prefix.iter().chain(&t.cycle).find(|a| !alphabet.contains(a)) {
                return Err(SuiteError::UnknownAction { line: 0, action: a.to_string() });
            }
        }
        Ok(TraceSuite { alphabet, traces })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn traces(&self) -> &[LassoTrace] {
        &self.traces
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }
}

impl fmt::Display for TraceSuite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "alphabet {}", self.alphabet)?;
        for t in &self.traces {
            writeln!(f, "trace {t}")?;
        }
        Ok(())
    }
}
