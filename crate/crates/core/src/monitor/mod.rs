//! Deterministic regular monitors compiled from sHML bodies.
//!
//! States are normalized derivatives of the source formula. After the
//! derivative closure is built, verdicts are assigned by reachability:
//! states that cannot avoid `ff` forever become `no`, and states that can no
//! longer reach a `no` state become `yes`. Verdict states are then collapsed
//! into one sink each and unreachable states dropped.

mod derive;
mod term;

use std::collections::{HashMap, VecDeque};
use std::fmt::{self, Write};
use std::sync::Arc;

use crate::syntax::{Action, Alphabet, ShmlFormula};

pub use derive::{derivative, normalize};
pub use term::MonitorTerm;

/// Default bound on derivative states before compilation gives up.
pub const DEFAULT_STATE_LIMIT: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Yes,
    No,
    End,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::End => "end",
        })
    }
}

pub type StateId = usize;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MonitorError {
    #[error("derivative closure exceeds {0} states")]
    StateLimit(usize),
    #[error("action `{0}` is not in the monitor alphabet")]
    UnknownAction(String),
    #[error("recursion variable `{0}` is not closed or not guarded")]
    IllFormed(String),
}

/// Total deterministic automaton over an alphabet with sink verdict states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonitorAutomaton {
    alphabet: Arc<Alphabet>,
    initial: StateId,
    /// `transitions[state][action index]`
    transitions: Vec<Vec<StateId>>,
    verdicts: Vec<Option<Verdict>>,
    /// Residual formula each state stands for.
    residuals: Vec<ShmlFormula>,
}

impl MonitorAutomaton {
    pub fn compile(f: &ShmlFormula, alphabet: &Alphabet) -> Result<MonitorAutomaton, MonitorError> {
        Self::compile_with_limit(f, alphabet, DEFAULT_STATE_LIMIT)
    }

    pub fn compile_with_limit(
        f: &ShmlFormula,
        alphabet: &Alphabet,
        limit: usize,
    ) -> Result<MonitorAutomaton, MonitorError> {
        f.check_well_formed().map_err(|e| MonitorError::IllFormed(e.to_string()))?;

        let mut index: HashMap<ShmlFormula, StateId> = HashMap::new();
        let mut residuals = vec![normalize(f)];
        index.insert(residuals[0].clone(), 0);
        let mut transitions: Vec<Vec<StateId>> = Vec::new();
        let mut next = 0;
        while next < residuals.len() {
            let mut row = Vec::with_capacity(alphabet.len());
            for a in alphabet.iter() {
                let d = derivative(&residuals[next], a);
                let id = match index.get(&d) {
                    Some(&id) => id,
                    None => {
                        if residuals.len() >= limit {
                            return Err(MonitorError::StateLimit(limit));
                        }
                        residuals.push(d.clone());
                        index.insert(d, residuals.len() - 1);
                        residuals.len() - 1
                    }
                };
                row.push(id);
            }
            transitions.push(row);
            next += 1;
        }

        let verdicts = assign_verdicts(&residuals, &transitions);
        Ok(Self::canonical(Arc::new(alphabet.clone()), 0, transitions, verdicts, residuals))
    }

    /// Merges verdict states into shared sinks and renumbers states in BFS
    /// order from the initial state.
    fn canonical(
        alphabet: Arc<Alphabet>,
        initial: StateId,
        transitions: Vec<Vec<StateId>>,
        verdicts: Vec<Option<Verdict>>,
        residuals: Vec<ShmlFormula>,
    ) -> MonitorAutomaton {
        let mut renumber: HashMap<StateId, StateId> = HashMap::new();
        let mut sink_of: HashMap<Verdict, StateId> = HashMap::new();
        let mut order: Vec<StateId> = Vec::new();
        let mut queue: VecDeque<(StateId, StateId)> = VecDeque::new();
        let mut visit = |s: StateId, order: &mut Vec<StateId>, queue: &mut VecDeque<(StateId, StateId)>| -> StateId {
            if let Some(&id) = renumber.get(&s) {
                return id;
            }
            let id = match verdicts[s] {
                Some(v) => *sink_of.entry(v).or_insert_with(|| {
                    order.push(s);
                    order.len() - 1
                }),
                None => {
                    order.push(s);
                    queue.push_back((s, order.len() - 1));
                    order.len() - 1
                }
            };
            renumber.insert(s, id);
            id
        };
        visit(initial, &mut order, &mut queue);
        let mut new_rows: HashMap<StateId, Vec<StateId>> = HashMap::new();
        while let Some((s, id)) = queue.pop_front() {
            let row: Vec<StateId> = transitions[s].iter().map(|&t| visit(t, &mut order, &mut queue)).collect();
            new_rows.insert(id, row);
        }
        let n_actions = alphabet.len();
        let mut out = MonitorAutomaton {
            alphabet,
            initial: 0,
            transitions: Vec::with_capacity(order.len()),
            verdicts: Vec::with_capacity(order.len()),
            residuals: Vec::with_capacity(order.len()),
        };
        for (id, &old) in order.iter().enumerate() {
            let v = verdicts[old];
            out.transitions.push(match v {
                Some(_) => vec![id; n_actions],
                None => new_rows.remove(&id).expect("non-verdict state expanded"),
            });
            out.verdicts.push(v);
            out.residuals.push(match v {
                Some(Verdict::No) => ShmlFormula::Ff,
                Some(Verdict::Yes) => ShmlFormula::Tt,
                _ => residuals[old].clone(),
            });
        }
        out
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn state_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn verdict(&self, state: StateId) -> Option<Verdict> {
        self.verdicts[state]
    }

    pub fn residual(&self, state: StateId) -> &ShmlFormula {
        &self.residuals[state]
    }

    /// Successor by action index; the engine's hot path.
    #[inline]
    pub fn step_index(&self, state: StateId, action: usize) -> StateId {
        self.transitions[state][action]
    }

    pub fn step(&self, state: StateId, action: &Action) -> Result<StateId, MonitorError> {
        let i = self.alphabet.index_of(action).ok_or_else(|| MonitorError::UnknownAction(action.to_string()))?;
        Ok(self.step_index(state, i))
    }

    /// Runs a finite word; returns the first prefix length at which a verdict
    /// state is entered together with that verdict.
    pub fn first_verdict<'a>(&self, word: impl IntoIterator<Item = &'a Action>) -> Option<(usize, Verdict)> {
        let mut s = self.initial;
        if let Some(v) = self.verdict(s) {
            return Some((0, v));
        }
        for (i, a) in word.into_iter().enumerate() {
            s = self.step(s, a).ok()?;
            if let Some(v) = self.verdict(s) {
                return Some((i + 1, v));
            }
        }
        None
    }

    /// Text dump: `state <id> [verdict]` lines, then `<id> -<action>-> <id>`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (id, v) in self.verdicts.iter().enumerate() {
            match v {
                Some(v) => writeln!(out, "state {id} {v}"),
                None => writeln!(out, "state {id}"),
            }
            .expect("write to string");
        }
        for (id, row) in self.transitions.iter().enumerate() {
            for (a, to) in self.alphabet.iter().zip(row) {
                writeln!(out, "{id} -{a}-> {to}").expect("write to string");
            }
        }
        out
    }

    pub fn to_term(&self) -> MonitorTerm {
        term::from_automaton(self)
    }
}

fn assign_verdicts(residuals: &[ShmlFormula], transitions: &[Vec<StateId>]) -> Vec<Option<Verdict>> {
    let n = residuals.len();
    // least set containing ff and closed under "every successor is doomed"
    let mut doomed: Vec<bool> = residuals.iter().map(|r| *r == ShmlFormula::Ff).collect();
    loop {
        let mut changed = false;
        for s in 0..n {
            if !doomed[s] && transitions[s].iter().all(|&t| doomed[t]) {
                doomed[s] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    // backward reachability from the doomed states
    let mut preds: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for (s, row) in transitions.iter().enumerate() {
        for &t in row {
            preds[t].push(s);
        }
    }
    let mut can_fail = doomed.clone();
    let mut stack: Vec<StateId> = (0..n).filter(|&s| doomed[s]).collect();
    while let Some(t) = stack.pop() {
        for &p in &preds[t] {
            if !can_fail[p] {
                can_fail[p] = true;
                stack.push(p);
            }
        }
    }
    (0..n)
        .map(|s| {
            if doomed[s] {
                Some(Verdict::No)
            } else if !can_fail[s] {
                Some(Verdict::Yes)
            } else {
                None
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_shml;

    fn ab() -> Alphabet {
        Alphabet::parse("a b").unwrap()
    }

    fn compile(s: &str) -> MonitorAutomaton {
        MonitorAutomaton::compile(&parse_shml(s, &ab()).unwrap(), &ab()).unwrap()
    }

    fn act(s: &str) -> Action {
        Action::new(s).unwrap()
    }

    #[test]
    fn ff_is_a_single_no_state() {
        let m = compile("ff");
        assert_eq!(m.state_count(), 1);
        assert_eq!(m.verdict(m.initial()), Some(Verdict::No));
    }

    #[test]
    fn box_ff_branches_to_both_verdicts() {
        let m = compile("[a]ff");
        let init = m.initial();
        assert_eq!(m.verdict(init), None);
        let on_a = m.step(init, &act("a")).unwrap();
        let on_b = m.step(init, &act("b")).unwrap();
        assert_eq!(m.verdict(on_a), Some(Verdict::No));
        assert_eq!(m.verdict(on_b), Some(Verdict::Yes));
        // verdict states are sinks
        assert_eq!(m.step(on_a, &act("b")).unwrap(), on_a);
        assert_eq!(m.step(on_b, &act("a")).unwrap(), on_b);
    }

    #[test]
    fn loop_automaton_shape() {
        let m = compile("[b] max x.([a]ff & [b]x)");
        let init = m.initial();
        let l = m.step(init, &act("b")).unwrap();
        assert_eq!(m.verdict(m.step(init, &act("a")).unwrap()), Some(Verdict::Yes));
        assert_eq!(m.verdict(l), None);
        assert_eq!(m.step(l, &act("b")).unwrap(), l);
        assert_eq!(m.verdict(m.step(l, &act("a")).unwrap()), Some(Verdict::No));
        assert_eq!(m.state_count(), 4);
        assert_eq!(m.residual(l).to_string(), "max x.([a]ff & [b]x)");
    }

    #[test]
    fn unsatisfiable_residuals_are_rejected_early() {
        assert_eq!(compile("[a]ff & [b]ff").verdict(0), Some(Verdict::No));
        let m = compile("[a]([a]ff & [b]ff)");
        assert_eq!(m.verdict(m.step(0, &act("a")).unwrap()), Some(Verdict::No));
    }

    #[test]
    fn irrefutable_states_are_promoted_to_yes() {
        assert_eq!(compile("tt").verdict(0), Some(Verdict::Yes));
        // equivalent to tt although never syntactically so
        assert_eq!(compile("max x.[b]x").verdict(0), Some(Verdict::Yes));
    }

    #[test]
    fn unknown_action_and_state_limit() {
        let m = compile("[a]ff");
        assert_eq!(m.step(0, &act("c")), Err(MonitorError::UnknownAction("c".into())));
        let f = parse_shml("[a][a][a]ff", &ab()).unwrap();
        assert_eq!(MonitorAutomaton::compile_with_limit(&f, &ab(), 2), Err(MonitorError::StateLimit(2)));
    }

    #[test]
    fn dump_lists_states_then_edges() {
        let d = compile("[a]ff").dump();
        assert_eq!(d, "state 0\nstate 1 no\nstate 2 yes\n0 -a-> 1\n0 -b-> 2\n1 -a-> 1\n1 -b-> 1\n2 -a-> 2\n2 -b-> 2\n");
    }

    #[test]
    fn first_verdict_reports_prefix_length() {
        let m = compile("[b][a]ff");
        let w = [act("b"), act("a"), act("a")];
        assert_eq!(m.first_verdict(&w), Some((2, Verdict::No)));
        assert_eq!(m.first_verdict(&w[..1]), None);
    }
}
