//! Brute-force semantics used as the ground truth for the monitors.
//!
//! Nothing here touches the derivative compiler or the circuit engine.
//! Satisfaction is computed by tabulating the greatest solution of the local
//! consistency equations over (closure formula, lasso position) pairs; the
//! shortest violating prefix is found by exploring sets of closure formulas
//! and checking each reached set for a satisfying infinite continuation.

use std::collections::{BTreeSet, HashMap};

use crate::syntax::{Action, Alphabet, HyperFormula, LassoTrace, ShmlFormula, TraceSuite};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("formula mentions action `{0}` outside the suite alphabet")]
    AlphabetMismatch(String),
}

#[derive(Clone, Debug)]
enum Node {
    Tt,
    Ff,
    Box(Action, usize),
    And(usize, usize),
    /// A `max` binder, pointing at its one-step unfolding.
    Max(usize),
}

/// Fischer–Ladner style closure: every formula reachable by taking box
/// bodies, conjuncts and fixpoint unfoldings, each interned once.
struct Closure {
    nodes: Vec<Node>,
    root: usize,
}

impl Closure {
    fn build(f: &ShmlFormula) -> Closure {
        let mut ids: HashMap<ShmlFormula, usize> = HashMap::new();
        let mut formulas: Vec<ShmlFormula> = Vec::new();
        let mut nodes: Vec<Option<Node>> = Vec::new();
        let mut intern = |g: ShmlFormula, formulas: &mut Vec<ShmlFormula>, nodes: &mut Vec<Option<Node>>| {
            *ids.entry(g.clone()).or_insert_with(|| {
                formulas.push(g);
                nodes.push(None);
                formulas.len() - 1
            })
        };
        let root = intern(f.clone(), &mut formulas, &mut nodes);
        let mut next = 0;
        while next < formulas.len() {
            let node = match formulas[next].clone() {
                ShmlFormula::Tt => Node::Tt,
                ShmlFormula::Ff => Node::Ff,
                ShmlFormula::Box(a, body) => Node::Box(a, intern(*body, &mut formulas, &mut nodes)),
                ShmlFormula::And(l, r) => {
                    let l = intern(*l, &mut formulas, &mut nodes);
                    let r = intern(*r, &mut formulas, &mut nodes);
                    Node::And(l, r)
                }
                m @ ShmlFormula::Max(..) => Node::Max(intern(m.unfold(), &mut formulas, &mut nodes)),
                // closed formulas never expose a free variable after unfolding
                ShmlFormula::Var(x) => panic!("free recursion variable `{x}` in oracle input"),
            };
            nodes[next] = Some(node);
            next += 1;
        }
        Closure { nodes: nodes.into_iter().map(|n| n.expect("every node filled")).collect(), root }
    }

    /// Adds conjuncts and unfoldings; `None` if `ff` is reached.
    fn expand(&self, seeds: impl IntoIterator<Item = usize>) -> Option<Vec<usize>> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<usize> = seeds.into_iter().collect();
        while let Some(i) = stack.pop() {
            if !seen.insert(i) {
                continue;
            }
            match &self.nodes[i] {
                Node::Ff => return None,
                Node::And(l, r) => {
                    stack.push(*l);
                    stack.push(*r);
                }
                Node::Max(u) => stack.push(*u),
                Node::Tt | Node::Box(..) => {}
            }
        }
        Some(seen.into_iter().collect())
    }

    fn after(&self, set: &[usize], action: &Action) -> Option<Vec<usize>> {
        self.expand(set.iter().filter_map(|&i| match &self.nodes[i] {
            Node::Box(a, body) if a == action => Some(*body),
            _ => None,
        }))
    }
}

/// Linear-time satisfaction of a closed sHML formula by `u·v^ω`.
pub fn eval_shml(f: &ShmlFormula, t: &LassoTrace) -> bool {
    let closure = Closure::build(f);
    let positions = t.positions();
    let mut table = vec![vec![true; positions]; closure.nodes.len()];
    loop {
        let mut changed = false;
        for (id, node) in closure.nodes.iter().enumerate() {
            for pos in 0..positions {
                if !table[id][pos] {
                    continue;
                }
                let value = match node {
                    Node::Tt => true,
                    Node::Ff => false,
                    Node::Box(a, body) => t.at(pos) != a || table[*body][t.next_position(pos)],
                    Node::And(l, r) => table[*l][pos] && table[*r][pos],
                    Node::Max(u) => table[*u][pos],
                };
                if !value {
                    table[id][pos] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return table[closure.root][0];
        }
    }
}

/// `T ⊨ φ`: quantifiers range over the suite's traces.
pub fn eval_hyper(f: &HyperFormula, suite: &TraceSuite) -> Result<bool, OracleError> {
    match f {
        HyperFormula::Exists(_, body) | HyperFormula::Forall(_, body) => {
            if let Some(a) = body.actions().into_iter().find(|a| !suite.alphabet().contains(a)) {
                return Err(OracleError::AlphabetMismatch(a.to_string()));
            }
            let mut sat = suite.traces().iter().map(|t| eval_shml(body, t));
            Ok(if matches!(f, HyperFormula::Exists(..)) { sat.any(|b| b) } else { sat.all(|b| b) })
        }
        HyperFormula::Join(l, r) => Ok(eval_hyper(l, suite)? | eval_hyper(r, suite)?),
        HyperFormula::Meet(l, r) => Ok(eval_hyper(l, suite)? & eval_hyper(r, suite)?),
    }
}

/// Decides, for sets of closure formulas, whether some infinite trace over
/// the alphabet satisfies every member.
struct Satisfiability<'a> {
    closure: &'a Closure,
    alphabet: &'a Alphabet,
    known: HashMap<Vec<usize>, bool>,
}

impl Satisfiability<'_> {
    fn check(&mut self, start: &[usize]) -> bool {
        if let Some(&b) = self.known.get(start) {
            return b;
        }
        // explore everything reachable, then take the least set of nodes all
        // of whose continuations are doomed
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut sets: Vec<Vec<usize>> = vec![start.to_vec()];
        let mut succ: Vec<Vec<Option<usize>>> = Vec::new();
        index.insert(start.to_vec(), 0);
        let mut i = 0;
        while i < sets.len() {
            let mut row = Vec::with_capacity(self.alphabet.len());
            for a in self.alphabet.iter() {
                row.push(self.closure.after(&sets[i], a).map(|next| {
                    *index.entry(next.clone()).or_insert_with(|| {
                        sets.push(next);
                        sets.len() - 1
                    })
                }));
            }
            succ.push(row);
            i += 1;
        }
        let mut doomed = vec![false; sets.len()];
        loop {
            let mut changed = false;
            for (s, row) in succ.iter().enumerate() {
                if !doomed[s] && row.iter().all(|n| n.is_none_or(|n| doomed[n])) {
                    doomed[s] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        for (set, d) in sets.into_iter().zip(doomed) {
            self.known.insert(set, !d);
        }
        self.known[start]
    }
}

/// Length of the shortest prefix of `t` all of whose infinite extensions
/// over `alphabet` violate `f`; `None` iff `t` satisfies `f`.
pub fn violation_prefix(f: &ShmlFormula, t: &LassoTrace, alphabet: &Alphabet) -> Option<usize> {
    if eval_shml(f, t) {
        return None;
    }
    let closure = Closure::build(f);
    let mut sat = Satisfiability { closure: &closure, alphabet, known: HashMap::new() };
    let mut visited: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
    let mut current = closure.expand([closure.root]);
    let mut n = 0;
    loop {
        let Some(set) = current else { return Some(n) };
        if !sat.check(&set) {
            return Some(n);
        }
        // the pair (lasso position, residual set) determines the future
        let pos = if n < t.positions() { n } else { t.prefix().len() + (n - t.prefix().len()) % t.cycle().len() };
        if !visited.insert((pos, set.clone())) {
            return None;
        }
        current = closure.after(&set, t.at(n));
        n += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_hyper, parse_shml, parse_suite};

    fn ab() -> Alphabet {
        Alphabet::parse("a b").unwrap()
    }

    fn shml(s: &str) -> ShmlFormula {
        parse_shml(s, &ab()).unwrap()
    }

    fn lasso(u: &str, v: &str) -> LassoTrace {
        let acts = |s: &str| s.split_whitespace().map(|a| Action::new(a).unwrap()).collect();
        LassoTrace::new(acts(u), acts(v)).unwrap()
    }

    const EXAMPLE: &str = "A p. [a]ff /\\ E p. [b] max x.([a]ff & [b]x)";

    #[test]
    fn box_on_matching_head_fails() {
        assert!(!eval_shml(&shml("[a]ff"), &lasso("", "a")));
    }

    #[test]
    fn b_omega_witnesses_the_loop_body() {
        assert!(eval_shml(&shml("[b] max x.([a]ff & [b]x)"), &lasso("", "b")));
        assert!(!eval_shml(&shml("[b] max x.([a]ff & [b]x)"), &lasso("b a", "b")));
    }

    #[test]
    fn vacuous_box_and_tt() {
        assert!(eval_shml(&shml("[b]ff"), &lasso("", "a")));
        assert!(eval_shml(&shml("tt"), &lasso("a b", "b a")));
        assert!(!eval_shml(&shml("ff"), &lasso("", "a")));
    }

    #[test]
    fn example_suite_is_rejected_and_b_omega_alone_accepted() {
        let f = parse_hyper(EXAMPLE, &ab()).unwrap();
        let suite = parse_suite("alphabet a b\ntrace | a\ntrace b a | b\ntrace | b").unwrap();
        assert_eq!(eval_hyper(&f, &suite), Ok(false));
        let only_b = parse_suite("alphabet a b\ntrace | b").unwrap();
        assert_eq!(eval_hyper(&f, &only_b), Ok(true));
        let never = parse_hyper("E p. ff", &ab()).unwrap();
        assert_eq!(eval_hyper(&never, &only_b), Ok(false));
    }

    #[test]
    fn alphabet_mismatch_is_reported() {
        let abc = Alphabet::parse("a b c").unwrap();
        let f = parse_hyper("A p. [c]ff", &abc).unwrap();
        let suite = parse_suite("alphabet a b\ntrace | b").unwrap();
        assert_eq!(eval_hyper(&f, &suite), Err(OracleError::AlphabetMismatch("c".into())));
    }

    #[test]
    fn prefixes() {
        assert_eq!(violation_prefix(&shml("[a]ff"), &lasso("", "a"), &ab()), Some(1));
        assert_eq!(violation_prefix(&shml("[b][a]ff"), &lasso("b", "a"), &ab()), Some(2));
        assert_eq!(violation_prefix(&shml("[b] max x.([a]ff & [b]x)"), &lasso("", "b"), &ab()), None);
        assert_eq!(violation_prefix(&shml("ff"), &lasso("", "b"), &ab()), Some(0));
        // every continuation starts with a or b, so no extension survives
        assert_eq!(violation_prefix(&shml("[a]ff & [b]ff"), &lasso("", "b"), &ab()), Some(0));
    }

    #[test]
    fn nested_fixpoints() {
        // always: after a, never two b's in a row
        let f = shml("max x.([a] max y.([b][b]ff & [a]x & [b]y) & [b]x)");
        assert!(eval_shml(&f, &lasso("b b", "a b")));
        assert!(!eval_shml(&f, &lasso("b a", "b")));
        assert_eq!(violation_prefix(&f, &lasso("b a", "b"), &ab()), Some(4));
    }

    /// Brute-force cross-check of the prefix search: enumerate every prefix
    /// length and every short continuation lasso.
    #[test]
    fn prefix_agrees_with_exhaustive_extensions() {
        let f = shml("[b][a]ff");
        let t = lasso("b", "a");
        let n = violation_prefix(&f, &t, &ab()).unwrap();
        let words = |len: usize| -> Vec<Vec<Action>> {
            let mut out = vec![vec![]];
            for _ in 0..len {
                out = out
                    .into_iter()
                    .flat_map(|w| {
                        ["a", "b"].into_iter().map(move |a| {
                            let mut w = w.clone();
                            w.push(Action::new(a).unwrap());
                            w
                        })
                    })
                    .collect();
            }
            out
        };
        let all_extensions_fail = |k: usize| {
            let head: Vec<Action> = t.iter().take(k).cloned().collect();
            (0..=2).flat_map(&words).all(|u| {
                (1..=2).flat_map(&words).all(|v| {
                    let mut p = head.clone();
                    p.extend(u.iter().cloned());
                    !eval_shml(&f, &LassoTrace::new(p, v).unwrap())
                })
            })
        };
        assert!(all_extensions_fail(n));
        assert!(!all_extensions_fail(n - 1));
    }
}
