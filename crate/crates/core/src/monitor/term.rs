//! Regular monitors as terms of `yes | no | end | a.m | m + n | rec x.m | x`.

use std::collections::HashMap;
use std::fmt::{self, Display, Formatter};

use super::{MonitorAutomaton, StateId, Verdict};
use crate::syntax::Action;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MonitorTerm {
    Yes,
    No,
    End,
    Prefix(Action, Box<MonitorTerm>),
    Sum(Box<MonitorTerm>, Box<MonitorTerm>),
    Rec(String, Box<MonitorTerm>),
    Var(String),
}

impl MonitorTerm {
    pub fn verdict(&self) -> Option<Verdict> {
        match self {
            MonitorTerm::Yes => Some(Verdict::Yes),
            MonitorTerm::No => Some(Verdict::No),
            MonitorTerm::End => Some(Verdict::End),
            _ => None,
        }
    }

    fn substitute(&self, var: &str, replacement: &MonitorTerm) -> MonitorTerm {
        match self {
            MonitorTerm::Var(x) if x == var => replacement.clone(),
            MonitorTerm::Prefix(a, m) => MonitorTerm::Prefix(a.clone(), Box::new(m.substitute(var, replacement))),
            MonitorTerm::Sum(m, n) => {
                MonitorTerm::Sum(Box::new(m.substitute(var, replacement)), Box::new(n.substitute(var, replacement)))
            }
            MonitorTerm::Rec(x, m) if x != var => MonitorTerm::Rec(x.clone(), Box::new(m.substitute(var, replacement))),
            _ => self.clone(),
        }
    }

    /// The labelled transition `self -a-> m'` of the regular-monitor
    /// semantics: verdicts are sinks, prefixes consume their action, sums
    /// choose a matching branch and `rec` unfolds.
    pub fn step(&self, action: &Action) -> Option<MonitorTerm> {
        match self {
            MonitorTerm::Yes | MonitorTerm::No | MonitorTerm::End => Some(self.clone()),
            MonitorTerm::Prefix(b, m) => (b == action).then(|| (**m).clone()),
            MonitorTerm::Sum(m, n) => m.step(action).or_else(|| n.step(action)),
            MonitorTerm::Rec(x, m) => m.substitute(x, self).step(action),
            MonitorTerm::Var(_) => None,
        }
    }
}

pub(super) fn from_automaton(m: &MonitorAutomaton) -> MonitorTerm {
    let mut builder = Builder { m, on_path: Vec::new(), binders: HashMap::new(), fresh: 0 };
    builder.build(m.initial())
}

struct Builder<'a> {
    m: &'a MonitorAutomaton,
    on_path: Vec<StateId>,
    /// Loop heads discovered under the current path, with their variable.
    binders: HashMap<StateId, String>,
    fresh: usize,
}

impl Builder<'_> {
    fn build(&mut self, s: StateId) -> MonitorTerm {
        match self.m.verdict(s) {
            Some(Verdict::Yes) => return MonitorTerm::Yes,
            Some(Verdict::No) => return MonitorTerm::No,
            Some(Verdict::End) => return MonitorTerm::End,
            None => {}
        }
        if self.on_path.contains(&s) {
            let fresh = &mut self.fresh;
            let name = self.binders.entry(s).or_insert_with(|| {
                let name = if *fresh == 0 { "x".to_string() } else { format!("x{fresh}") };
                *fresh += 1;
                name
            });
            return MonitorTerm::Var(name.clone());
        }
        self.on_path.push(s);
        let branches: Vec<MonitorTerm> = self
            .m
            .alphabet()
            .iter()
            .enumerate()
            .map(|(i, a)| MonitorTerm::Prefix(a.clone(), Box::new(self.build(self.m.step_index(s, i)))))
            .collect();
        self.on_path.pop();
        let body = branches
            .into_iter()
            .rev()
            .reduce(|rest, b| MonitorTerm::Sum(Box::new(b), Box::new(rest)))
            .expect("alphabets are nonempty");
        match self.binders.remove(&s) {
            Some(x) => MonitorTerm::Rec(x, Box::new(body)),
            None => body,
        }
    }
}

impl Display for MonitorTerm {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            MonitorTerm::Yes => f.write_str("yes"),
            MonitorTerm::No => f.write_str("no"),
            MonitorTerm::End => f.write_str("end"),
            MonitorTerm::Var(x) => f.write_str(x),
            MonitorTerm::Prefix(a, m) => match **m {
                MonitorTerm::Sum(..) | MonitorTerm::Rec(..) => write!(f, "{a}.({m})"),
                _ => write!(f, "{a}.{m}"),
            },
            MonitorTerm::Sum(m, n) => {
                let side = |t: &MonitorTerm, f: &mut Formatter<'_>| match t {
                    MonitorTerm::Rec(..) => write!(f, "({t})"),
                    _ => write!(f, "{t}"),
                };
                side(m, f)?;
                f.write_str(" + ")?;
                side(n, f)
            }
            MonitorTerm::Rec(x, m) => match **m {
                MonitorTerm::Sum(..) => write!(f, "rec {x}.({m})"),
                _ => write!(f, "rec {x}.{m}"),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_shml, Alphabet};

    fn term_of(s: &str) -> MonitorTerm {
        let ab = Alphabet::parse("a b").unwrap();
        MonitorAutomaton::compile(&parse_shml(s, &ab).unwrap(), &ab).unwrap().to_term()
    }

    #[test]
    fn verdict_terms() {
        assert_eq!(term_of("ff").to_string(), "no");
        assert_eq!(term_of("tt").to_string(), "yes");
    }

    #[test]
    fn sums_follow_alphabet_order() {
        assert_eq!(term_of("[a]ff").to_string(), "a.no + b.yes");
    }

    #[test]
    fn loops_get_one_binder() {
        assert_eq!(term_of("[b] max x.([a]ff & [b]x)").to_string(), "a.yes + b.(rec x.(a.no + b.x))");
    }

    #[test]
    fn term_semantics_follows_the_loop() {
        let t = term_of("[b] max x.([a]ff & [b]x)");
        let a = Action::new("a").unwrap();
        let b = Action::new("b").unwrap();
        let l = t.step(&b).unwrap();
        assert_eq!(l.step(&b).unwrap().step(&b).unwrap().verdict(), None);
        assert_eq!(l.step(&b).unwrap().step(&a).unwrap().verdict(), Some(Verdict::No));
        assert_eq!(MonitorTerm::No.step(&a), Some(MonitorTerm::No));
    }
}
