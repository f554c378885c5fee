//! Seeded random formulas and lasso suites.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::syntax::{Action, Alphabet, HyperFormula, LassoTrace, ShmlFormula, TraceSuite};

/// Size limits for generated cases.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenBounds {
    pub max_alphabet: usize,
    pub max_traces: usize,
    pub max_prefix: usize,
    pub max_loop: usize,
    /// Nesting depth of sHML bodies.
    pub max_body_depth: usize,
    /// Nesting depth of `/\` and `\/`.
    pub max_connective_depth: usize,
}

impl Default for GenBounds {
    fn default() -> Self {
        GenBounds {
            max_alphabet: 3,
            max_traces: 6,
            max_prefix: 4,
            max_loop: 4,
            max_body_depth: 5,
            max_connective_depth: 2,
        }
    }
}

const NAMES: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

pub fn alphabet(rng: &mut impl Rng, bounds: &GenBounds) -> Alphabet {
    let n = rng.gen_range(1..=bounds.max_alphabet.clamp(1, NAMES.len()));
    Alphabet::new(NAMES[..n].iter().map(|s| Action::new(s).expect("static names are valid"))).expect("distinct names")
}

fn pick_action(rng: &mut impl Rng, alphabet: &Alphabet) -> Action {
    alphabet.get(rng.gen_range(0..alphabet.len())).cloned().expect("index in range")
}

struct BodyGen<'a> {
    alphabet: &'a Alphabet,
    /// Bound variables, innermost last, with "a box occurred since binding".
    scope: Vec<(String, bool)>,
    fresh: usize,
}

impl BodyGen<'_> {
    fn guarded_vars(&self) -> Vec<String> {
        // a rebinding shadows outer uses of the same name
        let mut out: Vec<String> = Vec::new();
        for (i, (x, g)) in self.scope.iter().enumerate() {
            let shadowed = self.scope[i + 1..].iter().any(|(y, _)| y == x);
            if *g && !shadowed {
                out.push(x.clone());
            }
        }
        out
    }

    fn leaf(&mut self, rng: &mut impl Rng) -> ShmlFormula {
        let vars = self.guarded_vars();
        if !vars.is_empty() && rng.gen_bool(0.5) {
            return ShmlFormula::Var(vars.choose(rng).expect("nonempty").clone());
        }
        if rng.gen_bool(0.5) {
            ShmlFormula::Tt
        } else {
            ShmlFormula::Ff
        }
    }

    /// Weights: 40% box, 25% conjunction, 20% binder or variable, 15% leaf.
    fn body(&mut self, rng: &mut impl Rng, depth: usize) -> ShmlFormula {
        if depth == 0 {
            return self.leaf(rng);
        }
        let roll = rng.gen_range(0..100);
        if roll < 40 {
            let a = pick_action(rng, self.alphabet);
            let saved: Vec<bool> = self.scope.iter().map(|(_, g)| *g).collect();
            self.scope.iter_mut().for_each(|(_, g)| *g = true);
            let body = self.body(rng, depth - 1);
            self.scope.iter_mut().zip(saved).for_each(|((_, g), s)| *g = s);
            ShmlFormula::boxed(a, body)
        } else if roll < 65 {
            let l = self.body(rng, depth - 1);
            let r = self.body(rng, depth - 1);
            ShmlFormula::and(l, r)
        } else if roll < 85 {
            let vars = self.guarded_vars();
            if !vars.is_empty() && rng.gen_bool(0.5) {
                ShmlFormula::Var(vars.choose(rng).expect("nonempty").clone())
            } else {
                let x = format!("x{}", self.fresh);
                self.fresh += 1;
                self.scope.push((x.clone(), false));
                let body = self.body(rng, depth - 1);
                self.scope.pop();
                ShmlFormula::max(x, body)
            }
        } else {
            self.leaf(rng)
        }
    }
}

/// A closed, guarded sHML formula over `alphabet`.
pub fn shml(rng: &mut impl Rng, alphabet: &Alphabet, max_depth: usize) -> ShmlFormula {
    loop {
        let depth = rng.gen_range(0..=max_depth);
        let f = BodyGen { alphabet, scope: Vec::new(), fresh: 0 }.body(rng, depth);
        if f.check_well_formed().is_ok() {
            return f;
        }
    }
}

pub fn hyper(rng: &mut impl Rng, alphabet: &Alphabet, bounds: &GenBounds) -> HyperFormula {
    hyper_at(rng, alphabet, bounds, bounds.max_connective_depth)
}

fn hyper_at(rng: &mut impl Rng, alphabet: &Alphabet, bounds: &GenBounds, depth: usize) -> HyperFormula {
    if depth == 0 || rng.gen_bool(0.4) {
        let body = shml(rng, alphabet, bounds.max_body_depth);
        if rng.gen_bool(0.5) {
            HyperFormula::Exists("p".into(), body)
        } else {
            HyperFormula::Forall("p".into(), body)
        }
    } else {
        let l = hyper_at(rng, alphabet, bounds, depth - 1);
        let r = hyper_at(rng, alphabet, bounds, depth - 1);
        if rng.gen_bool(0.5) {
            HyperFormula::join(l, r)
        } else {
            HyperFormula::meet(l, r)
        }
    }
}

/// Like [`hyper`] but with at least one binary connective at the top.
pub fn hyper_with_connective(rng: &mut impl Rng, alphabet: &Alphabet, bounds: &GenBounds) -> HyperFormula {
    let depth = bounds.max_connective_depth.max(1);
    let l = hyper_at(rng, alphabet, bounds, depth - 1);
    let r = hyper_at(rng, alphabet, bounds, depth - 1);
    if rng.gen_bool(0.5) {
        HyperFormula::join(l, r)
    } else {
        HyperFormula::meet(l, r)
    }
}

pub fn lasso(rng: &mut impl Rng, alphabet: &Alphabet, bounds: &GenBounds) -> LassoTrace {
    let u = rng.gen_range(0..=bounds.max_prefix);
    let v = rng.gen_range(1..=bounds.max_loop.max(1));
    let prefix = (0..u).map(|_| pick_action(rng, alphabet)).collect();
    let cycle = (0..v).map(|_| pick_action(rng, alphabet)).collect();
    LassoTrace::new(prefix, cycle).expect("loop nonempty")
}

pub fn suite(rng: &mut impl Rng, alphabet: &Alphabet, bounds: &GenBounds) -> TraceSuite {
    let k = rng.gen_range(1..=bounds.max_traces.max(1));
    let traces = (0..k).map(|_| lasso(rng, alphabet, bounds)).collect();
    TraceSuite::new(alphabet.clone(), traces).expect("generated over the alphabet")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_formulas_are_well_formed_and_reparse() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let bounds = GenBounds::default();
        for _ in 0..300 {
            let ab = alphabet(&mut rng, &bounds);
            let f = hyper(&mut rng, &ab, &bounds);
            assert!(f.check_well_formed(&ab).is_ok(), "{f}");
            assert_eq!(crate::syntax::parse_hyper(&f.to_string(), &ab).unwrap(), f);
        }
    }

    #[test]
    fn same_seed_same_output() {
        let bounds = GenBounds::default();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ab = alphabet(&mut rng, &bounds);
            (hyper(&mut rng, &ab, &bounds).to_string(), suite(&mut rng, &ab, &bounds).to_string())
        };
        assert_eq!(draw(3), draw(3));
        assert_ne!(draw(3), draw(4));
    }

    #[test]
    fn suites_respect_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let bounds = GenBounds::default();
        for _ in 0..200 {
            let ab = alphabet(&mut rng, &bounds);
            let s = suite(&mut rng, &ab, &bounds);
            assert!((1..=6).contains(&s.len()));
            assert!(s.traces().iter().all(|t| t.prefix().len() <= 4 && (1..=4).contains(&t.cycle().len())));
        }
    }
}
