use std::fmt::{self, Display, Formatter, Write};

use super::{HyperFormula, ShmlFormula};

impl Display for ShmlFormula {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_conj(self, f)
    }
}

fn write_conj(phi: &ShmlFormula, f: &mut Formatter<'_>) -> fmt::Result {
    match phi {
        ShmlFormula::And(l, r) => {
            write_conj(l, f)?;
            f.write_str(" & ")?;
            write_unit(r, f)
        }
        _ => write_unit(phi, f),
    }
}

fn write_unit(phi: &ShmlFormula, f: &mut Formatter<'_>) -> fmt::Result {
    match phi {
        ShmlFormula::Tt => f.write_str("tt"),
        ShmlFormula::Ff => f.write_str("ff"),
        ShmlFormula::Var(x) => f.write_str(x),
        ShmlFormula::Box(a, body) => {
            write!(f, "[{a}]")?;
            if matches!(**body, ShmlFormula::Max(..)) {
                f.write_char(' ')?;
            }
            write_unit(body, f)
        }
        ShmlFormula::Max(x, body) => {
            write!(f, "max {x}.")?;
            write_unit(body, f)
        }
        ShmlFormula::And(..) => {
            f.write_char('(')?;
            write_conj(phi, f)?;
            f.write_char(')')
        }
    }
}

impl Display for HyperFormula {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_meet(self, f)
    }
}

fn write_meet(phi: &HyperFormula, f: &mut Formatter<'_>) -> fmt::Result {
    match phi {
        HyperFormula::Meet(l, r) => {
            write_meet(l, f)?;
            f.write_str(" /\\ ")?;
            write_join(r, f)
        }
        _ => write_join(phi, f),
    }
}

fn write_join(phi: &HyperFormula, f: &mut Formatter<'_>) -> fmt::Result {
    match phi {
        HyperFormula::Join(l, r) => {
            write_join(l, f)?;
            f.write_str(" \\/ ")?;
            write_atom(r, f)
        }
        _ => write_atom(phi, f),
    }
}

fn write_atom(phi: &HyperFormula, f: &mut Formatter<'_>) -> fmt::Result {
    match phi {
        HyperFormula::Forall(p, body) => write!(f, "A {p}. {body}"),
        HyperFormula::Exists(p, body) => write!(f, "E {p}. {body}"),
        _ => {
            f.write_char('(')?;
            write_meet(phi, f)?;
            f.write_char(')')
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::syntax::{parse_hyper, Action, Alphabet};

    use super::*;

    fn act(s: &str) -> Action {
        Action::new(s).unwrap()
    }

    #[test]
    fn prints_forall_box() {
        let f = HyperFormula::Forall("p".into(), ShmlFormula::boxed(act("a"), ShmlFormula::Ff));
        assert_eq!(f.to_string(), "A p. [a]ff");
    }

    #[test]
    fn prints_max_with_parenthesised_conjunction() {
        let f = ShmlFormula::max(
            "x",
            ShmlFormula::and(
                ShmlFormula::boxed(act("a"), ShmlFormula::Ff),
                ShmlFormula::boxed(act("b"), ShmlFormula::var("x")),
            ),
        );
        assert_eq!(f.to_string(), "max x.([a]ff & [b]x)");
    }

    #[test]
    fn example_one_prints_back_to_its_source() {
        let src = "A p. [a]ff /\\ E p. [b] max x.([a]ff & [b]x)";
        let ab = Alphabet::parse("a b").unwrap();
        assert_eq!(parse_hyper(src, &ab).unwrap().to_string(), src);
    }

    #[test]
    fn nested_connectives_get_parentheses() {
        let ab = Alphabet::parse("a b").unwrap();
        for src in [
            "(A p. tt /\\ E p. ff) \\/ A q. [a]ff",
            "A p. tt /\\ (E p. ff /\\ A q. tt)",
            "A p. tt \\/ (E p. ff \\/ A q. tt)",
            "A p. [a]([b]ff & [a]tt) & tt",
        ] {
            assert_eq!(parse_hyper(src, &ab).unwrap().to_string(), src);
        }
    }
}
