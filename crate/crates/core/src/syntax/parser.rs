//! Recursive-descent parser for the ASCII formula syntax:
//!
//! ```text
//! hyper := meet ; meet := join ( "/\" join )* ; join := atom ( "\/" atom )* ;
//! atom  := ("A" | "E") ident "." shml | "(" hyper ")" ;
//! shml  := conj ; conj := unit ( "&" unit )* ;
//! unit  := "tt" | "ff" | "[" ident "]" unit | "max" ident "." unit | ident | "(" shml ")" .
//! ```
//!
//! Scope checks (closedness, guardedness, known actions) run during the
//! parse so every diagnostic carries the position of the offending token.

use std::fmt;

use super::{Action, Alphabet, HyperFormula, ShmlFormula};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    BadChar(char),
    #[error("expected {expected}, found {found}")]
    Expected { expected: &'static str, found: String },
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("unbound recursion variable `{0}`")]
    UnboundVariable(String),
    #[error("unguarded recursion variable `{0}`")]
    UnguardedVariable(String),
    #[error("quantifier nested under quantifier")]
    NestedQuantifier,
    #[error("`{0}` is reserved and cannot name a recursion variable")]
    ReservedName(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LBrack,
    RBrack,
    LParen,
    RParen,
    Dot,
    Amp,
    Meet,
    Join,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::LBrack => f.write_str("`[`"),
            Tok::RBrack => f.write_str("`]`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Meet => f.write_str("`/\\`"),
            Tok::Join => f.write_str("`\\/`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        let bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>, line: &mut usize, column: &mut usize| {
            let c = chars.next();
            if c == Some('\n') {
                *line += 1;
                *column = 1;
            } else {
                *column += 1;
            }
        };
        let simple = match c {
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '.' => Some(Tok::Dot),
            '&' => Some(Tok::Amp),
            _ => None,
        };
        if let Some(tok) = simple {
            bump(&mut chars, &mut line, &mut column);
            out.push(Spanned { tok, line: l, column: col });
        } else if c.is_whitespace() {
            bump(&mut chars, &mut line, &mut column);
        } else if c == '/' || c == '\\' {
            bump(&mut chars, &mut line, &mut column);
            let want = if c == '/' { '\\' } else { '/' };
            if chars.peek() != Some(&want) {
                return Err(ParseError { line: l, column: col, kind: ParseErrorKind::BadChar(c) });
            }
            bump(&mut chars, &mut line, &mut column);
            let tok = if c == '/' { Tok::Meet } else { Tok::Join };
            out.push(Spanned { tok, line: l, column: col });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut ident = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    ident.push(c);
                    bump(&mut chars, &mut line, &mut column);
                } else {
                    break;
                }
            }
            out.push(Spanned { tok: Tok::Ident(ident), line: l, column: col });
        } else {
            return Err(ParseError { line: l, column: col, kind: ParseErrorKind::BadChar(c) });
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, column });
    Ok(out)
}

const RESERVED: [&str; 5] = ["tt", "ff", "max", "A", "E"];

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    alphabet: &'a Alphabet,
    /// Recursion variables in scope, innermost last, with their guard flag.
    scope: Vec<(String, bool)>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn advance(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, kind: ParseErrorKind) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError { line: t.line, column: t.column, kind }
    }

    fn error_at(t: &Spanned, kind: ParseErrorKind) -> ParseError {
        ParseError { line: t.line, column: t.column, kind }
    }

    fn expect(&mut self, tok: Tok, expected: &'static str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.advance();
            Ok(())
        } else {
            Err(self.error_here(ParseErrorKind::Expected { expected, found: self.peek().to_string() }))
        }
    }

    fn ident(&mut self, expected: &'static str) -> Result<Spanned, ParseError> {
        match self.peek() {
            Tok::Ident(_) => Ok(self.advance()),
            other => Err(self.error_here(ParseErrorKind::Expected { expected, found: other.to_string() })),
        }
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        self.expect(Tok::Eof, "end of input")
    }

    fn hyper(&mut self) -> Result<HyperFormula, ParseError> {
        let mut left = self.join()?;
        while *self.peek() == Tok::Meet {
            self.advance();
            let right = self.join()?;
            left = HyperFormula::meet(left, right);
        }
        Ok(left)
    }

    fn join(&mut self) -> Result<HyperFormula, ParseError> {
        let mut left = self.atom()?;
        while *self.peek() == Tok::Join {
            self.advance();
            let right = self.atom()?;
            left = HyperFormula::join(left, right);
        }
        Ok(left)
    }

    fn atom(&mut self) -> Result<HyperFormula, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.advance();
                let inner = self.hyper()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(q) if q == "A" || q == "E" => {
                self.advance();
                let var = self.ident("trace variable")?;
                let Tok::Ident(var) = var.tok else { unreachable!() };
                self.expect(Tok::Dot, "`.`")?;
                let body = self.shml()?;
                Ok(if q == "A" { HyperFormula::Forall(var, body) } else { HyperFormula::Exists(var, body) })
            }
            other => Err(self.error_here(ParseErrorKind::Expected {
                expected: "quantifier `A`/`E` or `(`",
                found: other.to_string(),
            })),
        }
    }

    fn shml(&mut self) -> Result<ShmlFormula, ParseError> {
        let mut left = self.unit()?;
        while *self.peek() == Tok::Amp {
            self.advance();
            let right = self.unit()?;
            left = ShmlFormula::and(left, right);
        }
        Ok(left)
    }

    fn unit(&mut self) -> Result<ShmlFormula, ParseError> {
        let start = self.toks[self.pos].clone();
        match start.tok.clone() {
            Tok::LParen => {
                self.advance();
                let inner = self.shml()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::LBrack => {
                self.advance();
                let name = self.ident("action")?;
                let Tok::Ident(symbol) = &name.tok else { unreachable!() };
                let action = match self.alphabet.lookup(symbol) {
                    Some(i) => self.alphabet.get(i).cloned().expect("index from lookup"),
                    None if Action::new(symbol).is_none() => {
                        return Err(Self::error_at(
                            &name,
                            ParseErrorKind::Expected { expected: "action", found: name.tok.to_string() },
                        ))
                    }
                    None => return Err(Self::error_at(&name, ParseErrorKind::UnknownAction(symbol.clone()))),
                };
                self.expect(Tok::RBrack, "`]`")?;
                let saved: Vec<bool> = self.scope.iter().map(|(_, g)| *g).collect();
                self.scope.iter_mut().for_each(|(_, g)| *g = true);
                let body = self.unit();
                self.scope.iter_mut().zip(saved).for_each(|((_, g), s)| *g = s);
                Ok(ShmlFormula::boxed(action, body?))
            }
            Tok::Ident(name) => {
                self.advance();
                match name.as_str() {
                    "tt" => Ok(ShmlFormula::Tt),
                    "ff" => Ok(ShmlFormula::Ff),
                    "A" | "E" => Err(Self::error_at(&start, ParseErrorKind::NestedQuantifier)),
                    "max" => {
                        let var = self.ident("recursion variable")?;
                        let Tok::Ident(var_name) = &var.tok else { unreachable!() };
                        if RESERVED.contains(&var_name.as_str()) {
                            return Err(Self::error_at(&var, ParseErrorKind::ReservedName(var_name.clone())));
                        }
                        self.expect(Tok::Dot, "`.`")?;
                        self.scope.push((var_name.clone(), false));
                        let body = self.unit();
                        self.scope.pop();
                        Ok(ShmlFormula::max(var_name.clone(), body?))
                    }
                    _ => match self.scope.iter().rev().find(|(v, _)| *v == name) {
                        None => Err(Self::error_at(&start, ParseErrorKind::UnboundVariable(name))),
                        Some((_, false)) => Err(Self::error_at(&start, ParseErrorKind::UnguardedVariable(name))),
                        Some(_) => Ok(ShmlFormula::Var(name)),
                    },
                }
            }
            other => {
                Err(self.error_here(ParseErrorKind::Expected { expected: "sHML formula", found: other.to_string() }))
            }
        }
    }
}

/// Parses a quantified formula; actions must come from `alphabet`.
pub fn parse_hyper(text: &str, alphabet: &Alphabet) -> Result<HyperFormula, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, alphabet, scope: Vec::new() };
    let f = p.hyper()?;
    p.finish()?;
    Ok(f)
}

/// Parses a closed, guarded sHML body.
pub fn parse_shml(text: &str, alphabet: &Alphabet) -> Result<ShmlFormula, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, alphabet, scope: Vec::new() };
    let f = p.shml()?;
    p.finish()?;
    Ok(f)
}
