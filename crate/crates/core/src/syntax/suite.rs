//! Trace-suite files:
//!
//! ```text
//! alphabet a b
//! trace | a
//! trace b a | b
//! ```
//!
//! Blank lines and `#` comments are ignored.

use super::{Action, Alphabet, LassoTrace, TraceSuite};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SuiteError {
    #[error("line {line}: expected `alphabet <actions...>` header")]
    MissingAlphabet { line: usize },
    #[error("line {line}: malformed or duplicate alphabet entry")]
    BadAlphabet { line: usize },
    #[error("line {line}: expected `trace <prefix> | <loop>`")]
    BadTrace { line: usize },
    #[error("line {line}: empty loop part")]
    EmptyLoop { line: usize },
    #[error("line {line}: action `{action}` not in alphabet")]
    UnknownAction { line: usize, action: String },
    #[error("suite has no traces")]
    NoTraces,
}

pub fn parse_suite(text: &str) -> Result<TraceSuite, SuiteError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (line, header) = lines.next().ok_or(SuiteError::MissingAlphabet { line: 1 })?;
    let rest = header
        .strip_prefix("alphabet")
        .filter(|r| r.is_empty() || r.starts_with(char::is_whitespace))
        .ok_or(SuiteError::MissingAlphabet { line })?;
    let alphabet = Alphabet::parse(rest).ok_or(SuiteError::BadAlphabet { line })?;

    let mut traces = Vec::new();
    for (line, text) in lines {
        let body = text
            .strip_prefix("trace")
            .filter(|r| r.is_empty() || r.starts_with(char::is_whitespace))
            .ok_or(SuiteError::BadTrace { line })?;
        let (u, v) = body.split_once('|').ok_or(SuiteError::BadTrace { line })?;
        let resolve = |part: &str| -> Result<Vec<Action>, SuiteError> {
            part.split_whitespace()
                .map(|s| match alphabet.lookup(s) {
                    Some(i) => Ok(alphabet.get(i).cloned().expect("index from lookup")),
                    None => Err(SuiteError::UnknownAction { line, action: s.to_string() }),
                })
                .collect()
        };
        let prefix = resolve(u)?;
        let cycle = resolve(v)?;
        traces.push(LassoTrace::new(prefix, cycle).ok_or(SuiteError::EmptyLoop { line })?);
    }
    TraceSuite::new(alphabet, traces)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_three_trace_suite_in_file_order() {
        let s = parse_suite("alphabet a b\ntrace | a\ntrace b a | b\ntrace | b").unwrap();
        assert_eq!(s.len(), 3);
        let shown: Vec<String> = s.traces().iter().map(|t| t.to_string()).collect();
        assert_eq!(shown, ["| a", "b a | b", "| b"]);
    }

    #[test]
    fn single_trace_suite() {
        let s = parse_suite("alphabet a\ntrace | a").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.alphabet().len(), 1);
    }

    #[test]
    fn rejects_empty_loop() {
        assert_eq!(parse_suite("alphabet a b\ntrace a |"), Err(SuiteError::EmptyLoop { line: 2 }));
    }

    #[test]
    fn rejects_unknown_action_and_empty_suite() {
        assert_eq!(
            parse_suite("alphabet a\ntrace | c"),
            Err(SuiteError::UnknownAction { line: 2, action: "c".into() })
        );
        assert_eq!(parse_suite("alphabet a\n"), Err(SuiteError::NoTraces));
        assert_eq!(parse_suite(""), Err(SuiteError::MissingAlphabet { line: 1 }));
        assert_eq!(parse_suite("alphabet a a\ntrace | a"), Err(SuiteError::BadAlphabet { line: 1 }));
        assert_eq!(parse_suite("alphabet a\ntrace a"), Err(SuiteError::BadTrace { line: 2 }));
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let s = parse_suite("# header\nalphabet a b\n\ntrace a | b # tail\n").unwrap();
        assert_eq!(s.traces()[0].to_string(), "a | b");
    }

    #[test]
    fn display_round_trips() {
        let s = parse_suite("alphabet a b\ntrace | a\ntrace b a | b\n").unwrap();
        assert_eq!(parse_suite(&s.to_string()).unwrap(), s);
    }
}
