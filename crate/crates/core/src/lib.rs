//! Runtime monitoring of single-quantifier-layer hyperproperties.
//!
//! Formulas put one trace quantifier (`A`/`E`) over each safety-HML body and
//! combine the results with `/\` and `\/`. Each body is compiled to a
//! deterministic regular monitor; the formula tree becomes a constant-depth
//! circuit whose quantifier gates run one monitor copy per trace and whose
//! gate values combine the per-trace verdicts.
//!
//! ```
//! use std::sync::Arc;
//! use hypermon::{parse_hyper, parse_suite, run_suite, CircuitMonitor, Verdict};
//!
//! let suite = parse_suite("alphabet a b\ntrace | a\ntrace b a | b\ntrace | b").unwrap();
//! let f = parse_hyper("A p. [a]ff /\\ E p. [b] max x.([a]ff & [b]x)", suite.alphabet()).unwrap();
//! let circuit = Arc::new(CircuitMonitor::synthesize(&f, suite.alphabet()).unwrap());
//! assert_eq!(run_suite(circuit, &suite).unwrap().verdict, Verdict::No);
//! ```

pub mod circuit;
pub mod engine;
pub mod harness;
pub mod monitor;
pub mod oracle;
pub mod syntax;

pub use circuit::{CircuitError, CircuitMonitor, Configuration, GateId, GateKind, GateValue};
pub use engine::{process_stream, run_suite, EngineError, RunOutcome, RunState};
pub use monitor::{derivative, normalize, MonitorAutomaton, MonitorError, MonitorTerm, Verdict};
pub use oracle::{eval_hyper, eval_shml, violation_prefix};
pub use syntax::{
    parse_hyper, parse_shml, parse_suite, Action, Alphabet, HyperFormula, LassoTrace, ShmlFormula, TraceSuite,
};
