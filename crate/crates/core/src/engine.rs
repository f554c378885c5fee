//! Instrumentation of a circuit monitor over `k` traces.
//!
//! Every quantifier gate owns one lane per trace holding the current state
//! of its monitor copy. An event on trace `i` advances all lanes of trace
//! `i` together; lanes that enter a verdict state report it to their gate
//! once, and the configuration is then reduced. Work per event is bounded by
//! the number of quantifier gates plus the number of gates, independent of
//! `k` and of how many events were consumed before.

use std::io::BufRead;
use std::sync::Arc;

use crate::circuit::{CircuitError, CircuitMonitor, Configuration, GateId};
use crate::monitor::{MonitorAutomaton, StateId, Verdict};
use crate::syntax::{Action, TraceSuite};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("trace index {index} out of range for {k} traces")]
    BadTrace { index: usize, k: usize },
    #[error("action `{0}` is not in the alphabet")]
    UnknownAction(String),
    #[error("trace {0} is already closed")]
    TraceClosed(usize),
    #[error("suite alphabet `{suite}` differs from monitor alphabet `{monitor}`")]
    AlphabetMismatch { suite: String, monitor: String },
}

#[derive(Clone, Debug)]
pub struct RunState {
    circuit: Arc<CircuitMonitor>,
    monitors: Vec<(GateId, Arc<MonitorAutomaton>)>,
    config: Configuration,
    k: usize,
    /// `lanes[trace * monitors.len() + j]`
    lanes: Vec<StateId>,
    cursors: Vec<u64>,
    closed: Vec<bool>,
    halt_on_verdict: bool,
}

impl RunState {
    /// Fresh run over `k` traces: initial configuration, every lane at its
    /// monitor's initial state. Lanes whose initial state already carries a
    /// verdict report it immediately.
    pub fn instrument(circuit: Arc<CircuitMonitor>, k: usize) -> Result<RunState, EngineError> {
        let config = Configuration::initial(&circuit, k)?;
        let monitors: Vec<(GateId, Arc<MonitorAutomaton>)> = circuit
            .quantifier_gates()
            .iter()
            .map(|&g| (g, Arc::clone(circuit.gate(g).kind.monitor().expect("quantifier gate"))))
            .collect();
        let lanes = (0..k).flat_map(|_| monitors.iter().map(|(_, m)| m.initial())).collect();
        let mut run = RunState {
            circuit,
            monitors,
            config,
            k,
            lanes,
            cursors: vec![0; k],
            closed: vec![false; k],
            halt_on_verdict: true,
        };
        let mut changed = false;
        for trace in 0..k {
            for (j, (gate, m)) in run.monitors.iter().enumerate() {
                if let Some(v) = m.verdict(run.lanes[trace * run.monitors.len() + j]) {
                    run.config.apply_verdict(&run.circuit, *gate, trace, v)?;
                    changed = true;
                }
            }
        }
        if changed {
            run.config.reduce(&run.circuit);
        }
        Ok(run)
    }

    /// By default feeding stops having any effect once the root decides.
    /// Disabling that keeps every lane running, which is what comparisons of
    /// whole configurations need.
    pub fn with_halting(mut self, halt: bool) -> RunState {
        self.halt_on_verdict = halt;
        self
    }

    pub fn circuit(&self) -> &CircuitMonitor {
        &self.circuit
    }

    pub fn configuration(&self) -> &Configuration {
        &self.config
    }

    pub fn root_verdict(&self) -> Option<Verdict> {
        self.config.root_verdict()
    }

    pub fn trace_count(&self) -> usize {
        self.k
    }

    pub fn lane_count(&self) -> usize {
        self.lanes.len()
    }

    /// Current state of quantifier gate `gate`'s monitor on `trace`.
    pub fn lane(&self, trace: usize, gate: GateId) -> Option<StateId> {
        let j = self.monitors.iter().position(|(g, _)| *g == gate)?;
        (trace < self.k).then(|| self.lanes[trace * self.monitors.len() + j])
    }

    /// Events consumed so far on `trace`.
    pub fn cursor(&self, trace: usize) -> u64 {
        self.cursors[trace]
    }

    pub fn is_closed(&self, trace: usize) -> bool {
        self.closed[trace]
    }

    fn check_trace(&self, trace: usize) -> Result<(), EngineError> {
        if trace >= self.k {
            return Err(EngineError::BadTrace { index: trace, k: self.k });
        }
        Ok(())
    }

    /// Feeds one event (by alphabet index) to trace `trace` (0-based).
    pub fn feed_index(&mut self, trace: usize, action: usize) -> Result<Option<Verdict>, EngineError> {
        self.check_trace(trace)?;
        if self.halt_on_verdict {
            if let Some(v) = self.root_verdict() {
                return Ok(Some(v));
            }
        }
        if self.closed[trace] {
            return Err(EngineError::TraceClosed(trace));
        }
        if action >= self.circuit.alphabet().len() {
            return Err(EngineError::UnknownAction(format!("#{action}")));
        }
        let base = trace * self.monitors.len();
        let mut changed = false;
        for (j, (gate, m)) in self.monitors.iter().enumerate() {
            let lane = &mut self.lanes[base + j];
            if m.verdict(*lane).is_some() {
                continue;
            }
            *lane = m.step_index(*lane, action);
            if let Some(v) = m.verdict(*lane) {
                self.config.apply_verdict(&self.circuit, *gate, trace, v)?;
                changed = true;
            }
        }
        self.cursors[trace] += 1;
        if changed {
            self.config.reduce(&self.circuit);
        }
        Ok(self.root_verdict())
    }

    pub fn feed(&mut self, trace: usize, action: &Action) -> Result<Option<Verdict>, EngineError> {
        let i =
            self.circuit.alphabet().index_of(action).ok_or_else(|| EngineError::UnknownAction(action.to_string()))?;
        self.feed_index(trace, i)
    }

    /// Ends trace `trace`: every lane still undecided reports `end`.
    pub fn close_trace(&mut self, trace: usize) -> Result<Option<Verdict>, EngineError> {
        self.check_trace(trace)?;
        if self.closed[trace] {
            return Err(EngineError::TraceClosed(trace));
        }
        self.closed[trace] = true;
        let base = trace * self.monitors.len();
        for (j, (gate, m)) in self.monitors.iter().enumerate() {
            if m.verdict(self.lanes[base + j]).is_none() {
                self.config.apply_verdict(&self.circuit, *gate, trace, Verdict::End)?;
            }
        }
        self.config.reduce(&self.circuit);
        Ok(self.root_verdict())
    }

    pub fn close_all(&mut self) -> Result<Option<Verdict>, EngineError> {
        for t in 0..self.k {
            if !self.closed[t] {
                self.close_trace(t)?;
            }
        }
        Ok(self.root_verdict())
    }
}

/// Result of running a circuit over a lasso suite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub verdict: Verdict,
    /// Whether the root decided before the traces were closed.
    pub decided_within_bound: bool,
    pub events_fed: u64,
}

/// Per-trace event budget `|u| + |v|·S` with `S` the largest monitor. By
/// then every lane's run over the lasso has already visited every state it
/// will ever visit.
pub fn trace_bounds(circuit: &CircuitMonitor, suite: &TraceSuite) -> Vec<usize> {
    let s = circuit.max_monitor_states();
    suite.traces().iter().map(|t| t.prefix().len() + t.cycle().len() * s).collect()
}

/// Feeds the suite round-robin up to each trace's bound; if the root is
/// still undecided, closes every trace and reports what the circuit says.
pub fn run_suite(circuit: Arc<CircuitMonitor>, suite: &TraceSuite) -> Result<RunOutcome, EngineError> {
    if circuit.alphabet() != suite.alphabet() {
        return Err(EngineError::AlphabetMismatch {
            suite: suite.alphabet().to_string(),
            monitor: circuit.alphabet().to_string(),
        });
    }
    let bounds = trace_bounds(&circuit, suite);
    let words: Vec<Vec<usize>> = suite
        .traces()
        .iter()
        .zip(&bounds)
        .map(|(t, &b)| t.iter().take(b).map(|a| suite.alphabet().index_of(a).expect("suite validated")).collect())
        .collect();
    let mut run = RunState::instrument(circuit, suite.len())?;
    let mut fed = 0;
    let longest = bounds.iter().copied().max().unwrap_or(0);
    if run.root_verdict().is_none() {
        'outer: for step in 0..longest {
            for (trace, word) in words.iter().enumerate() {
                if let Some(&a) = word.get(step) {
                    fed += 1;
                    if run.feed_index(trace, a)?.is_some() {
                        break 'outer;
                    }
                }
            }
        }
    }
    if let Some(verdict) = run.root_verdict() {
        return Ok(RunOutcome { verdict, decided_within_bound: true, events_fed: fed });
    }
    let verdict = run.close_all()?.expect("closing every trace decides every gate");
    Ok(RunOutcome { verdict, decided_within_bound: false, events_fed: fed })
}

#[derive(Debug, thiserror::Error)]
pub enum StreamError {
    #[error("line {line}: expected `<trace> <action>` or `<trace> $`")]
    Malformed { line: usize },
    #[error("line {line}: {source}")]
    Engine { line: usize, source: EngineError },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Drives a run from a line-oriented event stream. Each line is
/// `<trace> <action>` with 1-based trace numbers, or `<trace> $` to close a
/// trace. Reading stops as soon as the root decides; `None` means the input
/// ended first.
pub fn process_stream(run: &mut RunState, input: impl BufRead) -> Result<Option<Verdict>, StreamError> {
    if let Some(v) = run.root_verdict() {
        return Ok(Some(v));
    }
    for (n, line) in input.lines().enumerate() {
        let line_no = n + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let mut parts = text.split_whitespace();
        let (Some(index), Some(event), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(StreamError::Malformed { line: line_no });
        };
        let index: usize = index.parse().map_err(|_| StreamError::Malformed { line: line_no })?;
        let trace = index.checked_sub(1).ok_or(StreamError::Engine {
            line: line_no,
            source: EngineError::BadTrace { index: 0, k: run.trace_count() },
        })?;
        let result = if event == "$" {
            run.close_trace(trace)
        } else {
            match Action::new(event) {
                Some(a) => run.feed(trace, &a),
                None => Err(EngineError::UnknownAction(event.to_string())),
            }
        };
        if let Some(v) = result.map_err(|source| StreamError::Engine { line: line_no, source })? {
            return Ok(Some(v));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_hyper, parse_suite, Alphabet};

    const EXAMPLE: &str = "A p. [a]ff /\\ E p. [b] max x.([a]ff & [b]x)";

    fn ab() -> Alphabet {
        Alphabet::parse("a b").unwrap()
    }

    fn syn(s: &str) -> Arc<CircuitMonitor> {
        Arc::new(CircuitMonitor::synthesize(&parse_hyper(s, &ab()).unwrap(), &ab()).unwrap())
    }

    fn act(s: &str) -> Action {
        Action::new(s).unwrap()
    }

    #[test]
    fn instrument_creates_one_lane_per_monitor_and_trace() {
        let run = RunState::instrument(syn(EXAMPLE), 3).unwrap();
        assert_eq!(run.lane_count(), 6);
        assert_eq!(run.configuration().dump(), "0: bits=11 end=0\n1: bits=111 end=0\n2: bits=111 end=0\n");
        assert_eq!(RunState::instrument(syn(EXAMPLE), 1).unwrap().lane_count(), 2);
        assert_eq!(RunState::instrument(syn(EXAMPLE), 0).unwrap_err(), EngineError::Circuit(CircuitError::NoTraces));
    }

    #[test]
    fn verdict_lanes_flush_at_instrumentation() {
        let run = RunState::instrument(syn("E p. ff"), 2).unwrap();
        assert_eq!(run.root_verdict(), Some(Verdict::No));
        let run = RunState::instrument(syn("A p. tt"), 1).unwrap();
        assert_eq!(run.root_verdict(), Some(Verdict::Yes));
    }

    #[test]
    fn first_event_of_a_omega_rejects() {
        let mut run = RunState::instrument(syn(EXAMPLE), 3).unwrap();
        assert_eq!(run.feed(0, &act("a")).unwrap(), Some(Verdict::No));
        assert_eq!(run.configuration().dump(), "0: no\n1: no\n2: yes\n");
    }

    #[test]
    fn or_gate_accepts_on_a_yes_lane() {
        let mut run = RunState::instrument(syn("E p. [a]ff"), 2).unwrap();
        assert_eq!(run.feed(0, &act("b")).unwrap(), Some(Verdict::Yes));
    }

    #[test]
    fn feeding_decided_lanes_changes_nothing() {
        let mut run = RunState::instrument(syn("E p. [a]ff /\\ E q. [b]ff"), 2).unwrap().with_halting(false);
        run.feed(0, &act("a")).unwrap();
        let before = run.configuration().clone();
        run.feed(0, &act("b")).unwrap();
        run.feed(0, &act("a")).unwrap();
        assert_eq!(run.configuration(), &before);
    }

    #[test]
    fn closing_an_undecided_loop_gives_end() {
        let mut run = RunState::instrument(syn("E p. [b] max x.([a]ff & [b]x)"), 1).unwrap();
        for _ in 0..3 {
            assert_eq!(run.feed(0, &act("b")).unwrap(), None);
        }
        assert_eq!(run.close_trace(0).unwrap(), Some(Verdict::End));
        assert_eq!(run.configuration().dump(), "0: end\n");
    }

    #[test]
    fn closed_traces_reject_further_events() {
        let mut run = RunState::instrument(syn("E p. [a][a]ff /\\ E q. [b]ff"), 2).unwrap();
        run.close_trace(1).unwrap();
        assert_eq!(run.feed(1, &act("a")), Err(EngineError::TraceClosed(1)));
        assert_eq!(run.close_trace(1), Err(EngineError::TraceClosed(1)));
        assert_eq!(run.feed(2, &act("a")), Err(EngineError::BadTrace { index: 2, k: 2 }));
        assert_eq!(run.feed(0, &act("c")), Err(EngineError::UnknownAction("c".into())));
    }

    #[test]
    fn closing_decided_lanes_is_harmless() {
        let mut run = RunState::instrument(syn("A p. [a]ff /\\ E q. [a]ff"), 2).unwrap();
        run.feed(0, &act("b")).unwrap();
        let before = run.configuration().clone();
        run.close_trace(0).unwrap();
        assert_eq!(run.configuration(), &before);
    }

    #[test]
    fn suite_runs() {
        let suite = parse_suite("alphabet a b\ntrace | a\ntrace b a | b\ntrace | b").unwrap();
        let out = run_suite(syn(EXAMPLE), &suite).unwrap();
        assert_eq!(out, RunOutcome { verdict: Verdict::No, decided_within_bound: true, events_fed: 1 });

        let only_b = parse_suite("alphabet a b\ntrace | b").unwrap();
        let out = run_suite(syn(EXAMPLE), &only_b).unwrap();
        assert_eq!(out.verdict, Verdict::End);
        assert!(!out.decided_within_bound);

        assert_eq!(run_suite(syn("A p. [a]ff"), &only_b).unwrap().verdict, Verdict::Yes);

        let other = parse_suite("alphabet a b c\ntrace | b").unwrap();
        assert!(matches!(run_suite(syn("A p. [a]ff"), &other), Err(EngineError::AlphabetMismatch { .. })));
    }

    #[test]
    fn streams() {
        let mut run = RunState::instrument(syn(EXAMPLE), 3).unwrap();
        let v = process_stream(&mut run, "2 b\n3 b\n1 a\n1 b\n".as_bytes()).unwrap();
        assert_eq!(v, Some(Verdict::No));
        assert_eq!(run.cursor(0), 1);

        let mut run = RunState::instrument(syn("E p. [b] max x.([a]ff & [b]x)"), 1).unwrap();
        assert_eq!(process_stream(&mut run, "1 b\n1 b\n".as_bytes()).unwrap(), None);
        assert_eq!(process_stream(&mut run, "1 $\n".as_bytes()).unwrap(), Some(Verdict::End));

        let mut run = RunState::instrument(syn(EXAMPLE), 1).unwrap();
        assert!(matches!(process_stream(&mut run, "1\n".as_bytes()), Err(StreamError::Malformed { line: 1 })));
        assert!(matches!(
            process_stream(&mut run, "0 a\n".as_bytes()),
            Err(StreamError::Engine { line: 1, source: EngineError::BadTrace { .. } })
        ));
    }
}
