//! Circuit monitors: a gate tree whose leaves dispatch one regular monitor
//! per trace, and the configuration of gate values that the verdict rules
//! rewrite.
//!
//! Gates are numbered in preorder, so the gates of any subcircuit form a
//! contiguous id range starting at its root and every child has a larger id
//! than its parent.

use std::fmt::Write;
use std::sync::Arc;

use crate::monitor::{MonitorAutomaton, MonitorError, Verdict};
use crate::syntax::{Alphabet, HyperFormula};

pub type GateId = usize;

#[derive(Clone, Debug)]
pub enum GateKind {
    /// `⋁[m]_k`: one copy of the monitor per trace, or-combined.
    BigOr(Arc<MonitorAutomaton>),
    /// `⋀[m]_k`
    BigAnd(Arc<MonitorAutomaton>),
    Or(GateId, GateId),
    And(GateId, GateId),
}

impl GateKind {
    /// Or-kind gates short-circuit on `yes`, and-kind gates on `no`.
    pub fn is_or_kind(&self) -> bool {
        matches!(self, GateKind::BigOr(_) | GateKind::Or(..))
    }

    pub fn monitor(&self) -> Option<&Arc<MonitorAutomaton>> {
        match self {
            GateKind::BigOr(m) | GateKind::BigAnd(m) => Some(m),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Gate {
    pub kind: GateKind,
    /// Parent gate and this gate's sub-index in it.
    pub parent: Option<(GateId, usize)>,
    /// Number of gates in the subtree rooted here.
    pub subtree: usize,
}

#[derive(Clone, Debug)]
pub struct CircuitMonitor {
    gates: Vec<Gate>,
    quantifiers: Vec<GateId>,
    alphabet: Alphabet,
}

impl CircuitMonitor {
    /// Synthesis: quantifiers become big gates over the compiled body,
    /// `\/` and `/\` become binary gates; the tree mirrors the formula.
    pub fn synthesize(f: &HyperFormula, alphabet: &Alphabet) -> Result<CircuitMonitor, MonitorError> {
        let mut c = CircuitMonitor { gates: Vec::new(), quantifiers: Vec::new(), alphabet: alphabet.clone() };
        c.add(f, None)?;
        Ok(c)
    }

    fn add(&mut self, f: &HyperFormula, parent: Option<(GateId, usize)>) -> Result<GateId, MonitorError> {
        let id = self.gates.len();
        // placeholder until the children are known
        self.gates.push(Gate { kind: GateKind::Or(0, 0), parent, subtree: 1 });
        let kind = match f {
            HyperFormula::Exists(_, body) => {
                self.quantifiers.push(id);
                GateKind::BigOr(Arc::new(MonitorAutomaton::compile(body, &self.alphabet)?))
            }
            HyperFormula::Forall(_, body) => {
                self.quantifiers.push(id);
                GateKind::BigAnd(Arc::new(MonitorAutomaton::compile(body, &self.alphabet)?))
            }
            HyperFormula::Join(l, r) | HyperFormula::Meet(l, r) => {
                let l = self.add(l, Some((id, 0)))?;
                let r = self.add(r, Some((id, 1)))?;
                if matches!(f, HyperFormula::Join(..)) {
                    GateKind::Or(l, r)
                } else {
                    GateKind::And(l, r)
                }
            }
        };
        self.gates[id].kind = kind;
        self.gates[id].subtree = self.gates.len() - id;
        Ok(id)
    }

    pub fn root(&self) -> GateId {
        0
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, id: GateId) -> &Gate {
        &self.gates[id]
    }

    /// Quantifier gates in preorder; each owns one monitor lane per trace.
    pub fn quantifier_gates(&self) -> &[GateId] {
        &self.quantifiers
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn depth(&self) -> usize {
        self.depth_of(self.root())
    }

    fn depth_of(&self, g: GateId) -> usize {
        match self.gates[g].kind {
            GateKind::BigOr(_) | GateKind::BigAnd(_) => 1,
            GateKind::Or(l, r) | GateKind::And(l, r) => 1 + self.depth_of(l).max(self.depth_of(r)),
        }
    }

    /// Number of sub-gates feeding `g` once instrumented over `k` traces.
    pub fn fan_in(&self, g: GateId, k: usize) -> usize {
        match self.gates[g].kind {
            GateKind::BigOr(_) | GateKind::BigAnd(_) => k,
            GateKind::Or(..) | GateKind::And(..) => 2,
        }
    }

    /// Largest automaton among the quantifier gates.
    pub fn max_monitor_states(&self) -> usize {
        self.quantifiers
            .iter()
            .filter_map(|&g| self.gates[g].kind.monitor())
            .map(|m| m.state_count())
            .max()
            .unwrap_or(1)
    }

    /// Indented gate tree; `k` is shown on big gates when known.
    pub fn dump_tree(&self, k: Option<usize>) -> String {
        let mut out = String::new();
        self.dump_gate(self.root(), 0, k, &mut out);
        out
    }

    fn dump_gate(&self, g: GateId, indent: usize, k: Option<usize>, out: &mut String) {
        let pad = "  ".repeat(indent);
        let k_part = k.map(|k| format!(" k={k}")).unwrap_or_default();
        match &self.gates[g].kind {
            GateKind::BigOr(m) => writeln!(out, "{pad}BIGOR{k_part} monitor={}", m.to_term()),
            GateKind::BigAnd(m) => writeln!(out, "{pad}BIGAND{k_part} monitor={}", m.to_term()),
            GateKind::Or(l, r) | GateKind::And(l, r) => {
                let name = if self.gates[g].kind.is_or_kind() { "OR" } else { "AND" };
                writeln!(out, "{pad}{name}").expect("write to string");
                self.dump_gate(*l, indent + 1, k, out);
                self.dump_gate(*r, indent + 1, k, out);
                return;
            }
        }
        .expect("write to string");
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CircuitError {
    #[error("a circuit must be instrumented over at least one trace")]
    NoTraces,
    #[error("gate {0} does not exist")]
    NoSuchGate(GateId),
    #[error("gate {gate} has no sub-gate {index}")]
    SubIndexOutOfRange { gate: GateId, index: usize },
}

/// Sub-gates still waiting (`true` = no verdict yet), plus the end flag.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PendingBits {
    bits: Vec<bool>,
    waiting: usize,
    end_flag: bool,
}

impl PendingBits {
    fn all_waiting(width: usize) -> PendingBits {
        PendingBits { bits: vec![true; width], waiting: width, end_flag: false }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn end_flag(&self) -> bool {
        self.end_flag
    }

    pub fn waiting(&self) -> usize {
        self.waiting
    }

    fn clear(&mut self, i: usize) {
        if std::mem::replace(&mut self.bits[i], false) {
            self.waiting -= 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GateValue {
    Decided(Verdict),
    Pending(PendingBits),
}

/// One value per gate, indexed by gate id.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    values: Vec<GateValue>,
}

impl Configuration {
    /// Every gate waits on all its sub-gates; all end flags clear.
    pub fn initial(circuit: &CircuitMonitor, k: usize) -> Result<Configuration, CircuitError> {
        if k == 0 {
            return Err(CircuitError::NoTraces);
        }
        let values = (0..circuit.gate_count())
            .map(|g| GateValue::Pending(PendingBits::all_waiting(circuit.fan_in(g, k))))
            .collect();
        Ok(Configuration { values })
    }

    pub fn value(&self, g: GateId) -> &GateValue {
        &self.values[g]
    }

    pub fn values(&self) -> &[GateValue] {
        &self.values
    }

    pub fn root_verdict(&self) -> Option<Verdict> {
        match self.values[0] {
            GateValue::Decided(v) => Some(v),
            GateValue::Pending(_) => None,
        }
    }

    /// Records that sub-gate `index` of `gate` produced `verdict`. Or-kind
    /// gates decide on `yes`, and-kind gates on `no`; any other verdict clears
    /// the sub-gate's bit, and `end` also raises the end flag. Decided gates
    /// are left alone.
    pub fn apply_verdict(
        &mut self,
        circuit: &CircuitMonitor,
        gate: GateId,
        index: usize,
        verdict: Verdict,
    ) -> Result<(), CircuitError> {
        let kind = &circuit.gates.get(gate).ok_or(CircuitError::NoSuchGate(gate))?.kind;
        let value = &mut self.values[gate];
        let GateValue::Pending(p) = value else { return Ok(()) };
        if index >= p.bits.len() {
            return Err(CircuitError::SubIndexOutOfRange { gate, index });
        }
        let short_circuit = if kind.is_or_kind() { Verdict::Yes } else { Verdict::No };
        if verdict == short_circuit {
            *value = GateValue::Decided(verdict);
        } else {
            p.clear(index);
            if verdict == Verdict::End {
                p.end_flag = true;
            }
        }
        Ok(())
    }

    /// Runs the resolution rules to quiescence: a gate with no waiting
    /// sub-gates decides (`end` if its flag is set, otherwise the
    /// non-short-circuit verdict), and decided children report to their
    /// parents. One bottom-up sweep suffices because children have larger
    /// ids than their parents.
    pub fn reduce(&mut self, circuit: &CircuitMonitor) {
        for g in (0..self.values.len()).rev() {
            let kind = &circuit.gates[g].kind;
            if let GateKind::Or(l, r) | GateKind::And(l, r) = *kind {
                for (slot, child) in [(0, l), (1, r)] {
                    let child_verdict = match (&self.values[child], &self.values[g]) {
                        (GateValue::Decided(v), GateValue::Pending(p)) if p.bits[slot] => *v,
                        _ => continue,
                    };
                    self.apply_verdict(circuit, g, slot, child_verdict).expect("binary gates have two slots");
                }
            }
            if let GateValue::Pending(p) = &self.values[g] {
                if p.waiting == 0 {
                    let v = match (p.end_flag, kind.is_or_kind()) {
                        (true, _) => Verdict::End,
                        (false, true) => Verdict::No,
                        (false, false) => Verdict::Yes,
                    };
                    self.values[g] = GateValue::Decided(v);
                }
            }
        }
    }

    /// The values of the subcircuit rooted at `gate`, renumbered from 0 so
    /// they line up with a standalone run of that subcircuit.
    pub fn restrict(&self, circuit: &CircuitMonitor, gate: GateId) -> Configuration {
        let span = gate..gate + circuit.gates[gate].subtree;
        Configuration { values: self.values[span].to_vec() }
    }

    /// `<gate>: yes|no|end` or `<gate>: bits=<01...> end=<0|1>`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (g, v) in self.values.iter().enumerate() {
            match v {
                GateValue::Decided(v) => writeln!(out, "{g}: {v}"),
                GateValue::Pending(p) => {
                    let bits: String = p.bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
                    writeln!(out, "{g}: bits={bits} end={}", u8::from(p.end_flag))
                }
            }
            .expect("write to string");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_hyper;

    fn ab() -> Alphabet {
        Alphabet::parse("a b").unwrap()
    }

    fn syn(s: &str) -> CircuitMonitor {
        CircuitMonitor::synthesize(&parse_hyper(s, &ab()).unwrap(), &ab()).unwrap()
    }

    const EXAMPLE: &str = "A p. [a]ff /\\ E p. [b] max x.([a]ff & [b]x)";

    fn pending(bits: &[bool], end_flag: bool) -> GateValue {
        GateValue::Pending(PendingBits { bits: bits.to_vec(), waiting: bits.iter().filter(|&&b| b).count(), end_flag })
    }

    #[test]
    fn synthesis_mirrors_the_formula() {
        let c = syn("A p. [a]ff");
        assert!(matches!(c.gate(0).kind, GateKind::BigAnd(_)));
        assert_eq!(c.gate(0).kind.monitor().unwrap().to_term().to_string(), "a.no + b.yes");

        let c = syn(EXAMPLE);
        assert!(matches!(c.gate(0).kind, GateKind::And(1, 2)));
        assert!(matches!(c.gate(1).kind, GateKind::BigAnd(_)));
        assert!(matches!(c.gate(2).kind, GateKind::BigOr(_)));
        assert_eq!(c.quantifier_gates(), &[1, 2]);

        let c = syn("E p. ff \\/ E p. ff");
        assert!(matches!(c.gate(0).kind, GateKind::Or(1, 2)));
        assert_eq!(c.dump_tree(None), "OR\n  BIGOR monitor=no\n  BIGOR monitor=no\n");
    }

    #[test]
    fn initial_configuration_waits_on_everything() {
        let c = syn("A p. [a]ff");
        let s = Configuration::initial(&c, 3).unwrap();
        assert_eq!(s.value(0), &pending(&[true, true, true], false));
        assert_eq!(s.dump(), "0: bits=111 end=0\n");

        let c = syn(EXAMPLE);
        let s = Configuration::initial(&c, 3).unwrap();
        assert_eq!(s.dump(), "0: bits=11 end=0\n1: bits=111 end=0\n2: bits=111 end=0\n");

        let c = syn("E p. [a]ff");
        assert_eq!(Configuration::initial(&c, 1).unwrap().value(0), &pending(&[true], false));
        assert_eq!(Configuration::initial(&c, 0), Err(CircuitError::NoTraces));
    }

    #[test]
    fn bit_rules() {
        let c = syn(EXAMPLE);
        let mut s = Configuration::initial(&c, 3).unwrap();
        // or-kind: a `no` clears its bit
        s.apply_verdict(&c, 2, 0, Verdict::No).unwrap();
        assert_eq!(s.value(2), &pending(&[false, true, true], false));
        // and-kind: a `no` decides
        s.apply_verdict(&c, 1, 0, Verdict::No).unwrap();
        assert_eq!(s.value(1), &GateValue::Decided(Verdict::No));
        // decided gates ignore later verdicts
        s.apply_verdict(&c, 1, 1, Verdict::Yes).unwrap();
        assert_eq!(s.value(1), &GateValue::Decided(Verdict::No));
        assert_eq!(s.apply_verdict(&c, 2, 3, Verdict::No), Err(CircuitError::SubIndexOutOfRange { gate: 2, index: 3 }));
        assert_eq!(s.apply_verdict(&c, 9, 0, Verdict::No), Err(CircuitError::NoSuchGate(9)));
    }

    #[test]
    fn or_kind_short_circuits_and_records_end() {
        let c = syn("E p. [a]ff");
        let mut s = Configuration::initial(&c, 1).unwrap();
        s.apply_verdict(&c, 0, 0, Verdict::Yes).unwrap();
        assert_eq!(s.root_verdict(), Some(Verdict::Yes));

        let mut s = Configuration::initial(&c, 2).unwrap();
        s.apply_verdict(&c, 0, 0, Verdict::No).unwrap();
        s.apply_verdict(&c, 0, 1, Verdict::End).unwrap();
        assert_eq!(s.value(0), &pending(&[false, false], true));
        s.reduce(&c);
        assert_eq!(s.root_verdict(), Some(Verdict::End));
    }

    #[test]
    fn exhausted_or_gate_says_no_without_flag() {
        let c = syn("E p. [a]ff");
        let mut s = Configuration::initial(&c, 2).unwrap();
        s.apply_verdict(&c, 0, 0, Verdict::No).unwrap();
        s.apply_verdict(&c, 0, 1, Verdict::No).unwrap();
        assert_eq!(s.root_verdict(), None);
        s.reduce(&c);
        assert_eq!(s.root_verdict(), Some(Verdict::No));
    }

    #[test]
    fn decided_child_propagates_to_root() {
        let c = syn(EXAMPLE);
        let mut s = Configuration::initial(&c, 3).unwrap();
        s.apply_verdict(&c, 2, 0, Verdict::No).unwrap();
        s.apply_verdict(&c, 1, 0, Verdict::No).unwrap();
        assert_eq!(s.root_verdict(), None);
        s.reduce(&c);
        assert_eq!(s.root_verdict(), Some(Verdict::No));
        assert_eq!(s.dump(), "0: no\n1: no\n2: bits=011 end=0\n");
    }

    #[test]
    fn all_yes_under_two_big_ands() {
        let c = syn("A p. [a]ff /\\ A q. [b]ff");
        let mut s = Configuration::initial(&c, 2).unwrap();
        for g in [1, 2] {
            for i in 0..2 {
                s.apply_verdict(&c, g, i, Verdict::Yes).unwrap();
            }
        }
        s.reduce(&c);
        assert_eq!(s.root_verdict(), Some(Verdict::Yes));
    }

    #[test]
    fn depth_and_restriction() {
        let c = syn("(A p. tt \\/ E p. ff) /\\ A q. [a]ff");
        assert_eq!(c.depth(), 3);
        assert_eq!(c.gate_count(), 5);
        let s = Configuration::initial(&c, 4).unwrap();
        assert_eq!(s.restrict(&c, 1).values().len(), 3);
        assert_eq!(s.restrict(&c, 4).values(), &[pending(&[true; 4], false)]);
    }
}
