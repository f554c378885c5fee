use std::fmt;

use crate::circuit::CircuitMonitor;

/// Shape of a circuit once instrumented over `k` traces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircuitStats {
    pub k: usize,
    pub depth: usize,
    pub gate_count: usize,
    /// Monitor copies: one per quantifier gate and trace.
    pub lanes: usize,
    pub max_fan_in: usize,
    /// State count of each quantifier gate's monitor, in gate order.
    pub monitor_states: Vec<usize>,
}

impl CircuitStats {
    pub fn of(circuit: &CircuitMonitor, k: usize) -> CircuitStats {
        let monitor_states: Vec<usize> = circuit
            .quantifier_gates()
            .iter()
            .map(|&g| circuit.gate(g).kind.monitor().expect("quantifier gate").state_count())
            .collect();
        CircuitStats {
            k,
            depth: circuit.depth(),
            gate_count: circuit.gate_count(),
            lanes: monitor_states.len() * k,
            max_fan_in: (0..circuit.gate_count()).map(|g| circuit.fan_in(g, k)).max().unwrap_or(0),
            monitor_states,
        }
    }

    pub fn tsv_header() -> &'static str {
        "k\tdepth\tgates\tlanes\tmax_fan_in\tmonitor_states"
    }

    pub fn tsv_row(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}",
            self.k,
            self.depth,
            self.gate_count,
            self.lanes,
            self.max_fan_in,
            self.states_list()
        )
    }

    fn states_list(&self) -> String {
        self.monitor_states.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")
    }
}

impl fmt::Display for CircuitStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "k={} depth={} gates={} lanes={} max_fan_in={} monitor_states={}",
            self.k,
            self.depth,
            self.gate_count,
            self.lanes,
            self.max_fan_in,
            self.states_list()
        )
    }
}
