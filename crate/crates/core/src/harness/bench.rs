//! Per-event latency measurement on live (undecided) lanes.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use crate::circuit::CircuitMonitor;
use crate::engine::{EngineError, RunState};
use crate::monitor::MonitorAutomaton;

/// A word `prefix · cycle^ω` of action indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiveWord {
    pub prefix: Vec<usize>,
    pub cycle: Vec<usize>,
    /// Whether every monitor stays undecided along the whole word.
    pub keeps_all_lanes_live: bool,
}

impl LiveWord {
    pub fn at(&self, i: usize) -> usize {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }
}

/// Searches the product of all quantifier monitors for an infinite word on
/// which none of them ever reaches a verdict. Falls back to repeating the
/// first action when no such word exists.
pub fn live_word(circuit: &CircuitMonitor) -> LiveWord {
    let monitors: Vec<&Arc<MonitorAutomaton>> =
        circuit.quantifier_gates().iter().filter_map(|&g| circuit.gate(g).kind.monitor()).collect();
    let n_actions = circuit.alphabet().len();
    let fallback = LiveWord { prefix: vec![], cycle: vec![0], keeps_all_lanes_live: false };

    let live = |v: &[usize]| monitors.iter().zip(v).all(|(m, &s)| m.verdict(s).is_none());
    let start: Vec<usize> = monitors.iter().map(|m| m.initial()).collect();
    if !live(&start) {
        return fallback;
    }
    // iterative DFS over live product states looking for a back edge
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut on_stack: Vec<bool> = Vec::new();
    let mut done: Vec<bool> = Vec::new();
    index.insert(start.clone(), 0);
    on_stack.push(true);
    done.push(false);
    // (product state, id, next action to try, action taken to get here)
    let mut stack: Vec<(Vec<usize>, usize, usize, Option<usize>)> = vec![(start, 0, 0, None)];
    while let Some(top) = stack.last_mut() {
        if top.2 == n_actions {
            let (_, id, _, _) = stack.pop().expect("nonempty");
            on_stack[id] = false;
            done[id] = true;
            continue;
        }
        let a = top.2;
        top.2 += 1;
        let next: Vec<usize> = monitors.iter().zip(&top.0).map(|(m, &s)| m.step_index(s, a)).collect();
        if !live(&next) {
            continue;
        }
        match index.get(&next) {
            Some(&id) if on_stack[id] => {
                let path: Vec<usize> = stack.iter().skip(1).map(|f| f.3.expect("non-root frame")).chain([a]).collect();
                let loop_start = stack.iter().position(|f| f.1 == id).expect("on stack");
                let (prefix, cycle) = path.split_at(loop_start);
                return LiveWord { prefix: prefix.to_vec(), cycle: cycle.to_vec(), keeps_all_lanes_live: true };
            }
            Some(_) => {}
            None => {
                let id = on_stack.len();
                index.insert(next.clone(), id);
                on_stack.push(true);
                done.push(false);
                stack.push((next, id, 0, Some(a)));
            }
        }
    }
    fallback
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub events: usize,
    /// `None` for a zero-length stream.
    pub mean_ns_per_event: Option<f64>,
}

/// Feeds `events` events round-robin over `k` traces, repeating short
/// streams so that each length is timed over at least `min_total` events.
pub fn measure(
    circuit: &Arc<CircuitMonitor>,
    k: usize,
    word: &LiveWord,
    events: usize,
    min_total: usize,
) -> Result<BenchRow, EngineError> {
    if events == 0 {
        return Ok(BenchRow { events, mean_ns_per_event: None });
    }
    let reps = min_total.div_ceil(events).max(1);
    let mut total_ns = 0u128;
    for _ in 0..reps {
        let mut run = RunState::instrument(Arc::clone(circuit), k)?.with_halting(false);
        let started = Instant::now();
        for e in 0..events {
            let trace = e % k;
            run.feed_index(trace, word.at(e / k))?;
        }
        total_ns += started.elapsed().as_nanos();
    }
    Ok(BenchRow { events, mean_ns_per_event: Some(total_ns as f64 / (reps * events) as f64) })
}

pub fn bench(circuit: Arc<CircuitMonitor>, k: usize, lengths: &[usize]) -> Result<Vec<BenchRow>, EngineError> {
    let word = live_word(&circuit);
    let min_total = lengths.iter().copied().max().unwrap_or(0);
    lengths.iter().map(|&n| measure(&circuit, k, &word, n, min_total)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_hyper, Alphabet};

    fn syn(src: &str, ab: &str) -> CircuitMonitor {
        let ab = Alphabet::parse(ab).unwrap();
        CircuitMonitor::synthesize(&parse_hyper(src, &ab).unwrap(), &ab).unwrap()
    }

    #[test]
    fn finds_the_b_loop() {
        let c = syn("E p. max x.([a]ff & [b]x)", "a b");
        let w = live_word(&c);
        assert!(w.keeps_all_lanes_live);
        assert_eq!((w.prefix.as_slice(), w.cycle.as_slice()), (&[][..], &[1][..]));
    }

    #[test]
    fn live_word_needs_a_prefix() {
        let c = syn("A p. [a] max x.([b]ff & [a]x) /\\ E q. [a][a] max y.([b]ff & [a]y)", "a b");
        let w = live_word(&c);
        assert!(w.keeps_all_lanes_live);
        let mut run = RunState::instrument(Arc::new(c), 1).unwrap().with_halting(false);
        for i in 0..50 {
            assert_eq!(run.feed_index(0, w.at(i)).unwrap(), None);
        }
    }

    #[test]
    fn decided_monitors_fall_back() {
        let w = live_word(&syn("E p. ff", "a"));
        assert!(!w.keeps_all_lanes_live);
    }

    #[test]
    fn zero_length_gives_empty_row() {
        let c = Arc::new(syn("E p. max x.([a]ff & [b]x)", "a b"));
        let rows = bench(c, 2, &[0, 10]).unwrap();
        assert_eq!(rows[0], BenchRow { events: 0, mean_ns_per_event: None });
        assert!(rows[1].mean_ns_per_event.is_some());
    }
}
