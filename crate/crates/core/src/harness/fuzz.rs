//! Differential fuzzing of synthesized circuits against the oracle.
//!
//! Every case is generated from its own 64-bit seed, drawn from a master
//! generator seeded by the user, so a failing case can be replayed alone.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::gen::{self, GenBounds};
use crate::circuit::CircuitMonitor;
use crate::engine::run_suite;
use crate::monitor::Verdict;
use crate::oracle::eval_hyper;
use crate::syntax::{HyperFormula, TraceSuite};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuzzCase {
    pub seed: u64,
    pub formula: HyperFormula,
    pub suite: TraceSuite,
}

impl FuzzCase {
    pub fn generate(seed: u64, bounds: &GenBounds) -> FuzzCase {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alphabet = gen::alphabet(&mut rng, bounds);
        let formula = gen::hyper(&mut rng, &alphabet, bounds);
        let suite = gen::suite(&mut rng, &alphabet, bounds);
        FuzzCase { seed, formula, suite }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureKind {
    /// `no` on a satisfied suite or `yes` on a violated one.
    Unsound,
    /// A violated suite not rejected within the trace bounds.
    Incomplete,
    /// Synthesis or execution failed outright.
    Error,
}

impl fmt::Display for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureKind::Unsound => "unsound",
            FailureKind::Incomplete => "incomplete",
            FailureKind::Error => "error",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuzzFailure {
    pub kind: FailureKind,
    pub case: FuzzCase,
    pub detail: String,
}

impl fmt::Display for FuzzFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} seed={} ({})", self.kind, self.case.seed, self.detail)?;
        writeln!(f, "  formula: {}", self.case.formula)?;
        for line in self.case.suite.to_string().lines() {
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FuzzReport {
    pub cases: usize,
    pub soundness_violations: usize,
    pub completeness_misses: usize,
    pub errors: usize,
    /// Cases the oracle judged violated.
    pub violated: usize,
    pub verdicts_yes: usize,
    pub verdicts_no: usize,
    pub verdicts_end: usize,
    pub failures: Vec<FuzzFailure>,
}

impl FuzzReport {
    pub fn passed(&self) -> bool {
        self.soundness_violations == 0 && self.completeness_misses == 0 && self.errors == 0
    }
}

/// Outcome of one differential check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseResult {
    pub satisfied: bool,
    pub verdict: Verdict,
    pub decided_within_bound: bool,
}

pub fn check_case(case: &FuzzCase) -> Result<CaseResult, String> {
    let alphabet = case.suite.alphabet();
    let circuit = CircuitMonitor::synthesize(&case.formula, alphabet).map_err(|e| e.to_string())?;
    let run = run_suite(Arc::new(circuit), &case.suite).map_err(|e| e.to_string())?;
    let satisfied = eval_hyper(&case.formula, &case.suite).map_err(|e| e.to_string())?;
    Ok(CaseResult { satisfied, verdict: run.verdict, decided_within_bound: run.decided_within_bound })
}

/// Seeds of the cases a run with `seed` and `cases` would generate.
pub fn case_seeds(seed: u64, cases: usize) -> Vec<u64> {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    (0..cases).map(|_| master.gen()).collect()
}

pub fn fuzz(seed: u64, cases: usize, bounds: &GenBounds) -> FuzzReport {
    let results: Vec<(FuzzCase, Result<CaseResult, String>)> = case_seeds(seed, cases)
        .into_par_iter()
        .map(|s| {
            let case = FuzzCase::generate(s, bounds);
            let result = check_case(&case);
            (case, result)
        })
        .collect();

    let mut report = FuzzReport { cases, ..FuzzReport::default() };
    for (case, result) in results {
        let r = match result {
            Ok(r) => r,
            Err(detail) => {
                report.errors += 1;
                report.failures.push(FuzzFailure { kind: FailureKind::Error, case, detail });
                continue;
            }
        };
        match r.verdict {
            Verdict::Yes => report.verdicts_yes += 1,
            Verdict::No => report.verdicts_no += 1,
            Verdict::End => report.verdicts_end += 1,
        }
        if !r.satisfied {
            report.violated += 1;
        }
        let detail = format!("verdict {}, oracle {}", r.verdict, if r.satisfied { "sat" } else { "unsat" });
        let unsound = (r.verdict == Verdict::No && r.satisfied) || (r.verdict == Verdict::Yes && !r.satisfied);
        if unsound {
            report.soundness_violations += 1;
            report.failures.push(FuzzFailure {
                kind: FailureKind::Unsound,
                case: case.clone(),
                detail: detail.clone(),
            });
        }
        if !r.satisfied && !(r.verdict == Verdict::No && r.decided_within_bound) {
            report.completeness_misses += 1;
            report.failures.push(FuzzFailure { kind: FailureKind::Incomplete, case, detail });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_case_report() {
        let r = fuzz(1, 1, &GenBounds::default());
        assert_eq!(r.cases, 1);
        assert_eq!(r.verdicts_yes + r.verdicts_no + r.verdicts_end + r.errors, 1);
    }

    #[test]
    fn reports_are_reproducible() {
        let bounds = GenBounds::default();
        assert_eq!(fuzz(99, 40, &bounds), fuzz(99, 40, &bounds));
    }

    #[test]
    fn cases_replay_from_their_seed() {
        let bounds = GenBounds::default();
        let seeds = case_seeds(5, 10);
        let a = FuzzCase::generate(seeds[7], &bounds);
        let b = FuzzCase::generate(seeds[7], &bounds);
        assert_eq!(a, b);
        assert_eq!(check_case(&a), check_case(&b));
    }
}
