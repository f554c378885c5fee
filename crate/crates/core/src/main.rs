use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hypermon::harness::{self, CircuitStats, GenBounds};
use hypermon::{
    eval_hyper, parse_hyper, parse_suite, process_stream, run_suite, Alphabet, CircuitMonitor, HyperFormula, RunState,
    TraceSuite, Verdict,
};

/// Exit code for I/O, parse and synthesis errors.
const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "hypermon", version, about = "Circuit monitors for hyperproperties over safety HML")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Space separated action names, e.g. "a b".
    #[arg(long, global = true)]
    alphabet: Option<String>,
    /// File holding the formula.
    #[arg(long, global = true)]
    formula: Option<PathBuf>,
    /// Trace-suite file.
    #[arg(long, global = true)]
    suite: Option<PathBuf>,
    /// Read `<trace> <action>` events instead of a suite.
    #[arg(long, global = true)]
    stream: bool,
    /// Event file for --stream; stdin when absent.
    #[arg(long, global = true)]
    events: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 1000)]
    cases: usize,
    /// Comma separated trace counts, e.g. "1,8,64".
    #[arg(long, global = true)]
    k: Option<String>,
    /// Tab separated output.
    #[arg(long, global = true)]
    tsv: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print the synthesized circuit and its monitors.
    Synth {
        #[arg(long, value_enum, default_value_t = Dump::Tree)]
        dump: Dump,
    },
    /// Monitor a suite or event stream; exit 0 = yes, 1 = no, 2 = end.
    Run {
        /// Also print the final gate configuration.
        #[arg(long)]
        show_config: bool,
    },
    /// Decide satisfaction with the brute-force semantics.
    Oracle,
    /// Compare monitor verdicts against the oracle on random cases.
    Fuzz {
        #[arg(long, default_value_t = GenBounds::default().max_traces)]
        max_traces: usize,
        #[arg(long, default_value_t = GenBounds::default().max_prefix)]
        max_prefix: usize,
        #[arg(long, default_value_t = GenBounds::default().max_loop)]
        max_loop: usize,
        #[arg(long, default_value_t = GenBounds::default().max_alphabet)]
        max_alphabet: usize,
        #[arg(long, default_value_t = GenBounds::default().max_body_depth)]
        max_depth: usize,
        /// Re-run the single case with this seed.
        #[arg(long)]
        replay: Option<u64>,
    },
    /// Circuit depth, size and fan-in for each k.
    Stats,
    /// Mean per-event latency for streams of the given lengths.
    Bench {
        /// Comma separated stream lengths.
        #[arg(long, default_value = "1000,100000")]
        lengths: String,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Dump {
    Tree,
    Term,
    Automaton,
}

#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type CliResult = Result<ExitCode, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn dispatch(cli: &Cli) -> CliResult {
    let g = &cli.global;
    match &cli.command {
        Command::Synth { dump } => synth(g, *dump),
        Command::Run { show_config } => run(g, *show_config),
        Command::Oracle => oracle(g),
        Command::Fuzz { max_traces, max_prefix, max_loop, max_alphabet, max_depth, replay } => {
            let bounds = GenBounds {
                max_alphabet: *max_alphabet,
                max_traces: *max_traces,
                max_prefix: *max_prefix,
                max_loop: *max_loop,
                max_body_depth: *max_depth,
                ..GenBounds::default()
            };
            fuzz(g, &bounds, *replay)
        }
        Command::Stats => stats(g),
        Command::Bench { lengths } => bench(g, lengths),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn flag_alphabet(g: &Global) -> Result<Alphabet, Failure> {
    let text = g.alphabet.as_deref().ok_or_else(|| Failure("--alphabet is required".into()))?;
    Alphabet::parse(text).ok_or_else(|| Failure(format!("invalid alphabet `{text}`")))
}

fn load_formula(g: &Global, alphabet: &Alphabet) -> Result<HyperFormula, Failure> {
    let path = g.formula.as_deref().ok_or_else(|| Failure("--formula is required".into()))?;
    let text = read(path)?;
    parse_hyper(&text, alphabet).map_err(|e| Failure(format!("{}:{e}", path.display())))
}

fn load_suite(g: &Global) -> Result<TraceSuite, Failure> {
    let path = g.suite.as_deref().ok_or_else(|| Failure("--suite is required".into()))?;
    let suite = parse_suite(&read(path)?).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    if let Some(a) = &g.alphabet {
        if Alphabet::parse(a).as_ref() != Some(suite.alphabet()) {
            return Err(Failure(format!("--alphabet `{a}` differs from the suite alphabet `{}`", suite.alphabet())));
        }
    }
    Ok(suite)
}

fn k_list(g: &Global) -> Result<Option<Vec<usize>>, Failure> {
    let Some(text) = &g.k else { return Ok(None) };
    let ks: Result<Vec<usize>, _> = text.split(',').map(|s| s.trim().parse::<usize>()).collect();
    match ks {
        Ok(ks) if !ks.is_empty() && ks.iter().all(|&k| k > 0) => Ok(Some(ks)),
        _ => Err(Failure(format!("invalid --k `{text}`"))),
    }
}

fn single_k(g: &Global) -> Result<Option<usize>, Failure> {
    match k_list(g)? {
        None => Ok(None),
        Some(ks) if ks.len() == 1 => Ok(Some(ks[0])),
        Some(_) => Err(Failure("--k takes a single value here".into())),
    }
}

fn verdict_exit(v: Option<Verdict>) -> ExitCode {
    ExitCode::from(match v {
        Some(Verdict::Yes) => 0,
        Some(Verdict::No) => 1,
        Some(Verdict::End) | None => 2,
    })
}

fn synth(g: &Global, dump: Dump) -> CliResult {
    let alphabet = flag_alphabet(g)?;
    let circuit = CircuitMonitor::synthesize(&load_formula(g, &alphabet)?, &alphabet)?;
    let k = single_k(g)?;
    let mut out = io::stdout().lock();
    match dump {
        Dump::Tree => write!(out, "{}", circuit.dump_tree(k))?,
        Dump::Term | Dump::Automaton => {
            for &gate in circuit.quantifier_gates() {
                let m = circuit.gate(gate).kind.monitor().expect("quantifier gate");
                if dump == Dump::Term {
                    writeln!(out, "{gate}: {}", m.to_term())?;
                } else {
                    writeln!(out, "# gate {gate}")?;
                    write!(out, "{}", m.dump())?;
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run(g: &Global, show_config: bool) -> CliResult {
    if g.stream {
        let alphabet = flag_alphabet(g)?;
        let circuit = Arc::new(CircuitMonitor::synthesize(&load_formula(g, &alphabet)?, &alphabet)?);
        let k = single_k(g)?.ok_or_else(|| Failure("--stream needs --k <number of traces>".into()))?;
        let mut state = RunState::instrument(circuit, k)?;
        let verdict = match &g.events {
            Some(path) => {
                let file = fs::File::open(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
                process_stream(&mut state, BufReader::new(file))?
            }
            None => process_stream(&mut state, io::stdin().lock())?,
        };
        println!("verdict {}", verdict.unwrap_or(Verdict::End));
        if show_config {
            print!("{}", state.configuration().dump());
        }
        return Ok(verdict_exit(verdict));
    }
    let suite = load_suite(g)?;
    let circuit = Arc::new(CircuitMonitor::synthesize(&load_formula(g, suite.alphabet())?, suite.alphabet())?);
    let outcome = run_suite(circuit, &suite)?;
    println!("verdict {}", outcome.verdict);
    if show_config {
        println!("events {}", outcome.events_fed);
    }
    Ok(verdict_exit(Some(outcome.verdict)))
}

fn oracle(g: &Global) -> CliResult {
    let suite = load_suite(g)?;
    let f = load_formula(g, suite.alphabet())?;
    println!("{}", if eval_hyper(&f, &suite)? { "sat" } else { "unsat" });
    Ok(ExitCode::SUCCESS)
}

fn fuzz(g: &Global, bounds: &GenBounds, replay: Option<u64>) -> CliResult {
    if let Some(seed) = replay {
        let case = harness::FuzzCase::generate(seed, bounds);
        println!("formula: {}", case.formula);
        print!("{}", case.suite);
        let r = harness::check_case(&case)?;
        println!(
            "verdict {} oracle {} decided_within_bound {}",
            r.verdict,
            if r.satisfied { "sat" } else { "unsat" },
            r.decided_within_bound
        );
        return Ok(ExitCode::SUCCESS);
    }
    if g.cases == 0 {
        return Err(Failure("--cases must be at least 1".into()));
    }
    let report = harness::fuzz(g.seed, g.cases, bounds);
    if g.tsv {
        println!("cases\tsoundness_violations\tcompleteness_misses\terrors\tviolated\tyes\tno\tend");
        println!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            report.cases,
            report.soundness_violations,
            report.completeness_misses,
            report.errors,
            report.violated,
            report.verdicts_yes,
            report.verdicts_no,
            report.verdicts_end
        );
    } else {
        println!("cases {}", report.cases);
        println!("soundness_violations {}", report.soundness_violations);
        println!("completeness_misses {}", report.completeness_misses);
        println!("errors {}", report.errors);
        println!("oracle_violated {}", report.violated);
        println!("verdicts yes={} no={} end={}", report.verdicts_yes, report.verdicts_no, report.verdicts_end);
    }
    for f in &report.failures {
        eprint!("{f}");
    }
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn stats(g: &Global) -> CliResult {
    let alphabet = flag_alphabet(g)?;
    let circuit = CircuitMonitor::synthesize(&load_formula(g, &alphabet)?, &alphabet)?;
    let ks = k_list(g)?.unwrap_or_else(|| vec![1, 8, 64]);
    if g.tsv {
        println!("{}", CircuitStats::tsv_header());
    }
    for k in ks {
        let s = CircuitStats::of(&circuit, k);
        if g.tsv {
            println!("{}", s.tsv_row());
        } else {
            println!("{s}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn bench(g: &Global, lengths: &str) -> CliResult {
    let alphabet = flag_alphabet(g)?;
    let circuit = Arc::new(CircuitMonitor::synthesize(&load_formula(g, &alphabet)?, &alphabet)?);
    let k = single_k(g)?.unwrap_or(1);
    let lengths: Vec<usize> = lengths
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure(format!("invalid --lengths `{lengths}`")))?;
    let word = harness::live_word(&circuit);
    if !word.keeps_all_lanes_live {
        eprintln!("warning: no event stream keeps every monitor undecided; timing decided lanes");
    }
    let rows = harness::bench(circuit, k, &lengths)?;
    if g.tsv {
        println!("k\tevents\tmean_ns_per_event");
    }
    for r in &rows {
        let mean = r.mean_ns_per_event.map(|m| format!("{m:.1}")).unwrap_or_else(|| "-".into());
        if g.tsv {
            println!("{k}\t{}\t{mean}", r.events);
        } else {
            println!("k={k} events={} mean_ns_per_event={mean}", r.events);
        }
    }
    let timed: Vec<f64> = rows.iter().filter_map(|r| r.mean_ns_per_event).collect();
    if let (Some(first), Some(last)) = (timed.first(), timed.last()) {
        if timed.len() > 1 && !g.tsv {
            println!("ratio_last_to_first {:.3}", last / first);
        }
    }
    Ok(ExitCode::SUCCESS)
}
