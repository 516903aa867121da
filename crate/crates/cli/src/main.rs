use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cdpcf::differential::dlet;
use cdpcf::machine::det::{det_run_traced, DetOutcome};
use cdpcf::machine::krivine::{msrs_run_traced, Command};
use cdpcf::machine::TraceLine;
use cdpcf::program::{Expectation, SourceProgram};
use cdpcf::rel::{interp_ground_with, SearchConfig};
use cdpcf::rewrite::normalize;
use cdpcf::typing::{infer, TyCtx};

const OK: u8 = 0;
const INVALID: u8 = 1;
const TIMEOUT: u8 = 2;
const MISMATCH: u8 = 3;

#[derive(Parser)]
#[command(name = "cdpcf", version, about = "Run and inspect coherent differential PCF programs")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the type of a closed program.
    Typecheck { file: PathBuf },
    /// Print the differential of the program with respect to a variable.
    Diff {
        file: PathBuf,
        #[arg(long = "var")]
        var: String,
    },
    /// Rewrite with the leftmost-outermost strategy, printing each step.
    Reduce {
        file: PathBuf,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Run one of the abstract machines.
    Run {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = MachineKind::Det)]
        machine: MachineKind,
        #[arg(long, default_value_t = 10_000)]
        fuel: usize,
        /// Print one line per transition to the chosen stream.
        #[arg(long, value_enum, num_args = 0..=1, default_missing_value = "stderr")]
        trace: Option<Stream>,
    },
    /// Compute the ground interpretation with the relational search.
    Interp {
        file: PathBuf,
        /// Numerals up to this bound (exclusive) are tried.
        #[arg(long, default_value_t = 16)]
        nu_bound: u64,
        #[arg(long, default_value_t = 1_000)]
        fuel: usize,
    },
    /// Run both machines and compare their results and step counts.
    CheckSim {
        file: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        fuel: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MachineKind {
    Det,
    Multiset,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Stream {
    Stderr,
    Stdout,
}

/// What a machine run amounted to, in the form printed by `run`.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Outcome {
    Value(u64, usize),
    Zero,
    Timeout,
    Ambiguous(Vec<u64>),
}

impl Outcome {
    fn line(&self) -> String {
        match self {
            Outcome::Value(v, _) => format!("result: {v}"),
            Outcome::Zero => "result: zero".to_string(),
            Outcome::Timeout => "timeout".to_string(),
            Outcome::Ambiguous(vs) => format!("result: ambiguous {vs:?}"),
        }
    }
}

fn load(file: &PathBuf) -> Result<SourceProgram, u8> {
    SourceProgram::load(file).map_err(|e| {
        eprintln!("error: {e}");
        INVALID
    })
}

fn load_closed(file: &PathBuf) -> Result<(SourceProgram, cdpcf::Ty), u8> {
    let p = load(file)?;
    match infer(&TyCtx::new(), &p.term) {
        Ok(a) => Ok((p, a)),
        Err(e) => {
            eprintln!("type error: {e}");
            Err(INVALID)
        }
    }
}

fn tracer(stream: Option<Stream>) -> impl FnMut(&TraceLine) {
    move |line: &TraceLine| match stream {
        Some(Stream::Stdout) => println!("{line}"),
        Some(Stream::Stderr) => eprintln!("{line}"),
        None => {}
    }
}

fn run_det(p: &SourceProgram, fuel: usize, trace: Option<Stream>) -> Result<Outcome, u8> {
    let report = det_run_traced(&p.term, fuel, &mut tracer(trace)).map_err(|e| {
        eprintln!("machine error: {e}");
        INVALID
    })?;
    Ok(match report.outcome {
        DetOutcome::Value(v) => Outcome::Value(v, report.steps),
        DetOutcome::Zero | DetOutcome::Stuck => Outcome::Zero,
        DetOutcome::Timeout => Outcome::Timeout,
    })
}

fn run_multiset(p: &SourceProgram, fuel: usize, trace: Option<Stream>) -> Result<Outcome, u8> {
    let start = Command::initial(p.term.clone());
    let report = msrs_run_traced(&start, fuel, &mut tracer(trace)).map_err(|e| {
        eprintln!("machine error: {e}");
        INVALID
    })?;
    if report.exhausted {
        return Ok(Outcome::Timeout);
    }
    let values: Vec<u64> = report.results.support().copied().collect();
    Ok(match (values.as_slice(), report.successes.as_slice()) {
        ([], _) => Outcome::Zero,
        ([v], [s]) => Outcome::Value(*v, s.steps),
        _ => Outcome::Ambiguous(report.results.iter().copied().collect()),
    })
}

fn exit_for(o: &Outcome) -> u8 {
    match o {
        Outcome::Timeout => TIMEOUT,
        Outcome::Ambiguous(_) => MISMATCH,
        _ => OK,
    }
}

fn execute(cmd: Cmd) -> Result<u8, u8> {
    match cmd {
        Cmd::Typecheck { file } => {
            let (p, a) = load_closed(&file)?;
            println!("{a}");
            if let Some(Expectation::Type(want)) = &p.expect {
                if *want != a {
                    eprintln!("expected type {want}");
                    return Ok(MISMATCH);
                }
            }
            Ok(OK)
        }
        Cmd::Diff { file, var } => {
            let p = load(&file)?;
            println!("{}", dlet(&var, &p.term));
            Ok(OK)
        }
        Cmd::Reduce { file, steps } => {
            let (p, _) = load_closed(&file)?;
            let trace = normalize(&TyCtx::new(), &p.term, steps);
            for s in &trace {
                println!("{}  {}", s.redex, s.after);
            }
            let last = trace.last().map_or(&p.term, |s| &s.after);
            println!("normal form after {} steps: {last}", trace.len());
            Ok(OK)
        }
        Cmd::Run {
            file,
            machine,
            fuel,
            trace,
        } => {
            let (p, _) = load_closed(&file)?;
            let outcome = match machine {
                MachineKind::Det => run_det(&p, fuel, trace)?,
                MachineKind::Multiset => run_multiset(&p, fuel, trace)?,
            };
            println!("{}", outcome.line());
            if let Outcome::Value(_, steps) = outcome {
                println!("steps: {steps}");
            }
            Ok(exit_for(&outcome))
        }
        Cmd::Interp {
            file,
            nu_bound,
            fuel,
        } => {
            let (p, _) = load_closed(&file)?;
            let cfg = SearchConfig::with_fuel(fuel);
            let (values, cut) = interp_ground_with(&p.term, nu_bound, &cfg).map_err(|e| {
                eprintln!("error: {e}");
                INVALID
            })?;
            let shown: Vec<String> = values.iter().map(u64::to_string).collect();
            println!("{{{}}}", shown.join(", "));
            if cut {
                eprintln!("note: the search hit its visit budget; the set may be incomplete");
            }
            Ok(OK)
        }
        Cmd::CheckSim { file, fuel } => {
            let (p, _) = load_closed(&file)?;
            let det = run_det(&p, fuel, None)?;
            let ms = run_multiset(&p, fuel, None)?;
            if det == Outcome::Timeout || ms == Outcome::Timeout {
                println!("det: {}\nmultiset: {}", det.line(), ms.line());
                return Ok(TIMEOUT);
            }
            if det == ms {
                match det {
                    Outcome::Value(v, k) => println!("agree: result: {v} in {k} steps"),
                    other => println!("agree: {}", other.line()),
                }
                Ok(OK)
            } else {
                let show = |o: &Outcome| match o {
                    Outcome::Value(v, k) => format!("result: {v} in {k} steps"),
                    other => other.line(),
                };
                println!("mismatch\ndet: {}\nmultiset: {}", show(&det), show(&ms));
                Ok(MISMATCH)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = execute(cli.command).unwrap_or_else(|c| c);
    let _ = io::stdout().flush();
    ExitCode::from(code)
}
