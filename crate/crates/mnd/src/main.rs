use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Parser, Subcommand};

use mnd::graph::{config_paths, to_dot};
use mnd::trace::{from_jsonl, to_jsonl};
use mnd::verify::verify;
use mnd::{Outcome, Scenario};

/// Run, verify and graph meaning negotiations.
#[derive(Parser)]
#[command(name = "mnd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario. Exits 0 on agreement, 1 on disagreement, 2 on error.
    Run {
        scenario: PathBuf,
        /// Override the auction's agreement threshold.
        #[arg(long)]
        alpha: Option<usize>,
        /// Write the trace here instead of stdout.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// Also write the configuration graph.
        #[arg(long)]
        dot_out: Option<PathBuf>,
        #[arg(long)]
        max_beats: Option<usize>,
    },
    /// Replay a trace against a scenario. Exits 0 if valid, 1 if not, 2 on error.
    Verify {
        scenario: PathBuf,
        trace: PathBuf,
        /// The threshold the trace was produced with, if overridden.
        #[arg(long)]
        alpha: Option<usize>,
    },
    /// Print the configuration path of a run as a DOT digraph.
    Graph {
        scenario: PathBuf,
        #[arg(long)]
        alpha: Option<usize>,
    },
    /// Run several scenarios in parallel and print one outcome line each.
    Batch {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

type Failure = Box<dyn std::error::Error>;

fn load(path: &Path, alpha: Option<usize>) -> Result<Scenario, Failure> {
    let s = Scenario::load(path)?;
    Ok(match alpha {
        Some(a) => s.with_alpha(a)?,
        None => s,
    })
}

fn summary(o: &Outcome) -> String {
    match &o.outcome {
        Some(f) => format!(
            "agreement after {} beats on `{f}` (agreeing: {})",
            o.beats,
            o.agreeing.join(", ")
        ),
        None => format!("disagreement after {} beats", o.beats),
    }
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn cmd_run(
    path: &Path,
    alpha: Option<usize>,
    trace_out: Option<&Path>,
    dot_out: Option<&Path>,
    max_beats: Option<usize>,
) -> Result<ExitCode, Failure> {
    let s = load(path, alpha)?;
    let outcome = s
        .negotiation()?
        .run(max_beats.unwrap_or_else(|| s.effective_max_beats()))?;
    let trace = to_jsonl(&outcome.trace, Some(&outcome.footer()));
    match trace_out {
        Some(p) => write(p, &trace)?,
        None => print!("{trace}"),
    }
    if let Some(p) = dot_out {
        write(
            p,
            &to_dot(
                &config_paths(&s.agents, &s.ws, &outcome.trace),
                Some(&outcome.footer()),
            ),
        )?;
    }
    eprintln!("{}", summary(&outcome));
    Ok(if outcome.is_agreement() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_verify(scenario: &Path, trace: &Path, alpha: Option<usize>) -> Result<ExitCode, Failure> {
    let s = load(scenario, alpha)?;
    let text = std::fs::read_to_string(trace).map_err(|e| format!("{}: {e}", trace.display()))?;
    let (events, footer) = from_jsonl(&text)?;
    match verify(&s.agents, &s.ws, s.mode, &events, footer.as_ref()) {
        Ok(()) => {
            eprintln!("valid: {} events", events.len());
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => {
            eprintln!("invalid: {e}");
            Ok(ExitCode::from(1))
        }
    }
}

fn cmd_graph(path: &Path, alpha: Option<usize>) -> Result<ExitCode, Failure> {
    let s = load(path, alpha)?;
    let outcome = s.run()?;
    print!(
        "{}",
        to_dot(
            &config_paths(&s.agents, &s.ws, &outcome.trace),
            Some(&outcome.footer())
        )
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_batch(paths: &[PathBuf], jobs: usize) -> ExitCode {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<String, String>>>> = Mutex::new(vec![None; paths.len()]);
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, paths.len().max(1)) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(path) = paths.get(k) else { break };
                let r = load(path, None)
                    .and_then(|s| Ok(s.run()?))
                    .map(|o| summary(&o))
                    .map_err(|e| e.to_string());
                results
                    .lock()
                    .expect("no worker panics while holding the lock")[k] = Some(r);
            });
        }
    });
    let mut failed = false;
    for (path, r) in paths
        .iter()
        .zip(results.into_inner().expect("workers joined"))
    {
        match r.expect("every file processed") {
            Ok(line) => println!("{}: {line}", path.display()),
            Err(e) => {
                failed = true;
                println!("{}: error: {e}", path.display());
            }
        }
    }
    if failed {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            scenario,
            alpha,
            trace_out,
            dot_out,
            max_beats,
        } => cmd_run(
            scenario,
            *alpha,
            trace_out.as_deref(),
            dot_out.as_deref(),
            *max_beats,
        ),
        Command::Verify {
            scenario,
            trace,
            alpha,
        } => cmd_verify(scenario, trace, *alpha),
        Command::Graph { scenario, alpha } => cmd_graph(scenario, *alpha),
        Command::Batch { scenarios, jobs } => return cmd_batch(scenarios, *jobs),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}
