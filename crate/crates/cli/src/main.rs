use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};

use ntccrt::dsl;
use ntccrt::fo::FactorOracle;
use ntccrt::models::ccfomi::{self, CcfomiConfig};
use ntccrt::models::graph_path::{self, GraphSpec, PathResult};
use ntccrt::models::knets::KnetProblem;
use ntccrt::ntcc::io::{error_line, header_line, parse_input_script, trace_value};
use ntccrt::ntcc::validate::Severity;
use ntccrt::ntcc::{EngineConfig, EngineError, TimedEngine};

#[derive(Parser)]
#[command(
    name = "ntccrt",
    version,
    about = "Run NTCC specs and the bundled models"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate a spec and print a JSON-lines trace.
    Run {
        spec: PathBuf,
        #[arg(long)]
        units: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON-lines input script.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Arguments for `main`, comma separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        args: Vec<i64>,
        /// Pad every unit to at least this many milliseconds.
        #[arg(long)]
        fixed_unit_ms: Option<u64>,
        /// Accept undelayed recursion, bounded by the per-unit budget.
        #[arg(long)]
        general_recursion: bool,
        /// Print 0 for `elapsed_us` so traces are reproducible byte for byte.
        #[arg(long)]
        zero_timing: bool,
    },
    /// Build a factor oracle and print its table.
    Fo {
        /// Symbols, comma separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        input: Vec<i64>,
        /// Also write Graphviz text to this file.
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Find a path between two vertices.
    GraphPath {
        /// Edge list, one `i j` per line.
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        from: u32,
        #[arg(long)]
        to: u32,
    },
    /// Enumerate k-net labelings of a pitch-class set.
    Knets {
        #[arg(long, value_delimiter = ',', required = true)]
        pitches: Vec<u8>,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long)]
        json: bool,
        /// Keep only labelings whose edges connect every pitch.
        #[arg(long)]
        connected: bool,
    },
    /// Learn a note sequence and improvise on it.
    Improvise {
        #[arg(long, value_delimiter = ',', required = true)]
        notes: Vec<i64>,
        /// Start after this many notes; defaults to all of them.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        q: f64,
        #[arg(long)]
        units: Option<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Time the bundled models.
    Bench {
        #[command(subcommand)]
        which: Bench,
    },
    /// Report patterns the engine rejects or mishandles.
    Lint { spec: PathBuf },
}

#[derive(Subcommand)]
enum Bench {
    Ccfomi {
        #[arg(long, default_value_t = 880)]
        processes_per_unit: u64,
        #[arg(long, default_value_t = 200)]
        units: u32,
    },
}

/// Failures carry their exit code: 1 at run time, 2 for bad input.
struct Fail(u8, String);

fn usage(msg: impl Into<String>) -> Fail {
    Fail(2, msg.into())
}

fn runtime(msg: impl Into<String>) -> Fail {
    Fail(1, msg.into())
}

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn io_fail(e: io::Error) -> Fail {
    runtime(format!("write failed: {e}"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let out = io::stdout();
    let mut out = out.lock();
    match dispatch(cli.cmd, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail(code, msg)) => {
            let _ = out.flush();
            if !msg.is_empty() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(code)
        }
    }
}

fn dispatch(cmd: Cmd, out: &mut impl Write) -> Result<(), Fail> {
    match cmd {
        Cmd::Run {
            spec,
            units,
            seed,
            input,
            args,
            fixed_unit_ms,
            general_recursion,
            zero_timing,
        } => {
            if units == 0 {
                return Err(usage("--units must be at least 1"));
            }
            let program = dsl::load(&read(&spec)?, &args)
                .map_err(|e| usage(format!("{}:{e}", spec.display())))?;
            let script = match input {
                Some(p) => parse_input_script(&read(&p)?).map_err(usage)?,
                None => Default::default(),
            };
            let config = EngineConfig {
                horizon: units,
                seed,
                general_recursion,
                fixed_unit: fixed_unit_ms.map(Duration::from_millis),
                ..EngineConfig::default()
            };
            let mut engine = TimedEngine::new(program, config).map_err(|e| usage(e.to_string()))?;
            engine.set_input(Box::new(move |tu, _| {
                script.get(&tu).cloned().unwrap_or_default()
            }));
            writeln!(out, "{}", header_line(seed, units)).map_err(io_fail)?;
            out.flush().map_err(io_fail)?;
            for _ in 0..units {
                match engine.run_time_unit() {
                    Ok(r) => {
                        let mut v = trace_value(&r);
                        if zero_timing {
                            v["elapsed_us"] = 0.into();
                        }
                        writeln!(out, "{v}").map_err(io_fail)?;
                        out.flush().map_err(io_fail)?;
                        if r.overrun {
                            eprintln!(
                                "warning: unit {} took {} us, over its {} ms slot",
                                r.tu,
                                r.elapsed_us,
                                fixed_unit_ms.unwrap_or(0)
                            );
                        }
                    }
                    Err(e) => {
                        writeln!(out, "{}", error_line(&e)).map_err(io_fail)?;
                        let code = match e {
                            EngineError::Input { .. } => 2,
                            _ => 1,
                        };
                        return Err(Fail(code, e.to_string()));
                    }
                }
            }
            Ok(())
        }
        Cmd::Fo { input, dot, json } => {
            let fo = FactorOracle::from_symbols(&input);
            if json {
                writeln!(out, "{}", fo.to_json()).map_err(io_fail)?;
            } else {
                write!(out, "{}", fo.table()).map_err(io_fail)?;
            }
            if let Some(p) = dot {
                fs::write(&p, fo.to_dot()).map_err(|e| runtime(format!("{}: {e}", p.display())))?;
            }
            Ok(())
        }
        Cmd::GraphPath { edges, from, to } => {
            let list = graph_path::parse_edges(&read(&edges)?)
                .map_err(|e| usage(format!("{}: {e}", edges.display())))?;
            let spec = GraphSpec::new(list, from, to);
            match graph_path::run(&spec).map_err(|e| runtime(e.to_string()))? {
                PathResult::Path(p) => {
                    let p: Vec<String> = p.iter().map(u32::to_string).collect();
                    writeln!(out, "path {}", p.join(" "))
                }
                PathResult::Unreachable => writeln!(out, "unreachable"),
            }
            .map_err(io_fail)
        }
        Cmd::Knets {
            pitches,
            k,
            limit,
            json,
            connected,
        } => {
            let problem = KnetProblem::new(pitches, k).map_err(|e| usage(e.to_string()))?;
            let sols = problem.solve(limit, connected);
            if json {
                let v = serde_json::to_string(&sols).expect("plain data");
                writeln!(out, "{v}").map_err(io_fail)?;
            } else {
                for (i, s) in sols.iter().enumerate() {
                    writeln!(out, "solution {}\n{}\n", i + 1, s.render()).map_err(io_fail)?;
                }
                writeln!(out, "{} solution(s)", sols.len()).map_err(io_fail)?;
            }
            Ok(())
        }
        Cmd::Improvise {
            notes,
            n,
            q,
            units,
            seed,
        } => {
            let mut cfg = CcfomiConfig::learn(&notes);
            cfg.q = q;
            cfg.seed = seed;
            if let Some(n) = n {
                cfg.n = n;
            }
            if let Some(u) = units {
                cfg.horizon = u;
            }
            cfg.validate().map_err(|e| usage(e.to_string()))?;
            let run = ccfomi::run(&cfg).map_err(|e| runtime(e.to_string()))?;
            write!(out, "{}", ccfomi::render_moves(&run.moves)).map_err(io_fail)?;
            let played: Vec<String> = run.output().iter().map(i64::to_string).collect();
            writeln!(out, "output {}", played.join(" ")).map_err(io_fail)
        }
        Cmd::Bench {
            which:
                Bench::Ccfomi {
                    processes_per_unit,
                    units,
                },
        } => {
            if units == 0 {
                return Err(usage("--units must be at least 1"));
            }
            let cfg = ccfomi::bench_config(processes_per_unit, units)
                .map_err(|e| runtime(e.to_string()))?;
            let run = ccfomi::run(&cfg).map_err(|e| runtime(e.to_string()))?;
            let notes = cfg.script.as_ref().map_or(0, Vec::len);
            writeln!(out, "units\t{units}").map_err(io_fail)?;
            writeln!(out, "notes\t{notes}").map_err(io_fail)?;
            writeln!(out, "scheduled/unit\t{:.1}", run.mean_scheduled).map_err(io_fail)?;
            writeln!(out, "mean ms/unit\t{:.3}", run.mean_us / 1000.0).map_err(io_fail)?;
            writeln!(out, "max ms/unit\t{:.3}", run.max_us as f64 / 1000.0).map_err(io_fail)
        }
        Cmd::Lint { spec } => {
            let ast =
                dsl::parse(&read(&spec)?).map_err(|e| usage(format!("{}:{e}", spec.display())))?;
            let found = dsl::lint(&ast);
            for v in &found {
                writeln!(out, "{v}").map_err(io_fail)?;
            }
            if found.iter().any(|v| v.severity == Severity::Error) {
                Err(runtime(""))
            } else {
                Ok(())
            }
        }
    }
}
