//! `emme`: enumerate, test and characterize SharedArrayBuffer programs.
//!
//! Exit status is 0 on success, 1 when the analysis finds something
//! (a violating output, a consistency failure) and 2 on usage or I/O errors.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use emme::axioms::check_model_consistency;
use emme::coverage::{default_predicates, parse_predicate_list, synthesize, CoverageError};
use emme::dot::emit_dot;
use emme::exec::{
    enumerate_with, EnumConfig, EnumError, ExecutionRecord, ValidExecution, DEFAULT_MAX_CANDIDATES,
};
use emme::frontend::{emit_source, parse, FrontendError, SourceProgram};
use emme::litmus::{
    classify, generate_litmus, ingest_observed, run_harness, EngineConfig, HarnessError,
    LitmusError, RunReport, Verdict,
};
use emme::progen::{enumerate_programs, sample_corpus, GenConfig, GenError};
use emme::program::{ModelError, Program};
use emme::value::ViewKind;

#[derive(Debug, Parser)]
#[command(
    name = "emme",
    version,
    about = "Exhaustive executions of JavaScript shared-memory programs"
)]
struct Cli {
    /// Directory for generated artifacts.
    #[arg(long, global = true, env = "EMME_OUT_DIR", default_value = "emme-out")]
    out: PathBuf,

    /// Worker threads for enumeration and engine runs (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    /// Give up after this many candidate checks per program.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_CANDIDATES)]
    max_candidates: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enumerate the valid executions of a program and write JSON and dot files.
    Run(ProgramArgs),
    /// Build a litmus test and classify engine runs or a log against it.
    Litmus(LitmusArgs),
    /// Synthesize coverage constraints for observed and unobserved outputs.
    Coverage(CoverageArgs),
    /// Write every program of a given size (or a seeded sample) as `.emme` files.
    Gen(GenArgs),
    /// Check the model's own assertions over all small programs.
    CheckModel(CheckModelArgs),
}

#[derive(Debug, Args)]
struct ProgramArgs {
    /// Program file: `.emme` source or program JSON.
    program: PathBuf,

    /// Parameter binding `name=value` for `$name` in the source; repeatable.
    #[arg(long = "param", value_name = "K=V", value_parser = parse_param)]
    params: Vec<(String, i128)>,
}

#[derive(Debug, Args)]
struct LitmusArgs {
    #[command(flatten)]
    input: ProgramArgs,

    /// Engine command run through `sh -c`; `{file}` is the test path, `{run}` the run number.
    #[arg(
        long,
        conflicts_with = "from_log",
        required_unless_present = "from_log"
    )]
    engine: Option<String>,

    /// Classify outputs recorded in a log file, one per line, instead of running an engine.
    #[arg(long, value_name = "FILE")]
    from_log: Option<PathBuf>,

    /// Number of engine runs.
    #[arg(long, default_value_t = 100)]
    runs: u64,

    /// Per-run timeout in seconds.
    #[arg(long, default_value_t = 30)]
    timeout: u64,
}

#[derive(Debug, Args)]
struct CoverageArgs {
    #[command(flatten)]
    input: ProgramArgs,

    /// Observed outputs: a `.report.json` from `emme litmus` or a log with one output per line.
    #[arg(long, value_name = "FILE")]
    observed: PathBuf,

    /// Predicate list, one id per line; defaults to the eleven built-in predicates.
    #[arg(long, value_name = "FILE")]
    predicates: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Memory events per program.
    #[arg(long, default_value_t = 3)]
    events: usize,

    /// Most threads per program.
    #[arg(long, default_value_t = 2)]
    threads: usize,

    /// Block sizes in bytes, comma separated; one block per entry.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    blocks: Vec<u32>,

    /// Views to draw from, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "I8,I16")]
    views: Vec<ViewKind>,

    /// Allow one `if` per thread.
    #[arg(long)]
    branches: bool,

    /// Keep programs that differ only by thread order or block names.
    #[arg(long)]
    no_dedupe: bool,

    /// Write a seeded sample of this many programs instead of the whole space.
    #[arg(long)]
    sample: Option<usize>,

    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct CheckModelArgs {
    /// Largest program size to check.
    #[arg(long, default_value_t = 4)]
    events: usize,
}

fn parse_param(s: &str) -> Result<(String, i128), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected K=V, got `{s}`"))?;
    let v = v.trim().parse().map_err(|e| format!("`{v}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Frontend {
        path: PathBuf,
        source: FrontendError,
    },
    #[error("{path}: {source}")]
    Model { path: PathBuf, source: ModelError },
    #[error(transparent)]
    Enum(#[from] EnumError),
    #[error(transparent)]
    Litmus(#[from] LitmusError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Coverage(#[from] CoverageError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error("cannot configure worker threads: {0}")]
    Pool(String),
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn load_program(args: &ProgramArgs) -> Result<Program, CliError> {
    let text = read(&args.program)?;
    if args.program.extension().is_some_and(|e| e == "json") {
        return Program::from_json(&text).map_err(|source| CliError::Model {
            path: args.program.clone(),
            source,
        });
    }
    let src = SourceProgram {
        text,
        params: args.params.iter().cloned().collect(),
    };
    parse(&src).map_err(|source| CliError::Frontend {
        path: args.program.clone(),
        source,
    })
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "program".into())
}

struct Session {
    out: PathBuf,
    jobs: usize,
    max_candidates: u64,
}

impl Session {
    fn executions(&self, p: &Program) -> Result<Vec<ValidExecution>, CliError> {
        let cfg = EnumConfig {
            max_candidates: self.max_candidates,
            ..EnumConfig::default()
        };
        Ok(enumerate_with(p, &cfg)?)
    }

    fn run(&self, args: &ProgramArgs) -> Result<ExitCode, CliError> {
        let p = load_program(args)?;
        let ve = self.executions(&p)?;
        let dir = self.out.join(stem(&args.program));
        let width = ve.len().to_string().len().max(3);
        let mut records = Vec::with_capacity(ve.len());
        for (i, x) in ve.iter().enumerate() {
            let record = ExecutionRecord::from_execution(&p, x);
            let name = format!("exec-{:0width$}", i + 1);
            write(&dir.join(format!("{name}.json")), json(&record))?;
            write(&dir.join(format!("{name}.dot")), emit_dot(&p, x))?;
            records.push(record);
        }
        write(&dir.join("executions.json"), json(&records))?;
        let outputs: BTreeSet<String> = ve.iter().map(|x| x.output_key(&p)).collect();
        println!(
            "{} valid executions, {} distinct outputs; written to {}",
            ve.len(),
            outputs.len(),
            dir.display()
        );
        for o in &outputs {
            println!("  {o}");
        }
        Ok(ExitCode::SUCCESS)
    }

    fn litmus(&self, args: &LitmusArgs) -> Result<ExitCode, CliError> {
        let p = load_program(&args.input)?;
        let ve = self.executions(&p)?;
        let test = generate_litmus(&p, &ve)?;
        let name = stem(&args.input.program);
        write(&self.out.join(format!("{name}.js")), &test.source)?;
        write(
            &self.out.join(format!("{name}.expected")),
            test.expected_file(),
        )?;
        let report = match (&args.engine, &args.from_log) {
            (_, Some(log)) => RunReport::new(ingest_observed(&read(log)?)?, &test.expected_outputs),
            (Some(engine), None) => {
                let cfg = EngineConfig {
                    command: engine.clone(),
                    timeout: Duration::from_secs(args.timeout),
                    jobs: if self.jobs == 0 {
                        rayon::current_num_threads()
                    } else {
                        self.jobs
                    },
                };
                run_harness(&cfg, &test, args.runs)?
            }
            (None, None) => unreachable!("clap requires --engine or --from-log"),
        };
        let class = classify(&report, &test.expected_outputs);
        let doc = serde_json::json!({ "report": report, "classification": class });
        write(&self.out.join(format!("{name}.report.json")), json(&doc))?;
        println!(
            "{:?}: {} runs, {} of {} expected outputs observed",
            class.verdict,
            report.runs,
            test.expected_outputs.len() - class.unobserved.len(),
            test.expected_outputs.len()
        );
        for v in &class.violations {
            println!("  violation: {v}");
        }
        Ok(if class.verdict == Verdict::Violation {
            ExitCode::from(1)
        } else {
            ExitCode::SUCCESS
        })
    }

    fn coverage(&self, args: &CoverageArgs) -> Result<ExitCode, CliError> {
        let p = load_program(&args.input)?;
        let ve = self.executions(&p)?;
        let preds = match &args.predicates {
            Some(path) => parse_predicate_list(&read(path)?)?,
            None => default_predicates(),
        };
        let text = read(&args.observed)?;
        let observed: BTreeSet<String> = match serde_json::from_str::<serde_json::Value>(&text) {
            Ok(doc) => {
                let report = doc.get("report").unwrap_or(&doc).clone();
                serde_json::from_value::<RunReport>(report)
                    .map_err(|e| CliError::Io {
                        path: args.observed.clone(),
                        source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
                    })?
                    .observed()
            }
            Err(_) => ingest_observed(&text)?.into_keys().collect(),
        };
        let valid: BTreeSet<String> = ve.iter().map(|x| x.output_key(&p)).collect();
        let (known, stray): (BTreeSet<String>, BTreeSet<String>) =
            observed.into_iter().partition(|o| valid.contains(o));
        let result = synthesize(&p, &ve, &known, &preds)?;
        let report = result.report();
        let name = stem(&args.input.program);
        let doc = serde_json::json!({ "coverage": report, "violations": stray });
        write(&self.out.join(format!("{name}.coverage.json")), json(&doc))?;
        println!("SIGMA_OBS   = {}", report.sigma_obs_text);
        println!("SIGMA_UNOBS = {}", report.sigma_unobs_text);
        println!(
            "obs -> !unobs: {}; shared literals: {}",
            report.comparison.obs_implies_not_unobs,
            report.comparison.shared_literals.join(", ")
        );
        for s in &stray {
            println!("  violation (ignored for synthesis): {s}");
        }
        Ok(if stray.is_empty() {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(1)
        })
    }

    fn gen(&self, args: &GenArgs) -> Result<ExitCode, CliError> {
        let cfg = GenConfig {
            event_count: args.events,
            max_threads: args.threads,
            blocks: args.blocks.clone(),
            views: args.views.clone(),
            allow_branches: args.branches,
            dedupe: !args.no_dedupe,
            ..GenConfig::default()
        };
        let programs: Vec<Program> = match args.sample {
            Some(n) => sample_corpus(&cfg, n, args.seed)?,
            None => enumerate_programs(&cfg)?.collect(),
        };
        let width = programs.len().to_string().len().max(4);
        for (i, p) in programs.iter().enumerate() {
            write(
                &self.out.join(format!("prog-{:0width$}.emme", i + 1)),
                emit_source(p),
            )?;
        }
        println!(
            "{} programs written to {}",
            programs.len(),
            self.out.display()
        );
        Ok(ExitCode::SUCCESS)
    }

    fn check_model(&self, args: &CheckModelArgs) -> Result<ExitCode, CliError> {
        let report = check_model_consistency(args.events);
        write(&self.out.join("consistency.json"), report.to_json())?;
        println!(
            "{} programs, {} candidates, {} witnesses, {} violations",
            report.programs,
            report.candidates,
            report.witnesses,
            report.violations.len()
        );
        Ok(if report.is_ok() {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(1)
        })
    }
}

fn run_command(cli: Cli) -> Result<ExitCode, CliError> {
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
            .map_err(|e| CliError::Pool(e.to_string()))?;
    }
    let session = Session {
        out: cli.out,
        jobs: cli.jobs,
        max_candidates: cli.max_candidates,
    };
    match &cli.command {
        Command::Run(a) => session.run(a),
        Command::Litmus(a) => session.litmus(a),
        Command::Coverage(a) => session.coverage(a),
        Command::Gen(a) => session.gen(a),
        Command::CheckModel(a) => session.check_model(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_command(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("emme: {e}");
            ExitCode::from(2)
        }
    }
}
