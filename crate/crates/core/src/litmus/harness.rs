use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use super::{LitmusTest, RunReport};

/// How to invoke a JavaScript engine on a test file.
///
/// `command` is run through `sh -c`; `{file}` is replaced by the path of the
/// generated test and `{run}` by the 0-based run number. The outcome of a run
/// is the last non-empty line the command prints on stdout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineConfig {
    pub command: String,
    pub timeout: Duration,
    pub jobs: usize,
}

impl EngineConfig {
    pub fn new(command: impl Into<String>) -> Self {
        EngineConfig {
            command: command.into(),
            timeout: Duration::from_secs(30),
            jobs: 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot write the test file: {0}")]
    Io(#[from] std::io::Error),
    #[error("run {run}: cannot launch `{command}`: {source}")]
    Launch {
        run: u64,
        command: String,
        source: std::io::Error,
    },
    #[error("run {run} timed out after {timeout:?}")]
    Timeout { run: u64, timeout: Duration },
    #[error("run {run} printed no outcome (exit {status}); stderr: {stderr}")]
    NoOutput {
        run: u64,
        status: String,
        stderr: String,
    },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

fn quote(path: &Path) -> String {
    format!("'{}'", path.display().to_string().replace('\'', r"'\''"))
}

fn run_once(cfg: &EngineConfig, file: &Path, run: u64) -> Result<String, HarnessError> {
    let command = cfg
        .command
        .replace("{file}", &quote(file))
        .replace("{run}", &run.to_string());
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&command)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|source| HarnessError::Launch {
            run,
            command: command.clone(),
            source,
        })?;
    let mut stdout = child.stdout.take().expect("piped stdout");
    let mut stderr = child.stderr.take().expect("piped stderr");
    let out_reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let err_reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });
    let deadline = Instant::now() + cfg.timeout;
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if Instant::now() >= deadline {
            let _ = child.kill();
            let _ = child.wait();
            return Err(HarnessError::Timeout {
                run,
                timeout: cfg.timeout,
            });
        }
        thread::sleep(Duration::from_millis(2));
    };
    let out = out_reader.join().unwrap_or_default();
    let err = err_reader.join().unwrap_or_default();
    match out.lines().map(str::trim).filter(|l| !l.is_empty()).last() {
        Some(line) => Ok(line.to_string()),
        None => Err(HarnessError::NoOutput {
            run,
            status: status.to_string(),
            stderr: err.trim().to_string(),
        }),
    }
}

/// Runs the engine `n` times on `t` and tallies the outcomes.
///
/// Outcomes that are not well-formed outputs are tallied verbatim, so they
/// show up as violations.
pub fn run_harness(cfg: &EngineConfig, t: &LitmusTest, n: u64) -> Result<RunReport, HarnessError> {
    let dir = tempfile::tempdir()?;
    let file = dir.path().join("litmus.js");
    std::fs::write(&file, &t.source)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    let outcomes: Vec<Result<String, HarnessError>> = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| run_once(cfg, &file, i))
            .collect()
    });
    let mut counts = BTreeMap::new();
    for o in outcomes {
        *counts.entry(o?).or_insert(0) += 1;
    }
    Ok(RunReport::new(counts, &t.expected_outputs))
}
