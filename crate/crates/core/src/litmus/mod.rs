//! Litmus tests: generation, observed-output ingestion and classification.
//!
//! A generated test runs every thread as a `$262.agent`, each agent reports
//! the values it read, and the main script prints the sorted, `;`-joined
//! outcome and asserts that it is one of the expected outputs. The expected
//! outputs are also embedded as a comment block that [`parse_expected_header`]
//! reads back.

mod harness;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{ValidExecution, EMPTY_OUTPUT};
use crate::program::{thread_steps, CmpOp, EventKind, MemoryEvent, Order, Program, Step};
use crate::value::{js_number_to_string, Literal, Value};

pub use harness::{run_harness, EngineConfig, HarnessError};

const TEMPLATE: &str = include_str!("template.js");
const HEADER_BEGIN: &str = "// EXPECTED-OUTPUTS-BEGIN";
const HEADER_END: &str = "// EXPECTED-OUTPUTS-END";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LitmusTest {
    pub source: String,
    pub expected_outputs: BTreeSet<String>,
}

impl LitmusTest {
    /// Contents of the `.expected` file: one output per line.
    pub fn expected_file(&self) -> String {
        self.expected_outputs
            .iter()
            .map(|o| format!("{o}\n"))
            .collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LitmusError {
    #[error("no valid executions to build a litmus test from")]
    EmptyExecutions,
    #[error("expected-output header is missing or unterminated")]
    MissingHeader,
    #[error("malformed output on line(s) {0:?}")]
    Malformed(Vec<usize>),
}

/// The distinct canonical outputs of `ve`.
pub fn expected_outputs(p: &Program, ve: &[ValidExecution]) -> BTreeSet<String> {
    ve.iter().map(|x| x.output_key(p)).collect()
}

fn block_offsets(p: &Program) -> (Vec<u32>, u32) {
    let mut offsets = Vec::with_capacity(p.blocks.len());
    let mut at = 0;
    for b in &p.blocks {
        offsets.push(at);
        at += b.size_bytes.div_ceil(8) * 8;
    }
    (offsets, at.max(8))
}

fn js_literal(e: &MemoryEvent, value: Value) -> String {
    match value {
        Value::Int(v) if e.view.is_bigint() => format!("{v}n"),
        Value::Int(v) => v.to_string(),
        Value::Float(x) => js_number_to_string(x),
    }
}

fn js_constant(c: Literal) -> String {
    match c {
        Literal::Int(v) => v.to_string(),
        Literal::Float(x) => js_number_to_string(x),
    }
}

/// Expression reading the event's location, or applying its RMW operator.
fn js_access(e: &MemoryEvent, offset: u32) -> String {
    let cell = format!("at({}, {})", e.view.js_array(), offset + e.range.byte_index);
    match e.kind {
        EventKind::ReadModifyWrite => format!(
            "Atomics.{}({cell}, 0, {})",
            e.modify.expect("modify op").js_method(),
            js_literal(e, e.view.normalize(e.payload.expect("operand")))
        ),
        _ if e.order == Order::SeqCst => format!("Atomics.load({cell}, 0)"),
        _ => format!("{cell}[0]"),
    }
}

fn agent_body(p: &Program, thread: usize, offsets: &[u32]) -> String {
    let mut body = String::new();
    let mut depth = 2;
    let mut conds = 0;
    let pad = |d: usize| "  ".repeat(d);
    for step in thread_steps(p, thread) {
        match step {
            Step::If(id, var) => {
                let e = p.event(id);
                let c = &p.control_vars[var.0];
                conds += 1;
                let name = format!("c{conds}");
                let _ = writeln!(
                    body,
                    "{}const {name} = {};",
                    pad(depth),
                    js_access(e, offsets[e.range.block])
                );
                let _ = writeln!(
                    body,
                    "{}out.push(\"{}:{}=\" + {name});",
                    pad(depth),
                    p.threads[thread].name,
                    e.name
                );
                let op = match c.op {
                    CmpOp::Eq => "==",
                    CmpOp::Ne => "!=",
                };
                let _ = writeln!(
                    body,
                    "{}if ({name} {op} {}) {{",
                    pad(depth),
                    js_constant(c.constant)
                );
                depth += 1;
            }
            Step::Else => {
                let _ = writeln!(body, "{}}} else {{", pad(depth - 1));
            }
            Step::EndIf => {
                depth -= 1;
                let _ = writeln!(body, "{}}}", pad(depth));
            }
            Step::Event(id) => {
                let e = p.event(id);
                let off = offsets[e.range.block];
                let line = if e.reads() {
                    format!(
                        "out.push(\"{}:{}=\" + {});",
                        p.threads[thread].name,
                        e.name,
                        js_access(e, off)
                    )
                } else {
                    let v = js_literal(e, e.view.normalize(e.payload.expect("write payload")));
                    let cell = format!("at({}, {})", e.view.js_array(), off + e.range.byte_index);
                    if e.order == Order::SeqCst {
                        format!("Atomics.store({cell}, 0, {v});")
                    } else {
                        format!("{cell}[0] = {v};")
                    }
                };
                let _ = writeln!(body, "{}{line}", pad(depth));
            }
        }
    }
    body
}

/// Builds a runnable test asserting that the outcome is one of `ve`'s outputs.
pub fn generate_litmus(p: &Program, ve: &[ValidExecution]) -> Result<LitmusTest, LitmusError> {
    if ve.is_empty() {
        return Err(LitmusError::EmptyExecutions);
    }
    let expected = expected_outputs(p, ve);
    let (offsets, total) = block_offsets(p);
    let mut agents = String::new();
    for (ti, t) in p.threads.iter().enumerate() {
        let _ = write!(
            agents,
            "\n// thread {name}\n$262.agent.start(`\n  $262.agent.receiveBroadcast(function (sab) {{\n    function at(T, off) {{ return new T(sab, off, 1); }}\n    const out = [];\n{body}    $262.agent.report(out.join(\";\"));\n    $262.agent.leaving();\n  }});\n`);\n",
            name = t.name,
            body = agent_body(p, ti, &offsets),
        );
    }
    let header: Vec<String> = expected.iter().map(|o| format!("// {o}")).collect();
    let array: Vec<String> = expected.iter().map(|o| format!("  {o:?}")).collect();
    let description = format!(
        "{} thread(s), {} event(s), {} expected output(s)",
        p.threads.len(),
        p.size(),
        expected.len()
    );
    let source = TEMPLATE
        .replace("{{DESCRIPTION}}", &description)
        .replace("{{EXPECTED_HEADER}}", &header.join("\n"))
        .replace("{{EXPECTED_ARRAY}}", &array.join(",\n"))
        .replace("{{AGENT_COUNT}}", &p.threads.len().to_string())
        .replace("{{BUFFER_BYTES}}", &total.to_string())
        .replace("{{AGENTS}}", &agents);
    Ok(LitmusTest {
        source,
        expected_outputs: expected,
    })
}

/// Reads the expected outputs back from a generated test.
pub fn parse_expected_header(source: &str) -> Result<BTreeSet<String>, LitmusError> {
    let mut lines = source.lines().skip_while(|l| l.trim() != HEADER_BEGIN);
    if lines.next().is_none() {
        return Err(LitmusError::MissingHeader);
    }
    let mut out = BTreeSet::new();
    for l in lines {
        let l = l.trim();
        if l == HEADER_END {
            return Ok(out);
        }
        out.insert(l.strip_prefix("//").unwrap_or(l).trim().to_string());
    }
    Err(LitmusError::MissingHeader)
}

/// Whether `line` has the shape of a canonical output.
pub fn is_output_line(line: &str) -> bool {
    if line == EMPTY_OUTPUT {
        return true;
    }
    let token = |s: &str| !s.is_empty() && !s.contains(|c: char| c.is_whitespace() || c == ';');
    line.split(';').all(|item| {
        let Some((thread, rest)) = item.split_once(':') else {
            return false;
        };
        let Some((event, value)) = rest.split_once('=') else {
            return false;
        };
        token(thread) && token(event) && token(value)
    })
}

/// Counts the outputs in a log with one canonical output per line.
///
/// Blank lines are skipped; any other line that is not an output makes the
/// whole log invalid and is reported by its 1-based line number.
pub fn ingest_observed(log: &str) -> Result<BTreeMap<String, u64>, LitmusError> {
    let mut counts = BTreeMap::new();
    let mut bad = Vec::new();
    for (i, line) in log.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if is_output_line(line) {
            *counts.entry(line.to_string()).or_insert(0) += 1;
        } else {
            bad.push(i + 1);
        }
    }
    if bad.is_empty() {
        Ok(counts)
    } else {
        Err(LitmusError::Malformed(bad))
    }
}

/// Observed outputs of a batch of runs against one test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub runs: u64,
    pub counts: BTreeMap<String, u64>,
    /// Observed outputs that are not expected.
    pub violations: Vec<String>,
    /// Share of expected outputs observed at least once.
    pub coverage_fraction: f64,
}

impl RunReport {
    pub fn new(counts: BTreeMap<String, u64>, expected: &BTreeSet<String>) -> Self {
        let violations = counts
            .keys()
            .filter(|o| !expected.contains(*o))
            .cloned()
            .collect();
        let hit = counts.keys().filter(|o| expected.contains(*o)).count();
        RunReport {
            runs: counts.values().sum(),
            counts,
            violations,
            coverage_fraction: if expected.is_empty() {
                0.0
            } else {
                hit as f64 / expected.len() as f64
            },
        }
    }

    pub fn observed(&self) -> BTreeSet<String> {
        self.counts.keys().cloned().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// Some observed output is not a valid execution.
    Violation,
    /// Every valid output was observed and nothing else.
    Exact,
    /// Only valid outputs were observed, but not all of them.
    Subset,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub violations: Vec<String>,
    pub unobserved: Vec<String>,
}

pub fn classify(report: &RunReport, expected: &BTreeSet<String>) -> Classification {
    let observed = report.observed();
    let violations: Vec<String> = observed.difference(expected).cloned().collect();
    let unobserved: Vec<String> = expected.difference(&observed).cloned().collect();
    let verdict = if !violations.is_empty() {
        Verdict::Violation
    } else if unobserved.is_empty() {
        Verdict::Exact
    } else {
        Verdict::Subset
    };
    Classification {
        verdict,
        violations,
        unobserved,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::enumerate_executions;
    use crate::frontend::parse_str;

    #[test]
    fn mixed_example_test() {
        let p = parse_str(crate::frontend::tests::MIXED).unwrap();
        let ve = enumerate_executions(&p).unwrap();
        let t = generate_litmus(&p, &ve).unwrap();
        assert!(
            t.expected_outputs.contains("t1:ev3=769;t2:ev4=0"),
            "{:?}",
            t.expected_outputs
        );
        assert!(
            t.expected_outputs.contains("t1:ev3=1;t2:ev4=1")
                || t.expected_outputs.iter().any(|o| o.ends_with("t2:ev4=1"))
        );
        assert_eq!(
            parse_expected_header(&t.source).unwrap(),
            t.expected_outputs
        );
        assert!(t.source.contains("if (c1 == 1) {"), "{}", t.source);
        assert!(t.source.contains("at(Int16Array, 0)[0]"));
    }

    #[test]
    fn atomics_and_bigint() {
        let p = parse_str(
            "var x = new SharedArrayBuffer(16);\nThread a { atomic x-I64[8] = 5; x-I32[0] += 2; }\nThread b { atomic print(x-I64[8]); }",
        )
        .unwrap();
        let t = generate_litmus(&p, &enumerate_executions(&p).unwrap()).unwrap();
        assert!(
            t.source
                .contains("Atomics.store(at(BigInt64Array, 8), 0, 5n);"),
            "{}",
            t.source
        );
        assert!(t.source.contains("Atomics.add(at(Int32Array, 0), 0, 2)"));
        assert!(t.source.contains("Atomics.load(at(BigInt64Array, 8), 0)"));
    }

    #[test]
    fn empty_ve_is_an_error() {
        let p =
            parse_str("var x = new SharedArrayBuffer();\nThread a { print(x-I8[0]); }").unwrap();
        assert_eq!(generate_litmus(&p, &[]), Err(LitmusError::EmptyExecutions));
    }

    #[test]
    fn ingest_counts_and_errors() {
        let log = "t1:ev2=1\n\nt1:ev2=1\n(none)\n";
        let c = ingest_observed(log).unwrap();
        assert_eq!(c["t1:ev2=1"], 2);
        assert_eq!(c["(none)"], 1);
        assert!(ingest_observed("").unwrap().is_empty());
        assert_eq!(
            ingest_observed("t1:ev2=1\ngarbage\nt1:ev2\n"),
            Err(LitmusError::Malformed(vec![2, 3]))
        );
    }

    #[test]
    fn verdicts() {
        let expected: BTreeSet<String> = ["a:e=1", "a:e=2"].into_iter().map(String::from).collect();
        let run = |outs: &[&str]| {
            let counts = outs.iter().map(|o| (o.to_string(), 1)).collect();
            classify(&RunReport::new(counts, &expected), &expected)
        };
        assert_eq!(run(&["a:e=1", "a:e=2"]).verdict, Verdict::Exact);
        let sub = run(&["a:e=1"]);
        assert_eq!(
            (sub.verdict, sub.unobserved),
            (Verdict::Subset, vec!["a:e=2".to_string()])
        );
        let bad = run(&["a:e=1", "a:e=3"]);
        assert_eq!(
            (bad.verdict, bad.violations),
            (Verdict::Violation, vec!["a:e=3".to_string()])
        );
        let r = RunReport::new([("a:e=1".to_string(), 3)].into_iter().collect(), &expected);
        assert_eq!(r.coverage_fraction, 0.5);
        assert_eq!(r.runs, 3);
    }
}
