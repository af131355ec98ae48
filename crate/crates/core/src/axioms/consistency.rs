//! Bounded consistency check of the axioms over generated programs.
//!
//! Every candidate of every program in the space is evaluated conjunct by
//! conjunct. A program without valid executions is blamed on the conjunct
//! that first makes the ordered conjunction unsatisfiable, i.e. the latest
//! first-failing conjunct over all its candidates.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{bits, Axioms, Conjunct, ExecutionWitness, Model};
use crate::exec::{canonical_valuations, RbfRecord};
use crate::frontend::emit_source;
use crate::progen::{GenConfig, GenError, ProgramSpace};
use crate::program::{ControlValuation, EventId, Program};
use crate::relation::{ByteSource, Relation3};

pub const DEFAULT_CONSISTENCY_BOUND: usize = 5;

/// A property every witness must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Assertion {
    HbStrictPartialOrder,
    MoTotal,
    MoExtendsHb,
    SwInHb,
    RfProjection,
}

impl Assertion {
    pub const ALL: [Assertion; 5] = [
        Assertion::HbStrictPartialOrder,
        Assertion::MoTotal,
        Assertion::MoExtendsHb,
        Assertion::SwInHb,
        Assertion::RfProjection,
    ];

    pub fn holds(self, p: &Program, cv: &ControlValuation, w: &ExecutionWitness) -> bool {
        match self {
            Assertion::HbStrictPartialOrder => w.hb.is_irreflexive() && w.hb.is_transitive(),
            Assertion::MoTotal => {
                let mut mo = w.mo.clone();
                mo.sort();
                let before = mo.len();
                mo.dedup();
                let sc: Vec<EventId> = p
                    .events
                    .iter()
                    .filter(|e| e.is_seq_cst() && e.guard.holds(cv))
                    .map(|e| e.id)
                    .collect();
                before == mo.len() && mo == sc
            }
            Assertion::MoExtendsHb => {
                let mo = w.mo_relation();
                w.hb.iter()
                    .filter(|&(a, b)| p.event(a).is_seq_cst() && p.event(b).is_seq_cst())
                    .all(|(a, b)| mo.contains(a, b))
            }
            Assertion::SwInHb => w.sw.is_subset(&w.hb),
            Assertion::RfProjection => w.rf == super::derive_rf(&w.rbf),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConsistencyConfig {
    /// Program space; its event count is replaced by each size up to the bound.
    pub space: GenConfig,
    pub axioms: Axioms,
}

impl Default for ConsistencyConfig {
    fn default() -> Self {
        ConsistencyConfig {
            space: GenConfig::default(),
            axioms: Axioms::default(),
        }
    }
}

/// One failure: either a program without valid executions or a witness
/// breaking an assertion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyViolation {
    pub program: String,
    /// Set when the program has no valid execution.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conjunct: Option<Conjunct>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assertion: Option<Assertion>,
    pub control: BTreeMap<String, bool>,
    pub rbf: Vec<RbfRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub bound: usize,
    pub programs: u64,
    pub candidates: u64,
    pub witnesses: u64,
    pub violations: Vec<ConsistencyViolation>,
}

impl ConsistencyReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    fn merge(mut self, other: ConsistencyReport) -> Self {
        self.programs += other.programs;
        self.candidates += other.candidates;
        self.witnesses += other.witnesses;
        self.violations.extend(other.violations);
        self
    }
}

/// Checks the default program space with every size from 1 to `bound`.
pub fn check_model_consistency(bound: usize) -> ConsistencyReport {
    check_space(&ConsistencyConfig::default(), bound).expect("default space is valid")
}

pub fn check_space(cfg: &ConsistencyConfig, bound: usize) -> Result<ConsistencyReport, GenError> {
    let mut report = ConsistencyReport {
        bound,
        programs: 0,
        candidates: 0,
        witnesses: 0,
        violations: Vec::new(),
    };
    for n in 1..=bound {
        let space = ProgramSpace::new(&cfg.space.clone().with_events(n))?;
        let total = u64::try_from(space.raw_len())
            .map_err(|_| GenError::Config("space too large".into()))?;
        let part = (0..total)
            .into_par_iter()
            .filter_map(|i| space.decode(i.into()))
            .filter(|s| !cfg.space.dedupe || space.is_canonical(s))
            .map(|s| check_program(&space.build(&s), &cfg.axioms))
            .reduce(|| empty(bound), ConsistencyReport::merge);
        report = report.merge(part);
    }
    report.violations.sort_by(|a, b| a.program.cmp(&b.program));
    Ok(report)
}

fn empty(bound: usize) -> ConsistencyReport {
    ConsistencyReport {
        bound,
        programs: 0,
        candidates: 0,
        witnesses: 0,
        violations: Vec::new(),
    }
}

fn violation(
    p: &Program,
    cv: &ControlValuation,
    rbf: &Relation3,
    conjunct: Option<Conjunct>,
    assertion: Option<Assertion>,
) -> ConsistencyViolation {
    ConsistencyViolation {
        program: emit_source(p),
        conjunct,
        assertion,
        control: p
            .control_vars
            .iter()
            .zip(&cv.0)
            .map(|(v, &b)| (v.name.clone(), b))
            .collect(),
        rbf: rbf
            .iter()
            .map(|t| RbfRecord {
                read: p.event(t.read).name.clone(),
                write: p.event(t.write).name.clone(),
                byte: t.byte,
            })
            .collect(),
    }
}

/// Evaluates every well-formed candidate of one program.
pub fn check_program(p: &Program, axioms: &Axioms) -> ConsistencyReport {
    let m = Model::new(p);
    let mut report = empty(0);
    report.programs = 1;
    let mut furthest: Option<(Conjunct, ControlValuation, Relation3)> = None;
    for cv in canonical_valuations(p).expect("generated programs have few branches") {
        let mask = p.active_mask(&cv);
        let hb0 = m.hb0(mask);
        let per_read: Vec<Vec<Vec<ByteSource>>> = bits(mask & m.readers)
            .map(|r| {
                let range = p.events[r].range;
                let mut opts: Vec<Vec<ByteSource>> = vec![Vec::new()];
                for byte in range.bytes() {
                    let ws = m.byte_writers[range.block][byte as usize] & mask & !(1 << r);
                    opts = opts
                        .into_iter()
                        .flat_map(|prefix| {
                            bits(ws).map(move |w| {
                                let mut next = prefix.clone();
                                next.push(ByteSource {
                                    read: EventId(r),
                                    write: EventId(w),
                                    byte,
                                });
                                next
                            })
                        })
                        .collect();
                }
                opts
            })
            .collect();
        if per_read.iter().any(Vec::is_empty) {
            continue;
        }
        let mut pick = vec![0usize; per_read.len()];
        loop {
            let rbf = Relation3(
                pick.iter()
                    .zip(&per_read)
                    .flat_map(|(&k, opts)| opts[k].iter().copied())
                    .collect(),
            );
            report.candidates += 1;
            match m.evaluate(axioms, &cv, mask, &hb0, &rbf) {
                Ok(w) => {
                    report.witnesses += 1;
                    if let Some(a) = Assertion::ALL.into_iter().find(|a| !a.holds(p, &cv, &w)) {
                        report
                            .violations
                            .push(violation(p, &cv, &rbf, None, Some(a)));
                    }
                }
                Err(c) => {
                    if furthest.as_ref().map_or(true, |(best, _, _)| c > *best) {
                        furthest = Some((c, cv.clone(), rbf));
                    }
                }
            }
            let mut d = 0;
            while d < pick.len() {
                pick[d] += 1;
                if pick[d] < per_read[d].len() {
                    break;
                }
                pick[d] = 0;
                d += 1;
            }
            if d == pick.len() {
                break;
            }
        }
    }
    if report.witnesses == 0 {
        let (c, cv, rbf) =
            furthest.unwrap_or((Conjunct::Rbf, ControlValuation::default(), Relation3::new()));
        report
            .violations
            .push(violation(p, &cv, &rbf, Some(c), None));
    }
    report
}
