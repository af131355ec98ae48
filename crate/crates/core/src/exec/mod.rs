//! Enumeration of all valid executions of a program.
//!
//! For each control valuation, the search walks the active reads in event
//! order and picks, for each, a complete byte-source assignment. Sources
//! that are already ruled out by agent order and the init edges are never
//! tried, synchronization edges are added to happens-before as soon as a
//! read is assigned, and a branch is abandoned once HB becomes cyclic or a
//! chosen source turns incoherent. Complete assignments are checked against
//! the full model.

pub mod values;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::axioms::{bits, Axioms, CandidateExecution, ExecutionWitness, Model};
use crate::program::{ControlValuation, EventId, Program};
use crate::relation::{BitRel, ByteSource, Relation3};
use crate::value::Value;

pub use values::{compose_write_event_bytes, decode_value, reconstruct_values, ValueError};

/// Default cap on search nodes visited per program.
pub const DEFAULT_MAX_CANDIDATES: u64 = 1_000_000;

/// Most control variables a program may have.
pub const MAX_CONTROL_VARS: usize = 20;

/// Text used for an execution that reads nothing.
pub const EMPTY_OUTPUT: &str = "(none)";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidExecution {
    pub cv: ControlValuation,
    pub witness: ExecutionWitness,
    /// Every active read and read-modify-write with the value it observed.
    pub output: Vec<(EventId, Value)>,
}

impl ValidExecution {
    fn from_witness(cv: ControlValuation, witness: ExecutionWitness) -> Self {
        let output = witness.values.iter().map(|(&e, &v)| (e, v)).collect();
        ValidExecution {
            cv,
            witness,
            output,
        }
    }

    /// Canonical output string: sorted `thread:event=value` items joined by `;`.
    pub fn output_key(&self, p: &Program) -> String {
        output_key(p, &self.output)
    }
}

pub fn output_key(p: &Program, output: &[(EventId, Value)]) -> String {
    if output.is_empty() {
        return EMPTY_OUTPUT.to_string();
    }
    let mut items: Vec<String> = output
        .iter()
        .map(|(e, v)| format!("{}:{}={}", p.thread_name(*e), p.event(*e).name, v))
        .collect();
    items.sort();
    items.join(";")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumConfig {
    pub max_candidates: u64,
    pub axioms: Axioms,
    /// Fan out over control valuations.
    pub parallel: bool,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig {
            max_candidates: DEFAULT_MAX_CANDIDATES,
            axioms: Axioms::default(),
            parallel: true,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumError {
    #[error("search exceeded {limit} candidate checks")]
    ResourceLimit { limit: u64 },
    #[error("program has {0} control variables; at most {MAX_CONTROL_VARS} are supported")]
    TooManyControlVars(usize),
}

/// Valuations where every variable whose condition read is inactive is false.
///
/// Such a variable cannot influence anything observable, so fixing it keeps
/// one valuation per distinct set of active events.
pub fn canonical_valuations(p: &Program) -> Result<Vec<ControlValuation>, EnumError> {
    let k = p.control_vars.len();
    if k > MAX_CONTROL_VARS {
        return Err(EnumError::TooManyControlVars(k));
    }
    Ok((0..1u32 << k)
        .map(|bits| ControlValuation((0..k).map(|i| bits >> i & 1 == 1).collect()))
        .filter(|cv| is_canonical(p, cv))
        .collect())
}

pub fn is_canonical(p: &Program, cv: &ControlValuation) -> bool {
    p.control_vars
        .iter()
        .zip(&cv.0)
        .all(|(var, &value)| !value || p.event(var.read).guard.holds(cv))
}

/// All valid executions under the default configuration.
pub fn enumerate_executions(p: &Program) -> Result<Vec<ValidExecution>, EnumError> {
    enumerate_with(p, &EnumConfig::default())
}

/// All valid executions, sorted by control valuation then RBF.
pub fn enumerate_with(p: &Program, cfg: &EnumConfig) -> Result<Vec<ValidExecution>, EnumError> {
    let cvs = canonical_valuations(p)?;
    let model = Model::new(p);
    let budget = AtomicU64::new(0);
    let search = |cv: &ControlValuation| Search::new(&model, cfg, cv, &budget).run();
    let parts: Vec<Result<Vec<ValidExecution>, EnumError>> = if cfg.parallel {
        cvs.par_iter().map(search).collect()
    } else {
        cvs.iter().map(search).collect()
    };
    let mut out = Vec::new();
    for part in parts {
        out.extend(part?);
    }
    out.sort_by(|a, b| (&a.cv, &a.witness.rbf).cmp(&(&b.cv, &b.witness.rbf)));
    out.dedup_by(|a, b| a.cv == b.cv && a.witness.rbf == b.witness.rbf);
    Ok(out)
}

/// One complete byte-source choice for a single read.
struct Choice {
    sources: Vec<ByteSource>,
    sw: u64,
}

struct Search<'a, 'p> {
    model: &'a Model<'p>,
    cfg: &'a EnumConfig,
    cv: &'a ControlValuation,
    mask: u64,
    hb0: BitRel,
    prune: bool,
    reads: Vec<usize>,
    choices: Vec<Vec<Choice>>,
    budget: &'a AtomicU64,
}

impl<'a, 'p> Search<'a, 'p> {
    fn new(
        model: &'a Model<'p>,
        cfg: &'a EnumConfig,
        cv: &'a ControlValuation,
        budget: &'a AtomicU64,
    ) -> Self {
        let mask = model.p.active_mask(cv);
        let hb0 = model.hb0(mask);
        // a negated axiom turns pruning from sound into wrong
        let prune = cfg.axioms.negated.is_none();
        let reads: Vec<usize> = bits(mask & model.readers).collect();
        let mut s = Search {
            model,
            cfg,
            cv,
            mask,
            hb0,
            prune,
            reads,
            choices: Vec::new(),
            budget,
        };
        s.choices = s.reads.iter().map(|&r| s.choices_for(r)).collect();
        s
    }

    fn choices_for(&self, r: usize) -> Vec<Choice> {
        let m = self.model;
        let range = m.p.events[r].range;
        let per_byte: Vec<Vec<usize>> = range
            .bytes()
            .map(|i| {
                bits(m.byte_writers[range.block][i as usize] & self.mask & !(1 << r))
                    .filter(|&w| !self.prune || m.coherent(&self.hb0, self.mask, r, w, i))
                    .collect()
            })
            .collect();
        let mut out = Vec::new();
        let mut pick = vec![0usize; per_byte.len()];
        if per_byte.iter().any(Vec::is_empty) {
            return out;
        }
        loop {
            let writers = pick
                .iter()
                .zip(&per_byte)
                .fold(0u64, |acc, (&k, ws)| acc | 1 << ws[k]);
            if !self.prune || m.tear_free(r, writers) {
                out.push(Choice {
                    sources: pick
                        .iter()
                        .zip(&per_byte)
                        .zip(range.bytes())
                        .map(|((&k, ws), byte)| ByteSource {
                            read: EventId(r),
                            write: EventId(ws[k]),
                            byte,
                        })
                        .collect(),
                    sw: m.sw_sources(r, writers),
                });
            }
            // odometer
            let mut d = 0;
            loop {
                if d == pick.len() {
                    return out;
                }
                pick[d] += 1;
                if pick[d] < per_byte[d].len() {
                    break;
                }
                pick[d] = 0;
                d += 1;
            }
        }
    }

    fn run(&self) -> Result<Vec<ValidExecution>, EnumError> {
        let mut out = Vec::new();
        let mut chosen = Vec::with_capacity(self.reads.len());
        self.descend(&self.hb0, &mut chosen, &mut out)?;
        Ok(out)
    }

    fn chosen<'s>(&'s self, chosen: &'s [usize]) -> impl Iterator<Item = &'s Choice> + 's {
        chosen.iter().enumerate().map(|(k, &c)| &self.choices[k][c])
    }

    fn descend(
        &self,
        hb: &BitRel,
        chosen: &mut Vec<usize>,
        out: &mut Vec<ValidExecution>,
    ) -> Result<(), EnumError> {
        let limit = self.cfg.max_candidates;
        if self.budget.fetch_add(1, Ordering::Relaxed) >= limit {
            return Err(EnumError::ResourceLimit { limit });
        }
        let k = chosen.len();
        if k == self.reads.len() {
            let rbf = Relation3(
                self.chosen(chosen)
                    .flat_map(|c| c.sources.iter().copied())
                    .collect(),
            );
            if let Ok(w) =
                self.model
                    .evaluate(&self.cfg.axioms, self.cv, self.mask, &self.hb0, &rbf)
            {
                out.push(ValidExecution::from_witness(self.cv.clone(), w));
            }
            return Ok(());
        }
        let r = self.reads[k];
        for (i, c) in self.choices[k].iter().enumerate() {
            let mut next = hb.clone();
            for w in bits(c.sw) {
                next.add_closed(w, r);
            }
            chosen.push(i);
            if !self.prune || self.still_coherent(&next, chosen) {
                self.descend(&next, chosen, out)?;
            }
            chosen.pop();
        }
        Ok(())
    }

    fn still_coherent(&self, hb: &BitRel, chosen: &[usize]) -> bool {
        !hb.has_self_loop()
            && self.chosen(chosen).all(|c| {
                c.sources.iter().all(|t| {
                    self.model
                        .coherent(hb, self.mask, t.read.0, t.write.0, t.byte)
                })
            })
    }
}

/// Re-checks a stored execution against the model.
pub fn revalidate(p: &Program, x: &ValidExecution) -> bool {
    let ce = CandidateExecution::new(p, x.cv.clone(), x.witness.rbf.clone());
    crate::axioms::is_valid_execution(&ce).is_some_and(|w| w.values == x.witness.values)
}

/// JSON interchange form of one execution, keyed by event and variable names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionRecord {
    pub control: BTreeMap<String, bool>,
    pub rbf: Vec<RbfRecord>,
    pub rf: Vec<[String; 2]>,
    pub sw: Vec<[String; 2]>,
    pub hb: Vec<[String; 2]>,
    pub mo: Vec<String>,
    pub values: BTreeMap<String, String>,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RbfRecord {
    pub read: String,
    pub write: String,
    pub byte: u32,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecordError {
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("unknown control variable `{0}`")]
    UnknownVariable(String),
    #[error("control variable `{0}` has no value")]
    MissingVariable(String),
    #[error("the recorded execution is not valid for this program")]
    NotValid,
    #[error("recorded {0} disagrees with the recomputed execution")]
    Mismatch(&'static str),
}

impl ExecutionRecord {
    pub fn from_execution(p: &Program, x: &ValidExecution) -> Self {
        let name = |e: EventId| p.event(e).name.clone();
        let pairs =
            |r: &crate::relation::Relation2| r.iter().map(|(a, b)| [name(a), name(b)]).collect();
        ExecutionRecord {
            control: p
                .control_vars
                .iter()
                .zip(&x.cv.0)
                .map(|(v, &b)| (v.name.clone(), b))
                .collect(),
            rbf: x
                .witness
                .rbf
                .iter()
                .map(|t| RbfRecord {
                    read: name(t.read),
                    write: name(t.write),
                    byte: t.byte,
                })
                .collect(),
            rf: pairs(&x.witness.rf),
            sw: pairs(&x.witness.sw),
            hb: pairs(&x.witness.hb),
            mo: x.witness.mo.iter().map(|&e| name(e)).collect(),
            values: x
                .output
                .iter()
                .map(|(e, v)| (name(*e), v.to_string()))
                .collect(),
            output: x.output_key(p),
        }
    }

    /// Rebuilds the execution, re-deriving every relation from the RBF.
    pub fn to_execution(&self, p: &Program) -> Result<ValidExecution, RecordError> {
        let id = |n: &str| {
            p.event_by_name(n)
                .map(|e| e.id)
                .ok_or_else(|| RecordError::UnknownEvent(n.to_string()))
        };
        for k in self.control.keys() {
            if p.control_var_by_name(k).is_none() {
                return Err(RecordError::UnknownVariable(k.clone()));
            }
        }
        let cv = ControlValuation(
            p.control_vars
                .iter()
                .map(|v| {
                    self.control
                        .get(&v.name)
                        .copied()
                        .ok_or_else(|| RecordError::MissingVariable(v.name.clone()))
                })
                .collect::<Result<_, _>>()?,
        );
        let mut rbf = Relation3::new();
        for t in &self.rbf {
            rbf.insert(id(&t.read)?, id(&t.write)?, t.byte);
        }
        let ce = CandidateExecution::new(p, cv.clone(), rbf);
        let w = crate::axioms::is_valid_execution(&ce).ok_or(RecordError::NotValid)?;
        let x = ValidExecution::from_witness(cv, w);
        let fresh = ExecutionRecord::from_execution(p, &x);
        if fresh.values != self.values {
            return Err(RecordError::Mismatch("values"));
        }
        if fresh.output != self.output {
            return Err(RecordError::Mismatch("output"));
        }
        Ok(x)
    }
}
