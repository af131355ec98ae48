//! The memory-model formula and its derived relations.
//!
//! A candidate execution fixes a control valuation and the Reads-Bytes-From
//! relation. Everything else is derived from those in a fixed order:
//! RF from RBF, SW from RF, HB from AO, SW and the init edges, and finally a
//! memory order over the seq-cst events, searched for constructively. The
//! candidate is valid when reads are coherent, non-tear reads do not tear,
//! and a conforming memory order exists.

mod consistency;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::values::reconstruct_values;
use crate::program::{CmpOp, ControlValuation, EventId, Program};
use crate::relation::{BitRel, Relation2, Relation3};
use crate::value::Value;

pub use consistency::{
    check_model_consistency, check_space, Assertion, ConsistencyConfig, ConsistencyReport,
    ConsistencyViolation, DEFAULT_CONSISTENCY_BOUND,
};

/// One conjunct of the validity check, in evaluation order.
///
/// `Values` rejects read-modify-writes that source each other's values and
/// `Control` rejects valuations contradicted by the condition reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Conjunct {
    #[serde(rename = "RBF")]
    Rbf,
    #[serde(rename = "HB")]
    Hb,
    #[serde(rename = "CR")]
    Cr,
    #[serde(rename = "TFR")]
    Tfr,
    #[serde(rename = "SCA")]
    Sca,
    #[serde(rename = "VALUES")]
    Values,
    #[serde(rename = "CONTROL")]
    Control,
}

impl Conjunct {
    pub const ALL: [Conjunct; 7] = [
        Conjunct::Rbf,
        Conjunct::Hb,
        Conjunct::Cr,
        Conjunct::Tfr,
        Conjunct::Sca,
        Conjunct::Values,
        Conjunct::Control,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Conjunct::Rbf => "RBF",
            Conjunct::Hb => "HB",
            Conjunct::Cr => "CR",
            Conjunct::Tfr => "TFR",
            Conjunct::Sca => "SCA",
            Conjunct::Values => "VALUES",
            Conjunct::Control => "CONTROL",
        }
    }

    /// Only the three axioms of the formula proper can be negated.
    pub fn negatable(self) -> bool {
        matches!(self, Conjunct::Cr | Conjunct::Tfr | Conjunct::Sca)
    }
}

impl fmt::Display for Conjunct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Conjunct {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Conjunct::ALL
            .into_iter()
            .find(|c| c.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown conjunct `{s}`"))
    }
}

/// Which axioms are in force. The default is the model itself; negating a
/// conjunct is a fault-injection hook for the consistency check.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Axioms {
    pub negated: Option<Conjunct>,
}

impl Axioms {
    pub fn negating(c: Conjunct) -> Self {
        assert!(c.negatable(), "{c} cannot be negated");
        Axioms { negated: Some(c) }
    }

    fn require(&self, c: Conjunct, holds: bool) -> Result<(), Conjunct> {
        if holds != (self.negated == Some(c)) {
            Ok(())
        } else {
            Err(c)
        }
    }

    /// Evaluates every conjunct in order and returns the first that fails.
    pub fn check(&self, ce: &CandidateExecution) -> Result<ExecutionWitness, Conjunct> {
        let p = ce.program;
        if ce.cv.0.len() != p.control_vars.len() {
            return Err(Conjunct::Rbf);
        }
        let m = Model::new(p);
        let mask = p.active_mask(&ce.cv);
        if !m.well_formed(mask, &ce.rbf) {
            return Err(Conjunct::Rbf);
        }
        m.evaluate(self, &ce.cv, mask, &m.hb0(mask), &ce.rbf)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateExecution<'p> {
    pub program: &'p Program,
    pub cv: ControlValuation,
    pub rbf: Relation3,
}

impl<'p> CandidateExecution<'p> {
    pub fn new(program: &'p Program, cv: ControlValuation, rbf: Relation3) -> Self {
        CandidateExecution { program, cv, rbf }
    }
}

/// A validated execution together with every derived relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExecutionWitness {
    pub rbf: Relation3,
    pub rf: Relation2,
    pub sw: Relation2,
    pub hb: Relation2,
    /// Seq-cst events in memory order.
    pub mo: Vec<EventId>,
    /// Value observed by each active read and read-modify-write.
    pub values: BTreeMap<EventId, Value>,
}

impl ExecutionWitness {
    /// `mo` as a relation: every earlier event before every later one.
    pub fn mo_relation(&self) -> Relation2 {
        let mut out = Relation2::new();
        for (i, &a) in self.mo.iter().enumerate() {
            for &b in &self.mo[i + 1..] {
                out.insert(a, b);
            }
        }
        out
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("happens-before is cyclic through {event}")]
pub struct CycleError {
    pub event: EventId,
}

/// Drops the byte component of every triple.
pub fn derive_rf(rbf: &Relation3) -> Relation2 {
    rbf.iter().map(|t| (t.read, t.write)).collect()
}

/// Synchronizes-with edges `(w, r)` induced by `rf`.
///
/// A seq-cst read synchronizes with a seq-cst writer of exactly its range,
/// or with the init write when every byte it reads comes from init.
pub fn derive_sw(ce: &CandidateExecution, rf: &Relation2) -> Relation2 {
    let m = Model::new(ce.program);
    let mut rows = vec![0u64; m.n];
    for (r, w) in rf.iter() {
        rows[r.0] |= 1 << w.0;
    }
    let mut sw = Relation2::new();
    for (r, &writers) in rows.iter().enumerate() {
        for w in bits(m.sw_sources(r, writers)) {
            sw.insert(EventId(w), EventId(r));
        }
    }
    sw
}

/// Closure of agent order, `sw` and the init edges over distinct active events.
pub fn derive_hb(
    p: &Program,
    cv: &ControlValuation,
    sw: &Relation2,
) -> Result<Relation2, CycleError> {
    let m = Model::new(p);
    let mask = p.active_mask(cv);
    let mut hb = m.hb0(mask);
    for (w, r) in sw.iter() {
        if mask >> w.0 & 1 == 1 && mask >> r.0 & 1 == 1 {
            hb.add_closed(w.0, r.0);
        }
    }
    match (0..m.n).find(|&i| hb.get(i, i)) {
        Some(i) => Err(CycleError { event: EventId(i) }),
        None => Ok(hb.to_relation()),
    }
}

/// A memory order over the active seq-cst events, if one exists.
pub fn mo_witness(
    p: &Program,
    cv: &ControlValuation,
    hb: &Relation2,
    sw: &Relation2,
) -> Option<Vec<EventId>> {
    let m = Model::new(p);
    let mask = p.active_mask(cv);
    let mut rel = BitRel::new(m.n);
    for (a, b) in hb.iter() {
        rel.set(a.0, b.0);
    }
    let sw: Vec<(usize, usize)> = sw.iter().map(|(w, r)| (w.0, r.0)).collect();
    m.mo_search(mask, &rel, &sw)
        .map(|order| order.into_iter().map(EventId).collect())
}

/// Whether every byte is read from a write that is neither HB-after the read
/// nor hidden behind another write to that byte.
pub fn coherent_reads(ce: &CandidateExecution, hb: &Relation2) -> bool {
    let m = Model::new(ce.program);
    let mask = ce.program.active_mask(&ce.cv);
    let mut rel = BitRel::new(m.n);
    for (a, b) in hb.iter() {
        rel.set(a.0, b.0);
    }
    ce.rbf
        .iter()
        .all(|t| m.coherent(&rel, mask, t.read.0, t.write.0, t.byte))
}

/// Whether no non-tear read mixes two non-tear writers of exactly its range.
pub fn tear_free_reads(ce: &CandidateExecution, rf: &Relation2) -> bool {
    let m = Model::new(ce.program);
    let mut rows = vec![0u64; m.n];
    for (r, w) in rf.iter() {
        rows[r.0] |= 1 << w.0;
    }
    rows.iter().enumerate().all(|(r, &w)| m.tear_free(r, w))
}

/// The full witness when `ce` satisfies the model.
pub fn is_valid_execution(ce: &CandidateExecution) -> Option<ExecutionWitness> {
    Axioms::default().check(ce).ok()
}

/// Whether the condition of control variable `var` holds for the observed value.
pub(crate) fn condition_holds(op: CmpOp, observed: Value, constant: crate::value::Literal) -> bool {
    let eq = observed.loosely_equals(constant);
    match op {
        CmpOp::Eq => eq,
        CmpOp::Ne => !eq,
    }
}

pub(crate) fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            return None;
        }
        let b = m.trailing_zeros() as usize;
        m &= m - 1;
        Some(b)
    })
}

/// Per-program tables backing the checks above.
pub(crate) struct Model<'p> {
    pub p: &'p Program,
    pub n: usize,
    /// Direct agent-order and init edges.
    base: Vec<u64>,
    pub sc: u64,
    pub init: u64,
    pub writers: u64,
    pub readers: u64,
    tear: u64,
    /// `byte_writers[block][byte]`: every writer covering that byte.
    pub byte_writers: Vec<Vec<u64>>,
}

impl<'p> Model<'p> {
    pub fn new(p: &'p Program) -> Self {
        let n = p.events.len();
        assert!(n <= 64, "at most 64 events are supported");
        let mut base = vec![0u64; n];
        let mut byte_writers: Vec<Vec<u64>> = p
            .blocks
            .iter()
            .map(|b| vec![0; b.size_bytes as usize])
            .collect();
        let (mut sc, mut init, mut writers, mut readers, mut tear) = (0, 0, 0, 0, 0);
        for t in &p.threads {
            for (i, a) in t.events.iter().enumerate() {
                for b in &t.events[i + 1..] {
                    base[a.0] |= 1 << b.0;
                }
            }
        }
        for e in &p.events {
            let bit = 1u64 << e.id.0;
            if e.is_seq_cst() {
                sc |= bit;
            }
            if e.is_init() {
                init |= bit;
                for o in p.program_events() {
                    if o.range.overlaps(&e.range) {
                        base[e.id.0] |= 1 << o.id.0;
                    }
                }
            }
            if e.writes() || e.is_init() {
                writers |= bit;
                for b in e.range.bytes() {
                    byte_writers[e.range.block][b as usize] |= bit;
                }
            }
            if e.reads() {
                readers |= bit;
            }
            if e.tear {
                tear |= bit;
            }
        }
        Model {
            p,
            n,
            base,
            sc,
            init,
            writers,
            readers,
            tear,
            byte_writers,
        }
    }

    /// Happens-before before any synchronization: closed AO plus init edges.
    pub fn hb0(&self, mask: u64) -> BitRel {
        let mut hb = BitRel::new(self.n);
        for a in bits(mask) {
            for b in bits(self.base[a] & mask) {
                hb.set(a, b);
            }
        }
        hb.close();
        hb
    }

    /// Writers that `r` synchronizes with, given the set it reads from.
    pub fn sw_sources(&self, r: usize, writers: u64) -> u64 {
        if writers == 0 || self.sc >> r & 1 == 0 {
            return 0;
        }
        if writers & !self.init == 0 {
            return writers;
        }
        let range = self.p.events[r].range;
        let mut out = 0;
        for w in bits(writers & self.sc & !(1 << r)) {
            if self.p.events[w].range == range {
                out |= 1 << w;
            }
        }
        out
    }

    pub fn coherent(&self, hb: &BitRel, mask: u64, r: usize, w: usize, byte: u32) -> bool {
        if hb.get(r, w) {
            return false;
        }
        let block = self.p.events[r].range.block;
        let between =
            self.byte_writers[block][byte as usize] & mask & hb.row(w) & !(1 << w) & !(1 << r);
        bits(between).all(|v| !hb.get(v, r))
    }

    pub fn tear_free(&self, r: usize, writers: u64) -> bool {
        if writers == 0 || self.tear >> r & 1 == 1 {
            return true;
        }
        let range = self.p.events[r].range;
        bits(writers & !self.tear)
            .filter(|&w| self.p.events[w].range == range)
            .count()
            < 2
    }

    /// Depth-first search for a linear extension of HB on the seq-cst events
    /// that places no seq-cst write to the read's exact range between a
    /// synchronizing pair.
    pub fn mo_search(&self, mask: u64, hb: &BitRel, sw: &[(usize, usize)]) -> Option<Vec<usize>> {
        let events = mask & self.sc;
        let mut preds = vec![0u64; self.n];
        for a in bits(events) {
            for b in bits(hb.row(a) & events) {
                preds[b] |= 1 << a;
            }
        }
        // (w, r, v): v may not fall between w and r
        let mut fences: Vec<(usize, usize, usize)> = Vec::new();
        for &(w, r) in sw {
            if events >> w & 1 == 0 || events >> r & 1 == 0 {
                continue;
            }
            let range = self.p.events[r].range;
            for v in bits(events & self.writers & !(1 << w) & !(1 << r)) {
                if self.p.events[v].range == range {
                    fences.push((w, r, v));
                }
            }
        }
        let mut order = Vec::with_capacity(events.count_ones() as usize);
        let mut dead = HashSet::new();
        if extend(events, 0, &preds, &fences, &mut order, &mut dead) {
            Some(order)
        } else {
            None
        }
    }

    pub fn well_formed(&self, mask: u64, rbf: &Relation3) -> bool {
        let mut seen: BTreeMap<usize, u64> = BTreeMap::new();
        for t in rbf.iter() {
            let (r, w) = (t.read.0, t.write.0);
            if r >= self.n || w >= self.n || r == w {
                return false;
            }
            let active = mask >> r & 1 == 1 && mask >> w & 1 == 1;
            if !active || self.readers >> r & 1 == 0 || self.writers >> w & 1 == 0 {
                return false;
            }
            let (rr, wr) = (self.p.events[r].range, self.p.events[w].range);
            if !rr.contains(rr.block, t.byte) || !wr.contains(rr.block, t.byte) {
                return false;
            }
            let slot = seen.entry(r).or_default();
            let bit = 1u64 << (t.byte - rr.byte_index);
            if *slot & bit != 0 {
                return false;
            }
            *slot |= bit;
        }
        bits(mask & self.readers).all(|r| {
            let full = (1u64 << self.p.events[r].range.element_size) - 1;
            seen.get(&r) == Some(&full)
        })
    }

    /// Every conjunct after RBF well-formedness, in order.
    pub fn evaluate(
        &self,
        axioms: &Axioms,
        cv: &ControlValuation,
        mask: u64,
        hb0: &BitRel,
        rbf: &Relation3,
    ) -> Result<ExecutionWitness, Conjunct> {
        let mut rf = vec![0u64; self.n];
        for t in rbf.iter() {
            rf[t.read.0] |= 1 << t.write.0;
        }
        let mut hb = hb0.clone();
        let mut sw = Vec::new();
        for (r, &writers) in rf.iter().enumerate() {
            for w in bits(self.sw_sources(r, writers)) {
                sw.push((w, r));
                hb.add_closed(w, r);
            }
        }
        if hb.has_self_loop() {
            return Err(Conjunct::Hb);
        }
        axioms.require(
            Conjunct::Cr,
            rbf.iter()
                .all(|t| self.coherent(&hb, mask, t.read.0, t.write.0, t.byte)),
        )?;
        axioms.require(
            Conjunct::Tfr,
            rf.iter().enumerate().all(|(r, &w)| self.tear_free(r, w)),
        )?;
        let mo = self.mo_search(mask, &hb, &sw);
        axioms.require(Conjunct::Sca, mo.is_some())?;
        let values = reconstruct_values(self.p, cv, rbf).map_err(|_| Conjunct::Values)?;
        for (i, var) in self.p.control_vars.iter().enumerate() {
            if let Some(&v) = values.get(&var.read) {
                if condition_holds(var.op, v, var.constant) != cv.0[i] {
                    return Err(Conjunct::Control);
                }
            }
        }
        Ok(ExecutionWitness {
            rbf: rbf.clone(),
            rf: rf
                .iter()
                .enumerate()
                .flat_map(|(r, &ws)| bits(ws).map(move |w| (EventId(r), EventId(w))))
                .collect(),
            sw: sw.iter().map(|&(w, r)| (EventId(w), EventId(r))).collect(),
            hb: hb.to_relation(),
            mo: mo.unwrap_or_default().into_iter().map(EventId).collect(),
            values,
        })
    }
}

fn extend(
    events: u64,
    placed: u64,
    preds: &[u64],
    fences: &[(usize, usize, usize)],
    order: &mut Vec<usize>,
    dead: &mut HashSet<u64>,
) -> bool {
    if placed == events {
        return true;
    }
    if dead.contains(&placed) {
        return false;
    }
    for e in bits(events & !placed) {
        if preds[e] & !placed != 0 {
            continue;
        }
        let splits = fences
            .iter()
            .any(|&(w, r, v)| v == e && placed >> w & 1 == 1 && placed >> r & 1 == 0);
        if splits {
            continue;
        }
        order.push(e);
        if extend(events, placed | 1 << e, preds, fences, order, dead) {
            return true;
        }
        order.pop();
    }
    dead.insert(placed);
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_str;

    fn e(n: usize) -> EventId {
        EventId(n - 1)
    }

    fn rbf(triples: &[(usize, usize, u32)]) -> Relation3 {
        triples.iter().map(|&(r, w, b)| (e(r), e(w), b)).collect()
    }

    #[test]
    fn else_candidate_is_valid() {
        let p = parse_str(crate::frontend::tests::MIXED).unwrap();
        let ce = CandidateExecution::new(
            &p,
            ControlValuation(vec![false]),
            rbf(&[(4, 1, 0), (3, 2, 0), (3, 6, 1)]),
        );
        let w = is_valid_execution(&ce).expect("valid");
        assert_eq!(w.values[&e(3)], Value::Int(769));
        assert_eq!(
            w.rf,
            [(e(3), e(2)), (e(3), e(6)), (e(4), e(1))]
                .into_iter()
                .collect()
        );
        assert!(w.sw.is_empty());
        assert!(w.mo.is_empty());
        assert!(coherent_reads(&ce, &w.hb));
    }

    #[test]
    fn wrong_branch_is_rejected() {
        let p = parse_str(crate::frontend::tests::MIXED).unwrap();
        let ce = CandidateExecution::new(
            &p,
            ControlValuation(vec![true]),
            rbf(&[(4, 1, 0), (3, 2, 0), (3, 1, 1)]),
        );
        assert_eq!(Axioms::default().check(&ce), Err(Conjunct::Control));
    }

    #[test]
    fn rf_projection() {
        assert_eq!(
            derive_rf(&rbf(&[(3, 2, 0), (3, 6, 1)])),
            [(e(3), e(2)), (e(3), e(6))].into_iter().collect()
        );
        assert_eq!(derive_rf(&rbf(&[(3, 2, 0), (3, 2, 1)])).len(), 1);
        assert!(derive_rf(&Relation3::new()).is_empty());
    }

    #[test]
    fn shadowed_init_read_is_incoherent() {
        let p = parse_str(
            "var x = new SharedArrayBuffer();\nThread t { x-I8[0] = 1; print(x-I8[0]); }",
        )
        .unwrap();
        let bad = CandidateExecution::new(&p, ControlValuation::default(), rbf(&[(3, 1, 0)]));
        assert_eq!(Axioms::default().check(&bad), Err(Conjunct::Cr));
        let good = CandidateExecution::new(&p, ControlValuation::default(), rbf(&[(3, 2, 0)]));
        assert_eq!(
            is_valid_execution(&good).unwrap().values[&e(3)],
            Value::Int(1)
        );
    }

    #[test]
    fn two_writer_tear() {
        let src = "var x = new SharedArrayBuffer();\nThread a { x-I16[0] = 1; }\nThread b { x-I16[0] = 2; }\nThread c { PRINT(x-I16[0]); }";
        let p = parse_str(&src.replace("PRINT", "print")).unwrap();
        let mixed = CandidateExecution::new(
            &p,
            ControlValuation::default(),
            rbf(&[(4, 2, 0), (4, 3, 1)]),
        );
        assert_eq!(Axioms::default().check(&mixed), Err(Conjunct::Tfr));
        assert!(!tear_free_reads(&mixed, &derive_rf(&mixed.rbf)));
        let p = parse_str(&src.replace("PRINT", "tear print")).unwrap();
        let torn = CandidateExecution::new(
            &p,
            ControlValuation::default(),
            rbf(&[(4, 2, 0), (4, 3, 1)]),
        );
        assert!(is_valid_execution(&torn).is_some());
    }

    #[test]
    fn seq_cst_pair_synchronizes() {
        let p = parse_str("var x = new SharedArrayBuffer();\nThread a { atomic x-I16[0] = 1; }\nThread b { atomic print(x-I16[0]); }")
            .unwrap();
        let ce = CandidateExecution::new(
            &p,
            ControlValuation::default(),
            rbf(&[(3, 2, 0), (3, 2, 1)]),
        );
        let w = is_valid_execution(&ce).unwrap();
        assert_eq!(w.sw, [(e(2), e(3))].into_iter().collect());
        assert_eq!(w.mo, vec![e(2), e(3)]);
        assert!(w.sw.is_subset(&w.hb));
    }

    #[test]
    fn unordered_writer_does_not_synchronize() {
        let p = parse_str("var x = new SharedArrayBuffer();\nThread a { x-I8[0] = 1; }\nThread b { atomic print(x-I8[0]); }").unwrap();
        let ce = CandidateExecution::new(&p, ControlValuation::default(), rbf(&[(3, 2, 0)]));
        assert!(derive_sw(&ce, &derive_rf(&ce.rbf)).is_empty());
    }

    #[test]
    fn unequal_ranges_do_not_synchronize() {
        let p = parse_str("var x = new SharedArrayBuffer();\nThread a { atomic x-I8[0] = 1; }\nThread b { atomic print(x-I16[0]); }")
            .unwrap();
        let ce = CandidateExecution::new(
            &p,
            ControlValuation::default(),
            rbf(&[(3, 2, 0), (3, 1, 1)]),
        );
        assert!(derive_sw(&ce, &derive_rf(&ce.rbf)).is_empty());
        let init_only = CandidateExecution::new(
            &p,
            ControlValuation::default(),
            rbf(&[(3, 1, 0), (3, 1, 1)]),
        );
        assert_eq!(
            derive_sw(&init_only, &derive_rf(&init_only.rbf)),
            [(e(1), e(3))].into_iter().collect()
        );
    }

    #[test]
    fn sw_against_agent_order_is_a_cycle() {
        let p = parse_str("var x = new SharedArrayBuffer();\nThread a { atomic print(x-I8[0]); atomic x-I8[0] = 1; }").unwrap();
        let ce = CandidateExecution::new(&p, ControlValuation::default(), rbf(&[(2, 3, 0)]));
        let sw = derive_sw(&ce, &derive_rf(&ce.rbf));
        assert_eq!(
            derive_hb(&p, &ce.cv, &sw).map(|_| ()),
            Err(CycleError { event: e(2) })
        );
        assert_eq!(Axioms::default().check(&ce), Err(Conjunct::Hb));
    }

    #[test]
    fn hb_includes_init_edges() {
        let p = parse_str(crate::frontend::tests::MIXED).unwrap();
        let hb = derive_hb(&p, &ControlValuation(vec![true]), &Relation2::new()).unwrap();
        for x in [2, 3, 4, 5] {
            assert!(hb.contains(e(1), e(x)));
        }
        assert!(!hb.contains(e(1), e(6)));
        assert!(hb.contains(e(2), e(3)) && hb.contains(e(4), e(5)));
        assert!(hb.is_irreflexive() && hb.is_transitive());
    }

    #[test]
    fn mo_orders_hb_and_respects_fences() {
        let p = parse_str(
            "var x = new SharedArrayBuffer();\nThread a { atomic x-I8[0] = 1; atomic x-I8[0] = 2; }\nThread b { atomic print(x-I8[0]); }",
        )
        .unwrap();
        let cv = ControlValuation::default();
        let hb = derive_hb(&p, &cv, &Relation2::new()).unwrap();
        let mo = mo_witness(&p, &cv, &hb, &Relation2::new()).unwrap();
        assert!(mo.iter().position(|&x| x == e(2)) < mo.iter().position(|&x| x == e(3)));

        // reading the first write after the second is forced between them
        let sw: Relation2 = [(e(2), e(4))].into_iter().collect();
        let mut hb = derive_hb(&p, &cv, &sw).unwrap();
        hb.insert(e(3), e(4));
        assert_eq!(mo_witness(&p, &cv, &hb, &sw), None);
        let ce = CandidateExecution::new(&p, cv, rbf(&[(4, 2, 0)]));
        assert!(is_valid_execution(&ce).is_some());
    }

    #[test]
    fn no_seq_cst_gives_empty_order() {
        let p = parse_str("var x = new SharedArrayBuffer();\nThread a { x-I8[0] = 1; }").unwrap();
        let cv = ControlValuation::default();
        let hb = derive_hb(&p, &cv, &Relation2::new()).unwrap();
        assert_eq!(mo_witness(&p, &cv, &hb, &Relation2::new()), Some(vec![]));
    }

    #[test]
    fn malformed_rbf() {
        let p = parse_str(
            "var x = new SharedArrayBuffer();\nThread t { x-I8[0] += 1; print(x-I16[0]); }",
        )
        .unwrap();
        let cv = ControlValuation::default();
        for bad in [
            rbf(&[(2, 2, 0), (3, 1, 0), (3, 1, 1)]),
            rbf(&[(2, 1, 0), (3, 1, 0)]),
            rbf(&[(2, 1, 0), (3, 1, 0), (3, 2, 1)]),
            rbf(&[(2, 1, 1), (3, 1, 0), (3, 1, 1)]),
        ] {
            let ce = CandidateExecution::new(&p, cv.clone(), bad);
            assert_eq!(Axioms::default().check(&ce), Err(Conjunct::Rbf));
        }
    }

    #[test]
    fn negation_flips_one_conjunct() {
        let p = parse_str(
            "var x = new SharedArrayBuffer();\nThread t { x-I8[0] = 1; print(x-I8[0]); }",
        )
        .unwrap();
        let good = CandidateExecution::new(&p, ControlValuation::default(), rbf(&[(3, 2, 0)]));
        let bad = CandidateExecution::new(&p, ControlValuation::default(), rbf(&[(3, 1, 0)]));
        let neg = Axioms::negating(Conjunct::Cr);
        assert_eq!(neg.check(&good), Err(Conjunct::Cr));
        assert!(neg.check(&bad).is_ok());
    }
}
