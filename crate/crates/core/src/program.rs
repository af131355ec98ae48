//! Events, threads and programs: the vocabulary shared by every analysis.
//!
//! A [`Program`] is a finite set of [`MemoryEvent`]s grouped into threads.
//! Every shared block gets one implicit whole-block `Init` write, kept in a
//! virtual init thread with no agent order. Control flow is flattened: the
//! events of both branches of an `if` are present, each carrying an
//! [`ActivationGuard`] over [`ControlVar`]s.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::relation::Relation2;
use crate::value::{Literal, ViewKind};

/// Size of a block declared without an explicit byte count.
pub const DEFAULT_BLOCK_SIZE: u32 = 8;

/// Upper bound on events per program (init events included).
pub const MAX_EVENTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EventId(pub usize);

impl EventId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ev{}", self.0 + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ControlVarId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    pub size_bytes: u32,
}

/// The contiguous bytes `byte_index .. byte_index + element_size` of one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ByteRange {
    pub block: usize,
    pub byte_index: u32,
    pub element_size: u32,
}

impl ByteRange {
    pub fn new(block: usize, byte_index: u32, element_size: u32) -> Self {
        ByteRange {
            block,
            byte_index,
            element_size,
        }
    }

    pub fn bytes(&self) -> Range<u32> {
        self.byte_index..self.byte_index + self.element_size
    }

    pub fn end(&self) -> u32 {
        self.byte_index + self.element_size
    }

    pub fn contains(&self, block: usize, byte: u32) -> bool {
        self.block == block && self.bytes().contains(&byte)
    }

    pub fn overlaps(&self, other: &ByteRange) -> bool {
        self.block == other.block && self.byte_index < other.end() && other.byte_index < self.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventKind {
    #[serde(rename = "R")]
    Read,
    #[serde(rename = "W")]
    Write,
    #[serde(rename = "M")]
    ReadModifyWrite,
}

impl EventKind {
    pub fn letter(self) -> char {
        match self {
            EventKind::Read => 'R',
            EventKind::Write => 'W',
            EventKind::ReadModifyWrite => 'M',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Order {
    #[serde(rename = "I")]
    Init,
    #[serde(rename = "SC")]
    SeqCst,
    #[serde(rename = "U")]
    Unordered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModifyOp {
    Add,
    Sub,
    And,
    Or,
    Xor,
}

impl ModifyOp {
    pub fn apply(self, old: i128, operand: i128) -> i128 {
        match self {
            ModifyOp::Add => old.wrapping_add(operand),
            ModifyOp::Sub => old.wrapping_sub(operand),
            ModifyOp::And => old & operand,
            ModifyOp::Or => old | operand,
            ModifyOp::Xor => old ^ operand,
        }
    }

    /// Source-level compound assignment operator, e.g. `+=`.
    pub fn symbol(self) -> &'static str {
        match self {
            ModifyOp::Add => "+=",
            ModifyOp::Sub => "-=",
            ModifyOp::And => "&=",
            ModifyOp::Or => "|=",
            ModifyOp::Xor => "^=",
        }
    }

    /// The `Atomics` method performing this update.
    pub fn js_method(self) -> &'static str {
        match self {
            ModifyOp::Add => "add",
            ModifyOp::Sub => "sub",
            ModifyOp::And => "and",
            ModifyOp::Or => "or",
            ModifyOp::Xor => "xor",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GuardLiteral {
    pub var: ControlVarId,
    pub value: bool,
}

/// Conjunction of control-variable literals, outermost `if` first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActivationGuard(pub Vec<GuardLiteral>);

impl ActivationGuard {
    pub fn always() -> Self {
        Self::default()
    }

    pub fn is_always(&self) -> bool {
        self.0.is_empty()
    }

    pub fn holds(&self, cv: &ControlValuation) -> bool {
        self.0.iter().all(|lit| cv.get(lit.var) == Some(lit.value))
    }

    pub fn mentions(&self, var: ControlVarId) -> bool {
        self.0.iter().any(|lit| lit.var == var)
    }

    pub fn with(&self, lit: GuardLiteral) -> Self {
        let mut out = self.clone();
        out.0.push(lit);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }
}

/// The Boolean outcome of one `if` condition `read OP constant`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ControlVar {
    pub name: String,
    pub read: EventId,
    pub op: CmpOp,
    pub constant: Literal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryEvent {
    pub id: EventId,
    pub name: String,
    /// Index into [`Program::threads`]; `None` for init events.
    pub thread: Option<usize>,
    pub kind: EventKind,
    pub tear: bool,
    pub order: Order,
    pub range: ByteRange,
    pub view: ViewKind,
    #[serde(default, skip_serializing_if = "ActivationGuard::is_always")]
    pub guard: ActivationGuard,
    /// Stored constant for writes, operand for read-modify-writes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<Literal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modify: Option<ModifyOp>,
}

impl MemoryEvent {
    /// Reads and read-modify-writes observe memory.
    pub fn reads(&self) -> bool {
        matches!(self.kind, EventKind::Read | EventKind::ReadModifyWrite)
    }

    /// Writes, read-modify-writes and init events store to memory.
    pub fn writes(&self) -> bool {
        matches!(self.kind, EventKind::Write | EventKind::ReadModifyWrite)
    }

    pub fn is_init(&self) -> bool {
        self.order == Order::Init
    }

    pub fn is_seq_cst(&self) -> bool {
        self.order == Order::SeqCst
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thread {
    pub name: String,
    pub events: Vec<EventId>,
}

/// Truth assignment to every control variable of a program.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ControlValuation(pub Vec<bool>);

impl ControlValuation {
    pub fn get(&self, var: ControlVarId) -> Option<bool> {
        self.0.get(var.0).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Program {
    pub blocks: Vec<Block>,
    pub events: Vec<MemoryEvent>,
    pub init_events: Vec<EventId>,
    pub threads: Vec<Thread>,
    #[serde(default)]
    pub control_vars: Vec<ControlVar>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("control valuation assigns {got} variables, program has {want}")]
    IncompleteValuation { got: usize, want: usize },
    #[error("program JSON: {0}")]
    Json(String),
    #[error("invalid program: {0}")]
    Invalid(ValidationReport),
}

impl Program {
    pub fn event(&self, id: EventId) -> &MemoryEvent {
        &self.events[id.0]
    }

    pub fn event_by_name(&self, name: &str) -> Option<&MemoryEvent> {
        self.events.iter().find(|e| e.name == name)
    }

    pub fn block_index(&self, name: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.name == name)
    }

    pub fn control_var_by_name(&self, name: &str) -> Option<ControlVarId> {
        self.control_vars
            .iter()
            .position(|c| c.name == name)
            .map(ControlVarId)
    }

    /// Events excluding the implicit init writes.
    pub fn program_events(&self) -> impl Iterator<Item = &MemoryEvent> {
        self.events.iter().filter(|e| !e.is_init())
    }

    /// Number of thread events (init excluded).
    pub fn size(&self) -> usize {
        self.events.len() - self.init_events.len()
    }

    pub fn thread_name(&self, id: EventId) -> &str {
        match self.event(id).thread {
            Some(t) => &self.threads[t].name,
            None => "init",
        }
    }

    /// Bitmask of events active under `cv`.
    pub(crate) fn active_mask(&self, cv: &ControlValuation) -> u64 {
        self.events
            .iter()
            .filter(|e| e.guard.holds(cv))
            .fold(0u64, |m, e| m | 1 << e.id.0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("program serializes")
    }

    /// Parses the canonical JSON form and validates the result.
    pub fn from_json(text: &str) -> Result<Program, ModelError> {
        let p: Program = serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
        let report = validate_program(&p);
        if report.is_ok() {
            Ok(p)
        } else {
            Err(ModelError::Invalid(report))
        }
    }
}

/// Union over threads of the strict total order of each thread's events.
///
/// Events in both arms of an `if` are ordered too; the init thread contributes nothing.
pub fn agent_order(p: &Program) -> Relation2 {
    let mut ao = Relation2::new();
    for t in &p.threads {
        for (i, &a) in t.events.iter().enumerate() {
            for &b in &t.events[i + 1..] {
                ao.insert(a, b);
            }
        }
    }
    ao
}

/// One step of a thread with its `if`/`else` structure restored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    /// The condition read of `var`; opens the then-arm.
    If(EventId, ControlVarId),
    Else,
    EndIf,
    Event(EventId),
}

/// Rebuilds the nested branch structure of a thread from the guards.
pub fn thread_steps(p: &Program, thread: usize) -> Vec<Step> {
    let mut out = Vec::new();
    let mut open: Vec<GuardLiteral> = Vec::new();
    for &id in &p.threads[thread].events {
        let g = &p.event(id).guard.0;
        let common = open.iter().zip(g).take_while(|(a, b)| a == b).count();
        while open.len() > common {
            let top = open[open.len() - 1];
            let to_else = open.len() == common + 1
                && g.get(common)
                    .is_some_and(|l| l.var == top.var && top.value && !l.value);
            if to_else {
                out.push(Step::Else);
                open[common] = g[common];
                break;
            }
            open.pop();
            out.push(Step::EndIf);
        }
        match p.control_vars.iter().position(|c| c.read == id) {
            Some(v) => {
                out.push(Step::If(id, ControlVarId(v)));
                open.push(GuardLiteral {
                    var: ControlVarId(v),
                    value: true,
                });
            }
            None => out.push(Step::Event(id)),
        }
    }
    out.extend(open.iter().map(|_| Step::EndIf));
    out
}

/// Events whose guard holds under `cv`. Init events are always active.
pub fn active_events(p: &Program, cv: &ControlValuation) -> Result<BTreeSet<EventId>, ModelError> {
    if cv.0.len() != p.control_vars.len() {
        return Err(ModelError::IncompleteValuation {
            got: cv.0.len(),
            want: p.control_vars.len(),
        });
    }
    Ok(p.events
        .iter()
        .filter(|e| e.guard.holds(cv))
        .map(|e| e.id)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    TooManyEvents { count: usize },
    EmptyBlock { block: String },
    DuplicateBlock { block: String },
    DuplicateEventId { event: String },
    MisnumberedEvent { event: String },
    UnknownBlock { event: String },
    UnsupportedView { event: String },
    ViewSizeMismatch { event: String },
    Unaligned { event: String },
    OutOfBounds { event: String },
    MalformedInit { event: String },
    MissingInit { block: String },
    PayloadShape { event: String },
    FloatReadModifyWrite { event: String },
    AtomicFloat { event: String },
    ThreadMembership { event: String },
    GuardRepeatsVariable { event: String },
    UnknownControlVar { event: String },
    ConditionNotRead { var: String },
    GuardOrdering { event: String, var: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            TooManyEvents { count } => write!(f, "{count} events exceed the limit of {MAX_EVENTS}"),
            EmptyBlock { block } => write!(f, "block `{block}` has size 0"),
            DuplicateBlock { block } => write!(f, "block `{block}` declared twice"),
            DuplicateEventId { event } => write!(f, "event id `{event}` is not unique"),
            MisnumberedEvent { event } => write!(f, "event `{event}` is stored out of position"),
            UnknownBlock { event } => write!(f, "`{event}` accesses an undeclared block"),
            UnsupportedView { event } => write!(f, "`{event}` uses an unsupported view"),
            ViewSizeMismatch { event } => {
                write!(f, "`{event}` view width disagrees with its byte range")
            }
            Unaligned { event } => write!(f, "`{event}` is not aligned to its element size"),
            OutOfBounds { event } => {
                write!(f, "`{event}` accesses bytes past the end of its block")
            }
            MalformedInit { event } => write!(
                f,
                "init event `{event}` must be an unguarded non-tear whole-block write"
            ),
            MissingInit { block } => write!(f, "block `{block}` has no init event"),
            PayloadShape { event } => write!(
                f,
                "`{event}` has a payload or modify operation inconsistent with its kind"
            ),
            FloatReadModifyWrite { event } => {
                write!(f, "read-modify-write `{event}` uses a float view")
            }
            AtomicFloat { event } => write!(f, "seq-cst access `{event}` uses a float view"),
            ThreadMembership { event } => {
                write!(f, "`{event}` is not listed exactly once in its thread")
            }
            GuardRepeatsVariable { event } => {
                write!(f, "guard of `{event}` mentions a variable twice")
            }
            UnknownControlVar { event } => {
                write!(f, "guard of `{event}` mentions an unknown control variable")
            }
            ConditionNotRead { var } => write!(f, "condition `{var}` does not test a read"),
            GuardOrdering { event, var } => {
                write!(f, "`{event}` is guarded by `{var}` but its condition read does not precede it in the same thread")
            }
        }
    }
}

/// Outcome of [`validate_program`]; empty when the program is well formed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&msgs.join("; "))
    }
}

/// Checks the structural invariants of a program.
pub fn validate_program(p: &Program) -> ValidationReport {
    let mut out = Vec::new();
    if p.events.len() > MAX_EVENTS {
        out.push(Violation::TooManyEvents {
            count: p.events.len(),
        });
    }

    let mut block_names = HashSet::new();
    for b in &p.blocks {
        if b.size_bytes == 0 {
            out.push(Violation::EmptyBlock {
                block: b.name.clone(),
            });
        }
        if !block_names.insert(&b.name) {
            out.push(Violation::DuplicateBlock {
                block: b.name.clone(),
            });
        }
    }

    let mut names = HashSet::new();
    for (i, e) in p.events.iter().enumerate() {
        let ev = e.name.clone();
        if e.id.0 != i {
            out.push(Violation::MisnumberedEvent { event: ev.clone() });
        }
        if !names.insert(&e.name) {
            out.push(Violation::DuplicateEventId { event: ev.clone() });
        }
        let Some(block) = p.blocks.get(e.range.block) else {
            out.push(Violation::UnknownBlock { event: ev });
            continue;
        };
        if !e.view.is_supported() {
            out.push(Violation::UnsupportedView { event: ev.clone() });
        }
        if e.is_init() {
            let whole = e.range.byte_index == 0 && e.range.element_size == block.size_bytes;
            if e.kind != EventKind::Write
                || e.tear
                || !e.guard.is_always()
                || e.thread.is_some()
                || !whole
            {
                out.push(Violation::MalformedInit { event: ev });
            }
            continue;
        }
        if e.view.element_size() != e.range.element_size {
            out.push(Violation::ViewSizeMismatch { event: ev.clone() });
        }
        if e.range.element_size == 0 || e.range.byte_index % e.range.element_size != 0 {
            out.push(Violation::Unaligned { event: ev.clone() });
        }
        if e.range.end() > block.size_bytes {
            out.push(Violation::OutOfBounds { event: ev.clone() });
        }
        let shape_ok = match e.kind {
            EventKind::Read => e.payload.is_none() && e.modify.is_none(),
            EventKind::Write => e.payload.is_some() && e.modify.is_none(),
            EventKind::ReadModifyWrite => e.payload.is_some() && e.modify.is_some(),
        };
        if !shape_ok {
            out.push(Violation::PayloadShape { event: ev.clone() });
        }
        if e.kind == EventKind::ReadModifyWrite && e.view.is_float() {
            out.push(Violation::FloatReadModifyWrite { event: ev.clone() });
        }
        if e.is_seq_cst() && e.view.is_float() {
            out.push(Violation::AtomicFloat { event: ev.clone() });
        }
        let listed = e
            .thread
            .and_then(|t| p.threads.get(t))
            .map_or(0, |t| t.events.iter().filter(|&&x| x == e.id).count());
        if listed != 1 {
            out.push(Violation::ThreadMembership { event: ev.clone() });
        }
    }

    for (bi, b) in p.blocks.iter().enumerate() {
        let has_init = p.init_events.iter().any(|&id| {
            p.events
                .get(id.0)
                .is_some_and(|e| e.is_init() && e.range.block == bi)
        });
        if !has_init {
            out.push(Violation::MissingInit {
                block: b.name.clone(),
            });
        }
    }

    for (ci, cvar) in p.control_vars.iter().enumerate() {
        if !p
            .events
            .get(cvar.read.0)
            .is_some_and(|e| e.reads() && !e.is_init())
        {
            out.push(Violation::ConditionNotRead {
                var: cvar.name.clone(),
            });
            continue;
        }
        let read = p.event(cvar.read);
        let Some(thread) = read.thread.and_then(|t| p.threads.get(t)) else {
            continue;
        };
        let read_pos = thread.events.iter().position(|&x| x == cvar.read);
        for e in &p.events {
            if !e.guard.mentions(ControlVarId(ci)) {
                continue;
            }
            let pos = thread.events.iter().position(|&x| x == e.id);
            let precedes = matches!((read_pos, pos), (Some(r), Some(g)) if r < g);
            if !precedes {
                out.push(Violation::GuardOrdering {
                    event: e.name.clone(),
                    var: cvar.name.clone(),
                });
            }
        }
    }

    for e in &p.events {
        let mut seen = HashSet::new();
        for lit in &e.guard.0 {
            if lit.var.0 >= p.control_vars.len() {
                out.push(Violation::UnknownControlVar {
                    event: e.name.clone(),
                });
            }
            if !seen.insert(lit.var) {
                out.push(Violation::GuardRepeatsVariable {
                    event: e.name.clone(),
                });
            }
        }
    }

    ValidationReport { violations: out }
}

/// Shape of one thread event handed to [`ProgramBuilder::push`].
#[derive(Debug, Clone, PartialEq)]
pub struct EventSpec {
    pub kind: EventKind,
    pub order: Order,
    pub tear: bool,
    pub block: usize,
    pub byte_index: u32,
    pub view: ViewKind,
    pub guard: ActivationGuard,
    pub payload: Option<Literal>,
    pub modify: Option<ModifyOp>,
}

impl EventSpec {
    fn base(kind: EventKind, block: usize, byte_index: u32, view: ViewKind) -> Self {
        EventSpec {
            kind,
            order: Order::Unordered,
            tear: false,
            block,
            byte_index,
            view,
            guard: ActivationGuard::always(),
            payload: None,
            modify: None,
        }
    }

    pub fn read(block: usize, byte_index: u32, view: ViewKind) -> Self {
        Self::base(EventKind::Read, block, byte_index, view)
    }

    pub fn write(block: usize, byte_index: u32, view: ViewKind, value: Literal) -> Self {
        EventSpec {
            payload: Some(value),
            ..Self::base(EventKind::Write, block, byte_index, view)
        }
    }

    pub fn rmw(
        block: usize,
        byte_index: u32,
        view: ViewKind,
        op: ModifyOp,
        operand: Literal,
    ) -> Self {
        EventSpec {
            order: Order::SeqCst,
            payload: Some(operand),
            modify: Some(op),
            ..Self::base(EventKind::ReadModifyWrite, block, byte_index, view)
        }
    }

    pub fn seq_cst(mut self) -> Self {
        self.order = Order::SeqCst;
        self
    }

    pub fn torn(mut self) -> Self {
        self.tear = true;
        self
    }

    pub fn guarded(mut self, guard: ActivationGuard) -> Self {
        self.guard = guard;
        self
    }
}

/// Incremental construction of a [`Program`].
///
/// Blocks should be declared first; init events are numbered ahead of all
/// thread events when [`finish`](Self::finish) runs, so the first thread
/// event of a single-block program is `ev2`.
#[derive(Debug, Default)]
pub struct ProgramBuilder {
    blocks: Vec<Block>,
    threads: Vec<(String, Vec<usize>)>,
    specs: Vec<(usize, EventSpec)>,
    control_vars: Vec<(String, usize, CmpOp, Literal)>,
}

/// Handle to an event inside a [`ProgramBuilder`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PendingEvent(usize);

impl ProgramBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn block(&mut self, name: impl Into<String>, size_bytes: u32) -> usize {
        self.blocks.push(Block {
            name: name.into(),
            size_bytes,
        });
        self.blocks.len() - 1
    }

    pub fn thread(&mut self, name: impl Into<String>) -> usize {
        self.threads.push((name.into(), Vec::new()));
        self.threads.len() - 1
    }

    pub fn push(&mut self, thread: usize, spec: EventSpec) -> PendingEvent {
        let local = self.specs.len();
        self.specs.push((thread, spec));
        self.threads[thread].1.push(local);
        PendingEvent(local)
    }

    /// Registers the condition `read OP constant` and returns its variable.
    pub fn condition(&mut self, read: PendingEvent, op: CmpOp, constant: Literal) -> ControlVarId {
        let id = self.control_vars.len();
        self.control_vars
            .push((format!("id{}_cond", id + 1), read.0, op, constant));
        ControlVarId(id)
    }

    pub fn finish(self) -> Program {
        let offset = self.blocks.len();
        let mut events = Vec::with_capacity(offset + self.specs.len());
        for (bi, b) in self.blocks.iter().enumerate() {
            let id = EventId(bi);
            events.push(MemoryEvent {
                id,
                name: id.to_string(),
                thread: None,
                kind: EventKind::Write,
                tear: false,
                order: Order::Init,
                range: ByteRange::new(bi, 0, b.size_bytes),
                view: ViewKind::U8,
                guard: ActivationGuard::always(),
                payload: Some(Literal::Int(0)),
                modify: None,
            });
        }
        for (local, (thread, spec)) in self.specs.into_iter().enumerate() {
            let id = EventId(offset + local);
            events.push(MemoryEvent {
                id,
                name: id.to_string(),
                thread: Some(thread),
                kind: spec.kind,
                tear: spec.tear,
                order: spec.order,
                range: ByteRange::new(spec.block, spec.byte_index, spec.view.element_size()),
                view: spec.view,
                guard: spec.guard,
                payload: spec.payload,
                modify: spec.modify,
            });
        }
        Program {
            init_events: (0..offset).map(EventId).collect(),
            blocks: self.blocks,
            events,
            threads: self
                .threads
                .into_iter()
                .map(|(name, evs)| Thread {
                    name,
                    events: evs.into_iter().map(|l| EventId(offset + l)).collect(),
                })
                .collect(),
            control_vars: self
                .control_vars
                .into_iter()
                .map(|(name, read, op, constant)| ControlVar {
                    name,
                    read: EventId(offset + read),
                    op,
                    constant,
                })
                .collect(),
        }
    }
}
