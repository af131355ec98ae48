//! Exhaustive and sampled generation of small programs.
//!
//! A program is a composition of the event count into threads, one letter
//! per event (kind, order, view and aligned position), and optionally one
//! `if` per thread whose condition is one of the thread's reads. Every write
//! stores its 1-based position among the program's writes, so distinct
//! writes are distinguishable by value.

use std::collections::HashSet;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::program::{
    ActivationGuard, CmpOp, EventKind, EventSpec, GuardLiteral, ModifyOp, Order, Program,
    ProgramBuilder,
};
use crate::value::{Literal, ViewKind};

/// Spaces up to this many raw programs are sampled by full enumeration.
const ENUMERATE_LIMIT: u128 = 1 << 18;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenConfig {
    pub event_count: usize,
    pub max_threads: usize,
    /// Byte size of each block; blocks are named `x`, `y`, `z`, ...
    pub blocks: Vec<u32>,
    pub views: Vec<ViewKind>,
    pub orders: Vec<Order>,
    pub kinds: Vec<EventKind>,
    pub allow_branches: bool,
    pub dedupe: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            event_count: 3,
            max_threads: 2,
            blocks: vec![2],
            views: vec![ViewKind::I8, ViewKind::I16],
            orders: vec![Order::Unordered, Order::SeqCst],
            kinds: vec![
                EventKind::Read,
                EventKind::Write,
                EventKind::ReadModifyWrite,
            ],
            allow_branches: false,
            dedupe: true,
        }
    }
}

impl GenConfig {
    pub fn with_events(mut self, n: usize) -> Self {
        self.event_count = n;
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("invalid generator config: {0}")]
    Config(String),
    #[error("asked for {wanted} programs but the space holds {available}")]
    TooMany { wanted: usize, available: u128 },
    #[error("could not draw {wanted} distinct programs; found {found}")]
    Exhausted { wanted: usize, found: usize },
}

/// One event before payloads are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub block: usize,
    pub byte_index: u32,
    pub view: ViewKind,
    pub kind: EventKind,
    pub order: Order,
}

/// Events of one thread plus an optional `(condition, then_len)` branch:
/// event `condition` is the read tested against 0, the next `then_len`
/// events form the then-arm and the rest of the thread the else-arm.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ThreadShape {
    pub letters: Vec<Letter>,
    pub branch: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shape {
    pub threads: Vec<ThreadShape>,
}

/// The indexed space of raw (not deduplicated) shapes for a config.
#[derive(Debug, Clone)]
pub struct ProgramSpace {
    cfg: GenConfig,
    letters: Vec<Letter>,
    compositions: Vec<(Vec<usize>, u128)>,
    total: u128,
    block_perms: Vec<Vec<usize>>,
}

fn branch_shapes(m: usize) -> u128 {
    1 + (m * m.saturating_sub(1) / 2) as u128
}

fn compositions(n: usize, max_parts: usize) -> Vec<Vec<usize>> {
    fn go(left: usize, max_parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        if cur.len() == max_parts {
            return;
        }
        for k in 1..=left {
            cur.push(k);
            go(left - k, max_parts, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, max_parts, &mut Vec::new(), &mut out);
    out.sort_by_key(|c| c.len());
    out
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

impl ProgramSpace {
    pub fn new(cfg: &GenConfig) -> Result<Self, GenError> {
        if cfg.event_count == 0 || cfg.max_threads == 0 {
            return Err(GenError::Config(
                "event_count and max_threads must be positive".into(),
            ));
        }
        if cfg.blocks.is_empty() || cfg.blocks.contains(&0) {
            return Err(GenError::Config("need at least one nonempty block".into()));
        }
        if cfg.event_count + cfg.blocks.len() > crate::program::MAX_EVENTS {
            return Err(GenError::Config("too many events".into()));
        }
        let mut letters = Vec::new();
        for (block, &size) in cfg.blocks.iter().enumerate() {
            for &view in &cfg.views {
                let es = view.element_size();
                for byte_index in (0..size).step_by(es as usize).filter(|b| b + es <= size) {
                    for &kind in &cfg.kinds {
                        for &order in &cfg.orders {
                            let ok = match (kind, order) {
                                (_, Order::Init) => false,
                                (EventKind::ReadModifyWrite, o) => {
                                    o == Order::SeqCst && !view.is_float()
                                }
                                (_, Order::SeqCst) => !view.is_float(),
                                _ => true,
                            };
                            if ok {
                                letters.push(Letter {
                                    block,
                                    byte_index,
                                    view,
                                    kind,
                                    order,
                                });
                            }
                        }
                    }
                }
            }
        }
        letters.sort();
        letters.dedup();
        if letters.is_empty() {
            return Err(GenError::Config("the alphabet is empty".into()));
        }
        let l = letters.len() as u128;
        let mut total: u128 = 0;
        let mut comps = Vec::new();
        for c in compositions(cfg.event_count, cfg.max_threads) {
            let mut size: u128 = 1;
            for &m in &c {
                size = size.saturating_mul(l.saturating_pow(m as u32));
                if cfg.allow_branches {
                    size = size.saturating_mul(branch_shapes(m));
                }
            }
            total = total.saturating_add(size);
            comps.push((c, size));
        }

        // renamings of same-size blocks
        let idx: Vec<usize> = (0..cfg.blocks.len()).collect();
        let block_perms = permutations(&idx)
            .into_iter()
            .filter(|p| {
                p.iter()
                    .enumerate()
                    .all(|(i, &j)| cfg.blocks[i] == cfg.blocks[j])
            })
            .collect();
        Ok(ProgramSpace {
            cfg: cfg.clone(),
            letters,
            compositions: comps,
            total,
            block_perms,
        })
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// Number of raw shapes, including invalid branch placements and duplicates.
    pub fn raw_len(&self) -> u128 {
        self.total
    }

    /// The `i`-th raw shape, or `None` when its branch placement is invalid.
    pub fn decode(&self, mut i: u128) -> Option<Shape> {
        let l = self.letters.len() as u128;
        for (comp, size) in &self.compositions {
            if i >= *size {
                i -= size;
                continue;
            }
            let mut threads = Vec::with_capacity(comp.len());
            for &m in comp {
                let mut letters = Vec::with_capacity(m);
                for _ in 0..m {
                    letters.push(self.letters[(i % l) as usize]);
                    i /= l;
                }
                let mut branch = None;
                if self.cfg.allow_branches {
                    let shapes = branch_shapes(m);
                    let mut s = (i % shapes) as usize;
                    i /= shapes;
                    if s > 0 {
                        s -= 1;
                        'find: for c in 0..m.saturating_sub(1) {
                            for t in 1..m - c {
                                if s == 0 {
                                    branch = Some((c, t));
                                    break 'find;
                                }
                                s -= 1;
                            }
                        }
                        let (c, _) = branch.expect("branch index in range");
                        if letters[c].kind != EventKind::Read {
                            return None;
                        }
                    }
                }
                threads.push(ThreadShape { letters, branch });
            }
            return Some(Shape { threads });
        }
        None
    }

    /// The least shape equivalent to `s` under thread and block renaming.
    pub fn canonical(&self, s: &Shape) -> Shape {
        self.block_perms
            .iter()
            .map(|perm| {
                let mut threads: Vec<ThreadShape> = s
                    .threads
                    .iter()
                    .map(|t| ThreadShape {
                        letters: t
                            .letters
                            .iter()
                            .map(|l| Letter {
                                block: perm[l.block],
                                ..*l
                            })
                            .collect(),
                        branch: t.branch,
                    })
                    .collect();
                threads.sort();
                Shape { threads }
            })
            .min()
            .expect("identity permutation")
    }

    pub fn is_canonical(&self, s: &Shape) -> bool {
        self.canonical(s) == *s
    }

    pub fn build(&self, s: &Shape) -> Program {
        build_program(&self.cfg.blocks, s)
    }

    /// Every shape in index order, filtered to canonical ones when deduplicating.
    pub fn shapes(&self) -> impl Iterator<Item = Shape> + '_ {
        (0..self.total)
            .filter_map(|i| self.decode(i))
            .filter(|s| !self.cfg.dedupe || self.is_canonical(s))
    }
}

const BLOCK_NAMES: [&str; 6] = ["x", "y", "z", "u", "v", "w"];

fn block_name(i: usize) -> String {
    BLOCK_NAMES
        .get(i)
        .map_or_else(|| format!("b{i}"), |s| s.to_string())
}

/// Materializes a shape: payloads number the writes in thread-major order.
pub fn build_program(blocks: &[u32], s: &Shape) -> Program {
    let mut b = ProgramBuilder::new();
    for (i, &size) in blocks.iter().enumerate() {
        b.block(block_name(i), size);
    }
    let mut payload = 0i128;
    for (ti, t) in s.threads.iter().enumerate() {
        let th = b.thread(format!("t{}", ti + 1));
        let mut var = None;
        for (k, l) in t.letters.iter().enumerate() {
            let mut spec = match l.kind {
                EventKind::Read => EventSpec::read(l.block, l.byte_index, l.view),
                EventKind::Write => {
                    payload += 1;
                    EventSpec::write(l.block, l.byte_index, l.view, Literal::Int(payload))
                }
                EventKind::ReadModifyWrite => {
                    payload += 1;
                    EventSpec::rmw(
                        l.block,
                        l.byte_index,
                        l.view,
                        ModifyOp::Add,
                        Literal::Int(payload),
                    )
                }
            };
            if l.order == Order::SeqCst {
                spec = spec.seq_cst();
            }
            if let (Some((c, then_len)), Some(v)) = (t.branch, var) {
                if k > c {
                    let value = k <= c + then_len;
                    spec = spec
                        .guarded(ActivationGuard::always().with(GuardLiteral { var: v, value }));
                }
            }
            let pending = b.push(th, spec);
            if t.branch.is_some_and(|(c, _)| c == k) {
                var = Some(b.condition(pending, CmpOp::Eq, Literal::Int(0)));
            }
        }
    }
    b.finish()
}

/// Every program of the configured space, in a fixed order.
pub fn enumerate_programs(cfg: &GenConfig) -> Result<impl Iterator<Item = Program>, GenError> {
    let space = ProgramSpace::new(cfg)?;
    Ok((0..space.total).filter_map(move |i| {
        let s = space.decode(i)?;
        (!space.cfg.dedupe || space.is_canonical(&s)).then(|| space.build(&s))
    }))
}

/// `n` distinct programs drawn deterministically from the space.
///
/// Small spaces are enumerated and sampled without replacement; large ones
/// are sampled by drawing raw indices and keeping new canonical forms.
pub fn sample_corpus(cfg: &GenConfig, n: usize, seed: u64) -> Result<Vec<Program>, GenError> {
    let space = ProgramSpace::new(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if space.total <= ENUMERATE_LIMIT {
        let all: Vec<Shape> = space.shapes().collect();
        if n > all.len() {
            return Err(GenError::TooMany {
                wanted: n,
                available: all.len() as u128,
            });
        }
        let mut picked = index::sample(&mut rng, all.len(), n).into_vec();
        picked.sort_unstable();
        return Ok(picked.into_iter().map(|i| space.build(&all[i])).collect());
    }
    if n as u128 > space.total {
        return Err(GenError::TooMany {
            wanted: n,
            available: space.total,
        });
    }
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n);
    let attempts = n.saturating_mul(1000).max(10_000);
    for _ in 0..attempts {
        if out.len() == n {
            break;
        }
        let Some(s) = space.decode(rng.gen_range(0..space.total)) else {
            continue;
        };
        let s = if cfg.dedupe { space.canonical(&s) } else { s };
        if seen.insert(s.clone()) {
            out.push(space.build(&s));
        }
    }
    if out.len() < n {
        return Err(GenError::Exhausted {
            wanted: n,
            found: out.len(),
        });
    }
    Ok(out)
}
