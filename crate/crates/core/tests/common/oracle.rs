//! Straight-line reference evaluator.
//!
//! Enumerates every control valuation and the full Cartesian product of
//! byte sources, builds HB with Warshall's algorithm, tries every
//! permutation of the seq-cst events for MO and reconstructs values byte by
//! byte. Nothing here is shared with the engine beyond the program data and
//! the typed-array byte codec.

use std::collections::{BTreeMap, BTreeSet};

use emme::program::{CmpOp, EventKind, MemoryEvent, Order, Program};
use emme::value::{Literal, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleExecution {
    pub cv: Vec<bool>,
    pub rbf: Vec<(usize, usize, u32)>,
    pub values: BTreeMap<usize, Value>,
    pub output: String,
}

fn same_range(a: &MemoryEvent, b: &MemoryEvent) -> bool {
    a.range.block == b.range.block
        && a.range.byte_index == b.range.byte_index
        && a.range.element_size == b.range.element_size
}

fn covers(e: &MemoryEvent, block: usize, byte: u32) -> bool {
    e.range.block == block
        && e.range.byte_index <= byte
        && byte < e.range.byte_index + e.range.element_size
}

fn overlaps(a: &MemoryEvent, b: &MemoryEvent) -> bool {
    a.range.block == b.range.block
        && a.range.byte_index < b.range.byte_index + b.range.element_size
        && b.range.byte_index < a.range.byte_index + a.range.element_size
}

fn stores(e: &MemoryEvent) -> bool {
    e.order == Order::Init || matches!(e.kind, EventKind::Write | EventKind::ReadModifyWrite)
}

fn loads(e: &MemoryEvent) -> bool {
    e.order != Order::Init && matches!(e.kind, EventKind::Read | EventKind::ReadModifyWrite)
}

fn sc(e: &MemoryEvent) -> bool {
    e.order == Order::SeqCst
}

fn active(p: &Program, cv: &[bool]) -> Vec<bool> {
    p.events
        .iter()
        .map(|e| e.guard.0.iter().all(|l| cv[l.var.0] == l.value))
        .collect()
}

/// Every valuation where variables with an inactive condition read are false.
pub fn valuations(p: &Program) -> Vec<Vec<bool>> {
    let k = p.control_vars.len();
    (0..1u64 << k)
        .map(|m| (0..k).map(|i| m >> i & 1 == 1).collect::<Vec<bool>>())
        .filter(|cv| {
            let act = active(p, cv);
            p.control_vars
                .iter()
                .zip(cv)
                .all(|(c, &b)| act[c.read.0] || !b)
        })
        .collect()
}

/// Agent order: same thread, earlier in the thread's event list.
fn ao(p: &Program, a: usize, b: usize) -> bool {
    p.threads.iter().any(|t| {
        let pa = t.events.iter().position(|e| e.0 == a);
        let pb = t.events.iter().position(|e| e.0 == b);
        matches!((pa, pb), (Some(x), Some(y)) if x < y)
    })
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

fn reconstruct(
    p: &Program,
    act: &[bool],
    rbf: &[(usize, usize, u32)],
) -> Option<BTreeMap<usize, Value>> {
    let n = p.events.len();
    let mut bytes: Vec<Option<Vec<u8>>> = vec![None; n];
    for e in &p.events {
        if !act[e.id.0] {
            continue;
        }
        if e.order == Order::Init {
            bytes[e.id.0] = Some(vec![0; e.range.element_size as usize]);
        } else if e.kind == EventKind::Write {
            bytes[e.id.0] = Some(e.view.encode(e.payload.unwrap()));
        }
    }
    let mut values = BTreeMap::new();
    let reads: Vec<usize> = p
        .events
        .iter()
        .filter(|e| act[e.id.0] && loads(e))
        .map(|e| e.id.0)
        .collect();
    loop {
        let mut progress = false;
        for &r in &reads {
            if values.contains_key(&r) {
                continue;
            }
            let e = &p.events[r];
            let mut raw = Vec::new();
            let mut ready = true;
            for byte in e.range.byte_index..e.range.byte_index + e.range.element_size {
                let &(_, w, _) = rbf.iter().find(|t| t.0 == r && t.2 == byte).unwrap();
                match &bytes[w] {
                    Some(b) => raw.push(b[(byte - p.events[w].range.byte_index) as usize]),
                    None => ready = false,
                }
            }
            if !ready {
                continue;
            }
            let v = e.view.decode(&raw);
            if e.kind == EventKind::ReadModifyWrite {
                let old = match v {
                    Value::Int(i) => i,
                    Value::Float(_) => unreachable!("float read-modify-write"),
                };
                let operand = match e.payload.unwrap() {
                    Literal::Int(i) => i,
                    Literal::Float(f) => f as i128,
                };
                let new = e.modify.unwrap().apply(old, operand);
                bytes[r] = Some(e.view.encode(Literal::Int(new)));
            }
            values.insert(r, v);
            progress = true;
        }
        if values.len() == reads.len() {
            return Some(values);
        }
        if !progress {
            return None;
        }
    }
}

fn condition(op: CmpOp, v: Value, c: Literal) -> bool {
    let eq = match (v, c) {
        (Value::Int(a), Literal::Int(b)) => a == b,
        (a, b) => {
            let x = match a {
                Value::Int(i) => i as f64,
                Value::Float(f) => f,
            };
            x == b.as_f64()
        }
    };
    match op {
        CmpOp::Eq => eq,
        CmpOp::Ne => !eq,
    }
}

/// Values of the active reads when the candidate is valid.
pub fn check(
    p: &Program,
    cv: &[bool],
    rbf: &[(usize, usize, u32)],
) -> Option<BTreeMap<usize, Value>> {
    let n = p.events.len();
    let act = active(p, cv);
    let ev = |i: usize| &p.events[i];

    let mut rf: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &(r, w, _) in rbf {
        rf.insert((r, w));
    }

    let mut sw: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &(r, w) in &rf {
        if !sc(ev(r)) || r == w {
            continue;
        }
        let all_init = rf
            .iter()
            .filter(|x| x.0 == r)
            .all(|x| ev(x.1).order == Order::Init);
        if (sc(ev(w)) && same_range(ev(w), ev(r))) || (ev(w).order == Order::Init && all_init) {
            sw.insert((w, r));
        }
    }

    let mut hb = vec![vec![false; n]; n];
    for a in 0..n {
        for b in 0..n {
            if a == b || !act[a] || !act[b] {
                continue;
            }
            let init_edge =
                ev(a).order == Order::Init && ev(b).order != Order::Init && overlaps(ev(a), ev(b));
            hb[a][b] = ao(p, a, b) || sw.contains(&(a, b)) || init_edge;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if hb[i][k] && hb[k][j] {
                    hb[i][j] = true;
                }
            }
        }
    }
    if (0..n).any(|i| hb[i][i]) {
        return None;
    }

    for &(r, w, byte) in rbf {
        if hb[r][w] {
            return None;
        }
        let block = ev(r).range.block;
        let shadowed = (0..n).any(|v| {
            v != w
                && v != r
                && act[v]
                && stores(ev(v))
                && covers(ev(v), block, byte)
                && hb[w][v]
                && hb[v][r]
        });
        if shadowed {
            return None;
        }
    }

    for r in 0..n {
        if !act[r] || !loads(ev(r)) || ev(r).tear {
            continue;
        }
        let same: BTreeSet<usize> = rf
            .iter()
            .filter(|x| x.0 == r && !ev(x.1).tear && same_range(ev(x.1), ev(r)))
            .map(|x| x.1)
            .collect();
        if same.len() >= 2 {
            return None;
        }
    }

    let scs: Vec<usize> = (0..n).filter(|&i| act[i] && sc(ev(i))).collect();
    let sca = permutations(&scs).into_iter().any(|mo| {
        let pos = |e: usize| mo.iter().position(|&m| m == e).unwrap();
        let extends_hb = scs
            .iter()
            .all(|&a| scs.iter().all(|&b| !hb[a][b] || pos(a) < pos(b)));
        let fenced = sw
            .iter()
            .filter(|&&(w, r)| sc(ev(w)) && sc(ev(r)))
            .all(|&(w, r)| {
                pos(w) < pos(r)
                    && !scs.iter().any(|&v| {
                        v != w
                            && v != r
                            && stores(ev(v))
                            && same_range(ev(v), ev(r))
                            && pos(w) < pos(v)
                            && pos(v) < pos(r)
                    })
            });
        extends_hb && fenced
    });
    if !sca {
        return None;
    }

    let values = reconstruct(p, &act, rbf)?;
    for (i, c) in p.control_vars.iter().enumerate() {
        if act[c.read.0] && condition(c.op, values[&c.read.0], c.constant) != cv[i] {
            return None;
        }
    }
    Some(values)
}

fn output(p: &Program, values: &BTreeMap<usize, Value>) -> String {
    let mut items: Vec<String> = values
        .iter()
        .map(|(&r, v)| {
            let e = &p.events[r];
            format!("{}:{}={}", p.threads[e.thread.unwrap()].name, e.name, v)
        })
        .collect();
    items.sort();
    if items.is_empty() {
        "(none)".into()
    } else {
        items.join(";")
    }
}

/// All valid executions, by brute force.
pub fn executions(p: &Program) -> Vec<OracleExecution> {
    let mut out = Vec::new();
    for cv in valuations(p) {
        let act = active(p, &cv);
        let mut slots: Vec<(usize, u32, Vec<usize>)> = Vec::new();
        for r in p.events.iter().filter(|e| act[e.id.0] && loads(e)) {
            for byte in r.range.byte_index..r.range.byte_index + r.range.element_size {
                let writers: Vec<usize> = p
                    .events
                    .iter()
                    .filter(|w| {
                        act[w.id.0] && stores(w) && w.id != r.id && covers(w, r.range.block, byte)
                    })
                    .map(|w| w.id.0)
                    .collect();
                slots.push((r.id.0, byte, writers));
            }
        }
        let mut choice = vec![0usize; slots.len()];
        if slots.iter().any(|s| s.2.is_empty()) {
            continue;
        }
        loop {
            let mut rbf: Vec<(usize, usize, u32)> = slots
                .iter()
                .zip(&choice)
                .map(|((r, b, ws), &c)| (*r, ws[c], *b))
                .collect();
            rbf.sort();
            if let Some(values) = check(p, &cv, &rbf) {
                out.push(OracleExecution {
                    cv: cv.clone(),
                    output: output(p, &values),
                    rbf,
                    values,
                });
            }
            let mut i = 0;
            while i < slots.len() {
                choice[i] += 1;
                if choice[i] < slots[i].2.len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
            if i == slots.len() {
                break;
            }
        }
    }
    out.sort_by(|a, b| (&a.cv, &a.rbf).cmp(&(&b.cv, &b.rbf)));
    out
}
