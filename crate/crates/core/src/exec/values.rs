//! Byte composition and value reconstruction for candidate executions.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::program::{ControlValuation, EventId, EventKind, Program};
use crate::relation::Relation3;
use crate::value::{Literal, Value, ViewKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValueError {
    #[error("byte {byte} of {read} has no source")]
    UncoveredByte { read: EventId, byte: u32 },
    #[error("byte {byte} of {read} has more than one source")]
    DuplicateByte { read: EventId, byte: u32 },
    #[error("{write} stores no bytes yet")]
    MissingWrite { write: EventId },
    #[error("read-modify-writes {0:?} feed each other's values")]
    Cycle(Vec<EventId>),
}

/// Gathers the bytes `read` observes, in its own byte order.
///
/// Byte `i` of the block comes from the writer's stored bytes at offset
/// `i - writer.byte_index`.
pub fn compose_write_event_bytes(
    p: &Program,
    read: EventId,
    rbf: &Relation3,
    write_bytes: &BTreeMap<EventId, Vec<u8>>,
) -> Result<Vec<u8>, ValueError> {
    let r = p.event(read);
    let mut out: Vec<Option<u8>> = vec![None; r.range.element_size as usize];
    for t in rbf.of_read(read) {
        let slot = t
            .byte
            .checked_sub(r.range.byte_index)
            .and_then(|k| out.get_mut(k as usize))
            .ok_or(ValueError::UncoveredByte { read, byte: t.byte })?;
        if slot.is_some() {
            return Err(ValueError::DuplicateByte { read, byte: t.byte });
        }
        let w = p.event(t.write);
        let bytes = write_bytes
            .get(&t.write)
            .ok_or(ValueError::MissingWrite { write: t.write })?;
        *slot = Some(bytes[(t.byte - w.range.byte_index) as usize]);
    }
    out.iter()
        .enumerate()
        .map(|(k, b)| {
            b.ok_or(ValueError::UncoveredByte {
                read,
                byte: r.range.byte_index + k as u32,
            })
        })
        .collect()
}

/// Little-endian interpretation of `bytes` under `view`.
pub fn decode_value(bytes: &[u8], view: ViewKind) -> Value {
    view.decode(bytes)
}

/// Bytes a read-modify-write stores after observing `old`.
pub(crate) fn modified_bytes(
    view: ViewKind,
    op: crate::program::ModifyOp,
    old: Value,
    operand: Literal,
) -> Vec<u8> {
    let old = match old {
        Value::Int(v) => v,
        Value::Float(x) => x as i128,
    };
    let operand = match operand {
        Literal::Int(v) => v,
        Literal::Float(x) => x as i128,
    };
    view.encode(Literal::Int(op.apply(old, operand)))
}

/// Values observed by every active read and read-modify-write.
///
/// Plain writes store their constant, init events store zeros, and a
/// read-modify-write stores its operator applied to what it read. Values
/// are resolved in dependency order; read-modify-writes that source each
/// other are rejected.
pub fn reconstruct_values(
    p: &Program,
    cv: &ControlValuation,
    rbf: &Relation3,
) -> Result<BTreeMap<EventId, Value>, ValueError> {
    let mut stored: BTreeMap<EventId, Vec<u8>> = BTreeMap::new();
    let mut pending: Vec<EventId> = Vec::new();
    for e in &p.events {
        if !e.guard.holds(cv) {
            continue;
        }
        if e.is_init() {
            stored.insert(e.id, vec![0; e.range.element_size as usize]);
        } else if e.kind == EventKind::Write {
            stored.insert(e.id, e.view.encode(e.payload.expect("write payload")));
        }
        if e.reads() {
            pending.push(e.id);
        }
    }

    let mut values = BTreeMap::new();
    while !pending.is_empty() {
        let before = pending.len();
        let mut blocked = Vec::new();
        for r in pending {
            let ready = rbf.of_read(r).all(|t| stored.contains_key(&t.write));
            if !ready {
                blocked.push(r);
                continue;
            }
            let e = p.event(r);
            let v = decode_value(&compose_write_event_bytes(p, r, rbf, &stored)?, e.view);
            if e.kind == EventKind::ReadModifyWrite {
                let op = e.modify.expect("modify op");
                stored.insert(
                    r,
                    modified_bytes(e.view, op, v, e.payload.expect("operand")),
                );
            }
            values.insert(r, v);
        }
        if blocked.len() == before {
            return Err(ValueError::Cycle(blocked));
        }
        pending = blocked;
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_str;

    fn e(n: usize) -> EventId {
        EventId(n - 1)
    }

    #[test]
    fn else_candidate_reads_769() {
        let p = parse_str(crate::frontend::tests::MIXED).unwrap();
        let rbf: Relation3 = [(e(4), e(1), 0), (e(3), e(2), 0), (e(3), e(6), 1)]
            .into_iter()
            .collect();
        let values = reconstruct_values(&p, &ControlValuation(vec![false]), &rbf).unwrap();
        assert_eq!(values[&e(3)], Value::Int(769));
        assert_eq!(values[&e(4)], Value::Int(0));
    }

    #[test]
    fn compose_uses_writer_offset() {
        let p = parse_str("var x = new SharedArrayBuffer(4);\nThread a { x-I8[2] = 5; }\nThread b { print(x-I16[2]); }")
            .unwrap();
        let rbf: Relation3 = [(e(3), e(2), 2), (e(3), e(1), 3)].into_iter().collect();
        let mut stored = BTreeMap::new();
        stored.insert(e(1), vec![0; 4]);
        stored.insert(e(2), vec![5]);
        assert_eq!(
            compose_write_event_bytes(&p, e(3), &rbf, &stored).unwrap(),
            vec![5, 0]
        );
        let short: Relation3 = [(e(3), e(2), 2)].into_iter().collect();
        assert_eq!(
            compose_write_event_bytes(&p, e(3), &short, &stored),
            Err(ValueError::UncoveredByte {
                read: e(3),
                byte: 3
            })
        );
    }

    #[test]
    fn rmw_chain() {
        let p = parse_str("var x = new SharedArrayBuffer();\nThread a { x-I8[0] = 4; }\nThread b { x-I8[0] += 1; print(x-I8[0]); }")
            .unwrap();
        let rbf: Relation3 = [(e(3), e(2), 0), (e(4), e(3), 0)].into_iter().collect();
        let values = reconstruct_values(&p, &ControlValuation::default(), &rbf).unwrap();
        assert_eq!(values[&e(3)], Value::Int(4));
        assert_eq!(values[&e(4)], Value::Int(5));
    }

    #[test]
    fn rmw_cycle_rejected() {
        let p = parse_str("var x = new SharedArrayBuffer();\nThread a { x-I8[0] += 1; }\nThread b { x-I8[0] += 2; }").unwrap();
        let rbf: Relation3 = [(e(2), e(3), 0), (e(3), e(2), 0)].into_iter().collect();
        assert!(matches!(
            reconstruct_values(&p, &ControlValuation::default(), &rbf),
            Err(ValueError::Cycle(_))
        ));
    }

    #[test]
    fn decode_boundaries() {
        assert_eq!(decode_value(&[0x01, 0x03], ViewKind::I16), Value::Int(769));
        assert_eq!(decode_value(&[0xFF], ViewKind::I8), Value::Int(-1));
        assert_eq!(decode_value(&[0xFF], ViewKind::U8), Value::Int(255));
    }
}
