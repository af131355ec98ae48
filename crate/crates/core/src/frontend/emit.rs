use std::fmt::Write as _;

use crate::program::{thread_steps, EventKind, MemoryEvent, Order, Program, Step};

fn access(p: &Program, e: &MemoryEvent) -> String {
    format!(
        "{}-{}[{}]",
        p.blocks[e.range.block].name, e.view, e.range.byte_index
    )
}

fn prefix(e: &MemoryEvent) -> String {
    let mut s = String::new();
    // read-modify-writes are seq-cst by construction
    if e.order == Order::SeqCst && e.kind != EventKind::ReadModifyWrite {
        s.push_str("atomic ");
    }
    if e.tear {
        s.push_str("tear ");
    }
    s
}

/// Renders a program back into `.emme` source.
///
/// Loops appear unrolled; re-parsing the output yields the same program.
pub fn emit_source(p: &Program) -> String {
    let mut out = String::new();
    for b in &p.blocks {
        let _ = writeln!(
            out,
            "var {} = new SharedArrayBuffer({});",
            b.name, b.size_bytes
        );
    }
    for (ti, t) in p.threads.iter().enumerate() {
        let _ = writeln!(out, "\nThread {} {{", t.name);
        let mut depth = 1;
        for step in thread_steps(p, ti) {
            match step {
                Step::If(id, var) => {
                    let (e, c) = (p.event(id), &p.control_vars[var.0]);
                    let _ = writeln!(
                        out,
                        "{}if ({}{} {} {}) {{",
                        "  ".repeat(depth),
                        prefix(e),
                        access(p, e),
                        c.op.symbol(),
                        c.constant
                    );
                    depth += 1;
                }
                Step::Else => {
                    let _ = writeln!(out, "{}}} else {{", "  ".repeat(depth - 1));
                }
                Step::EndIf => {
                    depth -= 1;
                    let _ = writeln!(out, "{}}}", "  ".repeat(depth));
                }
                Step::Event(id) => {
                    let e = p.event(id);
                    let line = match e.kind {
                        EventKind::Read => format!("{}print({});", prefix(e), access(p, e)),
                        EventKind::Write => format!(
                            "{}{} = {};",
                            prefix(e),
                            access(p, e),
                            e.payload.expect("write payload")
                        ),
                        EventKind::ReadModifyWrite => format!(
                            "{}{} {} {};",
                            prefix(e),
                            access(p, e),
                            e.modify.expect("modify op").symbol(),
                            e.payload.expect("operand")
                        ),
                    };
                    let _ = writeln!(out, "{}{line}", "  ".repeat(depth));
                }
            }
        }
        out.push_str("}\n");
    }
    out
}
