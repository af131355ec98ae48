//! Graphviz rendering of a valid execution.
//!
//! Black edges are the transitive reduction of HB, red edges are RBF
//! triples (write to read, labelled with the byte) and blue edges are SW.
//! The memory order is listed in the graph label.

use std::fmt::Write as _;

use crate::exec::ValidExecution;
use crate::program::{EventId, Program};

fn node_label(p: &Program, x: &ValidExecution, id: EventId) -> String {
    let e = p.event(id);
    let thread = e.thread.map_or("init", |t| p.threads[t].name.as_str());
    let mut label = format!("{id}_{}_{thread}", e.kind.letter());
    if !e.is_init() {
        let block = &p.blocks[e.range.block].name;
        let _ = write!(
            label,
            "\\n{block}-{:?}[{}]",
            e.view,
            e.range.byte_index / e.view.element_size()
        );
    }
    if let Some(v) = x.witness.values.get(&id) {
        let _ = write!(label, " = {v}");
    }
    label
}

fn escape(s: &str) -> String {
    s.replace('"', "\\\"")
}

/// DOT source for `x`; output is deterministic for a given execution.
pub fn emit_dot(p: &Program, x: &ValidExecution) -> String {
    let mut out = String::from("digraph execution {\n");
    let mo: Vec<String> = x.witness.mo.iter().map(|e| e.to_string()).collect();
    let mo = if mo.is_empty() {
        "(empty)".to_string()
    } else {
        mo.join(" < ")
    };
    let _ = writeln!(out, "  labelloc=t;\n  labeljust=r;\n  label=\"MO: {mo}\";");
    out.push_str("  node [shape=box, fontname=monospace];\n");
    for e in p.events.iter().filter(|e| e.guard.holds(&x.cv)) {
        let _ = writeln!(
            out,
            "  {} [label=\"{}\"];",
            e.id,
            escape(&node_label(p, x, e.id))
        );
    }
    for (a, b) in x.witness.hb.transitive_reduction().iter() {
        let _ = writeln!(out, "  {a} -> {b} [color=black];");
    }
    for t in x.witness.rbf.iter() {
        let _ = writeln!(
            out,
            "  {} -> {} [color=red, fontcolor=red, label=\"{}\"];",
            t.write, t.read, t.byte
        );
    }
    for (a, b) in x.witness.sw.iter() {
        let _ = writeln!(out, "  {a} -> {b} [color=blue, style=dashed];");
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::enumerate_executions;
    use crate::frontend::parse_str;

    #[test]
    fn draws_every_relation() {
        let p = parse_str(
            "var x = new SharedArrayBuffer();\nThread t1 { atomic x-I8[0] = 1; }\nThread t2 { atomic print(x-I8[0]); }\n",
        )
        .unwrap();
        let ve = enumerate_executions(&p).unwrap();
        let x = ve.iter().find(|x| !x.witness.sw.is_empty()).unwrap();
        let dot = emit_dot(&p, x);
        assert!(dot.starts_with("digraph execution {"));
        assert!(dot.contains("color=blue"));
        assert!(dot.contains("color=red"));
        assert!(dot.contains("label=\"MO: "));
        assert!(dot.contains("_R_t2"));
        assert_eq!(dot, emit_dot(&p, x));
    }
}
