//! The shipped predicate set Π.

use crate::exec::ValidExecution;
use crate::program::Program;

/// A Boolean property of one valid execution.
#[derive(Clone, Copy)]
pub struct Predicate {
    pub id: &'static str,
    pub description: &'static str,
    pub eval: fn(&Program, &ValidExecution) -> bool,
}

impl std::fmt::Debug for Predicate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id)
    }
}

impl PartialEq for Predicate {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for Predicate {}

fn r2h(_: &Program, x: &ValidExecution) -> bool {
    x.witness
        .rf
        .iter()
        .all(|(r, w)| x.witness.hb.contains(w, r))
}

fn sw_nonempty(_: &Program, x: &ValidExecution) -> bool {
    !x.witness.sw.is_empty()
}

fn mo_nonempty(_: &Program, x: &ValidExecution) -> bool {
    !x.witness.mo.is_empty()
}

fn rf_noninit(p: &Program, x: &ValidExecution) -> bool {
    x.witness.rf.iter().any(|(_, w)| !p.event(w).is_init())
}

fn read_mixed(_: &Program, x: &ValidExecution) -> bool {
    let rf = &x.witness.rf;
    rf.iter()
        .any(|(r, w)| rf.iter().any(|(r2, w2)| r2 == r && w2 != w))
}

fn rf_hb_latest(p: &Program, x: &ValidExecution) -> bool {
    let hb = &x.witness.hb;
    x.witness.rbf.iter().all(|t| {
        let block = p.event(t.read).range.block;
        hb.contains(t.write, t.read)
            && p.events.iter().all(|v| {
                v.id == t.write
                    || v.id == t.read
                    || !(v.writes() || v.is_init())
                    || !v.guard.holds(&x.cv)
                    || !v.range.contains(block, t.byte)
                    || !hb.contains(v.id, t.read)
                    || hb.contains(v.id, t.write)
            })
    })
}

fn rf_same_thread(p: &Program, x: &ValidExecution) -> bool {
    x.witness
        .rf
        .iter()
        .all(|(r, w)| match (p.event(w).thread, p.event(r).thread) {
            (Some(tw), Some(tr)) if tw == tr => {
                let order = &p.threads[tr].events;
                order.iter().position(|&e| e == w) < order.iter().position(|&e| e == r)
            }
            _ => false,
        })
}

fn rf_cross_thread(p: &Program, x: &ValidExecution) -> bool {
    x.witness.rf.iter().any(|(r, w)| {
        let we = p.event(w);
        !we.is_init() && we.thread != p.event(r).thread
    })
}

fn sw_eq_hb_sc(p: &Program, x: &ValidExecution) -> bool {
    let sc_hb: crate::relation::Relation2 = x
        .witness
        .hb
        .iter()
        .filter(|&(a, b)| p.event(a).is_seq_cst() && p.event(b).is_seq_cst())
        .collect();
    sc_hb == x.witness.sw
}

fn mo_ext_ao(p: &Program, x: &ValidExecution) -> bool {
    let pos = |e| x.witness.mo.iter().position(|&m| m == e);
    p.threads.iter().all(|t| {
        let sc: Vec<_> = t
            .events
            .iter()
            .copied()
            .filter(|&e| p.event(e).is_seq_cst() && p.event(e).guard.holds(&x.cv))
            .collect();
        sc.windows(2).all(|w| match (pos(w[0]), pos(w[1])) {
            (Some(a), Some(b)) => a < b,
            _ => false,
        })
    })
}

fn init_despite_write(p: &Program, x: &ValidExecution) -> bool {
    x.witness.rbf.iter().any(|t| {
        let block = p.event(t.read).range.block;
        p.event(t.write).is_init()
            && p.program_events().any(|v| {
                v.id != t.read
                    && v.writes()
                    && v.guard.holds(&x.cv)
                    && v.range.contains(block, t.byte)
            })
    })
}

/// The eleven predicates shipped by default, in cube order.
pub const DEFAULT_PREDICATES: [Predicate; 11] = [
    Predicate {
        id: "R2H",
        description: "every reads-from pair (r, w) has w happen before r",
        eval: r2h,
    },
    Predicate {
        id: "SW_NONEMPTY",
        description: "some write synchronizes with some read",
        eval: sw_nonempty,
    },
    Predicate {
        id: "MO_NONEMPTY",
        description: "the memory order is nonempty",
        eval: mo_nonempty,
    },
    Predicate {
        id: "RF_NONINIT",
        description: "some read takes a byte from a non-init write",
        eval: rf_noninit,
    },
    Predicate {
        id: "READ_MIXED",
        description: "some read takes bytes from two different writes",
        eval: read_mixed,
    },
    Predicate {
        id: "RF_HB_LATEST",
        description: "every byte is read from the unique HB-latest writer before the read",
        eval: rf_hb_latest,
    },
    Predicate {
        id: "RF_SAME_THREAD",
        description: "every read takes its bytes from earlier writes of its own thread",
        eval: rf_same_thread,
    },
    Predicate {
        id: "RF_CROSS_THREAD",
        description: "some read takes a byte from a non-init write of another thread",
        eval: rf_cross_thread,
    },
    Predicate {
        id: "SW_EQ_HB_SC",
        description: "synchronizes-with equals happens-before restricted to seq-cst events",
        eval: sw_eq_hb_sc,
    },
    Predicate {
        id: "MO_EXT_AO",
        description: "memory order follows agent order on each thread's seq-cst events",
        eval: mo_ext_ao,
    },
    Predicate {
        id: "INIT_DESPITE_WRITE",
        description: "some read takes an init byte although a program write covers it",
        eval: init_despite_write,
    },
];

pub fn default_predicates() -> Vec<Predicate> {
    DEFAULT_PREDICATES.to_vec()
}

pub fn predicate_by_id(id: &str) -> Option<Predicate> {
    DEFAULT_PREDICATES
        .iter()
        .copied()
        .find(|p| p.id.eq_ignore_ascii_case(id))
}
