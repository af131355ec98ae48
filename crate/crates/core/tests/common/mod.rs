#![allow(dead_code)]

pub mod oracle;

use emme::exec::ValidExecution;
use emme::program::Program;

/// Engine result in the oracle's shape: (cv, sorted rbf triples, output key).
pub type Signature = (Vec<bool>, Vec<(usize, usize, u32)>, String);

pub fn engine_signatures(p: &Program, ve: &[ValidExecution]) -> Vec<Signature> {
    let mut out: Vec<Signature> = ve
        .iter()
        .map(|x| {
            let mut rbf: Vec<_> = x
                .witness
                .rbf
                .iter()
                .map(|t| (t.read.0, t.write.0, t.byte))
                .collect();
            rbf.sort();
            (x.cv.0.clone(), rbf, x.output_key(p))
        })
        .collect();
    out.sort();
    out
}

pub fn oracle_signatures(p: &Program) -> Vec<Signature> {
    let mut out: Vec<Signature> = oracle::executions(p)
        .into_iter()
        .map(|x| (x.cv, x.rbf, x.output))
        .collect();
    out.sort();
    out
}

pub const MIXED: &str = include_str!("../../../../programs/mixed.emme");
