//! Two-level minimization (Quine-McCluskey with a greedy cover).

use std::collections::{BTreeMap, BTreeSet};

use super::{Cube, Dnf, Term};

/// Implicant as (value, don't-care mask); bit `i` is variable `i`.
type Imp = (u32, u32);

fn minterm(c: &Cube) -> u32 {
    c.iter()
        .enumerate()
        .fold(0, |m, (i, &b)| m | (b as u32) << i)
}

fn covers((value, mask): Imp, m: u32) -> bool {
    m & !mask == value
}

fn prime_implicants(minterms: &BTreeSet<u32>, vars: usize) -> BTreeSet<Imp> {
    let mut level: BTreeSet<Imp> = minterms.iter().map(|&m| (m, 0)).collect();
    let mut primes = BTreeSet::new();
    while !level.is_empty() {
        let mut next = BTreeSet::new();
        let mut merged = BTreeSet::new();
        for &(value, mask) in &level {
            for i in 0..vars {
                let bit = 1u32 << i;
                if mask & bit != 0 || value & bit != 0 {
                    continue;
                }
                let partner = (value | bit, mask);
                if level.contains(&partner) {
                    merged.insert((value, mask));
                    merged.insert(partner);
                    next.insert((value, mask | bit));
                }
            }
        }
        primes.extend(level.difference(&merged).copied());
        level = next;
    }
    primes
}

fn term(vars: usize, (value, mask): Imp) -> Term {
    (0..vars)
        .map(|i| (mask >> i & 1 == 0).then_some(value >> i & 1 == 1))
        .collect()
}

/// A DNF equivalent to the disjunction of `cubes`, with no more terms than
/// distinct cubes.
pub fn minimize(vars: usize, cubes: &[Cube]) -> Dnf {
    assert!(vars <= 31, "at most 31 variables");
    assert!(cubes.iter().all(|c| c.len() == vars), "cube width mismatch");
    let minterms: BTreeSet<u32> = cubes.iter().map(minterm).collect();
    let primes = prime_implicants(&minterms, vars);

    let mut owners: BTreeMap<u32, Vec<Imp>> = BTreeMap::new();
    for &m in &minterms {
        owners.insert(
            m,
            primes.iter().copied().filter(|&p| covers(p, m)).collect(),
        );
    }
    let mut chosen: BTreeSet<Imp> = owners
        .values()
        .filter(|ps| ps.len() == 1)
        .map(|ps| ps[0])
        .collect();
    let mut open: BTreeSet<u32> = minterms
        .iter()
        .copied()
        .filter(|&m| !chosen.iter().any(|&p| covers(p, m)))
        .collect();
    while !open.is_empty() {
        let best = primes
            .iter()
            .copied()
            .filter(|p| !chosen.contains(p))
            .max_by_key(|&p| {
                let gain = open.iter().filter(|&&m| covers(p, m)).count();
                (gain, p.1.count_ones(), std::cmp::Reverse(p))
            })
            .expect("every minterm has a prime implicant");
        open.retain(|&m| !covers(best, m));
        chosen.insert(best);
    }

    let mut terms: Vec<Term> = chosen.into_iter().map(|p| term(vars, p)).collect();
    terms.sort();
    Dnf { vars, terms }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merges_adjacent_cubes() {
        let d = minimize(2, &[vec![true, true], vec![true, false]]);
        assert_eq!(d.terms, vec![vec![Some(true), None]]);
    }

    #[test]
    fn empty_is_false_and_full_is_true() {
        assert!(minimize(3, &[]).is_false());
        let all: Vec<Cube> = (0..8u32)
            .map(|m| (0..3).map(|i| m >> i & 1 == 1).collect())
            .collect();
        assert_eq!(minimize(3, &all).terms, vec![vec![None, None, None]]);
    }

    #[test]
    fn xor_stays_two_terms() {
        let d = minimize(2, &[vec![true, false], vec![false, true]]);
        assert_eq!(d.terms.len(), 2);
        assert_eq!(d.truth_table(), vec![false, true, true, false]);
    }

    #[test]
    fn cyclic_cover_is_equivalent() {
        // minterms 0,1,2,5,6,7 over three variables have a cyclic prime chart
        let cubes: Vec<Cube> = [0u32, 1, 2, 5, 6, 7]
            .iter()
            .map(|m| (0..3).map(|i| m >> i & 1 == 1).collect())
            .collect();
        let d = minimize(3, &cubes);
        assert_eq!(d, minimize(3, &cubes));
        assert!(d.terms.len() <= 3);
        assert_eq!(d.truth_table(), Dnf::from_cubes(3, &cubes).truth_table());
    }
}
