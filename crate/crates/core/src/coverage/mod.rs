//! Behavioral coverage constraints.
//!
//! Each valid execution satisfies exactly one cube over the predicate set Π.
//! Splitting the executions into observed and unobserved ones by output
//! and collecting the cubes each side realizes gives δ_OBS and δ_UNOBS; their
//! minimized disjunctions are Σ_OBS and Σ_UNOBS. Because a valid execution
//! pins every relation, a cube is consistent with the observations exactly
//! when some observed execution realizes it, so no solver is involved.

mod minimize;
mod predicates;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::ValidExecution;
use crate::program::Program;

pub use minimize::minimize;
pub use predicates::{default_predicates, predicate_by_id, Predicate, DEFAULT_PREDICATES};

/// Polarity of every predicate, in predicate order.
pub type Cube = Vec<bool>;

/// A conjunction; `None` leaves a variable unconstrained.
pub type Term = Vec<Option<bool>>;

/// A disjunction of terms over a fixed number of variables. No terms is false.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dnf {
    pub vars: usize,
    pub terms: Vec<Term>,
}

impl Dnf {
    pub fn falsum(vars: usize) -> Self {
        Dnf {
            vars,
            terms: Vec::new(),
        }
    }

    pub fn from_cubes(vars: usize, cubes: &[Cube]) -> Self {
        Dnf {
            vars,
            terms: cubes
                .iter()
                .map(|c| c.iter().map(|&b| Some(b)).collect())
                .collect(),
        }
    }

    pub fn eval(&self, x: &[bool]) -> bool {
        self.terms.iter().any(|t| {
            t.iter()
                .zip(x)
                .all(|(lit, &v)| lit.map_or(true, |want| want == v))
        })
    }

    /// Value under every assignment; bit `i` of the index is variable `i`.
    pub fn truth_table(&self) -> Vec<bool> {
        assert!(self.vars <= 20, "truth tables are limited to 20 variables");
        (0..1usize << self.vars)
            .map(|m| {
                let x: Vec<bool> = (0..self.vars).map(|i| m >> i & 1 == 1).collect();
                self.eval(&x)
            })
            .collect()
    }

    pub fn is_false(&self) -> bool {
        self.terms.is_empty()
    }

    /// Each term as a list of literals such as `R2H` or `!SW_NONEMPTY`.
    pub fn literals(&self, names: &[String]) -> Vec<Vec<String>> {
        self.terms
            .iter()
            .map(|t| {
                t.iter()
                    .zip(names)
                    .filter_map(|(lit, name)| lit.map(|b| literal(name, b)))
                    .collect()
            })
            .collect()
    }

    pub fn display<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        DnfDisplay { dnf: self, names }
    }
}

fn literal(name: &str, positive: bool) -> String {
    if positive {
        name.to_string()
    } else {
        format!("!{name}")
    }
}

struct DnfDisplay<'a> {
    dnf: &'a Dnf,
    names: &'a [String],
}

impl fmt::Display for DnfDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dnf.is_false() {
            return f.write_str("false");
        }
        let terms: Vec<String> = self
            .dnf
            .literals(self.names)
            .into_iter()
            .map(|t| {
                if t.is_empty() {
                    "true".to_string()
                } else {
                    t.join(" & ")
                }
            })
            .collect();
        f.write_str(&terms.join(" | "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comparison {
    /// Σ_OBS → ¬Σ_UNOBS, i.e. no execution could satisfy both.
    pub obs_implies_not_unobs: bool,
    pub intersection_satisfiable: bool,
    pub obs_implies_unobs: bool,
    pub unobs_implies_obs: bool,
    pub equivalent: bool,
    /// Σ_OBS ∨ Σ_UNOBS holds for every assignment.
    pub union_valid: bool,
    pub shared_literals: Vec<String>,
    pub obs_only_literals: Vec<String>,
    pub unobs_only_literals: Vec<String>,
}

fn literal_set(d: &Dnf, names: &[String]) -> BTreeSet<String> {
    d.literals(names).into_iter().flatten().collect()
}

/// Truth-table comparison of two formulas over the same variables.
pub fn compare(obs: &Dnf, unobs: &Dnf, names: &[String]) -> Comparison {
    assert_eq!(obs.vars, unobs.vars, "formulas over different variables");
    let (a, b) = (obs.truth_table(), unobs.truth_table());
    let both = a.iter().zip(&b).any(|(&x, &y)| x && y);
    let (la, lb) = (literal_set(obs, names), literal_set(unobs, names));
    Comparison {
        obs_implies_not_unobs: !both,
        intersection_satisfiable: both,
        obs_implies_unobs: a.iter().zip(&b).all(|(&x, &y)| !x || y),
        unobs_implies_obs: a.iter().zip(&b).all(|(&x, &y)| !y || x),
        equivalent: a == b,
        union_valid: a.iter().zip(&b).all(|(&x, &y)| x || y),
        shared_literals: la.intersection(&lb).cloned().collect(),
        obs_only_literals: la.difference(&lb).cloned().collect(),
        unobs_only_literals: lb.difference(&la).cloned().collect(),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverageError {
    #[error("observed output `{0}` is not a valid execution; classify the run first")]
    UnknownObserved(String),
    #[error("line {line}: unknown predicate `{id}`")]
    UnknownPredicate { line: usize, id: String },
    #[error("line {line}: predicate `{id}` listed twice")]
    DuplicatePredicate { line: usize, id: String },
    #[error("the predicate list is empty")]
    NoPredicates,
}

/// Reads a predicate list: one id per line, `#` starts a comment.
pub fn parse_predicate_list(text: &str) -> Result<Vec<Predicate>, CoverageError> {
    let mut out: Vec<Predicate> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let id = line.split('#').next().unwrap_or("").trim();
        if id.is_empty() {
            continue;
        }
        let p = predicate_by_id(id).ok_or_else(|| CoverageError::UnknownPredicate {
            line: i + 1,
            id: id.to_string(),
        })?;
        if out.contains(&p) {
            return Err(CoverageError::DuplicatePredicate {
                line: i + 1,
                id: id.to_string(),
            });
        }
        out.push(p);
    }
    if out.is_empty() {
        return Err(CoverageError::NoPredicates);
    }
    Ok(out)
}

/// The cube of Δ(Π) that `x` satisfies.
pub fn eval_cube_vector(p: &Program, x: &ValidExecution, preds: &[Predicate]) -> Cube {
    preds.iter().map(|pr| (pr.eval)(p, x)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageResult {
    pub predicates: Vec<String>,
    pub delta_obs: Vec<Cube>,
    pub delta_unobs: Vec<Cube>,
    pub sigma_obs: Dnf,
    pub sigma_unobs: Dnf,
    pub comparison: Comparison,
}

/// JSON form of a [`CoverageResult`] with formulas as literal lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub predicates: Vec<String>,
    pub delta_obs: Vec<Vec<String>>,
    pub delta_unobs: Vec<Vec<String>>,
    pub sigma_obs: Vec<Vec<String>>,
    pub sigma_unobs: Vec<Vec<String>>,
    pub sigma_obs_text: String,
    pub sigma_unobs_text: String,
    pub comparison: Comparison,
}

impl CoverageResult {
    pub fn report(&self) -> CoverageReport {
        let names = &self.predicates;
        let n = names.len();
        CoverageReport {
            predicates: names.clone(),
            delta_obs: Dnf::from_cubes(n, &self.delta_obs).literals(names),
            delta_unobs: Dnf::from_cubes(n, &self.delta_unobs).literals(names),
            sigma_obs: self.sigma_obs.literals(names),
            sigma_unobs: self.sigma_unobs.literals(names),
            sigma_obs_text: self.sigma_obs.display(names).to_string(),
            sigma_unobs_text: self.sigma_unobs.display(names).to_string(),
            comparison: self.comparison.clone(),
        }
    }
}

/// Splits `ve` by whether each output was observed and characterizes both sides.
pub fn synthesize(
    p: &Program,
    ve: &[ValidExecution],
    observed: &BTreeSet<String>,
    preds: &[Predicate],
) -> Result<CoverageResult, CoverageError> {
    let keys: Vec<String> = ve.iter().map(|x| x.output_key(p)).collect();
    if let Some(stray) = observed.iter().find(|o| !keys.contains(o)) {
        return Err(CoverageError::UnknownObserved(stray.clone()));
    }
    let mut obs = BTreeSet::new();
    let mut unobs = BTreeSet::new();
    for (x, key) in ve.iter().zip(&keys) {
        let cube = eval_cube_vector(p, x, preds);
        if observed.contains(key) {
            obs.insert(cube);
        } else {
            unobs.insert(cube);
        }
    }
    let n = preds.len();
    let delta_obs: Vec<Cube> = obs.into_iter().collect();
    let delta_unobs: Vec<Cube> = unobs.into_iter().collect();
    let sigma_obs = minimize(n, &delta_obs);
    let sigma_unobs = minimize(n, &delta_unobs);
    let names: Vec<String> = preds.iter().map(|p| p.id.to_string()).collect();
    let comparison = compare(&sigma_obs, &sigma_unobs, &names);
    Ok(CoverageResult {
        predicates: names,
        delta_obs,
        delta_unobs,
        sigma_obs,
        sigma_unobs,
        comparison,
    })
}
