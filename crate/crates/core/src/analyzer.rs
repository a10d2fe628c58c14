//! Chooses what to optimize for a given predicate.
//!
//! The search drives one output towards the boundary of the predicate: a
//! leaf `oi <= ...` is attacked by maximizing `oi`, a leaf `oi >= ...` by
//! minimizing it. Predicates in which every leaf bounds the same output from
//! the same side collapse to a single objective; a connective chain of such
//! groups yields one objective per group. Anything else falls back to one
//! objective per leaf (plus the opposite objective on the right-hand output
//! of a variable-variable leaf).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::property::{Leaf, Predicate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Maximize,
    Minimize,
}

impl Direction {
    /// True when `a` is strictly better than `b` under this direction.
    #[inline]
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Direction::Maximize => a > b,
            Direction::Minimize => a < b,
        }
    }

    fn opposite(self) -> Self {
        match self {
            Direction::Maximize => Direction::Minimize,
            Direction::Minimize => Direction::Maximize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveSource {
    SpecialStructure,
    PerTerm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Objective {
    pub direction: Direction,
    /// 0-based output index.
    pub target: usize,
    pub source: ObjectiveSource,
}

impl Objective {
    pub fn maximize(target: usize) -> Self {
        Self {
            direction: Direction::Maximize,
            target,
            source: ObjectiveSource::PerTerm,
        }
    }

    pub fn minimize(target: usize) -> Self {
        Self {
            direction: Direction::Minimize,
            target,
            source: ObjectiveSource::PerTerm,
        }
    }

    /// The scalar this objective ranks samples by.
    pub fn value(&self, y: &[f64]) -> Result<f64> {
        y.get(self.target).copied().ok_or(Error::IndexOutOfRange {
            index: self.target,
            len: y.len(),
        })
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = match self.direction {
            Direction::Maximize => "maximize",
            Direction::Minimize => "minimize",
        };
        write!(f, "{d} o{}", self.target + 1)
    }
}

/// Free-function form of [`Objective::value`].
pub fn objective_value(obj: &Objective, y: &[f64]) -> Result<f64> {
    obj.value(y)
}

/// Ordered, duplicate-free list of objectives to try.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectivePlan {
    objectives: Vec<Objective>,
}

impl ObjectivePlan {
    /// Builds a plan, dropping repeated (direction, target) pairs.
    pub fn new(objectives: impl IntoIterator<Item = Objective>) -> Result<Self> {
        let mut out: Vec<Objective> = Vec::new();
        for o in objectives {
            if !out
                .iter()
                .any(|e| e.direction == o.direction && e.target == o.target)
            {
                out.push(o);
            }
        }
        if out.is_empty() {
            return Err(Error::Config("objective plan is empty".into()));
        }
        Ok(Self { objectives: out })
    }

    pub fn objectives(&self) -> &[Objective] {
        &self.objectives
    }

    pub fn len(&self) -> usize {
        self.objectives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objectives.is_empty()
    }

    pub fn first(&self) -> Objective {
        self.objectives[0]
    }

    /// Objective for the given restart, cycling through the plan.
    pub fn round_robin(&self, restart: usize) -> Objective {
        self.objectives[restart % self.objectives.len()]
    }
}

fn leaf_direction(op_upper: bool) -> Direction {
    if op_upper {
        Direction::Maximize
    } else {
        Direction::Minimize
    }
}

/// If every leaf of `p` has the same left-hand output and bounds it from the
/// same side, the objective that pushes that output across.
fn uniform_group(p: &Predicate) -> Option<Objective> {
    let leaves = p.leaves();
    let first = leaves.first()?;
    let target = first.lhs();
    let upper = first.op().is_upper_bound();
    leaves
        .iter()
        .all(|l| l.lhs() == target && l.op().is_upper_bound() == upper)
        .then_some(Objective {
            direction: leaf_direction(upper),
            target,
            source: ObjectiveSource::SpecialStructure,
        })
}

fn flatten_chain<'a>(p: &'a Predicate, is_and: bool, out: &mut Vec<&'a Predicate>) {
    match p {
        Predicate::And(a, b) if is_and => {
            flatten_chain(a, is_and, out);
            flatten_chain(b, is_and, out);
        }
        Predicate::Or(a, b) if !is_and => {
            flatten_chain(a, is_and, out);
            flatten_chain(b, is_and, out);
        }
        other => out.push(other),
    }
}

fn special_structure(p: &Predicate) -> Option<Vec<Objective>> {
    if let Some(obj) = uniform_group(p) {
        return Some(vec![obj]);
    }
    let is_and = match p {
        Predicate::And(..) => true,
        Predicate::Or(..) => false,
        _ => return None,
    };
    let mut groups = Vec::new();
    flatten_chain(p, is_and, &mut groups);
    groups.iter().map(|g| uniform_group(g)).collect()
}

fn per_term(p: &Predicate) -> Vec<Objective> {
    let mut out = Vec::new();
    for leaf in p.leaves() {
        let dir = leaf_direction(leaf.op().is_upper_bound());
        out.push(Objective {
            direction: dir,
            target: leaf.lhs(),
            source: ObjectiveSource::PerTerm,
        });
        if let Leaf::VarVar { rhs, .. } = leaf {
            out.push(Objective {
                direction: dir.opposite(),
                target: rhs,
                source: ObjectiveSource::PerTerm,
            });
        }
    }
    out
}

/// Derives the objectives to optimize for `p`.
pub fn analyze_spec(p: &Predicate) -> ObjectivePlan {
    let objectives = special_structure(p).unwrap_or_else(|| per_term(p));
    ObjectivePlan::new(objectives).expect("a predicate has at least one leaf")
}
