use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Le,
    Ge,
    Lt,
    Gt,
}

impl CmpOp {
    /// Plain IEEE comparison; no tolerance.
    #[inline]
    pub fn holds(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Le => a <= b,
            CmpOp::Ge => a >= b,
            CmpOp::Lt => a < b,
            CmpOp::Gt => a > b,
        }
    }

    /// `<=` and `<` bound the left side from above.
    pub fn is_upper_bound(self) -> bool {
        matches!(self, CmpOp::Le | CmpOp::Lt)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Boolean combination of relations over output variables.
///
/// Variable indices are 0-based; the text form uses `o1..om`.
#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
    VarVar { lhs: usize, op: CmpOp, rhs: usize },
    VarConst { var: usize, op: CmpOp, value: f64 },
}

/// A single relation, borrowed out of a predicate tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Leaf {
    VarVar { lhs: usize, op: CmpOp, rhs: usize },
    VarConst { var: usize, op: CmpOp, value: f64 },
}

impl Leaf {
    pub fn lhs(&self) -> usize {
        match *self {
            Leaf::VarVar { lhs, .. } => lhs,
            Leaf::VarConst { var, .. } => var,
        }
    }

    pub fn op(&self) -> CmpOp {
        match *self {
            Leaf::VarVar { op, .. } | Leaf::VarConst { op, .. } => op,
        }
    }
}

impl Predicate {
    pub fn and(a: Predicate, b: Predicate) -> Self {
        Predicate::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Predicate, b: Predicate) -> Self {
        Predicate::Or(Box::new(a), Box::new(b))
    }

    pub fn var_var(lhs: usize, op: CmpOp, rhs: usize) -> Self {
        Predicate::VarVar { lhs, op, rhs }
    }

    pub fn var_const(var: usize, op: CmpOp, value: f64) -> Self {
        Predicate::VarConst { var, op, value }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Predicate::VarVar { .. } | Predicate::VarConst { .. })
    }

    /// Leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<Leaf> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<Leaf>) {
        match *self {
            Predicate::And(ref a, ref b) | Predicate::Or(ref a, ref b) => {
                a.collect_leaves(out);
                b.collect_leaves(out);
            }
            Predicate::VarVar { lhs, op, rhs } => out.push(Leaf::VarVar { lhs, op, rhs }),
            Predicate::VarConst { var, op, value } => out.push(Leaf::VarConst { var, op, value }),
        }
    }

    /// Largest output index referenced.
    pub fn max_var(&self) -> usize {
        self.leaves()
            .iter()
            .map(|l| match *l {
                Leaf::VarVar { lhs, rhs, .. } => lhs.max(rhs),
                Leaf::VarConst { var, .. } => var,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn mentions(&self, var: usize) -> bool {
        self.leaves().iter().any(|l| match *l {
            Leaf::VarVar { lhs, rhs, .. } => lhs == var || rhs == var,
            Leaf::VarConst { var: v, .. } => v == var,
        })
    }

    /// Evaluates the predicate on a concrete output vector.
    pub fn eval(&self, y: &[f64]) -> Result<bool> {
        let get = |i: usize| {
            y.get(i).copied().ok_or(Error::IndexOutOfRange {
                index: i,
                len: y.len(),
            })
        };
        Ok(match *self {
            // both sides are evaluated so an out-of-range index is always reported
            Predicate::And(ref a, ref b) => {
                let (a, b) = (a.eval(y)?, b.eval(y)?);
                a && b
            }
            Predicate::Or(ref a, ref b) => {
                let (a, b) = (a.eval(y)?, b.eval(y)?);
                a || b
            }
            Predicate::VarVar { lhs, op, rhs } => op.holds(get(lhs)?, get(rhs)?),
            Predicate::VarConst { var, op, value } => op.holds(get(var)?, value),
        })
    }

    /// Text form followed by the values of every referenced output,
    /// e.g. `o1 <= 1500 [o1 = 1623.25]`.
    pub fn render_with_values(&self, y: &[f64]) -> String {
        let mut vars: Vec<usize> = self
            .leaves()
            .iter()
            .flat_map(|l| match *l {
                Leaf::VarVar { lhs, rhs, .. } => vec![lhs, rhs],
                Leaf::VarConst { var, .. } => vec![var],
            })
            .collect();
        vars.sort_unstable();
        vars.dedup();
        let values: Vec<String> = vars
            .iter()
            .map(|&v| match y.get(v) {
                Some(val) => format!("o{} = {val}", v + 1),
                None => format!("o{} = ?", v + 1),
            })
            .collect();
        format!("{self} [{}]", values.join(", "))
    }
}

pub(crate) fn fmt_number(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        // shortest representation that parses back to the same bits
        format!("{v}")
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let child = |p: &Predicate, f: &mut fmt::Formatter<'_>| {
            if p.is_leaf() {
                write!(f, "{p}")
            } else {
                write!(f, "({p})")
            }
        };
        match self {
            Predicate::And(a, b) => {
                child(a, f)?;
                f.write_str(" and ")?;
                child(b, f)
            }
            Predicate::Or(a, b) => {
                child(a, f)?;
                f.write_str(" or ")?;
                child(b, f)
            }
            Predicate::VarVar { lhs, op, rhs } => write!(f, "o{} {op} o{}", lhs + 1, rhs + 1),
            Predicate::VarConst { var, op, value } => {
                write!(f, "o{} {op} {}", var + 1, fmt_number(*value))
            }
        }
    }
}
