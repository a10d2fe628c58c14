//! Text syntax for safety properties.
//!
//! ```text
//! # ACAS Xu property 1
//! name: p1
//! inputs: 5
//! outputs: 5
//! x1 >= 55947.691; x4 >= 1145; x5 <= 60
//! predicate: o1 <= 1500
//! ```
//!
//! Statements end at a newline or `;`. Domain statements are `xK >= c`,
//! `xK <= c`, `xK = c` and `xK in [a, b]`; repeated statements on the same
//! input intersect. Inputs without a statement are unbounded. The predicate
//! uses `and`/`or` (also `&&`, `||`) with parentheses, `and` binding tighter.
//! Variable indices are 1-based.

use super::domain::{DomainBox, Interval};
use super::predicate::{CmpOp, Predicate};
use super::SafetyProperty;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    And,
    Or,
    Eq,
    Cmp(CmpOp),
    Num(f64),
    Ident(String),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    col: usize,
}

struct Statement<'a> {
    line: usize,
    /// 1-based column of `text`'s first character within the line.
    col: usize,
    text: &'a str,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn is_number_start(chars: &[char], i: usize) -> bool {
    let c = chars[i];
    if c.is_ascii_digit() || c == '.' {
        return true;
    }
    if c == '-' || c == '+' {
        return chars
            .get(i + 1)
            .is_some_and(|n| n.is_ascii_digit() || *n == '.' || *n == 'i' || *n == 'I');
    }
    false
}

fn tokenize(stmt: &Statement<'_>) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = stmt.text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = stmt.col + i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let two: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let (tok, len) = match c {
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '[' => (Tok::LBracket, 1),
            ']' => (Tok::RBracket, 1),
            ',' => (Tok::Comma, 1),
            '∧' => (Tok::And, 1),
            '∨' => (Tok::Or, 1),
            '≤' => (Tok::Cmp(CmpOp::Le), 1),
            '≥' => (Tok::Cmp(CmpOp::Ge), 1),
            _ if two == "&&" => (Tok::And, 2),
            _ if two == "||" => (Tok::Or, 2),
            _ if two == "<=" => (Tok::Cmp(CmpOp::Le), 2),
            _ if two == ">=" => (Tok::Cmp(CmpOp::Ge), 2),
            _ if two == "==" => (Tok::Eq, 2),
            '<' => (Tok::Cmp(CmpOp::Lt), 1),
            '>' => (Tok::Cmp(CmpOp::Gt), 1),
            '=' => (Tok::Eq, 1),
            _ if is_number_start(&chars, i) => {
                let start = i;
                let mut j = i;
                if chars[j] == '-' || chars[j] == '+' {
                    j += 1;
                }
                if chars[j].is_ascii_alphabetic() {
                    while j < chars.len() && chars[j].is_ascii_alphabetic() {
                        j += 1;
                    }
                } else {
                    while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                        j += 1;
                    }
                    if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                        let mut k = j + 1;
                        if k < chars.len() && (chars[k] == '-' || chars[k] == '+') {
                            k += 1;
                        }
                        if k < chars.len() && chars[k].is_ascii_digit() {
                            while k < chars.len() && chars[k].is_ascii_digit() {
                                k += 1;
                            }
                            j = k;
                        }
                    }
                }
                let text: String = chars[start..j].iter().collect();
                (Tok::Num(parse_number(&text, stmt.line, col)?), j - start)
            }
            _ if c.is_alphabetic() || c == '_' => {
                let start = i;
                let mut j = i;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[start..j].iter().collect();
                let tok = match word.to_ascii_lowercase().as_str() {
                    "and" => Tok::And,
                    "or" => Tok::Or,
                    "inf" | "infinity" => Tok::Num(f64::INFINITY),
                    _ => Tok::Ident(word),
                };
                (tok, j - start)
            }
            _ => {
                return Err(syntax(
                    stmt.line,
                    col,
                    format!("unexpected character `{c}`"),
                ))
            }
        };
        out.push(Spanned { tok, col });
        i += len;
    }
    Ok(out)
}

fn parse_number(text: &str, line: usize, col: usize) -> Result<f64> {
    let lower = text.to_ascii_lowercase();
    let v = match lower.as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => f64::INFINITY,
        "-inf" | "-infinity" => f64::NEG_INFINITY,
        _ if lower
            .trim_start_matches(['+', '-'])
            .starts_with(|c: char| c.is_alphabetic()) =>
        {
            return Err(syntax(line, col, format!("invalid number `{text}`")));
        }
        _ => text
            .parse::<f64>()
            .map_err(|_| syntax(line, col, format!("invalid number `{text}`")))?,
    };
    Ok(v)
}

struct Cursor<'a> {
    toks: &'a [Spanned],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |s| s.col)
    }

    fn next(&mut self) -> Option<&'a Tok> {
        let t = self.toks.get(self.pos).map(|s| &s.tok);
        self.pos += 1;
        t
    }

    fn err(&self, message: impl Into<String>) -> Error {
        syntax(self.line, self.col(), message)
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<()> {
        match self.peek() {
            Some(t) if t == want => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }
}

/// Declared arity limits, used to reject unknown variables.
#[derive(Clone, Copy)]
struct Arity {
    inputs: Option<usize>,
    outputs: Option<usize>,
}

fn variable(name: &str, prefix: char, limit: Option<usize>, line: usize) -> Result<usize> {
    let unknown = || Error::UnknownVariable {
        name: name.to_string(),
        line,
    };
    let rest = name
        .strip_prefix(prefix)
        .or_else(|| name.strip_prefix(prefix.to_ascii_uppercase()))
        .ok_or_else(unknown)?;
    if rest.is_empty() || !rest.chars().all(|c| c.is_ascii_digit()) {
        return Err(unknown());
    }
    let k: usize = rest.parse().map_err(|_| unknown())?;
    if k == 0 || limit.is_some_and(|m| k > m) {
        return Err(unknown());
    }
    Ok(k - 1)
}

fn parse_or(cur: &mut Cursor<'_>, arity: Arity) -> Result<Predicate> {
    let mut lhs = parse_and(cur, arity)?;
    while cur.peek() == Some(&Tok::Or) {
        cur.next();
        let rhs = parse_and(cur, arity)?;
        lhs = Predicate::or(lhs, rhs);
    }
    Ok(lhs)
}

fn parse_and(cur: &mut Cursor<'_>, arity: Arity) -> Result<Predicate> {
    let mut lhs = parse_atom(cur, arity)?;
    while cur.peek() == Some(&Tok::And) {
        cur.next();
        let rhs = parse_atom(cur, arity)?;
        lhs = Predicate::and(lhs, rhs);
    }
    Ok(lhs)
}

fn parse_atom(cur: &mut Cursor<'_>, arity: Arity) -> Result<Predicate> {
    match cur.peek() {
        Some(Tok::LParen) => {
            cur.next();
            let inner = parse_or(cur, arity)?;
            cur.expect(&Tok::RParen, "`)`")?;
            Ok(inner)
        }
        Some(Tok::Ident(name)) => {
            cur.next();
            let lhs = variable(name, 'o', arity.outputs, cur.line)?;
            let op = match cur.next() {
                Some(Tok::Cmp(op)) => *op,
                _ => {
                    cur.pos -= 1;
                    return Err(cur.err("expected one of <=, >=, <, >"));
                }
            };
            match cur.next() {
                Some(Tok::Ident(rhs)) => {
                    let rhs = variable(rhs, 'o', arity.outputs, cur.line)?;
                    Ok(Predicate::var_var(lhs, op, rhs))
                }
                Some(Tok::Num(v)) => Ok(Predicate::var_const(lhs, op, *v)),
                _ => {
                    cur.pos -= 1;
                    Err(cur.err("expected an output variable or a constant"))
                }
            }
        }
        Some(_) => Err(cur.err("expected an output variable or `(`")),
        None => Err(cur.err("unexpected end of predicate")),
    }
}

fn parse_predicate(stmt: &Statement<'_>, arity: Arity) -> Result<Predicate> {
    let toks = tokenize(stmt)?;
    let mut cur = Cursor {
        toks: &toks,
        pos: 0,
        line: stmt.line,
        end_col: stmt.col + stmt.text.chars().count(),
    };
    let p = parse_or(&mut cur, arity)?;
    if cur.peek().is_some() {
        return Err(cur.err("unexpected token after predicate"));
    }
    Ok(p)
}

/// Parses one domain statement into (input index, interval).
fn parse_bound(stmt: &Statement<'_>, arity: Arity) -> Result<(usize, Interval)> {
    let toks = tokenize(stmt)?;
    let mut cur = Cursor {
        toks: &toks,
        pos: 0,
        line: stmt.line,
        end_col: stmt.col + stmt.text.chars().count(),
    };
    let var = match cur.next() {
        Some(Tok::Ident(name)) => variable(name, 'x', arity.inputs, stmt.line)?,
        _ => {
            cur.pos = 0;
            return Err(cur.err("expected an input variable"));
        }
    };
    let number = |cur: &mut Cursor<'_>| match cur.next() {
        Some(Tok::Num(v)) => Ok(*v),
        _ => {
            cur.pos -= 1;
            Err(cur.err("expected a number"))
        }
    };
    let interval = match cur.next() {
        Some(Tok::Cmp(CmpOp::Ge | CmpOp::Gt)) => Interval {
            lower: number(&mut cur)?,
            upper: f64::INFINITY,
        },
        Some(Tok::Cmp(CmpOp::Le | CmpOp::Lt)) => Interval {
            lower: f64::NEG_INFINITY,
            upper: number(&mut cur)?,
        },
        Some(Tok::Eq) => Interval::point(number(&mut cur)?),
        Some(Tok::Ident(w)) if w.eq_ignore_ascii_case("in") => {
            cur.expect(&Tok::LBracket, "`[`")?;
            let lower = number(&mut cur)?;
            cur.expect(&Tok::Comma, "`,`")?;
            let upper = number(&mut cur)?;
            cur.expect(&Tok::RBracket, "`]`")?;
            Interval { lower, upper }
        }
        _ => {
            cur.pos = cur.pos.saturating_sub(1);
            return Err(cur.err("expected >=, <=, = or `in`"));
        }
    };
    if cur.peek().is_some() {
        return Err(cur.err("unexpected token after bound"));
    }
    Ok((var, interval))
}

fn statements(text: &str) -> Vec<Statement<'_>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let mut offset = 0;
        for piece in line.split(';') {
            let trimmed = piece.trim_start();
            let lead = piece.len() - trimmed.len();
            let body = trimmed.trim_end();
            if !body.is_empty() {
                let col = line[..offset + lead].chars().count() + 1;
                out.push(Statement {
                    line: i + 1,
                    col,
                    text: body,
                });
            }
            offset += piece.len() + 1;
        }
    }
    out
}

fn header_value<'a>(stmt: &Statement<'a>, key: &str) -> Option<&'a str> {
    let (k, v) = stmt.text.split_once(':')?;
    k.trim().eq_ignore_ascii_case(key).then(|| v.trim())
}

fn header_count(stmt: &Statement<'_>, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            syntax(
                stmt.line,
                stmt.col,
                format!("expected a positive count, got `{value}`"),
            )
        })
}

pub fn parse_property(text: &str) -> Result<SafetyProperty> {
    let stmts = statements(text);

    // header first, so variables can be checked against it regardless of order
    let mut name = None;
    let mut arity = Arity {
        inputs: None,
        outputs: None,
    };
    for s in &stmts {
        if let Some(v) = header_value(s, "name") {
            name = Some(v.to_string());
        } else if let Some(v) = header_value(s, "inputs") {
            arity.inputs = Some(header_count(s, v)?);
        } else if let Some(v) = header_value(s, "outputs") {
            arity.outputs = Some(header_count(s, v)?);
        }
    }

    let mut bounds: Vec<(usize, Interval, usize)> = Vec::new();
    let mut predicate = None;
    for s in &stmts {
        if ["name", "inputs", "outputs"]
            .iter()
            .any(|k| header_value(s, k).is_some())
        {
            continue;
        }
        if let Some((key, rest)) = s.text.split_once(':') {
            if key.trim().eq_ignore_ascii_case("predicate") {
                if predicate.is_some() {
                    return Err(syntax(s.line, s.col, "more than one predicate"));
                }
                let rest_trim = rest.trim_start();
                let skipped = s.text.len() - rest_trim.len();
                let sub = Statement {
                    line: s.line,
                    col: s.col + s.text[..skipped].chars().count(),
                    text: rest_trim,
                };
                if sub.text.is_empty() {
                    return Err(syntax(s.line, sub.col, "empty predicate"));
                }
                predicate = Some(parse_predicate(&sub, arity)?);
                continue;
            }
            return Err(syntax(
                s.line,
                s.col,
                format!("unknown field `{}`", key.trim()),
            ));
        }
        let (var, iv) = parse_bound(s, arity)?;
        bounds.push((var, iv, s.line));
    }

    let predicate = predicate.ok_or_else(|| {
        let line = text.lines().count().max(1);
        syntax(line, 1, "missing `predicate:` statement")
    })?;

    let dim = arity
        .inputs
        .unwrap_or_else(|| bounds.iter().map(|(v, _, _)| v + 1).max().unwrap_or(0));
    let mut domain = DomainBox::unbounded(dim);
    for (var, iv, line) in bounds {
        let cur = domain.get(var);
        let lower = cur.lower.max(iv.lower);
        let upper = cur.upper.min(iv.upper);
        if !(lower <= upper) {
            return Err(syntax(
                line,
                1,
                format!("bounds on x{} are empty ([{lower}, {upper}])", var + 1),
            ));
        }
        domain.set(var, Interval { lower, upper });
    }

    Ok(SafetyProperty {
        name: name.unwrap_or_default(),
        domain,
        predicate,
        outputs: arity.outputs,
        inputs_declared: arity.inputs.is_some(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn acas_p1_single_line() {
        let p = parse_property(
            "inputs: 5\nx1 >= 55947.691; x4 >= 1145; x5 <= 60; predicate: o1 <= 1500",
        )
        .unwrap();
        let b = p.domain.bounds();
        assert_eq!(b.len(), 5);
        assert_eq!(
            b[0],
            Interval {
                lower: 55947.691,
                upper: f64::INFINITY
            }
        );
        assert_eq!(b[1], Interval::UNBOUNDED);
        assert_eq!(b[2], Interval::UNBOUNDED);
        assert_eq!(
            b[3],
            Interval {
                lower: 1145.0,
                upper: f64::INFINITY
            }
        );
        assert_eq!(
            b[4],
            Interval {
                lower: f64::NEG_INFINITY,
                upper: 60.0
            }
        );
        assert_eq!(p.predicate, Predicate::var_const(0, CmpOp::Le, 1500.0));
    }

    #[test]
    fn smallest_instance() {
        let p = parse_property("x1 in [0, 1]\nx2 in [0,1]\npredicate: (o1 < o2)").unwrap();
        assert_eq!(p.predicate, Predicate::var_var(0, CmpOp::Lt, 1));
        assert_eq!(
            p.domain,
            DomainBox::from_pairs(&[(0.0, 1.0), (0.0, 1.0)]).unwrap()
        );
    }

    #[test]
    fn acas_p7_shape() {
        let p = parse_property(
            "x1 in [0,1]\npredicate: ((o5>o1) and (o4>o1)) or ((o5>o2) and (o4>o2)) or ((o5>o3) and (o4>o3))",
        )
        .unwrap();
        assert_eq!(p.predicate.leaves().len(), 6);
        let Predicate::Or(left, c) = &p.predicate else {
            panic!("root should be or")
        };
        let Predicate::Or(a, b) = left.as_ref() else {
            panic!("left should be or")
        };
        for g in [a, b, c] {
            assert!(matches!(g.as_ref(), Predicate::And(..)));
        }
    }

    #[test]
    fn precedence_and_over_or() {
        let p = parse_property("x1 in [0,1]\npredicate: o1 < 1 or o2 < 2 and o3 < 3").unwrap();
        assert_eq!(
            p.predicate,
            Predicate::or(
                Predicate::var_const(0, CmpOp::Lt, 1.0),
                Predicate::and(
                    Predicate::var_const(1, CmpOp::Lt, 2.0),
                    Predicate::var_const(2, CmpOp::Lt, 3.0)
                )
            )
        );
        let q = parse_property("x1 in [0,1]\npredicate: (o1 < 1 or o2 < 2) and o3 < 3").unwrap();
        assert!(matches!(q.predicate, Predicate::And(..)));
    }

    #[test]
    fn equality_is_degenerate_interval() {
        let p = parse_property("x3 = 0\npredicate: o1 > o2").unwrap();
        assert_eq!(p.domain.get(2), Interval::point(0.0));
    }

    #[test]
    fn repeated_bounds_intersect() {
        let p = parse_property("x1 >= 1500\nx1 <= 1800\npredicate: o1 > o2").unwrap();
        assert_eq!(
            p.domain.get(0),
            Interval {
                lower: 1500.0,
                upper: 1800.0
            }
        );
        assert!(parse_property("x1 >= 2\nx1 <= 1\npredicate: o1 > o2").is_err());
    }

    #[test]
    fn scientific_and_infinite_literals() {
        let p = parse_property("x1 in [-inf, 1e-3]\nx2 in [-2.5E+2, +inf]\npredicate: o1 <= -1e10")
            .unwrap();
        assert_eq!(
            p.domain.get(0),
            Interval {
                lower: f64::NEG_INFINITY,
                upper: 1e-3
            }
        );
        assert_eq!(
            p.domain.get(1),
            Interval {
                lower: -250.0,
                upper: f64::INFINITY
            }
        );
        assert_eq!(p.predicate, Predicate::var_const(0, CmpOp::Le, -1e10));
    }

    #[test]
    fn comments_ignored() {
        let p = parse_property(
            "# header\nname: demo # trailing\nx1 in [0,1] # bound\npredicate: o1 < 0",
        )
        .unwrap();
        assert_eq!(p.name, "demo");
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_property("x1 in [0,1]\npredicate: o1 < < 3").unwrap_err();
        match err {
            Error::Syntax { line, column, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column, 17);
            }
            other => panic!("{other:?}"),
        }
        let err = parse_property("x1 in [0,1]\npredicate: (o1 < 3").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 2, .. }));
        let err = parse_property("x1 in [0,1]\npredicate: o1 < 3 $").unwrap_err();
        assert!(matches!(
            err,
            Error::Syntax {
                line: 2,
                column: 19,
                ..
            }
        ));
    }

    #[test]
    fn missing_predicate() {
        assert!(matches!(
            parse_property("x1 in [0, 1]"),
            Err(Error::Syntax { .. })
        ));
    }

    #[test]
    fn unknown_variables() {
        for text in [
            "inputs: 2\nx3 >= 0\npredicate: o1 < 0",
            "outputs: 2\nx1 >= 0\npredicate: o3 < 0",
            "x1 >= 0\npredicate: y1 < 0",
            "x0 >= 0\npredicate: o1 < 0",
            "x1 >= 0\npredicate: o1 < rho",
            "x1 >= 0\npredicate: o0 < 1",
        ] {
            assert!(
                matches!(parse_property(text), Err(Error::UnknownVariable { .. })),
                "{text}"
            );
        }
    }

    #[test]
    fn constant_on_left_rejected() {
        assert!(matches!(
            parse_property("x1 >= 0\npredicate: 3 < o1"),
            Err(Error::Syntax { .. })
        ));
    }

    #[test]
    fn unicode_operators() {
        let p = parse_property("x1 in [0,1]\npredicate: o1 ≤ o2 ∨ o2 ≥ 3").unwrap();
        assert_eq!(
            p.predicate,
            Predicate::or(
                Predicate::var_var(0, CmpOp::Le, 1),
                Predicate::var_const(1, CmpOp::Ge, 3.0)
            )
        );
    }
}
