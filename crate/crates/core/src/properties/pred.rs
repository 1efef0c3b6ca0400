use std::fmt;

use crate::semantics::{ControlState, UserRecord};

/// Integer-valued expression over data and per-slot map values. Arithmetic
/// is over mathematical integers (saturating at the `i128` range), and
/// division by zero yields 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Const(i128),
    Data(usize),
    Map { slot: usize, map: usize },
    Add(Vec<Term>),
    Sub(Box<Term>, Box<Term>),
    Mul(Vec<Term>),
    Div(Box<Term>, Box<Term>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Ne => "!=",
            Rel::Lt => "<",
            Rel::Gt => ">",
            Rel::Le => "<=",
            Rel::Ge => ">=",
        }
    }

    pub(super) fn from_symbol(s: &str) -> Option<Self> {
        Some(match s {
            "=" => Rel::Eq,
            "!=" => Rel::Ne,
            "<" => Rel::Lt,
            ">" => Rel::Gt,
            "<=" => Rel::Le,
            ">=" => Rel::Ge,
            _ => return None,
        })
    }

    fn holds(self, a: i128, b: i128) -> bool {
        match self {
            Rel::Eq => a == b,
            Rel::Ne => a != b,
            Rel::Lt => a < b,
            Rel::Gt => a > b,
            Rel::Le => a <= b,
            Rel::Ge => a >= b,
        }
    }
}

/// Address-oblivious predicate: no atom can observe a user id or role.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    True,
    False,
    Cmp(Rel, Term, Term),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Term {
    pub fn eval(&self, control: &ControlState, users: &[&UserRecord]) -> i128 {
        match self {
            Term::Const(v) => *v,
            Term::Data(i) => control.data[*i] as i128,
            Term::Map { slot, map } => users[*slot].maps[*map] as i128,
            Term::Add(ts) => ts
                .iter()
                .fold(0i128, |acc, t| acc.saturating_add(t.eval(control, users))),
            Term::Mul(ts) => ts
                .iter()
                .fold(1i128, |acc, t| acc.saturating_mul(t.eval(control, users))),
            Term::Sub(a, b) => a
                .eval(control, users)
                .saturating_sub(b.eval(control, users)),
            Term::Div(a, b) => {
                let d = b.eval(control, users);
                if d == 0 {
                    0
                } else {
                    a.eval(control, users).saturating_div(d)
                }
            }
        }
    }

    fn max_slot(&self) -> Option<usize> {
        match self {
            Term::Const(_) | Term::Data(_) => None,
            Term::Map { slot, .. } => Some(*slot),
            Term::Add(ts) | Term::Mul(ts) => ts.iter().filter_map(Term::max_slot).max(),
            Term::Sub(a, b) | Term::Div(a, b) => a.max_slot().max(b.max_slot()),
        }
    }
}

impl Formula {
    pub fn eval(&self, control: &ControlState, users: &[&UserRecord]) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Cmp(r, a, b) => r.holds(a.eval(control, users), b.eval(control, users)),
            Formula::And(fs) => fs.iter().all(|f| f.eval(control, users)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(control, users)),
            Formula::Not(f) => !f.eval(control, users),
            Formula::Implies(a, b) => !a.eval(control, users) || b.eval(control, users),
        }
    }

    /// Largest user slot mentioned, if any.
    pub fn max_slot(&self) -> Option<usize> {
        match self {
            Formula::True | Formula::False => None,
            Formula::Cmp(_, a, b) => a.max_slot().max(b.max_slot()),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().filter_map(Formula::max_slot).max(),
            Formula::Not(f) => f.max_slot(),
            Formula::Implies(a, b) => a.max_slot().max(b.max_slot()),
        }
    }
}

fn list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, head: &str, items: &[T]) -> fmt::Result {
    write!(f, "({head}")?;
    for i in items {
        write!(f, " {i}")?;
    }
    f.write_str(")")
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(v) => write!(f, "{v}"),
            Term::Data(i) => write!(f, "(data {i})"),
            Term::Map { slot, map } => write!(f, "(map {slot} {map})"),
            Term::Add(ts) => list(f, "+", ts),
            Term::Mul(ts) => list(f, "*", ts),
            Term::Sub(a, b) => write!(f, "(- {a} {b})"),
            Term::Div(a, b) => write!(f, "(/ {a} {b})"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Cmp(r, a, b) => write!(f, "({} {a} {b})", r.symbol()),
            Formula::And(fs) => list(f, "and", fs),
            Formula::Or(fs) => list(f, "or", fs),
            Formula::Not(x) => write!(f, "(not {x})"),
            Formula::Implies(a, b) => write!(f, "(=> {a} {b})"),
        }
    }
}
