//! STL formulas and their discrete-time quantitative robustness.
//!
//! Formulas follow the grammar
//!
//! ```text
//! phi  ::= always[a,b] phi | eventually[a,b] phi | not phi
//!        | phi and phi | phi or phi | phi => phi | ( phi ) | atom
//! atom ::= [abs(] affine [)] cmp constant
//! ```
//!
//! with precedence `not` > `and` > `or` > `=>`; temporal operators bind like
//! `not`. Implication is sugar: the parser rewrites `a => b` into
//! `(not a) or b`.

mod eval;
mod parser;

pub use eval::{robustness, robustness_signal, EvalError};
pub use parser::{parse, ParseError};

use std::fmt;

/// Comparator of an affine atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Lt,
    Gt,
    Eq,
    Ne,
}

impl fmt::Display for Cmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cmp::Lt => "<",
            Cmp::Gt => ">",
            Cmp::Eq => "==",
            Cmp::Ne => "!=",
        })
    }
}

/// Margin for equality atoms over discrete-valued outputs: half the minimum
/// gear spacing. `e == c` evaluates to `0.5 - |e - c|`.
pub const EQ_MARGIN: f64 = 0.5;

/// Predicate over signal dimensions: `cmp(expr, constant)` where
/// `expr = sum(coef * dim) + offset`, optionally wrapped in `|.|`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineAtom {
    /// `(coefficient, dimension name)`, at least one term.
    pub terms: Vec<(f64, String)>,
    /// Constant offset inside the affine expression (inside the abs, when
    /// present), e.g. the `+5` of `abs(y+5) > 1.3`.
    pub offset: f64,
    pub abs: bool,
    pub cmp: Cmp,
    /// Right-hand-side constant.
    pub constant: f64,
}

impl AffineAtom {
    /// Evaluates the affine expression (abs applied when flagged) on one row.
    pub fn expr(&self, row: &[f64], dim_idx: &[usize]) -> f64 {
        let mut e = self.offset;
        for ((c, _), &idx) in self.terms.iter().zip(dim_idx) {
            e += c * row[idx];
        }
        if self.abs {
            e.abs()
        } else {
            e
        }
    }

    /// Pointwise robustness of the predicate given the expression value.
    pub fn rho(&self, e: f64) -> f64 {
        match self.cmp {
            Cmp::Lt => self.constant - e,
            Cmp::Gt => e - self.constant,
            Cmp::Eq => EQ_MARGIN - (e - self.constant).abs(),
            Cmp::Ne => (e - self.constant).abs() - EQ_MARGIN,
        }
    }
}

impl fmt::Display for AffineAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.abs {
            f.write_str("abs(")?;
        }
        for (i, (c, name)) in self.terms.iter().enumerate() {
            if *c < 0.0 {
                f.write_str(if i == 0 { "-" } else { " - " })?;
            } else if i > 0 {
                f.write_str(" + ")?;
            }
            let a = c.abs();
            if a == 1.0 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{a}*{name}")?;
            }
        }
        if self.offset != 0.0 {
            if self.offset < 0.0 {
                write!(f, " - {}", -self.offset)?;
            } else {
                write!(f, " + {}", self.offset)?;
            }
        }
        if self.abs {
            f.write_str(")")?;
        }
        write!(f, " {} {}", self.cmp, self.constant)
    }
}

/// Closed time interval annotating a temporal operator; endpoints are
/// multiples of 0.01 with `0 <= a <= b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.start, self.end)
    }
}

/// STL abstract syntax tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Atom(AffineAtom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Always(Interval, Box<Formula>),
    Eventually(Interval, Box<Formula>),
}

impl Formula {
    /// Required look-ahead: the recursive sum of nested interval upper
    /// bounds (max across branches).
    pub fn horizon(&self) -> f64 {
        match self {
            Formula::Atom(_) => 0.0,
            Formula::Not(c) => c.horizon(),
            Formula::And(a, b) | Formula::Or(a, b) => a.horizon().max(b.horizon()),
            Formula::Always(iv, c) | Formula::Eventually(iv, c) => iv.end + c.horizon(),
        }
    }

    pub fn implies(antecedent: Formula, consequent: Formula) -> Formula {
        Formula::Or(Box::new(Formula::Not(Box::new(antecedent))), Box::new(consequent))
    }

    /// All dimension names referenced by atoms.
    pub fn dim_names(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk_atoms(&mut |a| {
            for (_, n) in &a.terms {
                if !out.contains(&n.as_str()) {
                    out.push(n.as_str());
                }
            }
        });
        out
    }

    fn walk_atoms<'a>(&'a self, f: &mut impl FnMut(&'a AffineAtom)) {
        match self {
            Formula::Atom(a) => f(a),
            Formula::Not(c) => c.walk_atoms(f),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.walk_atoms(f);
                b.walk_atoms(f);
            }
            Formula::Always(_, c) | Formula::Eventually(_, c) => c.walk_atoms(f),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(c) => write!(f, "not ({c})"),
            Formula::And(a, b) => write!(f, "({a}) and ({b})"),
            Formula::Or(a, b) => write!(f, "({a}) or ({b})"),
            Formula::Always(iv, c) => write!(f, "always{iv} ({c})"),
            Formula::Eventually(iv, c) => write!(f, "eventually{iv} ({c})"),
        }
    }
}
