//! Probabilistic temporal formulas: syntax tree, printing, parsing, and
//! the rewrite that removes `G` operators before evaluation.

mod parser;

pub use parser::parse_formula;

use std::fmt;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Comparison {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::Lt => "<",
            Comparison::Le => "<=",
            Comparison::Gt => ">",
            Comparison::Ge => ">=",
        }
    }

    /// The comparator matching `1 - value` against `1 - threshold`:
    /// direction swaps, strictness stays.
    pub fn flipped(self) -> Self {
        match self {
            Comparison::Lt => Comparison::Gt,
            Comparison::Le => Comparison::Ge,
            Comparison::Gt => Comparison::Lt,
            Comparison::Ge => Comparison::Le,
        }
    }

    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparison::Lt => value < threshold,
            Comparison::Le => value <= threshold,
            Comparison::Gt => value > threshold,
            Comparison::Ge => value >= threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryMode {
    Plain,
    Min,
    Max,
}

impl QueryMode {
    fn prefix(self) -> &'static str {
        match self {
            QueryMode::Plain => "P=?",
            QueryMode::Min => "Pmin=?",
            QueryMode::Max => "Pmax=?",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateFormula {
    True,
    Atom(String),
    Not(Box<StateFormula>),
    And(Box<StateFormula>, Box<StateFormula>),
    Prob {
        cmp: Comparison,
        threshold: f64,
        path: Box<PathFormula>,
    },
    /// Numeric query; legal only at the top of a formula.
    ProbQuery {
        mode: QueryMode,
        path: Box<PathFormula>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum PathFormula {
    Next(StateFormula),
    Until {
        lhs: StateFormula,
        rhs: StateFormula,
        bound: Option<u32>,
    },
    Globally {
        inner: StateFormula,
        bound: Option<u32>,
    },
}

impl fmt::Display for StateFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateFormula::True => write!(f, "true"),
            StateFormula::Atom(a) => write!(f, "\"{a}\""),
            StateFormula::Not(inner) => {
                if matches!(**inner, StateFormula::And(..)) {
                    write!(f, "!({inner})")
                } else {
                    write!(f, "!{inner}")
                }
            }
            StateFormula::And(l, r) => {
                write!(f, "{l} & ")?;
                if matches!(**r, StateFormula::And(..)) {
                    write!(f, "({r})")
                } else {
                    write!(f, "{r}")
                }
            }
            StateFormula::Prob { cmp, threshold, path } => {
                write!(f, "P{}{} [ {} ]", cmp.symbol(), threshold, path)
            }
            StateFormula::ProbQuery { mode, path } => {
                write!(f, "{} [ {} ]", mode.prefix(), path)
            }
        }
    }
}

impl fmt::Display for PathFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bound = |b: &Option<u32>| match b {
            Some(k) => format!("<={k}"),
            None => String::new(),
        };
        match self {
            PathFormula::Next(s) => write!(f, "X {s}"),
            PathFormula::Until { lhs, rhs, bound: b } => {
                write!(f, "{lhs} U{} {rhs}", bound(b))
            }
            PathFormula::Globally { inner, bound: b } => {
                write!(f, "G{} {inner}", bound(b))
            }
        }
    }
}

/// A formula with every `G` rewritten away, plus whether the reported
/// value must be complemented against the computed one.
#[derive(Debug, Clone, PartialEq)]
pub struct DesugaredFormula {
    pub formula: StateFormula,
    pub complemented: bool,
}

fn negate(f: StateFormula) -> StateFormula {
    match f {
        StateFormula::Not(inner) => *inner,
        other => StateFormula::Not(Box::new(other)),
    }
}

fn desugar_state(f: &StateFormula) -> Result<StateFormula> {
    match f {
        StateFormula::True => Ok(StateFormula::True),
        StateFormula::Atom(a) => Ok(StateFormula::Atom(a.clone())),
        StateFormula::Not(inner) => {
            Ok(StateFormula::Not(Box::new(desugar_state(inner)?)))
        }
        StateFormula::And(l, r) => Ok(StateFormula::And(
            Box::new(desugar_state(l)?),
            Box::new(desugar_state(r)?),
        )),
        StateFormula::Prob { cmp, threshold, path } => {
            match desugar_path(path)? {
                PathFormula::Globally { inner, bound } => Ok(StateFormula::Prob {
                    cmp: cmp.flipped(),
                    threshold: 1.0 - threshold,
                    path: Box::new(PathFormula::Until {
                        lhs: StateFormula::True,
                        rhs: negate(inner),
                        bound,
                    }),
                }),
                other => Ok(StateFormula::Prob {
                    cmp: *cmp,
                    threshold: *threshold,
                    path: Box::new(other),
                }),
            }
        }
        StateFormula::ProbQuery { .. } => Err(Error::NestedQuery),
    }
}

fn desugar_path(p: &PathFormula) -> Result<PathFormula> {
    match p {
        PathFormula::Next(s) => Ok(PathFormula::Next(desugar_state(s)?)),
        PathFormula::Until { lhs, rhs, bound } => Ok(PathFormula::Until {
            lhs: desugar_state(lhs)?,
            rhs: desugar_state(rhs)?,
            bound: *bound,
        }),
        PathFormula::Globally { inner, bound } => Ok(PathFormula::Globally {
            inner: desugar_state(inner)?,
            bound: *bound,
        }),
    }
}

/// Rewrites `G phi` into the complement of `true U !phi` everywhere. A
/// threshold operator absorbs the complement by flipping its comparator;
/// a top-level numeric query instead swaps min and max and reports
/// `complemented`, meaning the final value is one minus the computed one.
/// Queries below the top level are rejected.
pub fn desugar(f: &StateFormula) -> Result<DesugaredFormula> {
    if let StateFormula::ProbQuery { mode, path } = f {
        let p = desugar_path(path)?;
        if let PathFormula::Globally { inner, bound } = p {
            let swapped = match mode {
                QueryMode::Plain => QueryMode::Plain,
                QueryMode::Min => QueryMode::Max,
                QueryMode::Max => QueryMode::Min,
            };
            return Ok(DesugaredFormula {
                formula: StateFormula::ProbQuery {
                    mode: swapped,
                    path: Box::new(PathFormula::Until {
                        lhs: StateFormula::True,
                        rhs: negate(inner),
                        bound,
                    }),
                },
                complemented: true,
            });
        }
        return Ok(DesugaredFormula {
            formula: StateFormula::ProbQuery { mode: *mode, path: Box::new(p) },
            complemented: false,
        });
    }
    Ok(DesugaredFormula { formula: desugar_state(f)?, complemented: false })
}
