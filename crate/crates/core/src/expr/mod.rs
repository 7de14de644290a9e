//! Expressions whose exponents are themselves expressions one level up.
//!
//! An [`Expr`] node carries its level; the domain at each level comes from the
//! [`Tower`]. A variable referenced at level `k ≥ 1` denotes its base value ported
//! `k` times. Supplementary variables are let-bindings in an [`Interpretation`],
//! so a [`Program`] is a straight-line list of bindings followed by outputs.

mod program;
mod text;
mod tower;

use smallvec::smallvec;

pub use program::{
    expr_check_closure, expr_eval, port_value, ClosureReport, Interpretation, Program,
    ProgramBuilder,
};
pub use text::parse_expr;
pub use tower::{Tower, Val, MAX_LEVELS};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error("non-invertible base under a non-constant exponent at assignment {assignment:?}")]
    InvertibilityViolation { assignment: Vec<u64> },
    #[error("cannot port zero into exponent position")]
    PortOfZero,
    #[error("level {level} outside tower of depth {depth}")]
    Level { level: usize, depth: usize },
    #[error("tower depth {0} not in 1..=3")]
    Depth(usize),
    #[error("structural error: {0}")]
    Structure(String),
    #[error("malformed constant at level {level}")]
    BadConst { level: usize },
    #[error("variable {index} out of range ({count} available)")]
    UnboundVar { index: usize, count: usize },
    #[error("expected {expected} inputs, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Exponent of a power node: a plain integer or an expression one level up.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Exponent {
    Int(u64),
    Expr(Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Const { level: u8, value: Val },
    Var { level: u8, index: u32 },
    Add { level: u8, terms: Vec<Expr> },
    Mul { level: u8, factors: Vec<Expr> },
    Pow { level: u8, base: Box<Expr>, exp: Exponent },
}

impl Expr {
    pub fn level(&self) -> usize {
        match self {
            Expr::Const { level, .. }
            | Expr::Var { level, .. }
            | Expr::Add { level, .. }
            | Expr::Mul { level, .. }
            | Expr::Pow { level, .. } => *level as usize,
        }
    }

    /// Base-level variable.
    pub fn var(index: usize) -> Expr {
        Expr::var_at(index, 0)
    }

    pub fn var_at(index: usize, level: usize) -> Expr {
        Expr::Var { level: level as u8, index: index as u32 }
    }

    pub fn constant(level: usize, value: Val) -> Expr {
        Expr::Const { level: level as u8, value }
    }

    /// Base-level constant (single-atom base ring).
    pub fn scalar(c: u64) -> Expr {
        Expr::Const { level: 0, value: smallvec![c] }
    }

    /// Sum at `level`; the empty sum is zero.
    pub fn sum(level: usize, mut terms: Vec<Expr>, tower: &Tower) -> Expr {
        match terms.len() {
            0 => Expr::constant(level, tower.int(level, 0)),
            1 => terms.pop().unwrap(),
            _ => Expr::Add { level: level as u8, terms },
        }
    }

    /// Product at `level`; the empty product is one.
    pub fn product(level: usize, mut factors: Vec<Expr>, tower: &Tower) -> Expr {
        match factors.len() {
            0 => Expr::constant(level, tower.int(level, 1)),
            1 => factors.pop().unwrap(),
            _ => Expr::Mul { level: level as u8, factors },
        }
    }

    pub fn add2(a: Expr, b: Expr) -> Expr {
        Expr::Add { level: a.level() as u8, terms: vec![a, b] }
    }

    pub fn mul2(a: Expr, b: Expr) -> Expr {
        Expr::Mul { level: a.level() as u8, factors: vec![a, b] }
    }

    /// `a − b`.
    pub fn sub(a: Expr, b: Expr, tower: &Tower) -> Expr {
        let level = a.level();
        let neg = Expr::constant(level, tower.int(level, -1));
        Expr::add2(a, Expr::mul2(neg, b))
    }

    pub fn pow_int(base: Expr, k: u64) -> Expr {
        Expr::Pow { level: base.level() as u8, base: Box::new(base), exp: Exponent::Int(k) }
    }

    pub fn pow_expr(base: Expr, exp: Expr) -> Expr {
        Expr::Pow {
            level: base.level() as u8,
            base: Box::new(base),
            exp: Exponent::Expr(Box::new(exp)),
        }
    }

    /// Replace every variable index `i` by `map[i]`, at every level.
    pub fn rename(&self, map: &[usize]) -> Expr {
        match self {
            Expr::Const { .. } => self.clone(),
            Expr::Var { level, index } => Expr::Var { level: *level, index: map[*index as usize] as u32 },
            Expr::Add { level, terms } => {
                Expr::Add { level: *level, terms: terms.iter().map(|t| t.rename(map)).collect() }
            }
            Expr::Mul { level, factors } => Expr::Mul {
                level: *level,
                factors: factors.iter().map(|t| t.rename(map)).collect(),
            },
            Expr::Pow { level, base, exp } => Expr::Pow {
                level: *level,
                base: Box::new(base.rename(map)),
                exp: match exp {
                    Exponent::Int(k) => Exponent::Int(*k),
                    Exponent::Expr(e) => Exponent::Expr(Box::new(e.rename(map))),
                },
            },
        }
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const { .. } => None,
            Expr::Var { index, .. } => Some(*index as usize),
            Expr::Add { terms: v, .. } | Expr::Mul { factors: v, .. } => {
                v.iter().filter_map(Expr::max_var).max()
            }
            Expr::Pow { base, exp, .. } => {
                let e = match exp {
                    Exponent::Int(_) => None,
                    Exponent::Expr(e) => e.max_var(),
                };
                base.max_var().max(e)
            }
        }
    }

    /// True when some power node has a non-constant exponent.
    pub fn has_tower(&self) -> bool {
        match self {
            Expr::Const { .. } | Expr::Var { .. } => false,
            Expr::Add { terms: v, .. } | Expr::Mul { factors: v, .. } => v.iter().any(Expr::has_tower),
            Expr::Pow { base, exp, .. } => matches!(exp, Exponent::Expr(_)) || base.has_tower(),
        }
    }

    /// Structural audit: level discipline, constant shapes, variable bounds.
    pub fn check(&self, tower: &Tower, nvars: usize) -> Result<(), ExprError> {
        let level = self.level();
        if level >= tower.depth() {
            return Err(ExprError::Level { level, depth: tower.depth() });
        }
        let same = |c: &Expr| -> Result<(), ExprError> {
            if c.level() != level {
                return Err(ExprError::Structure(format!(
                    "child at level {} under node at level {level}",
                    c.level()
                )));
            }
            c.check(tower, nvars)
        };
        match self {
            Expr::Const { value, .. } => tower.check_val(level, value),
            Expr::Var { index, .. } => {
                if (*index as usize) < nvars {
                    Ok(())
                } else {
                    Err(ExprError::UnboundVar { index: *index as usize, count: nvars })
                }
            }
            Expr::Add { terms: v, .. } | Expr::Mul { factors: v, .. } => {
                if v.is_empty() {
                    return Err(ExprError::Structure("empty sum or product".into()));
                }
                v.iter().try_for_each(same)
            }
            Expr::Pow { base, exp, .. } => {
                same(base)?;
                if let Exponent::Expr(e) = exp {
                    if e.level() != level + 1 {
                        return Err(ExprError::Structure(format!(
                            "exponent at level {} under power at level {level}",
                            e.level()
                        )));
                    }
                    e.check(tower, nvars)?;
                }
                Ok(())
            }
        }
    }
}
