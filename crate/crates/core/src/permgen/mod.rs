//! Univariate bijections: permutation polynomials over `GF(p^n)`, the derivative-controlled
//! constructions over `Z_p`, Hensel inversion over `Z_{p^l}`, subgroup maps and the two
//! hybrid hashing constructions.

mod field;
mod hybrid;
mod zp;

use std::fmt;
use std::sync::Arc;

pub use field::{binomial_permutation, linearized_permutation, power_permutation, scaled_power};
pub use hybrid::{admissible_splits, hybrid_perm_method1, hybrid_perm_method2, subgroup_bijection};
pub use zp::{
    default_lambda, hensel_bijection, hensel_invert, p2_permutation, perm_poly_zp_method1,
    perm_poly_zp_method2, HenselInverter, MAX_SMALL_PRIME,
};

use crate::algebra::{AlgebraError, Ring};
use crate::expr::{Expr, ExprError, Program, ProgramBuilder, Tower};
use crate::poly::{lagrange_interpolate, Poly, PolyError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PermError {
    #[error("linear operator is singular: nonzero kernel element {witness}")]
    Singular { witness: u64 },
    #[error("gcd({r}, {order}) ≠ 1")]
    NotCoprime { r: u64, order: u64 },
    #[error("{r} does not divide the extension degree {n}")]
    BadDivisor { r: u32, n: u32 },
    #[error("norm condition fails; kernel contains {witness}")]
    NormCondition { witness: u64 },
    #[error("input is not a permutation of 0..{0}")]
    NotPermutation(u64),
    #[error("derivative map vanishes at {at}")]
    Vanishes { at: u64 },
    #[error("invalid λ choice: {0}")]
    Lambda(String),
    #[error("prime {0} outside the supported range")]
    PrimeRange(u64),
    #[error("bijectivity condition violated: {0}")]
    Condition(&'static str),
    #[error("map collides: {0} and {1} share an image")]
    Collision(u64, u64),
    #[error("image of {0} leaves the domain")]
    LeavesDomain(u64),
    #[error("f′({x}) is not invertible")]
    NonUnitDerivative { x: u64 },
    #[error("Hensel iterate misses the target modulo p^{r}")]
    HenselStep { r: u32 },
    #[error("no admissible (s, t) split of {0}")]
    NoSplit(u64),
    #[error("invalid split s = {s}, t = {t}")]
    BadSplit { s: u64, t: u64 },
    #[error("class {class} has {size} elements but its target has {target}")]
    ClassSize { class: usize, size: usize, target: usize },
    #[error("class map {class} does not carry its class onto the target class")]
    ClassMap { class: usize },
    #[error("class-invariance fails at x = {x} for map {i}")]
    Invariance { x: u64, i: usize },
    #[error("{0} is outside the domain")]
    OutsideDomain(u64),
    #[error("operation needs a finite field")]
    NotField,
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Where a bijection acts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// Every element of the ring.
    All,
    /// The unit group.
    Units,
    /// `H_t = {x : x^t = 1}` inside a field.
    Subgroup { t: u64 },
}

impl Domain {
    pub fn contains(&self, ring: &Ring, x: u64) -> bool {
        x < ring.size()
            && match self {
                Domain::All => true,
                Domain::Units => ring.is_unit(x),
                Domain::Subgroup { t } => x != 0 && ring.pow(x, *t) == 1,
            }
    }

    pub fn elements(&self, ring: &Ring) -> Vec<u64> {
        ring.elements().filter(|&x| self.contains(ring, x)).collect()
    }
}

/// A univariate evaluator.
#[derive(Clone, Debug, PartialEq)]
pub enum UniFn {
    Poly(Poly),
    Program(Program),
}

impl UniFn {
    pub fn eval(&self, x: u64) -> Result<u64, ExprError> {
        match self {
            UniFn::Poly(p) => Ok(p.eval(x)),
            UniFn::Program(p) => Ok(p.eval(&[x])?[0]),
        }
    }

    /// Emit `self(var arg)` into a builder whose base ring matches.
    pub fn emit(&self, b: &mut ProgramBuilder, arg: usize) -> Expr {
        match self {
            UniFn::Poly(p) => poly_expr(p, Expr::var(arg), 0, b.tower()),
            UniFn::Program(p) => b.inline(p, &[arg]).remove(0),
        }
    }

    pub fn to_program(&self, tower: Arc<Tower>) -> Result<Program, ExprError> {
        match self {
            UniFn::Program(p) => Ok(p.clone()),
            UniFn::Poly(_) => {
                let mut b = ProgramBuilder::new(tower, 1);
                let e = self.emit(&mut b, 0);
                b.finish(vec![e])
            }
        }
    }
}

/// `Σ c_k·x^k` as an expression at `level`, coefficients read as integers.
pub fn poly_expr(p: &Poly, x: Expr, level: usize, tower: &Tower) -> Expr {
    let terms = p
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(k, &c)| {
            let mono = match k {
                0 => None,
                1 => Some(x.clone()),
                _ => Some(Expr::pow_int(x.clone(), k as u64)),
            };
            // Base coefficients are ring encodings; higher levels are residue rings.
            let cst = || match level {
                0 => Expr::scalar(c),
                _ => Expr::constant(level, tower.int(level, c as i64)),
            };
            match (mono, c) {
                (None, _) => cst(),
                (Some(m), 1) => m,
                (Some(m), _) => Expr::mul2(cst(), m),
            }
        })
        .collect();
    Expr::sum(level, terms, tower)
}

/// How the inverse is computed.
#[derive(Clone)]
pub enum Inverse {
    /// Dense table indexed by ring element; `u64::MAX` marks points outside the image.
    Table(Arc<Vec<u64>>),
    /// `y ↦ y^e` (with `0 ↦ 0`).
    Power { e: u64 },
    /// `y ↦ (a_inv·y)^e`.
    ScaledPower { a_inv: u64, e: u64 },
    Hensel(Arc<HenselInverter>),
    ClosedForm(Arc<dyn Fn(u64) -> Option<u64> + Send + Sync>),
}

impl fmt::Debug for Inverse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Inverse::Table(t) => write!(f, "Table(len {})", t.len()),
            Inverse::Power { e } => write!(f, "Power({e})"),
            Inverse::ScaledPower { a_inv, e } => write!(f, "ScaledPower({a_inv}, {e})"),
            Inverse::Hensel(h) => write!(f, "Hensel({:?})", h.poly()),
            Inverse::ClosedForm(_) => f.write_str("ClosedForm"),
        }
    }
}

impl Inverse {
    pub fn tag(&self) -> &'static str {
        match self {
            Inverse::Table(_) => "table",
            Inverse::Power { .. } | Inverse::ScaledPower { .. } | Inverse::ClosedForm(_) => {
                "closed-form"
            }
            Inverse::Hensel(_) => "hensel",
        }
    }
}

/// A certified bijection of a declared domain onto itself.
#[derive(Clone, Debug)]
pub struct Bijection {
    ring: Ring,
    domain: Domain,
    forward: UniFn,
    inverse: Inverse,
}

impl Bijection {
    /// Wrap parts and certify both round trips exhaustively.
    pub fn new(ring: Ring, domain: Domain, forward: UniFn, inverse: Inverse) -> Result<Self, PermError> {
        let b = Bijection { ring, domain, forward, inverse };
        b.certify()?;
        Ok(b)
    }

    /// Wrap a forward map and derive a table inverse, rejecting collisions.
    pub fn with_table(ring: Ring, domain: Domain, forward: UniFn) -> Result<Self, PermError> {
        let table = inverse_table(&ring, domain, |x| forward.eval(x))?;
        Ok(Bijection { ring, domain, forward, inverse: Inverse::Table(Arc::new(table)) })
    }

    pub(crate) fn unchecked(ring: Ring, domain: Domain, forward: UniFn, inverse: Inverse) -> Self {
        Bijection { ring, domain, forward, inverse }
    }

    pub fn identity(ring: Ring, domain: Domain) -> Self {
        let f = UniFn::Poly(Poly::x(ring.clone()));
        Bijection { ring, domain, forward: f, inverse: Inverse::Power { e: 1 } }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn forward_fn(&self) -> &UniFn {
        &self.forward
    }

    pub fn inverse_kind(&self) -> &Inverse {
        &self.inverse
    }

    pub fn forward(&self, x: u64) -> Result<u64, PermError> {
        if !self.domain.contains(&self.ring, x) {
            return Err(PermError::OutsideDomain(x));
        }
        Ok(self.forward.eval(x)?)
    }

    pub fn inverse(&self, y: u64) -> Option<u64> {
        if !self.domain.contains(&self.ring, y) {
            return None;
        }
        let r = &self.ring;
        match &self.inverse {
            Inverse::Table(t) => t.get(y as usize).copied().filter(|&x| x != u64::MAX),
            Inverse::Power { e } => Some(if y == 0 { 0 } else { r.pow(y, *e) }),
            Inverse::ScaledPower { a_inv, e } => Some(r.pow(r.mul(*a_inv, y), *e)),
            Inverse::Hensel(h) => h.invert(y).ok(),
            Inverse::ClosedForm(f) => f(y),
        }
    }

    /// Exhaustive check of both round trips on the domain.
    pub fn certify(&self) -> Result<(), PermError> {
        let pts = self.domain.elements(&self.ring);
        let mut seen = vec![u64::MAX; self.ring.size() as usize];
        for &x in &pts {
            let y = self.forward(x)?;
            if !self.domain.contains(&self.ring, y) {
                return Err(PermError::LeavesDomain(x));
            }
            if seen[y as usize] != u64::MAX {
                return Err(PermError::Collision(seen[y as usize], x));
            }
            seen[y as usize] = x;
            if self.inverse(y) != Some(x) {
                return Err(PermError::Condition("inverse disagrees with forward"));
            }
        }
        Ok(())
    }

    pub fn emit_forward(&self, b: &mut ProgramBuilder, arg: usize) -> Expr {
        self.forward.emit(b, arg)
    }

    /// Emit the inverse when it has an expression form. Table inverses over a field are
    /// emitted through their interpolating polynomial.
    pub fn emit_inverse(&self, b: &mut ProgramBuilder, arg: usize) -> Option<Expr> {
        let x = Expr::var(arg);
        match &self.inverse {
            Inverse::Power { e } => Some(if *e == 1 { x } else { Expr::pow_int(x, *e) }),
            Inverse::ScaledPower { a_inv, e } => {
                Some(Expr::pow_int(Expr::mul2(Expr::scalar(*a_inv), x), *e))
            }
            Inverse::Table(_) if self.ring.is_field() => {
                let p = self.inverse_poly()?;
                Some(poly_expr(&p, x, 0, b.tower()))
            }
            _ => None,
        }
    }

    /// Interpolating polynomial of the inverse over its domain (fields only).
    pub fn inverse_poly(&self) -> Option<Poly> {
        if !self.ring.is_field() {
            return None;
        }
        let pts: Vec<(u64, u64)> = self
            .domain
            .elements(&self.ring)
            .into_iter()
            .map(|y| (y, self.inverse(y).expect("certified")))
            .collect();
        lagrange_interpolate(&pts, &self.ring).ok()
    }
}

/// Dense inverse table for `f` on `domain`, rejecting collisions and escapes.
pub(crate) fn inverse_table(
    ring: &Ring,
    domain: Domain,
    f: impl Fn(u64) -> Result<u64, ExprError>,
) -> Result<Vec<u64>, PermError> {
    let mut table = vec![u64::MAX; ring.size() as usize];
    for x in domain.elements(ring) {
        let y = f(x)?;
        if !domain.contains(ring, y) {
            return Err(PermError::LeavesDomain(x));
        }
        if table[y as usize] != u64::MAX {
            return Err(PermError::Collision(table[y as usize], x));
        }
        table[y as usize] = x;
    }
    Ok(table)
}
