//! Dense univariate and sparse multivariate polynomials over a [`Ring`].

mod multi;

use std::fmt;
use std::sync::Arc;

pub use multi::MultiPoly;

use crate::algebra::{factor_modulus, Ring};

/// Default bound on the degree of products and compositions.
pub const DEFAULT_DEGREE_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("operands live over different coefficient rings ({0} vs {1})")]
    MixedDomains(String, String),
    #[error("degree {degree} exceeds cap {cap}")]
    DegreeCap { degree: usize, cap: usize },
    #[error("interpolation node {0} repeated")]
    RepeatedNode(u64),
    #[error("node difference {0} is not invertible")]
    NonUnitDifference(u64),
    #[error("expected {expected} variables, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("CRT operations need a Z_n coefficient ring")]
    NotResidueRing,
}

#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    ring: Ring,
    coeffs: Vec<u64>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[{}]{:?}", self.ring, self.coeffs)
    }
}

impl Poly {
    /// Coefficients low degree first; reduced into the ring and trimmed.
    pub fn new(ring: Ring, coeffs: Vec<u64>) -> Self {
        let n = ring.size();
        let mut coeffs: Vec<u64> = coeffs.into_iter().map(|c| c % n).collect();
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly { ring, coeffs }
    }

    pub fn from_ints(ring: Ring, coeffs: &[i64]) -> Self {
        let c = coeffs.iter().map(|&k| ring.from_int(k)).collect();
        Poly::new(ring, c)
    }

    pub fn zero(ring: Ring) -> Self {
        Poly { ring, coeffs: Vec::new() }
    }

    pub fn constant(ring: Ring, c: u64) -> Self {
        Poly::new(ring, vec![c])
    }

    /// The polynomial `x`.
    pub fn x(ring: Ring) -> Self {
        Poly::new(ring, vec![0, 1])
    }

    pub fn monomial(ring: Ring, c: u64, k: usize) -> Self {
        let mut v = vec![0; k + 1];
        v[k] = c;
        Poly::new(ring, v)
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> u64 {
        self.coeffs.get(k).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn check_ring(&self, other: &Poly) -> Result<(), PolyError> {
        if self.ring != other.ring {
            return Err(PolyError::MixedDomains(self.ring.to_string(), other.ring.to_string()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.check_ring(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n).map(|k| self.ring.add(self.coeff(k), other.coeff(k))).collect();
        Ok(Poly::new(self.ring.clone(), c))
    }

    pub fn sub(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.check_ring(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n).map(|k| self.ring.sub(self.coeff(k), other.coeff(k))).collect();
        Ok(Poly::new(self.ring.clone(), c))
    }

    pub fn scale(&self, a: u64) -> Poly {
        let c = self.coeffs.iter().map(|&x| self.ring.mul(a, x)).collect();
        Poly::new(self.ring.clone(), c)
    }

    pub fn mul(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.mul_capped(other, DEFAULT_DEGREE_CAP)
    }

    pub fn mul_capped(&self, other: &Poly, cap: usize) -> Result<Poly, PolyError> {
        self.check_ring(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Poly::zero(self.ring.clone()));
        }
        let degree = self.coeffs.len() + other.coeffs.len() - 2;
        if degree > cap {
            return Err(PolyError::DegreeCap { degree, cap });
        }
        let mut c = vec![0; degree + 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                c[i + j] = self.ring.add(c[i + j], self.ring.mul(a, b));
            }
        }
        Ok(Poly::new(self.ring.clone(), c))
    }

    /// `self(inner(x))`.
    pub fn compose(&self, inner: &Poly) -> Result<Poly, PolyError> {
        self.compose_capped(inner, DEFAULT_DEGREE_CAP)
    }

    pub fn compose_capped(&self, inner: &Poly, cap: usize) -> Result<Poly, PolyError> {
        self.check_ring(inner)?;
        let mut acc = Poly::zero(self.ring.clone());
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul_capped(inner, cap)?.add(&Poly::constant(self.ring.clone(), c))?;
        }
        Ok(acc)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: u64) -> u64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| self.ring.add(self.ring.mul(acc, x), c))
    }

    pub fn derivative(&self) -> Poly {
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &a)| self.ring.mul(self.ring.from_int(k as i64), a))
            .collect();
        Poly::new(self.ring.clone(), c)
    }

    /// Reinterpret the integer coefficients over another ring.
    pub fn lift_to(&self, ring: Ring) -> Poly {
        Poly::new(ring, self.coeffs.clone())
    }

    /// Coefficientwise reduction modulo each prime-power factor of `n`.
    pub fn crt_split(&self) -> Result<Vec<Poly>, PolyError> {
        let spec = self.ring.modulus().ok_or(PolyError::NotResidueRing)?;
        spec.factors()
            .iter()
            .map(|f| {
                let ring = Ring::Zn(Arc::new(factor_modulus(f.q).expect("q ≥ 2")));
                Ok(Poly::new(ring, self.coeffs.clone()))
            })
            .collect()
    }

    /// Inverse of [`Poly::crt_split`]: `Σ e_i·f_i`.
    pub fn crt_join(parts: &[Poly], ring: &Ring) -> Result<Poly, PolyError> {
        let spec = ring.modulus().ok_or(PolyError::NotResidueRing)?;
        if parts.len() != spec.factors().len() {
            return Err(PolyError::Arity { expected: spec.factors().len(), got: parts.len() });
        }
        let len = parts.iter().map(|p| p.coeffs.len()).max().unwrap_or(0);
        let c = (0..len)
            .map(|k| {
                let r: Vec<u64> = parts.iter().map(|p| p.coeff(k)).collect();
                spec.crt_join(&r).expect("components reduced")
            })
            .collect();
        Ok(Poly::new(ring.clone(), c))
    }

    /// Full value table on `0..ring.size()`.
    pub fn table(&self) -> Vec<u64> {
        self.ring.elements().map(|x| self.eval(x)).collect()
    }
}

/// Interpolating polynomial through `points` with degree `< points.len()`.
pub fn lagrange_interpolate(points: &[(u64, u64)], ring: &Ring) -> Result<Poly, PolyError> {
    for (i, &(xi, _)) in points.iter().enumerate() {
        for &(xj, _) in &points[i + 1..] {
            if xi == xj {
                return Err(PolyError::RepeatedNode(xi));
            }
            let d = ring.sub(xi, xj);
            if !ring.is_unit(d) {
                return Err(PolyError::NonUnitDifference(d));
            }
        }
    }
    let mut acc = Poly::zero(ring.clone());
    for (i, &(xi, yi)) in points.iter().enumerate() {
        let mut basis = Poly::constant(ring.clone(), 1);
        let mut denom = 1;
        for (j, &(xj, _)) in points.iter().enumerate() {
            if i != j {
                let lin = Poly::new(ring.clone(), vec![ring.neg(xj), 1]);
                basis = basis.mul_capped(&lin, usize::MAX)?;
                denom = ring.mul(denom, ring.sub(xi, xj));
            }
        }
        let w = ring.mul(yi, ring.inv(denom).expect("checked unit"));
        acc = acc.add(&basis.scale(w))?;
    }
    Ok(acc)
}

/// Bijectivity of `f` on `Z_{p^l}` by the reduction-plus-derivative criterion.
///
/// `f` is read through its integer coefficients, so any coefficient ring works.
pub fn is_bijective_mod_pl(f: &Poly, p: u64, l: u32) -> bool {
    let zp = Ring::zn(p).expect("p ≥ 2");
    let base = f.lift_to(zp.clone());
    let mut seen = vec![false; p as usize];
    for x in 0..p {
        let v = base.eval(x) as usize;
        if seen[v] {
            return false;
        }
        seen[v] = true;
    }
    if l == 1 {
        return true;
    }
    let d = base.derivative();
    (0..p).all(|x| d.eval(x) != 0)
}

/// Exhaustive distinctness of `f` on its own coefficient ring.
pub fn is_bijective_exhaustive(f: &Poly) -> bool {
    let n = f.ring().size() as usize;
    let mut seen = vec![false; n];
    for x in 0..n as u64 {
        let v = f.eval(x) as usize;
        if seen[v] {
            return false;
        }
        seen[v] = true;
    }
    true
}

/// Test helper: classify `f` over `Z_p` as irreducible by exhaustive search for monic divisors.
pub fn is_irreducible_mod_p(f: &Poly, p: u64) -> bool {
    let g = f.lift_to(Ring::zn(p).expect("p ≥ 2"));
    match g.degree() {
        None | Some(0) => false,
        Some(_) => {
            let lead = g.coeffs()[g.coeffs().len() - 1];
            let inv = crate::algebra::inv_mod(lead, p).expect("nonzero mod prime");
            crate::algebra::is_irreducible(g.scale(inv).coeffs(), p)
        }
    }
}
