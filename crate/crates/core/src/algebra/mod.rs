//! Exact arithmetic over `Z_n` and `GF(p^n)`, and the maps that move base values
//! into exponent position.

mod field;
mod modular;

use std::fmt;
use std::sync::Arc;

pub use field::{discrete_log, field_make, is_irreducible, FieldSpec, MAX_FIELD_ORDER};
pub use modular::{
    add_mod, factor_modulus, factorize, inv_mod, is_prime, mul_mod, pow_mod, primitive_root,
    sub_mod, totient, ModulusSpec, PrimePower,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("modulus must be at least 2, got {0}")]
    ModulusTooSmall(u64),
    #[error("expected {expected} residues, got {got}")]
    ResidueCount { expected: usize, got: usize },
    #[error("residue {residue} out of range for modulus {modulus}")]
    ResidueOutOfRange { residue: u64, modulus: u64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus polynomial must be monic with coefficients in Z_p")]
    BadModulusPoly,
    #[error("modulus polynomial is reducible")]
    Reducible,
    #[error("no generator found")]
    NoGenerator,
    #[error("field GF({p}^{n}) exceeds the supported size")]
    FieldTooLarge { p: u64, n: u32 },
    #[error("log of zero")]
    LogOfZero,
}

/// A finite commutative coefficient ring: `Z_n` or `GF(p^n)`.
///
/// Elements are `u64` canonical encodings in `0..size()`.
#[derive(Clone, Debug)]
pub enum Ring {
    Zn(Arc<ModulusSpec>),
    Gf(Arc<FieldSpec>),
}

impl PartialEq for Ring {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Ring::Zn(a), Ring::Zn(b)) => a.n() == b.n(),
            (Ring::Gf(a), Ring::Gf(b)) => Arc::ptr_eq(a, b) || a == b,
            _ => false,
        }
    }
}

impl Eq for Ring {}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ring::Zn(m) => write!(f, "Z_{}", m.n()),
            Ring::Gf(g) => write!(f, "GF({}^{})", g.characteristic(), g.degree()),
        }
    }
}

impl Ring {
    pub fn zn(n: u64) -> Result<Self, AlgebraError> {
        Ok(Ring::Zn(Arc::new(factor_modulus(n)?)))
    }

    pub fn gf(p: u64, n: u32) -> Result<Self, AlgebraError> {
        Ok(Ring::Gf(Arc::new(FieldSpec::standard(p, n)?)))
    }

    pub fn size(&self) -> u64 {
        match self {
            Ring::Zn(m) => m.n(),
            Ring::Gf(f) => f.order(),
        }
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            Ring::Zn(m) => m.n(),
            Ring::Gf(f) => f.characteristic(),
        }
    }

    pub fn is_field(&self) -> bool {
        match self {
            Ring::Zn(m) => m.factors().len() == 1 && m.factors()[0].l == 1,
            Ring::Gf(_) => true,
        }
    }

    pub fn field(&self) -> Option<&Arc<FieldSpec>> {
        match self {
            Ring::Gf(f) => Some(f),
            Ring::Zn(_) => None,
        }
    }

    pub fn modulus(&self) -> Option<&Arc<ModulusSpec>> {
        match self {
            Ring::Zn(m) => Some(m),
            Ring::Gf(_) => None,
        }
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        match self {
            Ring::Zn(m) => add_mod(a, b, m.n()),
            Ring::Gf(f) => f.add(a, b),
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        match self {
            Ring::Zn(m) => sub_mod(a, b, m.n()),
            Ring::Gf(f) => f.sub(a, b),
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        self.sub(0, a)
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        match self {
            Ring::Zn(m) => mul_mod(a, b, m.n()),
            Ring::Gf(f) => f.mul(a, b),
        }
    }

    pub fn pow(&self, a: u64, e: u64) -> u64 {
        match self {
            Ring::Zn(m) => pow_mod(a, e, m.n()),
            Ring::Gf(f) => f.pow(a, e),
        }
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        match self {
            Ring::Zn(m) => inv_mod(a, m.n()),
            Ring::Gf(f) => f.inv(a),
        }
    }

    pub fn is_unit(&self, a: u64) -> bool {
        match self {
            Ring::Zn(m) => m.is_unit(a),
            Ring::Gf(_) => a != 0,
        }
    }

    /// Image of an integer under the canonical map `Z → R`.
    pub fn from_int(&self, k: i64) -> u64 {
        match self {
            Ring::Zn(m) => k.rem_euclid(m.n() as i64) as u64,
            Ring::Gf(f) => f.from_int(k),
        }
    }

    pub fn elements(&self) -> std::ops::Range<u64> {
        0..self.size()
    }

    pub fn units(&self) -> Vec<u64> {
        self.elements().filter(|&x| self.is_unit(x)).collect()
    }
}

/// How one CRT factor `p^l` of a modulus is carried into exponent position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PortComponent {
    /// `h(x) = (p − 1)·(w·x mod p^{l−1})` into `Z_{φ(p^l)}`, valid for `l ≥ 2`.
    Hom { p: u64, l: u32, w: u64, target: u64 },
    /// Discrete log modulo a prime `p` to base `root`, into `Z_{p−1}`.
    Log { p: u64, root: u64, logs: Arc<Vec<u64>> },
}

impl PortComponent {
    pub fn target_modulus(&self) -> u64 {
        match self {
            PortComponent::Hom { target, .. } => *target,
            PortComponent::Log { p, .. } => p - 1,
        }
    }

    pub fn apply(&self, x: u64) -> Option<u64> {
        match self {
            PortComponent::Hom { p, l, w, target } => {
                let low = p.pow(l - 1);
                Some((p - 1) * mul_mod(*w, x % low, low) % target)
            }
            PortComponent::Log { p, logs, .. } => {
                let r = x % p;
                (r != 0).then(|| logs[r as usize])
            }
        }
    }

    fn log_component(p: u64) -> Self {
        let root = primitive_root(p);
        let mut logs = vec![0u64; p as usize];
        let mut cur = 1;
        for k in 0..p - 1 {
            logs[cur as usize] = k;
            cur = cur * root % p;
        }
        PortComponent::Log { p, root, logs: Arc::new(logs) }
    }
}

/// Porting map `Z_n → Π Z_{φ(p_i^{l_i})}`, one component per CRT factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PortingDescriptor {
    pub components: Vec<PortComponent>,
}

impl PortingDescriptor {
    /// True when every factor is ported by the ring homomorphism (all `l_i ≥ 2`).
    pub fn is_homomorphism(&self) -> bool {
        self.components.iter().all(|c| matches!(c, PortComponent::Hom { .. }))
    }

    /// Componentwise image; `None` when a discrete-log component meets zero.
    pub fn apply(&self, x: u64) -> Option<Vec<u64>> {
        self.components.iter().map(|c| c.apply(x)).collect()
    }
}

/// Build the exponent porting map for `Z_n`.
///
/// Factors with `l ≥ 2` use the homomorphism `h`; factors with `l = 1` fall back to
/// discrete-log porting with the smallest primitive root. The caller can tell the two
/// apart with [`PortingDescriptor::is_homomorphism`].
pub fn exponent_port_hom(spec: &ModulusSpec) -> PortingDescriptor {
    let components = spec
        .factors()
        .iter()
        .map(|f| {
            if f.l >= 2 {
                let low = f.p.pow(f.l - 1);
                let w = inv_mod((f.p - 1) % low, low).expect("p − 1 is coprime to p");
                PortComponent::Hom { p: f.p, l: f.l, w, target: f.totient() }
            } else {
                PortComponent::log_component(f.p)
            }
        })
        .collect();
    PortingDescriptor { components }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hom_on_z9() {
        let h = exponent_port_hom(&factor_modulus(9).unwrap());
        assert!(h.is_homomorphism());
        assert_eq!(h.apply(1), Some(vec![4]));
        assert_eq!(h.apply(0), Some(vec![0]));
        assert_eq!(h.apply(2), Some(vec![2]));
        assert_eq!((4 + 4) % 6, 2);
    }

    #[test]
    fn hom_laws_exhaustive() {
        for q in [4u64, 8, 9, 16, 25, 27, 32, 49, 64, 81] {
            let h = exponent_port_hom(&factor_modulus(q).unwrap());
            let t = h.components[0].target_modulus();
            for x in 0..q {
                for y in 0..q {
                    let hx = h.apply(x).unwrap()[0];
                    let hy = h.apply(y).unwrap()[0];
                    assert_eq!(h.apply((x + y) % q).unwrap()[0], (hx + hy) % t);
                    assert_eq!(h.apply(x * y % q).unwrap()[0], hx * hy % t);
                }
            }
        }
    }

    #[test]
    fn hybrid_for_squarefree_factor() {
        let h = exponent_port_hom(&factor_modulus(12).unwrap());
        assert!(!h.is_homomorphism());
        assert_eq!(h.apply(3), None);
        assert_eq!(h.components[1].target_modulus(), 2);
    }

    #[test]
    fn ring_units() {
        let r = Ring::zn(12).unwrap();
        assert_eq!(r.units(), vec![1, 5, 7, 11]);
        let g = Ring::gf(2, 3).unwrap();
        assert_eq!(g.units().len(), 7);
        assert_eq!(g.from_int(3), 1);
    }
}
