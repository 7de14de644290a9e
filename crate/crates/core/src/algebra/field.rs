//! `GF(p^n)` with digit-packed element encoding and full log/exp tables.
//!
//! An element is the integer `Σ c_i p^i` for the residue polynomial `Σ c_i t^i`,
//! so the constant term is the least significant base-`p` digit.

use super::modular::{factorize, is_prime};
use super::AlgebraError;

#[derive(Clone, Debug)]
pub struct FieldSpec {
    p: u64,
    n: u32,
    order: u64,
    modulus: Vec<u64>,
    generator: u64,
    exp: Vec<u64>,
    log: Vec<u64>,
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.n == other.n && self.modulus == other.modulus
    }
}

impl Eq for FieldSpec {}

/// Largest field order accepted; tables are built eagerly.
pub const MAX_FIELD_ORDER: u64 = 1 << 20;

fn digits(mut x: u64, p: u64, n: u32) -> Vec<u64> {
    (0..n)
        .map(|_| {
            let d = x % p;
            x /= p;
            d
        })
        .collect()
}

fn pack(d: &[u64], p: u64) -> u64 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Remainder of `a` modulo the monic polynomial `m` over `Z_p` (coefficient vectors, low first).
fn poly_rem(mut a: Vec<u64>, m: &[u64], p: u64) -> Vec<u64> {
    let dm = m.len() - 1;
    while a.len() > dm {
        let lead = a.pop().unwrap();
        if lead != 0 {
            let off = a.len() - dm;
            for (i, &c) in m[..dm].iter().enumerate() {
                a[off + i] = (a[off + i] + p - lead * c % p) % p;
            }
        }
    }
    a
}

fn poly_mul_mod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    let mut r = poly_rem(out, m, p);
    r.resize(m.len() - 1, 0);
    r
}

/// True iff the monic polynomial `m` (degree ≥ 1) has no monic factor of degree `1..=deg/2`.
pub fn is_irreducible(m: &[u64], p: u64) -> bool {
    let n = m.len() - 1;
    for d in 1..=n / 2 {
        let count = p.pow(d as u32);
        for low in 0..count {
            let mut cand = digits(low, p, d as u32);
            cand.push(1);
            if poly_rem(m.to_vec(), &cand, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// Build `GF(p^n)` from a monic modulus (coefficients low first, length `n + 1`).
pub fn field_make(p: u64, n: u32, modulus: &[u64]) -> Result<FieldSpec, AlgebraError> {
    if !is_prime(p) {
        return Err(AlgebraError::NotPrime(p));
    }
    if n == 0 || modulus.len() != n as usize + 1 || modulus[n as usize] != 1 {
        return Err(AlgebraError::BadModulusPoly);
    }
    if modulus.iter().any(|&c| c >= p) {
        return Err(AlgebraError::BadModulusPoly);
    }
    let order = p
        .checked_pow(n)
        .filter(|&q| q <= MAX_FIELD_ORDER)
        .ok_or(AlgebraError::FieldTooLarge { p, n })?;
    if !is_irreducible(modulus, p) {
        return Err(AlgebraError::Reducible);
    }
    let m = modulus.to_vec();
    let group = order - 1;
    let cofactors: Vec<u64> = factorize(group.max(2))
        .iter()
        .map(|&(r, _)| group / r)
        .filter(|_| group > 1)
        .collect();
    let slow_pow = |x: u64, mut e: u64| {
        let mut base = digits(x, p, n);
        let mut acc = digits(1, p, n);
        while e > 0 {
            if e & 1 == 1 {
                acc = poly_mul_mod(&acc, &base, &m, p);
            }
            base = poly_mul_mod(&base, &base, &m, p);
            e >>= 1;
        }
        pack(&acc, p)
    };
    let generator = (1..order)
        .find(|&g| cofactors.iter().all(|&c| slow_pow(g, c) != 1))
        .ok_or(AlgebraError::NoGenerator)?;
    let gd = digits(generator, p, n);
    let mut exp = Vec::with_capacity(group as usize);
    let mut log = vec![u64::MAX; order as usize];
    let mut cur = digits(1, p, n);
    for k in 0..group {
        let v = pack(&cur, p);
        if log[v as usize] != u64::MAX {
            return Err(AlgebraError::NoGenerator);
        }
        log[v as usize] = k;
        exp.push(v);
        cur = poly_mul_mod(&cur, &gd, &m, p);
    }
    Ok(FieldSpec { p, n, order, modulus: m, generator, exp, log })
}

impl FieldSpec {
    /// `GF(p^n)` over the first irreducible monic modulus in encoding order.
    pub fn standard(p: u64, n: u32) -> Result<Self, AlgebraError> {
        if !is_prime(p) {
            return Err(AlgebraError::NotPrime(p));
        }
        if n == 1 {
            return field_make(p, 1, &[0, 1]);
        }
        let count = p.checked_pow(n).ok_or(AlgebraError::FieldTooLarge { p, n })?;
        for low in 0..count {
            let mut m = digits(low, p, n);
            m.push(1);
            if m[0] != 0 && is_irreducible(&m, p) {
                return field_make(p, n, &m);
            }
        }
        Err(AlgebraError::Reducible)
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    /// `p^n`
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn modulus_poly(&self) -> &[u64] {
        &self.modulus
    }

    pub fn generator(&self) -> u64 {
        self.generator
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        if self.p == 2 {
            return a ^ b;
        }
        if self.n == 1 {
            return (a + b) % self.p;
        }
        let (mut a, mut b, mut out, mut place) = (a, b, 0, 1);
        while a > 0 || b > 0 {
            out += ((a % self.p + b % self.p) % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        out
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if self.p == 2 {
            return a;
        }
        if self.n == 1 {
            return (self.p - a) % self.p;
        }
        let (mut a, mut out, mut place) = (a, 0, 1);
        while a > 0 {
            out += ((self.p - a % self.p) % self.p) * place;
            a /= self.p;
            place *= self.p;
        }
        out
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if a == 0 || b == 0 {
            return 0;
        }
        let g = self.order - 1;
        let k = self.log[a as usize] + self.log[b as usize];
        self.exp[(if k >= g { k - g } else { k }) as usize]
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        if a == 0 {
            return None;
        }
        let g = self.order - 1;
        Some(self.exp[((g - self.log[a as usize]) % g) as usize])
    }

    pub fn pow(&self, a: u64, e: u64) -> u64 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let g = self.order - 1;
        let k = (self.log[a as usize] as u128 * e as u128 % g as u128) as u64;
        self.exp[k as usize]
    }

    /// `generator^k`.
    pub fn exp(&self, k: u64) -> u64 {
        self.exp[(k % (self.order - 1)) as usize]
    }

    /// Discrete logarithm to the base of the stored generator.
    pub fn discrete_log(&self, g: u64) -> Result<u64, AlgebraError> {
        if g == 0 || g >= self.order {
            return Err(AlgebraError::LogOfZero);
        }
        Ok(self.log[g as usize])
    }

    /// Image of the integer `k` under `Z → GF(p^n)`.
    pub fn from_int(&self, k: i64) -> u64 {
        k.rem_euclid(self.p as i64) as u64
    }
}

/// Public alias matching the operation name used across the crate.
pub fn discrete_log(spec: &FieldSpec, g: u64) -> Result<u64, AlgebraError> {
    spec.discrete_log(g)
}
