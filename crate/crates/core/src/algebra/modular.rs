//! Residue arithmetic in `Z_n` with CRT decomposition.

use num_integer::Integer;

use super::AlgebraError;

/// `a * b mod m` without overflow.
#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

#[inline]
pub fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        m - (b - a)
    }
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Multiplicative inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let eg = (a as i128 % m as i128).extended_gcd(&(m as i128));
    if eg.gcd != 1 {
        return None;
    }
    Some(eg.x.rem_euclid(m as i128) as u64)
}

/// Prime factorisation by trial division, as `(p, l)` pairs in increasing `p`.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            let mut l = 0;
            while n.is_multiple_of(p) {
                n /= p;
                l += 1;
            }
            out.push((p, l));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n) == [(n, 1)]
}

/// Euler's totient.
pub fn totient(n: u64) -> u64 {
    factorize(n)
        .iter()
        .map(|&(p, l)| (p - 1) * p.pow(l - 1))
        .product()
}

/// Smallest primitive root modulo a prime `p`.
pub fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let cofactors: Vec<u64> = factorize(p - 1).iter().map(|&(r, _)| (p - 1) / r).collect();
    (2..p)
        .find(|&g| cofactors.iter().all(|&c| pow_mod(g, c, p) != 1))
        .expect("every prime has a primitive root")
}

/// One prime-power factor `p^l` of a modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimePower {
    pub p: u64,
    pub l: u32,
    /// `p^l`
    pub q: u64,
}

impl PrimePower {
    /// `φ(p^l) = (p − 1)·p^{l−1}`.
    pub fn totient(&self) -> u64 {
        (self.p - 1) * self.p.pow(self.l - 1)
    }
}

/// A modulus `n` with its factorisation, CRT idempotents and totient.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModulusSpec {
    n: u64,
    factors: Vec<PrimePower>,
    idempotents: Vec<u64>,
    totient: u64,
}

/// Factor `n` and populate its CRT data.
pub fn factor_modulus(n: u64) -> Result<ModulusSpec, AlgebraError> {
    if n < 2 {
        return Err(AlgebraError::ModulusTooSmall(n));
    }
    let factors: Vec<PrimePower> = factorize(n)
        .into_iter()
        .map(|(p, l)| PrimePower { p, l, q: p.pow(l) })
        .collect();
    let idempotents = factors
        .iter()
        .map(|f| {
            let q = n / f.q;
            let m = inv_mod(q % f.q, f.q).expect("cofactor is coprime to its prime power");
            mul_mod(m, q, n)
        })
        .collect();
    let totient = factors.iter().map(PrimePower::totient).product();
    Ok(ModulusSpec { n, factors, idempotents, totient })
}

impl ModulusSpec {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn factors(&self) -> &[PrimePower] {
        &self.factors
    }

    pub fn idempotents(&self) -> &[u64] {
        &self.idempotents
    }

    pub fn totient(&self) -> u64 {
        self.totient
    }

    pub fn crt_split(&self, x: u64) -> Vec<u64> {
        self.factors.iter().map(|f| x % f.q).collect()
    }

    /// `Σ e_i·r_i mod n`.
    pub fn crt_join(&self, residues: &[u64]) -> Result<u64, AlgebraError> {
        if residues.len() != self.factors.len() {
            return Err(AlgebraError::ResidueCount {
                expected: self.factors.len(),
                got: residues.len(),
            });
        }
        let mut acc = 0;
        for ((r, f), e) in residues.iter().zip(&self.factors).zip(&self.idempotents) {
            if *r >= f.q {
                return Err(AlgebraError::ResidueOutOfRange { residue: *r, modulus: f.q });
            }
            acc = add_mod(acc, mul_mod(*e, *r, self.n), self.n);
        }
        Ok(acc)
    }

    pub fn is_unit(&self, x: u64) -> bool {
        self.factors.iter().all(|f| !x.is_multiple_of(f.p))
    }
}
