use std::sync::Arc;

use super::{Bijection, Domain, Inverse, PermError, UniFn};
use crate::algebra::{inv_mod, is_prime, Ring};
use crate::poly::{is_bijective_mod_pl, lagrange_interpolate, Poly};

/// Largest prime accepted by the two `Z_p` constructions.
pub const MAX_SMALL_PRIME: u64 = 31;

fn check_prime(p: u64) -> Result<Ring, PermError> {
    if !(3..=MAX_SMALL_PRIME).contains(&p) || !is_prime(p) {
        return Err(PermError::PrimeRange(p));
    }
    Ok(Ring::zn(p)?)
}

fn check_perm(p: u64, perm: &[u64]) -> Result<(), PermError> {
    let mut seen = vec![false; p as usize];
    if perm.len() != p as usize {
        return Err(PermError::NotPermutation(p));
    }
    for &a in perm {
        if a >= p || std::mem::replace(&mut seen[a as usize], true) {
            return Err(PermError::NotPermutation(p));
        }
    }
    Ok(())
}

/// Polynomial `f` over `Z_p` with `f(i) = perm[i]` and `f′(x) = g(x)` as functions on `Z_p`.
///
/// `g` is first reduced to its function representative of degree `≤ p − 1`; a leading
/// `x^{p−1}` term is realized through `x^{2p−1}`, whose derivative is `−x^{2p−2}`.
pub fn perm_poly_zp_method1(p: u64, perm: &[u64], g: &Poly) -> Result<Poly, PermError> {
    let zp = check_prime(p)?;
    check_perm(p, perm)?;
    let g = g.lift_to(zp.clone());
    if let Some(at) = (0..p).find(|&x| g.eval(x) == 0) {
        return Err(PermError::Vanishes { at });
    }
    let pts: Vec<(u64, u64)> = (0..p).map(|x| (x, g.eval(x))).collect();
    let gr = lagrange_interpolate(&pts, &zp)?;
    let vals: Vec<(u64, u64)> = (0..p).map(|x| (x, perm[x as usize])).collect();
    let b = lagrange_interpolate(&vals, &zp)?;
    let pu = p as usize;
    let mut coeffs = vec![0u64; (pu - 1) * pu + 1];
    coeffs[0] = b.coeff(0);
    let mut sigma_shift = 0;
    let top = gr.coeff(pu - 1);
    if top != 0 {
        let alpha = zp.neg(top);
        coeffs = {
            let mut c = coeffs;
            c.resize((2 * pu).max(c.len()), 0);
            c
        };
        coeffs[2 * pu - 1] = alpha;
        sigma_shift = alpha;
    }
    for i in 1..pu {
        let c_i = gr.coeff(i - 1);
        let rho = zp.mul(c_i, inv_mod(i as u64, p).expect("i < p"));
        let mut sigma = zp.sub(b.coeff(i), rho);
        if i == 1 {
            sigma = zp.sub(sigma, sigma_shift);
        }
        coeffs[i] = zp.add(coeffs[i], rho);
        coeffs[i * pu] = zp.add(coeffs[i * pu], sigma);
    }
    let f = Poly::new(zp, coeffs);
    debug_assert!((0..p).all(|x| f.eval(x) == perm[x as usize]));
    Ok(f)
}

/// Default λ: `λ_i = i − (p−1)/2`, then `λ_0 := λ_1` and `λ_{p−1} := λ_{p−2}`.
pub fn default_lambda(p: u64) -> Vec<u64> {
    let half = (p - 1) / 2;
    let mut l: Vec<u64> = (0..p).map(|i| (i + p - half) % p).collect();
    l[0] = l[1];
    l[p as usize - 1] = l[p as usize - 2];
    l
}

/// Degree `≤ 2p − 2` polynomial over `Z_p` with `f(i) = perm[i]` and `f′(i) ≠ 0`.
///
/// `f(x) = Σ_i (b_i + c_i x^{p−1} − σ i)·ℓ_i(x) + σ x^p`, with `c_0 = 0`,
/// `c_j = j·(Σ_{i≠j} a_i (j−i)⁻¹ − λ_j)`, `b_j = a_j − c_j` and `σ ∉ {λ_i}` the smallest
/// admissible value.
pub fn perm_poly_zp_method2(p: u64, perm: &[u64], lambda: Option<&[u64]>) -> Result<Poly, PermError> {
    let zp = check_prime(p)?;
    check_perm(p, perm)?;
    let lam: Vec<u64> = match lambda {
        Some(l) => l.iter().map(|&v| v % p).collect(),
        None => default_lambda(p),
    };
    if lam.len() != p as usize {
        return Err(PermError::Lambda(format!("expected {p} values, got {}", lam.len())));
    }
    if lam.iter().fold(0, |s, &v| (s + v) % p) != 0 {
        return Err(PermError::Lambda("values must sum to zero".into()));
    }
    let mut set = lam.clone();
    set.sort_unstable();
    set.dedup();
    if set.len() as u64 > p - 1 {
        return Err(PermError::Lambda("at most p − 1 distinct values allowed".into()));
    }
    let sigma = (0..p).find(|s| set.binary_search(s).is_err()).expect("|Λ| < p");
    let a = perm;
    let mut b = vec![0u64; p as usize];
    let mut c = vec![0u64; p as usize];
    b[0] = a[0];
    for j in 1..p {
        let s_j = (0..p).filter(|&i| i != j).fold(0, |acc, i| {
            let d = inv_mod(zp.sub(j, i), p).expect("distinct nodes");
            zp.add(acc, zp.mul(a[i as usize], d))
        });
        c[j as usize] = zp.mul(j, zp.sub(s_j, lam[j as usize]));
        b[j as usize] = zp.sub(a[j as usize], c[j as usize]);
    }
    let x = Poly::x(zp.clone());
    let xpm1 = Poly::monomial(zp.clone(), 1, p as usize - 1);
    let mut f = Poly::monomial(zp.clone(), sigma, p as usize);
    for i in 0..p {
        // ℓ_i(x) = 1 − (x − i)^{p−1}
        let lin = x.sub(&Poly::constant(zp.clone(), i))?;
        let mut pw = Poly::constant(zp.clone(), 1);
        for _ in 0..p - 1 {
            pw = pw.mul(&lin)?;
        }
        let ell = Poly::constant(zp.clone(), 1).sub(&pw)?;
        let coef = xpm1
            .scale(c[i as usize])
            .add(&Poly::constant(zp.clone(), zp.sub(b[i as usize], zp.mul(sigma, i))))?;
        f = f.add(&coef.mul(&ell)?)?;
    }
    let d = f.derivative();
    if let Some(at) = (0..p).find(|&i| d.eval(i) == 0) {
        return Err(PermError::Vanishes { at });
    }
    debug_assert!((0..p).all(|i| f.eval(i) == a[i as usize]));
    Ok(f)
}

/// Permutation polynomials over `Z_{2^l}`.
pub fn p2_permutation(l: u32, coeffs: &[u64]) -> Result<Poly, PermError> {
    if l == 0 || l > 32 {
        return Err(PermError::Condition("exponent l must be in 1..=32"));
    }
    let odd = |v: u64| v & 1 == 1;
    let total: u64 = coeffs.iter().skip(1).map(|&b| b & 1).sum();
    if total % 2 != 1 {
        return Err(PermError::Condition("sum of b_i for i ≥ 1 must be odd"));
    }
    if l >= 2 {
        if !coeffs.get(1).copied().is_some_and(odd) {
            return Err(PermError::Condition("b_1 must be odd"));
        }
        let n = coeffs.iter().enumerate().skip(3).step_by(2).filter(|(_, &b)| odd(b)).count();
        if n % 2 != 0 {
            return Err(PermError::Condition("odd count of odd b_i at odd indices ≥ 3"));
        }
    }
    let f = Poly::new(Ring::zn(1 << l)?, coeffs.to_vec());
    if l <= 10 && !crate::poly::is_bijective_exhaustive(&f) {
        return Err(PermError::Condition("exhaustive check failed"));
    }
    Ok(f)
}

fn prime_power(ring: &Ring) -> Result<(u64, u32), PermError> {
    let m = ring.modulus().ok_or(PermError::Condition("Hensel inversion needs Z_{p^l}"))?;
    match m.factors() {
        [f] => Ok((f.p, f.l)),
        _ => Err(PermError::Condition("modulus is not a prime power")),
    }
}

/// Newton–Hensel inversion `y ↦ f⁻¹(y)` on `Z_{p^l}`.
///
/// `base_inverse[y mod p]` must give a root of `f(x) ≡ y (mod p)`.
pub fn hensel_invert(f: &Poly, y: u64, base_inverse: &[u64]) -> Result<u64, PermError> {
    let (p, l) = prime_power(f.ring())?;
    let q = f.ring().size();
    let y = y % q;
    let mut x = *base_inverse.get((y % p) as usize).ok_or(PermError::OutsideDomain(y))?;
    if x == u64::MAX {
        return Err(PermError::OutsideDomain(y));
    }
    let d = f.derivative();
    let mut r = 1u32;
    while r < l {
        r = (2 * r).min(l);
        let pr = p.pow(r);
        let fx = f.eval(x) % pr;
        let dx = d.eval(x) % pr;
        let inv = inv_mod(dx, pr).ok_or(PermError::NonUnitDerivative { x })?;
        let delta = ((y % pr) + pr - fx) % pr;
        x = (x + (inv as u128 * delta as u128 % pr as u128) as u64) % pr;
        if f.eval(x) % pr != y % pr {
            return Err(PermError::HenselStep { r });
        }
    }
    Ok(x)
}

/// A polynomial over `Z_{p^l}` together with its mod-`p` inverse table.
#[derive(Clone, Debug)]
pub struct HenselInverter {
    f: Poly,
    base: Vec<u64>,
}

impl HenselInverter {
    pub fn new(f: Poly) -> Result<Self, PermError> {
        let (p, l) = prime_power(f.ring())?;
        if !is_bijective_mod_pl(&f, p, l) {
            return Err(PermError::Condition("f is not bijective on Z_{p^l}"));
        }
        let fp = f.lift_to(Ring::zn(p)?);
        let mut base = vec![u64::MAX; p as usize];
        for x in 0..p {
            base[fp.eval(x) as usize] = x;
        }
        Ok(HenselInverter { f, base })
    }

    pub fn poly(&self) -> &Poly {
        &self.f
    }

    pub fn base_table(&self) -> &[u64] {
        &self.base
    }

    pub fn invert(&self, y: u64) -> Result<u64, PermError> {
        hensel_invert(&self.f, y, &self.base)
    }
}

/// Bijection on `Z_{p^l}` whose inverse is computed by Hensel lifting.
pub fn hensel_bijection(f: Poly) -> Result<Bijection, PermError> {
    let ring = f.ring().clone();
    let h = HenselInverter::new(f.clone())?;
    Ok(Bijection::unchecked(ring, Domain::All, UniFn::Poly(f), Inverse::Hensel(Arc::new(h))))
}
