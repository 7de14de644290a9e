use num_integer::gcd;

use super::{inverse_table, Bijection, Domain, Inverse, PermError, UniFn};
use crate::algebra::{inv_mod, Ring};
use crate::poly::Poly;

fn field_parts(ring: &Ring) -> Result<(u64, u32, u64), PermError> {
    let f = ring.field().ok_or(PermError::NotField)?;
    Ok((f.characteristic(), f.degree(), f.order()))
}

/// `f(z) = Σ a_i z^{p^{i−1}}`, accepted when its kernel is trivial.
pub fn linearized_permutation(ring: &Ring, coeffs: &[u64]) -> Result<Bijection, PermError> {
    let (p, _, _) = field_parts(ring)?;
    let mut dense = Vec::new();
    let mut k = 1usize;
    for &a in coeffs {
        if dense.len() <= k {
            dense.resize(k + 1, 0);
        }
        dense[k] = a;
        k *= p as usize;
    }
    let f = Poly::new(ring.clone(), dense);
    if let Some(w) = ring.elements().skip(1).find(|&z| f.eval(z) == 0) {
        return Err(PermError::Singular { witness: w });
    }
    Bijection::with_table(ring.clone(), Domain::All, UniFn::Poly(f))
}

/// `f(z) = z^r` with `gcd(r, q − 1) = 1`.
pub fn power_permutation(ring: &Ring, r: u64) -> Result<Bijection, PermError> {
    let (_, _, q) = field_parts(ring)?;
    if r == 0 || gcd(r, q - 1) != 1 {
        return Err(PermError::NotCoprime { r, order: q - 1 });
    }
    let e = inv_mod(r % (q - 1), q - 1).unwrap_or(1);
    let e = if q == 2 { 1 } else { e };
    let f = Poly::monomial(ring.clone(), 1, r as usize);
    Bijection::new(ring.clone(), Domain::All, UniFn::Poly(f), Inverse::Power { e })
}

/// `f(z) = z^{p^r} − a·z` with `r | n`, accepted when `a` is not a `(p^r − 1)`-th power.
pub fn binomial_permutation(ring: &Ring, r: u32, a: u64) -> Result<Bijection, PermError> {
    let (p, n, q) = field_parts(ring)?;
    if r == 0 || n % r != 0 {
        return Err(PermError::BadDivisor { r, n });
    }
    let pr = p.pow(r);
    let norm_exp: u64 = (0..n / r).map(|i| pr.pow(i)).sum();
    let mut c = vec![0; pr as usize + 1];
    c[pr as usize] = 1;
    c[1] = ring.neg(a);
    let f = Poly::new(ring.clone(), c);
    if a != 0 && ring.pow(a, norm_exp) == 1 {
        let w = ring.elements().skip(1).find(|&z| f.eval(z) == 0).expect("norm 1 gives kernel");
        return Err(PermError::NormCondition { witness: w });
    }
    let table = inverse_table(ring, Domain::All, |z| Ok(f.eval(z)))?;
    debug_assert_eq!(table.len() as u64, q);
    Ok(Bijection::unchecked(ring.clone(), Domain::All, UniFn::Poly(f), Inverse::Table(table.into())))
}

/// `x ↦ a·x^r` on the unit group of a field.
pub fn scaled_power(ring: &Ring, a: u64, r: u64) -> Result<Bijection, PermError> {
    let (_, _, q) = field_parts(ring)?;
    let n = q - 1;
    if a == 0 || a >= q {
        return Err(PermError::Condition("scale must be a nonzero field element"));
    }
    let e = if n == 1 { 1 } else { inv_mod(r % n, n).ok_or(PermError::NotCoprime { r, order: n })? };
    let f = Poly::monomial(ring.clone(), a, r as usize);
    let a_inv = ring.inv(a).expect("nonzero");
    Ok(Bijection::unchecked(ring.clone(), Domain::Units, UniFn::Poly(f), Inverse::ScaledPower { a_inv, e }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u64, n: u32) -> Ring {
        Ring::gf(p, n).unwrap()
    }

    #[test]
    fn frobenius_and_trace() {
        let r = gf(2, 3);
        let f = linearized_permutation(&r, &[0, 1, 0]).unwrap();
        assert_eq!(f.forward(2).unwrap(), 4);
        f.certify().unwrap();
        assert!(matches!(
            linearized_permutation(&r, &[1, 1, 1]),
            Err(PermError::Singular { .. })
        ));
        let kernel = r.elements().filter(|&z| r.add(r.add(z, r.pow(z, 2)), r.pow(z, 4)) == 0);
        assert_eq!(kernel.count(), 4);
        let id = linearized_permutation(&gf(2, 2), &[1]).unwrap();
        assert!((0..4).all(|z| id.forward(z).unwrap() == z));
    }

    #[test]
    fn power_maps() {
        let r = gf(2, 3);
        let f = power_permutation(&r, 3).unwrap();
        assert_eq!(f.forward(2).unwrap(), 3);
        f.certify().unwrap();
        assert!(power_permutation(&r, 1).unwrap().forward(5).unwrap() == 5);
        assert!(matches!(power_permutation(&gf(7, 1), 3), Err(PermError::NotCoprime { .. })));
    }

    #[test]
    fn binomial_condition_matches_kernel_scan() {
        for (p, n) in [(2u64, 2u32), (3, 2), (2, 4), (5, 2)] {
            let r = gf(p, n);
            for a in r.elements() {
                let has_kernel = r
                    .elements()
                    .skip(1)
                    .any(|z| r.sub(r.pow(z, p), r.mul(a, z)) == 0);
                let got = binomial_permutation(&r, 1, a);
                assert_eq!(got.is_ok(), !has_kernel, "GF({p}^{n}) a={a}");
                if let Ok(b) = got {
                    b.certify().unwrap();
                }
            }
        }
        let r = gf(3, 2);
        for a in 1..9 {
            assert_eq!(binomial_permutation(&r, 1, a).is_ok(), r.pow(a, 4) != 1);
        }
    }

    #[test]
    fn scaled_power_round_trip() {
        let r = gf(2, 3);
        let b = scaled_power(&r, 5, 3).unwrap();
        b.certify().unwrap();
        assert!(scaled_power(&r, 0, 3).is_err());
        assert!(scaled_power(&gf(5, 1), 2, 2).is_err());
    }
}
