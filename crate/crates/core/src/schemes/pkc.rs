use std::sync::Arc;

use num_integer::gcd;
use rand::Rng;

use crate::expr::{Expr, Program, ProgramBuilder, Tower};
use crate::parametric::{nonvanishing_expr, unit_exponent_expr, TriangularMap};

use super::{check_units, with_retries, SchemeError, SchemeParams};

/// Lookup table: the program `(x, ω) ↦ P(F(x, ω), x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PkcPublicKey {
    params: SchemeParams,
    lookup: Program,
}

impl PkcPublicKey {
    pub fn new(params: SchemeParams, lookup: Program) -> Result<Self, SchemeError> {
        params.check_pkc()?;
        if lookup.arity() != params.mu + params.kappa || lookup.output_count() != params.nu {
            return Err(SchemeError::Length { expected: params.nu, got: lookup.output_count() });
        }
        Ok(PkcPublicKey { params, lookup })
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn lookup(&self) -> &Program {
        &self.lookup
    }

    pub fn encrypt(&self, x: &[u64], omega: &[u64]) -> Result<Vec<u64>, SchemeError> {
        let q = self.params.q();
        check_units(x, self.params.mu, q)?;
        check_units(omega, self.params.kappa, q)?;
        Ok(self.lookup.eval(&[x, omega].concat())?)
    }
}

/// Back-substitution data: the triangular core `P`, the hidden keys `F` and the
/// pad-dependent targets `Ψ` that `F` is solved from.
#[derive(Clone, Debug)]
pub struct PkcPrivateKey {
    params: SchemeParams,
    seed: u64,
    map: TriangularMap,
    psi: Program,
    hidden: Program,
}

impl PkcPrivateKey {
    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn map(&self) -> &TriangularMap {
        &self.map
    }

    /// `F(x, ω)`: arity `μ + κ`, `λ` outputs.
    pub fn hidden(&self) -> &Program {
        &self.hidden
    }

    pub fn psi(&self) -> &Program {
        &self.psi
    }

    /// `(z, x) = P⁻¹(ε)`, then `x` if `F(x, ω) = z`.
    pub fn decrypt(&self, eps: &[u64], omega: &[u64]) -> Result<Vec<u64>, SchemeError> {
        let SchemeParams { mu, nu, kappa, .. } = self.params;
        let q = self.params.q();
        check_units(omega, kappa, q)?;
        if eps.len() != nu {
            return Err(SchemeError::Length { expected: nu, got: eps.len() });
        }
        if eps.iter().any(|&e| e == 0 || e >= q) {
            return Err(SchemeError::InversionFailure);
        }
        let zeta = self.map.unwrap_outer(eps).map_err(|_| SchemeError::InversionFailure)?;
        let y = self.map.solve_from(&zeta, &[], nu).map_err(|_| SchemeError::InversionFailure)?;
        let (x, z) = y.split_at(mu);
        if self.hidden.eval(&[x, omega].concat())? != z {
            return Err(SchemeError::IntegrityFailure);
        }
        Ok(x.to_vec())
    }
}

#[derive(Clone, Debug)]
pub struct PkcKeyPair {
    pub public: PkcPublicKey,
    pub private: PkcPrivateKey,
}

/// Deterministic key generation.
///
/// Internally `P` is a triangular map on `y = (x, z)` whose first `μ` components only read
/// `x` and each other. Its `z`-part intermediate values are pinned to
/// `Ψ_j = w_j(ω)·(Π_k ζ_k^{v_jk})^{a_j(log ω)}` with unit exponents, and `F` is whatever `z`
/// achieves that; a change to any single ciphertext component then breaks `F(x, ω) = z`.
pub fn pkc_keygen(params: SchemeParams, seed: u64) -> Result<PkcKeyPair, SchemeError> {
    params.check_pkc()?;
    let tower = params.tower()?;
    let SchemeParams { mu, nu, kappa, lambda, .. } = params;
    with_retries(seed, |rng| {
        let map = TriangularMap::random(rng, tower.clone(), nu, |i, j| {
            i >= mu || j + i + 1 >= nu || i + 1 + j < mu
        })?;
        let psi = random_psi(rng, &tower, mu, kappa, lambda)?;
        let hidden = emit_hidden(&map, &psi, &tower, mu, kappa)?;
        let mut b = ProgramBuilder::new(tower.clone(), mu + kappa);
        let inputs = b.inputs();
        let zs = b.inline_bound(&hidden, &inputs);
        let ys: Vec<usize> = inputs[..mu].iter().copied().chain(zs).collect();
        let (_, eta) = map.emit(&mut b, &ys);
        let lookup = b.finish_vars(&eta)?;
        Ok(PkcKeyPair {
            public: PkcPublicKey { params, lookup },
            private: PkcPrivateKey { params, seed, map, psi, hidden },
        })
    })
}

/// `Ψ` over `(ζ_1..ζ_μ, ω)`.
fn random_psi<R: Rng + ?Sized>(
    rng: &mut R,
    tower: &Arc<Tower>,
    mu: usize,
    kappa: usize,
    lambda: usize,
) -> Result<Program, SchemeError> {
    let n = tower.base().size() - 1;
    let omega: Vec<Expr> = (mu..mu + kappa).map(Expr::var).collect();
    let logs: Vec<Expr> = (mu..mu + kappa).map(|i| Expr::var_at(i, 1)).collect();
    let outs = (0..lambda)
        .map(|_| {
            let w = nonvanishing_expr(rng, tower, &omega);
            let a = unit_exponent_expr(rng, tower, &logs);
            let mono = (0..mu)
                .map(|k| {
                    let v = loop {
                        let v = rng.gen_range(1..n.max(2));
                        if gcd(v, n) == 1 {
                            break v;
                        }
                    };
                    Expr::pow_int(Expr::var(k), v)
                })
                .collect();
            Expr::mul2(w, Expr::pow_expr(Expr::product(0, mono, tower), a))
        })
        .collect();
    Ok(ProgramBuilder::new(tower.clone(), mu + kappa).finish(outs)?)
}

/// `z_j = f_{μ+j}⁻¹(h_{μ+j}⁻¹(Ψ_{>j}, x, z_{<j}; Ψ_j))` in increasing `j`.
fn emit_hidden(
    map: &TriangularMap,
    psi: &Program,
    tower: &Arc<Tower>,
    mu: usize,
    kappa: usize,
) -> Result<Program, SchemeError> {
    let nu = map.arity();
    let mut b = ProgramBuilder::new(tower.clone(), mu + kappa);
    let xs: Vec<usize> = (0..mu).collect();
    let mut zeta = vec![0; nu];
    for i in (0..mu).rev() {
        let fx = map.f(i).emit_forward(&mut b, xs[i]);
        let u = b.bind(fx);
        let ps: Vec<usize> = zeta[i + 1..].iter().chain(&xs[..i]).copied().collect();
        let z = map.h(i).emit_forward(&mut b, &ps, u);
        zeta[i] = b.bind(z);
    }
    let args: Vec<usize> = zeta[..mu].iter().copied().chain(mu..mu + kappa).collect();
    let targets = b.inline_bound(psi, &args);
    zeta[mu..].copy_from_slice(&targets);
    let mut ys = xs;
    for i in mu..nu {
        let ps: Vec<usize> = zeta[i + 1..].iter().chain(&ys[..i]).copied().collect();
        let hu = map.h(i).emit_inverse(&mut b, &ps, zeta[i]);
        let u = b.bind(hu);
        let fu = map.f(i).emit_inverse(&mut b, u).expect("scaled powers invert in closed form");
        ys.push(b.bind(fu));
    }
    Ok(b.finish_vars(&ys[mu..])?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::DomainGrid;

    #[test]
    fn small_round_trip_and_integrity() {
        let params = SchemeParams::pkc(2, 3, 2, 3, 1).unwrap();
        let keys = pkc_keygen(params, 1).unwrap();
        let ring = params.ring().unwrap();
        let grid = DomainGrid::units(&ring, 3).unwrap();
        for p in grid.iter() {
            let (x, w) = p.split_at(2);
            let eps = keys.public.encrypt(x, w).unwrap();
            assert_eq!(keys.private.decrypt(&eps, w).unwrap(), x);
            let z = keys.private.hidden().eval(&p).unwrap();
            let mut y = x.to_vec();
            y.extend(z);
            assert_eq!(keys.private.map().forward(&y).unwrap(), eps);
        }
    }

    #[test]
    fn degenerate_scheme_is_a_bijection() {
        let params = SchemeParams::pkc(5, 1, 2, 2, 0).unwrap();
        let keys = pkc_keygen(params, 3).unwrap();
        assert_eq!(keys.private.hidden().output_count(), 0);
        let ring = params.ring().unwrap();
        let mut seen = std::collections::HashSet::new();
        for x in DomainGrid::units(&ring, 2).unwrap().iter() {
            let eps = keys.public.encrypt(&x, &[]).unwrap();
            assert_eq!(eps, keys.private.map().forward(&x).unwrap());
            assert!(seen.insert(eps.clone()));
            assert_eq!(keys.private.decrypt(&eps, &[]).unwrap(), x);
        }
    }

    #[test]
    fn rejects_out_of_domain() {
        let params = SchemeParams::pkc(2, 3, 2, 3, 1).unwrap();
        let keys = pkc_keygen(params, 1).unwrap();
        assert!(matches!(keys.public.encrypt(&[0, 1], &[1]), Err(SchemeError::OutsideDomain { index: 0, .. })));
        assert_eq!(keys.private.decrypt(&[1, 0, 2], &[1]), Err(SchemeError::InversionFailure));
    }
}
