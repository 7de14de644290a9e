use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;

use crate::expr::{Program, ProgramBuilder, Tower};
use crate::oracle::DomainGrid;
use crate::parametric::{random_injection, ExpParam, ParametricInjection, TriangularMap};
use crate::permgen::Domain;

use super::tav::{Rejection, Tav};
use super::{check_units, with_retries, SchemeError, SchemeParams};

/// Surjection `G^{l+m} → G^m` given by a parametric injection, with a right inverse
/// through the smallest live parameter point.
#[derive(Clone, Debug)]
struct Surjection {
    inj: ParametricInjection,
    anchor: Vec<u64>,
}

impl Surjection {
    fn random<R: Rng + ?Sized>(rng: &mut R, tower: &Arc<Tower>, l: usize, m: usize) -> Result<Self, SchemeError> {
        let inj = random_injection(rng, tower, l, m, Domain::Units, |rng, c| c == 0 || rng.gen_bool(0.5))?;
        let points = DomainGrid::units(tower.base(), l).map_err(|e| SchemeError::Params(e.to_string()))?;
        let anchor = points.iter().find(|z| inj.is_live(z)).ok_or(SchemeError::NoLivePoint)?;
        Ok(Surjection { inj, anchor })
    }

    fn program(&self) -> &Program {
        self.inj.program()
    }

    fn right_inverse(&self, w: &[u64]) -> Result<Vec<u64>, SchemeError> {
        let mut out = self.anchor.clone();
        out.extend(self.inj.inverse(&self.anchor, w)?);
        Ok(out)
    }
}

/// Public verification table `V`: the plain-message components of `P`.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyTable {
    params: SchemeParams,
    program: Program,
}

impl VerifyTable {
    pub fn new(params: SchemeParams, program: Program) -> Result<Self, SchemeError> {
        params.check_signature()?;
        if program.arity() != params.nu || program.output_count() != params.mu {
            return Err(SchemeError::Length { expected: params.mu, got: program.output_count() });
        }
        Ok(VerifyTable { params, program })
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn verify(&self, eps: &[u64]) -> Result<Vec<u64>, SchemeError> {
        check_units(eps, self.params.nu, self.params.q())?;
        Ok(self.program.eval(eps)?)
    }
}

/// Authentication table `A` registered with the TAV.
#[derive(Clone, Debug, PartialEq)]
pub struct AuthTable {
    pub params: SchemeParams,
    /// `P: G^ν → G^{L+μ}`.
    pub p: Program,
    /// `F: G^{μ+κ} → G^L`.
    pub f: Program,
    /// `Q: G^κ → G^K`.
    pub q: Program,
    /// `R: G^λ → G^L`.
    pub r: Program,
    /// `H: G^{λ+μ+κ} → K^τ`.
    pub h: Program,
}

impl AuthTable {
    pub fn new(params: SchemeParams, p: Program, f: Program, q: Program, r: Program, h: Program) -> Result<Self, SchemeError> {
        params.check_signature()?;
        let SchemeParams { mu, nu, kappa, lambda, big_k, big_l, tau, .. } = params;
        let shapes = [
            (&p, nu, big_l + mu),
            (&f, mu + kappa, big_l),
            (&q, kappa, big_k),
            (&r, lambda, big_l),
            (&h, lambda + mu + kappa, tau),
        ];
        for (prog, a, o) in shapes {
            if prog.arity() != a || prog.output_count() != o {
                return Err(SchemeError::Length { expected: a, got: prog.arity() });
            }
        }
        Ok(AuthTable { params, p, f, q, r, h })
    }

    pub(crate) fn check(&self, claim: &Claim, omega_prime: &[u64]) -> Result<(), Rejection> {
        let SchemeParams { mu, nu, kappa, lambda, tau, .. } = self.params;
        let s = &claim.signature;
        let qq = self.params.q();
        let shaped = check_units(&s.eps, nu, qq).is_ok()
            && check_units(&s.z, lambda, qq).is_ok()
            && check_units(&claim.x, mu, qq).is_ok()
            && check_units(&s.omega, kappa, qq).is_ok()
            && s.delta.len() == tau;
        if !shaped {
            return Err(Rejection::Malformed);
        }
        let eval = |p: &Program, a: &[u64]| p.eval(a).ok();
        if eval(&self.q, &s.omega).as_deref() != Some(omega_prime) {
            return Err(Rejection::QMismatch);
        }
        let xw: Vec<u64> = [claim.x.as_slice(), &s.omega].concat();
        let c = eval(&self.f, &xw).ok_or(Rejection::PMismatch)?;
        let want: Vec<u64> = [c.as_slice(), &claim.x].concat();
        if eval(&self.p, &s.eps) != Some(want) {
            return Err(Rejection::PMismatch);
        }
        if eval(&self.r, &s.z) != Some(c) {
            return Err(Rejection::RMismatch);
        }
        let zxw: Vec<u64> = [s.z.as_slice(), &xw].concat();
        if eval(&self.h, &zxw).as_deref() != Some(s.delta.as_slice()) {
            return Err(Rejection::HMismatch);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    pub eps: Vec<u64>,
    pub z: Vec<u64>,
    pub delta: Vec<u64>,
    pub omega: Vec<u64>,
}

/// What a receiver submits to the TAV.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Claim {
    pub signature: Signature,
    pub x: Vec<u64>,
    pub txn: u64,
}

/// Signer key material; regenerated from `(params, seed)`.
#[derive(Clone, Debug)]
pub struct SigKeySet {
    params: SchemeParams,
    seed: u64,
    p: Surjection,
    q: Surjection,
    r: Surjection,
    f: Program,
    h: Program,
    used: BTreeSet<u64>,
}

pub fn sig_keygen(params: SchemeParams, seed: u64) -> Result<SigKeySet, SchemeError> {
    params.check_signature()?;
    let tower = params.tower()?;
    let SchemeParams { mu, nu, kappa, lambda, big_k, big_l, tau, .. } = params;
    with_retries(seed, |rng| {
        let p = Surjection::random(rng, &tower, nu - big_l - mu, big_l + mu)?;
        let q = Surjection::random(rng, &tower, kappa - big_k, big_k)?;
        let r = Surjection::random(rng, &tower, lambda - big_l, big_l)?;
        let mut b = ProgramBuilder::new(tower.clone(), mu + kappa);
        let outs = (0..big_l)
            .map(|j| {
                let input = mu + j % kappa;
                let ps: Vec<usize> = (0..mu + kappa).filter(|&v| v != input).collect();
                let fj = ExpParam::random(rng, tower.clone(), mu + kappa - 1, |_| true, true)?;
                Ok(fj.emit_forward(&mut b, &ps, input))
            })
            .collect::<Result<Vec<_>, SchemeError>>()?;
        let f = b.finish(outs)?;
        let hmap = TriangularMap::random(rng, tower.clone(), lambda + mu + kappa, |_, _| true)?;
        let h = hmap.to_program(tower.clone())?.select(&(0..tau).collect::<Vec<_>>());
        Ok(SigKeySet { params, seed, p, q, r, f, h, used: BTreeSet::new() })
    })
}

impl SigKeySet {
    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Hidden map `F(x, ω)`.
    pub fn hidden(&self) -> &Program {
        &self.f
    }

    pub fn verify_table(&self) -> VerifyTable {
        let SchemeParams { mu, big_l, .. } = self.params;
        let v = self.p.program().select(&(big_l..big_l + mu).collect::<Vec<_>>());
        VerifyTable { params: self.params, program: v }
    }

    pub fn auth_table(&self) -> AuthTable {
        AuthTable {
            params: self.params,
            p: self.p.program().clone(),
            f: self.f.clone(),
            q: self.q.program().clone(),
            r: self.r.program().clone(),
            h: self.h.clone(),
        }
    }

    /// Parametric injection behind `P`, `Q` or `R`.
    pub fn injection(&self, which: char) -> Option<&ParametricInjection> {
        match which {
            'P' => Some(&self.p.inj),
            'Q' => Some(&self.q.inj),
            'R' => Some(&self.r.inj),
            _ => None,
        }
    }

    /// Right inverse of `P`, `Q` or `R`.
    pub fn right_inverse(&self, which: char, w: &[u64]) -> Result<Vec<u64>, SchemeError> {
        match which {
            'P' => self.p.right_inverse(w),
            'Q' => self.q.right_inverse(w),
            'R' => self.r.right_inverse(w),
            _ => Err(SchemeError::Params(format!("no map named {which}"))),
        }
    }

    /// `ω = Q⁺(ω′)`, `z = R⁺(F(x, ω))`, `ε = P⁺(F(x, ω), x)`, `δ = H(z, x, ω)`.
    pub fn sign(&mut self, tav: &Tav, x: &[u64], txn: u64) -> Result<Signature, SchemeError> {
        let t = tav.transaction(txn).ok_or(SchemeError::UnknownTransaction(txn))?;
        if !tav.is_valid(txn) {
            return Err(SchemeError::Expired(txn));
        }
        if self.used.contains(&txn) {
            return Err(SchemeError::TransactionUsed(txn));
        }
        check_units(x, self.params.mu, self.params.q())?;
        let omega = self.q.right_inverse(&t.omega_prime)?;
        let xw: Vec<u64> = [x, omega.as_slice()].concat();
        let c = self.f.eval(&xw)?;
        let z = self.r.right_inverse(&c)?;
        let eps = self.p.right_inverse(&[c.as_slice(), x].concat())?;
        let delta = self.h.eval(&[z.as_slice(), &xw].concat())?;
        self.used.insert(txn);
        Ok(Signature { eps, z, delta, omega })
    }
}
