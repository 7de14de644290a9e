use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::algebra::{is_prime, Ring};
use crate::expr::Tower;

use super::SchemeError;

/// Arity parameters and the base field; the message domain is always the unit group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SchemeParams {
    pub p: u64,
    pub n: u32,
    pub mu: usize,
    pub nu: usize,
    pub kappa: usize,
    pub lambda: usize,
    pub big_k: usize,
    pub big_l: usize,
    pub tau: usize,
}

impl SchemeParams {
    /// PKC parameters; `λ = ν − μ`.
    pub fn pkc(p: u64, n: u32, mu: usize, nu: usize, kappa: usize) -> Result<Self, SchemeError> {
        let s = SchemeParams {
            p,
            n,
            mu,
            nu,
            kappa,
            lambda: nu.saturating_sub(mu),
            big_k: 0,
            big_l: 0,
            tau: 0,
        };
        s.check_pkc()?;
        Ok(s)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn signature(
        p: u64,
        n: u32,
        mu: usize,
        nu: usize,
        kappa: usize,
        lambda: usize,
        big_k: usize,
        big_l: usize,
        tau: usize,
    ) -> Result<Self, SchemeError> {
        let s = SchemeParams { p, n, mu, nu, kappa, lambda, big_k, big_l, tau };
        s.check_signature()?;
        Ok(s)
    }

    /// Field size `q = p^n`.
    pub fn q(&self) -> u64 {
        self.p.pow(self.n)
    }

    fn check_field(&self) -> Result<(), SchemeError> {
        if !is_prime(self.p) || self.n == 0 || self.q() < 3 || self.q() > 1 << 16 {
            return Err(SchemeError::Params(format!("unsupported field {}^{}", self.p, self.n)));
        }
        Ok(())
    }

    pub fn check_pkc(&self) -> Result<(), SchemeError> {
        self.check_field()?;
        if self.mu == 0 || self.nu < self.mu || self.lambda != self.nu - self.mu {
            return Err(SchemeError::Params("PKC needs 1 ≤ μ ≤ ν and λ = ν − μ".into()));
        }
        Ok(())
    }

    pub fn check_signature(&self) -> Result<(), SchemeError> {
        self.check_field()?;
        let ok = self.mu >= 1
            && self.big_l >= 1
            && self.big_k >= 1
            && self.big_k <= self.kappa
            && self.big_l <= self.lambda
            && self.nu >= self.big_l + self.mu
            && self.tau >= 1
            && self.tau <= self.lambda + self.mu + self.kappa;
        if !ok {
            return Err(SchemeError::Params(
                "signature needs 1 ≤ K ≤ κ, 1 ≤ L ≤ λ, ν ≥ L + μ, 1 ≤ τ ≤ λ + μ + κ".into(),
            ));
        }
        Ok(())
    }

    pub fn ring(&self) -> Result<Ring, SchemeError> {
        Ok(Ring::gf(self.p, self.n)?)
    }

    /// Depth-2 tower over the field: values and their discrete logs.
    pub fn tower(&self) -> Result<Arc<Tower>, SchemeError> {
        Ok(Tower::new(self.ring()?, 2)?)
    }
}

impl fmt::Display for SchemeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "field={}^{},mu={},nu={},kappa={},lambda={},K={},L={},tau={}",
            self.p, self.n, self.mu, self.nu, self.kappa, self.lambda, self.big_k, self.big_l, self.tau
        )
    }
}

/// `field=p^n` (or a prime power such as `field=8`), then `key=value` pairs. Missing
/// `lambda` defaults to `ν − μ`; other missing counts default to zero.
impl FromStr for SchemeParams {
    type Err = SchemeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |m: &str| SchemeError::Params(format!("{m}: {s:?}"));
        let mut out = SchemeParams { p: 0, n: 0, mu: 0, nu: 0, kappa: 0, lambda: 0, big_k: 0, big_l: 0, tau: 0 };
        let mut lambda = None;
        for kv in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            if k == "field" {
                let (p, n) = parse_field(v).ok_or_else(|| bad("bad field"))?;
                out.p = p;
                out.n = n;
                continue;
            }
            let v: usize = v.parse().map_err(|_| bad("bad count"))?;
            match k {
                "mu" => out.mu = v,
                "nu" => out.nu = v,
                "kappa" => out.kappa = v,
                "lambda" => lambda = Some(v),
                "K" => out.big_k = v,
                "L" => out.big_l = v,
                "tau" => out.tau = v,
                _ => return Err(bad("unknown key")),
            }
        }
        if out.p == 0 {
            return Err(bad("missing field"));
        }
        out.lambda = lambda.unwrap_or(out.nu.saturating_sub(out.mu));
        Ok(out)
    }
}

fn parse_field(v: &str) -> Option<(u64, u32)> {
    if let Some((p, n)) = v.split_once('^') {
        return Some((p.parse().ok()?, n.parse().ok()?));
    }
    let q: u64 = v.parse().ok()?;
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut n = 0;
    let mut r = q;
    while r.is_multiple_of(p) {
        r /= p;
        n += 1;
    }
    (r == 1).then_some((p, n))
}
