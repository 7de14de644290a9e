use std::collections::BTreeMap;

use super::PolyError;
use crate::algebra::Ring;

/// Sparse multivariate polynomial: exponent vector → nonzero coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    ring: Ring,
    nvars: usize,
    terms: BTreeMap<Vec<u32>, u64>,
}

impl MultiPoly {
    pub fn zero(ring: Ring, nvars: usize) -> Self {
        MultiPoly { ring, nvars, terms: BTreeMap::new() }
    }

    /// Build from `(exponents, coefficient)` pairs; like terms are merged.
    pub fn from_terms(
        ring: Ring,
        nvars: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, u64)>,
    ) -> Result<Self, PolyError> {
        let mut p = MultiPoly::zero(ring, nvars);
        for (e, c) in terms {
            p.add_term(e, c)?;
        }
        Ok(p)
    }

    /// The single variable `z_i`.
    pub fn var(ring: Ring, nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        MultiPoly::from_terms(ring, nvars, [(e, 1)]).expect("arity matches")
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: u64) -> Result<(), PolyError> {
        if exps.len() != self.nvars {
            return Err(PolyError::Arity { expected: self.nvars, got: exps.len() });
        }
        let c = c % self.ring.size();
        let entry = self.terms.entry(exps).or_insert(0);
        *entry = self.ring.add(*entry, c);
        self.terms.retain(|_, v| *v != 0);
        Ok(())
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], u64)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, point: &[u64]) -> Result<u64, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::Arity { expected: self.nvars, got: point.len() });
        }
        let r = &self.ring;
        Ok(self.terms.iter().fold(0, |acc, (e, &c)| {
            let m = e
                .iter()
                .zip(point)
                .fold(c, |m, (&k, &x)| r.mul(m, r.pow(x, k as u64)));
            r.add(acc, m)
        }))
    }
}
