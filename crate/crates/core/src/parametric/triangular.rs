use std::sync::Arc;

use num_integer::gcd;
use rand::Rng;

use crate::expr::{Program, ProgramBuilder, Tower};
use crate::permgen::{scaled_power, Bijection, Domain};

use super::{ExpParam, ParamError};

/// Triangular map on `(K*)^m`:
/// `ζ_i = h_i(ζ_{i+1..m}, x_{1..i−1}; f_i(x_i))`, `η_i = g_i(ζ_i)`.
#[derive(Clone, Debug)]
pub struct TriangularMap {
    f: Vec<Bijection>,
    g: Vec<Bijection>,
    h: Vec<ExpParam>,
}

/// Parameter list of `h_i`: the later `ζ`s, then the earlier inputs.
fn params(i: usize, zeta: &[u64], x: &[u64]) -> Vec<u64> {
    zeta[i + 1..].iter().chain(&x[..i]).copied().collect()
}

pub fn triangular_multivariate(
    f: Vec<Bijection>,
    g: Vec<Bijection>,
    h: Vec<ExpParam>,
) -> Result<TriangularMap, ParamError> {
    let m = f.len();
    if g.len() != m || h.len() != m {
        return Err(ParamError::Arity { expected: m, got: g.len().min(h.len()) });
    }
    if let Some(bad) = h.iter().find(|hi| hi.nparams() + 1 != m) {
        return Err(ParamError::Arity { expected: m - 1, got: bad.nparams() });
    }
    if f.iter().chain(&g).any(|b| b.domain() != Domain::Units) {
        return Err(ParamError::MatrixKind("triangular components act on units"));
    }
    let map = TriangularMap { f, g, h };
    if let Some(q) = map.h.first().map(|h| h.program().tower().base().size()) {
        let n = (q - 1).checked_pow((m - 1) as u32).unwrap_or(u64::MAX);
        if n <= 1 << 16 {
            for z in unit_grid(q, m - 1) {
                for hi in &map.h {
                    if !hi.is_injective_at(&z)? {
                        return Err(ParamError::NonUnitExponent { at: z });
                    }
                }
            }
        }
    }
    Ok(map)
}

pub(crate) fn unit_grid(q: u64, l: usize) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..l {
        out = out
            .into_iter()
            .flat_map(|p| (1..q).map(move |x| {
                let mut v = p.clone();
                v.push(x);
                v
            }))
            .collect();
    }
    out
}

impl TriangularMap {
    /// Random components; `uses(i, j)` decides whether `h_i` reads its parameter `j`.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        tower: Arc<Tower>,
        m: usize,
        uses: impl Fn(usize, usize) -> bool,
    ) -> Result<TriangularMap, ParamError> {
        let ring = tower.base().clone();
        let mut f = Vec::with_capacity(m);
        let mut g = Vec::with_capacity(m);
        let mut h = Vec::with_capacity(m);
        for i in 0..m {
            f.push(random_scaled_power(rng, &ring)?);
            g.push(random_scaled_power(rng, &ring)?);
            h.push(ExpParam::random(rng, tower.clone(), m - 1, |j| uses(i, j), true)?);
        }
        triangular_multivariate(f, g, h)
    }

    pub fn arity(&self) -> usize {
        self.f.len()
    }

    pub fn f(&self, i: usize) -> &Bijection {
        &self.f[i]
    }

    pub fn g(&self, i: usize) -> &Bijection {
        &self.g[i]
    }

    pub fn h(&self, i: usize) -> &ExpParam {
        &self.h[i]
    }

    /// Intermediate values `ζ` for input `x`.
    pub fn zetas(&self, x: &[u64]) -> Result<Vec<u64>, ParamError> {
        let m = self.arity();
        if x.len() != m {
            return Err(ParamError::Arity { expected: m, got: x.len() });
        }
        let mut zeta = vec![0; m];
        for i in (0..m).rev() {
            let u = self.f[i].forward(x[i])?;
            zeta[i] = self.h[i].forward(&params(i, &zeta, x), u)?;
        }
        Ok(zeta)
    }

    pub fn forward(&self, x: &[u64]) -> Result<Vec<u64>, ParamError> {
        let zeta = self.zetas(x)?;
        zeta.iter().zip(&self.g).map(|(&z, g)| Ok(g.forward(z)?)).collect()
    }

    /// `ε_i = g_i⁻¹(y_i)`, then `x_i = f_i⁻¹(h_i⁻¹(ε_{i+1..m}, x_{1..i−1}; ε_i))` in order.
    pub fn inverse(&self, y: &[u64]) -> Result<Vec<u64>, ParamError> {
        let eps = self.unwrap_outer(y)?;
        self.solve_from(&eps, &[], self.arity())
    }

    /// `ε = g⁻¹(y)` componentwise.
    pub fn unwrap_outer(&self, y: &[u64]) -> Result<Vec<u64>, ParamError> {
        if y.len() != self.arity() {
            return Err(ParamError::Arity { expected: self.arity(), got: y.len() });
        }
        y.iter()
            .zip(&self.g)
            .map(|(&v, g)| g.inverse(v).ok_or(ParamError::Roundtrip { at: y.to_vec() }))
            .collect()
    }

    /// Back-substitute coordinates `prefix.len()..upto` given `ε` and known earlier inputs.
    pub fn solve_from(&self, eps: &[u64], prefix: &[u64], upto: usize) -> Result<Vec<u64>, ParamError> {
        let mut x = prefix.to_vec();
        for i in prefix.len()..upto {
            let u = self.h[i].inverse(&params(i, eps, &x), eps[i])?;
            x.push(self.f[i].inverse(u).ok_or(ParamError::Roundtrip { at: eps.to_vec() })?);
        }
        Ok(x)
    }

    /// Emit into a builder; returns `(ζ vars, η vars)`.
    pub fn emit(&self, b: &mut ProgramBuilder, xs: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let m = self.arity();
        let mut zeta = vec![0; m];
        for i in (0..m).rev() {
            let fx = self.f[i].emit_forward(b, xs[i]);
            let u = b.bind(fx);
            let ps: Vec<usize> = zeta[i + 1..].iter().chain(&xs[..i]).copied().collect();
            let z = self.h[i].emit_forward(b, &ps, u);
            zeta[i] = b.bind(z);
        }
        let eta = (0..m)
            .map(|i| {
                let e = self.g[i].emit_forward(b, zeta[i]);
                b.bind(e)
            })
            .collect();
        (zeta, eta)
    }

    pub fn to_program(&self, tower: Arc<Tower>) -> Result<Program, ParamError> {
        let mut b = ProgramBuilder::new(tower, self.arity());
        let xs = b.inputs();
        let (_, eta) = self.emit(&mut b, &xs);
        Ok(b.finish_vars(&eta)?)
    }
}

pub(crate) fn random_scaled_power<R: Rng + ?Sized>(
    rng: &mut R,
    ring: &crate::algebra::Ring,
) -> Result<Bijection, ParamError> {
    let q = ring.size();
    let n = q - 1;
    let a = rng.gen_range(1..q);
    let r = loop {
        let r = rng.gen_range(1..n.max(2) + 1);
        if gcd(r, n) == 1 {
            break r;
        }
    };
    Ok(scaled_power(ring, a, r)?)
}

/// `Q(x) = P(F(x), x)`.
pub fn hash_extend(p: &Program, f: &Program) -> Result<Program, ParamError> {
    let m = f.arity();
    if p.arity() != m + f.output_count() {
        return Err(ParamError::Arity { expected: p.arity(), got: m + f.output_count() });
    }
    let mut b = ProgramBuilder::new(p.tower().clone(), m);
    let xs = b.inputs();
    let fz = b.inline_bound(f, &xs);
    let args: Vec<usize> = fz.into_iter().chain(xs).collect();
    let outs = b.inline(p, &args);
    Ok(b.finish(outs)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Ring;
    use crate::expr::Expr;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn round_trip(p: u64, n: u32, m: usize, seed: u64) {
        let r = Ring::gf(p, n).unwrap();
        let t = Tower::new(r.clone(), 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let map = TriangularMap::random(&mut rng, t.clone(), m, |_, _| true).unwrap();
        let prog = map.to_program(t).unwrap();
        let mut seen = HashSet::new();
        for x in unit_grid(r.size(), m) {
            let y = map.forward(&x).unwrap();
            assert_eq!(prog.eval(&x).unwrap(), y);
            assert!(seen.insert(y.clone()));
            assert_eq!(map.inverse(&y).unwrap(), x);
        }
    }

    #[test]
    fn gf8_pairs_and_gf5_triples() {
        round_trip(2, 3, 2, 1);
        round_trip(5, 1, 3, 2);
    }

    #[test]
    fn identity_components() {
        let r = Ring::gf(5, 1).unwrap();
        let t = Tower::new(r.clone(), 2).unwrap();
        let id = Bijection::identity(r.clone(), Domain::Units);
        let h = vec![ExpParam::constant(t.clone(), 1, 1, 1).unwrap(); 2];
        let map = triangular_multivariate(vec![id.clone(); 2], vec![id; 2], h).unwrap();
        for x in unit_grid(5, 2) {
            assert_eq!(map.forward(&x).unwrap(), x);
        }
    }

    #[test]
    fn hash_extension_is_injective() {
        let r = Ring::gf(2, 3).unwrap();
        let t = Tower::new(r.clone(), 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = TriangularMap::random(&mut rng, t.clone(), 2, |_, _| true).unwrap().to_program(t.clone()).unwrap();
        let f = ProgramBuilder::new(t.clone(), 1)
            .finish(vec![Expr::add2(Expr::pow_int(Expr::var(0), 2), Expr::var(0))])
            .unwrap();
        // x² + x vanishes at 1 in GF(8): keep F unit-valued by using x³ instead.
        let f_units = ProgramBuilder::new(t.clone(), 1).finish(vec![Expr::pow_int(Expr::var(0), 3)]).unwrap();
        assert!(f.eval(&[1]).unwrap()[0] == 0);
        let q = hash_extend(&p, &f_units).unwrap();
        let imgs: HashSet<Vec<u64>> = (1..8).map(|x| q.eval(&[x]).unwrap()).collect();
        assert_eq!(imgs.len(), 7);
        let c = ProgramBuilder::new(t, 1).finish(vec![Expr::scalar(5)]).unwrap();
        let qc = hash_extend(&p, &c).unwrap();
        for x in 1..8 {
            assert_eq!(qc.eval(&[x]).unwrap(), p.eval(&[5, x]).unwrap());
        }
        let same = hash_extend(&p, &ProgramBuilder::new(p.tower().clone(), 2).finish(vec![]).unwrap()).unwrap();
        assert_eq!(same.eval(&[3, 4]).unwrap(), p.eval(&[3, 4]).unwrap());
    }
}
