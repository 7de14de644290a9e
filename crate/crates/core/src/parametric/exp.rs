use std::sync::Arc;

use rand::Rng;

use crate::algebra::{factorize, inv_mod, pow_mod, totient, Ring};
use crate::expr::{Expr, Program, ProgramBuilder, Tower};

use super::ParamError;

/// Parametric power map `x ↦ c(z)·x^{e(z)}` on the unit group of a field.
///
/// The program has arity `l` and two outputs: the multiplier at level 0 and the exponent
/// at level 1. The map is injective in `x` exactly when `e(z)` is a unit mod `q − 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpParam {
    prog: Program,
}

impl ExpParam {
    pub fn new(prog: Program) -> Result<Self, ParamError> {
        let ring = prog.tower().base();
        if !ring.is_field() || ring.size() < 3 || prog.tower().depth() < 2 {
            return Err(ParamError::NotField);
        }
        match prog.outputs() {
            [c, e] if c.level() == 0 && e.level() == 1 => Ok(ExpParam { prog }),
            _ => Err(ParamError::Arity { expected: 2, got: prog.output_count() }),
        }
    }

    /// `x ↦ c·x^e` with constant coefficients.
    pub fn constant(tower: Arc<Tower>, nparams: usize, c: u64, e: u64) -> Result<Self, ParamError> {
        let ce = Expr::constant(1, tower.int(1, e as i64));
        let prog = ProgramBuilder::new(tower, nparams).finish(vec![Expr::scalar(c), ce])?;
        ExpParam::new(prog)
    }

    pub fn program(&self) -> &Program {
        &self.prog
    }

    pub fn nparams(&self) -> usize {
        self.prog.arity()
    }

    fn order(&self) -> u64 {
        self.prog.tower().base().size() - 1
    }

    fn ring(&self) -> &Ring {
        self.prog.tower().base()
    }

    /// `(c(z), e(z))`.
    pub fn coefficients(&self, z: &[u64]) -> Result<(u64, u64), ParamError> {
        let v = self.prog.eval_vals(z)?;
        Ok((v[0][0], v[1][0]))
    }

    pub fn forward(&self, z: &[u64], x: u64) -> Result<u64, ParamError> {
        let (c, e) = self.coefficients(z)?;
        if x == 0 {
            return Err(ParamError::Vanishes { at: vec![x] });
        }
        Ok(self.ring().mul(c, self.ring().pow(x, e)))
    }

    pub fn inverse(&self, z: &[u64], y: u64) -> Result<u64, ParamError> {
        let (c, e) = self.coefficients(z)?;
        let n = self.order();
        let ei = inv_mod(e, n).ok_or_else(|| ParamError::NonUnitExponent { at: z.to_vec() })?;
        let r = self.ring();
        let ci = r.inv(c).ok_or_else(|| ParamError::Vanishes { at: z.to_vec() })?;
        if y == 0 {
            return Err(ParamError::Vanishes { at: vec![y] });
        }
        Ok(r.pow(r.mul(ci, y), ei))
    }

    pub fn is_injective_at(&self, z: &[u64]) -> Result<bool, ParamError> {
        let (c, e) = self.coefficients(z)?;
        Ok(c != 0 && num_integer::gcd(e, self.order()) == 1)
    }

    pub fn emit_forward(&self, b: &mut ProgramBuilder, params: &[usize], x: usize) -> Expr {
        let mut o = b.inline(&self.prog, params);
        let e = o.pop().unwrap();
        let c = o.pop().unwrap();
        Expr::mul2(c, Expr::pow_expr(Expr::var(x), e))
    }

    /// `(c^{q−2}·y)^{e^{φ(q−1)−1}}`; valid wherever `e(z)` is a unit.
    pub fn emit_inverse(&self, b: &mut ProgramBuilder, params: &[usize], y: usize) -> Expr {
        let n = self.order();
        let mut o = b.inline(&self.prog, params);
        let e = o.pop().unwrap();
        let c = o.pop().unwrap();
        let ci = Expr::pow_int(c, n - 1);
        let phi = totient(n);
        let ei = if phi == 1 { e } else { Expr::pow_int(e, phi - 1) };
        Expr::pow_expr(Expr::mul2(ci, Expr::var(y)), ei)
    }
}

/// Unit-valued level-1 expression `Σ_i E_i·a_i·w_i(s_i)` over CRT idempotents `E_i` of
/// `N = q − 1`, where `s_i` is a random affine form in `logs` and `w_i` never vanishes
/// modulo `p_i` (`s² − d` with `d` a non-residue, or `s² + s + 1` for `p_i = 2`).
pub fn unit_exponent_expr<R: Rng + ?Sized>(rng: &mut R, tower: &Tower, logs: &[Expr]) -> Expr {
    let level1 = &tower.atoms(1)[0];
    let spec = level1.modulus().expect("exponent ring is Z_N");
    let n = spec.n();
    let c1 = |k: u64| Expr::constant(1, tower.int(1, (k % n) as i64));
    let terms = spec
        .factors()
        .iter()
        .zip(spec.idempotents())
        .map(|(f, &idem)| {
            let p = f.p;
            let mut s_terms = Vec::new();
            let must = rng.gen_range(0..logs.len().max(1));
            for (i, t) in logs.iter().enumerate() {
                if i == must || rng.gen_bool(0.7) {
                    s_terms.push(Expr::mul2(c1(rng.gen_range(1..n.max(2))), t.clone()));
                }
            }
            s_terms.push(c1(rng.gen_range(0..n)));
            let s = Expr::sum(1, s_terms, tower);
            let w = if p == 2 {
                Expr::sum(1, vec![Expr::pow_int(s.clone(), 2), s, c1(1)], tower)
            } else {
                let d = (2..p).find(|&d| pow_mod(d, (p - 1) / 2, p) == p - 1).expect("odd prime");
                Expr::add2(Expr::pow_int(s, 2), c1(n - d % n))
            };
            let a = loop {
                let a = rng.gen_range(1..n.max(2));
                if a % p != 0 {
                    break a;
                }
            };
            Expr::product(1, vec![c1(idem), c1(a), w], tower)
        })
        .collect();
    Expr::sum(1, terms, tower)
}

/// Nonvanishing level-0 expression `a·(g(z)^r − c)·Π z_i^{k_i}` where `r` is a prime
/// divisor of `q − 1` and `c` is not an `r`-th power; `params` must range over units.
pub fn nonvanishing_expr<R: Rng + ?Sized>(rng: &mut R, tower: &Tower, params: &[Expr]) -> Expr {
    let ring = tower.base();
    let q = ring.size();
    let n = q - 1;
    let primes: Vec<u64> = factorize(n).into_iter().map(|(p, _)| p).collect();
    let r = primes[rng.gen_range(0..primes.len())];
    let non_powers: Vec<u64> = (1..q).filter(|&c| ring.pow(c, n / r) != 1).collect();
    let c = non_powers[rng.gen_range(0..non_powers.len())];
    let a = rng.gen_range(1..q);
    let mut g_terms = Vec::new();
    for p in params {
        if rng.gen_bool(0.7) {
            g_terms.push(Expr::mul2(Expr::scalar(rng.gen_range(1..q)), p.clone()));
        }
    }
    g_terms.push(Expr::scalar(rng.gen_range(0..q)));
    let g = Expr::sum(0, g_terms, tower);
    let mut factors = vec![Expr::scalar(a), Expr::add2(Expr::pow_int(g, r), Expr::scalar(ring.neg(c)))];
    let must = rng.gen_range(0..params.len().max(1));
    for (i, p) in params.iter().enumerate() {
        let k = rng.gen_range(u64::from(i == must)..3);
        if k > 0 {
            factors.push(Expr::pow_int(p.clone(), k));
        }
    }
    Expr::product(0, factors, tower)
}

impl ExpParam {
    /// Random map over `nparams` unit-valued parameters; only parameters with
    /// `uses(i)` appear. `live = false` yields a non-unit exponent.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        tower: Arc<Tower>,
        nparams: usize,
        uses: impl Fn(usize) -> bool,
        live: bool,
    ) -> Result<Self, ParamError> {
        let used: Vec<usize> = (0..nparams).filter(|&i| uses(i)).collect();
        let base: Vec<Expr> = used.iter().map(|&i| Expr::var(i)).collect();
        let logs: Vec<Expr> = used.iter().map(|&i| Expr::var_at(i, 1)).collect();
        let c = nonvanishing_expr(rng, &tower, &base);
        let mut e = unit_exponent_expr(rng, &tower, &logs);
        if !live {
            let n = tower.base().size() - 1;
            let (r, _) = factorize(n)[0];
            e = Expr::mul2(Expr::constant(1, tower.int(1, r as i64)), e);
        }
        ExpParam::new(ProgramBuilder::new(tower, nparams).finish(vec![c, e])?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Tower;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid(q: u64, l: usize) -> Vec<Vec<u64>> {
        let mut out = vec![vec![]];
        for _ in 0..l {
            out = out
                .into_iter()
                .flat_map(|p| (1..q).map(move |x| [p.clone(), vec![x]].concat()))
                .collect();
        }
        out
    }

    #[test]
    fn univariate_log_example() {
        // η(z; x) = f(z)·x^{g(log z)} over GF(8)*.
        let r = Ring::gf(2, 3).unwrap();
        let t = Tower::new(r.clone(), 2).unwrap();
        let c = Expr::add2(Expr::pow_int(Expr::var(0), 2), Expr::add2(Expr::var(0), Expr::scalar(1)));
        let e = Expr::add2(Expr::var_at(0, 1), Expr::constant(1, t.int(1, 1)));
        let prog = ProgramBuilder::new(t.clone(), 1).finish(vec![c, e]).unwrap();
        let h = ExpParam::new(prog).unwrap();
        for z in 1..8 {
            let inj = h.is_injective_at(&[z]).unwrap();
            let lz = r.field().unwrap().discrete_log(z).unwrap();
            assert_eq!(inj, !(lz + 1).is_multiple_of(7));
            if !inj {
                continue;
            }
            for x in 1..8 {
                let y = h.forward(&[z], x).unwrap();
                assert_eq!(h.inverse(&[z], y).unwrap(), x);
            }
        }
    }

    #[test]
    fn random_params_are_units_and_nonvanishing() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (p, n) in [(2u64, 3u32), (2, 4), (3, 2), (5, 1), (7, 1), (2, 2), (3, 1)] {
            let r = Ring::gf(p, n).unwrap();
            let q = r.size();
            let t = Tower::new(r.clone(), 2).unwrap();
            for _ in 0..5 {
                let h = ExpParam::random(&mut rng, t.clone(), 2, |_| true, true).unwrap();
                let d = ExpParam::random(&mut rng, t.clone(), 2, |_| true, false).unwrap();
                for z in grid(q, 2) {
                    assert!(h.is_injective_at(&z).unwrap(), "GF({p}^{n}) {z:?}");
                    assert!(!d.is_injective_at(&z).unwrap() || q == 3);
                    assert_ne!(h.coefficients(&z).unwrap().0, 0);
                }
            }
        }
    }

    #[test]
    fn emitted_inverse_matches_native() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let r = Ring::gf(2, 4).unwrap();
        let t = Tower::new(r.clone(), 2).unwrap();
        let h = ExpParam::random(&mut rng, t.clone(), 1, |_| true, true).unwrap();
        let mut b = ProgramBuilder::new(t.clone(), 2);
        let fwd = h.emit_forward(&mut b, &[0], 1);
        let inv = h.emit_inverse(&mut b, &[0], 1);
        let prog = b.finish(vec![fwd, inv]).unwrap();
        for z in 1..16 {
            for x in 1..16 {
                let out = prog.eval(&[z, x]).unwrap();
                assert_eq!(out[0], h.forward(&[z], x).unwrap());
                assert_eq!(out[1], h.inverse(&[z], x).unwrap());
            }
        }
    }
}
