use num_integer::gcd;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::algebra::{factorize, inv_mod, Ring};
use crate::expr::{Expr, Program, ProgramBuilder, Tower};
use crate::permgen::{power_permutation, Bijection, Domain};

use super::triangular::random_scaled_power;
use super::{partition_on_points, ParamError, PartitionOfUnity};

/// Class-wise shift of the first coordinate followed by coordinatewise `η`.
///
/// Class `i` is moved onto class `σ(i)` by `x_1 ↦ x_1 ∘ t_i`, where `∘` is `+` for the
/// affine variant and `·` for the monomial one.
#[derive(Clone, Debug)]
struct ClassShift {
    ring: Ring,
    multiplicative: bool,
    partition: PartitionOfUnity,
    sigma: Vec<usize>,
    shifts: Vec<u64>,
    eta: Vec<Bijection>,
    program: Program,
}

impl ClassShift {
    fn build(
        ring: Ring,
        multiplicative: bool,
        partition: PartitionOfUnity,
        sigma: Vec<usize>,
        shifts: Vec<u64>,
        eta: Vec<Bijection>,
    ) -> Result<Self, ParamError> {
        let m = partition.arity();
        if eta.len() != m {
            return Err(ParamError::Arity { expected: m, got: eta.len() });
        }
        let tower = partition.discriminator().tower().clone();
        let mut b = ProgramBuilder::new(tower.clone(), m);
        let xs = b.inputs();
        let ls = b.inline(partition.indicators(), &xs);
        let t = Expr::sum(
            0,
            ls.into_iter().zip(&shifts).map(|(l, &s)| Expr::mul2(Expr::scalar(s), l)).collect(),
            &tower,
        );
        let first = if multiplicative { Expr::mul2(Expr::var(0), t) } else { Expr::add2(Expr::var(0), t) };
        let mut moved = xs.clone();
        moved[0] = b.bind(first);
        let outs = eta.iter().zip(&moved).map(|(e, &v)| e.emit_forward(&mut b, v)).collect();
        let program = b.finish(outs)?;
        Ok(ClassShift { ring, multiplicative, partition, sigma, shifts, eta, program })
    }

    fn shift(&self, x: u64, t: u64) -> u64 {
        if self.multiplicative {
            self.ring.mul(x, t)
        } else {
            self.ring.add(x, t)
        }
    }

    fn unshift(&self, x: u64, t: u64) -> u64 {
        if self.multiplicative {
            self.ring.mul(x, self.ring.inv(t).expect("unit shift"))
        } else {
            self.ring.sub(x, t)
        }
    }

    fn class_of(&self, x: &[u64]) -> Result<usize, ParamError> {
        self.partition
            .class_of(x)
            .ok_or_else(|| ParamError::Partition { at: x.to_vec(), what: "point outside every class" })
    }

    fn forward(&self, x: &[u64]) -> Result<Vec<u64>, ParamError> {
        let i = self.class_of(x)?;
        let mut v = x.to_vec();
        v[0] = self.shift(v[0], self.shifts[i]);
        v.iter().zip(&self.eta).map(|(&a, e)| Ok(e.forward(a)?)).collect()
    }

    fn inverse(&self, y: &[u64]) -> Result<Vec<u64>, ParamError> {
        let mut v: Vec<u64> = y
            .iter()
            .zip(&self.eta)
            .map(|(&a, e)| e.inverse(a).ok_or(ParamError::Roundtrip { at: y.to_vec() }))
            .collect::<Result<_, _>>()?;
        let j = self.class_of(&v)?;
        let i = self.sigma.iter().position(|&s| s == j).expect("σ is a permutation");
        v[0] = self.unshift(v[0], self.shifts[i]);
        Ok(v)
    }
}

fn check_sigma(sigma: &[usize], k: usize) -> Result<(), ParamError> {
    let mut seen = vec![false; k];
    if sigma.len() != k {
        return Err(ParamError::IndexMap);
    }
    for &s in sigma {
        if s >= k || std::mem::replace(&mut seen[s], true) {
            return Err(ParamError::IndexMap);
        }
    }
    Ok(())
}

fn random_sigma<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<usize> {
    let mut s: Vec<usize> = (0..k).collect();
    s.shuffle(rng);
    s
}

macro_rules! delegate {
    ($t:ty) => {
        impl $t {
            pub fn arity(&self) -> usize {
                self.0.eta.len()
            }

            pub fn partition(&self) -> &PartitionOfUnity {
                &self.0.partition
            }

            pub fn sigma(&self) -> &[usize] {
                &self.0.sigma
            }

            pub fn program(&self) -> &Program {
                &self.0.program
            }

            pub fn class_of(&self, x: &[u64]) -> Result<usize, ParamError> {
                self.0.class_of(x)
            }

            pub fn forward(&self, x: &[u64]) -> Result<Vec<u64>, ParamError> {
                self.0.forward(x)
            }

            pub fn inverse(&self, y: &[u64]) -> Result<Vec<u64>, ParamError> {
                self.0.inverse(y)
            }
        }
    };
}

/// Hybrid map on `K^m` with discriminator `Tr(α(x))`, `α(x) = Σ a_i x_i`, `a_1 ≠ 0`.
#[derive(Clone, Debug)]
pub struct AffineHybrid(ClassShift);

delegate!(AffineHybrid);

impl AffineHybrid {
    pub fn new(ring: &Ring, a: Vec<u64>, sigma: Vec<usize>, eta: Vec<Bijection>) -> Result<Self, ParamError> {
        let spec = ring.field().ok_or(ParamError::NotField)?;
        let (p, n) = (spec.characteristic(), spec.degree());
        let m = a.len();
        if m == 0 || a[0] == 0 {
            return Err(ParamError::Vanishes { at: a });
        }
        if eta.iter().any(|e| e.domain() != Domain::All) {
            return Err(ParamError::MatrixKind("affine hybrid needs permutations of the whole field"));
        }
        let tower = Tower::new(ring.clone(), 1)?;
        let alpha = Expr::sum(
            0,
            a.iter().enumerate().map(|(i, &c)| Expr::mul2(Expr::scalar(c), Expr::var(i))).collect(),
            &tower,
        );
        let mut b = ProgramBuilder::new(tower.clone(), m);
        let av = b.bind(alpha);
        let trace = (0..n).map(|k| Expr::pow_int(Expr::var(av), p.pow(k))).collect();
        let disc = b.finish(vec![Expr::sum(0, trace, &tower)])?;
        let points = ring.elements().map(|u| {
            let mut z = vec![0; m];
            z[0] = u;
            z
        });
        let partition = partition_on_points(disc, points)?;
        let k = partition.num_classes();
        check_sigma(&sigma, k)?;
        let tr = |u: u64| (0..n).fold(0, |s, j| ring.add(s, ring.pow(u, p.pow(j))));
        let w = ring.elements().find(|&u| tr(u) == 1).expect("trace is onto");
        let a1_inv = ring.inv(a[0]).expect("nonzero");
        let vals = partition.values();
        let shifts = (0..k)
            .map(|i| ring.mul(ring.mul(ring.sub(vals[sigma[i]], vals[i]), w), a1_inv))
            .collect();
        Ok(AffineHybrid(ClassShift::build(ring.clone(), false, partition, sigma, shifts, eta)?))
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, ring: &Ring, m: usize) -> Result<Self, ParamError> {
        let q = ring.size();
        let a: Vec<u64> = (0..m).map(|i| rng.gen_range(if i == 0 { 1 } else { 0 }..q)).collect();
        let k = ring.characteristic() as usize;
        let eta = (0..m)
            .map(|_| {
                let r = loop {
                    let r = rng.gen_range(1..q.max(2));
                    if gcd(r, q - 1) == 1 {
                        break r;
                    }
                };
                Ok(power_permutation(ring, r)?)
            })
            .collect::<Result<_, ParamError>>()?;
        AffineHybrid::new(ring, a, random_sigma(rng, k), eta)
    }
}

/// Hybrid map on `(K*)^m` with discriminator `β(x)^{(q−1)/r}`, `β = c·Π x_i^{s_i}`,
/// `r` a prime divisor of `q − 1` and `gcd(s_1, r) = 1`.
#[derive(Clone, Debug)]
pub struct MonomialHybrid(ClassShift);

delegate!(MonomialHybrid);

impl MonomialHybrid {
    pub fn new(
        ring: &Ring,
        c: u64,
        s: Vec<u64>,
        r: u64,
        sigma: Vec<usize>,
        eta: Vec<Bijection>,
    ) -> Result<Self, ParamError> {
        let spec = ring.field().ok_or(ParamError::NotField)?;
        let q = ring.size();
        let m = s.len();
        if q < 3 || r < 2 || !(q - 1).is_multiple_of(r) {
            return Err(ParamError::Divisor { s: r, p: q });
        }
        let s1_inv = inv_mod(s.first().copied().unwrap_or(0) % r, r)
            .ok_or(ParamError::NonUnitExponent { at: s.clone() })?;
        if c == 0 {
            return Err(ParamError::Vanishes { at: vec![c] });
        }
        if eta.iter().any(|e| e.domain() != Domain::Units) {
            return Err(ParamError::MatrixKind("monomial hybrid acts on units"));
        }
        let tower = Tower::new(ring.clone(), 1)?;
        let mut factors = vec![Expr::scalar(c)];
        factors.extend(s.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, &e)| Expr::pow_int(Expr::var(i), e)));
        let mut b = ProgramBuilder::new(tower.clone(), m);
        let beta = b.bind(Expr::product(0, factors, &tower));
        let step = (q - 1) / r;
        let disc = b.finish(vec![Expr::pow_int(Expr::var(beta), step)])?;
        let points = (1..q).map(|u| {
            let mut z = vec![1; m];
            z[0] = u;
            z
        });
        let partition = partition_on_points(disc, points)?;
        check_sigma(&sigma, partition.num_classes())?;
        let gamma = spec.generator();
        let vals = partition.values();
        let shifts = (0..vals.len())
            .map(|i| {
                let ratio = ring.mul(vals[sigma[i]], ring.inv(vals[i]).expect("root of unity"));
                let k = spec.discrete_log(ratio)? / step;
                Ok(ring.pow(gamma, (k * s1_inv) % r))
            })
            .collect::<Result<_, ParamError>>()?;
        Ok(MonomialHybrid(ClassShift::build(ring.clone(), true, partition, sigma, shifts, eta)?))
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, ring: &Ring, m: usize) -> Result<Self, ParamError> {
        let q = ring.size();
        if q < 3 {
            return Err(ParamError::NotField);
        }
        let primes: Vec<u64> = factorize(q - 1).into_iter().map(|(p, _)| p).collect();
        let r = primes[rng.gen_range(0..primes.len())];
        let s: Vec<u64> = (0..m)
            .map(|i| loop {
                let e = rng.gen_range(0..q - 1);
                if i > 0 || e % r != 0 {
                    break e;
                }
            })
            .collect();
        let eta = (0..m).map(|_| random_scaled_power(rng, ring)).collect::<Result<_, _>>()?;
        let c = rng.gen_range(1..q);
        MonomialHybrid::new(ring, c, s, r, random_sigma(rng, r as usize), eta)
    }
}
