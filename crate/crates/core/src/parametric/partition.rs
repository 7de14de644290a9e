use crate::algebra::Ring;
use crate::expr::{Expr, Program, ProgramBuilder};

use super::ParamError;

/// Indicator family `ℓ_1..ℓ_k` built from the level sets of a discriminator.
///
/// Each class is a union of discriminator values; classes may be empty (non-strict).
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionOfUnity {
    discriminator: Program,
    values: Vec<u64>,
    groups: Vec<Vec<usize>>,
    lookup: Vec<(u64, usize)>,
    indicators: Program,
}

impl PartitionOfUnity {
    fn build(discriminator: Program, values: Vec<u64>, groups: Vec<Vec<usize>>) -> Result<Self, ParamError> {
        let tower = discriminator.tower().clone();
        let ring = tower.base().clone();
        for (i, &a) in values.iter().enumerate() {
            for &b in &values[i + 1..] {
                if !ring.is_unit(ring.sub(a, b)) {
                    return Err(ParamError::NonUnitDifference { a, b });
                }
            }
        }
        let mut b = ProgramBuilder::new(tower.clone(), discriminator.arity());
        let args = b.inputs();
        let d = b.inline(&discriminator, &args).remove(0);
        let d = b.bind(d);
        let basis: Vec<Expr> = values
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let mut denom = 1;
                let mut factors = Vec::new();
                for (j, &c) in values.iter().enumerate() {
                    if j != i {
                        denom = ring.mul(denom, ring.sub(a, c));
                        factors.push(Expr::add2(Expr::var(d), Expr::scalar(ring.neg(c))));
                    }
                }
                let w = ring.inv(denom).expect("checked unit");
                if factors.is_empty() {
                    return Expr::scalar(w);
                }
                factors.insert(0, Expr::scalar(w));
                Expr::product(0, factors, &tower)
            })
            .collect();
        let outs = groups
            .iter()
            .map(|g| Expr::sum(0, g.iter().map(|&i| basis[i].clone()).collect(), &tower))
            .collect();
        let indicators = b.finish(outs)?;
        let mut lookup: Vec<(u64, usize)> = groups
            .iter()
            .enumerate()
            .flat_map(|(c, g)| g.iter().map(move |&i| (i, c)))
            .map(|(i, c)| (values[i], c))
            .collect();
        lookup.sort_unstable();
        Ok(PartitionOfUnity { discriminator, values, groups, lookup, indicators })
    }

    pub fn ring(&self) -> &Ring {
        self.discriminator.tower().base()
    }

    pub fn arity(&self) -> usize {
        self.discriminator.arity()
    }

    pub fn num_classes(&self) -> usize {
        self.groups.len()
    }

    pub fn discriminator(&self) -> &Program {
        &self.discriminator
    }

    /// Distinct discriminator values `a_1..a_k` in scan order.
    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Program with one output `ℓ_c(z)` per class.
    pub fn indicators(&self) -> &Program {
        &self.indicators
    }

    pub fn indicator_values(&self, z: &[u64]) -> Result<Vec<u64>, ParamError> {
        Ok(self.indicators.eval(z)?)
    }

    /// Class of `z`, or `None` when the discriminator value was never seen.
    pub fn class_of(&self, z: &[u64]) -> Option<usize> {
        let d = self.discriminator.eval(z).ok()?[0];
        self.lookup
            .binary_search_by_key(&d, |&(v, _)| v)
            .ok()
            .map(|i| self.lookup[i].1)
    }

    /// Merge base values into `m` classes; `assign[i]` names the class of value `i`.
    pub fn coarsen(&self, assign: &[usize], m: usize) -> Result<PartitionOfUnity, ParamError> {
        if assign.len() != self.values.len() || assign.iter().any(|&c| c >= m) {
            return Err(ParamError::Arity { expected: self.values.len(), got: assign.len() });
        }
        let mut groups = vec![Vec::new(); m];
        for (i, &c) in assign.iter().enumerate() {
            groups[c].push(i);
        }
        PartitionOfUnity::build(self.discriminator.clone(), self.values.clone(), groups)
    }

    /// `Σℓ_i = 1`, `ℓ_iℓ_j = 0` for `i ≠ j` and `ℓ_i² = ℓ_i` at every point.
    pub fn verify(&self, points: impl IntoIterator<Item = Vec<u64>>) -> Result<usize, ParamError> {
        let ring = self.ring().clone();
        let mut n = 0;
        for z in points {
            n += 1;
            let l = self.indicator_values(&z)?;
            let fail = |what| Err(ParamError::Partition { at: z.clone(), what });
            if l.iter().fold(0, |s, &v| ring.add(s, v)) != 1 {
                return fail("indicators do not sum to one");
            }
            for (i, &a) in l.iter().enumerate() {
                if ring.mul(a, a) != a {
                    return fail("indicator is not idempotent");
                }
                if l[i + 1..].iter().any(|&b| ring.mul(a, b) != 0) {
                    return fail("indicators overlap");
                }
            }
            if self.class_of(&z).map(|c| l[c]) != Some(1) {
                return fail("class lookup disagrees with indicators");
            }
        }
        Ok(n)
    }
}

/// Partition from the image of `disc` over `points`.
pub fn partition_on_points(
    disc: Program,
    points: impl IntoIterator<Item = Vec<u64>>,
) -> Result<PartitionOfUnity, ParamError> {
    let mut values: Vec<u64> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for z in points {
        let v = disc.eval(&z)?[0];
        if seen.insert(v) {
            values.push(v);
        }
    }
    let groups = (0..values.len()).map(|i| vec![i]).collect();
    PartitionOfUnity::build(disc, values, groups)
}

/// Partition of the whole base ring by a univariate discriminator.
pub fn partition_from_discriminator(disc: Program, ring: &Ring) -> Result<PartitionOfUnity, ParamError> {
    if disc.arity() != 1 {
        return Err(ParamError::Arity { expected: 1, got: disc.arity() });
    }
    partition_on_points(disc, ring.elements().map(|x| vec![x]))
}

/// Partition of `Z_{p^l}` by `h(x) = x^{s·p^{l−1}}`, `s | p − 1`.
pub fn partition_zpl(p: u64, l: u32, s: u64) -> Result<PartitionOfUnity, ParamError> {
    if s == 0 || !(p - 1).is_multiple_of(s) {
        return Err(ParamError::Divisor { s, p });
    }
    let ring = Ring::zn(p.pow(l))?;
    let tower = crate::expr::Tower::new(ring.clone(), 1)?;
    let disc = ProgramBuilder::new(tower, 1)
        .finish(vec![Expr::pow_int(Expr::var(0), s * p.pow(l - 1))])?;
    let part = partition_from_discriminator(disc, &ring)?;
    debug_assert_eq!(part.num_classes() as u64, 1 + (p - 1) / s);
    Ok(part)
}
