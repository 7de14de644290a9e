//! Brute-force validators: exhaustive bijectivity, inversion, preimage censuses and a
//! naive solver for simultaneous equations. Everything here enumerates; nothing is clever.

mod audit;

pub use audit::{audit_key, AuditError, AuditReport};

use std::collections::BTreeMap;
use std::fmt::Display;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::Ring;
use crate::expr::{Expr, Program, Tower};

/// Largest grid any oracle will enumerate.
pub const GRID_CAP: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("grid of {size} points exceeds the cap of {cap}")]
    CapExceeded { size: u128, cap: u64 },
    #[error("map failed at {at:?}: {msg}")]
    Map { at: Vec<u64>, msg: String },
    #[error("variable lists do not match the system arity {arity}")]
    Variables { arity: usize },
}

/// Cartesian product of per-component value lists, optionally in a shuffled order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainGrid {
    components: Vec<Vec<u64>>,
    size: u64,
    order: Option<Vec<u32>>,
}

impl DomainGrid {
    pub fn new(components: Vec<Vec<u64>>) -> Result<Self, OracleError> {
        let size: u128 = components.iter().map(|c| c.len() as u128).product();
        if size > GRID_CAP as u128 {
            return Err(OracleError::CapExceeded { size, cap: GRID_CAP });
        }
        Ok(DomainGrid { components, size: size as u64, order: None })
    }

    /// `arity` copies of one component domain.
    pub fn power(values: Vec<u64>, arity: usize) -> Result<Self, OracleError> {
        DomainGrid::new(vec![values; arity])
    }

    /// All of the base ring in every component.
    pub fn full(ring: &Ring, arity: usize) -> Result<Self, OracleError> {
        DomainGrid::power(ring.elements().collect(), arity)
    }

    /// The unit group in every component.
    pub fn units(ring: &Ring, arity: usize) -> Result<Self, OracleError> {
        DomainGrid::power(ring.units(), arity)
    }

    /// Concatenate components: points of `self × other`.
    pub fn product(&self, other: &DomainGrid) -> Result<Self, OracleError> {
        DomainGrid::new(self.components.iter().chain(&other.components).cloned().collect())
    }

    pub fn arity(&self) -> usize {
        self.components.len()
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn components(&self) -> &[Vec<u64>] {
        &self.components
    }

    /// Same points, visited in a seeded random order.
    pub fn shuffled(&self, seed: u64) -> Self {
        let mut order: Vec<u32> = (0..self.size as u32).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        DomainGrid { order: Some(order), ..self.clone() }
    }

    /// Point at lexicographic rank `k`.
    pub fn point(&self, mut k: u64) -> Vec<u64> {
        let mut out = vec![0; self.components.len()];
        for (slot, c) in out.iter_mut().zip(&self.components).rev() {
            let n = c.len() as u64;
            *slot = c[(k % n) as usize];
            k /= n;
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        (0..self.size).map(move |k| match &self.order {
            Some(o) => self.point(o[k as usize] as u64),
            None => self.point(k),
        })
    }
}

fn call<E: Display>(f: &impl Fn(&[u64]) -> Result<Vec<u64>, E>, x: &[u64]) -> Result<Vec<u64>, OracleError> {
    f(x).map_err(|e| OracleError::Map { at: x.to_vec(), msg: e.to_string() })
}

/// Result of an exhaustive bijectivity scan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BijectivityVerdict {
    pub points: u64,
    pub distinct: u64,
    /// Two smallest preimages of the smallest colliding image.
    pub collision: Option<(Vec<u64>, Vec<u64>)>,
    /// Whether the image fills a codomain of the declared size.
    pub onto: Option<bool>,
}

impl BijectivityVerdict {
    pub fn is_injective(&self) -> bool {
        self.collision.is_none()
    }

    pub fn is_bijective(&self) -> bool {
        self.is_injective() && self.onto.unwrap_or(true)
    }
}

/// Injectivity over `grid`; with `codomain_size`, also whether the image is onto.
pub fn exhaustive_bijectivity<E: Display>(
    f: impl Fn(&[u64]) -> Result<Vec<u64>, E>,
    grid: &DomainGrid,
    codomain_size: Option<u64>,
) -> Result<BijectivityVerdict, OracleError> {
    let mut image: BTreeMap<Vec<u64>, Vec<Vec<u64>>> = BTreeMap::new();
    for x in grid.iter() {
        let y = call(&f, &x)?;
        image.entry(y).or_default().push(x);
    }
    let collision = image.values().find(|xs| xs.len() > 1).map(|xs| {
        let mut xs = xs.clone();
        xs.sort();
        (xs[0].clone(), xs[1].clone())
    });
    let distinct = image.len() as u64;
    Ok(BijectivityVerdict {
        points: grid.size(),
        distinct,
        collision,
        onto: codomain_size.map(|n| distinct == n),
    })
}

/// Every preimage of `y` in `grid`, sorted.
pub fn brute_force_invert<E: Display>(
    f: impl Fn(&[u64]) -> Result<Vec<u64>, E>,
    y: &[u64],
    grid: &DomainGrid,
) -> Result<Vec<Vec<u64>>, OracleError> {
    let mut out = Vec::new();
    for x in grid.iter() {
        if call(&f, &x)? == y {
            out.push(x);
        }
    }
    out.sort();
    Ok(out)
}

/// `|{ω : F(x, ω) = c}|` for every `(x, c)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Census {
    pub counts: BTreeMap<(Vec<u64>, Vec<u64>), u64>,
}

impl Census {
    pub fn min_count(&self) -> u64 {
        self.counts.values().copied().min().unwrap_or(0)
    }

    pub fn max_count(&self) -> u64 {
        self.counts.values().copied().max().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn get(&self, x: &[u64], c: &[u64]) -> u64 {
        self.counts.get(&(x.to_vec(), c.to_vec())).copied().unwrap_or(0)
    }
}

/// Census of `F(x, ω)` over `x_grid × omega_grid`; `F` takes `x` then `ω` concatenated.
pub fn preimage_census<E: Display>(
    f: impl Fn(&[u64]) -> Result<Vec<u64>, E>,
    x_grid: &DomainGrid,
    omega_grid: &DomainGrid,
    seed: Option<u64>,
) -> Result<Census, OracleError> {
    let mut grid = x_grid.product(omega_grid)?;
    if let Some(s) = seed {
        grid = grid.shuffled(s);
    }
    let mu = x_grid.arity();
    let mut census = Census::default();
    for p in grid.iter() {
        let c = call(&f, &p)?;
        *census.counts.entry((p[..mu].to_vec(), c)).or_insert(0) += 1;
    }
    Ok(census)
}

/// Wrap expressions over `nvars` base variables as a system `e_i = 0`.
pub fn equation_system(tower: std::sync::Arc<Tower>, nvars: usize, eqs: Vec<Expr>) -> Result<Program, OracleError> {
    Program::new(tower, nvars, Vec::new(), eqs)
        .map_err(|e| OracleError::Map { at: Vec::new(), msg: e.to_string() })
}

/// For each assignment of the independent variables, every assignment of the dependent
/// ones making all outputs of `system` vanish. Points where evaluation fails are skipped.
pub fn exhaustive_solve(
    system: &Program,
    indep: &[usize],
    dep: &[usize],
    indep_grid: &DomainGrid,
    dep_grid: &DomainGrid,
) -> Result<BTreeMap<Vec<u64>, Vec<Vec<u64>>>, OracleError> {
    let n = system.arity();
    let mut covered = vec![false; n];
    for &v in indep.iter().chain(dep) {
        if v >= n || std::mem::replace(&mut covered[v], true) {
            return Err(OracleError::Variables { arity: n });
        }
    }
    if covered.contains(&false) || indep.len() != indep_grid.arity() || dep.len() != dep_grid.arity() {
        return Err(OracleError::Variables { arity: n });
    }
    let total = indep_grid.size() as u128 * dep_grid.size() as u128;
    if total > GRID_CAP as u128 {
        return Err(OracleError::CapExceeded { size: total, cap: GRID_CAP });
    }
    let mut out = BTreeMap::new();
    let mut assign = vec![0; n];
    for a in indep_grid.iter() {
        for (&v, &x) in indep.iter().zip(&a) {
            assign[v] = x;
        }
        let mut sols = Vec::new();
        for d in dep_grid.iter() {
            for (&v, &x) in dep.iter().zip(&d) {
                assign[v] = x;
            }
            if let Ok(vals) = system.eval(&assign) {
                if vals.iter().all(|&r| r == 0) {
                    sols.push(d);
                }
            }
        }
        sols.sort();
        out.insert(a, sols);
    }
    Ok(out)
}
