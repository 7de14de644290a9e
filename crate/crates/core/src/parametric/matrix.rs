use std::sync::Arc;

use crate::algebra::Ring;
use crate::expr::{Expr, Program, ProgramBuilder, Tower};

use super::{ParamError, PartitionOfUnity};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorKind {
    Permutation,
    Diagonal,
    Lower,
    Upper,
}

/// Which factors a matrix may contain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixClass {
    /// Permutation, diagonal and triangular factors.
    General,
    /// Permutation and diagonal factors only, so units map to units.
    SignatureSafe,
}

/// One factor; the program maps `l` parameters to `m²` entries (row-major) or, for
/// diagonal factors, to the `m` diagonal entries.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixFactor {
    kind: FactorKind,
    prog: Program,
}

impl MatrixFactor {
    pub fn new(kind: FactorKind, m: usize, prog: Program) -> Result<Self, ParamError> {
        let want = if kind == FactorKind::Diagonal { m } else { m * m };
        if prog.output_count() != want {
            return Err(ParamError::Arity { expected: want, got: prog.output_count() });
        }
        Ok(MatrixFactor { kind, prog })
    }

    /// Diagonal factor from level-0 expressions over the parameters.
    pub fn diagonal(tower: Arc<Tower>, l: usize, entries: Vec<Expr>) -> Result<Self, ParamError> {
        let m = entries.len();
        MatrixFactor::new(FactorKind::Diagonal, m, ProgramBuilder::new(tower, l).finish(entries)?)
    }

    /// Lower or upper triangular factor; entries on the wrong side of the diagonal are ignored.
    pub fn triangular(
        tower: Arc<Tower>,
        l: usize,
        kind: FactorKind,
        entries: Vec<Vec<Expr>>,
    ) -> Result<Self, ParamError> {
        let m = entries.len();
        let mut flat = Vec::with_capacity(m * m);
        for (i, row) in entries.into_iter().enumerate() {
            for (j, e) in row.into_iter().enumerate() {
                let keep = match kind {
                    FactorKind::Lower => j <= i,
                    FactorKind::Upper => j >= i,
                    _ => return Err(ParamError::MatrixKind("triangular factor kind expected")),
                };
                flat.push(if keep { e } else { Expr::scalar(0) });
            }
        }
        MatrixFactor::new(kind, m, ProgramBuilder::new(tower, l).finish(flat)?)
    }

    pub fn kind(&self) -> FactorKind {
        self.kind
    }

    pub fn program(&self) -> &Program {
        &self.prog
    }

    fn entries(&self, z: &[u64]) -> Result<Vec<u64>, ParamError> {
        Ok(self.prog.eval(z)?)
    }

    fn diag(&self, m: usize, e: &[u64], i: usize) -> u64 {
        match self.kind {
            FactorKind::Diagonal => e[i],
            _ => e[i * m + i],
        }
    }

    fn apply(&self, ring: &Ring, m: usize, z: &[u64], x: &[u64]) -> Result<Vec<u64>, ParamError> {
        let e = self.entries(z)?;
        Ok((0..m)
            .map(|i| match self.kind {
                FactorKind::Diagonal => ring.mul(e[i], x[i]),
                _ => (0..m).fold(0, |s, j| ring.add(s, ring.mul(e[i * m + j], x[j]))),
            })
            .collect())
    }

    fn solve(&self, ring: &Ring, m: usize, z: &[u64], y: &[u64]) -> Result<Vec<u64>, ParamError> {
        let e = self.entries(z)?;
        let singular = || ParamError::Singular { at: z.to_vec() };
        match self.kind {
            FactorKind::Permutation => {
                Ok((0..m).map(|j| (0..m).fold(0, |s, i| ring.add(s, ring.mul(e[i * m + j], y[i])))).collect())
            }
            FactorKind::Diagonal => (0..m)
                .map(|i| ring.inv(e[i]).map(|d| ring.mul(d, y[i])).ok_or_else(singular))
                .collect(),
            FactorKind::Lower | FactorKind::Upper => {
                let mut x = vec![0; m];
                let order: Vec<usize> = if self.kind == FactorKind::Lower {
                    (0..m).collect()
                } else {
                    (0..m).rev().collect()
                };
                for &i in &order {
                    let s = (0..m)
                        .filter(|&j| j != i)
                        .fold(0, |s, j| ring.add(s, ring.mul(e[i * m + j], x[j])));
                    let d = ring.inv(self.diag(m, &e, i)).ok_or_else(singular)?;
                    x[i] = ring.mul(d, ring.sub(y[i], s));
                }
                Ok(x)
            }
        }
    }

    fn emit(&self, b: &mut ProgramBuilder, m: usize, params: &[usize], xs: &[usize]) -> Vec<Expr> {
        let e = b.inline(&self.prog, params);
        let tower = b.tower().clone();
        (0..m)
            .map(|i| match self.kind {
                FactorKind::Diagonal => Expr::mul2(e[i].clone(), Expr::var(xs[i])),
                _ => {
                    let range: Vec<usize> = match self.kind {
                        FactorKind::Lower => (0..=i).collect(),
                        FactorKind::Upper => (i..m).collect(),
                        _ => (0..m).collect(),
                    };
                    let terms = range
                        .into_iter()
                        .map(|j| Expr::mul2(e[i * m + j].clone(), Expr::var(xs[j])))
                        .collect();
                    Expr::sum(0, terms, &tower)
                }
            })
            .collect()
    }

    fn transpose(&self, m: usize) -> MatrixFactor {
        let kind = match self.kind {
            FactorKind::Lower => FactorKind::Upper,
            FactorKind::Upper => FactorKind::Lower,
            k => k,
        };
        let prog = match self.kind {
            FactorKind::Diagonal => self.prog.clone(),
            _ => {
                let idx: Vec<usize> = (0..m * m).map(|k| (k % m) * m + k / m).collect();
                self.prog.select(&idx)
            }
        };
        MatrixFactor { kind, prog }
    }
}

/// `M(z) = F_1(z)·F_2(z)·…·F_k(z)`, invertible for every parameter value.
#[derive(Clone, Debug, PartialEq)]
pub struct ParametricMatrix {
    ring: Ring,
    m: usize,
    l: usize,
    factors: Vec<MatrixFactor>,
}

impl ParametricMatrix {
    pub fn identity(ring: Ring, m: usize, l: usize) -> Self {
        ParametricMatrix { ring, m, l, factors: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn nparams(&self) -> usize {
        self.l
    }

    pub fn factors(&self) -> &[MatrixFactor] {
        &self.factors
    }

    pub fn is_signature_safe(&self) -> bool {
        self.factors
            .iter()
            .all(|f| matches!(f.kind, FactorKind::Permutation | FactorKind::Diagonal))
    }

    pub fn apply(&self, z: &[u64], x: &[u64]) -> Result<Vec<u64>, ParamError> {
        let mut v = x.to_vec();
        for f in self.factors.iter().rev() {
            v = f.apply(&self.ring, self.m, z, &v)?;
        }
        Ok(v)
    }

    pub fn apply_inverse(&self, z: &[u64], y: &[u64]) -> Result<Vec<u64>, ParamError> {
        let mut v = y.to_vec();
        for f in &self.factors {
            v = f.solve(&self.ring, self.m, z, &v)?;
        }
        Ok(v)
    }

    /// Dense evaluation, row-major.
    pub fn eval(&self, z: &[u64]) -> Result<Vec<Vec<u64>>, ParamError> {
        let mut cols = Vec::with_capacity(self.m);
        for j in 0..self.m {
            let mut e = vec![0; self.m];
            e[j] = 1;
            cols.push(self.apply(z, &e)?);
        }
        Ok((0..self.m).map(|i| (0..self.m).map(|j| cols[j][i]).collect()).collect())
    }

    /// 0/1 entries with exactly one 1 in every row and column.
    pub fn is_permutation_at(&self, z: &[u64]) -> Result<bool, ParamError> {
        let a = self.eval(z)?;
        let ok_row = a.iter().all(|r| r.iter().all(|&v| v <= 1) && r.iter().filter(|&&v| v == 1).count() == 1);
        let ok_col = (0..self.m).all(|j| a.iter().filter(|r| r[j] == 1).count() == 1);
        Ok(ok_row && ok_col)
    }

    /// `M(z)·M(z)⁻¹ = I` checked on basis vectors.
    pub fn is_invertible_at(&self, z: &[u64]) -> Result<bool, ParamError> {
        for j in 0..self.m {
            let mut e = vec![0; self.m];
            e[j] = 1;
            let y = self.apply(z, &e)?;
            match self.apply_inverse(z, &y) {
                Ok(back) if back == e => {}
                Ok(_) | Err(ParamError::Singular { .. }) => return Ok(false),
                Err(err) => return Err(err),
            }
        }
        Ok(true)
    }

    pub fn emit(&self, b: &mut ProgramBuilder, params: &[usize], xs: &[usize]) -> Vec<usize> {
        let mut v = xs.to_vec();
        for f in self.factors.iter().rev() {
            let outs = f.emit(b, self.m, params, &v);
            v = b.bind_all(outs);
        }
        v
    }

    pub fn product(&self, other: &ParametricMatrix) -> Result<ParametricMatrix, ParamError> {
        if self.m != other.m || self.l != other.l {
            return Err(ParamError::Arity { expected: self.m, got: other.m });
        }
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Ok(ParametricMatrix { ring: self.ring.clone(), m: self.m, l: self.l, factors })
    }

    pub fn transpose(&self) -> ParametricMatrix {
        let factors = self.factors.iter().rev().map(|f| f.transpose(self.m)).collect();
        ParametricMatrix { ring: self.ring.clone(), m: self.m, l: self.l, factors }
    }
}

/// `σ(r, s) = h((f_1(r) + f_2(s)) mod m)` for permutations `f_1`, `f_2`, `h` of `0..m`.
pub fn default_sigma(f1: &[usize], f2: &[usize], h: &[usize]) -> Vec<Vec<usize>> {
    let m = h.len();
    (0..m).map(|r| (0..m).map(|s| h[(f1[r] + f2[s]) % m]).collect()).collect()
}

/// Entry `(i, j)` is the indicator of class `σ(i, j)`.
pub fn parametric_permutation_matrix(
    partition: &PartitionOfUnity,
    sigma: &[Vec<usize>],
) -> Result<ParametricMatrix, ParamError> {
    let m = partition.num_classes();
    let perm = |it: &mut dyn Iterator<Item = usize>| {
        let mut seen = vec![false; m];
        let mut ok = true;
        for v in it {
            ok &= v < m && !std::mem::replace(&mut seen[v], true);
        }
        ok
    };
    if sigma.len() != m
        || sigma.iter().any(|r| r.len() != m)
        || !(0..m).all(|r| perm(&mut sigma[r].iter().copied()))
        || !(0..m).all(|s| perm(&mut sigma.iter().map(|r| r[s])))
    {
        return Err(ParamError::IndexMap);
    }
    let tower = partition.indicators().tower().clone();
    let l = partition.arity();
    let mut b = ProgramBuilder::new(tower, l);
    let args = b.inputs();
    let g = b.inline(partition.indicators(), &args);
    let g: Vec<usize> = b.bind_all(g);
    let flat = sigma.iter().flatten().map(|&c| Expr::var(g[c])).collect();
    let factor = MatrixFactor::new(FactorKind::Permutation, m, b.finish(flat)?)?;
    Ok(ParametricMatrix { ring: partition.ring().clone(), m, l, factors: vec![factor] })
}

/// Product of factors, each certified on `param_points` (nonvanishing diagonals,
/// permutation pattern for permutation factors).
pub fn parametric_invertible_matrix(
    class: MatrixClass,
    m: usize,
    factors: Vec<MatrixFactor>,
    param_points: &[Vec<u64>],
) -> Result<ParametricMatrix, ParamError> {
    let first = factors.first().ok_or(ParamError::MatrixKind("at least one factor"))?;
    let tower = first.prog.tower().clone();
    let l = first.prog.arity();
    for f in &factors {
        if class == MatrixClass::SignatureSafe
            && matches!(f.kind, FactorKind::Lower | FactorKind::Upper)
        {
            return Err(ParamError::MatrixKind("signature-safe matrices exclude triangular factors"));
        }
        if f.prog.arity() != l {
            return Err(ParamError::Arity { expected: l, got: f.prog.arity() });
        }
    }
    let mat = ParametricMatrix { ring: tower.base().clone(), m, l, factors };
    for z in param_points {
        for f in &mat.factors {
            let single = ParametricMatrix { ring: mat.ring.clone(), m, l, factors: vec![f.clone()] };
            let ok = match f.kind {
                FactorKind::Permutation => single.is_permutation_at(z)?,
                _ => {
                    let e = f.entries(z)?;
                    (0..m).all(|i| f.diag(m, &e, i) != 0)
                }
            };
            if !ok {
                return Err(ParamError::Singular { at: z.clone() });
            }
        }
    }
    Ok(mat)
}
