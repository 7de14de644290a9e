use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::algebra::factorize;
use crate::expr::{Expr, Program, ProgramBuilder, Tower};
use crate::permgen::{Bijection, Domain, UniFn};
use crate::poly::lagrange_interpolate;

use super::{
    nonvanishing_expr, parametric_invertible_matrix, partition_on_points, ExpParam, FactorKind, MatrixClass,
    MatrixFactor, ParamError, ParametricMatrix, PartitionOfUnity,
};

/// Per-class inner map `ζ_i(z; x)`, coordinatewise.
#[derive(Clone, Debug)]
pub enum ClassMap {
    /// `x_j ↦ c_j(z)·x_j^{e_j(z)}` on units.
    Exp(Vec<ExpParam>),
    /// Parameter-free bijections.
    Perm(Vec<Bijection>),
}

impl ClassMap {
    fn arity(&self) -> usize {
        match self {
            ClassMap::Exp(v) => v.len(),
            ClassMap::Perm(v) => v.len(),
        }
    }

    fn forward(&self, z: &[u64], x: &[u64]) -> Result<Vec<u64>, ParamError> {
        match self {
            ClassMap::Exp(v) => v.iter().zip(x).map(|(h, &xi)| h.forward(z, xi)).collect(),
            ClassMap::Perm(v) => v.iter().zip(x).map(|(b, &xi)| Ok(b.forward(xi)?)).collect(),
        }
    }

    fn inverse(&self, z: &[u64], y: &[u64]) -> Result<Vec<u64>, ParamError> {
        match self {
            ClassMap::Exp(v) => v.iter().zip(y).map(|(h, &yi)| h.inverse(z, yi)).collect(),
            ClassMap::Perm(v) => v
                .iter()
                .zip(y)
                .map(|(b, &yi)| b.inverse(yi).ok_or(ParamError::Roundtrip { at: y.to_vec() }))
                .collect(),
        }
    }

    fn emit(&self, b: &mut ProgramBuilder, params: &[usize], xs: &[usize]) -> Vec<Expr> {
        match self {
            ClassMap::Exp(v) => v.iter().zip(xs).map(|(h, &x)| h.emit_forward(b, params, x)).collect(),
            ClassMap::Perm(v) => v.iter().zip(xs).map(|(f, &x)| f.emit_forward(b, x)).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct InjectionClass {
    pub matrix: ParametricMatrix,
    pub zeta: ClassMap,
    /// Offset program `l → m`; `None` means zero.
    pub chi: Option<Program>,
    /// Whether `ζ` is injective for parameters in this class.
    pub live: bool,
}

/// `η(z; x) = Σ_i g_i(z)·φ_i(z)·[ζ_i(z; x) + χ_i(z)]`.
#[derive(Clone, Debug)]
pub struct ParametricInjection {
    l: usize,
    m: usize,
    domain: Domain,
    partition: PartitionOfUnity,
    classes: Vec<InjectionClass>,
    forward: Program,
}

/// Assemble and emit the forward program.
pub fn parametric_injection(
    partition: PartitionOfUnity,
    classes: Vec<InjectionClass>,
    m: usize,
    domain: Domain,
) -> Result<ParametricInjection, ParamError> {
    let l = partition.arity();
    if classes.len() != partition.num_classes() {
        return Err(ParamError::Arity { expected: partition.num_classes(), got: classes.len() });
    }
    for c in &classes {
        if c.zeta.arity() != m || c.matrix.dim() != m || c.matrix.nparams() != l {
            return Err(ParamError::Arity { expected: m, got: c.zeta.arity() });
        }
        if domain != Domain::All && (c.chi.is_some() || !c.matrix.is_signature_safe()) {
            return Err(ParamError::MatrixKind("unit domains need χ = 0 and signature-safe matrices"));
        }
    }
    let tower: Arc<Tower> = partition.indicators().tower().clone();
    let mut b = ProgramBuilder::new(tower.clone(), l + m);
    let params: Vec<usize> = (0..l).collect();
    let xs: Vec<usize> = (l..l + m).collect();
    let g = b.inline(partition.indicators(), &params);
    let g = b.bind_all(g);
    let mut acc: Vec<Vec<Expr>> = vec![Vec::new(); m];
    for (ci, c) in classes.iter().enumerate() {
        let mut v = c.zeta.emit(&mut b, &params, &xs);
        if let Some(chi) = &c.chi {
            let off = b.inline(chi, &params);
            v = v.into_iter().zip(off).map(|(a, o)| Expr::add2(a, o)).collect();
        }
        let v = b.bind_all(v);
        let y = c.matrix.emit(&mut b, &params, &v);
        for (j, yj) in y.into_iter().enumerate() {
            acc[j].push(Expr::mul2(Expr::var(g[ci]), Expr::var(yj)));
        }
    }
    let outs = acc.into_iter().map(|t| Expr::sum(0, t, &tower)).collect();
    let forward = b.finish(outs)?;
    Ok(ParametricInjection { l, m, domain, partition, classes, forward })
}

impl ParametricInjection {
    pub fn nparams(&self) -> usize {
        self.l
    }

    pub fn arity(&self) -> usize {
        self.m
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn partition(&self) -> &PartitionOfUnity {
        &self.partition
    }

    pub fn classes(&self) -> &[InjectionClass] {
        &self.classes
    }

    /// Program of arity `l + m` (parameters first) with `m` outputs.
    pub fn program(&self) -> &Program {
        &self.forward
    }

    pub fn forward(&self, z: &[u64], x: &[u64]) -> Result<Vec<u64>, ParamError> {
        let mut a = z.to_vec();
        a.extend_from_slice(x);
        Ok(self.forward.eval(&a)?)
    }

    /// Evaluate through the class structure instead of the emitted program.
    pub fn forward_native(&self, z: &[u64], x: &[u64]) -> Result<Vec<u64>, ParamError> {
        let c = &self.classes[self.class_of(z)?];
        let mut v = c.zeta.forward(z, x)?;
        if let Some(chi) = &c.chi {
            let ring = self.partition.ring();
            v = v.iter().zip(chi.eval(z)?).map(|(&a, o)| ring.add(a, o)).collect();
        }
        c.matrix.apply(z, &v)
    }

    pub fn class_of(&self, z: &[u64]) -> Result<usize, ParamError> {
        self.partition.class_of(z).ok_or_else(|| ParamError::Partition {
            at: z.to_vec(),
            what: "parameters outside the scanned domain",
        })
    }

    pub fn is_live(&self, z: &[u64]) -> bool {
        self.class_of(z).map(|c| self.classes[c].live).unwrap_or(false)
    }

    /// `η⁻¹(z; y) = ζ_i⁻¹(z; φ_i(z)⁻¹y − χ_i(z))` for `z` in a live class.
    pub fn inverse(&self, z: &[u64], y: &[u64]) -> Result<Vec<u64>, ParamError> {
        let ci = self.class_of(z)?;
        let c = &self.classes[ci];
        if !c.live {
            return Err(ParamError::Dead { at: z.to_vec() });
        }
        let mut u = c.matrix.apply_inverse(z, y)?;
        if let Some(chi) = &c.chi {
            let ring = self.partition.ring();
            u = u.iter().zip(chi.eval(z)?).map(|(&a, o)| ring.sub(a, o)).collect();
        }
        c.zeta.inverse(z, &u)
    }

    /// Live parameter points among `points`, in the given order.
    pub fn live_points(&self, points: impl IntoIterator<Item = Vec<u64>>) -> Vec<Vec<u64>> {
        points.into_iter().filter(|z| self.is_live(z)).collect()
    }
}

/// Random injection over `l` parameters and `m` inputs on a field.
///
/// The partition comes from `(Σ a_i z_i)^{(q−1)/r}` coarsened to at most three classes.
/// On `Domain::Units` each class is a signature-safe matrix over exponential maps; on
/// `Domain::All` it is a lower-triangular factor times a permutation over random
/// permutations of the field plus an offset. `live(rng, class)` decides which unit-domain
/// classes are injective; `Domain::All` classes always are.
pub fn random_injection<R: Rng + ?Sized>(
    rng: &mut R,
    tower: &Arc<Tower>,
    l: usize,
    m: usize,
    domain: Domain,
    mut live: impl FnMut(&mut R, usize) -> bool,
) -> Result<ParametricInjection, ParamError> {
    let ring = tower.base().clone();
    if !ring.is_field() || ring.size() < 3 {
        return Err(ParamError::NotField);
    }
    let q = ring.size();
    let values: Vec<u64> = match domain {
        Domain::All => ring.elements().collect(),
        Domain::Units => (1..q).collect(),
        Domain::Subgroup { .. } => return Err(ParamError::MatrixKind("subgroup domains are not generated")),
    };
    let mut points = vec![Vec::new()];
    for _ in 0..l {
        points = points
            .into_iter()
            .flat_map(|p: Vec<u64>| values.iter().map(move |&v| [p.as_slice(), &[v]].concat()))
            .collect();
    }
    let disc = if l == 0 {
        Expr::scalar(1)
    } else {
        let primes = factorize(q - 1);
        let r = primes[rng.gen_range(0..primes.len())].0;
        let alpha = (0..l).map(|i| Expr::mul2(Expr::scalar(rng.gen_range(1..q)), Expr::var(i))).collect();
        Expr::pow_int(Expr::sum(0, alpha, tower), (q - 1) / r)
    };
    let disc = ProgramBuilder::new(tower.clone(), l).finish(vec![disc])?;
    let base = partition_on_points(disc, points.clone())?;
    let nv = base.values().len();
    let k = nv.min(3);
    let mut order: Vec<usize> = (0..nv).collect();
    order.shuffle(rng);
    let mut assign = vec![0; nv];
    for (t, &v) in order.iter().enumerate() {
        assign[v] = t % k;
    }
    let partition = base.coarsen(&assign, k)?;
    let params: Vec<Expr> = (0..l).map(Expr::var).collect();
    let mut classes = Vec::with_capacity(k);
    for c in 0..k {
        let mut perm: Vec<usize> = (0..m).collect();
        perm.shuffle(rng);
        let flat = (0..m * m).map(|e| Expr::scalar(u64::from(perm[e / m] == e % m))).collect();
        let pf = MatrixFactor::new(FactorKind::Permutation, m, ProgramBuilder::new(tower.clone(), l).finish(flat)?)?;
        let class = match domain {
            Domain::Units => {
                let alive = live(rng, c);
                let diag = (0..m).map(|_| nonvanishing_expr(rng, tower, &params)).collect();
                let df = MatrixFactor::diagonal(tower.clone(), l, diag)?;
                let matrix = parametric_invertible_matrix(MatrixClass::SignatureSafe, m, vec![df, pf], &points)?;
                let mut zeta = Vec::with_capacity(m);
                for _ in 0..m {
                    zeta.push(ExpParam::random(rng, tower.clone(), l, |_| true, alive)?);
                }
                InjectionClass { matrix, zeta: ClassMap::Exp(zeta), chi: None, live: alive }
            }
            _ => {
                let mut rows = Vec::with_capacity(m);
                for i in 0..m {
                    let row = (0..m)
                        .map(|j| match j.cmp(&i) {
                            std::cmp::Ordering::Less => random_affine(rng, q, &params, tower),
                            std::cmp::Ordering::Equal => Expr::scalar(1),
                            std::cmp::Ordering::Greater => Expr::scalar(0),
                        })
                        .collect();
                    rows.push(row);
                }
                let lower = MatrixFactor::triangular(tower.clone(), l, FactorKind::Lower, rows)?;
                let matrix = parametric_invertible_matrix(MatrixClass::General, m, vec![lower, pf], &points)?;
                let mut zeta = Vec::with_capacity(m);
                for _ in 0..m {
                    let mut image: Vec<u64> = ring.elements().collect();
                    image.shuffle(rng);
                    let table: Vec<(u64, u64)> = ring.elements().zip(image).collect();
                    let f = lagrange_interpolate(&table, &ring)?;
                    zeta.push(Bijection::with_table(ring.clone(), Domain::All, UniFn::Poly(f))?);
                }
                let offsets = (0..m).map(|_| random_affine(rng, q, &params, tower)).collect();
                let chi = ProgramBuilder::new(tower.clone(), l).finish(offsets)?;
                InjectionClass { matrix, zeta: ClassMap::Perm(zeta), chi: Some(chi), live: true }
            }
        };
        classes.push(class);
    }
    parametric_injection(partition, classes, m, domain)
}

fn random_affine<R: Rng + ?Sized>(rng: &mut R, q: u64, params: &[Expr], tower: &Tower) -> Expr {
    let mut terms: Vec<Expr> =
        params.iter().map(|p| Expr::mul2(Expr::scalar(rng.gen_range(0..q)), p.clone())).collect();
    terms.push(Expr::scalar(rng.gen_range(0..q)));
    Expr::sum(0, terms, tower)
}
