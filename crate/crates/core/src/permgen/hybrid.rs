use std::sync::Arc;

use num_integer::gcd;

use super::{poly_expr, Bijection, Domain, Inverse, PermError, UniFn};
use crate::algebra::Ring;
use crate::expr::{Expr, ProgramBuilder, Tower};
use crate::parametric::PartitionOfUnity;
use crate::poly::Poly;

/// All `(s, t)` with `s·t = n`, `gcd(s, t) = 1` and `s, t ≥ 2`.
pub fn admissible_splits(n: u64) -> Vec<(u64, u64)> {
    (2..n)
        .filter(|s| n.is_multiple_of(*s))
        .map(|s| (s, n / s))
        .filter(|&(s, t)| t >= 2 && gcd(s, t) == 1)
        .collect()
}

/// `η(x) = a^{g(log_a x)}` restricted to `H_t`, `a` the field generator.
///
/// The constant term of `g` is shifted by the first offset `c ∈ 0..q−1` that keeps the
/// image inside `H_t`; the map is then certified exhaustively.
pub fn subgroup_bijection(ring: &Ring, s: u64, t: u64, g: &Poly) -> Result<Bijection, PermError> {
    let f = ring.field().ok_or(PermError::NotField)?;
    let n = f.order() - 1;
    if admissible_splits(n).is_empty() {
        return Err(PermError::NoSplit(n));
    }
    if s * t != n || gcd(s, t) != 1 || s < 2 || t < 2 {
        return Err(PermError::BadSplit { s, t });
    }
    let zn = Ring::zn(n)?;
    let g = g.lift_to(zn.clone());
    let c = (0..n).find(|c| (g.coeff(0) + c).is_multiple_of(s)).expect("c = s − g(0) mod s works");
    let gc = g.add(&Poly::constant(zn, c))?;
    let tower = Tower::new(ring.clone(), 2)?;
    let exp = poly_expr(&gc, Expr::var_at(0, 1), 1, &tower);
    let body = Expr::pow_expr(Expr::scalar(f.generator()), exp);
    let prog = ProgramBuilder::new(tower, 1).finish(vec![body])?;
    Bijection::with_table(ring.clone(), Domain::Subgroup { t }, UniFn::Program(prog))
}

fn classes(partition: &PartitionOfUnity, ring: &Ring, domain: Domain) -> Result<Vec<Vec<u64>>, PermError> {
    let mut out = vec![Vec::new(); partition.num_classes()];
    for x in domain.elements(ring) {
        let c = partition
            .class_of(&[x])
            .ok_or(PermError::Condition("partition undefined on the domain"))?;
        out[c].push(x);
    }
    Ok(out)
}

/// `χ(x) = Σ ℓ_i(x)·η(g_i(x))`, with `g_i` carrying class `i` onto class `σ(i)` and
/// `f_i` inverting `g_i` on class `i`.
pub fn hybrid_perm_method1(
    partition: &PartitionOfUnity,
    sigma: &[usize],
    g: &[UniFn],
    f: &[UniFn],
    eta: &Bijection,
) -> Result<Bijection, PermError> {
    let ring = eta.ring().clone();
    let domain = eta.domain();
    let k = partition.num_classes();
    if sigma.len() != k || g.len() != k || f.len() != k {
        return Err(PermError::Condition("one σ entry and one map pair per class"));
    }
    let cls = classes(partition, &ring, domain)?;
    let mut sigma_inv = vec![usize::MAX; k];
    for (i, &j) in sigma.iter().enumerate() {
        if j >= k || sigma_inv[j] != usize::MAX {
            return Err(PermError::Condition("σ must permute the classes"));
        }
        sigma_inv[j] = i;
    }
    for i in 0..k {
        let target = &cls[sigma[i]];
        if cls[i].len() != target.len() {
            return Err(PermError::ClassSize { class: i, size: cls[i].len(), target: target.len() });
        }
        let mut img = Vec::with_capacity(cls[i].len());
        for &x in &cls[i] {
            let y = g[i].eval(x)?;
            if f[i].eval(y)? != x {
                return Err(PermError::ClassMap { class: i });
            }
            img.push(y);
        }
        img.sort_unstable();
        if &img != target {
            return Err(PermError::ClassMap { class: i });
        }
    }
    let tower = partition.indicators().tower().clone();
    let mut b = ProgramBuilder::new(tower.clone(), 1);
    let ls = b.inline(partition.indicators(), &[0]);
    let terms = ls
        .into_iter()
        .zip(g)
        .map(|(l, gi)| {
            let gx = gi.emit(&mut b, 0);
            let v = b.bind(gx);
            Expr::mul2(l, eta.emit_forward(&mut b, v))
        })
        .collect();
    let forward = b.finish(vec![Expr::sum(0, terms, &tower)])?;
    let (part, eta_c, f_c) = (partition.clone(), eta.clone(), f.to_vec());
    let inverse = move |y: u64| {
        let u = eta_c.inverse(y)?;
        let j = part.class_of(&[u])?;
        f_c[sigma_inv[j]].eval(u).ok()
    };
    Bijection::new(ring, domain, UniFn::Program(forward), Inverse::ClosedForm(Arc::new(inverse)))
}

/// `ζ(x) = Σ ℓ_i(h(x))·η(f_{σ(i)}(x))` where `h∘f_j = h` for every `j`.
pub fn hybrid_perm_method2(
    fs: &[Bijection],
    h: &UniFn,
    sigma: &[usize],
    partition: &PartitionOfUnity,
    eta: &Bijection,
) -> Result<Bijection, PermError> {
    let ring = eta.ring().clone();
    let domain = eta.domain();
    if sigma.len() != partition.num_classes() || sigma.iter().any(|&j| j >= fs.len()) {
        return Err(PermError::Condition("σ must map classes to map indices"));
    }
    for x in domain.elements(&ring) {
        let hx = h.eval(x)?;
        for (i, fi) in fs.iter().enumerate() {
            if h.eval(fi.forward(x)?)? != hx {
                return Err(PermError::Invariance { x, i });
            }
        }
    }
    let tower = partition.indicators().tower().clone();
    let mut b = ProgramBuilder::new(tower.clone(), 1);
    let hx = h.emit(&mut b, 0);
    let hv = b.bind(hx);
    let ls = b.inline(partition.indicators(), &[hv]);
    let terms = ls
        .into_iter()
        .zip(sigma)
        .map(|(l, &j)| {
            let fx = fs[j].emit_forward(&mut b, 0);
            let v = b.bind(fx);
            Expr::mul2(l, eta.emit_forward(&mut b, v))
        })
        .collect();
    let forward = b.finish(vec![Expr::sum(0, terms, &tower)])?;
    let (part, eta_c, fs_c, h_c, sig) = (partition.clone(), eta.clone(), fs.to_vec(), h.clone(), sigma.to_vec());
    let inverse = move |y: u64| {
        let u = eta_c.inverse(y)?;
        let c = part.class_of(&[h_c.eval(u).ok()?])?;
        fs_c[sig[c]].inverse(u)
    };
    Bijection::new(ring, domain, UniFn::Program(forward), Inverse::ClosedForm(Arc::new(inverse)))
}
