use crate::expr::{Expr, Program, ProgramBuilder, Tower};
use crate::permgen::poly_expr;
use crate::poly::{MultiPoly, Poly};

use super::{partition_on_points, ParamError};

fn multipoly_expr(g: &MultiPoly, tower: &Tower) -> Expr {
    let terms = g
        .terms()
        .map(|(e, c)| {
            let mut f: Vec<Expr> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| match k {
                    1 => Expr::var(i),
                    _ => Expr::pow_int(Expr::var(i), k as u64),
                })
                .collect();
            if c != 1 || f.is_empty() {
                f.insert(0, Expr::scalar(c));
            }
            Expr::product(0, f, tower)
        })
        .collect();
    Expr::sum(0, terms, tower)
}

/// `a·(f(g(z)) − c)` for a value `c` missed by `f`; never zero.
pub fn nonvanishing_map(f: &Poly, c: u64, a: u64, g: &MultiPoly) -> Result<Program, ParamError> {
    let ring = f.ring().clone();
    if let Some(x) = ring.elements().find(|&x| f.eval(x) == c) {
        return Err(ParamError::InImage { c, preimage: x });
    }
    if a == 0 || g.ring() != &ring {
        return Err(ParamError::Vanishes { at: Vec::new() });
    }
    let tower = Tower::new(ring.clone(), 1)?;
    let mut b = ProgramBuilder::new(tower.clone(), g.nvars());
    let v = b.bind(multipoly_expr(g, &tower));
    let fv = poly_expr(f, Expr::var(v), 0, &tower);
    let body = Expr::mul2(Expr::scalar(a), Expr::add2(fv, Expr::scalar(ring.neg(c))));
    Ok(b.finish(vec![body])?)
}

/// Pointwise inverse `Σ a_i⁻¹·ℓ_i` from the partition that `f` itself induces on `points`.
pub fn invert_nonvanishing(
    f: &Program,
    points: impl IntoIterator<Item = Vec<u64>>,
) -> Result<Program, ParamError> {
    let pts: Vec<Vec<u64>> = points.into_iter().collect();
    for z in &pts {
        if f.eval(z)?[0] == 0 {
            return Err(ParamError::Vanishes { at: z.clone() });
        }
    }
    let part = partition_on_points(f.clone(), pts)?;
    let ring = part.ring().clone();
    let tower = f.tower().clone();
    let mut b = ProgramBuilder::new(tower.clone(), f.arity());
    let args = b.inputs();
    let ls = b.inline(part.indicators(), &args);
    let terms = ls
        .into_iter()
        .zip(part.values())
        .map(|(l, &a)| Expr::mul2(Expr::scalar(ring.inv(a).expect("nonzero")), l))
        .collect();
    Ok(b.finish(vec![Expr::sum(0, terms, &tower)])?)
}
