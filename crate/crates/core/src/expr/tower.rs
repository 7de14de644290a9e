use std::sync::Arc;

use smallvec::{smallvec, SmallVec};

use super::ExprError;
use crate::algebra::{exponent_port_hom, factor_modulus, pow_mod, PortComponent, Ring};

/// A value at some level: one residue per atom of that level's product ring.
pub type Val = SmallVec<[u64; 4]>;

/// Maximum number of levels (base plus two exponent levels).
pub const MAX_LEVELS: usize = 3;

#[derive(Clone, Debug)]
enum Slot {
    FieldLog { target: usize },
    Factor { comp: PortComponent, target: usize },
    Trivial,
}

/// The chain of domains `K = D_0, D_1, …` where `D_{k+1}` holds exponents for `D_k`.
///
/// `D_0` is a single ring. Each deeper level is a product of residue rings: a field
/// `GF(q)` contributes `Z_{q−1}` (discrete log to the field generator), a residue ring
/// `Z_M` contributes `Z_{φ(p^l)}` for each factor `p^l` of `M` (homomorphism for `l ≥ 2`,
/// discrete log to the smallest primitive root for `l = 1`, nothing when `φ = 1`).
#[derive(Clone, Debug)]
pub struct Tower {
    levels: Vec<Vec<Ring>>,
    slots: Vec<Vec<Vec<Slot>>>,
}

impl PartialEq for Tower {
    fn eq(&self, other: &Self) -> bool {
        self.levels == other.levels
    }
}

impl Tower {
    /// Build up to `depth` levels (clamped to what the base ring supports).
    pub fn new(base: Ring, depth: usize) -> Result<Arc<Tower>, ExprError> {
        if depth == 0 || depth > MAX_LEVELS {
            return Err(ExprError::Depth(depth));
        }
        let mut levels = vec![vec![base]];
        let mut slots = Vec::new();
        while levels.len() < depth {
            let cur = levels.last().unwrap();
            let mut next = Vec::new();
            let mut lvl_slots = Vec::new();
            for atom in cur {
                match atom {
                    Ring::Gf(f) => {
                        if f.order() > 2 {
                            lvl_slots.push(vec![Slot::FieldLog { target: next.len() }]);
                            next.push(Ring::zn(f.order() - 1).expect("q − 1 ≥ 2"));
                        } else {
                            lvl_slots.push(vec![Slot::Trivial]);
                        }
                    }
                    Ring::Zn(m) => {
                        let port = exponent_port_hom(m);
                        let mut s = Vec::new();
                        for comp in port.components {
                            let t = comp.target_modulus();
                            if t < 2 {
                                s.push(Slot::Trivial);
                            } else {
                                s.push(Slot::Factor { comp, target: next.len() });
                                next.push(Ring::Zn(Arc::new(factor_modulus(t).expect("t ≥ 2"))));
                            }
                        }
                        lvl_slots.push(s);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            levels.push(next);
            slots.push(lvl_slots);
        }
        Ok(Arc::new(Tower { levels, slots }))
    }

    pub fn base(&self) -> &Ring {
        &self.levels[0][0]
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn atoms(&self, level: usize) -> &[Ring] {
        &self.levels[level]
    }

    fn level(&self, level: usize) -> Result<&[Ring], ExprError> {
        self.levels
            .get(level)
            .map(Vec::as_slice)
            .ok_or(ExprError::Level { level, depth: self.depth() })
    }

    /// Embed the integer `k` at `level`.
    pub fn int(&self, level: usize, k: i64) -> Val {
        self.levels[level].iter().map(|r| r.from_int(k)).collect()
    }

    pub fn add(&self, level: usize, a: &Val, b: &Val) -> Val {
        self.levels[level]
            .iter()
            .zip(a.iter().zip(b))
            .map(|(r, (&x, &y))| r.add(x, y))
            .collect()
    }

    pub fn mul(&self, level: usize, a: &Val, b: &Val) -> Val {
        self.levels[level]
            .iter()
            .zip(a.iter().zip(b))
            .map(|(r, (&x, &y))| r.mul(x, y))
            .collect()
    }

    pub fn pow_int(&self, level: usize, a: &Val, k: u64) -> Val {
        self.levels[level].iter().zip(a).map(|(r, &x)| r.pow(x, k)).collect()
    }

    pub fn is_unit(&self, level: usize, a: &Val) -> bool {
        self.levels[level].iter().zip(a).all(|(r, &x)| r.is_unit(x))
    }

    /// Move a value from `level` into `level + 1`.
    pub fn port(&self, level: usize, v: &Val) -> Result<Val, ExprError> {
        let slots = self.slots.get(level).ok_or(ExprError::Level {
            level: level + 1,
            depth: self.depth(),
        })?;
        let mut out: Val = smallvec![0; self.levels[level + 1].len()];
        for ((atom, atom_slots), &x) in self.levels[level].iter().zip(slots).zip(v) {
            for slot in atom_slots {
                match slot {
                    Slot::FieldLog { target } => {
                        let f = atom.field().expect("field slot on field atom");
                        out[*target] = f.discrete_log(x).map_err(|_| ExprError::PortOfZero)?;
                    }
                    Slot::Factor { comp, target } => {
                        out[*target] = comp.apply(x).ok_or(ExprError::PortOfZero)?;
                    }
                    Slot::Trivial => {}
                }
            }
        }
        Ok(out)
    }

    /// `base^exp` where `exp` lives one level up; the base must be a unit.
    pub fn pow_val(&self, level: usize, base: &Val, exp: &Val) -> Result<Val, ExprError> {
        if !self.is_unit(level, base) {
            return Err(ExprError::InvertibilityViolation { assignment: Vec::new() });
        }
        let slots = self.slots.get(level).ok_or(ExprError::Level {
            level: level + 1,
            depth: self.depth(),
        })?;
        let mut out = Val::new();
        for ((atom, atom_slots), &b) in self.levels[level].iter().zip(slots).zip(base) {
            match atom {
                Ring::Gf(f) => {
                    let v = match atom_slots[0] {
                        Slot::FieldLog { target } => f.pow(b, exp[target]),
                        _ => b,
                    };
                    out.push(v);
                }
                Ring::Zn(m) => {
                    let parts: Vec<u64> = m
                        .factors()
                        .iter()
                        .zip(atom_slots)
                        .map(|(fac, slot)| {
                            let bi = b % fac.q;
                            match slot {
                                Slot::Factor { target, .. } => pow_mod(bi, exp[*target], fac.q),
                                _ => bi,
                            }
                        })
                        .collect();
                    out.push(m.crt_join(&parts).expect("reduced residues"));
                }
            }
        }
        Ok(out)
    }

    /// Check that `v` is a well-formed value at `level`.
    pub fn check_val(&self, level: usize, v: &Val) -> Result<(), ExprError> {
        let atoms = self.level(level)?;
        if atoms.len() != v.len() || atoms.iter().zip(v).any(|(r, &x)| x >= r.size()) {
            return Err(ExprError::BadConst { level });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use smallvec::smallvec;

    #[test]
    fn field_tower_shapes() {
        let t = Tower::new(Ring::gf(2, 3).unwrap(), 3).unwrap();
        assert_eq!(t.depth(), 3);
        assert_eq!(t.atoms(1), &[Ring::zn(7).unwrap()]);
        assert_eq!(t.atoms(2), &[Ring::zn(6).unwrap()]);
        let t16 = Tower::new(Ring::gf(2, 4).unwrap(), 3).unwrap();
        assert_eq!(t16.atoms(2).len(), 2);
    }

    #[test]
    fn ring_tower_ports() {
        let t = Tower::new(Ring::zn(9).unwrap(), 2).unwrap();
        assert_eq!(t.port(0, &smallvec![1]).unwrap().as_slice(), &[4]);
        let t12 = Tower::new(Ring::zn(12).unwrap(), 2).unwrap();
        assert_eq!(t12.atoms(1), &[Ring::zn(2).unwrap(), Ring::zn(2).unwrap()]);
        assert!(matches!(t12.port(0, &smallvec![3]), Err(ExprError::PortOfZero)));
    }

    #[test]
    fn pow_val_matches_naive() {
        for base in [Ring::zn(9).unwrap(), Ring::zn(12).unwrap(), Ring::gf(3, 2).unwrap()] {
            let t = Tower::new(base.clone(), 2).unwrap();
            for b in base.units() {
                let mut naive = 1;
                for k in 0..40u64 {
                    let e = t.int(1, k as i64);
                    assert_eq!(t.pow_val(0, &smallvec![b], &e).unwrap()[0], naive, "{base} {b} {k}");
                    naive = base.mul(naive, b);
                }
            }
        }
    }
}
