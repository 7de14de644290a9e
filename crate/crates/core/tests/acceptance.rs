//! Acceptance suite: one PASS/FAIL line per criterion, exhaustive at desk scale.
//!
//! Every check compares library output against an independent computation in this file
//! (direct modular arithmetic, exhaustive enumeration, or the brute-force oracle).

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use towerkey::algebra::factor_modulus;
use towerkey::expr::{Expr, ProgramBuilder, Tower};
use towerkey::keyio::{write_pkc_private, write_pkc_public, write_sig_auth, write_sig_private, write_sig_verify};
use towerkey::oracle::{audit_key, brute_force_invert, DomainGrid};
use towerkey::parametric::{
    default_sigma, parametric_permutation_matrix, partition_from_discriminator, partition_zpl, random_injection,
    AffineHybrid, ExpParam, FactorKind, MonomialHybrid, ParametricMatrix, PartitionOfUnity, TriangularMap,
};
use towerkey::permgen::{
    binomial_permutation, hensel_bijection, hybrid_perm_method1, linearized_permutation, perm_poly_zp_method1,
    perm_poly_zp_method2, power_permutation, scaled_power, subgroup_bijection, Bijection, Domain, HenselInverter,
    UniFn,
};
use towerkey::poly::{is_bijective_mod_pl, lagrange_interpolate, Poly};
use towerkey::schemes::{pkc_keygen, sig_keygen, Claim, Rejection, SchemeError, SchemeParams, Tav};
use towerkey::Ring;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Horner evaluation of integer coefficients modulo `m`.
fn eval_mod(coeffs: &[u64], x: u64, m: u64) -> u64 {
    coeffs.iter().rev().fold(0u128, |acc, &c| (acc * x as u128 + c as u128) % m as u128) as u64
}

fn distinct_mod(coeffs: &[u64], m: u64) -> bool {
    let mut seen = vec![false; m as usize];
    (0..m).all(|x| !std::mem::replace(&mut seen[eval_mod(coeffs, x, m) as usize], true))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn crt_algebra() -> Outcome {
    let moduli = [12u64, 60, 360, 675, 97, 1001, 2310, 30030];
    let mut checks = 0u64;
    for n in moduli {
        let spec = factor_modulus(n).map_err(|e| e.to_string())?;
        let e = spec.idempotents();
        let qs: Vec<u64> = spec.factors().iter().map(|f| f.q).collect();
        ensure(qs.iter().product::<u64>() == n, || format!("n={n}: factors {qs:?}"))?;
        ensure(e.iter().fold(0, |s, &v| (s + v) % n) == 1 % n, || format!("n={n}: Σe_i ≠ 1"))?;
        for (i, &ei) in e.iter().enumerate() {
            ensure(ei * ei % n == ei, || format!("n={n}: e_{i}² ≠ e_{i}"))?;
            for (j, &qj) in qs.iter().enumerate() {
                let want = u64::from(i == j);
                ensure(ei % qj == want % qj, || format!("n={n}: e_{i} mod {qj} ≠ {want}"))?;
                if i != j {
                    ensure(ei * e[j] % n == 0, || format!("n={n}: e_{i}e_{j} ≠ 0"))?;
                }
            }
        }
        for x in 0..n {
            let parts = spec.crt_split(x);
            let direct: Vec<u64> = qs.iter().map(|q| x % q).collect();
            ensure(parts == direct, || format!("n={n}: split({x}) = {parts:?}"))?;
            ensure(spec.crt_join(&parts) == Ok(x), || format!("n={n}: join∘split({x}) ≠ {x}"))?;
            checks += 1;
        }
    }
    Ok(format!("{} moduli incl. 12,60,360,675; {checks} residues round-tripped, 0 mismatches (tolerance 0)", moduli.len()))
}

fn bijectivity_criterion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut total, mut bijective, mut cases) = (0u64, 0u64, 0u64);
    for p in [2u64, 3, 5, 7] {
        for l in 1..=4u32 {
            let m = p.pow(l);
            if m > 2401 {
                continue;
            }
            cases += 1;
            let ring = Ring::zn(m).map_err(|e| e.to_string())?;
            for k in 0..300 {
                let deg = rng.gen_range(0..=6);
                let mut c: Vec<u64> = (0..=deg).map(|_| rng.gen_range(0..m)).collect();
                if k >= 200 {
                    // a·x + p·r(x) + b with a a unit: bijective by construction.
                    c = c.iter().map(|v| v * p % m).collect();
                    c.resize(c.len().max(2), 0);
                    let a = loop {
                        let a = rng.gen_range(1..m);
                        if a % p != 0 {
                            break a;
                        }
                    };
                    c[1] = (c[1] + a) % m;
                    c[0] = rng.gen_range(0..m);
                }
                let f = Poly::new(ring.clone(), c.clone());
                let fast = is_bijective_mod_pl(&f, p, l);
                let slow = distinct_mod(&c, m);
                ensure(fast == slow, || format!("Z_{m}: {c:?} criterion={fast} exhaustive={slow}"))?;
                total += 1;
                bijective += u64::from(slow);
            }
        }
    }
    Ok(format!("{cases} (p,l) cases, {total} polynomials ({bijective} bijective), 100.00% agreement (required 100%)"))
}

fn zp_methods() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut trials = 0;
    for p in [3u64, 5, 7, 11] {
        let zp = Ring::zn(p).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let mut perm: Vec<u64> = (0..p).collect();
            perm.shuffle(&mut rng);
            let gvals: Vec<(u64, u64)> = (0..p).map(|x| (x, rng.gen_range(1..p))).collect();
            let g = lagrange_interpolate(&gvals, &zp).map_err(|e| e.to_string())?;
            let f1 = perm_poly_zp_method1(p, &perm, &g).map_err(|e| format!("method 1, p={p}: {e}"))?;
            let f2 = perm_poly_zp_method2(p, &perm, None).map_err(|e| format!("method 2, p={p}: {e}"))?;
            for (name, f) in [("method 1", &f1), ("method 2", &f2)] {
                let c = f.coeffs();
                let d: Vec<u64> = c.iter().enumerate().skip(1).map(|(k, &a)| (k as u64 % p) * a % p).collect();
                for i in 0..p {
                    ensure(eval_mod(c, i, p) == perm[i as usize], || format!("{name}, p={p}: f({i}) ≠ π({i})"))?;
                    ensure(eval_mod(&d, i, p) != 0, || format!("{name}, p={p}: f′({i}) ≡ 0"))?;
                    if name == "method 1" {
                        ensure(eval_mod(&d, i, p) == gvals[i as usize].1, || format!("method 1, p={p}: f′({i}) ≠ g({i})"))?;
                    }
                }
            }
            let deg = f2.degree().unwrap_or(0) as u64;
            ensure(deg <= 2 * p - 2, || format!("method 2, p={p}: degree {deg} > {}", 2 * p - 2))?;
            trials += 1;
        }
    }
    Ok(format!("{trials} random permutations over p ∈ {{3,5,7,11}}; f = π, f′ ≠ 0, deg ≤ 2p−2 in 100% of trials"))
}

fn hensel_inversion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut points = 0u64;
    for p in [3u64, 5] {
        for l in 2..=4u32 {
            let m = p.pow(l);
            let ring = Ring::zn(m).map_err(|e| e.to_string())?;
            let mut found = 0;
            while found < 20 {
                let deg = rng.gen_range(1..=6);
                let c: Vec<u64> = (0..=deg).map(|_| rng.gen_range(0..m)).collect();
                if !distinct_mod(&c, m) {
                    continue;
                }
                found += 1;
                let h = HenselInverter::new(Poly::new(ring.clone(), c.clone())).map_err(|e| format!("Z_{m} {c:?}: {e}"))?;
                for x in 0..m {
                    let y = eval_mod(&c, x, m);
                    let back = h.invert(y).map_err(|e| format!("Z_{m} {c:?} y={y}: {e}"))?;
                    ensure(back == x, || format!("Z_{m} {c:?}: f⁻¹(f({x})) = {back}"))?;
                    points += 1;
                }
            }
        }
    }
    Ok(format!("6 (p,l) cases × 20 bijective polynomials, {points} points, exact"))
}

fn check_partition(part: &PartitionOfUnity, ring: &Ring, points: &[Vec<u64>]) -> Result<(), String> {
    let disc = part.discriminator();
    for z in points {
        let l = part.indicator_values(z).map_err(|e| e.to_string())?;
        let sum = l.iter().fold(0, |s, &v| ring.add(s, v));
        ensure(sum == 1, || format!("{ring}: Σℓ_i({z:?}) = {sum}"))?;
        let v = disc.eval(z).map_err(|e| e.to_string())?[0];
        let vi = part.values().iter().position(|&w| w == v).ok_or(format!("{ring}: value {v} missing"))?;
        for (i, &a) in l.iter().enumerate() {
            ensure(ring.mul(a, a) == a, || format!("{ring}: ℓ_{i}² ≠ ℓ_{i} at {z:?}"))?;
            for (j, &b) in l.iter().enumerate() {
                ensure(i == j || ring.mul(a, b) == 0, || format!("{ring}: ℓ_{i}ℓ_{j} ≠ 0 at {z:?}"))?;
            }
            let member = part.groups()[i].contains(&vi);
            ensure(a == u64::from(member), || format!("{ring}: ℓ_{i}({z:?}) = {a}, member = {member}"))?;
        }
    }
    Ok(())
}

fn partitions() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let fields = [
        (3, 1), (5, 1), (7, 1), (2, 2), (2, 3), (3, 2), (2, 4), (17, 1), (5, 2), (3, 3), (2, 5),
        (7, 2), (2, 6), (5, 3), (2, 7), (3, 5), (7, 3), (2, 8), (2, 9), (509, 1),
    ];
    let (mut parts, mut points) = (0u64, 0u64);
    for (p, n) in fields {
        let ring = Ring::gf(p, n).map_err(|e| e.to_string())?;
        let q = ring.size();
        let tower = Tower::new(ring.clone(), 1).map_err(|e| e.to_string())?;
        let all: Vec<Vec<u64>> = ring.elements().map(|x| vec![x]).collect();
        let mut discs = Vec::new();
        for (r, _) in factor_modulus(q - 1).map_err(|e| e.to_string())?.factors().iter().map(|f| (f.p, f.l)) {
            discs.push(Expr::pow_int(Expr::var(0), (q - 1) / r));
        }
        for _ in 0..3 {
            let terms = (0..=rng.gen_range(1..=4usize))
                .map(|k| Expr::mul2(Expr::scalar(rng.gen_range(0..q)), Expr::pow_int(Expr::var(0), k as u64)))
                .collect();
            discs.push(Expr::sum(0, terms, &tower));
        }
        for d in discs {
            let prog = ProgramBuilder::new(tower.clone(), 1).finish(vec![d]).map_err(|e| e.to_string())?;
            let part = partition_from_discriminator(prog, &ring).map_err(|e| e.to_string())?;
            check_partition(&part, &ring, &all)?;
            let k = part.num_classes();
            if k > 1 {
                let assign: Vec<usize> = (0..part.values().len()).map(|i| i % 2).collect();
                let coarse = part.coarsen(&assign, 2).map_err(|e| e.to_string())?;
                check_partition(&coarse, &ring, &all)?;
                parts += 1;
                points += q;
            }
            parts += 1;
            points += q;
        }
    }
    let mut zpl = 0;
    for p in [2u64, 3, 5, 7, 11, 13, 17] {
        for l in 1..=8u32 {
            let m = p.pow(l);
            if m > 343 {
                break;
            }
            let ring = Ring::zn(m).map_err(|e| e.to_string())?;
            let all: Vec<Vec<u64>> = (0..m).map(|x| vec![x]).collect();
            for s in (1..p).filter(|s| (p - 1) % s == 0) {
                let part = partition_zpl(p, l, s).map_err(|e| format!("Z_{m}, s={s}: {e}"))?;
                check_partition(&part, &ring, &all)?;
                let vals = part.values();
                for (i, &a) in vals.iter().enumerate() {
                    for &b in &vals[i + 1..] {
                        ensure(gcd((a + m - b) % m, m) == 1, || format!("Z_{m}, s={s}: {a} − {b} is not a unit"))?;
                    }
                }
                zpl += 1;
                points += m;
            }
        }
    }
    Ok(format!("{parts} field partitions (q ≤ 512) and {zpl} Z_{{p^l}} partitions (p^l ≤ 343), {points} points, exact"))
}

/// `M(z)` as a 0/1 matrix with exactly one 1 in every row and column.
fn is_permutation_pattern(rows: &[Vec<u64>]) -> bool {
    let m = rows.len();
    rows.iter().all(|r| r.iter().all(|&v| v <= 1) && r.iter().sum::<u64>() == 1)
        && (0..m).all(|j| rows.iter().map(|r| r[j]).sum::<u64>() == 1)
}

fn check_matrix(mat: &ParametricMatrix, ring: &Ring, z: &[u64]) -> Result<(), String> {
    let m = mat.dim();
    let inputs = DomainGrid::full(ring, m).map_err(|e| e.to_string())?;
    let mut seen = HashSet::new();
    for x in inputs.iter() {
        ensure(seen.insert(mat.apply(z, &x).map_err(|e| e.to_string())?), || format!("M({z:?}) is singular"))?;
    }
    for f in mat.factors() {
        if f.kind() == FactorKind::Permutation {
            let flat = f.program().eval(z).map_err(|e| e.to_string())?;
            let rows: Vec<Vec<u64>> = flat.chunks(m).map(<[u64]>::to_vec).collect();
            ensure(is_permutation_pattern(&rows), || format!("permutation factor at {z:?}: {rows:?}"))?;
        }
    }
    Ok(())
}

fn parametric_maps() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let shapes = [(1usize, 1usize), (1, 2), (2, 1), (2, 2), (1, 3)];
    let (mut maps, mut points, mut matrices) = (0u64, 0u64, 0u64);
    for (p, n, domain) in [(7u64, 1u32, Domain::All), (2, 3, Domain::Units)] {
        let ring = Ring::gf(p, n).map_err(|e| e.to_string())?;
        let tower = Tower::new(ring.clone(), 2).map_err(|e| e.to_string())?;
        let vals = domain.elements(&ring);
        for t in 0..10 {
            let (l, m) = shapes[t % shapes.len()];
            let inj = random_injection(&mut rng, &tower, l, m, domain, |_, _| true).map_err(|e| e.to_string())?;
            let zs = DomainGrid::power(vals.clone(), l).map_err(|e| e.to_string())?;
            let xs = DomainGrid::power(vals.clone(), m).map_err(|e| e.to_string())?;
            ensure(zs.size() * xs.size() <= 1 << 16, || "grid above 2^16".into())?;
            for z in zs.iter() {
                for x in xs.iter() {
                    let y = inj.forward(&z, &x).map_err(|e| e.to_string())?;
                    let back = inj.inverse(&z, &y).map_err(|e| format!("{ring} z={z:?} y={y:?}: {e}"))?;
                    ensure(back == x, || format!("{ring}: η⁻¹(z; η(z; {x:?})) = {back:?}"))?;
                    points += 1;
                }
                for c in inj.classes() {
                    check_matrix(&c.matrix, &ring, &z)?;
                    matrices += 1;
                }
            }
            let k = inj.partition().num_classes();
            let mut f1: Vec<usize> = (0..k).collect();
            let mut f2 = f1.clone();
            let mut h = f1.clone();
            f1.shuffle(&mut rng);
            f2.shuffle(&mut rng);
            h.shuffle(&mut rng);
            let pm = parametric_permutation_matrix(inj.partition(), &default_sigma(&f1, &f2, &h)).map_err(|e| e.to_string())?;
            for z in zs.iter() {
                let rows = pm.eval(&z).map_err(|e| e.to_string())?;
                ensure(is_permutation_pattern(&rows), || format!("σ-matrix at {z:?}: {rows:?}"))?;
                matrices += 1;
            }
            maps += 1;
        }
    }
    Ok(format!("{maps} injections over GF(7) and GF(8)*, {points} round trips, {matrices} matrix evaluations invertible, exact"))
}

fn triangular() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut points = 0u64;
    for (p, n) in [(5u64, 1u32), (2, 3)] {
        let ring = Ring::gf(p, n).map_err(|e| e.to_string())?;
        let tower = Tower::new(ring.clone(), 2).map_err(|e| e.to_string())?;
        for m in [2usize, 3] {
            for _ in 0..5 {
                let map = TriangularMap::random(&mut rng, tower.clone(), m, |_, _| true).map_err(|e| e.to_string())?;
                let grid = DomainGrid::units(&ring, m).map_err(|e| e.to_string())?;
                let mut seen = HashSet::new();
                for x in grid.iter() {
                    let y = map.forward(&x).map_err(|e| e.to_string())?;
                    ensure(seen.insert(y.clone()), || format!("{ring}, m={m}: collision at {x:?}"))?;
                    ensure(map.inverse(&y).as_ref() == Ok(&x), || format!("{ring}, m={m}: inverse fails at {x:?}"))?;
                    points += 1;
                }
            }
        }
    }
    Ok(format!("20 maps, m ∈ {{2,3}} over GF(5)* and GF(8)*, {points} grid points round-tripped, exact"))
}

fn pkc_end_to_end() -> Outcome {
    let params = SchemeParams::pkc(2, 3, 2, 3, 1).map_err(|e| e.to_string())?;
    let keys = pkc_keygen(params, 2024).map_err(|e| e.to_string())?;
    let (mut honest, mut tampered, mut inversion, mut integrity, mut recovered) = (0u64, 0u64, 0u64, 0u64, 0u64);
    for x0 in 1..8 {
        for x1 in 1..8 {
            for w in 1..8 {
                let x = [x0, x1];
                let eps = keys.public.encrypt(&x, &[w]).map_err(|e| e.to_string())?;
                let got = keys.private.decrypt(&eps, &[w]).map_err(|e| format!("x={x:?} ω={w}: {e}"))?;
                ensure(got == x, || format!("decrypt(encrypt({x:?}, {w})) = {got:?}"))?;
                honest += 1;
                for i in 0..3 {
                    for v in 0..8 {
                        if v == eps[i] {
                            continue;
                        }
                        let mut bad = eps.clone();
                        bad[i] = v;
                        tampered += 1;
                        match keys.private.decrypt(&bad, &[w]) {
                            Err(SchemeError::InversionFailure) => inversion += 1,
                            Err(SchemeError::IntegrityFailure) => integrity += 1,
                            Ok(y) if y == x => recovered += 1,
                            Ok(y) => return Err(format!("tampered {bad:?} (from {eps:?}) silently decrypts to {y:?}")),
                            Err(e) => return Err(e.to_string()),
                        }
                    }
                }
            }
        }
    }
    Ok(format!(
        "{honest}/343 round trips; {tampered} single-component tamperings: {inversion} inversion, {integrity} integrity, {recovered} flagged-correct, 0 silent"
    ))
}

fn signature_end_to_end() -> Outcome {
    let params = SchemeParams::signature(2, 3, 1, 3, 2, 2, 1, 1, 1).map_err(|e| e.to_string())?;
    let mut keys = sig_keygen(params, 2024).map_err(|e| e.to_string())?;
    let verify = keys.verify_table();
    let auth = keys.auth_table();
    let mut tav = Tav::new(params, 77, 64);
    let omegas = DomainGrid::units(&params.ring().map_err(|e| e.to_string())?, params.kappa).map_err(|e| e.to_string())?;
    let (mut signed, mut rejected) = (0u64, 0u64);
    for x in 1..8u64 {
        let t = tav.reserve("").map_err(|e| e.to_string())?;
        let signature = keys.sign(&tav, &[x], t.id).map_err(|e| format!("x={x}: {e}"))?;
        let back = verify.verify(&signature.eps).map_err(|e| e.to_string())?;
        ensure(back == [x], || format!("verify recovers {back:?} for x={x}"))?;
        let claim = Claim { signature, x: vec![x], txn: t.id };
        ensure(tav.authenticate(&auth, &claim).is_ok(), || format!("honest claim for x={x} rejected"))?;
        signed += 1;
        for w in omegas.iter() {
            if auth.q.eval(&w).map_err(|e| e.to_string())? == t.omega_prime {
                continue;
            }
            let mut forged = claim.clone();
            forged.signature.omega = w.clone();
            let verdict = tav.authenticate(&auth, &forged);
            ensure(verdict == Err(Rejection::QMismatch), || format!("x={x} ω″={w:?}: {verdict:?}"))?;
            rejected += 1;
        }
    }
    Ok(format!("{signed}/7 plaintexts sign→verify→accept; {rejected} wrong-pad substitutions all rejected (q-mismatch)"))
}

fn check_inverse(name: &str, b: &Bijection) -> Result<u64, String> {
    let ring = b.ring().clone();
    let dom = b.domain().elements(&ring);
    let grid = DomainGrid::new(vec![dom.clone()]).map_err(|e| e.to_string())?;
    for &x in &dom {
        let y = b.forward(x).map_err(|e| e.to_string())?;
        let pre = brute_force_invert(|v: &[u64]| b.forward(v[0]).map(|o| vec![o]), &[y], &grid).map_err(|e| e.to_string())?;
        ensure(pre == vec![vec![x]], || format!("{name}: preimages of {y} are {pre:?}"))?;
        ensure(b.inverse(y) == Some(x), || format!("{name}: inverse({y}) = {:?}, brute force {x}", b.inverse(y)))?;
    }
    Ok(dom.len() as u64)
}

fn check_multi(
    name: &str,
    f: impl Fn(&[u64]) -> Result<Vec<u64>, String>,
    inv: impl Fn(&[u64]) -> Result<Vec<u64>, String>,
    grid: &DomainGrid,
) -> Result<u64, String> {
    for x in grid.iter() {
        let y = f(&x)?;
        let pre = brute_force_invert(&f, &y, grid).map_err(|e| e.to_string())?;
        ensure(pre == vec![x.clone()], || format!("{name}: preimages of {y:?} are {pre:?}"))?;
        ensure(inv(&y)? == x, || format!("{name}: closed-form inverse of {y:?} ≠ {x:?}"))?;
    }
    Ok(grid.size())
}

fn oracle_cross_validation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut maps = Vec::<(String, Bijection)>::new();
    let s = |e: towerkey::PermError| e.to_string();
    for (p, n) in [(7u64, 1u32), (2, 3), (3, 2), (2, 4), (5, 2)] {
        let ring = Ring::gf(p, n).map_err(|e| e.to_string())?;
        let q = ring.size();
        let r = (2..q).find(|&r| gcd(r, q - 1) == 1).unwrap_or(1);
        maps.push((format!("power GF({q}) r={r}"), power_permutation(&ring, r).map_err(s)?));
        maps.push((format!("scaled power GF({q})"), scaled_power(&ring, q - 1, r).map_err(s)?));
        let lin = (0..50)
            .map(|_| (0..n).map(|_| rng.gen_range(0..p.pow(n))).collect::<Vec<_>>())
            .find_map(|c| linearized_permutation(&ring, &c).ok());
        if let Some(b) = lin {
            maps.push((format!("linearized GF({q})"), b));
        }
        if n > 1 {
            if let Some(b) = (1..q).find_map(|a| binomial_permutation(&ring, 1, a).ok()) {
                maps.push((format!("binomial GF({q})"), b));
            }
        }
    }
    let gf16 = Ring::gf(2, 4).map_err(|e| e.to_string())?;
    let z15 = Ring::zn(15).map_err(|e| e.to_string())?;
    maps.push(("subgroup H_5 ⊂ GF(16)".into(), subgroup_bijection(&gf16, 3, 5, &Poly::from_ints(z15, &[1, 2])).map_err(s)?));
    let gf7 = Ring::gf(7, 1).map_err(|e| e.to_string())?;
    let t1 = Tower::new(gf7.clone(), 1).map_err(|e| e.to_string())?;
    let cube = ProgramBuilder::new(t1, 1).finish(vec![Expr::pow_int(Expr::var(0), 3)]).map_err(|e| e.to_string())?;
    let part = partition_from_discriminator(cube, &gf7).map_err(|e| e.to_string())?;
    let (c1, c3) = (part.class_of(&[1]).unwrap(), part.class_of(&[3]).unwrap());
    let mul = |a: u64| UniFn::Poly(Poly::monomial(gf7.clone(), a, 1));
    let (mut sigma, mut g, mut f) = ((0..3).collect::<Vec<_>>(), vec![mul(1); 3], vec![mul(1); 3]);
    sigma.swap(c1, c3);
    (g[c1], f[c1], g[c3], f[c3]) = (mul(3), mul(5), mul(5), mul(3));
    let eta = power_permutation(&gf7, 5).map_err(s)?;
    maps.push(("hybrid GF(7)".into(), hybrid_perm_method1(&part, &sigma, &g, &f, &eta).map_err(s)?));
    for (p, l) in [(3u64, 3u32), (5, 2), (2, 5)] {
        let m = p.pow(l);
        let ring = Ring::zn(m).map_err(|e| e.to_string())?;
        let c = loop {
            let c: Vec<u64> = (0..5).map(|_| rng.gen_range(0..m)).collect();
            if distinct_mod(&c, m) {
                break c;
            }
        };
        maps.push((format!("hensel Z_{m}"), hensel_bijection(Poly::new(ring, c)).map_err(s)?));
    }
    let mut points = 0;
    for (name, b) in &maps {
        points += check_inverse(name, b)?;
    }
    let mut multi = 0;
    let e = |e: towerkey::ParamError| e.to_string();
    for (p, n) in [(7u64, 1u32), (2, 3), (3, 2)] {
        let ring = Ring::gf(p, n).map_err(|e| e.to_string())?;
        let tower = Tower::new(ring.clone(), 2).map_err(|e| e.to_string())?;
        let a = AffineHybrid::random(&mut rng, &ring, 2).map_err(e)?;
        points += check_multi("affine hybrid", |x| a.forward(x).map_err(e), |y| a.inverse(y).map_err(e), &DomainGrid::full(&ring, 2).unwrap())?;
        let mh = MonomialHybrid::random(&mut rng, &ring, 2).map_err(e)?;
        points += check_multi("monomial hybrid", |x| mh.forward(x).map_err(e), |y| mh.inverse(y).map_err(e), &DomainGrid::units(&ring, 2).unwrap())?;
        let tm = TriangularMap::random(&mut rng, tower.clone(), 2, |_, _| true).map_err(e)?;
        points += check_multi("triangular", |x| tm.forward(x).map_err(e), |y| tm.inverse(y).map_err(e), &DomainGrid::units(&ring, 2).unwrap())?;
        let h = ExpParam::random(&mut rng, tower.clone(), 1, |_| true, true).map_err(e)?;
        for z in 1..ring.size() {
            points += check_multi(
                "exponential",
                |x| h.forward(&[z], x[0]).map(|v| vec![v]).map_err(e),
                |y| h.inverse(&[z], y[0]).map(|v| vec![v]).map_err(e),
                &DomainGrid::units(&ring, 1).unwrap(),
            )?;
        }
        let dom = if p == 7 { Domain::All } else { Domain::Units };
        let inj = random_injection(&mut rng, &tower, 1, 2, dom, |_, _| true).map_err(e)?;
        for z in dom.elements(&ring) {
            let grid = DomainGrid::power(dom.elements(&ring), 2).unwrap();
            points += check_multi("injection", |x| inj.forward(&[z], x).map_err(e), |y| inj.inverse(&[z], y).map_err(e), &grid)?;
        }
        multi += 5;
    }

    let mut audits = 0;
    let pkc = pkc_keygen(SchemeParams::pkc(2, 3, 2, 3, 1).unwrap(), 5).map_err(|e| e.to_string())?;
    let sig = sig_keygen(SchemeParams::signature(2, 3, 1, 3, 2, 2, 1, 1, 1).unwrap(), 5).map_err(|e| e.to_string())?;
    for bytes in [
        write_pkc_private(&pkc),
        write_pkc_public(&pkc.public),
        write_sig_verify(&sig.verify_table()),
        write_sig_auth(&sig.auth_table()),
        write_sig_private(&sig),
    ] {
        let base = audit_key(&bytes, None).map_err(|e| e.to_string())?;
        for seed in [1, 2, 3] {
            let other = audit_key(&bytes, Some(seed)).map_err(|e| e.to_string())?;
            ensure(other == base, || format!("{} audit differs under shuffle {seed}", base.kind.name()))?;
            audits += 1;
        }
    }
    Ok(format!(
        "{} univariate + {multi} multivariate inverses agree with brute force on {points} points; {audits} shuffled audits identical",
        maps.len()
    ))
}

fn determinism() -> Outcome {
    let pkc = SchemeParams::pkc(2, 3, 2, 3, 1).map_err(|e| e.to_string())?;
    let sig = SchemeParams::signature(2, 3, 1, 3, 2, 2, 1, 1, 1).map_err(|e| e.to_string())?;
    let mut files = 0;
    for seed in [0u64, 1, 42, 2024] {
        let run = || -> Result<Vec<Vec<u8>>, String> {
            let k = pkc_keygen(pkc, seed).map_err(|e| e.to_string())?;
            let s = sig_keygen(sig, seed).map_err(|e| e.to_string())?;
            Ok(vec![
                write_pkc_private(&k),
                write_pkc_public(&k.public),
                write_sig_private(&s),
                write_sig_verify(&s.verify_table()),
                write_sig_auth(&s.auth_table()),
            ])
        };
        let (a, b) = (run()?, run()?);
        ensure(a == b, || format!("seed {seed}: key files differ between runs"))?;
        files += a.len();
    }
    Ok(format!("{files} key files from 4 seeds byte-identical across two runs"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("CRT algebra", crt_algebra),
        ("bijectivity criterion mod p^l", bijectivity_criterion),
        ("Z_p permutation polynomials", zp_methods),
        ("Hensel inversion", hensel_inversion),
        ("partitions of unity", partitions),
        ("parametric maps", parametric_maps),
        ("triangular construction", triangular),
        ("PKC end-to-end", pkc_end_to_end),
        ("signature end-to-end", signature_end_to_end),
        ("oracle cross-validation", oracle_cross_validation),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
