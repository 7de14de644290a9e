use std::collections::{BTreeMap, HashSet};

use crate::expr::Program;
use crate::keyio::{read_pkc_private, read_pkc_public, read_sig_auth, read_sig_private, read_sig_verify, Container, KeyIoError, KeyKind};
use crate::schemes::SchemeParams;

use super::{exhaustive_bijectivity, preimage_census, DomainGrid, OracleError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AuditError {
    #[error(transparent)]
    Key(#[from] KeyIoError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Named exhaustive counts for one key file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditReport {
    pub kind: KeyKind,
    pub counts: BTreeMap<String, u64>,
}

fn grid(params: &SchemeParams, arity: usize, shuffle: Option<u64>) -> Result<DomainGrid, AuditError> {
    let ring = params.ring().map_err(KeyIoError::from)?;
    let g = DomainGrid::units(&ring, arity)?;
    Ok(match shuffle {
        Some(s) => g.shuffled(s),
        None => g,
    })
}

fn image_size(p: &Program, g: &DomainGrid) -> Result<u64, AuditError> {
    Ok(exhaustive_bijectivity(|x: &[u64]| p.eval(x), g, None)?.distinct)
}

/// Run every certification that the file's contents allow and report the counts.
/// `shuffle` permutes every iteration order; the counts must not change.
pub fn audit_key(bytes: &[u8], shuffle: Option<u64>) -> Result<AuditReport, AuditError> {
    let kind = Container::from_bytes(bytes)?.kind;
    let mut counts = BTreeMap::new();
    let mut put = |k: &str, v: u64| {
        counts.insert(k.to_string(), v);
    };
    match kind {
        KeyKind::PkcPublic | KeyKind::PkcPrivate => {
            let public = read_pkc_public(bytes)?;
            let s = *public.params();
            let xg = grid(&s, s.mu, shuffle)?;
            let wg = grid(&s, s.kappa, shuffle)?;
            let mut injective = 0;
            let mut all = HashSet::new();
            for w in wg.iter() {
                let v = exhaustive_bijectivity(|x: &[u64]| public.encrypt(x, &w), &xg, None)?;
                injective += u64::from(v.is_injective());
                for x in xg.iter() {
                    all.insert(public.encrypt(&x, &w).map_err(KeyIoError::from)?);
                }
            }
            put("points", xg.size() * wg.size());
            put("pads", wg.size());
            put("pads_injective", injective);
            put("distinct_ciphertexts", all.len() as u64);
            if kind == KeyKind::PkcPrivate {
                let keys = read_pkc_private(bytes)?;
                let mut ok = 0;
                for p in xg.product(&wg)?.iter() {
                    let (x, w) = p.split_at(s.mu);
                    let eps = keys.public.encrypt(x, w).map_err(KeyIoError::from)?;
                    ok += u64::from(keys.private.decrypt(&eps, w).as_deref() == Ok(x));
                }
                put("roundtrip_ok", ok);
                let f = keys.private.hidden();
                let c = preimage_census(|p: &[u64]| f.eval(p), &xg, &wg, shuffle)?;
                put("census_min", c.min_count());
                put("census_max", c.max_count());
            }
        }
        KeyKind::SigVerify => {
            let v = read_sig_verify(bytes)?;
            let s = *v.params();
            let g = grid(&s, s.nu, shuffle)?;
            put("points", g.size());
            put("image", image_size(v.program(), &g)?);
            put("codomain", grid(&s, s.mu, None)?.size());
        }
        KeyKind::SigAuth => {
            let a = read_sig_auth(bytes)?;
            let s = a.params;
            for (name, p, arity, m) in [
                ("P", &a.p, s.nu, s.big_l + s.mu),
                ("Q", &a.q, s.kappa, s.big_k),
                ("R", &a.r, s.lambda, s.big_l),
            ] {
                put(&format!("{name}_image"), image_size(p, &grid(&s, arity, shuffle)?)?);
                put(&format!("{name}_codomain"), grid(&s, m, None)?.size());
            }
            let c = preimage_census(|p: &[u64]| a.f.eval(p), &grid(&s, s.mu, None)?, &grid(&s, s.kappa, None)?, shuffle)?;
            put("census_min", c.min_count());
            put("census_max", c.max_count());
        }
        KeyKind::SigPrivate => {
            let keys = read_sig_private(bytes)?;
            let s = *keys.params();
            for (name, m) in [('P', s.big_l + s.mu), ('Q', s.big_k), ('R', s.big_l)] {
                let inj = keys.injection(name).expect("named map");
                let pg = grid(&s, inj.nparams(), shuffle)?;
                let verified = inj.partition().verify(pg.iter()).map_err(|e| OracleError::Map {
                    at: Vec::new(),
                    msg: e.to_string(),
                })?;
                put(&format!("{name}_partition_points"), verified as u64);
                put(&format!("{name}_live_params"), inj.live_points(pg.iter()).len() as u64);
                let mut ok = 0;
                let full = keys.auth_table();
                let prog = match name {
                    'P' => &full.p,
                    'Q' => &full.q,
                    _ => &full.r,
                };
                let wg = grid(&s, m, shuffle)?;
                for w in wg.iter() {
                    let pre = keys.right_inverse(name, &w).map_err(KeyIoError::from)?;
                    ok += u64::from(prog.eval(&pre).ok().as_deref() == Some(w.as_slice()));
                }
                put(&format!("{name}_right_inverse_ok"), ok);
                put(&format!("{name}_codomain"), wg.size());
            }
        }
    }
    Ok(AuditReport { kind, counts })
}
