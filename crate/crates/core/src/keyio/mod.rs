//! Key-file container and the text forms of keys, vectors and claims.
//!
//! Layout: `MVMK`, version `u16`, kind `u8`, section count `u16`, then per section a
//! `u8` name length, the name, a `u32` body length and the body, and finally the SHA-256 of
//! everything before it. Integers are little-endian. Bodies are text.

use sha2::{Digest, Sha256};

use crate::expr::{ExprError, Program};
use crate::schemes::{
    pkc_keygen, sig_keygen, AuthTable, Claim, PkcKeyPair, PkcPublicKey, SchemeError, SchemeParams, SigKeySet,
    Signature, VerifyTable,
};

pub const MAGIC: &[u8; 4] = b"MVMK";
pub const VERSION: u16 = 1;
const CHECKSUM_LEN: usize = 32;

/// Section names that only private files may carry.
pub const PRIVATE_SECTIONS: &[&str] = &["seed"];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KeyIoError {
    #[error("not a key file (bad magic)")]
    BadMagic,
    #[error("format version {found} is not supported (expected {VERSION})")]
    VersionMismatch { found: u16 },
    #[error("file is truncated")]
    Truncated,
    #[error("checksum mismatch")]
    ChecksumMismatch,
    #[error("unknown key kind {0}")]
    BadKind(u8),
    #[error("expected a {expected} file, found {found}")]
    WrongKind { expected: KeyKind, found: KeyKind },
    #[error("file has no private section")]
    NoPrivateSection,
    #[error("missing section {0:?}")]
    MissingSection(String),
    #[error("stored tables do not match the regenerated key")]
    KeyMismatch,
    #[error("malformed {what}: {detail}")]
    Body { what: &'static str, detail: String },
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

impl From<ExprError> for KeyIoError {
    fn from(e: ExprError) -> Self {
        KeyIoError::Body { what: "expression", detail: e.to_string() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KeyKind {
    PkcPublic = 1,
    PkcPrivate = 2,
    SigVerify = 3,
    SigAuth = 4,
    SigPrivate = 5,
}

impl KeyKind {
    fn from_u8(b: u8) -> Result<Self, KeyIoError> {
        Ok(match b {
            1 => KeyKind::PkcPublic,
            2 => KeyKind::PkcPrivate,
            3 => KeyKind::SigVerify,
            4 => KeyKind::SigAuth,
            5 => KeyKind::SigPrivate,
            _ => return Err(KeyIoError::BadKind(b)),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            KeyKind::PkcPublic => "pkc-public",
            KeyKind::PkcPrivate => "pkc-private",
            KeyKind::SigVerify => "sig-verify",
            KeyKind::SigAuth => "sig-auth",
            KeyKind::SigPrivate => "sig-private",
        }
    }

    pub fn is_private(self) -> bool {
        matches!(self, KeyKind::PkcPrivate | KeyKind::SigPrivate)
    }
}

impl std::fmt::Display for KeyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Container {
    pub kind: KeyKind,
    pub sections: Vec<(String, String)>,
}

struct Cursor<'a>(&'a [u8]);

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], KeyIoError> {
        if self.0.len() < n {
            return Err(KeyIoError::Truncated);
        }
        let (a, b) = self.0.split_at(n);
        self.0 = b;
        Ok(a)
    }

    fn u8(&mut self) -> Result<u8, KeyIoError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, KeyIoError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32, KeyIoError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}

impl Container {
    pub fn new(kind: KeyKind) -> Self {
        Container { kind, sections: Vec::new() }
    }

    pub fn with(mut self, name: &str, body: impl Into<String>) -> Self {
        self.sections.push((name.to_string(), body.into()));
        self
    }

    pub fn section(&self, name: &str) -> Result<&str, KeyIoError> {
        self.sections
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, b)| b.as_str())
            .ok_or_else(|| KeyIoError::MissingSection(name.to_string()))
    }

    pub fn has_private_sections(&self) -> bool {
        self.sections.iter().any(|(n, _)| PRIVATE_SECTIONS.contains(&n.as_str()))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = MAGIC.to_vec();
        out.extend(VERSION.to_le_bytes());
        out.push(self.kind as u8);
        out.extend((self.sections.len() as u16).to_le_bytes());
        for (name, body) in &self.sections {
            out.push(name.len() as u8);
            out.extend(name.as_bytes());
            out.extend((body.len() as u32).to_le_bytes());
            out.extend(body.as_bytes());
        }
        let sum = Sha256::digest(&out);
        out.extend(sum);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, KeyIoError> {
        let mut c = Cursor(bytes);
        if c.take(4).map_err(|_| KeyIoError::BadMagic)? != MAGIC {
            return Err(KeyIoError::BadMagic);
        }
        let found = c.u16()?;
        if found != VERSION {
            return Err(KeyIoError::VersionMismatch { found });
        }
        let kind_byte = c.u8()?;
        let n = c.u16()?;
        let mut sections = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let len = c.u8()? as usize;
            let name = c.take(len)?;
            let len = c.u32()? as usize;
            let body = c.take(len)?;
            sections.push((name.to_vec(), body.to_vec()));
        }
        let sum = c.take(CHECKSUM_LEN)?;
        let covered = &bytes[..bytes.len() - c.0.len() - CHECKSUM_LEN];
        if Sha256::digest(covered).as_slice() != sum {
            return Err(KeyIoError::ChecksumMismatch);
        }
        if !c.0.is_empty() {
            return Err(KeyIoError::Body { what: "container", detail: "trailing bytes".into() });
        }
        let kind = KeyKind::from_u8(kind_byte)?;
        let text = |b: Vec<u8>| {
            String::from_utf8(b).map_err(|_| KeyIoError::Body { what: "section", detail: "not UTF-8".into() })
        };
        let sections = sections
            .into_iter()
            .map(|(n, b)| Ok((text(n)?, text(b)?)))
            .collect::<Result<_, KeyIoError>>()?;
        Ok(Container { kind, sections })
    }

    fn expect(bytes: &[u8], kinds: &[KeyKind]) -> Result<Self, KeyIoError> {
        let c = Container::from_bytes(bytes)?;
        if !kinds.contains(&c.kind) {
            return Err(KeyIoError::WrongKind { expected: kinds[0], found: c.kind });
        }
        Ok(c)
    }

    fn params(&self) -> Result<SchemeParams, KeyIoError> {
        Ok(self.section("params")?.parse()?)
    }

    fn program(&self, name: &str, params: &SchemeParams) -> Result<Program, KeyIoError> {
        Ok(Program::parse(self.section(name)?, params.tower()?)?)
    }

    fn seed(&self) -> Result<u64, KeyIoError> {
        if !self.has_private_sections() {
            return Err(KeyIoError::NoPrivateSection);
        }
        self.section("seed")?
            .trim()
            .parse()
            .map_err(|_| KeyIoError::Body { what: "seed", detail: self.section("seed").unwrap_or("").into() })
    }
}

pub fn write_pkc_public(key: &PkcPublicKey) -> Vec<u8> {
    Container::new(KeyKind::PkcPublic)
        .with("params", key.params().to_string())
        .with("lookup", key.lookup().to_text())
        .to_bytes()
}

/// Accepts public files and the public part of private files.
pub fn read_pkc_public(bytes: &[u8]) -> Result<PkcPublicKey, KeyIoError> {
    let c = Container::expect(bytes, &[KeyKind::PkcPublic, KeyKind::PkcPrivate])?;
    let params = c.params()?;
    Ok(PkcPublicKey::new(params, c.program("lookup", &params)?)?)
}

pub fn write_pkc_private(keys: &PkcKeyPair) -> Vec<u8> {
    Container::new(KeyKind::PkcPrivate)
        .with("params", keys.private.params().to_string())
        .with("seed", keys.private.seed().to_string())
        .with("lookup", keys.public.lookup().to_text())
        .to_bytes()
}

/// Regenerates the key pair from the stored seed and checks it against the stored table.
pub fn read_pkc_private(bytes: &[u8]) -> Result<PkcKeyPair, KeyIoError> {
    let c = Container::from_bytes(bytes)?;
    let seed = c.seed()?;
    if c.kind != KeyKind::PkcPrivate {
        return Err(KeyIoError::WrongKind { expected: KeyKind::PkcPrivate, found: c.kind });
    }
    let keys = pkc_keygen(c.params()?, seed)?;
    if keys.public.lookup().to_text() != c.section("lookup")? {
        return Err(KeyIoError::KeyMismatch);
    }
    Ok(keys)
}

pub fn write_sig_verify(table: &VerifyTable) -> Vec<u8> {
    Container::new(KeyKind::SigVerify)
        .with("params", table.params().to_string())
        .with("verify", table.program().to_text())
        .to_bytes()
}

pub fn read_sig_verify(bytes: &[u8]) -> Result<VerifyTable, KeyIoError> {
    let c = Container::expect(bytes, &[KeyKind::SigVerify])?;
    let params = c.params()?;
    Ok(VerifyTable::new(params, c.program("verify", &params)?)?)
}

const AUTH_SECTIONS: [&str; 5] = ["P", "F", "Q", "R", "H"];

pub fn write_sig_auth(table: &AuthTable) -> Vec<u8> {
    let progs = [&table.p, &table.f, &table.q, &table.r, &table.h];
    AUTH_SECTIONS
        .iter()
        .zip(progs)
        .fold(Container::new(KeyKind::SigAuth).with("params", table.params.to_string()), |c, (n, p)| {
            c.with(n, p.to_text())
        })
        .to_bytes()
}

pub fn read_sig_auth(bytes: &[u8]) -> Result<AuthTable, KeyIoError> {
    let c = Container::expect(bytes, &[KeyKind::SigAuth])?;
    let params = c.params()?;
    let [p, f, q, r, h] = AUTH_SECTIONS.map(|n| c.program(n, &params));
    Ok(AuthTable::new(params, p?, f?, q?, r?, h?)?)
}

pub fn write_sig_private(keys: &SigKeySet) -> Vec<u8> {
    Container::new(KeyKind::SigPrivate)
        .with("params", keys.params().to_string())
        .with("seed", keys.seed().to_string())
        .with("verify", keys.verify_table().program().to_text())
        .to_bytes()
}

pub fn read_sig_private(bytes: &[u8]) -> Result<SigKeySet, KeyIoError> {
    let c = Container::from_bytes(bytes)?;
    let seed = c.seed()?;
    if c.kind != KeyKind::SigPrivate {
        return Err(KeyIoError::WrongKind { expected: KeyKind::SigPrivate, found: c.kind });
    }
    let keys = sig_keygen(c.params()?, seed)?;
    if keys.verify_table().program().to_text() != c.section("verify")? {
        return Err(KeyIoError::KeyMismatch);
    }
    Ok(keys)
}

/// Comma-separated decimal residues.
pub fn format_vector(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

pub fn parse_vector(s: &str) -> Result<Vec<u64>, KeyIoError> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| KeyIoError::Body { what: "vector", detail: s.to_string() }))
        .collect()
}

/// One line: `claim txn=.. x=.. eps=.. z=.. delta=.. omega=..`.
pub fn format_claim(c: &Claim) -> String {
    let s = &c.signature;
    format!(
        "claim txn={} x={} eps={} z={} delta={} omega={}",
        c.txn,
        format_vector(&c.x),
        format_vector(&s.eps),
        format_vector(&s.z),
        format_vector(&s.delta),
        format_vector(&s.omega)
    )
}

pub fn parse_claim(text: &str) -> Result<Claim, KeyIoError> {
    let bad = || KeyIoError::Body { what: "claim", detail: text.trim().to_string() };
    let rest = text.trim().strip_prefix("claim").ok_or_else(bad)?;
    let fields: Vec<(&str, &str)> = rest.split_whitespace().filter_map(|t| t.split_once('=')).collect();
    let get = |k: &str| fields.iter().find(|(a, _)| *a == k).map(|(_, v)| *v).ok_or_else(bad);
    Ok(Claim {
        txn: get("txn")?.parse().map_err(|_| bad())?,
        x: parse_vector(get("x")?)?,
        signature: Signature {
            eps: parse_vector(get("eps")?)?,
            z: parse_vector(get("z")?)?,
            delta: parse_vector(get("delta")?)?,
            omega: parse_vector(get("omega")?)?,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pkc() -> PkcKeyPair {
        pkc_keygen(SchemeParams::pkc(2, 3, 2, 3, 1).unwrap(), 5).unwrap()
    }

    #[test]
    fn container_round_trip_and_errors() {
        let c = Container::new(KeyKind::SigAuth).with("a", "1").with("b", "");
        let bytes = c.to_bytes();
        assert_eq!(Container::from_bytes(&bytes).unwrap(), c);
        assert_eq!(Container::from_bytes(&bytes[..bytes.len() - 1]), Err(KeyIoError::Truncated));
        assert_eq!(Container::from_bytes(b"XXXX"), Err(KeyIoError::BadMagic));
        let mut v = bytes.clone();
        v[4] = 9;
        assert_eq!(Container::from_bytes(&v), Err(KeyIoError::VersionMismatch { found: 9 }));
        let mut v = bytes.clone();
        v[15] ^= 1;
        assert_eq!(Container::from_bytes(&v), Err(KeyIoError::ChecksumMismatch));
    }

    #[test]
    fn pkc_files() {
        let keys = pkc();
        let public = write_pkc_public(&keys.public);
        let private = write_pkc_private(&keys);
        let back = read_pkc_public(&public).unwrap();
        assert_eq!(write_pkc_public(&back), public);
        assert_eq!(read_pkc_public(&private).unwrap(), keys.public);
        assert_eq!(write_pkc_private(&read_pkc_private(&private).unwrap()), private);
        assert_eq!(read_pkc_private(&public).unwrap_err(), KeyIoError::NoPrivateSection);
        assert!(!Container::from_bytes(&public).unwrap().has_private_sections());
        let forged = Container::from_bytes(&private).unwrap();
        let forged = Container {
            sections: forged.sections.into_iter().map(|(n, b)| if n == "seed" { (n, "6".into()) } else { (n, b) }).collect(),
            ..forged
        };
        assert_eq!(read_pkc_private(&forged.to_bytes()).unwrap_err(), KeyIoError::KeyMismatch);
    }

    #[test]
    fn signature_files_and_claims() {
        let params = SchemeParams::signature(2, 3, 1, 3, 2, 2, 1, 1, 1).unwrap();
        let keys = sig_keygen(params, 3).unwrap();
        let v = write_sig_verify(&keys.verify_table());
        let a = write_sig_auth(&keys.auth_table());
        let s = write_sig_private(&keys);
        assert_eq!(write_sig_verify(&read_sig_verify(&v).unwrap()), v);
        assert_eq!(write_sig_auth(&read_sig_auth(&a).unwrap()), a);
        assert_eq!(write_sig_private(&read_sig_private(&s).unwrap()), s);
        for f in [&v, &a] {
            assert!(!Container::from_bytes(f).unwrap().has_private_sections());
        }
        assert_eq!(read_sig_private(&v).unwrap_err(), KeyIoError::NoPrivateSection);
        let claim = Claim {
            txn: 4,
            x: vec![3],
            signature: Signature { eps: vec![1, 2, 3], z: vec![4, 5], delta: vec![6], omega: vec![7, 1] },
        };
        assert_eq!(parse_claim(&format_claim(&claim)).unwrap(), claim);
    }
}
