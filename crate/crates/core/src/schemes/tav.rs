use std::collections::BTreeMap;
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sig::{AuthTable, Claim};
use super::{SchemeError, SchemeParams};

/// Reservations a transaction stays valid for.
pub const DEFAULT_WINDOW: u64 = 64;

/// Consent for one extra padding message `ω′`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transaction {
    pub id: u64,
    pub omega_prime: Vec<u64>,
    /// Logical clock at reservation.
    pub issued: u64,
    /// Last clock value at which the transaction is valid.
    pub expires: u64,
    /// Stored in the clear; see the placeholder note in the docs.
    pub gist: String,
}

/// First failed predicate of an authentication claim.
#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Rejection {
    #[error("unknown-transaction")]
    UnknownTransaction,
    #[error("expired")]
    Expired,
    #[error("malformed")]
    Malformed,
    #[error("q-mismatch")]
    QMismatch,
    #[error("p-mismatch")]
    PMismatch,
    #[error("r-mismatch")]
    RMismatch,
    #[error("h-mismatch")]
    HMismatch,
}

/// Trusted authentication verifier: issues transactions and adjudicates claims.
///
/// The logical clock counts reservations. With a journal attached every reservation and
/// adjudication is appended as a `u32` little-endian length followed by a text record.
#[derive(Debug)]
pub struct Tav {
    params: SchemeParams,
    seed: u64,
    window: u64,
    clock: u64,
    txns: BTreeMap<u64, Transaction>,
    journal: Option<PathBuf>,
}

impl Tav {
    pub fn new(params: SchemeParams, seed: u64, window: u64) -> Self {
        Tav { params, seed, window, clock: 0, txns: BTreeMap::new(), journal: None }
    }

    /// Start a fresh journal at `path`.
    pub fn create(path: &Path, params: SchemeParams, seed: u64, window: u64) -> Result<Self, SchemeError> {
        File::create(path).map_err(io)?;
        let mut tav = Tav::new(params, seed, window);
        tav.journal = Some(path.to_path_buf());
        tav.append(&format!("init params={params} seed={seed} window={window}"))?;
        Ok(tav)
    }

    /// Replay a journal; every recorded `ω′` is re-derived and must match.
    pub fn open(path: &Path) -> Result<Self, SchemeError> {
        let mut bytes = Vec::new();
        File::open(path).map_err(io)?.read_to_end(&mut bytes).map_err(io)?;
        let records = read_records(&bytes)?;
        let mut it = records.iter();
        let init = it.next().ok_or_else(|| bad("empty journal"))?;
        let f = fields(init.strip_prefix("init ").ok_or_else(|| bad("missing init record"))?);
        let params: SchemeParams = get(&f, "params")?.parse()?;
        let seed = get(&f, "seed")?.parse().map_err(|_| bad("seed"))?;
        let window = get(&f, "window")?.parse().map_err(|_| bad("window"))?;
        let mut tav = Tav::new(params, seed, window);
        for r in it {
            if let Some(rest) = r.strip_prefix("reserve ") {
                let (head, gist) = rest.split_once(" gist=").unwrap_or((rest, ""));
                let f = fields(head);
                let txn = tav.issue(gist);
                if get(&f, "id")? != txn.id.to_string() || get(&f, "omega")? != join(&txn.omega_prime) {
                    return Err(bad("reservation does not match the TAV seed"));
                }
            } else if !r.starts_with("auth ") {
                return Err(bad("unknown record"));
            }
        }
        tav.journal = Some(path.to_path_buf());
        Ok(tav)
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn window(&self) -> u64 {
        self.window
    }

    pub fn transaction(&self, id: u64) -> Option<&Transaction> {
        self.txns.get(&id)
    }

    pub fn is_valid(&self, id: u64) -> bool {
        self.txns.get(&id).is_some_and(|t| self.clock <= t.expires)
    }

    fn issue(&mut self, gist: &str) -> Transaction {
        let id = self.clock + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(id);
        let q = self.params.q();
        let omega_prime = (0..self.params.big_k).map(|_| rng.gen_range(1..q)).collect();
        let txn = Transaction {
            id,
            omega_prime,
            issued: self.clock,
            expires: self.clock + self.window,
            gist: gist.to_string(),
        };
        self.clock += 1;
        self.txns.insert(id, txn.clone());
        txn
    }

    /// Issue a fresh `ω′ ∈ G^K` under a new transaction id.
    pub fn reserve(&mut self, gist: &str) -> Result<Transaction, SchemeError> {
        let txn = self.issue(gist);
        self.append(&format!("reserve id={} omega={} gist={}", txn.id, join(&txn.omega_prime), gist))?;
        Ok(txn)
    }

    /// Check, in order: transaction known, within its window, `Q(ω) = ω′`,
    /// `P(ε) = (F(x, ω), x)`, `R(z) = F(x, ω)`, `H(z, x, ω) = δ`.
    pub fn authenticate(&self, table: &AuthTable, claim: &Claim) -> Result<(), Rejection> {
        let txn = self.txns.get(&claim.txn).ok_or(Rejection::UnknownTransaction)?;
        if !self.is_valid(claim.txn) {
            return Err(Rejection::Expired);
        }
        table.check(claim, &txn.omega_prime)
    }

    /// [`Tav::authenticate`] plus a journal record of the verdict.
    pub fn adjudicate(&mut self, table: &AuthTable, claim: &Claim) -> Result<Result<(), Rejection>, SchemeError> {
        let verdict = self.authenticate(table, claim);
        let what = match &verdict {
            Ok(()) => "accept".to_string(),
            Err(r) => r.to_string(),
        };
        self.append(&format!("auth id={} result={what}", claim.txn))?;
        Ok(verdict)
    }

    fn append(&self, record: &str) -> Result<(), SchemeError> {
        let Some(path) = &self.journal else { return Ok(()) };
        let mut f = OpenOptions::new().append(true).open(path).map_err(io)?;
        let mut buf = (record.len() as u32).to_le_bytes().to_vec();
        buf.extend_from_slice(record.as_bytes());
        f.write_all(&buf).map_err(io)
    }
}

impl fmt::Display for Transaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "txn {} omega'={} valid through {}", self.id, join(&self.omega_prime), self.expires)
    }
}

pub(crate) fn read_records(bytes: &[u8]) -> Result<Vec<String>, SchemeError> {
    let mut out = Vec::new();
    let mut rest = bytes;
    while !rest.is_empty() {
        if rest.len() < 4 {
            return Err(bad("truncated length"));
        }
        let n = u32::from_le_bytes(rest[..4].try_into().expect("4 bytes")) as usize;
        let body = rest.get(4..4 + n).ok_or_else(|| bad("truncated record"))?;
        out.push(String::from_utf8(body.to_vec()).map_err(|_| bad("record is not UTF-8"))?);
        rest = &rest[4 + n..];
    }
    Ok(out)
}

fn join(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

fn fields(s: &str) -> Vec<(&str, &str)> {
    s.split_whitespace().filter_map(|t| t.split_once('=')).collect()
}

fn get<'a>(f: &[(&str, &'a str)], k: &str) -> Result<&'a str, SchemeError> {
    f.iter().find(|(a, _)| *a == k).map(|(_, v)| *v).ok_or_else(|| bad(k))
}

fn bad(what: &str) -> SchemeError {
    SchemeError::Journal(what.to_string())
}

fn io(e: std::io::Error) -> SchemeError {
    SchemeError::Journal(e.to_string())
}
