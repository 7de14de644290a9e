//! `towerkey`: key generation, encryption, signatures and audits from the command line.
//!
//! Results go to stdout as one JSON object per line; diagnostics go to stderr.
//! Exit codes: 0 success, 1 rejection, 2 usage or input error, 3 inversion failure.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use towerkey::keyio::{self, format_claim, parse_claim, parse_vector};
use towerkey::oracle::audit_key;
use towerkey::schemes::{pkc_keygen, sig_keygen, Claim, SchemeError, SchemeParams, Tav, DEFAULT_WINDOW};

#[derive(Parser)]
#[command(name = "towerkey", version, about = "Multivariate public-key encryption and signatures over small finite fields")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate an encryption key pair.
    Keygen {
        /// e.g. `field=2^3,mu=2,nu=3,kappa=1`
        #[arg(long)]
        params: SchemeParams,
        #[arg(long)]
        seed: u64,
        /// Private key file; the public key goes to `<out>.pub` unless `--pub` is given.
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "pub")]
        public: Option<PathBuf>,
    },
    /// Encrypt a message with a public (or private) key file.
    Encrypt {
        #[arg(long)]
        key: PathBuf,
        /// Session pad `ω`, comma-separated decimal residues.
        #[arg(long, default_value = "")]
        pad: String,
        /// Message file (default: stdin); plain `1,2` or a JSON record.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decrypt and check integrity.
    Decrypt {
        #[arg(long)]
        key: PathBuf,
        #[arg(long, default_value = "")]
        pad: String,
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a signature key set: private file plus verification and authentication tables.
    SigKeygen {
        /// e.g. `field=2^3,mu=1,nu=3,lambda=2,kappa=2,K=1,L=1,tau=1`
        #[arg(long)]
        params: SchemeParams,
        #[arg(long)]
        seed: u64,
        /// Private key file; tables go to `<out>.verify` and `<out>.auth`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Reserve a transaction with the TAV, creating its journal if needed.
    Reserve {
        #[arg(long)]
        journal: PathBuf,
        /// Needed only when creating the journal.
        #[arg(long)]
        params: Option<SchemeParams>,
        /// TAV seed; needed only when creating the journal.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: u64,
        #[arg(long, default_value = "")]
        gist: String,
    },
    /// Sign a message under a reserved transaction; prints the claim.
    Sign {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        journal: PathBuf,
        #[arg(long)]
        txn: u64,
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover the message from a signature with the verification table.
    Verify {
        #[arg(long)]
        key: PathBuf,
        /// A claim line or a bare signature vector `ε`.
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// TAV adjudication of a claim against the authentication table.
    Authenticate {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        journal: PathBuf,
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// Exhaustive certification counts for any key file.
    Audit {
        #[arg(long)]
        key: PathBuf,
        /// Re-run in a shuffled iteration order.
        #[arg(long)]
        shuffle: Option<u64>,
    },
}

enum Failure {
    Reject(Value),
    Inversion(Value),
    Input(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

fn read_input(path: &Option<PathBuf>) -> Result<String, Failure> {
    match path {
        Some(p) => Ok(fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?),
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

/// A bare vector, or the first numeric array in a JSON record.
fn input_vector(text: &str) -> Result<Vec<u64>, Failure> {
    let t = text.trim();
    if !t.starts_with('{') {
        return Ok(parse_vector(t)?);
    }
    let v: Value = serde_json::from_str(t)?;
    let obj = v.as_object().ok_or("expected a JSON object")?;
    for key in ["ciphertext", "plaintext", "message", "signature"] {
        if let Some(Value::Array(a)) = obj.get(key) {
            return a.iter().map(|e| e.as_u64().ok_or_else(|| Failure::Input("non-integer element".into()))).collect();
        }
    }
    Err(Failure::Input("no vector field in record".into()))
}

/// A claim line, or a JSON record with a `claim` string.
fn input_claim(text: &str) -> Result<Claim, Failure> {
    let t = text.trim();
    if t.starts_with('{') {
        let v: Value = serde_json::from_str(t)?;
        let c = v.get("claim").and_then(Value::as_str).ok_or("record has no claim")?;
        return Ok(parse_claim(c)?);
    }
    Ok(parse_claim(t)?)
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn with_suffix(p: &Path, suffix: &str) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn run(cmd: Cmd) -> Result<Value, Failure> {
    match cmd {
        Cmd::Keygen { params, seed, out, public } => {
            let keys = pkc_keygen(params, seed)?;
            let public = public.unwrap_or_else(|| with_suffix(&out, ".pub"));
            write(&out, &keyio::write_pkc_private(&keys))?;
            write(&public, &keyio::write_pkc_public(&keys.public))?;
            Ok(json!({"cmd": "keygen", "params": params.to_string(), "private": out, "public": public}))
        }
        Cmd::Encrypt { key, pad, input, out } => {
            let public = keyio::read_pkc_public(&read(&key)?)?;
            let x = input_vector(&read_input(&input)?)?;
            let eps = public.encrypt(&x, &parse_vector(&pad)?)?;
            if let Some(o) = out {
                write(&o, keyio::format_vector(&eps).as_bytes())?;
            }
            Ok(json!({"cmd": "encrypt", "ciphertext": eps}))
        }
        Cmd::Decrypt { key, pad, input, out } => {
            let keys = keyio::read_pkc_private(&read(&key)?)?;
            let eps = input_vector(&read_input(&input)?)?;
            match keys.private.decrypt(&eps, &parse_vector(&pad)?) {
                Ok(x) => {
                    if let Some(o) = out {
                        write(&o, keyio::format_vector(&x).as_bytes())?;
                    }
                    Ok(json!({"cmd": "decrypt", "plaintext": x}))
                }
                Err(SchemeError::IntegrityFailure) => {
                    Err(Failure::Reject(json!({"cmd": "decrypt", "result": "integrity-failure"})))
                }
                Err(SchemeError::InversionFailure) => {
                    Err(Failure::Inversion(json!({"cmd": "decrypt", "result": "inversion-failure"})))
                }
                Err(e) => Err(e.into()),
            }
        }
        Cmd::SigKeygen { params, seed, out } => {
            let keys = sig_keygen(params, seed)?;
            let verify = with_suffix(&out, ".verify");
            let auth = with_suffix(&out, ".auth");
            write(&out, &keyio::write_sig_private(&keys))?;
            write(&verify, &keyio::write_sig_verify(&keys.verify_table()))?;
            write(&auth, &keyio::write_sig_auth(&keys.auth_table()))?;
            Ok(json!({"cmd": "sig-keygen", "params": params.to_string(), "private": out, "verify": verify, "auth": auth}))
        }
        Cmd::Reserve { journal, params, seed, window, gist } => {
            let mut tav = if journal.exists() {
                Tav::open(&journal)?
            } else {
                let (Some(p), Some(s)) = (params, seed) else {
                    return Err(Failure::Input("new journal needs --params and --seed".into()));
                };
                Tav::create(&journal, p, s, window)?
            };
            let t = tav.reserve(&gist)?;
            Ok(json!({"cmd": "reserve", "txn": t.id, "omega_prime": t.omega_prime, "expires": t.expires}))
        }
        Cmd::Sign { key, journal, txn, input, out } => {
            let mut keys = keyio::read_sig_private(&read(&key)?)?;
            let tav = Tav::open(&journal)?;
            let x = input_vector(&read_input(&input)?)?;
            let signature = keys.sign(&tav, &x, txn)?;
            let claim = format_claim(&Claim { signature, x, txn });
            if let Some(o) = out {
                write(&o, claim.as_bytes())?;
            }
            Ok(json!({"cmd": "sign", "claim": claim}))
        }
        Cmd::Verify { key, input } => {
            let table = keyio::read_sig_verify(&read(&key)?)?;
            let text = read_input(&input)?;
            let eps = match text.trim_start().starts_with("claim") || text.contains("\"claim\"") {
                true => input_claim(&text)?.signature.eps,
                false => input_vector(&text)?,
            };
            match table.verify(&eps) {
                Ok(x) => Ok(json!({"cmd": "verify", "plaintext": x})),
                Err(e) => Err(Failure::Reject(json!({"cmd": "verify", "result": "reject", "reason": e.to_string()}))),
            }
        }
        Cmd::Authenticate { key, journal, input } => {
            let table = keyio::read_sig_auth(&read(&key)?)?;
            let mut tav = Tav::open(&journal)?;
            let claim = input_claim(&read_input(&input)?)?;
            match tav.adjudicate(&table, &claim)? {
                Ok(()) => Ok(json!({"cmd": "authenticate", "txn": claim.txn, "result": "accept"})),
                Err(r) => Err(Failure::Reject(
                    json!({"cmd": "authenticate", "txn": claim.txn, "result": "reject", "reason": r.to_string()}),
                )),
            }
        }
        Cmd::Audit { key, shuffle } => {
            let report = audit_key(&read(&key)?, shuffle)?;
            Ok(json!({"cmd": "audit", "kind": report.kind.name(), "counts": report.counts}))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(Failure::Reject(v)) => {
            println!("{v}");
            ExitCode::from(1)
        }
        Err(Failure::Inversion(v)) => {
            println!("{v}");
            ExitCode::from(3)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("towerkey: {msg}");
            ExitCode::from(2)
        }
    }
}
