//! Public-key encryption and the signer / verifier / TAV signature workflow.

mod params;
mod pkc;
mod sig;
mod tav;

pub use params::SchemeParams;
pub use pkc::{pkc_keygen, PkcKeyPair, PkcPrivateKey, PkcPublicKey};
pub use sig::{sig_keygen, AuthTable, Claim, SigKeySet, Signature, VerifyTable};
pub use tav::{Rejection, Tav, Transaction, DEFAULT_WINDOW};

use crate::algebra::AlgebraError;
use crate::expr::ExprError;
use crate::parametric::ParamError;
use crate::permgen::PermError;

/// Keygen attempts before giving up on unlucky draws.
pub const KEYGEN_RETRIES: u32 = 32;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SchemeError {
    #[error("bad parameters: {0}")]
    Params(String),
    #[error("component {index} = {value} is outside the message domain")]
    OutsideDomain { index: usize, value: u64 },
    #[error("expected {expected} components, got {got}")]
    Length { expected: usize, got: usize },
    #[error("ciphertext is outside the image of the public map")]
    InversionFailure,
    #[error("integrity check F(x, ω) = z failed")]
    IntegrityFailure,
    #[error("key generation failed after {attempts} attempts: {last}")]
    Keygen { attempts: u32, last: String },
    #[error("unknown transaction {0}")]
    UnknownTransaction(u64),
    #[error("transaction {0} has expired")]
    Expired(u64),
    #[error("transaction {0} was already used for a signature")]
    TransactionUsed(u64),
    #[error("no live parameter point for a right inverse")]
    NoLivePoint,
    #[error("journal: {0}")]
    Journal(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Reject vectors of the wrong length or with a zero component.
pub(crate) fn check_units(v: &[u64], len: usize, q: u64) -> Result<(), SchemeError> {
    if v.len() != len {
        return Err(SchemeError::Length { expected: len, got: v.len() });
    }
    match v.iter().position(|&a| a == 0 || a >= q) {
        Some(index) => Err(SchemeError::OutsideDomain { index, value: v[index] }),
        None => Ok(()),
    }
}

/// Run `gen` with fresh draws from one seeded stream until it succeeds.
pub(crate) fn with_retries<T>(
    seed: u64,
    mut gen: impl FnMut(&mut rand_chacha::ChaCha8Rng) -> Result<T, SchemeError>,
) -> Result<T, SchemeError> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut last = String::new();
    for _ in 0..KEYGEN_RETRIES {
        match gen(&mut rng) {
            Ok(v) => return Ok(v),
            Err(e @ SchemeError::Params(_)) => return Err(e),
            Err(e) => last = e.to_string(),
        }
    }
    Err(SchemeError::Keygen { attempts: KEYGEN_RETRIES, last })
}
