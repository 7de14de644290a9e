//! Finite-algebra building blocks for multivariate public-key encryption and signatures.

pub mod algebra;
pub mod expr;
pub mod keyio;
pub mod oracle;
pub mod parametric;
pub mod permgen;
pub mod poly;
pub mod schemes;

pub use algebra::{AlgebraError, FieldSpec, ModulusSpec, Ring};
pub use expr::{Expr, ExprError, Program, ProgramBuilder, Tower};
pub use keyio::{Container, KeyIoError, KeyKind};
pub use oracle::{DomainGrid, OracleError};
pub use parametric::{ParamError, ParametricInjection, PartitionOfUnity, TriangularMap};
pub use permgen::{Bijection, Domain, PermError};
pub use poly::{MultiPoly, Poly, PolyError};
pub use schemes::{
    pkc_keygen, sig_keygen, AuthTable, Claim, PkcKeyPair, Rejection, SchemeError, SchemeParams, SigKeySet,
    Signature, Tav, Transaction, VerifyTable,
};
