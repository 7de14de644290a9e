//! Parametric building blocks: partitions of unity, nonvanishing maps, parametric power
//! maps, parametric matrices and injections, triangular maps and hash extension.

mod exp;
mod hybrid;
mod injection;
mod matrix;
mod nonvanishing;
mod partition;
mod triangular;

pub use exp::{nonvanishing_expr, unit_exponent_expr, ExpParam};
pub use hybrid::{AffineHybrid, MonomialHybrid};
pub use injection::{parametric_injection, random_injection, ClassMap, InjectionClass, ParametricInjection};
pub use matrix::{
    default_sigma, parametric_invertible_matrix, parametric_permutation_matrix, FactorKind,
    MatrixClass, MatrixFactor, ParametricMatrix,
};
pub use nonvanishing::{invert_nonvanishing, nonvanishing_map};
pub use partition::{partition_from_discriminator, partition_on_points, partition_zpl, PartitionOfUnity};
pub use triangular::{hash_extend, triangular_multivariate, TriangularMap};

use crate::algebra::AlgebraError;
use crate::expr::ExprError;
use crate::permgen::PermError;
use crate::poly::PolyError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParamError {
    #[error("map vanishes at {at:?}")]
    Vanishes { at: Vec<u64> },
    #[error("{c} is in the image: f({preimage}) = {c}")]
    InImage { c: u64, preimage: u64 },
    #[error("{s} does not divide {p} − 1")]
    Divisor { s: u64, p: u64 },
    #[error("class values {a} and {b} differ by a non-unit")]
    NonUnitDifference { a: u64, b: u64 },
    #[error("partition invariant fails at {at:?}: {what}")]
    Partition { at: Vec<u64>, what: &'static str },
    #[error("matrix kind violation: {0}")]
    MatrixKind(&'static str),
    #[error("matrix is singular at parameters {at:?}")]
    Singular { at: Vec<u64> },
    #[error("index map is not doubly bijective")]
    IndexMap,
    #[error("expected {expected} values, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("parameters {at:?} fall in a dead class")]
    Dead { at: Vec<u64> },
    #[error("exponent is not a unit at parameters {at:?}")]
    NonUnitExponent { at: Vec<u64> },
    #[error("round trip fails at {at:?}")]
    Roundtrip { at: Vec<u64> },
    #[error("operation needs a finite field with at least 3 elements")]
    NotField,
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}
