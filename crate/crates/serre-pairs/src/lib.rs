//! Certification of pairs and k-tuples of rational elliptic curves with
//! maximally disjoint division fields.
//!
//! The library works with the one-parameter family of curves
//! `y^2 + xy = x^3 + l` (`l` an odd prime, `l != 7`) and decides, by exact
//! group-theoretic and ramification-theoretic criteria, whether a pair of
//! curves has joint torsion Galois image of the largest size allowed by the
//! Weil pairing. A Frobenius-trace sampling stream provides an independent
//! statistical cross-check of the same maximality statement.
//!
//! Module layout:
//!
//! * [`curves`]: integral Weierstrass models, invariants, reduction types,
//!   integer factorization.
//! * [`ffgroup`]: point counting over prime fields and Frobenius-trace
//!   sampling streams.
//! * [`matgroups`]: exact arithmetic in `GL2(Z/nZ)` and its subgroups,
//!   closure, normal-subgroup enumeration, (trace, det) class statistics.
//! * [`goursat`]: decomposition of subgroups of direct products and
//!   fibered products over a common quotient.
//! * [`entanglement`]: the division-subfield predicates and the top-level
//!   pair / k-tuple verifiers.
//! * [`cli`]: command-line surface used by the `serre-pairs` binary.

pub mod arith;
pub mod cli;
pub mod curves;
pub mod entanglement;
pub mod ffgroup;
pub mod goursat;
pub mod matgroups;

use thiserror::Error;

/// Crate-wide error type. Variants correspond to contract-level failures;
/// internal consistency violations panic instead.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("ineligible family prime {0}: need an odd prime different from 7")]
    IneligiblePrime(u64),
    #[error("singular model: discriminant is zero")]
    SingularModel,
    #[error("model coefficients too large for exact 128-bit invariants")]
    ModelTooLarge,
    #[error("factorization budget exceeded for {value} (unfactored cofactor {cofactor})")]
    FactorizationBudgetExceeded { value: i128, cofactor: u128 },
    #[error("prime {q} divides the discriminant: bad reduction")]
    BadReductionPrime { q: u64 },
    #[error("closure budget exceeded: reached {reached} elements (budget {budget})")]
    ClosureBudgetExceeded { reached: usize, budget: usize },
    #[error("enumeration budget exceeded for modulus {0}")]
    EnumerationBudgetExceeded(u64),
    #[error("projection onto factor {side} of the product is not surjective")]
    ProjectionNotSurjective { side: u8 },
    #[error("supplied quotient map is not a homomorphism onto a common group: {0}")]
    NotAHomomorphism(String),
    #[error("first argument is not a subgroup of the second")]
    NotASubgroup,
    #[error("ramification-index hypotheses violated: {0}")]
    HypothesisViolation(String),
    #[error("curve is not certified as a Serre curve")]
    NotCertifiedSerre,
    #[error("expected a prime >= 5, got {0}")]
    NotAPrime(u64),
    #[error("modulus {0} unsupported for coverage statistics (allowed: 4, 5, 7, 9, 11, 13)")]
    UnsupportedCoverageModulus(u64),
}

pub use curves::{FactorBudget, FactoredInteger, ReductionTag, ReductionType, WeierstrassCurve};
pub use entanglement::{
    CoverageReport, CriterionCheck, FieldTag, KTupleVerdict, PairVerdict, SerreCertificate,
    VerifyOptions,
};
pub use ffgroup::FrobeniusSample;
pub use goursat::GoursatInvariant;
pub use matgroups::{Ambient, GroupKind, ProductElement, ResidueMatrix, SubgroupSet};
