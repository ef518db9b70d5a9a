//! Truncated local rings `R_n` and finite fields.

mod field;
mod fp_poly;
mod local;

pub use field::{prime_power, FiniteField};
pub use local::{make_ring, ArithOp, Elem, LocalRing, RingElement, RingSpec, Valuation};

pub(crate) use fp_poly::pow_mod as pow_mod_u64;
pub(crate) use local::is_prime;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RingError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("Eisenstein condition fails: {0}")]
    NotEisenstein(String),
    #[error("residue modulus is not a monic irreducible polynomial of degree {0} over F_{1}")]
    ReducibleModulus(u32, u64),
    #[error("invalid ring parameters: {0}")]
    InvalidSpec(String),
    #[error("elements belong to different rings")]
    MismatchedRings,
    #[error("element is not invertible")]
    NotInvertible,
    #[error("enumerating {size} elements exceeds the bound {bound}")]
    BoundExceeded { size: u128, bound: u64 },
    #[error("cannot reduce from level {from} to level {to}")]
    BadLevel { from: u32, to: u32 },
}
