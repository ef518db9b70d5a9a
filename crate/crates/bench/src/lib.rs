//! Shared fixtures for the benchmarks.

use stackcount::ring::{LocalRing, RingSpec};
use stackcount::scheme::AffineScheme;

pub fn zp(p: u64, level: u32) -> LocalRing {
    LocalRing::new(RingSpec::unramified(p, level)).expect("prime")
}

pub fn hypersurface(name: &str, vars: &[&str], equation: &str) -> AffineScheme {
    AffineScheme::parse(name, vars, &[equation], vars.len() as i64 - 1).expect("valid equation")
}
