pub mod definable;
pub(crate) mod fp_search;
pub mod greenberg;
pub mod measures;
pub mod poly;
pub mod rational;
pub mod ring;
pub mod scheme;
pub mod stacks;
pub(crate) mod syntax;
pub mod witt;

pub use syntax::ParseError;
