//! Exact-arithmetic kernel: arbitrary-precision integers and rationals,
//! division/powering reductions, generalized Catalan numbers, Lagrange-inversion
//! series with certified error bounds, certified root bracketing, and
//! normalization/minimization of open formulas with truncated subtraction and
//! halving.
//!
//! Everything is computed over exact rationals; there is no floating point
//! anywhere in this crate. All values are immutable after construction and all
//! operations are pure functions, so they are safe to share across threads.

pub mod catalan;
pub mod divpow;
pub mod exact;
pub mod formula;
pub mod lif;
pub mod poly;
pub mod roots;

pub use exact::{ExactInt, ExactRat};
pub use poly::Polynomial;
