//! Learning and testing sparse multilinear polynomials over GF(2) from
//! membership queries.
//!
//! * [`poly`]: symbolic polynomials and exhaustive verification helpers.
//! * [`oracle`]: charged query oracles and their composable views.
//! * [`learner`]: the learning algorithms, from the zero test up to the
//!   full pipelines.
//! * [`tester`]: a learn-then-verify sparsity tester.
//! * [`bounds`]: query-complexity formulas and exponents.
//! * [`cli`]: the command-line front end.

pub mod assignment;
pub mod bounds;
pub mod cli;
pub mod learner;
pub mod oracle;
pub mod poly;
pub mod tester;

pub use assignment::Assignment;
pub use oracle::{Oracle, OracleError, QueryOracle};
pub use poly::{Monomial, PolyError, SparsePoly};
