//! Reference computations used by the test suites.
//!
//! Nothing here calls into `cgseq`; every oracle is built from first principles
//! (stacked joint-Gaussian algebra, textbook FFBS, distribution tests) so that it
//! can check the production code rather than restate it.

pub mod ffbs;
pub mod joint;
pub mod random;
pub mod stats;
