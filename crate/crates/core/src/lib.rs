//! Exact filtering and posterior path sampling for conditionally Gaussian sequences,
//! and a Bayesian integrated-variance estimator for prices observed with
//! return-correlated microstructure noise.

pub mod bias;
pub mod error;
pub mod filter;
pub mod gffbs;
pub mod iv;
pub mod linalg;
pub mod model;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
pub use gffbs::{backward_kernel, sample_path, BackwardKernel, LatentPath};
pub use linalg::{pinv_psd, Mat, Vector};
pub use model::{derive_original, DerivedParams, GaussianBelief, OriginalParams, SystemParams};
pub use rng::SimRng;
