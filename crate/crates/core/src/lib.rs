//! Certainty-based information measures and the term weighting schemes built
//! on them.
//!
//! Shannon entropy scores how *uncertain* a distribution is. Its dual,
//! troenpy, `T(X) = -Σ p log(1 - p)`, scores how *certain* it is: it is
//! smallest for the uniform distribution and grows as mass concentrates. This
//! crate provides
//!
//! * [`itc`]: entropy, troenpy, positive information, conditional troenpy and
//!   pure positive information (PPI);
//! * [`quantum`]: Von Neumann entropy and quantum troenpy of real density
//!   matrices, via a Jacobi eigensolver;
//! * [`corpus`]: tokenization, corpus loading and seeded train/test splits;
//! * [`weighting`]: the supervised PCF weight (a troenpy gain over document
//!   class histograms), three entropy-based NCF weights, IDF, and weighted
//!   document vectors;
//! * [`knn`]: a cosine KNN classifier and a repeated-split evaluation harness;
//! * [`selftro`]: self-troenpy weights from windowed co-occurrence counts, and
//!   embedding initializations scaled by them.
//!
//! ```
//! use troenpy::itc::{entropy, troenpy, Distribution, LogConfig};
//!
//! let cfg = LogConfig::default();
//! let skewed = Distribution::new(vec![0.9, 0.1]).unwrap();
//! assert!((entropy(&skewed, &cfg) - 0.325083).abs() < 1e-6);
//! assert!((troenpy(&skewed, &cfg) - 2.082863).abs() < 1e-6);
//! ```
//!
//! The guide under `book/` walks through each part; its code samples are
//! compiled and run as doc-tests of this crate.

pub mod corpus;
pub mod error;
pub mod format;
pub mod itc;
pub mod knn;
pub mod quantum;
pub mod selftro;
pub mod synthetic;
pub mod weighting;

pub use error::{Error, Result};
pub use itc::{Distribution, JointDistribution, LogConfig};

// `cargo test --doc` runs the code blocks in the guide.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/troenpy.md")]
    mod troenpy {}
    #[doc = include_str!("../../../book/src/conditional.md")]
    mod conditional {}
    #[doc = include_str!("../../../book/src/quantum.md")]
    mod quantum {}
    #[doc = include_str!("../../../book/src/class-weighting.md")]
    mod class_weighting {}
    #[doc = include_str!("../../../book/src/knn.md")]
    mod knn {}
    #[doc = include_str!("../../../book/src/self-troenpy.md")]
    mod self_troenpy {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
