//! Outlier-robust matching of two sets of noisy feature vectors.
//!
//! For every size `k`, [`lss::lss_curve`] finds the injective partial map with
//! `k` pairs minimizing the sum of squared distances, using an exact
//! integer-cost min-cost flow ([`flow`]). The selection rules in [`select`]
//! then estimate how many pairs are genuine, with or without a known noise
//! level. [`synth`] generates instances with known ground truth and runs
//! Monte-Carlo sweeps; [`io`] and [`cli`] handle files and the command line.
//!
//! ```
//! use lssmatch::lss::lss_match;
//! use lssmatch::types::FeatureSet;
//!
//! let x = FeatureSet::new(vec![vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
//! let y = FeatureSet::new(vec![vec![1.1, 0.9], vec![7.0, 7.0], vec![0.0, 0.1]]).unwrap();
//! let (pairs, cost) = lss_match(&x, &y, 2).unwrap();
//! assert_eq!(pairs.pairs(), &[(0, 2), (1, 0)]);
//! assert!((cost - 0.03).abs() < 1e-6);
//! ```

pub mod cli;
pub mod error;
pub mod flow;
pub mod io;
pub mod lss;
pub mod select;
pub mod synth;
pub mod types;

pub use error::{Error, MatchingError, ParseError, Result};
pub use flow::LssCurve;
pub use lss::{lss_curve, lss_match};
pub use select::{select_k_known_noise, select_k_unknown_noise, separation_rate, SelectionOutcome};
pub use types::{CostMatrix, FeatureSet, GroundTruth, PartialMatching};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/matching.md")]
    mod matching {}
    #[doc = include_str!("../../../book/src/selection.md")]
    mod selection {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
