//! Generalized precision/recall for aspect extraction.
//!
//! Gold and detected aspects of a document are paired one-to-one by a
//! minimum-cost assignment over phrase similarities; pairs below a threshold
//! θ are discarded. Precision and recall count these pairs instead of exact
//! string matches, so a system that writes "AC" for "air conditioner" is not
//! penalised. With θ = 1 and exact similarity the metric reduces to the usual
//! set intersection.
//!
//! ```
//! use aspect_eval::matching::{intersect, Theta};
//! use aspect_eval::metrics::extraction_scores;
//! use aspect_eval::model::{AspectPolarityPair, AspectSet, Polarity};
//! use aspect_eval::similarity::SimilarityBackend;
//!
//! let pair = |a: &str| AspectPolarityPair::new(a, Polarity::Positive).unwrap();
//! let gold = AspectSet::from_pairs("d", [pair("Food"), pair("service")]).unwrap();
//! let detected = AspectSet::from_pairs("d", [pair("food")]).unwrap();
//!
//! let matches = intersect(
//!     "d",
//!     &gold.phrases(),
//!     &detected.phrases(),
//!     Theta::DEFAULT,
//!     &SimilarityBackend::Exact,
//! )
//! .unwrap();
//! let scores = extraction_scores(&matches);
//! assert_eq!((scores.precision, scores.recall), (1.0, 0.5));
//! ```

pub mod assignment;
pub mod cli;
pub mod error;
pub mod io;
pub mod matching;
pub mod metrics;
pub mod model;
pub mod similarity;
pub mod stats;

pub use error::{Error, Result};
