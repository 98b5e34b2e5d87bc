//! Training-free compression of encoder-space token sequences.
//!
//! A [`TokenSequence`] is an `L x D` float32 matrix of tokens in temporal
//! order. Every method in this crate reduces it to a shorter sequence under a
//! shared budget `L' = max(1, round(rho * L))`:
//!
//! * [`Method::Ltbm`]: local temporal bipartite merging. Tokens are split by
//!   parity into sources and destinations, each source picks its most similar
//!   destination within a temporal window, and the best-matched sources are
//!   averaged into their destinations. Passes repeat until the budget is hit.
//! * [`Method::GlobalMerge`]: the same engine without the window.
//! * [`Method::UniAvg`], [`Method::GlobalTopK`], [`Method::SegmentwiseTopK`]:
//!   fixed average pooling and L2-norm pruning baselines.
//!
//! ```
//! use seqsqueeze::{compress, CompressionConfig, KeepRatio, Method, TokenSequence};
//!
//! let rows = vec![vec![1.0, 0.0], vec![1.0, 0.1], vec![0.0, 1.0], vec![0.1, 1.0]];
//! let seq = TokenSequence::from_rows(&rows).unwrap();
//! let config = CompressionConfig::new(Method::Ltbm, KeepRatio::new(0.5).unwrap());
//! let out = compress(&seq, &config).unwrap();
//! assert_eq!(out.sequence.len(), 2);
//! assert_eq!(out.provenance.groups, vec![vec![1, 2], vec![3, 4]]);
//! ```
//!
//! Every output carries a [`Provenance`] (which input rows built each output
//! token) and, for the merge methods, a [`MergeTrace`] that replays exactly.

pub mod baselines;
pub mod bench;
mod compress;
mod error;
pub mod io;
pub mod merge;
mod provenance;
mod sequence;
pub mod similarity;
pub mod testkit;

pub use compress::{compress, compress_matrix, Compressed, MatrixResult};
pub use error::CompressError;
pub use provenance::{MergePass, MergeRecord, MergeTrace, Provenance};
pub use sequence::{
    target_length, validate_sequence, CompressionConfig, KeepRatio, Matrix, Method, TokenSequence, Weighting, Window,
    DEFAULT_SEGMENTS, DEFAULT_WINDOW,
};
