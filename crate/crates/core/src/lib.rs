//! Fault-tolerant graph spanners.
//!
//! * [`convert`]: oversampling conversion of any k-spanner construction into
//!   an r-fault-tolerant one (stretch `k >= 3`).
//! * [`lp`] and [`round`]: knapsack-cover LP relaxation for minimum-cost
//!   r-fault-tolerant 2-spanners, its cutting-plane solver, threshold
//!   rounding and the Moser–Tardos bounded-degree variant.
//! * [`local`]: a round-synchronous LOCAL-model simulator with padded
//!   decompositions and distributed versions of both constructions.
//! * [`oracle`]: exhaustive verification used as ground truth.
//!
//! The crate is `no_std` and needs only `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod convert;
pub mod dist;
pub mod generators;
pub mod graph;
pub mod local;
pub mod lp;
pub mod oracle;
pub mod rng;
pub mod round;
pub mod spanner;

pub use graph::{Edge, EdgeId, FaultSet, Graph, GraphError, Path2, VertexId};
pub use spanner::{BaseSpannerAlgorithm, Spanner, SpannerMeta};
