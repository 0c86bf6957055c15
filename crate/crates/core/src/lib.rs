//! Bidirectional estimators for personalized PageRank and multi-step
//! transition probabilities on weighted graphs.
//!
//! ```
//! use bippr_core::bippr::{estimate_ppr, PprParams};
//! use bippr_core::graph::parse_edge_list_str;
//! use bippr_core::sampling::Source;
//!
//! let g = parse_edge_list_str("a b\nb c\nc a\n", false)?.apply_sink_convention();
//! let (s, t) = (g.resolve("a")?, g.resolve("c")?);
//! let params = PprParams::new(0.2, 0.05);
//! let est = estimate_ppr(&g, &Source::Node(s), t, &params, 7)?;
//! assert!(est.value > 0.0);
//! # Ok::<(), bippr_core::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bench;
pub mod bippr;
pub mod codec;
pub mod error;
pub mod graph;
pub mod localpush;
pub mod mstp;
pub mod numeric;
pub mod oracle;
pub mod pathsample;
pub mod record;
pub mod sampling;
pub mod search;
pub mod shardsim;
pub mod sparse;
pub mod synth;
pub mod ubippr;

pub use error::{Error, Result};
pub use graph::{Graph, NodeId};
pub use sparse::SparseVec;
