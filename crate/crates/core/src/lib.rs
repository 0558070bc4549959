//! Confidence-guided path search and path-feature relation reasoning over
//! knowledge graphs.
//!
//! The pipeline for one target relation:
//!
//! 1. [`kg`]: load triples, add inverse relations, mask task edges;
//! 2. [`search`]: walk the training pairs in order, growing a pool of
//!    relation paths whose running confidence steers later expansion;
//! 3. [`selection`]: keep paths above confidence and coverage floors;
//! 4. [`reasoning`]: turn each kept path into a walk-probability feature,
//!    fit a linear scorer and rank candidate tails by MAP.
//!
//! [`path_eval`] holds the exact enumeration routes used as ground truth,
//! [`oracle`] compares them with the search, and [`pipeline`] wires
//! everything to configuration and report files.

pub mod error;
pub mod kg;
pub mod oracle;
pub mod path_eval;
pub mod pipeline;
pub mod reasoning;
pub mod search;
pub mod selection;
pub mod synth;

pub use error::{Error, Result};
pub use kg::{EdgeMask, EntityId, GraphBuilder, GraphView, KnowledgeGraph, RelationId, TaskSplit, Triple};
pub use path_eval::PathFeature;
pub use pipeline::RunConfig;
pub use reasoning::{LinearModel, RankingMetrics, ReasoningConfig};
pub use search::{run_path_search, PathPool, PathSearch, PoolEntry, RelationPathMatrix, SearchConfig};
pub use selection::{select_paths, SelectionThresholds};
