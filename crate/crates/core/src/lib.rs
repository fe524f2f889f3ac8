//! Query-by-example over labeled knowledge graphs.
//!
//! Given one or more example entity tuples, the engine extracts and reduces
//! their neighborhood, distills a small weighted maximal query graph, and
//! explores the lattice of its subgraphs best-first to rank answer tuples.
//!
//! ```no_run
//! use exemplar_core::{DataGraph, Engine, QueryParams};
//!
//! let graph = DataGraph::from_path("triples.tsv")?;
//! let engine = Engine::new(&graph);
//! let outcome = engine.query(&[vec!["Jerry Yang", "Yahoo!"]], &QueryParams::default())?;
//! for answer in &outcome.answers {
//!     println!("{} {:?} {}", answer.rank, answer.entities, answer.score);
//! }
//! # Ok::<(), exemplar_core::Error>(())
//! ```

pub mod engine;
pub mod error;
pub mod eval;
pub mod executor;
mod graph_util;
pub mod lattice;
pub mod mqg;
pub mod neighborhood;
mod par;
pub mod store;

pub use engine::{Answer, Engine, QueryOutcome, QueryParams, QueryStats};
pub use error::{Error, Result};
pub use lattice::EdgeSet;
pub use mqg::{MaximalQueryGraph, MqgEdge, QueryNode};
pub use store::{DataGraph, EdgeId, EntityId, LabelId, Triple, Tuple};
