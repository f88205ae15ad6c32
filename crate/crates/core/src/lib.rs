//! Fully dynamic shortest-path reporting on top of bounded distance oracles.

pub mod engine;
pub mod graph;
pub mod harness;
pub mod oracle;
pub mod overlay;
pub mod reconstruct;
pub mod rounding;
pub mod unweighted;

pub use engine::{Engine, EngineConfig, EngineError, OracleChoice, PathResult, SegmentRecord, UpdateStats, Variant};
pub use graph::{dijkstra, Direction, Directedness, DynamicGraph, GraphError, WeightDomain};
pub use oracle::{Dist, DistanceOracle, OracleKind};
