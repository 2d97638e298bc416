//! Typed belief graphs with dual credibility/confidence scoring, and
//! structural diagnostics over them.
//!
//! A [`BeliefSystem`] holds beliefs joined by support, qualification and
//! contradiction edges. The analysis modules are read-only:
//!
//! - [`coherence`]: local/global coherence, the undermined set, contradiction
//!   cycles and chains, undersupported beliefs, tension zones;
//! - [`propagation`]: confidence derived from weighted support by damped
//!   fixed-point iteration;
//! - [`extraction`]: best and maximal coherent subsets, coherent islands;
//! - [`diagnostics`]: credibility/confidence divergence, the
//!   confidence-consistency audit and whole-graph reports;
//! - [`format`]: the BGL language, canonical JSON, DOT and GraphML.

pub mod coherence;
pub mod diagnostics;
pub mod error;
pub mod extraction;
pub mod format;
mod graph;
pub mod model;
pub mod propagation;
pub mod synthetic;

#[cfg(test)]
mod testutil;

pub use coherence::{
    coherence_report, find_contradiction_chains, find_contradiction_cycles, is_globally_coherent,
    is_locally_coherent, tension_zones, undermined_set, undersupported_beliefs, CoherenceOptions,
    CoherenceReport, Enumeration, EnumerationLimits, UnderminingPolicy, UndersupportReason,
};
pub use diagnostics::{
    audit_confidence_consistency, divergence_map, graph_report, graph_report_with, ConfSource,
    ConsistencyViolation, DivergenceClass, DivergenceEntry, GraphReport, ReportOptions, Thresholds,
};
pub use error::{Error, Result};
pub use extraction::{
    coherent_islands, conflict_graph, enumerate_maximal_coherent, max_coherent_subgraph,
    max_coherent_subgraph_with, ConflictGraph, ExtractOptions, ExtractionResult, Mode, Objective,
};
pub use format::{DiagnosticsOverlay, ParseReport, Warning};
pub use model::{build_system, BeliefNode, BeliefSystem, Direction, Edge, EdgeKind, NodeId};
pub use propagation::{propagate_confidence, PropagationConfig, PropagationResult};
