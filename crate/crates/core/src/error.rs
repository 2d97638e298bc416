use thiserror::Error;

use crate::model::NodeId;

/// Which score of a node failed validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreField {
    Cred,
    Conf,
}

impl std::fmt::Display for ScoreField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScoreField::Cred => "cred",
            ScoreField::Conf => "conf",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("node id must not be empty")]
    EmptyNodeId,

    #[error("duplicate node id `{0}`")]
    DuplicateNodeId(NodeId),

    #[error("edge {from} -> {to} refers to unknown node `{missing}`")]
    DanglingEdgeEndpoint {
        from: NodeId,
        to: NodeId,
        missing: NodeId,
    },

    #[error("self-loop on `{0}` is not allowed")]
    SelfLoop(NodeId),

    #[error("duplicate edge {from} -> {to}")]
    DuplicateEdge { from: NodeId, to: NodeId },

    #[error("{field} of `{node}` is {value}, expected a value in [0, 1]")]
    ScoreOutOfRange {
        node: NodeId,
        field: ScoreField,
        value: f64,
    },

    #[error("edge {from} -> {to} has weight {weight}, expected a finite value > 0")]
    NonPositiveWeight {
        from: NodeId,
        to: NodeId,
        weight: f64,
    },

    #[error("unknown node `{0}`")]
    UnknownNode(NodeId),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{line}:{column}: syntax error: expected {expected}, found {found}")]
    Syntax {
        line: usize,
        column: usize,
        expected: String,
        found: String,
    },

    /// A validation error with the source position of the offending declaration.
    #[error("{line}:{column}: {source}")]
    At {
        line: usize,
        column: usize,
        source: Box<Error>,
    },

    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
}

impl Error {
    /// Strips any position wrapper.
    pub fn root(&self) -> &Error {
        match self {
            Error::At { source, .. } => source.root(),
            other => other,
        }
    }

    /// Stable machine-readable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self.root() {
            Error::EmptyNodeId => "EmptyNodeId",
            Error::DuplicateNodeId(_) => "DuplicateNodeId",
            Error::DanglingEdgeEndpoint { .. } => "DanglingEdgeEndpoint",
            Error::SelfLoop(_) => "SelfLoop",
            Error::DuplicateEdge { .. } => "DuplicateEdge",
            Error::ScoreOutOfRange { .. } => "ScoreOutOfRange",
            Error::NonPositiveWeight { .. } => "NonPositiveWeight",
            Error::UnknownNode(_) => "UnknownNode",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::Syntax { .. } => "SyntaxError",
            Error::Schema { .. } => "SchemaError",
            Error::At { .. } => unreachable!("root() strips positions"),
        }
    }

    /// Source position, when the error came out of a text parser.
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            Error::At { line, column, .. } | Error::Syntax { line, column, .. } => {
                Some((*line, *column))
            }
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
