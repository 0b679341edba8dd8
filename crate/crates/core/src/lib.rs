//! Just-in-time Extract Method recommendations for pasted Java code.

pub mod clone;
pub mod engine;
pub mod error;
pub mod learn;
pub mod metrics;
pub mod miner;
pub mod plan;
pub mod syntax;

pub use clone::DuplicateMatch;
pub use engine::{ClientMessage, Engine, EngineConfig, EngineMessage};
pub use error::{Error, Result};
pub use learn::{EvalReport, Example, Hyper, Model, ModelKind};
pub use metrics::{FeatureVector, CATALOG_VERSION, FEATURE_COUNT};
pub use miner::{Candidate, Dataset, DatasetRecord, Origin, ScoreWeights};
pub use plan::{ExtractionPlan, TextEdit};
pub use syntax::{CodeFragment, MethodDecl, Span, SyntaxTree, VariableFlow};
