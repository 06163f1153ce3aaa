//! Enumeration of Costas arrays by recursive construction from smaller
//! Costas point sets, with an instrumented exhaustive baseline, brute-force
//! oracles and the counting formulas used to compare the two.
//!
//! Modules:
//! - [`board`]: placements, symmetries and canonical forms.
//! - [`checker`]: full and incremental Costas checks, comparison accounting.
//! - [`phi`]: the column recursion and its direct-start variant.
//! - [`checkpoint`]: resumable on-disk state for the recursion.
//! - [`oracle`]: exhaustive search, brute-force counts and the `chi` census.
//! - [`analytics`]: closed-form counts, bounds and the efficiency report.

pub mod analytics;
pub mod board;
pub mod checker;
pub mod checkpoint;
pub mod oracle;
pub mod phi;

pub use analytics::{CTriangle, EfficiencyReport};
pub use board::{BoardError, CanonicalKey, Placement, Point, SymmetryTransform, MAX_ORDER};
pub use checker::{ComparisonLedger, ComparisonPlan, Convention, DifferenceTriangle};
pub use oracle::{ChiCensus, OracleCaps};
pub use phi::{EngineConfig, EngineError, PhiColumnState, PhiEngine, RunOutcome, UpdateRecord};
