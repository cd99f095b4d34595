//! Encoding circuits for injecting an arbitrary physical state into a
//! self-dual CSS code.
//!
//! The check/logical matrix (rows = qubits) is row-reduced until every
//! column is a single 1; replaying the row operations backwards as CNOTs
//! (then rewritten to CZ plus √Y rotations) gives the encoder.

mod encode;
mod matrix;
mod order;
mod reduce;

pub use encode::{circuit_from_rops, verify_injection, InjectedInput, InjectionReport};
pub use matrix::{ColumnOp, ReductionMatrix, RowOp, RowOpSequence};
pub use order::{check_order, search_order, search_order_seeded, violations};
pub use reduce::{derive_column_ops, reduce, reduce_with, ReduceOptions, Reduction};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("synthesis needs a self-dual CSS code")]
    NotSelfDual,
    #[error("row reduction exhausted its budget ({nodes} nodes, up to {layers} layers)")]
    Budget { nodes: u64, layers: usize },
    #[error("malformed reduction: {0}")]
    Malformed(String),
    #[error("injection check failed for input {input}: {detail}")]
    Verification { input: String, detail: String },
    #[error(transparent)]
    Circuit(#[from] msd_pauli::Error),
    #[error(transparent)]
    Code(#[from] msd_codes::CodeError),
}

pub type Result<T> = std::result::Result<T, SynthError>;

/// Known-good row-op sequences for the d=3 (9 ops, 3 layers) and d=5
/// (24 ops, 5 layers) color codes as indexed by `msd_codes::color_code`.
pub const KNOWN_D3_ROPS: &str = "0->1, 3->2, 5->4, 0->3, 2->5, 4->6, 2->1, 4->3, 6->5";
pub const KNOWN_D5_ROPS: &str = "1->0, 3->2, 4->5, 7->6, 9->8, 15->12, 2->0, 6->3, 8->5, 12->10, 13->11, 2->4, 8->6, \
                                 9->7, 10->13, 16->14, 4->7, 8->10, 14->11, 15->16, 3->1, 7->10, 14->12, 16->13";
