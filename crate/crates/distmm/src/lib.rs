//! Structured distributed compression for computing inner products and
//! matrix products over prime fields.
//!
//! Two separated sources hold correlated matrices A and B; a receiver wants
//! A^T B but must not learn A or B themselves. Both sources apply a nonlinear
//! mapping and transmit random linear syndromes of the result, so the receiver
//! reconstructs only the modulo-q sum of the mapped values, from which a
//! deterministic rule recovers the product. The crate provides:
//!
//! - [`field`]: exact F_q and Z_r arithmetic on dense matrices;
//! - [`sources`]: the correlated source models, with exact enumeration and
//!   seeded sampling;
//! - [`schemes`]: the encode/combine/decode constructions (inner product,
//!   vector-wise embedding, symmetric and square matrix products, and the
//!   entry-wise embedding baseline) plus exhaustive verifiers;
//! - [`entropy`]: exact entropies of enumerable models and every closed-form
//!   sum rate, including the nonrecovery condition;
//! - [`graph_entropy`]: characteristic graphs and conditional graph entropy
//!   by alternating minimization, powering the hybrid scheme rate;
//! - [`kmcodec`]: a Monte-Carlo realization of the syndrome codec with exact
//!   ML decoding at desk scale.

pub mod cli;
pub mod entropy;
pub mod field;
pub mod graph_entropy;
pub mod kmcodec;
pub mod schemes;
pub mod sources;

pub use field::{FieldMatrix, PrimeModulus, ResidueScalar};
pub use sources::{JointSourceModel, ModelKind};
