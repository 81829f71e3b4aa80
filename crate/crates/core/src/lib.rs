//! Simulation toolkit for single-qubit ensembles on the Bloch sphere.
//!
//! The library models a setting where one party prepares a large ensemble of
//! independently drawn qubits, keeps (or withholds) a record of the
//! preparation, and other parties — with full, partial, or no knowledge of
//! that record — must predict or verify measurement outcomes. On top of the
//! state algebra it provides:
//!
//! * [`quantum`] — pure states, density matrices, projective and generalized
//!   measurements, Born-rule sampling, trace distance;
//! * [`ensemble`] — coin-toss preparation of qubit ensembles, notebooks
//!   (preparation records), measure-once semantics, substitution and
//!   notebook verification;
//! * [`strategies`] — outcome predictors for each level of knowledge,
//!   accuracy laws, deliberate under-performance (disguise), and adversarial
//!   axis guessing;
//! * [`protocol`] — two judge-mediated dispute protocols with transcripts,
//!   verdicts, and closed-form win probabilities;
//! * [`stats`] — exact binomial tails, Wilson confidence intervals,
//!   reproducible seeded trial runners, and uniform sphere sampling.
//!
//! Randomness is always supplied by the caller, and every stochastic routine
//! is deterministic given its RNG, so whole experiments replay bit-for-bit
//! from a single master seed.

pub mod ensemble;
pub mod protocol;
pub mod quantum;
pub mod stats;
pub mod strategies;

pub use ensemble::{Ensemble, KnowledgeView, Notebook, PreparationSpec, Provenance, ViewKind};
pub use quantum::{Axis, DensityMatrix, Direction, QubitPureState, Sign};
pub use protocol::{ProtocolAParams, ProtocolBParams, Transcript, Verdict, Winner};
