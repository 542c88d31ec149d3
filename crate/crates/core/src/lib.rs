//! Laboratory for the SDP-refutation threshold of random d-regular NAE-3SAT.
//!
//! The pipeline: random signed n-lifts of K_{d,c} ([`lift`]), clique-expanded
//! 2XOR instances and their matrix views ([`graph`]), spectra through the
//! deformed-Laplacian determinant identity ([`spectral`]), the infinite-tree
//! wave machinery ([`tree`]), explicit SDP feasibility witnesses ([`witness`]),
//! and eigenvalue refutation certificates with the f(d) threshold curve
//! ([`refute`]).

// indexed loops over parallel arrays are the norm in the numeric kernels here
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod graph;
pub mod lift;
pub mod linalg;
pub mod refute;
pub mod spectral;
pub mod tree;
pub mod witness;

pub use error::{Error, Result};
pub use graph::{Assignment, DirectedEdgeIndex, Edge, SignedMultigraph};
pub use lift::{cycle_counts, random_lift, random_signing, CycleStats, LiftSpec};
pub use refute::{eig_bound, f_threshold, RefutationReport, ThresholdCurve};
pub use spectral::{positive_spectrum, SpectrumReport};
pub use tree::{TreeParams, WaveParams};
pub use witness::{build_witness, GramWitness, WitnessReport};
