//! Certified robustness for graph neural networks against arbitrary
//! perturbations, via hash-based graph division and majority voting.

pub mod certify;
pub mod division;
pub mod error;
pub mod gnn;
pub mod graph;
pub mod io;
pub mod perturb;
pub mod pipeline;
pub mod synth;

pub use certify::{certify, Certificate, VoteTally};
pub use division::{Division, HashAlgorithm, HashScheme, Strategy};
pub use error::{Error, Result};
pub use gnn::GcnParams;
pub use graph::{apply_perturbation, Graph, NodeId, Perturbation, Task, TaskKind};
