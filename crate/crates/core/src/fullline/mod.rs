//! Full-line perturbation dynamics around the oscillating ansatz.

pub mod ansatz;
pub mod diagnostics;
pub mod stepper;

pub use ansatz::{AnsatzFrame, AnsatzSupplier};
pub use diagnostics::{h_bound_audit, weighted_integrals, HBoundAudit, StabilityReport};
pub use stepper::{solve_perturbation, PerturbationRun, RunOptions, SnapshotScalars};
