pub mod choice;
pub mod error;
pub mod formulations;
pub mod heuristics;
pub mod idm;
pub mod instance;
pub mod inventory;
pub mod lp;
pub mod oracle;
pub mod rng;
pub mod separation;
pub mod solver;

pub use choice::ChoicePoint;
pub use error::{Error, Result};
pub use instance::{IdmInstance, Instance, OfflineConstraint, PartialOrder, Segment};
pub use heuristics::{improved_ro, two_step_ro};
pub use idm::{build_rounding, solve_qap_idm, IdmSolution, RoundingDistribution};
pub use inventory::SimulationReport;
pub use oracle::brute_force_qap;
pub use solver::{solve_qap, Formulation, Method, QapSolution, SolveOptions, SolveStats, SolveStatus};
