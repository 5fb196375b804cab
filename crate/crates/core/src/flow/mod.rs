//! Heat, porous-medium and Sharma-Mittal flows with reference solutions.

pub mod reference;
pub mod solver;
pub mod spec;
pub mod trajectory;

pub use reference::{barenblatt, gaussian, gaussian_pdf, mixture, uniform, Barenblatt, MixtureComponent};
pub use solver::{explicit_step, implicit_step, solve, solve_pme, solve_sm_flow, DiffusionOperator, Workspace};
pub use spec::{DtPolicy, FlowKind, FlowSpec, SnapshotSpacing, TimeScheme};
pub use trajectory::{fmt_f64, write_density_csv, StepStats, Trajectory, CSV_COLUMNS};
