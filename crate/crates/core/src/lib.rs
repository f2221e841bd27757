//! Boundary feedback for reaction-convection-diffusion equations on `(0, 1)`.
//!
//! The core is generic over [`Scalar`] (`f32` or `f64`); the `*F64` aliases
//! below fix the precision used by the command-line tool.

pub mod controllers;
pub mod discretization;
pub mod linalg;
pub mod profile;
pub mod rootsolve;
pub mod scalar;
pub mod simulator;

pub use controllers::{
    alpha_eval, make_controller, vdot_closed_form, AlphaSpec, Branch, ControlError, Controller, ControllerKind,
    ControllerSpec, Feedback, FeedbackInputs, Side,
};
pub use discretization::{
    build_diff_ops, build_fd_diff_ops, build_grid, build_rbf_diff_ops, feedback_inputs, trapezoid, Backend, DiffOps,
    DiscretizationError, Grid, GridState,
};
pub use profile::{Profile, ProfileTerm};
pub use rootsolve::{cardano_real_root, quadratic_roots, DepressedCubic, QuadraticCoeffs, RootError};
pub use scalar::Scalar;
pub use simulator::{
    certificate_violations, cn_matrices, convection_term, decay_rate, run, run_with_ops, Convection, ConvectionForm,
    InitialCondition, LoopMode, Outcome, ReactionSpec, ReactionTerm, RunResult, SeriesRecord, SimConfig, SimError,
    Simulator, Snapshot,
};

pub type FeedbackInputsF64 = FeedbackInputs<f64>;
pub type ControllerSpecF64 = ControllerSpec<f64>;
pub type ControllerF64 = Controller<f64>;
pub type GridF64 = Grid<f64>;
pub type GridStateF64 = GridState<f64>;
pub type DiffOpsF64 = DiffOps<f64>;
pub type BackendF64 = Backend<f64>;
pub type ProfileF64 = Profile<f64>;
pub type SimConfigF64 = SimConfig<f64>;
pub type RunResultF64 = RunResult<f64>;
pub type SeriesRecordF64 = SeriesRecord<f64>;
