//! predictorlab: simulation and certification of predictor-based
//! sampled-data output-feedback stabilization for nonlinear systems with
//! input and measurement delays.
//!
//! The control scheme has three parts: a high-gain sampled-data observer
//! reconstructing the delayed state from sampled, delayed output
//! measurements; a successive-approximation predictor advancing that
//! estimate across the combined delay (an exact matrix-exponential
//! predictor in the LTI case); and a nominal linear feedback for the
//! delay-free system, applied with zero-order hold. This crate implements
//! each component, a deterministic hybrid closed-loop simulator with
//! runtime bound monitors, numerical checkers for the small-period design
//! inequalities, and a sweep harness for empirical stability maps.

// Validations deliberately use `!(x > 0.0)`-style comparisons: unlike the
// inverted operator, they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod controller;
pub mod error;
pub mod linalg;
pub mod observer;
mod ode;
pub mod plant;
pub mod predictor;
pub mod signals;
pub mod simulator;

pub use analysis::{
    predictor_convergence_study, run_sweep, ConvergenceCurve, SuccessCriterion, SweepParam,
    SweepPoint, SweepResult, SweepSpec,
};
pub use controller::{
    check_design_conditions, check_nonlinear_lyapunov, control_update, lti_control_update,
    synthesize_certificates, ConditionEntry, ConditionId, ConditionReport, DesignCertificates,
    FeedbackGains,
};
pub use error::{Error, Result};
pub use linalg::{check_hurwitz, expm, solve_lyapunov, HurwitzReport};
pub use observer::{
    lti_observer_rhs, observer_bound_monitor, observer_jump, observer_rhs, ObserverGains,
    ObserverState,
};
pub use plant::{
    catalog_get, delay_free_rhs, derived_constants, forward_bound, plant_rhs, saturating_quadratic,
    CatalogPlant, DerivedConstants, DriftFn, GainFn, LtiPlant, StrictFeedbackPlant,
};
pub use predictor::{
    delay_free_flow, estimate_k, lti_predict, phi, picard_step, predict, prop_error_bound,
    q_operator, GridFunction, KEstimate, PredictorConfig,
};
pub use signals::{
    schedule_next, shift_history, ExogenousSignal, SamplingSchedule, StateHistory, ZohSignal,
};
pub use simulator::{
    decay_fit, fit_exponential_decay, measure, run_closed_loop, run_monitors, sup_output,
    sup_state, InitialHistory, InitialInput, MonitorReport, PlantHistory, PredictorSpec, SimConfig,
    SimTrace, TraceRow,
};
