//! Bilateral recycling of EPR steering.
//!
//! Sequential, independent Alice-Bob pairs each apply unsharp Luders
//! measurements to their half of a shared two-qubit state before passing
//! it on. This crate provides:
//!
//! - validated two-qubit density matrices, Bloch/correlation forms and the
//!   built-in initial-state families ([`state`]),
//! - the unsharp measurement effects and the setting-averaged Luders
//!   channels acting between consecutive pairs ([`channel`]),
//! - sharpness schedules s = 1 - f(k) ([`schedule`]),
//! - the three-setting steering functional, its canonical maximum
//!   sqrt(Tr T^t T) and a numerical frame maximizer ([`steering`]),
//! - exact per-round closed forms and their large-k limits
//!   ([`closed_form`]),
//! - the sequential run engine: per-round records, steering horizons,
//!   closed-form comparison and parameter sweeps ([`engine`]),
//! - JSON/CSV interchange for states, frames, schedules and reports
//!   ([`io`]).
//!
//! Every operation is a pure function of its inputs; randomized routines
//! take the caller's seeded generator.

pub mod channel;
pub mod closed_form;
pub mod eigen;
pub mod engine;
pub mod io;
pub mod pauli;
pub mod random;
pub mod schedule;
pub mod state;
pub mod steering;

pub use channel::{
    bloch_scaling, effect_operator, luders_side_channel, round_channel, sqrt_effect,
    SharpnessTriple, Side, Sign,
};
pub use closed_form::{
    bell_first_round, gamma_family, pure_family, pure_family_uniform, tilde_family,
    werner_family, CfFamily, ClosedFormResult,
};
pub use engine::{
    compare_closed_form, find_uniform_sharpness, run_sequence, steering_horizon, sweep,
    Deviation, HorizonSchedule, InitialState, RoundRecord, RunOptions, RunReport,
    SharpnessSearch, SweepRow, SweepSpec,
};
pub use pauli::{Axis, C64};
pub use schedule::{schedule_expand, FkFamily, Provenance, RoundSchedule, ScheduleMode};
pub use state::{
    bloch_matrix, validate_density, BlochForm, Diagnostics, StateFamily, TwoQubitDensity,
};
pub use steering::{
    cjwr_f3, cjwr_fn, correlation_matrix, maximize_f3, observed_cjwr, optimal_a_for_b,
    MaximizeOutcome, MeasurementFrame, SteeringValue,
};
