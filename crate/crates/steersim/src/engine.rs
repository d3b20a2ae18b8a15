//! Drives sequential runs end to end: applies the round channels, records
//! the steering value delivered to each pair, computes steering horizons,
//! compares simulation against the closed forms and searches schedules.

use crate::channel::round_channel;
use crate::closed_form::{bell_first_round, CfFamily, ClosedFormError, ClosedFormResult};
use crate::schedule::{
    schedule_expand, FkFamily, Provenance, RoundSchedule, ScheduleError, ScheduleMode,
};
use crate::state::{StateError, StateFamily, TwoQubitDensity};
use crate::steering::{observed_cjwr, steering_value, MeasurementFrame, SteeringError};
use nalgebra::Matrix3;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    ClosedForm(#[from] ClosedFormError),
    #[error(transparent)]
    Steering(#[from] SteeringError),
    #[error("no closed-form oracle for this initial state and schedule: {reason}")]
    NoOracle { reason: String },
    #[error("sweep grid is empty")]
    EmptyGrid,
    #[error("sharpness search needs a positive resolution (got {resolution})")]
    BadResolution { resolution: f64 },
}

/// Initial condition of a run: a named family or a raw state. Only named
/// families carry a closed form.
#[derive(Clone, Debug)]
pub enum InitialState {
    Family(StateFamily),
    Raw(TwoQubitDensity),
}

impl InitialState {
    pub fn realize(&self) -> Result<TwoQubitDensity, StateError> {
        match self {
            InitialState::Family(f) => f.make_state(),
            InitialState::Raw(rho) => Ok(rho.clone()),
        }
    }

    pub fn closed_form(&self) -> Option<CfFamily> {
        match self {
            InitialState::Family(f) => CfFamily::from_state_family(f),
            InitialState::Raw(_) => None,
        }
    }

    pub fn family(&self) -> Option<&StateFamily> {
        match self {
            InitialState::Family(f) => Some(f),
            InitialState::Raw(_) => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            InitialState::Family(f) => f.label(),
            InitialState::Raw(_) => "raw".to_string(),
        }
    }
}

/// Steering summary of the state held after round k (k = 0 is the initial
/// state). `observed_f3` is the attenuated functional seen by the pair
/// measuring in round k through its own unsharp settings, aimed along the
/// sign-matched coordinate axes of the state it received.
#[derive(Clone, Debug)]
pub struct RoundRecord {
    pub k: u32,
    pub fingerprint: String,
    pub t: Matrix3<f64>,
    pub s_squared: f64,
    pub s: f64,
    pub violating: bool,
    pub observed_f3: Option<f64>,
}

/// Largest absolute gap between simulation and closed form over a run.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Deviation {
    pub s_squared: f64,
    pub t_entrywise: f64,
}

impl Deviation {
    pub fn max_abs(&self) -> f64 {
        self.s_squared.max(self.t_entrywise)
    }
}

/// Full record of one sequential run.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub initial_state: InitialState,
    pub schedule: RoundSchedule,
    /// k = 0 record of the state handed to the first measuring pair.
    pub initial: RoundRecord,
    /// One record per round, k = 1..len; record k is the state after
    /// round k, i.e. the state pair k passes on.
    pub records: Vec<RoundRecord>,
    /// Number of leading rounds whose delivered state still violates.
    pub horizon: u32,
    /// Present when a closed-form oracle covers this run.
    pub deviation: Option<Deviation>,
    pub final_state: TwoQubitDensity,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Also score each round with the unsharpness-attenuated functional.
    pub observed: bool,
}

/// FNV-1a over the little-endian bytes of the matrix entries; stable
/// across runs so reports are byte-identical.
fn fingerprint(rho: &TwoQubitDensity) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |x: f64| {
        for b in x.to_le_bytes() {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    for i in 0..4 {
        for j in 0..4 {
            let z = rho.matrix()[(i, j)];
            eat(z.re);
            eat(z.im);
        }
    }
    format!("{hash:016x}")
}

fn record(k: u32, rho: &TwoQubitDensity, observed_f3: Option<f64>) -> RoundRecord {
    let bloch = rho.to_bloch();
    let sv = crate::steering::SteeringValue::from_s_squared((bloch.t.transpose() * bloch.t).trace());
    RoundRecord {
        k,
        fingerprint: fingerprint(rho),
        t: bloch.t,
        s_squared: sv.s_squared,
        s: sv.s,
        violating: sv.violating,
        observed_f3,
    }
}

/// Run the schedule against the initial state, recording the steering
/// value of the state each pair passes on. Record k holds the state after
/// round k; the initial (k = 0) state is recorded separately.
pub fn run_sequence(
    initial: &InitialState,
    schedule: &RoundSchedule,
    opts: &RunOptions,
) -> Result<RunReport, EngineError> {
    let mut current = initial.realize()?;
    let initial_record = record(0, &current, None);
    let mut records = Vec::with_capacity(schedule.len());
    for (idx, (alice, bob)) in schedule.rounds().iter().enumerate() {
        let observed = if opts.observed {
            let t = current.to_bloch().t;
            let frame = MeasurementFrame::sign_matched_axes(&t);
            Some(observed_cjwr(
                &current,
                &frame,
                &alice.lambdas(),
                &bob.lambdas(),
            )?)
        } else {
            None
        };
        current = round_channel(&current, alice, bob);
        records.push(record(idx as u32 + 1, &current, observed));
    }
    let horizon = records.iter().take_while(|r| r.violating).count() as u32;
    let mut report = RunReport {
        initial_state: initial.clone(),
        schedule: schedule.clone(),
        initial: initial_record,
        records,
        horizon,
        deviation: None,
        final_state: current,
    };
    report.deviation = compare_closed_form(&report).ok();
    Ok(report)
}

/// Closed-form series matching the report's rounds, when one exists.
/// Requires a family initial state and a symmetric (lambda, lambda, 1)
/// schedule; the one asymmetric case with a closed form is a single round
/// on the maximally entangled state.
pub fn closed_form_series(
    initial: &InitialState,
    schedule: &RoundSchedule,
) -> Result<Vec<ClosedFormResult>, EngineError> {
    let family = initial.closed_form().ok_or_else(|| EngineError::NoOracle {
        reason: format!("initial state {} has no closed form", initial.label()),
    })?;
    if let Some(s_list) = schedule.symmetric_unsharpness() {
        return (1..=s_list.len())
            .map(|j| family.evaluate(&s_list[..j]).map_err(EngineError::from))
            .collect();
    }
    // Asymmetric sides: covered only for one round on the Bell state.
    if schedule.len() == 1 && family == (CfFamily::Pure { alpha: 0.5 }) {
        let (alice, bob) = &schedule.rounds()[0];
        let [a1, a2, a3] = alice.lambdas();
        let [b1, b2, b3] = bob.lambdas();
        if a1 == a2 && a3 == 1.0 && b1 == b2 && b3 == 1.0 {
            let s = alice.unsharpness(crate::pauli::Axis::X);
            let t = bob.unsharpness(crate::pauli::Axis::X);
            return Ok(vec![bell_first_round(s, t)?]);
        }
    }
    Err(EngineError::NoOracle {
        reason: "schedule is not the symmetric (lambda, lambda, 1) strategy".to_string(),
    })
}

/// Maximum absolute deviation between a run's records and the closed form,
/// over both s^2 and all correlation-matrix entries.
pub fn compare_closed_form(report: &RunReport) -> Result<Deviation, EngineError> {
    let series = closed_form_series(&report.initial_state, &report.schedule)?;
    let mut dev = Deviation {
        s_squared: 0.0,
        t_entrywise: 0.0,
    };
    for (rec, cf) in report.records.iter().zip(&series) {
        dev.s_squared = dev.s_squared.max((rec.s_squared - cf.s_squared).abs());
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { cf.t_diag[i] } else { 0.0 };
                dev.t_entrywise = dev.t_entrywise.max((rec.t[(i, j)] - want).abs());
            }
        }
    }
    Ok(dev)
}

/// Schedule shapes accepted by the horizon search.
#[derive(Clone, Debug)]
pub enum HorizonSchedule {
    /// Depth-k feasibility with every round at s = 1 - f(k), evaluated
    /// per depth.
    Uniform(FkFamily),
    /// One run with round i at s = 1 - f(i).
    PerRound(FkFamily),
    /// One run with the given rounds.
    Explicit(RoundSchedule),
}

/// Largest k <= cap such that every state delivered along the way still
/// violates. Uniform schedules are scored per depth: depth k counts when
/// all k rounds of the depth-k run violate. Closed-form families are
/// evaluated through the closed form (which also covers depths where
/// 1 - f(k) rounds to 1 and no valid sharpness exists); raw states run
/// the dense channel.
pub fn steering_horizon(
    initial: &InitialState,
    schedule: &HorizonSchedule,
    cap: u32,
) -> Result<u32, EngineError> {
    match schedule {
        HorizonSchedule::Uniform(family) => {
            family.validate()?;
            let mut best = 0;
            for depth in 1..=cap {
                if uniform_depth_feasible(initial, family, depth)? {
                    best = depth;
                }
            }
            Ok(best)
        }
        HorizonSchedule::PerRound(family) => {
            if cap == 0 {
                return Ok(0);
            }
            if let Some(cf) = initial.closed_form() {
                let s_list = crate::closed_form::per_round_s_list(family, cap)?;
                let mut horizon = 0;
                for j in 1..=s_list.len() {
                    if cf.evaluate(&s_list[..j])?.violating() {
                        horizon = j as u32;
                    } else {
                        break;
                    }
                }
                Ok(horizon)
            } else {
                let sched = schedule_expand(ScheduleMode::PerRound, family, cap)?;
                Ok(run_sequence(initial, &sched, &RunOptions::default())?.horizon)
            }
        }
        HorizonSchedule::Explicit(sched) => {
            Ok(run_sequence(initial, sched, &RunOptions::default())?.horizon)
        }
    }
}

fn uniform_depth_feasible(
    initial: &InitialState,
    family: &FkFamily,
    depth: u32,
) -> Result<bool, EngineError> {
    if let Some(cf) = initial.closed_form() {
        let s_list = crate::closed_form::uniform_s_list(family, depth)?;
        for j in 1..=s_list.len() {
            if !cf.evaluate(&s_list[..j])?.violating() {
                return Ok(false);
            }
        }
        Ok(true)
    } else {
        let sched = schedule_expand(ScheduleMode::Uniform, family, depth)?;
        let report = run_sequence(initial, &sched, &RunOptions::default())?;
        Ok(report.horizon == depth)
    }
}

/// Result of the uniform-sharpness search at a fixed depth.
#[derive(Clone, Debug, PartialEq)]
pub enum SharpnessSearch {
    /// f_star is the largest f for which all k delivered states violate,
    /// located to the requested resolution; margin is s^2 - 1 at f_star.
    Feasible { f_star: f64, margin: f64 },
    /// Even f -> 0 (s -> 1) fails; carries the best (f -> 0) value.
    Infeasible { best_value: f64 },
}

const F_FLOOR: f64 = 1e-12;

/// Locate the threshold f for the uniform schedule s_i = 1 - f at depth k:
/// below it every delivered state violates, above it some round fails.
/// Monotonicity of the objective in f is verified on a coarse grid first;
/// a grid-refinement search replaces bisection if it ever fails.
pub fn find_uniform_sharpness(
    family: &CfFamily,
    k: u32,
    resolution: f64,
) -> Result<SharpnessSearch, EngineError> {
    if !(resolution > 0.0 && resolution < 1.0) {
        return Err(EngineError::BadResolution { resolution });
    }
    family.validate()?;
    if k == 0 {
        return Err(ScheduleError::EmptySchedule { k }.into());
    }
    let worst = |f: f64| -> Result<f64, EngineError> {
        // prefix-minimum of s^2 across the depth-k run at uniform s = 1 - f
        let s_list = vec![1.0 - f; k as usize];
        let mut min = f64::INFINITY;
        for j in 1..=k as usize {
            min = min.min(family.evaluate(&s_list[..j])?.s_squared);
        }
        Ok(min)
    };

    let at_floor = worst(F_FLOOR)?;
    if at_floor <= 1.0 {
        return Ok(SharpnessSearch::Infeasible {
            best_value: at_floor,
        });
    }
    let ceiling = 1.0 - F_FLOOR;
    if worst(ceiling)? > 1.0 {
        return Ok(SharpnessSearch::Feasible {
            f_star: ceiling,
            margin: worst(ceiling)? - 1.0,
        });
    }

    // coarse monotonicity screen
    let mut monotone = true;
    let mut prev = f64::INFINITY;
    for i in 0..=32 {
        let f = F_FLOOR + (ceiling - F_FLOOR) * i as f64 / 32.0;
        let v = worst(f)?;
        if v > prev + 1e-12 {
            monotone = false;
            break;
        }
        prev = v;
    }

    let (mut lo, mut hi) = (F_FLOOR, ceiling);
    if monotone {
        while hi - lo > resolution {
            let mid = 0.5 * (lo + hi);
            if worst(mid)? > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    } else {
        // grid refinement: keep the last feasible cell and zoom in
        for _ in 0..40 {
            if hi - lo <= resolution {
                break;
            }
            let step = (hi - lo) / 32.0;
            let mut new_lo = lo;
            let mut new_hi = hi;
            for i in 0..32 {
                let f = lo + step * (i + 1) as f64;
                if worst(f)? > 1.0 {
                    new_lo = f;
                } else {
                    new_hi = f;
                    break;
                }
            }
            lo = new_lo;
            hi = new_hi;
        }
    }
    Ok(SharpnessSearch::Feasible {
        f_star: lo,
        margin: worst(lo)? - 1.0,
    })
}

/// Cartesian sweep grid: families x schedule specs x depths.
#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub families: Vec<StateFamily>,
    pub schedules: Vec<(ScheduleMode, FkFamily)>,
    pub k_values: Vec<u32>,
}

/// One sweep cell: the depth-k run summarized by its final delivered
/// state, the run's horizon and the closed-form deviation.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub family: StateFamily,
    pub schedule: String,
    pub k: u32,
    pub s_squared: f64,
    pub s: f64,
    pub violating: bool,
    pub horizon: u32,
    pub deviation: Option<f64>,
}

/// A grid cell that could not be evaluated; sweeps keep going.
#[derive(Clone, Debug)]
pub struct SweepFailure {
    pub family: String,
    pub schedule: String,
    pub k: u32,
    pub message: String,
}

/// Evaluate the grid in lexicographic order (families, then schedules,
/// then k). Rows are pure functions of their cell, so the output is
/// deterministic regardless of evaluation interleaving. Cells where the
/// dense sharpness underflows fall back to the closed form when one
/// exists; other failures are reported per row.
pub fn sweep(spec: &SweepSpec) -> Result<(Vec<SweepRow>, Vec<SweepFailure>), EngineError> {
    if spec.families.is_empty() || spec.schedules.is_empty() || spec.k_values.is_empty() {
        return Err(EngineError::EmptyGrid);
    }
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for family in &spec.families {
        for (mode, fk) in &spec.schedules {
            for &k in &spec.k_values {
                match sweep_cell(family, *mode, fk, k) {
                    Ok(row) => rows.push(row),
                    Err(err) => failures.push(SweepFailure {
                        family: family.label(),
                        schedule: format!("{}:{}", mode.label(), fk.label()),
                        k,
                        message: err.to_string(),
                    }),
                }
            }
        }
    }
    Ok((rows, failures))
}

fn sweep_cell(
    family: &StateFamily,
    mode: ScheduleMode,
    fk: &FkFamily,
    k: u32,
) -> Result<SweepRow, EngineError> {
    family.validate()?;
    let schedule_label = format!("{}:{}", mode.label(), fk.label());
    match schedule_expand(mode, fk, k) {
        Ok(sched) => {
            let report = run_sequence(&InitialState::Family(family.clone()), &sched, &RunOptions::default())?;
            let last = report.records.last().expect("k >= 1");
            Ok(SweepRow {
                family: family.clone(),
                schedule: schedule_label,
                k,
                s_squared: last.s_squared,
                s: last.s,
                violating: last.violating,
                horizon: report.horizon,
                deviation: report.deviation.map(|d| d.max_abs()),
            })
        }
        Err(err @ ScheduleError::UnsharpnessOutOfRange { .. }) => {
            // dense path impossible; usable answer still exists via the
            // closed form when the family has one
            let cf = CfFamily::from_state_family(family)
                .ok_or(EngineError::Schedule(err))?;
            let s_list = match mode {
                ScheduleMode::Uniform => crate::closed_form::uniform_s_list(fk, k)?,
                ScheduleMode::PerRound => crate::closed_form::per_round_s_list(fk, k)?,
            };
            let mut horizon = 0;
            for j in 1..=s_list.len() {
                if cf.evaluate(&s_list[..j])?.violating() {
                    horizon = j as u32;
                } else {
                    break;
                }
            }
            let last = cf.evaluate(&s_list)?;
            Ok(SweepRow {
                family: family.clone(),
                schedule: schedule_label,
                k,
                s_squared: last.s_squared,
                s: last.s(),
                violating: last.violating(),
                horizon,
                deviation: None,
            })
        }
        Err(err) => Err(err.into()),
    }
}
