//! Sharpness schedules: how the per-round unsharpness s_i = 1 - f is
//! generated, and the expanded per-round triples both observers use.

use crate::channel::{ChannelError, SharpnessTriple};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("schedule needs at least one round (got k = {k})")]
    EmptySchedule { k: u32 },
    #[error("{name} must lie in (0, 1) (got {value})")]
    ParameterOutOfRange { name: &'static str, value: f64 },
    #[error("f({k}) = {value} falls outside (0, 1); pick a slower schedule or smaller k")]
    UnsharpnessOutOfRange { k: u32, value: f64 },
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// The decay family f(k) controlling how close the unsharpness
/// s = 1 - f(k) sits to the non-disturbing limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FkFamily {
    /// f(k) = 10^-k
    Pow10,
    /// f(k) = 100^-k
    Pow100,
    /// f(k) = ratio^k, ratio in (0, 1)
    Geometric { ratio: f64 },
    /// f(k) = value, constant in (0, 1)
    Constant { value: f64 },
}

impl FkFamily {
    pub fn validate(&self) -> Result<(), ScheduleError> {
        match *self {
            FkFamily::Pow10 | FkFamily::Pow100 => Ok(()),
            FkFamily::Geometric { ratio } => {
                if ratio > 0.0 && ratio < 1.0 {
                    Ok(())
                } else {
                    Err(ScheduleError::ParameterOutOfRange {
                        name: "ratio",
                        value: ratio,
                    })
                }
            }
            FkFamily::Constant { value } => {
                if value > 0.0 && value < 1.0 {
                    Ok(())
                } else {
                    Err(ScheduleError::ParameterOutOfRange {
                        name: "value",
                        value,
                    })
                }
            }
        }
    }

    pub fn f(&self, k: u32) -> f64 {
        match *self {
            FkFamily::Pow10 => 10f64.powi(-(k as i32)),
            FkFamily::Pow100 => 100f64.powi(-(k as i32)),
            FkFamily::Geometric { ratio } => ratio.powi(k as i32),
            FkFamily::Constant { value } => value,
        }
    }

    /// Whether f(k) -> 0 as k grows (required for the asymptote formulas).
    pub fn vanishes(&self) -> bool {
        !matches!(self, FkFamily::Constant { .. })
    }

    pub fn label(&self) -> String {
        match *self {
            FkFamily::Pow10 => "pow10".to_string(),
            FkFamily::Pow100 => "pow100".to_string(),
            FkFamily::Geometric { ratio } => format!("geometric({ratio})"),
            FkFamily::Constant { value } => format!("constant({value})"),
        }
    }

    fn checked_f(&self, k: u32) -> Result<f64, ScheduleError> {
        let f = self.f(k);
        if f > 0.0 && f < 1.0 {
            Ok(f)
        } else {
            Err(ScheduleError::UnsharpnessOutOfRange { k, value: f })
        }
    }
}

/// How the family is turned into per-round unsharpness values.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleMode {
    /// Every round of a depth-k run uses s = 1 - f(k): the sharpness is
    /// tuned to the target depth. Default reading.
    Uniform,
    /// Round i uses s = 1 - f(i), independent of the target depth.
    PerRound,
}

impl ScheduleMode {
    pub fn label(self) -> &'static str {
        match self {
            ScheduleMode::Uniform => "uniform",
            ScheduleMode::PerRound => "per_round",
        }
    }
}

/// Where a schedule came from; generated schedules remember the exact
/// family so closed-form comparisons can rebuild s_i without round-trip
/// loss through lambda.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    Explicit,
    Generated {
        mode: ScheduleMode,
        family: FkFamily,
        k: u32,
    },
}

/// The expanded list of per-round sharpness triples for both sides.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundSchedule {
    rounds: Vec<(SharpnessTriple, SharpnessTriple)>,
    provenance: Provenance,
}

impl RoundSchedule {
    pub fn explicit(rounds: Vec<(SharpnessTriple, SharpnessTriple)>) -> Result<Self, ScheduleError> {
        if rounds.is_empty() {
            return Err(ScheduleError::EmptySchedule { k: 0 });
        }
        Ok(RoundSchedule {
            rounds,
            provenance: Provenance::Explicit,
        })
    }

    pub fn rounds(&self) -> &[(SharpnessTriple, SharpnessTriple)] {
        &self.rounds
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn label(&self) -> String {
        match &self.provenance {
            Provenance::Explicit => format!("explicit({} rounds)", self.rounds.len()),
            Provenance::Generated { mode, family, .. } => {
                format!("{}:{}", mode.label(), family.label())
            }
        }
    }

    /// Per-round unsharpness s_i when both sides use the same
    /// (lambda, lambda, 1) triple each round; None otherwise. Generated
    /// schedules rebuild s_i = 1 - f exactly from their provenance.
    pub fn symmetric_unsharpness(&self) -> Option<Vec<f64>> {
        if let Provenance::Generated { mode, family, k } = &self.provenance {
            return Some(match mode {
                ScheduleMode::Uniform => vec![1.0 - family.f(*k); *k as usize],
                ScheduleMode::PerRound => {
                    (1..=*k).map(|i| 1.0 - family.f(i)).collect()
                }
            });
        }
        let mut out = Vec::with_capacity(self.rounds.len());
        for (a, b) in &self.rounds {
            let [a1, a2, a3] = a.lambdas();
            if a != b || a1 != a2 || a3 != 1.0 {
                return None;
            }
            out.push(a.unsharpness(crate::pauli::Axis::X));
        }
        Some(out)
    }
}

/// Expand a generated schedule into per-round (alice, bob) triples, both
/// sides using (lambda, lambda, 1) with lambda = sqrt(f (2 - f)).
pub fn schedule_expand(
    mode: ScheduleMode,
    family: &FkFamily,
    k: u32,
) -> Result<RoundSchedule, ScheduleError> {
    family.validate()?;
    if k < 1 {
        return Err(ScheduleError::EmptySchedule { k });
    }
    let triple_for = |round: u32| -> Result<(SharpnessTriple, SharpnessTriple), ScheduleError> {
        let f = match mode {
            ScheduleMode::Uniform => family.checked_f(k)?,
            ScheduleMode::PerRound => family.checked_f(round)?,
        };
        // lambda^2 = 1 - s^2 = f (2 - f), exact in f.
        let lambda = (f * (2.0 - f)).sqrt();
        let t = SharpnessTriple::xy_symmetric(lambda)?;
        Ok((t, t))
    };
    let rounds = (1..=k).map(triple_for).collect::<Result<Vec<_>, _>>()?;
    Ok(RoundSchedule {
        rounds,
        provenance: Provenance::Generated {
            mode,
            family: family.clone(),
            k,
        },
    })
}
