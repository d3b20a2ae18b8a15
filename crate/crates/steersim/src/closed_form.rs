//! Exact correlation matrices and steering values after k bilateral
//! rounds for each supported initial family, plus their large-k limits.
//! This is the theory side that the dense channel simulation must match.
//!
//! Products over rounds are accumulated as per-round normalized factors
//! ((s+1)^2/9 and (2s+1)^2/9, both at most 16/9 < 9), so evaluation stays
//! in range for k well beyond 500 where 81^k alone would overflow.

use crate::schedule::{FkFamily, ScheduleError};
use crate::state::StateFamily;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClosedFormError {
    #[error("{name} must lie in {requirement} (got {value})")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("per-round unsharpness must lie in [0, 1] (got {value})")]
    UnsharpnessOutOfRange { value: f64 },
    #[error("asymptote needs a schedule with f(k) -> 0; {family} does not vanish")]
    ScheduleDoesNotVanish { family: String },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

/// Closed-form state summary after k rounds: the diagonal correlation
/// matrix and s^2 = Tr(T^t T), which for these families is the sum of the
/// three squared diagonal entries.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedFormResult {
    pub k: u32,
    #[serde(rename = "T_diag")]
    pub t_diag: [f64; 3],
    pub s_squared: f64,
    pub family: String,
}

impl ClosedFormResult {
    pub fn s(&self) -> f64 {
        self.s_squared.sqrt()
    }

    pub fn violating(&self) -> bool {
        self.s_squared > 1.0
    }
}

/// Per-round normalized products driving every closed form.
struct Products {
    /// prod (s_i + 1)^2 / 9
    p2: f64,
    /// prod (2 s_i + 1)^2 / 9
    q2: f64,
    /// prod (s_i + 1)^4 / 81
    p4: f64,
    /// prod (2 s_i + 1)^4 / 81
    q4: f64,
}

fn accumulate(s_list: &[f64]) -> Result<Products, ClosedFormError> {
    let mut p = Products {
        p2: 1.0,
        q2: 1.0,
        p4: 1.0,
        q4: 1.0,
    };
    for &s in s_list {
        if !(0.0..=1.0).contains(&s) || !s.is_finite() {
            return Err(ClosedFormError::UnsharpnessOutOfRange { value: s });
        }
        let a = (s + 1.0) * (s + 1.0) / 9.0;
        let b = (2.0 * s + 1.0) * (2.0 * s + 1.0) / 9.0;
        p.p2 *= a;
        p.q2 *= b;
        p.p4 *= a * a;
        p.q4 *= b * b;
    }
    Ok(p)
}

fn require(
    ok: bool,
    name: &'static str,
    requirement: &'static str,
    value: f64,
) -> Result<(), ClosedFormError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(ClosedFormError::InvalidParameter {
            name,
            requirement,
            value,
        })
    }
}

/// Initial families with a closed form under the symmetric
/// (lambda, lambda, 1) strategy applied on both sides each round.
#[derive(Clone, Debug, PartialEq)]
pub enum CfFamily {
    /// Pure Schmidt state; the closed form is valid on all of (0, 1)
    /// since it only enters through alpha(1 - alpha).
    Pure { alpha: f64 },
    /// Mixture of a Schmidt state with |00><00| and |11><11|; only the
    /// Schmidt weight m1 enters the correlation matrix.
    Gamma { m1: f64, alpha: f64 },
    TildeGamma { alpha: f64, theta: f64 },
    Werner { m: f64, theta: f64 },
}

impl CfFamily {
    pub fn validate(&self) -> Result<(), ClosedFormError> {
        match *self {
            CfFamily::Pure { alpha } => {
                require(alpha > 0.0 && alpha < 1.0, "alpha", "(0, 1)", alpha)
            }
            CfFamily::Gamma { m1, alpha } => {
                require(m1 > 0.0 && m1 <= 1.0, "m1", "(0, 1]", m1)?;
                require(alpha > 0.0 && alpha <= 0.5, "alpha", "(0, 1/2]", alpha)
            }
            CfFamily::TildeGamma { alpha, theta } => {
                require(
                    alpha > std::f64::consts::FRAC_1_SQRT_2 && alpha <= 1.0,
                    "alpha",
                    "(sqrt(2)/2, 1]",
                    alpha,
                )?;
                require(
                    theta > 0.0 && theta <= std::f64::consts::FRAC_PI_4,
                    "theta",
                    "(0, pi/4]",
                    theta,
                )
            }
            CfFamily::Werner { m, theta } => {
                require(m >= 0.0 && m < 1.0, "m", "[0, 1)", m)?;
                require(
                    (0.0..=std::f64::consts::FRAC_PI_4).contains(&theta),
                    "theta",
                    "[0, pi/4]",
                    theta,
                )
            }
        }
    }

    pub fn label(&self) -> String {
        match *self {
            CfFamily::Pure { alpha } => format!("pure(alpha={alpha})"),
            CfFamily::Gamma { m1, alpha } => format!("gamma(m1={m1}, alpha={alpha})"),
            CfFamily::TildeGamma { alpha, theta } => {
                format!("tilde_gamma(alpha={alpha}, theta={theta})")
            }
            CfFamily::Werner { m, theta } => format!("werner(m={m}, theta={theta})"),
        }
    }

    /// Closed-form family of a state family, when one exists. The gamma
    /// split weights m2, m3 drop out of the correlation matrix.
    pub fn from_state_family(family: &StateFamily) -> Option<CfFamily> {
        Some(match *family {
            StateFamily::Bell => CfFamily::Pure { alpha: 0.5 },
            StateFamily::Schmidt { alpha } => CfFamily::Pure { alpha },
            StateFamily::Gamma { m1, alpha, .. } => CfFamily::Gamma { m1, alpha },
            StateFamily::TildeGamma { alpha, theta } => CfFamily::TildeGamma { alpha, theta },
            StateFamily::Werner { m, theta } => CfFamily::Werner { m, theta },
        })
    }

    /// Evaluate after the rounds listed in `s_list` (one unsharpness per
    /// round, both sides). An empty list returns the initial values.
    pub fn evaluate(&self, s_list: &[f64]) -> Result<ClosedFormResult, ClosedFormError> {
        self.validate()?;
        let p = accumulate(s_list)?;
        let k = s_list.len() as u32;
        let (t_diag, s_squared) = match *self {
            CfFamily::Pure { alpha } => {
                let c = 2.0 * (alpha * (1.0 - alpha)).sqrt();
                (
                    [c * p.p2, -c * p.p2, p.q2],
                    8.0 * alpha * (1.0 - alpha) * p.p4 + p.q4,
                )
            }
            CfFamily::Gamma { m1, alpha } => {
                let c = 2.0 * (alpha * (1.0 - alpha)).sqrt() * m1;
                (
                    [c * p.p2, -c * p.p2, p.q2],
                    8.0 * alpha * (1.0 - alpha) * m1 * m1 * p.p4 + p.q4,
                )
            }
            CfFamily::TildeGamma { alpha, theta } => {
                let (ct, st) = (theta.cos(), theta.sin());
                (
                    [-ct * p.p2, -alpha * st * p.p2, -alpha * st * p.q2],
                    (ct * ct + alpha * alpha * st * st) * p.p4
                        + alpha * alpha * st * st * p.q4,
                )
            }
            CfFamily::Werner { m, theta } => {
                let s2t = (2.0 * theta).sin();
                (
                    [m * s2t * p.p2, -m * s2t * p.p2, m * p.q2],
                    m * m * (2.0 * s2t * s2t * p.p4 + p.q4),
                )
            }
        };
        Ok(ClosedFormResult {
            k,
            t_diag,
            s_squared,
            family: self.label(),
        })
    }

    /// Limit of s^2 as k grows under any schedule with f(k) -> 0.
    pub fn asymptote(&self, schedule: &FkFamily) -> Result<f64, ClosedFormError> {
        self.validate()?;
        schedule.validate()?;
        if !schedule.vanishes() {
            return Err(ClosedFormError::ScheduleDoesNotVanish {
                family: schedule.label(),
            });
        }
        Ok(match *self {
            CfFamily::Pure { .. } | CfFamily::Gamma { .. } => 1.0,
            CfFamily::TildeGamma { alpha, theta } => {
                let st = theta.sin();
                alpha * alpha * st * st
            }
            CfFamily::Werner { m, .. } => m * m,
        })
    }
}

/// All rounds of a depth-k run at s = 1 - f(k). k = 0 yields the empty
/// list (the un-measured initial state).
pub fn uniform_s_list(family: &FkFamily, k: u32) -> Result<Vec<f64>, ClosedFormError> {
    family.validate()?;
    if k == 0 {
        return Ok(Vec::new());
    }
    let f = family.f(k);
    if !(f > 0.0 && f < 1.0) {
        return Err(ScheduleError::UnsharpnessOutOfRange { k, value: f }.into());
    }
    Ok(vec![1.0 - f; k as usize])
}

/// Round i at s = 1 - f(i), i = 1..k.
pub fn per_round_s_list(family: &FkFamily, k: u32) -> Result<Vec<f64>, ClosedFormError> {
    family.validate()?;
    (1..=k)
        .map(|i| {
            let f = family.f(i);
            if f > 0.0 && f < 1.0 {
                Ok(1.0 - f)
            } else {
                Err(ScheduleError::UnsharpnessOutOfRange { k: i, value: f }.into())
            }
        })
        .collect()
}

/// One bilateral round on the maximally entangled state with independent
/// per-side unsharpness s_alice, t_bob (both from the (lambda, lambda, 1)
/// strategy):
/// T = diag((s+1)(t+1), -(s+1)(t+1), (2s+1)(2t+1)) / 9.
pub fn bell_first_round(s_alice: f64, t_bob: f64) -> Result<ClosedFormResult, ClosedFormError> {
    for (name, v) in [("s_alice", s_alice), ("t_bob", t_bob)] {
        require((0.0..=1.0).contains(&v), name, "[0, 1]", v)?;
    }
    let (s, t) = (s_alice, t_bob);
    let t1 = (s + 1.0) * (t + 1.0) / 9.0;
    let t3 = (2.0 * s + 1.0) * (2.0 * t + 1.0) / 9.0;
    let s_squared = (2.0 * (s + 1.0) * (s + 1.0) * (t + 1.0) * (t + 1.0)
        + (2.0 * s + 1.0) * (2.0 * s + 1.0) * (2.0 * t + 1.0) * (2.0 * t + 1.0))
        / 81.0;
    Ok(ClosedFormResult {
        k: 1,
        t_diag: [t1, -t1, t3],
        s_squared,
        family: format!("bell_first_round(s={s}, t={t})"),
    })
}

/// Convenience wrappers mirroring the family constructors.
pub fn pure_family(alpha: f64, s_list: &[f64]) -> Result<ClosedFormResult, ClosedFormError> {
    CfFamily::Pure { alpha }.evaluate(s_list)
}

pub fn gamma_family(m1: f64, alpha: f64, s_list: &[f64]) -> Result<ClosedFormResult, ClosedFormError> {
    CfFamily::Gamma { m1, alpha }.evaluate(s_list)
}

pub fn tilde_family(alpha: f64, theta: f64, s_list: &[f64]) -> Result<ClosedFormResult, ClosedFormError> {
    CfFamily::TildeGamma { alpha, theta }.evaluate(s_list)
}

pub fn werner_family(m: f64, theta: f64, s_list: &[f64]) -> Result<ClosedFormResult, ClosedFormError> {
    CfFamily::Werner { m, theta }.evaluate(s_list)
}

/// Depth-k value with every round at s = 1 - f(k).
pub fn pure_family_uniform(
    alpha: f64,
    family: &FkFamily,
    k: u32,
) -> Result<ClosedFormResult, ClosedFormError> {
    pure_family(alpha, &uniform_s_list(family, k)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn first_round_corner_values() {
        // exact rationals: 3/81, 113/81, 17/81
        let both_sharp = bell_first_round(0.0, 0.0).unwrap();
        assert_abs_diff_eq!(both_sharp.s_squared, 3.0 / 81.0, epsilon = 1e-15);
        assert!(!both_sharp.violating());

        let both_soft = bell_first_round(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(both_soft.s_squared, 113.0 / 81.0, epsilon = 1e-14);
        assert!(both_soft.violating());

        let mixed = bell_first_round(1.0, 0.0).unwrap();
        assert_abs_diff_eq!(mixed.s_squared, 17.0 / 81.0, epsilon = 1e-15);
    }

    #[test]
    fn first_round_rejects_out_of_range() {
        assert!(bell_first_round(1.1, 0.0).is_err());
        assert!(bell_first_round(0.5, -0.1).is_err());
    }

    #[test]
    fn pure_single_round_at_s09() {
        let r = pure_family(0.5, &[0.9]).unwrap();
        // (2 * 1.9^4 + 2.8^4) / 81, frozen via independent evaluation
        assert_abs_diff_eq!(r.s_squared, 1.0806148148148148, epsilon = 1e-13);
        assert!(r.violating());
    }

    #[test]
    fn pure_sharpless_round_matches_first_round_corner() {
        let r = pure_family(0.5, &[1.0]).unwrap();
        let t1 = bell_first_round(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(r.s_squared, t1.s_squared, epsilon = 1e-15);
        assert_abs_diff_eq!(r.s_squared, 113.0 / 81.0, epsilon = 1e-14);
    }

    #[test]
    fn pure_small_alpha_stops_violating() {
        let r = pure_family(1e-9, &[1.0, 1.0]).unwrap();
        assert!(r.s_squared <= 1.0 + 1e-8);
        let exact = pure_family(1e-9, &[0.9]).unwrap();
        assert!(exact.s_squared < 1.0);
    }

    #[test]
    fn empty_round_list_returns_initial_value() {
        let r = pure_family(0.3, &[]).unwrap();
        assert_eq!(r.k, 0);
        assert_abs_diff_eq!(r.s_squared, 8.0 * 0.3 * 0.7 + 1.0, epsilon = 1e-15);
        let w = werner_family(0.6, std::f64::consts::FRAC_PI_4, &[]).unwrap();
        assert_abs_diff_eq!(w.s_squared, 3.0 * 0.36, epsilon = 1e-14);
    }

    #[test]
    fn uniform_pow10_depth_values() {
        // frozen from independent dense-simulation runs
        let expected = [
            (1, 1.0806148148148148),
            (2, 1.0228641482530589),
            (3, 1.0073517272638006),
        ];
        for (k, want) in expected {
            let r = pure_family_uniform(0.5, &FkFamily::Pow10, k).unwrap();
            assert_abs_diff_eq!(r.s_squared, want, epsilon = 1e-12);
            assert!(r.violating());
        }
    }

    #[test]
    fn gamma_reduces_to_pure_at_full_weight() {
        for s_list in [vec![0.9], vec![0.3, 0.8], vec![]] {
            let g = gamma_family(1.0, 0.4, &s_list).unwrap();
            let p = pure_family(0.4, &s_list).unwrap();
            assert_abs_diff_eq!(g.s_squared, p.s_squared, epsilon = 1e-15);
            for i in 0..3 {
                assert_abs_diff_eq!(g.t_diag[i], p.t_diag[i], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn gamma_frozen_example() {
        let r = gamma_family(0.8, 0.5, &[0.9]).unwrap();
        assert_abs_diff_eq!(r.s_squared, 0.9647739259259258, epsilon = 1e-13);
        assert!(!r.violating());
    }

    #[test]
    fn tilde_initial_values() {
        let r = tilde_family(1.0, std::f64::consts::FRAC_PI_4, &[]).unwrap();
        assert_abs_diff_eq!(r.s_squared, 1.5, epsilon = 1e-14);
        assert!(r.violating());
        let (alpha, theta): (f64, f64) = (0.9, 0.5);
        let r = tilde_family(alpha, theta, &[]).unwrap();
        let want = theta.cos().powi(2) + 2.0 * alpha * alpha * theta.sin().powi(2);
        assert_abs_diff_eq!(r.s_squared, want, epsilon = 1e-14);
    }

    #[test]
    fn tilde_approaches_its_limit() {
        let fam = CfFamily::TildeGamma {
            alpha: 1.0,
            theta: std::f64::consts::FRAC_PI_4,
        };
        let s_list = uniform_s_list(&FkFamily::Pow10, 30).unwrap();
        let r = fam.evaluate(&s_list).unwrap();
        let limit = fam.asymptote(&FkFamily::Pow10).unwrap();
        assert_abs_diff_eq!(limit, 0.5, epsilon = 1e-15);
        assert!((r.s_squared - limit).abs() < 1e-3);
    }

    #[test]
    fn werner_frozen_example() {
        let r = werner_family(0.95, std::f64::consts::FRAC_PI_4, &[0.9]).unwrap();
        assert_abs_diff_eq!(r.s_squared, 0.9752548703703701, epsilon = 1e-13);
        assert!(!r.violating());
    }

    #[test]
    fn werner_approaches_m_squared() {
        let fam = CfFamily::Werner {
            m: 0.95,
            theta: std::f64::consts::FRAC_PI_4,
        };
        let s_list = uniform_s_list(&FkFamily::Pow10, 30).unwrap();
        let r = fam.evaluate(&s_list).unwrap();
        assert!((r.s_squared - 0.9025).abs() < 1e-3);
        assert_abs_diff_eq!(fam.asymptote(&FkFamily::Pow100).unwrap(), 0.9025, epsilon = 1e-15);
    }

    #[test]
    fn asymptote_values() {
        assert_abs_diff_eq!(
            CfFamily::Pure { alpha: 0.3 }.asymptote(&FkFamily::Pow10).unwrap(),
            1.0,
            epsilon = 0.0
        );
        let tilde = CfFamily::TildeGamma {
            alpha: 0.9,
            theta: std::f64::consts::FRAC_PI_8,
        };
        assert_abs_diff_eq!(
            tilde.asymptote(&FkFamily::Pow10).unwrap(),
            0.81 * std::f64::consts::FRAC_PI_8.sin().powi(2),
            epsilon = 1e-15
        );
        assert!(CfFamily::Pure { alpha: 0.3 }
            .asymptote(&FkFamily::Constant { value: 0.1 })
            .is_err());
    }

    #[test]
    fn internal_consistency_t_and_s_squared() {
        let cases: Vec<(CfFamily, Vec<f64>)> = vec![
            (CfFamily::Pure { alpha: 0.37 }, vec![0.9, 0.7, 0.95]),
            (CfFamily::Gamma { m1: 0.6, alpha: 0.5 }, vec![0.99; 5]),
            (
                CfFamily::TildeGamma { alpha: 0.8, theta: 0.6 },
                vec![0.5, 0.9],
            ),
            (CfFamily::Werner { m: 0.9, theta: 0.3 }, vec![0.8; 4]),
        ];
        for (fam, s_list) in cases {
            let r = fam.evaluate(&s_list).unwrap();
            let sum: f64 = r.t_diag.iter().map(|t| t * t).sum();
            assert!(
                (sum - r.s_squared).abs() < 1e-14,
                "{}: {} vs {}",
                r.family,
                sum,
                r.s_squared
            );
        }
    }

    #[test]
    fn monotone_in_alpha() {
        let s_list = [0.9, 0.99];
        let mut last = 0.0;
        for i in 1..=10 {
            let alpha = 0.05 * i as f64;
            let v = pure_family(alpha, &s_list).unwrap().s_squared;
            assert!(v >= last, "not monotone at alpha = {alpha}");
            last = v;
        }
    }

    #[test]
    fn deep_evaluation_stays_finite() {
        // 500 rounds: naive 81^k accumulation would overflow near k = 170.
        let s_list = vec![0.999; 500];
        let r = pure_family(0.5, &s_list).unwrap();
        assert!(r.s_squared.is_finite());
        assert!(r.s_squared >= 0.0);
        let c = CfFamily::Werner { m: 0.9, theta: 0.2 }
            .evaluate(&vec![0.5; 500])
            .unwrap();
        assert!(c.s_squared.is_finite());
    }

    #[test]
    fn out_of_range_inputs_rejected() {
        assert!(pure_family(0.0, &[0.9]).is_err());
        assert!(pure_family(0.5, &[1.5]).is_err());
        assert!(gamma_family(0.0, 0.4, &[0.9]).is_err());
        assert!(gamma_family(0.5, 0.6, &[0.9]).is_err());
        assert!(tilde_family(0.5, 0.5, &[]).is_err());
        assert!(werner_family(1.0, 0.5, &[]).is_err());
        assert!(uniform_s_list(&FkFamily::Pow10, 400).is_err());
    }

    #[test]
    fn per_round_list_ramps() {
        let s = per_round_s_list(&FkFamily::Pow10, 3).unwrap();
        assert_eq!(s.len(), 3);
        assert_abs_diff_eq!(s[0], 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(s[1], 0.99, epsilon = 1e-15);
        assert_abs_diff_eq!(s[2], 0.999, epsilon = 1e-15);
    }
}
