//! The three-setting linear steering functional for explicit measurement
//! frames, its canonical maximum sqrt(Tr T^t T), and a numerical frame
//! maximizer that serves as an independent check of the canonical value.

use crate::pauli::{kron, Axis, C64};
use crate::state::TwoQubitDensity;
use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const UNIT_TOL: f64 = 1e-12;
const ORTHO_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SteeringError {
    #[error("frame must hold 2 or 3 directions per side (got {a} and {b})")]
    BadFrameSize { a: usize, b: usize },
    #[error("alice direction {index} is not a unit vector (norm {norm})")]
    NotUnit { index: usize, norm: f64 },
    #[error("bob directions {i} and {j} are not orthonormal (dot {dot})")]
    NotOrthonormal { i: usize, j: usize, dot: f64 },
    #[error("expected a 3-setting frame (got {n})")]
    NotThreeSettings { n: usize },
    #[error("need one sharpness per setting (got {got}, frame has {expected})")]
    SharpnessCountMismatch { got: usize, expected: usize },
    #[error("sharpness must lie in (0, 1] (got {value})")]
    SharpnessOutOfRange { value: f64 },
    #[error("restart budget must be at least 1")]
    NoRestarts,
}

/// Measurement directions: unit vectors for Alice, an orthonormal set for
/// Bob, either two or three settings per side.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementFrame {
    a_dirs: Vec<Vector3<f64>>,
    b_dirs: Vec<Vector3<f64>>,
}

impl MeasurementFrame {
    pub fn new(a_dirs: Vec<Vector3<f64>>, b_dirs: Vec<Vector3<f64>>) -> Result<Self, SteeringError> {
        if a_dirs.len() != b_dirs.len() || !(a_dirs.len() == 2 || a_dirs.len() == 3) {
            return Err(SteeringError::BadFrameSize {
                a: a_dirs.len(),
                b: b_dirs.len(),
            });
        }
        for (index, a) in a_dirs.iter().enumerate() {
            let norm = a.norm();
            if (norm - 1.0).abs() > UNIT_TOL {
                return Err(SteeringError::NotUnit { index, norm });
            }
        }
        for i in 0..b_dirs.len() {
            for j in i..b_dirs.len() {
                let dot = b_dirs[i].dot(&b_dirs[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                if (dot - target).abs() > ORTHO_TOL {
                    return Err(SteeringError::NotOrthonormal { i, j, dot });
                }
            }
        }
        Ok(MeasurementFrame { a_dirs, b_dirs })
    }

    /// Both sides measure along the coordinate axes.
    pub fn axes() -> Self {
        let e: Vec<Vector3<f64>> = (0..3).map(|i| Vector3::ith(i, 1.0)).collect();
        MeasurementFrame {
            a_dirs: e.clone(),
            b_dirs: e,
        }
    }

    /// Axis-aligned Bob frame with Alice directions sign-matched to the
    /// diagonal of T, the per-setting optimum for that Bob frame.
    pub fn sign_matched_axes(t: &Matrix3<f64>) -> Self {
        let b_dirs: Vec<Vector3<f64>> = (0..3).map(|i| Vector3::ith(i, 1.0)).collect();
        let a_dirs = optimal_a_for_b(t, &b_dirs);
        MeasurementFrame { a_dirs, b_dirs }
    }

    pub fn n(&self) -> usize {
        self.a_dirs.len()
    }

    pub fn a_dirs(&self) -> &[Vector3<f64>] {
        &self.a_dirs
    }

    pub fn b_dirs(&self) -> &[Vector3<f64>] {
        &self.b_dirs
    }
}

/// Canonical steering value of a state: s = sqrt(Tr T^t T).
/// Values above 1 witness steerability; the threshold itself does not.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteeringValue {
    pub s_squared: f64,
    pub s: f64,
    pub violating: bool,
}

impl SteeringValue {
    pub fn from_s_squared(s_squared: f64) -> Self {
        SteeringValue {
            s_squared,
            s: s_squared.sqrt(),
            violating: s_squared > 1.0,
        }
    }
}

/// t_ij = Tr(rho sigma_i (x) sigma_j).
pub fn correlation_matrix(rho: &TwoQubitDensity) -> Matrix3<f64> {
    rho.to_bloch().t
}

pub fn steering_value(rho: &TwoQubitDensity) -> SteeringValue {
    let t = correlation_matrix(rho);
    SteeringValue::from_s_squared((t.transpose() * t).trace())
}

fn correlator(rho: &TwoQubitDensity, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    let dir = |v: &Vector3<f64>| {
        Axis::ALL
            .iter()
            .fold(nalgebra::Matrix2::zeros(), |acc, &ax| {
                acc + ax.matrix() * C64::new(v[ax.index()], 0.0)
            })
    };
    (kron(&dir(a), &dir(b)) * rho.matrix()).trace().re
}

/// F_n for an explicit frame: (1/sqrt n) |sum_l <A_l (x) B_l>|.
pub fn cjwr_fn(rho: &TwoQubitDensity, frame: &MeasurementFrame) -> f64 {
    let sum: f64 = frame
        .a_dirs
        .iter()
        .zip(&frame.b_dirs)
        .map(|(a, b)| correlator(rho, a, b))
        .sum();
    sum.abs() / (frame.n() as f64).sqrt()
}

/// The three-setting functional F_3; the frame must carry three settings.
pub fn cjwr_f3(rho: &TwoQubitDensity, frame: &MeasurementFrame) -> Result<f64, SteeringError> {
    if frame.n() != 3 {
        return Err(SteeringError::NotThreeSettings { n: frame.n() });
    }
    Ok(cjwr_fn(rho, frame))
}

/// F_3 as observed through unsharp measurements: each correlator is
/// attenuated by the product of the two sides' sharpness for that setting.
/// Equals `cjwr_fn` when every sharpness is 1.
pub fn observed_cjwr(
    rho: &TwoQubitDensity,
    frame: &MeasurementFrame,
    alice_sharpness: &[f64],
    bob_sharpness: &[f64],
) -> Result<f64, SteeringError> {
    for side in [alice_sharpness, bob_sharpness] {
        if side.len() != frame.n() {
            return Err(SteeringError::SharpnessCountMismatch {
                got: side.len(),
                expected: frame.n(),
            });
        }
        for &v in side {
            if !(v > 0.0 && v <= 1.0) {
                return Err(SteeringError::SharpnessOutOfRange { value: v });
            }
        }
    }
    let sum: f64 = frame
        .a_dirs
        .iter()
        .zip(&frame.b_dirs)
        .zip(alice_sharpness.iter().zip(bob_sharpness))
        .map(|((a, b), (la, lb))| la * lb * correlator(rho, a, b))
        .sum();
    Ok(sum.abs() / (frame.n() as f64).sqrt())
}

/// Per-setting optimal Alice directions for a fixed Bob frame:
/// a_l = T b_l / ||T b_l||, falling back to the matching axis when the
/// image vanishes. For diagonal T and axis-aligned b this is exactly
/// sign(t_ll) e_l.
pub fn optimal_a_for_b(t: &Matrix3<f64>, b_dirs: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
    b_dirs
        .iter()
        .enumerate()
        .map(|(l, b)| {
            let img = t * b;
            let n = img.norm();
            if n > 0.0 {
                img / n
            } else {
                Vector3::ith(l % 3, 1.0)
            }
        })
        .collect()
}

/// Result of the frame search.
#[derive(Clone, Debug)]
pub struct MaximizeOutcome {
    pub value: f64,
    pub frame: MeasurementFrame,
    pub converged: bool,
}

fn objective(t: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
    (0..3).map(|l| (t * b.column(l)).norm()).sum()
}

fn is_diagonal(t: &Matrix3<f64>) -> bool {
    let scale = t.norm().max(1.0);
    (0..3).all(|i| {
        (0..3).all(|j| i == j || t[(i, j)].abs() < 1e-13 * scale)
    })
}

/// Orthogonal polar factor via the Newton iteration X <- (X + X^-T)/2.
fn polar3(m: &Matrix3<f64>) -> Option<Matrix3<f64>> {
    let scale = m.norm();
    if !scale.is_finite() || scale < 1e-300 {
        return None;
    }
    let mut x = m / scale;
    for _ in 0..80 {
        let inv = x.try_inverse()?;
        let next = (x + inv.transpose()) * 0.5;
        if (next - x).norm() < 1e-15 {
            return Some(next);
        }
        x = next;
    }
    Some(x)
}

/// Polar factor with a regularization retry for (near-)singular input;
/// mixing in a bit of the current frame keeps the step an ascent step.
fn polar3_robust(g: &Matrix3<f64>, current: &Matrix3<f64>) -> Matrix3<f64> {
    if let Some(p) = polar3(g) {
        if (p.transpose() * p - Matrix3::identity()).norm() < 1e-12 {
            return p;
        }
    }
    let mut delta = 1e-9 * (1.0 + g.norm());
    for _ in 0..8 {
        if let Some(p) = polar3(&(g + current * delta)) {
            if (p.transpose() * p - Matrix3::identity()).norm() < 1e-12 {
                return p;
            }
        }
        delta *= 100.0;
    }
    *current
}

/// Monotone fixed-point ascent on the orthogonal group: each step replaces
/// the frame by the polar factor of the subgradient matrix, which cannot
/// decrease the objective because ||T b|| is convex in b.
fn ascend(t: &Matrix3<f64>, mut b: Matrix3<f64>, thresh: f64, max_iters: usize) -> (f64, Matrix3<f64>, bool) {
    let tt = t.transpose() * t;
    let mut h = objective(t, &b);
    for _ in 0..max_iters {
        let mut g = Matrix3::zeros();
        for l in 0..3 {
            let col = b.column(l).into_owned();
            let n = (t * col).norm();
            if n > 1e-14 {
                g.set_column(l, &(tt * col / n));
            }
        }
        let next = polar3_robust(&g, &b);
        let hn = objective(t, &next);
        if hn > h {
            b = next;
        }
        if hn - h < thresh {
            return (h.max(hn), b, true);
        }
        h = hn;
    }
    (h, b, false)
}

fn random_orthonormal<R: Rng + ?Sized>(rng: &mut R) -> Matrix3<f64> {
    loop {
        let m = Matrix3::from_columns(&[
            crate::random::random_unit_vector(rng),
            crate::random::random_unit_vector(rng),
            crate::random::random_unit_vector(rng),
        ]);
        if let Some(q) = gram_schmidt(&m) {
            return q;
        }
    }
}

fn gram_schmidt(m: &Matrix3<f64>) -> Option<Matrix3<f64>> {
    let mut cols: Vec<Vector3<f64>> = Vec::with_capacity(3);
    for l in 0..3 {
        let mut v = m.column(l).into_owned();
        for c in &cols {
            v -= c * c.dot(&v);
        }
        let n = v.norm();
        if n < 1e-9 {
            return None;
        }
        cols.push(v / n);
    }
    Some(Matrix3::from_columns(&cols))
}

/// For a diagonal correlation matrix the optimum is reached at a frame
/// where the quadratic form b -> ||T b||^2 takes its average value on all
/// three directions; two explicit plane rotations construct one.
fn equalizing_frame(t: &Matrix3<f64>) -> Matrix3<f64> {
    let d = Vector3::new(
        t[(0, 0)] * t[(0, 0)],
        t[(1, 1)] * t[(1, 1)],
        t[(2, 2)] * t[(2, 2)],
    );
    let avg = (d[0] + d[1] + d[2]) / 3.0;
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let (lo, mid, hi) = (order[0], order[1], order[2]);
    if d[hi] - d[lo] < 1e-15 * (1.0 + avg) {
        return Matrix3::identity();
    }
    // First rotation in the (hi, lo) plane makes one direction average.
    let sin_sq = ((d[hi] - avg) / (d[hi] - d[lo])).clamp(0.0, 1.0);
    let (sb, cb) = (sin_sq.sqrt(), (1.0 - sin_sq).sqrt());
    let v1 = Vector3::ith(hi, cb) + Vector3::ith(lo, sb);
    let w = Vector3::ith(hi, -sb) + Vector3::ith(lo, cb);
    // The residual 2x2 block is diag(q, d_mid) with q + d_mid = 2 avg, so
    // the 45-degree rotation equalizes both remaining directions.
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let v2 = (w + Vector3::ith(mid, 1.0)) * r;
    let v3 = (-w + Vector3::ith(mid, 1.0)) * r;
    Matrix3::from_columns(&[v1, v2, v3])
}

/// Maximize F_3 over unit Alice directions and orthonormal Bob frames.
/// Diagonal correlation matrices take an exact two-rotation construction;
/// everything else runs the monotone ascent from `restarts` random frames.
/// The returned value is the independent check of the canonical
/// sqrt(Tr T^t T).
pub fn maximize_f3<R: Rng + ?Sized>(
    rho: &TwoQubitDensity,
    restarts: u32,
    tol: f64,
    rng: &mut R,
) -> Result<MaximizeOutcome, SteeringError> {
    if restarts < 1 {
        return Err(SteeringError::NoRestarts);
    }
    let t = correlation_matrix(rho);
    let sqrt3 = 3f64.sqrt();

    if t.norm() < 1e-14 {
        return Ok(MaximizeOutcome {
            value: 0.0,
            frame: MeasurementFrame::axes(),
            converged: true,
        });
    }

    let (raw, b, converged) = if is_diagonal(&t) {
        let b = equalizing_frame(&t);
        (objective(&t, &b), b, true)
    } else {
        let thresh = (tol * 1e-5).clamp(1e-15, 1e-9);
        let mut best: Option<(f64, Matrix3<f64>, bool)> = None;
        for r in 0..restarts {
            let b0 = if r == 0 {
                Matrix3::identity()
            } else {
                random_orthonormal(rng)
            };
            let out = ascend(&t, b0, thresh, 4000);
            if best.as_ref().map_or(true, |(h, _, _)| out.0 > *h) {
                best = Some(out);
            }
        }
        best.expect("at least one restart")
    };

    let b_dirs: Vec<Vector3<f64>> = (0..3).map(|l| b.column(l).into_owned()).collect();
    let a_dirs = optimal_a_for_b(&t, &b_dirs);
    Ok(MaximizeOutcome {
        value: raw / sqrt3,
        frame: MeasurementFrame::new(a_dirs, b_dirs)?,
        converged,
    })
}
