//! Two-qubit states: dense density matrices, the Bloch/correlation-matrix
//! form, the built-in state families, and entanglement detection via the
//! partial-transpose criterion.

use crate::eigen::{hermitian_eigen, min_eigenvalue};
use crate::pauli::{kron, Axis, C64};
use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on the hermiticity defect of a density matrix.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Tolerance on |trace - 1|.
pub const TRACE_TOL: f64 = 1e-12;
/// Lower bound accepted for the minimum eigenvalue. Round-off accumulated
/// over ~100 channel applications stays above this at double precision.
pub const PSD_TOL: f64 = -1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("{name} must lie in {requirement} (got {value})")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("mixture weights m1+m2+m3 must sum to 1 (got {sum})")]
    WeightsNotNormalized { sum: f64 },
    #[error(
        "matrix is not a density operator: hermiticity defect {hermiticity_defect:.3e}, \
         trace defect {trace_defect:.3e}, min eigenvalue {min_eigenvalue:.3e}"
    )]
    NotAState {
        hermiticity_defect: f64,
        trace_defect: f64,
        min_eigenvalue: f64,
    },
    #[error("Bloch-form entry {name} out of [-1, 1] (got {value})")]
    BlochEntryOutOfRange { name: &'static str, value: f64 },
}

/// Defect measures of a candidate density matrix.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub hermiticity_defect: f64,
    pub trace_defect: f64,
    pub min_eigenvalue: f64,
}

impl Diagnostics {
    pub fn passes(&self) -> bool {
        self.hermiticity_defect <= HERMITICITY_TOL
            && self.trace_defect <= TRACE_TOL
            && self.min_eigenvalue >= PSD_TOL
    }
}

/// Measure the three density-matrix defects of an arbitrary 4x4 matrix.
/// Diagnostic only; callers decide what to do with the result.
pub fn validate_density(m: &Matrix4<C64>) -> Diagnostics {
    let mut herm: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            herm = herm.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    let trace_defect = (m.trace() - C64::new(1.0, 0.0)).norm();
    // The eigensolver assumes Hermitian input, so measure the spectrum of
    // the Hermitian part; for near-Hermitian input they agree to round-off.
    let herm_part = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let min_eigenvalue = min_eigenvalue(&herm_part);
    Diagnostics {
        hermiticity_defect: herm,
        trace_defect,
        min_eigenvalue,
    }
}

/// Local Bloch vectors and correlation matrix of a two-qubit state:
/// a_i = Tr(rho sigma_i (x) I), b_j = Tr(rho I (x) sigma_j),
/// t_ij = Tr(rho sigma_i (x) sigma_j). All entries lie in [-1, 1] for
/// physical states; `new` enforces the range, not positivity.
#[derive(Clone, Debug, PartialEq)]
pub struct BlochForm {
    pub a: Vector3<f64>,
    pub b: Vector3<f64>,
    pub t: Matrix3<f64>,
}

impl BlochForm {
    pub fn new(a: Vector3<f64>, b: Vector3<f64>, t: Matrix3<f64>) -> Result<Self, StateError> {
        let check = |name: &'static str, value: f64| {
            if !(-1.0..=1.0).contains(&value) || !value.is_finite() {
                Err(StateError::BlochEntryOutOfRange { name, value })
            } else {
                Ok(())
            }
        };
        for i in 0..3 {
            check("a", a[i])?;
            check("b", b[i])?;
            for j in 0..3 {
                check("t", t[(i, j)])?;
            }
        }
        Ok(BlochForm { a, b, t })
    }

    /// Form with zero local vectors and a diagonal correlation matrix.
    pub fn diagonal(t1: f64, t2: f64, t3: f64) -> Result<Self, StateError> {
        BlochForm::new(
            Vector3::zeros(),
            Vector3::zeros(),
            Matrix3::from_diagonal(&Vector3::new(t1, t2, t3)),
        )
    }
}

/// rho = (1/4)(I + a.sigma (x) I + I (x) b.sigma + sum_ij t_ij sigma_i (x) sigma_j).
/// Unvalidated: not every Bloch form yields a positive matrix, and callers
/// that need a state must run it through `TwoQubitDensity::try_new`.
pub fn bloch_matrix(bf: &BlochForm) -> Matrix4<C64> {
    let id2 = Matrix4::identity();
    let mut m: Matrix4<C64> = id2;
    for ax in Axis::ALL {
        let i = ax.index();
        let s = ax.matrix();
        m += kron(&s, &nalgebra::Matrix2::identity()) * C64::new(bf.a[i], 0.0);
        m += kron(&nalgebra::Matrix2::identity(), &s) * C64::new(bf.b[i], 0.0);
        for bx in Axis::ALL {
            let j = bx.index();
            m += kron(&s, &bx.matrix()) * C64::new(bf.t[(i, j)], 0.0);
        }
    }
    m * C64::new(0.25, 0.0)
}

/// A validated two-qubit density matrix in the fixed
/// |00>, |01>, |10>, |11> basis. Construction enforces hermiticity,
/// unit trace and positivity, so downstream operations are infallible.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoQubitDensity {
    m: Matrix4<C64>,
}

impl TwoQubitDensity {
    pub fn try_new(m: Matrix4<C64>) -> Result<Self, StateError> {
        let d = validate_density(&m);
        if d.passes() {
            Ok(TwoQubitDensity { m })
        } else {
            Err(StateError::NotAState {
                hermiticity_defect: d.hermiticity_defect,
                trace_defect: d.trace_defect,
                min_eigenvalue: d.min_eigenvalue,
            })
        }
    }

    /// For channel outputs, which preserve validity by construction.
    pub(crate) fn new_unchecked(m: Matrix4<C64>) -> Self {
        TwoQubitDensity { m }
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.m
    }

    pub fn diagnostics(&self) -> Diagnostics {
        validate_density(&self.m)
    }

    /// Projector onto (|00> + |11>)/sqrt(2).
    pub fn bell() -> Self {
        StateFamily::Bell.make_state().expect("bell state is valid")
    }

    pub fn maximally_mixed() -> Self {
        TwoQubitDensity {
            m: Matrix4::identity() * C64::new(0.25, 0.0),
        }
    }

    pub fn from_pure(v: &Vector4<C64>) -> Result<Self, StateError> {
        Self::try_new(v * v.adjoint())
    }

    /// Validating counterpart of `bloch_matrix`.
    pub fn from_bloch(bf: &BlochForm) -> Result<Self, StateError> {
        Self::try_new(bloch_matrix(bf))
    }

    pub fn to_bloch(&self) -> BlochForm {
        let id2 = nalgebra::Matrix2::identity();
        let tr = |op: Matrix4<C64>| (op * self.m).trace().re;
        let mut a = Vector3::zeros();
        let mut b = Vector3::zeros();
        let mut t = Matrix3::zeros();
        for ax in Axis::ALL {
            let i = ax.index();
            a[i] = tr(kron(&ax.matrix(), &id2));
            b[i] = tr(kron(&id2, &ax.matrix()));
            for bx in Axis::ALL {
                t[(i, bx.index())] = tr(kron(&ax.matrix(), &bx.matrix()));
            }
        }
        BlochForm { a, b, t }
    }

    /// Transpose on Bob's factor: (i,k),(j,l) -> (i,l),(j,k) on the
    /// 2x2 block structure. Hermitian with unit trace, but not
    /// necessarily positive.
    pub fn partial_transpose(&self) -> Matrix4<C64> {
        let mut out = Matrix4::zeros();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        out[(2 * i + k, 2 * j + l)] = self.m[(2 * i + l, 2 * j + k)];
                    }
                }
            }
        }
        out
    }

    /// Peres-Horodecki check, necessary and sufficient for two qubits.
    /// Returns the verdict and the minimum partial-transpose eigenvalue.
    pub fn is_entangled_ppt(&self) -> (bool, f64) {
        let min = min_eigenvalue(&self.partial_transpose());
        (min < PSD_TOL, min)
    }

    pub fn purity(&self) -> f64 {
        (self.m * self.m).trace().re
    }

    /// Eigenvalues of the state, ascending.
    pub fn eigenvalues(&self) -> [f64; 4] {
        hermitian_eigen(&self.m).values
    }
}

/// The built-in initial-state families and their admissible parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum StateFamily {
    /// Maximally entangled (|00> + |11>)/sqrt(2).
    Bell,
    /// Pure state sqrt(alpha)|00> + sqrt(1-alpha)|11>, alpha in (0, 1).
    Schmidt { alpha: f64 },
    /// m1 |phi><phi| + m2 |00><00| + m3 |11><11| with |phi> the Schmidt
    /// state; m1 in (0, 1], m2, m3 >= 0, m1+m2+m3 = 1, alpha in (0, 1/2].
    Gamma { m1: f64, m2: f64, m3: f64, alpha: f64 },
    /// Bell-diagonal state with correlation matrix
    /// diag(-cos theta, -alpha sin theta, -alpha sin theta);
    /// alpha in (sqrt(2)/2, 1], theta in (0, pi/4].
    TildeGamma { alpha: f64, theta: f64 },
    /// m |phi'><phi'| + (1-m) I/4 with |phi'> = cos theta |00> + sin theta |11>;
    /// m in [0, 1), theta in [0, pi/4].
    Werner { m: f64, theta: f64 },
}

fn require(
    ok: bool,
    name: &'static str,
    requirement: &'static str,
    value: f64,
) -> Result<(), StateError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(StateError::InvalidParameter {
            name,
            requirement,
            value,
        })
    }
}

impl StateFamily {
    pub fn validate(&self) -> Result<(), StateError> {
        match *self {
            StateFamily::Bell => Ok(()),
            StateFamily::Schmidt { alpha } => {
                require(alpha > 0.0 && alpha < 1.0, "alpha", "(0, 1)", alpha)
            }
            StateFamily::Gamma { m1, m2, m3, alpha } => {
                require(m1 > 0.0 && m1 <= 1.0, "m1", "(0, 1]", m1)?;
                require(m2 >= 0.0, "m2", "[0, 1]", m2)?;
                require(m3 >= 0.0, "m3", "[0, 1]", m3)?;
                let sum = m1 + m2 + m3;
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(StateError::WeightsNotNormalized { sum });
                }
                require(alpha > 0.0 && alpha <= 0.5, "alpha", "(0, 1/2]", alpha)
            }
            StateFamily::TildeGamma { alpha, theta } => {
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
            StateFamily::Werner { m, theta } => {
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

    pub fn make_state(&self) -> Result<TwoQubitDensity, StateError> {
        self.validate()?;
        let z = C64::new(0.0, 0.0);
        let state = match *self {
            StateFamily::Bell => schmidt_projector(0.5),
            StateFamily::Schmidt { alpha } => schmidt_projector(alpha),
            StateFamily::Gamma { m1, m2, m3, alpha } => {
                let mut m = schmidt_projector(alpha) * C64::new(m1, 0.0);
                m[(0, 0)] += C64::new(m2, 0.0);
                m[(3, 3)] += C64::new(m3, 0.0);
                m
            }
            StateFamily::TildeGamma { alpha, theta } => {
                let bf = BlochForm::diagonal(
                    -theta.cos(),
                    -alpha * theta.sin(),
                    -alpha * theta.sin(),
                )?;
                bloch_matrix(&bf)
            }
            StateFamily::Werner { m, theta } => {
                let v = Vector4::new(C64::new(theta.cos(), 0.0), z, z, C64::new(theta.sin(), 0.0));
                let proj: Matrix4<C64> = v * v.adjoint();
                proj * C64::new(m, 0.0) + Matrix4::identity() * C64::new((1.0 - m) / 4.0, 0.0)
            }
        };
        TwoQubitDensity::try_new(state)
    }

    /// Short display label, e.g. `werner(m=0.95, theta=0.7853981633974483)`.
    pub fn label(&self) -> String {
        match *self {
            StateFamily::Bell => "bell".to_string(),
            StateFamily::Schmidt { alpha } => format!("schmidt(alpha={alpha})"),
            StateFamily::Gamma { m1, m2, m3, alpha } => {
                format!("gamma(m1={m1}, m2={m2}, m3={m3}, alpha={alpha})")
            }
            StateFamily::TildeGamma { alpha, theta } => {
                format!("tilde_gamma(alpha={alpha}, theta={theta})")
            }
            StateFamily::Werner { m, theta } => format!("werner(m={m}, theta={theta})"),
        }
    }
}

fn schmidt_projector(alpha: f64) -> Matrix4<C64> {
    let z = C64::new(0.0, 0.0);
    let v = Vector4::new(
        C64::new(alpha.sqrt(), 0.0),
        z,
        z,
        C64::new((1.0 - alpha).sqrt(), 0.0),
    );
    v * v.adjoint()
}
