//! Unsharp dichotomic measurement effects, their operator square roots,
//! and the setting-averaged Luders channels that carry the shared state
//! from one observer pair to the next.

use crate::pauli::{kron, identity2, Axis, C64};
use crate::state::TwoQubitDensity;
use nalgebra::{Matrix2, Matrix3, Matrix4, Vector3};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("sharpness must lie in (0, 1] (got {value})")]
    SharpnessOutOfRange { value: f64 },
}

/// Which observer's qubit a channel acts on.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Side {
    Alice,
    Bob,
}

/// Outcome branch of a two-outcome effect: E or I - E.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

fn check_sharpness(value: f64) -> Result<(), ChannelError> {
    if value > 0.0 && value <= 1.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ChannelError::SharpnessOutOfRange { value })
    }
}

/// Per-axis sharpness parameters of one observer's three dichotomic
/// measurements, each in (0, 1]. The default strategy keeps the first two
/// axes equally unsharp and the third projective.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SharpnessTriple {
    lambdas: [f64; 3],
}

impl SharpnessTriple {
    pub fn new(l1: f64, l2: f64, l3: f64) -> Result<Self, ChannelError> {
        for v in [l1, l2, l3] {
            check_sharpness(v)?;
        }
        Ok(SharpnessTriple {
            lambdas: [l1, l2, l3],
        })
    }

    /// The (lambda, lambda, 1) strategy.
    pub fn xy_symmetric(lambda: f64) -> Result<Self, ChannelError> {
        Self::new(lambda, lambda, 1.0)
    }

    /// (lambda, lambda, 1) from the x/y unsharpness s = sqrt(1 - lambda^2),
    /// s in [0, 1). Computed as sqrt((1-s)(1+s)) to avoid cancellation.
    pub fn from_unsharpness(s: f64) -> Result<Self, ChannelError> {
        if !(0.0..1.0).contains(&s) {
            return Err(ChannelError::SharpnessOutOfRange {
                value: (1.0 - s * s).max(0.0).sqrt(),
            });
        }
        Self::xy_symmetric(((1.0 - s) * (1.0 + s)).sqrt())
    }

    pub fn lambda(&self, axis: Axis) -> f64 {
        self.lambdas[axis.index()]
    }

    pub fn lambdas(&self) -> [f64; 3] {
        self.lambdas
    }

    /// s = sqrt(1 - lambda^2) for the given axis.
    pub fn unsharpness(&self, axis: Axis) -> f64 {
        let l = self.lambdas[axis.index()];
        ((1.0 - l) * (1.0 + l)).sqrt()
    }
}

/// The effect (I + lambda sigma_i)/2 with eigenvalues (1 +- lambda)/2.
pub fn effect_operator(axis: Axis, lambda: f64) -> Result<Matrix2<C64>, ChannelError> {
    check_sharpness(lambda)?;
    Ok((identity2() + axis.matrix() * C64::new(lambda, 0.0)) * C64::new(0.5, 0.0))
}

/// Operator square root of (I +- eta sigma_i)/2:
/// (sqrt(1+eta) + sqrt(1-eta))/(2 sqrt 2) I +- (sqrt(1+eta) - sqrt(1-eta))/(2 sqrt 2) sigma_i.
pub fn sqrt_effect(axis: Axis, eta: f64, sign: Sign) -> Result<Matrix2<C64>, ChannelError> {
    check_sharpness(eta)?;
    let norm = 2.0 * std::f64::consts::SQRT_2;
    let cp = ((1.0 + eta).sqrt() + (1.0 - eta).sqrt()) / norm;
    let cm = ((1.0 + eta).sqrt() - (1.0 - eta).sqrt()) / norm;
    Ok(identity2() * C64::new(cp, 0.0) + axis.matrix() * C64::new(sign.factor() * cm, 0.0))
}

/// One observer's setting-averaged Luders update:
/// rho -> (1/3) sum_i [ sqrt(E_i) rho sqrt(E_i) + sqrt(I-E_i) rho sqrt(I-E_i) ]
/// with E_i lifted onto the given side. Trace-preserving, positivity-
/// preserving and unital; the averaging is an exact convex combination,
/// not outcome sampling.
pub fn luders_side_channel(
    rho: &TwoQubitDensity,
    side: Side,
    triple: &SharpnessTriple,
) -> TwoQubitDensity {
    let mut out: Matrix4<C64> = Matrix4::zeros();
    for axis in Axis::ALL {
        let lambda = triple.lambda(axis);
        for sign in [Sign::Plus, Sign::Minus] {
            let k2 = sqrt_effect(axis, lambda, sign).expect("triple is validated");
            let k4 = match side {
                Side::Alice => kron(&k2, &identity2()),
                Side::Bob => kron(&identity2(), &k2),
            };
            // sqrt effects are Hermitian, so K rho K^dagger = K rho K.
            out += k4 * rho.matrix() * k4;
        }
    }
    TwoQubitDensity::new_unchecked(out / C64::new(3.0, 0.0))
}

/// Both observers of one round act independently on their own factors;
/// the two side channels commute, so the composition order is immaterial.
pub fn round_channel(
    rho: &TwoQubitDensity,
    alice: &SharpnessTriple,
    bob: &SharpnessTriple,
) -> TwoQubitDensity {
    luders_side_channel(&luders_side_channel(rho, Side::Bob, bob), Side::Alice, alice)
}

/// Diagonal Bloch action of one side channel: component j of the local
/// Bloch vector (and the matching row/column of T) scales by
/// g_j = (1 + sum_{i != j} sqrt(1 - lambda_i^2)) / 3.
pub fn bloch_scaling(triple: &SharpnessTriple) -> Matrix3<f64> {
    let s: Vec<f64> = Axis::ALL.iter().map(|&a| triple.unsharpness(a)).collect();
    let g = Vector3::new(
        (1.0 + s[1] + s[2]) / 3.0,
        (1.0 + s[0] + s[2]) / 3.0,
        (1.0 + s[0] + s[1]) / 3.0,
    );
    Matrix3::from_diagonal(&g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_triple};
    use crate::state::StateFamily;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn sharp_z_effect_is_projector() {
        let e = effect_operator(Axis::Z, 1.0).unwrap();
        assert_abs_diff_eq!(e[(0, 0)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e[(1, 1)].re, 0.0, epsilon = 1e-15);
        assert!(e[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn x_effect_half_sharp() {
        let e = effect_operator(Axis::X, 0.5).unwrap();
        assert_abs_diff_eq!(e[(0, 0)].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(e[(0, 1)].re, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn effect_eigenvalues() {
        // (I + 0.8 sigma_x)/2 has eigenvalues {0.9, 0.1}.
        let e = effect_operator(Axis::X, 0.8).unwrap();
        let tr = e.trace().re;
        let det = (e[(0, 0)] * e[(1, 1)] - e[(0, 1)] * e[(1, 0)]).re;
        let disc = (tr * tr - 4.0 * det).sqrt();
        assert_abs_diff_eq!((tr + disc) / 2.0, 0.9, epsilon = 1e-14);
        assert_abs_diff_eq!((tr - disc) / 2.0, 0.1, epsilon = 1e-14);
    }

    #[test]
    fn sqrt_of_sharp_effect_is_projector() {
        let r = sqrt_effect(Axis::Z, 1.0, Sign::Plus).unwrap();
        assert_abs_diff_eq!(r[(0, 0)].re, 1.0, epsilon = 1e-15);
        assert!(r[(1, 1)].norm() < 1e-15);
    }

    #[test]
    fn sqrt_effect_squares_back() {
        let r = sqrt_effect(Axis::X, 0.6, Sign::Plus).unwrap();
        let e = effect_operator(Axis::X, 0.6).unwrap();
        assert!((r * r - e).norm() < 1e-14);
    }

    #[test]
    fn minus_branch_mirrors_plus_under_axis_flip() {
        // Conjugation by an anticommuting Pauli sends sigma_y -> -sigma_y,
        // so sigma_x sqrt(I + eta sigma_y) sigma_x = sqrt(I - eta sigma_y).
        let plus = sqrt_effect(Axis::Y, 0.3, Sign::Plus).unwrap();
        let minus = sqrt_effect(Axis::Y, 0.3, Sign::Minus).unwrap();
        let sx = Axis::X.matrix();
        assert!((sx * plus * sx - minus).norm() < 1e-14);
    }

    #[test]
    fn out_of_range_sharpness_is_rejected() {
        assert!(effect_operator(Axis::X, 0.0).is_err());
        assert!(effect_operator(Axis::X, 1.2).is_err());
        assert!(sqrt_effect(Axis::Z, -0.1, Sign::Plus).is_err());
        assert!(SharpnessTriple::new(0.5, 0.5, 0.0).is_err());
    }

    #[test]
    fn vanishing_sharpness_leaves_state_almost_unchanged() {
        let rho = StateFamily::Schmidt { alpha: 0.3 }.make_state().unwrap();
        let triple = SharpnessTriple::new(1e-6, 1e-6, 1e-6).unwrap();
        let out = luders_side_channel(&rho, Side::Bob, &triple);
        assert!((out.matrix() - rho.matrix()).norm() < 1e-5);
    }

    #[test]
    fn identity_is_fixed_by_any_triple() {
        let rho = crate::state::TwoQubitDensity::maximally_mixed();
        let triple = SharpnessTriple::new(0.7, 0.2, 0.9).unwrap();
        for side in [Side::Alice, Side::Bob] {
            let out = luders_side_channel(&rho, side, &triple);
            assert!((out.matrix() - rho.matrix()).norm() < 1e-15);
        }
    }

    #[test]
    fn bilateral_nondisturbing_xy_round_on_bell() {
        // lambda -> 0 on axes 1,2 (s -> 1) and sharp on axis 3 leaves the
        // dephasing of the z-measurement only: expected matrix coefficients
        // (9, 4, 0, 0, 4, 9)/18 as produced by the dense channel itself.
        let rho = crate::state::TwoQubitDensity::bell();
        let triple = SharpnessTriple::new(1e-9, 1e-9, 1.0).unwrap();
        let out = round_channel(&rho, &triple, &triple);
        let m = out.matrix();
        assert_abs_diff_eq!(m[(0, 0)].re, 9.0 / 18.0, epsilon = 1e-8);
        assert_abs_diff_eq!(m[(0, 3)].re, 4.0 / 18.0, epsilon = 1e-8);
        assert!(m[(1, 1)].norm() < 1e-8);
        assert_abs_diff_eq!(m[(3, 3)].re, 9.0 / 18.0, epsilon = 1e-8);
    }

    #[test]
    fn fully_sharp_bilateral_round_on_bell() {
        // lambda = 1 on every axis: s = t = 0, expected (5, 1, 4, 4, 1, 5)/18.
        let rho = crate::state::TwoQubitDensity::bell();
        let triple = SharpnessTriple::new(1.0, 1.0, 1.0).unwrap();
        let out = round_channel(&rho, &triple, &triple);
        let m = out.matrix();
        assert_abs_diff_eq!(m[(0, 0)].re, 5.0 / 18.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m[(0, 3)].re, 1.0 / 18.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m[(1, 1)].re, 4.0 / 18.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m[(2, 2)].re, 4.0 / 18.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m[(3, 3)].re, 5.0 / 18.0, epsilon = 1e-14);
    }

    #[test]
    fn product_state_stays_diagonal() {
        let mut m = Matrix4::zeros();
        m[(0, 0)] = C64::new(1.0, 0.0);
        let rho = crate::state::TwoQubitDensity::try_new(m).unwrap();
        let triple = SharpnessTriple::xy_symmetric(0.6).unwrap();
        let out = round_channel(&rho, &triple, &triple);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!(out.matrix()[(i, j)].norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn bob_side_update_has_stated_mixing_coefficients() {
        // For the (eta, eta, 1) triple the averaged update equals
        //   ( (3+2t)/2 rho + 1/2 Z rho Z + (1-t)/2 (X rho X + Y rho Y) ) / 3
        // with t = sqrt(1-eta^2) and X,Y,Z acting on Bob's factor.
        let eta: f64 = 0.35;
        let t = (1.0 - eta * eta).sqrt();
        let rho = random_density(&mut StdRng::seed_from_u64(3));
        let triple = SharpnessTriple::xy_symmetric(eta).unwrap();
        let out = luders_side_channel(&rho, Side::Bob, &triple);
        let lift = |a: Axis| kron(&identity2(), &a.matrix());
        let (x, y, z) = (lift(Axis::X), lift(Axis::Y), lift(Axis::Z));
        let expected = (rho.matrix() * C64::new((3.0 + 2.0 * t) / 2.0, 0.0)
            + z * rho.matrix() * z * C64::new(0.5, 0.0)
            + (x * rho.matrix() * x + y * rho.matrix() * y) * C64::new((1.0 - t) / 2.0, 0.0))
            / C64::new(3.0, 0.0);
        assert!((out.matrix() - expected).norm() < 1e-14);
    }

    #[test]
    fn bloch_scaling_xy_symmetric_matches_growth_factors() {
        let lambda: f64 = 0.6;
        let s = (1.0f64 - lambda * lambda).sqrt();
        let g = bloch_scaling(&SharpnessTriple::xy_symmetric(lambda).unwrap());
        assert_abs_diff_eq!(g[(0, 0)], (1.0 + s) / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g[(1, 1)], (1.0 + s) / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g[(2, 2)], (1.0 + 2.0 * s) / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn bloch_scaling_all_sharp() {
        let g = bloch_scaling(&SharpnessTriple::new(1.0, 1.0, 1.0).unwrap());
        for i in 0..3 {
            assert_abs_diff_eq!(g[(i, i)], 1.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn dense_channel_agrees_with_bloch_scaling() {
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..25 {
            let rho = random_density(&mut rng);
            let triple = random_triple(&mut rng);
            let g = bloch_scaling(&triple);
            let before = rho.to_bloch();
            let bob = luders_side_channel(&rho, Side::Bob, &triple).to_bloch();
            assert!((bob.a - before.a).norm() < 1e-12);
            assert!((bob.b - g * before.b).norm() < 1e-12);
            assert!((bob.t - before.t * g).norm() < 1e-12);
            let alice = luders_side_channel(&rho, Side::Alice, &triple).to_bloch();
            assert!((alice.a - g * before.a).norm() < 1e-12);
            assert!((alice.b - before.b).norm() < 1e-12);
            assert!((alice.t - g * before.t).norm() < 1e-12);
        }
    }

    #[test]
    fn first_round_correlation_matrix_on_bell() {
        // s = 0.9 on both sides: T = diag(1.9^2, -1.9^2, 2.8^2)/9.
        let s = 0.9;
        let triple = SharpnessTriple::from_unsharpness(s).unwrap();
        let out = round_channel(&crate::state::TwoQubitDensity::bell(), &triple, &triple);
        let t = out.to_bloch().t;
        assert_abs_diff_eq!(t[(0, 0)], 1.9 * 1.9 / 9.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t[(1, 1)], -1.9 * 1.9 / 9.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t[(2, 2)], 2.8 * 2.8 / 9.0, epsilon = 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn trace_and_commutation_hold(seed in 0u64..1u64 << 48) {
            let mut rng = StdRng::seed_from_u64(seed);
            let rho = random_density(&mut rng);
            let a = random_triple(&mut rng);
            let b = random_triple(&mut rng);
            let ab = luders_side_channel(&luders_side_channel(&rho, Side::Bob, &b), Side::Alice, &a);
            let ba = luders_side_channel(&luders_side_channel(&rho, Side::Alice, &a), Side::Bob, &b);
            prop_assert!((ab.matrix().trace().re - 1.0).abs() < 1e-12);
            prop_assert!((ab.matrix() - ba.matrix()).norm() < 1e-12);
        }

        #[test]
        fn kraus_squares_reproduce_effects(eta in 1e-6f64..=1.0) {
            for axis in Axis::ALL {
                let e = effect_operator(axis, eta).unwrap();
                let plus = sqrt_effect(axis, eta, Sign::Plus).unwrap();
                let minus = sqrt_effect(axis, eta, Sign::Minus).unwrap();
                prop_assert!((plus * plus - e).norm() < 1e-14);
                prop_assert!((minus * minus - (identity2() - e)).norm() < 1e-14);
            }
        }
    }
}
