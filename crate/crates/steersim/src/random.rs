//! Seeded random generators for states, unitaries and sharpness triples.
//! Everything takes the caller's RNG so runs stay reproducible.

use crate::channel::SharpnessTriple;
use crate::pauli::C64;
use crate::state::TwoQubitDensity;
use nalgebra::{Matrix2, Matrix4, Vector3, Vector4};
use rand::Rng;

fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box-Muller; one sample per call is plenty here.
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    (-2.0 * u1.ln()).sqrt() * u2.cos()
}

fn random_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(standard_normal(rng), standard_normal(rng))
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            standard_normal(rng),
            standard_normal(rng),
            standard_normal(rng),
        );
        let n = v.norm();
        if n > 1e-6 {
            return v / n;
        }
    }
}

/// Haar-distributed single-qubit unitary.
pub fn random_qubit_unitary<R: Rng + ?Sized>(rng: &mut R) -> Matrix2<C64> {
    let phi = rng.random_range(0.0..std::f64::consts::TAU);
    let psi = rng.random_range(0.0..std::f64::consts::TAU);
    let chi = rng.random_range(0.0..std::f64::consts::TAU);
    let xi: f64 = rng.random_range(0.0..1.0);
    let theta = xi.sqrt().asin();
    let (c, s) = (theta.cos(), theta.sin());
    Matrix2::new(
        C64::from_polar(c, phi),
        C64::from_polar(s, psi),
        -C64::from_polar(s, chi - psi + phi),
        C64::from_polar(c, chi),
    )
}

/// Random pure two-qubit state (Haar on the state vector).
pub fn random_pure_density<R: Rng + ?Sized>(rng: &mut R) -> TwoQubitDensity {
    loop {
        let v = Vector4::new(
            random_c64(rng),
            random_c64(rng),
            random_c64(rng),
            random_c64(rng),
        );
        let n = v.norm();
        if n > 1e-6 {
            if let Ok(rho) = TwoQubitDensity::from_pure(&(v / C64::new(n, 0.0))) {
                return rho;
            }
        }
    }
}

/// Random mixed two-qubit state from the Ginibre (Hilbert-Schmidt) ensemble.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R) -> TwoQubitDensity {
    loop {
        let g = Matrix4::from_fn(|_, _| random_c64(rng));
        let m = g * g.adjoint();
        let tr = m.trace().re;
        if tr > 1e-9 {
            if let Ok(rho) = TwoQubitDensity::try_new(m / C64::new(tr, 0.0)) {
                return rho;
            }
        }
    }
}

/// Random sharpness triple with every component in (0, 1].
pub fn random_triple<R: Rng + ?Sized>(rng: &mut R) -> SharpnessTriple {
    let mut draw = || rng.random_range(1e-3..=1.0);
    SharpnessTriple::new(draw(), draw(), draw()).expect("components drawn in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = StdRng::seed_from_u64(2);
        for _ in 0..100 {
            let u = random_qubit_unitary(&mut rng);
            assert!((u * u.adjoint() - Matrix2::identity()).norm() < 1e-12);
        }
    }

    #[test]
    fn random_densities_are_valid() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..50 {
            let rho = random_density(&mut rng);
            assert!(rho.diagnostics().passes());
            let pure = random_pure_density(&mut rng);
            assert!((pure.purity() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_vectors_have_unit_norm() {
        let mut rng = StdRng::seed_from_u64(4);
        for _ in 0..100 {
            assert!((random_unit_vector(&mut rng).norm() - 1.0).abs() < 1e-12);
        }
    }
}
