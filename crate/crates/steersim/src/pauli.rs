//! Pauli operators and tensor-product helpers for the fixed
//! |00>, |01>, |10>, |11> basis.

use nalgebra::{Complex, Matrix2, Matrix4};

pub type C64 = Complex<f64>;

/// Measurement axis, identified with the Pauli operator it selects.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// Zero-based index into Bloch-vector components.
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn matrix(self) -> Matrix2<C64> {
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        match self {
            Axis::X => Matrix2::new(z, one, one, z),
            Axis::Y => Matrix2::new(z, C64::new(0.0, -1.0), C64::new(0.0, 1.0), z),
            Axis::Z => Matrix2::new(one, z, z, -one),
        }
    }
}

pub fn identity2() -> Matrix2<C64> {
    Matrix2::identity()
}

/// Tensor product with the first factor acting on Alice's qubit.
pub fn kron(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Matrix4<C64> {
    let mut out = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Lift a single-qubit operator onto Alice's factor.
pub fn lift_alice(op: &Matrix2<C64>) -> Matrix4<C64> {
    kron(op, &identity2())
}

/// Lift a single-qubit operator onto Bob's factor.
pub fn lift_bob(op: &Matrix2<C64>) -> Matrix4<C64> {
    kron(&identity2(), op)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_matrices_square_to_identity() {
        for axis in Axis::ALL {
            let m = axis.matrix();
            let sq = m * m;
            assert!((sq - Matrix2::identity()).norm() < 1e-15);
        }
    }

    #[test]
    fn pauli_traceless_hermitian() {
        for axis in Axis::ALL {
            let m = axis.matrix();
            assert!(m.trace().norm() < 1e-15);
            assert!((m - m.adjoint()).norm() < 1e-15);
        }
    }

    #[test]
    fn kron_matches_block_structure() {
        let sx = Axis::X.matrix();
        let sz = Axis::Z.matrix();
        let k = kron(&sz, &sx);
        // diag(sx, -sx)
        assert_eq!(k[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(k[(2, 3)], C64::new(-1.0, 0.0));
        assert_eq!(k[(0, 2)], C64::new(0.0, 0.0));
    }

    #[test]
    fn lifted_factors_commute() {
        let a = lift_alice(&Axis::Y.matrix());
        let b = lift_bob(&Axis::X.matrix());
        assert!((a * b - b * a).norm() < 1e-15);
    }
}
