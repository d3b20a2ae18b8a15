//! Self-contained eigensolver for 4x4 Hermitian matrices.
//!
//! Cyclic Jacobi with complex Givens rotations. Off-diagonal entries are
//! phase-rotated to real before each plane rotation, so every step operates
//! on a real symmetric 2x2 block. Reaches ~1e-15 residual on Hermitian
//! input in a handful of sweeps.

use crate::pauli::C64;
use nalgebra::Matrix4;

const MAX_SWEEPS: usize = 64;

/// Eigendecomposition of a Hermitian matrix: `values` ascending,
/// `vectors` column `l` belongs to `values[l]`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: [f64; 4],
    pub vectors: Matrix4<C64>,
}

fn off_diag_sq(a: &Matrix4<C64>) -> f64 {
    let mut sum = 0.0;
    for p in 0..4 {
        for q in (p + 1)..4 {
            sum += a[(p, q)].norm_sqr();
        }
    }
    sum
}

/// Diagonalize a Hermitian 4x4 matrix. The caller is responsible for
/// passing Hermitian input; only the upper triangle drives the rotations.
pub fn hermitian_eigen(m: &Matrix4<C64>) -> HermitianEigen {
    let mut a = *m;
    let mut v: Matrix4<C64> = Matrix4::identity();
    let scale = a.norm().max(1.0);
    let tol_sq = (1e-16 * scale) * (1e-16 * scale);

    for _ in 0..MAX_SWEEPS {
        if off_diag_sq(&a) <= tol_sq {
            break;
        }
        for p in 0..4 {
            for q in (p + 1)..4 {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r * r <= tol_sq / 16.0 {
                    continue;
                }
                let u = apq / r; // unit phase of the off-diagonal entry
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Real symmetric Schur rotation on [[app, r], [r, aqq]].
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Combined unitary W = diag(1, conj(u)) . [[c, s], [-s, c]]
                let wpp = C64::new(c, 0.0);
                let wpq = C64::new(s, 0.0);
                let wqp = -u.conj() * s;
                let wqq = u.conj() * c;

                // A <- W^dagger A W, touching rows/columns p and q only.
                for i in 0..4 {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * wpp + aiq * wqp;
                    a[(i, q)] = aip * wpq + aiq * wqq;
                }
                for j in 0..4 {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = wpp.conj() * apj + wqp.conj() * aqj;
                    a[(q, j)] = wpq.conj() * apj + wqq.conj() * aqj;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

                for i in 0..4 {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * wpp + viq * wqp;
                    v[(i, q)] = vip * wpq + viq * wqq;
                }
            }
        }
    }

    let mut order = [0usize, 1, 2, 3];
    let diag = [a[(0, 0)].re, a[(1, 1)].re, a[(2, 2)].re, a[(3, 3)].re];
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));

    let mut values = [0.0; 4];
    let mut vectors = Matrix4::zeros();
    for (slot, &idx) in order.iter().enumerate() {
        values[slot] = diag[idx];
        for row in 0..4 {
            vectors[(row, slot)] = v[(row, idx)];
        }
    }
    HermitianEigen { values, vectors }
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &Matrix4<C64>) -> f64 {
    hermitian_eigen(m).values[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{kron, Axis};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_hermitian(rng: &mut StdRng) -> Matrix4<C64> {
        let mut m = Matrix4::zeros();
        for i in 0..4 {
            m[(i, i)] = C64::new(rng.random_range(-1.0..1.0), 0.0);
            for j in (i + 1)..4 {
                let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    fn residual(m: &Matrix4<C64>, e: &HermitianEigen) -> f64 {
        let mut lambda = Matrix4::zeros();
        for i in 0..4 {
            lambda[(i, i)] = C64::new(e.values[i], 0.0);
        }
        (m * e.vectors - e.vectors * lambda).norm()
    }

    #[test]
    fn diagonal_input_is_fixed_point() {
        let mut m = Matrix4::zeros();
        for (i, d) in [0.3, -0.1, 0.9, 0.0].iter().enumerate() {
            m[(i, i)] = C64::new(*d, 0.0);
        }
        let e = hermitian_eigen(&m);
        assert_eq!(e.values, [-0.1, 0.0, 0.3, 0.9]);
    }

    #[test]
    fn bell_projector_spectrum() {
        // (|00> + |11>)/sqrt(2) projector has eigenvalues {1, 0, 0, 0}.
        let mut m = Matrix4::zeros();
        let h = C64::new(0.5, 0.0);
        m[(0, 0)] = h;
        m[(0, 3)] = h;
        m[(3, 0)] = h;
        m[(3, 3)] = h;
        let e = hermitian_eigen(&m);
        assert!(e.values[0].abs() < 1e-15);
        assert!((e.values[3] - 1.0).abs() < 1e-15);
        assert!(residual(&m, &e) < 1e-13);
    }

    #[test]
    fn pauli_tensor_spectrum() {
        // sigma_y (x) sigma_y has eigenvalues {-1, -1, 1, 1}.
        let m = kron(&Axis::Y.matrix(), &Axis::Y.matrix());
        let e = hermitian_eigen(&m);
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[3] - 1.0).abs() < 1e-14);
        assert!(residual(&m, &e) < 1e-13);
    }

    #[test]
    fn random_hermitian_residual_below_1e12() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..200 {
            let m = random_hermitian(&mut rng);
            let e = hermitian_eigen(&m);
            assert!(residual(&m, &e) < 1e-12, "residual too large");
            // eigenvector orthonormality
            let g = e.vectors.adjoint() * e.vectors;
            assert!((g - Matrix4::identity()).norm() < 1e-12);
        }
    }

    #[test]
    fn trace_is_preserved() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..50 {
            let m = random_hermitian(&mut rng);
            let e = hermitian_eigen(&m);
            let sum: f64 = e.values.iter().sum();
            assert!((sum - m.trace().re).abs() < 1e-12);
        }
    }
}
