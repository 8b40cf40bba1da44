//! Small dense eigen-solvers.

use nalgebra::{DMatrix, DVector};

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix.
///
/// Returns eigenvalues in nondecreasing order and the matching orthonormal
/// eigenvectors as columns. Only the upper triangle is trusted; the input is
/// symmetrized first.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    assert!(m.is_square(), "symmetric_eigen needs a square matrix");
    let mut a = (m + m.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = a.norm().max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

/// Two-sided Rayleigh quotient iteration for a simple real eigenvalue of a
/// (possibly nonsymmetric) matrix, started from approximate right/left
/// eigenvectors. Returns `(value, right, left)` on success.
pub fn refine_eigenpair(
    m: &DMatrix<f64>,
    right: &DVector<f64>,
    left: &DVector<f64>,
    max_iter: usize,
) -> Option<(f64, DVector<f64>, DVector<f64>)> {
    let n = m.nrows();
    let quotient = |r: &DVector<f64>, l: &DVector<f64>| {
        let denom = l.dot(r);
        (denom.abs() > 1e-300).then(|| l.dot(&(m * r)) / denom)
    };
    let mut x = right.normalize();
    let mut y = left.normalize();
    let mut theta = quotient(&x, &y)?;
    for _ in 0..max_iter {
        let shifted = m - DMatrix::identity(n, n) * theta;
        let lu = shifted.clone().lu();
        let (Some(xn), Some(yn)) = (lu.solve(&x), shifted.transpose().lu().solve(&y)) else {
            // exactly singular: theta is an eigenvalue to working precision
            break;
        };
        if !(xn.iter().all(|v| v.is_finite()) && yn.iter().all(|v| v.is_finite())) {
            break;
        }
        let (xn, yn) = (xn.normalize(), yn.normalize());
        let next = quotient(&xn, &yn)?;
        x = xn;
        y = yn;
        let step = (next - theta).abs();
        theta = next;
        if step <= 4.0 * f64::EPSILON * theta.abs().max(1.0) {
            break;
        }
    }
    Some((theta, x, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonal_and_two_by_two() {
        let (vals, _) = symmetric_eigen(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        assert!((vals[0] + 1.0).abs() < 1e-15 && (vals[1] - 1.0).abs() < 1e-15);
        let (vals, vecs) = symmetric_eigen(&DMatrix::from_diagonal(&DVector::from_vec(vec![
            3.0, -1.0, 2.0,
        ])));
        assert_eq!(vals, vec![-1.0, 2.0, 3.0]);
        assert_eq!(vecs[(1, 0)].abs(), 1.0);
    }

    #[test]
    fn jacobi_matches_nalgebra_on_random_symmetric() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in 2..12 {
            let r = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let s = &r + r.transpose();
            let (vals, vecs) = symmetric_eigen(&s);
            let mut oracle: Vec<f64> = s.clone().symmetric_eigenvalues().iter().copied().collect();
            oracle.sort_by(f64::total_cmp);
            for (a, b) in vals.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-12, "n={n}: {a} vs {b}");
            }
            let recon = &vecs * DMatrix::from_diagonal(&DVector::from_vec(vals)) * vecs.transpose();
            assert!((recon - &s).amax() < 1e-12);
        }
    }

    #[test]
    fn refine_recovers_nonsymmetric_eigenvalue() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.5, 3.0]);
        // eigenvalues 2 ± sqrt(2)
        let start = DVector::from_vec(vec![0.5, 1.0]);
        let (val, x, y) = refine_eigenpair(&m, &start, &start, 20).unwrap();
        assert!((val - (2.0 + 2f64.sqrt())).abs() < 1e-13);
        assert!((&m * &x - &x * val).amax() < 1e-12);
        assert!((m.transpose() * &y - &y * val).amax() < 1e-12);
    }
}
