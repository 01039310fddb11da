//! Small dense helpers: determinants and singular values of rectangular
//! matrices given as rows.

use crate::scalar::Scalar;

/// Determinant by Gaussian elimination with partial pivoting.
/// An empty (0 × 0) matrix has determinant 1.
pub fn determinant<T: Scalar>(rows: &[Vec<T>]) -> T {
    let n = rows.len();
    let mut a: Vec<Vec<T>> = rows.to_vec();
    let mut det = T::one();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[pivot][col] == T::zero() {
            return T::zero();
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        for r in (col + 1)..n {
            let factor = a[r][col] / p;
            if factor == T::zero() {
                continue;
            }
            for c in col..n {
                let upd = factor * a[col][c];
                a[r][c] -= upd;
            }
        }
    }
    det
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot vanishes.
pub fn solve<T: Scalar>(a: &[Vec<T>], b: &[T]) -> Option<Vec<T>> {
    let n = a.len();
    let mut m: Vec<Vec<T>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        if m[pivot][col] == T::zero() || !m[pivot][col].is_finite() {
            return None;
        }
        m.swap(pivot, col);
        let p = m[col][col];
        for r in (col + 1)..n {
            let factor = m[r][col] / p;
            for c in col..=n {
                let upd = factor * m[col][c];
                m[r][c] -= upd;
            }
        }
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut acc = m[i][n];
        for j in (i + 1)..n {
            acc -= m[i][j] * x[j];
        }
        x[i] = acc / m[i][i];
    }
    Some(x)
}

/// Singular values (descending) of the matrix whose rows are given, by
/// one-sided Jacobi orthogonalization of the rows.
pub fn singular_values<T: Scalar>(rows: &[Vec<T>]) -> Vec<T> {
    let m = rows.len();
    let mut r: Vec<Vec<T>> = rows.to_vec();
    let tol = T::epsilon() * T::of(4.0);
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..m {
            for q in (p + 1)..m {
                let alpha: T = r[p].iter().map(|&x| x * x).sum();
                let beta: T = r[q].iter().map(|&x| x * x).sum();
                let gamma: T = r[p].iter().zip(&r[q]).map(|(&x, &y)| x * y).sum();
                if gamma == T::zero() || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (gamma + gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = r.split_at_mut(q);
                for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let (xp, xq) = (*x, *y);
                    *x = c * xp - s * xq;
                    *y = s * xp + c * xq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<T> = r
        .iter()
        .map(|row| row.iter().map(|&x| x * x).sum::<T>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinants() {
        assert_eq!(determinant::<f64>(&[]), 1.0);
        assert_eq!(determinant(&[vec![2.0]]), 2.0);
        let d: f64 = determinant(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!((d + 1.0).abs() < 1e-15);
        let d: f64 = determinant(&[
            vec![2.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ]);
        assert_eq!(d, 0.0);
        let d: f64 = determinant(&[
            vec![1.0, 2.0, 3.0],
            vec![4.0, 5.0, 6.0],
            vec![7.0, 8.0, 10.0],
        ]);
        assert!((d + 3.0).abs() < 1e-12);
    }

    #[test]
    fn linear_solve() {
        let x: Vec<f64> = solve(&[vec![0.0, 2.0], vec![1.0, 1.0]], &[4.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
        assert!(solve(&[vec![1.0, 2.0], vec![2.0, 4.0]], &[1.0, 1.0]).is_none());
    }

    #[test]
    fn singular_values_of_known_matrices() {
        let sv: Vec<f64> = singular_values(&[vec![3.0, 0.0, 0.0], vec![0.0, -4.0, 0.0]]);
        assert!((sv[0] - 4.0).abs() < 1e-14 && (sv[1] - 3.0).abs() < 1e-14);

        // dependent rows
        let sv: Vec<f64> = singular_values(&[vec![1.0, 2.0, 2.0], vec![2.0, 4.0, 4.0]]);
        assert!((sv[0] - 45.0f64.sqrt()).abs() < 1e-12);
        assert!(sv[1].abs() < 1e-14);

        // [[1,1],[0,1]]: sigma = golden ratio and its inverse
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        let sv: Vec<f64> = singular_values(&[vec![1.0, 1.0], vec![0.0, 1.0]]);
        assert!((sv[0] - phi).abs() < 1e-14 && (sv[1] - 1.0 / phi).abs() < 1e-14);
    }
}
