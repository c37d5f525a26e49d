//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, RowVector3, SMatrix, Vector2, Vector3};

/// Moore-Penrose pseudoinverse through the SVD. Singular values at or below
/// `rel_tol * sigma_max` are treated as zero.
pub fn pinv<const R: usize, const C: usize>(a: &SMatrix<f64, R, C>, rel_tol: f64) -> SMatrix<f64, C, R> {
    let dyn_a = DMatrix::from_column_slice(R, C, a.as_slice());
    let svd = dyn_a.svd(true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = rel_tol * sigma_max;
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let mut out = SMatrix::<f64, C, R>::zeros();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff || s == 0.0 {
            continue;
        }
        // v_k * u_k^T / s
        for i in 0..C {
            for j in 0..R {
                out[(i, j)] += v_t[(k, i)] * u[(j, k)] / s;
            }
        }
    }
    out
}

/// Singular values in descending order.
pub fn singular_values<const R: usize, const C: usize>(a: &SMatrix<f64, R, C>) -> Vec<f64> {
    let dyn_a = DMatrix::from_column_slice(R, C, a.as_slice());
    let mut s: Vec<f64> = dyn_a.singular_values().iter().cloned().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Right pseudoinverse of a nonzero row: h^T / (h h^T).
pub fn row_pinv(h: &RowVector3<f64>) -> Vector3<f64> {
    h.transpose() / h.norm_squared()
}

/// Unit vector at angle `a`.
#[inline]
pub fn unit(a: f64) -> Vector2<f64> {
    Vector2::new(a.cos(), a.sin())
}

/// Unit vector at angle `a + pi/2` (derivative of `unit` w.r.t. the angle).
#[inline]
pub fn unit_perp(a: f64) -> Vector2<f64> {
    Vector2::new(-a.sin(), a.cos())
}

/// Planar cross product (z component).
#[inline]
pub fn cross2(a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

pub fn is_symmetric_positive_definite<const N: usize>(m: &SMatrix<f64, N, N>) -> bool {
    let scale = m.amax().max(1.0);
    if (m - m.transpose()).amax() > 1e-12 * scale {
        return false;
    }
    m.cholesky().is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix2x3;

    #[test]
    fn pinv_of_full_row_rank_matches_right_inverse() {
        let a = Matrix2x3::new(1.0, 2.0, 0.5, -0.3, 0.7, 1.1);
        let p = pinv(&a, 1e-12);
        let right = a.transpose() * (a * a.transpose()).try_inverse().unwrap();
        assert!((p - right).amax() < 1e-12);
    }

    #[test]
    fn pinv_drops_small_singular_values() {
        let a = Matrix2x3::new(1.0, 0.0, 0.0, 0.0, 1e-12, 0.0);
        let p = pinv(&a, 1e-8);
        assert_eq!(p[(1, 1)], 0.0);
        assert!((p[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn spd_check() {
        let good = nalgebra::Matrix2::new(2.0, 0.5, 0.5, 1.0);
        let asym = nalgebra::Matrix2::new(2.0, 0.5, 0.4, 1.0);
        let indef = nalgebra::Matrix2::new(1.0, 0.0, 0.0, -1.0);
        assert!(is_symmetric_positive_definite(&good));
        assert!(!is_symmetric_positive_definite(&asym));
        assert!(!is_symmetric_positive_definite(&indef));
    }
}
