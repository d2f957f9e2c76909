use crate::error::{Error, Result};

/// Smallest pivot magnitude accepted during elimination.
pub const MIN_PIVOT: f64 = 1e-14;

/// Solves a tridiagonal system by forward elimination and back
/// substitution (Thomas algorithm).
///
/// `sub[i]` multiplies `x[i-1]` and `sup[i]` multiplies `x[i+1]` in row
/// `i`; `sub[0]` and `sup[n-1]` are ignored. No pivoting is done, so the
/// matrix should be diagonally dominant by rows or by columns.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    assert!(sub.len() == n && sup.len() == n && rhs.len() == n, "tridiagonal bands must share one length");
    let mut x = rhs.to_vec();
    let mut scratch = vec![0.0; n];
    solve_in_place(sub, diag, sup, &mut x, &mut scratch)?;
    Ok(x)
}

/// Allocation-free variant: `x` holds the right-hand side on entry and the
/// solution on exit; `scratch` must have the same length.
pub(crate) fn solve_in_place(sub: &[f64], diag: &[f64], sup: &[f64], x: &mut [f64], scratch: &mut [f64]) -> Result<()> {
    let n = diag.len();
    if n == 0 {
        return Ok(());
    }
    let mut pivot = diag[0];
    if pivot.abs() < MIN_PIVOT || !pivot.is_finite() {
        return Err(Error::SingularSystem { row: 0, pivot });
    }
    x[0] /= pivot;
    for i in 1..n {
        scratch[i] = sup[i - 1] / pivot;
        pivot = diag[i] - sub[i] * scratch[i];
        if pivot.abs() < MIN_PIVOT || !pivot.is_finite() {
            return Err(Error::SingularSystem { row: i, pivot });
        }
        x[i] = (x[i] - sub[i] * x[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        x[i] -= scratch[i + 1] * x[i + 1];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_returns_rhs() {
        let n = 6;
        let r: Vec<f64> = (0..n).map(|i| i as f64 - 2.5).collect();
        let x = solve_tridiagonal(&vec![0.0; n], &vec![1.0; n], &vec![0.0; n], &r).unwrap();
        assert_eq!(x, r);
    }

    #[test]
    fn small_system_matches_dense_solution() {
        // [[2,-1,0],[-1,2,-1],[0,-1,2]] x = (1,0,1); Gaussian elimination by hand gives (1,1,1)
        let x = solve_tridiagonal(&[0.0, -1.0, -1.0], &[2.0; 3], &[-1.0, -1.0, 0.0], &[1.0, 0.0, 1.0]).unwrap();
        for xi in x {
            assert!((xi - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn random_dominant_system_has_small_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100;
        let sub: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let sup: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let diag: Vec<f64> = (0..n).map(|i| sub[i].abs() + sup[i].abs() + rng.gen_range(0.1..2.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let x = solve_tridiagonal(&sub, &diag, &sup, &b).unwrap();
        let mut res2 = 0.0;
        for i in 0..n {
            let mut ax = diag[i] * x[i];
            if i > 0 {
                ax += sub[i] * x[i - 1];
            }
            if i + 1 < n {
                ax += sup[i] * x[i + 1];
            }
            res2 += (ax - b[i]).powi(2);
        }
        let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(res2.sqrt() <= 1e-12 * bnorm);
    }

    #[test]
    fn zero_pivot_is_reported() {
        let r = solve_tridiagonal(&[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]);
        assert!(matches!(r, Err(Error::SingularSystem { row: 0, .. })));
        // second pivot: 1 - 1*1/1 = 0
        let r = solve_tridiagonal(&[0.0, 1.0], &[1.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]);
        assert!(matches!(r, Err(Error::SingularSystem { row: 1, .. })));
    }
}
