//! Small dense row-major matrices for local computations (Vandermonde
//! inversion, element-level algebra).

use crate::error::{Error, Result};

/// Solves `A X = B` in place by Gaussian elimination with partial pivoting.
/// `a` is `n x n`, `b` is `n x m`, both row-major. On return `b` holds `X`.
pub(crate) fn solve_in_place(a: &mut [f64], b: &mut [f64], n: usize, m: usize) -> Result<()> {
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs()))
            .unwrap();
        if a[p * n + k] == 0.0 {
            return Err(Error::Singular { pivot: k });
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            for j in 0..m {
                b.swap(k * m + j, p * m + j);
            }
        }
        let piv = a[k * n + k];
        for i in k + 1..n {
            let f = a[i * n + k] / piv;
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                a[i * n + j] -= f * a[k * n + j];
            }
            for j in 0..m {
                b[i * m + j] -= f * b[k * m + j];
            }
        }
    }
    for k in (0..n).rev() {
        let piv = a[k * n + k];
        for j in 0..m {
            let mut s = b[k * m + j];
            for i in k + 1..n {
                s -= a[k * n + i] * b[i * m + j];
            }
            b[k * m + j] = s / piv;
        }
    }
    Ok(())
}

pub(crate) fn invert(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut a = a.to_vec();
    let mut x = vec![0.0; n * n];
    for i in 0..n {
        x[i * n + i] = 1.0;
    }
    solve_in_place(&mut a, &mut x, n, n)?;
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let mut a = vec![2.0, 1.0, 1.0, 3.0];
        let mut b = vec![3.0, 5.0];
        solve_in_place(&mut a, &mut b, 2, 1).unwrap();
        assert!((b[0] - 0.8).abs() < 1e-15 && (b[1] - 1.4).abs() < 1e-15);
    }

    #[test]
    fn singular() {
        assert!(matches!(
            invert(&[1.0, 2.0, 2.0, 4.0], 2),
            Err(Error::Singular { pivot: 1 })
        ));
    }
}
