use super::{hypot, LinalgError};

const MAX_SWEEPS: usize = 60;

/// Implicit-shift QL on a symmetric tridiagonal matrix.
///
/// `diag` holds the diagonal, `off[i]` couples rows `i` and `i + 1`
/// (`off[n - 1]` is ignored). On return `diag` holds the eigenvalues in no
/// particular order. When `rows` is given it is an `n x n` row-major block
/// whose row `i` is rotated together with index `i`; passing the
/// transposed Householder basis yields eigenvectors as rows.
pub(crate) fn ql_implicit(diag: &mut [f64], off: &mut [f64], mut rows: Option<&mut [f64]>) -> Result<(), LinalgError> {
    let n = diag.len();
    debug_assert_eq!(off.len(), n);
    if n == 0 {
        return Ok(());
    }
    off[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut shift_sum = 0.0;
    let mut tst1: f64 = 0.0;

    for l in 0..n {
        tst1 = tst1.max(diag[l].abs() + off[l].abs());
        let mut m = l;
        while m < n - 1 {
            if off[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_SWEEPS {
                    return Err(LinalgError::ConvergenceFailure { index: l });
                }
                let g = diag[l];
                let mut p = (diag[l + 1] - g) / (2.0 * off[l]);
                let mut r = hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                diag[l] = off[l] / (p + r);
                diag[l + 1] = off[l] * (p + r);
                let dl1 = diag[l + 1];
                let mut h = g - diag[l];
                for d in diag.iter_mut().take(n).skip(l + 2) {
                    *d -= h;
                }
                shift_sum += h;

                p = diag[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = off[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * off[i];
                    h = c * p;
                    r = hypot(p, off[i]);
                    off[i + 1] = s * r;
                    s = off[i] / r;
                    c = p / r;
                    p = c * diag[i] - s * g;
                    diag[i + 1] = h + s * (c * g + s * diag[i]);

                    if let Some(z) = rows.as_deref_mut() {
                        let (lo, hi) = z.split_at_mut((i + 1) * n);
                        let zi = &mut lo[i * n..];
                        let zi1 = &mut hi[..n];
                        for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                            let t = *b;
                            *b = s * *a + c * t;
                            *a = c * *a - s * t;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * off[l] / dl1;
                off[l] = s * p;
                diag[l] = c * p;
                if off[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        diag[l] += shift_sum;
        off[l] = 0.0;
    }
    Ok(())
}

/// All eigenvalues of a symmetric tridiagonal matrix, ascending.
///
/// `off[i]` couples `i` and `i + 1`; its length must be `diag.len() - 1`
/// (or `diag.len()`, the last entry being ignored).
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let n = diag.len();
    if n == 0 {
        return Err(LinalgError::Empty);
    }
    if off.len() + 1 != n && off.len() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n - 1,
            found: off.len(),
        });
    }
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(&off[..n - 1]);
    ql_implicit(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_chain_matches_closed_form() {
        // -1, 2, -1 stencil: eigenvalues 2 - 2 cos(k pi / (n + 1))
        let n = 40;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        let vals = tridiagonal_eigenvalues(&diag, &off).unwrap();
        for (k, v) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13, "k={k}: {v} vs {exact}");
        }
    }

    #[test]
    fn decoupled_entries_are_returned_sorted() {
        let vals = tridiagonal_eigenvalues(&[3.0, -1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert_eq!(vals, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn rejects_mismatched_offdiagonal() {
        assert!(matches!(
            tridiagonal_eigenvalues(&[1.0, 2.0, 3.0], &[1.0]),
            Err(LinalgError::DimensionMismatch { .. })
        ));
    }
}
