//! The few dense kernels the simulator needs. Matrices are row-major slices.

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y = M x` for a square `n x n` matrix.
pub(crate) fn matvec(m: &[f64], x: &[f64], y: &mut [f64]) {
    let n = x.len();
    for (i, yi) in y.iter_mut().enumerate() {
        *yi = dot(&m[i * n..(i + 1) * n], x);
    }
}

/// `(1/rows) X^T X` for a `rows x cols` matrix.
pub(crate) fn scaled_gram(x: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut g = vec![0.0; cols * cols];
    for r in 0..rows {
        let row = &x[r * cols..(r + 1) * cols];
        for i in 0..cols {
            let xi = row[i];
            if xi == 0.0 {
                continue;
            }
            for j in i..cols {
                g[i * cols + j] += xi * row[j];
            }
        }
    }
    let inv = 1.0 / rows as f64;
    for i in 0..cols {
        for j in i..cols {
            let v = g[i * cols + j] * inv;
            g[i * cols + j] = v;
            g[j * cols + i] = v;
        }
    }
    g
}

/// Orthonormalize the columns of a `rows x cols` matrix in place (two passes of
/// modified Gram-Schmidt). Returns `false` if the columns are dependent.
pub(crate) fn orthonormalize_columns(a: &mut [f64], rows: usize, cols: usize) -> bool {
    for j in 0..cols {
        for _pass in 0..2 {
            for k in 0..j {
                let proj: f64 = (0..rows).map(|r| a[r * cols + j] * a[r * cols + k]).sum();
                for r in 0..rows {
                    a[r * cols + j] -= proj * a[r * cols + k];
                }
            }
        }
        let n = (0..rows).map(|r| a[r * cols + j].powi(2)).sum::<f64>().sqrt();
        if !(n > 1e-12) {
            return false;
        }
        for r in 0..rows {
            a[r * cols + j] /= n;
        }
    }
    true
}

/// Solve `M x = b` for symmetric positive definite `M` by Cholesky.
pub(crate) fn cholesky_solve(m: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s = m[i * n + j] - (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum::<f64>();
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = (b[i] - (0..i).map(|k| l[i * n + k] * y[k]).sum::<f64>()) / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        x[i] = (y[i] - (i + 1..n).map(|k| l[k * n + i] * x[k]).sum::<f64>()) / l[i * n + i];
    }
    Some(x)
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration on the Rayleigh quotient.
pub(crate) fn top_eigenvalue(m: &[f64], n: usize, rel_tol: f64, max_iter: usize) -> f64 {
    // Deterministic start with no special alignment to coordinate axes.
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.1 * ((i as f64 + 1.0) * 0.754_877_666).fract())
        .collect();
    let n0 = norm(&v);
    v.iter_mut().for_each(|x| *x /= n0);
    let mut w = vec![0.0; n];
    let mut lambda = 0.0;
    for _ in 0..max_iter {
        matvec(m, &v, &mut w);
        let next = dot(&v, &w);
        let wn = norm(&w);
        if wn == 0.0 {
            return 0.0;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / wn;
        }
        let done = (next - lambda).abs() <= rel_tol * next.abs();
        lambda = next;
        if done {
            break;
        }
    }
    lambda
}
