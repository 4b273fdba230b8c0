//! Small dense solvers shared by the flow stepper and the reparametrization:
//! Thomas elimination for (cyclic) tridiagonal systems, Gaussian elimination
//! for the junction Newton updates, not-a-knot cubic splines and least-squares
//! line fits.

/// Solve a tridiagonal system in place. `lower[0]` and `upper[n-1]` are unused.
/// Returns `None` when a pivot vanishes.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
) -> Option<()> {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    if n == 0 {
        return Some(());
    }
    let mut c_star = vec![0.0; n];
    let mut piv = diag[0];
    if piv == 0.0 {
        return None;
    }
    c_star[0] = upper[0] / piv;
    rhs[0] /= piv;
    for i in 1..n {
        piv = diag[i] - lower[i] * c_star[i - 1];
        if piv == 0.0 {
            return None;
        }
        c_star[i] = upper[i] / piv;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / piv;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c_star[i] * rhs[i + 1];
    }
    Some(())
}

/// Solve a cyclic tridiagonal system (`lower[0]` couples row 0 to row n-1,
/// `upper[n-1]` couples row n-1 to row 0) by the Sherman–Morrison correction.
pub fn solve_cyclic_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
) -> Option<()> {
    let n = diag.len();
    if n < 3 {
        return None;
    }
    let alpha = lower[0];
    let beta = upper[n - 1];
    let gamma = -diag[0];

    let mut d = diag.to_vec();
    d[0] -= gamma;
    d[n - 1] -= alpha * beta / gamma;

    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = beta;

    let mut y = rhs.to_vec();
    solve_tridiagonal(lower, &d, upper, &mut y)?;
    solve_tridiagonal(lower, &d, upper, &mut u)?;

    let fact = (y[0] + alpha * y[n - 1] / gamma) / (1.0 + u[0] + alpha * u[n - 1] / gamma);
    for i in 0..n {
        rhs[i] = y[i] - fact * u[i];
    }
    Some(())
}

/// Gaussian elimination with partial pivoting for small dense systems.
/// `a` is row-major n×n; returns the solution or `None` if singular.
pub fn solve_dense(a: &mut [f64], b: &mut [f64]) -> Option<()> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    for col in 0..n {
        let mut max_row = col;
        let mut max_val = a[col * n + col].abs();
        for row in col + 1..n {
            let v = a[row * n + col].abs();
            if v > max_val {
                max_val = v;
                max_row = row;
            }
        }
        if max_val == 0.0 || !max_val.is_finite() {
            return None;
        }
        if max_row != col {
            for k in 0..n {
                a.swap(col * n + k, max_row * n + k);
            }
            b.swap(col, max_row);
        }
        let piv = a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] / piv;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            b[row] -= f * b[col];
        }
    }
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row * n + k] * b[k];
        }
        b[row] = acc / a[row * n + row];
    }
    Some(())
}

/// Not-a-knot cubic spline on the uniform grid x_j = j/n over the values `y`.
/// Stores second derivatives at the nodes.
pub struct CubicSpline {
    h: f64,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn fit(y: &[f64]) -> Option<CubicSpline> {
        let n = y.len();
        if n < 4 {
            return None;
        }
        let h = 1.0 / (n - 1) as f64;
        // Interior relation m[j-1] + 4 m[j] + m[j+1] = 6 (y[j-1] - 2y[j] + y[j+1]) / h².
        // Not-a-knot gives m0 = 2 m1 - m2 and m_{n-1} = 2 m_{n-2} - m_{n-3}; substituting
        // into the first and last interior rows decouples them.
        let rhs_at = |j: usize| 6.0 * (y[j - 1] - 2.0 * y[j] + y[j + 1]) / (h * h);
        let mut m = vec![0.0; n];
        if n == 4 {
            // Two interior rows collapse to a 2×2 system.
            let mut a = [6.0, 0.0, 0.0, 6.0];
            let mut b = [rhs_at(1), rhs_at(2)];
            solve_dense(&mut a, &mut b)?;
            m[1] = b[0];
            m[2] = b[1];
        } else {
            let k = n - 4; // unknowns m[2..n-2]
            m[1] = rhs_at(1) / 6.0;
            m[n - 2] = rhs_at(n - 2) / 6.0;
            if k > 0 {
                let mut lower = vec![1.0; k];
                let diag = vec![4.0; k];
                let mut upper = vec![1.0; k];
                let mut rhs = vec![0.0; k];
                for (i, r) in rhs.iter_mut().enumerate() {
                    *r = rhs_at(i + 2);
                }
                rhs[0] -= m[1];
                rhs[k - 1] -= m[n - 2];
                lower[0] = 0.0;
                upper[k - 1] = 0.0;
                solve_tridiagonal(&lower, &diag, &upper, &mut rhs)?;
                m[2..2 + k].copy_from_slice(&rhs);
            }
        }
        m[0] = 2.0 * m[1] - m[2];
        m[n - 1] = 2.0 * m[n - 2] - m[n - 3];
        Some(CubicSpline {
            h,
            y: y.to_vec(),
            m,
        })
    }

    /// Evaluate at x ∈ [0, 1].
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.y.len();
        let fj = (x / self.h).floor();
        let j = (fj as isize).clamp(0, n as isize - 2) as usize;
        let a = x - j as f64 * self.h;
        let b = self.h - a;
        let h = self.h;
        (self.m[j] * b * b * b + self.m[j + 1] * a * a * a) / (6.0 * h)
            + (self.y[j] / h - self.m[j] * h / 6.0) * b
            + (self.y[j + 1] / h - self.m[j + 1] * h / 6.0) * a
    }
}

/// Least-squares fit y ≈ slope·x + intercept. Returns `None` for fewer than
/// two distinct abscissae.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nf = n as f64;
    let mean_x = xs.iter().sum::<f64>() / nf;
    let mean_y = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        let dx = xs[i] - mean_x;
        sxx += dx * dx;
        sxy += dx * (ys[i] - mean_y);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, mean_y - slope * mean_x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_reproduces_known_solution() {
        // Second-difference matrix with Dirichlet data against a linear solution.
        let n = 8;
        let lower = vec![-1.0; n];
        let diag = vec![2.5; n];
        let upper = vec![-1.0; n];
        let x_true: Vec<f64> = (0..n).map(|i| 0.3 * i as f64 - 1.0).collect();
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            let left = if i > 0 { x_true[i - 1] } else { 0.0 };
            let right = if i + 1 < n { x_true[i + 1] } else { 0.0 };
            rhs[i] = -left + 2.5 * x_true[i] - right;
        }
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs).unwrap();
        for i in 0..n {
            assert!((rhs[i] - x_true[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn cyclic_tridiagonal_matches_dense() {
        let n = 6;
        let lower = vec![-0.7; n];
        let diag = vec![3.0; n];
        let upper = vec![-1.3; n];
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 0.5).collect();
        let mut dense = vec![0.0; n * n];
        for i in 0..n {
            dense[i * n + i] = diag[i];
            dense[i * n + (i + 1) % n] += upper[i];
            dense[i * n + (i + n - 1) % n] += lower[i];
        }
        let mut x_dense = b.clone();
        solve_dense(&mut dense, &mut x_dense).unwrap();
        let mut x_cyc = b;
        solve_cyclic_tridiagonal(&lower, &diag, &upper, &mut x_cyc).unwrap();
        for i in 0..n {
            assert!((x_cyc[i] - x_dense[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn spline_interpolates_cubics_exactly() {
        // Not-a-knot is exact on cubic polynomials.
        let n = 11;
        let f = |x: f64| 2.0 - x + 3.0 * x * x - 1.5 * x * x * x;
        let y: Vec<f64> = (0..n).map(|j| f(j as f64 / (n - 1) as f64)).collect();
        let s = CubicSpline::fit(&y).unwrap();
        for k in 0..=50 {
            let x = k as f64 / 50.0;
            assert!((s.eval(x) - f(x)).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn linear_fit_recovers_line() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| -2.5 * x + 0.75).collect();
        let (slope, intercept) = linear_fit(&xs, &ys).unwrap();
        assert!((slope + 2.5).abs() < 1e-12);
        assert!((intercept - 0.75).abs() < 1e-12);
    }
}
