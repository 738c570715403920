//! Lawson-Hanson active-set nonnegative least squares:
//! minimize `‖A λ - b‖₂` subject to `λ ≥ 0`.
//!
//! `A` is given as a list of columns. Ties in the entering index resolve to
//! the lowest index, so results are deterministic.

/// Relative tolerance on dual values and dependence checks.
pub const NNLS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct NnlsSolution {
    pub coeffs: Vec<f64>,
    /// `‖A λ - b‖₂`
    pub residual_norm: f64,
    /// Largest violation of the optimality conditions (see [`kkt_residual`]).
    pub kkt: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn residual(columns: &[Vec<f64>], coeffs: &[f64], b: &[f64]) -> Vec<f64> {
    let mut r = b.to_vec();
    for (col, &c) in columns.iter().zip(coeffs) {
        if c != 0.0 {
            r.iter_mut().zip(col).for_each(|(ri, ai)| *ri -= c * ai);
        }
    }
    r
}

/// Least squares over the columns in `set` via modified Gram-Schmidt QR.
/// Returns `None` when the selected columns are numerically dependent.
fn least_squares(columns: &[Vec<f64>], set: &[usize], b: &[f64], scale: f64) -> Option<Vec<f64>> {
    let k = set.len();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut r = vec![0.0; k * k];
    for (j, &idx) in set.iter().enumerate() {
        let mut v = columns[idx].clone();
        for (i, qi) in q.iter().enumerate() {
            let c = dot(qi, &v);
            r[i * k + j] = c;
            v.iter_mut().zip(qi).for_each(|(vv, qq)| *vv -= c * qq);
        }
        let n = dot(&v, &v).sqrt();
        if n <= NNLS_TOL * scale {
            return None;
        }
        r[j * k + j] = n;
        v.iter_mut().for_each(|x| *x /= n);
        q.push(v);
    }
    let qtb: Vec<f64> = q.iter().map(|qi| dot(qi, b)).collect();
    let mut s = vec![0.0; k];
    for i in (0..k).rev() {
        let mut acc = qtb[i];
        for j in (i + 1)..k {
            acc -= r[i * k + j] * s[j];
        }
        s[i] = acc / r[i * k + i];
    }
    Some(s)
}

/// Optimality violation of `coeffs`: negativity, positive dual values on
/// zero coefficients, and nonzero dual values on positive coefficients.
pub fn kkt_residual(columns: &[Vec<f64>], coeffs: &[f64], b: &[f64]) -> f64 {
    let r = residual(columns, coeffs, b);
    columns
        .iter()
        .zip(coeffs)
        .map(|(col, &c)| {
            let w = dot(col, &r);
            let neg = (-c).max(0.0);
            if c > 0.0 {
                neg.max(w.abs())
            } else {
                neg.max(w)
            }
        })
        .fold(0.0, f64::max)
}

/// Solve the NNLS problem. Iteration cap is `10·m` for `m` columns.
pub fn nnls(columns: &[Vec<f64>], b: &[f64]) -> NnlsSolution {
    let m = columns.len();
    let mut x = vec![0.0; m];
    if m == 0 {
        let rn = dot(b, b).sqrt();
        return NnlsSolution { coeffs: x, residual_norm: rn, kkt: 0.0, iterations: 0, converged: true };
    }
    let col_scale = columns.iter().map(|c| dot(c, c).sqrt()).fold(0.0, f64::max);
    let b_scale = dot(b, b).sqrt();
    let dual_tol = NNLS_TOL * col_scale * b_scale.max(col_scale);
    let max_iter = 10 * m;

    let mut passive = vec![false; m];
    let mut rejected = vec![false; m];
    let mut iterations = 0;
    let mut converged = false;

    'outer: while iterations < max_iter {
        let r = residual(columns, &x, b);
        let mut enter = None;
        let mut best = dual_tol;
        for j in 0..m {
            if passive[j] || rejected[j] {
                continue;
            }
            let w = dot(&columns[j], &r);
            if w > best {
                best = w;
                enter = Some(j);
            }
        }
        let Some(j) = enter else {
            converged = true;
            break;
        };
        passive[j] = true;

        loop {
            iterations += 1;
            let set: Vec<usize> = (0..m).filter(|&i| passive[i]).collect();
            let Some(s) = least_squares(columns, &set, b, col_scale) else {
                // Entering column is dependent on the passive ones.
                passive[j] = false;
                rejected[j] = true;
                continue 'outer;
            };
            if s.iter().all(|&v| v > 0.0) {
                for (&i, &v) in set.iter().zip(&s) {
                    x[i] = v;
                }
                rejected.iter_mut().for_each(|f| *f = false);
                break;
            }
            let mut alpha = f64::INFINITY;
            for (&i, &v) in set.iter().zip(&s) {
                if v <= 0.0 {
                    let a = x[i] / (x[i] - v);
                    if a < alpha {
                        alpha = a;
                    }
                }
            }
            for (&i, &v) in set.iter().zip(&s) {
                x[i] += alpha * (v - x[i]);
            }
            for &i in &set {
                if x[i] <= NNLS_TOL * x.iter().cloned().fold(1.0, f64::max) {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
            if iterations >= max_iter {
                break 'outer;
            }
        }
    }
    let r = residual(columns, &x, b);
    NnlsSolution {
        residual_norm: dot(&r, &r).sqrt(),
        kkt: kkt_residual(columns, &x, b),
        coeffs: x,
        iterations,
        converged,
    }
}
