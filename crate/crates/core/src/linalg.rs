//! Small dense kernels: cyclic Jacobi for symmetric / Hermitian matrices and
//! complex Cholesky. Matrices are row-major `Vec`s; sizes here are tiny.

use num_complex::Complex64;

pub const JACOBI_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, row-major `n x n`, ordered like `values`.
    pub vectors: Vec<f64>,
    pub sweeps: usize,
}

impl SymmetricEigen {
    pub fn column(&self, j: usize) -> Vec<f64> {
        let n = self.values.len();
        (0..n).map(|i| self.vectors[i * n + j]).collect()
    }
}

/// Cyclic Jacobi rotations on a real symmetric `n x n` matrix.
///
/// Stops when the off-diagonal Frobenius norm falls below
/// `JACOBI_TOL` times the full Frobenius norm, or after `JACOBI_MAX_SWEEPS`.
pub fn jacobi_symmetric(a: &[f64], n: usize) -> SymmetricEigen {
    assert_eq!(a.len(), n * n, "matrix must be n x n");
    let mut a = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let total: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut sweeps = 0;
    while sweeps < JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_TOL * total || off == 0.0 {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (newj, &oldj) in order.iter().enumerate() {
        for i in 0..n {
            vectors[i * n + newj] = v[i * n + oldj];
        }
    }
    SymmetricEigen { values, vectors, sweeps }
}

/// Largest eigenpair of a Hermitian `n x n` matrix via its real
/// `2n x 2n` embedding `[[Re, -Im], [Im, Re]]`.
///
/// Returns `(eigenvalue, eigenvector)` with a unit eigenvector.
pub fn hermitian_top_eigen(h: &[Complex64], n: usize) -> (f64, Vec<Complex64>) {
    let all = hermitian_eigenvalues_and_top(h, n);
    (all.0[0], all.1)
}

/// Eigenvalues (descending, each listed once) of a Hermitian matrix.
pub fn hermitian_eigenvalues(h: &[Complex64], n: usize) -> Vec<f64> {
    hermitian_eigenvalues_and_top(h, n).0
}

fn hermitian_eigenvalues_and_top(h: &[Complex64], n: usize) -> (Vec<f64>, Vec<Complex64>) {
    assert_eq!(h.len(), n * n, "matrix must be n x n");
    let m = 2 * n;
    let mut e = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = h[i * n + j];
            e[i * m + j] = z.re;
            e[i * m + n + j] = -z.im;
            e[(n + i) * m + j] = z.im;
            e[(n + i) * m + n + j] = z.re;
        }
    }
    let eig = jacobi_symmetric(&e, m);
    // Every eigenvalue of the embedding appears twice.
    let values = eig.values.iter().step_by(2).copied().collect();
    let col = eig.column(0);
    let mut z: Vec<Complex64> = (0..n).map(|i| Complex64::new(col[i], col[n + i])).collect();
    let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        z.iter_mut().for_each(|c| *c /= norm);
    }
    (values, z)
}

/// Lower-triangular `L` with `A = L Lᴴ` for a Hermitian positive-definite `A`.
///
/// Returns `None` when a pivot is not strictly positive.
pub fn cholesky(a: &[Complex64], n: usize) -> Option<Vec<Complex64>> {
    let mut l = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let mut d = a[j * n + j].re;
        for k in 0..j {
            d -= l[j * n + k].norm_sqr();
        }
        if !(d > 0.0) {
            return None;
        }
        let djj = d.sqrt();
        l[j * n + j] = Complex64::new(djj, 0.0);
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / djj;
        }
    }
    Some(l)
}
