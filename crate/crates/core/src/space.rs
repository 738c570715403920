//! Scalars, inner-product spaces, vectors, norms and normalization.
//!
//! The inner product is linear in the FIRST argument and conjugate linear in
//! the second: `(x, y) = Σ_ij conj(y_i) G_ij x_j`. Libraries differ on this;
//! every function in the crate follows this convention.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Scalars are complex throughout; real spaces keep `im == 0`.
pub type Scalar = Complex64;

/// Absolute threshold below which a vector counts as zero.
pub const ZERO_TOL: f64 = 1e-14;
const HERMITIAN_TOL: f64 = 1e-12;
const CONDITION_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

/// Finite-dimensional inner-product space with an optional Gram matrix.
#[derive(Debug, Clone)]
pub struct Space {
    dim: usize,
    field: Field,
    gram: Option<Vec<Scalar>>,
    /// Cholesky factor `L` of the Gram matrix, `G = L Lᴴ`.
    chol: Option<Vec<Scalar>>,
}

impl PartialEq for Space {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.field == other.field && self.gram == other.gram
    }
}

impl Space {
    /// Euclidean space (identity Gram matrix).
    pub fn euclidean(dim: usize, field: Field) -> Result<Arc<Self>> {
        if dim == 0 {
            return Err(Error::usage("space dimension must be positive"));
        }
        Ok(Arc::new(Space { dim, field, gram: None, chol: None }))
    }

    pub fn real(dim: usize) -> Result<Arc<Self>> {
        Self::euclidean(dim, Field::Real)
    }

    pub fn complex(dim: usize) -> Result<Arc<Self>> {
        Self::euclidean(dim, Field::Complex)
    }

    /// Space whose inner product is given by a Hermitian positive-definite
    /// row-major `dim x dim` Gram matrix.
    pub fn with_gram(dim: usize, field: Field, gram: Vec<Scalar>) -> Result<Arc<Self>> {
        if dim == 0 {
            return Err(Error::usage("space dimension must be positive"));
        }
        if gram.len() != dim * dim {
            return Err(Error::usage(format!("gram matrix has {} entries, expected {}", gram.len(), dim * dim)));
        }
        if gram.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::parse("gram matrix has non-finite entries"));
        }
        if field == Field::Real && gram.iter().any(|z| z.im != 0.0) {
            return Err(Error::usage("real space requires a real gram matrix"));
        }
        let scale = gram.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        for i in 0..dim {
            for j in 0..dim {
                if (gram[i * dim + j] - gram[j * dim + i].conj()).norm() > HERMITIAN_TOL * scale {
                    return Err(Error::usage("gram matrix is not Hermitian"));
                }
            }
        }
        let eig = linalg::hermitian_eigenvalues(&gram, dim);
        let (largest, smallest) = (eig[0], eig[dim - 1]);
        if !(largest > 0.0) || smallest <= CONDITION_FLOOR * largest {
            return Err(Error::usage("gram matrix is not positive definite"));
        }
        let chol = linalg::cholesky(&gram, dim).ok_or_else(|| Error::usage("gram matrix is not positive definite"))?;
        Ok(Arc::new(Space { dim, field, gram: Some(gram), chol: Some(chol) }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn gram(&self) -> Option<&[Scalar]> {
        self.gram.as_deref()
    }

    /// Cholesky factor of the Gram matrix; `None` for the identity.
    pub fn cholesky(&self) -> Option<&[Scalar]> {
        self.chol.as_deref()
    }

    /// Inner product of raw coordinate slices in this space.
    pub fn inner_coords(&self, x: &[Scalar], y: &[Scalar]) -> Scalar {
        match &self.gram {
            None => x.iter().zip(y).map(|(a, b)| a * b.conj()).sum(),
            Some(g) => {
                let n = self.dim;
                let mut acc = Scalar::new(0.0, 0.0);
                for i in 0..n {
                    let gx: Scalar = (0..n).map(|j| g[i * n + j] * x[j]).sum();
                    acc += y[i].conj() * gx;
                }
                acc
            }
        }
    }

    /// Coordinates `Lᴴ x`, which carry the space's norm as a Euclidean norm.
    pub fn whiten(&self, x: &[Scalar]) -> Vec<Scalar> {
        match &self.chol {
            None => x.to_vec(),
            Some(l) => {
                let n = self.dim;
                (0..n).map(|i| (i..n).map(|k| l[k * n + i].conj() * x[k]).sum()).collect()
            }
        }
    }

    pub fn zero(self: &Arc<Self>) -> Vector {
        Vector { space: Arc::clone(self), coords: vec![Scalar::new(0.0, 0.0); self.dim] }
    }

    /// Standard basis vector `e_{index}` (0-based).
    pub fn basis(self: &Arc<Self>, index: usize) -> Vector {
        let mut v = self.zero();
        v.coords[index] = Scalar::new(1.0, 0.0);
        v
    }
}

/// Coordinate vector living in a particular `Space`.
#[derive(Debug, Clone)]
pub struct Vector {
    space: Arc<Space>,
    coords: Vec<Scalar>,
}

impl PartialEq for Vector {
    fn eq(&self, other: &Self) -> bool {
        self.coords == other.coords && *self.space == *other.space
    }
}

impl Vector {
    pub fn new(space: &Arc<Space>, coords: Vec<Scalar>) -> Result<Self> {
        if coords.len() != space.dim {
            return Err(Error::usage(format!(
                "vector has {} coordinates, space has dimension {}",
                coords.len(),
                space.dim
            )));
        }
        if coords.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::parse("vector has non-finite coordinates"));
        }
        if space.field == Field::Real && coords.iter().any(|z| z.im != 0.0) {
            return Err(Error::usage("complex coordinates in a real space"));
        }
        Ok(Vector { space: Arc::clone(space), coords })
    }

    pub fn from_real(space: &Arc<Space>, coords: &[f64]) -> Result<Self> {
        Self::new(space, coords.iter().map(|&r| Scalar::new(r, 0.0)).collect())
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn coords(&self) -> &[Scalar] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Real parts of the coordinates.
    pub fn real_coords(&self) -> Vec<f64> {
        self.coords.iter().map(|z| z.re).collect()
    }

    pub fn scale(&self, a: Scalar) -> Vector {
        self.map_coords(|z| z * a)
    }

    pub fn scale_real(&self, a: f64) -> Vector {
        self.map_coords(|z| z * a)
    }

    /// `a·self + b·other`; both vectors must share the space.
    pub fn combine(&self, a: Scalar, other: &Vector, b: Scalar) -> Result<Vector> {
        same_space(self, other)?;
        let coords = self.coords.iter().zip(&other.coords).map(|(x, y)| a * x + b * y).collect();
        Ok(Vector { space: Arc::clone(&self.space), coords })
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        self.combine(Scalar::new(1.0, 0.0), other, Scalar::new(-1.0, 0.0))
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        self.combine(Scalar::new(1.0, 0.0), other, Scalar::new(1.0, 0.0))
    }

    fn map_coords(&self, f: impl Fn(Scalar) -> Scalar) -> Vector {
        let coords = self.coords.iter().map(|&z| f(z)).collect();
        Vector { space: Arc::clone(&self.space), coords }
    }

    pub(crate) fn from_parts(space: Arc<Space>, coords: Vec<Scalar>) -> Vector {
        debug_assert_eq!(coords.len(), space.dim);
        Vector { space, coords }
    }
}

fn same_space(x: &Vector, y: &Vector) -> Result<()> {
    if Arc::ptr_eq(&x.space, &y.space) || *x.space == *y.space {
        Ok(())
    } else {
        Err(Error::usage("vectors belong to different spaces"))
    }
}

/// `(x, y)`, linear in `x`, conjugate linear in `y`.
pub fn inner(x: &Vector, y: &Vector) -> Result<Scalar> {
    same_space(x, y)?;
    Ok(x.space.inner_coords(&x.coords, &y.coords))
}

/// Induced norm `√(x, x)`.
pub fn norm(x: &Vector) -> f64 {
    x.space.inner_coords(&x.coords, &x.coords).re.max(0.0).sqrt()
}

/// `x / ‖x‖`; fails for vectors with norm at most `ZERO_TOL`.
pub fn normalize(x: &Vector) -> Result<Vector> {
    let n = norm(x);
    if !(n > ZERO_TOL) {
        return Err(Error::domain("cannot normalize zero vector"));
    }
    Ok(x.scale_real(1.0 / n))
}

/// Principal argument in `[0, 2π)`; `0` for `z = 0`.
pub fn arg_principal(z: Scalar) -> f64 {
    if z.re == 0.0 && z.im == 0.0 {
        return 0.0;
    }
    let a = z.im.atan2(z.re);
    let a = if a < 0.0 { a + TAU } else { a };
    // atan2 of a tiny negative imaginary part can round up to exactly 2π.
    if a >= TAU {
        0.0
    } else {
        a
    }
}
