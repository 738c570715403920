//! Exact Cauchy-Schwarz identities and the variational lower bound for
//! `|(x, y)|`, evaluated numerically with both sides and a residual.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::space::{arg_principal, inner, norm, normalize, Scalar, Vector, ZERO_TOL};

/// Default threshold for [`cs_equality_case`].
pub const EQUALITY_TOL: f64 = 1e-8;

/// Both sides of an identity with their gap and the defect terms involved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs|`.
    pub residual: f64,
    /// `‖u - v‖²` where applicable.
    pub defect_re: Option<f64>,
    /// `‖u - i v‖²` where applicable.
    pub defect_im: Option<f64>,
}

impl IdentityReport {
    fn new(lhs: f64, rhs: f64, defect_re: Option<f64>, defect_im: Option<f64>) -> Self {
        IdentityReport { lhs, rhs, residual: (lhs - rhs).abs(), defect_re, defect_im }
    }
}

struct UnitPair {
    nx: f64,
    ny: f64,
    u: Vector,
    v: Vector,
}

fn unit_pair(x: &Vector, y: &Vector) -> Result<UnitPair> {
    // Surface a space mismatch before any zero-vector complaint.
    inner(x, y)?;
    Ok(UnitPair { nx: norm(x), ny: norm(y), u: normalize(x)?, v: normalize(y)? })
}

fn dist_sq(a: &Vector, b: &Vector) -> Result<f64> {
    let d = a.sub(b)?;
    Ok(norm(&d).powi(2))
}

/// `‖u - v‖²` and `‖u - i v‖²` for the normalized pair.
fn defects(p: &UnitPair) -> Result<(f64, f64)> {
    let re = dist_sq(&p.u, &p.v)?;
    let im = dist_sq(&p.u, &p.v.scale(Scalar::new(0.0, 1.0)))?;
    Ok((re, im))
}

/// `Re (x, y)` against `‖x‖‖y‖(1 - ½‖x/‖x‖ - y/‖y‖‖²)`.
pub fn real_cs_identity(x: &Vector, y: &Vector) -> Result<IdentityReport> {
    let p = unit_pair(x, y)?;
    let (d_re, _) = defects(&p)?;
    let lhs = inner(x, y)?.re;
    let rhs = p.nx * p.ny * (1.0 - 0.5 * d_re);
    Ok(IdentityReport::new(lhs, rhs, Some(d_re), None))
}

/// `Im (x, y)` against `‖x‖‖y‖(1 - ½‖x/‖x‖ - i·y/‖y‖‖²)`.
pub fn imag_cs_identity(x: &Vector, y: &Vector) -> Result<IdentityReport> {
    let p = unit_pair(x, y)?;
    let (_, d_im) = defects(&p)?;
    let lhs = inner(x, y)?.im;
    let rhs = p.nx * p.ny * (1.0 - 0.5 * d_im);
    Ok(IdentityReport::new(lhs, rhs, None, Some(d_im)))
}

/// `|(x, y)|` against the square-root combination of both defect terms.
pub fn modulus_cs_identity(x: &Vector, y: &Vector) -> Result<IdentityReport> {
    let p = unit_pair(x, y)?;
    let (d_re, d_im) = defects(&p)?;
    let lhs = inner(x, y)?.norm();
    let a = 1.0 - 0.5 * d_re;
    let b = 1.0 - 0.5 * d_im;
    let rhs = p.nx * p.ny * a.hypot(b);
    Ok(IdentityReport::new(lhs, rhs, Some(d_re), Some(d_im)))
}

/// Lower bound `‖x‖‖y‖(1 - ½‖e^{iα}x/‖x‖ - y/‖y‖‖²)` (reported as `lhs`)
/// against `|(x, y)|` (reported as `rhs`).
pub fn variational_bound(x: &Vector, y: &Vector, alpha: f64) -> Result<IdentityReport> {
    let p = unit_pair(x, y)?;
    let rotated = p.u.scale(Scalar::from_polar(1.0, alpha));
    let d = dist_sq(&rotated, &p.v)?;
    let lhs = p.nx * p.ny * (1.0 - 0.5 * d);
    let rhs = inner(x, y)?.norm();
    Ok(IdentityReport::new(lhs, rhs, Some(d), None))
}

/// Rotation angle in `[0, 2π)` at which [`variational_bound`] is attained:
/// `-Arg (x, y)`, or `0` when `(x, y) = 0` (every angle is then optimal).
pub fn optimal_alpha(x: &Vector, y: &Vector) -> Result<f64> {
    unit_pair(x, y)?;
    let z = inner(x, y)?;
    if z.norm() == 0.0 {
        return Ok(0.0);
    }
    let a = arg_principal(z);
    Ok(if a == 0.0 { 0.0 } else { std::f64::consts::TAU - a })
}

/// Numerical proxy for linear dependence: `|(x, y)| ≥ (1 - tol)‖x‖‖y‖`,
/// or either vector is zero.
pub fn cs_equality_case(x: &Vector, y: &Vector, tol: f64) -> Result<bool> {
    let z = inner(x, y)?;
    let (nx, ny) = (norm(x), norm(y));
    if nx <= ZERO_TOL || ny <= ZERO_TOL {
        return Ok(true);
    }
    Ok(z.norm() >= (1.0 - tol) * nx * ny)
}

/// Rejects a zero vector with the same message every identity uses.
pub fn require_nonzero(x: &Vector) -> Result<()> {
    if norm(x) <= ZERO_TOL {
        Err(Error::domain("cannot normalize zero vector"))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Space;
    use std::f64::consts::{PI, SQRT_2};

    fn c(re: f64, im: f64) -> Scalar {
        Scalar::new(re, im)
    }

    fn pair_1i_11() -> (Vector, Vector) {
        let s = Space::complex(2).unwrap();
        let x = Vector::new(&s, vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let y = Vector::new(&s, vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        (x, y)
    }

    #[test]
    fn real_identity_examples() {
        let s = Space::complex(2).unwrap();
        let r = real_cs_identity(&s.basis(0), &s.basis(0)).unwrap();
        assert_eq!((r.lhs, r.rhs, r.residual), (1.0, 1.0, 0.0));
        let r = real_cs_identity(&s.basis(0), &s.basis(1)).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!((r.defect_re.unwrap() - 2.0).abs() < 1e-15);
        assert!(r.rhs.abs() < 1e-15);
        let (x, y) = pair_1i_11();
        let r = real_cs_identity(&x, &y).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-15);
        assert!((r.defect_re.unwrap() - 1.0).abs() < 1e-15);
        assert!((r.rhs - 1.0).abs() < 1e-14);
    }

    #[test]
    fn imag_identity_examples() {
        let s = Space::complex(2).unwrap();
        let e1 = s.basis(0);
        let ie1 = e1.scale(c(0.0, 1.0));
        let r = imag_cs_identity(&e1, &ie1).unwrap();
        assert_eq!(r.lhs, -1.0);
        assert!((r.defect_im.unwrap() - 4.0).abs() < 1e-15);
        assert!((r.rhs + 1.0).abs() < 1e-15);

        let re = Vector::new(&s, vec![c(0.3, 0.0), c(-2.0, 0.0)]).unwrap();
        let r = imag_cs_identity(&re, &re).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!((r.defect_im.unwrap() - 2.0).abs() < 1e-14);

        let (x, y) = pair_1i_11();
        let r = imag_cs_identity(&x, &y).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-15);
        assert!((r.rhs - 1.0).abs() < 1e-14);
    }

    #[test]
    fn modulus_identity_examples() {
        let (x, y) = pair_1i_11();
        let r = modulus_cs_identity(&x, &y).unwrap();
        assert!((r.lhs - SQRT_2).abs() < 1e-15);
        assert!((r.rhs - SQRT_2).abs() < 1e-14);

        let s = Space::complex(2).unwrap();
        let r = modulus_cs_identity(&s.basis(0), &s.basis(1)).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!((r.defect_re.unwrap() - 2.0).abs() < 1e-15);
        assert!((r.defect_im.unwrap() - 2.0).abs() < 1e-15);
        assert!(r.rhs.abs() < 1e-15);

        let r = modulus_cs_identity(&s.basis(0), &s.basis(0)).unwrap();
        assert_eq!(r.lhs, 1.0);
        assert!((r.defect_im.unwrap() - 2.0).abs() < 1e-15);
        assert!((r.rhs - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_vectors_rejected() {
        let s = Space::complex(2).unwrap();
        let z = s.zero();
        let e1 = s.basis(0);
        for r in [
            real_cs_identity(&z, &e1),
            imag_cs_identity(&e1, &z),
            modulus_cs_identity(&z, &z),
            variational_bound(&z, &e1, 0.0),
        ] {
            assert!(matches!(r, Err(Error::Domain(_))));
        }
        assert!(matches!(optimal_alpha(&e1, &z), Err(Error::Domain(_))));
    }

    #[test]
    fn variational_examples() {
        let s = Space::complex(2).unwrap();
        let e1 = s.basis(0);
        let r = variational_bound(&e1, &e1, PI).unwrap();
        assert!((r.lhs + 1.0).abs() < 1e-15);
        assert!(r.lhs <= r.rhs);

        let (x, y) = pair_1i_11();
        let r = variational_bound(&x, &y, 0.0).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-14);
        assert!((r.rhs - SQRT_2).abs() < 1e-15);

        let a = optimal_alpha(&x, &y).unwrap();
        let r = variational_bound(&x, &y, a).unwrap();
        assert!(r.residual < 1e-14);
    }

    #[test]
    fn optimal_alpha_examples() {
        let s = Space::complex(2).unwrap();
        let e1 = s.basis(0);
        let v = Vector::new(&s, vec![c(2.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(optimal_alpha(&v, &e1).unwrap(), 0.0);
        let ie1 = e1.scale(c(0.0, 1.0));
        assert!((optimal_alpha(&ie1, &e1).unwrap() - 1.5 * PI).abs() < 1e-15);
        assert_eq!(optimal_alpha(&e1, &s.basis(1)).unwrap(), 0.0);
    }

    #[test]
    fn equality_case_examples() {
        let s = Space::complex(3).unwrap();
        let x = Vector::new(&s, vec![c(1.0, 0.5), c(-0.2, 0.0), c(0.0, 3.0)]).unwrap();
        let y = x.scale(c(2.0, 1.0));
        assert!(cs_equality_case(&x, &y, EQUALITY_TOL).unwrap());
        assert!(!cs_equality_case(&s.basis(0), &s.basis(1), EQUALITY_TOL).unwrap());
        assert!(cs_equality_case(&s.zero(), &x, EQUALITY_TOL).unwrap());
        let w = Vector::new(&s, vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(!cs_equality_case(&x, &w, EQUALITY_TOL).unwrap());
    }
}
