//! Angular distance κ and strengthened Cauchy-Schwarz constant γ for pairs
//! of linear subspaces, from the principal angles of orthonormal bases.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gamma::{GammaReport, Method};
use crate::linalg;
use crate::space::{inner, norm, Scalar, Space, Vector};

/// Columns whose norm after projection falls below this fraction of the
/// largest generator norm are treated as dependent and dropped.
pub const RANK_TOL: f64 = 1e-10;

/// Linear subspace stored as an orthonormal basis (possibly empty).
#[derive(Debug, Clone)]
pub struct Subspace {
    space: Arc<Space>,
    basis: Vec<Vector>,
}

impl Subspace {
    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    /// Dimension `k` of the subspace.
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    /// Orthogonal projection onto the subspace.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        let mut acc = self.space.zero();
        for q in &self.basis {
            let c = inner(x, q)?;
            acc = acc.combine(Scalar::new(1.0, 0.0), q, c)?;
        }
        Ok(acc)
    }

    /// The vector `Σ c_i q_i` for coefficients in the orthonormal basis.
    pub fn combination(&self, coeffs: &[Scalar]) -> Vector {
        let n = self.space.dim();
        let mut coords = vec![Scalar::new(0.0, 0.0); n];
        for (q, c) in self.basis.iter().zip(coeffs) {
            for (acc, x) in coords.iter_mut().zip(q.coords()) {
                *acc += c * x;
            }
        }
        Vector::from_parts(Arc::clone(&self.space), coords)
    }
}

/// Modified Gram-Schmidt with one reorthogonalization pass.
pub fn orthonormalize(space: &Arc<Space>, generators: &[Vector]) -> Result<Subspace> {
    for g in generators {
        if **g.space() != **space {
            return Err(Error::usage("generator belongs to a different space"));
        }
    }
    let max_norm = generators.iter().map(norm).fold(0.0, f64::max);
    let mut basis: Vec<Vector> = Vec::new();
    for g in generators {
        let mut w = g.clone();
        for _pass in 0..2 {
            for q in &basis {
                let c = inner(&w, q)?;
                w = w.combine(Scalar::new(1.0, 0.0), q, -c)?;
            }
        }
        let n = norm(&w);
        if n > RANK_TOL * max_norm && n > 0.0 {
            basis.push(w.scale_real(1.0 / n));
        }
    }
    Ok(Subspace { space: Arc::clone(space), basis })
}

/// `M_ij = (q^V_i, q^F_j)`, row-major `k_V x k_F`.
fn cross_matrix(v: &Subspace, f: &Subspace) -> Result<Vec<Scalar>> {
    let mut m = Vec::with_capacity(v.rank() * f.rank());
    for a in &v.basis {
        for b in &f.basis {
            m.push(inner(a, b)?);
        }
    }
    Ok(m)
}

/// Largest principal-angle cosine between `v` and `f`, with a certificate
/// pair `(v*, w*)` satisfying `|(v*, w*)| = γ`.
pub fn gamma_subspaces(v: &Subspace, f: &Subspace) -> Result<GammaReport> {
    if *v.space != *f.space {
        return Err(Error::usage("subspaces belong to different spaces"));
    }
    if v.is_zero() || f.is_zero() {
        return Ok(GammaReport::from_gamma(0.0, Method::ExactSubspace));
    }
    let (kv, kf) = (v.rank(), f.rank());
    let m = cross_matrix(v, f)?;
    // N = conj(M) Mᵀ, so that aᴴ N a = ‖Mᵀ a‖² = ‖P_F (Σ a_i q^V_i)‖².
    let mut nmat = vec![Scalar::new(0.0, 0.0); kv * kv];
    for i in 0..kv {
        for k in 0..kv {
            nmat[i * kv + k] = (0..kf).map(|j| m[i * kf + j].conj() * m[k * kf + j]).sum();
        }
    }
    let (lambda, a) = linalg::hermitian_top_eigen(&nmat, kv);
    let gamma = lambda.max(0.0).sqrt().min(1.0);

    let cert_v = v.combination(&a);
    let proj = f.project(&cert_v)?;
    let pn = norm(&proj);
    let cert_w = if pn > 0.0 { proj.scale_real(1.0 / pn) } else { f.basis[0].clone() };
    Ok(GammaReport::from_gamma(gamma, Method::ExactSubspace).with_certificates(cert_v, cert_w))
}

/// Angular distance `κ = √(2 - 2γ)`; undefined for the zero subspace.
pub fn kappa_subspaces(v: &Subspace, f: &Subspace) -> Result<f64> {
    if v.is_zero() || f.is_zero() {
        return Err(Error::domain("angular distance of the zero subspace is undefined"));
    }
    Ok(gamma_subspaces(v, f)?.kappa)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Field;
    use std::f64::consts::{FRAC_PI_3, SQRT_2};

    fn r2() -> Arc<Space> {
        Space::real(2).unwrap()
    }

    fn line(s: &Arc<Space>, angle: f64) -> Subspace {
        let g = Vector::from_real(s, &[angle.cos(), angle.sin()]).unwrap();
        orthonormalize(s, &[g]).unwrap()
    }

    #[test]
    fn orthonormalize_examples() {
        let s = r2();
        let a = Vector::from_real(&s, &[1.0, 0.0]).unwrap();
        let b = Vector::from_real(&s, &[2.0, 0.0]).unwrap();
        let sub = orthonormalize(&s, &[a, b]).unwrap();
        assert_eq!(sub.rank(), 1);
        assert_eq!(sub.basis()[0].real_coords(), vec![1.0, 0.0]);

        let sub = orthonormalize(&s, &[s.basis(0), s.basis(1)]).unwrap();
        assert_eq!(sub.rank(), 2);

        let a = Vector::from_real(&s, &[1.0, 1.0]).unwrap();
        let b = Vector::from_real(&s, &[1.0, -1.0]).unwrap();
        let sub = orthonormalize(&s, &[a, b]).unwrap();
        let h = 0.5f64.sqrt();
        let q0 = sub.basis()[0].real_coords();
        let q1 = sub.basis()[1].real_coords();
        assert!((q0[0] - h).abs() < 1e-15 && (q0[1] - h).abs() < 1e-15);
        assert!((q1[0] - h).abs() < 1e-15 && (q1[1] + h).abs() < 1e-15);

        let empty = orthonormalize(&s, &[]).unwrap();
        assert!(empty.is_zero());
        let zero_only = orthonormalize(&s, &[s.zero()]).unwrap();
        assert!(zero_only.is_zero());
    }

    #[test]
    fn orthonormal_columns_under_gram() {
        let c = |re| Scalar::new(re, 0.0);
        let g = vec![c(2.0), c(0.5), c(0.0), c(0.5), c(1.0), c(0.2), c(0.0), c(0.2), c(3.0)];
        let s = Space::with_gram(3, Field::Real, g).unwrap();
        let gens = [
            Vector::from_real(&s, &[1.0, 2.0, 0.0]).unwrap(),
            Vector::from_real(&s, &[0.0, 1.0, -1.0]).unwrap(),
            Vector::from_real(&s, &[1.0, 3.0, -1.0]).unwrap(),
        ];
        let sub = orthonormalize(&s, &gens).unwrap();
        assert_eq!(sub.rank(), 2);
        for (i, a) in sub.basis().iter().enumerate() {
            for (j, b) in sub.basis().iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((inner(a, b).unwrap() - c(want)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn gamma_examples() {
        let s = r2();
        let e1 = line(&s, 0.0);
        let e2 = line(&s, std::f64::consts::FRAC_PI_2);
        let r = gamma_subspaces(&e1, &e1).unwrap();
        assert_eq!(r.gamma, 1.0);
        assert!(r.intersects);
        let r = gamma_subspaces(&e1, &e2).unwrap();
        assert!(r.gamma.abs() < 1e-15);
        assert!(!r.intersects);
        let r = gamma_subspaces(&e1, &line(&s, FRAC_PI_3)).unwrap();
        assert!((r.gamma - 0.5).abs() < 1e-15);
        let (v, w) = (r.certificate_v.unwrap(), r.certificate_w.unwrap());
        assert!((inner(&v, &w).unwrap().norm() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn kappa_examples() {
        let s = r2();
        let e1 = line(&s, 0.0);
        assert_eq!(kappa_subspaces(&e1, &e1).unwrap(), 0.0);
        let k = kappa_subspaces(&e1, &line(&s, std::f64::consts::FRAC_PI_2)).unwrap();
        assert!((k - SQRT_2).abs() < 1e-15);
        let k = kappa_subspaces(&e1, &line(&s, FRAC_PI_3)).unwrap();
        assert!((k - 1.0).abs() < 1e-15);
        let zero = orthonormalize(&s, &[]).unwrap();
        assert!(matches!(kappa_subspaces(&zero, &e1), Err(Error::Domain(_))));
        let r = gamma_subspaces(&zero, &e1).unwrap();
        assert_eq!(r.gamma, 0.0);
        assert!(r.certificate_v.is_none());
    }

    #[test]
    fn lines_at_sixty_degrees_match_sampled_minimum() {
        // Brute-force min of ‖v - w‖ over unit vectors of both lines.
        let s = r2();
        let (a, b) = (0.0f64, FRAC_PI_3);
        let mut best = f64::INFINITY;
        for sa in [1.0, -1.0] {
            for sb in [1.0, -1.0] {
                let d = ((sa * a.cos() - sb * b.cos()).powi(2) + (sa * a.sin() - sb * b.sin()).powi(2)).sqrt();
                best = best.min(d);
            }
        }
        let k = kappa_subspaces(&line(&s, a), &line(&s, b)).unwrap();
        assert!((k - best).abs() < 1e-12);
    }

    #[test]
    fn space_mismatch_is_usage_error() {
        let a = line(&r2(), 0.0);
        let s3 = Space::real(3).unwrap();
        let b = orthonormalize(&s3, &[s3.basis(0)]).unwrap();
        assert!(matches!(gamma_subspaces(&a, &b), Err(Error::Usage(_))));
    }

    #[test]
    fn complex_phase_is_free() {
        // span{e1} vs span{i·e1 + e2}: γ = 1/√2 regardless of phase.
        let s = Space::complex(2).unwrap();
        let a = orthonormalize(&s, &[s.basis(0)]).unwrap();
        let g = Vector::new(&s, vec![Scalar::new(0.0, 1.0), Scalar::new(1.0, 0.0)]).unwrap();
        let b = orthonormalize(&s, &[g]).unwrap();
        let r = gamma_subspaces(&a, &b).unwrap();
        assert!((r.gamma - 0.5f64.sqrt()).abs() < 1e-14);
    }
}
