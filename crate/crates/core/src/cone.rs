//! Finitely generated convex cones and finite unions of them, with the
//! angular distance and strengthened Cauchy-Schwarz constant of two cones.
//!
//! Cones live in real spaces only. Projection onto a convex cone is a
//! nonnegative least squares problem on the generator coefficients, solved in
//! whitened coordinates so that any Gram inner product is respected.
//!
//! κ between cones is a nonconvex problem. It is attacked by alternating
//! maximization of `(v, w)` over the two unit slices from many starting
//! points, and each run ends with an exact step on the faces active at its
//! end point. The result is a best-found value (an upper bound on κ) unless
//! every part of both cones is a single ray.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gamma::{GammaReport, Method, INTERSECTION_TOL};
use crate::nnls::{nnls, NnlsSolution};
use crate::rng::Rng;
use crate::space::{inner, norm, Field, Scalar, Space, Vector, ZERO_TOL};
use crate::subspace::{gamma_subspaces, orthonormalize};

/// Smallest admissible generator norm.
pub const MIN_GENERATOR_NORM: f64 = 1e-12;

/// Default seed for randomized commands.
pub const DEFAULT_SEED: u64 = 0xC5C5;

/// Conic hull of a nonempty list of nonzero generators.
#[derive(Debug, Clone)]
pub struct ConvexCone {
    space: Arc<Space>,
    generators: Vec<Vector>,
    /// Generators in whitened coordinates (`Lᵀ g`).
    whitened: Vec<Vec<f64>>,
}

impl ConvexCone {
    pub fn new(space: &Arc<Space>, generators: Vec<Vector>) -> Result<Self> {
        if space.field() != Field::Real {
            return Err(Error::usage("cones require a real space; embed complex data first"));
        }
        if generators.is_empty() {
            return Err(Error::domain("cone has no generators"));
        }
        for g in &generators {
            if **g.space() != **space {
                return Err(Error::usage("generator belongs to a different space"));
            }
            if norm(g) < MIN_GENERATOR_NORM {
                return Err(Error::domain("cone generator is zero"));
            }
        }
        let whitened = generators.iter().map(|g| whiten_real(space, g)).collect();
        Ok(ConvexCone { space: Arc::clone(space), generators, whitened })
    }

    /// Convenience constructor from real coordinate rows.
    pub fn from_rows(space: &Arc<Space>, rows: &[Vec<f64>]) -> Result<Self> {
        let gens = rows.iter().map(|r| Vector::from_real(space, r)).collect::<Result<Vec<_>>>()?;
        Self::new(space, gens)
    }

    pub fn ray(space: &Arc<Space>, direction: &[f64]) -> Result<Self> {
        Self::from_rows(space, &[direction.to_vec()])
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn generators(&self) -> &[Vector] {
        &self.generators
    }

    pub fn is_ray(&self) -> bool {
        self.generators.len() == 1
    }

    pub fn negated(&self) -> ConvexCone {
        ConvexCone {
            space: Arc::clone(&self.space),
            generators: self.generators.iter().map(|g| g.scale_real(-1.0)).collect(),
            whitened: self.whitened.iter().map(|w| w.iter().map(|x| -x).collect()).collect(),
        }
    }

    /// Cone with every generator multiplied by the matching positive factor.
    pub fn rescaled(&self, factors: &[f64]) -> Result<ConvexCone> {
        if factors.len() != self.generators.len() || factors.iter().any(|&f| !(f > 0.0)) {
            return Err(Error::usage("rescaling needs one positive factor per generator"));
        }
        let gens = self.generators.iter().zip(factors).map(|(g, &f)| g.scale_real(f)).collect();
        ConvexCone::new(&self.space, gens)
    }

    /// `Σ λ_i g_i`.
    pub fn combination(&self, coeffs: &[f64]) -> Vector {
        let mut coords = vec![Scalar::new(0.0, 0.0); self.space.dim()];
        for (g, &c) in self.generators.iter().zip(coeffs) {
            if c != 0.0 {
                for (acc, x) in coords.iter_mut().zip(g.coords()) {
                    *acc += x * c;
                }
            }
        }
        Vector::from_parts(Arc::clone(&self.space), coords)
    }

    /// Nearest point of the cone together with the NNLS diagnostics.
    pub fn projection(&self, x: &Vector) -> Result<(Vector, NnlsSolution)> {
        if **x.space() != *self.space {
            return Err(Error::usage("vector and cone belong to different spaces"));
        }
        let b = whiten_real(&self.space, x);
        let sol = nnls(&self.whitened, &b);
        Ok((self.combination(&sol.coeffs), sol))
    }
}

fn whiten_real(space: &Space, x: &Vector) -> Vec<f64> {
    space.whiten(x.coords()).into_iter().map(|z| z.re).collect()
}

/// Finite union of convex cones over one space.
#[derive(Debug, Clone)]
pub struct UnionCone {
    parts: Vec<ConvexCone>,
}

impl UnionCone {
    pub fn new(parts: Vec<ConvexCone>) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(Error::domain("union cone has no parts"));
        };
        let space = Arc::clone(first.space());
        if parts.iter().any(|p| **p.space() != *space) {
            return Err(Error::usage("union cone parts belong to different spaces"));
        }
        Ok(UnionCone { parts })
    }

    pub fn parts(&self) -> &[ConvexCone] {
        &self.parts
    }

    pub fn space(&self) -> &Arc<Space> {
        self.parts[0].space()
    }

    /// `C ∪ (-C)`.
    pub fn symmetrized(&self) -> UnionCone {
        let mut parts = self.parts.clone();
        parts.extend(self.parts.iter().map(ConvexCone::negated));
        UnionCone { parts }
    }

    /// True when every part is a single ray.
    pub fn is_finite_rays(&self) -> bool {
        self.parts.iter().all(ConvexCone::is_ray)
    }
}

impl From<ConvexCone> for UnionCone {
    fn from(c: ConvexCone) -> Self {
        UnionCone { parts: vec![c] }
    }
}

/// Nearest point of `cone` to `x` in the space's norm.
pub fn project_cone(x: &Vector, cone: &ConvexCone) -> Result<Vector> {
    Ok(cone.projection(x)?.0)
}

/// `‖x - P(x)‖ ≤ tol·max(1, ‖x‖)` for some part of the cone.
pub fn member(x: &Vector, cone: &UnionCone, tol: f64) -> Result<bool> {
    let bound = tol * norm(x).max(1.0);
    for part in cone.parts() {
        let p = project_cone(x, part)?;
        if norm(&x.sub(&p)?) <= bound {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeOptions {
    /// Random conic-combination starts per part pair, on top of the
    /// generator starts.
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for ConeOptions {
    fn default() -> Self {
        ConeOptions { restarts: 16, max_iter: 500, tol: 1e-10, seed: DEFAULT_SEED }
    }
}

/// Unit vector of `part` maximizing `(x, ·)`.
///
/// This is the normalized projection when it is nonzero. Otherwise every
/// member makes a non-acute angle with `x`, the ratio `(x, w)/‖w‖` is
/// quasi-concave on the cone, and its maximum sits on a generator ray.
fn best_unit_in(part: &ConvexCone, x: &Vector) -> Result<Vector> {
    let p = project_cone(x, part)?;
    let n = norm(&p);
    if n > ZERO_TOL {
        return Ok(p.scale_real(1.0 / n));
    }
    let mut best: Option<(f64, Vector)> = None;
    for g in part.generators() {
        let u = g.scale_real(1.0 / norm(g));
        let val = inner(x, &u)?.re;
        if best.as_ref().is_none_or(|(b, _)| val > *b) {
            best = Some((val, u));
        }
    }
    Ok(best.expect("cone has generators").1)
}

#[derive(Debug, Clone, Copy)]
enum Start {
    FromV(usize),
    FromW(usize),
    Random(u64),
}

#[derive(Debug, Clone)]
struct Run {
    value: f64,
    v: Vector,
    w: Vector,
    converged: bool,
}

fn random_unit_in(part: &ConvexCone, rng: &mut Rng) -> Vector {
    for _ in 0..100 {
        let coeffs: Vec<f64> = (0..part.generators().len()).map(|_| rng.uniform()).collect();
        let v = part.combination(&coeffs);
        let n = norm(&v);
        if n > ZERO_TOL {
            return v.scale_real(1.0 / n);
        }
    }
    let g = &part.generators()[0];
    g.scale_real(1.0 / norm(g))
}

fn alternate(a: &ConvexCone, b: &ConvexCone, start: Start, opts: &ConeOptions) -> Result<Run> {
    let unit = |g: &Vector| g.scale_real(1.0 / norm(g));
    let (mut v, mut w) = match start {
        Start::FromV(i) => {
            let v = unit(&a.generators()[i]);
            let w = best_unit_in(b, &v)?;
            (v, w)
        }
        Start::FromW(j) => {
            let w = unit(&b.generators()[j]);
            let v = best_unit_in(a, &w)?;
            (v, w)
        }
        Start::Random(stream) => {
            let mut rng = Rng::stream(opts.seed, stream);
            let v = random_unit_in(a, &mut rng);
            let w = best_unit_in(b, &v)?;
            (v, w)
        }
    };
    let mut value = inner(&v, &w)?.re;
    let mut converged = false;
    for _ in 0..opts.max_iter {
        let nv = best_unit_in(a, &w)?;
        let nw = best_unit_in(b, &nv)?;
        let nvalue = inner(&nv, &nw)?.re;
        if nvalue >= value {
            let gain = nvalue - value;
            v = nv;
            w = nw;
            value = nvalue;
            if gain < opts.tol {
                converged = true;
                break;
            }
        } else {
            // Rounding-level decrease: the ascent has stalled.
            converged = true;
            break;
        }
    }
    if let Some((pv, pw, pvalue)) = polish_on_faces(a, b, &v, &w)? {
        if pvalue > value {
            (v, w, value) = (pv, pw, pvalue);
        }
    }
    Ok(Run { value, v, w, converged })
}

/// Generators carrying positive weight in the projection of `x`.
fn active_face(part: &ConvexCone, x: &Vector) -> Result<Vec<Vector>> {
    let (_, sol) = part.projection(x)?;
    Ok(part.generators().iter().zip(&sol.coeffs).filter(|(_, &c)| c > 0.0).map(|(g, _)| g.clone()).collect())
}

/// Exact maximizer of `Re(v, w)` over the spans of the faces active at
/// `(v, w)`, projected back onto the cones.
///
/// Alternating steps converge only linearly when the cones nearly touch.
/// Once the active faces are identified, the top principal pair of their
/// spans gives the face optimum directly; projecting it onto the cones keeps
/// the candidate feasible whether or not it lies inside the faces.
fn polish_on_faces(a: &ConvexCone, b: &ConvexCone, v: &Vector, w: &Vector) -> Result<Option<(Vector, Vector, f64)>> {
    let (fa, fb) = (active_face(a, v)?, active_face(b, w)?);
    if fa.is_empty() || fb.is_empty() {
        return Ok(None);
    }
    let space = a.space();
    let report = gamma_subspaces(&orthonormalize(space, &fa)?, &orthonormalize(space, &fb)?)?;
    let (Some(sv), Some(sw)) = (report.certificate_v, report.certificate_w) else {
        return Ok(None);
    };
    let mut best: Option<(Vector, Vector, f64)> = None;
    for sign in [1.0, -1.0] {
        let pv = project_cone(&sv.scale_real(sign), a)?;
        let pw = project_cone(&sw.scale_real(sign), b)?;
        let (nv, nw) = (norm(&pv), norm(&pw));
        if nv <= ZERO_TOL || nw <= ZERO_TOL {
            continue;
        }
        let (pv, pw) = (pv.scale_real(1.0 / nv), pw.scale_real(1.0 / nw));
        let val = inner(&pv, &pw)?.re;
        if best.as_ref().is_none_or(|(_, _, b)| val > *b) {
            best = Some((pv, pw, val));
        }
    }
    Ok(best)
}

/// Largest `Re(v, w)` over unit `v ∈ c1`, `w ∈ c2`, as a report with
/// `gamma = sup Re(v, w)` and `kappa = √(2 - 2·gamma)`.
fn sup_re(c1: &UnionCone, c2: &UnionCone, opts: &ConeOptions) -> Result<GammaReport> {
    if **c1.space() != **c2.space() {
        return Err(Error::usage("cones belong to different spaces"));
    }
    let mut jobs: Vec<(usize, usize, Start)> = Vec::new();
    let mut stream = 0u64;
    for (i, a) in c1.parts().iter().enumerate() {
        for (j, b) in c2.parts().iter().enumerate() {
            jobs.extend((0..a.generators().len()).map(|k| (i, j, Start::FromV(k))));
            jobs.extend((0..b.generators().len()).map(|k| (i, j, Start::FromW(k))));
            if !(a.is_ray() && b.is_ray()) {
                for _ in 0..opts.restarts {
                    jobs.push((i, j, Start::Random(stream)));
                    stream += 1;
                }
            }
        }
    }
    let runs: Vec<Result<Run>> =
        jobs.par_iter().map(|&(i, j, start)| alternate(&c1.parts()[i], &c2.parts()[j], start, opts)).collect();
    let mut best: Option<Run> = None;
    for run in runs {
        let run = run?;
        // Strict improvement only: the lowest job index wins ties.
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one start per part pair");
    let exact = c1.is_finite_rays() && c2.is_finite_rays();
    let value = best.value.clamp(-1.0, 1.0);
    let mut report =
        GammaReport::from_gamma(value, if exact { Method::ExactSubspace } else { Method::AlternatingMultistart })
            .with_certificates(best.v, best.w);
    report.restarts_used = jobs.len();
    report.converged = best.converged;
    report.heuristic = !exact;
    Ok(report)
}

/// Angular distance between two cones (unsymmetrized).
///
/// The returned `gamma` is `sup Re(v, w) = 1 - κ²/2`, which is negative
/// when the cones point away from each other.
pub fn kappa_cones(c1: &UnionCone, c2: &UnionCone, opts: &ConeOptions) -> Result<GammaReport> {
    let mut report = sup_re(c1, c2, opts)?;
    report.gamma_re = Some(report.gamma);
    Ok(report)
}

/// Strengthened Cauchy-Schwarz constant for `|(x, y)|` over two cones.
///
/// `gamma` is computed on `c1 ∪ (-c1)` against `c2`, so that
/// `|(x, y)| = max(Re(x, y), Re(-x, y))` is covered; the unsymmetrized
/// value is kept in `gamma_re`. `intersects` is decided on the
/// unsymmetrized value.
pub fn gamma_cones(c1: &UnionCone, c2: &UnionCone, opts: &ConeOptions) -> Result<GammaReport> {
    let re = sup_re(c1, c2, opts)?;
    let abs = sup_re(&c1.symmetrized(), c2, opts)?;
    let gamma_abs = abs.gamma.clamp(0.0, 1.0);
    let mut report = GammaReport::from_gamma(gamma_abs, abs.method);
    report.certificate_v = abs.certificate_v;
    report.certificate_w = abs.certificate_w;
    report.restarts_used = re.restarts_used + abs.restarts_used;
    report.converged = re.converged && abs.converged;
    report.heuristic = abs.heuristic;
    report.intersects = re.gamma >= 1.0 - INTERSECTION_TOL;
    report.gamma_re = Some(re.gamma);
    Ok(report)
}

/// Sampled lower bound on `gamma_cones(..).gamma`; see
/// [`crate::oracle::brute_force_gamma`].
pub fn oracle_gamma(c1: &UnionCone, c2: &UnionCone, samples: usize, seed: u64) -> Result<f64> {
    crate::oracle::brute_force_gamma(c1, c2, samples, &mut Rng::new(seed))
}
