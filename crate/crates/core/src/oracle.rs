//! Seeded brute-force baselines used to cross-check every optimized value.
//!
//! Nothing here calls the eigen-solver, the NNLS projection or the
//! alternating / gradient optimizers; every value is a maximum over
//! explicitly sampled feasible points, hence a lower bound on the true
//! supremum.
//!
//! Draw `t` of a sampling run is a fresh coefficient mix when `t` is even and
//! a clipped perturbation of an incumbent's coefficients when `t` is odd.
//! Each pair of parts has its own incumbent and perturbation scale, which
//! adapts on success/failure only. The output of a run with `n` samples is
//! therefore the running maximum of a fixed sequence and is nondecreasing
//! in `n`.

use std::f64::consts::{PI, TAU};

pub use crate::rng::Rng;

use crate::cone::{ConvexCone, UnionCone};
use crate::error::{Error, Result};
use crate::space::{inner, norm, Field, Scalar, Vector, ZERO_TOL};
use crate::subspace::Subspace;

const ZERO_DRAW_CAP: usize = 100;
const SIGMA_START: f64 = 0.5;
const SIGMA_MAX: f64 = 1.0;
const SIGMA_MIN: f64 = 1e-9;
const SIGMA_GROW: f64 = 1.5;
const SIGMA_SHRINK: f64 = 0.97;

/// Coefficients of a sampled member: the part it came from and its weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub part: usize,
    pub coeffs: Vec<f64>,
}

/// A set whose members can be sampled through coefficient vectors.
pub trait MemberSampler {
    fn draw(&self, rng: &mut Rng) -> Draw;
    fn perturb(&self, base: &Draw, sigma: f64, rng: &mut Rng) -> Draw;
    /// Number of parts; draws carry a part index below this.
    fn parts(&self) -> usize {
        1
    }
    /// The member for a draw; `None` for (numerically) zero members.
    fn realize(&self, d: &Draw) -> Option<Vector>;
}

/// Uniform part, `U[0,1]` coefficient per generator.
pub struct ConeSampler<'a> {
    cone: &'a UnionCone,
}

impl<'a> ConeSampler<'a> {
    pub fn new(cone: &'a UnionCone) -> Self {
        ConeSampler { cone }
    }

    fn part(&self, i: usize) -> &ConvexCone {
        &self.cone.parts()[i]
    }
}

impl MemberSampler for ConeSampler<'_> {
    fn draw(&self, rng: &mut Rng) -> Draw {
        let part = rng.below(self.cone.parts().len());
        let m = self.part(part).generators().len();
        Draw { part, coeffs: (0..m).map(|_| rng.uniform()).collect() }
    }

    fn perturb(&self, base: &Draw, sigma: f64, rng: &mut Rng) -> Draw {
        let top = base.coeffs.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let coeffs = base.coeffs.iter().map(|&c| (c / top + sigma * rng.uniform_range(-1.0, 1.0)).max(0.0)).collect();
        Draw { part: base.part, coeffs }
    }

    fn parts(&self) -> usize {
        self.cone.parts().len()
    }

    fn realize(&self, d: &Draw) -> Option<Vector> {
        let v = self.part(d.part).combination(&d.coeffs);
        (norm(&v) > ZERO_TOL).then_some(v)
    }
}

/// Gaussian coefficients in an orthonormal basis (complex when the space is).
pub struct SubspaceSampler<'a> {
    sub: &'a Subspace,
    complex: bool,
}

impl<'a> SubspaceSampler<'a> {
    pub fn new(sub: &'a Subspace) -> Self {
        SubspaceSampler { sub, complex: sub.space().field() == Field::Complex }
    }

    fn width(&self) -> usize {
        self.sub.rank() * if self.complex { 2 } else { 1 }
    }
}

impl MemberSampler for SubspaceSampler<'_> {
    fn draw(&self, rng: &mut Rng) -> Draw {
        Draw { part: 0, coeffs: (0..self.width()).map(|_| rng.normal()).collect() }
    }

    fn perturb(&self, base: &Draw, sigma: f64, rng: &mut Rng) -> Draw {
        let n = base.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let coeffs = base.coeffs.iter().map(|&c| c / n + sigma * rng.normal()).collect();
        Draw { part: 0, coeffs }
    }

    fn realize(&self, d: &Draw) -> Option<Vector> {
        let coeffs: Vec<Scalar> = if self.complex {
            d.coeffs.chunks(2).map(|p| Scalar::new(p[0], p[1])).collect()
        } else {
            d.coeffs.iter().map(|&c| Scalar::new(c, 0.0)).collect()
        };
        let v = self.sub.combination(&coeffs);
        (norm(&v) > ZERO_TOL).then_some(v)
    }
}

/// Best draw pair found so far for one (part, part) combination.
struct Incumbent {
    value: f64,
    a: Draw,
    b: Draw,
    sigma: f64,
}

/// Running maximum of `objective` over `samples` sampled pairs.
///
/// Every pair of parts keeps its own incumbent and perturbation scale, and
/// the local draws visit the pairs that have an incumbent in turn, so a good
/// local maximum in one pair cannot starve the search in another.
pub fn adaptive_max<A, B, F>(a: &A, b: &B, samples: usize, rng: &mut Rng, objective: F) -> Result<f64>
where
    A: MemberSampler + ?Sized,
    B: MemberSampler + ?Sized,
    F: Fn(&Vector, &Vector) -> Result<f64>,
{
    let nb = b.parts();
    let mut incumbents: Vec<Option<Incumbent>> = (0..a.parts() * nb).map(|_| None).collect();
    let mut cursor = 0;
    let mut zero_streak = 0;
    for t in 0..samples {
        let slot = if t % 2 == 1 { next_occupied(&incumbents, &mut cursor) } else { None };
        let (da, db) = match slot {
            Some(k) => {
                let inc = incumbents[k].as_ref().expect("occupied slot");
                (a.perturb(&inc.a, inc.sigma, rng), b.perturb(&inc.b, inc.sigma, rng))
            }
            None => (a.draw(rng), b.draw(rng)),
        };
        let (Some(va), Some(vb)) = (a.realize(&da), b.realize(&db)) else {
            if slot.is_none() {
                zero_streak += 1;
                if zero_streak >= ZERO_DRAW_CAP {
                    return Err(Error::Internal("degenerate generators: repeated zero draws".into()));
                }
            }
            continue;
        };
        zero_streak = 0;
        let val = objective(&va, &vb)?;
        let k = da.part * nb + db.part;
        match &mut incumbents[k] {
            Some(inc) => {
                let improved = val > inc.value;
                if improved {
                    inc.value = val;
                    inc.a = da;
                    inc.b = db;
                }
                if slot.is_some() {
                    inc.sigma = if improved {
                        (inc.sigma * SIGMA_GROW).min(SIGMA_MAX)
                    } else {
                        (inc.sigma * SIGMA_SHRINK).max(SIGMA_MIN)
                    };
                }
            }
            empty => *empty = Some(Incumbent { value: val, a: da, b: db, sigma: SIGMA_START }),
        }
    }
    incumbents
        .iter()
        .flatten()
        .map(|inc| inc.value)
        .reduce(f64::max)
        .ok_or_else(|| Error::Internal("no feasible sample drawn".into()))
}

/// Next slot holding an incumbent, scanning cyclically from `cursor`.
fn next_occupied(incumbents: &[Option<Incumbent>], cursor: &mut usize) -> Option<usize> {
    let n = incumbents.len();
    for step in 0..n {
        let k = (*cursor + step) % n;
        if incumbents[k].is_some() {
            *cursor = (k + 1) % n;
            return Some(k);
        }
    }
    None
}

fn abs_cosine(v: &Vector, w: &Vector) -> Result<f64> {
    Ok(inner(v, w)?.norm() / (norm(v) * norm(w)))
}

/// Unit member of the cone from a random coefficient mix; retries zero mixes.
pub fn sample_unit_in_cone(cone: &UnionCone, rng: &mut Rng) -> Result<Vector> {
    let sampler = ConeSampler::new(cone);
    for _ in 0..ZERO_DRAW_CAP {
        if let Some(v) = sampler.realize(&sampler.draw(rng)) {
            let n = norm(&v);
            return Ok(v.scale_real(1.0 / n));
        }
    }
    Err(Error::Internal("degenerate generators: repeated zero draws".into()))
}

/// Sampled lower bound on `sup |(v, w)|` over unit members of two cones.
pub fn brute_force_gamma(c1: &UnionCone, c2: &UnionCone, samples: usize, rng: &mut Rng) -> Result<f64> {
    if samples == 0 {
        return Err(Error::usage("oracle needs at least one sample"));
    }
    if **c1.space() != **c2.space() {
        return Err(Error::usage("cones belong to different spaces"));
    }
    adaptive_max(&ConeSampler::new(c1), &ConeSampler::new(c2), samples, rng, abs_cosine)
}

/// Sampled lower bound on the largest principal cosine of two subspaces.
pub fn brute_force_gamma_subspaces(v: &Subspace, f: &Subspace, samples: usize, rng: &mut Rng) -> Result<f64> {
    if samples == 0 {
        return Err(Error::usage("oracle needs at least one sample"));
    }
    if v.is_zero() || f.is_zero() {
        return Ok(0.0);
    }
    adaptive_max(&SubspaceSampler::new(v), &SubspaceSampler::new(f), samples, rng, abs_cosine)
}

/// Angular extent of a planar convex cone.
#[derive(Debug, Clone, PartialEq)]
enum Arc2 {
    /// Angles `start ..= start + width`, `width < 2π`.
    Sector {
        start: f64,
        width: f64,
    },
    /// Two opposite rays.
    Line {
        angle: f64,
    },
    Plane,
}

const ANGLE_TOL: f64 = 1e-12;

fn planar_extent(part: &ConvexCone) -> Arc2 {
    let mut angles: Vec<f64> = part
        .generators()
        .iter()
        .map(|g| {
            let a = g.coords()[1].re.atan2(g.coords()[0].re);
            if a < 0.0 {
                a + TAU
            } else {
                a
            }
        })
        .collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < ANGLE_TOL);
    if angles.len() == 1 {
        return Arc2::Sector { start: angles[0], width: 0.0 };
    }
    // Largest circular gap between consecutive generator angles.
    let n = angles.len();
    let (gap_idx, gap) = (0..n)
        .map(|i| {
            let next = if i + 1 < n { angles[i + 1] } else { angles[0] + TAU };
            (i, next - angles[i])
        })
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let start = angles[(gap_idx + 1) % n];
    if gap > PI + ANGLE_TOL {
        Arc2::Sector { start, width: TAU - gap }
    } else if gap >= PI - ANGLE_TOL {
        if n == 2 {
            Arc2::Line { angle: start }
        } else {
            Arc2::Sector { start, width: PI }
        }
    } else {
        Arc2::Plane
    }
}

fn grid_angles(extent: &Arc2, resolution: usize) -> Vec<f64> {
    match *extent {
        Arc2::Sector { start, width: 0.0 } => vec![start],
        Arc2::Sector { start, width } => {
            (0..=resolution).map(|i| start + width * i as f64 / resolution as f64).collect()
        }
        Arc2::Line { angle } => vec![angle, angle + PI],
        Arc2::Plane => (0..resolution).map(|i| TAU * i as f64 / resolution as f64).collect(),
    }
}

/// Grid search over boundary-to-boundary angular sectors of planar cones:
/// `max |(v, w)|/(‖v‖‖w‖)` over equispaced directions in each part.
pub fn grid_gamma_2d(c1: &UnionCone, c2: &UnionCone, resolution: usize) -> Result<f64> {
    let space = c1.space();
    if space.dim() != 2 || **c2.space() != **space {
        return Err(Error::usage("grid oracle needs two cones in the same 2-dimensional space"));
    }
    if resolution < 8 {
        return Err(Error::usage("grid resolution must be at least 8"));
    }
    let directions = |cone: &UnionCone| -> Result<Vec<Vector>> {
        let mut out = Vec::new();
        for part in cone.parts() {
            for a in grid_angles(&planar_extent(part), resolution) {
                let v = Vector::from_real(space, &[a.cos(), a.sin()])?;
                let n = norm(&v);
                out.push(v.scale_real(1.0 / n));
            }
        }
        Ok(out)
    };
    let d1 = directions(c1)?;
    let d2 = directions(c2)?;
    let mut best = 0.0f64;
    for v in &d1 {
        for w in &d2 {
            best = best.max(inner(v, w)?.norm());
        }
    }
    Ok(best.min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Space;
    use std::f64::consts::FRAC_1_SQRT_2;
    use std::sync::Arc;

    fn r2() -> Arc<Space> {
        Space::real(2).unwrap()
    }

    fn ray(s: &Arc<Space>, d: &[f64]) -> UnionCone {
        ConvexCone::ray(s, d).unwrap().into()
    }

    fn quadrant_example(s: &Arc<Space>) -> (UnionCone, UnionCone) {
        let line =
            UnionCone::new(vec![ConvexCone::ray(s, &[1.0, -1.0]).unwrap(), ConvexCone::ray(s, &[-1.0, 1.0]).unwrap()])
                .unwrap();
        let q1 = ConvexCone::from_rows(s, &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        (line, UnionCone::new(vec![q1.clone(), q1.negated()]).unwrap())
    }

    #[test]
    fn sample_examples() {
        let s = r2();
        let r = ray(&s, &[3.0, 4.0]);
        let v = sample_unit_in_cone(&r, &mut Rng::new(1)).unwrap();
        assert!((v.real_coords()[0] - 0.6).abs() < 1e-15);
        let q: UnionCone = ConvexCone::from_rows(&s, &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap().into();
        let mut rng = Rng::new(2);
        for _ in 0..100 {
            let v = sample_unit_in_cone(&q, &mut rng).unwrap();
            assert!(v.real_coords().iter().all(|&x| x >= 0.0));
            assert!((norm(&v) - 1.0).abs() < 1e-14);
        }
        let a = sample_unit_in_cone(&q, &mut Rng::new(9)).unwrap();
        let b = sample_unit_in_cone(&q, &mut Rng::new(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn brute_force_examples() {
        let s = r2();
        let e1 = ray(&s, &[1.0, 0.0]);
        let e2 = ray(&s, &[0.0, 1.0]);
        assert_eq!(brute_force_gamma(&e1, &e2, 10, &mut Rng::new(0)).unwrap(), 0.0);
        assert_eq!(brute_force_gamma(&e1, &e1, 10, &mut Rng::new(0)).unwrap(), 1.0);
        let (line, quads) = quadrant_example(&s);
        let g = brute_force_gamma(&line, &quads, 100_000, &mut Rng::new(0xC5C5)).unwrap();
        assert!(g <= FRAC_1_SQRT_2 + 1e-12);
        assert!((g - FRAC_1_SQRT_2).abs() <= 5e-3);
    }

    #[test]
    fn brute_force_is_monotone_in_samples() {
        let s = Space::real(3).unwrap();
        let a: UnionCone = ConvexCone::from_rows(&s, &[vec![1.0, 0.0, 0.2], vec![0.0, 1.0, 0.0]]).unwrap().into();
        let b: UnionCone = ConvexCone::from_rows(&s, &[vec![0.0, 0.3, 1.0], vec![-1.0, 0.0, 0.5]]).unwrap().into();
        let mut prev = 0.0;
        for n in [1, 2, 5, 50, 500, 5000] {
            let g = brute_force_gamma(&a, &b, n, &mut Rng::new(4)).unwrap();
            assert!(g >= prev);
            prev = g;
        }
    }

    #[test]
    fn grid_examples() {
        let s = r2();
        let (line, quads) = quadrant_example(&s);
        let g = grid_gamma_2d(&line, &quads, 10_000).unwrap();
        assert!((g - FRAC_1_SQRT_2).abs() <= 1e-3);
        let a = ray(&s, &[1.0, 2.0]);
        let b = ray(&s, &[-3.0, 1.0]);
        let exact = (1.0f64 * -3.0 + 2.0 * 1.0).abs() / (5f64.sqrt() * 10f64.sqrt());
        assert!((grid_gamma_2d(&a, &b, 8).unwrap() - exact).abs() < 1e-15);
        let q: UnionCone = ConvexCone::from_rows(&s, &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap().into();
        assert!((grid_gamma_2d(&q, &q, 8).unwrap() - 1.0).abs() < 1e-15);
        let s3 = Space::real(3).unwrap();
        let r3 = ray(&s3, &[1.0, 0.0, 0.0]);
        assert!(matches!(grid_gamma_2d(&r3, &r3, 16), Err(Error::Usage(_))));
        assert!(grid_gamma_2d(&a, &b, 4).is_err());
    }

    #[test]
    fn planar_extents() {
        let s = r2();
        let cone = |rows: &[Vec<f64>]| ConvexCone::from_rows(&s, rows).unwrap();
        match planar_extent(&cone(&[vec![1.0, 0.0], vec![-1.0, 0.0]])) {
            Arc2::Line { angle } => assert!(angle.rem_euclid(PI) < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            planar_extent(&cone(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0]])),
            Arc2::Sector { width, .. } if (width - PI).abs() < 1e-12
        ));
        assert_eq!(planar_extent(&cone(&[vec![1.0, 0.0], vec![-1.0, 1.0], vec![-1.0, -1.0]])), Arc2::Plane);
        // Sector wrapping through angle 0: from -π/4 to π/4.
        match planar_extent(&cone(&[vec![1.0, 1.0], vec![1.0, -1.0]])) {
            Arc2::Sector { start, width } => {
                assert!((start - 1.75 * PI).abs() < 1e-12);
                assert!((width - 0.5 * PI).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn subspace_oracle_is_lower_bound() {
        let s = Space::real(3).unwrap();
        let a = crate::subspace::orthonormalize(&s, &[s.basis(0)]).unwrap();
        let g = Vector::from_real(&s, &[1.0, 1.0, 0.0]).unwrap();
        let b = crate::subspace::orthonormalize(&s, &[g, s.basis(2)]).unwrap();
        let o = brute_force_gamma_subspaces(&a, &b, 20_000, &mut Rng::new(3)).unwrap();
        assert!(o <= FRAC_1_SQRT_2 + 1e-12);
        assert!(FRAC_1_SQRT_2 - o < 1e-4);
    }
}
