//! Discrete L^p machinery: weighted p-norms, the Mazur map, the Hölder
//! defect inequality with its `1/M` constant, and Mazur-route γ bounds for
//! pairs of cones.
//!
//! All data is real. A cone in L^p is a [`UnionCone`] over the real
//! coordinate space of the measure; its generators' coordinates are read as
//! function values.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::cone::{ConvexCone, UnionCone, DEFAULT_SEED};
use crate::error::{Error, Result};
use crate::gamma::{GammaReport, Method, INTERSECTION_TOL};
use crate::oracle::{adaptive_max, ConeSampler};
use crate::rng::Rng;
use crate::space::{Space, Vector};

/// Finite measure with strictly positive point masses.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpace {
    weights: Vec<f64>,
}

impl MeasureSpace {
    pub fn new(weights: Vec<f64>) -> Result<Arc<Self>> {
        if weights.is_empty() {
            return Err(Error::usage("measure needs at least one point"));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::parse("measure weights must be finite"));
        }
        if weights.iter().any(|&w| w <= 0.0) {
            return Err(Error::usage("measure weights must be positive"));
        }
        Ok(Arc::new(MeasureSpace { weights }))
    }

    /// Counting measure on `n` points.
    pub fn uniform(n: usize) -> Result<Arc<Self>> {
        Self::new(vec![1.0; n])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Real function on a [`MeasureSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct LpVector {
    measure: Arc<MeasureSpace>,
    values: Vec<f64>,
}

impl LpVector {
    pub fn new(measure: &Arc<MeasureSpace>, values: Vec<f64>) -> Result<Self> {
        if values.len() != measure.len() {
            return Err(Error::usage(format!(
                "function has {} values, measure has {} points",
                values.len(),
                measure.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::parse("function values must be finite"));
        }
        Ok(LpVector { measure: Arc::clone(measure), values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn measure(&self) -> &Arc<MeasureSpace> {
        &self.measure
    }

    /// `|f|`
    pub fn abs(&self) -> LpVector {
        LpVector { measure: Arc::clone(&self.measure), values: self.values.iter().map(|v| v.abs()).collect() }
    }

    pub fn scale(&self, a: f64) -> LpVector {
        LpVector { measure: Arc::clone(&self.measure), values: self.values.iter().map(|v| v * a).collect() }
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(Error::usage(format!("exponent {p} outside the open interval (1, ∞)")))
    }
}

fn same_measure(f: &LpVector, g: &LpVector) -> Result<()> {
    if Arc::ptr_eq(&f.measure, &g.measure) || *f.measure == *g.measure {
        Ok(())
    } else {
        Err(Error::usage("functions live on different measure spaces"))
    }
}

/// Conjugate exponent `p/(p - 1)`.
pub fn conjugate(p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(p / (p - 1.0))
}

fn norm_raw(weights: &[f64], values: &[f64], p: f64) -> f64 {
    weights.iter().zip(values).map(|(w, v)| w * v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `(Σ μ_i |f_i|^p)^{1/p}`
pub fn lp_norm(f: &LpVector, p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(norm_raw(&f.measure.weights, &f.values, p))
}

/// `‖fg‖₁ = Σ μ_i |f_i g_i|`
pub fn pairing_l1(f: &LpVector, g: &LpVector) -> Result<f64> {
    same_measure(f, g)?;
    Ok(f.measure.weights.iter().zip(&f.values).zip(&g.values).map(|((w, a), b)| w * (a * b).abs()).sum())
}

/// Sign with the convention `sign 0 = 1`.
fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Mazur map `ψ_{r,s}(f) = ‖f‖_r^{1 - r/s} |f|^{r/s} sign f`, with `ψ(0) = 0`.
pub fn mazur_map(f: &LpVector, r: f64, s: f64) -> Result<LpVector> {
    check_exponent(r)?;
    check_exponent(s)?;
    let n = norm_raw(&f.measure.weights, &f.values, r);
    if n == 0.0 {
        return Ok(f.scale(0.0));
    }
    let e = r / s;
    let factor = n.powf(1.0 - e);
    let values = f.values.iter().map(|&v| factor * v.abs().powf(e) * sign(v)).collect();
    Ok(LpVector { measure: Arc::clone(&f.measure), values })
}

/// Which constant divides the defect term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MVariant {
    /// `M = max{p, q}`
    #[default]
    Max,
    /// `M = p + q` (weaker).
    Sum,
}

impl MVariant {
    pub fn constant(self, p: f64, q: f64) -> f64 {
        match self {
            MVariant::Max => p.max(q),
            MVariant::Sum => p + q,
        }
    }
}

/// Both sides of the sharpened Hölder inequality for one pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderReport {
    pub p: f64,
    pub q: f64,
    /// `‖fg‖₁`
    pub pairing: f64,
    /// `‖f‖_p ‖g‖_q (1 - defect/M)`
    pub bound: f64,
    /// `‖|f|^{p/2}/‖f‖_p^{p/2} - |g|^{q/2}/‖g‖_q^{q/2}‖₂²`
    pub defect: f64,
    #[serde(rename = "M")]
    pub m: f64,
    /// `bound - pairing`
    pub slack: f64,
}

/// `|f|^{p/2} / ‖f‖_p^{p/2}`, the unit L² density of `f`.
fn power_density(weights: &[f64], values: &[f64], p: f64) -> Vec<f64> {
    let n = norm_raw(weights, values, p);
    let scale = n.powf(p / 2.0);
    values.iter().map(|v| v.abs().powf(p / 2.0) / scale).collect()
}

pub fn holder_defect(f: &LpVector, g: &LpVector, p: f64) -> Result<HolderReport> {
    holder_defect_with(f, g, p, MVariant::Max)
}

pub fn holder_defect_with(f: &LpVector, g: &LpVector, p: f64, variant: MVariant) -> Result<HolderReport> {
    let q = conjugate(p)?;
    same_measure(f, g)?;
    let w = &f.measure.weights;
    let nf = norm_raw(w, &f.values, p);
    let ng = norm_raw(w, &g.values, q);
    if !(nf > 0.0) || !(ng > 0.0) {
        return Err(Error::domain("Hölder defect needs nonzero functions"));
    }
    let u = power_density(w, &f.values, p);
    let v = power_density(w, &g.values, q);
    let defect = w.iter().zip(u.iter().zip(&v)).map(|(mu, (a, b))| mu * (a - b).powi(2)).sum::<f64>();
    let m = variant.constant(p, q);
    let pairing = pairing_l1(f, g)?;
    let bound = nf * ng * (1.0 - defect / m);
    Ok(HolderReport { p, q, pairing, bound, defect, m, slack: bound - pairing })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    pub m_variant: MVariant,
}

impl Default for HolderOptions {
    fn default() -> Self {
        HolderOptions { restarts: 64, max_iter: 2000, tol: 1e-12, seed: DEFAULT_SEED, m_variant: MVariant::Max }
    }
}

/// Squared L² distance between the Mazur images of `|A λ|` (from L^p) and
/// `|B η|` (from L^q), as a function of the stacked coefficients `(λ, η)`.
///
/// The objective is invariant under positive rescaling of either block.
pub struct MazurObjective<'a> {
    weights: &'a [f64],
    first: &'a ConvexCone,
    second: &'a ConvexCone,
    p: f64,
    q: f64,
}

struct Side {
    /// Unit L² density.
    u: Vec<f64>,
    /// `|f_i|^{r/2 - 1} sign f_i` (0 where `f_i = 0`).
    dpow: Vec<f64>,
    /// `|f_i|^{r-1} sign f_i`.
    dnorm: Vec<f64>,
    /// `‖f‖_r^r`.
    mass: f64,
}

fn side(weights: &[f64], f: &[f64], r: f64) -> Option<Side> {
    let mass: f64 = weights.iter().zip(f).map(|(w, v)| w * v.abs().powf(r)).sum();
    if !(mass > 0.0) || !mass.is_finite() {
        return None;
    }
    let root = mass.sqrt();
    let u = f.iter().map(|v| v.abs().powf(r / 2.0) / root).collect();
    let dpow = f.iter().map(|&v| if v == 0.0 { 0.0 } else { v.abs().powf(r / 2.0 - 1.0) * sign(v) }).collect();
    let dnorm = f.iter().map(|&v| v.abs().powf(r - 1.0) * sign(v)).collect();
    Some(Side { u, dpow, dnorm, mass })
}

impl<'a> MazurObjective<'a> {
    pub fn new(weights: &'a [f64], first: &'a ConvexCone, second: &'a ConvexCone, p: f64) -> Result<Self> {
        let q = conjugate(p)?;
        for c in [first, second] {
            if c.space().dim() != weights.len() {
                return Err(Error::usage("cone dimension does not match the measure"));
            }
        }
        Ok(MazurObjective { weights, first, second, p, q })
    }

    /// Number of coefficients: generators of the first cone, then the second.
    pub fn arity(&self) -> usize {
        self.first.generators().len() + self.second.generators().len()
    }

    fn split<'x>(&self, x: &'x [f64]) -> (&'x [f64], &'x [f64]) {
        x.split_at(self.first.generators().len())
    }

    fn values(cone: &ConvexCone, coeffs: &[f64]) -> Vec<f64> {
        cone.combination(coeffs).real_coords()
    }

    /// Objective value; `None` where either combination vanishes.
    pub fn value(&self, x: &[f64]) -> Option<f64> {
        let (l, e) = self.split(x);
        let a = side(self.weights, &Self::values(self.first, l), self.p)?;
        let b = side(self.weights, &Self::values(self.second, e), self.q)?;
        Some(self.weights.iter().zip(a.u.iter().zip(&b.u)).map(|(w, (x, y))| w * (x - y).powi(2)).sum())
    }

    /// Analytic gradient with respect to `(λ, η)`.
    pub fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let (l, e) = self.split(x);
        let fa = Self::values(self.first, l);
        let fb = Self::values(self.second, e);
        let a = side(self.weights, &fa, self.p)?;
        let b = side(self.weights, &fb, self.q)?;
        // dJ/du_i = 2 μ_i (u_i - w_i); dJ/dw_i is its negative.
        let resid: Vec<f64> =
            self.weights.iter().zip(a.u.iter().zip(&b.u)).map(|(w, (x, y))| 2.0 * w * (x - y)).collect();
        let df_first = self.density_gradient(&a, &resid, self.p, 1.0);
        let df_second = self.density_gradient(&b, &resid, self.q, -1.0);
        let mut grad: Vec<f64> = self
            .first
            .generators()
            .iter()
            .map(|g| g.real_coords().iter().zip(&df_first).map(|(x, y)| x * y).sum())
            .collect();
        grad.extend(
            self.second
                .generators()
                .iter()
                .map(|g| g.real_coords().iter().zip(&df_second).map(|(x, y)| x * y).sum::<f64>()),
        );
        Some(grad)
    }

    /// Chain rule through `u_i = |f_i|^{r/2} / (Σ μ |f|^r)^{1/2}`.
    fn density_gradient(&self, s: &Side, resid: &[f64], r: f64, orient: f64) -> Vec<f64> {
        let inv_root = 1.0 / s.mass.sqrt();
        let coupling: f64 = resid.iter().zip(&s.u).map(|(c, u)| c * u).sum::<f64>() / s.mass;
        (0..resid.len())
            .map(|k| {
                let direct = resid[k] * (r / 2.0) * s.dpow[k] * inv_root;
                let through_norm = (r / 2.0) * coupling * self.weights[k] * s.dnorm[k];
                orient * (direct - through_norm)
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
struct Descent {
    value: f64,
    x: Vec<f64>,
    converged: bool,
}

const ARMIJO: f64 = 1e-4;

/// Projected gradient with Armijo backtracking on `x ≥ 0`.
fn projected_descent(obj: &MazurObjective, mut x: Vec<f64>, opts: &HolderOptions) -> Option<Descent> {
    let mut value = obj.value(&x)?;
    let mut step = 1.0;
    let mut converged = false;
    let k = obj.first.generators().len();
    for _ in 0..opts.max_iter {
        let grad = obj.gradient(&x)?;
        let mut accepted = None;
        let mut t = step;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| (xi - t * gi).max(0.0)).collect();
            if let Some(v) = obj.value(&trial) {
                let decrease: f64 = grad.iter().zip(x.iter().zip(&trial)).map(|(g, (a, b))| g * (a - b)).sum();
                if v <= value - ARMIJO * decrease {
                    accepted = Some((trial, v));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((mut trial, v)) = accepted else {
            converged = true;
            break;
        };
        // Rescale each block to unit max; the objective is scale invariant.
        let (head, tail) = trial.split_at_mut(k);
        for block in [head, tail] {
            let top = block.iter().cloned().fold(0.0, f64::max);
            if top > 0.0 {
                block.iter_mut().for_each(|c| *c /= top);
            }
        }
        let gain = value - v;
        x = trial;
        value = v;
        step = (t * 2.0).min(1e6);
        if gain < opts.tol {
            converged = true;
            break;
        }
    }
    Some(Descent { value, x, converged })
}

/// Random coefficient vectors per start in the screening pass.
const SCREEN_FACTOR: usize = 16;

/// `restarts` starting points: half uniform draws, half the lowest-valued
/// of `SCREEN_FACTOR · restarts` draws. The minimizers are often pinned
/// near sign changes of the combinations, where the basins are narrow, and
/// cheap objective evaluations locate them far more often than blind starts.
fn screened_starts(
    weights: &[f64],
    a: &ConvexCone,
    b: &ConvexCone,
    p: f64,
    restarts: usize,
    rng: &mut Rng,
) -> Result<Vec<Vec<f64>>> {
    let obj = MazurObjective::new(weights, a, b, p)?;
    let arity = obj.arity();
    let mut draw = || -> Vec<f64> { (0..arity).map(|_| rng.uniform()).collect() };
    let blind = restarts - restarts / 2;
    let mut starts: Vec<Vec<f64>> = (0..blind).map(|_| draw()).collect();
    let mut pool: Vec<(f64, Vec<f64>)> =
        (0..SCREEN_FACTOR * restarts).map(|_| draw()).filter_map(|x| obj.value(&x).map(|v| (v, x))).collect();
    // Stable sort: equal values keep draw order.
    pool.sort_by(|l, r| l.0.total_cmp(&r.0));
    starts.extend(pool.into_iter().take(restarts / 2).map(|(_, x)| x));
    Ok(starts)
}

/// Mazur-route bound on the strengthened Hölder constant of two cones:
/// `γ_bound = 1 - κ²/M`, with κ the (best-found) L² distance between the
/// unit Mazur images of `|C1|` and `|C2|`.
///
/// Exact when every part of both cones is a single ray.
pub fn gamma_holder_bound(
    measure: &MeasureSpace,
    c1: &UnionCone,
    c2: &UnionCone,
    p: f64,
    opts: &HolderOptions,
) -> Result<GammaReport> {
    let q = conjugate(p)?;
    let weights = measure.weights();
    for c in [c1, c2] {
        if c.space().dim() != weights.len() {
            return Err(Error::usage("cone dimension does not match the measure"));
        }
    }
    let mut jobs: Vec<(usize, usize, Vec<f64>)> = Vec::new();
    let mut stream = 0u64;
    for (i, a) in c1.parts().iter().enumerate() {
        for (j, b) in c2.parts().iter().enumerate() {
            let (ka, kb) = (a.generators().len(), b.generators().len());
            for ga in 0..ka {
                for gb in 0..kb {
                    let mut x = vec![0.0; ka + kb];
                    x[ga] = 1.0;
                    x[ka + gb] = 1.0;
                    jobs.push((i, j, x));
                }
            }
            if !(a.is_ray() && b.is_ray()) {
                let mut rng = Rng::stream(opts.seed, stream);
                stream += 1;
                jobs.extend(screened_starts(weights, a, b, p, opts.restarts, &mut rng)?.into_iter().map(|x| (i, j, x)));
            }
        }
    }
    let exact = c1.is_finite_rays() && c2.is_finite_rays();
    let runs: Vec<Result<Option<Descent>>> = jobs
        .par_iter()
        .map(|(i, j, x0)| {
            let obj = MazurObjective::new(weights, &c1.parts()[*i], &c2.parts()[*j], p)?;
            if exact {
                return Ok(obj.value(x0).map(|value| Descent { value, x: x0.clone(), converged: true }));
            }
            Ok(projected_descent(&obj, x0.clone(), opts))
        })
        .collect();
    let mut best: Option<(usize, Descent)> = None;
    for (idx, run) in runs.into_iter().enumerate() {
        if let Some(d) = run? {
            if best.as_ref().is_none_or(|(_, b)| d.value < b.value) {
                best = Some((idx, d));
            }
        }
    }
    let (idx, best) = best.ok_or_else(|| Error::domain("cone combinations vanish identically"))?;
    let (i, j, _) = &jobs[idx];
    let (a, b) = (&c1.parts()[*i], &c2.parts()[*j]);
    let kappa_sq = best.value.max(0.0);
    let m = opts.m_variant.constant(p, q);
    let gamma = (1.0 - kappa_sq / m).clamp(0.0, 1.0);

    let space = Space::real(weights.len())?;
    let ka = a.generators().len();
    let normalized = |cone: &ConvexCone, coeffs: &[f64], r: f64| -> Result<Vector> {
        let vals = cone.combination(coeffs).real_coords();
        let n = norm_raw(weights, &vals, r);
        Vector::from_real(&space, &vals.iter().map(|v| v / n).collect::<Vec<_>>())
    };
    let cert_f = normalized(a, &best.x[..ka], p)?;
    let cert_g = normalized(b, &best.x[ka..], q)?;
    Ok(GammaReport {
        gamma,
        kappa: kappa_sq.sqrt(),
        certificate_v: Some(cert_f),
        certificate_w: Some(cert_g),
        method: if exact { Method::ExactSubspace } else { Method::AlternatingMultistart },
        restarts_used: jobs.len(),
        converged: best.converged,
        heuristic: !exact,
        intersects: gamma >= 1.0 - INTERSECTION_TOL,
        gamma_re: None,
    })
}

/// Sampled lower bound on `sup ‖fg‖₁ / (‖f‖_p ‖g‖_q)` over cone members.
pub fn oracle_gamma_holder(
    measure: &MeasureSpace,
    c1: &UnionCone,
    c2: &UnionCone,
    p: f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let q = conjugate(p)?;
    if samples == 0 {
        return Err(Error::usage("oracle needs at least one sample"));
    }
    let weights = measure.weights();
    for c in [c1, c2] {
        if c.space().dim() != weights.len() {
            return Err(Error::usage("cone dimension does not match the measure"));
        }
    }
    let ratio = |f: &Vector, g: &Vector| -> Result<f64> {
        let (fv, gv) = (f.real_coords(), g.real_coords());
        let pairing: f64 = weights.iter().zip(fv.iter().zip(&gv)).map(|(w, (a, b))| w * (a * b).abs()).sum();
        Ok(pairing / (norm_raw(weights, &fv, p) * norm_raw(weights, &gv, q)))
    };
    let mut rng = Rng::new(seed);
    adaptive_max(&ConeSampler::new(c1), &ConeSampler::new(c2), samples, &mut rng, ratio)
}
