//! Randomized invariant suite behind `cbs verify`, plus the random instance
//! generators it shares with the test suites.
//!
//! Trial `t` draws all of its data from `Rng::stream(seed, t)`, so a failing
//! trial can be replayed from the seed and index alone.

use std::sync::Arc;

use serde::Serialize;

use crate::cone::{gamma_cones, ConeOptions, ConvexCone, UnionCone};
use crate::error::{Error, Result};
use crate::holder::{
    gamma_holder_bound, holder_defect, lp_norm, mazur_map, oracle_gamma_holder, HolderOptions, LpVector, MeasureSpace,
};
use crate::identities::{imag_cs_identity, modulus_cs_identity, optimal_alpha, real_cs_identity, variational_bound};
use crate::oracle::{brute_force_gamma, brute_force_gamma_subspaces, sample_unit_in_cone};
use crate::rng::Rng;
use crate::space::{inner, norm, Field, Scalar, Space, Vector};
use crate::subspace::{gamma_subspaces, orthonormalize, Subspace};

pub const EXPONENTS: [f64; 4] = [1.5, 2.0, 3.0, 4.0];
/// Number of equispaced rotation angles in the variational sweep.
pub const ALPHA_STEPS: usize = 64;

const IDENTITY_TOL: f64 = 1e-10;
const VARIATIONAL_TOL: f64 = 1e-12;
const MAZUR_TOL: f64 = 1e-10;
const HOLDER_SLACK_TOL: f64 = -1e-10;
const P2_CONSISTENCY_TOL: f64 = 1e-12;
const LOWER_BOUND_TOL: f64 = 1e-9;
const HOLDER_SANDWICH_TOL: f64 = 5e-3;
const VERIFY_ORACLE_SAMPLES: usize = 2000;
const MAX_LISTED_FAILURES: usize = 20;

// ---------------------------------------------------------------------------
// Random instances
// ---------------------------------------------------------------------------

/// Hermitian positive-definite Gram matrix `BᴴB/n + I/2`.
pub fn random_gram_space(dim: usize, field: Field, rng: &mut Rng) -> Result<Arc<Space>> {
    let complex = field == Field::Complex;
    let b: Vec<Scalar> =
        (0..dim * dim).map(|_| Scalar::new(rng.normal(), if complex { rng.normal() } else { 0.0 })).collect();
    let mut g = vec![Scalar::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in i..dim {
            let s: Scalar = (0..dim).map(|k| b[k * dim + i].conj() * b[k * dim + j]).sum::<Scalar>() / dim as f64;
            if i == j {
                g[i * dim + i] = Scalar::new(s.re + 0.5, 0.0);
            } else {
                g[i * dim + j] = s;
                g[j * dim + i] = s.conj();
            }
        }
    }
    Space::with_gram(dim, field, g)
}

/// Gaussian direction rescaled to a log-uniform norm in `[0.1, 10]`.
pub fn random_vector(space: &Arc<Space>, rng: &mut Rng) -> Vector {
    let complex = space.field() == Field::Complex;
    loop {
        let coords: Vec<Scalar> =
            (0..space.dim()).map(|_| Scalar::new(rng.normal(), if complex { rng.normal() } else { 0.0 })).collect();
        let v = Vector::from_parts(Arc::clone(space), coords);
        let n = norm(&v);
        if n > 1e-6 {
            let target = 10f64.powf(rng.uniform_range(-1.0, 1.0));
            return v.scale_real(target / n);
        }
    }
}

/// Span of `k` random vectors.
pub fn random_subspace(space: &Arc<Space>, k: usize, rng: &mut Rng) -> Result<Subspace> {
    let gens: Vec<Vector> = (0..k).map(|_| random_vector(space, rng)).collect();
    orthonormalize(space, &gens)
}

/// Convex cone with `m` Gaussian generators.
pub fn random_cone(space: &Arc<Space>, m: usize, rng: &mut Rng) -> Result<ConvexCone> {
    let gens: Vec<Vector> = (0..m).map(|_| random_vector(space, rng)).collect();
    ConvexCone::new(space, gens)
}

/// Function values with magnitudes in `[0.05, 3]` and random signs.
pub fn random_lp(measure: &Arc<MeasureSpace>, rng: &mut Rng) -> LpVector {
    let values = (0..measure.len())
        .map(|_| {
            let mag = rng.uniform_range(0.05, 3.0);
            if rng.uniform() < 0.5 {
                -mag
            } else {
                mag
            }
        })
        .collect();
    LpVector::new(measure, values).expect("finite values of matching length")
}

pub fn random_measure(n: usize, rng: &mut Rng) -> Arc<MeasureSpace> {
    MeasureSpace::new((0..n).map(|_| rng.uniform_range(0.2, 2.0)).collect()).expect("positive weights")
}

// ---------------------------------------------------------------------------
// Suite
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct CheckSummary {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest observed value of the checked quantity (residual or
    /// violation), for diagnostics.
    pub worst: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub check: &'static str,
    pub trial: usize,
    pub value: f64,
    pub inputs: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: String,
    pub trials: usize,
    pub passed: bool,
    pub checks: Vec<CheckSummary>,
    pub failures: Vec<Failure>,
}

struct Suite {
    checks: Vec<CheckSummary>,
    failures: Vec<Failure>,
    failure_count: usize,
}

impl Suite {
    fn new() -> Self {
        Suite { checks: Vec::new(), failures: Vec::new(), failure_count: 0 }
    }

    /// Records `value` for `name`; `ok` decides pass/fail.
    fn record(&mut self, name: &'static str, trial: usize, value: f64, ok: bool, inputs: impl FnOnce() -> String) {
        let idx = match self.checks.iter().position(|c| c.name == name) {
            Some(i) => i,
            None => {
                self.checks.push(CheckSummary { name, cases: 0, failures: 0, worst: f64::NEG_INFINITY });
                self.checks.len() - 1
            }
        };
        let c = &mut self.checks[idx];
        c.cases += 1;
        if value > c.worst || c.worst.is_nan() {
            c.worst = value;
        }
        if !ok || !value.is_finite() {
            c.failures += 1;
            self.failure_count += 1;
            if self.failures.len() < MAX_LISTED_FAILURES {
                self.failures.push(Failure { check: name, trial, value, inputs: inputs() });
            }
        }
    }
}

fn coords_string(v: &Vector) -> String {
    let parts: Vec<String> = v.coords().iter().map(|z| format!("[{:e},{:e}]", z.re, z.im)).collect();
    format!("[{}]", parts.join(","))
}

fn identity_trial(suite: &mut Suite, t: usize, rng: &mut Rng) -> Result<()> {
    let dim = 1 + rng.below(32);
    let space = if t.is_multiple_of(2) { Space::complex(dim)? } else { random_gram_space(dim, Field::Complex, rng)? };
    let x = random_vector(&space, rng);
    let y = random_vector(&space, rng);
    let desc = || format!("dim={dim} gram={} x={} y={}", t % 2 == 1, coords_string(&x), coords_string(&y));

    let re = real_cs_identity(&x, &y)?;
    let im = imag_cs_identity(&x, &y)?;
    let md = modulus_cs_identity(&x, &y)?;
    suite.record("identity_real", t, re.residual, re.residual < IDENTITY_TOL, desc);
    suite.record("identity_imag", t, im.residual, im.residual < IDENTITY_TOL, desc);
    suite.record("identity_modulus", t, md.residual, md.residual < IDENTITY_TOL, desc);

    let z = inner(&x, &y)?;
    let decomposition = (Scalar::new(re.lhs, im.lhs) - z).norm();
    suite.record("identity_decomposition", t, decomposition, decomposition < VARIATIONAL_TOL, desc);
    let cs = z.norm() - norm(&x) * norm(&y);
    suite.record("cauchy_schwarz", t, cs, cs <= VARIATIONAL_TOL, desc);

    let mut worst = f64::NEG_INFINITY;
    for k in 0..ALPHA_STEPS {
        let alpha = std::f64::consts::TAU * k as f64 / ALPHA_STEPS as f64;
        let r = variational_bound(&x, &y, alpha)?;
        worst = worst.max(r.lhs - r.rhs);
    }
    suite.record("variational_bound", t, worst, worst <= VARIATIONAL_TOL, desc);
    let at_opt = variational_bound(&x, &y, optimal_alpha(&x, &y)?)?;
    suite.record("variational_equality", t, at_opt.residual, at_opt.residual < IDENTITY_TOL, desc);
    Ok(())
}

fn mazur_trial(suite: &mut Suite, t: usize, rng: &mut Rng) -> Result<()> {
    let n = 1 + rng.below(16);
    let measure = random_measure(n, rng);
    let f = random_lp(&measure, rng);
    let r = EXPONENTS[rng.below(4)];
    let s = EXPONENTS[rng.below(4)];
    let lambda = 10f64.powf(rng.uniform_range(-1.0, 1.0));
    let desc = || format!("r={r} s={s} lambda={lambda} mu={:?} f={:?}", measure.weights(), f.values());

    let psi = mazur_map(&f, r, s)?;
    let dn = (lp_norm(&psi, s)? - lp_norm(&f, r)?).abs();
    suite.record("mazur_norm", t, dn, dn <= MAZUR_TOL, desc);
    let back = mazur_map(&psi, s, r)?;
    let inv = back.values().iter().zip(f.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    suite.record("mazur_inverse", t, inv, inv <= MAZUR_TOL, desc);
    let scaled = mazur_map(&f.scale(lambda), r, s)?;
    let hom = scaled.values().iter().zip(psi.values()).map(|(a, b)| (a - lambda * b).abs()).fold(0.0, f64::max);
    suite.record("mazur_homogeneity", t, hom, hom <= MAZUR_TOL, desc);
    Ok(())
}

fn holder_trial(suite: &mut Suite, t: usize, rng: &mut Rng) -> Result<()> {
    let n = 1 + rng.below(16);
    let measure = random_measure(n, rng);
    let f = random_lp(&measure, rng);
    let g = random_lp(&measure, rng);
    let p = EXPONENTS[rng.below(4)];
    let desc = || format!("p={p} mu={:?} f={:?} g={:?}", measure.weights(), f.values(), g.values());

    let rep = holder_defect(&f, &g, p)?;
    suite.record("holder_slack", t, -rep.slack, rep.slack >= HOLDER_SLACK_TOL, desc);

    let eq = LpVector::new(&measure, f.values().iter().map(|v| v.abs().powf(p - 1.0)).collect())?;
    let er = holder_defect(&f, &eq, p)?;
    let worst = er.defect.max(er.slack.abs());
    suite.record("holder_equality", t, worst, worst < IDENTITY_TOL, desc);

    // p = 2 against the real identity on (|f|, |g|) with Gram diag(μ).
    let r2 = holder_defect(&f, &g, 2.0)?;
    let gram: Vec<Scalar> =
        (0..n * n).map(|k| Scalar::new(if k / n == k % n { measure.weights()[k / n] } else { 0.0 }, 0.0)).collect();
    let space = Space::with_gram(n, Field::Real, gram)?;
    let fa = Vector::from_real(&space, f.abs().values())?;
    let ga = Vector::from_real(&space, g.abs().values())?;
    let id = real_cs_identity(&fa, &ga)?;
    let diff = (r2.pairing - id.lhs)
        .abs()
        .max((r2.bound - id.rhs).abs())
        .max((r2.defect - id.defect_re.unwrap_or(f64::NAN)).abs());
    suite.record("holder_p2_consistency", t, diff, diff <= P2_CONSISTENCY_TOL, desc);
    Ok(())
}

fn subspace_trial(suite: &mut Suite, t: usize, rng: &mut Rng) -> Result<()> {
    let dim = 2 + rng.below(5);
    let field = if t.is_multiple_of(2) { Field::Real } else { Field::Complex };
    let space = Space::euclidean(dim, field)?;
    let kv = 1 + rng.below(3.min(dim - 1));
    let kf = 1 + rng.below(3.min(dim - kv));
    let v = random_subspace(&space, kv, rng)?;
    let f = random_subspace(&space, kf, rng)?;
    let rep = gamma_subspaces(&v, &f)?;
    let desc = || format!("dim={dim} field={field:?} kv={kv} kf={kf} trial stream");

    let mut orng = Rng::stream(rng.next_u64(), 0);
    let o = brute_force_gamma_subspaces(&v, &f, VERIFY_ORACLE_SAMPLES, &mut orng)?;
    suite.record("subspace_oracle_lower_bound", t, o - rep.gamma, o <= rep.gamma + LOWER_BOUND_TOL, desc);

    let x = v.project(&random_vector(&space, rng))?;
    let y = f.project(&random_vector(&space, rng))?;
    let excess = inner(&x, &y)?.norm() - rep.gamma * norm(&x) * norm(&y);
    suite.record("subspace_strengthened_cs", t, excess, excess <= IDENTITY_TOL, desc);
    Ok(())
}

fn cone_trial(suite: &mut Suite, t: usize, rng: &mut Rng) -> Result<()> {
    let dim = 2 + rng.below(2);
    let space = Space::real(dim)?;
    let c1: UnionCone = random_cone(&space, 1 + rng.below(4), rng)?.into();
    let c2: UnionCone = random_cone(&space, 1 + rng.below(4), rng)?.into();
    let opts = ConeOptions { seed: rng.next_u64(), ..ConeOptions::default() };
    let rep = gamma_cones(&c1, &c2, &opts)?;
    let desc = || format!("dim={dim} cone seed={:#x}", opts.seed);

    let mut orng = Rng::stream(opts.seed, 1);
    let o = brute_force_gamma(&c1, &c2, VERIFY_ORACLE_SAMPLES, &mut orng)?;
    suite.record("cone_oracle_lower_bound", t, o - rep.gamma, o <= rep.gamma + LOWER_BOUND_TOL, desc);

    let x = sample_unit_in_cone(&c1, rng)?.scale_real(rng.uniform_range(0.1, 10.0));
    let y = sample_unit_in_cone(&c2, rng)?.scale_real(rng.uniform_range(0.1, 10.0));
    let excess = inner(&x, &y)?.norm() - rep.gamma * norm(&x) * norm(&y);
    suite.record("cone_strengthened_cs", t, excess, excess <= LOWER_BOUND_TOL, desc);
    let consistency = (rep.gamma - (1.0 - rep.kappa * rep.kappa / 2.0)).abs();
    suite.record("cone_report_consistency", t, consistency, consistency <= VARIATIONAL_TOL, desc);
    Ok(())
}

fn holder_gamma_trial(suite: &mut Suite, t: usize, rng: &mut Rng) -> Result<()> {
    let n = 2 + rng.below(3);
    let measure = random_measure(n, rng);
    let space = Space::real(n)?;
    let c1: UnionCone = random_cone(&space, 1 + rng.below(2), rng)?.into();
    let c2: UnionCone = random_cone(&space, 1 + rng.below(2), rng)?.into();
    let p = EXPONENTS[rng.below(4)];
    let opts = HolderOptions { seed: rng.next_u64(), ..HolderOptions::default() };
    let desc = || format!("n={n} p={p} seed={:#x}", opts.seed);
    let rep = gamma_holder_bound(&measure, &c1, &c2, p, &opts)?;
    let o = oracle_gamma_holder(&measure, &c1, &c2, p, VERIFY_ORACLE_SAMPLES, opts.seed)?;
    let excess = o - rep.gamma;
    suite.record("holder_gamma_sandwich", t, excess, excess <= HOLDER_SANDWICH_TOL && o <= 1.0 + 1e-12, desc);
    Ok(())
}

/// Runs `trials` rounds of the invariant suite. Subspace checks run every
/// 4th trial, cone and Hölder-γ checks every 10th.
pub fn run_verify(seed: u64, trials: usize) -> Result<VerifyReport> {
    if trials == 0 {
        return Err(Error::usage("trials must be at least 1"));
    }
    let mut suite = Suite::new();
    for t in 0..trials {
        let mut rng = Rng::stream(seed, t as u64);
        identity_trial(&mut suite, t, &mut rng)?;
        mazur_trial(&mut suite, t, &mut rng)?;
        holder_trial(&mut suite, t, &mut rng)?;
        if t % 4 == 0 {
            subspace_trial(&mut suite, t, &mut rng)?;
        }
        if t % 10 == 0 {
            cone_trial(&mut suite, t, &mut rng)?;
            holder_gamma_trial(&mut suite, t, &mut rng)?;
        }
    }
    Ok(VerifyReport {
        seed: format!("{seed:#x}"),
        trials,
        passed: suite.failure_count == 0,
        checks: suite.checks,
        failures: suite.failures,
    })
}
