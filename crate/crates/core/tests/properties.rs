//! Property tests for the invariants of each module. Instances are built
//! from proptest-chosen seeds with the library's random generators.

use std::sync::Arc;

use cbs_core::cone::{gamma_cones, kappa_cones, oracle_gamma, project_cone, ConeOptions, ConvexCone, UnionCone};
use cbs_core::holder::{gamma_holder_bound, lp_norm, mazur_map, oracle_gamma_holder, HolderOptions, MeasureSpace};
use cbs_core::identities::{imag_cs_identity, real_cs_identity};
use cbs_core::nnls::{kkt_residual, nnls};
use cbs_core::oracle::Rng;
use cbs_core::space::{inner, norm, normalize, Field, Scalar, Space, Vector};
use cbs_core::subspace::{gamma_subspaces, kappa_subspaces, orthonormalize, Subspace};
use cbs_core::verify::{
    random_cone, random_gram_space, random_lp, random_measure, random_subspace, random_vector, EXPONENTS,
};
use proptest::prelude::*;

fn space(dim: usize, field: Field, gram: bool, rng: &mut Rng) -> Arc<Space> {
    if gram {
        random_gram_space(dim, field, rng).unwrap()
    } else {
        Space::euclidean(dim, field).unwrap()
    }
}

fn field(complex: bool) -> Field {
    if complex {
        Field::Complex
    } else {
        Field::Real
    }
}

fn random_scalar(rng: &mut Rng) -> Scalar {
    Scalar::new(rng.normal(), rng.normal())
}

/// Random nonnegative combination of the generators of one part.
fn cone_member(cone: &ConvexCone, rng: &mut Rng) -> Vector {
    let coeffs: Vec<f64> = cone.generators().iter().map(|_| rng.uniform()).collect();
    cone.combination(&coeffs)
}

fn dist(a: &Vector, b: &Vector) -> f64 {
    norm(&a.sub(b).unwrap())
}

fn fast() -> ProptestConfig {
    ProptestConfig { cases: 64, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

    #[test]
    fn inner_product_axioms(seed: u64, dim in 1usize..=32, gram: bool) {
        let mut rng = Rng::new(seed);
        let s = space(dim, Field::Complex, gram, &mut rng);
        let (x, x2, y) = (random_vector(&s, &mut rng), random_vector(&s, &mut rng), random_vector(&s, &mut rng));
        let (a, b) = (random_scalar(&mut rng), random_scalar(&mut rng));

        let xy = inner(&x, &y).unwrap();
        prop_assert!((inner(&y, &x).unwrap() - xy.conj()).norm() < 1e-12 * (1.0 + xy.norm()));

        let lhs = inner(&x.combine(a, &x2, b).unwrap(), &y).unwrap();
        let rhs = a * xy + b * inner(&x2, &y).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10);

        let sum = norm(&x.add(&y).unwrap()).powi(2) + norm(&x.sub(&y).unwrap()).powi(2);
        let par = 2.0 * norm(&x).powi(2) + 2.0 * norm(&y).powi(2);
        prop_assert!((sum - par).abs() < 1e-10 * (1.0 + par));

        let u = normalize(&x).unwrap();
        prop_assert!(dist(&normalize(&u).unwrap(), &u) < 1e-12);
        prop_assert!((norm(&u) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_consistency(seed: u64, dim in 1usize..=32, gram: bool) {
        let mut rng = Rng::new(seed);
        let s = space(dim, Field::Complex, gram, &mut rng);
        let (x, y) = (random_vector(&s, &mut rng), random_vector(&s, &mut rng));
        let z = inner(&x, &y).unwrap();
        let re = real_cs_identity(&x, &y).unwrap();
        let im = imag_cs_identity(&x, &y).unwrap();
        prop_assert!((Scalar::new(re.lhs, im.lhs) - z).norm() < 1e-12);
        prop_assert!(z.norm() <= norm(&x) * norm(&y) + 1e-12);
    }

    #[test]
    fn mazur_map_properties(seed: u64, n in 1usize..=16, ri in 0usize..4, si in 0usize..4, log_lambda in -1.0f64..1.0) {
        let mut rng = Rng::new(seed);
        let measure = random_measure(n, &mut rng);
        let f = random_lp(&measure, &mut rng);
        let (r, s) = (EXPONENTS[ri], EXPONENTS[si]);
        let lambda = 10f64.powf(log_lambda);
        let psi = mazur_map(&f, r, s).unwrap();
        prop_assert!((lp_norm(&psi, s).unwrap() - lp_norm(&f, r).unwrap()).abs() < 1e-12);
        let back = mazur_map(&psi, s, r).unwrap();
        for (a, b) in back.values().iter().zip(f.values()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        let scaled = mazur_map(&f.scale(lambda), r, s).unwrap();
        for (a, b) in scaled.values().iter().zip(psi.values()) {
            prop_assert!((a - lambda * b).abs() < 1e-12);
        }
    }

    #[test]
    fn nnls_satisfies_kkt(seed: u64, m in 1usize..=8, dim in 1usize..=8) {
        let mut rng = Rng::new(seed);
        let columns: Vec<Vec<f64>> = (0..m).map(|_| (0..dim).map(|_| rng.normal()).collect()).collect();
        let b: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
        let sol = nnls(&columns, &b);
        prop_assert!(sol.coeffs.iter().all(|&c| c >= 0.0));
        prop_assert!(kkt_residual(&columns, &sol.coeffs, &b) < 1e-9);
    }
}

proptest! {
    #![proptest_config(fast())]

    #[test]
    fn subspace_gamma_properties(seed: u64, dim in 2usize..=6, complex: bool, gram: bool) {
        let mut rng = Rng::new(seed);
        let s = space(dim, field(complex), gram, &mut rng);
        let kv = 1 + rng.below(dim.min(3));
        let kf = 1 + rng.below(dim.min(3));
        let v = random_subspace(&s, kv, &mut rng).unwrap();
        let f = random_subspace(&s, kf, &mut rng).unwrap();
        let g = gamma_subspaces(&v, &f).unwrap();

        prop_assert!((0.0..=1.0).contains(&g.gamma));
        let kappa = kappa_subspaces(&v, &f).unwrap();
        prop_assert!((0.0..=2f64.sqrt() + 1e-12).contains(&kappa));
        prop_assert!((gamma_subspaces(&f, &v).unwrap().gamma - g.gamma).abs() < 1e-12);

        let (cv, cw) = (g.certificate_v.as_ref().unwrap(), g.certificate_w.as_ref().unwrap());
        prop_assert!((inner(cv, cw).unwrap().norm() - g.gamma).abs() < 1e-10);

        // Strengthened Cauchy-Schwarz on random members.
        for _ in 0..20 {
            let x = v.combination(&(0..kv).map(|_| random_scalar(&mut rng)).collect::<Vec<_>>());
            let y = f.combination(&(0..kf).map(|_| random_scalar(&mut rng)).collect::<Vec<_>>());
            prop_assert!(inner(&x, &y).unwrap().norm() <= g.gamma * norm(&x) * norm(&y) + 1e-10);
        }

        // Any invertible recombination of the basis spans the same subspace.
        let mixed = mix_basis(&s, &v, complex, &mut rng);
        prop_assert!((gamma_subspaces(&mixed, &f).unwrap().gamma - g.gamma).abs() < 1e-10);
    }

    #[test]
    fn cone_scale_invariance(seed: u64, dim in 2usize..=4) {
        let mut rng = Rng::new(seed);
        let s = Space::real(dim).unwrap();
        let c1 = random_cone(&s, 1 + rng.below(3), &mut rng).unwrap();
        let c2 = random_cone(&s, 1 + rng.below(3), &mut rng).unwrap();
        let factors: Vec<f64> = c1.generators().iter().map(|_| 10f64.powf(rng.uniform_range(-1.0, 1.0))).collect();
        let opts = ConeOptions::default();
        let (u1, u2) = (UnionCone::from(c1.clone()), UnionCone::from(c2));
        let base = gamma_cones(&u1, &u2, &opts).unwrap();
        let scaled = gamma_cones(&UnionCone::from(c1.rescaled(&factors).unwrap()), &u2, &opts).unwrap();
        prop_assert!((base.gamma - scaled.gamma).abs() < 1e-10);
        // κ = √(2 - 2γ) is ill-conditioned near γ = 1, so compare κ².
        prop_assert!((base.kappa.powi(2) - scaled.kappa.powi(2)).abs() < 2e-10);
        prop_assert!((1.0 - base.kappa * base.kappa / 2.0 - base.gamma).abs() < 1e-12);
        let k = kappa_cones(&u1, &u2, &opts).unwrap();
        prop_assert!((1.0 - k.kappa * k.kappa / 2.0 - k.gamma).abs() < 1e-12);
    }

    #[test]
    fn cone_sandwich_and_conclusion(seed: u64, dim in 2usize..=3) {
        let mut rng = Rng::new(seed);
        let s = Space::real(dim).unwrap();
        let parts = |rng: &mut Rng| -> UnionCone {
            let count = 1 + rng.below(2);
            UnionCone::new((0..count).map(|_| random_cone(&s, 1 + rng.below(2), rng).unwrap()).collect()).unwrap()
        };
        let (c1, c2) = (parts(&mut rng), parts(&mut rng));
        let g = gamma_cones(&c1, &c2, &ConeOptions::default()).unwrap();
        let oracle = oracle_gamma(&c1, &c2, 100_000, seed).unwrap();
        prop_assert!(oracle <= g.gamma + 1e-9, "oracle {} above gamma {}", oracle, g.gamma);
        prop_assert!(g.gamma - oracle <= 5e-3, "gamma {} oracle {}", g.gamma, oracle);
        for _ in 0..20 {
            let x = cone_member(&c1.parts()[rng.below(c1.parts().len())], &mut rng);
            let y = cone_member(&c2.parts()[rng.below(c2.parts().len())], &mut rng);
            prop_assert!(inner(&x, &y).unwrap().norm() <= g.gamma * norm(&x) * norm(&y) + 1e-9);
        }
    }

    #[test]
    fn projection_is_idempotent_and_nonexpansive(seed: u64, dim in 1usize..=6, m in 1usize..=5) {
        let mut rng = Rng::new(seed);
        let s = Space::real(dim).unwrap();
        let c = random_cone(&s, m, &mut rng).unwrap();
        let (x, y) = (random_vector(&s, &mut rng), random_vector(&s, &mut rng));
        let (px, py) = (project_cone(&x, &c).unwrap(), project_cone(&y, &c).unwrap());
        prop_assert!(dist(&project_cone(&px, &c).unwrap(), &px) < 1e-10 * (1.0 + norm(&px)));
        prop_assert!(dist(&px, &py) <= dist(&x, &y) + 1e-10);
    }

    #[test]
    fn subspace_as_cone(seed: u64, dim in 3usize..=4) {
        let mut rng = Rng::new(seed);
        let s = Space::real(dim).unwrap();
        let v = random_subspace(&s, 2, &mut rng).unwrap();
        let f = random_subspace(&s, 2, &mut rng).unwrap();
        let as_cone = |sub: &Subspace| {
            let gens: Vec<Vector> = sub.basis().iter().flat_map(|q| [q.clone(), q.scale_real(-1.0)]).collect();
            UnionCone::from(ConvexCone::new(&s, gens).unwrap())
        };
        let exact = gamma_subspaces(&v, &f).unwrap().gamma;
        let cone = gamma_cones(&as_cone(&v), &as_cone(&f), &ConeOptions::default()).unwrap().gamma;
        prop_assert!((exact - cone).abs() <= 5e-3, "exact {} cone {}", exact, cone);
    }

    #[test]
    fn holder_gamma_sandwich(seed: u64, n in 2usize..=4, pi in 0usize..4, two: bool) {
        let mut rng = Rng::new(seed);
        let measure: Arc<MeasureSpace> = random_measure(n, &mut rng);
        let s = Space::real(n).unwrap();
        let m = if two { 2 } else { 1 };
        let cone = |rng: &mut Rng| {
            let rows: Vec<Vec<f64>> = (0..m).map(|_| random_lp(&measure, rng).values().to_vec()).collect();
            UnionCone::from(ConvexCone::from_rows(&s, &rows).unwrap())
        };
        let (c1, c2) = (cone(&mut rng), cone(&mut rng));
        let p = EXPONENTS[pi];
        let bound = gamma_holder_bound(&measure, &c1, &c2, p, &HolderOptions::default()).unwrap();
        let oracle = oracle_gamma_holder(&measure, &c1, &c2, p, 20_000, seed).unwrap();
        prop_assert!(oracle <= 1.0 + 1e-12);
        prop_assert!(oracle <= bound.gamma + 5e-3, "oracle {} bound {}", oracle, bound.gamma);
        if !two {
            prop_assert!(oracle <= bound.gamma + 1e-9);
        }
    }

    #[test]
    fn oracles_are_deterministic(seed: u64) {
        let mut rng = Rng::new(seed);
        let s = Space::real(3).unwrap();
        let c1 = UnionCone::from(random_cone(&s, 2, &mut rng).unwrap());
        let c2 = UnionCone::from(random_cone(&s, 2, &mut rng).unwrap());
        prop_assert_eq!(oracle_gamma(&c1, &c2, 500, seed).unwrap(), oracle_gamma(&c1, &c2, 500, seed).unwrap());
    }
}

fn mix_basis(s: &Arc<Space>, v: &Subspace, complex: bool, rng: &mut Rng) -> Subspace {
    let k = v.rank();
    loop {
        let gens: Vec<Vector> = (0..k)
            .map(|_| {
                let coeffs: Vec<Scalar> =
                    (0..k).map(|_| if complex { random_scalar(rng) } else { Scalar::new(rng.normal(), 0.0) }).collect();
                v.combination(&coeffs)
            })
            .collect();
        let mixed = orthonormalize(s, &gens).unwrap();
        if mixed.rank() == k {
            return mixed;
        }
    }
}

fn two_part_cones(seed: u64, dim: usize) -> (UnionCone, UnionCone) {
    let mut rng = Rng::new(seed);
    let s = Space::real(dim).unwrap();
    let mut parts = || {
        let count = 1 + rng.below(2);
        UnionCone::new((0..count).map(|_| random_cone(&s, 1 + rng.below(2), &mut rng).unwrap()).collect()).unwrap()
    };
    (parts(), parts())
}

/// The optimum sits in a different part pair from a strong local maximum.
#[test]
fn regression_oracle_searches_every_part_pair() {
    let (c1, c2) = two_part_cones(3044794952573056047, 3);
    let g = gamma_cones(&c1, &c2, &ConeOptions::default()).unwrap();
    let oracle = oracle_gamma(&c1, &c2, 100_000, 3044794952573056047).unwrap();
    assert!(oracle <= g.gamma + 1e-9 && g.gamma - oracle <= 5e-3, "gamma {} oracle {}", g.gamma, oracle);
}

/// Nearly touching cones, where alternating steps alone stop short of γ.
#[test]
fn regression_touching_cones_reach_one() {
    let (c1, c2) = two_part_cones(13562018216183919710, 3);
    let g = gamma_cones(&c1, &c2, &ConeOptions::default()).unwrap();
    let oracle = oracle_gamma(&c1, &c2, 100_000, 13562018216183919710).unwrap();
    assert!(oracle <= g.gamma + 1e-9, "gamma {} oracle {}", g.gamma, oracle);
}

/// Hölder equality is attainable, but only inside a narrow basin.
#[test]
fn regression_holder_narrow_basin() {
    let seed = 8630841164698227587;
    let mut rng = Rng::new(seed);
    let measure = random_measure(3, &mut rng);
    let s = Space::real(3).unwrap();
    let mut cone = || {
        let rows: Vec<Vec<f64>> = (0..2).map(|_| random_lp(&measure, &mut rng).values().to_vec()).collect();
        UnionCone::from(ConvexCone::from_rows(&s, &rows).unwrap())
    };
    let (c1, c2) = (cone(), cone());
    let bound = gamma_holder_bound(&measure, &c1, &c2, 1.5, &HolderOptions::default()).unwrap();
    let oracle = oracle_gamma_holder(&measure, &c1, &c2, 1.5, 20_000, seed).unwrap();
    assert!(oracle <= bound.gamma + 5e-3, "oracle {} bound {}", oracle, bound.gamma);
}
