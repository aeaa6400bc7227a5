//! Runtime self-test harness: compact versions of the invariant suites of
//! every module, runnable from the command line. Each check is seeded and
//! deterministic; stochastic checks use three-standard-error margins.

use crate::autoforms::poly::parse_mu;
use crate::autoforms::{
    classical_lift, lift_closed_form, petersson_inner_mc, poincare_truncated, slash_eval, c_rho,
    lift_pairing, matrix_coefficient_mc, CuspSeedFunction,
};
use crate::enumeration::{enumerate_ball, generators, symmetrize, IntSymplectic};
use crate::estimate::McConfig;
use crate::glrep::{build_rep, weyl_dimension, HighestWeight};
use crate::nonvanishing::{
    criterion_check, find_n0, integral_phi_with, kak_crosscheck, m_of_n, CriterionOutcome,
    NonvanishingProblem, DEFAULT_ESCALATION_CAP,
};
use crate::symplectic::sampling::{
    haar_unitary, integrate_disk, integrate_siegel, random_symplectic,
};
use crate::symplectic::{
    cayley, imag_transform, inverse_cayley, kak_factorize, moebius, nak_factorize, KAKFactors,
    SiegelPoint, SymplecticMatrix,
};
use crate::{derive_seed, CMatrix, CVector, RMatrix, C64};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::sync::Arc;

/// Outcome of one self-test check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

struct Ctx {
    seed: u64,
    workers: usize,
    samples: u64,
}

impl Ctx {
    fn rng(&self, tag: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(derive_seed(self.seed, &[0x5e1f, tag]))
    }

    fn mc(&self, tag: u64) -> McConfig {
        McConfig::new(self.samples, derive_seed(self.seed, &[0x5e1f, tag]))
            .with_workers(self.workers)
    }
}

fn random_gl(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let mut m = CMatrix::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] += C64::new(rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4));
        }
    }
    m
}

fn random_cvector(rng: &mut ChaCha8Rng, dim: usize) -> CVector {
    CVector::from_fn(dim, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

fn random_siegel(rng: &mut ChaCha8Rng, n: usize) -> SiegelPoint {
    let g = random_symplectic(rng, n);
    moebius(&g, &SiegelPoint::i_identity(n)).expect("orbit of the base point")
}

fn small_weights() -> Vec<HighestWeight> {
    let mut out = Vec::new();
    for omega in [
        vec![3i64],
        vec![4],
        vec![2, 0],
        vec![3, 1],
        vec![3, 3],
        vec![2, 1, 0],
        vec![4, 3, 3],
        vec![2, 2, 1],
    ] {
        out.push(HighestWeight::new(omega).unwrap());
    }
    out
}

macro_rules! check {
    ($results:ident, $suite:expr, $name:expr, $body:expr) => {{
        #[allow(clippy::redundant_closure_call)]
        let outcome: std::result::Result<String, String> = (|| $body)();
        let (passed, detail) = match outcome {
            Ok(detail) => (true, detail),
            Err(detail) => (false, detail),
        };
        $results.push(CheckResult {
            suite: $suite.to_string(),
            name: $name.to_string(),
            passed,
            detail,
        });
    }};
}

/// Runs every suite. `samples` tunes the stochastic checks; the defaults of
/// the command line (1e5 samples) finish in well under a minute.
pub fn run_all(seed: u64, samples: u64, workers: usize) -> Vec<CheckResult> {
    let ctx = Ctx {
        seed,
        workers: workers.max(1),
        samples: samples.max(1_000),
    };
    let mut results = Vec::new();
    representation_suite(&ctx, &mut results);
    geometry_suite(&ctx, &mut results);
    enumeration_suite(&ctx, &mut results);
    autoforms_suite(&ctx, &mut results);
    nonvanishing_suite(&ctx, &mut results);
    results
}

fn representation_suite(ctx: &Ctx, results: &mut Vec<CheckResult>) {
    let suite = "glrep";

    check!(results, suite, "dimension matches the Weyl formula", {
        for weight in small_weights() {
            let rep = build_rep(&weight).map_err(|e| e.to_string())?;
            if rep.dim() as u64 != weyl_dimension(&weight) {
                return Err(format!("mismatch for {:?}", weight.omega()));
            }
        }
        Ok(format!("{} weights", small_weights().len()))
    });

    check!(results, suite, "homomorphism over random pairs", {
        let mut rng = ctx.rng(1);
        let mut worst = 0.0f64;
        for weight in small_weights() {
            let rep = build_rep(&weight).map_err(|e| e.to_string())?;
            for _ in 0..100 {
                let g = random_gl(&mut rng, rep.n());
                let h = random_gl(&mut rng, rep.n());
                let lhs = rep.apply(&(&g * &h)).map_err(|e| e.to_string())?;
                let rhs = rep.apply(&g).unwrap() * rep.apply(&h).unwrap();
                worst = worst.max((lhs - &rhs).norm() / rhs.norm());
            }
        }
        if worst > 1e-9 {
            return Err(format!("relative defect {worst:.3e}"));
        }
        Ok(format!("max relative defect {worst:.3e}"))
    });

    check!(results, suite, "unitary restriction", {
        let mut rng = ctx.rng(2);
        let mut worst = 0.0f64;
        for weight in small_weights() {
            let rep = build_rep(&weight).map_err(|e| e.to_string())?;
            for _ in 0..100 {
                let u = haar_unitary(&mut rng, rep.n());
                let m = rep.apply(u.matrix()).unwrap();
                worst = worst
                    .max((m.adjoint() * &m - CMatrix::identity(rep.dim(), rep.dim())).norm());
            }
        }
        if worst > 1e-10 {
            return Err(format!("unitarity defect {worst:.3e}"));
        }
        Ok(format!("max defect {worst:.3e}"))
    });

    check!(results, suite, "adjoint identity", {
        let mut rng = ctx.rng(3);
        let mut worst = 0.0f64;
        for weight in small_weights() {
            let rep = build_rep(&weight).map_err(|e| e.to_string())?;
            for _ in 0..100 {
                let g = random_gl(&mut rng, rep.n());
                let a = random_cvector(&mut rng, rep.dim());
                let b = random_cvector(&mut rng, rep.dim());
                let lhs = crate::inner(&rep.apply_to_vector(&g, &a).unwrap(), &b);
                let rhs = crate::inner(&a, &rep.apply_to_vector(&g.adjoint(), &b).unwrap());
                worst = worst.max((lhs - rhs).norm());
            }
        }
        if worst > 1e-10 {
            return Err(format!("defect {worst:.3e}"));
        }
        Ok(format!("max defect {worst:.3e}"))
    });

    check!(results, suite, "square root of the evaluated operator", {
        let mut rng = ctx.rng(4);
        let mut worst = 0.0f64;
        for weight in small_weights() {
            let rep = build_rep(&weight).map_err(|e| e.to_string())?;
            for _ in 0..20 {
                let g = random_gl(&mut rng, rep.n());
                let mut y = g.adjoint() * &g;
                y += CMatrix::identity(rep.n(), rep.n()) * C64::new(0.1, 0.0);
                let y = (y.clone() + y.adjoint()) * C64::new(0.5, 0.0);
                let s = rep.apply_sqrt(&y).map_err(|e| e.to_string())?;
                let direct = rep.apply(&y).unwrap();
                worst = worst.max((&s * &s - &direct).norm() / direct.norm());
                let other = rep.apply(&crate::glrep::hermitian_sqrt(&y)).unwrap();
                worst = worst.max((&s - &other).norm() / other.norm());
            }
        }
        if worst > 1e-9 {
            return Err(format!("defect {worst:.3e}"));
        }
        Ok(format!("max relative defect {worst:.3e}"))
    });

    check!(results, suite, "weight multiset matches tableau contents", {
        for weight in small_weights() {
            if weight.tensor_degree() > 4 {
                continue;
            }
            let rep = build_rep(&weight).map_err(|e| e.to_string())?;
            let shape = crate::glrep::young::Shape::new(
                weight.omega().iter().map(|&w| w as usize).collect(),
            );
            let mut expected: Vec<Vec<i64>> = crate::glrep::young::ssyt_contents(&shape, weight.n())
                .into_iter()
                .map(|c| c.into_iter().map(|x| x as i64).collect())
                .collect();
            let mut got = rep.weight_labels().to_vec();
            expected.sort();
            got.sort();
            if got != expected {
                return Err(format!("weight multiset differs for {:?}", weight.omega()));
            }
        }
        Ok("tableau contents reproduced".into())
    });

    check!(results, suite, "sigma scales the highest-weight pairing", {
        let mut rng = ctx.rng(5);
        let rep = build_rep(&HighestWeight::new(vec![3, 1]).unwrap()).unwrap();
        let v_top = rep.highest_weight_vector();
        let thetas = [0.37, -0.83];
        let u = crate::glrep::UnitaryMatrix::from_phases(&thetas);
        let sigma = rep.eval_sigma(&u).unwrap();
        let x = random_cvector(&mut rng, rep.dim());
        let lhs = crate::inner(&x, &(&sigma * &v_top));
        let phase: f64 = rep
            .weight()
            .omega()
            .iter()
            .zip(thetas.iter())
            .map(|(&w, &t)| w as f64 * t)
            .sum();
        let rhs = C64::new(0.0, phase).exp() * crate::inner(&x, &v_top);
        if (lhs - rhs).norm() > 1e-10 {
            return Err(format!("defect {:.3e}", (lhs - rhs).norm()));
        }
        Ok("phase factor matches".into())
    });
}

fn geometry_suite(ctx: &Ctx, results: &mut Vec<CheckResult>) {
    let suite = "symplectic";

    check!(results, suite, "Moebius action law", {
        let mut rng = ctx.rng(10);
        let mut worst = 0.0f64;
        for n in 1..=2 {
            for _ in 0..50 {
                let g = random_symplectic(&mut rng, n);
                let h = random_symplectic(&mut rng, n);
                let z = random_siegel(&mut rng, n);
                let lhs = moebius(&g, &moebius(&h, &z).unwrap()).unwrap();
                let rhs = moebius(&g.mul(&h), &z).unwrap();
                worst = worst.max((lhs.matrix() - rhs.matrix()).norm());
            }
        }
        if worst > 1e-9 {
            return Err(format!("defect {worst:.3e}"));
        }
        Ok(format!("max defect {worst:.3e}"))
    });

    check!(results, suite, "transformed imaginary part", {
        let mut rng = ctx.rng(11);
        let mut worst = 0.0f64;
        for n in 1..=2 {
            for _ in 0..50 {
                let g = random_symplectic(&mut rng, n);
                let z = random_siegel(&mut rng, n);
                let im = imag_transform(&g, &z).unwrap();
                let moved = moebius(&g, &z).unwrap();
                worst = worst.max((im.map(|v| v.re) - moved.y()).norm());
            }
        }
        if worst > 1e-10 {
            return Err(format!("defect {worst:.3e}"));
        }
        Ok(format!("max defect {worst:.3e}"))
    });

    check!(results, suite, "products and inverses stay symplectic", {
        let mut rng = ctx.rng(9);
        for n in 1..=3 {
            for _ in 0..20 {
                let g = random_symplectic(&mut rng, n);
                let h = random_symplectic(&mut rng, n);
                SymplecticMatrix::new(g.mul(&h).matrix().clone()).map_err(|e| e.to_string())?;
                SymplecticMatrix::new(g.inverse().matrix().clone()).map_err(|e| e.to_string())?;
            }
        }
        Ok("J-invariant preserved under products and inverses".into())
    });

    check!(results, suite, "NAK and KAK roundtrips", {
        let mut rng = ctx.rng(12);
        let mut worst = 0.0f64;
        for n in 1..=3 {
            for _ in 0..30 {
                let g = random_symplectic(&mut rng, n);
                let nak = nak_factorize(&g).map_err(|e| e.to_string())?;
                let back = nak.reconstruct().unwrap();
                worst = worst.max((back.matrix() - g.matrix()).norm() / g.matrix().norm());
                let kak = kak_factorize(&g).map_err(|e| e.to_string())?;
                let back = kak.reconstruct();
                worst = worst.max((back.matrix() - g.matrix()).norm() / g.matrix().norm());
            }
        }
        if worst > 1e-9 {
            return Err(format!("roundtrip defect {worst:.3e}"));
        }
        Ok(format!("max relative defect {worst:.3e}"))
    });

    check!(results, suite, "KAK exponents against singular values", {
        let mut rng = ctx.rng(13);
        let mut worst = 0.0f64;
        for n in 1..=2 {
            for _ in 0..30 {
                let g = random_symplectic(&mut rng, n);
                let kak = kak_factorize(&g).unwrap();
                let mut expected: Vec<f64> = kak
                    .t
                    .iter()
                    .flat_map(|&t| [t.exp(), (-t).exp()])
                    .collect();
                expected.sort_by(|a, b| b.total_cmp(a));
                let svd = nalgebra::linalg::SVD::new(g.matrix().clone(), false, false);
                let mut got: Vec<f64> = svd.singular_values.iter().copied().collect();
                got.sort_by(|a, b| b.total_cmp(a));
                for (e, s) in expected.iter().zip(got.iter()) {
                    worst = worst.max((e - s).abs() / s.max(1.0));
                }
            }
        }
        if worst > 1e-8 {
            return Err(format!("pairing defect {worst:.3e}"));
        }
        Ok(format!("max relative defect {worst:.3e}"))
    });

    check!(results, suite, "Cayley roundtrip", {
        let mut rng = ctx.rng(14);
        let mut worst = 0.0f64;
        for n in 1..=2 {
            for _ in 0..50 {
                let z = random_siegel(&mut rng, n);
                let w = cayley(&z).unwrap();
                let back = inverse_cayley(&w).unwrap();
                worst = worst.max((back.matrix() - z.matrix()).norm() / z.matrix().norm().max(1.0));
            }
        }
        if worst > 1e-10 {
            return Err(format!("defect {worst:.3e}"));
        }
        Ok(format!("max relative defect {worst:.3e}"))
    });

    check!(results, suite, "stabilizer of the base point", {
        let mut rng = ctx.rng(15);
        let mut worst = 0.0f64;
        for n in 1..=2 {
            let u = haar_unitary(&mut rng, n);
            let k = SymplecticMatrix::from_unitary(&u);
            let base = SiegelPoint::i_identity(n);
            worst = worst.max((moebius(&k, &base).unwrap().matrix() - base.matrix()).norm());
        }
        if worst > 1e-10 {
            return Err(format!("defect {worst:.3e}"));
        }
        Ok(format!("max defect {worst:.3e}"))
    });

    check!(results, suite, "measure pushforward between the two models", {
        let f = |z: &SiegelPoint| {
            let n = z.n();
            let dx = z.x().norm_squared();
            let dy = (z.y() - RMatrix::identity(n, n)).norm_squared();
            (-2.0 * (dx + dy)).exp()
        };
        for n in 1..=2 {
            let cfg = ctx.mc(16 + n as u64);
            let siegel_side = integrate_siegel(n, &cfg, 1, f);
            let disk_side = integrate_disk(n, &cfg, 2, |w| match inverse_cayley(w) {
                Ok(z) => f(&z),
                Err(_) => 0.0,
            });
            let diff = (siegel_side.value - disk_side.value).abs();
            let sigma = (siegel_side.stderr.powi(2) + disk_side.stderr.powi(2)).sqrt();
            if diff > 3.0 * sigma {
                return Err(format!(
                    "n = {n}: {} vs {} (3 sigma = {:.3e})",
                    siegel_side.value,
                    disk_side.value,
                    3.0 * sigma
                ));
            }
        }
        Ok("both models agree within three standard errors".into())
    });
}

fn enumeration_suite(ctx: &Ctx, results: &mut Vec<CheckResult>) {
    let suite = "enumeration";
    let _ = ctx;

    check!(results, suite, "exact integer symplectic balls", {
        for n in 1..=2 {
            let ball = enumerate_ball(n, &generators(n), 2, 1).map_err(|e| e.to_string())?;
            for g in ball.elements() {
                IntSymplectic::new(g.matrix().clone()).map_err(|e| e.to_string())?;
            }
        }
        Ok("all elements revalidated exactly".into())
    });

    check!(results, suite, "ball monotonicity and dedup", {
        let small = enumerate_ball(1, &generators(1), 3, 1).map_err(|e| e.to_string())?;
        let large = enumerate_ball(1, &generators(1), 4, 1).map_err(|e| e.to_string())?;
        for g in small.elements() {
            if !large.contains(g) {
                return Err("smaller ball not contained in the larger".into());
            }
        }
        let mut keys: Vec<_> = large.elements().iter().map(|g| g.key()).collect();
        keys.sort();
        keys.dedup();
        if keys.len() != large.len() {
            return Err("duplicate keys after dedup".into());
        }
        Ok(format!("{} in {}", small.len(), large.len()))
    });

    check!(results, suite, "congruence filter and closure", {
        let ball = enumerate_ball(1, &generators(1), 6, 2).map_err(|e| e.to_string())?;
        if ball.len() < 2 {
            return Err("level-2 ball unexpectedly trivial".into());
        }
        for g in ball.elements() {
            if !g.is_congruent_to_identity(2) {
                return Err("element escapes the congruence".into());
            }
        }
        let closed = symmetrize(&ball, &IntSymplectic::j(1)).map_err(|e| e.to_string())?;
        for g in closed.elements() {
            if !closed.contains(&g.mul(&IntSymplectic::j(1))) {
                return Err("closure not right-invariant".into());
            }
        }
        Ok(format!("{} -> {} elements", ball.len(), closed.len()))
    });
}

fn autoforms_suite(ctx: &Ctx, results: &mut Vec<CheckResult>) {
    let suite = "autoforms";

    check!(results, suite, "lift equivariance and norm identity", {
        let mut rng = ctx.rng(20);
        let rep = Arc::new(build_rep(&HighestWeight::new(vec![4, 3]).unwrap()).unwrap());
        let v = random_cvector(&mut rng, rep.dim());
        let seed = CuspSeedFunction::with_unit_mu(rep.clone(), v).unwrap();
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let g = random_symplectic(&mut rng, 2);
            let u = haar_unitary(&mut rng, 2);
            let k = SymplecticMatrix::from_unitary(&u);
            let lhs = classical_lift(&seed, &g.mul(&k)).map_err(|e| e.to_string())?;
            let sigma = rep.eval_sigma(&u).unwrap();
            let rhs = sigma
                .lu()
                .solve(&classical_lift(&seed, &g).unwrap())
                .unwrap();
            worst = worst.max((lhs - &rhs).norm() / rhs.norm().max(1e-9));

            let nak = nak_factorize(&g).unwrap();
            let z = SiegelPoint::from_parts(&nak.x, &nak.y).unwrap();
            let sy = rep.apply_sqrt(&nak.y.map(|x| C64::new(x, 0.0))).unwrap();
            let lift_norm = classical_lift(&seed, &g).unwrap().norm();
            let local_norm = (&sy * seed.eval(&z).unwrap()).norm();
            worst = worst.max((lift_norm - local_norm).abs() / local_norm.max(1e-9));
        }
        if worst > 1e-9 {
            return Err(format!("defect {worst:.3e}"));
        }
        Ok(format!("max relative defect {worst:.3e}"))
    });

    check!(results, suite, "closed-form lift", {
        let mut rng = ctx.rng(21);
        let rep = Arc::new(build_rep(&HighestWeight::new(vec![4, 3]).unwrap()).unwrap());
        let mu = parse_mu("1 + 0.3*X12", 2).unwrap();
        let v = random_cvector(&mut rng, rep.dim());
        let seed = CuspSeedFunction::new(rep, mu, v).unwrap();
        let mut worst = 0.0f64;
        for _ in 0..30 {
            let u = haar_unitary(&mut rng, 2);
            let u_prime = haar_unitary(&mut rng, 2);
            let mut t: Vec<f64> = (0..2).map(|_| rng.gen_range(0.0..1.2)).collect();
            t.sort_by(|a, b| b.total_cmp(a));
            let kak = KAKFactors { u, t, u_prime };
            let g = kak.reconstruct();
            let direct = classical_lift(&seed, &g).unwrap();
            let closed = lift_closed_form(&seed, &kak).unwrap();
            worst = worst.max((direct - &closed).norm() / closed.norm().max(1e-9));
        }
        if worst > 1e-9 {
            return Err(format!("defect {worst:.3e}"));
        }
        Ok(format!("max relative defect {worst:.3e}"))
    });

    check!(results, suite, "series invariance and lift of the series", {
        let mut rng = ctx.rng(22);
        let rep = Arc::new(build_rep(&HighestWeight::new(vec![3]).unwrap()).unwrap());
        let v = random_cvector(&mut rng, 1);
        let seed = CuspSeedFunction::with_unit_mu(rep.clone(), v).unwrap();
        let ball = enumerate_ball(1, &generators(1), 2, 1).unwrap();
        let j = IntSymplectic::j(1);
        let closed = symmetrize(&ball, &j).unwrap();
        let z = random_siegel(&mut rng, 1);
        let (sum, stats) = poincare_truncated(&seed, &closed, &z).map_err(|e| e.to_string())?;
        let slashed = slash_eval(
            &rep,
            |w| Ok(poincare_truncated(&seed, &closed, w)?.0),
            &j.to_real(),
            &z,
        )
        .unwrap();
        let invariance = (slashed - &sum).norm() / stats.sum_norm.max(1e-9);
        if invariance > 1e-9 {
            return Err(format!("invariance defect {invariance:.3e}"));
        }

        let g = random_symplectic(&mut rng, 1);
        let base = SiegelPoint::i_identity(1);
        let lhs = slash_eval(
            &rep,
            |w| Ok(poincare_truncated(&seed, &ball, w)?.0),
            &g,
            &base,
        )
        .unwrap();
        let mut rhs = CVector::zeros(1);
        for gamma in ball.elements() {
            rhs += classical_lift(&seed, &gamma.to_real().mul(&g)).unwrap();
        }
        let commutation = (lhs - &rhs).norm() / rhs.norm().max(1e-9);
        if commutation > 1e-9 {
            return Err(format!("lift commutation defect {commutation:.3e}"));
        }
        Ok(format!(
            "invariance {invariance:.3e}, commutation {commutation:.3e}"
        ))
    });

    check!(results, suite, "term decay over word-length shells", {
        // reported, not asserted: the per-shell maxima of the term norms
        let mut rng = ctx.rng(23);
        let rep = Arc::new(build_rep(&HighestWeight::new(vec![3]).unwrap()).unwrap());
        let v = random_cvector(&mut rng, 1);
        let seed = CuspSeedFunction::with_unit_mu(rep, v).unwrap();
        let ball = enumerate_ball(1, &generators(1), 4, 1).unwrap();
        let z = random_siegel(&mut rng, 1);
        let (_, stats) = poincare_truncated(&seed, &ball, &z).unwrap();
        let shells: Vec<String> = stats
            .shells
            .iter()
            .map(|s| format!("L{}: max {:.3e}", s.word_length, s.max_norm))
            .collect();
        Ok(shells.join(", "))
    });

    check!(results, suite, "reproducing-kernel constant (reported)", {
        // numerical experiment, not a certified value: the kernel constant
        // as evaluation-vs-Petersson ratio of the truncated kernel series
        let rep = Arc::new(build_rep(&HighestWeight::new(vec![12]).unwrap()).unwrap());
        let shallow = enumerate_ball(1, &generators(1), 3, 1).unwrap();
        let deep = enumerate_ball(1, &generators(1), 5, 1).unwrap();
        let cfg = McConfig::new(ctx.samples.min(3_000), derive_seed(ctx.seed, &[26]))
            .with_workers(ctx.workers);
        let probes =
            crate::autoforms::kernel_ratio_experiment(&rep, &[&shallow, &deep], &cfg)
                .map_err(|e| e.to_string())?;
        let lines: Vec<String> = probes
            .iter()
            .map(|p| {
                format!(
                    "{} ({} terms): {:.5}{:+.1e}i",
                    p.label, p.terms, p.ratio[0], p.ratio[1]
                )
            })
            .collect();
        Ok(lines.join("; "))
    });

    check!(results, suite, "Petersson sesquilinearity (n = 1)", {
        let mut rng = ctx.rng(24);
        let rep = Arc::new(build_rep(&HighestWeight::new(vec![3]).unwrap()).unwrap());
        let v = random_cvector(&mut rng, 1);
        let seed = CuspSeedFunction::with_unit_mu(rep.clone(), v).unwrap();
        let cfg = McConfig::new(ctx.samples.min(50_000), derive_seed(ctx.seed, &[24]))
            .with_workers(ctx.workers);
        let norm = petersson_inner_mc(&rep, |z| seed.eval(z), |z| seed.eval(z), true, &cfg)
            .map_err(|e| e.to_string())?;
        if norm.re <= 0.0 {
            return Err("norm is not positive".into());
        }
        let a = C64::new(0.6, -0.9);
        let scaled =
            petersson_inner_mc(&rep, |z| Ok(seed.eval(z)? * a), |z| seed.eval(z), true, &cfg)
                .unwrap();
        let defect = (scaled.value() - a * norm.value()).norm() / norm.value().norm();
        if defect > 1e-9 {
            return Err(format!("sesquilinearity defect {defect:.3e}"));
        }
        Ok(format!("norm {:.5} +- {:.1e}", norm.re, norm.re_stderr))
    });

    check!(results, suite, "matrix coefficient identity (n = 1)", {
        let mut rng = ctx.rng(25);
        for m in [3i64, 4] {
            let rep = Arc::new(build_rep(&HighestWeight::new(vec![m]).unwrap()).unwrap());
            let v = CVector::from_element(1, C64::new(1.0, 0.0));
            let seed = CuspSeedFunction::with_unit_mu(rep.clone(), v.clone()).unwrap();
            let cfg = McConfig::new(ctx.samples, derive_seed(ctx.seed, &[25, m as u64]))
                .with_workers(ctx.workers);
            let c = c_rho(&rep, &cfg).map_err(|e| e.to_string())?;
            let g = random_symplectic(&mut rng, 1);
            let est = matrix_coefficient_mc(&seed, &v, &g, &cfg).unwrap();
            let reference = lift_pairing(&seed, &v, &g).unwrap() * c.value;
            let extra = c.stderr * lift_pairing(&seed, &v, &g).unwrap().norm();
            if !est.agrees_with(reference, extra, 3.0) {
                return Err(format!(
                    "m = {m}: ({} + {}i) vs {reference}",
                    est.re, est.im
                ));
            }
        }
        Ok("holds at three combined standard errors".into())
    });
}

fn nonvanishing_suite(ctx: &Ctx, results: &mut Vec<CheckResult>) {
    let suite = "nonvanishing";

    check!(results, suite, "criterion margins", {
        let mk = |value: f64, stderr: f64| crate::estimate::IntegralEstimate {
            value,
            stderr,
            samples: 1,
            seed: 0,
        };
        if criterion_check(&mk(0.9, 0.001), &mk(1.0, 0.001)) != CriterionOutcome::Holds {
            return Err("clear margin not recognized".into());
        }
        if criterion_check(&mk(0.5, 0.0), &mk(1.0, 0.0)) == CriterionOutcome::Holds {
            return Err("strict inequality violated".into());
        }
        if criterion_check(&mk(0.52, 0.05), &mk(1.0, 0.001)) != CriterionOutcome::Undecided {
            return Err("overlap not undecided".into());
        }
        Ok("margin arithmetic correct".into())
    });

    check!(results, suite, "scalar threshold N0 = 14 and 6", {
        let rep = Arc::new(build_rep(&HighestWeight::new(vec![3]).unwrap()).unwrap());
        let problem = NonvanishingProblem::new(
            rep,
            parse_mu("1", 1).unwrap(),
            CVector::from_element(1, C64::new(1.0, 0.0)),
            McConfig::new(ctx.samples.max(200_000), derive_seed(ctx.seed, &[30]))
                .with_workers(ctx.workers),
            DEFAULT_ESCALATION_CAP,
        )
        .unwrap();
        let result = find_n0(&problem, 50).map_err(|e| e.to_string())?;
        if result.n0 != Some(14) {
            return Err(format!("weight (3): got {:?}, want 14", result.n0));
        }
        let rep = Arc::new(build_rep(&HighestWeight::new(vec![4]).unwrap()).unwrap());
        let problem = NonvanishingProblem::new(
            rep,
            parse_mu("1", 1).unwrap(),
            CVector::from_element(1, C64::new(1.0, 0.0)),
            McConfig::new(ctx.samples, derive_seed(ctx.seed, &[31])).with_workers(ctx.workers),
            DEFAULT_ESCALATION_CAP,
        )
        .unwrap();
        let result = find_n0(&problem, 50).map_err(|e| e.to_string())?;
        if result.n0 != Some(6) {
            return Err(format!("weight (4): got {:?}, want 6", result.n0));
        }
        Ok("both scalar thresholds reproduced".into())
    });

    check!(results, suite, "scalar incomplete-Beta oracle", {
        // rho = z^m, mu = X11^l reduces the integrand to x^{l/2}(1-x)^{m/2-2}
        let cases = [
            (3i64, "X11", 1.0, std::f64::consts::FRAC_PI_2),
            (5, "1", 0.5, 2.0 / 3.0 * (1.0 - 0.5f64.powf(1.5))),
        ];
        for (idx, (m, mu, t, expected)) in cases.iter().enumerate() {
            let rep = Arc::new(build_rep(&HighestWeight::new(vec![*m]).unwrap()).unwrap());
            let problem = NonvanishingProblem::new(
                rep,
                parse_mu(mu, 1).unwrap(),
                CVector::from_element(1, C64::new(1.0, 0.0)),
                McConfig::new(ctx.samples, derive_seed(ctx.seed, &[34, idx as u64]))
                    .with_workers(ctx.workers),
                DEFAULT_ESCALATION_CAP,
            )
            .unwrap();
            let est = integral_phi_with(&problem, *t, problem.mc().samples, 40 + idx as u64);
            if (est.value - expected).abs() > 3.0 * est.stderr.max(1e-12) {
                return Err(format!(
                    "m = {m}, mu = {mu}, t = {t}: {} +- {} vs {expected}",
                    est.value, est.stderr
                ));
            }
        }
        Ok("closed forms matched within three standard errors".into())
    });

    check!(results, suite, "truncated integral monotone in the bound", {
        let rep = Arc::new(build_rep(&HighestWeight::new(vec![3]).unwrap()).unwrap());
        let problem = NonvanishingProblem::new(
            rep,
            parse_mu("1", 1).unwrap(),
            CVector::from_element(1, C64::new(1.0, 0.0)),
            McConfig::new(ctx.samples.min(100_000), derive_seed(ctx.seed, &[32]))
                .with_workers(ctx.workers),
            DEFAULT_ESCALATION_CAP,
        )
        .unwrap();
        let mut prev = 0.0;
        for (idx, t) in [0.25f64, 0.5, 0.75, 1.0].iter().enumerate() {
            let est = integral_phi_with(&problem, *t, problem.mc().samples, idx as u64);
            if est.value + 3.0 * est.stderr + 1e-9 <= prev {
                return Err(format!("integral decreased at t = {t}"));
            }
            prev = est.value - 3.0 * est.stderr;
        }
        Ok("nested-domain monotonicity holds".into())
    });

    check!(results, suite, "KAK cross-check ratio constancy", {
        let rep = Arc::new(build_rep(&HighestWeight::new(vec![4]).unwrap()).unwrap());
        let problem = NonvanishingProblem::new(
            rep,
            parse_mu("1", 1).unwrap(),
            CVector::from_element(1, C64::new(1.0, 0.0)),
            McConfig::new(ctx.samples, derive_seed(ctx.seed, &[33])).with_workers(ctx.workers),
            DEFAULT_ESCALATION_CAP,
        )
        .unwrap();
        let report = kak_crosscheck(&problem, &[0.3, 0.6, 1.0]).map_err(|e| e.to_string())?;
        if !report.consistent {
            let ratios: Vec<String> = report
                .rows
                .iter()
                .map(|r| format!("{:.4} +- {:.4}", r.ratio, r.ratio_err))
                .collect();
            return Err(format!("ratios drift: {}", ratios.join(", ")));
        }
        Ok(format!(
            "ratios: {}",
            report
                .rows
                .iter()
                .map(|r| format!("{:.4}", r.ratio))
                .collect::<Vec<_>>()
                .join(", ")
        ))
    });

    check!(results, suite, "M(N) monotone with the right endpoints", {
        if (m_of_n(2, 1) - (3.0 - 2.0 * 2f64.sqrt())).abs() > 1e-14 {
            return Err("closed form at N = 2 wrong".into());
        }
        let mut prev = 0.0;
        for level in 1..=10_000u64 {
            let cur = m_of_n(level, 2);
            if cur <= prev {
                return Err(format!("not increasing at N = {level}"));
            }
            prev = cur;
        }
        Ok("sweep of 10^4 levels increasing".into())
    });
}
