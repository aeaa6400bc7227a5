use super::sampling::*;
use super::*;
use crate::estimate::McConfig;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_siegel(rng: &mut ChaCha8Rng, n: usize) -> SiegelPoint {
    let g = random_symplectic(rng, n);
    moebius(&g, &SiegelPoint::i_identity(n)).unwrap()
}

#[test]
fn j_is_symplectic_and_squares_to_minus_identity() {
    for n in 1..=3 {
        let j = SymplecticMatrix::j(n);
        SymplecticMatrix::new(j.matrix().clone()).unwrap();
        let sq = j.mul(&j);
        assert_eq!(*sq.matrix(), -RMatrix::identity(2 * n, 2 * n));
    }
}

#[test]
fn constructor_rejects_non_symplectic() {
    let mut m = RMatrix::identity(4, 4);
    m[(0, 0)] = 2.0;
    assert!(matches!(
        SymplecticMatrix::new(m),
        Err(Error::NotSymplectic { .. })
    ));
}

#[test]
fn moebius_identity_and_translation() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 1..=2 {
        let z = random_siegel(&mut rng, n);
        let id = SymplecticMatrix::identity(n);
        let moved = moebius(&id, &z).unwrap();
        assert!((moved.matrix() - z.matrix()).norm() < 1e-12);

        let mut x = RMatrix::zeros(n, n);
        for r in 0..n {
            for s in r..n {
                let v = rng.gen_range(-1.0..1.0);
                x[(r, s)] = v;
                x[(s, r)] = v;
            }
        }
        let nx = SymplecticMatrix::translation(&x).unwrap();
        let moved = moebius(&nx, &z).unwrap();
        let expected = z.matrix() + x.map(|v| C64::new(v, 0.0));
        assert!((moved.matrix() - expected).norm() < 1e-12);
    }
}

#[test]
fn moebius_j_fixes_base_point() {
    for n in 1..=3 {
        let j = SymplecticMatrix::j(n);
        let base = SiegelPoint::i_identity(n);
        let moved = moebius(&j, &base).unwrap();
        assert!((moved.matrix() - base.matrix()).norm() < 1e-12);
    }
}

#[test]
fn moebius_action_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in 1..=2 {
        for _ in 0..50 {
            let g = random_symplectic(&mut rng, n);
            let h = random_symplectic(&mut rng, n);
            let z = random_siegel(&mut rng, n);
            let lhs = moebius(&g, &moebius(&h, &z).unwrap()).unwrap();
            let rhs = moebius(&g.mul(&h), &z).unwrap();
            assert!((lhs.matrix() - rhs.matrix()).norm() < 1e-9);
        }
    }
}

#[test]
fn products_and_inverses_stay_symplectic() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 1..=3 {
        for _ in 0..20 {
            let g = random_symplectic(&mut rng, n);
            let h = random_symplectic(&mut rng, n);
            SymplecticMatrix::new(g.mul(&h).matrix().clone()).unwrap();
            SymplecticMatrix::new(g.inverse().matrix().clone()).unwrap();
            let prod = g.mul(&g.inverse());
            assert!((prod.matrix() - RMatrix::identity(2 * n, 2 * n)).norm() < 1e-10);
        }
    }
}

#[test]
fn stabilizer_of_base_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in 1..=2 {
        let u = haar_unitary(&mut rng, n);
        let k = SymplecticMatrix::from_unitary(&u);
        let base = SiegelPoint::i_identity(n);
        let moved = moebius(&k, &base).unwrap();
        assert!((moved.matrix() - base.matrix()).norm() < 1e-10);
    }
}

#[test]
fn imag_transform_matches_moebius() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 1..=2 {
        let z = random_siegel(&mut rng, n);
        let id = SymplecticMatrix::identity(n);
        let im = imag_transform(&id, &z).unwrap();
        assert!((im.map(|v| v.re) - z.y()).norm() < 1e-12);

        for _ in 0..30 {
            let g = random_symplectic(&mut rng, n);
            let im = imag_transform(&g, &z).unwrap();
            let moved = moebius(&g, &z).unwrap();
            assert!((im.map(|v| v.re) - moved.y()).norm() < 1e-10);
            assert!(im.map(|v| v.im).norm() < 1e-10);
        }
    }
}

#[test]
fn imag_transform_dilation_block_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n = 2;
    let z = random_siegel(&mut rng, n);
    let mut base = RMatrix::zeros(n, n);
    for r in 0..n {
        for s in 0..n {
            base[(r, s)] = rng.gen_range(-0.5..0.5);
        }
    }
    let y0 = &base * base.transpose() + RMatrix::identity(n, n);
    let ay = SymplecticMatrix::dilation(&y0).unwrap();
    let im = imag_transform(&ay, &z).unwrap();
    let sqrt_y0 = ay.block_a();
    let expected = &sqrt_y0 * z.y() * &sqrt_y0;
    assert!((im.map(|v| v.re) - expected).norm() < 1e-10);
}

#[test]
fn nak_factorization_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    // already factored input
    let n = 2;
    let mut x = RMatrix::zeros(n, n);
    x[(0, 0)] = 0.3;
    x[(0, 1)] = -0.7;
    x[(1, 0)] = -0.7;
    x[(1, 1)] = 1.1;
    let mut base = RMatrix::zeros(n, n);
    for r in 0..n {
        for s in 0..n {
            base[(r, s)] = rng.gen_range(-0.5..0.5);
        }
    }
    let y = &base * base.transpose() + RMatrix::identity(n, n);
    let g = SymplecticMatrix::translation(&x)
        .unwrap()
        .mul(&SymplecticMatrix::dilation(&y).unwrap());
    let factors = nak_factorize(&g).unwrap();
    assert!((&factors.x - &x).norm() < 1e-10);
    assert!((&factors.y - &y).norm() < 1e-10);
    assert!(
        (factors.k.matrix() - CMatrix::identity(n, n)).norm() < 1e-9,
        "k should be the identity for g = n_x a_y"
    );

    // pure rotation input
    let u = haar_unitary(&mut rng, n);
    let factors = nak_factorize(&SymplecticMatrix::from_unitary(&u)).unwrap();
    assert!(factors.x.norm() < 1e-10);
    assert!((&factors.y - RMatrix::identity(n, n)).norm() < 1e-10);
    assert!((factors.k.matrix() - u.matrix()).norm() < 1e-9);

    // random roundtrip
    for n in 1..=3 {
        for _ in 0..20 {
            let g = random_symplectic(&mut rng, n);
            let factors = nak_factorize(&g).unwrap();
            let back = factors.reconstruct().unwrap();
            assert!((back.matrix() - g.matrix()).norm() < 1e-10 * g.matrix().norm().max(1.0));
        }
    }
}

#[test]
fn cayley_center_and_roundtrip() {
    for n in 1..=2 {
        let base = SiegelPoint::i_identity(n);
        let w = cayley(&base).unwrap();
        assert!(w.matrix().norm() < 1e-12);
        let z = inverse_cayley(&DiskPoint::center(n)).unwrap();
        assert!((z.matrix() - base.matrix()).norm() < 1e-12);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in 1..=2 {
        for _ in 0..50 {
            let z = random_siegel(&mut rng, n);
            let w = cayley(&z).unwrap();
            let back = inverse_cayley(&w).unwrap();
            assert!((back.matrix() - z.matrix()).norm() < 1e-10 * z.matrix().norm().max(1.0));
        }
    }
}

#[test]
fn cayley_block_matrices_are_mutually_inverse() {
    for n in 1..=2 {
        let l = cayley_block_matrix(n);
        let li = cayley_block_inverse(n);
        let prod = &l * &li;
        assert!((prod - CMatrix::identity(2 * n, 2 * n)).norm() < 1e-14);
        // the block matrix realizes the pointwise transform
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let z = random_siegel(&mut rng, n);
        let via_blocks = moebius_complex(&l, z.matrix()).unwrap();
        let direct = cayley(&z).unwrap();
        assert!((via_blocks - direct.matrix()).norm() < 1e-12);
    }
}

#[test]
fn kak_already_factored() {
    let t = [1.2, 0.4];
    let g = SymplecticMatrix::hyperbolic(&t);
    let factors = kak_factorize(&g).unwrap();
    assert!((factors.u.matrix() - CMatrix::identity(2, 2)).norm() < 1e-9);
    assert!((factors.u_prime.matrix() - CMatrix::identity(2, 2)).norm() < 1e-9);
    assert!((factors.t[0] - 1.2).abs() < 1e-10);
    assert!((factors.t[1] - 0.4).abs() < 1e-10);
}

#[test]
fn kak_of_rotation_uses_zero_convention() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let u = haar_unitary(&mut rng, 2);
    let factors = kak_factorize(&SymplecticMatrix::from_unitary(&u)).unwrap();
    assert!(factors.t.iter().all(|&t| t == 0.0));
    assert!((factors.u.matrix() - u.matrix()).norm() < 1e-9);
    assert!((factors.u_prime.matrix() - CMatrix::identity(2, 2)).norm() < 1e-12);
}

#[test]
fn kak_handles_near_rotation_inputs() {
    // exponents around the pairing tolerance must not brick the routine
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let u = haar_unitary(&mut rng, 2);
    for eps in [3e-10, 5e-9, 2e-8] {
        let g = SymplecticMatrix::from_unitary(&u)
            .mul(&SymplecticMatrix::hyperbolic(&[eps, eps / 2.0]));
        let factors = kak_factorize(&g).unwrap();
        let back = factors.reconstruct();
        let rel = (back.matrix() - g.matrix()).norm() / g.matrix().norm();
        // reconstruction error is capped by the discarded exponent
        assert!(rel < 10.0 * eps.max(1e-10), "eps = {eps}: defect {rel}");
    }
}

#[test]
fn kak_roundtrip_and_singular_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=3 {
        for _ in 0..40 {
            let g = random_symplectic(&mut rng, n);
            let factors = kak_factorize(&g).unwrap();
            // ordering convention
            for w in factors.t.windows(2) {
                assert!(w[0] >= w[1] - 1e-12);
            }
            assert!(*factors.t.last().unwrap() >= -1e-12);
            // roundtrip
            let back = factors.reconstruct();
            let rel = (back.matrix() - g.matrix()).norm() / g.matrix().norm();
            assert!(rel < 1e-9, "KAK roundtrip defect {rel}");
            // singular values of g are exactly {e^{+-t_r}} (SVD oracle)
            let mut expected: Vec<f64> = factors
                .t
                .iter()
                .flat_map(|&t| [t.exp(), (-t).exp()])
                .collect();
            expected.sort_by(|a, b| b.total_cmp(a));
            let svd = nalgebra::linalg::SVD::new(g.matrix().clone(), false, false);
            let mut got: Vec<f64> = svd.singular_values.iter().copied().collect();
            got.sort_by(|a, b| b.total_cmp(a));
            for (e, s) in expected.iter().zip(got.iter()) {
                assert!((e - s).abs() < 1e-8 * s.max(1.0), "pairing {e} vs {s}");
            }
        }
    }
}

#[test]
fn kak_roundtrip_on_explicit_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let n = 1 + (rng.gen::<u32>() % 2) as usize;
        let u = haar_unitary(&mut rng, n);
        let u2 = haar_unitary(&mut rng, n);
        let mut t: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.5)).collect();
        t.sort_by(|a, b| b.total_cmp(a));
        let g = SymplecticMatrix::from_unitary(&u)
            .mul(&SymplecticMatrix::hyperbolic(&t))
            .mul(&SymplecticMatrix::from_unitary(&u2));
        let factors = kak_factorize(&g).unwrap();
        let back = factors.reconstruct();
        let rel = (back.matrix() - g.matrix()).norm() / g.matrix().norm();
        assert!(rel < 1e-9);
        for (a, b) in factors.t.iter().zip(t.iter()) {
            assert!((a - b).abs() < 1e-8, "t recovery {a} vs {b}");
        }
    }
}

#[test]
fn haar_unitary_is_unitary_and_column_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for n in 1..=3 {
        let u = haar_unitary(&mut rng, n);
        let dev = (u.matrix().adjoint() * u.matrix() - CMatrix::identity(n, n)).norm();
        assert!(dev < 1e-12);
    }
    // E|u_11|^2 = 1/n by column exchangeability
    let n = 2;
    let draws = 20_000;
    let mut sum = 0.0;
    for _ in 0..draws {
        let u = haar_unitary(&mut rng, n);
        sum += u.matrix()[(0, 0)].norm_sqr();
    }
    let mean = sum / draws as f64;
    // Var(|u_11|^2) is about 1/12 at n = 2; 5 sigma around 1/2
    assert!(
        (mean - 1.0 / n as f64).abs() < 5.0 * (1.0 / 12.0f64 / draws as f64).sqrt(),
        "mean {mean}"
    );
}

#[test]
fn haar_left_invariance_two_sample_ks() {
    // |tr u| has the same distribution as |tr (g u)| for a fixed unitary g
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let n = 2;
    let draws = 100_000;
    let g = haar_unitary(&mut rng, n);
    let mut a: Vec<f64> = Vec::with_capacity(draws);
    let mut b: Vec<f64> = Vec::with_capacity(draws);
    for _ in 0..draws {
        let u = haar_unitary(&mut rng, n);
        a.push(u.matrix().trace().norm());
        let v = haar_unitary(&mut rng, n);
        b.push((g.matrix() * v.matrix()).trace().norm());
    }
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    // two-sample Kolmogorov-Smirnov statistic
    let mut d: f64 = 0.0;
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        let fa = i as f64 / a.len() as f64;
        let fb = j as f64 / b.len() as f64;
        d = d.max((fa - fb).abs());
    }
    // critical value at the 1% level
    let c = 1.628 * ((a.len() + b.len()) as f64 / (a.len() * b.len()) as f64).sqrt();
    assert!(d < c, "KS statistic {d} exceeds critical value {c}");
}

#[test]
fn disk_sampler_acceptance_and_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for n in 1..=2 {
        let mut accepted = 0;
        for _ in 0..2000 {
            if let Some((point, weight)) = sample_disk(&mut rng, n) {
                accepted += 1;
                assert!(weight > 0.0);
                let min_eig = SymmetricEigen::new(point.gram_defect()).eigenvalues.min();
                assert!(min_eig > 0.0);
            }
        }
        assert!(accepted > 0, "sampler never accepts at n = {n}");
    }
}

#[test]
fn disk_sampler_polar_closed_form() {
    // n = 1, rho = z^3: integral of (1 - |w|^2)^3 over D_1 with the invariant
    // measure equals 4 pi / (m - 1) = 2 pi
    let cfg = McConfig::new(200_000, 21).with_workers(2);
    let est = integrate_disk(1, &cfg, 0, |w| {
        let defect = 1.0 - w.matrix()[(0, 0)].norm_sqr();
        defect.powi(3)
    });
    let expected = 2.0 * std::f64::consts::PI;
    assert!(
        (est.value - expected).abs() < 3.0 * est.stderr,
        "estimate {} +- {} vs {expected}",
        est.value,
        est.stderr
    );
}

#[test]
fn integrators_are_deterministic_given_seed_and_workers() {
    let cfg = McConfig::new(10_000, 5).with_workers(3);
    let f = |w: &DiskPoint| w.matrix().norm();
    let a = integrate_disk(2, &cfg, 7, f);
    let b = integrate_disk(2, &cfg, 7, f);
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
}

#[test]
fn measure_pushforward_between_domains() {
    // integral over H_n of f dv equals integral over D_n of f(inverse
    // cayley) dv_D, checked for three concentrated test functions
    type TestFn = Box<dyn Fn(&SiegelPoint) -> f64 + Sync>;
    let test_functions: Vec<TestFn> = vec![
        Box::new(|z: &SiegelPoint| {
            let n = z.n();
            let dx = z.x().norm_squared();
            let dy = (z.y() - RMatrix::identity(n, n)).norm_squared();
            (-2.0 * (dx + dy)).exp()
        }),
        Box::new(|z: &SiegelPoint| {
            let n = z.n();
            let d = (z.matrix() - SiegelPoint::i_identity(n).matrix()).norm_squared();
            (-3.0 * d).exp() * (1.0 + z.x()[(0, 0)].cos())
        }),
        Box::new(|z: &SiegelPoint| {
            let n = z.n();
            let dx = z.x().norm_squared();
            let dy = (z.y() - RMatrix::identity(n, n)).norm_squared();
            (-(dx + dy)).exp() / (1.0 + dy)
        }),
    ];
    for n in 1..=2 {
        for (idx, f) in test_functions.iter().enumerate() {
            let cfg = McConfig::new(400_000, 33 + idx as u64).with_workers(2);
            let siegel_side = integrate_siegel(n, &cfg, 1, |z| f(z));
            let disk_side = integrate_disk(n, &cfg, 2, |w| match inverse_cayley(w) {
                Ok(z) => f(&z),
                Err(_) => 0.0,
            });
            let diff = (siegel_side.value - disk_side.value).abs();
            let sigma = (siegel_side.stderr.powi(2) + disk_side.stderr.powi(2)).sqrt();
            assert!(
                diff <= 3.0 * sigma,
                "pushforward mismatch at n = {n}, f{idx}: {} vs {} (sigma {sigma})",
                siegel_side.value,
                disk_side.value
            );
        }
    }
}

use crate::error::Error;
