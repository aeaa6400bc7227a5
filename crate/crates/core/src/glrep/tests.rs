use super::*;
use crate::symplectic::sampling::haar_unitary;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn hw(omega: &[i64]) -> HighestWeight {
    HighestWeight::new(omega.to_vec()).unwrap()
}

fn random_gl(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    use rand::Rng;
    // identity plus a moderate perturbation keeps the condition number tame
    let mut m = CMatrix::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] += C64::new(rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4));
        }
    }
    m
}

fn random_posdef(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let g = random_gl(rng, n);
    let mut y = g.adjoint() * &g;
    y += CMatrix::identity(n, n) * C64::new(0.1, 0.0);
    // clean the Hermitian part to working precision
    (y.clone() + y.adjoint()) * C64::new(0.5, 0.0)
}

#[test]
fn weyl_dimension_examples() {
    assert_eq!(weyl_dimension(&hw(&[1, 0])), 2);
    assert_eq!(weyl_dimension(&hw(&[3, 1])), 3);
    assert_eq!(weyl_dimension(&hw(&[2, 1, 0])), 8);
    assert_eq!(weyl_dimension(&hw(&[1, 1])), 1);
    assert_eq!(weyl_dimension(&hw(&[8, 0, 0])), 45);
}

#[test]
fn invalid_weights_rejected() {
    assert!(HighestWeight::new(vec![1, 2]).is_err());
    assert!(HighestWeight::new(vec![2, -1]).is_err());
    assert!(HighestWeight::new(vec![]).is_err());
}

#[test]
fn tensor_budget_enforced() {
    let w = hw(&[9, 0, 0]);
    let err = build_rep_with(
        &w,
        &BuildOptions {
            max_tensor_dim: 100,
        },
    )
    .unwrap_err();
    match err {
        Error::TensorBudget { required, .. } => assert_eq!(required, 3u128.pow(9)),
        other => panic!("unexpected error {other:?}"),
    }
}

#[test]
fn build_rep_dimensions() {
    assert_eq!(build_rep(&hw(&[1, 0])).unwrap().dim(), 2);
    assert_eq!(build_rep(&hw(&[1, 1])).unwrap().dim(), 1);
    assert_eq!(build_rep(&hw(&[2, 1, 0])).unwrap().dim(), 8);
}

#[test]
fn dims_match_weyl_for_all_small_weights() {
    for weight in small_weights(3, 4) {
        let rep = build_rep(&weight).unwrap();
        assert_eq!(
            rep.dim() as u64,
            weyl_dimension(&weight),
            "dimension mismatch for {:?}",
            weight.omega()
        );
    }
}

#[test]
fn embedding_columns_orthonormal() {
    for omega in [&[2i64, 0][..], &[2, 1, 0], &[3, 1], &[4, 2, 1]] {
        let rep = build_rep(&hw(omega)).unwrap();
        let b = rep.basis_embedding();
        let gram = b.adjoint() * b;
        let dev = (gram - CMatrix::identity(rep.dim(), rep.dim())).norm();
        assert!(dev < 1e-10, "gram deviation {dev} for {omega:?}");
    }
}

#[test]
fn determinant_character() {
    let rep = build_rep(&hw(&[1, 1])).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = random_gl(&mut rng, 2);
    let m = rep.apply(&g).unwrap();
    assert_eq!(m.nrows(), 1);
    assert!((m[(0, 0)] - g.determinant()).norm() < 1e-12);
}

#[test]
fn identity_maps_to_identity() {
    for omega in [&[1i64, 0][..], &[2, 0], &[2, 1, 0], &[3, 2]] {
        let rep = build_rep(&hw(omega)).unwrap();
        let m = rep.apply(&CMatrix::identity(rep.n(), rep.n())).unwrap();
        let dev = (m - CMatrix::identity(rep.dim(), rep.dim())).norm();
        assert!(dev < 1e-12);
    }
}

#[test]
fn symmetric_square_on_diagonal() {
    // independent oracle: Sym^2(C^2) in the weight basis ordered by
    // descending weight is diag(a^2, ab, b^2) at diag(a, b)
    let rep = build_rep(&hw(&[2, 0])).unwrap();
    assert_eq!(
        rep.weight_labels(),
        &[vec![2, 0], vec![1, 1], vec![0, 2]],
        "weight basis order is descending lexicographic"
    );
    let a = C64::new(1.3, 0.4);
    let b = C64::new(-0.2, 0.9);
    let mut g = CMatrix::zeros(2, 2);
    g[(0, 0)] = a;
    g[(1, 1)] = b;
    let m = rep.apply(&g).unwrap();
    let expected = [a * a, a * b, b * b];
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j {
                expected[i]
            } else {
                C64::new(0.0, 0.0)
            };
            assert!((m[(i, j)] - want).norm() < 1e-12, "entry ({i},{j})");
        }
    }
}

#[test]
fn homomorphism_over_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for omega in [&[2i64, 0][..], &[2, 1], &[2, 1, 0], &[3, 1, 1]] {
        let rep = build_rep(&hw(omega)).unwrap();
        for _ in 0..100 {
            let g = random_gl(&mut rng, rep.n());
            let h = random_gl(&mut rng, rep.n());
            let lhs = rep.apply(&(&g * &h)).unwrap();
            let rhs = rep.apply(&g).unwrap() * rep.apply(&h).unwrap();
            let rel = (lhs - &rhs).norm() / rhs.norm();
            assert!(rel < 1e-9, "homomorphism violated for {omega:?}: {rel}");
        }
    }
}

#[test]
fn unitary_restriction_is_unitary() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for omega in [&[2i64, 0][..], &[3, 1], &[2, 1, 0]] {
        let rep = build_rep(&hw(omega)).unwrap();
        for _ in 0..100 {
            let u = haar_unitary(&mut rng, rep.n());
            let m = rep.apply(u.matrix()).unwrap();
            let dev = (m.adjoint() * &m - CMatrix::identity(rep.dim(), rep.dim())).norm();
            assert!(dev < 1e-10, "unitarity violated for {omega:?}: {dev}");
        }
    }
}

#[test]
fn adjoint_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for omega in [&[2i64, 0][..], &[2, 1, 0]] {
        let rep = build_rep(&hw(omega)).unwrap();
        for _ in 0..100 {
            let g = random_gl(&mut rng, rep.n());
            let v1 = random_cvector(&mut rng, rep.dim());
            let v2 = random_cvector(&mut rng, rep.dim());
            let lhs = crate::inner(&rep.apply_to_vector(&g, &v1).unwrap(), &v2);
            let rhs = crate::inner(&v1, &rep.apply_to_vector(&g.adjoint(), &v2).unwrap());
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }
}

fn random_cvector(rng: &mut ChaCha8Rng, dim: usize) -> CVector {
    use rand::Rng;
    CVector::from_fn(dim, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

#[test]
fn apply_sqrt_identity_and_scalar_oracle() {
    let rep = build_rep(&hw(&[2, 1, 0])).unwrap();
    let id = CMatrix::identity(3, 3);
    let s = rep.apply_sqrt(&id).unwrap();
    assert!((s - CMatrix::identity(rep.dim(), rep.dim())).norm() < 1e-10);

    // det representation: sqrt is det(y)^{1/2}
    let rep_det = build_rep(&hw(&[1, 1])).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let y = random_posdef(&mut rng, 2);
    let s = rep_det.apply_sqrt(&y).unwrap();
    let expected = y.determinant().re.sqrt();
    assert!((s[(0, 0)] - C64::new(expected, 0.0)).norm() < 1e-10);
}

#[test]
fn apply_sqrt_squares_back_and_matches_sqrt_of_argument() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for omega in [&[2i64, 0][..], &[2, 1, 0], &[3, 1]] {
        let rep = build_rep(&hw(omega)).unwrap();
        for _ in 0..20 {
            let y = random_posdef(&mut rng, rep.n());
            let s = rep.apply_sqrt(&y).unwrap();
            let squared = &s * &s;
            let direct = rep.apply(&y).unwrap();
            assert!((squared - &direct).norm() < 1e-9 * direct.norm());
            // dual route of the square-root lemma
            let y_sqrt = hermitian_sqrt(&y);
            let other = rep.apply(&y_sqrt).unwrap();
            assert!((&s - &other).norm() < 1e-9 * other.norm());
        }
    }
}

#[test]
fn apply_sqrt_rejects_indefinite() {
    let rep = build_rep(&hw(&[2, 0])).unwrap();
    let mut y = CMatrix::identity(2, 2);
    y[(1, 1)] = C64::new(-1.0, 0.0);
    assert!(matches!(
        rep.apply_sqrt(&y),
        Err(Error::NotPositiveDefinite { .. })
    ));
}

#[test]
fn sigma_identity_and_scalar_conjugation() {
    let rep = build_rep(&hw(&[2, 1, 0])).unwrap();
    let s = rep.eval_sigma(&UnitaryMatrix::identity(3)).unwrap();
    assert!((s - CMatrix::identity(rep.dim(), rep.dim())).norm() < 1e-12);

    // n = 1, rho = z^m: sigma(e^{i theta}) = e^{-i m theta}
    let m = 3i64;
    let rep1 = build_rep(&hw(&[m])).unwrap();
    let theta = 0.7f64;
    let u = UnitaryMatrix::from_phases(&[theta]);
    let s = rep1.eval_sigma(&u).unwrap();
    let expected = C64::new(0.0, -(m as f64) * theta).exp();
    assert!((s[(0, 0)] - expected).norm() < 1e-12);
}

#[test]
fn sigma_is_unitary_on_haar_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let rep = build_rep(&hw(&[3, 1])).unwrap();
    for _ in 0..50 {
        let u = haar_unitary(&mut rng, 2);
        let s = rep.eval_sigma(&u).unwrap();
        let dev = (s.adjoint() * &s - CMatrix::identity(rep.dim(), rep.dim())).norm();
        assert!(dev < 1e-10);
    }
}

#[test]
fn highest_weight_vector_properties() {
    // standard representation: hwv is the first basis direction
    let rep = build_rep(&hw(&[1, 0])).unwrap();
    let v = rep.highest_weight_vector();
    assert_eq!(rep.hwv_index(), 0);
    assert!((v[0] - C64::new(1.0, 0.0)).norm() < 1e-15);

    // one-dimensional representation
    let rep_det = build_rep(&hw(&[1, 1])).unwrap();
    assert_eq!(rep_det.highest_weight_vector().len(), 1);

    // diagonal eigenvalue: rho(diag(2,1)) v_top = 2^{w_1} v_top
    for omega in [&[2i64, 0][..], &[3, 1]] {
        let rep = build_rep(&hw(omega)).unwrap();
        let v = rep.highest_weight_vector();
        let mut g = CMatrix::identity(2, 2);
        g[(0, 0)] = C64::new(2.0, 0.0);
        let out = rep.apply_to_vector(&g, &v).unwrap();
        let scale = C64::new(2f64.powi(omega[0] as i32), 0.0);
        assert!((out - v * scale).norm() < 1e-10);
    }

    // fixed by upper-triangular unipotents
    let rep = build_rep(&hw(&[2, 1, 0])).unwrap();
    let v = rep.highest_weight_vector();
    let mut g = CMatrix::identity(3, 3);
    g[(0, 1)] = C64::new(0.7, -0.3);
    g[(0, 2)] = C64::new(-1.1, 0.2);
    g[(1, 2)] = C64::new(0.4, 0.9);
    let out = rep.apply_to_vector(&g, &v).unwrap();
    assert!((out - &v).norm() < 1e-10);
}

#[test]
fn weight_labels_match_ssyt_contents() {
    // brute-force tableau oracle for every weight with n <= 3, k <= 4
    for weight in small_weights(3, 4) {
        let rep = build_rep(&weight).unwrap();
        let shape = young::Shape::new(weight.omega().iter().map(|&w| w as usize).collect());
        let mut expected: Vec<Vec<i64>> = young::ssyt_contents(&shape, weight.n())
            .into_iter()
            .map(|c| c.into_iter().map(|x| x as i64).collect())
            .collect();
        let mut got: Vec<Vec<i64>> = rep.weight_labels().to_vec();
        expected.sort();
        got.sort();
        assert_eq!(got, expected, "weight multiset for {:?}", weight.omega());
        // every label bounded below by the determinant twist
        for label in rep.weight_labels() {
            assert!(label.iter().all(|&l| l >= weight.det_twist()));
        }
    }
}

#[test]
fn sigma_scales_pairing_with_hwv_by_highest_weight_phases() {
    let rep = build_rep(&hw(&[3, 1])).unwrap();
    let v_top = rep.highest_weight_vector();
    let thetas = [0.4, -1.1];
    let u = UnitaryMatrix::from_phases(&thetas);
    let s = rep.eval_sigma(&u).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let x = random_cvector(&mut rng, rep.dim());
    let lhs = crate::inner(&x, &(&s * &v_top));
    let phase: f64 = rep
        .weight()
        .omega()
        .iter()
        .zip(thetas.iter())
        .map(|(&w, &t)| w as f64 * t)
        .sum();
    let rhs = C64::new(0.0, phase).exp() * crate::inner(&x, &v_top);
    assert!((lhs - rhs).norm() < 1e-10);
}

#[test]
fn serialization_roundtrip_exact() {
    let rep = build_rep(&hw(&[3, 1, 0])).unwrap();
    let text = rep.to_json();
    let back = PolyRep::from_json(&text).unwrap();
    assert_eq!(back.dim(), rep.dim());
    assert_eq!(back.weight_labels(), rep.weight_labels());
    assert_eq!(back.hwv_index(), rep.hwv_index());
    // exact bit-level equality of the embedding
    assert_eq!(
        rep.basis_embedding().iter().collect::<Vec<_>>(),
        back.basis_embedding().iter().collect::<Vec<_>>()
    );
    // and the container text is a fixpoint
    assert_eq!(back.to_json(), text);
}

#[test]
fn large_single_row_smoke() {
    // k = 8 single-row shape at n = 3 stays inside the default budget
    let rep = build_rep(&hw(&[8, 0, 0])).unwrap();
    assert_eq!(rep.dim(), 45);
}

/// All weights with the given n bounds and tensor degree k <= k_max,
/// det twists 0 and 3.
pub fn small_weights(n_max: usize, k_max: usize) -> Vec<HighestWeight> {
    let mut out = Vec::new();
    for n in 1..=n_max {
        for twist in [0i64, 3] {
            let mut partitions: Vec<Vec<usize>> = vec![vec![]];
            // partitions with at most n - 1 nonzero parts and size <= k_max
            fn extend(
                prefix: Vec<usize>,
                max_part: usize,
                left: usize,
                rows_left: usize,
                out: &mut Vec<Vec<usize>>,
            ) {
                if rows_left == 0 || left == 0 {
                    return;
                }
                for part in (1..=max_part.min(left)).rev() {
                    let mut p = prefix.clone();
                    p.push(part);
                    out.push(p.clone());
                    extend(p, part, left - part, rows_left - 1, out);
                }
            }
            let mut extras = Vec::new();
            extend(Vec::new(), k_max, k_max, n.saturating_sub(1), &mut extras);
            partitions.extend(extras);
            for partition in partitions {
                let mut omega = vec![twist; n];
                for (i, &p) in partition.iter().enumerate() {
                    omega[i] += p as i64;
                }
                out.push(HighestWeight::new(omega).unwrap());
            }
        }
    }
    out
}
