use approx::assert_relative_eq;
use proptest::prelude::*;
use scc_core::model::{
    build_conserved_charges, build_hamiltonian, exact_spectrum, fock_norms, ModelParams,
};

/// Dense sector matrix assembled from the pair-operator algebra:
/// `<k|H|k>` from the number operators, `<k+1|H|k>` from one `K+` hop.
fn operator_oracle(n: usize, lambda: f64, q: f64) -> Vec<Vec<f64>> {
    let dim = n + 1;
    let mut h = vec![vec![0.0; dim]; dim];
    for k in 0..dim {
        let m = 2.0 * (n - k) as f64;
        let kf = k as f64;
        h[k][k] = 2.0 * kf * (2.0 * lambda * m + q - lambda);
        if k < n {
            let v = -2.0 * lambda * (kf + 1.0) * (m * (m - 1.0)).sqrt();
            h[k][k + 1] = v;
            h[k + 1][k] = v;
        }
    }
    h
}

#[test]
fn hand_matrices() {
    let h = build_hamiltonian(&ModelParams::new(2, 1.0, 2.0).unwrap()).unwrap();
    assert_eq!(h.diag, vec![0.0, 2.0]);
    assert_relative_eq!(h.offdiag[0], -2.0 * 2f64.sqrt(), epsilon = 1e-14);

    let h = build_hamiltonian(&ModelParams::new(4, 0.0, 3.0).unwrap()).unwrap();
    assert_eq!(h.diag, vec![0.0, 6.0, 12.0]);
    assert!(h.offdiag.iter().all(|&v| v == 0.0));

    let h = build_hamiltonian(&ModelParams::new(4, 1.0, 0.0).unwrap()).unwrap();
    assert_eq!(h.diag, vec![0.0, 6.0, -4.0]);
    assert_relative_eq!(h.offdiag[0], -4.0 * 3f64.sqrt(), epsilon = 1e-14);
    assert_relative_eq!(h.offdiag[1], -4.0 * 2f64.sqrt(), epsilon = 1e-14);
    let ed = exact_spectrum(&h);
    assert_relative_eq!(h.trace(), ed.energies.iter().sum::<f64>(), epsilon = 1e-12);
}

#[test]
fn two_by_two_spectrum() {
    let ed = exact_spectrum(&build_hamiltonian(&ModelParams::new(2, 1.0, 2.0).unwrap()).unwrap());
    assert_relative_eq!(ed.energies[0], -2.0, epsilon = 1e-13);
    assert_relative_eq!(ed.energies[1], 4.0, epsilon = 1e-13);
    let v = ed.vector(1);
    let sign = v[0].signum();
    assert_relative_eq!(sign * v[0], (1.0f64 / 3.0).sqrt(), epsilon = 1e-13);
    assert_relative_eq!(sign * v[1], -(2.0f64 / 3.0).sqrt(), epsilon = 1e-13);
}

#[test]
fn fock_norm_examples() {
    let t = fock_norms(1);
    assert_relative_eq!(t.value(0), 0.5, epsilon = 1e-15);
    assert_relative_eq!(t.value(1), 1.0, epsilon = 1e-15);
    let t = fock_norms(2);
    for (k, want) in [1.5, 0.5, 4.0].into_iter().enumerate() {
        assert_relative_eq!(t.value(k), want, epsilon = 1e-14);
    }
    assert!(fock_norms(1000).ln_values().iter().all(|v| v.is_finite()));
}

#[test]
fn two_boson_charges_pair_with_energies() {
    let p = ModelParams::new(2, 1.0, 2.0).unwrap();
    let ch = build_conserved_charges(&p).unwrap();
    let ed = exact_spectrum(&build_hamiltonian(&p).unwrap());
    // Eigenvalue of R_l on the ED eigenvector of energy 4 and of energy -2.
    let expect = [(4.0, -1.0, 2.75), (-2.0, 0.5, 1.25)];
    for (e, r0, r1) in expect {
        let s = ed
            .energies
            .iter()
            .position(|&x| (x - e).abs() < 1e-10)
            .unwrap();
        let v = nalgebra::DVector::from_vec(ed.vector(s));
        assert_relative_eq!(v.dot(&(&ch.r0 * &v)), r0, epsilon = 1e-12);
        assert_relative_eq!(v.dot(&(&ch.r1 * &v)), r1, epsilon = 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn hamiltonian_matches_operator_oracle(
        pairs in 1usize..60,
        lambda in -3.0f64..3.0,
        q in -80.0f64..80.0,
    ) {
        let n = pairs;
        let p = ModelParams::new(2 * n, lambda, q).unwrap();
        let dense = build_hamiltonian(&p).unwrap().to_dense();
        let oracle = operator_oracle(n, lambda, q);
        let scale = dense.amax().max(1.0);
        for i in 0..=n {
            for j in 0..=n {
                prop_assert!((dense[(i, j)] - oracle[i][j]).abs() <= 1e-14 * scale);
            }
        }
    }

    #[test]
    fn charges_reconstruct_hamiltonian(
        pairs in 1usize..=50,
        lambda in -3.0f64..3.0,
        q in prop_oneof![-80.0f64..-0.1, 0.1f64..80.0],
    ) {
        let p = ModelParams::new(2 * pairs, lambda, q).unwrap();
        let ch = build_conserved_charges(&p).unwrap();
        let dense = build_hamiltonian(&p).unwrap().to_dense();
        let recon = (&dense - ch.hamiltonian(&p)).amax() / dense.amax().max(1.0);
        prop_assert!(recon <= 1e-12, "reconstruction {recon:e}");
        prop_assert!(ch.relative_commutator() <= 1e-12);
    }

    #[test]
    fn trace_and_ed_orthogonality(
        pairs in 1usize..=100,
        lambda in -3.0f64..3.0,
        q in -1000.0f64..1000.0,
    ) {
        let n = pairs;
        let h = build_hamiltonian(&ModelParams::new(2 * n, lambda, q).unwrap()).unwrap();
        let want: f64 = (0..=n)
            .map(|k| 2.0 * k as f64 * (4.0 * lambda * (n - k) as f64 + q - lambda))
            .sum();
        prop_assert_eq!(h.trace(), want);
        prop_assert!(exact_spectrum(&h).orthogonality_defect() <= 1e-12);
    }
}
