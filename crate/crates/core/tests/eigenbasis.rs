use approx::assert_relative_eq;
use proptest::prelude::*;
use scc_core::bethe::Rapidity;
use scc_core::eigenbasis::{alpha_coefficients, signed_distance, solve_basis};
use scc_core::model::{build_hamiltonian, exact_spectrum, ModelParams};

/// `(sum, sum of |terms|)` of the permutation formula for every `k`.
fn permutation_oracle(e: &[f64]) -> Vec<(f64, f64)> {
    fn permute(rest: &mut Vec<f64>, prefix: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            prefix.push(x);
            permute(rest, prefix, out);
            prefix.pop();
            rest.insert(i, x);
        }
    }
    let mut perms = Vec::new();
    permute(&mut e.to_vec(), &mut Vec::new(), &mut perms);
    (0..=e.len())
        .map(|k| {
            perms.iter().fold((0.0, 0.0), |(sum, abs), p| {
                let term: f64 = p[..k].iter().map(|x| -1.0 / (1.0 + x)).product::<f64>()
                    * p[k..].iter().map(|x| 1.0 / (1.0 - x)).product::<f64>();
                (sum + term, abs + term.abs())
            })
        })
        .collect()
}

fn rapidities(e: &[f64]) -> Vec<Rapidity> {
    e.iter().map(|&x| Rapidity::from_value(x)).collect()
}

fn away_from_poles() -> impl Strategy<Value = f64> {
    (-6.0f64..6.0).prop_filter("near a pole", |x| (x.abs() - 1.0).abs() > 0.05)
}

#[test]
fn one_pair_alpha() {
    let a = alpha_coefficients(&rapidities(&[0.0])).unwrap();
    assert_relative_eq!(a[0].to_f64(), 1.0, epsilon = 1e-15);
    assert_relative_eq!(a[1].to_f64(), -1.0, epsilon = 1e-15);
    let a = alpha_coefficients(&rapidities(&[3.0])).unwrap();
    assert_relative_eq!(a[0].to_f64(), -0.5, epsilon = 1e-15);
    assert_relative_eq!(a[1].to_f64(), -0.25, epsilon = 1e-15);
}

proptest! {
    #[test]
    fn two_pair_alpha_matches_explicit_sum(e1 in away_from_poles(), e2 in away_from_poles()) {
        let a = alpha_coefficients(&rapidities(&[e1, e2])).unwrap();
        let want = -1.0 / (1.0 + e1) / (1.0 - e2) - 1.0 / (1.0 + e2) / (1.0 - e1);
        let scale = (1.0 / (1.0 + e1) / (1.0 - e2)).abs() + (1.0 / (1.0 + e2) / (1.0 - e1)).abs();
        prop_assert!((a[1].to_f64() - want).abs() <= 1e-12 * scale);
    }

    #[test]
    fn alpha_matches_permutation_sum(e in prop::collection::vec(away_from_poles(), 1..=6)) {
        let got = alpha_coefficients(&rapidities(&e)).unwrap();
        for (k, (want, abs)) in permutation_oracle(&e).into_iter().enumerate() {
            let v = got[k].to_f64();
            prop_assert!((v - want).abs() <= 1e-10 * abs, "k={} {} vs {}", k, v, want);
        }
    }
}

#[test]
fn rows_match_ed_across_figure_parameters() {
    for n_bosons in [10, 50, 100] {
        for q in [4.0 / 3.0, 6.0, 60.0, 125.0, 250.0, 500.0, 1000.0, 1e5] {
            let p = ModelParams::new(n_bosons, 1.0, q).unwrap();
            let basis = solve_basis(&p).unwrap();
            let ed = exact_spectrum(&build_hamiltonian(&p).unwrap());
            assert!(basis.orthogonality_defect() <= 1e-8, "N={n_bosons} q={q}");
            for s in 0..basis.dim() {
                let d = signed_distance(&basis.row(s), &ed.vector(s));
                assert!(d <= 1e-6, "N={n_bosons} q={q} s={s}: {d:e}");
            }
            let col0: f64 = (0..basis.dim()).map(|s| basis.c[(s, 0)].powi(2)).sum();
            assert!((col0 - 1.0).abs() <= 1e-10);
        }
    }
}

#[test]
fn one_pair_rows_by_hand() {
    let basis = solve_basis(&ModelParams::new(2, 1.0, 2.0).unwrap()).unwrap();
    let (a, b) = ((1.0f64 / 3.0).sqrt(), (2.0f64 / 3.0).sqrt());
    // Rows in ascending energy: E = -2 (rapidity 3), then E = 4 (rapidity 0).
    assert_relative_eq!(basis.row(1)[0], a, epsilon = 1e-12);
    assert_relative_eq!(basis.row(1)[1], -b, epsilon = 1e-12);
    assert_relative_eq!(basis.row(0)[0], -b, epsilon = 1e-12);
    assert_relative_eq!(basis.row(0)[1], -a, epsilon = 1e-12);
}
