use num_complex::Complex64;
use proptest::prelude::*;
use scc_core::eigenbasis::{solve_basis, SpectralBasis};
use scc_core::interferometer::{
    calibrate, estimate_fringe_frequency, mean_eta_trace, observable_moments, output_state_free,
    seeded_pair_number, Interferometer, OutputState, SequenceConfig, SequenceKind,
};
use scc_core::model::{build_hamiltonian, exact_spectrum, ModelParams};
use scc_core::SccError;
use std::f64::consts::PI;

fn basis(n_bosons: usize, q: f64) -> SpectralBasis {
    solve_basis(&ModelParams::new(n_bosons, 1.0, q).unwrap()).unwrap()
}

/// `exp(i s H) v` through the exact-diagonalisation eigenpairs.
fn evolve(params: &ModelParams, s: f64, v: &[Complex64]) -> Vec<Complex64> {
    let ed = exact_spectrum(&build_hamiltonian(params).unwrap());
    let dim = v.len();
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for j in 0..dim {
        let col = ed.vector(j);
        let overlap: Complex64 = col.iter().zip(v).map(|(c, x)| x * c).sum();
        let w = overlap * Complex64::from_polar(1.0, ed.energies[j] * s);
        for k in 0..dim {
            out[k] += w * col[k];
        }
    }
    out
}

/// Fock amplitudes of `e^{-iHt} P(u) e^{iHt} |0>` built directly from ED.
fn oracle_amplitudes(params: &ModelParams, kind: SequenceKind, t: f64, u: f64) -> Vec<Complex64> {
    let n = params.pairs();
    let mut vac = vec![Complex64::new(0.0, 0.0); n + 1];
    vac[0] = Complex64::new(1.0, 0.0);
    let a = evolve(params, t, &vac);
    let b = match kind {
        SequenceKind::Free { omega, omega0 } => a
            .iter()
            .enumerate()
            .map(|(r, z)| {
                let ph = -2.0 * (r as f64 * omega + (n - r) as f64 * omega0) * u;
                z * Complex64::from_polar(1.0, ph)
            })
            .collect(),
        SequenceKind::Quasifree { q_prime } => evolve(&params.with_q(q_prime).unwrap(), -u, &a),
    };
    evolve(params, -t, &b)
}

fn max_prob_gap(ifm: &Interferometer<'_>, oracle: &[Complex64], u: f64) -> f64 {
    let p = ifm.fock_amplitudes(u).probabilities();
    p.iter()
        .zip(oracle)
        .map(|(x, z)| (x - z.norm_sqr()).abs())
        .fold(0.0, f64::max)
}

#[test]
fn sequences_match_direct_propagation() {
    let params = ModelParams::new(30, 1.0, 4.0 / 3.0).unwrap();
    let b = solve_basis(&params).unwrap();
    let prime = solve_basis(&params.with_q(250.0).unwrap()).unwrap();
    let free = SequenceKind::Free {
        omega: 1000.0,
        omega0: 40.0,
    };
    let quasi = SequenceKind::Quasifree { q_prime: 250.0 };
    for t in [0.004, 0.02] {
        for u in [0.0, 3e-4, 1.7e-3] {
            let ifm = Interferometer::new(&b, None, free, t).unwrap();
            let gap = max_prob_gap(&ifm, &oracle_amplitudes(&params, free, t, u), u);
            assert!(gap <= 1e-10, "free t={t} u={u}: {gap:e}");
            let ifm = Interferometer::new(&b, Some(&prime), quasi, t).unwrap();
            let gap = max_prob_gap(&ifm, &oracle_amplitudes(&params, quasi, t, u), u);
            assert!(gap <= 1e-10, "quasifree t={t} u={u}: {gap:e}");
        }
    }
}

#[test]
fn no_seeding_means_no_pairs() {
    let b = basis(40, 4.0 / 3.0);
    assert!(seeded_pair_number(&b, 0.0).abs() < 1e-20);
    let kind = SequenceKind::Free {
        omega: 1000.0,
        omega0: 0.0,
    };
    let ifm = Interferometer::new(&b, None, kind, 0.0).unwrap();
    for u in [0.0, 1e-3, 0.1] {
        let p = ifm.fock_amplitudes(u).probabilities();
        assert!((p[0] - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn identity_at_zero_dwell() {
    let b = basis(100, 4.0 / 3.0);
    let prime = basis(100, 1000.0);
    for kind in [
        SequenceKind::Free {
            omega: 1000.0,
            omega0: 0.0,
        },
        SequenceKind::Quasifree { q_prime: 1000.0 },
    ] {
        let ifm = Interferometer::new(&b, Some(&prime), kind, 0.03).unwrap();
        let out = ifm.output_state(0.0);
        let fidelity: Complex64 = out.x.iter().enumerate().map(|(s, x)| x * b.c[(s, 0)]).sum();
        assert!((fidelity.norm() - 1.0).abs() <= 1e-10);
        let (mean, var) = observable_moments(&out, &b);
        assert!(mean.abs() <= 1e-10 && var.abs() <= 1e-10);
    }
}

#[test]
fn fock_state_moments() {
    let b = basis(20, 6.0);
    for k in [0, 3, 10] {
        let x: Vec<Complex64> = (0..b.dim())
            .map(|s| Complex64::new(b.c[(s, k)], 0.0))
            .collect();
        let out = OutputState {
            dx_du: vec![Complex64::new(0.0, 0.0); x.len()],
            x,
        };
        let (mean, var) = observable_moments(&out, &b);
        assert!((mean - 2.0 * k as f64).abs() <= 1e-10);
        assert!(var.abs() <= 1e-10);
    }
}

#[test]
fn free_sequence_is_periodic() {
    let b = basis(100, 4.0 / 3.0);
    let omega = 1000.0;
    let ifm =
        Interferometer::new(&b, None, SequenceKind::Free { omega, omega0: 0.0 }, 0.02).unwrap();
    let period = PI / omega;
    for j in 0..25 {
        let u = period * j as f64 / 7.0;
        let a = ifm.fock_amplitudes(u).moments().0;
        let c = ifm.fock_amplitudes(u + period).moments().0;
        assert!((a - c).abs() <= 1e-8);
    }
}

#[test]
fn free_fringe_frequency() {
    let b = basis(100, 4.0 / 3.0);
    let ifm = Interferometer::new(
        &b,
        None,
        SequenceKind::Free {
            omega: 1000.0,
            omega0: 0.0,
        },
        0.006,
    )
    .unwrap();
    let cal = calibrate(&ifm, 0.03, 1024).unwrap();
    assert!((cal.omega - 2000.0).abs() <= 2.0, "{}", cal.omega);
}

#[test]
fn synthetic_sinusoid() {
    let samples: Vec<(f64, f64)> = (0..2048)
        .map(|j| {
            let u = j as f64 * 2e-5;
            (u, 1.5 + 0.7 * (2307.0 * u).cos())
        })
        .collect();
    let cal = estimate_fringe_frequency(&samples).unwrap();
    assert!((cal.omega - 2307.0).abs() <= 1e-6 * 2307.0);
}

#[test]
fn quasifree_approaches_free_at_large_q_prime() {
    let q_prime = 1e5;
    let b = basis(100, 4.0 / 3.0);
    let prime = basis(100, q_prime);
    let t = 0.006;
    let quasi =
        Interferometer::new(&b, Some(&prime), SequenceKind::Quasifree { q_prime }, t).unwrap();
    let free = Interferometer::new(
        &b,
        None,
        SequenceKind::Free {
            omega: q_prime,
            omega0: 0.0,
        },
        t,
    )
    .unwrap();
    let window = PI / q_prime;
    let a = mean_eta_trace(&quasi, window, 257);
    let c = mean_eta_trace(&free, window, 257);
    let scale = c.iter().fold(0.0f64, |m, p| m.max(p.1.abs()));
    let gap = a
        .iter()
        .zip(&c)
        .fold(0.0f64, |m, (x, y)| m.max((x.1 - y.1).abs()));
    assert!(gap <= 0.01 * scale, "gap {gap} scale {scale}");
}

#[test]
fn late_quasifree_fringes_have_no_dominant_peak() {
    let b = basis(100, 4.0 / 3.0);
    let prime = basis(100, 1000.0);
    let ifm = Interferometer::new(
        &b,
        Some(&prime),
        SequenceKind::Quasifree { q_prime: 1000.0 },
        0.03,
    )
    .unwrap();
    let err = calibrate(&ifm, 16.0 * PI / 1000.0, 2048).unwrap_err();
    assert!(matches!(err, SccError::NoDominantPeak { .. }), "{err}");
}

#[test]
fn rejects_invalid_sequences() {
    let b = basis(10, 2.0);
    let bad = |kind, t, u| output_state_free(&b, &SequenceConfig { kind, t, u }).is_err();
    let free = SequenceKind::Free {
        omega: 1.0,
        omega0: 0.0,
    };
    assert!(bad(free, -1.0, 0.0));
    assert!(bad(free, 0.0, f64::NAN));
    assert!(bad(SequenceKind::Quasifree { q_prime: 5.0 }, 0.0, 0.0));
    let other = basis(10, 3.0);
    let quasi = SequenceKind::Quasifree { q_prime: 5.0 };
    assert!(Interferometer::new(&b, Some(&other), quasi, 0.0).is_err());
    assert!(Interferometer::new(&b, None, quasi, 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn output_state_is_normalised(
        t in 0.0f64..0.05,
        u in 0.0f64..0.05,
        omega in 1.0f64..3000.0,
        omega0 in -500.0f64..500.0,
    ) {
        let b = basis(40, 4.0 / 3.0);
        let kind = SequenceKind::Free { omega, omega0 };
        let out = output_state_free(&b, &SequenceConfig { kind, t, u }).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() <= 1e-10);
        let p = Interferometer::new(&b, None, kind, t).unwrap().fock_amplitudes(u).probabilities();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
    }
}
