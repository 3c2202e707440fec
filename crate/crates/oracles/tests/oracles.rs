use free_trg::{close_single_vertex, init_free};
use oracles::*;
use proptest::prelude::*;

#[test]
fn brute_matches_momentum_sum() {
    for &g in &[1usize, 2, 4] {
        for &m2 in &[1.0, 0.09] {
            let a = brute_force_log_z(g, m2).unwrap();
            let b = momentum_log_z(g, m2);
            assert!(
                (a - b).abs() < 1e-10,
                "g={g} m2={m2}: brute {a} vs momentum {b}"
            );
        }
    }
}

#[test]
fn two_by_two_torus_momentum_vs_brute() {
    let a = brute_force_log_z(2, 1.0).unwrap();
    let b = momentum_log_z(2, 1.0);
    assert!((a - b).abs() < 1e-12);
}

#[test]
fn quadrature_matches_large_momentum_sum() {
    for &m2 in &[1.0, 0.01, 1e-4] {
        let q = exact_f0(m2);
        let s = momentum_f0(1 << 10, m2);
        assert!((q - s).abs() < 1e-8, "m2={m2}: integral {q} vs sum {s}");
    }
    for &m2 in &[1.0, 0.09, 0.01] {
        let q = exact_f1(m2);
        let s = momentum_f1(1 << 10, m2);
        assert!((q - s).abs() < 1e-8, "m2={m2}: f1 integral {q} vs sum {s}");
    }
}

#[test]
fn quadrature_internally_converged() {
    for &m2 in &[1.0, 0.01, 1e-4] {
        let a = exact_f0_with_points(m2, 48);
        let b = exact_f0_with_points(m2, 96);
        assert!((a - b).abs() < 1e-12, "m2={m2}: refinement moved f0 by {:e}", (a - b).abs());
        let ga = exact_g0_with_points(m2, 48);
        let gb = exact_g0_with_points(m2, 96);
        assert!((ga - gb).abs() < 1e-12);
    }
}

#[test]
fn one_vertex_torus_matches_level_zero_fold() {
    // m = 2: the folded level-0 tensor is exactly the one-site torus trace
    let m2 = 4.0;
    let brute = brute_force_log_z(1, m2).unwrap();
    let folded = close_single_vertex(&init_free(m2)).unwrap();
    assert!((brute - folded).abs() < 1e-12, "brute {brute} vs fold {folded}");
}

#[test]
fn green_function_consistent_with_logz_derivative() {
    // d logZ / d m2 = -1/2 sum_l G_ll on the one-vertex torus
    let m2 = 2.0;
    let h = 1e-4;
    let fd = (brute_force_log_z(1, m2 + h).unwrap() - brute_force_log_z(1, m2 - h).unwrap())
        / (2.0 * h);
    let trace: f64 = brute_force_green_diag(1, m2).unwrap().iter().sum();
    assert!((fd + 0.5 * trace).abs() < 1e-5, "fd {fd} vs -trace/2 {}", -0.5 * trace);
}

#[test]
fn df_equals_momentum_f1_on_finite_torus() {
    for &g in &[2usize, 4] {
        for &m2 in &[1.0, 0.25] {
            let df = brute_force_df(g, m2).unwrap() / (g * g) as f64;
            let mf = momentum_f1(g, m2);
            assert!((df - mf).abs() < 1e-10, "g={g} m2={m2}");
        }
    }
}

#[test]
fn brute_force_respects_link_cap() {
    assert!(matches!(
        brute_force_log_z(5, 1.0),
        Err(OracleError::TooManyLinks { g: 5, links: 50 })
    ));
    assert!(brute_force_log_z(4, 1.0).is_ok());
}

#[test]
fn gauss_legendre_integrates_polynomials_exactly() {
    // degree-2n-1 exactness: check x^6 on [-1, 1] with n = 4
    let (xs, ws) = gauss_legendre(4);
    let s: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(6)).sum();
    assert!((s - 2.0 / 7.0).abs() < 1e-14);
    let (_, ws) = gauss_legendre(48);
    let total: f64 = ws.iter().sum();
    assert!((total - 2.0).abs() < 1e-13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn prop_finite_volume_approaches_brute(m2 in 0.2f64..4.0) {
        // the two finite-torus routes agree for every mass
        let a = brute_force_log_z(4, m2).unwrap();
        let b = momentum_log_z(4, m2);
        prop_assert!((a - b).abs() < 1e-9);
        let df = brute_force_df(4, m2).unwrap() / 16.0;
        prop_assert!((df - momentum_f1(4, m2)).abs() < 1e-9);
    }
}
