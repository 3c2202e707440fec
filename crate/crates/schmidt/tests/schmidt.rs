use proptest::prelude::*;
use schmidt::{
    gaussian_svd_overlap, mehler_closed_form, mehler_partial_sum, quadrature_schmidt,
    schmidt_spectrum, SchmidtError,
};

#[test]
fn decoupled_kernel_is_a_product_state() {
    let spec = schmidt_spectrum(1.7, 0.0, 12).unwrap();
    assert_eq!(spec.u, 0.0);
    assert_eq!(spec.entropy, 0.0);
    assert!((spec.coefficients[0] - 1.0).abs() < 1e-15);
    for w in &spec.coefficients[1..] {
        assert_eq!(*w, 0.0);
    }
}

#[test]
fn reference_kernel_has_geometric_tower() {
    // a=2, b=1: u = 1/2, wₙ = √(3)/2 · 2⁻ⁿ.
    let spec = schmidt_spectrum(2.0, 1.0, 20).unwrap();
    assert!((spec.u - 0.5).abs() < 1e-15);
    let head = (0.75f64).sqrt();
    for (n, w) in spec.coefficients.iter().enumerate() {
        let expect = head * 0.5f64.powi(n as i32);
        assert!(
            (w - expect).abs() < 1e-14 * expect.max(1e-300),
            "n={n}: {w} vs {expect}"
        );
    }
    let norm: f64 = spec.coefficients.iter().map(|w| w * w).sum();
    assert!((norm - 1.0).abs() < 1e-12, "Σw² = {norm}");
}

#[test]
fn quadrature_matches_analytic_tower_on_reference_kernel() {
    let exact = schmidt_spectrum(2.0, 1.0, 9).unwrap();
    let numeric = quadrature_schmidt(2.0, 1.0, 200).unwrap();
    for n in 0..10 {
        let err = (numeric[n] - exact.coefficients[n]).abs();
        assert!(
            err < 1e-6,
            "coefficient {n}: quadrature {} vs exact {} (err {err:.3e})",
            numeric[n],
            exact.coefficients[n]
        );
    }
}

#[test]
fn entropy_closed_form_matches_direct_sum() {
    for &(a, b) in &[(2.0, 1.0), (1.3, -0.9), (4.0, 2.7), (1.0, 0.05)] {
        let spec = schmidt_spectrum(a, b, 4000).unwrap();
        let direct: f64 = spec
            .coefficients
            .iter()
            .map(|w| {
                let p = w * w;
                if p > 0.0 {
                    -p * p.ln()
                } else {
                    0.0
                }
            })
            .sum();
        assert!(
            (spec.entropy - direct).abs() < 1e-10,
            "a={a}, b={b}: closed {} vs summed {direct}",
            spec.entropy
        );
    }
}

#[test]
fn negative_mixing_alternates_signs_but_entropy_is_even_in_b() {
    let plus = schmidt_spectrum(2.0, 1.0, 8).unwrap();
    let minus = schmidt_spectrum(2.0, -1.0, 8).unwrap();
    assert!((plus.entropy - minus.entropy).abs() < 1e-15);
    for n in 0..=8 {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        assert!((minus.coefficients[n] - sign * plus.coefficients[n]).abs() < 1e-15);
    }
    // Quadrature reports magnitudes, so it should agree with |wₙ|.
    let numeric = quadrature_schmidt(2.0, -1.0, 200).unwrap();
    for n in 0..6 {
        assert!((numeric[n] - plus.coefficients[n]).abs() < 1e-6);
    }
}

#[test]
fn entropy_grows_as_the_kernel_approaches_criticality() {
    let mild = schmidt_spectrum(1.0, 0.99, 0).unwrap();
    let near = schmidt_spectrum(1.0, 0.999, 0).unwrap();
    assert!(
        near.entropy > mild.entropy + 0.5,
        "entropy should diverge as b → a: {} vs {}",
        near.entropy,
        mild.entropy
    );
}

#[test]
fn non_normalizable_kernels_are_rejected() {
    assert!(matches!(
        schmidt_spectrum(1.0, 1.0, 4),
        Err(SchmidtError::NonNormalizable { .. })
    ));
    assert!(matches!(
        schmidt_spectrum(1.0, -1.5, 4),
        Err(SchmidtError::NonNormalizable { .. })
    ));
    assert!(matches!(
        quadrature_schmidt(0.5, 0.7, 100),
        Err(SchmidtError::NonNormalizable { .. })
    ));
    assert!(matches!(
        schmidt_spectrum(f64::NAN, 0.0, 4),
        Err(SchmidtError::NonNormalizable { .. })
    ));
}

#[test]
fn coarse_grid_near_criticality_raises_resolution_warning() {
    // u = 0.995: the kernel is wide and slowly decaying; 24 points cannot
    // resolve it and the half-grid check must catch that.
    let result = quadrature_schmidt(1.0, 0.995, 24);
    assert!(
        matches!(result, Err(SchmidtError::ResolutionWarning { .. })),
        "expected a resolution warning, got {result:?}"
    );
}

#[test]
fn svd_basis_overlap_matches_closed_form() {
    let (a, b) = (2.0, 1.0);
    let gap = a - b;
    let same = gaussian_svd_overlap(a, b, 0.7, 0.7).unwrap();
    assert!((same - (std::f64::consts::PI / gap).sqrt()).abs() < 1e-14);

    let o = gaussian_svd_overlap(a, b, 1.0, -0.5).unwrap();
    let expect = (std::f64::consts::PI / gap).sqrt() * (-(1.5f64).powi(2) / (4.0 * gap)).exp();
    assert!((o - expect).abs() < 1e-14);

    // Symmetric in p ↔ p′, strictly positive, decaying with separation.
    let o_rev = gaussian_svd_overlap(a, b, -0.5, 1.0).unwrap();
    assert_eq!(o.to_bits(), o_rev.to_bits());
    let far = gaussian_svd_overlap(a, b, 4.0, -4.0).unwrap();
    assert!(far > 0.0 && far < o);

    assert!(matches!(
        gaussian_svd_overlap(1.0, 1.0, 0.0, 0.0),
        Err(SchmidtError::NonNormalizable { .. })
    ));
}

#[test]
fn mehler_series_converges_to_closed_form() {
    let (x, y, u) = (0.3, -0.7, 0.5);
    let partial = mehler_partial_sum(x, y, u, 60);
    let closed = mehler_closed_form(x, y, u);
    assert!(
        (partial - closed).abs() < 1e-12,
        "residual {:.3e}",
        (partial - closed).abs()
    );
}

#[test]
fn mehler_truncation_error_shrinks_with_more_terms() {
    let (x, y, u) = (0.9, 0.4, 0.6);
    let closed = mehler_closed_form(x, y, u);
    let at_10 = (mehler_partial_sum(x, y, u, 10) - closed).abs();
    let at_30 = (mehler_partial_sum(x, y, u, 30) - closed).abs();
    let at_80 = (mehler_partial_sum(x, y, u, 80) - closed).abs();
    assert!(at_30 < at_10 * 1e-2);
    assert!(at_80 < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn quadrature_tower_is_geometric_with_ratio_u(
        a in 0.8f64..4.0,
        u_abs in 0.4f64..0.75,
        negate in proptest::bool::ANY,
    ) {
        let u = if negate { -u_abs } else { u_abs };
        let b = u * a;
        let vals = quadrature_schmidt(a, b, 400).unwrap();
        let exact = schmidt_spectrum(a, b, 8).unwrap();
        for n in 0..8 {
            let ratio = vals[n + 1] / vals[n];
            prop_assert!(
                (ratio - u_abs).abs() < 1e-4,
                "level {}: ratio {} vs |u| {}", n, ratio, u_abs
            );
            prop_assert!(
                (vals[n] - exact.coefficients[n].abs()).abs() < 1e-6,
                "level {}: {} vs {}", n, vals[n], exact.coefficients[n].abs()
            );
        }
    }
}
