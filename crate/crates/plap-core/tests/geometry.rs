use plap_core::geometry::*;
use proptest::prelude::*;
use std::f64::consts::PI;

fn metric(name: MetricName, n: usize) -> WarpedMetric {
    builtin_metric(name, n).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn euclidean_warp_is_flat() {
    let m = metric(MetricName::Euclidean, 3);
    assert_eq!((m.w(2.0), m.dw(2.0), m.d2w(2.0)), (2.0, 1.0, 0.0));
    let cb = curvature_bounds(&m, 0.0, 4.0).unwrap();
    assert_eq!((cb.sectional_min, cb.sectional_max, cb.ricci_min, cb.ricci_max), (0.0, 0.0, 0.0, 0.0));
}

#[test]
fn hyperbolic_curvature_is_constant() {
    let m = metric(MetricName::Hyperbolic(1.0), 3);
    assert!((m.radial_sectional(1.7) + 1.0).abs() < 1e-14);
    let cb = curvature_bounds(&m, 0.1, 6.0).unwrap();
    assert!((cb.sectional_min + 1.0).abs() < 1e-12 && (cb.sectional_max + 1.0).abs() < 1e-12);
    assert!((cb.ricci_min + 2.0).abs() < 1e-12 && (cb.ricci_max + 2.0).abs() < 1e-12);
    assert!((cb.k_sectional() - 1.0).abs() < 1e-12);
    assert!((cb.kappa_ricci(3) - 1.0).abs() < 1e-12);
}

#[test]
fn cigar_is_nonnegatively_curved() {
    let m = metric(MetricName::Cigar, 7);
    assert_eq!(m.n, 2);
    for &(a, b) in &[(0.0, 5.0), (0.3, 0.4), (2.0, 30.0)] {
        let cb = curvature_bounds(&m, a, b).unwrap();
        assert!(cb.sectional_min >= 0.0 && cb.sectional_max <= 2.0 + 1e-14);
    }
    // −(tanh s)''/tanh s = 2 sech² s
    let s: f64 = 0.8;
    assert!((m.radial_sectional(s) - 2.0 / s.cosh().powi(2)).abs() < 1e-14);
    assert!((m.radial_sectional(s) + m.d2w(s) / m.w(s)).abs() < 1e-14);
}

#[test]
fn curvature_interval_outside_domain() {
    let m = metric(MetricName::Euclidean, 3);
    assert!(curvature_bounds(&m, -1.0, 2.0).is_err());
}

#[test]
fn ball_volumes_match_antiderivatives() {
    let e3 = metric(MetricName::Euclidean, 3);
    assert!(rel(ball_volume(&e3, 1.0).unwrap(), 4.0 * PI / 3.0) < 1e-12);
    let cigar = metric(MetricName::Cigar, 2);
    let exact = 2.0 * PI * 10f64.cosh().ln();
    assert!(rel(ball_volume(&cigar, 10.0).unwrap(), exact) < 1e-10);
    let h2 = metric(MetricName::Hyperbolic(1.0), 2);
    assert!(rel(ball_volume(&h2, 1.0).unwrap(), 2.0 * PI * (1f64.cosh() - 1.0)) < 1e-10);
    let h3 = metric(MetricName::Hyperbolic(1.0), 3);
    for &t in &[0.5f64, 3.0, 12.0] {
        let exact = PI * ((2.0 * t).sinh() - 2.0 * t);
        assert!(rel(ball_volume(&h3, t).unwrap(), exact) < 1e-8, "t={t}");
    }
    // γ = 3, n = 2: w = s√(1+s²), V = 2π((1+t²)^{3/2} − 1)/3
    let pg = metric(MetricName::PowerGrowth(3.0), 2);
    for &t in &[0.2f64, 2.0, 40.0] {
        let exact = 2.0 * PI * ((1.0 + t * t).powf(1.5) - 1.0) / 3.0;
        assert!(rel(ball_volume(&pg, t).unwrap(), exact) < 1e-8, "t={t}");
    }
}

#[test]
fn power_growth_exponent() {
    let pg = metric(MetricName::PowerGrowth(1.5), 3);
    let (v1, v2) = (ball_volume(&pg, 1e4).unwrap(), ball_volume(&pg, 2e4).unwrap());
    assert!(((v2 / v1).log2() - 1.5).abs() < 1e-3);
}

#[test]
fn euclidean_nonparabolicity_value() {
    let m = metric(MetricName::Euclidean, 3);
    let r = nonparabolicity(&m, 1.5, 1.0).unwrap();
    assert!(r.converges);
    assert!(rel(r.value.unwrap(), 3.0 / (16.0 * PI * PI)) < 1e-8);
    assert!(!nonparabolicity(&m, 3.0, 1.0).unwrap().converges);
    assert!(nonparabolicity(&m, 1.0, 1.0).is_err());
}

#[test]
fn cigar_is_parabolic_for_every_p() {
    let m = metric(MetricName::Cigar, 2);
    for &p in &[1.1, 1.5, 2.0, 3.0] {
        assert!(!nonparabolicity(&m, p, 1.0).unwrap().converges, "p={p}");
    }
}

#[test]
fn end_volumes_shift_by_inner_ball() {
    let m = metric(MetricName::Euclidean, 3);
    let whole = nonparabolicity(&m, 1.5, 2.0).unwrap().value.unwrap();
    let end = nonparabolicity_end(&m, 1.5, 2.0, 1.0).unwrap().value.unwrap();
    assert!(end > whole);
}

#[test]
fn v_growth_oracles() {
    let e3 = metric(MetricName::Euclidean, 3);
    let vg = v_growth(&e3, 10.0).unwrap();
    assert!(rel(vg.value, 20.0 / ball_volume(&e3, 20.0).unwrap()) < 1e-12);
    assert!((vg.argmax - 20.0).abs() < 1e-9);

    let cigar = metric(MetricName::Cigar, 2);
    for &r in &[50.0, 100.0, 400.0] {
        let v = v_growth(&cigar, r).unwrap().value;
        assert!(rel(v, 1.0 / (2.0 * PI)) < 0.01, "r={r}: {v}");
    }

    let pg = metric(MetricName::PowerGrowth(1.5), 2);
    let a = v_growth(&pg, 10.0).unwrap().value;
    let b = v_growth(&pg, 1000.0).unwrap().value;
    assert!(b < a / 5.0);
}

#[test]
fn volume_growth_report_is_monotone() {
    let m = metric(MetricName::PowerGrowth(2.0), 3);
    let rep = volume_growth_report(&m, 1.5, &[1.0, 2.0, 4.0, 8.0], &[1.0, 4.0, 16.0]).unwrap();
    assert!(rep.v_growth_monotone);
    assert!(rep.nonparabolicity.converges);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]
    #[test]
    fn euclidean_nonparabolic_iff_p_below_n(k in 0usize..25, n in 2usize..5) {
        let p = 1.1 + 0.1 * k as f64;
        let m = metric(MetricName::Euclidean, n);
        let r = nonparabolicity(&m, p, 1.0).unwrap();
        prop_assert_eq!(r.converges, p < n as f64 - 1e-9, "p={} n={}", p, n);
        if let Some(v) = r.value {
            // ∫_1^∞ (n t^{1−n}/ω)^{e} dt = (n/ω)^e / ((n−1)e − 1), e = 1/(p−1)
            let e = 1.0 / (p - 1.0);
            let omega = 2.0 * PI.powf(n as f64 / 2.0) / statrs_gamma(n as f64 / 2.0);
            let exact = (n as f64 / omega).powf(e) / ((n as f64 - 1.0) * e - 1.0);
            prop_assert!(rel(v, exact) < 1e-6, "{} vs {}", v, exact);
        }
    }
}

// Γ(1), Γ(3/2), Γ(2) are all we need
fn statrs_gamma(x: f64) -> f64 {
    match (2.0 * x) as i32 {
        2 => 1.0,
        3 => PI.sqrt() / 2.0,
        4 => 1.0,
        _ => unreachable!(),
    }
}
