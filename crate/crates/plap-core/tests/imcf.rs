use plap_core::elliptic::radial_decaying;
use plap_core::field::{Geom1d, Mesh1d, ScalarField};
use plap_core::geometry::{builtin_metric, MetricName};
use plap_core::imcf::*;
use plap_core::{Error, WarpedMetric};
use std::f64::consts::PI;

fn metric(name: MetricName, n: usize) -> WarpedMetric {
    builtin_metric(name, n).unwrap()
}

fn imcf_field(m: WarpedMetric, a: f64, b: f64, h: f64, f: impl Fn(f64) -> f64) -> ScalarField {
    ScalarField::sample_mesh(Mesh1d::spanning(Geom1d::Radial(m), a, b, h).unwrap(), 1.0, f)
}

#[test]
fn j_of_planar_log_solution() {
    let u = imcf_field(metric(MetricName::Euclidean, 2), 0.5, 3.0, 1.0 / 256.0, |r| r.ln());
    let j = j_functional(&u, &u, Region { a: 1.0, b: 2.0 }).unwrap();
    assert!((j - 4.0 * PI * 2f64.ln()).abs() < 1e-8, "{j}");
}

#[test]
fn j_rejects_bad_pairs() {
    let m = metric(MetricName::Euclidean, 2);
    let u = imcf_field(m, 0.5, 3.0, 1.0 / 64.0, |r| r.ln());
    let w = u.map(|x| x + 1e-3);
    assert!(matches!(j_functional(&u, &w, Region { a: 1.0, b: 2.0 }), Err(Error::Mismatch(_))));
    let other = imcf_field(m, 0.5, 3.0, 1.0 / 32.0, |r| r.ln());
    assert!(j_functional(&u, &other, Region { a: 1.0, b: 2.0 }).is_err());
    assert!(j_functional(&u, &u, Region { a: 1.0, b: 2.0 + 1e-3 }).is_err());
}

#[test]
fn jp_basics() {
    let m = metric(MetricName::Euclidean, 3);
    let zero = imcf_field(m, 1.0, 2.0, 0.01, |_| 0.0);
    assert_eq!(jp_functional(&zero, &zero, Region { a: 1.0, b: 2.0 }, 1.5).unwrap(), 0.0);

    let u = imcf_field(m, 1.0, 4.0, 1.0 / 128.0, |r| 2.0 * r.ln());
    let w = u.with_values(u.values.iter().enumerate().map(|(i, v)| {
        let s = 1.0 + i as f64 / 128.0;
        v + if (2.0..3.0).contains(&s) { 0.1 * ((s - 2.0) * PI).sin().powi(4) } else { 0.0 }
    }).collect());
    let k = Region { a: 1.5, b: 3.5 };
    let j1 = j_functional(&u, &w, k).unwrap();
    let jp = jp_functional(&u, &w, k, 1.01).unwrap();
    assert!((jp - j1).abs() < 1e-2 * j1, "{jp} vs {j1}");
    assert!((jp_functional(&u, &w, k, 1.0).unwrap() - j1).abs() < 1e-6 * j1);
}

#[test]
fn p_solution_minimizes_jp() {
    let m = metric(MetricName::Euclidean, 3);
    for p in [1.2, 1.5, 2.5] {
        let prof = radial_decaying(&m, p, 1.0, 4.0, 1.0 / 256.0).unwrap();
        let k = Region { a: 1.5, b: 3.5 };
        let bumps = bump_family(&prof.u, k, 30, 0.1, 7).unwrap();
        let cert = certify(&prof.u, k, &bumps, Some(p), 1e-6).unwrap();
        assert!(cert.pass, "p = {p}: slack {}", cert.slack);
    }
}

#[test]
fn exact_imcf_solution_certificates() {
    for n in [2usize, 3, 4] {
        let m = metric(MetricName::Euclidean, n);
        let u = imcf_field(m, 1.0, 4.0, 1.0 / 256.0, |r| (n as f64 - 1.0) * r.ln());
        let k = Region { a: 1.5, b: 3.5 };
        let bumps = bump_family(&u, k, 50, 0.1, 11 + n as u64).unwrap();
        let cert = certify(&u, k, &bumps, None, 1e-6).unwrap();
        assert!(cert.pass, "n = {n}: slack {} (tol {})", cert.slack, cert.tolerance);
        // perturbations that bend level sets strictly raise J
        let big = [Bump { center: 2.5, radius: 0.5, amplitude: -3.0 }];
        assert!(certify(&u, k, &big, None, 0.0).unwrap().slack > 0.0);
    }
}

#[test]
fn moser_euclidean_limit() {
    let m = metric(MetricName::Euclidean, 3);
    let cfg = MoserConfig { s0: 1.0, s_work: 4.0, r_out: vec![8.0], h: 1.0 / 128.0, mode: OuterMode::Tail, blowup: 10.0 };
    let run = moser_scheme(&m, &[1.5, 1.3, 1.2, 1.1, 1.05], &cfg).unwrap();
    let mesh = run.limit.mesh().unwrap();
    let scale = run.limit.values.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let err = (0..mesh.len()).map(|i| (run.limit.values[i] - 2.0 * mesh.x(i).ln()).abs()).fold(0.0, f64::max);
    assert!(err <= 0.05 * scale, "{err}");
    // the p = 1.5 member is (n − p) log r with |∇u| = 1.5/r
    let u15 = &run.solutions[0];
    for i in 0..mesh.len() {
        assert!((u15.values[i] - 1.5 * mesh.x(i).ln()).abs() < 1e-10);
    }
    assert!((run.log[0].sup_grad - 1.5).abs() < 1e-10);
    assert!(run.log.iter().all(|r| r.residual < 1e-10));
}

#[test]
fn moser_rejects_bad_sequences() {
    let m = metric(MetricName::Euclidean, 3);
    let cfg = MoserConfig { s0: 1.0, s_work: 4.0, r_out: vec![8.0], h: 0.01, mode: OuterMode::Tail, blowup: 10.0 };
    assert!(moser_scheme(&m, &[1.2, 1.3, 1.1], &cfg).is_err());
    assert!(moser_scheme(&m, &[1.2, 1.1, 1.0], &cfg).is_err());
    // p0 = 3 = n is parabolic in R³
    assert!(matches!(moser_scheme(&m, &[3.0, 2.0, 1.5], &cfg), Err(Error::NotNonparabolic(_))));
}

#[test]
fn moser_gradient_uniformity() {
    // the drift of sup |∇u^(p)| is O(p − 1) relative to n − p, so planar ends need p closer to 1
    for (m, ps) in [
        (metric(MetricName::Euclidean, 3), [1.2, 1.15, 1.1, 1.05]),
        (metric(MetricName::PowerGrowth(3.0), 3), [1.2, 1.15, 1.1, 1.05]),
        (metric(MetricName::PowerGrowth(2.5), 2), [1.1, 1.07, 1.04, 1.02]),
    ] {
        let cfg = MoserConfig { s0: 1.0, s_work: 6.0, r_out: vec![12.0], h: 1.0 / 64.0, mode: OuterMode::Tail, blowup: 10.0 };
        let run = moser_scheme(&m, &ps, &cfg).unwrap();
        let sups = run.gradient_sups_on(2.0, 5.0);
        let (lo, hi) = sups.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        assert!(hi <= 1.1 * lo, "{:?}: {sups:?}", m.name);
    }
}

#[test]
fn cigar_is_not_proper() {
    let m = metric(MetricName::Cigar, 2);
    let tail = MoserConfig { s0: 1.0, s_work: 6.0, r_out: vec![12.0], h: 1.0 / 64.0, mode: OuterMode::Tail, blowup: 10.0 };
    assert!(matches!(moser_scheme(&m, &[1.3, 1.2, 1.1], &tail), Err(Error::NotNonparabolic(_))));

    let bound = -(1f64.tanh()).ln();
    let mut sups = Vec::new();
    for r_out in [20.0, 40.0, 80.0] {
        let cfg = MoserConfig { r_out: vec![r_out], mode: OuterMode::Exhaustion, ..tail.clone() };
        let run = moser_scheme(&m, &[1.2, 1.15, 1.1, 1.05], &cfg).unwrap();
        let sup = run.limit.max();
        println!("R_out = {r_out}: sup u = {sup}, bound {bound}");
        sups.push(sup);
        let diag = properness_diagnostics(&run, &m, 1.2).unwrap();
        assert!(!diag.nonparabolic && !diag.v_decays && !diag.proper, "{diag:?}");
        assert!((diag.v_samples.last().unwrap().1 - 1.0 / (2.0 * PI)).abs() < 1e-2);
    }
    assert!(sups.iter().all(|&s| s <= bound + 0.05));
}

#[test]
fn euclidean_and_power_growth_are_proper() {
    let e = metric(MetricName::Euclidean, 3);
    let cfg = MoserConfig { s0: 1.0, s_work: 20.0, r_out: vec![40.0], h: 1.0 / 32.0, mode: OuterMode::Tail, blowup: 10.0 };
    let run = moser_scheme(&e, &[1.3, 1.2, 1.1, 1.05], &cfg).unwrap();
    let d = properness_diagnostics(&run, &e, 1.3).unwrap();
    assert!(d.proper && d.gradient_decays == Some(true), "{d:?}");

    let g = metric(MetricName::PowerGrowth(1.5), 2);
    let run = moser_scheme(&g, &[1.3, 1.2, 1.1, 1.05], &cfg).unwrap();
    let d = properness_diagnostics(&run, &g, 1.3).unwrap();
    assert!(d.nonparabolic && d.v_decays && d.proper, "{d:?}");
}

#[test]
fn cigar_total_variation() {
    let m = metric(MetricName::Cigar, 2);
    let u = imcf_field(m, 1.0, 41.0, 1.0 / 128.0, |s| (s.tanh() / 1f64.tanh()).ln());
    let rep = cigar_tv_bound(&u, &[2.0, 4.0, 8.0, 16.0, 20.0]).unwrap();
    let exact = 2.0 * PI * (1.0 - 1f64.tanh());
    assert!((exact - 1.4963).abs() < 2e-3);
    let tv = rep.total_variation.last().unwrap().1;
    assert!((tv - exact).abs() < 1e-8, "{tv} vs {exact}");
    assert!(rep.bounded && rep.pass, "{rep:?}");

    let zero = u.map(|_| 0.0);
    let rep = cigar_tv_bound(&zero, &[2.0, 4.0]).unwrap();
    assert!(rep.cutoffs.iter().all(|c| c.lhs == 0.0 && c.rhs > 0.0));
    assert!(rep.pass);
}

#[test]
fn extrapolated_limit_certificate() {
    for n in [2usize, 3] {
        let m = metric(MetricName::Euclidean, n);
        let cfg = MoserConfig { s0: 1.0, s_work: 4.0, r_out: vec![8.0], h: 1.0 / 128.0, mode: OuterMode::Tail, blowup: 10.0 };
        let ps = if n == 2 { [1.1, 1.07, 1.04, 1.02] } else { [1.2, 1.15, 1.1, 1.05] };
        let run = moser_scheme(&m, &ps, &cfg).unwrap();
        let k = Region { a: 1.5, b: 3.5 };
        let bumps = bump_family(&run.limit, k, 50, 0.1, 2024).unwrap();
        let cert = certify(&run.limit, k, &bumps, None, 1e-3).unwrap();
        assert!(cert.pass, "n = {n}: slack {} vs J {}", cert.slack, cert.j_u);
    }
}
