use plap_core::entropy::*;
use plap_core::field::{Geom1d, Mesh1d};
use plap_core::geometry::{builtin_metric, MetricName};
use plap_core::parabolic::*;
use plap_core::{Error, ScalarField};
use proptest::prelude::*;
use std::f64::consts::{E, PI};

fn mesh(n: usize, l: f64, h: f64) -> Mesh1d {
    if n == 1 {
        Mesh1d::spanning(Geom1d::Line, -l, l, h).unwrap()
    } else {
        let g = builtin_metric(MetricName::Euclidean, n).unwrap();
        Mesh1d::spanning(Geom1d::Radial(g), 0.0, l, h).unwrap()
    }
}

fn v0_field(m: &Mesh1d, p: f64, t: f64) -> ScalarField {
    let n = m.dim();
    ScalarField::sample_mesh(m.clone(), p, |x| fundamental_u(x, t, p, n).unwrap())
}

// v₀ minus a bump, renormalized to unit mass
fn perturbed(m: &Mesh1d, p: f64, t: f64) -> ScalarField {
    let n = m.dim();
    let f = ScalarField::sample_mesh(m.clone(), p, |x| {
        fundamental_u(x, t, p, n).unwrap() - 0.5 * (-2.0 * (x - 0.7) * (x - 0.7)).exp()
    });
    let w: Vec<f64> = f.values.iter().map(|u| (-u).exp()).collect();
    let mass = weight_mass(m, &w, Domain::Truncated).unwrap().value;
    f.map(|u| u + mass.ln())
}

#[test]
fn mass_of_fundamental_solution() {
    for &(p, n, t) in &[(1.5, 1, 1.0), (3.0, 1, 0.5), (1.5, 3, 2.0)] {
        let m = mesh(n, 12.0, 0.02);
        let v = ScalarField::sample_mesh(m.clone(), p, |x| fundamental_b_radial(x.abs(), t, p, n).unwrap());
        let r = mass(&v, p, Domain::Truncated).unwrap();
        assert!((r.value - 1.0).abs() < 1e-6, "p={p} n={n}: {}", r.value);
        assert!(r.tail_bound < 1e-8);
    }
}

#[test]
fn mass_of_constant_on_closed_domain() {
    let m = Mesh1d::spanning(Geom1d::Line, 0.0, 3.0, 0.1).unwrap();
    let v = ScalarField::sample_mesh(m, 1.5, |_| 4.0);
    let r = mass(&v, 1.5, Domain::Closed).unwrap();
    assert!((r.value - 2.0 * 3.0).abs() < 1e-12);
    // the same data as a truncation of the line has no decaying tail
    assert!(matches!(mass(&v, 1.5, Domain::Truncated), Err(Error::Quadrature(_))));
}

#[test]
fn mass_drift_along_runs() {
    for &p in &[1.5, 3.0] {
        let m = mesh(1, 10.0, 0.05);
        let run = run_parabolic(&v0_field(&m, p, 1.0), &RunConfig::new(EquationKind::B, p, 0.0, 1.0, vec![1.5, 2.0])).unwrap();
        let m0 = run.discrete_mass(0).unwrap();
        for k in 1..run.snapshots.len() {
            let drift = (run.discrete_mass(k).unwrap() - m0).abs();
            assert!(drift <= 1e-8 * (run.snapshots[k].t - 1.0), "{drift}");
        }
    }
}

#[test]
fn normalization_at_two_is_heat_kernel() {
    for n in 1..=4 {
        let c = plap_core::parabolic::ln_normalization(2.0, n);
        assert!((c + 0.5 * n as f64 * (4.0 * PI).ln()).abs() < 1e-13);
    }
}

#[test]
fn entropy_vanishes_along_fundamental_solution() {
    for &(p, n, l) in &[(1.5, 1, 8.0), (3.0, 1, 12.0), (2.0, 2, 12.0)] {
        let m = mesh(n, l, 0.05);
        let cfg = RunConfig::new(EquationKind::B, p, 0.0, 1.0, RunConfig::geometric_samples(1.0, 2.0, 10));
        let run = run_parabolic(&v0_field(&m, p, 1.0), &cfg).unwrap();
        let s = entropy_series(&run, Domain::Truncated, 0.0).unwrap();
        for (k, w) in s.w.iter().enumerate() {
            assert!(w.abs() <= 2e-3, "p={p} n={n}: W = {w}");
            assert!(s.dwdt[k].abs() <= 2e-3);
        }
        let closed = s.f_closed_form();
        for k in 0..s.t.len() {
            assert!((s.f_entropy[k] - closed[k]).abs() < 1e-3, "{} {}", s.f_entropy[k], closed[k]);
            // F vanishes identically on the equality case
            assert!(s.f_entropy[k].abs() <= 1e-3, "{}", s.f_entropy[k]);
        }
    }
}

#[test]
fn w_is_zero_for_fundamental_profile_at_any_time() {
    // independent of any run: W(v₀(t), t) = 0
    for &(p, n) in &[(1.5, 1), (3.0, 2), (1.5, 3)] {
        let m = mesh(n, 14.0, 0.01);
        for t in [0.5, 1.0, 3.0] {
            let w = w_entropy(&v0_field(&m, p, t), t, p, Domain::Truncated).unwrap();
            assert!(w.abs() < 2e-3, "p={p} n={n} t={t}: {w}");
        }
    }
}

#[test]
fn entropy_formula_on_perturbed_data() {
    let (p, t0) = (1.5, 1.0);
    let m = mesh(1, 8.0, 0.05);
    let cfg = RunConfig::new(EquationKind::B, p, 0.0, t0, RunConfig::geometric_samples(t0, 2.0, 80));
    let run = run_parabolic(&perturbed(&m, p, t0), &cfg).unwrap();
    let s = entropy_series(&run, Domain::Truncated, 0.9).unwrap();
    assert!(s.w_increase() <= 0.0, "{}", s.w_increase());
    assert!(s.formula_mismatch() <= 0.05, "{}", s.formula_mismatch());
    assert!(s.rhs.iter().all(|&r| r >= 0.0));
    assert!(s.f_entropy.iter().all(|&f| f <= 1e-6));
    assert!(s.fbar.windows(2).all(|w| w[1] <= w[0] + 1e-6));
}

// Fails: dN/d ln t rises from -n/p toward 0, so N is not concave in ln t for
// data that differ from the fundamental solution.
#[test]
#[ignore]
fn n_concave_in_log_t_on_perturbed_data() {
    let (p, t0) = (1.5, 1.0);
    let m = mesh(1, 8.0, 0.05);
    let cfg = RunConfig::new(EquationKind::B, p, 0.0, t0, RunConfig::geometric_samples(t0, 2.0, 80));
    let s = entropy_series(&run_parabolic(&perturbed(&m, p, t0), &cfg).unwrap(), Domain::Truncated, 0.9).unwrap();
    assert!(s.concavity_defect() <= 1e-6, "{}", s.concavity_defect());
}

#[test]
fn n_concave_along_fundamental_solution() {
    let m = mesh(1, 8.0, 0.05);
    let cfg = RunConfig::new(EquationKind::B, 1.5, 0.0, 1.0, RunConfig::geometric_samples(1.0, 2.0, 10));
    let s = entropy_series(&run_parabolic(&v0_field(&m, 1.5, 1.0), &cfg).unwrap(), Domain::Truncated, 0.0).unwrap();
    assert!(s.concavity_defect() <= 1e-5, "{}", s.concavity_defect());
}

#[test]
fn entropy_formula_error_shrinks_with_sampling() {
    let (p, t0) = (2.0, 1.0);
    let m = mesh(1, 10.0, 0.05);
    let init = perturbed(&m, p, t0);
    let e: Vec<f64> = [20, 40, 80]
        .iter()
        .map(|&k| {
            let cfg = RunConfig::new(EquationKind::B, p, 0.0, t0, RunConfig::geometric_samples(t0, 2.0, k));
            entropy_series(&run_parabolic(&init, &cfg).unwrap(), Domain::Truncated, 0.9).unwrap().formula_mismatch()
        })
        .collect();
    assert!((e[0] / e[1]).log2() >= 1.0 && (e[1] / e[2]).log2() >= 1.0, "{e:?}");
}

#[test]
fn scaling_invariance() {
    let (p, lam, t) = (1.5, 1.3, 1.7);
    for n in [1, 2] {
        let m = mesh(n, 8.0, 0.05);
        let u = perturbed(&m, p, 1.0);
        let w1 = w_entropy(&u, t, p, Domain::Truncated).unwrap();
        let m2 = mesh(n, 8.0 * lam, 0.05 * lam);
        let u2 = ScalarField::on_mesh(m2, u.values.iter().map(|x| x + n as f64 * lam.ln()).collect(), p).unwrap();
        let w2 = w_entropy(&u2, t * lam.powf(p), p, Domain::Truncated).unwrap();
        assert!((w1 - w2).abs() <= 1e-6, "{w1} {w2}");
    }
}

#[test]
fn w1_entropy_is_the_limit() {
    let m = mesh(1, 10.0, 0.02);
    let u = perturbed(&m, 1.5, 1.0);
    let w1 = w1_entropy(&u, 1.2, Domain::Truncated).unwrap();
    let near = w_entropy(&u, 1.2, 1.0 + 1e-7, Domain::Truncated).unwrap();
    assert!((w1 - near).abs() < 1e-5, "{w1} {near}");
}

#[test]
fn entropy_needs_b_runs_and_unit_mass() {
    let m = mesh(1, 4.0, 0.05);
    let v = ScalarField::sample_mesh(m.clone(), 2.0, |x| (-x * x).exp());
    let run = run_parabolic(&v, &RunConfig::new(EquationKind::A, 2.0, 0.0, 1.0, vec![1.1])).unwrap();
    assert!(matches!(entropy_series(&run, Domain::Truncated, 0.0), Err(Error::Mismatch(_))));
    let heavy = v0_field(&m, 2.0, 1.0).map(|u| u - 1.0);
    let run = run_parabolic(&heavy, &RunConfig::new(EquationKind::B, 2.0, 0.0, 1.0, vec![1.1])).unwrap();
    assert!(matches!(entropy_series(&run, Domain::Truncated, 0.0), Err(Error::Mismatch(_))));
}

#[test]
fn conservation_law() {
    let m = mesh(1, 6.0, 0.05);
    let bump: Vec<f64> = m.xs().iter().map(|x| (-(x - 0.5) * (x - 0.5)).exp()).collect();
    let ones = vec![1.0; m.len()];
    for &p in &[1.5, 2.0, 3.0] {
        let u0 = v0_field(&m, p, 1.0);
        let c = conservation_check(&u0, &ones, p, 1.0, 2.0).unwrap();
        assert!(c.drift <= 1e-8 && c.drift == c.mass_drift, "{c:?}");
        let c = conservation_check(&u0, &bump, p, 1.0, 2.0).unwrap();
        assert!(c.relative <= 5e-3, "p={p}: {c:?}");
    }
}

#[test]
fn log_sobolev_constants() {
    for n in 1..=4 {
        let c = log_sobolev_constant(2.0, n).unwrap();
        assert!((c - 2.0 / (n as f64 * PI * E)).abs() < 1e-15);
    }
    assert!((log_sobolev_constant(2.0, 1).unwrap() - 0.23420).abs() < 5e-6);
    assert!(log_sobolev_constant(1.0, 2).is_err());
}

#[test]
fn log_sobolev_sharp_on_extremals() {
    for &(p, n) in &[(1.5, 1), (3.0, 1), (2.0, 2), (1.5, 2)] {
        let m = mesh(n, 14.0, 0.01);
        // |w|^p = v₀^{p−1} at a fixed time
        let w = ScalarField::sample_mesh(m, p, |x| (-fundamental_u(x, 0.8, p, n).unwrap() / p).exp());
        let r = log_sobolev_check(&w, p).unwrap();
        assert!(r.margin.abs() <= 1e-4, "p={p} n={n}: {}", r.margin);
        assert!(r.pass);
        assert!((r.get("w_min").unwrap() - r.margin).abs() < 1e-9);
    }
}

#[test]
fn log_sobolev_gaussians_and_bumps() {
    // p = 2: every Gaussian is extremal for the scale-invariant form
    let m = mesh(1, 30.0, 0.01);
    for s in [0.5, 1.0, 3.0] {
        let w = ScalarField::sample_mesh(m.clone(), 2.0, |x| 7.0 * (-x * x / (4.0 * s * s)).exp());
        let r = log_sobolev_check(&w, 2.0).unwrap();
        assert!(r.margin.abs() <= 1e-6, "{s}: {}", r.margin);
    }
    let w = ScalarField::sample_mesh(m, 2.0, |x| (-x.abs()).exp());
    assert!(log_sobolev_check(&w, 2.0).unwrap().margin > 1e-3);
    let m2 = mesh(2, 3.0, 0.005);
    let bump = ScalarField::sample_mesh(m2, 1.5, |r| if r < 1.0 { (1.0 - r * r).powi(2) } else { 0.0 });
    let rep = log_sobolev_check(&bump, 1.5).unwrap();
    assert!(rep.pass && rep.margin > 1e-2, "{}", rep.margin);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn prop_w_nonnegative(a in 0.2f64..3.0, b in -1.0f64..1.0, c in 0.0f64..0.8, p in 1.3f64..3.5) {
        // assorted unit-mass profiles: W(t) ≥ 0 on the whole t grid
        let m = mesh(1, 20.0, 0.02);
        let w = ScalarField::sample_mesh(m, p, |x| (-(a * x * x)).exp() * (1.0 + c * (b * x).sin()));
        let r = log_sobolev_check(&w, p).unwrap();
        prop_assert!(r.get("w_min").unwrap() >= -1e-3);
        prop_assert!(r.margin >= -1e-4);
    }
}
