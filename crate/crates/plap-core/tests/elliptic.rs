use plap_core::elliptic::*;
use plap_core::field::{Geom1d, Mesh1d, ScalarField};
use plap_core::geometry::{builtin_metric, MetricName};
use proptest::prelude::*;

fn euclid(n: usize) -> plap_core::WarpedMetric {
    builtin_metric(MetricName::Euclidean, n).unwrap()
}

fn hyp(n: usize) -> plap_core::WarpedMetric {
    builtin_metric(MetricName::Hyperbolic(1.0), n).unwrap()
}

#[test]
fn radial_euclidean_matches_power_law() {
    let sol = radial_p_harmonic(&euclid(3), 1.5, 1.0, 4.0, 1.0, 1.0 / 64.0, 1e-2).unwrap();
    let mesh = sol.field.mesh().unwrap();
    for (i, v) in sol.field.values.iter().enumerate() {
        let s = mesh.x(i);
        assert!((v - s.powi(-3)).abs() < 1e-8, "s = {s}");
    }
    assert!(sol.residual <= 1e-9, "residual {}", sol.residual);
}

#[test]
fn radial_constant_data() {
    let sol = radial_p_harmonic(&hyp(3), 2.5, 0.3, 2.0, 1.0, 1.0, 0.05).unwrap();
    assert!(sol.field.values.iter().all(|&v| v == 1.0));
    assert_eq!(sol.residual, 0.0);
}

#[test]
fn radial_hyperbolic_coth_tail() {
    let v = |s: f64| 1.0 / s.tanh() - 1.0;
    let sol = radial_p_harmonic(&hyp(3), 2.0, 0.5, 5.0, v(0.5), v(5.0), 1e-2).unwrap();
    let mesh = sol.field.mesh().unwrap();
    for (i, x) in sol.field.values.iter().enumerate() {
        assert!((x - v(mesh.x(i))).abs() < 1e-8);
    }
    assert!(sol.residual <= 1e-9);
}

#[test]
fn radial_rejects_bad_input() {
    assert!(radial_p_harmonic(&euclid(3), 1.5, 2.0, 1.0, 1.0, 1.0, 0.1).is_err());
    assert!(radial_p_harmonic(&euclid(3), 1.5, 1.0, 2.0, -1.0, 1.0, 0.1).is_err());
    assert!(radial_p_harmonic(&euclid(3), 1.0, 1.0, 2.0, 1.0, 1.0, 0.1).is_err());
}

#[test]
fn log_transform_examples() {
    let sol = radial_p_harmonic(&euclid(3), 1.5, 1.0, 4.0, 1.0, 1.0 / 64.0, 1e-2).unwrap();
    let u = log_transform(&sol.field, 1.5).unwrap();
    let mesh = u.mesh().unwrap();
    let i = mesh.nearest(2.0);
    assert!((mesh.x(i) - 2.0).abs() < 1e-12);
    assert!((u.values[i] - 1.5 * 2f64.ln()).abs() < 1e-8);
    let g = u.mesh_gradient().unwrap();
    assert!((g[i] - 0.75).abs() < 1e-7, "{}", g[i]);

    let line = Mesh1d::spanning(Geom1d::Line, 0.0, 2.0, 0.1).unwrap();
    let v = ScalarField::sample_mesh(line, 2.0, |x| (-x).exp());
    let u = log_transform(&v, 2.0).unwrap();
    let mesh = u.mesh().unwrap();
    for (i, x) in u.values.iter().enumerate() {
        assert!((x - mesh.x(i)).abs() < 1e-14);
    }
    let one = v.map(|_| 1.0);
    assert!(log_transform(&one, 1.7).unwrap().values.iter().all(|&x| x == 0.0));
    assert!(log_transform(&v.map(|x| x - 0.5), 2.0).is_err());
}

#[test]
fn log_transform_gradient_identity() {
    // |∇u| = (p−1)|∇v|/v node by node, using the exact profile derivative
    let p = 1.5;
    let sol = radial_p_harmonic(&euclid(3), p, 1.0, 3.0, 1.0, 1.0 / 27.0, 2e-3).unwrap();
    let u = log_transform(&sol.field, p).unwrap();
    let mesh = u.mesh().unwrap();
    let gu = u.mesh_gradient().unwrap();
    let gv = sol.field.mesh_gradient().unwrap();
    for i in 0..mesh.len() {
        let lhs = gu[i].abs();
        let rhs = (p - 1.0) * gv[i].abs() / sol.field.values[i];
        assert!((lhs - rhs).abs() < 1e-8 * rhs, "node {i}");
        assert!((lhs - 1.5 / mesh.x(i)).abs() < 1e-7);
    }
}

proptest! {
    #[test]
    fn log_exp_round_trip(vals in proptest::collection::vec(1e-3f64..1e3, 5..40), p in 1.05f64..4.0) {
        let mesh = Mesh1d::new(Geom1d::Line, 0.0, 0.1, vals.len()).unwrap();
        let v = ScalarField::on_mesh(mesh, vals.clone(), p).unwrap();
        let back = exp_transform(&log_transform(&v, p).unwrap(), p);
        for (a, b) in back.values.iter().zip(&vals) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn anisotropy_spectrum(g in proptest::collection::vec(-3f64..3.0, 2..5), p in 1.01f64..5.0) {
        prop_assume!(g.iter().map(|x| x * x).sum::<f64>() > 1e-6);
        let a = AnisotropyTensor::new(&g, p).unwrap();
        prop_assert!(a.inverse_defect() <= 1e-12);
        let e = a.eigenvalues();
        prop_assert_eq!(e[0], (p - 1.0).min(1.0));
        // Rayleigh quotient along ∇u and orthogonal to it
        let f: f64 = g.iter().map(|x| x * x).sum();
        let along: f64 = (0..g.len()).flat_map(|i| (0..g.len()).map(move |j| (i, j)))
            .map(|(i, j)| g[i] * a.upper(i, j) * g[j]).sum::<f64>() / f;
        prop_assert!((along - (p - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn anisotropic_norm_positive(g in proptest::collection::vec(-2f64..2.0, 3), t in proptest::collection::vec(-1f64..1.0, 9), p in 1.01f64..4.0) {
        prop_assume!(g.iter().map(|x| x * x).sum::<f64>() > 1e-4);
        prop_assume!(t.iter().map(|x| x * x).sum::<f64>() > 1e-4);
        let a = AnisotropyTensor::new(&g, p).unwrap();
        let lo = (p - 1.0).min(1.0);
        let t2: f64 = t.iter().map(|x| x * x).sum();
        prop_assert!(a.norm2(&t) >= lo * lo * t2 * (1.0 - 1e-12));
    }
}

#[test]
fn grid_reproduces_harmonic_quadratic() {
    let g = |x: f64, y: f64| x * x - y * y + 2.0;
    let prob = DirichletProblem {
        domain: Domain2d::Rectangle { x0: -1.0, x1: 1.0, y0: -1.0, y1: 1.0 },
        h: 1.0 / 16.0,
        p: 2.0,
        boundary: Box::new(g),
        solver: SolverConfig::default(),
    };
    let sol = solve_p_laplace_grid(&prob).unwrap();
    let grid = sol.field.grid().unwrap();
    let mut err: f64 = 0.0;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (x, y) = grid.point(i, j);
            err = err.max((sol.field.values[grid.idx(i, j)] - g(x, y)).abs());
        }
    }
    // the five-point stencil is exact on quadratics
    assert!(err < 1e-9, "{err}");
    assert!(sol.max_principle_violation <= 1e-10);
}

#[test]
fn grid_constant_data_needs_no_newton() {
    for p in [1.3, 2.0, 3.5] {
        let prob = DirichletProblem {
            domain: Domain2d::Annulus { cx: 0.0, cy: 0.0, r_in: 0.3, r_out: 1.0 },
            h: 1.0 / 16.0,
            p,
            boundary: Box::new(|_, _| 1.0),
            solver: SolverConfig::default(),
        };
        let sol = solve_p_laplace_grid(&prob).unwrap();
        assert!(sol.field.values.iter().all(|&v| (v - 1.0).abs() < 1e-14));
        assert!(sol.stages.iter().all(|s| s.newton_iterations == 0));
    }
}

fn annulus_error(p: f64, h: f64) -> f64 {
    let k = (p - 2.0) / (p - 1.0);
    let (r_in, r_out) = (0.5, 1.0);
    let exact = move |x: f64, y: f64| (x * x + y * y).sqrt().max(0.5 * r_in).powf(k);
    let prob = DirichletProblem {
        domain: Domain2d::Annulus { cx: 0.0, cy: 0.0, r_in, r_out },
        h,
        p,
        boundary: Box::new(exact),
        solver: SolverConfig::default(),
    };
    let sol = solve_p_laplace_grid(&prob).unwrap();
    assert!(sol.residual.is_finite());
    let grid = sol.field.grid().unwrap();
    let mut err: f64 = 0.0;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let kk = grid.idx(i, j);
            if grid.active[kk] {
                let (x, y) = grid.point(i, j);
                let e = exact(x, y);
                err = err.max((sol.field.values[kk] - e).abs() / e);
            }
        }
    }
    err
}

#[test]
fn grid_annulus_refinement_study() {
    for p in [1.2, 1.5, 3.0] {
        let errs: Vec<f64> = [16.0, 32.0, 64.0].iter().map(|n| annulus_error(p, 1.0 / n)).collect();
        let order = (errs[0] / errs[2]).log2() / 2.0;
        println!("p = {p}: errors {errs:?}, order {order:.2}");
        assert!(errs[2] <= 0.02, "p = {p}: {errs:?}");
        assert!(order >= 1.0, "p = {p}: order {order}");
    }
}

#[test]
fn grid_comparison_principle() {
    for p in [1.4, 2.0, 3.0] {
        let solve = |shift: f64| {
            let prob = DirichletProblem {
                domain: Domain2d::Rectangle { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 },
                h: 1.0 / 16.0,
                p,
                boundary: Box::new(move |x: f64, y: f64| 1.0 + x + 0.5 * (3.0 * y).sin().abs() + shift * x * y),
                solver: SolverConfig::default(),
            };
            solve_p_laplace_grid(&prob).unwrap()
        };
        let lo = solve(0.0);
        let hi = solve(0.3);
        let worst = lo.field.values.iter().zip(&hi.field.values).map(|(a, b)| a - b).fold(f64::MIN, f64::max);
        assert!(worst <= 1e-10, "p = {p}: {worst}");
        assert!(lo.max_principle_violation <= 1e-10 && hi.max_principle_violation <= 1e-10);
        let last = lo.stages.last().unwrap();
        assert!(last.delta <= 1e-10 * (1.0 + 1e-9) || p == 2.0);
    }
}

#[test]
fn interior_constants_oracle() {
    let c = interior_constants(2.0, 3.0, 0.0, 1.0, 0.5);
    assert_eq!((c.b, c.c), (-1.0, 2.0));
}

#[test]
fn interior_zero_field_passes() {
    let mesh = Mesh1d::spanning(Geom1d::Radial(euclid(3)), 1.0, 5.0, 0.05).unwrap();
    let u = ScalarField::sample_mesh(mesh, 1.5, |_| 0.0);
    let rep = interior_estimate_check(&u, 1.5, 3, 0.0, 1.0, 0.5, &[3.0]).unwrap();
    assert_eq!(rep.lhs, 0.0);
    assert!(rep.pass);
    assert!(interior_estimate_check(&u, 1.5, 3, 0.0, 3.0, 0.5, &[3.0]).is_err());
}

#[test]
fn interior_passes_on_radial_sweep() {
    for (mname, m) in [("euclidean", euclid(3)), ("hyperbolic", hyp(3))] {
        let k = if mname == "euclidean" { 0.0 } else { 1.0 };
        for p in [1.1, 1.5, 2.0, 3.0] {
            let sol = radial_p_harmonic(&m, p, 0.5, 4.5, 3.0, 1.0, 1e-2).unwrap();
            let u = log_transform(&sol.field, p).unwrap();
            for eps in [0.1, 0.5, 0.9] {
                let rep = interior_estimate_check(&u, p, 3, k, 1.5, eps, &[2.5]).unwrap();
                assert!(rep.pass && rep.margin > 0.0, "{mname} p = {p}: {rep:?}");
            }
        }
    }
}

#[test]
fn interior_euclidean_oracle_lhs() {
    let p = 1.5;
    let sol = radial_p_harmonic(&euclid(3), p, 1.0, 5.0, 1.0, 1.0 / 125.0, 1e-2).unwrap();
    let u = log_transform(&sol.field, p).unwrap();
    let rep = interior_estimate_check(&u, p, 3, 0.0, 2.0, 0.5, &[3.0]).unwrap();
    // |∇u| = (n−p)/r is largest at r = 2
    assert!((rep.lhs - 0.75f64.powi(2)).abs() < 1e-6);
    assert!(rep.margin > 0.0);
}

#[test]
fn interior_passes_on_grid_solutions() {
    for p in [1.1, 1.5, 2.0, 3.0] {
        let k = (p - 2.0) / (p - 1.0);
        let prob = DirichletProblem {
            domain: Domain2d::Annulus { cx: 0.0, cy: 0.0, r_in: 0.5, r_out: 2.0 },
            h: 1.0 / 16.0,
            p,
            boundary: Box::new(move |x: f64, y: f64| 2.0 + (x * x + y * y).sqrt().max(0.25).powf(k) + 0.2 * x),
            solver: SolverConfig::default(),
        };
        let sol = solve_p_laplace_grid(&prob).unwrap();
        let u = log_transform(&sol.field, p).unwrap();
        let rep = interior_estimate_check(&u, p, 2, 0.0, 0.6, 0.5, &[1.2, 0.0]).unwrap();
        assert!(rep.pass, "p = {p}: {rep:?}");
    }
}

#[test]
fn global_bound_hyperbolic() {
    let rep = global_bound_check(&hyp(3), 2.0, 30.0).unwrap();
    assert!(rep.lhs >= 1.99 && rep.lhs <= 2.0 + 1e-6, "{}", rep.lhs);
    assert_eq!(rep.rhs, 2.0);
    assert!(rep.pass);

    // the radial profile approaches the bound from above: |∇u| = 1/(1 − e^{−2s}) here
    let mut last = f64::INFINITY;
    for s in [4.0, 8.0, 16.0, 32.0] {
        let rep = global_bound_check(&hyp(2), 1.5, s).unwrap();
        let ratio = rep.get("sharpness").unwrap();
        assert!((ratio - 1.0 / (1.0 - (-s).exp())).abs() < 1e-9, "S = {s}: {ratio}");
        assert!(ratio <= last);
        last = ratio;
        assert_eq!(rep.pass, s >= 16.0);
    }
    assert!((last - 1.0).abs() < 1e-12);
}

#[test]
fn global_bound_flat_limit() {
    // K = 0: the bound degenerates to 0 and the window sup decays like 2(n−p)/S
    let mut prev = f64::INFINITY;
    for s in [8.0, 32.0, 128.0] {
        let rep = global_bound_check(&euclid(3), 1.5, s).unwrap();
        assert_eq!(rep.rhs, 0.0);
        assert!((rep.lhs - 3.0 / s).abs() < 1e-6, "{}", rep.lhs);
        assert!(rep.lhs < prev);
        prev = rep.lhs;
    }
}

#[test]
fn barrier_bounds() {
    let b = boundary_barrier(3, 1.5, 1.0, 0.0).unwrap();
    assert!((b.bound - 16.0 / 7.0).abs() < 1e-12);
    assert!((b.slope() - 12.0 / 7.0).abs() < 1e-10);
    assert!(b.holds);
    let b2 = boundary_barrier(3, 1.5, 2.0, 0.0).unwrap();
    assert_eq!(b2.sharpened_bound(), 1.0);
    for (n, p, r, kappa) in [(3, 1.5, 1.0, 0.0), (4, 2.5, 0.7, 0.3), (2, 1.2, 3.0, 1.0)] {
        let b = boundary_barrier(n, p, r, kappa).unwrap();
        assert!((b.phi(r) - 1.0).abs() < 1e-14);
        assert!(b.phi(2.0 * r).abs() < 1e-10);
        assert!(b.holds);
    }
    assert!(boundary_barrier(3, 3.0, 1.0, 0.0).is_err());
    assert!(boundary_barrier(3, 3.5, 1.0, 0.0).is_err());
}

#[test]
fn boundary_mean_curvatures() {
    let bd = BoundaryData::sphere(&euclid(3), 2.0).unwrap();
    assert!((bd.h_plus - 1.0).abs() < 1e-14);
    let cigar = builtin_metric(MetricName::Cigar, 2).unwrap();
    let bd = BoundaryData::sphere(&cigar, 1.0).unwrap();
    assert!((bd.mean_curvature - 2.0 / 2f64.sinh()).abs() < 1e-14);
    assert!((bd.mean_curvature - 0.5524).abs() < 2e-3);
}

#[test]
fn boundary_zero_field_passes() {
    let m = euclid(3);
    let mesh = Mesh1d::spanning(Geom1d::Radial(m), 2.0, 4.0, 0.05).unwrap();
    let u = ScalarField::sample_mesh(mesh, 1.5, |_| 0.0);
    let bd = BoundaryData::sphere(&m, 2.0).unwrap();
    for p in [1.05, 1.5, 2.5] {
        let rep = boundary_estimate_check(&u, &bd, p, 0.01).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert!(rep.pass);
        assert!((rep.rhs - 1.01).abs() < 1e-14);
    }
    let off = BoundaryData::sphere(&m, 1.0).unwrap();
    assert!(boundary_estimate_check(&u, &off, 1.5, 0.01).is_err());
}

#[test]
fn boundary_gradient_matches_radial_oracle() {
    // v = 1 at R1, ≈ 0 at R2: |∇u|(R1) = (n−p)/(R1(1 − (R1/R2)^k)), k = (n−p)/(p−1)
    let m = euclid(3);
    let (r1, r2) = (2.0f64, 4.0f64);
    for p in [1.2, 1.5, 2.0] {
        let k = (3.0 - p) / (p - 1.0);
        let rho = (r1 / r2).powf(k);
        let exact_b = |s: f64| (s.powf(-k) - r2.powf(-k)) / (r1.powf(-k) - r2.powf(-k));
        let tiny = exact_b(r2 - 1e-9).max(1e-300);
        let sol = radial_p_harmonic(&m, p, r1, r2, 1.0, tiny, 1e-3).unwrap();
        let u = log_transform(&sol.field, p).unwrap();
        let rep = boundary_estimate_check(&u, &BoundaryData::sphere(&m, r1).unwrap(), p, 0.01).unwrap();
        let oracle = (3.0 - p) / (r1 * (1.0 - rho));
        assert!((rep.lhs - oracle).abs() < 1e-3 * oracle, "p = {p}: {} vs {oracle}", rep.lhs);
    }
}

#[test]
fn empirical_p0_decreases_with_eps() {
    let m = euclid(3);
    let ps: Vec<f64> = (0..39).map(|i| 2.95 - 0.05 * i as f64).collect();
    let mut last = f64::INFINITY;
    for eps in [0.5, 0.1, 0.01] {
        let sweep = empirical_p0(&m, 2.0, 4.0, 1e-8, &ps, eps, 1e-3).unwrap();
        let p0 = sweep.p0.expect("some p passes");
        println!("eps = {eps}: p0 = {p0}");
        assert!(p0 <= last);
        last = p0;
        for rep in sweep.reports.iter().filter(|r| r.get("p").unwrap() <= p0) {
            assert!(rep.lhs <= rep.rhs, "{rep:?}");
        }
    }
}
