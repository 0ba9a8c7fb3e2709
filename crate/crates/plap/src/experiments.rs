//! Subcommand runners and the shared problem setups.

use crate::bundle::{ContinuationSummary, Report, ReportBundle};
use crate::config::{Command, ExperimentConfig, InitialData};
use plap_core::elliptic::{radial_p_harmonic, solve_p_laplace_grid, DirichletProblem, Domain2d, SolverConfig};
use plap_core::entropy::{entropy_series, weight_mass, Domain};
use plap_core::field::{Geom1d, Mesh1d};
use plap_core::geometry::{builtin_metric, MetricName};
use plap_core::imcf::{moser_scheme, properness_diagnostics, MoserConfig, OuterMode};
use plap_core::parabolic::*;
use plap_core::{Error, EstimateReport, Result, ScalarField, WarpedMetric};
use std::time::Instant;

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

/// Run the configured command. Numeric failures end up in `bundle.error`.
pub fn run(cfg: &ExperimentConfig) -> ReportBundle {
    let start = Instant::now();
    let mut b = ReportBundle::new(cfg);
    let res = match cfg.command {
        Some(Command::SolveElliptic) => solve_elliptic(cfg, &mut b),
        Some(Command::Imcf) => imcf(cfg, &mut b),
        Some(Command::Parabolic) => parabolic(cfg, &mut b),
        Some(Command::Entropy) => entropy(cfg, &mut b),
        Some(Command::Identities) => identities(cfg, &mut b),
        Some(Command::Verify) => {
            crate::verify::run_suite(cfg, &mut b);
            Ok(())
        }
        None => Err(invalid("no command given")),
    };
    if let Err(e) = res {
        b.fail(e.to_string());
    }
    b.manifest.wall_time_s = start.elapsed().as_secs_f64();
    b
}

pub fn metric(name: MetricName, n: usize) -> Result<WarpedMetric> {
    builtin_metric(name, n)
}

/// Symmetric line [−L, L] for n = 1, radial [0, L] otherwise.
pub fn flat_mesh(n: usize, l: f64, h: f64) -> Result<Mesh1d> {
    if n == 1 {
        Mesh1d::spanning(Geom1d::Line, -l, l, h)
    } else {
        Mesh1d::spanning(Geom1d::Radial(metric(MetricName::Euclidean, n)?), 0.0, l, h)
    }
}

/// The fundamental solution minus a Gaussian bump, shifted back to unit mass.
pub fn perturbed_fundamental(m: &Mesh1d, p: f64, t: f64) -> Result<ScalarField> {
    let n = m.dim();
    let mut vals = Vec::with_capacity(m.len());
    for x in m.xs() {
        vals.push(fundamental_u(x, t, p, n)? - 0.5 * (-2.0 * (x - 0.7) * (x - 0.7)).exp());
    }
    let f = ScalarField::on_mesh(m.clone(), vals, p)?;
    let w: Vec<f64> = f.values.iter().map(|u| (-u).exp()).collect();
    let mass = weight_mass(m, &w, Domain::Truncated)?.value;
    Ok(f.map(|u| u + mass.ln()))
}

pub fn sample(m: &Mesh1d, p: f64, f: impl Fn(f64) -> Result<f64>) -> Result<ScalarField> {
    let vals = m.xs().into_iter().map(f).collect::<Result<Vec<f64>>>()?;
    ScalarField::on_mesh(m.clone(), vals, p)
}

// ---------- solve-elliptic ----------

/// Radial p-harmonic function of the plane, positive for r > 0.2.
fn planar_radial(p: f64, r: f64) -> f64 {
    if p == 2.0 {
        2.0 + r.ln()
    } else {
        r.powf((p - 2.0) / (p - 1.0))
    }
}

/// Max relative error of the grid solution on an annulus against the radial quadrature oracle.
pub fn annulus_error(p: f64, h: f64, r_in: f64, r_out: f64) -> Result<f64> {
    if !(r_in > 0.2 && r_out > r_in) {
        return Err(invalid(format!("annulus radii {r_in}, {r_out}")));
    }
    let g = move |r: f64| planar_radial(p, r.max(0.5 * r_in));
    let e2 = metric(MetricName::Euclidean, 2)?;
    let ho = 1e-4;
    let oracle = radial_p_harmonic(&e2, p, r_in, r_out, g(r_in), g(r_out), ho)?;
    let mesh = oracle.field.mesh().expect("radial mesh").clone();
    let interp = |r: f64| -> f64 {
        if r <= r_in || r >= r_out {
            return g(r);
        }
        let s = (r - r_in) / mesh.h;
        let i = (s.floor() as usize).min(mesh.len() - 2);
        let w = s - i as f64;
        (1.0 - w) * oracle.field.values[i] + w * oracle.field.values[i + 1]
    };
    let prob = DirichletProblem {
        domain: Domain2d::Annulus { cx: 0.0, cy: 0.0, r_in, r_out },
        h,
        p,
        boundary: Box::new(move |x: f64, y: f64| g((x * x + y * y).sqrt())),
        solver: SolverConfig::default(),
    };
    let sol = solve_p_laplace_grid(&prob)?;
    let grid = sol.field.grid().expect("grid solution");
    let mut err: f64 = 0.0;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let k = grid.idx(i, j);
            if grid.active[k] {
                let (x, y) = grid.point(i, j);
                let e = interp((x * x + y * y).sqrt());
                err = err.max((sol.field.values[k] - e).abs() / e.abs());
            }
        }
    }
    if !err.is_finite() {
        return Err(Error::NonConvergence(format!("annulus solve at p = {p}, h = {h}")));
    }
    Ok(err)
}

/// Errors at h, h/2, h/4... and the observed order between the coarsest and finest level.
pub fn refinement_study(p: f64, h_fine: f64, levels: usize, r_in: f64, r_out: f64) -> Result<(Vec<f64>, f64)> {
    let hs: Vec<f64> = (0..levels).rev().map(|k| h_fine * (1u32 << k) as f64).collect();
    let errs = hs.iter().map(|&h| annulus_error(p, h, r_in, r_out)).collect::<Result<Vec<f64>>>()?;
    let order = (errs[0] / errs[levels - 1]).log2() / (levels - 1) as f64;
    Ok((errs, order))
}

fn solve_elliptic(cfg: &ExperimentConfig, b: &mut ReportBundle) -> Result<()> {
    let ps = if cfg.p.is_empty() { vec![1.2, 1.5, 3.0] } else { cfg.p.clone() };
    let h = cfg.grid_h.unwrap_or(1.0 / 64.0);
    let (r_in, r_out) = match cfg.grid_extent.as_slice() {
        [] => (0.5, 1.0),
        [a, b] => (*a, *b),
        e => return Err(invalid(format!("grid.extent needs r_in, r_out; got {e:?}"))),
    };
    let tol = cfg.tol_or("rel", 0.02);
    for p in ps {
        let (errs, order) = refinement_study(p, h, 3, r_in, r_out)?;
        let last = *errs.last().unwrap();
        b.push(Report::Estimate(
            EstimateReport::new("radial-oracle", last, tol, 0.0, vec![])
                .param("p", p)
                .param("h", h)
                .param("err_4h", errs[0])
                .param("err_2h", errs[1]),
        ));
        b.push(Report::Estimate(
            EstimateReport::new("refinement-order", cfg.tol_or("order", 1.0), order, 0.0, vec![]).param("p", p),
        ));
    }
    Ok(())
}

// ---------- imcf ----------

fn imcf(cfg: &ExperimentConfig, b: &mut ReportBundle) -> Result<()> {
    let name = cfg.metric.unwrap_or(MetricName::Euclidean);
    let n = cfg.n.unwrap_or(3);
    let m = metric(name, n)?;
    let ps = if cfg.p.is_empty() { vec![1.5, 1.3, 1.2, 1.1, 1.05] } else { cfg.p.clone() };
    let (s0, s_work, r_out) = match cfg.grid_extent.as_slice() {
        [] => (1.0, 4.0, 8.0),
        [a, w, r] => (*a, *w, *r),
        e => return Err(invalid(format!("grid.extent needs s0, s_work, r_out; got {e:?}"))),
    };
    let mcfg = MoserConfig {
        s0,
        s_work,
        r_out: vec![r_out],
        h: cfg.grid_h.unwrap_or(1.0 / 128.0),
        mode: OuterMode::Tail,
        blowup: 10.0,
    };
    let run = moser_scheme(&m, &ps, &mcfg)?;
    let properness = properness_diagnostics(&run, &m, ps[0]).ok();
    b.push(Report::Continuation(ContinuationSummary {
        metric: name.tag(),
        n,
        rows: run.log.clone(),
        continuation_error: run.continuation_error,
        properness,
    }));
    if name == MetricName::Euclidean {
        let mesh = run.limit.mesh().expect("radial mesh");
        let nf = n as f64;
        let scale = run.limit.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let err = (0..mesh.len())
            .map(|i| (run.limit.values[i] - (nf - 1.0) * (mesh.x(i) / s0).ln()).abs())
            .fold(0.0, f64::max);
        b.push(Report::Estimate(
            EstimateReport::new("imcf-limit", err / scale, cfg.tol_or("limit", 0.05), 0.0, vec![]).param("n", nf),
        ));
        for (k, &p) in ps.iter().enumerate() {
            let u = &run.solutions[k];
            let e = (0..mesh.len()).map(|i| (u.values[i] - (nf - p) * (mesh.x(i) / s0).ln()).abs()).fold(0.0, f64::max);
            b.push(Report::Estimate(
                EstimateReport::new("p-solution", e, 0.0, cfg.tol_or("per_p", 1e-6), vec![]).param("p", p),
            ));
        }
    }
    Ok(())
}

// ---------- parabolic ----------

pub fn initial_field(kind: EquationKind, data: InitialData, m: &Mesh1d, p: f64, t0: f64) -> Result<ScalarField> {
    let n = m.dim();
    match (kind, data) {
        (EquationKind::A, InitialData::Barenblatt) => sample(m, p, |x| barenblatt(x.abs(), t0, p, n)),
        (EquationKind::APressure, InitialData::Barenblatt) => sample(m, p, |x| barenblatt_pressure(x.abs(), t0, p, n)),
        (EquationKind::A, InitialData::Gaussian) => sample(m, p, |x| Ok((-x * x / (4.0 * t0)).exp())),
        (EquationKind::B | EquationKind::BReg, InitialData::Fundamental) => sample(m, p, |x| fundamental_u(x.abs(), t0, p, n)),
        (EquationKind::B | EquationKind::BReg, InitialData::Perturbed) => perturbed_fundamental(m, p, t0),
        _ => Err(invalid(format!("{} data does not fit equation {}", data.tag(), kind.tag()))),
    }
}

fn parabolic(cfg: &ExperimentConfig, b: &mut ReportBundle) -> Result<()> {
    let kind = cfg.equation.unwrap_or(EquationKind::B);
    let exact_default = match kind {
        EquationKind::A | EquationKind::APressure => InitialData::Barenblatt,
        _ => InitialData::Fundamental,
    };
    let data = cfg.data.unwrap_or(exact_default);
    let p = cfg.first_p(if kind == EquationKind::A { 1.8 } else { 3.0 });
    let n = cfg.n.unwrap_or(1);
    let l = cfg.grid_extent.first().copied().unwrap_or(12.0);
    let m = flat_mesh(n, l, cfg.grid_h.unwrap_or(0.05))?;
    let t0 = cfg.time_t0.unwrap_or(1.0);
    let t1 = cfg.time_t1.unwrap_or(2.0 * t0);
    let eps = match kind {
        EquationKind::A => cfg.delta.first().or(cfg.eps.first()).copied().unwrap_or(1e-8),
        EquationKind::APressure => cfg.eps.first().copied().unwrap_or(0.1),
        EquationKind::B => cfg.eps.first().copied().unwrap_or(0.0),
        EquationKind::BReg => cfg.eps.first().copied().unwrap_or(1e-2),
    };
    let init = initial_field(kind, data, &m, p, t0)?;
    let samples = RunConfig::geometric_samples(t0, t1, cfg.time_samples.unwrap_or(6));
    let run = run_parabolic(&init, &RunConfig::new(kind, p, eps, t0, samples))?;
    let exact = matches!(data, InitialData::Barenblatt | InitialData::Fundamental) && kind != EquationKind::BReg;
    let ids = if cfg.harnack.is_empty() {
        vec![match kind {
            EquationKind::A | EquationKind::APressure => HarnackId::ParGlobal,
            EquationKind::B => HarnackId::Lyp1,
            EquationKind::BReg => HarnackId::GlobalApprox,
        }]
    } else {
        cfg.harnack.clone()
    };
    let w = l / 3.0;
    for id in ids {
        let approx = id == HarnackId::GlobalApprox;
        let opts = HarnackOptions {
            window: Some((if n == 1 { -w } else { 0.0 }, w)),
            time_origin: cfg.time_origin.unwrap_or(if exact { 0.0 } else { t0 }),
            rel_tol: cfg.tol_or("rel", if approx { 0.0 } else { 5e-2 }),
            abs_tol: cfg.tol_or("abs", if approx { 1e-3 } else { 0.0 }),
            ..Default::default()
        };
        let rep = if id == HarnackId::LocEstFin {
            localized_check(&run, cfg.alpha.unwrap_or(2.0), 0.0, l, 0.0, &opts)?
        } else {
            harnack_check(&run, id, &opts)?
        };
        b.push(Report::Harnack(rep));
    }
    Ok(())
}

// ---------- entropy ----------

fn entropy(cfg: &ExperimentConfig, b: &mut ReportBundle) -> Result<()> {
    let data = cfg.data.unwrap_or(InitialData::Fundamental);
    let p = cfg.first_p(1.5);
    let n = cfg.n.unwrap_or(1);
    let m = flat_mesh(n, cfg.grid_extent.first().copied().unwrap_or(8.0), cfg.grid_h.unwrap_or(0.05))?;
    let t0 = cfg.time_t0.unwrap_or(1.0);
    let t1 = cfg.time_t1.unwrap_or(2.0 * t0);
    let init = initial_field(EquationKind::B, data, &m, p, t0)?;
    let samples = RunConfig::geometric_samples(t0, t1, cfg.time_samples.unwrap_or(80));
    let run = run_parabolic(&init, &RunConfig::new(EquationKind::B, p, 0.0, t0, samples))?;
    let origin = cfg.time_origin.unwrap_or(if data == InitialData::Fundamental { 0.0 } else { 0.9 * t0 });
    let s = entropy_series(&run, Domain::Truncated, origin)?;
    let m0 = run.discrete_mass(0).ok_or_else(|| invalid("run has no mass"))?;
    let drift = (1..run.snapshots.len())
        .map(|k| (run.discrete_mass(k).unwrap_or(f64::NAN) - m0).abs() / (run.snapshots[k].t - t0))
        .fold(0.0, f64::max);
    b.push(Report::Estimate(EstimateReport::new("mass-drift-rate", drift, cfg.tol_or("mass", 1e-8), 0.0, vec![])));
    if data == InitialData::Fundamental {
        let wmax = s.w.iter().fold(0.0f64, |a, w| a.max(w.abs()));
        b.push(Report::Estimate(EstimateReport::new("W-zero", wmax, cfg.tol_or("w", 2e-3), 0.0, vec![])));
    } else {
        b.push(Report::Estimate(
            EstimateReport::new("W-nonincreasing", s.w_increase(), 0.0, 0.0, vec![])
                .param("concavity_defect", s.concavity_defect()),
        ));
        b.push(Report::Estimate(EstimateReport::new(
            "entropy-formula",
            s.formula_mismatch(),
            cfg.tol_or("formula", 0.05),
            0.0,
            vec![],
        )));
    }
    b.push(Report::Entropy(s));
    Ok(())
}

// ---------- identities ----------

/// Sample points (x…, t) away from the origin.
pub fn identity_points(n: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|k| {
            let mut x: Vec<f64> = (0..n).map(|i| 0.35 - 0.2 * i as f64 + 0.05 * k as f64).collect();
            x.push(0.7 + 0.1 * k as f64);
            x
        })
        .collect()
}

/// Exact-data setup for each identity.
pub fn default_setup(kind: IdentityKind) -> IdentitySetup {
    use IdentityKind::*;
    let (data, p, n) = match kind {
        BochnerElliptic => (TestData::Trig, 1.5, 2),
        Bochner2 => (TestData::Barenblatt, 1.8, 3),
        Bochner3 => (TestData::FundamentalB, 3.0, 2),
        MainEvol => (TestData::Barenblatt, 3.0, 2),
        BochnerKey => (TestData::FundamentalB, 1.5, 2),
        PtwiseV => (TestData::FundamentalB, 3.0, 3),
        PtwiseW => (TestData::FundamentalB, 1.5, 2),
    };
    IdentitySetup::new(kind, data, p, n)
}

/// Observed order of the finite-difference residual between h = 0.04 and 0.02.
pub fn fd_order(s: &IdentitySetup) -> Result<f64> {
    let pt = identity_points(s.n, 1);
    let e1 = identity_residual(s, &pt, Backend::FiniteDifference(0.04))?.max_residual;
    let e2 = identity_residual(s, &pt, Backend::FiniteDifference(0.02))?.max_residual;
    Ok((e1 / e2).log2())
}

fn identities(cfg: &ExperimentConfig, b: &mut ReportBundle) -> Result<()> {
    let kinds = if cfg.identities.is_empty() { IdentityKind::ALL.to_vec() } else { cfg.identities.clone() };
    for kind in kinds {
        let mut s = default_setup(kind);
        if let Some(&p) = cfg.p.first() {
            s.p = p;
        }
        if let Some(n) = cfg.n {
            s.n = n;
        }
        if let Some(&e) = cfg.eps.first() {
            s.eps = e;
        }
        if let Some(a) = cfg.alpha {
            s.alpha = a;
        }
        let r = identity_residual(&s, &identity_points(s.n, 5), Backend::Jet)?;
        b.push(Report::Estimate(
            EstimateReport::new(&format!("identity:{}", kind.tag()), r.max_residual, 0.0, cfg.tol_or("identity", 1e-8), vec![])
                .param("p", s.p)
                .param("n", s.n as f64),
        ));
        b.push(Report::Identity(r));
        let order = fd_order(&s)?;
        b.push(Report::Estimate(EstimateReport::new(
            &format!("fd-order:{}", kind.tag()),
            cfg.tol_or("order", 3.5),
            order,
            0.0,
            vec![],
        )));
    }
    Ok(())
}
