//! Subcommand pipelines. Each returns the files to write, the lines to print and
//! whether its checks passed; nothing here touches the file system.

use std::time::Instant;

use abpole_core::almgren::{frequency_profile, logh_derivative_check, Stencil};
use abpole_core::crack::{
    count_sign_changes, solve_limit_profile, special_angle_identity, CrackProblemSpec, LadderOptions, LimitProfile,
};
use abpole_core::eigen::{solve_assembly, EigenOptions};
use abpole_core::fe::FeOrder;
use abpole_core::gauge::{assemble, TransmissionMode, WeightField};
use abpole_core::ray::{
    build_pole_mesh, build_reference_mesh, reference_solution, run_ray, verify_theorem, CutKind, ModeOracle,
    ModelProblem, RayMeshOptions, RayOptions, RayStudy, ReferenceSolution, TheoremReport,
};
use abpole_core::{Direction, Point};
use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use crate::config::Config;
use crate::io::{write_mesh, Cell, Csv, CRACK_HEADER, RAY_HEADER, SUMMARY_HEADER};

/// Command-line overrides shared by the subcommands.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub j: Option<u32>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<(String, String)>,
    pub lines: Vec<String>,
    pub timings: Vec<(String, f64)>,
    pub pass: bool,
}

impl Outcome {
    fn new() -> Self {
        Outcome { pass: true, ..Default::default() }
    }

    fn check(&mut self, name: &str, value: f64, threshold: f64, ok: bool) {
        self.lines.push(format!(
            "{} {name}: {} (threshold {})",
            if ok { "PASS" } else { "FAIL" },
            crate::io::fmt_float(value),
            crate::io::fmt_float(threshold)
        ));
        self.pass &= ok;
    }

    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t0 = Instant::now();
        let out = f();
        self.timings.push((stage.to_string(), t0.elapsed().as_secs_f64()));
        out
    }
}

pub fn eigen_options(cfg: &Config, ov: &Overrides) -> EigenOptions {
    EigenOptions {
        tol: cfg.eig.tol,
        max_iter: cfg.eig.max_iter,
        block: (cfg.eig.block > 0).then_some(cfg.eig.block),
        seed: ov.seed.unwrap_or(cfg.eig.seed),
    }
}

pub fn ray_options(cfg: &Config, ov: &Overrides) -> RayOptions {
    RayOptions {
        mesh: RayMeshOptions {
            h_global: cfg.mesh.h,
            origin_factor: cfg.mesh.origin_factor,
            pole_factor: cfg.mesh.pole_factor,
            reference_origin_h: cfg.mesh.reference_origin_h,
            slope: cfg.mesh.slope,
            order: if cfg.mesh.order == 1 { FeOrder::P1 } else { FeOrder::P2 },
        },
        eigen: eigen_options(cfg, ov),
        gap_tol: cfg.eig.gap_tol,
        ..Default::default()
    }
}

/// The model problem, with `--j` selecting the lowest mode of that vanishing order.
pub fn model(cfg: &Config, ov: &Overrides) -> Result<ModelProblem> {
    let n = match ov.j {
        Some(j) => (1..=32)
            .find(|&n| ModeOracle::for_index(n).is_ok_and(|o| o.m == j))
            .with_context(|| format!("no half-disk mode with vanishing order {j} among the first 32"))?,
        None => cfg.model.n,
    };
    let m = ModelProblem::half_disk(n)?;
    Ok(if cfg.model.q == 1.0 && cfg.model.q_r2 == 0.0 {
        m
    } else {
        let (q0, q2) = (cfg.model.q, cfg.model.q_r2);
        m.with_weight(WeightField::new(format!("{q0} + {q2} |x|^2"), move |x: Point| q0 + q2 * x.norm2()))
    })
}

pub fn crack_spec(cfg: &Config, direction: Direction, j: u32) -> CrackProblemSpec {
    CrackProblemSpec {
        h_near: cfg.crack.h_near,
        tip_h: cfg.crack.tip_h,
        slope: cfg.mesh.slope,
        ..CrackProblemSpec::new(direction, j)
    }
}

pub fn ladder(cfg: &Config) -> LadderOptions {
    LadderOptions {
        radii: cfg.crack.ladder.clone(),
        richardson_order: cfg.crack.richardson_order,
        ..Default::default()
    }
}

fn directions(cfg: &Config, ov: &Overrides) -> Result<Vec<Direction>> {
    let mut alphas: Vec<f64> = match ov.alpha {
        Some(a) => vec![a],
        None => cfg.ray.directions_deg.iter().map(|d| d.to_radians()).collect(),
    };
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();
    alphas.into_iter().map(|a| Ok(Direction::new(a)?)).collect()
}

pub fn mesh(cfg: &Config, ov: &Overrides) -> Result<Outcome> {
    let mut out = Outcome::new();
    let opts = ray_options(cfg, ov).mesh;
    let space = match ov.alpha {
        Some(a) => {
            let pole = Direction::new(a)?.at(cfg.ray.t0);
            out.time("mesh", || build_pole_mesh(pole, CutKind::Radial, &opts))?.0
        }
        None => out.time("mesh", || build_reference_mesh(&opts))?,
    };
    let m = space.mesh();
    out.lines.push(format!(
        "{} vertices, {} triangles, {} slit pairs, minimum angle {:.1} deg",
        m.vertices().len(),
        m.triangles().len(),
        m.slit_pairs().len(),
        m.min_angle_deg()
    ));
    out.files.push(("mesh.txt".into(), write_mesh(m)));
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Continuous,
    Antiperiodic,
}

pub fn eig(cfg: &Config, ov: &Overrides, mode: Mode, count: usize) -> Result<Outcome> {
    let mut out = Outcome::new();
    let model = model(cfg, ov)?;
    let opts = ray_options(cfg, ov);
    let asm = match mode {
        Mode::Continuous => {
            let space = out.time("mesh", || build_reference_mesh(&opts.mesh))?;
            assemble(space, None, &model.weight, TransmissionMode::Continuous)?
        }
        Mode::Antiperiodic => {
            let pole = Direction::new(ov.alpha.unwrap_or(0.0))?.at(cfg.ray.t0);
            let (space, slit) = out.time("mesh", || build_pole_mesh(pole, CutKind::Radial, &opts.mesh))?;
            assemble(space, Some(&slit), &model.weight, TransmissionMode::Antiperiodic)?
        }
    };
    let slice = out.time("eig", || solve_assembly(&asm, count, &opts.eigen))?;
    let oracle = (mode == Mode::Continuous && model.oracle.is_some())
        .then(|| (1..=count).map(|k| ModeOracle::for_index(k).map(|o| o.lambda)).collect::<Result<Vec<_>, _>>())
        .transpose()?;
    let mut csv = Csv::new(&["index", "mode", "lambda", "residual", "oracle"]);
    let mode_name = match mode {
        Mode::Continuous => "continuous",
        Mode::Antiperiodic => "antiperiodic",
    };
    for (k, p) in slice.pairs.iter().enumerate() {
        let o = oracle.as_ref().map_or(f64::NAN, |v| v[k]);
        csv.push(&[Cell::I(k as i64 + 1), Cell::S(mode_name), Cell::F(p.value), Cell::F(p.residual), Cell::F(o)]);
        out.lines.push(format!("lambda_{} = {}", k + 1, crate::io::fmt_float(p.value)));
        if let Some(v) = &oracle {
            let rel = (p.value - v[k]).abs() / v[k];
            out.check(&format!("lambda_{} vs Bessel oracle", k + 1), rel, 1e-3, rel <= 1e-3);
        }
    }
    out.files.push(("eig.csv".into(), csv.render()));
    Ok(out)
}

pub fn almgren(cfg: &Config, ov: &Overrides) -> Result<Outcome> {
    let mut out = Outcome::new();
    let model = model(cfg, ov)?;
    let opts = ray_options(cfg, ov);
    let r = out.time("reference", || reference_solution(&model, &opts.mesh, &opts.eigen, opts.gap_tol))?;
    let q = |x: Point| model.weight.eval(x);
    let radii: Vec<f64> = (1..=18).map(|k| 0.05 * k as f64).collect();
    let prof = frequency_profile(&r.field, r.lambda, &q, &radii)?;
    let mut csv = Csv::new(&["r", "H", "E", "N"]);
    for i in 0..radii.len() {
        csv.push(&[Cell::F(radii[i]), Cell::F(prof.h[i]), Cell::F(prof.e[i]), Cell::F(prof.n[i])]);
    }
    out.files.push(("almgren.csv".into(), csv.render()));
    let j = r.j() as f64;
    out.lines.push(format!("lambda = {}, j = {}, beta = {}", r.lambda, r.j(), r.beta()));
    let rel = (prof.n[0] - j).abs() / j;
    out.check("N(phi, 0.05) vs j", rel, 0.05, rel <= 0.05);
    let ladder: Vec<f64> = (0..17).map(|i| 0.3 + 0.025 * i as f64).collect();
    let res = logh_derivative_check(&r.field, r.lambda, &q, &ladder, Stencil::Fourth)?;
    out.check("log-derivative residual", res, 1e-2, res <= 1e-2);
    Ok(out)
}

fn crack_rows(csv: &mut Csv, p: &LimitProfile) {
    let alpha = p.alpha();
    for l in &p.levels {
        csv.push(&[
            Cell::F(alpha),
            Cell::I(p.j as i64),
            Cell::F(l.r_out),
            Cell::F(l.h),
            Cell::F(l.m_energy),
            Cell::F(l.m_fourier),
            Cell::F(l.dirichlet_energy),
            Cell::F(l.omega[0].1),
        ]);
    }
    let h = p.finest().h;
    csv.push(&[
        Cell::F(alpha),
        Cell::I(p.j as i64),
        Cell::F(f64::INFINITY),
        Cell::F(h),
        Cell::F(p.m_energy),
        Cell::F(p.m_fourier),
        Cell::F(p.dirichlet_energy),
        Cell::F(p.omega[0].1),
    ]);
}

fn crack_checks(out: &mut Outcome, p: &LimitProfile) {
    let tag = format!("alpha={} j={}", crate::io::fmt_float(p.alpha()), p.j);
    out.check(&format!("{tag} energy vs Fourier route"), p.route_discrepancy(), 0.02, p.route_discrepancy() <= 0.02);
    let d = p.omega_scaling_deviation();
    out.check(&format!("{tag} omega(r) r^j constancy"), d, 0.01, d <= 0.01);
    if let Some(c) = special_angle_identity(p) {
        out.check(&format!("{tag} special-angle identity ({:?})", c.kind), c.rel_err, 0.02, c.rel_err <= 0.02);
    }
    if !p.ladder_ok {
        out.lines.push(format!("WARN {tag} truncation ladder contraction {:.2} below 1.5", p.contraction));
    }
}

/// One direction with `--alpha`, otherwise the configured scan grid.
pub fn limit_profile(cfg: &Config, ov: &Overrides) -> Result<Outcome> {
    let mut out = Outcome::new();
    let j = ov.j.unwrap_or(1);
    let alphas: Vec<f64> = match ov.alpha {
        Some(a) => vec![a],
        None => cfg.crack.alpha_grid_deg.iter().map(|d| d.to_radians()).collect(),
    };
    let profiles = out.time("crack", || {
        alphas
            .par_iter()
            .map(|&a| Ok(solve_limit_profile(&crack_spec(cfg, Direction::new(a)?, j), &ladder(cfg))?))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut csv = Csv::new(CRACK_HEADER);
    for p in &profiles {
        crack_rows(&mut csv, p);
        out.lines.push(format!(
            "alpha = {}: m_p = {} (Fourier route {})",
            crate::io::fmt_float(p.alpha()),
            crate::io::fmt_float(p.m_energy),
            crate::io::fmt_float(p.m_fourier)
        ));
    }
    out.files.push(("crack.csv".into(), csv.render()));
    for p in &profiles {
        crack_checks(&mut out, p);
    }
    if profiles.len() > 1 {
        let m: Vec<f64> = profiles.iter().map(|p| p.m_energy).collect();
        out.lines.push(format!("{} sign change(s) of m_p over the scan", count_sign_changes(&m)));
    }
    Ok(out)
}

/// One direction of a sweep with its limit profile and theorem report.
pub struct SweepResult {
    pub study: RayStudy,
    pub profile: LimitProfile,
    pub report: TheoremReport,
}

pub fn sweep(
    cfg: &Config,
    ov: &Overrides,
    reference: &ReferenceSolution,
    model: &ModelProblem,
) -> Result<Vec<SweepResult>> {
    let opts = RayOptions { keep_fields: false, ..ray_options(cfg, ov) };
    let ts = cfg.ray.t_values();
    let j = reference.j();
    let dirs = directions(cfg, ov)?;
    dirs.par_iter()
        .map(|d| {
            let study = run_ray(model, reference, d, &ts, &opts)
                .with_context(|| format!("sweep along alpha = {}", d.alpha()))?;
            let profile = solve_limit_profile(&crack_spec(cfg, *d, j), &ladder(cfg))?;
            let report =
                verify_theorem(&study, &profile, cfg.verify.exponent_tol_for(j), cfg.verify.coefficient_tol_for(j))?;
            Ok(SweepResult { study, profile, report })
        })
        .collect()
}

fn sweep_tables(results: &[SweepResult]) -> (Csv, Csv) {
    let mut ray = Csv::new(RAY_HEADER);
    let mut summary = Csv::new(SUMMARY_HEADER);
    for r in results {
        let alpha = r.study.direction.alpha();
        for s in &r.study.samples {
            ray.push(&[
                Cell::F(alpha),
                Cell::F(s.t),
                Cell::F(s.lambda_a),
                Cell::F(s.lambda_ref),
                Cell::F(s.diff),
                Cell::F(s.g),
            ]);
        }
        let rep = &r.report;
        summary.push(&[
            Cell::F(alpha),
            Cell::I(rep.j as i64),
            Cell::F(rep.fitted_exponent),
            Cell::F(rep.g_star),
            Cell::F(rep.predicted),
            Cell::F(rep.rel_err),
            Cell::B(rep.sign_ok),
        ]);
    }
    (ray, summary)
}

fn report_checks(out: &mut Outcome, results: &[SweepResult], cfg: &Config) {
    for r in results {
        let rep = &r.report;
        let tag = format!("alpha={} j={}", crate::io::fmt_float(rep.alpha), rep.j);
        let etol = cfg.verify.exponent_tol_for(rep.j);
        let de = (rep.fitted_exponent - 2.0 * rep.j as f64).abs();
        out.check(&format!("{tag} fitted exponent vs 2j"), de, etol, rep.exponent_ok);
        out.check(
            &format!("{tag} g* vs -2 beta^2 m_p"),
            rep.rel_err,
            cfg.verify.coefficient_tol_for(rep.j),
            rep.coefficient_ok,
        );
        out.check(&format!("{tag} sign of lambda - lambda^a"), if rep.sign_ok { 0.0 } else { 1.0 }, 0.0, rep.sign_ok);
    }
}

pub fn ray_sweep(cfg: &Config, ov: &Overrides) -> Result<Outcome> {
    let mut out = Outcome::new();
    let model = model(cfg, ov)?;
    let opts = ray_options(cfg, ov);
    let reference = out.time("reference", || reference_solution(&model, &opts.mesh, &opts.eigen, opts.gap_tol))?;
    let results = out.time("sweep", || sweep(cfg, ov, &reference, &model))?;
    let (ray, summary) = sweep_tables(&results);
    out.files.push(("ray.csv".into(), ray.render()));
    out.files.push(("summary.csv".into(), summary.render()));
    report_checks(&mut out, &results, cfg);
    Ok(out)
}

/// Sweep, theorem checks, limit-problem identities and eigenfunction diagnostics.
pub fn verify(cfg: &Config, ov: &Overrides) -> Result<Outcome> {
    let mut out = Outcome::new();
    let model = model(cfg, ov)?;
    let opts = ray_options(cfg, ov);
    let reference = out.time("reference", || reference_solution(&model, &opts.mesh, &opts.eigen, opts.gap_tol))?;
    if let Some(o) = &model.oracle {
        let rel = (reference.lambda - o.lambda).abs() / o.lambda;
        out.check("reference lambda vs Bessel oracle", rel, 1e-3, rel <= 1e-3);
    }
    let q = |x: Point| model.weight.eval(x);
    let j = reference.j() as f64;
    let n005 = frequency_profile(&reference.field, reference.lambda, &q, &[0.05])?.n[0];
    out.check("N(phi, 0.05) vs j", (n005 - j).abs() / j, 0.05, (n005 - j).abs() <= 0.05 * j);

    let results = out.time("sweep", || sweep(cfg, ov, &reference, &model))?;
    let (ray, summary) = sweep_tables(&results);
    let mut crack = Csv::new(CRACK_HEADER);
    for r in &results {
        crack_rows(&mut crack, &r.profile);
    }
    out.files.push(("ray.csv".into(), ray.render()));
    out.files.push(("summary.csv".into(), summary.render()));
    out.files.push(("crack.csv".into(), crack.render()));
    report_checks(&mut out, &results, cfg);
    for r in &results {
        crack_checks(&mut out, &r.profile);
        for s in &r.study.samples {
            if let Some(h) = s.hardy {
                if h > 1.0 {
                    out.check(&format!("hardy ratio at t={}", s.t), h, 1.0, false);
                }
            }
            for &(rad, res) in &s.poincare {
                if res > 1e-6 {
                    out.check(&format!("poincare residual at t={} r={rad}", s.t), res, 1e-6, false);
                }
            }
        }
    }
    let worst_hardy = results.iter().flat_map(|r| r.study.samples.iter().filter_map(|s| s.hardy)).fold(0.0, f64::max);
    out.check("largest hardy ratio", worst_hardy, 1.0, worst_hardy <= 1.0);
    if results.is_empty() {
        bail!("no directions to verify");
    }
    Ok(out)
}
