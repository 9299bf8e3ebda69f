//! Sweeps of the pole along rays `a = t p` toward the boundary point at the
//! origin, and comparison of the eigenvalue shift with the limit crack problem.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use crate::almgren::{vanishing_order_and_beta, VanishingOrderFit, VanishingOrderOptions};
use crate::bessel::{bessel_j, bessel_j_prime, bessel_j_zeros};
use crate::crack::LimitProfile;
use crate::eigen::{align_sign, normalize_q, simplicity_guard, solve_assembly, EigenOptions};
use crate::error::{Error, Result};
use crate::fe::{FeOrder, FeSpace, NodeRole};
use crate::field::{AnalyticField, FeField, Field};
use crate::gauge::{assemble, hardy_ratio, poincare_check, TransmissionMode, WeightField};
use crate::geometry::{Direction, Point};
use crate::mesh::{build_half_disk_mesh, insert_slit, Grading, MeshOptions, SlitTopology};

/// Closed-form Dirichlet mode `c J_m(z r) sin(m(π/2 − t))` of the unit half-disk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeOracle {
    pub m: u32,
    pub k: usize,
    /// `z = j_{m,k}`.
    pub zero: f64,
    pub lambda: f64,
    /// `c = (π/4 · J_{m+1}(z)²)^{−1/2}`, the `L²`-normalization.
    pub norm_const: f64,
    /// `β = c (z/2)^m / m!`.
    pub beta: f64,
}

impl ModeOracle {
    /// The `n`-th (1-based) Dirichlet eigenvalue of the unit half-disk.
    pub fn for_index(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("eigenvalue index is 1-based"));
        }
        let mut all: Vec<(f64, u32, usize)> = Vec::new();
        for m in 1..=(n as u32 + 1) {
            for (k, z) in bessel_j_zeros(m, n).into_iter().enumerate() {
                all.push((z, m, k + 1));
            }
        }
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (zero, m, k) = all[n - 1];
        if (all[n].0 - zero).abs() < 1e-9 * zero || (n >= 2 && (zero - all[n - 2].0).abs() < 1e-9 * zero) {
            return Err(Error::NotSimple { index: n, gap: 0.0, tol: 1e-9 });
        }
        let jm1 = bessel_j(m + 1, zero);
        let norm_const = 1.0 / libm::sqrt(PI / 4.0 * jm1 * jm1);
        let mut fact = 1.0;
        for i in 2..=m {
            fact *= i as f64;
        }
        Ok(ModeOracle {
            m,
            k,
            zero,
            lambda: zero * zero,
            norm_const,
            beta: norm_const * libm::pow(zero / 2.0, m as f64) / fact,
        })
    }

    pub fn field(&self) -> AnalyticField {
        let o = *self;
        let mf = o.m as f64;
        AnalyticField::new(
            1.0,
            move |x: Point| {
                let r = x.norm();
                o.norm_const * bessel_j(o.m, o.zero * r) * libm::sin(mf * (FRAC_PI_2 - x.angle()))
            },
            move |x: Point| {
                let r = x.norm();
                if r == 0.0 {
                    return if o.m == 1 { Point::new(o.beta, 0.0) } else { Point::ORIGIN };
                }
                let t = x.angle();
                let (s, c) = (libm::sin(mf * (FRAC_PI_2 - t)), libm::cos(mf * (FRAC_PI_2 - t)));
                let dr = o.norm_const * o.zero * bessel_j_prime(o.m, o.zero * r) * s;
                let dt = -o.norm_const * mf * bessel_j(o.m, o.zero * r) / r * c;
                let (ct, st) = (libm::cos(t), libm::sin(t));
                Point::new(dr * ct - dt * st, dr * st + dt * ct)
            },
        )
    }
}

/// The unperturbed problem on the unit half-disk: index `N` and weight `q`.
#[derive(Clone, Debug)]
pub struct ModelProblem {
    pub index: usize,
    pub weight: WeightField,
    /// Present when `q ≡ 1`.
    pub oracle: Option<ModeOracle>,
}

impl ModelProblem {
    pub fn half_disk(index: usize) -> Result<Self> {
        Ok(ModelProblem { index, weight: WeightField::default(), oracle: Some(ModeOracle::for_index(index)?) })
    }

    /// Replaces the weight; the closed-form oracle no longer applies.
    pub fn with_weight(mut self, weight: WeightField) -> Self {
        self.weight = weight;
        self.oracle = None;
        self
    }
}

/// Mesh parameters for the unperturbed and the pole problems.
#[derive(Clone, Debug, PartialEq)]
pub struct RayMeshOptions {
    pub h_global: f64,
    /// Element size at the origin is `origin_factor · t` (or `reference_origin_h` without a pole).
    pub origin_factor: f64,
    /// Element size at the pole is `pole_factor · t`.
    pub pole_factor: f64,
    pub reference_origin_h: f64,
    pub slope: f64,
    pub order: FeOrder,
}

impl Default for RayMeshOptions {
    fn default() -> Self {
        RayMeshOptions {
            h_global: 0.05,
            origin_factor: 1.0 / 20.0,
            pole_factor: 1.0 / 200.0,
            reference_origin_h: 0.005,
            slope: 0.2,
            order: FeOrder::P2,
        }
    }
}

/// How the cut leaves the pole.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutKind {
    /// Along the ray direction to the arc.
    Radial,
    /// Straight up (`+x₂`) to the arc.
    Vertical,
}

/// Slit mesh with the pole at `a` and a cut from `a` to the arc.
pub fn build_pole_mesh(a: Point, cut: CutKind, opts: &RayMeshOptions) -> Result<(Arc<FeSpace>, SlitTopology)> {
    let t = a.norm();
    if !(a.x > 0.0 && t < 1.0) {
        return Err(Error::invalid(alloc::format!("pole ({}, {}) must lie inside the half-disk", a.x, a.y)));
    }
    let end = match cut {
        CutKind::Radial => {
            let p = (1.0 / t) * a;
            a + Direction::new(libm::atan2(p.y, p.x))?.exit_distance(a, 1.0) * p
        }
        CutKind::Vertical => Point::new(a.x, libm::sqrt(1.0 - a.x * a.x)),
    };
    let cap = 0.5 * opts.h_global;
    let mesh_opts = MeshOptions { slope: opts.slope, ..MeshOptions::new(1.0, opts.h_global) }
        .with_grading(Grading::new(Point::ORIGIN, (opts.origin_factor * t).min(cap), 0.0))
        .with_grading(Grading::new(a, (opts.pole_factor * t).min(cap), 0.0))
        .with_constraint(alloc::vec![a, end]);
    let mesh = build_half_disk_mesh(&mesh_opts)?;
    let (mesh, slit) = insert_slit(&mesh, &[a, end])?;
    Ok((Arc::new(FeSpace::new(mesh, opts.order)), slit))
}

/// Unslit mesh of the unit half-disk, graded at the origin.
pub fn build_reference_mesh(opts: &RayMeshOptions) -> Result<Arc<FeSpace>> {
    let mesh_opts = MeshOptions { slope: opts.slope, ..MeshOptions::new(1.0, opts.h_global) }
        .with_grading(Grading::new(Point::ORIGIN, opts.reference_origin_h, 0.0));
    Ok(Arc::new(FeSpace::new(build_half_disk_mesh(&mesh_opts)?, opts.order)))
}

/// The unperturbed eigenpair `(λ_N, φ_N)` and its behaviour at the origin.
#[derive(Clone, Debug)]
pub struct ReferenceSolution {
    pub lambda: f64,
    pub values: Vec<f64>,
    pub field: FeField,
    pub fit: VanishingOrderFit,
    pub gap: f64,
    pub residual: f64,
}

impl ReferenceSolution {
    pub fn j(&self) -> u32 {
        self.fit.j
    }

    pub fn beta(&self) -> f64 {
        self.fit.beta
    }
}

/// Relative tolerances for agreement of the reference with the oracle.
pub const ORACLE_LAMBDA_TOL: f64 = 1e-3;
pub const ORACLE_BETA_TOL: f64 = 5e-2;

/// Solves the unperturbed problem and extracts `j` and `β`. With an oracle the
/// sign is fixed by it and the results are cross-checked.
pub fn reference_solution(
    model: &ModelProblem,
    opts: &RayMeshOptions,
    eig: &EigenOptions,
    gap_tol: f64,
) -> Result<ReferenceSolution> {
    let space = build_reference_mesh(opts)?;
    let asm = assemble(space.clone(), None, &model.weight, TransmissionMode::Continuous)?;
    let slice = solve_assembly(&asm, model.index + 1, eig)?;
    let gap = simplicity_guard(&slice, model.index, gap_tol)?;
    let mut pair = normalize_q(slice.pairs[model.index - 1].clone(), &asm.mass)?;
    if let Some(o) = &model.oracle {
        let f = o.field();
        let coords = asm.dof_coords();
        let reference: Vec<f64> = coords.iter().map(|&x| f.value(x).unwrap_or(0.0)).collect();
        pair = align_sign(pair, &reference, &asm.mass)?.pair;
    }
    let values = asm.expand(&pair.vector);
    let field = FeField::new(space, values.clone());
    let fit = vanishing_order_and_beta(&field, None, &VanishingOrderOptions::default())?;
    if model.oracle.is_none() && fit.beta < 0.0 {
        // without an oracle the sign is fixed by β > 0
        return reference_with_flipped_sign(pair.value, values, field, fit, gap, pair.residual);
    }
    if let Some(o) = &model.oracle {
        let dl = (pair.value - o.lambda).abs() / o.lambda;
        if dl > ORACLE_LAMBDA_TOL {
            return Err(Error::OracleMismatch(alloc::format!(
                "lambda_{} = {} vs {} (relative error {dl:e})",
                model.index,
                pair.value,
                o.lambda
            )));
        }
        if fit.j != o.m {
            return Err(Error::OracleMismatch(alloc::format!("vanishing order {} vs {}", fit.j, o.m)));
        }
        let db = (fit.beta - o.beta).abs() / o.beta;
        if db > ORACLE_BETA_TOL {
            return Err(Error::OracleMismatch(alloc::format!(
                "beta = {} vs {} (relative error {db:e})",
                fit.beta,
                o.beta
            )));
        }
    }
    Ok(ReferenceSolution { lambda: pair.value, values, field, fit, gap, residual: pair.residual })
}

fn reference_with_flipped_sign(
    lambda: f64,
    values: Vec<f64>,
    field: FeField,
    mut fit: VanishingOrderFit,
    gap: f64,
    residual: f64,
) -> Result<ReferenceSolution> {
    fit.beta = -fit.beta;
    Ok(ReferenceSolution {
        lambda,
        values: values.iter().map(|v| -v).collect(),
        field: field.scaled(-1.0),
        fit,
        gap,
        residual,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RayOptions {
    pub mesh: RayMeshOptions,
    pub eigen: EigenOptions,
    pub gap_tol: f64,
    /// Radii of the Poincaré check on each pole eigenfunction.
    pub poincare_radii: Vec<f64>,
    pub keep_fields: bool,
    pub diagnostics: bool,
}

impl Default for RayOptions {
    fn default() -> Self {
        RayOptions {
            mesh: RayMeshOptions::default(),
            eigen: EigenOptions::default(),
            gap_tol: 0.05,
            poincare_radii: alloc::vec![0.25, 0.5, 0.9],
            keep_fields: false,
            diagnostics: true,
        }
    }
}

/// Default pole distances `0.2 · 0.7^k`, `k = 0..7`.
pub fn default_t_values() -> Vec<f64> {
    (0..8).map(|k| 0.2 * libm::pow(0.7, k as f64)).collect()
}

/// One pole position.
#[derive(Clone, Debug)]
pub struct RaySample {
    pub t: f64,
    /// Tracked antiperiodic eigenvalue `λ_N^a`.
    pub lambda_a: f64,
    /// `λ_N` on the same mesh with the cut glued back.
    pub lambda_ref: f64,
    /// `λ_N − λ_N^a`.
    pub diff: f64,
    /// `diff / t^{2j}`.
    pub g: f64,
    /// 0-based position of the tracked value in the antiperiodic spectrum.
    pub tracked_index: usize,
    pub overlap: f64,
    pub gap: f64,
    pub residual: f64,
    pub dofs: usize,
    /// Element size requested at the pole.
    pub pole_h: f64,
    pub hardy: Option<f64>,
    pub poincare: Vec<(f64, f64)>,
    /// `M`-normalized, sign-aligned pole eigenfunction.
    pub field: Option<FeField>,
}

impl RaySample {
    pub fn pole(&self, direction: &Direction) -> Point {
        direction.at(self.t)
    }
}

/// `σ = +1` left of the line through the pole along `p` (and on plus slit nodes), `−1` right of it.
fn side_sign(space: &FeSpace, slit: &SlitTopology, p: Point, a: Point) -> Vec<f64> {
    let mut s: Vec<f64> = space.nodes().iter().map(|&x| if p.cross(x - a) >= 0.0 { 1.0 } else { -1.0 }).collect();
    for (plus, minus) in space.slit_node_pairs(slit) {
        s[plus] = 1.0;
        s[minus] = -1.0;
    }
    s
}

/// Antiperiodic and continuous eigenpairs on one slit mesh with the pole at `a = t p`.
pub fn ray_sample(model: &ModelProblem, j: u32, direction: &Direction, t: f64, opts: &RayOptions) -> Result<RaySample> {
    let a = direction.at(t);
    let (space, slit) = build_pole_mesh(a, CutKind::Radial, &opts.mesh)?;
    let n = model.index;
    let cont = assemble(space.clone(), Some(&slit), &model.weight, TransmissionMode::Continuous)?;
    let cont_slice = solve_assembly(&cont, n + 1, &opts.eigen)?;
    simplicity_guard(&cont_slice, n, opts.gap_tol)?;
    let u_ref = cont.expand(&cont_slice.pairs[n - 1].vector);

    let anti = assemble(space.clone(), Some(&slit), &model.weight, TransmissionMode::Antiperiodic)?;
    let anti_slice = solve_assembly(&anti, n + 1, &opts.eigen)?;

    let sigma = side_sign(&space, &slit, direction.unit(), a);
    let mut reference = alloc::vec![0.0; anti.num_dofs()];
    let mut seen = alloc::vec![false; anti.num_dofs()];
    for (node, role) in anti.map.roles().iter().enumerate() {
        if let NodeRole::Dof { dof, sign, .. } = *role {
            if !seen[dof] {
                seen[dof] = true;
                reference[dof] = sign * sigma[node] * u_ref[node];
            }
        }
    }
    let mut best = (0usize, -1.0f64);
    for (i, pair) in anti_slice.pairs.iter().enumerate().take(n + 1) {
        let pn = normalize_q(pair.clone(), &anti.mass)?;
        let ov = align_sign(pn, &reference, &anti.mass)?.overlap;
        if ov > best.1 {
            best = (i, ov);
        }
    }
    let tracked = best.0;
    if tracked >= n {
        return Err(Error::NotSimple { index: n, gap: 0.0, tol: opts.gap_tol });
    }
    let gap = simplicity_guard(&anti_slice, tracked + 1, opts.gap_tol)?;
    let pn = normalize_q(anti_slice.pairs[tracked].clone(), &anti.mass)?;
    let rr = libm::sqrt(anti.mass.bilinear(&reference, &reference));
    let aligned = align_sign(pn, &reference, &anti.mass)?;
    let lambda_a = aligned.pair.value;
    let lambda_ref = cont_slice.pairs[n - 1].value;
    let diff = lambda_ref - lambda_a;
    let values = anti.expand(&aligned.pair.vector);

    let (hardy, poincare) = if opts.diagnostics {
        let field = FeField::new(space.clone(), values.clone());
        let mut pc = Vec::new();
        for &r in &opts.poincare_radii {
            pc.push((r, poincare_check(&field, r)?));
        }
        (Some(hardy_ratio(&space, &values, a)?), pc)
    } else {
        (None, Vec::new())
    };

    Ok(RaySample {
        t,
        lambda_a,
        lambda_ref,
        diff,
        g: diff / libm::pow(t, 2.0 * j as f64),
        tracked_index: tracked,
        overlap: aligned.overlap / rr,
        gap,
        residual: aligned.pair.residual.max(cont_slice.pairs[n - 1].residual),
        dofs: anti.num_dofs(),
        pole_h: (opts.mesh.pole_factor * t).min(0.5 * opts.mesh.h_global),
        hardy,
        poincare,
        field: opts.keep_fields.then(|| FeField::new(space, values)),
    })
}

/// `λ` values of the antiperiodic problem with the pole at `a` and the given cut.
pub fn pole_eigenvalues(
    model: &ModelProblem,
    a: Point,
    cut: CutKind,
    count: usize,
    opts: &RayOptions,
) -> Result<Vec<f64>> {
    let (space, slit) = build_pole_mesh(a, cut, &opts.mesh)?;
    let anti = assemble(space, Some(&slit), &model.weight, TransmissionMode::Antiperiodic)?;
    Ok(solve_assembly(&anti, count, &opts.eigen)?.values())
}

/// Least-squares power law `y ≈ C t^e`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub coefficient: f64,
    /// Half-width of an approximate 95% interval for the exponent.
    pub half_width: f64,
    pub samples: usize,
}

/// Fits `y ≈ C t^e` on `log|y|` against `log t`, ignoring `|y| ≤ noise_floor`.
/// Needs five or more samples of one sign.
pub fn fit_power_law(t: &[f64], y: &[f64], noise_floor: f64) -> Result<PowerLawFit> {
    if t.len() != y.len() {
        return Err(Error::invalid("t and y lengths differ"));
    }
    let kept: Vec<(f64, f64)> = t.iter().zip(y).filter(|(_, v)| v.abs() > noise_floor).map(|(&a, &b)| (a, b)).collect();
    if kept.len() < 5 {
        return Err(Error::Fit(alloc::format!("{} samples above the noise floor, need at least 5", kept.len())));
    }
    if kept.iter().any(|&(tt, _)| !(tt > 0.0)) {
        return Err(Error::Fit("t values must be positive".into()));
    }
    let sign = kept[0].1.signum();
    if kept.iter().any(|&(_, v)| v.signum() != sign) {
        return Err(Error::Fit("samples change sign".into()));
    }
    let x: Vec<f64> = kept.iter().map(|p| libm::log(p.0)).collect();
    let l: Vec<f64> = kept.iter().map(|p| libm::log(p.1.abs())).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let ml = l.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("t values are all equal".into()));
    }
    let sxl: f64 = x.iter().zip(&l).map(|(a, b)| (a - mx) * (b - ml)).sum();
    let slope = sxl / sxx;
    let intercept = ml - slope * mx;
    let sse: f64 = x.iter().zip(&l).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let se = libm::sqrt(sse / (n - 2.0) / sxx);
    Ok(PowerLawFit {
        exponent: slope,
        coefficient: sign * libm::exp(intercept),
        half_width: 2.0 * se,
        samples: kept.len(),
    })
}

/// `g(t) → g*` assuming `g(t) = g* + c t^order`, from the two smallest `t`.
pub fn extrapolate_in_t(t: &[f64], g: &[f64], order: f64) -> Result<f64> {
    let mut idx: Vec<usize> = (0..t.len()).collect();
    idx.sort_by(|&a, &b| t[a].total_cmp(&t[b]));
    match idx.as_slice() {
        [] => Err(Error::invalid("no samples to extrapolate")),
        [i] => Ok(g[*i]),
        [i0, i1, ..] => {
            let rho = libm::pow(t[*i0] / t[*i1], order);
            Ok((g[*i0] - rho * g[*i1]) / (1.0 - rho))
        }
    }
}

/// A full sweep along one direction.
#[derive(Clone, Debug)]
pub struct RayStudy {
    pub direction: Direction,
    pub index: usize,
    pub j: u32,
    pub beta: f64,
    pub lambda_unperturbed: f64,
    pub samples: Vec<RaySample>,
    pub fit: Option<PowerLawFit>,
    pub fit_error: Option<String>,
    /// Extrapolated `lim g(t)`.
    pub g_star: f64,
    pub extrapolation_order: f64,
}

impl RayStudy {
    pub fn t(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn diffs(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.diff).collect()
    }
}

/// Order of the correction `g(t) = g* + c t^order` used for extrapolation.
pub const DEFAULT_EXTRAPOLATION_ORDER: f64 = 2.0;

/// Largest admissible ratio `t_{k+1}/t_k`.
pub const MAX_T_RATIO: f64 = 0.75;

/// Runs [`ray_sample`] for each `t` and fits the rate and the coefficient.
pub fn run_ray(
    model: &ModelProblem,
    reference: &ReferenceSolution,
    direction: &Direction,
    ts: &[f64],
    opts: &RayOptions,
) -> Result<RayStudy> {
    if ts.is_empty() || ts.iter().any(|&t| !(t > 0.0 && t <= 0.3)) {
        return Err(Error::invalid("pole distances must lie in (0, 0.3]"));
    }
    if ts.windows(2).any(|w| !(w[1] <= MAX_T_RATIO * w[0])) {
        return Err(Error::invalid(alloc::format!(
            "pole distances must decrease by a factor of at most {MAX_T_RATIO}"
        )));
    }
    let j = reference.j();
    let mut samples = Vec::with_capacity(ts.len());
    for &t in ts {
        samples.push(ray_sample(model, j, direction, t, opts)?);
    }
    let tv: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let dv: Vec<f64> = samples.iter().map(|s| s.diff).collect();
    let gv: Vec<f64> = samples.iter().map(|s| s.g).collect();
    // differences below ten residual-sized eigenvalue errors are noise
    let noise = samples.iter().map(|s| 10.0 * s.residual * s.lambda_ref).fold(0.0, f64::max);
    let (fit, fit_error) = match fit_power_law(&tv, &dv, noise) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(alloc::format!("{e}"))),
    };
    Ok(RayStudy {
        direction: *direction,
        index: model.index,
        j,
        beta: reference.beta(),
        lambda_unperturbed: reference.lambda,
        samples,
        fit,
        fit_error,
        g_star: extrapolate_in_t(&tv, &gv, DEFAULT_EXTRAPOLATION_ORDER)?,
        extrapolation_order: DEFAULT_EXTRAPOLATION_ORDER,
    })
}

/// Rate and coefficient check for one direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoremReport {
    pub alpha: f64,
    pub j: u32,
    pub fitted_exponent: f64,
    pub g_star: f64,
    /// `−2 β² 𝔪_p`.
    pub predicted: f64,
    pub rel_err: f64,
    pub sign_ok: bool,
    pub exponent_ok: bool,
    pub coefficient_ok: bool,
}

impl TheoremReport {
    pub fn pass(&self) -> bool {
        self.sign_ok && self.exponent_ok && self.coefficient_ok
    }
}

/// Compares the sweep with `−2 β² 𝔪_p`.
pub fn verify_theorem(
    study: &RayStudy,
    profile: &LimitProfile,
    exponent_tol: f64,
    coefficient_tol: f64,
) -> Result<TheoremReport> {
    if (study.direction.alpha() - profile.alpha()).abs() > 1e-12 || study.j != profile.j {
        return Err(Error::invalid(alloc::format!(
            "sweep (alpha {}, j {}) and limit profile (alpha {}, j {}) do not match",
            study.direction.alpha(),
            study.j,
            profile.alpha(),
            profile.j
        )));
    }
    let predicted = -2.0 * study.beta * study.beta * profile.m_energy;
    let rel_err = (study.g_star - predicted).abs() / predicted.abs();
    let fitted_exponent = study.fit.map_or(f64::NAN, |f| f.exponent);
    let sign_ok = study.samples.iter().all(|s| s.diff.signum() == predicted.signum());
    Ok(TheoremReport {
        alpha: study.direction.alpha(),
        j: study.j,
        fitted_exponent,
        g_star: study.g_star,
        predicted,
        rel_err,
        sign_ok,
        exponent_ok: (fitted_exponent - 2.0 * study.j as f64).abs() <= exponent_tol,
        coefficient_ok: rel_err <= coefficient_tol,
    })
}
