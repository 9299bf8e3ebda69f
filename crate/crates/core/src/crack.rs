//! The limit crack problem on a truncated half-plane.
//!
//! For a direction `p` and vanishing order `j` the profile `w_p` minimizes
//!
//! `J(u) = ½ ∫ |∇u|² + j cos(j(π/2 − α)) ∫_Γ |x|^{j−1} (u⁺ − u⁻) ds`
//!
//! over `u` vanishing on the outer boundary and the diameter, subject to
//! `u⁺ + u⁻ = −2ψ_j` on the segment `Γ = [0, p]`. The plus side is the left of
//! the direction `p`. The quantity `𝔪_p = J(w_p)` is computed twice: from the
//! energy and from the `j`-th Fourier coefficient of `w_p` on the unit half circle.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::cholesky::{nested_dissection, SparseCholesky};
use crate::error::{Error, Result};
use crate::fe::{assemble_reduced, edge_chain_load, energy_and_mass, FeOrder, FeSpace, NodeMap, NodeRole};
use crate::field::{FeField, Field};
use crate::gauge::{psi_j_eval, psi_j_gradient};
use crate::geometry::{Direction, Point};
use crate::mesh::{build_half_disk_mesh, insert_slit, Grading, MeshOptions, SlitTopology};

/// Mesh and problem parameters for one truncation radius.
#[derive(Clone, Debug, PartialEq)]
pub struct CrackProblemSpec {
    pub direction: Direction,
    pub j: u32,
    pub r_out: f64,
    /// Element size in the ball of radius `near_radius` around the origin.
    pub h_near: f64,
    pub near_radius: f64,
    /// Element size at the crack tip and at the origin.
    pub tip_h: f64,
    pub slope: f64,
    pub order: FeOrder,
}

impl CrackProblemSpec {
    pub fn new(direction: Direction, j: u32) -> Self {
        CrackProblemSpec {
            direction,
            j,
            r_out: 32.0,
            h_near: 0.05,
            near_radius: 1.5,
            tip_h: 0.002,
            slope: 0.2,
            order: FeOrder::P2,
        }
    }

    pub fn with_r_out(mut self, r_out: f64) -> Self {
        self.r_out = r_out;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.j == 0 {
            return Err(Error::invalid("vanishing order j must be at least 1"));
        }
        if !(self.r_out >= 8.0) {
            return Err(Error::invalid(alloc::format!("R_out must be at least 8, got {}", self.r_out)));
        }
        if !(self.tip_h > 0.0 && self.tip_h <= 0.01) {
            return Err(Error::invalid(alloc::format!("tip element size must lie in (0, 0.01], got {}", self.tip_h)));
        }
        if !(self.h_near > self.tip_h && self.near_radius >= 1.0) {
            return Err(Error::invalid("near-field size must exceed the tip size on a ball containing the crack"));
        }
        Ok(())
    }

    fn h_far(&self) -> f64 {
        self.r_out / 8.0
    }
}

/// Graded, slit mesh of the truncated half-plane.
#[derive(Clone, Debug)]
pub struct CrackDomain {
    pub space: Arc<FeSpace>,
    pub slit: SlitTopology,
}

pub fn build_crack_domain(spec: &CrackProblemSpec) -> Result<CrackDomain> {
    spec.validate()?;
    let p = spec.direction.unit();
    let opts = MeshOptions { slope: spec.slope, ..MeshOptions::new(spec.r_out, spec.h_far()) }
        .with_grading(Grading::new(Point::ORIGIN, spec.h_near, spec.near_radius))
        .with_grading(Grading::new(Point::ORIGIN, spec.tip_h, 0.0))
        .with_grading(Grading::new(p, spec.tip_h, 0.0))
        .with_constraint(alloc::vec![Point::ORIGIN, p]);
    let mesh = build_half_disk_mesh(&opts)?;
    let (mesh, slit) = insert_slit(&mesh, &[Point::ORIGIN, p])?;
    Ok(CrackDomain { space: Arc::new(FeSpace::new(mesh, spec.order)), slit })
}

/// `j cos(j(π/2 − α))`, the normal derivative of `ψ_j` across the crack.
pub fn load_coefficient(j: u32, alpha: f64) -> f64 {
    let jf = j as f64;
    jf * libm::cos(jf * (FRAC_PI_2 - alpha))
}

/// `ω(r) = ∫_{−π/2}^{π/2} w(r cos t, r sin t) sin(j(π/2 − t)) dt`.
pub fn omega_fourier(field: &dyn Field, j: u32, r: f64) -> Result<f64> {
    if r > field.domain_radius() {
        return Err(Error::RadiusTooLarge { radius: r, mesh_radius: field.domain_radius() });
    }
    let jf = j as f64;
    field.arc_integral(r, &|v, t| v * libm::sin(jf * (FRAC_PI_2 - t)))
}

/// Solution at one truncation radius.
#[derive(Clone, Debug)]
pub struct CrackLevel {
    pub r_out: f64,
    pub h: f64,
    pub dofs: usize,
    pub m_energy: f64,
    pub m_fourier: f64,
    pub dirichlet_energy: f64,
    /// `(r, ω(r))` for `r ∈ {1, 2, 4}` (radii beyond `R_out/2` are skipped).
    pub omega: Vec<(f64, f64)>,
    /// `max |w⁺ + w⁻ + 2ψ_j|` over paired crack nodes.
    pub jump_residual: f64,
    /// `max |w|` on the half circle of radius `R_out/2`.
    pub decay: f64,
    pub field: FeField,
    map: NodeMap,
    load: Vec<f64>,
}

pub const OMEGA_RADII: [f64; 3] = [1.0, 2.0, 4.0];

impl CrackLevel {
    /// `J` evaluated on a global nodal vector.
    pub fn functional(&self, u: &[f64]) -> f64 {
        let (half_energy, _) = energy_and_mass(self.field.space(), u, &|_| 0.0);
        half_energy + u.iter().zip(&self.load).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Smallest `J(w + εv) − J(w)` over `count` random admissible directions
    /// `v` (unit energy) and `ε = ±eps`.
    pub fn optimality_check(&self, count: usize, eps: f64, seed: u64) -> f64 {
        let w = self.field.values();
        let j0 = self.functional(w);
        let zero = self.map.expand(&alloc::vec![0.0; self.map.num_dofs()]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = f64::INFINITY;
        for _ in 0..count {
            let d: Vec<f64> = (0..self.map.num_dofs())
                .map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0)
                .collect();
            let mut v: Vec<f64> = self.map.expand(&d).iter().zip(&zero).map(|(a, b)| a - b).collect();
            let (e, _) = energy_and_mass(self.field.space(), &v, &|_| 0.0);
            let s = 1.0 / libm::sqrt(2.0 * e);
            v.iter_mut().for_each(|x| *x *= s);
            for sign in [1.0, -1.0] {
                let u: Vec<f64> = w.iter().zip(&v).map(|(a, b)| a + sign * eps * b).collect();
                worst = worst.min(self.functional(&u) - j0);
            }
        }
        worst
    }
}

/// Solves the crack problem at the truncation radius of `spec`.
pub fn solve_crack_level(spec: &CrackProblemSpec) -> Result<CrackLevel> {
    let alpha = spec.direction.alpha();
    let fail = |e: Error| match e {
        Error::NotPositiveDefinite { .. } | Error::NoConvergence { .. } => {
            Error::CrackSolve { alpha, reason: alloc::format!("{e}") }
        }
        other => other,
    };
    let dom = build_crack_domain(spec)?;
    let space = &dom.space;
    let j = spec.j;
    let n = space.num_nodes();
    let nodes = space.nodes();

    let mut fixed = space.dirichlet_nodes();
    let (tip, tip_at) = dom.slit.interior_tip().ok_or_else(|| Error::invalid("crack must end at an interior tip"))?;
    fixed[tip] = true;
    let mut partner: Vec<Option<usize>> = alloc::vec![None; n];
    for (p, m) in space.slit_node_pairs(&dom.slit) {
        partner[m] = Some(p);
    }
    let mut roles = alloc::vec![NodeRole::Fixed(0.0); n];
    let mut next = 0usize;
    for node in 0..n {
        if node == tip {
            roles[node] = NodeRole::Fixed(-psi_j_eval(j, tip_at));
        } else if !fixed[node] && partner[node].is_none() {
            roles[node] = NodeRole::Dof { dof: next, sign: 1.0, offset: 0.0 };
            next += 1;
        }
    }
    for node in 0..n {
        if let Some(p) = partner[node] {
            let offset = -2.0 * psi_j_eval(j, nodes[node]);
            roles[node] = match roles[p] {
                NodeRole::Dof { dof, .. } => NodeRole::Dof { dof, sign: -1.0, offset },
                NodeRole::Fixed(v) => NodeRole::Fixed(-v + offset),
            };
        }
    }
    let map = NodeMap::new(roles);

    let c = load_coefficient(j, alpha);
    let g = |x: Point| c * libm::pow(x.norm(), j as f64 - 1.0);
    let f_plus = edge_chain_load(space, &dom.slit.chain_plus, &g);
    let f_minus = edge_chain_load(space, &dom.slit.chain_minus, &g);
    let load: Vec<f64> = f_plus.iter().zip(&f_minus).map(|(a, b)| a - b).collect();

    let sys = assemble_reduced(space, &map, &|_| 1.0)?;
    let mut rhs = sys.offset_load;
    for (node, role) in map.roles().iter().enumerate() {
        if let NodeRole::Dof { dof, sign, .. } = *role {
            rhs[dof] -= sign * load[node];
        }
    }
    let coords = map.dof_coords(nodes);
    let chol = SparseCholesky::factor(&sys.stiffness, nested_dissection(&sys.stiffness, &coords)).map_err(fail)?;
    let x = chol.solve(&rhs);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::CrackSolve { alpha, reason: "non-finite solution".into() });
    }
    let w = map.expand(&x);

    let jump_residual = space
        .slit_node_pairs(&dom.slit)
        .iter()
        .map(|&(p, m)| (w[p] + w[m] + 2.0 * psi_j_eval(j, nodes[p])).abs())
        .fold(0.0, f64::max);

    let field = FeField::new(dom.space.clone(), w);
    let (half_energy, _) = energy_and_mass(space, field.values(), &|_| 0.0);
    let linear: f64 = field.values().iter().zip(&load).map(|(a, b)| a * b).sum();
    let mut omega = Vec::new();
    for r in OMEGA_RADII {
        if r <= 0.5 * spec.r_out {
            omega.push((r, omega_fourier(&field, j, r)?));
        }
    }
    let m_fourier = -(j as f64) * omega[0].1;
    let half = 0.5 * spec.r_out;
    let decay = (0..=64)
        .filter_map(|k| field.value(Point::polar(half, -FRAC_PI_2 + PI * (k as f64 + 0.5) / 65.0)))
        .map(f64::abs)
        .fold(0.0, f64::max);

    Ok(CrackLevel {
        r_out: spec.r_out,
        h: spec.h_near,
        dofs: map.num_dofs(),
        m_energy: half_energy + linear,
        m_fourier,
        dirichlet_energy: 2.0 * half_energy,
        omega,
        jump_residual,
        decay,
        field,
        map,
        load,
    })
}

/// Truncation radii and extrapolation order.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderOptions {
    pub radii: Vec<f64>,
    /// Assumed order `k` of the truncation error `O(R^{-k})`.
    pub richardson_order: f64,
    /// Required shrink factor of successive differences.
    pub min_contraction: f64,
}

impl Default for LadderOptions {
    fn default() -> Self {
        LadderOptions { radii: alloc::vec![8.0, 16.0, 32.0], richardson_order: 2.0, min_contraction: 1.5 }
    }
}

/// `x∞` from values at two radii assuming `x(R) = x∞ + c R^{−k}`.
pub fn richardson(r_coarse: f64, x_coarse: f64, r_fine: f64, x_fine: f64, order: f64) -> f64 {
    let rho = libm::pow(r_fine / r_coarse, order);
    (rho * x_fine - x_coarse) / (rho - 1.0)
}

/// Limit profile extrapolated in the truncation radius.
#[derive(Clone, Debug)]
pub struct LimitProfile {
    pub direction: Direction,
    pub j: u32,
    pub levels: Vec<CrackLevel>,
    pub m_energy: f64,
    pub m_fourier: f64,
    pub dirichlet_energy: f64,
    pub omega: Vec<(f64, f64)>,
    /// Smallest ratio of successive ladder differences of `𝔪` (∞ with fewer than three levels).
    pub contraction: f64,
    pub ladder_ok: bool,
}

impl LimitProfile {
    pub fn finest(&self) -> &CrackLevel {
        self.levels.last().expect("ladder has at least one level")
    }

    pub fn alpha(&self) -> f64 {
        self.direction.alpha()
    }

    /// `|𝔪_energy − 𝔪_fourier| / max(|𝔪_energy|, |𝔪_fourier|)`.
    pub fn route_discrepancy(&self) -> f64 {
        let d = (self.m_energy - self.m_fourier).abs();
        let s = self.m_energy.abs().max(self.m_fourier.abs());
        if s == 0.0 {
            0.0
        } else {
            d / s
        }
    }

    /// Largest relative deviation of `ω(r) r^j` from its value at `r = 1`.
    pub fn omega_scaling_deviation(&self) -> f64 {
        let base = self.omega[0].1;
        self.omega.iter().map(|&(r, w)| (w * libm::pow(r, self.j as f64) - base).abs() / base.abs()).fold(0.0, f64::max)
    }

    /// `w_p + ψ_j` on the finest mesh.
    pub fn shifted_field(&self) -> PsiShifted {
        PsiShifted { base: self.finest().field.clone(), j: self.j }
    }
}

/// Solves the ladder of truncation radii and extrapolates.
pub fn solve_limit_profile(template: &CrackProblemSpec, ladder: &LadderOptions) -> Result<LimitProfile> {
    if ladder.radii.is_empty() || ladder.radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("ladder radii must be non-empty and increasing"));
    }
    let mut levels = Vec::with_capacity(ladder.radii.len());
    for &r in &ladder.radii {
        levels.push(solve_crack_level(&template.clone().with_r_out(r))?);
    }
    let k = ladder.richardson_order;
    let extrap = |get: &dyn Fn(&CrackLevel) -> f64| -> f64 {
        match levels.len() {
            1 => get(&levels[0]),
            n => richardson(levels[n - 2].r_out, get(&levels[n - 2]), levels[n - 1].r_out, get(&levels[n - 1]), k),
        }
    };
    let m_energy = extrap(&|l| l.m_energy);
    let m_fourier = extrap(&|l| l.m_fourier);
    let dirichlet_energy = extrap(&|l| l.dirichlet_energy);
    let omega: Vec<(f64, f64)> = levels[levels.len().saturating_sub(2)]
        .omega
        .iter()
        .enumerate()
        .map(|(i, &(r, _))| (r, extrap(&|l| l.omega[i].1)))
        .collect();
    let mut contraction = f64::INFINITY;
    for w in levels.windows(3) {
        let d0 = (w[1].m_energy - w[0].m_energy).abs();
        let d1 = (w[2].m_energy - w[1].m_energy).abs();
        contraction = contraction.min(if d1 == 0.0 { f64::INFINITY } else { d0 / d1 });
    }
    Ok(LimitProfile {
        direction: template.direction,
        j: template.j,
        ladder_ok: contraction >= ladder.min_contraction,
        levels,
        m_energy,
        m_fourier,
        dirichlet_energy,
        omega,
        contraction,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecialAngle {
    /// The load vanishes: `𝔪 = ½ ∫|∇w|²`.
    Bisector,
    /// The constraint is homogeneous: `𝔪 = −½ ∫|∇w|²`.
    Tangent,
}

/// Classifies `α` for order `j`.
pub fn special_angle(j: u32, alpha: f64) -> Option<SpecialAngle> {
    let phase = j as f64 * (FRAC_PI_2 - alpha);
    if libm::cos(phase).abs() < 1e-12 {
        Some(SpecialAngle::Bisector)
    } else if libm::sin(phase).abs() < 1e-12 {
        Some(SpecialAngle::Tangent)
    } else {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpecialAngleCheck {
    pub kind: SpecialAngle,
    pub expected: f64,
    pub actual: f64,
    pub rel_err: f64,
}

/// Compares `𝔪` with `±½ ∫|∇w|²` at a special angle.
pub fn special_angle_identity(profile: &LimitProfile) -> Option<SpecialAngleCheck> {
    let kind = special_angle(profile.j, profile.alpha())?;
    let half = 0.5 * profile.dirichlet_energy;
    let expected = match kind {
        SpecialAngle::Bisector => half,
        SpecialAngle::Tangent => -half,
    };
    let actual = profile.m_energy;
    Some(SpecialAngleCheck { kind, expected, actual, rel_err: (actual - expected).abs() / expected.abs() })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DirectionScan {
    pub j: u32,
    pub alphas: Vec<f64>,
    pub m: Vec<f64>,
    pub sign_changes: usize,
}

/// `𝔪_p` over a list of directions.
pub fn scan_directions(template: &CrackProblemSpec, alphas: &[f64], ladder: &LadderOptions) -> Result<DirectionScan> {
    let mut m = Vec::with_capacity(alphas.len());
    for &a in alphas {
        let spec = CrackProblemSpec { direction: Direction::new(a)?, ..template.clone() };
        m.push(solve_limit_profile(&spec, ladder)?.m_energy);
    }
    Ok(DirectionScan { j: template.j, alphas: alphas.to_vec(), sign_changes: count_sign_changes(&m), m })
}

/// Sign changes in a sequence, skipping exact zeros.
pub fn count_sign_changes(v: &[f64]) -> usize {
    let mut last = 0.0f64;
    let mut count = 0;
    for &x in v {
        if x == 0.0 {
            continue;
        }
        if last != 0.0 && x.signum() != last.signum() {
            count += 1;
        }
        last = x;
    }
    count
}

/// `w_p + ψ_j`, the limit of the rescaled eigenfunctions up to a sign.
#[derive(Clone, Debug)]
pub struct PsiShifted {
    pub base: FeField,
    pub j: u32,
}

impl Field for PsiShifted {
    fn domain_radius(&self) -> f64 {
        self.base.domain_radius()
    }

    fn value(&self, x: Point) -> Option<f64> {
        Some(self.base.value(x)? + psi_j_eval(self.j, x))
    }

    fn gradient(&self, x: Point) -> Option<Point> {
        Some(self.base.gradient(x)? + psi_j_gradient(self.j, x))
    }

    fn arc_breaks(&self, r: f64) -> Vec<f64> {
        self.base.arc_breaks(r)
    }
}
