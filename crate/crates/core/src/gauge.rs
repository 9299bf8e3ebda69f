//! The half-flux Aharonov-Bohm operator in the real cut gauge.
//!
//! Writing `u = e^{iθ/2} v` with `θ` continuous off a cut from the pole to the
//! outer boundary turns the magnetic Dirichlet problem into the Dirichlet
//! Laplacian for a real `v` that changes sign across the cut.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
use core::fmt;

use crate::error::{Error, Result};
use crate::fe::{assemble_reduced, FeSpace, NodeMap, NodeRole};
use crate::field::{FeField, Field};
use crate::geometry::Point;
use crate::mesh::SlitTopology;
use crate::quadrature::TriangleRule;
use crate::sparse::CsrMatrix;

/// `A_a(x) = ½ (−(x₂ − a₂), x₁ − a₁) / |x − a|²`.
pub fn magnetic_potential_eval(a: Point, x: Point) -> Result<Point> {
    let d = x - a;
    let r2 = d.norm2();
    if r2 == 0.0 {
        return Err(Error::AtPole);
    }
    Ok(Point::new(-0.5 * d.y / r2, 0.5 * d.x / r2))
}

/// `ψ_j(x) = r^j sin(j(π/2 − t))` in polar coordinates `x = r(cos t, sin t)`.
pub fn psi_j_eval(j: u32, x: Point) -> f64 {
    let r = x.norm();
    if r == 0.0 {
        return 0.0;
    }
    let t = x.angle();
    libm::pow(r, j as f64) * libm::sin(j as f64 * (FRAC_PI_2 - t))
}

/// `∇ψ_j(x)`.
pub fn psi_j_gradient(j: u32, x: Point) -> Point {
    let r = x.norm();
    if r == 0.0 {
        return if j == 1 { Point::new(1.0, 0.0) } else { Point::ORIGIN };
    }
    let t = x.angle();
    let jf = j as f64;
    let rj1 = libm::pow(r, jf - 1.0);
    // ∂_r = j r^{j-1} sin(j(π/2-t)), (1/r)∂_t = -j r^{j-1} cos(j(π/2-t))
    let dr = jf * rj1 * libm::sin(jf * (FRAC_PI_2 - t));
    let dt = -jf * rj1 * libm::cos(jf * (FRAC_PI_2 - t));
    let (c, s) = (libm::cos(t), libm::sin(t));
    Point::new(dr * c - dt * s, dr * s + dt * c)
}

/// Positive weight `q` of the mass term.
#[derive(Clone)]
pub struct WeightField {
    name: String,
    f: Arc<dyn Fn(Point) -> f64 + Send + Sync>,
}

impl WeightField {
    pub fn constant(c: f64) -> Self {
        WeightField { name: alloc::format!("constant {c}"), f: Arc::new(move |_| c) }
    }

    pub fn new(name: impl Into<String>, f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        WeightField { name: name.into(), f: Arc::new(f) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: Point) -> f64 {
        (self.f)(x)
    }
}

impl Default for WeightField {
    fn default() -> Self {
        WeightField::constant(1.0)
    }
}

impl fmt::Debug for WeightField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightField").field("name", &self.name).finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransmissionMode {
    /// Plain Dirichlet Laplacian; slit copies are identified.
    Continuous,
    /// Half-flux pole at the slit tip; slit copies carry opposite values.
    Antiperiodic,
}

impl TransmissionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TransmissionMode::Continuous => "continuous",
            TransmissionMode::Antiperiodic => "antiperiodic",
        }
    }
}

/// Reduced stiffness/mass pair of a (cut-gauge) Dirichlet problem.
#[derive(Clone, Debug)]
pub struct OperatorAssembly {
    pub space: Arc<FeSpace>,
    pub map: NodeMap,
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    pub mode: TransmissionMode,
    pub pole: Option<Point>,
    pub weight: WeightField,
}

impl OperatorAssembly {
    pub fn num_dofs(&self) -> usize {
        self.map.num_dofs()
    }

    /// Global nodal values from reduced unknowns.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        self.map.expand(x)
    }

    pub fn dof_coords(&self) -> Vec<Point> {
        self.map.dof_coords(self.space.nodes())
    }

    /// Field sampler for reduced unknowns `x`.
    pub fn field(&self, x: &[f64]) -> FeField {
        FeField::new(self.space.clone(), self.expand(x))
    }
}

/// Assembles the reduced operator. In antiperiodic mode the pole is the
/// interior tip of `slit` and its node is fixed to zero.
pub fn assemble(
    space: Arc<FeSpace>,
    slit: Option<&SlitTopology>,
    q: &WeightField,
    mode: TransmissionMode,
) -> Result<OperatorAssembly> {
    let n = space.num_nodes();
    let dirichlet = space.dirichlet_nodes();
    let mut fixed = dirichlet;
    let mut partner: Vec<Option<usize>> = alloc::vec![None; n];
    let mut pole = None;
    if let Some(slit) = slit {
        for (p, m) in space.slit_node_pairs(slit) {
            partner[m] = Some(p);
        }
    }
    if mode == TransmissionMode::Antiperiodic {
        let slit = slit.ok_or_else(|| Error::invalid("antiperiodic assembly requires a slit from the pole"))?;
        let (tip, at) = slit
            .interior_tip()
            .ok_or_else(|| Error::invalid("antiperiodic slit must run from an interior pole to the boundary"))?;
        fixed[tip] = true;
        pole = Some(at);
    }
    let sign = match mode {
        TransmissionMode::Continuous => 1.0,
        TransmissionMode::Antiperiodic => -1.0,
    };
    let mut roles = alloc::vec![NodeRole::Fixed(0.0); n];
    let mut next = 0usize;
    for node in 0..n {
        if fixed[node] || partner[node].is_some() {
            continue;
        }
        roles[node] = NodeRole::Dof { dof: next, sign: 1.0, offset: 0.0 };
        next += 1;
    }
    for node in 0..n {
        if let Some(p) = partner[node] {
            roles[node] = match roles[p] {
                NodeRole::Dof { dof, .. } => NodeRole::Dof { dof, sign, offset: 0.0 },
                fixed => fixed,
            };
        }
    }
    let map = NodeMap::new(roles);
    let qf = |x: Point| q.eval(x);
    let sys = assemble_reduced(&space, &map, &qf)?;
    Ok(OperatorAssembly { space, map, stiffness: sys.stiffness, mass: sys.mass, mode, pole, weight: q.clone() })
}

/// `¼ ∫ v²/|x − a|² / ∫ |∇v|²` for a global nodal field `v`.
pub fn hardy_ratio(space: &FeSpace, v: &[f64], a: Point) -> Result<f64> {
    let rule = TriangleRule::degree5();
    let mut num = 0.0;
    let mut den = 0.0;
    for e in 0..space.num_elements() {
        for (x, l, w) in space.element_points(e, &rule) {
            let val = space.eval(v, e, l);
            num += 0.25 * w * val * val / (x - a).norm2();
            den += w * space.eval_gradient(v, e, l).norm2();
        }
    }
    if !(den > 0.0) {
        return Err(Error::ZeroEnergy);
    }
    Ok(num / den)
}

/// `max(0, LHS − RHS)` for `(1/r²)∫_{D_r⁺} v² ≤ (1/r)∫_{∂D_r⁺} v² ds + ∫_{D_r⁺} |∇v|²`.
///
/// `∂D_r⁺` is the half circle; the arc integral in the angle already carries the `1/r`.
pub fn poincare_check(field: &dyn Field, r: f64) -> Result<f64> {
    if r > field.domain_radius() * (1.0 + 1e-12) {
        return Err(Error::RadiusTooLarge { radius: r, mesh_radius: field.domain_radius() });
    }
    let d = field.integrate_disk(r, &|_| 1.0);
    let arc = field.arc_integral(r, &|v, _| v * v)?;
    let lhs = d.square / (r * r);
    let rhs = arc + d.gradient;
    Ok((lhs - rhs).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fe::FeOrder;
    use crate::field::AnalyticField;
    use crate::mesh::{build_half_disk_mesh, MeshOptions};
    use crate::quadrature::composite_gauss;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    #[test]
    fn potential_examples() {
        assert_eq!(magnetic_potential_eval(Point::new(1.0, 0.0), Point::new(2.0, 0.0)).unwrap(), Point::new(0.0, 0.5));
        assert_eq!(magnetic_potential_eval(Point::ORIGIN, Point::new(0.0, 1.0)).unwrap(), Point::new(-0.5, 0.0));
        assert_eq!(magnetic_potential_eval(Point::ORIGIN, Point::ORIGIN), Err(Error::AtPole));
    }

    #[test]
    fn circulation_is_pi() {
        let a = Point::new(0.3, -0.2);
        let (t, w) = composite_gauss(0.0, 2.0 * PI, 32, 8);
        let circ: f64 = t
            .iter()
            .zip(&w)
            .map(|(&s, &wi)| {
                let x = a + Point::polar(0.1, s);
                let tangent = Point::new(-libm::sin(s), libm::cos(s));
                wi * 0.1 * magnetic_potential_eval(a, x).unwrap().dot(tangent)
            })
            .sum();
        assert!((circ - PI).abs() < 1e-8);
    }

    #[test]
    fn psi_examples() {
        assert!((psi_j_eval(1, Point::new(1.0, 0.0)) - 1.0).abs() < 1e-15);
        assert!((psi_j_eval(2, Point::polar(1.0, PI / 4.0)) - 1.0).abs() < 1e-15);
        assert!(psi_j_eval(2, Point::new(0.7, 0.0)).abs() < 1e-15);
        assert_eq!(psi_j_eval(3, Point::ORIGIN), 0.0);
        // vanishes on the diameter
        for j in 1..5 {
            assert!(psi_j_eval(j, Point::new(0.0, 0.4)).abs() < 1e-15);
            assert!(psi_j_eval(j, Point::new(0.0, -0.4)).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn psi_gradient_matches_finite_differences(j in 1u32..5, r in 0.1f64..2.0, t in -1.5f64..1.5) {
            let x = Point::polar(r, t);
            let h = 1e-6;
            let gx = (psi_j_eval(j, x + Point::new(h, 0.0)) - psi_j_eval(j, x - Point::new(h, 0.0))) / (2.0 * h);
            let gy = (psi_j_eval(j, x + Point::new(0.0, h)) - psi_j_eval(j, x - Point::new(0.0, h))) / (2.0 * h);
            let g = psi_j_gradient(j, x);
            prop_assert!((g.x - gx).abs() < 1e-6 * (1.0 + g.norm()));
            prop_assert!((g.y - gy).abs() < 1e-6 * (1.0 + g.norm()));
        }

        #[test]
        fn psi_is_homogeneous(j in 1u32..5, r in 0.1f64..2.0, t in -1.5f64..1.5, s in 0.1f64..3.0) {
            let x = Point::polar(r, t);
            let lhs = psi_j_eval(j, s * x);
            let rhs = libm::pow(s, j as f64) * psi_j_eval(j, x);
            prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn antiperiodic_requires_slit() {
        let mesh = build_half_disk_mesh(&MeshOptions::new(1.0, 0.3)).unwrap();
        let space = Arc::new(FeSpace::new(mesh, FeOrder::P1));
        let err = assemble(space, None, &WeightField::default(), TransmissionMode::Antiperiodic).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn non_positive_weight_is_rejected() {
        let mesh = build_half_disk_mesh(&MeshOptions::new(1.0, 0.3)).unwrap();
        let space = Arc::new(FeSpace::new(mesh, FeOrder::P1));
        let q = WeightField::new("negative left", |x: Point| x.y);
        let err = assemble(space, None, &q, TransmissionMode::Continuous).unwrap_err();
        assert!(matches!(err, Error::NonPositiveWeight { .. }));
    }

    #[test]
    fn hardy_ratio_of_psi1_about_origin() {
        // ¼ ∫ cos²t r dr dt / ∫ 1 = (π/16) / (π/2)
        let mesh = build_half_disk_mesh(&MeshOptions::new(1.0, 0.05)).unwrap();
        let space = FeSpace::new(mesh, FeOrder::P2);
        let v = space.interpolate(|x| psi_j_eval(1, x));
        let r = hardy_ratio(&space, &v, Point::ORIGIN).unwrap();
        assert!((r - 0.125).abs() < 2e-3, "{r}");
        let v2: Vec<f64> = v.iter().map(|x| 2.0 * x).collect();
        assert!((hardy_ratio(&space, &v2, Point::ORIGIN).unwrap() - r).abs() < 1e-14);
        let zero = alloc::vec![0.0; space.num_nodes()];
        assert_eq!(hardy_ratio(&space, &zero, Point::ORIGIN), Err(Error::ZeroEnergy));
    }

    #[test]
    fn poincare_on_psi1() {
        let f = AnalyticField::psi(1, 1.0);
        assert!(poincare_check(&f, 1.0).unwrap() < 1e-8);
        let zero = AnalyticField::new(1.0, |_| 0.0, |_| Point::ORIGIN);
        assert_eq!(poincare_check(&zero, 0.5).unwrap(), 0.0);
        assert!(matches!(poincare_check(&f, 2.0), Err(Error::RadiusTooLarge { .. })));
    }
}
