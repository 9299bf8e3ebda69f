//! Scalar fields on half-disks: pointwise sampling, half-circle and half-disk integrals.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::fe::FeSpace;
use crate::gauge::{psi_j_eval, psi_j_gradient};
use crate::geometry::{orient, segment_distance, Point};
use crate::locate::Locator;
use crate::mesh::BoundaryTag;
use crate::quadrature::{composite_gauss, composite_gauss_with_breaks, TriangleRule};

/// Panels and points per panel of the default half-circle rule (256 points).
pub const ARC_PANELS: usize = 64;
pub const ARC_ORDER: usize = 4;

/// Integrals over `D_r⁺ = {|x| < r, x₁ > 0}`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DiskIntegrals {
    /// `∫ |∇u|²`
    pub gradient: f64,
    /// `∫ q u²`
    pub weighted_square: f64,
    /// `∫ u²`
    pub square: f64,
}

pub trait Field {
    /// Radius of the half-disk the field is defined on.
    fn domain_radius(&self) -> f64;

    fn value(&self, x: Point) -> Option<f64>;

    fn gradient(&self, x: Point) -> Option<Point>;

    /// Angles in `(−π/2, π/2)` where the half circle of radius `r` crosses a
    /// discontinuity of the field. Quadrature panels end there.
    fn arc_breaks(&self, _r: f64) -> Vec<f64> {
        Vec::new()
    }

    /// `∫_{−π/2}^{π/2} g(u(r cos t, r sin t), t) dt` with the open composite rule.
    fn arc_integral(&self, r: f64, g: &dyn Fn(f64, f64) -> f64) -> Result<f64> {
        let breaks = self.arc_breaks(r);
        let (ts, ws) = composite_gauss_with_breaks(-FRAC_PI_2, FRAC_PI_2, &breaks, ARC_PANELS * ARC_ORDER, ARC_ORDER);
        let mut s = 0.0;
        for (t, w) in ts.iter().zip(&ws) {
            let x = Point::polar(r, *t);
            let v = self.value(x).ok_or(Error::Outside(x))?;
            s += w * g(v, *t);
        }
        Ok(s)
    }

    /// Half-disk integrals by tensor Gauss quadrature in polar coordinates.
    fn integrate_disk(&self, r: f64, q: &dyn Fn(Point) -> f64) -> DiskIntegrals {
        let (rs, rw) = composite_gauss(0.0, r, 4, 8);
        let (ts, tw) = composite_gauss(-FRAC_PI_2, FRAC_PI_2, 32, 8);
        let mut out = DiskIntegrals::default();
        for (rho, wr) in rs.iter().zip(&rw) {
            for (t, wt) in ts.iter().zip(&tw) {
                let x = Point::polar(*rho, *t);
                let w = wr * wt * rho;
                let v = self.value(x).unwrap_or(0.0);
                let g = self.gradient(x).unwrap_or(Point::ORIGIN);
                out.gradient += w * g.norm2();
                out.weighted_square += w * q(x) * v * v;
                out.square += w * v * v;
            }
        }
        out
    }
}

/// A field given by closed-form value and gradient.
pub struct AnalyticField {
    radius: f64,
    value: Box<dyn Fn(Point) -> f64 + Send + Sync>,
    gradient: Box<dyn Fn(Point) -> Point + Send + Sync>,
}

impl AnalyticField {
    pub fn new(
        radius: f64,
        value: impl Fn(Point) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(Point) -> Point + Send + Sync + 'static,
    ) -> Self {
        AnalyticField { radius, value: Box::new(value), gradient: Box::new(gradient) }
    }

    /// `ψ_j` on the half-disk of the given radius.
    pub fn psi(j: u32, radius: f64) -> Self {
        Self::new(radius, move |x| psi_j_eval(j, x), move |x| psi_j_gradient(j, x))
    }
}

impl Field for AnalyticField {
    fn domain_radius(&self) -> f64 {
        self.radius
    }

    fn value(&self, x: Point) -> Option<f64> {
        (x.x >= 0.0 && x.norm() <= self.radius).then(|| (self.value)(x))
    }

    fn gradient(&self, x: Point) -> Option<Point> {
        (x.x >= 0.0 && x.norm() <= self.radius).then(|| (self.gradient)(x))
    }
}

/// A finite-element field: nodal values on an [`FeSpace`].
#[derive(Clone, Debug)]
pub struct FeField {
    space: Arc<FeSpace>,
    locator: Arc<Locator>,
    values: Vec<f64>,
    max_depth: u32,
}

impl FeField {
    pub fn new(space: Arc<FeSpace>, values: Vec<f64>) -> Self {
        let locator = Arc::new(Locator::new(space.mesh()));
        Self::with_locator(space, locator, values)
    }

    pub fn with_locator(space: Arc<FeSpace>, locator: Arc<Locator>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), space.num_nodes());
        FeField { space, locator, values, max_depth: 6 }
    }

    /// Subdivision depth for elements straddling `∂D_r`.
    pub fn with_subdivision_depth(mut self, depth: u32) -> Self {
        self.max_depth = depth;
        self
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn locator(&self) -> &Arc<Locator> {
        &self.locator
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scaled(&self, c: f64) -> FeField {
        FeField { values: self.values.iter().map(|v| c * v).collect(), ..self.clone() }
    }

    #[allow(clippy::too_many_arguments)]
    fn clip_element(
        &self,
        e: usize,
        corners: [[f64; 3]; 3],
        r: f64,
        depth: u32,
        rule: &TriangleRule,
        q: &dyn Fn(Point) -> f64,
        out: &mut DiskIntegrals,
    ) {
        let tri = self.space.mesh().triangle_points(e);
        let to_phys = |l: [f64; 3]| {
            Point::new(
                l[0] * tri[0].x + l[1] * tri[1].x + l[2] * tri[2].x,
                l[0] * tri[0].y + l[1] * tri[1].y + l[2] * tri[2].y,
            )
        };
        let p = corners.map(to_phys);
        let inside = p.iter().all(|x| x.norm() <= r);
        if !inside {
            let origin_in = orient(p[0], p[1], p[2]).signum() * orient(p[0], p[1], Point::ORIGIN) >= 0.0
                && orient(p[0], p[1], p[2]).signum() * orient(p[1], p[2], Point::ORIGIN) >= 0.0
                && orient(p[0], p[1], p[2]).signum() * orient(p[2], p[0], Point::ORIGIN) >= 0.0;
            let dmin = if origin_in {
                0.0
            } else {
                segment_distance(Point::ORIGIN, p[0], p[1])
                    .min(segment_distance(Point::ORIGIN, p[1], p[2]))
                    .min(segment_distance(Point::ORIGIN, p[2], p[0]))
            };
            if dmin >= r {
                return;
            }
            if depth < self.max_depth {
                let mid = |a: [f64; 3], b: [f64; 3]| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])];
                let m01 = mid(corners[0], corners[1]);
                let m12 = mid(corners[1], corners[2]);
                let m20 = mid(corners[2], corners[0]);
                for sub in [[corners[0], m01, m20], [m01, corners[1], m12], [m20, m12, corners[2]], [m01, m12, m20]] {
                    self.clip_element(e, sub, r, depth + 1, rule, q, out);
                }
                return;
            }
        }
        let area = 0.5 * orient(p[0], p[1], p[2]);
        for (lq, w) in rule.points.iter().zip(&rule.weights) {
            let l = [
                lq[0] * corners[0][0] + lq[1] * corners[1][0] + lq[2] * corners[2][0],
                lq[0] * corners[0][1] + lq[1] * corners[1][1] + lq[2] * corners[2][1],
                lq[0] * corners[0][2] + lq[1] * corners[1][2] + lq[2] * corners[2][2],
            ];
            let x = to_phys(l);
            if !inside && x.norm() > r {
                continue;
            }
            let wa = w * area;
            let v = self.space.eval(&self.values, e, l);
            let g = self.space.eval_gradient(&self.values, e, l);
            out.gradient += wa * g.norm2();
            out.weighted_square += wa * q(x) * v * v;
            out.square += wa * v * v;
        }
    }
}

impl Field for FeField {
    fn domain_radius(&self) -> f64 {
        self.space.mesh().radius()
    }

    fn value(&self, x: Point) -> Option<f64> {
        let loc = self.locator.locate(x)?;
        Some(self.space.eval(&self.values, loc.triangle, loc.bary))
    }

    fn gradient(&self, x: Point) -> Option<Point> {
        let loc = self.locator.locate(x)?;
        Some(self.space.eval_gradient(&self.values, loc.triangle, loc.bary))
    }

    fn arc_breaks(&self, r: f64) -> Vec<f64> {
        let mesh = self.space.mesh();
        let mut out = Vec::new();
        for e in mesh.boundary_edges() {
            if e.tag != BoundaryTag::SlitPlus {
                continue;
            }
            let (a, b) = (mesh.vertices()[e.v[0]], mesh.vertices()[e.v[1]]);
            let d = b - a;
            // |a + s d|² = r²
            let (qa, qb, qc) = (d.norm2(), 2.0 * a.dot(d), a.norm2() - r * r);
            let disc = qb * qb - 4.0 * qa * qc;
            if disc < 0.0 {
                continue;
            }
            for s in [(-qb - libm::sqrt(disc)) / (2.0 * qa), (-qb + libm::sqrt(disc)) / (2.0 * qa)] {
                if (0.0..=1.0).contains(&s) {
                    out.push(a.lerp(b, s).angle());
                }
            }
        }
        out
    }

    fn integrate_disk(&self, r: f64, q: &dyn Fn(Point) -> f64) -> DiskIntegrals {
        let rule = TriangleRule::degree5();
        let mut out = DiskIntegrals::default();
        let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        for e in 0..self.space.num_elements() {
            self.clip_element(e, id, r, 0, &rule, q, &mut out);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fe::FeOrder;
    use crate::mesh::{build_half_disk_mesh, MeshOptions};
    use core::f64::consts::PI;

    #[test]
    fn psi_integrals_are_closed_form() {
        for j in 1..4u32 {
            let f = AnalyticField::psi(j, 1.0);
            let h = f.arc_integral(0.5, &|v, _| v * v).unwrap();
            assert!((h - libm::pow(0.5, 2.0 * j as f64) * PI / 2.0).abs() < 1e-14);
            let d = f.integrate_disk(0.5, &|_| 1.0);
            // ∫|∇ψ_j|² over D_r⁺ = j π r^{2j} / 2
            let e = j as f64 * PI * libm::pow(0.5, 2.0 * j as f64) / 2.0;
            assert!((d.gradient - e).abs() < 1e-13, "{} vs {e}", d.gradient);
        }
    }

    #[test]
    fn clipped_fe_integrals_converge() {
        let mesh = build_half_disk_mesh(&MeshOptions::new(1.0, 0.05)).unwrap();
        let space = Arc::new(FeSpace::new(mesh, FeOrder::P2));
        let vals = space.interpolate(|x| psi_j_eval(2, x));
        let f = FeField::new(space, vals);
        let r = 0.63;
        let d = f.integrate_disk(r, &|_| 1.0);
        let e = 2.0 * PI * libm::pow(r, 4.0) / 2.0;
        assert!((d.gradient - e).abs() / e < 2e-4, "{} vs {e}", d.gradient);
        // ∫ψ₂² = r⁶/6 · π/2
        let m = libm::pow(r, 6.0) / 6.0 * PI / 2.0;
        assert!((d.square - m).abs() / m < 2e-4);
        let h = f.arc_integral(r, &|v, _| v * v).unwrap();
        assert!((h - libm::pow(r, 4.0) * PI / 2.0).abs() < 1e-8);
    }
}
