//! Graded triangulations of the half-disk `{|x| < R, x₁ > 0}` and slit insertion.
//!
//! Meshes are generated by seeding a size-adapted point cloud (a quadtree driven
//! by the sizing function), triangulating it with constrained Delaunay
//! triangulation and running Delaunay refinement for angle quality. Polylines
//! that will later become slits must be passed as constraints at generation
//! time; [`insert_slit`] only rewires connectivity along existing edges.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};

use crate::error::{Error, Result};
use crate::geometry::{orient, segment_distance, Point};

/// Boundary edge classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundaryTag {
    DirichletArc,
    Diameter,
    SlitPlus,
    SlitMinus,
}

impl BoundaryTag {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryTag::DirichletArc => "DIRICHLET_ARC",
            BoundaryTag::Diameter => "DIAMETER",
            BoundaryTag::SlitPlus => "SLIT_PLUS",
            BoundaryTag::SlitMinus => "SLIT_MINUS",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "DIRICHLET_ARC" => Some(BoundaryTag::DirichletArc),
            "DIAMETER" => Some(BoundaryTag::Diameter),
            "SLIT_PLUS" => Some(BoundaryTag::SlitPlus),
            "SLIT_MINUS" => Some(BoundaryTag::SlitMinus),
            _ => None,
        }
    }

    /// Homogeneous Dirichlet part of the outer boundary.
    pub fn is_dirichlet(self) -> bool {
        matches!(self, BoundaryTag::DirichletArc | BoundaryTag::Diameter)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryEdge {
    pub v: [usize; 2],
    pub tag: BoundaryTag,
}

/// Local refinement request: element size `local_h` inside the ball of radius
/// `radius` around `center`, growing linearly (with the mesh slope) outside it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grading {
    pub center: Point,
    pub local_h: f64,
    pub radius: f64,
}

impl Grading {
    pub fn new(center: Point, local_h: f64, radius: f64) -> Self {
        Grading { center, local_h, radius }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeshOptions {
    pub radius: f64,
    pub h_target: f64,
    pub gradings: Vec<Grading>,
    /// Growth rate of the element size away from a grading ball. A slope `s`
    /// doubles the size over a distance of `local_h / s`.
    pub slope: f64,
    /// Smallest admissible `local_h`, relative to `radius`.
    pub min_relative_h: f64,
    pub min_angle_deg: f64,
    /// Polylines the triangulation must contain as chains of edges.
    pub constraints: Vec<Vec<Point>>,
}

impl MeshOptions {
    pub fn new(radius: f64, h_target: f64) -> Self {
        MeshOptions {
            radius,
            h_target,
            gradings: Vec::new(),
            slope: 0.25,
            min_relative_h: 1e-7,
            min_angle_deg: 25.0,
            constraints: Vec::new(),
        }
    }

    pub fn with_grading(mut self, g: Grading) -> Self {
        self.gradings.push(g);
        self
    }

    pub fn with_constraint(mut self, polyline: Vec<Point>) -> Self {
        self.constraints.push(polyline);
        self
    }

    /// Target element diameter at `x`.
    pub fn size_at(&self, x: Point) -> f64 {
        let mut h = self.h_target;
        for g in &self.gradings {
            let d = x.dist(g.center);
            let hg = if d <= g.radius { g.local_h } else { g.local_h + self.slope * (d - g.radius) };
            h = h.min(hg);
        }
        h
    }

    fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::invalid(format!("radius must be positive, got {}", self.radius)));
        }
        if !(self.h_target > 0.0 && self.h_target < self.radius) {
            return Err(Error::invalid(format!("h_target must lie in (0, radius), got {}", self.h_target)));
        }
        if !(self.slope > 0.0 && self.slope <= 1.0) {
            return Err(Error::invalid(format!("grading slope must lie in (0, 1], got {}", self.slope)));
        }
        let min_h = self.min_relative_h * self.radius;
        for g in &self.gradings {
            if !(g.local_h < self.h_target) {
                return Err(Error::invalid(format!(
                    "grading local_h {} must be below h_target {}",
                    g.local_h, self.h_target
                )));
            }
            if !(g.local_h >= min_h) {
                return Err(Error::InfeasibleGrading { center: g.center, local_h: g.local_h, min_h });
            }
        }
        for poly in &self.constraints {
            if poly.len() < 2 {
                return Err(Error::invalid("constraint polyline needs at least two points"));
            }
            for w in poly.windows(2) {
                if w[0].dist(w[1]) <= min_h {
                    return Err(Error::invalid("constraint polyline has a degenerate segment"));
                }
            }
            if !polyline_is_simple(poly) {
                return Err(Error::invalid("constraint polyline is self-intersecting"));
            }
            let tol = 1e-12 * self.radius;
            for p in poly {
                if p.x < -tol || p.norm() > self.radius * (1.0 + 1e-12) {
                    return Err(Error::invalid(format!(
                        "constraint point ({}, {}) lies outside the half-disk",
                        p.x, p.y
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A conforming triangulation of a (possibly slit) half-disk.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarMesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<BoundaryEdge>,
    slit_pairs: Vec<[usize; 2]>,
    radius: f64,
}

impl PlanarMesh {
    /// Assembles a mesh from raw parts and checks its invariants.
    pub fn from_parts(
        radius: f64,
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary: Vec<BoundaryEdge>,
        slit_pairs: Vec<[usize; 2]>,
    ) -> Result<Self> {
        let mesh = PlanarMesh { vertices, triangles, boundary, slit_pairs, radius };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    pub fn slit_pairs(&self) -> &[[usize; 2]] {
        &self.slit_pairs
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * orient(a, b, c)
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Area of the polygon bounded by the boundary vertices of the unslit domain.
    pub fn polygon_area(&self) -> f64 {
        // shoelace over outer boundary edges, oriented consistently with the triangles
        let mut area = 0.0;
        for t in 0..self.triangles.len() {
            let tri = self.triangles[t];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                if self
                    .boundary
                    .iter()
                    .any(|e| e.tag.is_dirichlet() && ((e.v[0] == a && e.v[1] == b) || (e.v[0] == b && e.v[1] == a)))
                {
                    area += 0.5 * self.vertices[a].cross(self.vertices[b]);
                }
            }
        }
        area
    }

    pub fn longest_edge(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        a.dist(b).max(b.dist(c)).max(c.dist(a))
    }

    pub fn min_angle_deg(&self) -> f64 {
        let mut min = f64::INFINITY;
        for t in 0..self.triangles.len() {
            let p = self.triangle_points(t);
            for k in 0..3 {
                let u = p[(k + 1) % 3] - p[k];
                let v = p[(k + 2) % 3] - p[k];
                let ang = libm::atan2(u.cross(v).abs(), u.dot(v));
                min = min.min(ang.to_degrees());
            }
        }
        min
    }

    /// Largest edge length among triangles meeting the ball `|x - center| < r`.
    pub fn max_edge_near(&self, center: Point, r: f64) -> f64 {
        (0..self.triangles.len())
            .filter(|&t| {
                let [a, b, c] = self.triangle_points(t);
                a.dist(center) < r || b.dist(center) < r || c.dist(center) < r
            })
            .map(|t| self.longest_edge(t))
            .fold(0.0, f64::max)
    }

    /// Vertices on the homogeneous Dirichlet boundary.
    pub fn dirichlet_vertices(&self) -> Vec<bool> {
        let mut mark = alloc::vec![false; self.vertices.len()];
        for e in &self.boundary {
            if e.tag.is_dirichlet() {
                mark[e.v[0]] = true;
                mark[e.v[1]] = true;
            }
        }
        mark
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        let err = |m: alloc::string::String| Err(Error::Meshing(m));
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= n) {
                return err(format!("triangle {t} references a missing vertex"));
            }
            if !(self.triangle_area(t) > 0.0) {
                return err(format!("triangle {t} has non-positive signed area"));
            }
        }
        let mut edge_use: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *edge_use.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        let mut bset: BTreeMap<(usize, usize), BoundaryTag> = BTreeMap::new();
        for e in &self.boundary {
            let [a, b] = e.v;
            if a >= n || b >= n {
                return err("boundary edge references a missing vertex".to_string());
            }
            bset.insert((a.min(b), a.max(b)), e.tag);
        }
        for (&(a, b), &count) in &edge_use {
            match count {
                1 if bset.contains_key(&(a, b)) => {}
                1 => return err(format!("edge ({a}, {b}) is used once but is not a boundary edge")),
                2 if !bset.contains_key(&(a, b)) => {}
                2 => return err(format!("interior edge ({a}, {b}) is tagged as boundary")),
                c => return err(format!("edge ({a}, {b}) is shared by {c} triangles")),
            }
        }
        let rtol = 1e-12 * self.radius;
        for e in &self.boundary {
            for &v in &e.v {
                let p = self.vertices[v];
                match e.tag {
                    BoundaryTag::Diameter if p.x.abs() > rtol => {
                        return err(format!("DIAMETER vertex {v} is off the line x1 = 0"));
                    }
                    BoundaryTag::DirichletArc if (p.norm() - self.radius).abs() > rtol => {
                        return err(format!("DIRICHLET_ARC vertex {v} is off the outer circle"));
                    }
                    _ => {}
                }
            }
        }
        // slit edges come in coincident plus/minus pairs
        let plus: Vec<&BoundaryEdge> = self.boundary.iter().filter(|e| e.tag == BoundaryTag::SlitPlus).collect();
        let minus: Vec<&BoundaryEdge> = self.boundary.iter().filter(|e| e.tag == BoundaryTag::SlitMinus).collect();
        if plus.len() != minus.len() {
            return err("unpaired slit edges".to_string());
        }
        for e in &plus {
            let (p0, p1) = (self.vertices[e.v[0]], self.vertices[e.v[1]]);
            let partner = minus.iter().any(|m| {
                let (q0, q1) = (self.vertices[m.v[0]], self.vertices[m.v[1]]);
                ((p0 == q0 && p1 == q1) || (p0 == q1 && p1 == q0)) && (m.v != e.v)
            });
            if !partner {
                return err(format!("SLIT_PLUS edge {:?} has no coincident SLIT_MINUS partner", e.v));
            }
        }
        for &[p, m] in &self.slit_pairs {
            if p >= n || m >= n || p == m || self.vertices[p] != self.vertices[m] {
                return err(format!("invalid slit pair ({p}, {m})"));
            }
        }
        Ok(())
    }
}

/// Generates a graded mesh of the half-disk honoring the constraint polylines.
pub fn build_half_disk_mesh(opts: &MeshOptions) -> Result<PlanarMesh> {
    opts.validate()?;
    let r = opts.radius;
    let tol = 1e-10 * r;

    let mut pts = PointSet::new(tol);
    let mut edges: Vec<[usize; 2]> = Vec::new();

    // anchors on the diameter (by x2) and on the arc (by angle)
    let mut dia_anchors: Vec<Point> = alloc::vec![Point::new(0.0, -r), Point::ORIGIN, Point::new(0.0, r)];
    let mut arc_anchors: Vec<Point> = alloc::vec![Point::new(0.0, -r), Point::new(0.0, r)];
    for poly in &opts.constraints {
        for p in [poly[0], poly[poly.len() - 1]] {
            if p.x.abs() <= tol {
                dia_anchors.push(Point::new(0.0, p.y));
            } else if (p.norm() - r).abs() <= tol {
                arc_anchors.push(p);
            }
        }
    }
    dia_anchors.sort_by(|a, b| a.y.total_cmp(&b.y));
    dia_anchors.dedup_by(|a, b| a.dist(*b) <= tol);
    arc_anchors.sort_by(|a, b| a.angle().total_cmp(&b.angle()));
    arc_anchors.dedup_by(|a, b| a.dist(*b) <= tol);

    // diameter chain
    for w in dia_anchors.windows(2) {
        let chain = march_segment(w[0], w[1], opts);
        add_chain(&mut pts, &mut edges, &chain);
    }
    // arc chain
    for w in arc_anchors.windows(2) {
        let (t0, t1) = (w[0].angle().clamp(-FRAC_PI_2, FRAC_PI_2), w[1].angle().clamp(-FRAC_PI_2, FRAC_PI_2));
        let mut chain = march_arc(r, t0, t1, opts);
        let last = chain.len() - 1;
        chain[0] = w[0];
        chain[last] = w[1];
        add_chain(&mut pts, &mut edges, &chain);
    }
    // constraint polylines
    for poly in &opts.constraints {
        let mut chain: Vec<Point> = Vec::new();
        for w in poly.windows(2) {
            let seg = march_segment(w[0], w[1], opts);
            if chain.is_empty() {
                chain.extend(seg);
            } else {
                chain.extend(seg.into_iter().skip(1));
            }
        }
        add_chain(&mut pts, &mut edges, &chain);
    }

    // interior seeds from a size-driven quadtree
    for seed in quadtree_seeds(opts) {
        pts.push_unchecked(seed);
    }

    let vertices: Vec<Point2<f64>> = pts.points.iter().map(|p| Point2::new(p.x, p.y)).collect();
    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::bulk_load_cdt(vertices, edges)
        .map_err(|e| Error::Meshing(format!("triangulation failed: {e:?}")))?;

    let angle = AngleLimit::from_deg(opts.min_angle_deg);
    let params = || {
        RefinementParameters::<f64>::new()
            .with_angle_limit(angle)
            .with_min_required_area(0.01 * (opts.min_relative_h * r).powi(2))
    };
    cdt.refine(params());

    // enforce the sizing function
    for _round in 0..12 {
        let mut inserts = Vec::new();
        for face in cdt.inner_faces() {
            let v = face.vertices().map(|h| {
                let p = h.position();
                Point::new(p.x, p.y)
            });
            let longest = v[0].dist(v[1]).max(v[1].dist(v[2])).max(v[2].dist(v[0]));
            let c = Point::new((v[0].x + v[1].x + v[2].x) / 3.0, (v[0].y + v[1].y + v[2].y) / 3.0);
            let h = opts.size_at(c).min(opts.size_at(v[0])).min(opts.size_at(v[1])).min(opts.size_at(v[2]));
            if longest > h {
                inserts.push(c);
            }
        }
        if inserts.is_empty() {
            break;
        }
        for c in inserts {
            cdt.insert(Point2::new(c.x, c.y)).map_err(|e| Error::Meshing(format!("insertion failed: {e:?}")))?;
        }
        cdt.refine(params());
    }

    extract_mesh(&cdt, opts)
}

fn extract_mesh(cdt: &ConstrainedDelaunayTriangulation<Point2<f64>>, opts: &MeshOptions) -> Result<PlanarMesh> {
    let r = opts.radius;
    let tol = 1e-10 * r;
    let mut vertices: Vec<Point> = cdt
        .vertices()
        .map(|v| {
            let p = v.position();
            Point::new(p.x, p.y)
        })
        .collect();
    let mut triangles = Vec::with_capacity(cdt.num_inner_faces());
    for face in cdt.inner_faces() {
        let [a, b, c] = face.vertices().map(|v| v.fix().index());
        triangles.push([a, b, c]);
    }
    let mut hull_edges: Vec<[usize; 2]> = Vec::new();
    for e in cdt.undirected_edges() {
        if e.is_part_of_convex_hull() {
            let [a, b] = e.vertices().map(|v| v.fix().index());
            hull_edges.push([a.min(b), a.max(b)]);
        }
    }
    hull_edges.sort_unstable();

    // Steiner points placed on arc chords are moved onto the circle
    let mut on_diameter = alloc::vec![false; vertices.len()];
    for &[a, b] in &hull_edges {
        if vertices[a].x.abs() <= tol && vertices[b].x.abs() <= tol {
            on_diameter[a] = true;
            on_diameter[b] = true;
        }
    }
    let mut boundary = Vec::with_capacity(hull_edges.len());
    for &[a, b] in &hull_edges {
        let tag = if on_diameter[a] && on_diameter[b] && vertices[a].x.abs() <= tol && vertices[b].x.abs() <= tol {
            BoundaryTag::Diameter
        } else {
            BoundaryTag::DirichletArc
        };
        if tag == BoundaryTag::DirichletArc {
            for v in [a, b] {
                let n = vertices[v].norm();
                if n != r && !(on_diameter[v] && vertices[v].y.abs() < r * (1.0 - 1e-9)) {
                    vertices[v] = (r / n) * vertices[v];
                }
            }
        } else {
            for v in [a, b] {
                vertices[v].x = 0.0;
            }
        }
        boundary.push(BoundaryEdge { v: [a, b], tag });
    }
    // snapping keeps corners exact
    for v in vertices.iter_mut() {
        if v.x == 0.0 && (v.y.abs() - r).abs() <= tol {
            v.y = r * v.y.signum();
        }
    }
    let mesh = PlanarMesh { vertices, triangles, boundary, slit_pairs: Vec::new(), radius: r };
    mesh.validate()?;
    Ok(mesh)
}

struct PointSet {
    points: Vec<Point>,
    /// indices of points that are chain ends (candidates for de-duplication)
    anchors: Vec<usize>,
    tol: f64,
}

impl PointSet {
    fn new(tol: f64) -> Self {
        PointSet { points: Vec::new(), anchors: Vec::new(), tol }
    }

    fn push_anchor(&mut self, p: Point) -> usize {
        if let Some(&i) = self.anchors.iter().find(|&&i| self.points[i].dist(p) <= self.tol) {
            return i;
        }
        self.points.push(p);
        let i = self.points.len() - 1;
        self.anchors.push(i);
        i
    }

    fn push_unchecked(&mut self, p: Point) -> usize {
        self.points.push(p);
        self.points.len() - 1
    }
}

fn add_chain(pts: &mut PointSet, edges: &mut Vec<[usize; 2]>, chain: &[Point]) {
    let n = chain.len();
    let mut prev = pts.push_anchor(chain[0]);
    for (k, &p) in chain.iter().enumerate().skip(1) {
        let id = if k == n - 1 { pts.push_anchor(p) } else { pts.push_unchecked(p) };
        edges.push([prev, id]);
        prev = id;
    }
}

/// Points from `a` to `b` (both included) spaced according to the sizing function.
fn march_segment(a: Point, b: Point, opts: &MeshOptions) -> Vec<Point> {
    let len = a.dist(b);
    let params = march_params(len, |s| opts.size_at(a.lerp(b, s / len)), opts.slope);
    params.into_iter().map(|s| a.lerp(b, s / len)).collect()
}

fn march_arc(r: f64, t0: f64, t1: f64, opts: &MeshOptions) -> Vec<Point> {
    let len = r * (t1 - t0);
    let params = march_params(len, |s| opts.size_at(Point::polar(r, t0 + s / r)), opts.slope);
    params.into_iter().map(|s| Point::polar(r, t0 + s / r)).collect()
}

/// Arc-length parameters `0 = s_0 < ... < s_n = len` with steps of about 0.9·h.
fn march_params(len: f64, size: impl Fn(f64) -> f64, slope: f64) -> Vec<f64> {
    let factor = 0.9;
    let mut s = 0.0;
    let mut params = alloc::vec![0.0];
    while s < len {
        let h = size(s);
        let step = factor * h / (1.0 + factor * slope);
        let step = step.min(factor * size((s + step).min(len)));
        s += step;
        params.push(s);
    }
    let total = *params.last().unwrap();
    if params.len() > 2 && total - len > 0.0 {
        // drop the overshoot by stretching, or merge a tiny last step
        let last_step = total - params[params.len() - 2];
        let overshoot = total - len;
        if overshoot > 0.5 * last_step {
            params.pop();
        }
    }
    let total = *params.last().unwrap();
    if params.len() == 1 {
        params.push(len);
    } else {
        for p in params.iter_mut() {
            *p *= len / total;
        }
    }
    let n = params.len();
    params[n - 1] = len;
    params
}

fn quadtree_seeds(opts: &MeshOptions) -> Vec<Point> {
    let r = opts.radius;
    let mut seeds = Vec::new();
    // each entry: lower-left corner and side
    let mut stack: Vec<(Point, f64)> = alloc::vec![(Point::new(0.0, -r), r), (Point::new(0.0, 0.0), r)];
    let segments: Vec<(Point, Point)> =
        opts.constraints.iter().flat_map(|poly| poly.windows(2).map(|w| (w[0], w[1]))).collect();
    while let Some((ll, side)) = stack.pop() {
        // skip cells outside the disk
        let nearest = Point::new(0.0f64.clamp(ll.x, ll.x + side), 0.0f64.clamp(ll.y, ll.y + side));
        if nearest.norm() >= r {
            continue;
        }
        let c = Point::new(ll.x + 0.5 * side, ll.y + 0.5 * side);
        let corners =
            [ll, Point::new(ll.x + side, ll.y), Point::new(ll.x, ll.y + side), Point::new(ll.x + side, ll.y + side)];
        let h = corners.iter().fold(opts.size_at(c), |h, &q| h.min(opts.size_at(q)));
        if side > 0.7 * h {
            let half = 0.5 * side;
            for (dx, dy) in [(0.0, 0.0), (half, 0.0), (0.0, half), (half, half)] {
                stack.push((Point::new(ll.x + dx, ll.y + dy), half));
            }
            continue;
        }
        let margin = 0.5 * side;
        if c.x < margin || c.norm() > r - margin {
            continue;
        }
        if segments.iter().any(|&(a, b)| segment_distance(c, a, b) < margin) {
            continue;
        }
        seeds.push(c);
    }
    // deterministic order, independent of the traversal
    seeds.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    seeds
}

fn polyline_is_simple(poly: &[Point]) -> bool {
    let n = poly.len();
    for i in 0..n - 1 {
        for k in (i + 2)..n - 1 {
            if segments_intersect(poly[i], poly[i + 1], poly[k], poly[k + 1]) {
                return false;
            }
        }
    }
    true
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// How a slit ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EndpointKind {
    InteriorTip,
    BoundaryAnchor,
}

/// Connectivity of a slit after node duplication.
#[derive(Clone, Debug, PartialEq)]
pub struct SlitTopology {
    /// (plus, minus) node pairs for the interior nodes of the slit, in order.
    pub pairs: Vec<(usize, usize)>,
    /// Node chain on the plus (left) side, endpoints included.
    pub chain_plus: Vec<usize>,
    /// Node chain on the minus (right) side, endpoints included.
    pub chain_minus: Vec<usize>,
    pub start: Point,
    pub end: Point,
    pub start_kind: EndpointKind,
    pub end_kind: EndpointKind,
}

impl SlitTopology {
    pub fn start_node(&self) -> usize {
        self.chain_plus[0]
    }

    pub fn end_node(&self) -> usize {
        self.chain_plus[self.chain_plus.len() - 1]
    }

    /// The interior tip, if the slit has exactly one.
    pub fn interior_tip(&self) -> Option<(usize, Point)> {
        match (self.start_kind, self.end_kind) {
            (EndpointKind::InteriorTip, EndpointKind::BoundaryAnchor) => Some((self.start_node(), self.start)),
            (EndpointKind::BoundaryAnchor, EndpointKind::InteriorTip) => Some((self.end_node(), self.end)),
            _ => None,
        }
    }
}

/// Cuts the mesh open along a polyline already present as a chain of edges.
///
/// Interior polyline nodes are duplicated; triangles on the left of the
/// polyline (walking from its first to its last point) keep the original
/// node, triangles on the right get the copy. Endpoints are not duplicated.
pub fn insert_slit(mesh: &PlanarMesh, polyline: &[Point]) -> Result<(PlanarMesh, SlitTopology)> {
    if polyline.len() < 2 {
        return Err(Error::invalid("slit polyline needs at least two points"));
    }
    if !polyline_is_simple(polyline) {
        return Err(Error::invalid("slit polyline is self-intersecting"));
    }
    let r = mesh.radius;
    let tol = 1e-9 * r;
    let nv = mesh.vertices.len();

    let mut adjacency: Vec<Vec<usize>> = alloc::vec![Vec::new(); nv];
    let mut incident: Vec<Vec<usize>> = alloc::vec![Vec::new(); nv];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            adjacency[a].push(b);
            adjacency[b].push(a);
            incident[tri[k]].push(t);
        }
    }
    for adj in adjacency.iter_mut() {
        adj.sort_unstable();
        adj.dedup();
    }

    let find_vertex = |p: Point| -> Option<usize> { (0..nv).find(|&v| mesh.vertices[v].dist(p) <= tol) };
    let start = find_vertex(polyline[0])
        .ok_or_else(|| Error::SlitNotResolved("start point is not a mesh vertex".to_string()))?;

    // walk along mesh edges lying on the polyline
    let mut chain = alloc::vec![start];
    let mut seg = 0usize;
    let mut current = start;
    let nseg = polyline.len() - 1;
    let mut guard = 0usize;
    while seg < nseg {
        guard += 1;
        if guard > nv {
            return Err(Error::SlitNotResolved("walk did not terminate".to_string()));
        }
        let (a, b) = (polyline[seg], polyline[seg + 1]);
        if mesh.vertices[current].dist(b) <= tol {
            seg += 1;
            continue;
        }
        let dir = b - a;
        let len2 = dir.norm2();
        let s_cur = (mesh.vertices[current] - a).dot(dir) / len2;
        let mut best: Option<(f64, usize)> = None;
        for &v in &adjacency[current] {
            let p = mesh.vertices[v];
            if segment_distance(p, a, b) > tol {
                continue;
            }
            let s = (p - a).dot(dir) / len2;
            if s > s_cur + 1e-14 && best.is_none_or(|(bs, _)| s < bs) {
                best = Some((s, v));
            }
        }
        match best {
            Some((_, v)) => {
                if chain.contains(&v) {
                    return Err(Error::SlitNotResolved("walk revisits a node".to_string()));
                }
                chain.push(v);
                current = v;
            }
            None => {
                return Err(Error::SlitNotResolved(format!(
                    "no mesh edge continues segment {seg} from vertex {current}"
                )));
            }
        }
    }
    if chain.len() < 3 {
        return Err(Error::SlitNotResolved("slit must contain at least one interior mesh node".to_string()));
    }
    if mesh.slit_pairs.iter().any(|&[p, m]| chain.contains(&p) || chain.contains(&m)) {
        return Err(Error::invalid("slit crosses an existing slit"));
    }

    let classify = |p: Point| {
        if p.x.abs() <= tol || (p.norm() - r).abs() <= tol {
            EndpointKind::BoundaryAnchor
        } else {
            EndpointKind::InteriorTip
        }
    };

    let mut vertices = mesh.vertices.clone();
    let mut triangles = mesh.triangles.clone();
    let mut chain_minus = chain.clone();
    let mut pairs = Vec::new();
    for k in 1..chain.len() - 1 {
        let v = chain[k];
        if classify(mesh.vertices[v]) == EndpointKind::BoundaryAnchor {
            return Err(Error::invalid("slit touches the outer boundary at an interior node"));
        }
        let copy = vertices.len();
        vertices.push(mesh.vertices[v]);
        chain_minus[k] = copy;
        pairs.push((v, copy));
        let origin = mesh.vertices[v];
        let next = mesh.vertices[chain[k + 1]] - origin;
        let prev = mesh.vertices[chain[k - 1]] - origin;
        let sector = ccw_angle(next, prev);
        for &t in &incident[v] {
            let [a, b, c] = mesh.triangle_points(t);
            let centroid = Point::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0);
            let on_left = ccw_angle(next, centroid - origin) < sector;
            if !on_left {
                for node in triangles[t].iter_mut() {
                    if *node == v {
                        *node = copy;
                    }
                }
            }
        }
    }
    let mut boundary = mesh.boundary.clone();
    for k in 0..chain.len() - 1 {
        boundary.push(BoundaryEdge { v: [chain[k], chain[k + 1]], tag: BoundaryTag::SlitPlus });
        boundary.push(BoundaryEdge { v: [chain_minus[k], chain_minus[k + 1]], tag: BoundaryTag::SlitMinus });
    }
    let mut slit_pairs = mesh.slit_pairs.clone();
    slit_pairs.extend(pairs.iter().map(|&(p, m)| [p, m]));

    let start_pt = mesh.vertices[chain[0]];
    let end_pt = mesh.vertices[chain[chain.len() - 1]];
    let topo = SlitTopology {
        pairs,
        chain_plus: chain,
        chain_minus,
        start: start_pt,
        end: end_pt,
        start_kind: classify(start_pt),
        end_kind: classify(end_pt),
    };
    let out = PlanarMesh { vertices, triangles, boundary, slit_pairs, radius: r };
    out.validate()?;
    Ok((out, topo))
}

/// Counter-clockwise angle in `[0, 2π)` from `from` to `to`.
fn ccw_angle(from: Point, to: Point) -> f64 {
    let a = libm::atan2(from.cross(to), from.dot(to));
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_uniform_mesh_is_valid_with_good_angles() {
        let mesh = build_half_disk_mesh(&MeshOptions::new(1.0, 0.2)).unwrap();
        mesh.validate().unwrap();
        assert!(mesh.min_angle_deg() >= 20.0, "min angle {}", mesh.min_angle_deg());
        let nt = mesh.triangles().len();
        assert!((20..=400).contains(&nt), "{nt} triangles");
        let max_edge = (0..nt).map(|t| mesh.longest_edge(t)).fold(0.0, f64::max);
        assert!(max_edge <= 0.2 + 1e-12);
    }

    #[test]
    fn grading_contract_holds() {
        let opts = MeshOptions::new(1.0, 0.1).with_grading(Grading::new(Point::new(0.3, 0.0), 0.01, 0.05));
        let mesh = build_half_disk_mesh(&opts).unwrap();
        let near = mesh.max_edge_near(Point::new(0.3, 0.0), 0.05);
        assert!(near <= 0.01 + 1e-12, "max edge near grading centre {near}");
    }

    #[test]
    fn infeasible_grading_is_rejected() {
        let opts = MeshOptions::new(1.0, 0.1).with_grading(Grading::new(Point::new(0.3, 0.0), 1e-9, 0.05));
        assert!(matches!(build_half_disk_mesh(&opts), Err(Error::InfeasibleGrading { .. })));
        let opts = MeshOptions::new(1.0, 0.1).with_grading(Grading::new(Point::new(0.3, 0.0), 0.2, 0.05));
        assert!(matches!(build_half_disk_mesh(&opts), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn generation_is_deterministic() {
        let opts = MeshOptions::new(1.0, 0.15)
            .with_grading(Grading::new(Point::ORIGIN, 0.02, 0.0))
            .with_constraint(alloc::vec![Point::new(0.0, 0.0), Point::new(0.5, 0.5)]);
        let a = build_half_disk_mesh(&opts).unwrap();
        let b = build_half_disk_mesh(&opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn slit_with_two_boundary_free_tips() {
        let poly = alloc::vec![Point::new(0.1, 0.0), Point::new(0.5, 0.5)];
        let opts = MeshOptions::new(1.0, 0.1).with_constraint(poly.clone());
        let mesh = build_half_disk_mesh(&opts).unwrap();
        let (slit_mesh, topo) = insert_slit(&mesh, &poly).unwrap();
        assert!(topo.pairs.len() >= 2);
        assert_eq!(topo.start_kind, EndpointKind::InteriorTip);
        assert_eq!(topo.end_kind, EndpointKind::InteriorTip);
        // duplicates = interior chain nodes
        assert_eq!(slit_mesh.vertices().len() - mesh.vertices().len(), topo.chain_plus.len() - 2);
        assert_eq!(topo.chain_plus[0], topo.chain_minus[0]);
        // coordinates and areas are preserved
        for t in 0..mesh.triangles().len() {
            assert_eq!(mesh.triangle_area(t), slit_mesh.triangle_area(t));
        }
    }

    #[test]
    fn slit_to_outer_arc_has_boundary_anchor() {
        let poly = alloc::vec![Point::new(0.3, 0.0), Point::new(1.0, 0.0)];
        let opts = MeshOptions::new(1.0, 0.1)
            .with_grading(Grading::new(Point::new(0.3, 0.0), 0.01, 0.0))
            .with_constraint(poly.clone());
        let mesh = build_half_disk_mesh(&opts).unwrap();
        let (_, topo) = insert_slit(&mesh, &poly).unwrap();
        assert_eq!(topo.start_kind, EndpointKind::InteriorTip);
        assert_eq!(topo.end_kind, EndpointKind::BoundaryAnchor);
        assert_eq!(topo.interior_tip().unwrap().1, Point::new(0.3, 0.0));
    }

    #[test]
    fn unresolved_polyline_is_rejected() {
        let mesh = build_half_disk_mesh(&MeshOptions::new(1.0, 0.2)).unwrap();
        let poly = [Point::new(0.11, 0.013), Point::new(0.57, 0.31)];
        assert!(matches!(insert_slit(&mesh, &poly), Err(Error::SlitNotResolved(_))));
    }

    #[test]
    fn large_graded_mesh_area() {
        let tip = Point::new(1.0, 0.0);
        let opts = MeshOptions::new(32.0, 1.0)
            .with_grading(Grading::new(tip, 0.01, 0.0))
            .with_constraint(alloc::vec![Point::ORIGIN, tip]);
        let mesh = build_half_disk_mesh(&opts).unwrap();
        let exact = PI * 32.0 * 32.0 / 2.0;
        assert!((mesh.area() - exact).abs() / exact < 5e-3);
        assert!((mesh.area() - mesh.polygon_area()).abs() < 1e-9 * exact);
    }
}
