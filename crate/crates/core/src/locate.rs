//! Point location in a triangle mesh through a bounding-volume hierarchy.

use alloc::vec::Vec;

use crate::geometry::{orient, Point};
use crate::mesh::PlanarMesh;

const LEAF_SIZE: usize = 8;

#[derive(Clone, Copy, Debug)]
struct BBox {
    lo: Point,
    hi: Point,
}

impl BBox {
    fn empty() -> Self {
        BBox { lo: Point::new(f64::INFINITY, f64::INFINITY), hi: Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY) }
    }

    fn grow(&mut self, p: Point) {
        self.lo = Point::new(self.lo.x.min(p.x), self.lo.y.min(p.y));
        self.hi = Point::new(self.hi.x.max(p.x), self.hi.y.max(p.y));
    }

    fn merge(&mut self, o: &BBox) {
        self.grow(o.lo);
        self.grow(o.hi);
    }

    fn contains(&self, p: Point, tol: f64) -> bool {
        p.x >= self.lo.x - tol && p.x <= self.hi.x + tol && p.y >= self.lo.y - tol && p.y <= self.hi.y + tol
    }
}

#[derive(Clone, Debug)]
enum Node {
    Leaf { bbox: BBox, start: usize, end: usize },
    Inner { bbox: BBox, left: usize, right: usize },
}

/// Triangle lookup structure over the triangles of one mesh.
#[derive(Clone, Debug)]
pub struct Locator {
    nodes: Vec<Node>,
    order: Vec<usize>,
    tris: Vec<[Point; 3]>,
    tol: f64,
}

/// Result of a point query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Location {
    pub triangle: usize,
    /// Barycentric coordinates in `[0, 1]`, summing to one.
    pub bary: [f64; 3],
}

impl Locator {
    pub fn new(mesh: &PlanarMesh) -> Self {
        let tris: Vec<[Point; 3]> = (0..mesh.triangles().len()).map(|t| mesh.triangle_points(t)).collect();
        let mut order: Vec<usize> = (0..tris.len()).collect();
        let mut nodes = Vec::new();
        if !tris.is_empty() {
            build(&tris, &mut order, 0, tris.len(), &mut nodes);
        }
        Locator { nodes, order, tris, tol: 1e-12 * mesh.radius() }
    }

    /// The lowest-index triangle containing `x` (boundary included), if any.
    pub fn locate(&self, x: Point) -> Option<Location> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best: Option<Location> = None;
        let mut stack = alloc::vec![0usize];
        while let Some(n) = stack.pop() {
            match &self.nodes[n] {
                Node::Leaf { bbox, start, end } => {
                    if !bbox.contains(x, self.tol) {
                        continue;
                    }
                    for &t in &self.order[*start..*end] {
                        if best.is_some_and(|b| b.triangle < t) {
                            continue;
                        }
                        if let Some(bary) = barycentric(&self.tris[t], x, 1e-12) {
                            best = Some(Location { triangle: t, bary });
                        }
                    }
                }
                Node::Inner { bbox, left, right } => {
                    if bbox.contains(x, self.tol) {
                        stack.push(*left);
                        stack.push(*right);
                    }
                }
            }
        }
        best
    }
}

fn build(tris: &[[Point; 3]], order: &mut [usize], start: usize, end: usize, nodes: &mut Vec<Node>) -> usize {
    let mut bbox = BBox::empty();
    let mut cbox = BBox::empty();
    for &t in &order[start..end] {
        for p in tris[t] {
            bbox.grow(p);
        }
        cbox.grow(centroid(&tris[t]));
    }
    let id = nodes.len();
    if end - start <= LEAF_SIZE {
        nodes.push(Node::Leaf { bbox, start, end });
        return id;
    }
    nodes.push(Node::Leaf { bbox, start, end });
    let wide_x = cbox.hi.x - cbox.lo.x >= cbox.hi.y - cbox.lo.y;
    let key = |t: &usize| {
        let c = centroid(&tris[*t]);
        if wide_x {
            c.x
        } else {
            c.y
        }
    };
    let mid = start + (end - start) / 2;
    order[start..end].select_nth_unstable_by(mid - start, |a, b| key(a).total_cmp(&key(b)).then(a.cmp(b)));
    let left = build(tris, order, start, mid, nodes);
    let right = build(tris, order, mid, end, nodes);
    let mut merged = BBox::empty();
    for child in [left, right] {
        match &nodes[child] {
            Node::Leaf { bbox, .. } | Node::Inner { bbox, .. } => merged.merge(bbox),
        }
    }
    nodes[id] = Node::Inner { bbox: merged, left, right };
    id
}

fn centroid(t: &[Point; 3]) -> Point {
    Point::new((t[0].x + t[1].x + t[2].x) / 3.0, (t[0].y + t[1].y + t[2].y) / 3.0)
}

/// Barycentric coordinates of `x` in the triangle, clamped into `[0, 1]`, or
/// `None` if `x` is outside by more than `tol` (relative to the area).
pub fn barycentric(t: &[Point; 3], x: Point, tol: f64) -> Option<[f64; 3]> {
    let area = orient(t[0], t[1], t[2]);
    let l0 = orient(x, t[1], t[2]) / area;
    let l1 = orient(t[0], x, t[2]) / area;
    let l2 = orient(t[0], t[1], x) / area;
    if l0 < -tol || l1 < -tol || l2 < -tol {
        return None;
    }
    let l = [l0.max(0.0), l1.max(0.0), l2.max(0.0)];
    let s = l[0] + l[1] + l[2];
    Some([l[0] / s, l[1] / s, l[2] / s])
}
