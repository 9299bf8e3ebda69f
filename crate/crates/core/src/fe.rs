//! Lagrange finite-element spaces (P1/P2) on planar meshes and reduced assembly.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::{PlanarMesh, SlitTopology};
use crate::quadrature::{gauss_legendre, TriangleRule};
use crate::sparse::{CsrMatrix, TripletBuilder};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeOrder {
    P1,
    P2,
}

impl FeOrder {
    pub fn from_degree(d: u32) -> Result<Self> {
        match d {
            1 => Ok(FeOrder::P1),
            2 => Ok(FeOrder::P2),
            _ => Err(Error::invalid(alloc::format!("finite element order must be 1 or 2, got {d}"))),
        }
    }

    pub fn degree(self) -> u32 {
        match self {
            FeOrder::P1 => 1,
            FeOrder::P2 => 2,
        }
    }

    pub fn nodes_per_element(self) -> usize {
        match self {
            FeOrder::P1 => 3,
            FeOrder::P2 => 6,
        }
    }
}

/// Global node numbering: mesh vertices first, then (for P2) one node per edge.
/// Element nodes are ordered `v0 v1 v2 m01 m12 m20`.
#[derive(Clone, Debug)]
pub struct FeSpace {
    mesh: PlanarMesh,
    order: FeOrder,
    nodes: Vec<Point>,
    elements: Vec<[usize; 6]>,
    edge_nodes: BTreeMap<(usize, usize), usize>,
}

impl FeSpace {
    pub fn new(mesh: PlanarMesh, order: FeOrder) -> Self {
        let mut nodes: Vec<Point> = mesh.vertices().to_vec();
        let mut edge_nodes = BTreeMap::new();
        let mut elements = Vec::with_capacity(mesh.triangles().len());
        for tri in mesh.triangles() {
            let mut el = [tri[0], tri[1], tri[2], usize::MAX, usize::MAX, usize::MAX];
            if order == FeOrder::P2 {
                for k in 0..3 {
                    let (a, b) = (tri[k], tri[(k + 1) % 3]);
                    let key = (a.min(b), a.max(b));
                    let id = *edge_nodes.entry(key).or_insert_with(|| {
                        let p = mesh.vertices()[a].lerp(mesh.vertices()[b], 0.5);
                        nodes.push(p);
                        nodes.len() - 1
                    });
                    el[3 + k] = id;
                }
            }
            elements.push(el);
        }
        FeSpace { mesh, order, nodes, elements, edge_nodes }
    }

    pub fn mesh(&self) -> &PlanarMesh {
        &self.mesh
    }

    pub fn order(&self) -> FeOrder {
        self.order
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn element_nodes(&self, e: usize) -> &[usize] {
        &self.elements[e][..self.order.nodes_per_element()]
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    /// Node on the mesh edge `(a, b)` (its midpoint for P2).
    pub fn edge_node(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_nodes.get(&(a.min(b), a.max(b))).copied()
    }

    /// Nodes of an edge in the order `a, [mid], b`.
    pub fn edge_trace_nodes(&self, a: usize, b: usize) -> Vec<usize> {
        match self.order {
            FeOrder::P1 => alloc::vec![a, b],
            FeOrder::P2 => alloc::vec![a, self.edge_node(a, b).expect("edge exists"), b],
        }
    }

    /// Nodes on the homogeneous Dirichlet boundary (arc and diameter).
    pub fn dirichlet_nodes(&self) -> Vec<bool> {
        let mut mark = alloc::vec![false; self.nodes.len()];
        for e in self.mesh.boundary_edges() {
            if e.tag.is_dirichlet() {
                for n in self.edge_trace_nodes(e.v[0], e.v[1]) {
                    mark[n] = true;
                }
            }
        }
        mark
    }

    /// Plus/minus node pairs of a slit, including P2 edge nodes.
    pub fn slit_node_pairs(&self, slit: &SlitTopology) -> Vec<(usize, usize)> {
        let mut pairs = slit.pairs.clone();
        if self.order == FeOrder::P2 {
            for k in 0..slit.chain_plus.len() - 1 {
                let p = self.edge_node(slit.chain_plus[k], slit.chain_plus[k + 1]).expect("slit edge");
                let m = self.edge_node(slit.chain_minus[k], slit.chain_minus[k + 1]).expect("slit edge");
                pairs.push((p, m));
            }
        }
        pairs
    }

    /// Physical points and weights of a triangle rule on element `e`.
    pub fn element_points(&self, e: usize, rule: &TriangleRule) -> Vec<(Point, [f64; 3], f64)> {
        let [a, b, c] = self.mesh.triangle_points(e);
        let area = self.mesh.triangle_area(e);
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(l, w)| {
                let x = Point::new(l[0] * a.x + l[1] * b.x + l[2] * c.x, l[0] * a.y + l[1] * b.y + l[2] * c.y);
                (x, *l, w * area)
            })
            .collect()
    }

    /// Shape function values at barycentric `l` for element `e`.
    pub fn shape_values(&self, l: [f64; 3]) -> [f64; 6] {
        match self.order {
            FeOrder::P1 => [l[0], l[1], l[2], 0.0, 0.0, 0.0],
            FeOrder::P2 => [
                l[0] * (2.0 * l[0] - 1.0),
                l[1] * (2.0 * l[1] - 1.0),
                l[2] * (2.0 * l[2] - 1.0),
                4.0 * l[0] * l[1],
                4.0 * l[1] * l[2],
                4.0 * l[2] * l[0],
            ],
        }
    }

    /// Shape function gradients at barycentric `l` on element `e`.
    pub fn shape_gradients(&self, e: usize, l: [f64; 3]) -> [Point; 6] {
        let g = barycentric_gradients(&self.mesh.triangle_points(e));
        match self.order {
            FeOrder::P1 => [g[0], g[1], g[2], Point::ORIGIN, Point::ORIGIN, Point::ORIGIN],
            FeOrder::P2 => [
                (4.0 * l[0] - 1.0) * g[0],
                (4.0 * l[1] - 1.0) * g[1],
                (4.0 * l[2] - 1.0) * g[2],
                4.0 * (l[0] * g[1] + l[1] * g[0]),
                4.0 * (l[1] * g[2] + l[2] * g[1]),
                4.0 * (l[2] * g[0] + l[0] * g[2]),
            ],
        }
    }

    /// Value of the nodal field `u` at barycentric `l` in element `e`.
    pub fn eval(&self, u: &[f64], e: usize, l: [f64; 3]) -> f64 {
        let phi = self.shape_values(l);
        self.element_nodes(e).iter().zip(phi).map(|(&n, p)| u[n] * p).sum()
    }

    pub fn eval_gradient(&self, u: &[f64], e: usize, l: [f64; 3]) -> Point {
        let g = self.shape_gradients(e, l);
        let mut s = Point::ORIGIN;
        for (&n, gi) in self.element_nodes(e).iter().zip(g) {
            s = s + u[n] * gi;
        }
        s
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(&self, f: impl Fn(Point) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }
}

/// Gradients of the barycentric coordinates on a triangle.
pub fn barycentric_gradients(t: &[Point; 3]) -> [Point; 3] {
    let two_a = crate::geometry::orient(t[0], t[1], t[2]);
    let g = |p: Point, q: Point| Point::new((p.y - q.y) / two_a, (q.x - p.x) / two_a);
    [g(t[1], t[2]), g(t[2], t[0]), g(t[0], t[1])]
}

/// How a global node is expressed in terms of reduced unknowns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NodeRole {
    /// `u = sign · x[dof] + offset`.
    Dof { dof: usize, sign: f64, offset: f64 },
    /// `u = value`.
    Fixed(f64),
}

/// Map from global nodes to reduced unknowns.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeMap {
    roles: Vec<NodeRole>,
    ndof: usize,
}

impl NodeMap {
    pub fn new(roles: Vec<NodeRole>) -> Self {
        let ndof = roles
            .iter()
            .filter_map(|r| match r {
                NodeRole::Dof { dof, .. } => Some(dof + 1),
                NodeRole::Fixed(_) => None,
            })
            .max()
            .unwrap_or(0);
        NodeMap { roles, ndof }
    }

    pub fn roles(&self) -> &[NodeRole] {
        &self.roles
    }

    pub fn num_dofs(&self) -> usize {
        self.ndof
    }

    /// Global nodal vector from reduced unknowns.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        self.roles
            .iter()
            .map(|r| match *r {
                NodeRole::Dof { dof, sign, offset } => sign * x[dof] + offset,
                NodeRole::Fixed(v) => v,
            })
            .collect()
    }

    /// Representative node coordinates for each reduced unknown.
    pub fn dof_coords(&self, nodes: &[Point]) -> Vec<Point> {
        let mut c = alloc::vec![Point::ORIGIN; self.ndof];
        let mut seen = alloc::vec![false; self.ndof];
        for (n, r) in self.roles.iter().enumerate() {
            if let NodeRole::Dof { dof, .. } = *r {
                if !seen[dof] {
                    seen[dof] = true;
                    c[dof] = nodes[n];
                }
            }
        }
        c
    }
}

/// Reduced stiffness, mass and the load induced by offsets and fixed values.
#[derive(Clone, Debug)]
pub struct ReducedSystem {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    /// `-Sᵀ K o`, where `o` holds offsets and fixed values.
    pub offset_load: Vec<f64>,
}

/// Assembles `∫∇φ_i·∇φ_j` and `∫ q φ_i φ_j` in reduced unknowns.
///
/// Only pairs with `dof_i <= dof_j` are accumulated and then mirrored, so both
/// matrices are exactly symmetric.
pub fn assemble_reduced(space: &FeSpace, map: &NodeMap, q: &dyn Fn(Point) -> f64) -> Result<ReducedSystem> {
    let ndof = map.num_dofs();
    let npe = space.order().nodes_per_element();
    let rule = TriangleRule::degree4();
    let cap = space.num_elements() * npe * (npe + 1) / 2;
    let mut kb = TripletBuilder::with_capacity(ndof, cap);
    let mut mb = TripletBuilder::with_capacity(ndof, cap);
    let mut load = alloc::vec![0.0; ndof];
    let mut ke = [[0.0; 6]; 6];
    let mut me = [[0.0; 6]; 6];
    for e in 0..space.num_elements() {
        for row in ke.iter_mut().chain(me.iter_mut()) {
            *row = [0.0; 6];
        }
        for (x, l, w) in space.element_points(e, &rule) {
            let qv = q(x);
            if !(qv > 0.0) || !qv.is_finite() {
                return Err(Error::NonPositiveWeight { value: qv, at: x });
            }
            let phi = space.shape_values(l);
            let grad = space.shape_gradients(e, l);
            for i in 0..npe {
                for j in i..npe {
                    ke[i][j] += w * grad[i].dot(grad[j]);
                    me[i][j] += w * qv * phi[i] * phi[j];
                }
            }
        }
        for i in 0..npe {
            for j in 0..i {
                ke[i][j] = ke[j][i];
                me[i][j] = me[j][i];
            }
        }
        let nodes = space.element_nodes(e);
        for i in 0..npe {
            let NodeRole::Dof { dof: di, sign: si, .. } = map.roles[nodes[i]] else {
                continue;
            };
            for j in 0..npe {
                match map.roles[nodes[j]] {
                    NodeRole::Dof { dof: dj, sign: sj, offset } => {
                        if di <= dj {
                            kb.add(di, dj, si * sj * ke[i][j]);
                            mb.add(di, dj, si * sj * me[i][j]);
                        }
                        load[di] -= si * ke[i][j] * offset;
                    }
                    NodeRole::Fixed(v) => load[di] -= si * ke[i][j] * v,
                }
            }
        }
    }
    Ok(ReducedSystem {
        stiffness: kb.build_symmetric_from_upper(),
        mass: mb.build_symmetric_from_upper(),
        offset_load: load,
    })
}

/// `∫ g(x) u ds` along a chain of mesh edges, as a global nodal load vector.
pub fn edge_chain_load(space: &FeSpace, chain: &[usize], g: &dyn Fn(Point) -> f64) -> Vec<f64> {
    let mut f = alloc::vec![0.0; space.num_nodes()];
    let (xs, ws) = gauss_legendre(6);
    for w in chain.windows(2) {
        let nodes = space.edge_trace_nodes(w[0], w[1]);
        let (a, b) = (space.nodes()[w[0]], space.nodes()[w[1]]);
        let len = a.dist(b);
        for (xi, wi) in xs.iter().zip(&ws) {
            let s = 0.5 * (xi + 1.0);
            let x = a.lerp(b, s);
            let gw = g(x) * 0.5 * wi * len;
            let phi: [f64; 3] = match space.order() {
                FeOrder::P1 => [1.0 - s, s, 0.0],
                FeOrder::P2 => [(1.0 - s) * (1.0 - 2.0 * s), 4.0 * s * (1.0 - s), s * (2.0 * s - 1.0)],
            };
            for (n, p) in nodes.iter().zip(phi) {
                f[*n] += gw * p;
            }
        }
    }
    f
}

/// `½ ∫ |∇u|²` and `∫ q u²` of a global nodal field over the whole mesh.
pub fn energy_and_mass(space: &FeSpace, u: &[f64], q: &dyn Fn(Point) -> f64) -> (f64, f64) {
    let rule = TriangleRule::degree4();
    let mut energy = 0.0;
    let mut mass = 0.0;
    for e in 0..space.num_elements() {
        for (x, l, w) in space.element_points(e, &rule) {
            energy += 0.5 * w * space.eval_gradient(u, e, l).norm2();
            let v = space.eval(u, e, l);
            mass += w * q(x) * v * v;
        }
    }
    (energy, mass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_half_disk_mesh, insert_slit, MeshOptions};

    fn space(order: FeOrder) -> FeSpace {
        FeSpace::new(build_half_disk_mesh(&MeshOptions::new(1.0, 0.2)).unwrap(), order)
    }

    #[test]
    fn p2_reproduces_quadratics_and_their_gradients() {
        let s = space(FeOrder::P2);
        let f = |p: Point| 1.0 + 2.0 * p.x - p.y + 3.0 * p.x * p.y - p.y * p.y;
        let u = s.interpolate(f);
        for e in (0..s.num_elements()).step_by(5) {
            let l = [0.2, 0.3, 0.5];
            let [a, b, c] = s.mesh().triangle_points(e);
            let x = Point::new(0.2 * a.x + 0.3 * b.x + 0.5 * c.x, 0.2 * a.y + 0.3 * b.y + 0.5 * c.y);
            assert!((s.eval(&u, e, l) - f(x)).abs() < 1e-13);
            let g = s.eval_gradient(&u, e, l);
            assert!((g.x - (2.0 + 3.0 * x.y)).abs() < 1e-12);
            assert!((g.y - (-1.0 + 3.0 * x.x - 2.0 * x.y)).abs() < 1e-12);
        }
    }

    #[test]
    fn nodal_values_are_reproduced() {
        let s = space(FeOrder::P2);
        let u: Vec<f64> = (0..s.num_nodes()).map(|i| i as f64).collect();
        let bary =
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]];
        for e in 0..s.num_elements() {
            for (k, l) in bary.iter().enumerate() {
                assert_eq!(s.eval(&u, e, *l), s.element_nodes(e)[k] as f64);
            }
        }
    }

    #[test]
    fn mass_matrix_integrates_area_and_stiffness_annihilates_constants() {
        for order in [FeOrder::P1, FeOrder::P2] {
            let s = space(order);
            let roles = (0..s.num_nodes()).map(|n| NodeRole::Dof { dof: n, sign: 1.0, offset: 0.0 }).collect();
            let sys = assemble_reduced(&s, &NodeMap::new(roles), &|_| 1.0).unwrap();
            let ones = alloc::vec![1.0; s.num_nodes()];
            let area = sys.mass.bilinear(&ones, &ones);
            assert!((area - s.mesh().area()).abs() < 1e-13);
            let k1 = sys.stiffness.mul_vec(&ones);
            assert!(k1.iter().all(|v| v.abs() < 1e-11));
            assert!(sys.stiffness.is_symmetric() && sys.mass.is_symmetric());
        }
    }

    #[test]
    fn slit_pairs_include_edge_nodes() {
        let poly = alloc::vec![Point::new(0.1, 0.0), Point::new(0.5, 0.5)];
        let mesh = build_half_disk_mesh(&MeshOptions::new(1.0, 0.1).with_constraint(poly.clone())).unwrap();
        let (slit_mesh, topo) = insert_slit(&mesh, &poly).unwrap();
        let s = FeSpace::new(slit_mesh, FeOrder::P2);
        let pairs = s.slit_node_pairs(&topo);
        assert_eq!(pairs.len(), 2 * topo.chain_plus.len() - 3);
        for (p, m) in pairs {
            assert_ne!(p, m);
            assert_eq!(s.nodes()[p], s.nodes()[m]);
        }
    }

    #[test]
    fn edge_load_integrates_polynomials() {
        let poly = alloc::vec![Point::new(0.0, 0.0), Point::new(0.6, 0.3)];
        let mesh = build_half_disk_mesh(&MeshOptions::new(1.0, 0.1).with_constraint(poly.clone())).unwrap();
        let (slit_mesh, topo) = insert_slit(&mesh, &poly).unwrap();
        let s = FeSpace::new(slit_mesh, FeOrder::P2);
        let f = edge_chain_load(&s, &topo.chain_plus, &|x| x.norm());
        // ∫ |x| · |x|² ds along the segment = L⁴/4
        let u = s.interpolate(|x| x.norm2());
        let got: f64 = f.iter().zip(&u).map(|(a, b)| a * b).sum();
        let len = poly[1].norm();
        assert!((got - libm::pow(len, 4.0) / 4.0).abs() < 1e-12);
    }
}
