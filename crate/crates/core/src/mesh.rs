//! Uniform triangulation of the square (-0.5, 0.5)^2.
//!
//! Each of the n×n cells is split along its lower-left to upper-right
//! diagonal. Element labels run row-major over cells, lower triangle first,
//! so cell `c` owns labels `2c` (lower) and `2c + 1` (upper).

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_rule, triangle_rule, EdgeRule, QuadSpec, TriangleRule};

pub const DOMAIN_MIN: f64 = -0.5;
pub const DOMAIN_MAX: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    /// Counter-clockwise vertex indices.
    pub vertices: [usize; 3],
    /// Signed area (positive for counter-clockwise orientation).
    pub area: f64,
    /// Edge ids; local edge `i` is opposite local vertex `i`.
    pub edges: [usize; 3],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    Interior,
    Boundary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    /// Endpoints, ordered counter-clockwise with respect to `element`.
    pub vertices: [usize; 2],
    pub length: f64,
    /// Unit normal pointing out of `element`.
    pub normal: [f64; 2],
    /// Unit tangent from `vertices[0]` to `vertices[1]`.
    pub tangent: [f64; 2],
    /// Adjacent element with the smaller label.
    pub element: usize,
    /// Local edge index of this edge inside `element`.
    pub local: usize,
    /// Opposite element and its local edge index, for interior edges.
    pub neighbor: Option<(usize, usize)>,
    pub kind: EdgeKind,
}

/// Affine map x = origin + J ξ from the reference triangle to an element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap {
    pub origin: [f64; 2],
    /// Column-major: `jac[0]` = v1 - v0, `jac[1]` = v2 - v0.
    pub jac: [[f64; 2]; 2],
    pub det: f64,
}

impl AffineMap {
    pub fn apply(&self, xi: [f64; 2]) -> [f64; 2] {
        [
            self.origin[0] + self.jac[0][0] * xi[0] + self.jac[1][0] * xi[1],
            self.origin[1] + self.jac[0][1] * xi[0] + self.jac[1][1] * xi[1],
        ]
    }

    pub fn inverse_apply(&self, x: [f64; 2]) -> [f64; 2] {
        let dx = x[0] - self.origin[0];
        let dy = x[1] - self.origin[1];
        let [[a, c], [b, d]] = self.jac;
        [(d * dx - b * dy) / self.det, (-c * dx + a * dy) / self.det]
    }

    /// J^{-1} applied to a physical direction.
    pub fn direction_to_reference(&self, v: [f64; 2]) -> [f64; 2] {
        let [[a, c], [b, d]] = self.jac;
        [(d * v[0] - b * v[1]) / self.det, (-c * v[0] + a * v[1]) / self.det]
    }

    /// J^{-T} applied to a reference gradient.
    pub fn gradient_to_physical(&self, g: [f64; 2]) -> [f64; 2] {
        let [[a, c], [b, d]] = self.jac;
        [(d * g[0] - c * g[1]) / self.det, (-b * g[0] + a * g[1]) / self.det]
    }
}

#[derive(Clone, Debug)]
pub struct TriMesh {
    pub n: usize,
    pub h: f64,
    pub vertices: Vec<[f64; 2]>,
    pub elements: Vec<Element>,
    pub edges: Vec<Edge>,
    /// Boundary edge ids in ascending order; position = boundary ordinal.
    pub boundary_edges: Vec<usize>,
    boundary_ordinal: Vec<Option<usize>>,
    pub quad: QuadSpec,
    pub triangle_rule: TriangleRule,
    pub edge_rule: EdgeRule,
    volume_points: Vec<[f64; 2]>,
    volume_weights: Vec<f64>,
    edge_points: Vec<[f64; 2]>,
    edge_weights: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeshCounts {
    pub elements: usize,
    pub vertices: usize,
    pub edges: usize,
    pub interior_edges: usize,
    pub boundary_edges: usize,
}

/// Build the uniform triangulation with `n` cells per side.
pub fn build_uniform_mesh(n: usize, quad: QuadSpec) -> Result<TriMesh> {
    if n == 0 {
        return Err(Error::InvalidArgument("mesh subdivision n must be >= 1".into()));
    }
    let tri = triangle_rule(quad.triangle_degree)?;
    let gauss = gauss_rule(quad.edge_points)?;
    let h = 1.0 / n as f64;
    let np = n + 1;

    let coord = |i: usize| DOMAIN_MIN + i as f64 * h;
    let mut vertices = Vec::with_capacity(np * np);
    for j in 0..np {
        for i in 0..np {
            vertices.push([coord(i), coord(j)]);
        }
    }

    let vid = |i: usize, j: usize| j * np + i;
    let mut tris: Vec<[usize; 3]> = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let v00 = vid(i, j);
            let v10 = vid(i + 1, j);
            let v01 = vid(i, j + 1);
            let v11 = vid(i + 1, j + 1);
            tris.push([v00, v10, v11]);
            tris.push([v00, v11, v01]);
        }
    }

    let mut edges: Vec<Edge> = Vec::with_capacity(3 * n * n + 2 * n);
    let mut lookup: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * n * n + 2 * n);
    let mut elements = Vec::with_capacity(tris.len());
    for (label, t) in tris.iter().enumerate() {
        let p: Vec<[f64; 2]> = t.iter().map(|&v| vertices[v]).collect();
        let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
        let mut edge_ids = [0usize; 3];
        for local in 0..3 {
            let a = t[(local + 1) % 3];
            let b = t[(local + 2) % 3];
            let key = (a.min(b), a.max(b));
            if let Some(&id) = lookup.get(&key) {
                // Labels are visited in ascending order, so the owner is smaller.
                edges[id].neighbor = Some((label, local));
                edges[id].kind = EdgeKind::Interior;
                edge_ids[local] = id;
            } else {
                let pa = vertices[a];
                let pb = vertices[b];
                let dx = pb[0] - pa[0];
                let dy = pb[1] - pa[1];
                let length = (dx * dx + dy * dy).sqrt();
                let tangent = [dx / length, dy / length];
                let id = edges.len();
                edges.push(Edge {
                    vertices: [a, b],
                    length,
                    normal: [tangent[1], -tangent[0]],
                    tangent,
                    element: label,
                    local,
                    neighbor: None,
                    kind: EdgeKind::Boundary,
                });
                lookup.insert(key, id);
                edge_ids[local] = id;
            }
        }
        elements.push(Element {
            vertices: *t,
            area,
            edges: edge_ids,
        });
    }

    let boundary_edges: Vec<usize> = (0..edges.len())
        .filter(|&e| edges[e].kind == EdgeKind::Boundary)
        .collect();
    let mut boundary_ordinal = vec![None; edges.len()];
    for (ord, &e) in boundary_edges.iter().enumerate() {
        boundary_ordinal[e] = Some(ord);
    }

    let mut mesh = TriMesh {
        n,
        h,
        vertices,
        elements,
        edges,
        boundary_edges,
        boundary_ordinal,
        quad,
        triangle_rule: tri,
        edge_rule: gauss,
        volume_points: Vec::new(),
        volume_weights: Vec::new(),
        edge_points: Vec::new(),
        edge_weights: Vec::new(),
    };
    mesh.cache_quadrature();
    Ok(mesh)
}

impl TriMesh {
    fn cache_quadrature(&mut self) {
        let nq = self.triangle_rule.len();
        let mut pts = Vec::with_capacity(self.elements.len() * nq);
        let mut wts = Vec::with_capacity(self.elements.len() * nq);
        for e in 0..self.elements.len() {
            let map = self.element_map(e);
            // Weights are given on the reference triangle of area 1/2.
            for (xi, w) in self.triangle_rule.points.iter().zip(&self.triangle_rule.weights) {
                pts.push(map.apply(*xi));
                wts.push(w * map.det.abs());
            }
        }
        self.volume_points = pts;
        self.volume_weights = wts;

        let nqe = self.edge_rule.len();
        let mut epts = Vec::with_capacity(self.edges.len() * nqe);
        let mut ewts = Vec::with_capacity(self.edges.len() * nqe);
        for edge in &self.edges {
            let a = self.vertices[edge.vertices[0]];
            let b = self.vertices[edge.vertices[1]];
            for (t, w) in self.edge_rule.points.iter().zip(&self.edge_rule.weights) {
                epts.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
                ewts.push(w * edge.length);
            }
        }
        self.edge_points = epts;
        self.edge_weights = ewts;
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_volume_points(&self) -> usize {
        self.triangle_rule.len()
    }

    pub fn num_edge_points(&self) -> usize {
        self.edge_rule.len()
    }

    pub fn counts(&self) -> MeshCounts {
        let boundary = self.boundary_edges.len();
        MeshCounts {
            elements: self.elements.len(),
            vertices: self.vertices.len(),
            edges: self.edges.len(),
            interior_edges: self.edges.len() - boundary,
            boundary_edges: boundary,
        }
    }

    pub fn element(&self, label: usize) -> Result<&Element> {
        self.elements.get(label).ok_or(Error::ElementOutOfRange {
            label,
            count: self.elements.len(),
        })
    }

    pub fn element_map(&self, label: usize) -> AffineMap {
        let [a, b, c] = self.elements[label].vertices;
        let p0 = self.vertices[a];
        let p1 = self.vertices[b];
        let p2 = self.vertices[c];
        let j0 = [p1[0] - p0[0], p1[1] - p0[1]];
        let j1 = [p2[0] - p0[0], p2[1] - p0[1]];
        AffineMap {
            origin: p0,
            jac: [j0, j1],
            det: j0[0] * j1[1] - j1[0] * j0[1],
        }
    }

    pub fn centroid(&self, label: usize) -> [f64; 2] {
        let v = self.elements[label].vertices;
        let mut c = [0.0; 2];
        for &i in &v {
            c[0] += self.vertices[i][0] / 3.0;
            c[1] += self.vertices[i][1] / 3.0;
        }
        c
    }

    /// Physical volume quadrature points of one element.
    pub fn volume_points(&self, label: usize) -> &[[f64; 2]] {
        let nq = self.num_volume_points();
        &self.volume_points[label * nq..(label + 1) * nq]
    }

    pub fn volume_weights(&self, label: usize) -> &[f64] {
        let nq = self.num_volume_points();
        &self.volume_weights[label * nq..(label + 1) * nq]
    }

    /// Physical edge quadrature points, ordered from `vertices[0]` to `vertices[1]`.
    pub fn edge_points(&self, edge: usize) -> &[[f64; 2]] {
        let nq = self.num_edge_points();
        &self.edge_points[edge * nq..(edge + 1) * nq]
    }

    pub fn edge_weights(&self, edge: usize) -> &[f64] {
        let nq = self.num_edge_points();
        &self.edge_weights[edge * nq..(edge + 1) * nq]
    }

    pub fn boundary_ordinal(&self, edge: usize) -> Option<usize> {
        self.boundary_ordinal.get(edge).copied().flatten()
    }

    /// Element containing `x`, preferring the lowest label when `x` lies on
    /// shared edges or vertices. `None` outside the closed domain.
    pub fn locate(&self, x: [f64; 2]) -> Option<usize> {
        const TOL: f64 = 1e-12;
        if x.iter().any(|&c| c < DOMAIN_MIN - TOL || c > DOMAIN_MAX + TOL) {
            return None;
        }
        let n = self.n as isize;
        let si = ((x[0] - DOMAIN_MIN) * self.n as f64).floor() as isize;
        let sj = ((x[1] - DOMAIN_MIN) * self.n as f64).floor() as isize;
        let mut best: Option<usize> = None;
        for j in (sj - 1)..=(sj + 1) {
            for i in (si - 1)..=(si + 1) {
                if i < 0 || j < 0 || i >= n || j >= n {
                    continue;
                }
                let cell = (j * n + i) as usize;
                for label in [2 * cell, 2 * cell + 1] {
                    let xi = self.element_map(label).inverse_apply(x);
                    let inside = xi[0] >= -TOL && xi[1] >= -TOL && xi[0] + xi[1] <= 1.0 + TOL;
                    if inside && best.map_or(true, |b| label < b) {
                        best = Some(label);
                    }
                }
            }
        }
        best
    }

    /// Vertex table as CSV (`index,x,y`).
    pub fn vertices_csv(&self) -> String {
        let mut out = String::from("index,x,y\n");
        for (i, v) in self.vertices.iter().enumerate() {
            out.push_str(&format!("{},{:.16e},{:.16e}\n", i, v[0], v[1]));
        }
        out
    }

    /// Connectivity table as CSV (`element,v0,v1,v2`).
    pub fn connectivity_csv(&self) -> String {
        let mut out = String::from("element,v0,v1,v2\n");
        for (label, el) in self.elements.iter().enumerate() {
            let [a, b, c] = el.vertices;
            out.push_str(&format!("{label},{a},{b},{c}\n"));
        }
        out
    }

    /// `key=value` summary lines.
    pub fn info_lines(&self) -> String {
        let c = self.counts();
        format!(
            "n={}\nh={:.16e}\nelements={}\nvertices={}\nedges={}\ninterior_edges={}\nboundary_edges={}\n",
            self.n, self.h, c.elements, c.vertices, c.edges, c.interior_edges, c.boundary_edges
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mesh(n: usize) -> TriMesh {
        build_uniform_mesh(n, QuadSpec::default()).unwrap()
    }

    #[test]
    fn rejects_zero_subdivision() {
        assert!(build_uniform_mesh(0, QuadSpec::default()).is_err());
    }

    #[test]
    fn single_cell_mesh() {
        let m = mesh(1);
        let c = m.counts();
        assert_eq!(c.elements, 2);
        assert_eq!(c.edges, 5);
        assert_eq!(c.boundary_edges, 4);
        assert_eq!(c.interior_edges, 1);
    }

    #[test]
    fn closed_form_counts() {
        for n in [1, 2, 3, 7, 10] {
            let c = mesh(n).counts();
            assert_eq!(c.elements, 2 * n * n);
            assert_eq!(c.vertices, (n + 1) * (n + 1));
            assert_eq!(c.edges, 3 * n * n + 2 * n);
            assert_eq!(c.boundary_edges, 4 * n);
            assert_eq!(c.interior_edges, 3 * n * n - 2 * n);
            assert_eq!(c.vertices as isize - c.edges as isize + c.elements as isize, 1);
        }
        let c = mesh(3).counts();
        assert_eq!((c.elements, c.vertices, c.edges, c.boundary_edges), (18, 16, 33, 12));
        assert_eq!(mesh(10).counts().elements, 200);
    }

    #[test]
    fn areas_and_weights() {
        let m = mesh(6);
        let total: f64 = m.elements.iter().map(|e| e.area.abs()).sum();
        assert!((total - 1.0).abs() < 1e-13);
        for (label, el) in m.elements.iter().enumerate() {
            assert!(el.area > 0.0);
            let w: f64 = m.volume_weights(label).iter().sum();
            assert!((w - el.area).abs() < 1e-13);
        }
        for (e, edge) in m.edges.iter().enumerate() {
            let w: f64 = m.edge_weights(e).iter().sum();
            assert!((w - edge.length).abs() < 1e-14);
        }
    }

    #[test]
    fn normals_point_out_of_owner_and_into_neighbor() {
        let m = mesh(4);
        for edge in &m.edges {
            let mid = {
                let a = m.vertices[edge.vertices[0]];
                let b = m.vertices[edge.vertices[1]];
                [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]
            };
            let c = m.centroid(edge.element);
            let out = (mid[0] - c[0]) * edge.normal[0] + (mid[1] - c[1]) * edge.normal[1];
            assert!(out > 0.0);
            if let Some((nb, local)) = edge.neighbor {
                assert!(nb > edge.element);
                assert_eq!(m.elements[nb].edges[local], m.elements[edge.element].edges[edge.local]);
                // Outward normal of the neighbor on this edge is the negation.
                let nbv = m.elements[nb].vertices;
                let a = m.vertices[nbv[(local + 1) % 3]];
                let b = m.vertices[nbv[(local + 2) % 3]];
                let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                let nb_normal = [(b[1] - a[1]) / len, -(b[0] - a[0]) / len];
                assert!((nb_normal[0] + edge.normal[0]).abs() < 1e-15);
                assert!((nb_normal[1] + edge.normal[1]).abs() < 1e-15);
            } else {
                // Boundary normal is the outward domain normal.
                let dot = mid[0] * edge.normal[0] + mid[1] * edge.normal[1];
                assert!((dot - 0.5).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn two_edge_lengths() {
        let n = 5;
        let m = mesh(n);
        let h = 1.0 / n as f64;
        let short = m.edges.iter().filter(|e| (e.length - h).abs() < 1e-14).count();
        let long = m.edges.iter().filter(|e| (e.length - 2f64.sqrt() * h).abs() < 1e-14).count();
        assert_eq!(short, 2 * n * (n + 1));
        assert_eq!(long, n * n);
    }

    #[test]
    fn mirror_symmetry_of_vertex_set() {
        let m = mesh(7);
        for v in &m.vertices {
            let mirrored = [-v[0], v[1]];
            assert!(m
                .vertices
                .iter()
                .any(|w| (w[0] - mirrored[0]).abs() < 1e-14 && (w[1] - mirrored[1]).abs() < 1e-14));
        }
    }

    #[test]
    fn deterministic_construction() {
        let a = mesh(5);
        let b = mesh(5);
        assert_eq!(a.vertices, b.vertices);
        assert_eq!(a.elements, b.elements);
        assert_eq!(a.edges, b.edges);
    }

    #[test]
    fn locate_prefers_lowest_label() {
        let m = mesh(2);
        // Centre of the domain is a vertex shared by six elements.
        assert_eq!(m.locate([0.0, 0.0]), Some(0));
        // On the diagonal of cell 0: lower triangle wins.
        assert_eq!(m.locate([-0.3, -0.3]), Some(0));
        assert_eq!(m.locate([-0.4, -0.1]), Some(1));
        assert_eq!(m.locate([0.6, 0.0]), None);
    }
}
