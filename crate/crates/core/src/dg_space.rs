//! Broken polynomial space of degree r on a [`TriMesh`], with a nodal
//! Lagrange basis on the barycentric lattice of each element.
//!
//! Global DOF numbering is `element * local_dim + local`.

use num_complex::Complex64;

use crate::assembly::PenaltySet;
use crate::error::{check_len, Error, Result};
use crate::mesh::{AffineMap, EdgeKind, TriMesh};

type C64 = Complex64;

/// Lagrange basis of P_r on the reference triangle, stored as monomial
/// coefficients so derivatives of any order are exact.
#[derive(Clone, Debug)]
pub struct ReferenceBasis {
    pub degree: usize,
    /// Lattice nodes `(i/r, j/r)`, `i + j <= r`, ordered by `j` then `i`.
    pub nodes: Vec<[f64; 2]>,
    /// Exponents `(a, b)` of x^a y^b, grouped by total degree.
    monomials: Vec<(usize, usize)>,
    /// `coeffs[i]` holds the monomial coefficients of basis function `i`.
    coeffs: Vec<Vec<f64>>,
}

fn monomial_index(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

fn powi(x: f64, p: usize) -> f64 {
    x.powi(p as i32)
}

impl ReferenceBasis {
    pub fn new(degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidArgument("polynomial degree r must be >= 1".into()));
        }
        let mut monomials = Vec::new();
        for d in 0..=degree {
            for b in 0..=d {
                monomials.push((d - b, b));
            }
        }
        let mut nodes = Vec::new();
        for j in 0..=degree {
            for i in 0..=(degree - j) {
                nodes.push([i as f64 / degree as f64, j as f64 / degree as f64]);
            }
        }
        let m = monomials.len();
        let mut vander = vec![vec![0.0; m]; m];
        for (p, node) in nodes.iter().enumerate() {
            for (k, &(a, b)) in monomials.iter().enumerate() {
                vander[p][k] = powi(node[0], a) * powi(node[1], b);
            }
        }
        // Column i of V^{-1} holds the coefficients of basis function i.
        let mut coeffs = vec![vec![0.0; m]; m];
        for i in 0..m {
            let mut rhs = vec![0.0; m];
            rhs[i] = 1.0;
            let col = dense_solve(vander.clone(), rhs)?;
            coeffs[i] = col;
        }
        Ok(ReferenceBasis {
            degree,
            nodes,
            monomials,
            coeffs,
        })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn eval_poly(&self, poly: &[f64], xi: [f64; 2]) -> f64 {
        self.monomials
            .iter()
            .zip(poly)
            .filter(|(_, &c)| c != 0.0)
            .map(|(&(a, b), c)| c * powi(xi[0], a) * powi(xi[1], b))
            .sum()
    }

    fn derivative(&self, poly: &[f64], dir: [f64; 2]) -> Vec<f64> {
        let mut out = vec![0.0; poly.len()];
        for (&(a, b), &c) in self.monomials.iter().zip(poly) {
            if c == 0.0 {
                continue;
            }
            if a > 0 {
                out[monomial_index(a - 1, b)] += dir[0] * c * a as f64;
            }
            if b > 0 {
                out[monomial_index(a, b - 1)] += dir[1] * c * b as f64;
            }
        }
        out
    }

    pub fn values(&self, xi: [f64; 2]) -> Vec<f64> {
        self.coeffs.iter().map(|c| self.eval_poly(c, xi)).collect()
    }

    pub fn gradients(&self, xi: [f64; 2]) -> Vec<[f64; 2]> {
        self.coeffs
            .iter()
            .map(|c| {
                [
                    self.eval_poly(&self.derivative(c, [1.0, 0.0]), xi),
                    self.eval_poly(&self.derivative(c, [0.0, 1.0]), xi),
                ]
            })
            .collect()
    }

    /// `(dir · ∇)^order φ_i` at `xi`, for every basis function.
    pub fn directional_derivatives(&self, dir: [f64; 2], order: usize, xi: [f64; 2]) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| {
                let mut p = c.clone();
                for _ in 0..order {
                    p = self.derivative(&p, dir);
                }
                self.eval_poly(&p, xi)
            })
            .collect()
    }
}

/// Gaussian elimination with partial pivoting for tiny dense systems.
pub(crate) fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap_or(k);
        if a[p][k].abs() < 1e-300 {
            return Err(Error::SingularMatrix {
                index: k,
                magnitude: a[p][k].abs(),
            });
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in (k + 1)..n {
            let f = a[i][k] / a[k][k];
            if f != 0.0 {
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = ((k + 1)..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Ok(x)
}

/// Traces of the local basis of one element on one edge, at the edge
/// quadrature points. Arrays are `[point * local_dim + i]`.
#[derive(Clone, Debug, Default)]
pub struct EdgeTrace {
    pub values: Vec<f64>,
    /// Physical gradients.
    pub gradients: Vec<[f64; 2]>,
    /// Tangential derivative along the edge tangent τ_e.
    pub tangential: Vec<f64>,
    /// `normal[j - 1]` holds ∂^j_{n_e}, j = 1..=r, with n_e the edge normal.
    pub normal: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct DgSpace {
    pub r: usize,
    pub local_dim: usize,
    pub n_elements: usize,
    pub ndof: usize,
    pub basis: ReferenceBasis,
    maps: Vec<AffineMap>,
    nq: usize,
    /// Basis values at the reference volume points, `[q * local_dim + i]`.
    vol_values: Vec<f64>,
    /// Reference gradients at the reference volume points.
    vol_grads_ref: Vec<[f64; 2]>,
    nqe: usize,
    /// Index `2 * edge + side`; side 0 is the owning element, side 1 the
    /// neighbour (empty for boundary edges).
    traces: Vec<EdgeTrace>,
}

impl DgSpace {
    pub fn new(mesh: &TriMesh, r: usize) -> Result<Self> {
        let basis = ReferenceBasis::new(r)?;
        let local_dim = basis.len();
        let n_elements = mesh.num_elements();
        let maps: Vec<AffineMap> = (0..n_elements).map(|e| mesh.element_map(e)).collect();
        let nq = mesh.num_volume_points();
        let mut vol_values = Vec::with_capacity(nq * local_dim);
        let mut vol_grads_ref = Vec::with_capacity(nq * local_dim);
        for xi in &mesh.triangle_rule.points {
            vol_values.extend(basis.values(*xi));
            vol_grads_ref.extend(basis.gradients(*xi));
        }

        let nqe = mesh.num_edge_points();
        let mut traces = Vec::with_capacity(2 * mesh.edges.len());
        for (e, edge) in mesh.edges.iter().enumerate() {
            let pts = mesh.edge_points(e);
            traces.push(Self::trace(&basis, &maps[edge.element], pts, edge.normal, edge.tangent));
            match edge.neighbor {
                Some((nb, _)) => traces.push(Self::trace(&basis, &maps[nb], pts, edge.normal, edge.tangent)),
                None => traces.push(EdgeTrace::default()),
            }
        }

        Ok(DgSpace {
            r,
            local_dim,
            n_elements,
            ndof: n_elements * local_dim,
            basis,
            maps,
            nq,
            vol_values,
            vol_grads_ref,
            nqe,
            traces,
        })
    }

    fn trace(basis: &ReferenceBasis, map: &AffineMap, pts: &[[f64; 2]], normal: [f64; 2], tangent: [f64; 2]) -> EdgeTrace {
        let r = basis.degree;
        let dn = map.direction_to_reference(normal);
        let dt = map.direction_to_reference(tangent);
        let mut t = EdgeTrace {
            normal: vec![Vec::new(); r],
            ..Default::default()
        };
        for x in pts {
            let xi = map.inverse_apply(*x);
            t.values.extend(basis.values(xi));
            t.gradients
                .extend(basis.gradients(xi).into_iter().map(|g| map.gradient_to_physical(g)));
            t.tangential.extend(basis.directional_derivatives(dt, 1, xi));
            for j in 1..=r {
                t.normal[j - 1].extend(basis.directional_derivatives(dn, j, xi));
            }
        }
        t
    }

    pub fn dof(&self, element: usize, local: usize) -> usize {
        element * self.local_dim + local
    }

    pub fn element_dofs(&self, element: usize) -> std::ops::Range<usize> {
        element * self.local_dim..(element + 1) * self.local_dim
    }

    pub fn map(&self, element: usize) -> &AffineMap {
        &self.maps[element]
    }

    pub fn num_volume_points(&self) -> usize {
        self.nq
    }

    pub fn num_edge_points(&self) -> usize {
        self.nqe
    }

    /// Basis values at reference volume point `q`.
    pub fn volume_values(&self, q: usize) -> &[f64] {
        &self.vol_values[q * self.local_dim..(q + 1) * self.local_dim]
    }

    /// Physical basis gradients on `element` at reference volume point `q`.
    pub fn volume_gradients(&self, element: usize, q: usize) -> Vec<[f64; 2]> {
        let map = &self.maps[element];
        self.vol_grads_ref[q * self.local_dim..(q + 1) * self.local_dim]
            .iter()
            .map(|g| map.gradient_to_physical(*g))
            .collect()
    }

    /// Trace of `side` (0 = owner, 1 = neighbour) on `edge`.
    pub fn edge_trace(&self, edge: usize, side: usize) -> &EdgeTrace {
        &self.traces[2 * edge + side]
    }

    pub(crate) fn check_mesh(&self, mesh: &TriMesh) -> Result<()> {
        check_len("mesh elements vs space", self.n_elements, mesh.num_elements())?;
        check_len("volume quadrature points", self.nq, mesh.num_volume_points())?;
        check_len("edge quadrature points", self.nqe, mesh.num_edge_points())
    }

    pub(crate) fn check_function(&self, f: &DgFunction) -> Result<()> {
        check_len("DG coefficient vector", self.ndof, f.coeffs.len())
    }

    /// Values of `f` at every volume quadrature point, `[element * nq + q]`.
    pub fn values_at_volume_points(&self, f: &DgFunction) -> Vec<C64> {
        let ld = self.local_dim;
        let mut out = Vec::with_capacity(self.n_elements * self.nq);
        for e in 0..self.n_elements {
            let c = &f.coeffs[e * ld..(e + 1) * ld];
            for q in 0..self.nq {
                let phi = self.volume_values(q);
                out.push(c.iter().zip(phi).map(|(ci, p)| ci * p).sum());
            }
        }
        out
    }

    /// Values of `f` at boundary-edge quadrature points, `[ordinal * nqe + q]`.
    pub fn values_at_boundary_points(&self, mesh: &TriMesh, f: &DgFunction) -> Vec<C64> {
        let ld = self.local_dim;
        let mut out = Vec::with_capacity(mesh.boundary_edges.len() * self.nqe);
        for &e in &mesh.boundary_edges {
            let el = mesh.edges[e].element;
            let c = &f.coeffs[el * ld..(el + 1) * ld];
            let tr = self.edge_trace(e, 0);
            for q in 0..self.nqe {
                let phi = &tr.values[q * ld..(q + 1) * ld];
                out.push(c.iter().zip(phi).map(|(ci, p)| ci * p).sum());
            }
        }
        out
    }
}

/// A member of the broken space, identified by its coefficient vector.
#[derive(Clone, Debug, PartialEq)]
pub struct DgFunction {
    pub coeffs: Vec<C64>,
}

impl DgFunction {
    pub fn zeros(space: &DgSpace) -> Self {
        DgFunction {
            coeffs: vec![C64::new(0.0, 0.0); space.ndof],
        }
    }

    pub fn from_coeffs(space: &DgSpace, coeffs: Vec<C64>) -> Result<Self> {
        check_len("DG coefficient vector", space.ndof, coeffs.len())?;
        Ok(DgFunction { coeffs })
    }

    /// Nodal interpolant of `g`.
    pub fn interpolate(space: &DgSpace, g: impl Fn([f64; 2]) -> C64) -> Self {
        let mut coeffs = Vec::with_capacity(space.ndof);
        for e in 0..space.n_elements {
            let map = space.map(e);
            for node in &space.basis.nodes {
                coeffs.push(g(map.apply(*node)));
            }
        }
        DgFunction { coeffs }
    }

    /// Element-wise L² projection of `g`, using the mesh volume quadrature.
    pub fn l2_projection(space: &DgSpace, mesh: &TriMesh, g: impl Fn([f64; 2]) -> C64) -> Result<Self> {
        space.check_mesh(mesh)?;
        let ld = space.local_dim;
        let nq = space.num_volume_points();
        let mut coeffs = Vec::with_capacity(space.ndof);
        for e in 0..space.n_elements {
            let pts = mesh.volume_points(e);
            let wts = mesh.volume_weights(e);
            let mut mass = vec![vec![0.0; ld]; ld];
            let mut re = vec![0.0; ld];
            let mut im = vec![0.0; ld];
            for q in 0..nq {
                let phi = space.volume_values(q);
                let gv = g(pts[q]);
                for i in 0..ld {
                    re[i] += wts[q] * gv.re * phi[i];
                    im[i] += wts[q] * gv.im * phi[i];
                    for j in 0..ld {
                        mass[i][j] += wts[q] * phi[i] * phi[j];
                    }
                }
            }
            let xr = dense_solve(mass.clone(), re)?;
            let xi = dense_solve(mass, im)?;
            coeffs.extend(xr.into_iter().zip(xi).map(|(a, b)| C64::new(a, b)));
        }
        Ok(DgFunction { coeffs })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scaled(&self, s: C64) -> Self {
        DgFunction {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &DgFunction) -> Result<Self> {
        check_len("DG coefficient vector", self.coeffs.len(), other.coeffs.len())?;
        Ok(DgFunction {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &DgFunction) -> Result<Self> {
        check_len("DG coefficient vector", self.coeffs.len(), other.coeffs.len())?;
        Ok(DgFunction {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Evaluate `f` on `element` at reference points.
pub fn evaluate(space: &DgSpace, f: &DgFunction, element: usize, points: &[[f64; 2]]) -> Result<Vec<C64>> {
    Ok(evaluate_with_gradients(space, f, element, points)?
        .into_iter()
        .map(|(v, _)| v)
        .collect())
}

/// Values and physical gradients of `f` on `element` at reference points.
pub fn evaluate_with_gradients(
    space: &DgSpace,
    f: &DgFunction,
    element: usize,
    points: &[[f64; 2]],
) -> Result<Vec<(C64, [C64; 2])>> {
    if element >= space.n_elements {
        return Err(Error::ElementOutOfRange {
            label: element,
            count: space.n_elements,
        });
    }
    space.check_function(f)?;
    let map = space.map(element);
    let c = &f.coeffs[space.element_dofs(element)];
    Ok(points
        .iter()
        .map(|xi| {
            let phi = space.basis.values(*xi);
            let grads = space.basis.gradients(*xi);
            let mut v = C64::new(0.0, 0.0);
            let mut g = [C64::new(0.0, 0.0); 2];
            for i in 0..phi.len() {
                v += c[i] * phi[i];
                let gp = map.gradient_to_physical(grads[i]);
                g[0] += c[i] * gp[0];
                g[1] += c[i] * gp[1];
            }
            (v, g)
        })
        .collect())
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BrokenNorms {
    /// ‖f‖_{L²(D)}
    pub l2: f64,
    /// |f|_{1,h,D}: element-wise gradient norm.
    pub seminorm_1h: f64,
    /// ‖f‖_{1,h,D}: gradient norm plus weighted interior jump terms.
    pub norm_1h: f64,
    /// ‖f‖_{L²(∂D)}
    pub boundary_l2: f64,
    /// |||f|||_{1,h,D}: adds the averaged normal-derivative term. Diagnostic only.
    pub triple_norm_1h: f64,
}

/// Smooth reference field `x -> (value, gradient)` used for error norms.
pub type ExactField<'a> = &'a (dyn Fn([f64; 2]) -> (C64, [C64; 2]) + Sync);

pub fn broken_norms(space: &DgSpace, mesh: &TriMesh, f: &DgFunction, penalties: &PenaltySet) -> Result<BrokenNorms> {
    norms_impl(space, mesh, f, None, penalties)
}

/// Broken norms of `exact - f` for a smooth (continuous, continuously
/// differentiable) `exact`, whose own jumps vanish.
pub fn error_norms(
    space: &DgSpace,
    mesh: &TriMesh,
    f: &DgFunction,
    exact: ExactField<'_>,
    penalties: &PenaltySet,
) -> Result<BrokenNorms> {
    norms_impl(space, mesh, f, Some(exact), penalties)
}

fn norms_impl(
    space: &DgSpace,
    mesh: &TriMesh,
    f: &DgFunction,
    exact: Option<ExactField<'_>>,
    penalties: &PenaltySet,
) -> Result<BrokenNorms> {
    space.check_mesh(mesh)?;
    space.check_function(f)?;
    penalties.validate_for(space.r)?;
    let ld = space.local_dim;
    let nq = space.num_volume_points();
    let r = space.r as f64;

    let mut l2 = 0.0;
    let mut semi = 0.0;
    for e in 0..space.n_elements {
        let c = &f.coeffs[space.element_dofs(e)];
        let pts = mesh.volume_points(e);
        let wts = mesh.volume_weights(e);
        for q in 0..nq {
            let phi = space.volume_values(q);
            let grads = space.volume_gradients(e, q);
            let mut v = C64::new(0.0, 0.0);
            let mut g = [C64::new(0.0, 0.0); 2];
            for i in 0..ld {
                v += c[i] * phi[i];
                g[0] += c[i] * grads[i][0];
                g[1] += c[i] * grads[i][1];
            }
            if let Some(ex) = exact {
                let (ev, eg) = ex(pts[q]);
                v -= ev;
                g[0] -= eg[0];
                g[1] -= eg[1];
            }
            l2 += wts[q] * v.norm_sqr();
            semi += wts[q] * (g[0].norm_sqr() + g[1].norm_sqr());
        }
    }

    let nqe = space.num_edge_points();
    let mut jumps = 0.0;
    let mut average = 0.0;
    let mut bnd = 0.0;
    let dot = |a: &[C64], b: &[f64]| -> C64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    for (eid, edge) in mesh.edges.iter().enumerate() {
        let wts = mesh.edge_weights(eid);
        let he = edge.length;
        let c0 = &f.coeffs[space.element_dofs(edge.element)];
        let t0 = space.edge_trace(eid, 0);
        match edge.kind {
            EdgeKind::Boundary => {
                let pts = mesh.edge_points(eid);
                for q in 0..nqe {
                    let mut v = dot(c0, &t0.values[q * ld..(q + 1) * ld]);
                    if let Some(ex) = exact {
                        v -= ex(pts[q]).0;
                    }
                    bnd += wts[q] * v.norm_sqr();
                }
            }
            EdgeKind::Interior => {
                let (nb, _) = edge.neighbor.expect("interior edge has a neighbour");
                let c1 = &f.coeffs[space.element_dofs(nb)];
                let t1 = space.edge_trace(eid, 1);
                for q in 0..nqe {
                    let s = q * ld..(q + 1) * ld;
                    let jump = dot(c0, &t0.values[s.clone()]) - dot(c1, &t1.values[s.clone()]);
                    let jt = dot(c0, &t0.tangential[s.clone()]) - dot(c1, &t1.tangential[s.clone()]);
                    let mut term = penalties.gamma[0] * r / he * jump.norm_sqr()
                        + penalties.beta1 * r / he * jt.norm_sqr();
                    for j in 1..=space.r {
                        let jn = dot(c0, &t0.normal[j - 1][s.clone()]) - dot(c1, &t1.normal[j - 1][s.clone()]);
                        term += penalties.gamma[j] * (he / r).powi(2 * j as i32 - 1) * jn.norm_sqr();
                    }
                    jumps += wts[q] * term;
                    let avg = 0.5 * (dot(c0, &t0.normal[0][s.clone()]) + dot(c1, &t1.normal[0][s]));
                    let avg = match exact {
                        Some(ex) => {
                            let g = ex(mesh.edge_points(eid)[q]).1;
                            avg - (g[0] * edge.normal[0] + g[1] * edge.normal[1])
                        }
                        None => avg,
                    };
                    average += wts[q] * he / (penalties.gamma[0] * r) * avg.norm_sqr();
                }
            }
        }
    }

    let norm_sq = semi + jumps;
    Ok(BrokenNorms {
        l2: l2.sqrt(),
        seminorm_1h: semi.sqrt(),
        norm_1h: norm_sq.sqrt(),
        boundary_l2: bnd.sqrt(),
        triple_norm_1h: (norm_sq + average).sqrt(),
    })
}

/// L² norm only; cheaper than [`broken_norms`].
pub fn l2_norm(space: &DgSpace, mesh: &TriMesh, f: &DgFunction) -> Result<f64> {
    space.check_mesh(mesh)?;
    space.check_function(f)?;
    let vals = space.values_at_volume_points(f);
    let nq = space.num_volume_points();
    let mut s = 0.0;
    for e in 0..space.n_elements {
        let w = mesh.volume_weights(e);
        for q in 0..nq {
            s += w[q] * vals[e * nq + q].norm_sqr();
        }
    }
    Ok(s.sqrt())
}

/// Field dump: `x,y,element,re,im,abs` at the three vertices of every element.
pub fn field_csv(space: &DgSpace, mesh: &TriMesh, f: &DgFunction) -> Result<String> {
    space.check_mesh(mesh)?;
    space.check_function(f)?;
    let corners = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let mut out = String::from("x,y,element,re,im,abs\n");
    for e in 0..space.n_elements {
        let vals = evaluate(space, f, e, &corners)?;
        for (xi, v) in corners.iter().zip(vals) {
            let x = space.map(e).apply(*xi);
            out.push_str(&format!(
                "{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e}\n",
                x[0],
                x[1],
                e,
                v.re,
                v.im,
                v.norm()
            ));
        }
    }
    Ok(out)
}

/// Rebuild a degree-1 function from a vertex field dump.
pub fn read_field_csv(space: &DgSpace, text: &str) -> Result<DgFunction> {
    if space.r != 1 {
        return Err(Error::InvalidArgument(
            "vertex field dumps determine the function only for r = 1".into(),
        ));
    }
    let mut coeffs = Vec::with_capacity(space.ndof);
    let mut seen = vec![0usize; space.n_elements];
    for (lineno, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(Error::Config(format!("field csv line {}: expected 6 columns", lineno + 1)));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("field csv line {}: {e}", lineno + 1)))
        };
        let element: usize = cols[2]
            .trim()
            .parse()
            .map_err(|e| Error::Config(format!("field csv line {}: {e}", lineno + 1)))?;
        if element >= space.n_elements || element * 3 + seen[element] != coeffs.len() {
            return Err(Error::Config(format!("field csv line {}: rows out of order", lineno + 1)));
        }
        seen[element] += 1;
        coeffs.push(C64::new(parse(cols[3])?, parse(cols[4])?));
    }
    DgFunction::from_coeffs(space, coeffs)
}
