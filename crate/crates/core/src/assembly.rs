//! IP-DG system matrices and load vectors.
//!
//! Entry `(i, j)` of a system matrix is `a_h(φ_j, φ_i)`. The basis is real,
//! so every term is symmetric in `(i, j)` and the matrix is complex-symmetric.

use std::sync::Arc;

use num_complex::Complex64;

use crate::dg_space::DgSpace;
use crate::error::{check_len, Error, Result};
use crate::mesh::{EdgeKind, TriMesh};
use crate::randomness::MediaSample;

type C64 = Complex64;

/// Penalty parameters, applied uniformly on every interior edge. The
/// imaginary unit is applied by the assembler.
#[derive(Clone, Debug, PartialEq)]
pub struct PenaltySet {
    /// `gamma[j]` weighs jumps of the j-th normal derivative, j = 0..=r.
    pub gamma: Vec<f64>,
    /// Weight of tangential-derivative jumps.
    pub beta1: f64,
}

impl PenaltySet {
    /// γ₀ = 10, γ_j = 0.1 for j ≥ 1, β₁ = 0.1.
    pub fn default_for(r: usize) -> Self {
        let mut gamma = vec![0.1; r + 1];
        gamma[0] = 10.0;
        PenaltySet { gamma, beta1: 0.1 }
    }

    pub fn degree(&self) -> usize {
        self.gamma.len().saturating_sub(1)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: String, requirement, value| Err(Error::InvalidPenalty { name, requirement, value });
        match self.gamma.first() {
            None => return bad("gamma0".into(), "present", f64::NAN),
            Some(&g0) if !(g0 > 0.0 && g0.is_finite()) => return bad("gamma0".into(), "positive and finite", g0),
            _ => {}
        }
        for (j, &g) in self.gamma.iter().enumerate().skip(1) {
            if !(g >= 0.0 && g.is_finite()) {
                return bad(format!("gamma{j}"), "nonnegative and finite", g);
            }
        }
        if !(self.beta1 >= 0.0 && self.beta1.is_finite()) {
            return bad("beta1".into(), "nonnegative and finite", self.beta1);
        }
        Ok(())
    }

    /// Validate and check there is one γ per normal-derivative order 0..=r.
    pub fn validate_for(&self, r: usize) -> Result<()> {
        self.validate()?;
        check_len("penalty gammas (r + 1)", r + 1, self.gamma.len())
    }

    pub fn scaled(&self, c: f64) -> Self {
        PenaltySet {
            gamma: self.gamma.iter().map(|g| g * c).collect(),
            beta1: self.beta1 * c,
        }
    }
}

/// Block sparsity of the DG operator: each element couples with itself and
/// its face neighbours. Rows are stored CSR with sorted column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsityPattern {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    local_dim: usize,
    /// Sorted coupled elements per element.
    blocks: Vec<Vec<usize>>,
}

impl SparsityPattern {
    pub fn new(mesh: &TriMesh, space: &DgSpace) -> Self {
        let ld = space.local_dim;
        let mut blocks: Vec<Vec<usize>> = (0..mesh.num_elements()).map(|e| vec![e]).collect();
        for edge in &mesh.edges {
            if let Some((nb, _)) = edge.neighbor {
                blocks[edge.element].push(nb);
                blocks[nb].push(edge.element);
            }
        }
        for b in &mut blocks {
            b.sort_unstable();
            b.dedup();
        }
        let mut row_ptr = Vec::with_capacity(space.ndof + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for b in &blocks {
            for _ in 0..ld {
                for &e2 in b {
                    col_idx.extend(e2 * ld..(e2 + 1) * ld);
                }
                row_ptr.push(col_idx.len());
            }
        }
        SparsityPattern {
            dim: space.ndof,
            row_ptr,
            col_idx,
            local_dim: ld,
            blocks,
        }
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Storage position of `(row, col)`, if structurally present.
    pub fn find(&self, row: usize, col: usize) -> Option<usize> {
        if row >= self.dim {
            return None;
        }
        let (a, b) = (self.row_ptr[row], self.row_ptr[row + 1]);
        self.col_idx[a..b].binary_search(&col).ok().map(|p| a + p)
    }

    /// Storage position of local entry `(li, lj)` in block `(e, e2)`.
    fn block_pos(&self, e: usize, e2: usize, li: usize, lj: usize) -> usize {
        let ld = self.local_dim;
        let slot = self.blocks[e]
            .binary_search(&e2)
            .expect("elements are not coupled");
        self.row_ptr[e * ld + li] + slot * ld + lj
    }

    pub fn is_structurally_symmetric(&self) -> bool {
        (0..self.dim).all(|i| {
            self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
                .iter()
                .all(|&j| self.find(j, i).is_some())
        })
    }
}

/// How the mass and boundary coefficients were formed.
#[derive(Clone, Debug, PartialEq)]
pub enum CoefficientKind {
    Constant,
    Sampled { sample: usize, epsilon: f64 },
}

#[derive(Clone, Debug)]
pub struct SystemMatrix {
    pub pattern: Arc<SparsityPattern>,
    pub values: Vec<C64>,
    pub k: f64,
    pub penalties: PenaltySet,
    pub coefficient: CoefficientKind,
}

impl SystemMatrix {
    pub fn dim(&self) -> usize {
        self.pattern.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.pattern
            .find(row, col)
            .map_or(C64::new(0.0, 0.0), |p| self.values[p])
    }

    pub fn matvec(&self, x: &[C64]) -> Result<Vec<C64>> {
        check_len("matvec operand", self.dim(), x.len())?;
        let p = &self.pattern;
        Ok((0..p.dim)
            .map(|i| {
                (p.row_ptr[i]..p.row_ptr[i + 1])
                    .map(|q| self.values[q] * x[p.col_idx[q]])
                    .sum()
            })
            .collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// max |A_ij − A_ji|.
    pub fn symmetry_defect(&self) -> f64 {
        let p = &self.pattern;
        let mut worst: f64 = 0.0;
        for i in 0..p.dim {
            for q in p.row_ptr[i]..p.row_ptr[i + 1] {
                let j = p.col_idx[q];
                worst = worst.max((self.values[q] - self.get(j, i)).norm());
            }
        }
        worst
    }

    /// v̄ᵀ A v.
    pub fn quadratic_form(&self, v: &[C64]) -> Result<C64> {
        let av = self.matvec(v)?;
        Ok(v.iter().zip(&av).map(|(a, b)| a.conj() * b).sum())
    }

    /// Coordinate text: one `row col re im` line per stored entry, 0-based.
    pub fn to_coordinate_text(&self) -> String {
        let p = &self.pattern;
        let mut s = format!("% {} {} {}\n", p.dim, p.dim, self.nnz());
        for i in 0..p.dim {
            for q in p.row_ptr[i]..p.row_ptr[i + 1] {
                let v = self.values[q];
                s.push_str(&format!("{} {} {:.16e} {:.16e}\n", i, p.col_idx[q], v.re, v.im));
            }
        }
        s
    }
}

/// Precomputes the coefficient-independent part of the operator (stiffness,
/// consistency and penalty terms) so that constant and sampled matrices only
/// add the mass and boundary terms.
#[derive(Clone, Debug)]
pub struct Assembler<'a> {
    mesh: &'a TriMesh,
    space: &'a DgSpace,
    k: f64,
    penalties: PenaltySet,
    pattern: Arc<SparsityPattern>,
    base: Vec<C64>,
}

impl<'a> Assembler<'a> {
    pub fn new(mesh: &'a TriMesh, space: &'a DgSpace, k: f64, penalties: &PenaltySet) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidArgument(format!("wavenumber k must be positive, got {k}")));
        }
        space.check_mesh(mesh)?;
        penalties.validate_for(space.r)?;
        let pattern = Arc::new(SparsityPattern::new(mesh, space));
        let mut asm = Assembler {
            mesh,
            space,
            k,
            penalties: penalties.clone(),
            pattern,
            base: Vec::new(),
        };
        asm.base = asm.coefficient_free_part();
        Ok(asm)
    }

    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn penalties(&self) -> &PenaltySet {
        &self.penalties
    }

    fn coefficient_free_part(&self) -> Vec<C64> {
        let (mesh, space, pat) = (self.mesh, self.space, &*self.pattern);
        let ld = space.local_dim;
        let nq = space.num_volume_points();
        let mut vals = vec![C64::new(0.0, 0.0); pat.nnz()];

        for e in 0..space.n_elements {
            let w = mesh.volume_weights(e);
            let mut blk = vec![0.0; ld * ld];
            for q in 0..nq {
                let g = space.volume_gradients(e, q);
                for i in 0..ld {
                    for j in 0..ld {
                        blk[i * ld + j] += w[q] * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                    }
                }
            }
            for i in 0..ld {
                for j in 0..ld {
                    vals[pat.block_pos(e, e, i, j)] += blk[i * ld + j];
                }
            }
        }

        let nqe = space.num_edge_points();
        let pen = &self.penalties;
        for (eid, edge) in mesh.edges.iter().enumerate() {
            if edge.kind != EdgeKind::Interior {
                continue;
            }
            let nb = edge.neighbor.expect("interior edge has a neighbour").0;
            let elems = [edge.element, nb];
            let sign = [1.0, -1.0];
            let tr = [space.edge_trace(eid, 0), space.edge_trace(eid, 1)];
            let w = mesh.edge_weights(eid);
            let he = edge.length;
            for a in 0..2 {
                for b in 0..2 {
                    let mut re = vec![0.0; ld * ld];
                    let mut im = vec![0.0; ld * ld];
                    let sab = sign[a] * sign[b];
                    for q in 0..nqe {
                        let s = q * ld;
                        let (ta, tb) = (tr[a], tr[b]);
                        for i in 0..ld {
                            for j in 0..ld {
                                // Trial φ_j on side b, test φ_i on side a.
                                let cons = -0.5 * sign[a] * tb.normal[0][s + j] * ta.values[s + i]
                                    - 0.5 * sign[b] * tb.values[s + j] * ta.normal[0][s + i];
                                let mut p = pen.beta1 / he * ta.tangential[s + i] * tb.tangential[s + j]
                                    + pen.gamma[0] / he * ta.values[s + i] * tb.values[s + j];
                                for jj in 1..=space.r {
                                    p += pen.gamma[jj]
                                        * he.powi(2 * jj as i32 - 1)
                                        * ta.normal[jj - 1][s + i]
                                        * tb.normal[jj - 1][s + j];
                                }
                                re[i * ld + j] += w[q] * cons;
                                im[i * ld + j] += w[q] * sab * p;
                            }
                        }
                    }
                    for i in 0..ld {
                        for j in 0..ld {
                            vals[pat.block_pos(elems[a], elems[b], i, j)] += C64::new(re[i * ld + j], im[i * ld + j]);
                        }
                    }
                }
            }
        }
        vals
    }

    /// Add `−k²(α² φ_j, φ_i) + ik⟨α φ_j, φ_i⟩_{∂D}` with α given at the
    /// volume points `[element * nq + q]` and boundary points `[ordinal * nqe + q]`.
    fn add_coefficient_terms(&self, vals: &mut [C64], alpha_vol: impl Fn(usize) -> f64, alpha_bnd: impl Fn(usize) -> f64) {
        let (mesh, space, pat) = (self.mesh, self.space, &*self.pattern);
        let ld = space.local_dim;
        let nq = space.num_volume_points();
        let k2 = self.k * self.k;
        let mut blk = vec![0.0; ld * ld];
        for e in 0..space.n_elements {
            let w = mesh.volume_weights(e);
            blk.iter_mut().for_each(|b| *b = 0.0);
            for q in 0..nq {
                let a = alpha_vol(e * nq + q);
                let wq = w[q] * a * a;
                let phi = space.volume_values(q);
                for i in 0..ld {
                    for j in 0..ld {
                        blk[i * ld + j] += wq * phi[i] * phi[j];
                    }
                }
            }
            for i in 0..ld {
                for j in 0..ld {
                    vals[pat.block_pos(e, e, i, j)] -= k2 * blk[i * ld + j];
                }
            }
        }

        let nqe = space.num_edge_points();
        for (ord, &eid) in mesh.boundary_edges.iter().enumerate() {
            let el = mesh.edges[eid].element;
            let tr = space.edge_trace(eid, 0);
            let w = mesh.edge_weights(eid);
            blk.iter_mut().for_each(|b| *b = 0.0);
            for q in 0..nqe {
                let wq = w[q] * alpha_bnd(ord * nqe + q);
                let phi = &tr.values[q * ld..(q + 1) * ld];
                for i in 0..ld {
                    for j in 0..ld {
                        blk[i * ld + j] += wq * phi[i] * phi[j];
                    }
                }
            }
            for i in 0..ld {
                for j in 0..ld {
                    vals[pat.block_pos(el, el, i, j)] += C64::new(0.0, self.k * blk[i * ld + j]);
                }
            }
        }
    }

    pub fn assemble_constant(&self) -> SystemMatrix {
        let mut values = self.base.clone();
        self.add_coefficient_terms(&mut values, |_| 1.0, |_| 1.0);
        self.matrix(values, CoefficientKind::Constant)
    }

    pub fn assemble_variable(&self, media: &MediaSample, epsilon: f64) -> Result<SystemMatrix> {
        media.check_layout(self.mesh)?;
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!("epsilon must be >= 0, got {epsilon}")));
        }
        let mut values = self.base.clone();
        self.add_coefficient_terms(
            &mut values,
            |i| 1.0 + epsilon * media.volume[i],
            |i| 1.0 + epsilon * media.boundary[i],
        );
        Ok(self.matrix(
            values,
            CoefficientKind::Sampled {
                sample: media.sample,
                epsilon,
            },
        ))
    }

    fn matrix(&self, values: Vec<C64>, coefficient: CoefficientKind) -> SystemMatrix {
        SystemMatrix {
            pattern: Arc::clone(&self.pattern),
            values,
            k: self.k,
            penalties: self.penalties.clone(),
            coefficient,
        }
    }
}

pub fn assemble_constant(mesh: &TriMesh, space: &DgSpace, k: f64, penalties: &PenaltySet) -> Result<SystemMatrix> {
    Ok(Assembler::new(mesh, space, k, penalties)?.assemble_constant())
}

pub fn assemble_variable(
    mesh: &TriMesh,
    space: &DgSpace,
    k: f64,
    penalties: &PenaltySet,
    media: &MediaSample,
    epsilon: f64,
) -> Result<SystemMatrix> {
    Assembler::new(mesh, space, k, penalties)?.assemble_variable(media, epsilon)
}

/// Load vector `(S, φ_i)_D + ⟨Q, φ_i⟩_{∂D}`. `s` is given at every volume
/// point (`[element * nq + q]`), `q` at every boundary-edge point
/// (`[ordinal * nqe + q]`, ordinals as in `mesh.boundary_edges`); an empty
/// `q` means Q ≡ 0.
pub fn assemble_rhs(mesh: &TriMesh, space: &DgSpace, s: &[C64], q: &[C64]) -> Result<Vec<C64>> {
    let mut out = vec![C64::new(0.0, 0.0); space.ndof];
    assemble_rhs_into(mesh, space, s, q, &mut out)?;
    Ok(out)
}

pub fn assemble_rhs_into(mesh: &TriMesh, space: &DgSpace, s: &[C64], q: &[C64], out: &mut [C64]) -> Result<()> {
    space.check_mesh(mesh)?;
    let ld = space.local_dim;
    let nq = space.num_volume_points();
    let nqe = space.num_edge_points();
    check_len("volume integrand S", space.n_elements * nq, s.len())?;
    if !q.is_empty() {
        check_len("boundary integrand Q", mesh.boundary_edges.len() * nqe, q.len())?;
    }
    check_len("load vector", space.ndof, out.len())?;
    out.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
    for e in 0..space.n_elements {
        let w = mesh.volume_weights(e);
        let dst = &mut out[e * ld..(e + 1) * ld];
        for qi in 0..nq {
            let f = s[e * nq + qi] * w[qi];
            for (d, p) in dst.iter_mut().zip(space.volume_values(qi)) {
                *d += f * p;
            }
        }
    }
    if !q.is_empty() {
        for (ord, &eid) in mesh.boundary_edges.iter().enumerate() {
            let el = mesh.edges[eid].element;
            let tr = space.edge_trace(eid, 0);
            let w = mesh.edge_weights(eid);
            let dst = &mut out[el * ld..(el + 1) * ld];
            for qi in 0..nqe {
                let f = q[ord * nqe + qi] * w[qi];
                for (d, p) in dst.iter_mut().zip(&tr.values[qi * ld..(qi + 1) * ld]) {
                    *d += f * p;
                }
            }
        }
    }
    Ok(())
}
