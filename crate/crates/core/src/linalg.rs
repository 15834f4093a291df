//! Sparse complex LU with threshold partial pivoting (left-looking,
//! Gilbert–Peierls) and reusable factors.
//!
//! Factors satisfy `P A Q = L U`, with `Q` a fill-reducing column order and
//! `P` chosen by pivoting. `L` is unit lower triangular.

use num_complex::Complex64;

use crate::assembly::{SparsityPattern, SystemMatrix};
use crate::error::{check_len, Error, Result};

type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const UNSET: usize = usize::MAX;

/// Rows whose magnitude is at least this fraction of the column maximum may
/// be chosen as pivot; the diagonal is preferred when it qualifies.
pub const PIVOT_THRESHOLD: f64 = 0.1;
/// A pivot smaller than this times the largest pivot so far is singular.
pub const SINGULAR_TOLERANCE: f64 = 1e-14;

/// Compressed sparse column matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CscMatrix {
    pub n: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<C64>,
}

impl CscMatrix {
    pub fn from_system(a: &SystemMatrix) -> Self {
        let p = &a.pattern;
        Self::from_csr(p.dim, &p.row_ptr, &p.col_idx, &a.values)
    }

    pub fn from_csr(n: usize, row_ptr: &[usize], col_idx: &[usize], values: &[C64]) -> Self {
        let mut count = vec![0usize; n + 1];
        for &c in col_idx {
            count[c + 1] += 1;
        }
        for i in 0..n {
            count[i + 1] += count[i];
        }
        let col_ptr = count.clone();
        let mut next = count;
        let mut row_idx = vec![0; col_idx.len()];
        let mut vals = vec![ZERO; col_idx.len()];
        for r in 0..n {
            for q in row_ptr[r]..row_ptr[r + 1] {
                let c = col_idx[q];
                row_idx[next[c]] = r;
                vals[next[c]] = values[q];
                next[c] += 1;
            }
        }
        CscMatrix {
            n,
            col_ptr,
            row_idx,
            values: vals,
        }
    }

    /// Drops exact zeros.
    pub fn from_dense(rows: &[Vec<C64>]) -> Self {
        let n = rows.len();
        let mut col_ptr = vec![0];
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        for c in 0..n {
            for (r, row) in rows.iter().enumerate() {
                if row[c] != ZERO {
                    row_idx.push(r);
                    values.push(row[c]);
                }
            }
            col_ptr.push(row_idx.len());
        }
        CscMatrix {
            n,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.n];
        for c in 0..self.n {
            for p in self.col_ptr[c]..self.col_ptr[c + 1] {
                y[self.row_idx[p]] += self.values[p] * x[c];
            }
        }
        y
    }

    pub fn fingerprint(&self) -> u64 {
        let mut h = mix(self.n as u64);
        for &p in &self.col_ptr {
            h = mix(h ^ p as u64);
        }
        for (&r, v) in self.row_idx.iter().zip(&self.values) {
            h = mix(h ^ r as u64);
            h = mix(h ^ v.re.to_bits());
            h = mix(h ^ v.im.to_bits());
        }
        h
    }
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fill-reducing column order, reusable for every matrix sharing a pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LuOrdering {
    /// `perm[k]` is the original column eliminated at step k.
    pub perm: Vec<usize>,
}

impl LuOrdering {
    pub fn natural(n: usize) -> Self {
        LuOrdering {
            perm: (0..n).collect(),
        }
    }

    /// Approximate minimum degree on a structurally symmetric pattern.
    pub fn amd(pattern: &SparsityPattern) -> Result<Self> {
        if pattern.dim == 0 {
            return Ok(Self::natural(0));
        }
        let (perm, _, _) = amd::order(pattern.dim, &pattern.row_ptr, &pattern.col_idx, &amd::Control::default())
            .map_err(|s| Error::InvalidArgument(format!("minimum degree ordering failed: {s:?}")))?;
        Ok(LuOrdering { perm })
    }
}

#[derive(Clone, Debug)]
pub struct LuFactors {
    n: usize,
    col_perm: Vec<usize>,
    /// Original row -> pivot position.
    row_perm_inv: Vec<usize>,
    l_ptr: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<C64>,
    u_ptr: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<C64>,
    u_diag: Vec<C64>,
    source_fingerprint: u64,
}

pub fn lu_factorize(a: &SystemMatrix) -> Result<LuFactors> {
    let ord = LuOrdering::amd(&a.pattern)?;
    lu_factorize_with(a, &ord)
}

pub fn lu_factorize_with(a: &SystemMatrix, ordering: &LuOrdering) -> Result<LuFactors> {
    lu_factorize_csc(&CscMatrix::from_system(a), ordering)
}

pub fn lu_factorize_csc(a: &CscMatrix, ordering: &LuOrdering) -> Result<LuFactors> {
    let n = a.n;
    check_len("column ordering", n, ordering.perm.len())?;
    let q = &ordering.perm;

    let mut pinv = vec![UNSET; n];
    let mut x = vec![ZERO; n];
    let mut xi = vec![0usize; n];
    let mut mark = vec![UNSET; n];
    let mut stack: Vec<(usize, usize)> = Vec::new();

    let nnz_guess = 4 * a.values.len();
    // L columns store the pivot row first (unit entry), original row indices.
    let mut l_ptr = Vec::with_capacity(n + 1);
    let mut l_idx = Vec::with_capacity(nnz_guess);
    let mut l_val = Vec::with_capacity(nnz_guess);
    let mut u_ptr = Vec::with_capacity(n + 1);
    let mut u_idx = Vec::with_capacity(nnz_guess);
    let mut u_val = Vec::with_capacity(nnz_guess);
    let mut u_diag = Vec::with_capacity(n);
    let mut max_pivot: f64 = 0.0;
    l_ptr.push(0);
    u_ptr.push(0);

    for k in 0..n {
        let col = q[k];

        // Nonzero pattern of L \ A(:, col) in topological order: xi[top..n].
        let mut top = n;
        for p in a.col_ptr[col]..a.col_ptr[col + 1] {
            let start = a.row_idx[p];
            if mark[start] == k {
                continue;
            }
            mark[start] = k;
            stack.push((start, l_start(&pinv, &l_ptr, start)));
            while let Some(&mut (j, ref mut cursor)) = stack.last_mut() {
                let end = match pinv[j] {
                    UNSET => 0,
                    jj => l_ptr[jj + 1],
                };
                let mut pushed = None;
                while *cursor < end {
                    let i = l_idx[*cursor];
                    *cursor += 1;
                    if mark[i] != k {
                        pushed = Some(i);
                        break;
                    }
                }
                match pushed {
                    Some(i) => {
                        mark[i] = k;
                        stack.push((i, l_start(&pinv, &l_ptr, i)));
                    }
                    None => {
                        stack.pop();
                        top -= 1;
                        xi[top] = j;
                    }
                }
            }
        }

        for &i in &xi[top..n] {
            x[i] = ZERO;
        }
        for p in a.col_ptr[col]..a.col_ptr[col + 1] {
            x[a.row_idx[p]] = a.values[p];
        }
        for px in top..n {
            let j = xi[px];
            let jj = pinv[j];
            if jj == UNSET {
                continue;
            }
            let xj = x[j];
            if xj == ZERO {
                continue;
            }
            for p in (l_ptr[jj] + 1)..l_ptr[jj + 1] {
                x[l_idx[p]] -= l_val[p] * xj;
            }
        }

        let mut ipiv = UNSET;
        let mut amax = -1.0f64;
        for &i in &xi[top..n] {
            if pinv[i] == UNSET {
                let t = x[i].norm();
                if t > amax || (t == amax && i < ipiv) {
                    amax = t;
                    ipiv = i;
                }
            } else {
                u_idx.push(pinv[i]);
                u_val.push(x[i]);
            }
        }
        if ipiv == UNSET || amax <= 0.0 {
            return Err(Error::SingularMatrix {
                index: k,
                magnitude: 0.0,
            });
        }
        if pinv[col] == UNSET && x[col].norm() >= PIVOT_THRESHOLD * amax {
            ipiv = col;
        }
        let pivot = x[ipiv];
        if pivot.norm() < SINGULAR_TOLERANCE * max_pivot || !pivot.norm().is_finite() {
            return Err(Error::SingularMatrix {
                index: k,
                magnitude: pivot.norm(),
            });
        }
        max_pivot = max_pivot.max(pivot.norm());
        u_diag.push(pivot);
        u_ptr.push(u_idx.len());
        pinv[ipiv] = k;
        l_idx.push(ipiv);
        l_val.push(C64::new(1.0, 0.0));
        let inv = pivot.inv();
        for &i in &xi[top..n] {
            if pinv[i] == UNSET {
                l_idx.push(i);
                l_val.push(x[i] * inv);
            }
            x[i] = ZERO;
        }
        l_ptr.push(l_idx.len());
    }

    // Drop the unit diagonal and renumber rows into pivot order.
    let mut sl_ptr = Vec::with_capacity(n + 1);
    let mut sl_idx = Vec::with_capacity(l_idx.len() - n);
    let mut sl_val = Vec::with_capacity(l_idx.len() - n);
    sl_ptr.push(0);
    for k in 0..n {
        for p in (l_ptr[k] + 1)..l_ptr[k + 1] {
            sl_idx.push(pinv[l_idx[p]]);
            sl_val.push(l_val[p]);
        }
        sl_ptr.push(sl_idx.len());
    }

    Ok(LuFactors {
        n,
        col_perm: q.clone(),
        row_perm_inv: pinv,
        l_ptr: sl_ptr,
        l_idx: sl_idx,
        l_val: sl_val,
        u_ptr,
        u_idx,
        u_val,
        u_diag,
        source_fingerprint: a.fingerprint(),
    })
}

fn l_start(pinv: &[usize], l_ptr: &[usize], j: usize) -> usize {
    match pinv[j] {
        UNSET => 0,
        jj => l_ptr[jj] + 1,
    }
}

impl LuFactors {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of strict L plus U including its diagonal.
    pub fn nnz(&self) -> usize {
        self.l_idx.len() + self.u_idx.len() + self.n
    }

    pub fn source_fingerprint(&self) -> u64 {
        self.source_fingerprint
    }

    pub fn col_perm(&self) -> &[usize] {
        &self.col_perm
    }

    /// Original row index -> pivot position.
    pub fn row_perm_inv(&self) -> &[usize] {
        &self.row_perm_inv
    }

    pub fn u_diagonal(&self) -> &[C64] {
        &self.u_diag
    }

    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        let mut x = b.to_vec();
        let mut work = Vec::new();
        self.solve_in_place(&mut x, &mut work)?;
        Ok(x)
    }

    /// Overwrite `b` with `A⁻¹ b`; `work` is scratch reused across calls.
    pub fn solve_in_place(&self, b: &mut [C64], work: &mut Vec<C64>) -> Result<()> {
        check_len("right-hand side", self.n, b.len())?;
        work.clear();
        work.resize(self.n, ZERO);
        let z = work;
        for (i, v) in b.iter().enumerate() {
            z[self.row_perm_inv[i]] = *v;
        }
        for j in 0..self.n {
            let zj = z[j];
            if zj != ZERO {
                for p in self.l_ptr[j]..self.l_ptr[j + 1] {
                    z[self.l_idx[p]] -= self.l_val[p] * zj;
                }
            }
        }
        for j in (0..self.n).rev() {
            let wj = z[j] / self.u_diag[j];
            z[j] = wj;
            if wj != ZERO {
                for p in self.u_ptr[j]..self.u_ptr[j + 1] {
                    z[self.u_idx[p]] -= self.u_val[p] * wj;
                }
            }
        }
        for (k, &c) in self.col_perm.iter().enumerate() {
            b[c] = z[k];
        }
        Ok(())
    }

    /// `L U v`, in pivot coordinates.
    pub fn lu_product(&self, v: &[C64]) -> Result<Vec<C64>> {
        check_len("probe vector", self.n, v.len())?;
        let mut uv = vec![ZERO; self.n];
        for j in 0..self.n {
            uv[j] += self.u_diag[j] * v[j];
            for p in self.u_ptr[j]..self.u_ptr[j + 1] {
                uv[self.u_idx[p]] += self.u_val[p] * v[j];
            }
        }
        let mut out = uv.clone();
        for j in 0..self.n {
            for p in self.l_ptr[j]..self.l_ptr[j + 1] {
                out[self.l_idx[p]] += self.l_val[p] * uv[j];
            }
        }
        Ok(out)
    }
}

pub fn lu_solve(factors: &LuFactors, b: &[C64]) -> Result<Vec<C64>> {
    factors.solve(b)
}
