//! CSV tables and cross-sections.

use crate::dg_space::{evaluate, DgFunction, DgSpace};
use crate::error::{Error, Result};
use crate::mesh::TriMesh;

use super::config::fmt_f;

/// A small CSV table of preformatted cells.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

pub(crate) fn cell_f(x: f64) -> String {
    fmt_f(x)
}

pub(crate) fn cell_opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, fmt_f)
}

/// Values along the diagonal y = x, from (−0.5, −0.5) to (0.5, 0.5), as CSV
/// `t,x,y,re,im,abs` with `t ∈ [0, 1]`.
pub fn cross_section_csv(space: &DgSpace, mesh: &TriMesh, f: &DgFunction, samples: usize) -> Result<String> {
    if samples < 2 {
        return Err(Error::InvalidArgument("a cross-section needs at least 2 points".into()));
    }
    let mut out = String::from("t,x,y,re,im,abs\n");
    for (t, x, v) in cross_section(space, mesh, f, samples)? {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_f(t),
            fmt_f(x[0]),
            fmt_f(x[1]),
            fmt_f(v.re),
            fmt_f(v.im),
            fmt_f(v.norm())
        ));
    }
    Ok(out)
}

/// `(t, point, value)` along the diagonal.
pub fn cross_section(
    space: &DgSpace,
    mesh: &TriMesh,
    f: &DgFunction,
    samples: usize,
) -> Result<Vec<(f64, [f64; 2], num_complex::Complex64)>> {
    (0..samples)
        .map(|i| {
            let t = i as f64 / (samples - 1) as f64;
            let x = [-0.5 + t, -0.5 + t];
            let e = mesh
                .locate(x)
                .ok_or_else(|| Error::InvalidArgument(format!("point {x:?} is outside the mesh")))?;
            let xi = space.map(e).inverse_apply(x);
            Ok((t, x, evaluate(space, f, e, &[xi])?[0]))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multimodes::Discretization;
    use crate::quadrature::QuadSpec;
    use num_complex::Complex64;

    #[test]
    fn constant_and_affine_sections() {
        let d = Discretization::new(5, 1, QuadSpec::default()).unwrap();
        let one = DgFunction::interpolate(&d.space, |_| Complex64::new(1.0, 0.0));
        for (_, _, v) in cross_section(&d.space, &d.mesh, &one, 17).unwrap() {
            assert!((v.re - 1.0).abs() < 1e-14);
        }
        let lin = DgFunction::interpolate(&d.space, |x| Complex64::new(x[0] + x[1], 0.0));
        let csv = cross_section_csv(&d.space, &d.mesh, &lin, 11).unwrap();
        for line in csv.lines().skip(1) {
            let c: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
            assert!((c[3] - 2.0 * c[1]).abs() < 1e-13);
        }
        assert!(cross_section_csv(&d.space, &d.mesh, &lin, 1).is_err());
    }

    #[test]
    fn table_csv() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), cell_f(0.5)]);
        assert_eq!(t.to_csv(), "a,b\n1,5.0000000000000000e-1\n");
    }
}
