//! Reference quadrature rules.
//!
//! Triangle rules live on the reference triangle with vertices (0,0), (1,0),
//! (0,1) (area 1/2); edge rules live on the unit interval [0,1].

use crate::error::{Error, Result};

/// Which reference cell a rule is defined on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellKind {
    Triangle,
    Edge,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TriangleRule {
    pub degree: usize,
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl EdgeRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Quadrature orders used to build a mesh's cached geometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadSpec {
    /// Polynomial degree integrated exactly on triangles (2 or 4).
    pub triangle_degree: usize,
    /// Number of Gauss points per edge (2 to 4).
    pub edge_points: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            triangle_degree: 4,
            edge_points: 3,
        }
    }
}

impl QuadSpec {
    pub fn validate(&self) -> Result<()> {
        triangle_rule(self.triangle_degree)?;
        gauss_rule(self.edge_points)?;
        Ok(())
    }
}

/// Symmetric triangle rule exact for polynomials up to `degree` (2 or 4).
pub fn triangle_rule(degree: usize) -> Result<TriangleRule> {
    match degree {
        2 => {
            let w = 1.0 / 6.0;
            Ok(TriangleRule {
                degree,
                points: vec![
                    [1.0 / 6.0, 1.0 / 6.0],
                    [2.0 / 3.0, 1.0 / 6.0],
                    [1.0 / 6.0, 2.0 / 3.0],
                ],
                weights: vec![w; 3],
            })
        }
        4 => {
            // Six-point rule, two orbits of the form (a, a, 1-2a).
            let s10 = 10f64.sqrt();
            let root = (38.0 - 44.0 * (0.4f64).sqrt()).sqrt();
            let a = (8.0 - s10 + root) / 18.0;
            let b = (8.0 - s10 - root) / 18.0;
            let wroot = (213_125.0 - 53_320.0 * s10).sqrt();
            // Normalized to sum 1, then scaled by the reference area.
            let wa = 0.5 * (620.0 + wroot) / 3720.0;
            let wb = 0.5 * (620.0 - wroot) / 3720.0;
            Ok(TriangleRule {
                degree,
                points: vec![
                    [a, a],
                    [1.0 - 2.0 * a, a],
                    [a, 1.0 - 2.0 * a],
                    [b, b],
                    [1.0 - 2.0 * b, b],
                    [b, 1.0 - 2.0 * b],
                ],
                weights: vec![wa, wa, wa, wb, wb, wb],
            })
        }
        _ => Err(Error::UnsupportedQuadrature(format!(
            "triangle degree {degree} (supported: 2, 4)"
        ))),
    }
}

/// Gauss-Legendre rule with `npoints` nodes on [0, 1], points ascending.
pub fn gauss_rule(npoints: usize) -> Result<EdgeRule> {
    let (x, w): (Vec<f64>, Vec<f64>) = match npoints {
        2 => {
            let p = 1.0 / 3f64.sqrt();
            (vec![-p, p], vec![1.0, 1.0])
        }
        3 => {
            let p = 0.6f64.sqrt();
            (vec![-p, 0.0, p], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        4 => {
            let t = 2.0 / 7.0 * (1.2f64).sqrt();
            let inner = (3.0 / 7.0 - t).sqrt();
            let outer = (3.0 / 7.0 + t).sqrt();
            let s30 = 30f64.sqrt();
            let wi = (18.0 + s30) / 36.0;
            let wo = (18.0 - s30) / 36.0;
            (vec![-outer, -inner, inner, outer], vec![wo, wi, wi, wo])
        }
        _ => {
            return Err(Error::UnsupportedQuadrature(format!(
                "edge rule with {npoints} points (supported: 2 to 4)"
            )))
        }
    };
    Ok(EdgeRule {
        points: x.iter().map(|xi| 0.5 * (1.0 + xi)).collect(),
        weights: w.iter().map(|wi| 0.5 * wi).collect(),
    })
}

/// Points and weights of a reference rule as plain vectors.
///
/// For triangles `order` is the exactness degree; for edges it is the number
/// of Gauss points. Edge points are returned as `[t, 0.0]`.
pub fn reference_quadrature(kind: CellKind, order: usize) -> Result<(Vec<[f64; 2]>, Vec<f64>)> {
    match kind {
        CellKind::Triangle => {
            let rule = triangle_rule(order)?;
            Ok((rule.points, rule.weights))
        }
        CellKind::Edge => {
            let rule = gauss_rule(order)?;
            Ok((rule.points.iter().map(|&t| [t, 0.0]).collect(), rule.weights))
        }
    }
}
