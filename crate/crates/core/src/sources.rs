//! Volume source terms f(ω, x).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::randomness::{MediaSample, QuadLocation};

/// Radii below this use the limit value of sin(kαρ)/ρ.
pub const RADIAL_GUARD: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SourceSpec {
    Constant(f64),
    /// sin(kαρ)/ρ with ρ = |x|; α is the sampled medium.
    RadialWave,
}

impl Default for SourceSpec {
    fn default() -> Self {
        SourceSpec::Constant(1.0)
    }
}

impl SourceSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            SourceSpec::Constant(v) if !v.is_finite() => {
                Err(Error::InvalidArgument(format!("constant source must be finite, got {v}")))
            }
            _ => Ok(()),
        }
    }

    /// True when the source varies with the medium for ε > 0.
    pub fn depends_on_media(&self) -> bool {
        matches!(self, SourceSpec::RadialWave)
    }
}

impl fmt::Display for SourceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceSpec::Constant(v) if *v == 1.0 => write!(f, "constant"),
            SourceSpec::Constant(v) => write!(f, "constant:{v:.16e}"),
            SourceSpec::RadialWave => write!(f, "radial"),
        }
    }
}

impl FromStr for SourceSpec {
    type Err = Error;

    /// `constant`, `constant:<value>` or `radial`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let spec = match s {
            "constant" => SourceSpec::Constant(1.0),
            "radial" | "radial_wave" => SourceSpec::RadialWave,
            _ => match s.strip_prefix("constant:") {
                Some(v) => SourceSpec::Constant(
                    v.trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("bad constant source value {v:?}")))?,
                ),
                None => return Err(Error::Config(format!("unknown source {s:?}"))),
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// sin(kαρ)/ρ, continuous at ρ = 0.
pub fn radial_wave(k: f64, alpha: f64, rho: f64) -> f64 {
    if rho < RADIAL_GUARD {
        k * alpha
    } else {
        (k * alpha * rho).sin() / rho
    }
}

/// Source value at `point`, which must be volume point `q` of `element`.
pub fn eval_source(
    spec: &SourceSpec,
    media: &MediaSample,
    epsilon: f64,
    k: f64,
    point: [f64; 2],
    element: usize,
    q: usize,
) -> Result<Complex64> {
    Ok(Complex64::new(
        match *spec {
            SourceSpec::Constant(v) => v,
            SourceSpec::RadialWave => {
                let alpha = media.alpha_at(epsilon, QuadLocation::Volume { element, q })?;
                radial_wave(k, alpha, point[0].hypot(point[1]))
            }
        },
        0.0,
    ))
}

/// Source at every volume point, `[element * nq + q]`.
pub fn source_values(
    spec: &SourceSpec,
    mesh: &TriMesh,
    media: &MediaSample,
    epsilon: f64,
    k: f64,
) -> Result<Vec<Complex64>> {
    media.check_layout(mesh)?;
    let nq = mesh.num_volume_points();
    let mut out = Vec::with_capacity(mesh.num_elements() * nq);
    for e in 0..mesh.num_elements() {
        let pts = mesh.volume_points(e);
        for (q, p) in pts.iter().enumerate() {
            out.push(eval_source(spec, media, epsilon, k, *p, e, q)?);
        }
    }
    Ok(out)
}
