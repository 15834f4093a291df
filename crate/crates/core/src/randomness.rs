//! Counter-keyed sampling of the random medium η.
//!
//! Every value is a pure function of `(seed, sample, stream, entity, point)`,
//! so samples can be drawn in any order or on any thread.

use crate::error::{Error, Result};
use crate::mesh::TriMesh;

const STREAM_VOLUME: u64 = 0;
const STREAM_BOUNDARY: u64 = 1;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw in [0, 1) keyed by the full coordinate of a quadrature point.
pub fn keyed_uniform(seed: u64, sample: u64, stream: u64, entity: u64, point: u64) -> f64 {
    let mut h = splitmix64(seed);
    for word in [sample, stream, entity, point] {
        h = splitmix64(h ^ word);
    }
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform distribution on `[min, max]` plus the generator seed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub min: f64,
    pub max: f64,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            min: -1.0,
            max: 1.0,
            seed: 1,
        }
    }
}

impl NoiseSpec {
    pub fn new(min: f64, max: f64, seed: u64) -> Result<Self> {
        let s = NoiseSpec { min, max, seed };
        s.validate()?;
        Ok(s)
    }

    /// Accepts `min == max` as a point mass.
    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.min > self.max {
            return Err(Error::InvalidArgument(format!(
                "noise interval [{}, {}] must be finite with min <= max",
                self.min, self.max
            )));
        }
        Ok(())
    }

    fn draw(&self, sample: usize, stream: u64, entity: usize, point: usize) -> f64 {
        let u = keyed_uniform(self.seed, sample as u64, stream, entity as u64, point as u64);
        if self.min == self.max {
            self.min
        } else {
            self.min + (self.max - self.min) * u
        }
    }
}

/// Where an η value lives: a volume point of an element, or a point of a
/// boundary edge (identified by its global edge id).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadLocation {
    Volume { element: usize, q: usize },
    Edge { edge: usize, q: usize },
}

/// One realization of η at every volume point and every boundary-edge point.
#[derive(Clone, Debug, PartialEq)]
pub struct MediaSample {
    pub sample: usize,
    pub spec: NoiseSpec,
    /// `[element * nq + q]`
    pub volume: Vec<f64>,
    /// `[boundary ordinal * nqe + q]`
    pub boundary: Vec<f64>,
    n_elements: usize,
    nq: usize,
    nqe: usize,
    boundary_edges: Vec<usize>,
}

pub fn sample_media(mesh: &TriMesh, spec: &NoiseSpec, sample: usize) -> Result<MediaSample> {
    spec.validate()?;
    let nq = mesh.num_volume_points();
    let nqe = mesh.num_edge_points();
    let mut volume = Vec::with_capacity(mesh.num_elements() * nq);
    for e in 0..mesh.num_elements() {
        for q in 0..nq {
            volume.push(spec.draw(sample, STREAM_VOLUME, e, q));
        }
    }
    let mut boundary = Vec::with_capacity(mesh.boundary_edges.len() * nqe);
    for &edge in &mesh.boundary_edges {
        for q in 0..nqe {
            boundary.push(spec.draw(sample, STREAM_BOUNDARY, edge, q));
        }
    }
    Ok(MediaSample {
        sample,
        spec: *spec,
        volume,
        boundary,
        n_elements: mesh.num_elements(),
        nq,
        nqe,
        boundary_edges: mesh.boundary_edges.clone(),
    })
}

impl MediaSample {
    pub(crate) fn check_layout(&self, mesh: &TriMesh) -> Result<()> {
        if self.n_elements != mesh.num_elements()
            || self.nq != mesh.num_volume_points()
            || self.nqe != mesh.num_edge_points()
            || self.boundary_edges != mesh.boundary_edges
        {
            return Err(Error::InvalidArgument(
                "media sample was drawn on a different mesh or quadrature layout".into(),
            ));
        }
        Ok(())
    }

    pub fn eta(&self, loc: QuadLocation) -> Result<f64> {
        match loc {
            QuadLocation::Volume { element, q } if element < self.n_elements && q < self.nq => {
                Ok(self.volume[element * self.nq + q])
            }
            QuadLocation::Edge { edge, q } if q < self.nqe => self
                .boundary_edges
                .binary_search(&edge)
                .map(|ord| self.boundary[ord * self.nqe + q])
                .map_err(|_| Error::UnknownLocation(format!("edge {edge} is not a boundary edge"))),
            other => Err(Error::UnknownLocation(format!("{other:?}"))),
        }
    }

    /// `1 + ε η` at `loc`.
    pub fn alpha_at(&self, epsilon: f64, loc: QuadLocation) -> Result<f64> {
        if !(epsilon >= 0.0) {
            return Err(Error::InvalidArgument(format!("epsilon must be >= 0, got {epsilon}")));
        }
        Ok(1.0 + epsilon * self.eta(loc)?)
    }

    /// Stable hash of the sample's values, for checking that two runs used
    /// the same realization.
    pub fn fingerprint(&self) -> u64 {
        let mut h = splitmix64(self.sample as u64);
        for v in self.volume.iter().chain(&self.boundary) {
            h = splitmix64(h ^ v.to_bits());
        }
        h
    }

    /// Mean η over each element's volume points.
    pub fn element_means(&self) -> Vec<f64> {
        self.volume
            .chunks(self.nq)
            .map(|c| c.iter().sum::<f64>() / c.len() as f64)
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.volume
            .iter()
            .chain(&self.boundary)
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn alpha_at(media: &MediaSample, epsilon: f64, loc: QuadLocation) -> Result<f64> {
    media.alpha_at(epsilon, loc)
}

/// Per-element mean η and α over the given sample indices, as CSV
/// `element,x,y,mean_eta,mean_alpha` (x, y = centroid).
pub fn media_snapshot_csv(
    mesh: &TriMesh,
    spec: &NoiseSpec,
    samples: std::ops::Range<usize>,
    epsilon: f64,
) -> Result<String> {
    let mut acc = vec![0.0; mesh.num_elements()];
    let count = samples.len().max(1) as f64;
    for j in samples {
        for (a, m) in acc.iter_mut().zip(sample_media(mesh, spec, j)?.element_means()) {
            *a += m;
        }
    }
    let mut out = String::from("element,x,y,mean_eta,mean_alpha\n");
    for (e, a) in acc.iter().enumerate() {
        let c = mesh.centroid(e);
        let eta = a / count;
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            e,
            c[0],
            c[1],
            eta,
            1.0 + epsilon * eta
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_uniform_mesh;
    use crate::quadrature::QuadSpec;
    use proptest::prelude::*;

    fn mesh(n: usize) -> TriMesh {
        build_uniform_mesh(n, QuadSpec::default()).unwrap()
    }

    #[test]
    fn degenerate_interval_gives_constant() {
        let m = mesh(3);
        let s = sample_media(&m, &NoiseSpec::new(0.0, 0.0, 9).unwrap(), 4).unwrap();
        assert!(s.volume.iter().chain(&s.boundary).all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_reversed_interval() {
        assert!(NoiseSpec::new(1.0, -1.0, 0).is_err());
        assert!(NoiseSpec::new(f64::NAN, 1.0, 0).is_err());
    }

    #[test]
    fn reproducible_and_order_independent() {
        let m = mesh(4);
        let spec = NoiseSpec::default();
        let a = sample_media(&m, &spec, 3).unwrap();
        let _ = sample_media(&m, &spec, 5).unwrap();
        let b = sample_media(&m, &spec, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.fingerprint(), b.fingerprint());
        let c = sample_media(&m, &spec, 4).unwrap();
        assert_ne!(a.fingerprint(), c.fingerprint());
        assert!(a.max_abs() <= 1.0);
    }

    #[test]
    fn empirical_mean_within_clt_bound() {
        let (a, b) = (-1.0, 3.0);
        let spec = NoiseSpec::new(a, b, 77).unwrap();
        let m = 10_000;
        let mean = (0..m).map(|j| spec.draw(j, STREAM_VOLUME, 5, 2)).sum::<f64>() / m as f64;
        let bound = 3.0 * (b - a) / (12.0 * m as f64).sqrt();
        assert!((mean - 0.5 * (a + b)).abs() <= bound, "{mean}");
    }

    #[test]
    fn alpha_lookups() {
        let m = mesh(2);
        let ones = sample_media(&m, &NoiseSpec::new(1.0, 1.0, 0).unwrap(), 0).unwrap();
        let loc = QuadLocation::Volume { element: 1, q: 2 };
        assert_eq!(ones.alpha_at(0.1, loc).unwrap(), 1.1);
        let rnd = sample_media(&m, &NoiseSpec::default(), 0).unwrap();
        assert_eq!(rnd.alpha_at(0.0, loc).unwrap(), 1.0);
        let bedge = m.boundary_edges[0];
        assert!(rnd.alpha_at(0.1, QuadLocation::Edge { edge: bedge, q: 0 }).is_ok());
        let interior = (0..m.edges.len()).find(|e| m.boundary_ordinal(*e).is_none()).unwrap();
        assert!(matches!(
            rnd.eta(QuadLocation::Edge { edge: interior, q: 0 }),
            Err(Error::UnknownLocation(_))
        ));
        assert!(rnd.eta(QuadLocation::Volume { element: 99, q: 0 }).is_err());
        assert!(rnd.alpha_at(-0.1, loc).is_err());
    }

    #[test]
    fn average_alpha_is_flat() {
        let m = mesh(10);
        let spec = NoiseSpec::default();
        let eps = 0.1;
        let mut total = 0.0;
        let mut count = 0usize;
        for j in 0..1000 {
            let s = sample_media(&m, &spec, j).unwrap();
            total += s.volume.iter().map(|e| 1.0 + eps * e).sum::<f64>();
            count += s.volume.len();
        }
        assert!((total / count as f64 - 1.0).abs() < 0.01);
    }

    #[test]
    fn snapshot_has_row_per_element() {
        let m = mesh(3);
        let csv = media_snapshot_csv(&m, &NoiseSpec::default(), 0..3, 0.1).unwrap();
        assert_eq!(csv.lines().count(), 1 + m.num_elements());
    }

    proptest! {
        #[test]
        fn values_stay_in_interval(a in -5.0f64..5.0, w in 0.0f64..3.0, seed: u64, j in 0usize..1000) {
            let m = mesh(2);
            let s = sample_media(&m, &NoiseSpec::new(a, a + w, seed).unwrap(), j).unwrap();
            prop_assert!(s.volume.iter().chain(&s.boundary).all(|&v| v >= a && v <= a + w));
        }
    }
}
