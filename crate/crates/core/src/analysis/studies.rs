//! Experiment drivers: manufactured-solution convergence, sampling-error
//! scaling, and multi-modes versus classical comparisons.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::assembly::{assemble_rhs, Assembler, PenaltySet};
use crate::classical::{compare_fields, run_classical_on};
use crate::dg_space::{error_norms, l2_norm, DgFunction};
use crate::error::{Error, Result};
use crate::linalg::lu_factorize;
use crate::multimodes::{run_multimodes_on, Discretization, RunConfig, RunOptions};

type C64 = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StudyKind {
    ManufacturedConvergence,
    MScaling,
    ModesSweep,
    EpsilonSweep,
    Compare,
}

impl fmt::Display for StudyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StudyKind::ManufacturedConvergence => "manufactured_convergence",
            StudyKind::MScaling => "m_scaling",
            StudyKind::ModesSweep => "modes_sweep",
            StudyKind::EpsilonSweep => "epsilon_sweep",
            StudyKind::Compare => "compare",
        })
    }
}

impl FromStr for StudyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "manufactured_convergence" => StudyKind::ManufacturedConvergence,
            "m_scaling" => StudyKind::MScaling,
            "modes_sweep" => StudyKind::ModesSweep,
            "epsilon_sweep" => StudyKind::EpsilonSweep,
            "compare" => StudyKind::Compare,
            other => return Err(Error::Config(format!("unknown study kind {other:?}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudySpec {
    pub kind: StudyKind,
    pub mesh_sizes: Vec<usize>,
    pub m_values: Vec<usize>,
    pub n_values: Vec<usize>,
    pub epsilon_values: Vec<f64>,
    /// Samples in the reference mean of an M-scaling study.
    pub m_ref: usize,
    /// Mode whose sample mean an M-scaling study tracks.
    pub mode: usize,
    /// Plane-wave direction of the manufactured solution.
    pub theta: f64,
    /// Independent estimates averaged per M in an M-scaling study.
    pub replicates: usize,
    pub base: RunConfig,
}

impl StudySpec {
    /// Lists default to the single value in `base`.
    pub fn new(kind: StudyKind, base: RunConfig) -> Self {
        StudySpec {
            kind,
            mesh_sizes: vec![base.n],
            m_values: vec![base.samples],
            n_values: (1..=base.modes).collect(),
            epsilon_values: vec![base.epsilon],
            m_ref: 16 * base.samples,
            mode: 0,
            theta: 0.3,
            replicates: 8,
            base,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        fn ascending<T: PartialOrd + fmt::Debug>(name: &str, xs: &[T]) -> Result<()> {
            if xs.is_empty() {
                return Err(Error::Config(format!("{name} must not be empty")));
            }
            if xs.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::Config(format!("{name} must be strictly ascending, got {xs:?}")));
            }
            Ok(())
        }
        ascending("mesh_sizes", &self.mesh_sizes)?;
        ascending("M_values", &self.m_values)?;
        ascending("N_values", &self.n_values)?;
        ascending("epsilon_values", &self.epsilon_values)?;
        if self.mesh_sizes[0] == 0 || self.m_values[0] == 0 || self.n_values[0] == 0 {
            return Err(Error::Config("mesh sizes, M and N values must be positive".into()));
        }
        if let Some(e) = self.epsilon_values.iter().find(|e| !(0.0..1.0).contains(*e)) {
            return Err(Error::Config(format!("epsilon values must lie in [0, 1), got {e}")));
        }
        if self.kind == StudyKind::MScaling {
            let max_m = *self.m_values.last().unwrap_or(&0);
            if self.m_ref <= max_m {
                return Err(Error::Config(format!("M_ref = {} must exceed the largest M = {max_m}", self.m_ref)));
            }
            if self.replicates == 0 {
                return Err(Error::Config("replicates must be at least 1".into()));
            }
        }
        if !self.theta.is_finite() {
            return Err(Error::Config("theta must be finite".into()));
        }
        Ok(())
    }
}

/// Least-squares slope of log(y) against log(x); `None` if any value is not
/// positive or fewer than two points are given.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || xs.len() != ys.len() || xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    Some(sxy / sxx)
}

/// Σ_{n<N} εⁿ Φ_n.
pub fn partial_sum(phi: &[DgFunction], epsilon: f64, modes: usize) -> DgFunction {
    let mut out = phi[0].clone();
    let mut w = 1.0;
    for p in phi.iter().take(modes).skip(1) {
        w *= epsilon;
        for (o, v) in out.coeffs.iter_mut().zip(&p.coeffs) {
            *o += w * v;
        }
    }
    out
}

/// u*(x) = exp(ik d·x) with d = (cos θ, sin θ), and its gradient.
pub fn plane_wave(k: f64, theta: f64) -> impl Fn([f64; 2]) -> (C64, [C64; 2]) + Sync {
    let d = [theta.cos(), theta.sin()];
    move |x| {
        let u = C64::new(0.0, k * (d[0] * x[0] + d[1] * x[1])).exp();
        let iku = C64::new(0.0, k) * u;
        (u, [iku * d[0], iku * d[1]])
    }
}

/// IP-DG approximation of the plane wave: zero volume source, impedance
/// data ∂_ν u* + ik u* on the boundary.
pub fn solve_manufactured(disc: &Discretization, k: f64, theta: f64, penalties: &PenaltySet) -> Result<DgFunction> {
    let (mesh, space) = (&disc.mesh, &disc.space);
    let exact = plane_wave(k, theta);
    let a = Assembler::new(mesh, space, k, penalties)?.assemble_constant();
    let s = vec![C64::new(0.0, 0.0); space.n_elements * space.num_volume_points()];
    let mut g = Vec::with_capacity(mesh.boundary_edges.len() * mesh.num_edge_points());
    for &e in &mesh.boundary_edges {
        let nu = mesh.edges[e].normal;
        for p in mesh.edge_points(e) {
            let (u, grad) = exact(*p);
            g.push(grad[0] * nu[0] + grad[1] * nu[1] + C64::new(0.0, k) * u);
        }
    }
    let b = assemble_rhs(mesh, space, &s, &g)?;
    Ok(DgFunction {
        coeffs: lu_factorize(&a)?.solve(&b)?,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub l2_error: f64,
    pub h1_error: f64,
    pub rel_l2_error: f64,
    pub l2_rate: Option<f64>,
    pub h1_rate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    /// Meshes outside the resolution condition k³h²/r² ≤ 1.
    pub warnings: Vec<String>,
}

pub fn run_manufactured_convergence(spec: &StudySpec) -> Result<ConvergenceStudy> {
    spec.validate()?;
    let base = &spec.base;
    let exact = plane_wave(base.k, spec.theta);
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    let mut warnings = Vec::new();
    for &n in &spec.mesh_sizes {
        let disc = Discretization::new(n, base.r, base.quad)?;
        let h = 1.0 / n as f64;
        let indicator = base.k.powi(3) * h * h / (base.r * base.r) as f64;
        if indicator > 1.0 {
            warnings.push(format!("n={n}: k^3 h^2 / r^2 = {indicator:.3} exceeds 1 (pre-asymptotic mesh)"));
        }
        let uh = solve_manufactured(&disc, base.k, spec.theta, &base.penalties)?;
        let err = error_norms(&disc.space, &disc.mesh, &uh, &exact, &base.penalties)?;
        let zero = DgFunction::zeros(&disc.space);
        let norm_exact = error_norms(&disc.space, &disc.mesh, &zero, &exact, &base.penalties)?.l2;
        let rate = |prev: f64, cur: f64, hp: f64| (prev / cur).ln() / (hp / h).ln();
        let (l2_rate, h1_rate) = match rows.last() {
            Some(p) => (Some(rate(p.l2_error, err.l2, p.h)), Some(rate(p.h1_error, err.norm_1h, p.h))),
            None => (None, None),
        };
        rows.push(ConvergenceRow {
            n,
            h,
            l2_error: err.l2,
            h1_error: err.norm_1h,
            rel_l2_error: err.l2 / norm_exact,
            l2_rate,
            h1_rate,
        });
    }
    Ok(ConvergenceStudy { rows, warnings })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MScalingRow {
    pub m: usize,
    /// Root mean square over replicates of ‖Φ(M) − Φ(M_ref)‖_{L²}.
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MScalingStudy {
    pub rows: Vec<MScalingRow>,
    pub slope: Option<f64>,
}

/// The reference mean uses samples `offset..offset + M_ref`; every estimate
/// uses its own disjoint block of later sample indices.
pub fn run_m_scaling(spec: &StudySpec) -> Result<MScalingStudy> {
    spec.validate()?;
    let disc = Discretization::for_config(&spec.base)?;
    let options = RunOptions {
        broken_norms: false,
        ..Default::default()
    };
    let cfg = |samples: usize, offset: usize| RunConfig {
        modes: spec.mode + 1,
        samples,
        sample_offset: offset,
        ..spec.base.clone()
    };
    let start = spec.base.sample_offset;
    let reference = run_multimodes_on(&disc, &cfg(spec.m_ref, start), options)?;
    let reference = &reference.phi[spec.mode];

    let block: usize = spec.m_values.iter().sum();
    let mut rows = Vec::new();
    let mut before = 0;
    for &m in &spec.m_values {
        let mut sq = 0.0;
        for rep in 0..spec.replicates {
            let offset = start + spec.m_ref + rep * block + before;
            let est = run_multimodes_on(&disc, &cfg(m, offset), options)?;
            let d = l2_norm(&disc.space, &disc.mesh, &est.phi[spec.mode].sub(reference)?)?;
            sq += d * d;
        }
        before += m;
        rows.push(MScalingRow {
            m,
            error: (sq / spec.replicates as f64).sqrt(),
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.m as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.error).collect();
    Ok(MScalingStudy {
        slope: log_log_slope(&xs, &ys),
        rows,
    })
}

/// Distance between a multi-modes mean and the classical mean.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    pub modes: usize,
    pub abs_l2: f64,
    pub rel_l2: f64,
}

/// One classical run and one multi-modes run (with the largest N) per ε;
/// rows for every `(ε, N)` pair.
pub fn sweep(disc: &Discretization, base: &RunConfig, epsilons: &[f64], modes: &[usize]) -> Result<Vec<SweepRow>> {
    let max_n = *modes
        .iter()
        .max()
        .ok_or_else(|| Error::InvalidArgument("no mode counts given".into()))?;
    let mut rows = Vec::new();
    for &eps in epsilons {
        let cfg = RunConfig {
            epsilon: eps,
            modes: max_n,
            ..base.clone()
        };
        let classical = run_classical_on(disc, &cfg)?;
        let mm = run_multimodes_on(
            disc,
            &cfg,
            RunOptions {
                broken_norms: false,
                ..Default::default()
            },
        )?;
        for &n in modes {
            let psi = partial_sum(&mm.phi, eps, n);
            let c = compare_fields(&disc.space, &disc.mesh, &psi, &classical.psi)?;
            rows.push(SweepRow {
                epsilon: eps,
                modes: n,
                abs_l2: c.abs_l2,
                rel_l2: c.rel_l2,
            });
        }
    }
    Ok(rows)
}

/// ‖Ψ_N − Ψ̃‖ for every N in the list, at the base ε.
pub fn run_modes_sweep(spec: &StudySpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let disc = Discretization::for_config(&spec.base)?;
    sweep(&disc, &spec.base, &[spec.base.epsilon], &spec.n_values)
}

/// Every (ε, N) pair of the lists.
pub fn run_epsilon_sweep(spec: &StudySpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let disc = Discretization::for_config(&spec.base)?;
    sweep(&disc, &spec.base, &spec.epsilon_values, &spec.n_values)
}

/// One row per ε at the base N.
pub fn run_compare(spec: &StudySpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let disc = Discretization::for_config(&spec.base)?;
    sweep(&disc, &spec.base, &spec.epsilon_values, &[spec.base.modes])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::QuadSpec;
    use crate::randomness::NoiseSpec;
    use crate::sources::SourceSpec;

    #[test]
    fn slope_of_power_law() {
        let xs = [25.0, 100.0, 400.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.5)).collect();
        assert!((log_log_slope(&xs, &ys).unwrap() + 0.5).abs() < 1e-12);
        assert!(log_log_slope(&xs, &[0.0, 1.0, 1.0]).is_none());
    }

    #[test]
    fn exact_interpolant_has_tiny_error_against_itself() {
        let disc = Discretization::new(6, 1, QuadSpec::default()).unwrap();
        let f = |x: [f64; 2]| (C64::new(x[0] - x[1], 2.0 * x[0]), [C64::new(1.0, 2.0), C64::new(-1.0, 0.0)]);
        let uh = DgFunction::interpolate(&disc.space, |x| f(x).0);
        let e = error_norms(&disc.space, &disc.mesh, &uh, &f, &PenaltySet::default_for(1)).unwrap();
        assert!(e.l2 < 1e-14 && e.norm_1h < 1e-12);
    }

    #[test]
    fn error_ratio_between_20_and_40() {
        let base = RunConfig { k: 5.0, ..Default::default() };
        let spec = StudySpec {
            mesh_sizes: vec![20, 40],
            ..StudySpec::new(StudyKind::ManufacturedConvergence, base)
        };
        let st = run_manufactured_convergence(&spec).unwrap();
        let ratio = st.rows[0].rel_l2_error / st.rows[1].rel_l2_error;
        assert!((3.0..=5.3).contains(&ratio), "{ratio}");
        assert!(st.warnings.is_empty());
    }

    #[test]
    fn coarse_mesh_warns() {
        let base = RunConfig { k: 5.0, ..Default::default() };
        let spec = StudySpec {
            mesh_sizes: vec![4],
            ..StudySpec::new(StudyKind::ManufacturedConvergence, base)
        };
        assert_eq!(run_manufactured_convergence(&spec).unwrap().warnings.len(), 1);
    }

    #[test]
    fn deterministic_problem_has_no_sampling_error() {
        let base = RunConfig {
            k: 2.0,
            n: 4,
            noise: NoiseSpec::new(0.0, 0.0, 1).unwrap(),
            ..Default::default()
        };
        let spec = StudySpec {
            m_values: vec![2, 4],
            m_ref: 8,
            replicates: 2,
            ..StudySpec::new(StudyKind::MScaling, base)
        };
        let st = run_m_scaling(&spec).unwrap();
        assert!(st.rows.iter().all(|r| r.error < 1e-14));
    }

    #[test]
    fn mode_one_sampling_error_is_epsilon_free() {
        let run = |eps| {
            let base = RunConfig {
                k: 3.0,
                n: 4,
                epsilon: eps,
                source: SourceSpec::Constant(1.0),
                ..Default::default()
            };
            let spec = StudySpec {
                m_values: vec![4, 16],
                m_ref: 64,
                mode: 1,
                replicates: 2,
                ..StudySpec::new(StudyKind::MScaling, base)
            };
            run_m_scaling(&spec).unwrap()
        };
        let a = run(0.02);
        let b = run(0.1);
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert!(x.error > 0.0);
            let ratio = x.error / y.error;
            assert!((0.5..=2.0).contains(&ratio), "{ratio}");
        }
    }

    #[test]
    fn study_validation() {
        let base = RunConfig::default();
        let mut s = StudySpec::new(StudyKind::MScaling, base.clone());
        s.m_values = vec![10, 20];
        s.m_ref = 20;
        assert!(s.validate().is_err());
        let mut s = StudySpec::new(StudyKind::Compare, base);
        s.epsilon_values = vec![0.5, 0.1];
        assert!(s.validate().is_err());
        s.epsilon_values = vec![];
        assert!(s.validate().is_err());
    }
}
