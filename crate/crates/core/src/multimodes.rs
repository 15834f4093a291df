//! Multi-modes Monte Carlo: one factorization of the constant-coefficient
//! operator, then per sample a short recursion of mode solves.
//!
//! Samples run in fixed-size chunks; within a chunk they are solved in
//! parallel, and results are reduced in sample-index order, so the output
//! does not depend on the thread count.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::assembly::{assemble_rhs, Assembler, PenaltySet, SystemMatrix};
use crate::dg_space::{broken_norms, l2_norm, DgFunction, DgSpace};
use crate::error::{check_len, Error, Result};
use crate::linalg::{lu_factorize, LuFactors};
use crate::mesh::{build_uniform_mesh, TriMesh};
use crate::quadrature::QuadSpec;
use crate::randomness::{sample_media, MediaSample, NoiseSpec};
use crate::sources::{source_values, SourceSpec};

type C64 = Complex64;

/// Samples per parallel batch. Fixed so reductions never depend on threads.
pub const SAMPLE_CHUNK: usize = 32;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub k: f64,
    pub epsilon: f64,
    /// Number of modes N.
    pub modes: usize,
    /// Number of samples M.
    pub samples: usize,
    /// Mesh subdivisions per side.
    pub n: usize,
    /// Polynomial degree.
    pub r: usize,
    pub penalties: PenaltySet,
    pub noise: NoiseSpec,
    pub source: SourceSpec,
    /// Stability-constant guess used only for the σ̂ diagnostic.
    pub c0_hint: f64,
    /// Index of the first sample; samples are `offset..offset + M`.
    pub sample_offset: usize,
    pub quad: QuadSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            k: 5.0,
            epsilon: 1.0 / 6.0,
            modes: 3,
            samples: 10,
            n: 10,
            r: 1,
            penalties: PenaltySet::default_for(1),
            noise: NoiseSpec::default(),
            source: SourceSpec::default(),
            c0_hint: 1.0,
            sample_offset: 0,
            quad: QuadSpec::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.k > 0.0 && self.k.is_finite()) {
            return bad(format!("k must be positive, got {}", self.k));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return bad(format!("epsilon must lie in [0, 1), got {}", self.epsilon));
        }
        if self.modes == 0 || self.samples == 0 || self.n == 0 || self.r == 0 {
            return bad("N, M, n and r must all be at least 1".into());
        }
        if !(self.c0_hint > 0.0 && self.c0_hint.is_finite()) {
            return bad(format!("C0_hint must be positive, got {}", self.c0_hint));
        }
        self.penalties.validate_for(self.r)?;
        self.noise.validate()?;
        self.source.validate()?;
        self.quad.validate()
    }

    /// 4ε√C₀(1 + k).
    pub fn sigma_hat(&self) -> f64 {
        4.0 * self.epsilon * self.c0_hint.sqrt() * (1.0 + self.k)
    }

    pub fn sample_indices(&self) -> std::ops::Range<usize> {
        self.sample_offset..self.sample_offset + self.samples
    }
}

/// Mesh plus DG space for one `(n, r, quadrature)` choice.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub mesh: TriMesh,
    pub space: DgSpace,
}

impl Discretization {
    pub fn new(n: usize, r: usize, quad: QuadSpec) -> Result<Self> {
        let mesh = build_uniform_mesh(n, quad)?;
        let space = DgSpace::new(&mesh, r)?;
        Ok(Discretization { mesh, space })
    }

    pub fn for_config(config: &RunConfig) -> Result<Self> {
        Self::new(config.n, config.r, config.quad)
    }

    pub(crate) fn check_config(&self, config: &RunConfig) -> Result<()> {
        if self.mesh.n != config.n || self.space.r != config.r || self.mesh.quad != config.quad {
            return Err(Error::InvalidArgument(
                "discretization does not match the run configuration".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FactorPolicy {
    /// Factorize once and reuse the factors for every solve.
    #[default]
    Reuse,
    /// Factorize again before every solve (reference variant for checks).
    RefactorEachSolve,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub factor_policy: FactorPolicy,
    /// Compute per-mode broken norms (L² norms are always computed).
    pub broken_norms: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            factor_policy: FactorPolicy::Reuse,
            broken_norms: true,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub factorizations: usize,
    pub solves: usize,
}

/// Seconds per phase. Per-sample phases are summed over workers, so they
/// are CPU seconds when running in parallel; `total` is wall-clock.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseTimings {
    pub assembly: f64,
    pub factorization: f64,
    pub solves: f64,
    pub reduction: f64,
    pub total: f64,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub config: RunConfig,
    /// Ψ_N = Σ_n εⁿ Φ_n.
    pub psi: DgFunction,
    /// Sample means Φ_n, n = 0..N−1.
    pub phi: Vec<DgFunction>,
    /// U_N of the first sample.
    pub first_sample: DgFunction,
    /// Sample mean of ‖u_n‖_{L²}.
    pub mode_l2: Vec<f64>,
    /// Sample mean of ‖u_n‖_{1,h}; empty when broken norms are disabled.
    pub mode_h1: Vec<f64>,
    /// ρ_n = ε · mode_l2[n] / mode_l2[n−1] for n ≥ 1.
    pub decay: Vec<f64>,
    pub sigma_hat: f64,
    pub counters: Counters,
    pub timings: PhaseTimings,
    /// Fingerprint of each sample's medium, in sample order.
    pub media_fingerprints: Vec<u64>,
}

impl RunResult {
    /// Ψ_N rebuilt from the stored mode means.
    pub fn reconstruct_psi(&self) -> DgFunction {
        let mut out = DgFunction {
            coeffs: vec![C64::new(0.0, 0.0); self.psi.len()],
        };
        let mut w = 1.0;
        for phi in &self.phi {
            for (o, p) in out.coeffs.iter_mut().zip(&phi.coeffs) {
                *o += w * p;
            }
            w *= self.config.epsilon;
        }
        out
    }
}

/// `(S_{n+1}, Q_{n+1})` from the current and previous modes:
/// `S = 2k²η u_n + k²η² u_prev` at volume points and `Q = −ikη u_n` at
/// boundary points.
pub fn mode_rhs_update(
    mesh: &TriMesh,
    space: &DgSpace,
    u_n: &DgFunction,
    u_prev: &DgFunction,
    media: &MediaSample,
    k: f64,
) -> Result<(Vec<C64>, Vec<C64>)> {
    space.check_function(u_n)?;
    space.check_function(u_prev)?;
    let un = space.values_at_volume_points(u_n);
    let up = space.values_at_volume_points(u_prev);
    check_len("media volume layout", un.len(), media.volume.len())?;
    let k2 = k * k;
    let s = un
        .iter()
        .zip(&up)
        .zip(&media.volume)
        .map(|((a, b), &eta)| a * (2.0 * k2 * eta) + b * (k2 * eta * eta))
        .collect();
    let ub = space.values_at_boundary_points(mesh, u_n);
    check_len("media boundary layout", ub.len(), media.boundary.len())?;
    let q = ub
        .iter()
        .zip(&media.boundary)
        .map(|(a, &eta)| a * C64::new(0.0, -k * eta))
        .collect();
    Ok((s, q))
}

/// Coefficientwise mean.
pub fn sample_average(samples: &[DgFunction]) -> Result<DgFunction> {
    let first = samples
        .first()
        .ok_or_else(|| Error::InvalidArgument("cannot average an empty list of samples".into()))?;
    let mut acc = vec![C64::new(0.0, 0.0); first.len()];
    for s in samples {
        check_len("sample coefficient vector", acc.len(), s.len())?;
        for (a, v) in acc.iter_mut().zip(&s.coeffs) {
            *a += v;
        }
    }
    let m = samples.len() as f64;
    Ok(DgFunction {
        coeffs: acc.into_iter().map(|a| a / m).collect(),
    })
}

/// Modes of one sample.
#[derive(Clone, Debug)]
pub struct SampleModes {
    pub sample: usize,
    pub modes: Vec<DgFunction>,
    pub l2: Vec<f64>,
    pub h1: Vec<f64>,
    pub media_fingerprint: u64,
    assembly_secs: f64,
    solve_secs: f64,
}

/// Shared state of a multi-modes run: the constant operator and its factors.
pub struct ModeSolver<'a> {
    disc: &'a Discretization,
    config: RunConfig,
    options: RunOptions,
    matrix: SystemMatrix,
    factors: LuFactors,
    factorizations: AtomicUsize,
    solves: AtomicUsize,
    setup_assembly_secs: f64,
    setup_factor_secs: f64,
}

impl<'a> ModeSolver<'a> {
    pub fn new(disc: &'a Discretization, config: &RunConfig, options: RunOptions) -> Result<Self> {
        config.validate()?;
        disc.check_config(config)?;
        let t = Instant::now();
        let matrix = Assembler::new(&disc.mesh, &disc.space, config.k, &config.penalties)?.assemble_constant();
        let setup_assembly_secs = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let factors = lu_factorize(&matrix)?;
        let setup_factor_secs = t.elapsed().as_secs_f64();
        Ok(ModeSolver {
            disc,
            config: config.clone(),
            options,
            matrix,
            factors,
            factorizations: AtomicUsize::new(1),
            solves: AtomicUsize::new(0),
            setup_assembly_secs,
            setup_factor_secs,
        })
    }

    pub fn counters(&self) -> Counters {
        Counters {
            factorizations: self.factorizations.load(Ordering::Relaxed),
            solves: self.solves.load(Ordering::Relaxed),
        }
    }

    pub fn matrix(&self) -> &SystemMatrix {
        &self.matrix
    }

    fn solve(&self, b: &mut [C64], work: &mut Vec<C64>) -> Result<()> {
        self.solves.fetch_add(1, Ordering::Relaxed);
        match self.options.factor_policy {
            FactorPolicy::Reuse => self.factors.solve_in_place(b, work),
            FactorPolicy::RefactorEachSolve => {
                self.factorizations.fetch_add(1, Ordering::Relaxed);
                lu_factorize(&self.matrix)?.solve_in_place(b, work)
            }
        }
    }

    /// All N modes of sample `j`.
    pub fn solve_sample(&self, j: usize) -> Result<SampleModes> {
        let (mesh, space) = (&self.disc.mesh, &self.disc.space);
        let cfg = &self.config;
        let mut assembly_secs = 0.0;
        let mut solve_secs = 0.0;

        let t = Instant::now();
        let media = sample_media(mesh, &cfg.noise, j)?;
        let mut s = source_values(&cfg.source, mesh, &media, cfg.epsilon, cfg.k)?;
        let mut q: Vec<C64> = Vec::new();
        assembly_secs += t.elapsed().as_secs_f64();

        let zero = DgFunction::zeros(space);
        let mut modes = Vec::with_capacity(cfg.modes);
        let mut l2 = Vec::with_capacity(cfg.modes);
        let mut h1 = Vec::with_capacity(cfg.modes);
        let mut work = Vec::new();
        for n in 0..cfg.modes {
            let t = Instant::now();
            let mut b = assemble_rhs(mesh, space, &s, &q)?;
            assembly_secs += t.elapsed().as_secs_f64();

            let t = Instant::now();
            self.solve(&mut b, &mut work)?;
            solve_secs += t.elapsed().as_secs_f64();
            let u = DgFunction { coeffs: b };
            if !u.is_finite() {
                return Err(Error::NonFinite { sample: j, mode: n });
            }
            l2.push(l2_norm(space, mesh, &u)?);
            if self.options.broken_norms {
                h1.push(broken_norms(space, mesh, &u, &cfg.penalties)?.norm_1h);
            }
            if n + 1 < cfg.modes {
                let t = Instant::now();
                let prev = if n == 0 { &zero } else { &modes[n - 1] };
                (s, q) = mode_rhs_update(mesh, space, &u, prev, &media, cfg.k)?;
                assembly_secs += t.elapsed().as_secs_f64();
            }
            modes.push(u);
        }
        Ok(SampleModes {
            sample: j,
            modes,
            l2,
            h1,
            media_fingerprint: media.fingerprint(),
            assembly_secs,
            solve_secs,
        })
    }
}

pub fn run_multimodes(config: &RunConfig) -> Result<RunResult> {
    let disc = Discretization::for_config(config)?;
    run_multimodes_on(&disc, config, RunOptions::default())
}

pub fn run_multimodes_on(disc: &Discretization, config: &RunConfig, options: RunOptions) -> Result<RunResult> {
    let wall = Instant::now();
    let solver = ModeSolver::new(disc, config, options)?;
    let ndof = disc.space.ndof;
    let nmodes = config.modes;
    let zero = C64::new(0.0, 0.0);

    let mut phi_sum = vec![vec![zero; ndof]; nmodes];
    let mut psi_sum = vec![zero; ndof];
    let mut l2_sum = vec![0.0; nmodes];
    let mut h1_sum = vec![0.0; nmodes];
    let mut first_sample = None;
    let mut fingerprints = Vec::with_capacity(config.samples);
    let mut timings = PhaseTimings {
        assembly: solver.setup_assembly_secs,
        factorization: solver.setup_factor_secs,
        ..Default::default()
    };

    let indices: Vec<usize> = config.sample_indices().collect();
    for chunk in indices.chunks(SAMPLE_CHUNK) {
        let results: Vec<Result<SampleModes>> = chunk.par_iter().map(|&j| solver.solve_sample(j)).collect();
        let t = Instant::now();
        for res in results {
            let sm = res?;
            timings.assembly += sm.assembly_secs;
            timings.solves += sm.solve_secs;
            let mut w = 1.0;
            let mut u_total = if first_sample.is_none() { Some(vec![zero; ndof]) } else { None };
            for (n, u) in sm.modes.iter().enumerate() {
                for ((p, s), v) in phi_sum[n].iter_mut().zip(psi_sum.iter_mut()).zip(&u.coeffs) {
                    *p += v;
                    *s += w * v;
                }
                if let Some(tot) = u_total.as_mut() {
                    for (t, v) in tot.iter_mut().zip(&u.coeffs) {
                        *t += w * v;
                    }
                }
                l2_sum[n] += sm.l2[n];
                if let Some(h) = sm.h1.get(n) {
                    h1_sum[n] += h;
                }
                w *= config.epsilon;
            }
            if let Some(tot) = u_total {
                first_sample = Some(DgFunction { coeffs: tot });
            }
            fingerprints.push(sm.media_fingerprint);
        }
        timings.reduction += t.elapsed().as_secs_f64();
    }

    let m = config.samples as f64;
    let phi: Vec<DgFunction> = phi_sum
        .into_iter()
        .map(|c| DgFunction {
            coeffs: c.into_iter().map(|v| v / m).collect(),
        })
        .collect();
    let psi = DgFunction {
        coeffs: psi_sum.into_iter().map(|v| v / m).collect(),
    };
    let mode_l2: Vec<f64> = l2_sum.iter().map(|s| s / m).collect();
    let mode_h1 = if options.broken_norms {
        h1_sum.iter().map(|s| s / m).collect()
    } else {
        Vec::new()
    };
    let decay = (1..nmodes)
        .map(|n| config.epsilon * mode_l2[n] / mode_l2[n - 1])
        .collect();
    timings.total = wall.elapsed().as_secs_f64();

    Ok(RunResult {
        config: config.clone(),
        psi,
        phi,
        first_sample: first_sample.expect("at least one sample"),
        mode_l2,
        mode_h1,
        decay,
        sigma_hat: config.sigma_hat(),
        counters: solver.counters(),
        timings,
        media_fingerprints: fingerprints,
    })
}
