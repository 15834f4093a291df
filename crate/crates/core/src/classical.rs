//! Classical Monte Carlo baseline: assemble and factorize the sampled
//! variable-coefficient operator for every sample.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::assembly::{assemble_rhs, Assembler};
use crate::dg_space::{l2_norm, DgFunction, DgSpace};
use crate::error::{Error, Result};
use crate::linalg::{lu_factorize_with, LuOrdering};
use crate::mesh::TriMesh;
use crate::multimodes::{Counters, Discretization, PhaseTimings, RunConfig, SAMPLE_CHUNK};
use crate::randomness::sample_media;
use crate::sources::source_values;

type C64 = Complex64;

#[derive(Clone, Debug)]
pub struct BaselineResult {
    pub config: RunConfig,
    /// Sample mean of the per-sample solutions.
    pub psi: DgFunction,
    pub first_sample: DgFunction,
    /// Wall-clock seconds spent on each sample, in sample order.
    pub sample_seconds: Vec<f64>,
    pub counters: Counters,
    pub timings: PhaseTimings,
    pub media_fingerprints: Vec<u64>,
}

struct SampleSolution {
    u: DgFunction,
    fingerprint: u64,
    assembly: f64,
    factorization: f64,
    solve: f64,
}

pub fn run_classical(config: &RunConfig) -> Result<BaselineResult> {
    let disc = Discretization::for_config(config)?;
    run_classical_on(&disc, config)
}

/// The mode count of `config` is ignored.
pub fn run_classical_on(disc: &Discretization, config: &RunConfig) -> Result<BaselineResult> {
    let wall = Instant::now();
    config.validate()?;
    disc.check_config(config)?;
    let (mesh, space) = (&disc.mesh, &disc.space);

    let t = Instant::now();
    let assembler = Assembler::new(mesh, space, config.k, &config.penalties)?;
    let mut timings = PhaseTimings {
        assembly: t.elapsed().as_secs_f64(),
        ..Default::default()
    };
    let t = Instant::now();
    let ordering = LuOrdering::amd(assembler.pattern())?;
    timings.factorization += t.elapsed().as_secs_f64();

    let solve_one = |j: usize| -> Result<SampleSolution> {
        let t = Instant::now();
        let media = sample_media(mesh, &config.noise, j)?;
        let a = assembler.assemble_variable(&media, config.epsilon)?;
        let s = source_values(&config.source, mesh, &media, config.epsilon, config.k)?;
        let b = assemble_rhs(mesh, space, &s, &[])?;
        let assembly = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let f = lu_factorize_with(&a, &ordering)?;
        let factorization = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let x = f.solve(&b)?;
        let solve = t.elapsed().as_secs_f64();
        let u = DgFunction { coeffs: x };
        if !u.is_finite() {
            return Err(Error::NonFinite { sample: j, mode: 0 });
        }
        Ok(SampleSolution {
            u,
            fingerprint: media.fingerprint(),
            assembly,
            factorization,
            solve,
        })
    };

    let zero = C64::new(0.0, 0.0);
    let mut sum = vec![zero; space.ndof];
    let mut first = None;
    let mut sample_seconds = Vec::with_capacity(config.samples);
    let mut fingerprints = Vec::with_capacity(config.samples);
    let mut counters = Counters::default();
    let indices: Vec<usize> = config.sample_indices().collect();
    for chunk in indices.chunks(SAMPLE_CHUNK) {
        let results: Vec<Result<SampleSolution>> = chunk.par_iter().map(|&j| solve_one(j)).collect();
        let t = Instant::now();
        for res in results {
            let s = res?;
            counters.factorizations += 1;
            counters.solves += 1;
            timings.assembly += s.assembly;
            timings.factorization += s.factorization;
            timings.solves += s.solve;
            sample_seconds.push(s.assembly + s.factorization + s.solve);
            fingerprints.push(s.fingerprint);
            for (a, v) in sum.iter_mut().zip(&s.u.coeffs) {
                *a += v;
            }
            if first.is_none() {
                first = Some(s.u);
            }
        }
        timings.reduction += t.elapsed().as_secs_f64();
    }
    let m = config.samples as f64;
    timings.total = wall.elapsed().as_secs_f64();
    Ok(BaselineResult {
        config: config.clone(),
        psi: DgFunction {
            coeffs: sum.into_iter().map(|v| v / m).collect(),
        },
        first_sample: first.expect("at least one sample"),
        sample_seconds,
        counters,
        timings,
        media_fingerprints: fingerprints,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldComparison {
    pub abs_l2: f64,
    pub rel_l2: f64,
}

/// ‖a − b‖_{L²} and its ratio to ‖b‖_{L²}; `b` is the reference. The ratio
/// is infinite when b = 0 ≠ a, and zero when both vanish.
pub fn compare_fields(space: &DgSpace, mesh: &TriMesh, a: &DgFunction, b: &DgFunction) -> Result<FieldComparison> {
    let abs_l2 = l2_norm(space, mesh, &a.sub(b)?)?;
    let nb = l2_norm(space, mesh, b)?;
    let rel_l2 = if nb > 0.0 {
        abs_l2 / nb
    } else if abs_l2 > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    Ok(FieldComparison { abs_l2, rel_l2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multimodes::{run_multimodes_on, RunOptions};
    use crate::sources::SourceSpec;

    fn cfg() -> RunConfig {
        RunConfig {
            k: 3.0,
            epsilon: 0.1,
            modes: 3,
            samples: 4,
            n: 4,
            source: SourceSpec::RadialWave,
            ..Default::default()
        }
    }

    #[test]
    fn zero_epsilon_is_independent_of_m() {
        let c1 = RunConfig { epsilon: 0.0, samples: 1, ..cfg() };
        let c3 = RunConfig { epsilon: 0.0, samples: 3, ..cfg() };
        let disc = Discretization::for_config(&c1).unwrap();
        let a = run_classical_on(&disc, &c1).unwrap();
        let b = run_classical_on(&disc, &c3).unwrap();
        let cmp = compare_fields(&disc.space, &disc.mesh, &b.psi, &a.psi).unwrap();
        assert!(cmp.rel_l2 < 1e-14);
    }

    #[test]
    fn single_sample_mean_is_that_sample() {
        let c = RunConfig { samples: 1, ..cfg() };
        let r = run_classical(&c).unwrap();
        assert_eq!(r.psi, r.first_sample);
        assert_eq!(r.counters, Counters { factorizations: 1, solves: 1 });
    }

    #[test]
    fn common_random_numbers_and_agreement() {
        let c = cfg();
        let disc = Discretization::for_config(&c).unwrap();
        let base = run_classical_on(&disc, &c).unwrap();
        let modes = run_multimodes_on(&disc, &c, RunOptions::default()).unwrap();
        assert_eq!(base.media_fingerprints, modes.media_fingerprints);
        assert_eq!(base.counters.factorizations, c.samples);
        let cmp = compare_fields(&disc.space, &disc.mesh, &modes.psi, &base.psi).unwrap();
        assert!(cmp.rel_l2 < 1e-2, "{cmp:?}");
    }

    #[test]
    fn comparison_identities() {
        let c = cfg();
        let disc = Discretization::for_config(&c).unwrap();
        let b = DgFunction::interpolate(&disc.space, |x| C64::new(1.0 + x[0], x[1]));
        let same = compare_fields(&disc.space, &disc.mesh, &b, &b).unwrap();
        assert_eq!(same, FieldComparison { abs_l2: 0.0, rel_l2: 0.0 });
        let a = b.scaled(C64::new(1.01, 0.0));
        let cmp = compare_fields(&disc.space, &disc.mesh, &a, &b).unwrap();
        assert!((cmp.rel_l2 - 0.01).abs() < 1e-12);
        let zero = DgFunction::zeros(&disc.space);
        assert_eq!(compare_fields(&disc.space, &disc.mesh, &b, &zero).unwrap().rel_l2, f64::INFINITY);
        assert_eq!(compare_fields(&disc.space, &disc.mesh, &zero, &zero).unwrap().rel_l2, 0.0);
    }
}
