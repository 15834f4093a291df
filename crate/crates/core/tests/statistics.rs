use mcipdg::analysis::{log_log_slope, run_m_scaling, StudyKind, StudySpec};
use mcipdg::dg_space::l2_norm;
use mcipdg::multimodes::{run_multimodes_on, sample_average, Discretization, ModeSolver, RunConfig, RunOptions};
use mcipdg::randomness::NoiseSpec;
use mcipdg::sources::SourceSpec;

fn radial(n: usize, k: f64, epsilon: f64) -> RunConfig {
    RunConfig {
        k,
        epsilon,
        n,
        modes: 2,
        source: SourceSpec::RadialWave,
        ..RunConfig::default()
    }
}

/// The spread of independent M-sample means shrinks like 1/M.
#[test]
fn sample_mean_variance_scales_inversely_with_m() {
    let config = radial(6, 3.0, 0.3);
    let disc = Discretization::for_config(&config).unwrap();
    let solver = ModeSolver::new(&disc, &config, RunOptions::default()).unwrap();
    let pool: Vec<_> = (0..1920).map(|j| solver.solve_sample(j).unwrap().modes[0].clone()).collect();
    let truth = sample_average(&pool).unwrap();
    let ms = [5usize, 20, 80];
    let mut variances = Vec::new();
    for &m in &ms {
        let blocks = pool.len() / m;
        let mut v = 0.0;
        for b in 0..blocks {
            let mean = sample_average(&pool[b * m..(b + 1) * m]).unwrap();
            v += l2_norm(&disc.space, &disc.mesh, &mean.sub(&truth).unwrap()).unwrap().powi(2);
        }
        variances.push(v / blocks as f64);
    }
    let xs: Vec<f64> = ms.iter().map(|&m| m as f64).collect();
    let slope = log_log_slope(&xs, &variances).unwrap();
    println!("variance slope {slope}");
    assert!((slope + 1.0).abs() <= 0.2, "{slope}");
}

#[test]
fn m_scaling_without_randomness_is_flat_zero() {
    let mut base = radial(6, 3.0, 0.2);
    base.noise = NoiseSpec::new(0.0, 0.0, 1).unwrap();
    let mut spec = StudySpec::new(StudyKind::MScaling, base);
    spec.m_values = vec![2, 4, 8];
    spec.m_ref = 32;
    let study = run_m_scaling(&spec).unwrap();
    assert!(study.rows.iter().all(|r| r.error <= 1e-12), "{:?}", study.rows);
}

#[test]
fn mode_one_error_does_not_depend_on_epsilon() {
    let mut errors = Vec::new();
    for eps in [0.02, 0.1] {
        let mut spec = StudySpec::new(StudyKind::MScaling, radial(6, 3.0, eps));
        spec.m_values = vec![4, 16];
        spec.m_ref = 128;
        spec.mode = 1;
        errors.push(run_m_scaling(&spec).unwrap().rows);
    }
    for (a, b) in errors[0].iter().zip(&errors[1]) {
        let ratio = a.error / b.error;
        assert!((0.5..=2.0).contains(&ratio), "{ratio}");
    }
}

#[test]
fn same_media_any_offset_split() {
    // Samples 0..6 computed at once match the union of 0..3 and 3..6.
    let config = RunConfig { samples: 6, ..radial(4, 2.0, 0.2) };
    let disc = Discretization::for_config(&config).unwrap();
    let all = run_multimodes_on(&disc, &config, RunOptions::default()).unwrap();
    let mut halves = Vec::new();
    for offset in [0, 3] {
        let c = RunConfig { samples: 3, sample_offset: offset, ..config.clone() };
        halves.push(run_multimodes_on(&disc, &c, RunOptions::default()).unwrap());
    }
    let joined: Vec<u64> = halves.iter().flat_map(|h| h.media_fingerprints.clone()).collect();
    assert_eq!(all.media_fingerprints, joined);
    let avg = halves[0].psi.scaled(0.5.into()).add(&halves[1].psi.scaled(0.5.into())).unwrap();
    let diff = l2_norm(&disc.space, &disc.mesh, &avg.sub(&all.psi).unwrap()).unwrap();
    assert!(diff <= 1e-12 * l2_norm(&disc.space, &disc.mesh, &all.psi).unwrap());
}
