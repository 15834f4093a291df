use std::time::Instant;

use mcipdg::assembly::{assemble_constant, PenaltySet};
use mcipdg::dg_space::DgSpace;
use mcipdg::linalg::{lu_factorize_with, LuOrdering};
use mcipdg::mesh::build_uniform_mesh;
use mcipdg::quadrature::QuadSpec;
use num_complex::Complex64;

#[test]
fn solve_is_cheap_relative_to_factorization() {
    let mesh = build_uniform_mesh(50, QuadSpec::default()).unwrap();
    let space = DgSpace::new(&mesh, 1).unwrap();
    assert!(space.ndof >= 15_000);
    let a = assemble_constant(&mesh, &space, 5.0, &PenaltySet::default_for(1)).unwrap();
    let ord = LuOrdering::amd(&a.pattern).unwrap();

    let t = Instant::now();
    let f = lu_factorize_with(&a, &ord).unwrap();
    let factor = t.elapsed().as_secs_f64();

    let b: Vec<Complex64> = (0..space.ndof).map(|i| Complex64::new((i as f64).sin(), 1.0)).collect();
    let reps = 10;
    let t = Instant::now();
    for _ in 0..reps {
        std::hint::black_box(f.solve(&b).unwrap());
    }
    let solve = t.elapsed().as_secs_f64() / reps as f64;
    println!("ndof={} nnz(A)={} nnz(LU)={} factor={factor:.3}s solve={solve:.5}s", space.ndof, a.nnz(), f.nnz());
    assert!(solve / factor <= 0.05, "solve/factorize = {}", solve / factor);
}
