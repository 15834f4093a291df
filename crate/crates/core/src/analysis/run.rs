//! End-to-end runs that write a report plus CSV outputs to a directory.
//!
//! Layout: `report.txt`, `fields/*.csv`, `sections/*.csv`, `tables/*.csv`.
//! Tables never contain timings, so repeated runs give identical tables.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::assembly::{assemble_rhs, Assembler};
use crate::classical::{compare_fields, run_classical_on, BaselineResult};
use crate::dg_space::{broken_norms, field_csv, DgFunction};
use crate::error::{Error, Result};
use crate::linalg::lu_factorize;
use crate::multimodes::{run_multimodes_on, Discretization, PhaseTimings, RunOptions, RunResult};
use crate::randomness::{media_snapshot_csv, sample_media, NoiseSpec};
use crate::sources::source_values;

use super::config::{fmt_f, settings_echo, Settings};
use super::export::{cell_f, cell_opt, cross_section_csv, Table};
use super::studies::{
    partial_sum, run_compare, run_epsilon_sweep, run_m_scaling, run_manufactured_convergence, run_modes_sweep,
    StudyKind, SweepRow,
};

/// Points per exported cross-section.
pub const SECTION_POINTS: usize = 201;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    SolveDet,
    RunModes,
    RunClassical,
    Compare,
    Study,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub report: String,
}

struct Writer {
    root: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(root: &Path) -> Result<Self> {
        for sub in ["fields", "sections", "tables"] {
            fs::create_dir_all(root.join(sub))?;
        }
        Ok(Writer {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, rel: &str, text: &str) -> Result<()> {
        let path = self.root.join(rel);
        fs::write(&path, text)?;
        self.files.push(path);
        Ok(())
    }

    fn field(&mut self, disc: &Discretization, name: &str, f: &DgFunction) -> Result<()> {
        self.write(&format!("fields/{name}.csv"), &field_csv(&disc.space, &disc.mesh, f)?)?;
        self.write(
            &format!("sections/{name}.csv"),
            &cross_section_csv(&disc.space, &disc.mesh, f, SECTION_POINTS)?,
        )
    }
}

fn timing_lines(prefix: &str, t: &PhaseTimings) -> String {
    format!(
        "{prefix}time_assembly={}\n{prefix}time_factorization={}\n{prefix}time_solves={}\n{prefix}time_reduction={}\n{prefix}time_total={}\n",
        fmt_f(t.assembly),
        fmt_f(t.factorization),
        fmt_f(t.solves),
        fmt_f(t.reduction),
        fmt_f(t.total)
    )
}

fn modes_report(r: &RunResult) -> String {
    let mut s = format!(
        "factorizations={}\nsolves={}\nsigma_hat={}\n",
        r.counters.factorizations,
        r.counters.solves,
        fmt_f(r.sigma_hat)
    );
    s += &timing_lines("", &r.timings);
    for (n, v) in r.mode_l2.iter().enumerate() {
        s += &format!("mode_l2_{n}={}\n", fmt_f(*v));
    }
    for (n, v) in r.mode_h1.iter().enumerate() {
        s += &format!("mode_h1_{n}={}\n", fmt_f(*v));
    }
    for (i, v) in r.decay.iter().enumerate() {
        s += &format!("decay_{}={}\n", i + 1, fmt_f(*v));
    }
    s
}

fn modes_table(r: &RunResult) -> Table {
    let mut t = Table::new(&["n", "mean_l2", "mean_h1", "decay"]);
    for n in 0..r.mode_l2.len() {
        t.push(vec![
            n.to_string(),
            cell_f(r.mode_l2[n]),
            cell_opt(r.mode_h1.get(n).copied()),
            cell_opt(if n == 0 { None } else { Some(r.decay[n - 1]) }),
        ]);
    }
    t
}

fn fingerprint_table(start: usize, fps: &[u64]) -> Table {
    let mut t = Table::new(&["sample", "media_fingerprint"]);
    for (i, f) in fps.iter().enumerate() {
        t.push(vec![(start + i).to_string(), format!("{f:016x}")]);
    }
    t
}

fn classical_report(b: &BaselineResult) -> String {
    format!("factorizations={}\nsolves={}\n", b.counters.factorizations, b.counters.solves)
        + &timing_lines("", &b.timings)
}

fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut t = Table::new(&["epsilon", "N", "abs_l2", "rel_l2"]);
    for r in rows {
        t.push(vec![cell_f(r.epsilon), r.modes.to_string(), cell_f(r.abs_l2), cell_f(r.rel_l2)]);
    }
    t
}

/// Run `command` with `settings`, writing everything under `out_dir`.
pub fn run_full(command: Command, settings: &Settings, out_dir: &Path) -> Result<RunOutput> {
    let wall = Instant::now();
    let mut w = Writer::new(out_dir)?;
    let cfg = &settings.run;
    let mut report = String::from("# mcipdg run report\n");
    report += &settings_echo(settings);

    match command {
        Command::SolveDet => {
            report += "method=deterministic\n";
            let disc = Discretization::for_config(cfg)?;
            let t = Instant::now();
            let a = Assembler::new(&disc.mesh, &disc.space, cfg.k, &cfg.penalties)?.assemble_constant();
            let media = sample_media(&disc.mesh, &NoiseSpec::new(0.0, 0.0, 0)?, 0)?;
            let s = source_values(&cfg.source, &disc.mesh, &media, 0.0, cfg.k)?;
            let b = assemble_rhs(&disc.mesh, &disc.space, &s, &[])?;
            let t_asm = t.elapsed().as_secs_f64();
            let t = Instant::now();
            let f = lu_factorize(&a)?;
            let t_fac = t.elapsed().as_secs_f64();
            let t = Instant::now();
            let u = DgFunction { coeffs: f.solve(&b)? };
            let t_sol = t.elapsed().as_secs_f64();
            let norms = broken_norms(&disc.space, &disc.mesh, &u, &cfg.penalties)?;
            report += &format!("ndof={}\nnnz_matrix={}\nnnz_factors={}\n", disc.space.ndof, a.nnz(), f.nnz());
            report += &timing_lines(
                "",
                &PhaseTimings {
                    assembly: t_asm,
                    factorization: t_fac,
                    solves: t_sol,
                    reduction: 0.0,
                    total: wall.elapsed().as_secs_f64(),
                },
            );
            let mut t = Table::new(&["ndof", "l2", "seminorm_1h", "norm_1h", "boundary_l2"]);
            t.push(vec![
                disc.space.ndof.to_string(),
                cell_f(norms.l2),
                cell_f(norms.seminorm_1h),
                cell_f(norms.norm_1h),
                cell_f(norms.boundary_l2),
            ]);
            w.write("tables/solution.csv", &t.to_csv())?;
            w.field(&disc, "solution", &u)?;
        }
        Command::RunModes => {
            report += "method=multimodes\n";
            let disc = Discretization::for_config(cfg)?;
            let r = run_multimodes_on(&disc, cfg, RunOptions::default())?;
            report += &format!("ndof={}\n", disc.space.ndof);
            report += &modes_report(&r);
            w.write("tables/modes.csv", &modes_table(&r).to_csv())?;
            w.write(
                "tables/media_fingerprints.csv",
                &fingerprint_table(cfg.sample_offset, &r.media_fingerprints).to_csv(),
            )?;
            w.field(&disc, "psi", &r.psi)?;
            for (n, phi) in r.phi.iter().enumerate() {
                w.field(&disc, &format!("phi_{n}"), phi)?;
            }
            w.field(&disc, "sample_first", &r.first_sample)?;
            w.write(
                "fields/media_mean.csv",
                &media_snapshot_csv(&disc.mesh, &cfg.noise, cfg.sample_indices(), cfg.epsilon)?,
            )?;
        }
        Command::RunClassical => {
            report += "method=classical\n";
            let disc = Discretization::for_config(cfg)?;
            let b = run_classical_on(&disc, cfg)?;
            report += &format!("ndof={}\n", disc.space.ndof);
            report += &classical_report(&b);
            w.write(
                "tables/media_fingerprints.csv",
                &fingerprint_table(cfg.sample_offset, &b.media_fingerprints).to_csv(),
            )?;
            w.field(&disc, "psi", &b.psi)?;
            w.field(&disc, "sample_first", &b.first_sample)?;
        }
        Command::Compare => {
            report += "method=compare\n";
            let disc = Discretization::for_config(cfg)?;
            let options = RunOptions::default();
            let r = run_multimodes_on(&disc, cfg, options)?;
            let b = run_classical_on(&disc, cfg)?;
            if r.media_fingerprints != b.media_fingerprints {
                return Err(Error::InvalidArgument("runs did not share their random media".into()));
            }
            report += &format!("ndof={}\n", disc.space.ndof);
            report += "# multi-modes\n";
            report += &modes_report(&r);
            report += "# classical\n";
            for line in classical_report(&b).lines() {
                report += &format!("classical_{line}\n");
            }
            report += &format!("time_ratio_classical_over_modes={}\n", fmt_f(b.timings.total / r.timings.total));
            let mut rows = Vec::new();
            for n in 1..=cfg.modes {
                let c = compare_fields(&disc.space, &disc.mesh, &partial_sum(&r.phi, cfg.epsilon, n), &b.psi)?;
                rows.push(SweepRow {
                    epsilon: cfg.epsilon,
                    modes: n,
                    abs_l2: c.abs_l2,
                    rel_l2: c.rel_l2,
                });
            }
            w.write("tables/compare.csv", &sweep_table(&rows).to_csv())?;
            w.write("tables/modes.csv", &modes_table(&r).to_csv())?;
            w.field(&disc, "psi_modes", &r.psi)?;
            w.field(&disc, "psi_classical", &b.psi)?;
        }
        Command::Study => {
            let spec = settings
                .study
                .as_ref()
                .ok_or_else(|| Error::Config("the study command needs a `study` key".into()))?;
            report += &format!("method=study\nkind={}\n", spec.kind);
            let table = match spec.kind {
                StudyKind::ManufacturedConvergence => {
                    let st = run_manufactured_convergence(spec)?;
                    for warning in &st.warnings {
                        report += &format!("warning={warning}\n");
                    }
                    let mut t = Table::new(&["n", "h", "l2_error", "h1_error", "rel_l2_error", "l2_rate", "h1_rate"]);
                    for r in &st.rows {
                        t.push(vec![
                            r.n.to_string(),
                            cell_f(r.h),
                            cell_f(r.l2_error),
                            cell_f(r.h1_error),
                            cell_f(r.rel_l2_error),
                            cell_opt(r.l2_rate),
                            cell_opt(r.h1_rate),
                        ]);
                    }
                    t
                }
                StudyKind::MScaling => {
                    let st = run_m_scaling(spec)?;
                    report += &format!("slope={}\n", st.slope.map_or_else(|| "undefined".into(), fmt_f));
                    let mut t = Table::new(&["M", "error"]);
                    for r in &st.rows {
                        t.push(vec![r.m.to_string(), cell_f(r.error)]);
                    }
                    t
                }
                StudyKind::ModesSweep => sweep_table(&run_modes_sweep(spec)?),
                StudyKind::EpsilonSweep => sweep_table(&run_epsilon_sweep(spec)?),
                StudyKind::Compare => sweep_table(&run_compare(spec)?),
            };
            w.write(&format!("tables/{}.csv", spec.kind), &table.to_csv())?;
        }
    }
    report += &format!("wall_seconds={}\n", fmt_f(wall.elapsed().as_secs_f64()));
    w.write("report.txt", &report)?;
    Ok(RunOutput { files: w.files, report })
}

/// Read back a CSV table written by [`run_full`].
pub fn read_table(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Config(format!("{} is empty", path.display())))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for l in lines {
        let row: Vec<String> = l.split(',').map(str::to_string).collect();
        if row.len() != header.len() {
            return Err(Error::Config(format!("{}: ragged row {l:?}", path.display())));
        }
        rows.push(row);
    }
    Ok(Table { header, rows })
}
