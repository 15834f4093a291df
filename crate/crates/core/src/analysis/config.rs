//! Flat `key = value` configuration files.
//!
//! `#` starts a comment. Numbers may be written as simple fractions such as
//! `1/6`. Lists are comma-separated.

use std::collections::BTreeMap;

use crate::assembly::PenaltySet;
use crate::error::{Error, Result};
use crate::multimodes::RunConfig;
use crate::quadrature::QuadSpec;
use crate::randomness::NoiseSpec;
use crate::sources::SourceSpec;

use super::studies::{StudyKind, StudySpec};

/// A parsed configuration: the run parameters and, if a `study` key is
/// present, the study to run.
#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub run: RunConfig,
    pub study: Option<StudySpec>,
}

const RUN_KEYS: &[&str] = &[
    "k",
    "epsilon",
    "N",
    "M",
    "n",
    "r",
    "beta1",
    "seed",
    "eta_min",
    "eta_max",
    "source",
    "C0_hint",
    "sample_offset",
    "quad_triangle",
    "quad_edge",
];

const STUDY_KEYS: &[&str] = &[
    "study",
    "mesh_sizes",
    "M_values",
    "N_values",
    "epsilon_values",
    "M_ref",
    "mode",
    "theta",
    "replicates",
];

fn is_gamma_key(key: &str) -> Option<usize> {
    key.strip_prefix("gamma").and_then(|j| j.parse().ok())
}

pub fn parse_f64(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::Config(format!("not a number: {s:?}"));
    match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            Ok(a / b)
        }
        None => s.parse().map_err(|_| bad()),
    }
}

fn parse_usize(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::Config(format!("not a nonnegative integer: {s:?}")))
}

fn parse_list<T>(s: &str, item: fn(&str) -> Result<T>) -> Result<Vec<T>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(item).collect()
}

pub fn parse_config(text: &str) -> Result<Settings> {
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value", lineno + 1)))?;
        let key = key.trim().to_string();
        if !(RUN_KEYS.contains(&key.as_str()) || STUDY_KEYS.contains(&key.as_str()) || is_gamma_key(&key).is_some()) {
            return Err(Error::Config(format!("line {}: unknown key {key:?}", lineno + 1)));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key {key:?}", lineno + 1)));
        }
    }

    let get = |key: &str| map.get(key).map(String::as_str);
    let mut run = RunConfig::default();
    if let Some(v) = get("k") {
        run.k = parse_f64(v)?;
    }
    if let Some(v) = get("epsilon") {
        run.epsilon = parse_f64(v)?;
    }
    if let Some(v) = get("N") {
        run.modes = parse_usize(v)?;
    }
    if let Some(v) = get("M") {
        run.samples = parse_usize(v)?;
    }
    if let Some(v) = get("n") {
        run.n = parse_usize(v)?;
    }
    if let Some(v) = get("r") {
        run.r = parse_usize(v)?;
    }
    run.penalties = PenaltySet::default_for(run.r);
    for (key, value) in &map {
        if let Some(j) = is_gamma_key(key) {
            if j > run.r {
                return Err(Error::Config(format!("{key} exceeds the polynomial degree r = {}", run.r)));
            }
            run.penalties.gamma[j] = parse_f64(value)?;
        }
    }
    if let Some(v) = get("beta1") {
        run.penalties.beta1 = parse_f64(v)?;
    }
    let mut noise = NoiseSpec::default();
    if let Some(v) = get("seed") {
        noise.seed = v
            .parse()
            .map_err(|_| Error::Config(format!("seed must be a 64-bit unsigned integer, got {v:?}")))?;
    }
    if let Some(v) = get("eta_min") {
        noise.min = parse_f64(v)?;
    }
    if let Some(v) = get("eta_max") {
        noise.max = parse_f64(v)?;
    }
    run.noise = noise;
    if let Some(v) = get("source") {
        run.source = v.parse::<SourceSpec>()?;
    }
    if let Some(v) = get("C0_hint") {
        run.c0_hint = parse_f64(v)?;
    }
    if let Some(v) = get("sample_offset") {
        run.sample_offset = parse_usize(v)?;
    }
    run.quad = QuadSpec {
        triangle_degree: get("quad_triangle").map(parse_usize).transpose()?.unwrap_or(4),
        edge_points: get("quad_edge").map(parse_usize).transpose()?.unwrap_or(3),
    };
    run.validate()?;

    let study = match get("study") {
        None => {
            if let Some(k) = STUDY_KEYS.iter().find(|k| map.contains_key(**k)) {
                return Err(Error::Config(format!("{k} given without a study kind")));
            }
            None
        }
        Some(kind) => {
            let kind: StudyKind = kind.parse()?;
            let mut spec = StudySpec::new(kind, run.clone());
            if let Some(v) = get("mesh_sizes") {
                spec.mesh_sizes = parse_list(v, parse_usize)?;
            }
            if let Some(v) = get("M_values") {
                spec.m_values = parse_list(v, parse_usize)?;
            }
            if let Some(v) = get("N_values") {
                spec.n_values = parse_list(v, parse_usize)?;
            }
            if let Some(v) = get("epsilon_values") {
                spec.epsilon_values = parse_list(v, parse_f64)?;
            }
            if let Some(v) = get("M_ref") {
                spec.m_ref = parse_usize(v)?;
            } else {
                spec.m_ref = 16 * spec.m_values.iter().copied().max().unwrap_or(1);
            }
            if let Some(v) = get("mode") {
                spec.mode = parse_usize(v)?;
            }
            if let Some(v) = get("theta") {
                spec.theta = parse_f64(v)?;
            }
            if let Some(v) = get("replicates") {
                spec.replicates = parse_usize(v)?;
            }
            spec.validate()?;
            Some(spec)
        }
    };
    Ok(Settings { run, study })
}

pub(crate) fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn join<T>(xs: &[T], f: impl Fn(&T) -> String) -> String {
    xs.iter().map(f).collect::<Vec<_>>().join(",")
}

/// Key=value lines that parse back to an identical configuration.
pub fn config_echo(run: &RunConfig) -> String {
    let mut s = String::new();
    let mut line = |k: &str, v: String| s.push_str(&format!("{k}={v}\n"));
    line("k", fmt_f(run.k));
    line("epsilon", fmt_f(run.epsilon));
    line("N", run.modes.to_string());
    line("M", run.samples.to_string());
    line("n", run.n.to_string());
    line("r", run.r.to_string());
    for (j, g) in run.penalties.gamma.iter().enumerate() {
        line(&format!("gamma{j}"), fmt_f(*g));
    }
    line("beta1", fmt_f(run.penalties.beta1));
    line("seed", run.noise.seed.to_string());
    line("eta_min", fmt_f(run.noise.min));
    line("eta_max", fmt_f(run.noise.max));
    line("source", run.source.to_string());
    line("C0_hint", fmt_f(run.c0_hint));
    line("sample_offset", run.sample_offset.to_string());
    line("quad_triangle", run.quad.triangle_degree.to_string());
    line("quad_edge", run.quad.edge_points.to_string());
    s
}

pub fn settings_echo(settings: &Settings) -> String {
    let mut s = config_echo(&settings.run);
    if let Some(st) = &settings.study {
        s.push_str(&format!("study={}\n", st.kind));
        s.push_str(&format!("mesh_sizes={}\n", join(&st.mesh_sizes, |v| v.to_string())));
        s.push_str(&format!("M_values={}\n", join(&st.m_values, |v| v.to_string())));
        s.push_str(&format!("N_values={}\n", join(&st.n_values, |v| v.to_string())));
        s.push_str(&format!("epsilon_values={}\n", join(&st.epsilon_values, |v| fmt_f(*v))));
        s.push_str(&format!("M_ref={}\n", st.m_ref));
        s.push_str(&format!("mode={}\n", st.mode));
        s.push_str(&format!("theta={}\n", fmt_f(st.theta)));
        s.push_str(&format!("replicates={}\n", st.replicates));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_run_keys_and_comments() {
        let text = "# desk scale\nk = 5\nepsilon = 1/6  # ε = 1/(k+1)\nN=5\nM=200\nn=20\nseed=42\neta_min=0\neta_max=1\nsource=constant\n";
        let s = parse_config(text).unwrap();
        assert_eq!(s.run.k, 5.0);
        assert_eq!(s.run.epsilon, 1.0 / 6.0);
        assert_eq!((s.run.modes, s.run.samples, s.run.n), (5, 200, 20));
        assert_eq!(s.run.noise, NoiseSpec { min: 0.0, max: 1.0, seed: 42 });
        assert_eq!(s.run.source, SourceSpec::Constant(1.0));
        assert!(s.study.is_none());
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "k=5\nk=6\n",
            "wavenumber=5\n",
            "k\n",
            "epsilon=1.5\n",
            "gamma3=1\n",
            "mesh_sizes=10,20\n",
            "study=m_scaling\nM_values=100,25\n",
            "source=plane\n",
        ] {
            assert!(parse_config(text).is_err(), "{text:?}");
        }
    }

    #[test]
    fn penalty_overrides() {
        let s = parse_config("r=2\ngamma0=20\ngamma2=0.5\nbeta1=0\n").unwrap();
        assert_eq!(s.run.penalties.gamma, vec![20.0, 0.1, 0.5]);
        assert_eq!(s.run.penalties.beta1, 0.0);
    }

    #[test]
    fn echo_round_trips() {
        let text = "k=20\nepsilon=0.3\nN=3\nM=7\nn=6\nsource=radial\nseed=9\nC0_hint=2.5\nstudy=epsilon_sweep\nepsilon_values=0.02,0.1,1/2\nN_values=1,3\n";
        let s = parse_config(text).unwrap();
        let again = parse_config(&settings_echo(&s)).unwrap();
        assert_eq!(s, again);
    }
}
