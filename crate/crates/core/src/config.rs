//! Run configuration: a TOML file with `[scenario]`, `[numerics]`,
//! `[output]` and optional `[convergence]` tables.
//!
//! Parsing goes through a permissive raw layer (every key optional, unknown
//! keys rejected) and is then resolved into a validated [`RunConfig`].
//! [`RunConfig::to_toml`] writes every resolved value back out, so a run
//! started from the echo is the same run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::FilterSpec;
use crate::hermite::HermiteParams;
use crate::mesh::Mesh1D;
use crate::poisson::Penalty;
use crate::scenarios::{BumpParams, ScenarioKind, ScenarioSpec};
use crate::timestepper::{Order, StepConfig};

pub const DEFAULT_DEGREE: i64 = 2;
pub const DEFAULT_ORDER: i64 = 2;
pub const DEFAULT_CFL: f64 = 0.3;
pub const DEFAULT_BETA: f64 = 1.0;
pub const DEFAULT_V_SCALE: f64 = 1.0;
pub const DEFAULT_N_CELLS: i64 = 64;
pub const DEFAULT_T_END: f64 = 60.0;

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    scenario: Option<RawScenario>,
    numerics: Option<RawNumerics>,
    output: Option<RawOutput>,
    convergence: Option<RawConvergence>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    kind: Option<String>,
    alpha: Option<f64>,
    k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    harmonic: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bulk_density: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beam_density: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beam_drift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bulk_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beam_width: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawNumerics {
    n_cells: Option<i64>,
    degree: Option<i64>,
    n_modes: Option<i64>,
    v_th: Option<f64>,
    cfl: Option<f64>,
    order: Option<i64>,
    t_end: Option<f64>,
    beta_penalty: Option<f64>,
    penalty_inverse_width: Option<bool>,
    filter: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
    stride: Option<i64>,
    snapshot_times: Option<Vec<f64>>,
    snapshot_nx: Option<i64>,
    snapshot_nv: Option<i64>,
    v_min: Option<f64>,
    v_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rate_window: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawConvergence {
    cells: Option<Vec<i64>>,
    degrees: Option<Vec<i64>>,
    reference_cells: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cfl: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericsConfig {
    pub n_cells: usize,
    pub degree: usize,
    pub n_modes: usize,
    pub v_scale: f64,
    pub cfl: f64,
    pub order: Order,
    pub t_end: f64,
    pub beta_penalty: f64,
    pub penalty_inverse_width: bool,
    pub filter: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotGrid {
    pub nx: usize,
    pub nv: usize,
    pub v_min: f64,
    pub v_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write every `stride`-th step (the first and last rows are always written).
    pub stride: usize,
    pub snapshot_times: Vec<f64>,
    pub grid: SnapshotGrid,
    /// Fit the field growth/damping rate over this interval after the run.
    pub rate_window: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceConfig {
    pub cells: Vec<usize>,
    pub degrees: Vec<usize>,
    pub reference_cells: usize,
    /// CFL number for every run of the study; the run CFL when unset.
    pub cfl: Option<f64>,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            cells: vec![8, 16, 32, 64],
            degrees: vec![1, 2, 3],
            reference_cells: 256,
            cfl: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioSpec,
    pub numerics: NumericsConfig,
    pub output: OutputConfig,
    pub convergence: ConvergenceConfig,
}

fn cfg_err(key: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        reason: reason.into(),
    }
}

fn positive_count(key: &str, v: i64) -> Result<usize> {
    if v <= 0 {
        return Err(cfg_err(key, format!("must be a positive integer, got {v}")));
    }
    usize::try_from(v).map_err(|_| cfg_err(key, "too large"))
}

fn finite(key: &str, v: f64) -> Result<f64> {
    if !v.is_finite() {
        return Err(cfg_err(key, "must be finite"));
    }
    Ok(v)
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(cfg_err(key, format!("must be positive, got {v}")));
    }
    Ok(v)
}

fn required<T>(key: &str, v: Option<T>) -> Result<T> {
    v.ok_or_else(|| cfg_err(key, "is required"))
}

fn rename(key: &'static str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { reason, .. } => cfg_err(key, reason),
        other => other,
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawFile = toml::from_str(text).map_err(|e| cfg_err("file", e.message().to_string()))?;
        Self::resolve(raw)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    fn resolve(raw: RawFile) -> Result<Self> {
        let sc = raw.scenario.ok_or_else(|| cfg_err("scenario", "section is required"))?;
        let kind: ScenarioKind = required("kind", sc.kind)?.parse().map_err(|e| rename("kind", e))?;
        let alpha = finite("alpha", required("alpha", sc.alpha)?)?;
        let k = positive("k", required("k", sc.k)?)?;
        let mut scenario = ScenarioSpec::new(kind, alpha, k)?;
        let d = BumpParams::default();
        let harmonic = positive_count("harmonic", sc.harmonic.unwrap_or(i64::from(d.harmonic)))?;
        scenario.bump = BumpParams {
            bulk_density: finite("bulk_density", sc.bulk_density.unwrap_or(d.bulk_density))?,
            beam_density: finite("beam_density", sc.beam_density.unwrap_or(d.beam_density))?,
            beam_drift: finite("beam_drift", sc.beam_drift.unwrap_or(d.beam_drift))?,
            bulk_width: positive("bulk_width", sc.bulk_width.unwrap_or(d.bulk_width))?,
            beam_width: positive("beam_width", sc.beam_width.unwrap_or(d.beam_width))?,
            harmonic: u32::try_from(harmonic).map_err(|_| cfg_err("harmonic", "too large"))?,
        };
        if scenario.bump.bulk_density < 0.0 || scenario.bump.beam_density < 0.0 {
            return Err(cfg_err("bulk_density", "bump densities must be non-negative"));
        }
        if !(scenario.bump.bulk_density + scenario.bump.beam_density > 0.0) {
            return Err(cfg_err("bulk_density", "bulk plus beam density must be positive"));
        }

        let nm = raw.numerics.unwrap_or_default();
        let degree = nm.degree.unwrap_or(DEFAULT_DEGREE);
        if degree < 0 {
            return Err(cfg_err("degree", format!("must be non-negative, got {degree}")));
        }
        let n_modes = positive_count("n_modes", required("n_modes", nm.n_modes)?)?;
        if n_modes < 3 {
            return Err(cfg_err("n_modes", format!("must be at least 3, got {n_modes}")));
        }
        let cfl = nm.cfl.unwrap_or(DEFAULT_CFL);
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(cfg_err("cfl", format!("must lie in (0, 1], got {cfl}")));
        }
        let t_end = nm.t_end.unwrap_or(DEFAULT_T_END);
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return Err(cfg_err("t_end", format!("must be non-negative, got {t_end}")));
        }
        let numerics = NumericsConfig {
            n_cells: positive_count("n_cells", nm.n_cells.unwrap_or(DEFAULT_N_CELLS))?,
            degree: degree as usize,
            n_modes,
            v_scale: positive("v_th", nm.v_th.unwrap_or(DEFAULT_V_SCALE))?,
            cfl,
            order: Order::try_from(nm.order.unwrap_or(DEFAULT_ORDER)).map_err(|e| rename("order", e))?,
            t_end,
            beta_penalty: positive("beta_penalty", nm.beta_penalty.unwrap_or(DEFAULT_BETA))?,
            penalty_inverse_width: nm.penalty_inverse_width.unwrap_or(false),
            filter: nm.filter.unwrap_or(true),
        };

        let out = raw.output.unwrap_or_default();
        let v_min = finite("v_min", out.v_min.unwrap_or(-8.0))?;
        let v_max = finite("v_max", out.v_max.unwrap_or(8.0))?;
        if !(v_max > v_min) {
            return Err(cfg_err("v_max", "must exceed v_min"));
        }
        let rate_window = match out.rate_window {
            Some([a, b]) if a.is_finite() && b.is_finite() && a < b => Some((a, b)),
            Some(_) => return Err(cfg_err("rate_window", "must be an increasing pair of times")),
            None => None,
        };
        let output = OutputConfig {
            dir: PathBuf::from(out.dir.unwrap_or_else(|| "output".to_string())),
            stride: positive_count("stride", out.stride.unwrap_or(1))?,
            snapshot_times: out.snapshot_times.unwrap_or_default(),
            grid: SnapshotGrid {
                nx: positive_count("snapshot_nx", out.snapshot_nx.unwrap_or(64))?,
                nv: positive_count("snapshot_nv", out.snapshot_nv.unwrap_or(128))?,
                v_min,
                v_max,
            },
            rate_window,
        };

        let conv = match raw.convergence {
            None => ConvergenceConfig::default(),
            Some(c) => {
                let d = ConvergenceConfig::default();
                let counts = |key: &str, v: Option<Vec<i64>>, dflt: Vec<usize>| -> Result<Vec<usize>> {
                    match v {
                        None => Ok(dflt),
                        Some(list) if list.is_empty() => Err(cfg_err(key, "must not be empty")),
                        Some(list) => list.into_iter().map(|n| positive_count(key, n)).collect(),
                    }
                };
                ConvergenceConfig {
                    cells: counts("cells", c.cells, d.cells)?,
                    degrees: counts("degrees", c.degrees, d.degrees)?,
                    reference_cells: positive_count("reference_cells", c.reference_cells.unwrap_or(256))?,
                    cfl: match c.cfl {
                        Some(v) if !(v > 0.0 && v <= 1.0) => {
                            return Err(cfg_err("cfl", format!("must lie in (0, 1], got {v}")))
                        }
                        v => v,
                    },
                }
            }
        };

        let cfg = Self {
            scenario,
            numerics,
            output,
            convergence: conv,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks the invariants that tie sections together; call again after
    /// overriding fields by hand.
    pub fn validate(&self) -> Result<()> {
        let t_end = self.numerics.t_end;
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return Err(cfg_err("t_end", format!("must be non-negative, got {t_end}")));
        }
        for &t in &self.output.snapshot_times {
            if !(t >= 0.0 && t <= t_end) {
                return Err(cfg_err("snapshot_times", format!("{t} lies outside [0, {t_end}]")));
            }
        }
        if self.output.snapshot_times.windows(2).any(|w| w[1] < w[0]) {
            return Err(cfg_err("snapshot_times", "must be non-decreasing"));
        }
        Ok(())
    }

    pub fn hermite_params(&self) -> Result<HermiteParams> {
        HermiteParams::new(self.numerics.n_modes, self.numerics.v_scale)
    }

    pub fn mesh(&self) -> Result<Mesh1D> {
        self.mesh_with(self.numerics.n_cells, self.numerics.degree)
    }

    pub fn mesh_with(&self, n_cells: usize, degree: usize) -> Result<Mesh1D> {
        Mesh1D::uniform(0.0, self.scenario.domain_length(), n_cells, degree)
    }

    pub fn penalty(&self) -> Result<Penalty> {
        Penalty::new(self.numerics.beta_penalty, self.numerics.penalty_inverse_width)
    }

    pub fn step_config(&self, parallel: bool) -> Result<StepConfig> {
        let filter = if self.numerics.filter {
            FilterSpec::default()
        } else {
            FilterSpec::disabled()
        };
        let mut cfg = StepConfig::new(self.numerics.cfl, self.numerics.order, filter)?;
        cfg.parallel = parallel;
        Ok(cfg)
    }

    /// Every resolved value, as TOML that parses back to `self`.
    pub fn to_toml(&self) -> String {
        let s = &self.scenario;
        let b = &s.bump;
        let n = &self.numerics;
        let o = &self.output;
        let c = &self.convergence;
        let bump = s.kind == ScenarioKind::BumpOnTail;
        let raw = RawFile {
            scenario: Some(RawScenario {
                kind: Some(s.kind.as_str().to_string()),
                alpha: Some(s.amplitude),
                k: Some(s.wavenumber),
                harmonic: bump.then_some(i64::from(b.harmonic)),
                bulk_density: bump.then_some(b.bulk_density),
                beam_density: bump.then_some(b.beam_density),
                beam_drift: bump.then_some(b.beam_drift),
                bulk_width: bump.then_some(b.bulk_width),
                beam_width: bump.then_some(b.beam_width),
            }),
            numerics: Some(RawNumerics {
                n_cells: Some(n.n_cells as i64),
                degree: Some(n.degree as i64),
                n_modes: Some(n.n_modes as i64),
                v_th: Some(n.v_scale),
                cfl: Some(n.cfl),
                order: Some(n.order.as_int()),
                t_end: Some(n.t_end),
                beta_penalty: Some(n.beta_penalty),
                penalty_inverse_width: Some(n.penalty_inverse_width),
                filter: Some(n.filter),
            }),
            output: Some(RawOutput {
                dir: Some(o.dir.to_string_lossy().into_owned()),
                stride: Some(o.stride as i64),
                snapshot_times: Some(o.snapshot_times.clone()),
                snapshot_nx: Some(o.grid.nx as i64),
                snapshot_nv: Some(o.grid.nv as i64),
                v_min: Some(o.grid.v_min),
                v_max: Some(o.grid.v_max),
                rate_window: o.rate_window.map(|(a, b)| [a, b]),
            }),
            convergence: Some(RawConvergence {
                cells: Some(c.cells.iter().map(|&x| x as i64).collect()),
                degrees: Some(c.degrees.iter().map(|&x| x as i64).collect()),
                reference_cells: Some(c.reference_cells as i64),
                cfl: c.cfl,
            }),
        };
        toml::to_string(&raw).expect("plain tables serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[scenario]\nkind = \"landau\"\nalpha = 0.01\nk = 0.5\n\n[numerics]\nn_modes = 64\n";

    fn key_of(e: Error) -> String {
        match e {
            Error::Config { key, .. } => key,
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(c.numerics.degree, 2);
        assert_eq!(c.numerics.order, Order::Rk2);
        assert_eq!(c.numerics.cfl, 0.3);
        assert_eq!(c.numerics.beta_penalty, 1.0);
        assert_eq!(c.numerics.v_scale, 1.0);
        assert!(c.numerics.filter);
        assert_eq!(c.output.stride, 1);
        assert_eq!(c.scenario.kind, ScenarioKind::Landau);
    }

    #[test]
    fn mode_count_is_required() {
        let text = "[scenario]\nkind = \"landau\"\nalpha = 0.01\nk = 0.5\n";
        assert_eq!(key_of(RunConfig::from_toml_str(text).unwrap_err()), "n_modes");
    }

    #[test]
    fn negative_cell_count_names_key() {
        let text = format!("{MINIMAL}n_cells = -4\n");
        assert_eq!(key_of(RunConfig::from_toml_str(&text).unwrap_err()), "n_cells");
    }

    #[test]
    fn unknown_key_rejected() {
        let text = format!("{MINIMAL}n_cels = 4\n");
        let e = RunConfig::from_toml_str(&text).unwrap_err();
        assert!(e.to_string().contains("n_cels"), "{e}");
    }

    #[test]
    fn snapshot_times_inside_run() {
        let text = format!("{MINIMAL}t_end = 1.0\n\n[output]\nsnapshot_times = [0.5, 2.0]\n");
        assert_eq!(key_of(RunConfig::from_toml_str(&text).unwrap_err()), "snapshot_times");
    }

    #[test]
    fn bad_scalars_name_their_keys() {
        for (line, key) in [
            ("cfl = 1.5", "cfl"),
            ("order = 3", "order"),
            ("t_end = -1.0", "t_end"),
            ("beta_penalty = 0.0", "beta_penalty"),
            ("v_th = -1.0", "v_th"),
            ("degree = -1", "degree"),
        ] {
            let text = format!("{MINIMAL}{line}\n");
            assert_eq!(key_of(RunConfig::from_toml_str(&text).unwrap_err()), key, "{line}");
        }
    }

    #[test]
    fn echo_round_trips() {
        let text = "[scenario]\nkind = \"bump_on_tail\"\nalpha = 1e-4\nk = 0.1\n\n\
                    [numerics]\nn_modes = 128\nv_th = 0.1\ncfl = 0.123456789\nfilter = false\n\n\
                    [output]\nsnapshot_times = [0.0, 1.0]\nrate_window = [1.0, 2.0]\n\n\
                    [convergence]\ncells = [4, 8]\ncfl = 0.05\n";
        let c = RunConfig::from_toml_str(text).unwrap();
        let echo = c.to_toml();
        let again = RunConfig::from_toml_str(&echo).unwrap();
        assert_eq!(c, again);
        assert!(echo.contains("filter = false"));
    }
}
