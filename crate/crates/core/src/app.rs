//! Simulation driver, output writers and the convergence study.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::diagnostics::{fit_rate, DiagnosticsRecord};
use crate::error::Result;
use crate::hermite::reconstruct;
use crate::mesh::{l2_distance, Mesh1D};
use crate::scenarios::initialize;
use crate::timestepper::Simulation;
use crate::vlasov::HermiteState;

pub const CSV_HEADER: &str = "t,mass_dev,momentum_dev,energy_dev,E_l2,E_max";
pub const CONVERGENCE_HEADER: &str = "degree,n_cells,l2_error_c0,order_c0,l2_error_state,order_state";
pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const CONFIG_ECHO_FILE: &str = "config.effective.toml";
pub const CONVERGENCE_FILE: &str = "convergence.csv";

#[derive(Debug)]
pub struct RunSummary {
    pub final_record: DiagnosticsRecord,
    pub steps: u64,
    /// Largest `max_abs_deviation` over all steps, written or not.
    pub max_deviation: f64,
    pub rate: Option<Result<f64>>,
    pub timeseries: PathBuf,
    pub snapshots: Vec<PathBuf>,
}

pub fn csv_row(r: &DiagnosticsRecord) -> String {
    format!(
        "{},{},{},{},{},{}",
        r.t, r.mass_dev, r.momentum_dev, r.energy_dev, r.e_l2, r.e_max
    )
}

/// Builds the initial simulation described by `cfg`.
pub fn build_simulation(cfg: &RunConfig, parallel: bool) -> Result<Simulation> {
    let mesh = cfg.mesh()?;
    let params = cfg.hermite_params()?;
    let (state, rho_0) = initialize(&cfg.scenario, &mesh, params)?;
    Simulation::new(&mesh, state, rho_0, cfg.penalty()?, cfg.step_config(parallel)?)
}

/// Writes `f(x_i, v_j)` on the configured grid: rows over cell-centred
/// `x_i = x0 + (i + ½)(x1 − x0)/nx`, columns over `v_j = v0 + j (v1 − v0)/(nv − 1)`.
pub fn write_snapshot(sim: &Simulation, cfg: &RunConfig, path: &Path) -> Result<()> {
    let g = &cfg.output.grid;
    let mesh = sim.mesh();
    let (x0, x1) = (mesh.x_min(), mesh.x_max());
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "# nx={} nv={} x0={} x1={} v0={} v1={} t={}",
        g.nx,
        g.nv,
        x0,
        x1,
        g.v_min,
        g.v_max,
        sim.time().t
    )?;
    let params = sim.state().params();
    let dv = if g.nv > 1 {
        (g.v_max - g.v_min) / (g.nv - 1) as f64
    } else {
        0.0
    };
    for i in 0..g.nx {
        let x = x0 + (i as f64 + 0.5) * (x1 - x0) / g.nx as f64;
        let local = sim.state().local_modes(mesh, x);
        let row: Vec<String> = (0..g.nv)
            .map(|j| format!("{:e}", reconstruct(&local, g.v_min + j as f64 * dv, params)))
            .collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    w.flush()?;
    Ok(())
}

/// Runs `cfg`, writing the time series, the snapshots and the config echo
/// into `cfg.output.dir`.
pub fn run(cfg: &RunConfig, parallel: bool) -> Result<RunSummary> {
    cfg.validate()?;
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(CONFIG_ECHO_FILE), cfg.to_toml())?;

    let mut sim = build_simulation(cfg, parallel)?;
    let ts_path = dir.join(TIMESERIES_FILE);
    let mut csv = BufWriter::new(File::create(&ts_path)?);
    writeln!(csv, "{CSV_HEADER}")?;
    let first = sim.diagnostics();
    writeln!(csv, "{}", csv_row(&first))?;

    let stride = cfg.output.stride as u64;
    let mut last_written = 0u64;
    let mut last_record = first;
    let mut max_deviation = first.max_abs_deviation();
    let mut series = vec![(first.t, first.e_l2.ln())];
    let mut io_error: Option<std::io::Error> = None;
    let mut snapshots = Vec::new();

    let mut targets: Vec<(f64, bool)> = cfg.output.snapshot_times.iter().map(|&t| (t, true)).collect();
    targets.push((cfg.numerics.t_end, false));

    for (target, snapshot) in targets {
        let outcome = sim.advance_to(target, |s| {
            let r = s.diagnostics();
            max_deviation = max_deviation.max(r.max_abs_deviation());
            series.push((r.t, r.e_l2.ln()));
            let step = s.time().step_index;
            if step % stride == 0 && io_error.is_none() {
                if let Err(e) = writeln!(csv, "{}", csv_row(&r)) {
                    io_error = Some(e);
                }
                last_written = step;
            }
            last_record = r;
        });
        if let Err(e) = outcome {
            csv.flush()?;
            return Err(e);
        }
        if let Some(e) = io_error.take() {
            return Err(e.into());
        }
        if snapshot {
            let path = dir.join(format!("snapshot_{:03}.txt", snapshots.len()));
            write_snapshot(&sim, cfg, &path)?;
            snapshots.push(path);
        }
    }
    let steps = sim.time().step_index;
    if steps != last_written {
        writeln!(csv, "{}", csv_row(&last_record))?;
    }
    csv.flush()?;

    let rate = cfg.output.rate_window.map(|w| fit_rate(&series, w));
    Ok(RunSummary {
        final_record: last_record,
        steps,
        max_deviation,
        rate,
        timeseries: ts_path,
        snapshots,
    })
}

/// Discrete L² distance of the density coefficient `C_0`.
pub fn c0_error(mesh_a: &Mesh1D, a: &HermiteState, mesh_b: &Mesh1D, b: &HermiteState) -> f64 {
    l2_distance(a.mode(0), mesh_a, b.mode(0), mesh_b)
}

/// `(Σ_n ‖C_n^a − C_n^b‖²)^{1/2}` over the modes both states share.
pub fn state_error(mesh_a: &Mesh1D, a: &HermiteState, mesh_b: &Mesh1D, b: &HermiteState) -> f64 {
    a.modes()
        .iter()
        .zip(b.modes())
        .map(|(x, y)| l2_distance(x, mesh_a, y, mesh_b).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub degree: usize,
    pub n_cells: usize,
    pub error_c0: f64,
    /// `log₂(e_N / e_2N)` against the previous (coarser) row of the same degree.
    pub order_c0: Option<f64>,
    pub error_state: f64,
    pub order_state: Option<f64>,
}

fn final_state(cfg: &RunConfig, n_cells: usize, degree: usize) -> Result<(Mesh1D, HermiteState)> {
    let mut c = cfg.clone();
    c.numerics.n_cells = n_cells;
    c.numerics.degree = degree;
    if let Some(cfl) = c.convergence.cfl {
        c.numerics.cfl = cfl;
    }
    let mut sim = build_simulation(&c, false)?;
    sim.advance_to(c.numerics.t_end, |_| {})?;
    Ok((sim.mesh().clone(), sim.state().clone()))
}

/// Error table against a reference on `reference_cells` cells with one
/// degree more than each tested degree.
pub fn converge(cfg: &RunConfig, parallel: bool) -> Result<Vec<ConvergenceRow>> {
    cfg.validate()?;
    let conv = &cfg.convergence;
    let mut cells = conv.cells.clone();
    cells.sort_unstable();
    cells.dedup();
    let mut jobs: Vec<(usize, usize)> = conv.degrees.iter().map(|&p| (conv.reference_cells, p + 1)).collect();
    for &p in &conv.degrees {
        jobs.extend(cells.iter().map(|&n| (n, p)));
    }
    jobs.sort_unstable();
    jobs.dedup();

    let results: Vec<Result<(Mesh1D, HermiteState)>> = if parallel {
        jobs.par_iter().map(|&(n, p)| final_state(cfg, n, p)).collect()
    } else {
        jobs.iter().map(|&(n, p)| final_state(cfg, n, p)).collect()
    };
    let mut solved = Vec::with_capacity(jobs.len());
    for (job, r) in jobs.iter().zip(results) {
        solved.push((*job, r?));
    }
    let lookup = |n: usize, p: usize| &solved.iter().find(|(j, _)| *j == (n, p)).expect("job was scheduled").1;

    let mut rows = Vec::new();
    for &p in &conv.degrees {
        let (ref_mesh, ref_state) = lookup(conv.reference_cells, p + 1);
        let mut prev: Option<(f64, f64)> = None;
        for &n in &cells {
            let (mesh, state) = lookup(n, p);
            let e0 = c0_error(mesh, state, ref_mesh, ref_state);
            let es = state_error(mesh, state, ref_mesh, ref_state);
            rows.push(ConvergenceRow {
                degree: p,
                n_cells: n,
                error_c0: e0,
                order_c0: prev.map(|(a, _)| (a / e0).log2()),
                error_state: es,
                order_state: prev.map(|(_, b)| (b / es).log2()),
            });
            prev = Some((e0, es));
        }
    }
    Ok(rows)
}

pub fn write_convergence_csv(rows: &[ConvergenceRow], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{CONVERGENCE_HEADER}")?;
    let opt = |o: Option<f64>| o.map(|v| v.to_string()).unwrap_or_default();
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.degree,
            r.n_cells,
            r.error_c0,
            opt(r.order_c0),
            r.error_state,
            opt(r.order_state)
        )?;
    }
    w.flush()?;
    Ok(())
}
