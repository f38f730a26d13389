//! Semi-discrete Hermite–DG operator.
//!
//! Each Hermite coefficient `C_n(x)` obeys
//! `∂_t C_n + ∂_x g_n = (√n / v_th) E C_{n-1}` with
//! `g_n = v_th (√(n+1) C_{n+1} + √n C_{n-1})` and the closure `C_{N_H} = 0`.
//! Space is discretized with a global Lax–Friedrichs flux. The `C_1` and
//! `C_2` equations carry interface residuals built from products of jumps;
//! with them, mass, momentum and total energy are conserved exactly.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::hermite::{reconstruct_slice, HermiteParams, ModeVector};
use crate::mesh::{evaluate, traces, DGField, Mesh1D};
use crate::poisson::{FieldPair, Penalty};

/// Hermite coefficients of the distribution, one DG field per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteState {
    params: HermiteParams,
    modes: Vec<DGField>,
}

impl HermiteState {
    pub fn zeros(mesh: &Mesh1D, params: HermiteParams) -> Self {
        Self {
            params,
            modes: vec![DGField::zeros(mesh); params.n_modes()],
        }
    }

    pub fn from_modes(params: HermiteParams, modes: Vec<DGField>) -> Result<Self> {
        if modes.len() != params.n_modes() {
            return Err(invalid(
                "modes",
                format!("expected {} modes, got {}", params.n_modes(), modes.len()),
            ));
        }
        if modes.windows(2).any(|w| w[0].coeffs().len() != w[1].coeffs().len()) {
            return Err(invalid("modes", "mode fields have different sizes"));
        }
        Ok(Self { params, modes })
    }

    pub fn params(&self) -> &HermiteParams {
        &self.params
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn mode(&self, n: usize) -> &DGField {
        &self.modes[n]
    }

    pub fn mode_mut(&mut self, n: usize) -> &mut DGField {
        &mut self.modes[n]
    }

    pub fn modes(&self) -> &[DGField] {
        &self.modes
    }

    pub fn modes_mut(&mut self) -> &mut [DGField] {
        &mut self.modes
    }

    pub fn into_modes(self) -> Vec<DGField> {
        self.modes
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &HermiteState) {
        for (m, o) in self.modes.iter_mut().zip(&other.modes) {
            m.axpy(a, o);
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.modes.iter_mut().for_each(|m| m.scale(a));
    }

    /// Index of the first mode holding a NaN or infinity.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.modes.iter().position(|m| !m.is_finite())
    }

    /// Hermite coefficients at physical position `x`.
    pub fn local_modes(&self, mesh: &Mesh1D, x: f64) -> ModeVector {
        let (cell, xi) = mesh.locate(x);
        ModeVector::from_vec(
            self.modes
                .iter()
                .map(|m| evaluate(m, mesh, cell, xi).expect("located cell is in range"))
                .collect(),
        )
    }

    /// Reconstructed distribution `f(x, v)`.
    pub fn distribution(&self, mesh: &Mesh1D, x: f64, v: f64) -> f64 {
        reconstruct_slice(self.local_modes(mesh, x).coeffs(), v, self.params.v_scale())
    }
}

/// Global Lax–Friedrichs viscosity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxConfig {
    pub alpha: f64,
}

impl FluxConfig {
    /// `α = v_th √N_H`, the spectral radius bound of the truncated system.
    pub fn for_params(params: &HermiteParams) -> Self {
        Self {
            alpha: params.v_scale() * (params.n_modes() as f64).sqrt(),
        }
    }
}

/// Physical flux `g_n` as a DG field.
pub fn flux_field(n: usize, state: &HermiteState) -> DGField {
    let vs = state.params.v_scale();
    let mut g = DGField::zeros_like(state.mode(n));
    if n + 1 < state.n_modes() {
        g.axpy(vs * ((n + 1) as f64).sqrt(), state.mode(n + 1));
    }
    if n > 0 {
        g.axpy(vs * (n as f64).sqrt(), state.mode(n - 1));
    }
    g
}

/// `½(g⁻ + g⁺ − α (C⁺ − C⁻))`
#[inline]
pub fn lf_flux(g_minus: f64, g_plus: f64, c_minus: f64, c_plus: f64, alpha: f64) -> f64 {
    0.5 * (g_minus + g_plus - alpha * (c_plus - c_minus))
}

/// Spatial operator on a fixed mesh and basis.
#[derive(Debug, Clone, PartialEq)]
pub struct VlasovOperator {
    mesh: Mesh1D,
    params: HermiteParams,
    flux: FluxConfig,
    beta: Vec<f64>,
    parallel: bool,
}

/// Trace values of every mode: `[n][cell]`.
struct ModeTraces {
    left: Vec<Vec<f64>>,
    right: Vec<Vec<f64>>,
}

impl VlasovOperator {
    pub fn new(mesh: &Mesh1D, params: HermiteParams, flux: FluxConfig, penalty: Penalty) -> Self {
        Self {
            mesh: mesh.clone(),
            params,
            flux,
            beta: penalty.per_interface(mesh),
            parallel: false,
        }
    }

    /// Assemble modes on the rayon pool. Results are identical to serial.
    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn params(&self) -> &HermiteParams {
        &self.params
    }

    pub fn flux(&self) -> FluxConfig {
        self.flux
    }

    pub fn interface_penalties(&self) -> &[f64] {
        &self.beta
    }

    fn mode_traces(&self, state: &HermiteState) -> ModeTraces {
        let n_cells = self.mesh.n_cells();
        let mut left = vec![vec![0.0; n_cells]; state.n_modes()];
        let mut right = left.clone();
        for (n, m) in state.modes().iter().enumerate() {
            for j in 0..n_cells {
                let (l, r) = m.cell_traces(&self.mesh, j);
                left[n][j] = l;
                right[n][j] = r;
            }
        }
        ModeTraces { left, right }
    }

    /// LF flux `ĝ_n` at every interface.
    fn interface_flux(&self, n: usize, tr: &ModeTraces) -> Vec<f64> {
        let n_cells = self.mesh.n_cells();
        let n_modes = tr.left.len();
        let vs = self.params.v_scale();
        let up = ((n + 1) as f64).sqrt();
        let down = (n as f64).sqrt();
        let g_at = |side: &Vec<Vec<f64>>, j: usize| {
            let mut g = 0.0;
            if n + 1 < n_modes {
                g += up * side[n + 1][j];
            }
            if n > 0 {
                g += down * side[n - 1][j];
            }
            vs * g
        };
        (0..n_cells)
            .map(|i| {
                let jm = self.mesh.left_neighbor(i);
                lf_flux(
                    g_at(&tr.right, jm),
                    g_at(&tr.left, i),
                    tr.right[n][jm],
                    tr.left[n][i],
                    self.flux.alpha,
                )
            })
            .collect()
    }

    fn advection_with(&self, n: usize, state: &HermiteState, tr: &ModeTraces) -> DGField {
        let mesh = &self.mesh;
        let nb = mesh.n_basis();
        let n_cells = mesh.n_cells();
        let g = flux_field(n, state);
        let ghat = self.interface_flux(n, tr);
        let mut out = DGField::zeros(mesh);
        for j in 0..n_cells {
            let h = mesh.cell_width(j);
            let s = (2.0 / h).sqrt();
            let gc = g.cell(j);
            let o = out.cell_mut(j);
            for p in 0..nb {
                let vol: f64 = (0..nb).map(|q| gc[q] * mesh.ref_stiffness(q, p)).sum();
                o[p] = 2.0 / h * vol - ghat[(j + 1) % n_cells] * s * mesh.ref_right_trace()[p]
                    + ghat[j] * s * mesh.ref_left_trace()[p];
            }
        }
        out
    }

    /// Transport contribution `−a_n(g_n, ·)` to `dC_n/dt`.
    pub fn advection_form(&self, n: usize, state: &HermiteState) -> DGField {
        self.advection_with(n, state, &self.mode_traces(state))
    }

    /// `Ĉ_1 = ĝ_0 / v_th` at every interface.
    pub fn chat1(&self, state: &HermiteState) -> Vec<f64> {
        let vs = self.params.v_scale();
        self.interface_flux(0, &self.mode_traces(state))
            .into_iter()
            .map(|g| g / vs)
            .collect()
    }

    /// Per-interface momentum residual `−β/(2 v_th²) [Φ][E]`.
    pub fn residual_r1(&self, fields: &FieldPair) -> Vec<f64> {
        let vs = self.params.v_scale();
        let te = traces(&fields.e, &self.mesh);
        let tp = traces(&fields.phi, &self.mesh);
        (0..self.mesh.n_cells())
            .map(|i| -self.beta[i] / (2.0 * vs * vs) * tp.jump(i) * te.jump(i))
            .collect()
    }

    /// Per-interface energy residual `({C_1} − Ĉ_1)[Φ] / (√2 v_th)`.
    pub fn residual_r2(&self, state: &HermiteState, fields: &FieldPair) -> Vec<f64> {
        let vs = self.params.v_scale();
        let chat = self.chat1(state);
        let c1 = traces(state.mode(1), &self.mesh);
        let tp = traces(&fields.phi, &self.mesh);
        (0..self.mesh.n_cells())
            .map(|i| (c1.average(i) - chat[i]) * tp.jump(i) / (std::f64::consts::SQRT_2 * vs))
            .collect()
    }

    /// Field-force contribution to `dC_n/dt`, including the interface
    /// residual for `n = 1, 2`.
    pub fn source_form(&self, n: usize, state: &HermiteState, fields: &FieldPair) -> DGField {
        let mut out = DGField::zeros(&self.mesh);
        if n == 0 {
            return out;
        }
        let e_quad = values_at_quad(&fields.e, &self.mesh);
        self.add_force(n, state, &e_quad, &mut out);
        match n {
            1 => add_interface_values(&self.residual_r1(fields), &self.mesh, &mut out),
            2 => add_interface_values(&self.residual_r2(state, fields), &self.mesh, &mut out),
            _ => {}
        }
        out
    }

    /// `(√n / v_th) (E C_{n-1}, φ)`
    fn add_force(&self, n: usize, state: &HermiteState, e_quad: &[f64], out: &mut DGField) {
        let mesh = &self.mesh;
        let nq = mesh.quad_order();
        let nb = mesh.n_basis();
        let coef = (n as f64).sqrt() / self.params.v_scale();
        let c = state.mode(n - 1);
        for j in 0..mesh.n_cells() {
            let h = mesh.cell_width(j);
            let scale = coef * 0.5 * h * (2.0 / h).sqrt();
            let o = out.cell_mut(j);
            for q in 0..nq {
                let w = scale * mesh.quad_weights()[q] * e_quad[j * nq + q] * c.value_at_quad(mesh, j, q);
                for (p, op) in o.iter_mut().enumerate().take(nb) {
                    *op += w * mesh.ref_basis(q, p);
                }
            }
        }
    }

    /// Full semi-discrete time derivative.
    ///
    /// `fields` must have been solved from this state's `C_0`. With
    /// `skip_mode2_source` the force and residual on `C_2` are left out so a
    /// staged integrator can add them with averaged fields.
    pub fn rhs(&self, state: &HermiteState, fields: &FieldPair, skip_mode2_source: bool) -> Result<HermiteState> {
        if !fields.solved_from(state.mode(0)) {
            return Err(Error::FieldMismatch);
        }
        let tr = self.mode_traces(state);
        let e_quad = values_at_quad(&fields.e, &self.mesh);
        let r1 = self.residual_r1(fields);
        let r2 = if skip_mode2_source {
            Vec::new()
        } else {
            self.residual_r2(state, fields)
        };
        let mode = |n: usize| {
            let mut d = self.advection_with(n, state, &tr);
            let with_source = n > 0 && !(n == 2 && skip_mode2_source);
            if with_source {
                self.add_force(n, state, &e_quad, &mut d);
                match n {
                    1 => add_interface_values(&r1, &self.mesh, &mut d),
                    2 => add_interface_values(&r2, &self.mesh, &mut d),
                    _ => {}
                }
            }
            d
        };
        let modes: Vec<DGField> = if self.parallel {
            (0..state.n_modes()).into_par_iter().map(mode).collect()
        } else {
            (0..state.n_modes()).map(mode).collect()
        };
        Ok(HermiteState {
            params: state.params,
            modes,
        })
    }
}

/// Field values at every quadrature node, `[cell][node]`.
fn values_at_quad(field: &DGField, mesh: &Mesh1D) -> Vec<f64> {
    let nq = mesh.quad_order();
    let mut out = Vec::with_capacity(mesh.n_cells() * nq);
    for j in 0..mesh.n_cells() {
        for q in 0..nq {
            out.push(field.value_at_quad(mesh, j, q));
        }
    }
    out
}

/// Adds `Σ_f value_f (φ⁻_f + φ⁺_f)`: each interface value is tested with the
/// traces of both neighbouring cells.
pub fn add_interface_values(values: &[f64], mesh: &Mesh1D, out: &mut DGField) {
    let n = mesh.n_cells();
    for j in 0..n {
        let s = (2.0 / mesh.cell_width(j)).sqrt();
        let (at_left, at_right) = (values[j], values[(j + 1) % n]);
        let o = out.cell_mut(j);
        for (p, op) in o.iter_mut().enumerate() {
            *op += s * (at_left * mesh.ref_left_trace()[p] + at_right * mesh.ref_right_trace()[p]);
        }
    }
}
