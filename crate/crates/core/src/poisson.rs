//! Local DG solver for the periodic field equation `∂E/∂x = v_th C_0 − ρ_0`,
//! `E = −∂Φ/∂x`.
//!
//! The potential flux is central, `Φ̂ = {Φ}`, and the field flux is
//! penalized, `Ê = {E} − β[Φ]`. Eliminating `E` through the first equation
//! gives a symmetric positive semidefinite operator on `Φ` whose kernel is
//! the constants. The kernel is removed by grounding one degree of freedom
//! and the result is shifted to zero mean afterwards; `E` is then recovered
//! from the discrete gradient, so both LDG equations hold exactly.

use std::hash::{Hash, Hasher};

use crate::error::{invalid, Error, Result};
use crate::hermite::HermiteParams;
use crate::mesh::{integrate, traces, DGField, Mesh1D};
use crate::skyline::SkylineCholesky;

/// Interface penalty `β_f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty {
    Constant(f64),
    /// `β / h_f`, with `h_f` the mean width of the two neighbouring cells.
    InverseWidth(f64),
}

impl Penalty {
    pub fn new(beta: f64, scale_by_inverse_width: bool) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(invalid("beta_penalty", format!("must be positive, got {beta}")));
        }
        Ok(if scale_by_inverse_width {
            Self::InverseWidth(beta)
        } else {
            Self::Constant(beta)
        })
    }

    pub fn at(&self, mesh: &Mesh1D, interface: usize) -> f64 {
        match *self {
            Self::Constant(b) => b,
            Self::InverseWidth(b) => b / mesh.interface_width(interface),
        }
    }

    pub fn per_interface(&self, mesh: &Mesh1D) -> Vec<f64> {
        (0..mesh.n_cells()).map(|i| self.at(mesh, i)).collect()
    }
}

/// Electric field and potential, tagged with the density they were solved from.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub e: DGField,
    pub phi: DGField,
    source: Option<SourceTag>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct SourceTag {
    fingerprint: u64,
    rho_0: f64,
}

impl FieldPair {
    /// Untagged pair; accepted by consumers that do not check provenance.
    pub fn new(e: DGField, phi: DGField) -> Self {
        Self { e, phi, source: None }
    }

    pub fn zeros(mesh: &Mesh1D) -> Self {
        Self::new(DGField::zeros(mesh), DGField::zeros(mesh))
    }

    /// `½(a + b)`, untagged.
    pub fn average(a: &FieldPair, b: &FieldPair) -> FieldPair {
        let mut e = a.e.clone();
        e.axpy(1.0, &b.e);
        e.scale(0.5);
        let mut phi = a.phi.clone();
        phi.axpy(1.0, &b.phi);
        phi.scale(0.5);
        FieldPair::new(e, phi)
    }

    pub fn is_tagged(&self) -> bool {
        self.source.is_some()
    }

    /// `true` when this pair was produced by [`PoissonOperator::solve`] from `c0`.
    pub fn solved_from(&self, c0: &DGField) -> bool {
        self.source
            .is_some_and(|tag| tag.fingerprint == fingerprint(c0, tag.rho_0))
    }
}

/// Checksum of a density field and background.
pub fn fingerprint(c0: &DGField, rho_0: f64) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for x in c0.coeffs() {
        x.to_bits().hash(&mut h);
    }
    rho_0.to_bits().hash(&mut h);
    h.finish()
}

/// Neutralizing background `(v_th / L) ∫ C_0 dx`.
pub fn compute_rho0(c0_initial: &DGField, mesh: &Mesh1D, params: &HermiteParams) -> f64 {
    params.v_scale() * integrate(c0_initial, mesh) / mesh.length()
}

/// Factored LDG operator; depends only on mesh, degree and penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonOperator {
    mesh: Mesh1D,
    penalty: Penalty,
    beta: Vec<f64>,
    factor: SkylineCholesky,
}

pub fn assemble(mesh: &Mesh1D, penalty: Penalty) -> Result<PoissonOperator> {
    PoissonOperator::new(mesh, penalty)
}

impl PoissonOperator {
    pub fn new(mesh: &Mesh1D, penalty: Penalty) -> Result<Self> {
        let beta = penalty.per_interface(mesh);
        let n = mesh.n_dofs();
        let mut lower = Vec::new();
        let mut unit = DGField::zeros(mesh);
        let mut ground = 0.0;
        for c in 0..n {
            unit.coeffs_mut()[c] = 1.0;
            let col = apply_with(mesh, &beta, &unit);
            unit.coeffs_mut()[c] = 0.0;
            if c == 0 {
                ground = col.coeffs()[0];
            }
            for (i, &v) in col.coeffs().iter().enumerate().skip(c) {
                if v != 0.0 {
                    lower.push((i, c, v));
                }
            }
        }
        // kernel is spanned by the mean; grounding dof 0 makes the matrix definite
        lower.push((0, 0, ground));
        let factor = SkylineCholesky::factor(n, &lower)?;
        Ok(Self {
            mesh: mesh.clone(),
            penalty,
            beta,
            factor,
        })
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn penalty(&self) -> Penalty {
        self.penalty
    }

    /// `β_f` for every interface.
    pub fn interface_penalties(&self) -> &[f64] {
        &self.beta
    }

    /// Discrete field from the first LDG equation:
    /// `(E, ψ) = ∫ Φ ψ' dx + Σ_f {Φ}[ψ]`.
    pub fn gradient(&self, phi: &DGField) -> DGField {
        gradient_with(&self.mesh, phi)
    }

    /// Left side of the second LDG equation for a given pair:
    /// `−∫ E ψ' dx − Σ_f Ê[ψ]`.
    pub fn divergence_form(&self, e: &DGField, phi: &DGField) -> DGField {
        divergence_with(&self.mesh, &self.beta, e, phi)
    }

    /// `Φ ↦` second-equation residual with `E` eliminated.
    pub fn apply(&self, phi: &DGField) -> DGField {
        apply_with(&self.mesh, &self.beta, phi)
    }

    /// Dense copy of the eliminated operator (small meshes only).
    pub fn dense_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.mesh.n_dofs();
        let mut a = vec![vec![0.0; n]; n];
        let mut unit = DGField::zeros(&self.mesh);
        for c in 0..n {
            unit.coeffs_mut()[c] = 1.0;
            let col = self.apply(&unit);
            unit.coeffs_mut()[c] = 0.0;
            for (i, &v) in col.coeffs().iter().enumerate() {
                a[i][c] = v;
            }
        }
        a
    }

    /// `Ê = {E} − β[Φ]` at every interface.
    pub fn field_flux(&self, pair: &FieldPair) -> Vec<f64> {
        let te = traces(&pair.e, &self.mesh);
        let tp = traces(&pair.phi, &self.mesh);
        (0..self.mesh.n_cells())
            .map(|i| te.average(i) - self.beta[i] * tp.jump(i))
            .collect()
    }

    /// Solves for the pair driven by `v_th C_0 − ρ_0`.
    pub fn solve(&self, c0: &DGField, rho_0: f64, params: &HermiteParams) -> Result<FieldPair> {
        let mesh = &self.mesh;
        if !c0.matches(mesh) {
            return Err(invalid("c0", "field does not match the Poisson mesh"));
        }
        let vs = params.v_scale();
        let mut rhs = c0.clone();
        rhs.scale(vs);
        for j in 0..mesh.n_cells() {
            rhs.cell_mut(j)[0] -= rho_0 * mesh.cell_width(j).sqrt();
        }
        let net = integrate(&rhs, mesh);
        let tolerance = 1e-10 * mesh.length() * rho_0.abs().max(1.0);
        if !(net.abs() <= tolerance) {
            return Err(Error::Compatibility {
                net_charge: net,
                tolerance,
            });
        }
        // remove the roundoff-level net charge so the grounded system stays consistent
        let l = mesh.length();
        for j in 0..mesh.n_cells() {
            rhs.cell_mut(j)[0] -= net * mesh.cell_width(j).sqrt() / l;
        }

        let mut phi = rhs;
        self.factor.solve_in_place(phi.coeffs_mut());
        let mean = integrate(&phi, mesh) / l;
        for j in 0..mesh.n_cells() {
            phi.cell_mut(j)[0] -= mean * mesh.cell_width(j).sqrt();
        }
        let e = self.gradient(&phi);
        Ok(FieldPair {
            e,
            phi,
            source: Some(SourceTag {
                fingerprint: fingerprint(c0, rho_0),
                rho_0,
            }),
        })
    }
}

pub fn solve(op: &PoissonOperator, c0: &DGField, rho_0: f64, params: &HermiteParams) -> Result<FieldPair> {
    op.solve(c0, rho_0, params)
}

fn gradient_with(mesh: &Mesh1D, phi: &DGField) -> DGField {
    let nb = mesh.n_basis();
    let tr = traces(phi, mesh);
    let mut out = DGField::zeros(mesh);
    let n = mesh.n_cells();
    for j in 0..n {
        let h = mesh.cell_width(j);
        let s = (2.0 / h).sqrt();
        let left_flux = tr.average(j);
        let right_flux = tr.average((j + 1) % n);
        let c = phi.cell(j);
        let o = out.cell_mut(j);
        for p in 0..nb {
            let vol: f64 = (0..nb).map(|q| c[q] * mesh.ref_stiffness(q, p)).sum();
            o[p] =
                2.0 / h * vol - right_flux * s * mesh.ref_right_trace()[p] + left_flux * s * mesh.ref_left_trace()[p];
        }
    }
    out
}

fn divergence_with(mesh: &Mesh1D, beta: &[f64], e: &DGField, phi: &DGField) -> DGField {
    let nb = mesh.n_basis();
    let te = traces(e, mesh);
    let tp = traces(phi, mesh);
    let n = mesh.n_cells();
    let flux: Vec<f64> = (0..n).map(|i| te.average(i) - beta[i] * tp.jump(i)).collect();
    let mut out = DGField::zeros(mesh);
    for j in 0..n {
        let h = mesh.cell_width(j);
        let s = (2.0 / h).sqrt();
        let c = e.cell(j);
        let o = out.cell_mut(j);
        for p in 0..nb {
            let vol: f64 = (0..nb).map(|q| c[q] * mesh.ref_stiffness(q, p)).sum();
            o[p] = -2.0 / h * vol + flux[(j + 1) % n] * s * mesh.ref_right_trace()[p]
                - flux[j] * s * mesh.ref_left_trace()[p];
        }
    }
    out
}

fn apply_with(mesh: &Mesh1D, beta: &[f64], phi: &DGField) -> DGField {
    divergence_with(mesh, beta, &gradient_with(mesh, phi), phi)
}
