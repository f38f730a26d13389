//! Initial conditions for the benchmark families.
//!
//! Every builder returns a state on the given mesh together with the
//! neutralizing background density, so the field equation is compatible
//! from the first step.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{invalid, Error, Result};
use crate::hermite::{
    default_quad_points, gaussian_coefficients, moments, project_velocity, HermiteParams, ModeVector,
};
use crate::mesh::{project_l2, Mesh1D};
use crate::poisson::compute_rho0;
use crate::vlasov::HermiteState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Landau,
    TwoStream,
    BumpOnTail,
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "landau" => Ok(Self::Landau),
            "two_stream" => Ok(Self::TwoStream),
            "bump_on_tail" => Ok(Self::BumpOnTail),
            other => Err(invalid(
                "kind",
                format!("unknown scenario `{other}` (landau, two_stream, bump_on_tail)"),
            )),
        }
    }
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Landau => "landau",
            Self::TwoStream => "two_stream",
            Self::BumpOnTail => "bump_on_tail",
        }
    }
}

/// Bulk plasma plus drifting beam, each a Gaussian
/// `n / (√π w) exp(−(v − u)² / w²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpParams {
    pub bulk_density: f64,
    pub beam_density: f64,
    pub beam_drift: f64,
    pub bulk_width: f64,
    pub beam_width: f64,
    /// The perturbation is `cos(harmonic · k · x)`.
    pub harmonic: u32,
}

impl Default for BumpParams {
    fn default() -> Self {
        Self {
            bulk_density: 0.99,
            beam_density: 0.01,
            beam_drift: 1.0,
            bulk_width: 0.28284271,
            beam_width: 7.0710678e-2,
            harmonic: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub amplitude: f64,
    pub wavenumber: f64,
    pub bump: BumpParams,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind, amplitude: f64, wavenumber: f64) -> Result<Self> {
        if !(wavenumber > 0.0 && wavenumber.is_finite()) {
            return Err(invalid("k", format!("must be positive, got {wavenumber}")));
        }
        if !amplitude.is_finite() {
            return Err(invalid("alpha", "must be finite"));
        }
        Ok(Self {
            kind,
            amplitude,
            wavenumber,
            bump: BumpParams::default(),
        })
    }

    /// `2π / k`
    pub fn domain_length(&self) -> f64 {
        2.0 * PI / self.wavenumber
    }
}

fn modulated(base: &ModeVector, profile: impl Fn(f64) -> f64, mesh: &Mesh1D, params: HermiteParams) -> HermiteState {
    let shape = project_l2(profile, mesh);
    let mut state = HermiteState::zeros(mesh, params);
    for (n, m) in state.modes_mut().iter_mut().enumerate() {
        let c = base[n];
        if c != 0.0 {
            *m = shape.clone();
            m.scale(c);
        }
    }
    state
}

/// `(1 + α cos kx)` times the standard Maxwellian.
pub fn init_landau(alpha: f64, k: f64, mesh: &Mesh1D, params: HermiteParams) -> Result<(HermiteState, f64)> {
    let base = if params.v_scale() == 1.0 {
        ModeVector::unit(params.n_modes(), 0)
    } else {
        gaussian_coefficients(1.0, 0.0, SQRT_2, &params)?
    };
    let state = modulated(&base, |x| 1.0 + alpha * (k * x).cos(), mesh, params);
    let rho0 = compute_rho0(state.mode(0), mesh, &params);
    Ok((state, rho0))
}

/// `(2/7)(1 + 5v²)` times the Maxwellian, modulated by three harmonics.
pub fn init_two_stream(alpha: f64, k: f64, mesh: &Mesh1D, params: HermiteParams) -> Result<(HermiteState, f64)> {
    let base = if params.v_scale() == 1.0 {
        let mut c = vec![0.0; params.n_modes()];
        c[0] = 12.0 / 7.0;
        c[2] = 10.0 * SQRT_2 / 7.0;
        ModeVector::from_vec(c)
    } else {
        let maxwell = |v: f64| (-0.5 * v * v).exp() / (2.0 * PI).sqrt();
        project_velocity(
            |v| 2.0 / 7.0 * (1.0 + 5.0 * v * v) * maxwell(v),
            &params,
            default_quad_points(params.n_modes()),
        )?
    };
    let profile = |x: f64| 1.0 + alpha * (((2.0 * k * x).cos() + (3.0 * k * x).cos()) / 1.2 + (k * x).cos());
    let state = modulated(&base, profile, mesh, params);
    let rho0 = compute_rho0(state.mode(0), mesh, &params);
    Ok((state, rho0))
}

/// Hermite coefficients of the unperturbed bump-on-tail profile, checked
/// against its analytic density, momentum and energy.
pub fn bump_on_tail_coefficients(bump: &BumpParams, params: &HermiteParams) -> Result<ModeVector> {
    if !(bump.bulk_density + bump.beam_density > 0.0) {
        return Err(invalid("n_p", "bulk plus beam density must be positive"));
    }
    let bulk = gaussian_coefficients(bump.bulk_density, 0.0, bump.bulk_width, params)?;
    let beam = gaussian_coefficients(bump.beam_density, bump.beam_drift, bump.beam_width, params)?;
    let coeffs = ModeVector::from_vec(bulk.coeffs().iter().zip(beam.coeffs()).map(|(a, b)| a + b).collect());

    let m = moments(&coeffs, params);
    let density = bump.bulk_density + bump.beam_density;
    let momentum = bump.beam_density * bump.beam_drift;
    let energy = 0.5
        * (bump.bulk_density * bump.bulk_width.powi(2) / 2.0
            + bump.beam_density * (bump.beam_width.powi(2) / 2.0 + bump.beam_drift.powi(2)));
    let checks = [
        ("density", m.density, density),
        ("momentum", m.momentum_density, momentum),
        ("energy", m.energy_density, energy),
    ];
    for (quantity, got, want) in checks {
        let error = (got - want).abs() / want.abs().max(density);
        if !(error <= 1e-8) {
            return Err(Error::ProjectionMismatch { quantity, error });
        }
    }
    Ok(coeffs)
}

pub fn init_bump_on_tail(
    bump: &BumpParams,
    alpha: f64,
    k: f64,
    mesh: &Mesh1D,
    params: HermiteParams,
) -> Result<(HermiteState, f64)> {
    let base = bump_on_tail_coefficients(bump, &params)?;
    let kn = k * f64::from(bump.harmonic);
    let state = modulated(&base, |x| 1.0 + alpha * (kn * x).cos(), mesh, params);
    let rho0 = compute_rho0(state.mode(0), mesh, &params);
    Ok((state, rho0))
}

pub fn initialize(spec: &ScenarioSpec, mesh: &Mesh1D, params: HermiteParams) -> Result<(HermiteState, f64)> {
    let (a, k) = (spec.amplitude, spec.wavenumber);
    match spec.kind {
        ScenarioKind::Landau => init_landau(a, k, mesh, params),
        ScenarioKind::TwoStream => init_two_stream(a, k, mesh, params),
        ScenarioKind::BumpOnTail => init_bump_on_tail(&spec.bump, a, k, mesh, params),
    }
}
