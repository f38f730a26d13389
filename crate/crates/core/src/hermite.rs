//! Normalized, scaled, asymmetrically weighted Hermite basis in velocity.
//!
//! The basis functions are
//! `Ψ_n(v) = H_n(v / v_th) · exp(-v² / 2v_th²) / √(2π)` where `H_n` obeys
//! `√n H_n(ξ) = ξ H_{n-1}(ξ) - √(n-1) H_{n-2}(ξ)` with `H_{-1} = 0`,
//! `H_0 = 1`. These `H_n` are orthonormal against the standard normal
//! density, so `∫ Ψ_n(v) H_m(v / v_th) dv = v_th δ_{nm}` and the expansion
//! coefficients of a velocity profile are
//! `C_m = (1 / v_th) ∫ f(v) H_m(v / v_th) dv`.

use crate::error::{invalid, Error, Result};
use crate::quadrature::GaussHermite;
use std::f64::consts::{PI, SQRT_2};

const RESCALE_ABOVE: f64 = 1e150;

/// Number of modes and velocity scale of the expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteParams {
    n_modes: usize,
    v_scale: f64,
}

impl HermiteParams {
    pub fn new(n_modes: usize, v_scale: f64) -> Result<Self> {
        if n_modes < 3 {
            return Err(invalid("n_modes", format!("need at least 3 modes, got {n_modes}")));
        }
        if !(v_scale > 0.0 && v_scale.is_finite()) {
            return Err(invalid("v_scale", format!("must be positive, got {v_scale}")));
        }
        Ok(Self { n_modes, v_scale })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn v_scale(&self) -> f64 {
        self.v_scale
    }
}

/// Hermite coefficients `C_n` at a single spatial location.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeVector(Vec<f64>);

impl ModeVector {
    pub fn zeros(n_modes: usize) -> Self {
        Self(vec![0.0; n_modes])
    }

    pub fn from_vec(coeffs: Vec<f64>) -> Self {
        Self(coeffs)
    }

    pub fn unit(n_modes: usize, n: usize) -> Self {
        let mut v = Self::zeros(n_modes);
        v.0[n] = 1.0;
        v
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for ModeVector {
    type Output = f64;
    fn index(&self, n: usize) -> &f64 {
        &self.0[n]
    }
}

/// `H_n(ξ)` by forward recurrence.
pub fn hermite_eval(n: usize, xi: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for j in 1..=n {
        let jf = j as f64;
        let next = (xi * cur - (jf - 1.0).sqrt() * prev) / jf.sqrt();
        prev = cur;
        cur = next;
    }
    cur
}

/// Calls `visit(n, H_n(ξ) · e^{shift})` for `n < n_modes`.
///
/// The recurrence is carried with a running log scale so very high degrees
/// combined with large `|ξ|` neither overflow nor lose the Gaussian factor
/// supplied through `shift`.
fn for_each_hermite_scaled(n_modes: usize, xi: f64, shift: f64, mut visit: impl FnMut(usize, f64)) {
    let (mut prev, mut cur) = (0.0_f64, 1.0_f64);
    let mut log_scale = 0.0;
    let mut factor = shift.exp();
    for n in 0..n_modes {
        if n > 0 {
            let nf = n as f64;
            let next = (xi * cur - (nf - 1.0).sqrt() * prev) / nf.sqrt();
            prev = cur;
            cur = next;
            if cur.abs() > RESCALE_ABOVE {
                cur /= RESCALE_ABOVE;
                prev /= RESCALE_ABOVE;
                log_scale += RESCALE_ABOVE.ln();
                factor = (shift + log_scale).exp();
            }
        }
        visit(n, cur * factor);
    }
}

/// `Ψ_n(v)`.
pub fn psi_eval(n: usize, v: f64, params: &HermiteParams) -> f64 {
    let xi = v / params.v_scale;
    let mut out = 0.0;
    for_each_hermite_scaled(n + 1, xi, gaussian_log_factor(xi), |m, val| {
        if m == n {
            out = val;
        }
    });
    out
}

fn gaussian_log_factor(xi: f64) -> f64 {
    -0.5 * xi * xi - 0.5 * (2.0 * PI).ln()
}

/// Default Gauss–Hermite size for projecting onto `n_modes` modes.
pub fn default_quad_points(n_modes: usize) -> usize {
    (4 * n_modes).max(200)
}

/// Projects a velocity profile onto the basis by Gauss–Hermite quadrature
/// in `ξ = v / v_th`.
pub fn project_velocity(f_v: impl Fn(f64) -> f64, params: &HermiteParams, quad_points: usize) -> Result<ModeVector> {
    let rule = GaussHermite::new(quad_points)?;
    project_velocity_with_rule(f_v, params, &rule)
}

/// Same as [`project_velocity`] with a prebuilt rule.
pub fn project_velocity_with_rule(
    f_v: impl Fn(f64) -> f64,
    params: &HermiteParams,
    rule: &GaussHermite,
) -> Result<ModeVector> {
    let n_modes = params.n_modes;
    if rule.len() < n_modes {
        return Err(Error::QuadratureTooSmall {
            points: rule.len(),
            modes: n_modes,
        });
    }
    let mut out = vec![0.0; n_modes];
    for (&xi, &lw) in rule.nodes.iter().zip(&rule.log_weights) {
        let fv = f_v(params.v_scale * xi);
        if fv == 0.0 || !fv.is_finite() {
            continue;
        }
        let sign = fv.signum();
        for_each_hermite_scaled(n_modes, xi, fv.abs().ln() + lw, |m, val| {
            out[m] += sign * val;
        });
    }
    Ok(ModeVector(out))
}

/// Exact coefficients of `density / (√π width) · exp(-(v - drift)² / width²)`.
///
/// Under the standard-normal weight, the generating function of `H_m` gives
/// `E[H_m(X)]` for `X ~ N(μ, s²)` through
/// `√m r_m = μ r_{m-1} + (s² - 1) √(m-1) r_{m-2}`.
pub fn gaussian_coefficients(density: f64, drift: f64, width: f64, params: &HermiteParams) -> Result<ModeVector> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(invalid("width", format!("must be positive, got {width}")));
    }
    let vs = params.v_scale;
    let mu = drift / vs;
    let a = width * width / (2.0 * vs * vs) - 1.0;
    let mass = density / vs;
    let mut out = Vec::with_capacity(params.n_modes);
    let (mut prev, mut cur) = (0.0, 1.0);
    for m in 0..params.n_modes {
        if m > 0 {
            let mf = m as f64;
            let next = (mu * cur + a * (mf - 1.0).sqrt() * prev) / mf.sqrt();
            prev = cur;
            cur = next;
        }
        out.push(mass * cur);
    }
    Ok(ModeVector(out))
}

/// `Σ_n C_n Ψ_n(v)`.
pub fn reconstruct(coeffs: &ModeVector, v: f64, params: &HermiteParams) -> f64 {
    reconstruct_slice(coeffs.coeffs(), v, params.v_scale)
}

pub(crate) fn reconstruct_slice(coeffs: &[f64], v: f64, v_scale: f64) -> f64 {
    let xi = v / v_scale;
    let mut sum = 0.0;
    for_each_hermite_scaled(coeffs.len(), xi, gaussian_log_factor(xi), |n, psi| {
        sum += coeffs[n] * psi;
    });
    sum
}

/// Density, momentum density and kinetic energy density carried by modes 0–2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub density: f64,
    pub momentum_density: f64,
    pub energy_density: f64,
}

pub fn moments(coeffs: &ModeVector, params: &HermiteParams) -> Moments {
    let vs = params.v_scale;
    let c = coeffs.coeffs();
    Moments {
        density: vs * c[0],
        momentum_density: vs * vs * c[1],
        energy_density: 0.5 * vs.powi(3) * (SQRT_2 * c[2] + c[0]),
    }
}
