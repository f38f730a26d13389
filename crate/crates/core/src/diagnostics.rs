//! Conserved quantities, field norms and growth/damping rate fits.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::mesh::{integrate, traces, DGField, Mesh1D};
use crate::poisson::FieldPair;
use crate::vlasov::HermiteState;

const DEV_FLOOR: f64 = 1e-300;

/// Discrete invariants of one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conserved {
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
    pub kinetic: f64,
    /// `½ ‖E‖²`
    pub field_energy: f64,
    /// `½ Σ β_f [Φ]²`
    pub phi_jump_energy: f64,
}

/// Mass `v_th ∫C_0`, momentum `v_th² ∫C_1` and total energy
/// `½∫ v_th³(√2 C_2 + C_0) + E² dx + ½ Σ β_f [Φ]²`.
pub fn conserved(state: &HermiteState, fields: &FieldPair, mesh: &Mesh1D, beta: &[f64]) -> Conserved {
    let vs = state.params().v_scale();
    let i0 = integrate(state.mode(0), mesh);
    let i1 = integrate(state.mode(1), mesh);
    let i2 = integrate(state.mode(2), mesh);
    let kinetic = 0.5 * vs.powi(3) * (SQRT_2 * i2 + i0);
    let field_energy = 0.5 * fields.e.dot(&fields.e);
    let phi = traces(&fields.phi, mesh);
    let phi_jump_energy = 0.5 * (0..mesh.n_cells()).map(|i| beta[i] * phi.jump(i).powi(2)).sum::<f64>();
    Conserved {
        mass: vs * i0,
        momentum: vs * vs * i1,
        energy: kinetic + field_energy + phi_jump_energy,
        kinetic,
        field_energy,
        phi_jump_energy,
    }
}

/// `(‖E‖_2, max |E|)`; the maximum is sampled at quadrature nodes and cell ends.
pub fn efield_norms(e: &DGField, mesh: &Mesh1D) -> (f64, f64) {
    let l2 = e.dot(e).sqrt();
    let mut linf = 0.0f64;
    for j in 0..mesh.n_cells() {
        let (l, r) = e.cell_traces(mesh, j);
        linf = linf.max(l.abs()).max(r.abs());
        for q in 0..mesh.quad_order() {
            linf = linf.max(e.value_at_quad(mesh, j, q).abs());
        }
    }
    (l2, linf)
}

/// One row of the time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
    pub mass_dev: f64,
    /// Normalized by the initial `mass · v_th`.
    pub momentum_dev: f64,
    pub energy_dev: f64,
    pub e_l2: f64,
    pub e_max: f64,
    pub phi_jump_energy: f64,
}

impl DiagnosticsRecord {
    pub fn max_abs_deviation(&self) -> f64 {
        self.mass_dev
            .abs()
            .max(self.momentum_dev.abs())
            .max(self.energy_dev.abs())
    }
}

/// Reference values at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Baseline {
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
    pub v_scale: f64,
}

impl Baseline {
    pub fn new(initial: &Conserved, v_scale: f64) -> Self {
        Self {
            mass: initial.mass,
            momentum: initial.momentum,
            energy: initial.energy,
            v_scale,
        }
    }

    pub fn record(&self, t: f64, c: &Conserved, norms: (f64, f64)) -> DiagnosticsRecord {
        DiagnosticsRecord {
            t,
            mass: c.mass,
            momentum: c.momentum,
            energy: c.energy,
            mass_dev: (c.mass - self.mass) / self.mass.abs().max(DEV_FLOOR),
            momentum_dev: (c.momentum - self.momentum) / (self.mass.abs() * self.v_scale).max(DEV_FLOOR),
            energy_dev: (c.energy - self.energy) / self.energy.abs().max(DEV_FLOOR),
            e_l2: norms.0,
            e_max: norms.1,
            phi_jump_energy: c.phi_jump_energy,
        }
    }
}

/// Least-squares slope of `log_norm` against `t` through the local maxima
/// inside `window`.
///
/// A series without interior extrema (pure growth or decay) is fitted
/// through all samples in the window.
pub fn fit_rate(series: &[(f64, f64)], window: (f64, f64)) -> Result<f64> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|&(t, y)| t >= window.0 && t <= window.1 && y.is_finite())
        .collect();
    let monotone = pts.windows(2).all(|w| w[1].1 >= w[0].1) || pts.windows(2).all(|w| w[1].1 <= w[0].1);
    let fit_points: Vec<(f64, f64)> = if monotone {
        pts.clone()
    } else {
        pts.windows(3)
            .filter(|w| w[1].1 >= w[0].1 && w[1].1 >= w[2].1 && (w[1].1 > w[0].1 || w[1].1 > w[2].1))
            .map(|w| w[1])
            .collect()
    };
    if fit_points.len() < 2 {
        return Err(Error::TooFewPeaks {
            found: fit_points.len(),
        });
    }
    Ok(least_squares_slope(&fit_points))
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::HermiteParams;
    use crate::mesh::project_l2;
    use std::f64::consts::PI;

    #[test]
    fn quiescent_maxwellian() {
        let mesh = Mesh1D::uniform(0.0, 4.0 * PI, 8, 2).unwrap();
        let mut s = HermiteState::zeros(&mesh, HermiteParams::new(4, 1.0).unwrap());
        *s.mode_mut(0) = project_l2(|_| 1.0, &mesh);
        let c = conserved(&s, &FieldPair::zeros(&mesh), &mesh, &[1.0; 8]);
        assert!((c.mass - 4.0 * PI).abs() < 1e-13);
        assert_eq!(c.momentum, 0.0);
        assert!((c.energy - 2.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn two_stream_totals() {
        let mesh = Mesh1D::uniform(0.0, 4.0 * PI, 8, 2).unwrap();
        let mut s = HermiteState::zeros(&mesh, HermiteParams::new(4, 1.0).unwrap());
        *s.mode_mut(0) = project_l2(|_| 12.0 / 7.0, &mesh);
        *s.mode_mut(2) = project_l2(|_| 10.0 * SQRT_2 / 7.0, &mesh);
        let c = conserved(&s, &FieldPair::zeros(&mesh), &mesh, &[1.0; 8]);
        assert!((c.mass - 48.0 * PI / 7.0).abs() < 1e-12);
        assert!((c.kinetic - 64.0 * PI / 7.0).abs() < 1e-12);
    }

    #[test]
    fn constant_potential_shift_keeps_energy() {
        let mesh = Mesh1D::uniform(0.0, 1.0, 6, 1).unwrap();
        let mut s = HermiteState::zeros(&mesh, HermiteParams::new(4, 1.0).unwrap());
        *s.mode_mut(0) = project_l2(|x| 1.0 + x, &mesh);
        let pair = FieldPair::new(project_l2(|x| (5.0 * x).sin(), &mesh), project_l2(|x| x * x, &mesh));
        let shifted = FieldPair::new(pair.e.clone(), project_l2(|x| x * x + 3.0, &mesh));
        let a = conserved(&s, &pair, &mesh, &[0.7; 6]);
        let b = conserved(&s, &shifted, &mesh, &[0.7; 6]);
        assert!((a.energy - b.energy).abs() < 1e-14);
        assert!(a.phi_jump_energy > 0.0);
    }

    #[test]
    fn sine_field_norms() {
        let mesh = Mesh1D::uniform(0.0, 2.0 * PI, 64, 3).unwrap();
        let e = project_l2(|x| x.sin(), &mesh);
        let (l2, linf) = efield_norms(&e, &mesh);
        assert!((l2 - PI.sqrt()).abs() < 1e-8);
        assert!((linf - 1.0).abs() < 1e-4);
        let mut e3 = e.clone();
        e3.scale(-3.0);
        let (l2b, linfb) = efield_norms(&e3, &mesh);
        assert!((l2b - 3.0 * l2).abs() < 1e-13);
        assert!((linfb - 3.0 * linf).abs() < 1e-13);
        assert_eq!(efield_norms(&DGField::zeros(&mesh), &mesh), (0.0, 0.0));
    }

    #[test]
    fn momentum_deviation_uses_mass_scale() {
        let base = Baseline {
            mass: 2.0,
            momentum: 0.0,
            energy: 4.0,
            v_scale: 0.5,
        };
        let c = Conserved {
            mass: 2.0,
            momentum: 1e-3,
            energy: 4.0,
            kinetic: 4.0,
            field_energy: 0.0,
            phi_jump_energy: 0.0,
        };
        let r = base.record(1.0, &c, (0.0, 0.0));
        assert!((r.momentum_dev - 1e-3).abs() < 1e-18);
        assert_eq!(r.mass_dev, 0.0);
    }

    #[test]
    fn damped_oscillation_rate() {
        let series: Vec<(f64, f64)> = (0..4000)
            .map(|i| {
                let t = i as f64 * 0.01;
                (t, -0.1533 * t + (1.4156 * t).cos().abs().ln())
            })
            .collect();
        let rate = fit_rate(&series, (2.0, 25.0)).unwrap();
        assert!((rate + 0.1533).abs() < 1e-3, "{rate}");
    }

    #[test]
    fn constant_and_growing_series() {
        let flat: Vec<(f64, f64)> = (0..100).map(|i| (i as f64 * 0.1, -3.0)).collect();
        assert_eq!(fit_rate(&flat, (0.0, 10.0)).unwrap(), 0.0);
        let grow: Vec<(f64, f64)> = (0..600)
            .map(|i| (i as f64 * 0.1, 0.1084353 * i as f64 * 0.1 - 9.0))
            .collect();
        let rate = fit_rate(&grow, (5.0, 50.0)).unwrap();
        assert!((rate - 0.1084353).abs() < 1e-3);
    }

    #[test]
    fn too_few_peaks() {
        let series: Vec<(f64, f64)> = (0..100).map(|i| (i as f64 * 0.1, (i as f64 * 0.1).sin())).collect();
        assert!(matches!(
            fit_rate(&series, (0.0, 5.0)),
            Err(Error::TooFewPeaks { found: 1 })
        ));
    }
}
