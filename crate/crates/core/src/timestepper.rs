//! Fully discrete conservative integrators.
//!
//! Both schemes advance every mode except `C_2` explicitly, solve the
//! field for the new density, and only then advance `C_2` using the force
//! and residual evaluated with time-averaged fields. This ordering is what
//! makes the discrete total energy an exact invariant.

use crate::diagnostics::{conserved, efield_norms, Baseline, Conserved, DiagnosticsRecord};
use crate::error::{invalid, Error, Result};
use crate::filter::{self, FilterSpec};
use crate::hermite::HermiteParams;
use crate::mesh::Mesh1D;
use crate::poisson::{FieldPair, Penalty, PoissonOperator};
use crate::vlasov::{FluxConfig, HermiteState, VlasovOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Euler,
    Rk2,
}

impl TryFrom<i64> for Order {
    type Error = Error;

    fn try_from(v: i64) -> Result<Self> {
        match v {
            1 => Ok(Self::Euler),
            2 => Ok(Self::Rk2),
            _ => Err(invalid("order", format!("must be 1 or 2, got {v}"))),
        }
    }
}

impl Order {
    pub fn as_int(self) -> i64 {
        match self {
            Self::Euler => 1,
            Self::Rk2 => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    pub cfl: f64,
    pub order: Order,
    pub filter: FilterSpec,
    /// Assemble Hermite modes on the rayon pool.
    pub parallel: bool,
}

impl StepConfig {
    pub fn new(cfl: f64, order: Order, filter: FilterSpec) -> Result<Self> {
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(invalid("cfl", format!("must lie in (0, 1], got {cfl}")));
        }
        Ok(Self {
            cfl,
            order,
            filter,
            parallel: false,
        })
    }
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            cfl: 0.3,
            order: Order::Rk2,
            filter: FilterSpec::default(),
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimTime {
    pub t: f64,
    pub step_index: u64,
    /// Last step size taken (nominal size before the first step).
    pub dt: f64,
}

/// `cfl · h_min / (α (2k + 1))`
pub fn compute_dt(mesh: &Mesh1D, flux: FluxConfig, cfg: &StepConfig) -> f64 {
    cfg.cfl * mesh.h_min() / (flux.alpha * (2 * mesh.degree() + 1) as f64)
}

/// Step size that does not overshoot `target`; `None` once `t` has reached it.
pub fn clip_step(dt: f64, t: f64, target: f64) -> Option<f64> {
    let remaining = target - t;
    if remaining <= 1e-12 * target.abs().max(1.0) {
        None
    } else if remaining <= dt * (1.0 + 1e-10) {
        Some(remaining)
    } else {
        Some(dt)
    }
}

/// Spatial operators plus the background density.
#[derive(Debug, Clone)]
pub struct Stepper {
    vlasov: VlasovOperator,
    poisson: PoissonOperator,
    rho_0: f64,
}

impl Stepper {
    pub fn new(mesh: &Mesh1D, params: HermiteParams, penalty: Penalty, rho_0: f64, parallel: bool) -> Result<Self> {
        let vlasov =
            VlasovOperator::new(mesh, params, FluxConfig::for_params(&params), penalty).with_parallel(parallel);
        let poisson = PoissonOperator::new(mesh, penalty)?;
        Ok(Self { vlasov, poisson, rho_0 })
    }

    pub fn vlasov(&self) -> &VlasovOperator {
        &self.vlasov
    }

    pub fn poisson(&self) -> &PoissonOperator {
        &self.poisson
    }

    pub fn rho_0(&self) -> f64 {
        self.rho_0
    }

    pub fn solve_fields(&self, state: &HermiteState) -> Result<FieldPair> {
        self.poisson.solve(state.mode(0), self.rho_0, state.params())
    }

    /// Explicit sub-step of size `dt` from `base` using the derivative at
    /// `eval`; `C_2` receives its force from `stage_state` with the average
    /// of `fields_start` and the new fields.
    fn staged_update(
        &self,
        base: &HermiteState,
        stage_state: &HermiteState,
        stage_fields: &FieldPair,
        fields_start: &FieldPair,
        dt: f64,
    ) -> Result<(HermiteState, FieldPair)> {
        let d = self.vlasov.rhs(stage_state, stage_fields, true)?;
        let mut next = base.clone();
        next.axpy(dt, &d);
        let fields_next = self.solve_fields(&next)?;
        let mid = FieldPair::average(fields_start, &fields_next);
        let src = self.vlasov.source_form(2, stage_state, &mid);
        next.mode_mut(2).axpy(dt, &src);
        Ok((next, fields_next))
    }

    pub fn step_euler(&self, state: &HermiteState, fields: &FieldPair, dt: f64) -> Result<(HermiteState, FieldPair)> {
        self.staged_update(state, state, fields, fields, dt)
    }

    pub fn step_rk2(&self, state: &HermiteState, fields: &FieldPair, dt: f64) -> Result<(HermiteState, FieldPair)> {
        let (half, half_fields) = self.staged_update(state, state, fields, fields, 0.5 * dt)?;
        self.staged_update(state, &half, &half_fields, fields, dt)
    }

    pub fn step(
        &self,
        order: Order,
        state: &HermiteState,
        fields: &FieldPair,
        dt: f64,
    ) -> Result<(HermiteState, FieldPair)> {
        match order {
            Order::Euler => self.step_euler(state, fields, dt),
            Order::Rk2 => self.step_rk2(state, fields, dt),
        }
    }
}

/// A running simulation: state, fields, clock and the `t = 0` invariants.
#[derive(Debug, Clone)]
pub struct Simulation {
    mesh: Mesh1D,
    stepper: Stepper,
    cfg: StepConfig,
    state: HermiteState,
    fields: FieldPair,
    time: SimTime,
    baseline: Baseline,
}

impl Simulation {
    pub fn new(mesh: &Mesh1D, state: HermiteState, rho_0: f64, penalty: Penalty, cfg: StepConfig) -> Result<Self> {
        let params = *state.params();
        let stepper = Stepper::new(mesh, params, penalty, rho_0, cfg.parallel)?;
        let fields = stepper.solve_fields(&state)?;
        let dt = compute_dt(mesh, stepper.vlasov.flux(), &cfg);
        let initial = conserved(&state, &fields, mesh, stepper.vlasov.interface_penalties());
        Ok(Self {
            mesh: mesh.clone(),
            stepper,
            cfg,
            state,
            fields,
            time: SimTime {
                t: 0.0,
                step_index: 0,
                dt,
            },
            baseline: Baseline::new(&initial, params.v_scale()),
        })
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn state(&self) -> &HermiteState {
        &self.state
    }

    pub fn fields(&self) -> &FieldPair {
        &self.fields
    }

    pub fn time(&self) -> SimTime {
        self.time
    }

    pub fn config(&self) -> &StepConfig {
        &self.cfg
    }

    pub fn stepper(&self) -> &Stepper {
        &self.stepper
    }

    pub fn nominal_dt(&self) -> f64 {
        compute_dt(&self.mesh, self.stepper.vlasov.flux(), &self.cfg)
    }

    pub fn conserved(&self) -> Conserved {
        conserved(
            &self.state,
            &self.fields,
            &self.mesh,
            self.stepper.vlasov.interface_penalties(),
        )
    }

    pub fn diagnostics(&self) -> DiagnosticsRecord {
        let norms = efield_norms(&self.fields.e, &self.mesh);
        self.baseline.record(self.time.t, &self.conserved(), norms)
    }

    /// One step of size `dt`, followed by the filter.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let (mut next, fields) = self.stepper.step(self.cfg.order, &self.state, &self.fields, dt)?;
        filter::apply(&mut next, &self.cfg.filter);
        let step = self.time.step_index + 1;
        if let Some(mode) = next.first_non_finite() {
            return Err(Error::NonFinite { step, mode });
        }
        self.state = next;
        self.fields = fields;
        self.time = SimTime {
            t: self.time.t + dt,
            step_index: step,
            dt,
        };
        Ok(())
    }

    /// Steps until `t_end` is reached exactly, calling `on_step` after each step.
    pub fn advance_to(&mut self, t_end: f64, mut on_step: impl FnMut(&Simulation)) -> Result<()> {
        if !(t_end >= self.time.t) {
            return Err(invalid(
                "t_end",
                format!("{t_end} lies before the current time {}", self.time.t),
            ));
        }
        let dt_nominal = self.nominal_dt();
        while let Some(dt) = clip_step(dt_nominal, self.time.t, t_end) {
            let last = dt < dt_nominal;
            self.step(dt)?;
            if last || clip_step(dt_nominal, self.time.t, t_end).is_none() {
                self.time.t = t_end;
            }
            on_step(self);
        }
        self.time.t = t_end;
        Ok(())
    }
}

/// Runs to `t_end` and returns every record, starting with the initial one.
pub fn advance(sim: &mut Simulation, t_end: f64) -> Result<Vec<DiagnosticsRecord>> {
    let mut records = vec![sim.diagnostics()];
    sim.advance_to(t_end, |s| records.push(s.diagnostics()))?;
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::project_l2;
    use crate::poisson::compute_rho0;
    use std::f64::consts::PI;

    fn landau(n_cells: usize, degree: usize, n_modes: usize, alpha: f64, order: Order) -> Simulation {
        let mesh = Mesh1D::uniform(0.0, 4.0 * PI, n_cells, degree).unwrap();
        let params = HermiteParams::new(n_modes, 1.0).unwrap();
        let mut s = HermiteState::zeros(&mesh, params);
        *s.mode_mut(0) = project_l2(|x| 1.0 + alpha * (0.5 * x).cos(), &mesh);
        let rho0 = compute_rho0(s.mode(0), &mesh, &params);
        let cfg = StepConfig {
            order,
            ..StepConfig::default()
        };
        Simulation::new(&mesh, s, rho0, Penalty::Constant(1.0), cfg).unwrap()
    }

    #[test]
    fn dt_examples() {
        let mesh = Mesh1D::uniform(0.0, 1.0, 10, 0).unwrap();
        let cfg = StepConfig::new(0.1, Order::Euler, FilterSpec::disabled()).unwrap();
        let dt = compute_dt(&mesh, FluxConfig { alpha: 2.0 }, &cfg);
        assert!((dt - 0.005).abs() < 1e-17);
        let p = |n| FluxConfig::for_params(&HermiteParams::new(n, 1.0).unwrap());
        let ratio = compute_dt(&mesh, p(32), &cfg) / compute_dt(&mesh, p(16), &cfg);
        assert!((ratio - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!(StepConfig::new(0.0, Order::Euler, FilterSpec::default()).is_err());
        assert!(Order::try_from(3).is_err());
    }

    #[test]
    fn clipping_lands_on_target() {
        assert_eq!(clip_step(0.3, 0.0, 1.0), Some(0.3));
        let r = clip_step(0.3, 0.9, 1.0).unwrap();
        assert!((r - 0.1).abs() < 1e-15);
        assert_eq!(clip_step(0.3, 1.0, 1.0), None);
    }

    #[test]
    fn zero_end_time_gives_single_record() {
        let mut sim = landau(8, 2, 8, 0.01, Order::Rk2);
        let recs = advance(&mut sim, 0.0).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].max_abs_deviation(), 0.0);
    }

    #[test]
    fn quiescent_state_is_unchanged() {
        let mut sim = landau(8, 2, 8, 0.0, Order::Euler);
        let before = sim.state().clone();
        sim.advance_to(0.5, |_| {}).unwrap();
        for (a, b) in before.modes().iter().zip(sim.state().modes()) {
            for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                assert!((x - y).abs() < 1e-14);
            }
        }
        assert!(sim.fields().e.coeffs().iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn single_steps_conserve() {
        for order in [Order::Euler, Order::Rk2] {
            let mut sim = landau(16, 2, 16, 0.2, order);
            let c0 = sim.conserved();
            for _ in 0..5 {
                let dt = sim.nominal_dt();
                sim.step(dt).unwrap();
                let c = sim.conserved();
                assert!(((c.mass - c0.mass) / c0.mass).abs() < 1e-14, "{order:?}");
                assert!((c.momentum - c0.momentum).abs() / c0.mass < 1e-14, "{order:?}");
                assert!(((c.energy - c0.energy) / c0.energy).abs() < 1e-13, "{order:?}");
            }
            // the invariants are exact for any step size
            let big = 5.0 * sim.nominal_dt();
            sim.step(big).unwrap();
            let c = sim.conserved();
            assert!(((c.energy - c0.energy) / c0.energy).abs() < 1e-13);
        }
    }

    #[test]
    fn final_time_is_exact_and_serial_runs_repeat() {
        let mut a = landau(8, 1, 8, 0.05, Order::Rk2);
        let mut b = landau(8, 1, 8, 0.05, Order::Rk2);
        let ra = advance(&mut a, 0.77).unwrap();
        let rb = advance(&mut b, 0.77).unwrap();
        assert_eq!(a.time().t, 0.77);
        assert_eq!(ra.last().unwrap().t, 0.77);
        assert!(ra.windows(2).all(|w| w[1].t > w[0].t));
        assert_eq!(ra, rb);
        assert_eq!(a.state(), b.state());
    }

    #[test]
    fn second_order_in_time() {
        // self-convergence at fixed mesh: halve dt twice
        let run = |n_steps: usize| {
            let mut sim = landau(8, 2, 8, 0.1, Order::Rk2);
            let dt = 0.4 / n_steps as f64;
            for _ in 0..n_steps {
                sim.step(dt).unwrap();
            }
            sim.state().clone()
        };
        let (a, b, c) = (run(10), run(20), run(40));
        let dist = |x: &HermiteState, y: &HermiteState| {
            x.modes()
                .iter()
                .zip(y.modes())
                .map(|(p, q)| {
                    p.coeffs()
                        .iter()
                        .zip(q.coeffs())
                        .map(|(u, v)| (u - v).powi(2))
                        .sum::<f64>()
                })
                .sum::<f64>()
                .sqrt()
        };
        let ratio = dist(&a, &b) / dist(&b, &c);
        assert!(ratio > 3.5 && ratio < 4.5, "{ratio}");
    }

    #[test]
    fn non_finite_state_aborts_with_step() {
        let mesh = Mesh1D::uniform(0.0, 1.0, 4, 1).unwrap();
        let params = HermiteParams::new(8, 1.0).unwrap();
        let mut s = HermiteState::zeros(&mesh, params);
        *s.mode_mut(0) = project_l2(|_| 1.0, &mesh);
        s.mode_mut(6).coeffs_mut()[2] = f64::INFINITY;
        let mut sim = Simulation::new(&mesh, s, 1.0, Penalty::Constant(1.0), StepConfig::default()).unwrap();
        let err = sim.advance_to(1.0, |_| {}).unwrap_err();
        assert!(matches!(err, Error::NonFinite { step: 1, mode: 4 }), "{err}");
    }
}
