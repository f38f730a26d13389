//! Exponential filter on the Hermite mode index.

use crate::vlasov::HermiteState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub exponent: f64,
    pub cutoff: f64,
    pub enabled: bool,
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self {
            exponent: 36.0,
            cutoff: 2.0 / 3.0,
            enabled: true,
        }
    }
}

impl FilterSpec {
    pub fn disabled() -> Self {
        Self {
            enabled: false,
            ..Self::default()
        }
    }

    /// The filter needs at least four modes to leave `C_0..C_2` untouched.
    pub fn is_active(&self, n_modes: usize) -> bool {
        self.enabled && n_modes >= 4
    }

    /// Damping factor for every mode.
    pub fn factors(&self, n_modes: usize) -> Vec<f64> {
        if !self.is_active(n_modes) {
            return vec![1.0; n_modes];
        }
        (0..n_modes).map(|n| sigma(n as f64 / n_modes as f64, self)).collect()
    }
}

/// `1` up to the cutoff, `exp(−β |s|^β)` beyond it.
pub fn sigma(s: f64, spec: &FilterSpec) -> f64 {
    let a = s.abs();
    if a <= spec.cutoff {
        1.0
    } else {
        (-spec.exponent * a.powf(spec.exponent)).exp()
    }
}

/// Scales every mode `n` by `σ(n / N_H)` in place.
pub fn apply(state: &mut HermiteState, spec: &FilterSpec) {
    let factors = spec.factors(state.n_modes());
    for (m, f) in state.modes_mut().iter_mut().zip(factors) {
        if f != 1.0 {
            m.scale(f);
        }
    }
}
