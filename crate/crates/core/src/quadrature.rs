//! Gauss–Legendre and Gauss–Hermite rules.
//!
//! Legendre rules are used for cell integrals on the reference interval
//! `[-1, 1]`. Hermite rules are used for velocity projection; they are
//! built for thousands of nodes, so every quantity that can overflow
//! (`e^{x²}`, high-degree polynomial values) is carried in log form.

use crate::error::{invalid, Result};

/// Gauss–Legendre rule on `[-1, 1]`, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("quad_order", "need at least one node"));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        // P_n'(±1) = (±1)^{n-1} n(n+1)/2
        let s = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        s * (n * (n + 1)) as f64 / 2.0
    } else {
        n as f64 * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

/// Gauss–Hermite rule expressed in the probabilists' variable `ξ`.
///
/// `∫ g(ξ) dξ ≈ Σ exp(log_weight[i]) g(node[i])` for integrands that decay
/// like a Gaussian; the weight already contains the `e^{ξ²/2}` factor of
/// the standard rule, so callers never form it explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub log_weights: Vec<f64>,
}

const RESCALE_ABOVE: f64 = 1e150;

impl GaussHermite {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("quad_points", "need at least one node"));
        }
        // Golub–Welsch eigenvalues of the physicists' Jacobi matrix, then
        // Newton polish on the orthonormal recurrence.
        let mut diag = vec![0.0; n];
        let mut off: Vec<f64> = (1..=n).map(|j| (j as f64 / 2.0).sqrt()).collect();
        off[n - 1] = 0.0;
        symmetric_tridiagonal_eigenvalues(&mut diag, &mut off)?;
        diag.sort_by(f64::total_cmp);

        let half_ln2 = 0.5 * std::f64::consts::LN_2;
        let mut nodes = Vec::with_capacity(n);
        let mut log_weights = Vec::with_capacity(n);
        for &guess in &diag {
            let mut x = guess;
            for _ in 0..8 {
                let (p, pp, _) = orthonormal_hermite_physicist(n, x);
                let dx = p / pp;
                x -= dx;
                if dx.abs() <= 1e-15 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, pp, log_scale) = orthonormal_hermite_physicist(n, x);
            // w e^{x²} = 2 e^{x²} / pp², then change of variable ξ = √2 x.
            let ln_w = std::f64::consts::LN_2 - 2.0 * (pp.abs().ln() + log_scale) + x * x;
            nodes.push(std::f64::consts::SQRT_2 * x);
            log_weights.push(ln_w + half_ln2);
        }
        Ok(Self { nodes, log_weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫ g(ξ) dξ` for a Gaussian-decaying integrand.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.log_weights)
            .map(|(&xi, &lw)| {
                let v = g(xi);
                if v == 0.0 {
                    0.0
                } else {
                    v.signum() * (v.abs().ln() + lw).exp()
                }
            })
            .sum()
    }
}

/// Orthonormal physicists' Hermite recurrence (weight `e^{-x²}`).
///
/// Returns `(p_n mantissa, p_n' mantissa, log scale)`; true values are
/// `mantissa * e^{log scale}`.
fn orthonormal_hermite_physicist(n: usize, x: f64) -> (f64, f64, f64) {
    let mut p_prev = 0.0;
    let mut p = std::f64::consts::PI.powf(-0.25);
    let mut log_scale = 0.0;
    for j in 1..=n {
        let jf = j as f64;
        let next = x * (2.0 / jf).sqrt() * p - ((jf - 1.0) / jf).sqrt() * p_prev;
        p_prev = p;
        p = next;
        if p.abs() > RESCALE_ABOVE {
            p /= RESCALE_ABOVE;
            p_prev /= RESCALE_ABOVE;
            log_scale += RESCALE_ABOVE.ln();
        }
    }
    let pp = (2.0 * n as f64).sqrt() * p_prev;
    (p, pp, log_scale)
}

/// Implicit QL eigenvalues of a symmetric tridiagonal matrix.
///
/// `diag` is overwritten with the eigenvalues; `off[i]` couples rows
/// `i` and `i + 1` and `off[n-1]` must be zero.
fn symmetric_tridiagonal_eigenvalues(diag: &mut [f64], off: &mut [f64]) -> Result<()> {
    let n = diag.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 200 {
                return Err(invalid(
                    "quad_points",
                    "tridiagonal eigenvalue iteration did not converge",
                ));
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}
