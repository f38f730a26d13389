use std::f64::consts::PI;
use std::io::Write;

use proptest::collection::vec;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use hermite_vlasov::app::{build_simulation, converge};
use hermite_vlasov::config::RunConfig;
use hermite_vlasov::diagnostics::fit_rate;
use hermite_vlasov::filter::{self, sigma, FilterSpec};
use hermite_vlasov::hermite::{hermite_eval, psi_eval, HermiteParams};
use hermite_vlasov::mesh::{evaluate, integrate, project_l2, traces, DGField, Mesh1D};
use hermite_vlasov::poisson::{compute_rho0, FieldPair, Penalty, PoissonOperator};
use hermite_vlasov::timestepper::advance;
use hermite_vlasov::vlasov::{FluxConfig, HermiteState, VlasovOperator};

fn report(name: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "{status} {name}: {detail}");
}

fn config(text: &str) -> RunConfig {
    RunConfig::from_toml_str(text).expect("valid acceptance config")
}

#[test]
fn conservation_to_roundoff_weak_landau() {
    let cfg = config(
        "[scenario]\nkind = \"landau\"\nalpha = 0.01\nk = 0.5\n\n\
         [numerics]\nn_cells = 32\ndegree = 2\nn_modes = 64\norder = 2\nt_end = 20.0\n",
    );
    let mut sim = build_simulation(&cfg, true).unwrap();
    let records = advance(&mut sim, cfg.numerics.t_end).unwrap();
    let worst = |f: fn(&hermite_vlasov::diagnostics::DiagnosticsRecord) -> f64| {
        records.iter().map(|r| f(r).abs()).fold(0.0, f64::max)
    };
    let (m, p, e) = (
        worst(|r| r.mass_dev),
        worst(|r| r.momentum_dev),
        worst(|r| r.energy_dev),
    );
    let max = m.max(p).max(e);
    let pass = max <= 1e-11;
    report(
        "conservation, weak Landau 32x64 P2 RK2 T=20",
        pass,
        &format!(
            "mass {m:.2e} momentum {p:.2e} energy {e:.2e} (limit 1e-11, {} steps)",
            records.len() - 1
        ),
    );
    assert!(pass);
}

#[test]
fn momentum_floor_two_stream() {
    let cfg = config(
        "[scenario]\nkind = \"two_stream\"\nalpha = 0.01\nk = 0.5\n\n\
         [numerics]\nn_cells = 32\nn_modes = 64\nt_end = 20.0\n",
    );
    let mut sim = build_simulation(&cfg, true).unwrap();
    let records = advance(&mut sim, cfg.numerics.t_end).unwrap();
    let p = records.iter().map(|r| r.momentum_dev.abs()).fold(0.0, f64::max);
    let pass = p <= 1e-12;
    report(
        "momentum floor, two-stream 32x64 T=20",
        pass,
        &format!("max |momentum deviation| {p:.2e} (limit 1e-12)"),
    );
    assert!(pass);
}

#[test]
fn spatial_convergence_orders() {
    let cfg = config(
        "[scenario]\nkind = \"landau\"\nalpha = 0.05\nk = 0.5\n\n\
         [numerics]\nn_modes = 64\nt_end = 0.1\n\n\
         [convergence]\ncells = [32, 64, 128]\ndegrees = [1, 2, 3]\nreference_cells = 256\n",
    );
    let rows = converge(&cfg, true).unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for (degree, bound) in [(1, 1.7), (2, 2.8), (3, 3.5)] {
        let orders: Vec<f64> = rows
            .iter()
            .filter(|r| r.degree == degree)
            .filter_map(|r| r.order_c0)
            .collect();
        let ok = orders.len() == 2 && orders.iter().all(|&o| o >= bound);
        pass &= ok;
        let list: Vec<String> = orders.iter().map(|o| format!("{o:.2}")).collect();
        detail.push(format!("P{degree} [{}] (>= {bound})", list.join(", ")));
    }
    report(
        "convergence orders, Landau T=0.1 N_H=64 vs 256 cells at degree+1",
        pass,
        &detail.join("; "),
    );
    assert!(pass);
}

#[test]
fn weak_landau_damping_rate() {
    let cfg = config(
        "[scenario]\nkind = \"landau\"\nalpha = 0.01\nk = 0.5\n\n\
         [numerics]\nn_cells = 64\nn_modes = 128\nt_end = 30.0\nfilter = true\n",
    );
    let mut sim = build_simulation(&cfg, true).unwrap();
    let records = advance(&mut sim, cfg.numerics.t_end).unwrap();
    let series: Vec<(f64, f64)> = records.iter().map(|r| (r.t, r.e_l2.ln())).collect();
    let rate = fit_rate(&series, (2.0, 25.0)).unwrap();
    let target = -0.1533;
    let rel = (rate - target).abs() / target.abs();
    let pass = rel <= 0.05;
    report(
        "weak Landau damping rate 64x128 T=30",
        pass,
        &format!(
            "fitted {rate:.5} vs {target} (relative error {:.2}%, limit 5%)",
            rel * 100.0
        ),
    );
    assert!(pass);
}

fn quadrature_error(field: &DGField, mesh: &Mesh1D, exact: impl Fn(f64) -> f64) -> f64 {
    let mut sum = 0.0;
    for j in 0..mesh.n_cells() {
        let h = mesh.cell_width(j);
        for (&xi, &w) in mesh.quad_nodes().iter().zip(mesh.quad_weights()) {
            let x = mesh.map_to_physical(j, xi);
            let d = evaluate(field, mesh, j, xi).unwrap() - exact(x);
            sum += 0.5 * h * w * d * d;
        }
    }
    sum.sqrt()
}

#[test]
fn poisson_manufactured_solution() {
    // ∂E/∂x = cos x, E = −∂Φ/∂x: E = sin x, Φ = cos x
    let params = HermiteParams::new(3, 1.0).unwrap();
    let beta = 1.0;
    let mut pass = true;
    let mut detail = Vec::new();
    let mut identity = 0.0f64;
    for degree in [1usize, 2] {
        let mut prev: Option<(f64, f64)> = None;
        let (mut e_orders, mut phi_orders) = (Vec::new(), Vec::new());
        for n in [8usize, 16, 32, 64] {
            let mesh = Mesh1D::uniform(0.0, 2.0 * PI, n, degree).unwrap();
            let op = PoissonOperator::new(&mesh, Penalty::Constant(beta)).unwrap();
            let source = project_l2(f64::cos, &mesh);
            let pair = op.solve(&source, 0.0, &params).unwrap();
            let err_e = quadrature_error(&pair.e, &mesh, f64::sin);
            let err_phi = quadrature_error(&pair.phi, &mesh, f64::cos);
            if let Some((pe, pp)) = prev {
                e_orders.push((pe / err_e).log2());
                phi_orders.push((pp / err_phi).log2());
            }
            prev = Some((err_e, err_phi));

            let et = traces(&pair.e, &mesh);
            let pt = traces(&pair.phi, &mesh);
            let flux = op.field_flux(&pair);
            let lhs: f64 = (0..mesh.n_cells())
                .map(|i| (et.average(i) - flux[i]) * et.jump(i))
                .sum();
            let rhs: f64 = (0..mesh.n_cells()).map(|i| beta * pt.jump(i) * et.jump(i)).sum();
            identity = identity.max((lhs - rhs).abs());
        }
        let bound = degree as f64 + 0.7;
        let ok_e = e_orders.iter().all(|&o| o >= bound);
        let ok_phi = phi_orders.iter().all(|&o| o >= bound);
        pass &= ok_e && ok_phi;
        let fmt = |v: &[f64]| v.iter().map(|o| format!("{o:.2}")).collect::<Vec<_>>().join(", ");
        detail.push(format!(
            "P{degree} E [{}] Phi [{}] (>= {bound})",
            fmt(&e_orders),
            fmt(&phi_orders)
        ));
    }
    let ok_identity = identity <= 1e-12;
    pass &= ok_identity;
    detail.push(format!("flux identity residual {identity:.2e} (limit 1e-12)"));
    report(
        "Poisson manufactured solution cos(x) on [0, 2pi]",
        pass,
        &detail.join("; "),
    );
    assert!(pass);
}

fn random_state(mesh: &Mesh1D, params: HermiteParams, seeds: &[f64]) -> HermiteState {
    let mut s = HermiteState::zeros(mesh, params);
    let mut it = seeds.iter().cycle();
    for m in s.modes_mut() {
        for c in m.coeffs_mut() {
            *c = *it.next().unwrap();
        }
    }
    s
}

fn hermite_orthonormality_error() -> f64 {
    // trapezoid rule: spectrally accurate for Gaussian-decaying integrands
    let mut worst = 0.0f64;
    for vs in [1.0, 0.6, 1.7] {
        let p = HermiteParams::new(21, vs).unwrap();
        let (a, b, n) = (-20.0 * vs, 20.0 * vs, 8000);
        let h = (b - a) / n as f64;
        for i in 0..=20 {
            for j in 0..=20 {
                let s: f64 = (0..=n)
                    .map(|q| {
                        let v = a + q as f64 * h;
                        psi_eval(i, v, &p) * hermite_eval(j, v / vs)
                    })
                    .sum::<f64>()
                    * h;
                let expect = if i == j { vs } else { 0.0 };
                worst = worst.max((s - expect).abs() / vs);
            }
        }
    }
    worst
}

fn run_property(
    cases: u32,
    strategy: impl proptest::strategy::Strategy<Value = (Vec<f64>, f64)>,
    test: impl Fn((Vec<f64>, f64)) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    TestRunner::new(Config::with_cases(cases))
        .run(&strategy, test)
        .map_err(|e| e.to_string())
}

#[test]
fn property_suites() {
    let mut results: Vec<(&str, Result<(), String>)> = Vec::new();

    let ortho = hermite_orthonormality_error();
    results.push((
        "Hermite orthonormality n,m <= 20",
        if ortho <= 1e-12 {
            Ok(())
        } else {
            Err(format!("error {ortho:.2e}"))
        },
    ));

    let s1 = sigma(1.0, &FilterSpec::default());
    let sigma_ok = sigma(0.5, &FilterSpec::default()) == 1.0 && (s1 - (-36.0f64).exp()).abs() <= 1e-30;
    results.push((
        "filter sigma(0.5) = 1, sigma(1) = exp(-36)",
        if sigma_ok {
            Ok(())
        } else {
            Err(format!("sigma(1) = {s1:e}"))
        },
    ));

    let mesh = Mesh1D::from_edges(vec![0.0, 0.7, 1.1, 2.0, 2.4, 3.5, 4.0], 2, 5).unwrap();
    let n_dofs = mesh.n_dofs();

    results.push((
        "filter leaves C_0..C_2 unchanged",
        run_property(64, (vec(-1.0f64..1.0, 3 * n_dofs), 3.0f64..40.0), |(seeds, nm)| {
            let params = HermiteParams::new(nm as usize, 1.0).unwrap();
            let s = random_state(&mesh, params, &seeds);
            let mut f = s.clone();
            filter::apply(&mut f, &FilterSpec::default());
            for n in 0..3 {
                if f.mode(n) != s.mode(n) {
                    return Err(TestCaseError::fail(format!("mode {n} changed")));
                }
            }
            Ok(())
        }),
    ));

    let rate_case = |(seeds, vs): (Vec<f64>, f64)| -> Result<(), TestCaseError> {
        let params = HermiteParams::new(6, vs).unwrap();
        let penalty = Penalty::Constant(0.8);
        let op = VlasovOperator::new(&mesh, params, FluxConfig::for_params(&params), penalty);
        let s = random_state(&mesh, params, &seeds);
        let rho0 = compute_rho0(s.mode(0), &mesh, &params);
        let pair: FieldPair = PoissonOperator::new(&mesh, penalty)
            .unwrap()
            .solve(s.mode(0), rho0, &params)
            .unwrap();
        let d = op.rhs(&s, &pair, false).unwrap();
        let scale = s.modes().iter().map(|m| m.dot(m)).sum::<f64>().sqrt().max(1.0);
        let mass_rate = vs * integrate(d.mode(0), &mesh);
        let momentum_rate = vs * vs * integrate(d.mode(1), &mesh);
        if mass_rate.abs() > 1e-12 * scale || momentum_rate.abs() > 1e-12 * scale * scale {
            return Err(TestCaseError::fail(format!("rates {mass_rate:e} {momentum_rate:e}")));
        }
        Ok(())
    };
    results.push((
        "mass and momentum rates vanish on random states",
        run_property(64, (vec(-1.0f64..1.0, 6 * n_dofs), 0.5f64..2.0), rate_case),
    ));

    results.push((
        "interface momentum flux {C_1} - C1_hat = alpha/(2 v_th) [C_0]",
        run_property(64, (vec(-1.0f64..1.0, 6 * n_dofs), 0.5f64..2.0), |(seeds, vs)| {
            let params = HermiteParams::new(6, vs).unwrap();
            let flux = FluxConfig::for_params(&params);
            let op = VlasovOperator::new(&mesh, params, flux, Penalty::Constant(1.0));
            let s = random_state(&mesh, params, &seeds);
            let chat = op.chat1(&s);
            let c0 = traces(s.mode(0), &mesh);
            let c1 = traces(s.mode(1), &mesh);
            for (i, &ch) in chat.iter().enumerate() {
                let lhs = c1.average(i) - ch;
                let rhs = flux.alpha / (2.0 * vs) * c0.jump(i);
                if (lhs - rhs).abs() > 1e-12 * (1.0 + rhs.abs()) {
                    return Err(TestCaseError::fail(format!("interface {i}: {lhs:e} vs {rhs:e}")));
                }
            }
            Ok(())
        }),
    ));

    let mut pass = true;
    for (name, r) in &results {
        let ok = r.is_ok();
        pass &= ok;
        let detail = match r {
            Ok(()) => "ok".to_string(),
            Err(e) => e.clone(),
        };
        report(&format!("property: {name}"), ok, &detail);
    }
    assert!(pass);
}

#[test]
fn bump_on_tail_growth_rate() {
    // scaling velocity equal to the bulk standard deviation (0.2828 / sqrt 2)
    let cfg = config(
        "[scenario]\nkind = \"bump_on_tail\"\nalpha = 1e-4\nk = 0.1\n\n\
         [numerics]\nn_cells = 32\nn_modes = 128\nv_th = 0.2\nt_end = 60.0\nfilter = false\n",
    );
    let mut sim = build_simulation(&cfg, true).unwrap();
    let records = advance(&mut sim, cfg.numerics.t_end).unwrap();
    let series: Vec<(f64, f64)> = records.iter().map(|r| (r.t, r.e_l2.ln())).collect();
    let rate = fit_rate(&series, (30.0, 60.0)).unwrap();
    let target = 0.1084353;
    let rel = (rate - target).abs() / target;
    let pass = rel <= 0.10;
    report(
        "bump-on-tail growth rate 32x128 T=60 (reduced resolution)",
        pass,
        &format!(
            "fitted {rate:.5} vs {target} (relative error {:.2}%, limit 10%)",
            rel * 100.0
        ),
    );
    assert!(pass);
}
