use gpr_lagrange::cases::{convergence_driver, run, CaseKind, RunConfig};

#[test]
fn vortex_smoke() {
    let mut cfg = RunConfig::new(CaseKind::Vortex2d);
    cfg.h = 10.0 / 24.0;
    cfg.order = 2;
    let t0 = std::time::Instant::now();
    let art = run(&cfg).expect("vortex run");
    println!(
        "steps={} t={:.3} gcl={:.2e} mom_drift={:.2e} e_drift={:.2e} force={:.2e} wall={:?}",
        art.steps,
        art.sim.t,
        art.log.max_gcl_residual,
        art.log.max_momentum_drift,
        art.log.max_energy_drift,
        art.log.max_force_residual,
        t0.elapsed()
    );
    assert!(art.log.max_gcl_residual < 1e-11);
    assert!(art.log.max_momentum_drift < 1e-10);
    assert!(art.log.max_energy_drift < 1e-10);
}

#[test]
fn vortex_convergence_probe() {
    let t0 = std::time::Instant::now();
    let table = convergence_driver(CaseKind::Vortex2d, &[10.0 / 24.0, 10.0 / 36.0, 10.0 / 52.0], 2).unwrap();
    println!("O2 wall={:?}", t0.elapsed());
    for (v, var) in table.variables.iter().enumerate() {
        let errs: Vec<String> = table.rows.iter().map(|r| format!("{:.3e}", r.errors[v])).collect();
        println!("O2 {var}: errors={errs:?} orders={:?} fit={:.2}", table.orders[v], table.fitted_orders[v]);
    }
    let table = convergence_driver(CaseKind::Vortex2d, &[10.0 / 24.0, 10.0 / 36.0, 10.0 / 52.0], 1).unwrap();
    for (v, var) in table.variables.iter().enumerate() {
        let errs: Vec<String> = table.rows.iter().map(|r| format!("{:.3e}", r.errors[v])).collect();
        println!("O1 {var}: errors={errs:?} orders={:?} fit={:.2}", table.orders[v], table.fitted_orders[v]);
    }
}
