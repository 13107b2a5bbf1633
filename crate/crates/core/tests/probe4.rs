use gpr_lagrange::mesh::compute_geometry;
use gpr_lagrange::meshgen::{generate_box_mesh, BoxMeshSpec};
use gpr_lagrange::eos::Material;
use gpr_lagrange::nodal::{BoundaryTable, BcSpec};
use gpr_lagrange::state::{self, CellState};
use gpr_lagrange::stepper::{Simulation, StepControls};
use gpr_lagrange::tensor::{Vec2, Vec3};

fn vortex_sim(n: f64, order: u8, jitter: f64, seed: u64) -> Simulation {
    let spec = BoxMeshSpec { periodic_x: true, periodic_y: true, jitter, seed,
        ..BoxMeshSpec::new(0.0, 10.0, 0.0, 10.0, 10.0 / n) };
    let (mesh, coords) = generate_box_mesh(&spec).unwrap();
    let geo = compute_geometry(&mesh, &coords).unwrap();
    let mat = Material::vortex();
    let states: Vec<CellState> = (0..mesh.n_cells()).map(|i| {
        let (rho, v, p) = gpr_lagrange::refsol::vortex_exact(0.0, geo.centroid[i]);
        let g = state::init_equilibrium_metric(rho, 1.0);
        let e = state::total_energy(&mat, rho, p, v, Vec3::ZERO, g).unwrap();
        CellState { omega: 1.0 / rho, v, e, j: Vec3::ZERO, g, mass: rho * geo.volume[i] }
    }).collect();
    Simulation::new(mesh, coords, states, mat, BoundaryTable::uniform(BcSpec::FreeTraction),
        StepControls { order, ..Default::default() }).unwrap()
}

#[test]
fn probe_omega_pattern() {
    for (order, jitter) in [(2u8, 0.0), (1u8, 0.2)] {
        let mut sim = vortex_sim(54.0, order, jitter, 7);
        while sim.t < 0.1 * (1.0 - 1e-12) { sim.advance(0.1 - sim.t).unwrap(); }
        let geo = compute_geometry(&sim.mesh, &sim.coords).unwrap();
        // rms omega error in radial bands around the moved center (5.1, 5.1)
        let mut bands = vec![(0.0f64, 0usize); 8];
        for i in 0..sim.mesh.n_cells() {
            let c = geo.centroid[i];
            let (rho, _, _) = gpr_lagrange::refsol::vortex_exact(sim.t, c);
            let e = sim.states[i].omega - 1.0 / rho;
            let r = (c - Vec2::new(5.1, 5.1)).norm();
            let b = ((r / 1.0) as usize).min(7);
            bands[b].0 += e * e;
            bands[b].1 += 1;
        }
        println!("== order {order} jitter {jitter}: rms omega err per radial band (width 1)");
        for (b, (s, n)) in bands.iter().enumerate() {
            println!("  r in [{},{}]: rms={:.3e} (n={})", b, b + 1, (s / *n as f64).sqrt(), n);
        }
    }
}
