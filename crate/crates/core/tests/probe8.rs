use gpr_lagrange::mesh::compute_geometry;
use gpr_lagrange::meshgen::{generate_box_mesh, BoxMeshSpec};
use gpr_lagrange::eos::Material;
use gpr_lagrange::nodal::{BoundaryTable, BcSpec};
use gpr_lagrange::state::{self, CellState};
use gpr_lagrange::stepper::{Simulation, StepControls};
use gpr_lagrange::tensor::{Vec2, Vec3};

#[test]
fn probe_omega_bias() {
    for n in [54.0, 81.0] {
        let spec = BoxMeshSpec { periodic_x: true, periodic_y: true, jitter: 0.2, seed: 7,
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
        let mut sim = Simulation::new(mesh, coords, states, mat,
            BoundaryTable::uniform(BcSpec::FreeTraction),
            StepControls { order: 1, ..Default::default() }).unwrap();
        while sim.t < 0.1 * (1.0 - 1e-12) { sim.advance(0.1 - sim.t).unwrap(); }
        let geo = compute_geometry(&sim.mesh, &sim.coords).unwrap();
        // mean and rms signed error per radial band; also neighbor-roughness
        let c0 = Vec2::new(5.1, 5.1);
        let mut bands = vec![(0.0f64, 0.0f64, 0usize); 6];
        let mut rough = 0.0f64;
        for i in 0..sim.mesh.n_cells() {
            let c = geo.centroid[i];
            let (rho, _, _) = gpr_lagrange::refsol::vortex_exact(sim.t, c);
            let e = sim.states[i].omega - 1.0 / rho;
            let b = (((c - c0).norm()) as usize).min(5);
            bands[b].0 += e;
            bands[b].1 += e * e;
            bands[b].2 += 1;
            // roughness: difference of omega-error with neighbors
            for &j in sim.mesh.vertex_neighbors(i).iter().take(3) {
                let cj = geo.centroid[j as usize];
                let (rhoj, _, _) = gpr_lagrange::refsol::vortex_exact(sim.t, cj);
                let ej = sim.states[j as usize].omega - 1.0 / rhoj;
                rough = rough.max((e - ej).abs());
            }
        }
        println!("n={n}: max neighbor-err jump = {rough:.3e}");
        for (b, (s, s2, cnt)) in bands.iter().enumerate() {
            println!("  r [{},{}]: mean={:+.3e} rms={:.3e} (n={})", b, b+1, s / *cnt as f64, (s2 / *cnt as f64).sqrt(), cnt);
        }
    }
}
