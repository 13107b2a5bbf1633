use gpr_lagrange::mesh::compute_geometry;
use gpr_lagrange::meshgen::{generate_box_mesh, BoxMeshSpec};
use gpr_lagrange::eos::Material;
use gpr_lagrange::nodal::{BoundaryTable, BcSpec};
use gpr_lagrange::state::{self, CellState};
use gpr_lagrange::stepper::{Simulation, StepControls};
use gpr_lagrange::tensor::{Vec2, Vec3};

#[test]
fn probe_one_step() {
    let spec = BoxMeshSpec { periodic_x: true, periodic_y: true, jitter: 0.2, seed: 7,
        ..BoxMeshSpec::new(0.0, 10.0, 0.0, 10.0, 10.0 / 121.0) };
    let (mesh, coords) = generate_box_mesh(&spec).unwrap();
    let geo = compute_geometry(&mesh, &coords).unwrap();
    let mat = Material::vortex();
    let states: Vec<CellState> = (0..mesh.n_cells()).map(|i| {
        let (rho, v, p) = gpr_lagrange::refsol::vortex_exact(0.0, geo.centroid[i]);
        let g = state::init_equilibrium_metric(rho, 1.0);
        let e = state::total_energy(&mat, rho, p, v, Vec3::ZERO, g).unwrap();
        CellState { omega: 1.0 / rho, v, e, j: Vec3::ZERO, g, mass: rho * geo.volume[i] }
    }).collect();
    let coords0 = coords.clone();
    let mut sim = Simulation::new(mesh, coords, states.clone(), mat,
        BoundaryTable::uniform(BcSpec::FreeTraction),
        StepControls { order: 1, ..Default::default() }).unwrap();
    sim.advance(f64::INFINITY).unwrap();
    let dt = sim.t;
    let geo1 = compute_geometry(&sim.mesh, &sim.coords).unwrap();
    let mut worst = (0.0f64, 0usize);
    for i in 0..sim.mesh.n_cells() {
        let (_, v, _) = gpr_lagrange::refsol::vortex_exact(sim.t, geo1.centroid[i]);
        let e = (sim.states[i].v.x - v.x).abs();
        if e > worst.0 { worst = (e, i); }
    }
    let i = worst.1;
    println!("dt={dt:.4} worst cell {i}: err={:.3e}", worst.0);
    println!("v before: ({:.4},{:.4}), after: ({:.4},{:.4})", states[i].v.x, states[i].v.y, sim.states[i].v.x, sim.states[i].v.y);
    let (_, vex, _) = gpr_lagrange::refsol::vortex_exact(dt, geo1.centroid[i]);
    println!("exact now: ({:.4},{:.4})", vex.x, vex.y);
    // nodes of that cell: moved positions vs exact velocities
    for k in 0..3 {
        let n = sim.mesh.cell_nodes[i][k] as usize;
        let x0 = coords0[n] + sim.mesh.cell_shifts[i][k];
        let x1 = sim.coords[n] + sim.mesh.cell_shifts[i][k];
        let vn = (x1 - x0) / dt;
        let (_, vx, _) = gpr_lagrange::refsol::vortex_exact(0.0, x0);
        println!("  node {n} at ({:.3},{:.3}): v_solved=({:.4},{:.4}) v_exact=({:.4},{:.4}) cells={}",
            x0.x, x0.y, vn.x, vn.y, vx.x, vx.y, sim.mesh.node_cells(n).len());
    }
    // neighbor cell pressures
    for &j in sim.mesh.vertex_neighbors(i).iter().take(12) {
        let p = state::primitive(&sim.mat, j as usize, &states[j as usize]).unwrap();
        let q = state::primitive(&sim.mat, j as usize, &sim.states[j as usize]).unwrap();
        println!("  nb {j}: p0={:.4} p1={:.4} v0=({:.3},{:.3})", p.p, q.p, states[j as usize].v.x, states[j as usize].v.y);
    }
}
