//! Run configuration, the built-in 2D test-case initializers, the time-loop
//! driver with conservation logging and energy budgets, and the convergence
//! driver.

use std::collections::HashMap;
use std::path::PathBuf;
use std::str::FromStr;

use crate::eos::Material;
use crate::error::{Result, SolverError};
use crate::mesh::{compute_geometry, Geometry, Mesh};
use crate::meshgen::{self, BoxMeshSpec, TAG_INNER, TAG_LEFT, TAG_OUTER, TAG_RIGHT};
use crate::nodal::{BcSpec, BoundaryTable, PressureSpec};
use crate::output::{self, BudgetSample};
use crate::refsol::{BeckerShock, KidderSolution, SwingingPlate, SEDOV_ENERGY_2D};
use crate::state::{self, CellState};
use crate::stepper::{CflSchedule, Simulation, StepControls};
use crate::tensor::{Sym3, Vec2, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseKind {
    Vortex2d,
    SwingingPlate,
    Kidder,
    Saltzman,
    Sedov2d,
    SodViscous,
    HeatDisc,
    ViscousShock,
    BeShell,
    Projectile2d,
    BePlate,
}

impl CaseKind {
    pub const ALL: [CaseKind; 11] = [
        CaseKind::Vortex2d,
        CaseKind::SwingingPlate,
        CaseKind::Kidder,
        CaseKind::Saltzman,
        CaseKind::Sedov2d,
        CaseKind::SodViscous,
        CaseKind::HeatDisc,
        CaseKind::ViscousShock,
        CaseKind::BeShell,
        CaseKind::Projectile2d,
        CaseKind::BePlate,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CaseKind::Vortex2d => "vortex2d",
            CaseKind::SwingingPlate => "swinging_plate",
            CaseKind::Kidder => "kidder",
            CaseKind::Saltzman => "saltzman",
            CaseKind::Sedov2d => "sedov2d",
            CaseKind::SodViscous => "sod_viscous",
            CaseKind::HeatDisc => "heat_disc",
            CaseKind::ViscousShock => "viscous_shock",
            CaseKind::BeShell => "be_shell",
            CaseKind::Projectile2d => "projectile2d",
            CaseKind::BePlate => "be_plate",
        }
    }

    pub fn default_h(&self) -> f64 {
        match self {
            CaseKind::Vortex2d => 10.0 / 50.0,
            CaseKind::SwingingPlate => 2.0 / 32.0,
            CaseKind::Kidder => 0.1 / 8.0,
            CaseKind::Saltzman => 1.0 / 100.0,
            CaseKind::Sedov2d => 1.0 / 80.0,
            CaseKind::SodViscous => 1.0 / 200.0,
            CaseKind::HeatDisc => 1.0 / 100.0,
            CaseKind::ViscousShock => 1.0 / 200.0,
            CaseKind::BeShell => 1.0 / 400.0,
            CaseKind::Projectile2d => 1.0 / 100.0,
            CaseKind::BePlate => 1.0 / 1000.0,
        }
    }

    pub fn default_t_final(&self) -> f64 {
        match self {
            CaseKind::Vortex2d => 0.1,
            CaseKind::SwingingPlate => SwingingPlate::standard().period_time(),
            CaseKind::Kidder => KidderSolution::standard().t_final(),
            CaseKind::Saltzman => 0.6,
            CaseKind::Sedov2d => 1.0,
            CaseKind::SodViscous => 0.2,
            CaseKind::HeatDisc => 1.0,
            CaseKind::ViscousShock => 0.2,
            CaseKind::BeShell => 125.67e-6,
            CaseKind::Projectile2d => 0.005,
            CaseKind::BePlate => 3e-5,
        }
    }
}

impl FromStr for CaseKind {
    type Err = SolverError;
    fn from_str(s: &str) -> Result<Self> {
        CaseKind::ALL
            .iter()
            .find(|c| c.name() == s)
            .copied()
            .ok_or_else(|| SolverError::UnknownCase(s.to_string()))
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub case: CaseKind,
    pub h: f64,
    pub order: u8,
    pub cfl: Option<f64>,
    pub t_final: f64,
    pub out: Option<PathBuf>,
    /// Write outputs every this many steps; zero writes only the final state.
    pub cadence: usize,
    pub seed: u64,
    /// Shear viscosity override for the viscous Riemann problems.
    pub mu: Option<f64>,
    /// Implosion speed override for the shell collapse.
    pub v0: Option<f64>,
    pub quiet: bool,
}

impl RunConfig {
    pub fn new(case: CaseKind) -> Self {
        RunConfig {
            case,
            h: case.default_h(),
            order: 2,
            cfl: None,
            t_final: case.default_t_final(),
            out: None,
            cadence: 0,
            seed: 1,
            mu: None,
            v0: None,
            quiet: true,
        }
    }

    /// Flat key-value configuration text: one `key = value` pair per line,
    /// `#` comments. Unknown keys are rejected.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut map = HashMap::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| SolverError::BadConfig(format!("expected key = value: `{line}`")))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        let case: CaseKind = map
            .remove("case")
            .ok_or_else(|| SolverError::BadConfig("missing `case`".into()))?
            .parse()?;
        let mut cfg = RunConfig::new(case);
        let parse_f64 = |k: &str, v: &str| -> Result<f64> {
            v.parse().map_err(|_| SolverError::BadConfig(format!("bad number for `{k}`: {v}")))
        };
        for (k, v) in map {
            match k.as_str() {
                "h" => cfg.h = parse_f64(&k, &v)?,
                "order" => {
                    cfg.order = v
                        .parse()
                        .map_err(|_| SolverError::BadConfig(format!("bad order: {v}")))?
                }
                "cfl" => cfg.cfl = Some(parse_f64(&k, &v)?),
                "t_final" => cfg.t_final = parse_f64(&k, &v)?,
                "out" => cfg.out = Some(PathBuf::from(v)),
                "cadence" => {
                    cfg.cadence = v
                        .parse()
                        .map_err(|_| SolverError::BadConfig(format!("bad cadence: {v}")))?
                }
                "seed" => {
                    cfg.seed =
                        v.parse().map_err(|_| SolverError::BadConfig(format!("bad seed: {v}")))?
                }
                "mu" => cfg.mu = Some(parse_f64(&k, &v)?),
                "v0" => cfg.v0 = Some(parse_f64(&k, &v)?),
                other => {
                    return Err(SolverError::BadConfig(format!("unknown key `{other}`")));
                }
            }
        }
        Ok(cfg)
    }
}

/// Case-specific quantity traced over time alongside the energy budget.
#[derive(Clone, Debug)]
pub enum CaseProbe {
    None,
    /// Mean radius over the initial inner/outer frontier nodes.
    ShellRadii { inner: Vec<u32>, outer: Vec<u32> },
    /// Bar extent along x.
    BarLength,
}

pub struct CaseSetup {
    pub sim: Simulation,
    pub t_final: f64,
    pub probe: CaseProbe,
}

fn equilibrium_state(
    mat: &Material,
    rho: f64,
    p: f64,
    v: Vec3,
    vol: f64,
) -> Result<CellState> {
    let g = state::init_equilibrium_metric(rho, mat.rho0);
    let e = state::total_energy(mat, rho, p, v, Vec3::ZERO, g)?;
    Ok(CellState { omega: 1.0 / rho, v, e, j: Vec3::ZERO, g, mass: rho * vol })
}

fn unloaded_state(mat: &Material, rho: f64, p: f64, v: Vec3, vol: f64) -> Result<CellState> {
    let g = Sym3::identity();
    let e = state::total_energy(mat, rho, p, v, Vec3::ZERO, g)?;
    Ok(CellState { omega: 1.0 / rho, v, e, j: Vec3::ZERO, g, mass: rho * vol })
}

fn frontier_nodes(mesh: &Mesh, tag: u8) -> Vec<u32> {
    let mut nodes: Vec<u32> = mesh
        .faces
        .iter()
        .filter(|f| f.is_boundary() && f.tag == tag)
        .flat_map(|f| f.nodes)
        .collect();
    nodes.sort_unstable();
    nodes.dedup();
    nodes
}

/// Build the mesh, initial fields, boundary table, and step controls of a
/// named case.
pub fn init_case(cfg: &RunConfig) -> Result<CaseSetup> {
    let order = cfg.order;
    let mut controls = StepControls { order, ..Default::default() };
    if let Some(c) = cfg.cfl {
        controls.cfl = c;
    }
    let h = cfg.h;
    let seed = cfg.seed;

    let setup = match cfg.case {
        CaseKind::Vortex2d => {
            let spec = BoxMeshSpec {
                periodic_x: true,
                periodic_y: true,
                jitter: 0.2,
                seed,
                ..BoxMeshSpec::new(0.0, 10.0, 0.0, 10.0, h)
            };
            let (mesh, coords) = meshgen::generate_box_mesh(&spec)?;
            let geo = compute_geometry(&mesh, &coords)?;
            let mat = Material::vortex();
            let states = centroid_states(&mesh, &geo, &mat, |x| {
                let (rho, v, p) = crate::refsol::vortex_exact(0.0, x);
                (rho, p, v)
            })?;
            let bc = BoundaryTable::uniform(BcSpec::FreeTraction); // no boundary faces
            CaseSetup {
                sim: Simulation::new(mesh, coords, states, mat, bc, controls)?,
                t_final: cfg.t_final,
                probe: CaseProbe::None,
            }
        }
        CaseKind::SwingingPlate => {
            let spec =
                BoxMeshSpec { jitter: 0.2, seed, ..BoxMeshSpec::new(0.0, 2.0, 0.0, 2.0, h) };
            let (mesh, coords) = meshgen::generate_box_mesh(&spec)?;
            let geo = compute_geometry(&mesh, &coords)?;
            let mat = Material::swinging_plate();
            let swing = SwingingPlate::standard();
            let states = centroid_states_unloaded(&mesh, &geo, &mat, |x| {
                (mat.rho0, 0.0, swing.velocity(0.0, x))
            })?;
            let bc = BoundaryTable::uniform(BcSpec::SlipWall);
            CaseSetup {
                sim: Simulation::new(mesh, coords, states, mat, bc, controls)?,
                t_final: cfg.t_final,
                probe: CaseProbe::None,
            }
        }
        CaseKind::Kidder => {
            let (mesh, coords) = meshgen::generate_annulus_mesh(0.9, 1.0, h, 0.2, seed)?;
            let geo = compute_geometry(&mesh, &coords)?;
            let mat = Material::kidder();
            let k = KidderSolution::standard();
            let states = centroid_states(&mesh, &geo, &mat, |x| {
                let rho = k.density0(x.norm());
                (rho, k.s * rho.powf(k.gamma), Vec3::ZERO)
            })?;
            let mut bc = BoundaryTable::uniform(BcSpec::FreeTraction);
            bc.specs[TAG_INNER as usize] = BcSpec::Pressure(PressureSpec::KidderInner(k));
            bc.specs[TAG_OUTER as usize] = BcSpec::Pressure(PressureSpec::KidderOuter(k));
            let probe = CaseProbe::ShellRadii {
                inner: frontier_nodes(&mesh, TAG_INNER),
                outer: frontier_nodes(&mesh, TAG_OUTER),
            };
            CaseSetup {
                sim: Simulation::new(mesh, coords, states, mat, bc, controls)?,
                t_final: cfg.t_final.min(k.t_final()),
                probe,
            }
        }
        CaseKind::Saltzman => {
            let spec =
                BoxMeshSpec { jitter: 0.25, seed, ..BoxMeshSpec::new(0.0, 1.0, 0.0, 0.1, h) };
            let (mesh, coords) = meshgen::generate_box_mesh(&spec)?;
            let geo = compute_geometry(&mesh, &coords)?;
            let mat = Material::saltzman();
            let states = centroid_states(&mesh, &geo, &mat, |_| (1.0, 1e-6, Vec3::ZERO))?;
            let mut bc = BoundaryTable::uniform(BcSpec::SlipWall);
            bc.specs[TAG_LEFT as usize] = BcSpec::MovingWall { v: Vec2::new(1.0, 0.0) };
            controls.schedule = Some(CflSchedule { t_switch: 0.01, cfl_early: 0.01 });
            CaseSetup {
                sim: Simulation::new(mesh, coords, states, mat, bc, controls)?,
                t_final: cfg.t_final,
                probe: CaseProbe::None,
            }
        }
        CaseKind::Sedov2d => {
            let spec =
                BoxMeshSpec { jitter: 0.2, seed, ..BoxMeshSpec::new(0.0, 1.2, 0.0, 1.2, h) };
            let (mesh, coords) = meshgen::generate_box_mesh(&spec)?;
            let geo = compute_geometry(&mesh, &coords)?;
            let mat = Material::sedov();
            let gamma = 1.4;
            // Cells touching the origin share the blast energy.
            let origin_cells: Vec<usize> = (0..mesh.n_cells())
                .filter(|&i| {
                    (0..3).any(|k| mesh.corner_pos(&coords, i, k).norm() < 1e-12)
                })
                .collect();
            let v_or: f64 = origin_cells.iter().map(|&i| geo.volume[i]).sum();
            let p_or = (gamma - 1.0) * 1.0 * SEDOV_ENERGY_2D / (4.0 * v_or);
            let states = (0..mesh.n_cells())
                .map(|i| {
                    let p = if origin_cells.contains(&i) { p_or } else { 1e-6 };
                    equilibrium_state(&mat, 1.0, p, Vec3::ZERO, geo.volume[i])
                })
                .collect::<Result<Vec<_>>>()?;
            let bc = BoundaryTable::uniform(BcSpec::SlipWall);
            CaseSetup {
                sim: Simulation::new(mesh, coords, states, mat, bc, controls)?,
                t_final: cfg.t_final,
                probe: CaseProbe::None,
            }
        }
        CaseKind::SodViscous => {
            let mu = cfg.mu.unwrap_or(1e-2);
            let spec =
                BoxMeshSpec { jitter: 0.2, seed, ..BoxMeshSpec::new(0.0, 1.0, 0.0, 0.1, h) };
            let (mesh, coords) = meshgen::generate_box_mesh(&spec)?;
            let geo = compute_geometry(&mesh, &coords)?;
            let mat = Material::riemann_viscous(mu);
            let states = centroid_states(&mesh, &geo, &mat, |x| {
                if x.x <= 0.5 {
                    (1.0, 1.0, Vec3::ZERO)
                } else {
                    (0.125, 0.1, Vec3::ZERO)
                }
            })?;
            let bc = BoundaryTable::uniform(BcSpec::SlipWall);
            CaseSetup {
                sim: Simulation::new(mesh, coords, states, mat, bc, controls)?,
                t_final: cfg.t_final,
                probe: CaseProbe::None,
            }
        }
        CaseKind::HeatDisc => {
            let spec =
                BoxMeshSpec { jitter: 0.2, seed, ..BoxMeshSpec::new(-0.5, 0.5, -0.5, 0.5, h) };
            let (mesh, coords) = meshgen::generate_box_mesh(&spec)?;
            let geo = compute_geometry(&mesh, &coords)?;
            let mat = Material::heat_conduction();
            let states = centroid_states(&mesh, &geo, &mat, |x| {
                let rho = if x.norm() <= 0.2 { 2.0 } else { 0.5 };
                (rho, 1.0, Vec3::ZERO)
            })?;
            let bc = BoundaryTable::uniform(BcSpec::SlipWall);
            CaseSetup {
                sim: Simulation::new(mesh, coords, states, mat, bc, controls)?,
                t_final: cfg.t_final,
                probe: CaseProbe::None,
            }
        }
        CaseKind::ViscousShock => {
            let spec =
                BoxMeshSpec { jitter: 0.2, seed, ..BoxMeshSpec::new(0.0, 1.0, 0.0, 0.2, h) };
            let (mesh, coords) = meshgen::generate_box_mesh(&spec)?;
            let geo = compute_geometry(&mesh, &coords)?;
            let mat = Material::viscous_shock();
            let becker = BeckerShock::standard();
            let states = centroid_states(&mesh, &geo, &mat, |x| {
                let (rho, u, p) = becker.state(x.x, 0.0);
                (rho, p, Vec3::new(u, 0.0, 0.0))
            })?;
            let mut bc = BoundaryTable::uniform(BcSpec::SlipWall);
            // The left frontier rides with the post-shock inflow.
            let u_in = becker.m_s * becker.c0 * (1.0 - becker.kappa_sq());
            bc.specs[TAG_LEFT as usize] = BcSpec::MovingWall { v: Vec2::new(u_in, 0.0) };
            bc.specs[TAG_RIGHT as usize] =
                BcSpec::Pressure(PressureSpec::Constant(becker.p0));
            CaseSetup {
                sim: Simulation::new(mesh, coords, states, mat, bc, controls)?,
                t_final: cfg.t_final,
                probe: CaseProbe::None,
            }
        }
        CaseKind::BeShell => {
            let v0 = cfg.v0.unwrap_or(417.1);
            let t_final = match v0 {
                v if (v - 417.1).abs() < 1e-9 => 125.67e-6,
                v if (v - 454.7).abs() < 1e-9 => 131.6e-6,
                v if (v - 490.2).abs() < 1e-9 => 136.26e-6,
                _ => cfg.t_final,
            };
            let (mesh, coords) = meshgen::generate_annulus_mesh(0.08, 0.10, h, 0.2, seed)?;
            let geo = compute_geometry(&mesh, &coords)?;
            let mat = Material::beryllium_shell();
            let r_int = 0.08;
            let states = (0..mesh.n_cells())
                .map(|i| {
                    let c = geo.centroid[i];
                    let r = c.norm();
                    let vr = -v0 * (r_int / r).powi(2);
                    let v = Vec3::new(vr * c.x / r, vr * c.y / r, 0.0);
                    unloaded_state(&mat, mat.rho0, 0.0, v, geo.volume[i])
                })
                .collect::<Result<Vec<_>>>()?;
            let bc = BoundaryTable::uniform(BcSpec::FreeTraction);
            let probe = CaseProbe::ShellRadii {
                inner: frontier_nodes(&mesh, TAG_INNER),
                outer: frontier_nodes(&mesh, TAG_OUTER),
            };
            CaseSetup {
                sim: Simulation::new(mesh, coords, states, mat, bc, controls)?,
                t_final,
                probe,
            }
        }
        CaseKind::Projectile2d => {
            let spec =
                BoxMeshSpec { jitter: 0.2, seed, ..BoxMeshSpec::new(0.0, 5.0, 0.0, 1.0, h) };
            let (mesh, coords) = meshgen::generate_box_mesh(&spec)?;
            let geo = compute_geometry(&mesh, &coords)?;
            let mat = Material::aluminium_projectile();
            let states = (0..mesh.n_cells())
                .map(|i| {
                    unloaded_state(&mat, mat.rho0, 0.0, Vec3::new(-150.0, 0.0, 0.0), geo.volume[i])
                })
                .collect::<Result<Vec<_>>>()?;
            let mut bc = BoundaryTable::uniform(BcSpec::FreeTraction);
            bc.specs[TAG_LEFT as usize] = BcSpec::SlipWall;
            CaseSetup {
                sim: Simulation::new(mesh, coords, states, mat, bc, controls)?,
                t_final: cfg.t_final,
                probe: CaseProbe::BarLength,
            }
        }
        CaseKind::BePlate => {
            let spec = BoxMeshSpec {
                jitter: 0.2,
                seed,
                ..BoxMeshSpec::new(-0.03, 0.03, -0.005, 0.005, h)
            };
            let (mesh, coords) = meshgen::generate_box_mesh(&spec)?;
            let geo = compute_geometry(&mesh, &coords)?;
            let mat = Material::beryllium_plate();
            let states = (0..mesh.n_cells())
                .map(|i| {
                    let x = geo.centroid[i].x;
                    unloaded_state(
                        &mat,
                        mat.rho0,
                        0.0,
                        Vec3::new(0.0, plate_velocity(x), 0.0),
                        geo.volume[i],
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let bc = BoundaryTable::uniform(BcSpec::FreeTraction);
            CaseSetup {
                sim: Simulation::new(mesh, coords, states, mat, bc, controls)?,
                t_final: cfg.t_final,
                probe: CaseProbe::None,
            }
        }
    };
    Ok(setup)
}

/// Initial flexural velocity profile of the vibrating plate.
pub fn plate_velocity(x: f64) -> f64 {
    let length = 0.06;
    let xp = 78.834 * (x + length / 2.0);
    let (a, omega) = (4.3369e-5, 2.3597e5);
    let (a1, a2) = (56.6368, 57.6455);
    a * omega * (a1 * (xp.sinh() + xp.sin()) - a2 * (xp.cosh() + xp.cos()))
}

fn centroid_states(
    mesh: &Mesh,
    geo: &Geometry,
    mat: &Material,
    f: impl Fn(Vec2) -> (f64, f64, Vec3),
) -> Result<Vec<CellState>> {
    (0..mesh.n_cells())
        .map(|i| {
            let (rho, p, v) = f(geo.centroid[i]);
            equilibrium_state(mat, rho, p, v, geo.volume[i])
        })
        .collect()
}

fn centroid_states_unloaded(
    mesh: &Mesh,
    geo: &Geometry,
    mat: &Material,
    f: impl Fn(Vec2) -> (f64, f64, Vec3),
) -> Result<Vec<CellState>> {
    (0..mesh.n_cells())
        .map(|i| {
            let (rho, p, v) = f(geo.centroid[i]);
            unloaded_state(mat, rho, p, v, geo.volume[i])
        })
        .collect()
}

/// Running conservation extremes over a whole run.
#[derive(Clone, Copy, Debug, Default)]
pub struct ConservationLog {
    pub mass0: f64,
    pub momentum0: Vec3,
    pub energy0: f64,
    pub max_mass_drift: f64,
    pub max_momentum_drift: f64,
    pub max_energy_drift: f64,
    pub max_gcl_residual: f64,
    pub max_force_residual: f64,
    pub picard_capped_steps: u64,
    /// Scale for the momentum drift: sum of m |v| at the start.
    pub momentum_scale: f64,
}

pub struct RunArtifacts {
    pub sim: Simulation,
    pub steps: u64,
    pub budgets: Vec<BudgetSample>,
    pub log: ConservationLog,
    /// (t, probe values) samples; meaning depends on the case probe.
    pub trace: Vec<(f64, f64, f64)>,
    pub probe: CaseProbe,
}

fn totals(states: &[CellState]) -> (f64, Vec3, f64) {
    let mut mass = 0.0;
    let mut mom = Vec3::ZERO;
    let mut e = 0.0;
    for s in states {
        mass += s.mass;
        mom += s.v * s.mass;
        e += s.e * s.mass;
    }
    (mass, mom, e)
}

fn probe_values(probe: &CaseProbe, sim: &Simulation) -> (f64, f64) {
    match probe {
        CaseProbe::None => (0.0, 0.0),
        CaseProbe::ShellRadii { inner, outer } => {
            let mean = |nodes: &Vec<u32>| {
                nodes.iter().map(|&n| sim.coords[n as usize].norm()).sum::<f64>()
                    / nodes.len() as f64
            };
            (mean(inner), mean(outer))
        }
        CaseProbe::BarLength => {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for p in &sim.coords {
                lo = lo.min(p.x);
                hi = hi.max(p.x);
            }
            (hi - lo, 0.0)
        }
    }
}

/// Time loop to `t_final` with cadence outputs and per-step conservation
/// tracking.
pub fn run(cfg: &RunConfig) -> Result<RunArtifacts> {
    let setup = init_case(cfg)?;
    run_setup(cfg, setup)
}

pub fn run_setup(cfg: &RunConfig, setup: CaseSetup) -> Result<RunArtifacts> {
    let CaseSetup { mut sim, t_final, probe } = setup;
    let (mass0, momentum0, energy0) = totals(&sim.states);
    let momentum_scale: f64 = sim.states.iter().map(|s| s.mass * s.v.norm()).sum::<f64>();
    let mut log = ConservationLog {
        mass0,
        momentum0,
        energy0,
        momentum_scale,
        ..Default::default()
    };
    let mut budgets = vec![output::energy_budget(&sim.mat, &sim.states, 0.0)];
    let mut trace = Vec::new();
    {
        let (a, b) = probe_values(&probe, &sim);
        trace.push((0.0, a, b));
    }

    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        write_outputs(&sim, dir, 0)?;
    }

    let mut steps: u64 = 0;
    while sim.t < t_final * (1.0 - 1e-12) {
        let info = sim.advance(t_final - sim.t).map_err(|e| annotate(e, sim.t))?;
        steps += 1;

        let (mass, mom, e) = totals(&sim.states);
        log.max_mass_drift = log.max_mass_drift.max((mass - mass0).abs() / mass0);
        let scale = momentum_scale.max(1e-30);
        log.max_momentum_drift =
            log.max_momentum_drift.max((mom - momentum0).norm() / scale);
        log.max_energy_drift =
            log.max_energy_drift.max((e - energy0).abs() / energy0.abs().max(1e-30));
        log.max_gcl_residual = log.max_gcl_residual.max(info.gcl_residual);
        log.max_force_residual = log.max_force_residual.max(info.force_residual);
        if info.picard_capped {
            log.picard_capped_steps += 1;
        }

        budgets.push(output::energy_budget(&sim.mat, &sim.states, sim.t));
        let (a, b) = probe_values(&probe, &sim);
        trace.push((sim.t, a, b));

        if !cfg.quiet && steps % 200 == 0 {
            eprintln!(
                "[{}] step {steps} t = {:.6e} dt = {:.3e} gcl = {:.2e}",
                cfg.case.name(),
                sim.t,
                info.dt,
                info.gcl_residual
            );
        }
        if let Some(dir) = &cfg.out {
            if cfg.cadence > 0 && steps % cfg.cadence as u64 == 0 {
                write_outputs(&sim, dir, steps)?;
            }
        }
    }

    if let Some(dir) = &cfg.out {
        write_outputs(&sim, dir, steps)?;
        output::write_budget_csv(&budgets, &dir.join("energy_budget.csv"))?;
    }

    Ok(RunArtifacts { sim, steps, budgets, log, trace, probe })
}

fn annotate(e: SolverError, t: f64) -> SolverError {
    match e {
        SolverError::InvertedCell(cell, volume) => {
            SolverError::TangledMesh { cell, volume, time: t }
        }
        other => other,
    }
}

fn write_outputs(sim: &Simulation, dir: &std::path::Path, step: u64) -> Result<()> {
    let geo = compute_geometry(&sim.mesh, &sim.coords)?;
    output::write_vtk(
        &sim.mesh,
        &sim.coords,
        &sim.states,
        &sim.mat,
        &dir.join(format!("state_{step:07}.vtk")),
    )?;
    output::scatter_csv(
        &sim.mesh,
        &geo,
        &sim.states,
        &sim.mat,
        &dir.join(format!("scatter_{step:07}.csv")),
    )
}

// ---------------------------------------------------------------------------
// Convergence driver
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct ConvergenceRow {
    /// Largest circumcircle diameter in the final configuration.
    pub h: f64,
    pub errors: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ConvergenceTable {
    pub variables: Vec<&'static str>,
    pub rows: Vec<ConvergenceRow>,
    /// Pairwise observed orders between consecutive rows, per variable.
    pub orders: Vec<Vec<f64>>,
    /// Least-squares slope of ln(error) against ln(h), per variable.
    pub fitted_orders: Vec<f64>,
}

/// Largest circumcircle diameter over the mesh in its current configuration.
pub fn max_circumdiameter(mesh: &Mesh, coords: &[Vec2]) -> f64 {
    let mut hmax = 0.0f64;
    for i in 0..mesh.n_cells() {
        let p = [
            mesh.corner_pos(coords, i, 0),
            mesh.corner_pos(coords, i, 1),
            mesh.corner_pos(coords, i, 2),
        ];
        let a = (p[1] - p[0]).norm();
        let b = (p[2] - p[1]).norm();
        let c = (p[0] - p[2]).norm();
        let area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).abs();
        hmax = hmax.max(a * b * c / (2.0 * area));
    }
    hmax
}

/// Volume-weighted L2 errors of selected fields against the exact solution at
/// the final time, over a sequence of refinements.
pub fn convergence_driver(case: CaseKind, hs: &[f64], order: u8) -> Result<ConvergenceTable> {
    if hs.len() < 2 {
        return Err(SolverError::BadConfig("need at least two mesh levels".into()));
    }
    let variables: Vec<&'static str> = match case {
        CaseKind::Vortex2d => vec!["omega", "u", "E"],
        CaseKind::SwingingPlate => vec!["u", "E"],
        CaseKind::Kidder => vec!["R_int"],
        _ => return Err(SolverError::BadConfig(format!("no exact solution for {}", case.name()))),
    };

    let mut rows = Vec::new();
    for (level, &h) in hs.iter().enumerate() {
        let mut cfg = RunConfig::new(case);
        cfg.h = h;
        cfg.order = order;
        cfg.seed = 1 + level as u64;
        let art = run(&cfg)?;
        let sim = &art.sim;
        let geo = compute_geometry(&sim.mesh, &sim.coords)?;
        let h_final = max_circumdiameter(&sim.mesh, &sim.coords);
        let t = sim.t;

        let errors = match case {
            CaseKind::Vortex2d => {
                let mut e2 = [0.0f64; 3];
                let mut vol = 0.0;
                for i in 0..sim.mesh.n_cells() {
                    let (rho, v, p) = crate::refsol::vortex_exact(t, geo.centroid[i]);
                    let mat = &sim.mat;
                    let g = state::init_equilibrium_metric(rho, mat.rho0);
                    let e_exact = state::total_energy(mat, rho, p, v, Vec3::ZERO, g)?;
                    let s = &sim.states[i];
                    let w = geo.volume[i];
                    e2[0] += w * (s.omega - 1.0 / rho).powi(2);
                    e2[1] += w * (s.v.x - v.x).powi(2);
                    e2[2] += w * (s.e - e_exact).powi(2);
                    vol += w;
                }
                e2.iter().map(|e| (e / vol).sqrt()).collect()
            }
            CaseKind::SwingingPlate => {
                let swing = SwingingPlate::standard();
                let mut e2 = [0.0f64; 2];
                let mut vol = 0.0;
                for i in 0..sim.mesh.n_cells() {
                    let x = geo.centroid[i];
                    let v = swing.velocity(t, x);
                    let e_exact = swing.energy(t, x);
                    let s = &sim.states[i];
                    let w = geo.volume[i];
                    e2[0] += w * (s.v.x - v.x).powi(2);
                    e2[1] += w * (s.e - e_exact).powi(2);
                    vol += w;
                }
                e2.iter().map(|e| (e / vol).sqrt()).collect()
            }
            CaseKind::Kidder => {
                let k = KidderSolution::standard();
                let (r_int, _) = k.radii(t);
                match &art.probe {
                    CaseProbe::ShellRadii { inner, .. } => {
                        let err = inner
                            .iter()
                            .map(|&n| (sim.coords[n as usize].norm() - r_int).abs())
                            .sum::<f64>()
                            / inner.len() as f64;
                        vec![err]
                    }
                    _ => unreachable!(),
                }
            }
            _ => unreachable!(),
        };
        rows.push(ConvergenceRow { h: h_final, errors });
    }

    let nv = variables.len();
    let mut orders = vec![Vec::new(); nv];
    for w in rows.windows(2) {
        for v in 0..nv {
            let o = (w[0].errors[v] / w[1].errors[v]).ln() / (w[0].h / w[1].h).ln();
            orders[v].push(o);
        }
    }
    let mut fitted = Vec::with_capacity(nv);
    for v in 0..nv {
        let xs: Vec<f64> = rows.iter().map(|r| r.h.ln()).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.errors[v].ln()).collect();
        let n = xs.len() as f64;
        let sx: f64 = xs.iter().sum();
        let sy: f64 = ys.iter().sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
        fitted.push((n * sxy - sx * sy) / (n * sxx - sx * sx));
    }

    Ok(ConvergenceTable { variables, rows, orders, fitted_orders: fitted })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_names_round_trip() {
        for c in CaseKind::ALL {
            assert_eq!(c.name().parse::<CaseKind>().unwrap(), c);
        }
        assert!(matches!(
            "nonsense".parse::<CaseKind>(),
            Err(SolverError::UnknownCase(_))
        ));
    }

    #[test]
    fn kv_config_parsing() {
        let cfg = RunConfig::from_kv(
            "case = sod_viscous\nh = 0.01\norder = 1\nmu = 1e-3\n# comment\ncfl = 0.3\n",
        )
        .unwrap();
        assert_eq!(cfg.case, CaseKind::SodViscous);
        assert_eq!(cfg.h, 0.01);
        assert_eq!(cfg.order, 1);
        assert_eq!(cfg.mu, Some(1e-3));
        assert_eq!(cfg.cfl, Some(0.3));
        assert!(RunConfig::from_kv("case = sod_viscous\nwhat = 1\n").is_err());
        assert!(RunConfig::from_kv("h = 1\n").is_err());
    }

    #[test]
    fn sedov_origin_pressure_formula() {
        let mut cfg = RunConfig::new(CaseKind::Sedov2d);
        cfg.h = 1.2 / 10.0;
        let setup = init_case(&cfg).unwrap();
        let sim = &setup.sim;
        let geo = compute_geometry(&sim.mesh, &sim.coords).unwrap();
        // Recompute the deposited pressure from the origin volume.
        let origin: Vec<usize> = (0..sim.mesh.n_cells())
            .filter(|&i| (0..3).any(|k| sim.mesh.corner_pos(&sim.coords, i, k).norm() < 1e-12))
            .collect();
        assert!(!origin.is_empty());
        let v_or: f64 = origin.iter().map(|&i| geo.volume[i]).sum();
        let want = 0.4 * SEDOV_ENERGY_2D / (4.0 * v_or);
        for &i in &origin {
            let p = state::primitive(&sim.mat, i, &sim.states[i]).unwrap();
            assert!((p.p - want).abs() < 1e-10 * want);
        }
        // Total deposited internal energy matches the quarter-plane budget.
        let e_dep: f64 = origin
            .iter()
            .map(|&i| sim.states[i].mass * sim.states[i].e)
            .sum();
        assert!((e_dep - SEDOV_ENERGY_2D / 4.0).abs() < 1e-10 * e_dep);
    }

    #[test]
    fn shell_presets() {
        let cfg = RunConfig::new(CaseKind::BeShell);
        let setup = init_case(&cfg).unwrap();
        assert!((setup.t_final - 125.67e-6).abs() < 1e-12);
        // Initial speed at the inner frontier is V0, decaying outward as 1/r^2.
        let sim = &setup.sim;
        let geo = compute_geometry(&sim.mesh, &sim.coords).unwrap();
        for i in 0..sim.mesh.n_cells() {
            let r = geo.centroid[i].norm();
            let want = 417.1 * (0.08f64 / r).powi(2);
            assert!((sim.states[i].v.norm() - want).abs() < 1e-9 * want);
        }
        let mut cfg = cfg;
        cfg.v0 = Some(454.7);
        assert!((init_case(&cfg).unwrap().t_final - 131.6e-6).abs() < 1e-12);
    }

    #[test]
    fn projectile_setup() {
        let mut cfg = RunConfig::new(CaseKind::Projectile2d);
        cfg.h = 0.1;
        let setup = init_case(&cfg).unwrap();
        let sim = &setup.sim;
        assert_eq!(sim.states[0].v, Vec3::new(-150.0, 0.0, 0.0));
        assert!(matches!(setup.probe, CaseProbe::BarLength));
        let (len, _) = probe_values(&setup.probe, sim);
        assert!((len - 5.0).abs() < 1e-12);
    }

    #[test]
    fn zero_step_run_returns_the_initial_state() {
        let mut cfg = RunConfig::new(CaseKind::Vortex2d);
        cfg.h = 10.0 / 8.0;
        cfg.t_final = 0.0;
        let art = run(&cfg).unwrap();
        assert_eq!(art.steps, 0);
        assert_eq!(art.sim.t, 0.0);
        assert_eq!(art.budgets.len(), 1);
    }

    #[test]
    fn exact_vs_exact_errors_vanish() {
        // Feeding the exact solution through the error measure at t = 0 gives
        // zero, the self-test of the convergence norms.
        let mut cfg = RunConfig::new(CaseKind::Vortex2d);
        cfg.h = 10.0 / 8.0;
        cfg.t_final = 0.0;
        let art = run(&cfg).unwrap();
        let sim = &art.sim;
        let geo = compute_geometry(&sim.mesh, &sim.coords).unwrap();
        for i in 0..sim.mesh.n_cells() {
            let (rho, v, _) = crate::refsol::vortex_exact(0.0, geo.centroid[i]);
            assert!((sim.states[i].omega - 1.0 / rho).abs() < 1e-14);
            assert!((sim.states[i].v - v).norm() < 1e-14);
        }
    }
}
