//! Simulation output: legacy ASCII VTK unstructured grids, per-cell scatter
//! CSV with a 1D-cut extraction mode, and energy-budget series.

use std::fmt::Write as _;
use std::path::Path;

use crate::eos::{Material, Tau1Spec};
use crate::error::Result;
use crate::mesh::{Geometry, Mesh};
use crate::state::{self, CellState};
use crate::tensor::{Sym3, Vec2};

/// Legacy ASCII unstructured-grid file with the cell fields used throughout:
/// density, pressure, temperature, plastic diagnostics for plastic materials,
/// velocity, thermal impulse, heat flux, and the two tensors.
pub fn write_vtk(
    mesh: &Mesh,
    coords: &[Vec2],
    states: &[CellState],
    mat: &Material,
    path: &Path,
) -> Result<()> {
    let nc = mesh.n_cells();
    let mut s = String::with_capacity(nc * 200);
    s.push_str("# vtk DataFile Version 3.0\n");
    s.push_str("unified continuum mechanics snapshot\n");
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", mesh.n_nodes);
    for p in coords {
        let _ = writeln!(s, "{:.17e} {:.17e} 0", p.x, p.y);
    }
    let _ = writeln!(s, "CELLS {} {}", nc, 4 * nc);
    for cn in &mesh.cell_nodes {
        let _ = writeln!(s, "3 {} {} {}", cn[0], cn[1], cn[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {nc}");
    for _ in 0..nc {
        s.push_str("5\n");
    }

    let prims: Result<Vec<_>> =
        states.iter().enumerate().map(|(i, st)| state::primitive(mat, i, st)).collect();
    let prims = prims?;

    let _ = writeln!(s, "CELL_DATA {nc}");
    let scalar = |s: &mut String, name: &str, get: &dyn Fn(usize) -> f64| {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for i in 0..nc {
            let _ = writeln!(s, "{:.12e}", get(i));
        }
    };
    scalar(&mut s, "rho", &|i| prims[i].rho);
    scalar(&mut s, "p", &|i| prims[i].p);
    scalar(&mut s, "T", &|i| prims[i].temperature);
    if let Tau1Spec::Plastic { sigma_y, tau0, .. } = mat.tau1 {
        scalar(&mut s, "plastic_map", &|i| {
            state::equivalent_stress(prims[i].sigma) / sigma_y
        });
        scalar(&mut s, "tau1_ratio", &|i| {
            mat.tau1(state::equivalent_stress(prims[i].sigma)) / tau0
        });
    }

    let vector = |s: &mut String, name: &str, get: &dyn Fn(usize) -> crate::tensor::Vec3| {
        let _ = writeln!(s, "VECTORS {name} double");
        for i in 0..nc {
            let v = get(i);
            let _ = writeln!(s, "{:.12e} {:.12e} {:.12e}", v.x, v.y, v.z);
        }
    };
    vector(&mut s, "v", &|i| states[i].v);
    vector(&mut s, "J", &|i| states[i].j);
    vector(&mut s, "q", &|i| prims[i].q);

    let tensor = |s: &mut String, name: &str, get: &dyn Fn(usize) -> Sym3| {
        let _ = writeln!(s, "TENSORS {name} double");
        for i in 0..nc {
            let m = get(i).to_mat();
            for row in m.m {
                let _ = writeln!(s, "{:.12e} {:.12e} {:.12e}", row[0], row[1], row[2]);
            }
            s.push('\n');
        }
    };
    tensor(&mut s, "Ge", &|i| states[i].g);
    tensor(&mut s, "sigma", &|i| prims[i].sigma);

    std::fs::write(path, s)?;
    Ok(())
}

pub const SCATTER_HEADER: &str =
    "x,y,r,rho,p,vmag,u,T,sigma_xx,sigma_yy,sigma_zz,sigma_xy,sigma_xz,sigma_yz";

fn scatter_line(out: &mut String, x: Vec2, p: &crate::state::Primitive, v: crate::tensor::Vec3) {
    let _ = writeln!(
        out,
        "{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}",
        x.x,
        x.y,
        x.norm(),
        p.rho,
        p.p,
        v.norm(),
        v.x,
        p.temperature,
        p.sigma.xx,
        p.sigma.yy,
        p.sigma.zz,
        p.sigma.xy,
        p.sigma.xz,
        p.sigma.yz
    );
}

/// One row per cell at its centroid.
pub fn scatter_csv(
    mesh: &Mesh,
    geo: &Geometry,
    states: &[CellState],
    mat: &Material,
    path: &Path,
) -> Result<()> {
    let _ = mesh;
    let mut s = String::new();
    s.push_str(SCATTER_HEADER);
    s.push('\n');
    for i in 0..states.len().min(geo.centroid.len()) {
        let p = state::primitive(mat, i, &states[i])?;
        scatter_line(&mut s, geo.centroid[i], &p, states[i].v);
    }
    std::fs::write(path, s)?;
    Ok(())
}

/// Nearest-centroid cell indices for a horizontal cut at y = y0 sampled with
/// `n` points across [x0, x1].
pub fn cut_cells(geo: &Geometry, y0: f64, x0: f64, x1: f64, n: usize) -> Vec<usize> {
    (0..n)
        .map(|k| {
            let x = x0 + (k as f64 + 0.5) / n as f64 * (x1 - x0);
            let target = Vec2::new(x, y0);
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (i, c) in geo.centroid.iter().enumerate() {
                let d = (*c - target).norm();
                if d < best_d {
                    best_d = d;
                    best = i;
                }
            }
            best
        })
        .collect()
}

/// 1D-cut variant of the scatter file.
pub fn cut_csv(
    mesh: &Mesh,
    geo: &Geometry,
    states: &[CellState],
    mat: &Material,
    y0: f64,
    x0: f64,
    x1: f64,
    n: usize,
    path: &Path,
) -> Result<()> {
    let _ = mesh;
    let mut s = String::new();
    s.push_str(SCATTER_HEADER);
    s.push('\n');
    for i in cut_cells(geo, y0, x0, x1, n) {
        let p = state::primitive(mat, i, &states[i])?;
        scatter_line(&mut s, geo.centroid[i], &p, states[i].v);
    }
    std::fs::write(path, s)?;
    Ok(())
}

/// Mass-weighted decomposition of the total energy.
#[derive(Clone, Copy, Debug, Default)]
pub struct BudgetSample {
    pub t: f64,
    pub e_h: f64,
    pub e_e: f64,
    pub e_th: f64,
    pub e_k: f64,
    pub e_total: f64,
}

pub fn energy_budget(mat: &Material, states: &[CellState], t: f64) -> BudgetSample {
    let mut b = BudgetSample { t, ..Default::default() };
    for s in states {
        let m = s.mass;
        let ee = state::elastic_energy(mat, s.g);
        let eth = state::thermal_energy(mat, s.j);
        let ek = state::kinetic_energy(s.v);
        b.e_e += m * ee;
        b.e_th += m * eth;
        b.e_k += m * ek;
        b.e_h += m * (s.e - ee - eth - ek);
        b.e_total += m * s.e;
    }
    b
}

pub fn write_budget_csv(samples: &[BudgetSample], path: &Path) -> Result<()> {
    let mut s = String::from("t,E_h,E_e,E_th,E_k,E\n");
    for b in samples {
        let _ = writeln!(
            s,
            "{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e}",
            b.t, b.e_h, b.e_e, b.e_th, b.e_k, b.e_total
        );
    }
    std::fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::Material;
    use crate::tensor::Vec3;

    fn single_tri() -> (Mesh, Vec<Vec2>, Vec<CellState>, Material) {
        let coords = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
        let mesh = crate::mesh::build_topology(vec![[0, 1, 2]], &coords, None).unwrap();
        let mat = Material::vortex();
        let g = Sym3::identity();
        let e = state::total_energy(&mat, 1.0, 1.0, Vec3::ZERO, Vec3::ZERO, g).unwrap();
        let states =
            vec![CellState { omega: 1.0, v: Vec3::ZERO, e, j: Vec3::ZERO, g, mass: 0.5 }];
        (mesh, coords, states, mat)
    }

    #[test]
    fn vtk_single_triangle_round_trip() {
        let (mesh, coords, states, mat) = single_tri();
        let dir = std::env::temp_dir().join("gpr_vtk_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("tri.vtk");
        write_vtk(&mesh, &coords, &states, &mat, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# vtk DataFile Version 3.0"));
        assert!(text.contains("POINTS 3 double"));
        assert!(text.contains("CELLS 1 4"));
        assert!(text.contains("SCALARS rho double 1"));
        // Points re-parse to full precision.
        let after = text.split("POINTS 3 double\n").nth(1).unwrap();
        for (line, want) in after.lines().take(3).zip(coords.iter()) {
            let v: Vec<f64> = line.split_whitespace().map(|t| t.parse().unwrap()).collect();
            assert_eq!(Vec2::new(v[0], v[1]), *want);
        }
        // Inviscid preset: no plastic fields.
        assert!(!text.contains("plastic_map"));
        let (mesh, coords, mut states, mat) =
            (mesh, coords, states, Material::beryllium_shell());
        states[0].e = state::total_energy(&mat, 1845.0, 0.0, Vec3::ZERO, Vec3::ZERO, Sym3::identity())
            .unwrap();
        states[0].omega = 1.0 / 1845.0;
        write_vtk(&mesh, &coords, &states, &mat, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("plastic_map") && text.contains("tau1_ratio"));
    }

    #[test]
    fn scatter_and_cut_files() {
        let (mesh, coords, states, mat) = single_tri();
        let geo = crate::mesh::compute_geometry(&mesh, &coords).unwrap();
        let dir = std::env::temp_dir().join("gpr_csv_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("scatter.csv");
        scatter_csv(&mesh, &geo, &states, &mat, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), SCATTER_HEADER);
        assert_eq!(lines.count(), 1);

        let path = dir.join("cut.csv");
        cut_csv(&mesh, &geo, &states, &mat, 0.33, 0.0, 1.0, 7, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 8);

        // Empty state list gives a header-only file.
        let path = dir.join("empty.csv");
        scatter_csv(&mesh, &Geometry::default(), &[], &mat, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.trim(), SCATTER_HEADER);
    }

    #[test]
    fn budget_components_sum_to_total() {
        let (_, _, states, mat) = single_tri();
        let b = energy_budget(&mat, &states, 0.0);
        assert_eq!(b.e_k, 0.0);
        let sum = b.e_h + b.e_e + b.e_th + b.e_k;
        assert!((sum - b.e_total).abs() <= 1e-12 * b.e_total.abs());
    }
}
