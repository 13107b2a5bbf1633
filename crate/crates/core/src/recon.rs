//! Second-order piecewise-linear reconstruction per cell and state component:
//! fixed stencils from the vertex neighborhood, constrained least squares in
//! reference coordinates, and vertex-based slope limiting.

use rayon::prelude::*;

use crate::mesh::{Geometry, Mesh, RefMap};
use crate::tensor::Vec2;

/// Number of reconstructed scalar components: specific volume, velocity,
/// total energy, thermal impulse, and the six metric-tensor entries.
pub const NV: usize = 14;

/// Modal basis values (psi_2, psi_3) at the reference corners.
pub const PSI_CORNER: [[f64; 2]; 3] = [
    [-1.0 / 3.0, -1.0 / 3.0],
    [2.0 / 3.0, -1.0 / 3.0],
    [-1.0 / 3.0, 2.0 / 3.0],
];

/// Modal basis values at the reference edge midpoints (edge k joins corners
/// k and k+1).
pub const PSI_EDGE_MID: [[f64; 2]; 3] = [
    [1.0 / 6.0, -1.0 / 3.0],
    [1.0 / 6.0, 1.0 / 6.0],
    [-1.0 / 3.0, 1.0 / 6.0],
];

/// Reconstruction stencils, fixed by the topology. Each entry carries the
/// periodic translation that moves the stencil cell into the frame of the
/// host cell.
#[derive(Clone, Debug)]
pub struct StencilTable {
    off: Vec<u32>,
    cells: Vec<u32>,
    shifts: Vec<Vec2>,
}

impl StencilTable {
    pub fn entries(&self, cell: usize) -> (&[u32], &[Vec2]) {
        let a = self.off[cell] as usize;
        let b = self.off[cell + 1] as usize;
        (&self.cells[a..b], &self.shifts[a..b])
    }
}

/// Target stencil size: twice the number of degrees of freedom.
pub const STENCIL_SIZE: usize = 6;

/// Relative translation that maps cell `j` next to cell `i`, given that they
/// share at least one node.
fn relative_shift(mesh: &Mesh, i: usize, j: usize) -> Option<Vec2> {
    for (ki, &ni) in mesh.cell_nodes[i].iter().enumerate() {
        for (kj, &nj) in mesh.cell_nodes[j].iter().enumerate() {
            if ni == nj {
                return Some(mesh.cell_shifts[i][ki] - mesh.cell_shifts[j][kj]);
            }
        }
    }
    None
}

/// Gather the reconstruction stencils: vertex neighbors ring by ring until
/// enough candidates exist, then the `STENCIL_SIZE` closest by centroid
/// distance (ties broken by cell id). Distance selection keeps the stencils
/// isotropic on irregular meshes; small meshes fall back to whatever
/// neighbors exist.
pub fn build_stencil_table(mesh: &Mesh, centroid: &[Vec2]) -> StencilTable {
    let nc = mesh.n_cells();
    let mut off = Vec::with_capacity(nc + 1);
    let mut cells = Vec::new();
    let mut shifts = Vec::new();
    off.push(0u32);

    for i in 0..nc {
        let mut candidates: Vec<(u32, Vec2)> = Vec::with_capacity(2 * STENCIL_SIZE);
        let contains =
            |c: u32, list: &[(u32, Vec2)]| c as usize == i || list.iter().any(|&(x, _)| x == c);

        // Ring 1: direct vertex neighbors (sorted by id).
        for &j in mesh.vertex_neighbors(i) {
            let s = relative_shift(mesh, i, j as usize).unwrap();
            candidates.push((j, s));
        }
        // Ring 2 only if the first ring cannot fill the stencil.
        if candidates.len() < STENCIL_SIZE {
            let ring1: Vec<(u32, Vec2)> = candidates.clone();
            for &(k, sk) in &ring1 {
                for &j in mesh.vertex_neighbors(k as usize) {
                    if !contains(j, &candidates) {
                        let s = sk + relative_shift(mesh, k as usize, j as usize).unwrap();
                        candidates.push((j, s));
                    }
                }
            }
        }

        let xi = centroid[i];
        candidates.sort_unstable_by(|a, b| {
            let da = (centroid[a.0 as usize] + a.1 - xi).norm();
            let db = (centroid[b.0 as usize] + b.1 - xi).norm();
            da.partial_cmp(&db).unwrap().then(a.0.cmp(&b.0))
        });
        candidates.truncate(STENCIL_SIZE);

        for (c, s) in candidates {
            cells.push(c);
            shifts.push(s);
        }
        off.push(cells.len() as u32);
    }
    StencilTable { off, cells, shifts }
}

/// Limited linear polynomials: two slope coefficients per cell and variable,
/// in the modal basis of each cell's reference coordinates. The mean value is
/// the cell average by construction.
#[derive(Clone, Debug, Default)]
pub struct Recon {
    pub slopes: Vec<[[f64; 2]; NV]>,
    /// Cells whose least-squares system was rank deficient this pass.
    pub rank_deficient: u32,
}

impl Recon {
    pub fn zeros(nc: usize) -> Recon {
        Recon { slopes: vec![[[0.0; 2]; NV]; nc], rank_deficient: 0 }
    }

    /// Evaluate variable `var` of `cell` at reference coordinates `xi`.
    pub fn eval(&self, vals: &[[f64; NV]], cell: usize, var: usize, psi: [f64; 2]) -> f64 {
        let s = &self.slopes[cell][var];
        vals[cell][var] + s[0] * psi[0] + s[1] * psi[1]
    }

    /// All variables of `cell` at basis values `psi`.
    pub fn eval_all(&self, vals: &[[f64; NV]], cell: usize, psi: [f64; 2]) -> [f64; NV] {
        let mut out = [0.0; NV];
        let s = &self.slopes[cell];
        for v in 0..NV {
            out[v] = vals[cell][v] + s[v][0] * psi[0] + s[v][1] * psi[1];
        }
        out
    }

    /// Basis values at an arbitrary physical point of a cell.
    pub fn psi_at(map: &RefMap, x: Vec2) -> [f64; 2] {
        let xi = map.to_reference(x);
        [xi.x - 1.0 / 3.0, xi.y - 1.0 / 3.0]
    }
}

/// Unlimited constrained least squares followed by vertex limiting. The
/// conservation constraint pins the mean mode to the cell average, so only
/// the two slope modes are solved for.
pub fn reconstruct(
    mesh: &Mesh,
    geo: &Geometry,
    coords: &[Vec2],
    table: &StencilTable,
    vals: &[[f64; NV]],
    limit: bool,
) -> Recon {
    let nc = mesh.n_cells();
    let mut slopes = vec![[[0.0; 2]; NV]; nc];
    let deficient: u32 = slopes
        .par_iter_mut()
        .enumerate()
        .map(|(i, out)| reconstruct_cell(mesh, geo, coords, table, vals, limit, i, out))
        .map(|d| d as u32)
        .sum();
    Recon { slopes, rank_deficient: deficient }
}

fn reconstruct_cell(
    mesh: &Mesh,
    geo: &Geometry,
    coords: &[Vec2],
    table: &StencilTable,
    vals: &[[f64; NV]],
    limit: bool,
    i: usize,
    out: &mut [[f64; 2]; NV],
) -> bool {
    let (cells, shifts) = table.entries(i);
    if cells.len() < 2 {
        return false;
    }
    let map = match RefMap::for_cell(mesh, coords, i) {
        Ok(m) => m,
        Err(_) => return true,
    };

    // Mean basis values over each stencil cell by the reference-edge-midpoint
    // rule, and the normal equations of the slope fit.
    let mut m11 = 0.0;
    let mut m12 = 0.0;
    let mut m22 = 0.0;
    let mut rows = [[0.0f64; 2]; 16];
    for (s, (&j, &shift)) in cells.iter().zip(shifts.iter()).enumerate() {
        let j = j as usize;
        let mut a = 0.0;
        let mut b = 0.0;
        for k in 0..3 {
            let xi = map.to_reference(geo.edge_mid[j][k] + shift);
            a += xi.x;
            b += xi.y;
        }
        a = a / 3.0 - 1.0 / 3.0;
        b = b / 3.0 - 1.0 / 3.0;
        rows[s] = [a, b];
        m11 += a * a;
        m12 += a * b;
        m22 += b * b;
    }
    let det = m11 * m22 - m12 * m12;
    if det <= 1e-12 * (m11 + m22) * (m11 + m22) {
        return true;
    }
    let inv = [[m22 / det, -m12 / det], [-m12 / det, m11 / det]];

    for v in 0..NV {
        let q_i = vals[i][v];
        let mut r1 = 0.0;
        let mut r2 = 0.0;
        for (s, &j) in cells.iter().enumerate() {
            let dq = vals[j as usize][v] - q_i;
            r1 += rows[s][0] * dq;
            r2 += rows[s][1] * dq;
        }
        out[v] = [inv[0][0] * r1 + inv[0][1] * r2, inv[1][0] * r1 + inv[1][1] * r2];
    }

    if limit {
        limit_barth_jespersen(mesh, vals, i, out);
    }
    false
}

/// Scale both slope modes by the minimum nodal limiter factor so all vertex
/// values stay inside the vertex-neighborhood bounds.
pub fn limit_barth_jespersen(mesh: &Mesh, vals: &[[f64; NV]], i: usize, slopes: &mut [[f64; 2]; NV]) {
    for v in 0..NV {
        let q_i = vals[i][v];
        let mut q_min = q_i;
        let mut q_max = q_i;
        for &j in mesh.vertex_neighbors(i) {
            let q = vals[j as usize][v];
            q_min = q_min.min(q);
            q_max = q_max.max(q);
        }
        let mut b = 1.0f64;
        for psi in PSI_CORNER {
            let w = q_i + slopes[v][0] * psi[0] + slopes[v][1] * psi[1];
            let d = w - q_i;
            let br = if d.abs() < 1e-14 * q_i.abs().max(1.0) {
                1.0
            } else if d > 0.0 {
                ((q_max - q_i) / d).min(1.0)
            } else {
                ((q_min - q_i) / d).min(1.0)
            };
            b = b.min(br);
        }
        debug_assert!((0.0..=1.0).contains(&b));
        slopes[v][0] *= b;
        slopes[v][1] *= b;
    }
}
