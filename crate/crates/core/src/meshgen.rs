//! Mesh generators for the built-in problem domains: jittered structured
//! triangulations of boxes (optionally periodic) and body-fitted annuli.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SolverError};
use crate::mesh::{build_topology, Mesh};
use crate::tensor::Vec2;

/// Smooth random displacement field used to unstructure the generated
/// meshes: a superposition of sinusoidal modes with wavelengths of several
/// cell sizes. Locally smooth perturbations keep the discrete divergence of
/// the mesh-velocity error convergent, which pointwise white noise at the
/// cell scale does not.
struct SmoothJitter {
    modes: Vec<(Vec2, f64, Vec2)>, // wavevector, phase, direction
    amp: f64,
}

impl SmoothJitter {
    /// `period_x`/`period_y` snap the wavevector components so the field is
    /// exactly periodic across identified seams.
    fn new(
        rng: &mut ChaCha8Rng,
        h: f64,
        amplitude: f64,
        n_modes: usize,
        period_x: Option<f64>,
        period_y: Option<f64>,
    ) -> Self {
        let tau = std::f64::consts::TAU;
        let mut modes = Vec::with_capacity(n_modes);
        for _ in 0..n_modes {
            let lambda = h * rng.gen_range(5.0..12.0);
            let th = rng.gen_range(0.0..tau);
            let mut k = Vec2::new(th.cos(), th.sin()) * (tau / lambda);
            if let Some(l) = period_x {
                k.x = tau * (k.x * l / tau).round() / l;
            }
            if let Some(l) = period_y {
                k.y = tau * (k.y * l / tau).round() / l;
            }
            let phase = rng.gen_range(0.0..tau);
            let dth = rng.gen_range(0.0..tau);
            modes.push((k, phase, Vec2::new(dth.cos(), dth.sin())));
        }
        // About the requested RMS displacement per axis.
        let amp = amplitude * h / (n_modes as f64).sqrt() * 1.8;
        SmoothJitter { modes, amp }
    }

    fn eval(&self, x: Vec2) -> Vec2 {
        let mut d = Vec2::ZERO;
        for (k, phase, dir) in &self.modes {
            d += *dir * (k.dot(x) + phase).sin();
        }
        d * self.amp
    }
}

/// Boundary tags assigned by `generate_box_mesh`.
pub const TAG_LEFT: u8 = 0;
pub const TAG_RIGHT: u8 = 1;
pub const TAG_BOTTOM: u8 = 2;
pub const TAG_TOP: u8 = 3;
/// Boundary tags assigned by `generate_annulus_mesh`.
pub const TAG_INNER: u8 = 0;
pub const TAG_OUTER: u8 = 1;

#[derive(Clone, Copy, Debug)]
pub struct BoxMeshSpec {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    /// Target characteristic size.
    pub h: f64,
    /// Node perturbation amplitude relative to h; 0 gives a structured grid.
    pub jitter: f64,
    pub periodic_x: bool,
    pub periodic_y: bool,
    pub seed: u64,
}

impl BoxMeshSpec {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64, h: f64) -> Self {
        BoxMeshSpec { x0, x1, y0, y1, h, jitter: 0.25, periodic_x: false, periodic_y: false, seed: 0 }
    }
}

/// Unstructured triangulation of a rectangle: structured points, jittered,
/// each quad split along a randomly chosen diagonal. Periodic directions
/// identify the opposite layers of nodes and record the translation on the
/// wrapped cell corners.
pub fn generate_box_mesh(spec: &BoxMeshSpec) -> Result<(Mesh, Vec<Vec2>)> {
    let lx = spec.x1 - spec.x0;
    let ly = spec.y1 - spec.y0;
    if !(spec.h > 0.0) || lx <= 0.0 || ly <= 0.0 {
        return Err(SolverError::BadMeshRequest(format!(
            "box mesh needs positive extents and h, got {lx:.3e} x {ly:.3e}, h = {:.3e}",
            spec.h
        )));
    }
    let nx = (lx / spec.h).round() as usize;
    let ny = (ly / spec.h).round() as usize;
    if nx == 0 || ny == 0 {
        return Err(SolverError::BadMeshRequest(format!(
            "target size h = {:.3e} exceeds the domain extent {lx:.3e} x {ly:.3e}",
            spec.h
        )));
    }
    let dx = lx / nx as f64;
    let dy = ly / ny as f64;
    let cols = if spec.periodic_x { nx } else { nx + 1 };
    let rows = if spec.periodic_y { ny } else { ny + 1 };

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let jitter = SmoothJitter::new(
        &mut rng,
        spec.h,
        spec.jitter,
        8,
        spec.periodic_x.then_some(lx),
        spec.periodic_y.then_some(ly),
    );
    let mut coords = Vec::with_capacity(cols * rows);
    for j in 0..rows {
        for i in 0..cols {
            let base = Vec2::new(spec.x0 + i as f64 * dx, spec.y0 + j as f64 * dy);
            let d = jitter.eval(base);
            // Walls keep their normal coordinate; tangential slide is fine.
            let on_left = !spec.periodic_x && i == 0;
            let on_right = !spec.periodic_x && i == nx;
            let on_bottom = !spec.periodic_y && j == 0;
            let on_top = !spec.periodic_y && j == ny;
            let x = if on_left || on_right { base.x } else { base.x + d.x };
            let y = if on_bottom || on_top { base.y } else { base.y + d.y };
            coords.push(Vec2::new(x, y));
        }
    }

    // Node index plus the periodic translation needed to reach logical (i, j).
    let locate = |i: usize, j: usize| -> (u32, Vec2) {
        let (ci, sx) = if spec.periodic_x && i == nx { (0, lx) } else { (i, 0.0) };
        let (cj, sy) = if spec.periodic_y && j == ny { (0, ly) } else { (j, 0.0) };
        ((cj * cols + ci) as u32, Vec2::new(sx, sy))
    };

    let mut cells = Vec::with_capacity(2 * nx * ny);
    let mut shifts = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let q = [locate(i, j), locate(i + 1, j), locate(i + 1, j + 1), locate(i, j + 1)];
            // The smooth displacement keeps every quad well shaped, so a
            // random diagonal is safe and breaks any global edge alignment.
            let tris: [[usize; 3]; 2] = if rng.gen_bool(0.5) {
                [[0, 1, 2], [0, 2, 3]]
            } else {
                [[0, 1, 3], [1, 2, 3]]
            };
            for t in tris {
                cells.push([q[t[0]].0, q[t[1]].0, q[t[2]].0]);
                shifts.push([q[t[0]].1, q[t[1]].1, q[t[2]].1]);
            }
        }
    }

    let mut mesh = build_topology(cells, &coords, Some(shifts))?;
    tag_box_boundary(&mut mesh, &coords, spec);
    Ok((mesh, coords))
}

fn tag_box_boundary(mesh: &mut Mesh, coords: &[Vec2], spec: &BoxMeshSpec) {
    let eps = 1e-9 * (spec.x1 - spec.x0).max(spec.y1 - spec.y0);
    let faces = mesh.faces.clone();
    for (id, f) in faces.iter().enumerate() {
        if !f.is_boundary() {
            continue;
        }
        let (cell, edge) = f.left;
        let a = mesh.corner_pos(coords, cell as usize, edge as usize);
        let b = mesh.corner_pos(coords, cell as usize, (edge as usize + 1) % 3);
        let tag = if (a.x - spec.x0).abs() < eps && (b.x - spec.x0).abs() < eps {
            TAG_LEFT
        } else if (a.x - spec.x1).abs() < eps && (b.x - spec.x1).abs() < eps {
            TAG_RIGHT
        } else if (a.y - spec.y0).abs() < eps && (b.y - spec.y0).abs() < eps {
            TAG_BOTTOM
        } else {
            TAG_TOP
        };
        mesh.faces[id].tag = tag;
    }
}

/// Body-fitted triangulation of an annulus. The boundary rings resolve the
/// two radii exactly; interior rings are jittered radially and tangentially.
pub fn generate_annulus_mesh(
    r_int: f64,
    r_ext: f64,
    h: f64,
    jitter: f64,
    seed: u64,
) -> Result<(Mesh, Vec<Vec2>)> {
    if !(r_int > 0.0) || r_ext <= r_int || !(h > 0.0) {
        return Err(SolverError::BadMeshRequest(format!(
            "annulus needs 0 < r_int < r_ext and h > 0, got [{r_int}, {r_ext}], h = {h}"
        )));
    }
    let n_r = ((r_ext - r_int) / h).round().max(1.0) as usize;
    let r_mid = 0.5 * (r_int + r_ext);
    let n_t = ((2.0 * std::f64::consts::PI * r_mid) / h).round().max(8.0) as usize;
    let dr = (r_ext - r_int) / n_r as f64;
    let dt = 2.0 * std::f64::consts::PI / n_t as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter_field = SmoothJitter::new(&mut rng, dr.min(r_mid * dt), jitter, 8, None, None);
    let mut coords = Vec::with_capacity((n_r + 1) * n_t);
    for j in 0..=n_r {
        for i in 0..n_t {
            let r = r_int + j as f64 * dr;
            let th = i as f64 * dt;
            let base = Vec2::new(r * th.cos(), r * th.sin());
            let mut d = jitter_field.eval(base);
            if j == 0 || j == n_r {
                // Boundary rings resolve the radii exactly: tangential only.
                let rad = base.normalized();
                d -= rad * rad.dot(d);
                let moved = base + d;
                coords.push(moved.normalized() * r);
            } else {
                coords.push(base + d);
            }
        }
    }

    // The ring closes on itself; nodes are genuinely shared, no shifts needed.
    let idx = |j: usize, i: usize| (j * n_t + i % n_t) as u32;
    let mut cells = Vec::with_capacity(2 * n_r * n_t);
    for j in 0..n_r {
        for i in 0..n_t {
            let q = [idx(j, i), idx(j, i + 1), idx(j + 1, i + 1), idx(j + 1, i)];
            if rng.gen_bool(0.5) {
                cells.push([q[0], q[1], q[2]]);
                cells.push([q[0], q[2], q[3]]);
            } else {
                cells.push([q[0], q[1], q[3]]);
                cells.push([q[1], q[2], q[3]]);
            }
        }
    }

    let mut mesh = build_topology(cells, &coords, None)?;
    // Boundary faces lie on one of the two rings; classify by radius.
    let split = 0.5 * (r_int + r_ext);
    let faces = mesh.faces.clone();
    for (id, f) in faces.iter().enumerate() {
        if f.is_boundary() {
            let a = coords[f.nodes[0] as usize].norm();
            mesh.faces[id].tag = if a < split { TAG_INNER } else { TAG_OUTER };
        }
    }
    Ok((mesh, coords))
}
