//! Compatible vertex solver: one velocity per node from the multi-directional
//! Riemann balance, subcell forces, boundary constraints, and the Picard loop
//! coupling node motion, density, metric tensor, and the implicitly relaxed
//! tangential stress.

use rayon::prelude::*;

use crate::eos::Material;
use crate::error::{Result, SolverError};
use crate::mesh::{Geometry, Mesh};
use crate::refsol::KidderSolution;
use crate::relax::{strain_relax, RelaxReport, StrainRelaxInput};
use crate::state::{equivalent_stress, shear_stress, CellState};
use crate::tensor::{Mat3, Sym3, Vec2};

/// Planar symmetric 2x2 matrix for the nodal system.
#[derive(Clone, Copy, Debug, Default)]
pub struct MSym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl MSym2 {
    pub fn add(self, o: MSym2) -> MSym2 {
        MSym2 { xx: self.xx + o.xx, xy: self.xy + o.xy, yy: self.yy + o.yy }
    }

    pub fn mul_vec(self, v: Vec2) -> Vec2 {
        Vec2::new(self.xx * v.x + self.xy * v.y, self.xy * v.x + self.yy * v.y)
    }

    pub fn det(self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn solve(self, rhs: Vec2) -> Option<Vec2> {
        let d = self.det();
        if d.abs() <= 1e-30 * (self.xx.abs() + self.yy.abs()).powi(2).max(1e-300) {
            return None;
        }
        Some(Vec2::new((self.yy * rhs.x - self.xy * rhs.y) / d, (self.xx * rhs.y - self.xy * rhs.x) / d))
    }
}

/// Planar restriction of a symmetric stress tensor.
#[derive(Clone, Copy, Debug, Default)]
pub struct PlanarStress {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl PlanarStress {
    pub fn from_sym3(s: Sym3) -> Self {
        PlanarStress { xx: s.xx, xy: s.xy, yy: s.yy }
    }

    pub fn mul_vec(self, v: Vec2) -> Vec2 {
        Vec2::new(self.xx * v.x + self.xy * v.y, self.xy * v.x + self.yy * v.y)
    }

    pub fn shift(self, d: Sym3) -> Self {
        PlanarStress { xx: self.xx + d.xx, xy: self.xy + d.xy, yy: self.yy + d.yy }
    }
}

/// Boundary condition attached to a face tag.
#[derive(Clone, Copy, Debug)]
pub enum BcSpec {
    /// Zero normal velocity.
    SlipWall,
    /// Full velocity Dirichlet constraint (pistons).
    MovingWall { v: Vec2 },
    /// Prescribed exterior pressure acting on the boundary.
    Pressure(PressureSpec),
    /// Zero exterior traction.
    FreeTraction,
}

#[derive(Clone, Copy, Debug)]
pub enum PressureSpec {
    Constant(f64),
    KidderInner(KidderSolution),
    KidderOuter(KidderSolution),
}

impl PressureSpec {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            PressureSpec::Constant(p) => *p,
            PressureSpec::KidderInner(k) => k.boundary_pressures(t).0,
            PressureSpec::KidderOuter(k) => k.boundary_pressures(t).1,
        }
    }
}

/// Boundary table indexed by face tag.
#[derive(Clone, Debug)]
pub struct BoundaryTable {
    pub specs: Vec<BcSpec>,
}

impl BoundaryTable {
    pub fn uniform(spec: BcSpec) -> Self {
        BoundaryTable { specs: vec![spec; 4] }
    }

    pub fn spec(&self, tag: u8) -> &BcSpec {
        &self.specs[tag as usize]
    }
}

/// Velocity constraint of one node, rebuilt every step from the current wall
/// orientation.
#[derive(Clone, Copy, Debug)]
pub enum NodeConstraint {
    Free,
    /// Normal velocity prescribed: n . v = g.
    Slip { n: Vec2, g: f64 },
    Pinned { v: Vec2 },
}

/// Per-node constraints plus the applied exterior traction from pressure and
/// free-traction boundaries.
pub fn build_node_constraints(
    mesh: &Mesh,
    geo: &Geometry,
    bc: &BoundaryTable,
    t: f64,
) -> Result<(Vec<NodeConstraint>, Vec<Vec2>)> {
    let mut constraints = vec![NodeConstraint::Free; mesh.n_nodes];
    let mut force = vec![Vec2::ZERO; mesh.n_nodes];

    for node in 0..mesh.n_nodes {
        let bfaces = mesh.node_boundary_faces(node);
        if bfaces.is_empty() {
            continue;
        }
        let mut pinned: Option<Vec2> = None;
        let mut normals: Vec<(Vec2, f64)> = Vec::new();
        for &fid in bfaces {
            let f = &mesh.faces[fid as usize];
            let (cell, edge) = f.left;
            let n = geo.edge_normal[cell as usize][edge as usize];
            let s = geo.edge_len[cell as usize][edge as usize];
            match bc.spec(f.tag) {
                BcSpec::SlipWall => {
                    // Merge nearly parallel wall normals.
                    if let Some(e) = normals.iter_mut().find(|(m, _)| m.cross(n).abs() < 1e-9) {
                        e.0 = ((e.0 + n) * 0.5).normalized();
                    } else {
                        normals.push((n, 0.0));
                    }
                }
                BcSpec::MovingWall { v } => pinned = Some(*v),
                BcSpec::Pressure(p) => {
                    force[node] -= n * (p.value(t) * 0.5 * s);
                }
                BcSpec::FreeTraction => {}
            }
        }
        constraints[node] = if let Some(v) = pinned {
            NodeConstraint::Pinned { v }
        } else {
            match normals.len() {
                0 => NodeConstraint::Free,
                1 => NodeConstraint::Slip { n: normals[0].0, g: normals[0].1 },
                2 => {
                    let (n1, g1) = normals[0];
                    let (n2, g2) = normals[1];
                    let d = n1.cross(n2);
                    let v = Vec2::new((g1 * n2.y - g2 * n1.y) / d, (g2 * n1.x - g1 * n2.x) / d);
                    NodeConstraint::Pinned { v }
                }
                _ => return Err(SolverError::OverConstrainedNode(node)),
            }
        };
    }
    Ok((constraints, force))
}

/// Subcell matrices: M_rk = z sum over the two incident edges of s n (x) n.
pub fn assemble_corner_matrices(mesh: &Mesh, geo: &Geometry, z: &[f64]) -> Vec<[MSym2; 3]> {
    (0..mesh.n_cells())
        .into_par_iter()
        .map(|i| {
            let mut m = [MSym2::default(); 3];
            for k in 0..3 {
                // Corner k touches edges k-1 and k; each contributes its half
                // length, matching the corner-vector normalization so the
                // implied face traction is p + z (v - v_node) . n.
                for e in [(k + 2) % 3, k] {
                    let n = geo.edge_normal[i][e];
                    let s = 0.5 * geo.edge_len[i][e];
                    let w = z[i] * s;
                    m[k].xx += w * n.x * n.x;
                    m[k].xy += w * n.x * n.y;
                    m[k].yy += w * n.y * n.y;
                }
            }
            m
        })
        .collect()
}

/// Solve one node's momentum balance under its constraint.
fn solve_constrained(
    node: usize,
    m: MSym2,
    rhs: Vec2,
    constraint: NodeConstraint,
) -> Result<Vec2> {
    match constraint {
        NodeConstraint::Free => {
            m.solve(rhs).ok_or(SolverError::SingularNodeMatrix(node))
        }
        NodeConstraint::Slip { n, g } => {
            let mi_rhs = m.solve(rhs).ok_or(SolverError::SingularNodeMatrix(node))?;
            let mi_n = m.solve(n).ok_or(SolverError::SingularNodeMatrix(node))?;
            let lambda = (n.dot(mi_rhs) - g) / n.dot(mi_n);
            Ok(mi_rhs - mi_n * lambda)
        }
        NodeConstraint::Pinned { v } => Ok(v),
    }
}

/// One pass of the nodal solver: node velocities from the current corner
/// stresses and velocities.
pub fn solve_nodes(
    mesh: &Mesh,
    geo: &Geometry,
    corner_m: &[[MSym2; 3]],
    v_corner: &[[Vec2; 3]],
    t_corner: &[[PlanarStress; 3]],
    constraints: &[NodeConstraint],
    boundary_force: &[Vec2],
    out: &mut Vec<Vec2>,
) -> Result<()> {
    let solved: Vec<Result<Vec2>> = (0..mesh.n_nodes)
        .into_par_iter()
        .map(|r| {
            let mut m_sum = MSym2::default();
            let mut rhs = boundary_force[r];
            for &(cell, k) in mesh.node_cells(r) {
                let (c, k) = (cell as usize, k as usize);
                let m = corner_m[c][k];
                m_sum = m_sum.add(m);
                rhs += m.mul_vec(v_corner[c][k]) - t_corner[c][k].mul_vec(geo.corner[c][k]);
            }
            solve_constrained(r, m_sum, rhs, constraints[r])
        })
        .collect();
    out.clear();
    out.reserve(mesh.n_nodes);
    for r in solved {
        out.push(r?);
    }
    Ok(())
}

/// Subcell force of corner k in cell i for the final solved velocity.
pub fn subcell_force(
    m: MSym2,
    t: PlanarStress,
    corner: Vec2,
    v_node: Vec2,
    v_cell: Vec2,
) -> Vec2 {
    t.mul_vec(corner) + m.mul_vec(v_node - v_cell)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PicardExit {
    /// Stiff fluid limit: the metric reached the spherical equilibrium.
    Hydrodynamic,
    /// Elastic limit: the source vanished, convection-only update.
    Elastic,
    /// Residual stagnation between consecutive iterates.
    Stagnation,
    /// Iteration cap reached; last iterate returned.
    CapReached,
}

pub struct PicardOutput {
    pub v_node: Vec<Vec2>,
    pub corner_m: Vec<[MSym2; 3]>,
    /// Corner stresses used in the final nodal solve.
    pub t_corner: Vec<[PlanarStress; 3]>,
    pub coords_new: Vec<Vec2>,
    pub vol_new: Vec<f64>,
    pub rho_new: Vec<f64>,
    pub g_conv: Vec<Sym3>,
    pub g_new: Vec<Sym3>,
    pub sigma_new: Vec<Sym3>,
    pub grad_v: Vec<Mat3>,
    pub iters: u32,
    pub exit: PicardExit,
    pub relax_substeps: u32,
}

/// Signals that the trial node move inverted a cell; the driver halves the
/// time step and retries.
pub struct NeedsSmallerDt {
    pub cell: usize,
    pub volume: f64,
}

pub enum PicardError {
    Retry(NeedsSmallerDt),
    Fatal(SolverError),
}

impl From<SolverError> for PicardError {
    fn from(e: SolverError) -> Self {
        PicardError::Fatal(e)
    }
}

pub const PICARD_MAX_ITERS: u32 = 10;
pub const PICARD_TOL: f64 = 1e-12;

pub struct PicardInput<'a> {
    pub mesh: &'a Mesh,
    pub geo: &'a Geometry,
    pub coords: &'a [Vec2],
    pub states: &'a [CellState],
    pub mat: &'a Material,
    /// Swept mass flux rho a per cell, frozen at the step start.
    pub z: &'a [f64],
    /// Hydrodynamic pressure per cell, frozen during the loop.
    pub p_frozen: &'a [f64],
    /// Tangential stress at the step start.
    pub sigma_n: &'a [Sym3],
    /// Corner velocity inputs (cell averages at first order).
    pub v_corner: &'a [[Vec2; 3]],
    /// Corner total-stress inputs built from the step-start state.
    pub t_corner0: &'a [[PlanarStress; 3]],
    pub constraints: &'a [NodeConstraint],
    pub boundary_force: &'a [Vec2],
    pub dt: f64,
}

/// Picard loop: iterate node velocities against the implicitly relaxed
/// tangential stress until one of the exit conditions fires.
pub fn picard_solve(inp: &PicardInput) -> std::result::Result<PicardOutput, PicardError> {
    let mesh = inp.mesh;
    let nc = mesh.n_cells();
    let corner_m = assemble_corner_matrices(mesh, inp.geo, inp.z);

    let mut t_corner: Vec<[PlanarStress; 3]> = inp.t_corner0.to_vec();
    let mut sigma_cur: Vec<Sym3> = inp.sigma_n.to_vec();
    let mut v_node: Vec<Vec2> = Vec::with_capacity(mesh.n_nodes);
    let mut eps_h_prev = f64::INFINITY;
    let mut eps_e_prev = f64::INFINITY;

    struct CellUpdate {
        vol: f64,
        rho: f64,
        g_conv: Sym3,
        g_new: Sym3,
        sigma: Sym3,
        grad: Mat3,
        eps_h: f64,
        eps_e: f64,
        substeps: u32,
    }

    let mut iters = 0;
    loop {
        iters += 1;
        solve_nodes(
            mesh,
            inp.geo,
            &corner_m,
            inp.v_corner,
            &t_corner,
            inp.constraints,
            inp.boundary_force,
            &mut v_node,
        )
        .map_err(PicardError::Fatal)?;

        // Trial move and cell updates.
        let coords_new: Vec<Vec2> =
            inp.coords.iter().zip(v_node.iter()).map(|(x, v)| *x + *v * inp.dt).collect();

        let updates: Vec<std::result::Result<CellUpdate, PicardError>> = (0..nc)
            .into_par_iter()
            .map(|i| {
                let p = [
                    mesh.corner_pos(&coords_new, i, 0),
                    mesh.corner_pos(&coords_new, i, 1),
                    mesh.corner_pos(&coords_new, i, 2),
                ];
                let vol = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]);
                if vol <= 0.0 {
                    return Err(PicardError::Retry(NeedsSmallerDt { cell: i, volume: vol }));
                }
                let st = &inp.states[i];
                let rho_new = st.mass / vol;

                // Compatible velocity gradient from the solved node motion.
                let mut grad = Mat3::ZERO;
                for k in 0..3 {
                    let n = mesh.cell_nodes[i][k] as usize;
                    let v = v_node[n];
                    let c = inp.geo.corner[i][k];
                    grad.m[0][0] += v.x * c.x;
                    grad.m[0][1] += v.x * c.y;
                    grad.m[1][0] += v.y * c.x;
                    grad.m[1][1] += v.y * c.y;
                }
                grad = grad * (1.0 / inp.geo.volume[i]);

                let gl = st.g.to_mat().mat_mul(grad);
                let conv_rate = (gl + gl.transpose()).sym_part() * -1.0;
                let g_conv = st.g + conv_rate * inp.dt;

                let tau1 = inp.mat.tau1(equivalent_stress(sigma_cur[i]));

                let rho_n = st.rho();
                let d_n = (rho_n / inp.mat.rho0).powi(2);
                let d_np1 = (rho_new / inp.mat.rho0).powi(2);
                let relax_in = StrainRelaxInput::new(st.g, g_conv, tau1, inp.dt, d_n, d_np1);
                let (g_new, rep): (Sym3, RelaxReport) =
                    strain_relax(&relax_in).map_err(PicardError::Fatal)?;
                let sigma = shear_stress(inp.mat, rho_new, g_new);

                let eq = crate::state::init_equilibrium_metric(rho_new, inp.mat.rho0);
                Ok(CellUpdate {
                    vol,
                    rho: rho_new,
                    g_conv,
                    g_new,
                    sigma,
                    grad,
                    eps_h: (g_new - eq).frobenius(),
                    eps_e: (g_new - g_conv).frobenius(),
                    substeps: rep.substeps,
                })
            })
            .collect();

        let mut vol_new = Vec::with_capacity(nc);
        let mut rho_new = Vec::with_capacity(nc);
        let mut g_conv = Vec::with_capacity(nc);
        let mut g_new = Vec::with_capacity(nc);
        let mut sigma_new = Vec::with_capacity(nc);
        let mut grad_v = Vec::with_capacity(nc);
        let mut eps_h = 0.0f64;
        let mut eps_e = 0.0f64;
        let mut substeps = 0u32;
        for u in updates {
            match u {
                Ok(u) => {
                    vol_new.push(u.vol);
                    rho_new.push(u.rho);
                    g_conv.push(u.g_conv);
                    g_new.push(u.g_new);
                    sigma_new.push(u.sigma);
                    grad_v.push(u.grad);
                    eps_h = eps_h.max(u.eps_h);
                    eps_e = eps_e.max(u.eps_e);
                    substeps = substeps.max(u.substeps);
                }
                Err(e) => return Err(e),
            }
        }

        // Exit conditions: stiff fluid limit, elastic limit, stagnation, cap.
        let exit = if eps_h <= PICARD_TOL {
            Some(PicardExit::Hydrodynamic)
        } else if eps_e <= PICARD_TOL {
            Some(PicardExit::Elastic)
        } else if (eps_h - eps_h_prev).abs() <= PICARD_TOL
            || (eps_e - eps_e_prev).abs() <= PICARD_TOL
        {
            Some(PicardExit::Stagnation)
        } else if iters >= PICARD_MAX_ITERS {
            Some(PicardExit::CapReached)
        } else {
            None
        };

        if let Some(exit) = exit {
            return Ok(PicardOutput {
                v_node,
                corner_m,
                t_corner,
                coords_new,
                vol_new,
                rho_new,
                g_conv,
                g_new,
                sigma_new,
                grad_v,
                iters,
                exit,
                relax_substeps: substeps,
            });
        }

        eps_h_prev = eps_h;
        eps_e_prev = eps_e;

        // Refresh the corner stresses: the implicit tangential update is
        // applied as a cell-wide shift on top of the step-start extrapolation.
        for i in 0..nc {
            let dsig = sigma_new[i] - inp.sigma_n[i];
            for k in 0..3 {
                t_corner[i][k] = inp.t_corner0[i][k].shift(dsig);
            }
            sigma_cur[i] = sigma_new[i];
        }
    }
}
