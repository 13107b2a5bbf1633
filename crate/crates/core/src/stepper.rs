//! The fused update: time-step control, first-order step with geometry-exact
//! volume fluxes and face-based heat fluxes, the compatible velocity
//! gradient, and the two-stage implicit-explicit driver for second order.

use rayon::prelude::*;

use crate::eos::Material;
use crate::error::{Result, SolverError};
use crate::mesh::{compute_geometry, Geometry, Mesh};
use crate::nodal::{
    build_node_constraints, picard_solve, subcell_force, BoundaryTable, NodeConstraint,
    PicardError, PicardExit, PicardInput, PicardOutput, PlanarStress,
};
use crate::recon::{self, StencilTable, NV, PSI_CORNER, PSI_EDGE_MID};
use crate::relax::{relax_thermal_impulse, strain_relax, StrainRelaxInput};
use crate::state::{self, CellState, Primitive};
use crate::tensor::{Mat3, Sym3, Vec2, Vec3};

/// Second-stage weight of the two-stage implicit-explicit scheme.
pub const IMEX_BETA: f64 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;

#[derive(Clone, Copy, Debug)]
pub struct CflSchedule {
    pub t_switch: f64,
    pub cfl_early: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct StepControls {
    pub cfl: f64,
    /// Growth cap on consecutive time steps.
    pub c_m: f64,
    pub order: u8,
    pub schedule: Option<CflSchedule>,
}

impl Default for StepControls {
    fn default() -> Self {
        StepControls { cfl: 0.45, c_m: 1.1, order: 2, schedule: None }
    }
}

impl StepControls {
    pub fn cfl_at(&self, t: f64) -> f64 {
        match self.schedule {
            Some(s) if t < s.t_switch => s.cfl_early,
            _ => self.cfl,
        }
    }
}

/// Per-step diagnostics surfaced to the run driver.
#[derive(Clone, Copy, Debug, Default)]
pub struct StepInfo {
    pub dt: f64,
    pub retries: u32,
    pub picard_iters: u32,
    pub picard_capped: bool,
    /// max_i |rho(GCL) - m/|T|| / rho
    pub gcl_residual: f64,
    /// max over interior nodes of |sum_i f_ri| / sum_i |f_ri|
    pub force_residual: f64,
    pub rank_deficient: u32,
}

/// Discrete velocity gradient of one cell from its node velocities and
/// corner vectors; exact for affine fields.
pub fn velocity_gradient(v_nodes: &[Vec3; 3], corners: &[Vec2; 3], volume: f64) -> Mat3 {
    let mut grad = Mat3::ZERO;
    for k in 0..3 {
        let v = v_nodes[k];
        let c = corners[k];
        grad.m[0][0] += v.x * c.x;
        grad.m[0][1] += v.x * c.y;
        grad.m[1][0] += v.y * c.x;
        grad.m[1][1] += v.y * c.y;
        grad.m[2][0] += v.z * c.x;
        grad.m[2][1] += v.z * c.y;
    }
    grad * (1.0 / volume)
}

/// Rusanov heat and thermal-impulse fluxes across one face, as seen from the
/// side whose outward normal is `n`. Both are antisymmetric under swapping
/// the sides together with the normal.
pub fn face_flux_heat(
    left: &FaceState,
    right: &FaceState,
    n: Vec2,
    lambda: f64,
    alpha: f64,
) -> (f64, Vec3) {
    let a2 = alpha * alpha;
    let q_l = left.j * (a2 * left.temp);
    let q_r = right.j * (a2 * right.temp);
    let nn = n.to3();
    let energy = 0.5 * (q_l + q_r).dot(nn) - 0.5 * lambda * (right.e - left.e);
    let jflux = nn * (0.5 * (left.temp + right.temp)) - (right.j - left.j) * (0.5 * lambda);
    (energy, jflux)
}

/// State restriction carried per cell side of a face.
#[derive(Clone, Copy, Debug, Default)]
pub struct FaceState {
    pub temp: f64,
    pub e: f64,
    pub j: Vec3,
}

struct StageEval {
    geo: Geometry,
    picard: PicardOutput,
    /// Per-cell sum of subcell forces (planar).
    force: Vec<Vec2>,
    /// Per-cell sum of f . v_node.
    work: Vec<f64>,
    /// Per-cell sum of outward heat fluxes q_hat s (zero when alpha = 0).
    heat: Vec<f64>,
    /// Per-cell convective forcing of the thermal impulse, -(1/m) sum T_hat s.
    p_star: Vec<Vec3>,
    force_residual: f64,
    rank_deficient: u32,
}

pub struct Simulation {
    pub mesh: Mesh,
    pub mat: Material,
    pub bc: BoundaryTable,
    pub controls: StepControls,
    pub coords: Vec<Vec2>,
    pub states: Vec<CellState>,
    pub t: f64,
    pub dt_prev: Option<f64>,
    pub steps: u64,
    stencils: StencilTable,
    /// Velocity gradients of the last completed step (first stage).
    pub last_grad: Vec<Mat3>,
}

impl Simulation {
    pub fn new(
        mesh: Mesh,
        coords: Vec<Vec2>,
        states: Vec<CellState>,
        mat: Material,
        bc: BoundaryTable,
        controls: StepControls,
    ) -> Result<Self> {
        assert_eq!(states.len(), mesh.n_cells());
        let geo0 = compute_geometry(&mesh, &coords)?;
        let stencils = recon::build_stencil_table(&mesh, &geo0.centroid);
        Ok(Simulation {
            mesh,
            mat,
            bc,
            controls,
            coords,
            states,
            t: 0.0,
            dt_prev: None,
            steps: 0,
            stencils,
            last_grad: Vec::new(),
        })
    }

    pub fn primitives(&self) -> Result<Vec<Primitive>> {
        self.states
            .par_iter()
            .enumerate()
            .map(|(i, s)| state::primitive(&self.mat, i, s))
            .collect()
    }

    /// CFL-limited step with the growth cap; the caller clips to the final
    /// time.
    pub fn compute_dt(&self, prims: &[Primitive], geo: &Geometry) -> Result<f64> {
        let mut min_ratio = f64::INFINITY;
        for i in 0..self.mesh.n_cells() {
            let a = self.mat.max_wavespeed(prims[i].rho, prims[i].p, prims[i].temperature)?;
            if a > 0.0 {
                min_ratio = min_ratio.min(geo.char_len[i] / a);
            }
        }
        if !min_ratio.is_finite() {
            return Err(SolverError::ZeroWavespeed);
        }
        let mut dt = self.controls.cfl_at(self.t) * min_ratio;
        if let Some(prev) = self.dt_prev {
            dt = dt.min(self.controls.c_m * prev);
        }
        Ok(dt)
    }

    /// Advance one step, bounded by `dt_cap`; halves the step on tangling
    /// signals from the trial moves.
    pub fn advance(&mut self, dt_cap: f64) -> Result<StepInfo> {
        let prims = self.primitives()?;
        let geo = compute_geometry(&self.mesh, &self.coords)?;
        let mut dt = self.compute_dt(&prims, &geo)?.min(dt_cap);
        let mut retries = 0;
        loop {
            let attempt = if self.controls.order == 1 {
                self.step_first_order(dt, &prims, &geo)
            } else {
                self.step_imex(dt, &prims, &geo)
            };
            match attempt {
                Ok(mut info) => {
                    info.dt = dt;
                    info.retries = retries;
                    self.t += dt;
                    self.dt_prev = Some(dt);
                    self.steps += 1;
                    return Ok(info);
                }
                Err(PicardError::Retry(_)) => {
                    retries += 1;
                    if retries > 24 {
                        return Err(SolverError::TimeStepUnderflow(self.t));
                    }
                    dt *= 0.5;
                }
                Err(PicardError::Fatal(e)) => return Err(e),
            }
        }
    }

    /// Evaluate nodal and face fluxes for one state snapshot.
    #[allow(clippy::too_many_arguments)]
    fn evaluate_stage(
        &self,
        coords: &[Vec2],
        geo: &Geometry,
        states: &[CellState],
        prims: &[Primitive],
        t_stage: f64,
        dt_picard: f64,
        order2: bool,
    ) -> std::result::Result<StageEval, PicardError> {
        let mesh = &self.mesh;
        let nc = mesh.n_cells();

        // Swept mass flux, frozen for this stage.
        let z: Vec<f64> = (0..nc)
            .map(|i| {
                let a = self
                    .mat
                    .max_wavespeed(prims[i].rho, prims[i].p, prims[i].temperature)
                    .map_err(SolverError::from)?;
                Ok(prims[i].rho * a)
            })
            .collect::<Result<_>>()?;

        // Corner and face input states.
        let mut v_corner: Vec<[Vec2; 3]> = vec![[Vec2::ZERO; 3]; nc];
        let mut t_corner: Vec<[PlanarStress; 3]> = vec![[PlanarStress::default(); 3]; nc];
        let mut face_states: Vec<[FaceState; 3]> = vec![[FaceState::default(); 3]; nc];
        let mut rank_deficient = 0;

        if order2 {
            let vals: Vec<[f64; NV]> = states.par_iter().map(pack_state).collect();
            let rec = recon::reconstruct(mesh, geo, coords, &self.stencils, &vals, true);
            rank_deficient = rec.rank_deficient;
            let mat = &self.mat;
            v_corner
                .par_iter_mut()
                .zip(t_corner.par_iter_mut())
                .zip(face_states.par_iter_mut())
                .enumerate()
                .for_each(|(i, ((vc, tc), fs))| {
                    for k in 0..3 {
                        let w = rec.eval_all(&vals, i, PSI_CORNER[k]);
                        match corner_inputs(mat, &w) {
                            Some((v, t)) => {
                                vc[k] = v;
                                tc[k] = t;
                            }
                            None => {
                                vc[k] = states[i].v.xy();
                                tc[k] = PlanarStress::from_sym3(prims[i].total_stress);
                            }
                        }
                        let w = rec.eval_all(&vals, i, PSI_EDGE_MID[k]);
                        fs[k] = face_state_from(mat, &w).unwrap_or(FaceState {
                            temp: prims[i].temperature,
                            e: states[i].e,
                            j: states[i].j,
                        });
                    }
                });
        } else {
            for i in 0..nc {
                let t = PlanarStress::from_sym3(prims[i].total_stress);
                let v = states[i].v.xy();
                v_corner[i] = [v; 3];
                t_corner[i] = [t; 3];
                face_states[i] = [FaceState {
                    temp: prims[i].temperature,
                    e: states[i].e,
                    j: states[i].j,
                }; 3];
            }
        }

        let (constraints, boundary_force) =
            build_node_constraints(mesh, geo, &self.bc, t_stage).map_err(PicardError::Fatal)?;

        let sigma_n: Vec<Sym3> = prims.iter().map(|p| p.sigma).collect();
        let p_frozen: Vec<f64> = prims.iter().map(|p| p.p).collect();
        let picard = picard_solve(&PicardInput {
            mesh,
            geo,
            coords,
            states,
            mat: &self.mat,
            z: &z,
            p_frozen: &p_frozen,
            sigma_n: &sigma_n,
            v_corner: &v_corner,
            t_corner0: &t_corner,
            constraints: &constraints,
            boundary_force: &boundary_force,
            dt: dt_picard,
        })?;

        // Subcell forces and the per-node compatibility residual.
        let mut force = vec![Vec2::ZERO; nc];
        let mut work = vec![0.0; nc];
        let mut node_sum = vec![Vec2::ZERO; mesh.n_nodes];
        let mut node_abs = vec![0.0; mesh.n_nodes];
        for i in 0..nc {
            for k in 0..3 {
                let n = mesh.cell_nodes[i][k] as usize;
                let f = subcell_force(
                    picard.corner_m[i][k],
                    picard.t_corner[i][k],
                    geo.corner[i][k],
                    picard.v_node[n],
                    v_corner[i][k],
                );
                force[i] += f;
                work[i] += f.dot(picard.v_node[n]);
                node_sum[n] += f;
                node_abs[n] += f.norm();
            }
        }
        let mut force_residual = 0.0f64;
        for n in 0..mesh.n_nodes {
            if matches!(constraints[n], NodeConstraint::Free)
                && mesh.node_boundary_faces(n).is_empty()
                && node_abs[n] > 0.0
            {
                force_residual = force_residual.max(node_sum[n].norm() / node_abs[n]);
            }
        }

        // Face-based Rusanov fluxes for the energy and thermal impulse.
        let alpha = self.mat.alpha;
        let mut heat = vec![0.0; nc];
        let mut jflux = vec![Vec3::ZERO; nc];
        for f in &mesh.faces {
            let (ci, ei) = (f.left.0 as usize, f.left.1 as usize);
            let s = geo.edge_len[ci][ei];
            let n = geo.edge_normal[ci][ei];
            let left = face_states[ci][ei];
            let (right, lam) = match f.right {
                Some((cj, ej)) => {
                    let cj = cj as usize;
                    let a_i = z[ci] / prims[ci].rho;
                    let a_j = z[cj] / prims[cj].rho;
                    (face_states[cj][ej as usize], a_i.max(a_j))
                }
                None => {
                    let lam = z[ci] / prims[ci].rho;
                    (boundary_ghost(&self.mat, &self.bc, f.tag, t_stage, &left, prims[ci].rho, n), lam)
                }
            };
            let (qn, jn) = face_flux_heat(&left, &right, n, lam, alpha);
            if alpha > 0.0 {
                heat[ci] += qn * s;
            }
            jflux[ci] += jn * s;
            if let Some((cj, _)) = f.right {
                let cj = cj as usize;
                if alpha > 0.0 {
                    heat[cj] -= qn * s;
                }
                jflux[cj] -= jn * s;
            }
        }
        let p_star: Vec<Vec3> =
            (0..nc).map(|i| jflux[i] * (-1.0 / self.states[i].mass)).collect();

        Ok(StageEval { geo: geo.clone(), picard, force, work, heat, p_star, force_residual, rank_deficient })
    }

    /// Effective relaxation time of the thermal impulse at the analyzed
    /// discrete levels: density ahead, temperature behind.
    fn tau_thermal(&self, rho_new: f64, temp_old: f64) -> Result<f64> {
        let tau2 = self.mat.tau2()?;
        let t = temp_old.max(1e-300);
        Ok(tau2 * (rho_new / self.mat.rho0) * (self.mat.t0 / t))
    }

    fn step_first_order(
        &mut self,
        dt: f64,
        prims: &[Primitive],
        geo: &Geometry,
    ) -> std::result::Result<StepInfo, PicardError> {
        let order2 = false;
        let eval = self.evaluate_stage(&self.coords, geo, &self.states, prims, self.t, dt, order2)?;
        let nc = self.mesh.n_cells();

        let coords_new = eval.picard.coords_new.clone();
        let vflux = self.volume_flux(&self.coords, &coords_new, |n| eval.picard.v_node[n]);

        let mut info = StepInfo::default();
        info.picard_iters = eval.picard.iters;
        info.picard_capped = eval.picard.exit == PicardExit::CapReached;
        info.force_residual = eval.force_residual;

        let mut states_new = self.states.clone();
        let mut gcl = 0.0f64;
        for i in 0..nc {
            let st = &self.states[i];
            let m = st.mass;
            let omega_new = st.omega + dt / m * vflux[i];
            let v_new = st.v + eval.force[i].to3() * (dt / m);
            let e_new = st.e + dt / m * (eval.work[i] - eval.heat[i]);
            let tau = self
                .tau_thermal(eval.picard.rho_new[i], prims[i].temperature)
                .map_err(PicardError::Fatal)?;
            let (j_new, _) = relax_thermal_impulse(st.j, eval.p_star[i], tau, dt);
            states_new[i] = CellState {
                omega: omega_new,
                v: v_new,
                e: e_new,
                j: j_new,
                g: eval.picard.g_new[i],
                mass: m,
            };
            let rho_gcl = 1.0 / omega_new;
            let rho_geom = m / eval.picard.vol_new[i];
            gcl = gcl.max((rho_gcl - rho_geom).abs() / rho_gcl.abs());
        }
        info.gcl_residual = gcl;
        info.rank_deficient = eval.rank_deficient;

        self.last_grad = eval.picard.grad_v.clone();
        self.states = states_new;
        self.coords = coords_new;
        Ok(info)
    }

    fn step_imex(
        &mut self,
        dt: f64,
        prims: &[Primitive],
        geo: &Geometry,
    ) -> std::result::Result<StepInfo, PicardError> {
        let beta = IMEX_BETA;
        let mesh_nc = self.mesh.n_cells();

        // Stage 1: first-order step of size beta dt from t^n.
        let ev1 =
            self.evaluate_stage(&self.coords, geo, &self.states, prims, self.t, beta * dt, true)?;
        let coords_1 = ev1.picard.coords_new.clone();
        let vflux1 = self.volume_flux(&self.coords, &coords_1, |n| ev1.picard.v_node[n]);

        let mut states_1 = self.states.clone();
        let mut dj_rel = vec![Vec3::ZERO; mesh_nc];
        let mut k_rate_n = vec![Sym3::ZERO; mesh_nc];
        for i in 0..mesh_nc {
            let st = &self.states[i];
            let m = st.mass;
            let tau = self
                .tau_thermal(ev1.picard.rho_new[i], prims[i].temperature)
                .map_err(PicardError::Fatal)?;
            let (j1, dj) = relax_thermal_impulse(st.j, ev1.p_star[i], tau, beta * dt);
            dj_rel[i] = dj;
            k_rate_n[i] = (ev1.picard.g_conv[i] - st.g) * (1.0 / (beta * dt));
            states_1[i] = CellState {
                omega: st.omega + beta * dt / m * vflux1[i],
                v: st.v + ev1.force[i].to3() * (beta * dt / m),
                e: st.e + beta * dt / m * (ev1.work[i] - ev1.heat[i]),
                j: j1,
                g: ev1.picard.g_new[i],
                mass: m,
            };
        }

        // Stage 2 operators at the stage-1 state and geometry.
        let geo_1 = match compute_geometry(&self.mesh, &coords_1) {
            Ok(g) => g,
            Err(SolverError::InvertedCell(cell, volume)) => {
                return Err(PicardError::Retry(crate::nodal::NeedsSmallerDt { cell, volume }))
            }
            Err(e) => return Err(PicardError::Fatal(e)),
        };
        let prims_1: Vec<Primitive> = states_1
            .par_iter()
            .enumerate()
            .map(|(i, s)| state::primitive(&self.mat, i, s))
            .collect::<Result<_>>()
            .map_err(|_| {
                // A stage state outside the EOS range is a transient artifact
                // of too large a step.
                PicardError::Retry(crate::nodal::NeedsSmallerDt { cell: 0, volume: 0.0 })
            })?;
        let ev2 = self.evaluate_stage(
            &coords_1,
            &geo_1,
            &states_1,
            &prims_1,
            self.t + beta * dt,
            dt,
            true,
        )?;

        // Final trajectory and volume flux.
        let coords_new: Vec<Vec2> = (0..self.mesh.n_nodes)
            .map(|n| {
                let veff = ev1.picard.v_node[n] * (beta - 1.0) + ev2.picard.v_node[n] * (2.0 - beta);
                self.coords[n] + veff * dt
            })
            .collect();
        // Validate before committing.
        let geo_new = match compute_geometry(&self.mesh, &coords_new) {
            Ok(g) => g,
            Err(SolverError::InvertedCell(cell, volume)) => {
                return Err(PicardError::Retry(crate::nodal::NeedsSmallerDt { cell, volume }))
            }
            Err(e) => return Err(PicardError::Fatal(e)),
        };
        let vflux = self.volume_flux(&self.coords, &coords_new, |n| {
            ev1.picard.v_node[n] * (beta - 1.0) + ev2.picard.v_node[n] * (2.0 - beta)
        });

        let mut info = StepInfo::default();
        info.picard_iters = ev1.picard.iters.max(ev2.picard.iters);
        info.picard_capped = ev1.picard.exit == PicardExit::CapReached
            || ev2.picard.exit == PicardExit::CapReached;
        info.force_residual = ev1.force_residual.max(ev2.force_residual);
        info.rank_deficient = ev1.rank_deficient + ev2.rank_deficient;

        let mut states_new = self.states.clone();
        let mut gcl = 0.0f64;
        let w_n = beta - 1.0;
        let w_1 = 2.0 - beta;
        for i in 0..mesh_nc {
            let st = &self.states[i];
            let m = st.mass;
            let omega_new = st.omega + dt / m * vflux[i];
            let rho_new = m / geo_new.volume[i];
            let v_new =
                st.v + (ev1.force[i] * w_n + ev2.force[i] * w_1).to3() * (dt / m);
            let e_new = st.e
                + dt / m
                    * (w_n * (ev1.work[i] - ev1.heat[i]) + w_1 * (ev2.work[i] - ev2.heat[i]));

            // Thermal impulse: explicit combination plus the stage-1 implicit
            // increment, closed by the exact backward solve of the final
            // implicit weight.
            let tau = self
                .tau_thermal(rho_new, prims_1[i].temperature)
                .map_err(PicardError::Fatal)?;
            let a = st.j
                + (ev1.p_star[i] * w_n + ev2.p_star[i] * w_1) * dt
                + dj_rel[i] * ((1.0 - beta) / beta);
            let j_new = a * (1.0 / (1.0 + beta * dt / tau));

            // Metric tensor: convective combination plus the stage-1 implicit
            // increment, relaxed over the final implicit weight.
            let k1 = (ev2.picard.g_conv[i] - states_1[i].g) * (1.0 / dt);
            let a_g = st.g
                + (k_rate_n[i] * w_n + k1 * w_1) * dt
                + (ev1.picard.g_new[i] - ev1.picard.g_conv[i]) * ((1.0 - beta) / beta);
            let tau1 = self.mat.tau1(state::equivalent_stress(prims_1[i].sigma));
            let d_np1 = (rho_new / self.mat.rho0).powi(2);
            let d_ag = a_g.det();
            if d_ag <= 0.0 {
                return Err(PicardError::Retry(crate::nodal::NeedsSmallerDt {
                    cell: i,
                    volume: d_ag,
                }));
            }
            let relax_in = StrainRelaxInput::new(a_g, a_g, tau1, beta * dt, d_ag, d_np1);
            let (g_new, _) = strain_relax(&relax_in).map_err(PicardError::Fatal)?;

            states_new[i] = CellState { omega: omega_new, v: v_new, e: e_new, j: j_new, g: g_new, mass: m };
            let rho_gcl = 1.0 / omega_new;
            gcl = gcl.max((rho_gcl - rho_new).abs() / rho_gcl.abs());
        }
        info.gcl_residual = gcl;

        self.last_grad = ev2.picard.grad_v.clone();
        self.states = states_new;
        self.coords = coords_new;
        Ok(info)
    }

    /// Time-exact volume flux sum_r v_r . c_bar per cell, with the corner
    /// vectors averaged over start, midpoint, and end configurations. The
    /// corner vectors are linear in time, so the quadrature integrates the
    /// quadratic volume evolution exactly.
    fn volume_flux(
        &self,
        coords_a: &[Vec2],
        coords_b: &[Vec2],
        v_node: impl Fn(usize) -> Vec2 + Sync,
    ) -> Vec<f64> {
        let mesh = &self.mesh;
        let coords_mid: Vec<Vec2> = coords_a
            .iter()
            .zip(coords_b.iter())
            .map(|(a, b)| (*a + *b) * 0.5)
            .collect();
        (0..mesh.n_cells())
            .into_par_iter()
            .map(|i| {
                let ca = corner_vectors(mesh, coords_a, i);
                let cm = corner_vectors(mesh, &coords_mid, i);
                let cb = corner_vectors(mesh, coords_b, i);
                let mut flux = 0.0;
                for k in 0..3 {
                    let cbar = (ca[k] + cm[k] * 4.0 + cb[k]) / 6.0;
                    flux += v_node(mesh.cell_nodes[i][k] as usize).dot(cbar);
                }
                flux
            })
            .collect()
    }
}

/// Corner vectors of one cell at arbitrary coordinates, no validity checks.
pub fn corner_vectors(mesh: &Mesh, coords: &[Vec2], i: usize) -> [Vec2; 3] {
    let p = [
        mesh.corner_pos(coords, i, 0),
        mesh.corner_pos(coords, i, 1),
        mesh.corner_pos(coords, i, 2),
    ];
    let sn = [
        (p[1] - p[0]).rot_cw(),
        (p[2] - p[1]).rot_cw(),
        (p[0] - p[2]).rot_cw(),
    ];
    [
        (sn[2] + sn[0]) * 0.5,
        (sn[0] + sn[1]) * 0.5,
        (sn[1] + sn[2]) * 0.5,
    ]
}

pub fn pack_state(s: &CellState) -> [f64; NV] {
    [
        s.omega, s.v.x, s.v.y, s.v.z, s.e, s.j.x, s.j.y, s.j.z, s.g.xx, s.g.yy, s.g.zz, s.g.xy,
        s.g.xz, s.g.yz,
    ]
}

fn unpack_state(w: &[f64; NV]) -> (f64, Vec3, f64, Vec3, Sym3) {
    (
        w[0],
        Vec3::new(w[1], w[2], w[3]),
        w[4],
        Vec3::new(w[5], w[6], w[7]),
        Sym3 { xx: w[8], yy: w[9], zz: w[10], xy: w[11], xz: w[12], yz: w[13] },
    )
}

/// Corner velocity and total stress from extrapolated values; `None` when the
/// extrapolation leaves the physical range and the cell average must be used.
fn corner_inputs(mat: &Material, w: &[f64; NV]) -> Option<(Vec2, PlanarStress)> {
    let (omega, v, e, j, g) = unpack_state(w);
    if omega <= 0.0 {
        return None;
    }
    let rho = 1.0 / omega;
    let eps = e
        - state::elastic_energy(mat, g)
        - state::thermal_energy(mat, j)
        - state::kinetic_energy(v);
    if matches!(mat.eos, crate::eos::EosKind::IdealGas { .. }) && eps <= 0.0 {
        return None;
    }
    let p = mat.eos.pressure(rho, eps).ok()?;
    let sigma = state::shear_stress(mat, rho, g);
    let total = state::total_cauchy_stress(p, sigma);
    Some((v.xy(), PlanarStress::from_sym3(total)))
}

fn face_state_from(mat: &Material, w: &[f64; NV]) -> Option<FaceState> {
    let (omega, v, e, j, g) = unpack_state(w);
    if omega <= 0.0 {
        return None;
    }
    let eps = e
        - state::elastic_energy(mat, g)
        - state::thermal_energy(mat, j)
        - state::kinetic_energy(v);
    if matches!(mat.eos, crate::eos::EosKind::IdealGas { .. }) && eps <= 0.0 {
        return None;
    }
    Some(FaceState { temp: mat.temperature_from_energy(eps), e, j })
}

/// Ghost state across a boundary face: mirrored for walls and free surfaces
/// (adiabatic), prescribed-pressure temperature with zero-gradient energy and
/// impulse on pressure boundaries.
fn boundary_ghost(
    mat: &Material,
    bc: &BoundaryTable,
    tag: u8,
    t: f64,
    inner: &FaceState,
    rho: f64,
    n: Vec2,
) -> FaceState {
    match bc.spec(tag) {
        crate::nodal::BcSpec::Pressure(p) => {
            let temp = mat
                .eos
                .internal_energy(rho, p.value(t))
                .map(|eps| mat.temperature_from_energy(eps))
                .unwrap_or(inner.temp);
            FaceState { temp, e: inner.e, j: inner.j }
        }
        _ => {
            let nn = n.to3();
            let j = inner.j - nn * (2.0 * inner.j.dot(nn));
            FaceState { temp: inner.temp, e: inner.e, j }
        }
    }
}
