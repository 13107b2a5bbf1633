//! Per-cell evolved state, energy decomposition, stress evaluation, and
//! primitive recovery.

use crate::eos::Material;
use crate::error::{Result, SolverError};
use crate::tensor::{Sym3, Vec3};

/// Evolved set per cell. Tensors are full 3x3 even in planar runs; the
/// out-of-plane entries stay at their trivial values under planar flows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellState {
    /// Specific volume 1/rho.
    pub omega: f64,
    pub v: Vec3,
    /// Specific total energy.
    pub e: f64,
    /// Thermal impulse.
    pub j: Vec3,
    /// Elastic metric tensor, symmetric positive definite.
    pub g: Sym3,
    /// Cell mass, constant for the whole run.
    pub mass: f64,
}

impl CellState {
    pub fn rho(&self) -> f64 {
        1.0 / self.omega
    }
}

/// Derived quantities of one cell.
#[derive(Clone, Copy, Debug, Default)]
pub struct Primitive {
    pub rho: f64,
    pub p: f64,
    pub temperature: f64,
    /// Tangential (viscous/elastic) stress.
    pub sigma: Sym3,
    /// Total Cauchy stress -p I + sigma.
    pub total_stress: Sym3,
    /// Heat flux alpha^2 T J.
    pub q: Vec3,
}

pub fn elastic_energy(mat: &Material, g: Sym3) -> f64 {
    0.25 * mat.c_sh * mat.c_sh * g.dev().frobenius_sq()
}

pub fn thermal_energy(mat: &Material, j: Vec3) -> f64 {
    0.5 * mat.alpha * mat.alpha * j.norm_sq()
}

pub fn kinetic_energy(v: Vec3) -> f64 {
    0.5 * v.norm_sq()
}

/// Specific total energy of a state given its hydrodynamic pressure.
pub fn total_energy(mat: &Material, rho: f64, p: f64, v: Vec3, j: Vec3, g: Sym3) -> Result<f64> {
    Ok(mat.eos.internal_energy(rho, p)? + elastic_energy(mat, g) + thermal_energy(mat, j) + kinetic_energy(v))
}

/// Tangential stress sigma = -rho c_sh^2 G dev(G).
pub fn shear_stress(mat: &Material, rho: f64, g: Sym3) -> Sym3 {
    g.sym_mul(g.dev()) * (-rho * mat.c_sh * mat.c_sh)
}

/// Von-Mises-type equivalent stress from the stress deviator.
pub fn equivalent_stress(sigma: Sym3) -> f64 {
    let d = sigma.dev();
    (1.5 * d.ddot(d)).sqrt()
}

pub fn total_cauchy_stress(p: f64, sigma: Sym3) -> Sym3 {
    sigma - Sym3::spherical(p)
}

/// Unloaded metric tensor compatible with the determinant constraint:
/// (rho/rho0)^(2/3) I, whose determinant is (rho/rho0)^2.
pub fn init_equilibrium_metric(rho: f64, rho0: f64) -> Sym3 {
    Sym3::spherical((rho / rho0).powf(2.0 / 3.0))
}

/// Invert the energy decomposition: strip elastic, thermal and kinetic parts
/// from the total energy and recover p, T, stresses and the heat flux.
pub fn primitive(mat: &Material, cell: usize, state: &CellState) -> Result<Primitive> {
    let rho = state.rho();
    let eps = state.e
        - elastic_energy(mat, state.g)
        - thermal_energy(mat, state.j)
        - kinetic_energy(state.v);
    if matches!(mat.eos, crate::eos::EosKind::IdealGas { .. }) && eps < 0.0 {
        return Err(SolverError::NegativeInternalEnergy { cell, eps });
    }
    let p = mat.eos.pressure(rho, eps)?;
    let temperature = mat.temperature_from_energy(eps);
    let sigma = shear_stress(mat, rho, state.g);
    Ok(Primitive {
        rho,
        p,
        temperature,
        sigma,
        total_stress: total_cauchy_stress(p, sigma),
        q: state.j * (mat.alpha * mat.alpha * temperature),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::{EosKind, Material};
    use crate::tensor::Mat3;
    use crate::testutil::Rng64;

    fn gas() -> Material {
        Material::riemann_viscous(1e-2) // IG gamma=1.4, c_sh=10, c_v=2.5
    }

    #[test]
    fn total_energy_rest_state() {
        let m = gas();
        let e = total_energy(&m, 1.0, 1.0, Vec3::ZERO, Vec3::ZERO, Sym3::identity()).unwrap();
        assert!((e - 2.5).abs() < 1e-14);
        let ek = total_energy(&m, 1.0, 1.0, Vec3::new(1.0, 0.0, 0.0), Vec3::ZERO, Sym3::identity())
            .unwrap();
        assert!((ek - e - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pure_shear_elastic_energy() {
        let m = gas();
        let d = Sym3 { xy: 1.0, ..Sym3::ZERO };
        let delta = 1e-3;
        let g = Sym3::identity() + d * delta;
        let ee = elastic_energy(&m, g);
        let want = 0.25 * m.c_sh * m.c_sh * (d * delta).frobenius_sq();
        assert!((ee - want).abs() <= 1e-14 * want);
    }

    #[test]
    fn primitive_round_trip() {
        let m = gas();
        let mut rng = Rng64::new(11);
        for i in 0..200 {
            let rho = rng.range(0.2, 3.0);
            let p = rng.range(0.05, 5.0);
            let v = Vec3::new(rng.range(-2.0, 2.0), rng.range(-2.0, 2.0), 0.0);
            let j = Vec3::new(rng.range(-0.5, 0.5), rng.range(-0.5, 0.5), 0.0);
            let g = rng.spd_near(1.0, 0.05);
            let e = total_energy(&m, rho, p, v, j, g).unwrap();
            let st = CellState { omega: 1.0 / rho, v, e, j, g, mass: 1.0 };
            let prim = primitive(&m, i, &st).unwrap();
            assert!((prim.p - p).abs() <= 1e-12 * p.max(1.0), "pressure round trip");
            assert!((prim.rho - rho).abs() <= 1e-14 * rho);
            // T_total = -p I + sigma componentwise.
            let diff = prim.total_stress - (prim.sigma - Sym3::spherical(prim.p));
            assert_eq!(diff, Sym3::ZERO);
        }
    }

    #[test]
    fn ideal_gas_reference_pressure() {
        let m = Material { eos: EosKind::IdealGas { gamma: 1.4 }, c_v: 2.5, ..gas() };
        let st = CellState {
            omega: 1.0,
            v: Vec3::ZERO,
            e: 2.5,
            j: Vec3::ZERO,
            g: Sym3::identity(),
            mass: 1.0,
        };
        let prim = primitive(&m, 0, &st).unwrap();
        assert!((prim.p - 1.0).abs() < 1e-14);
    }

    #[test]
    fn spherical_metric_gives_zero_shear_stress() {
        let m = gas();
        let s = shear_stress(&m, 1.3, Sym3::spherical(1.7));
        assert_eq!(s, Sym3::ZERO);
        // With sigma = 0 the total pressure equals p exactly.
        let t = total_cauchy_stress(2.0, s);
        assert_eq!(-t.trace() / 3.0, 2.0);
    }

    #[test]
    fn shear_stress_scales_linearly_in_density() {
        let m = gas();
        let g = Sym3 { xx: 1.001, yy: 0.999, zz: 1.0, xy: 1e-3, ..Sym3::ZERO };
        let s1 = shear_stress(&m, 1.0, g);
        let s2 = shear_stress(&m, 2.0, g);
        assert!((s2 - s1 * 2.0).frobenius() < 1e-14 * s1.frobenius());
    }

    /// Central finite differences of the elastic energy reproduce the
    /// variational stress -2 rho G dE/dG.
    #[test]
    fn shear_stress_matches_energy_gradient() {
        let m = gas();
        let mut rng = Rng64::new(5);
        for _ in 0..50 {
            let rho = rng.range(0.5, 2.0);
            let g = rng.spd_near(1.0, 0.02);
            let h = 1e-6;

            // Gradient of E_e with respect to the six independent components;
            // off-diagonal entries perturb both symmetric slots.
            let mut grad = Sym3::ZERO;
            let comps: [(&dyn Fn(&mut Sym3, f64), &dyn Fn(Sym3) -> f64, bool); 6] = [
                (&|t, d| t.xx += d, &|t| t.xx, false),
                (&|t, d| t.yy += d, &|t| t.yy, false),
                (&|t, d| t.zz += d, &|t| t.zz, false),
                (&|t, d| t.xy += d, &|t| t.xy, true),
                (&|t, d| t.xz += d, &|t| t.xz, true),
                (&|t, d| t.yz += d, &|t| t.yz, true),
            ];
            for (bump, _get, offdiag) in comps {
                let mut gp = g;
                bump(&mut gp, h);
                let mut gm = g;
                bump(&mut gm, -h);
                // Directional derivative along e_k e_l^T + e_l e_k^T is twice
                // the (kl) gradient entry for off-diagonal slots.
                let d = (elastic_energy(&m, gp) - elastic_energy(&m, gm)) / (2.0 * h);
                let val = if offdiag { 0.5 * d } else { d };
                let mut unit = Sym3::ZERO;
                bump(&mut unit, 1.0);
                grad += unit * val;
            }

            let sigma_fd =
                Mat3::sym_part(g.to_mat().mat_mul(grad.to_mat())) * (-2.0 * rho);
            let sigma = shear_stress(&m, rho, g);
            let scale = sigma.frobenius().max(1e-10);
            assert!(
                (sigma_fd - sigma).frobenius() <= 1e-7 * scale.max(1.0),
                "finite-difference stress mismatch: {:?} vs {:?}",
                sigma_fd,
                sigma
            );
        }
    }

    #[test]
    fn equivalent_stress_values() {
        assert_eq!(equivalent_stress(Sym3::ZERO), 0.0);
        assert!(equivalent_stress(Sym3::spherical(3.7)) < 1e-14);
        let s = 0.8;
        let dev = Sym3::diag(s, -s / 2.0, -s / 2.0);
        assert!((equivalent_stress(dev) - 1.5 * s).abs() < 1e-14);
    }

    #[test]
    fn wavespeed_values() {
        let inviscid = Material { c_sh: 0.0, alpha: 0.0, ..Material::vortex() };
        assert!((inviscid.max_wavespeed(1.0, 1.0, 1.0).unwrap() - 1.4f64.sqrt()).abs() < 1e-15);

        // c0 = 3, c_sh = 3, c_h = 0 -> sqrt(21).
        let m = Material {
            eos: EosKind::MieGruneisen { rho0: 1.0, c0: 3.0, gamma0: 2.0, s: 1.3 },
            c_sh: 3.0,
            alpha: 0.0,
            ..Material::vortex()
        };
        assert!((m.max_wavespeed(1.0, 0.0, 1.0).unwrap() - 21f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn equilibrium_metric_determinant() {
        assert_eq!(init_equilibrium_metric(1.0, 1.0), Sym3::identity());
        let g = init_equilibrium_metric(8.0, 1.0);
        assert!((g.xx - 4.0).abs() < 1e-13);
        assert!((g.det() - 64.0).abs() < 1e-12);
        let mut rng = Rng64::new(9);
        for _ in 0..100 {
            let rho = rng.range(0.1, 10.0);
            let d = init_equilibrium_metric(rho, 1.0).det();
            assert!((d - rho * rho).abs() <= 1e-13 * rho * rho);
        }
    }
}
