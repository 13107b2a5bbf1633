//! Hydrodynamic equations of state and the relaxation-time closures that tie
//! the model to shear viscosity, heat conductivity, and rate-dependent
//! plasticity.

use crate::error::{Result, SolverError};

/// Hydrodynamic part of the energy. All quantities in SI units [m, kg, s].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EosKind {
    IdealGas { gamma: f64 },
    MieGruneisen { rho0: f64, c0: f64, gamma0: f64, s: f64 },
    /// Volumetric part of a Neo-Hookean hyperelastic solid. The closed-form
    /// pressure is a function of the volume ratio rho0/rho alone.
    NeoHookean { rho0: f64, young: f64, poisson: f64 },
}

impl EosKind {
    /// Shear modulus from Young modulus and Poisson ratio (Neo-Hookean only).
    pub fn shear_modulus(&self) -> Option<f64> {
        match *self {
            EosKind::NeoHookean { young, poisson, .. } => Some(young / (2.0 * (1.0 + poisson))),
            _ => None,
        }
    }

    pub fn internal_energy(&self, rho: f64, p: f64) -> Result<f64> {
        if rho <= 0.0 {
            return Err(SolverError::EosDomain(format!("non-physical density {rho:.3e}")));
        }
        match *self {
            EosKind::IdealGas { gamma } => Ok(p / (rho * (gamma - 1.0))),
            EosKind::MieGruneisen { rho0, c0, gamma0, s } => {
                let j = rho / rho0;
                let denom = j - s * (j - 1.0);
                if denom.abs() < 1e-14 {
                    return Err(SolverError::EosDomain(format!(
                        "Mie-Gruneisen singular compression ratio J = {j:.6}"
                    )));
                }
                let f = (j - 1.0) * (j - 0.5 * gamma0 * (j - 1.0)) / (denom * denom);
                Ok((p - rho0 * c0 * c0 * f) / (rho0 * gamma0))
            }
            EosKind::NeoHookean { rho0, .. } => {
                let g = self.shear_modulus().unwrap();
                // Volume ratio of the current to the reference configuration.
                let j = rho0 / rho;
                Ok(g / (4.0 * rho0) * ((j - 1.0).powi(2) + j.ln().powi(2)))
            }
        }
    }

    /// Algebraic inverse of `internal_energy` for the ideal-gas and
    /// Mie-Gruneisen forms; for Neo-Hookean the pressure depends on density
    /// alone and `eps` is ignored.
    pub fn pressure(&self, rho: f64, eps: f64) -> Result<f64> {
        if rho <= 0.0 {
            return Err(SolverError::EosDomain(format!("non-physical density {rho:.3e}")));
        }
        match *self {
            EosKind::IdealGas { gamma } => Ok(eps * rho * (gamma - 1.0)),
            EosKind::MieGruneisen { rho0, c0, gamma0, s } => {
                let j = rho / rho0;
                let denom = j - s * (j - 1.0);
                if denom.abs() < 1e-14 {
                    return Err(SolverError::EosDomain(format!(
                        "Mie-Gruneisen singular compression ratio J = {j:.6}"
                    )));
                }
                let f = (j - 1.0) * (j - 0.5 * gamma0 * (j - 1.0)) / (denom * denom);
                Ok(eps * rho0 * gamma0 + rho0 * c0 * c0 * f)
            }
            EosKind::NeoHookean { rho0, .. } => {
                let g = self.shear_modulus().unwrap();
                let j = rho0 / rho;
                Ok(-0.5 * g * (j - 1.0 + j.ln() / j))
            }
        }
    }

    /// Adiabatic sound speed estimate entering the wavespeed bound.
    pub fn sound_speed(&self, rho: f64, p: f64) -> Result<f64> {
        match *self {
            EosKind::IdealGas { gamma } => {
                if p < 0.0 {
                    return Err(SolverError::EosDomain(format!(
                        "ideal gas with negative pressure {p:.3e}"
                    )));
                }
                Ok((gamma * p / rho).sqrt())
            }
            EosKind::MieGruneisen { c0, .. } => Ok(c0),
            EosKind::NeoHookean { young, poisson, .. } => {
                let g = self.shear_modulus().unwrap();
                let k = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson)) + 2.0 * g / 3.0;
                Ok(k.sqrt())
            }
        }
    }
}

/// Closure for the strain relaxation time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tau1Spec {
    Constant(f64),
    /// Newtonian fluid of given dynamic shear viscosity.
    FromViscosity { mu: f64 },
    /// Rate-dependent plasticity power law.
    Plastic { sigma_y: f64, n: f64, tau0: f64 },
}

/// Closure for the thermal impulse relaxation time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tau2Spec {
    Constant(f64),
    FromConductivity { kappa: f64 },
}

/// Relaxation times are clamped here; the extremes stand in for pure fluids
/// and pure solids.
pub const TAU_MIN: f64 = 1e-14;
pub const TAU_MAX: f64 = 1e14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Material {
    pub eos: EosKind,
    pub rho0: f64,
    /// Shear sound speed; the shear modulus is rho0 * c_sh^2.
    pub c_sh: f64,
    /// Thermal wave coefficient; zero disables heat conduction.
    pub alpha: f64,
    pub c_v: f64,
    pub t0: f64,
    pub tau1: Tau1Spec,
    pub tau2: Tau2Spec,
}

impl Material {
    /// Temperature from the hydrodynamic energy, one code path for all EOS.
    pub fn temperature(&self, rho: f64, p: f64) -> Result<f64> {
        Ok(self.eos.internal_energy(rho, p)? / self.c_v)
    }

    pub fn temperature_from_energy(&self, eps: f64) -> f64 {
        eps / self.c_v
    }

    /// Strain relaxation time, clamped to [1e-14, 1e14].
    pub fn tau1(&self, sigma_eq: f64) -> f64 {
        let raw = match self.tau1 {
            Tau1Spec::Constant(t) => t,
            Tau1Spec::FromViscosity { mu } => 6.0 * mu / (self.rho0 * self.c_sh * self.c_sh),
            Tau1Spec::Plastic { sigma_y, n, tau0 } => {
                if sigma_eq <= 0.0 {
                    TAU_MAX
                } else {
                    tau0 * (sigma_y / sigma_eq).powf(n)
                }
            }
        };
        raw.clamp(TAU_MIN, TAU_MAX)
    }

    pub fn tau2(&self) -> Result<f64> {
        let raw = match self.tau2 {
            Tau2Spec::Constant(t) => t,
            Tau2Spec::FromConductivity { kappa } => {
                if self.alpha == 0.0 {
                    return Err(SolverError::EosDomain(
                        "conductivity closure needs alpha > 0".into(),
                    ));
                }
                kappa * self.rho0 / (self.alpha * self.alpha * self.t0)
            }
        };
        Ok(raw.clamp(TAU_MIN, TAU_MAX))
    }

    /// Propagation speed of thermal perturbations.
    pub fn heat_speed(&self, temperature: f64) -> f64 {
        self.alpha / self.rho0 * (temperature.max(0.0) / self.c_v).sqrt()
    }

    /// Maximum-eigenvalue estimate used for the CFL bound and the swept mass
    /// flux (equilibrium estimate).
    pub fn max_wavespeed(&self, rho: f64, p: f64, temperature: f64) -> Result<f64> {
        let c0 = self.eos.sound_speed(rho, p)?;
        let ch = self.heat_speed(temperature);
        Ok((c0 * c0 + 4.0 / 3.0 * self.c_sh * self.c_sh + ch * ch).sqrt())
    }

    pub fn shear_modulus(&self) -> f64 {
        self.rho0 * self.c_sh * self.c_sh
    }

    /// Effective dynamic viscosity of the relaxed model for a constant tau1.
    pub fn effective_viscosity(&self, tau1: f64) -> f64 {
        self.rho0 * tau1 * self.c_sh * self.c_sh / 6.0
    }
}

// Named presets matching the built-in test problems.
impl Material {
    pub fn vortex() -> Material {
        Material {
            eos: EosKind::IdealGas { gamma: 1.4 },
            rho0: 1.0,
            c_sh: 0.5,
            alpha: 0.0,
            c_v: 1.0,
            t0: 1.0,
            tau1: Tau1Spec::Constant(1e-14),
            tau2: Tau2Spec::Constant(1e-14),
        }
    }

    pub fn swinging_plate() -> Material {
        Material {
            eos: EosKind::NeoHookean { rho0: 1100.0, young: 1.7e7, poisson: 0.45 },
            rho0: 1100.0,
            c_sh: 73.0,
            alpha: 0.0,
            c_v: 1.0,
            t0: 1.0,
            tau1: Tau1Spec::Constant(1e14),
            tau2: Tau2Spec::Constant(1e-14),
        }
    }

    /// Shell compression driven by exact boundary pressures; the 2D-consistent
    /// isentropic index is gamma = 2.
    pub fn kidder() -> Material {
        Material {
            eos: EosKind::IdealGas { gamma: 2.0 },
            rho0: 1.0,
            c_sh: 0.5,
            alpha: 0.0,
            c_v: 1.0,
            t0: 1.0,
            tau1: Tau1Spec::Constant(1e-14),
            tau2: Tau2Spec::Constant(1e-14),
        }
    }

    pub fn saltzman() -> Material {
        Material {
            eos: EosKind::IdealGas { gamma: 5.0 / 3.0 },
            rho0: 1.0,
            c_sh: 0.5,
            alpha: 0.0,
            c_v: 1.0,
            t0: 1.0,
            tau1: Tau1Spec::Constant(1e-14),
            tau2: Tau2Spec::Constant(1e-14),
        }
    }

    pub fn sedov() -> Material {
        Material {
            eos: EosKind::IdealGas { gamma: 1.4 },
            rho0: 1.0,
            c_sh: 0.5,
            alpha: 0.0,
            c_v: 1.0,
            t0: 1.0,
            tau1: Tau1Spec::Constant(1e-14),
            tau2: Tau2Spec::Constant(1e-14),
        }
    }

    /// Viscous Riemann problems; mu in [1e-3, 1e-2].
    pub fn riemann_viscous(mu: f64) -> Material {
        Material {
            eos: EosKind::IdealGas { gamma: 1.4 },
            rho0: 1.0,
            c_sh: 10.0,
            alpha: 0.0,
            c_v: 2.5,
            t0: 1.0,
            tau1: Tau1Spec::FromViscosity { mu },
            tau2: Tau2Spec::Constant(1e-14),
        }
    }

    pub fn heat_conduction() -> Material {
        Material {
            eos: EosKind::IdealGas { gamma: 1.4 },
            rho0: 1.0,
            c_sh: 1.0,
            alpha: 2.0,
            c_v: 2.5,
            t0: 1.0,
            tau1: Tau1Spec::FromViscosity { mu: 1e-2 },
            tau2: Tau2Spec::FromConductivity { kappa: 1e-2 },
        }
    }

    pub fn viscous_shock() -> Material {
        Material {
            eos: EosKind::IdealGas { gamma: 1.4 },
            rho0: 1.0,
            c_sh: 50.0,
            alpha: 50.0,
            c_v: 2.5,
            t0: 1.0,
            tau1: Tau1Spec::FromViscosity { mu: 2e-2 },
            tau2: Tau2Spec::FromConductivity { kappa: 9.33e-2 },
        }
    }

    pub fn beryllium_shell() -> Material {
        Material {
            eos: EosKind::MieGruneisen { rho0: 1845.0, c0: 12870.0, gamma0: 1.16, s: 1.124 },
            rho0: 1845.0,
            c_sh: 9073.62,
            alpha: 0.0,
            c_v: 1.0,
            t0: 1.0,
            tau1: Tau1Spec::Plastic { sigma_y: 330e6, n: 12.0, tau0: 1e-7 },
            tau2: Tau2Spec::Constant(1e-14),
        }
    }

    pub fn aluminium_projectile() -> Material {
        Material {
            eos: EosKind::MieGruneisen { rho0: 2785.0, c0: 5328.0, gamma0: 2.0, s: 1.338 },
            rho0: 2785.0,
            c_sh: 3150.0,
            alpha: 0.0,
            c_v: 1.0,
            t0: 1.0,
            tau1: Tau1Spec::Plastic { sigma_y: 300e6, n: 10.0, tau0: 5e-4 },
            tau2: Tau2Spec::Constant(1e-14),
        }
    }

    pub fn beryllium_plate() -> Material {
        Material {
            eos: EosKind::NeoHookean { rho0: 1845.0, young: 3.1827e11, poisson: 0.0539 },
            rho0: 1845.0,
            c_sh: 9046.59,
            alpha: 0.0,
            c_v: 1.0,
            t0: 1.0,
            tau1: Tau1Spec::Constant(1e14),
            tau2: Tau2Spec::Constant(1e-14),
        }
    }
}
