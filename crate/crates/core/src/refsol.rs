//! Analytical and brute-force reference solutions used by the verification
//! suite: the advected isentropic vortex, the imploding isentropic shell, the
//! stationary viscous shock profile, blast-wave indicators, the standing
//! elastic plate wave, a resolved RK4 integration of the strain-relaxation
//! ODE, and an exact Riemann solver for the Euler equations.

use crate::tensor::{Sym3, Vec2, Vec3};

/// Brute-force RK4 integration of dG/dt = L* - 6/tau1 det(G)^(5/6) G dev(G)
/// with fixed sub-steps. Oracle only; not a performance path.
pub fn strain_ode_rk4(g0: Sym3, l_star: Sym3, tau1: f64, dt: f64, n_steps: usize) -> Sym3 {
    let rate = |g: Sym3| -> Sym3 {
        let k = 6.0 * g.det().powf(5.0 / 6.0) / tau1;
        l_star - g.sym_mul(g.dev()) * k
    };
    let h = dt / n_steps as f64;
    let mut g = g0;
    for _ in 0..n_steps {
        let k1 = rate(g);
        let k2 = rate(g + k1 * (0.5 * h));
        let k3 = rate(g + k2 * (0.5 * h));
        let k4 = rate(g + k3 * h);
        g += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    g
}

// ---------------------------------------------------------------------------
// Isentropic vortex
// ---------------------------------------------------------------------------

pub const VORTEX_GAMMA: f64 = 1.4;
pub const VORTEX_STRENGTH: f64 = 5.0;
pub const VORTEX_DOMAIN: f64 = 10.0;
pub const VORTEX_CENTER: Vec2 = Vec2 { x: 5.0, y: 5.0 };
pub const VORTEX_CONVECTION: Vec2 = Vec2 { x: 1.0, y: 1.0 };

/// Exact advected vortex state at time t, periodic on [0, 10]^2.
pub fn vortex_exact(t: f64, x: Vec2) -> (f64, Vec3, f64) {
    let gamma = VORTEX_GAMMA;
    let lam = VORTEX_STRENGTH;
    let c = VORTEX_CENTER + VORTEX_CONVECTION * t;
    let wrap = |d: f64| {
        let l = VORTEX_DOMAIN;
        let mut r = (d + 0.5 * l).rem_euclid(l) - 0.5 * l;
        if r <= -0.5 * l {
            r += l;
        }
        r
    };
    let dx = wrap(x.x - c.x);
    let dy = wrap(x.y - c.y);
    let r2 = dx * dx + dy * dy;
    let dt_pert = vortex_delta_temperature(r2.sqrt());
    let rho = (1.0 + dt_pert).powf(1.0 / (gamma - 1.0));
    let p = (1.0 + dt_pert).powf(gamma / (gamma - 1.0));
    let amp = lam / (2.0 * std::f64::consts::PI) * ((1.0 - r2) / 2.0).exp();
    let v = Vec3::new(
        VORTEX_CONVECTION.x - amp * dy,
        VORTEX_CONVECTION.y + amp * dx,
        0.0,
    );
    (rho, v, p)
}

pub fn vortex_delta_temperature(r: f64) -> f64 {
    let gamma = VORTEX_GAMMA;
    let lam = VORTEX_STRENGTH;
    -(gamma - 1.0) * lam * lam / (8.0 * gamma * std::f64::consts::PI.powi(2)) * (1.0 - r * r).exp()
}

// ---------------------------------------------------------------------------
// Imploding shell (isentropic compression)
// ---------------------------------------------------------------------------

/// Self-similar isentropic compression of a gas shell. The similarity
/// solution is exact in d dimensions for gamma = 1 + 2/d, hence gamma = 2 for
/// the planar shell computed here.
#[derive(Clone, Copy, Debug)]
pub struct KidderSolution {
    pub gamma: f64,
    /// Entropy constant in p = s rho^gamma.
    pub s: f64,
    pub r_int: f64,
    pub r_ext: f64,
    pub rho_int: f64,
    pub rho_ext: f64,
}

impl KidderSolution {
    pub fn standard() -> Self {
        KidderSolution { gamma: 2.0, s: 1.0, r_int: 0.9, r_ext: 1.0, rho_int: 1.0, rho_ext: 2.0 }
    }

    /// Initial density profile between the two frontiers.
    pub fn density0(&self, r: f64) -> f64 {
        let g1 = self.gamma - 1.0;
        let w = (self.r_ext.powi(2) - r * r) / (self.r_ext.powi(2) - self.r_int.powi(2));
        (w * self.rho_int.powf(g1) + (1.0 - w) * self.rho_ext.powf(g1)).powf(1.0 / g1)
    }

    pub fn pressure0(&self, r: f64) -> f64 {
        self.s * self.density0(r).powf(self.gamma)
    }

    fn sound_speed_sq0(&self, rho: f64) -> f64 {
        self.gamma * self.s * rho.powf(self.gamma - 1.0)
    }

    /// Focalisation time of the homothetic collapse.
    pub fn focalisation_time(&self) -> f64 {
        let c2i = self.sound_speed_sq0(self.rho_int);
        let c2e = self.sound_speed_sq0(self.rho_ext);
        ((self.gamma - 1.0) / 2.0 * (self.r_ext.powi(2) - self.r_int.powi(2)) / (c2e - c2i)).sqrt()
    }

    /// Final time at which the radii have halved.
    pub fn t_final(&self) -> f64 {
        3f64.sqrt() / 2.0 * self.focalisation_time()
    }

    /// Homothety factor h(t) = sqrt(1 - t^2 / t_foc^2).
    pub fn h(&self, t: f64) -> f64 {
        let tf = self.focalisation_time();
        (1.0 - (t / tf).powi(2)).sqrt()
    }

    pub fn radii(&self, t: f64) -> (f64, f64) {
        let h = self.h(t);
        (h * self.r_int, h * self.r_ext)
    }

    /// Exact boundary pressures driving the collapse.
    pub fn boundary_pressures(&self, t: f64) -> (f64, f64) {
        let h = self.h(t);
        let e = -2.0 * self.gamma / (self.gamma - 1.0);
        (self.pressure0(self.r_int) * h.powf(e), self.pressure0(self.r_ext) * h.powf(e))
    }

    /// Full field at current radius r and time t (r is the moved position).
    pub fn state(&self, t: f64, r: f64) -> (f64, f64, f64) {
        let h = self.h(t);
        let r0 = r / h;
        let rho = h.powf(-2.0 / (self.gamma - 1.0)) * self.density0(r0);
        let p = self.s * rho.powf(self.gamma);
        let tf = self.focalisation_time();
        let hdot = -t / (tf * tf * h);
        let vr = hdot / h * r;
        (rho, vr, p)
    }
}

// ---------------------------------------------------------------------------
// Stationary viscous shock (Prandtl number 3/4)
// ---------------------------------------------------------------------------

/// Exact traveling viscous shock of the Navier-Stokes-Fourier equations at
/// Pr = 3/4. The stationary profile is parameterized by the shock Mach number
/// and the Reynolds number on the unit length; the lab frame superimposes a
/// constant velocity so the shock runs rightward into a medium at rest.
#[derive(Clone, Copy, Debug)]
pub struct BeckerShock {
    pub m_s: f64,
    pub gamma: f64,
    pub re_s: f64,
    /// Upstream (at-rest) state.
    pub rho0: f64,
    pub p0: f64,
    pub c0: f64,
    /// Shock center at t = 0.
    pub x0: f64,
}

impl BeckerShock {
    pub fn standard() -> Self {
        let gamma = 1.4;
        let p0 = 1.0 / gamma;
        BeckerShock { m_s: 2.0, gamma, re_s: 100.0, rho0: 1.0, p0, c0: 1.0, x0: 0.25 }
    }

    /// kappa^2, the squared ratio of downstream to upstream velocity in the
    /// shock frame; 1/kappa^2 is the density compression.
    pub fn kappa_sq(&self) -> f64 {
        let m2 = self.m_s * self.m_s;
        (1.0 + 0.5 * (self.gamma - 1.0) * m2) / (0.5 * (self.gamma + 1.0) * m2)
    }

    /// Dimensionless stationary-frame velocity at signed distance xi from the
    /// shock center, positive xi pointing into the undisturbed gas.
    pub fn u_bar(&self, xi: f64) -> f64 {
        let k2 = self.kappa_sq();
        // Monotone residual; the flip makes ubar -> 1 ahead of the shock.
        let coef = -0.75 * self.re_s * (self.m_s * self.m_s - 1.0)
            / (self.gamma * self.m_s * self.m_s);
        let rhs = (1.0 - k2) * ((1.0 - k2) / 2.0).ln() + coef * xi;
        if rhs < -600.0 {
            return 1.0;
        }
        if rhs > 600.0 {
            return k2;
        }
        let f = |u: f64| (1.0 - u).ln() - k2 * (u - k2).ln() - rhs;
        let mut lo = k2 + 1e-15;
        let mut hi = 1.0 - 1e-15;
        // f decreases in u: f(lo) = +inf side, f(hi) = -inf side.
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Dimensionless pressure from the integrated momentum balance.
    pub fn p_bar(&self, u_bar: f64) -> f64 {
        let k2 = self.kappa_sq();
        let g = self.gamma;
        1.0 - u_bar + (g + 1.0) / (2.0 * g * (g - 1.0)) * (u_bar - 1.0) / u_bar * (u_bar - k2)
    }

    /// Lab-frame primitive state (rho, u, p) at position x and time t.
    pub fn state(&self, x: f64, t: f64) -> (f64, f64, f64) {
        let shock_speed = self.m_s * self.c0;
        let xi = x - self.x0 - shock_speed * t;
        let ub = self.u_bar(xi);
        let rho = self.rho0 / ub;
        let u = shock_speed * (1.0 - ub);
        let p = self.p0 + self.rho0 * self.c0 * self.c0 * self.m_s * self.m_s * self.p_bar(ub);
        (rho, u, p)
    }

    /// Viscous normal stress sigma_xx = 4/3 mu du/dx at (x, t).
    pub fn sigma_xx(&self, x: f64, t: f64, mu: f64) -> f64 {
        let d = 1e-7;
        let (_, up, _) = self.state(x + d, t);
        let (_, um, _) = self.state(x - d, t);
        4.0 / 3.0 * mu * (up - um) / (2.0 * d)
    }

    /// Fourier heat flux q = -kappa dT/dx at (x, t) for temperature
    /// T = p / (rho (gamma - 1) c_v).
    pub fn heat_flux(&self, x: f64, t: f64, kappa: f64, c_v: f64) -> f64 {
        let temp = |x: f64| {
            let (rho, _, p) = self.state(x, t);
            p / (rho * (self.gamma - 1.0) * c_v)
        };
        let d = 1e-7;
        -kappa * (temp(x + d) - temp(x - d)) / (2.0 * d)
    }
}

// ---------------------------------------------------------------------------
// Blast-wave indicators
// ---------------------------------------------------------------------------

/// Shock position and strong-shock density ratio for the calibrated planar
/// blast: total energy 0.244816 puts the cylindrical shock at radius one at
/// unit time, and the peak compression tends to (gamma+1)/(gamma-1).
pub fn sedov_indicators(gamma: f64) -> (f64, f64) {
    (1.0, (gamma + 1.0) / (gamma - 1.0))
}

pub const SEDOV_ENERGY_2D: f64 = 0.244816;

// ---------------------------------------------------------------------------
// Swinging plate (standing elastic wave)
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct SwingingPlate {
    pub u0: f64,
    /// Angular frequency Lambda = pi/2 sqrt(2 G / rho0).
    pub omega: f64,
    pub c_sh: f64,
}

impl SwingingPlate {
    pub fn standard() -> Self {
        let mat = crate::eos::Material::swinging_plate();
        let g = mat.shear_modulus();
        let omega = std::f64::consts::FRAC_PI_2 * (2.0 * g / mat.rho0).sqrt();
        SwingingPlate { u0: 5e-4, omega, c_sh: mat.c_sh }
    }

    pub fn period_time(&self) -> f64 {
        std::f64::consts::PI / self.omega
    }

    pub fn velocity(&self, t: f64, x: Vec2) -> Vec3 {
        let a = std::f64::consts::FRAC_PI_2;
        let f = self.omega * self.u0 * (self.omega * t).cos();
        Vec3::new(
            -f * (a * x.x).sin() * (a * x.y).cos(),
            f * (a * x.x).cos() * (a * x.y).sin(),
            0.0,
        )
    }

    /// Specific total energy to second order in the amplitude: kinetic part
    /// plus the shear strain energy of the displacement field; the motion is
    /// divergence-free so the volumetric part vanishes.
    pub fn energy(&self, t: f64, x: Vec2) -> f64 {
        let a = std::f64::consts::FRAC_PI_2;
        let v = self.velocity(t, x);
        let amp = self.u0 * (self.omega * t).sin() * a * (a * x.x).cos() * (a * x.y).cos();
        0.5 * v.norm_sq() + self.c_sh * self.c_sh * 2.0 * amp * amp
    }
}

// ---------------------------------------------------------------------------
// Exact Riemann solver for the Euler equations
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct GasState {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

/// Classic two-wave exact Riemann solution; `sample(x/t)` returns the
/// self-similar state.
#[derive(Clone, Copy, Debug)]
pub struct RiemannSolution {
    pub gamma: f64,
    pub left: GasState,
    pub right: GasState,
    pub p_star: f64,
    pub u_star: f64,
}

pub fn exact_riemann(gamma: f64, left: GasState, right: GasState) -> RiemannSolution {
    let g = gamma;
    let f = |p: f64, s: &GasState| -> (f64, f64) {
        let a = (g * s.p / s.rho).sqrt();
        if p > s.p {
            // Shock branch.
            let ak = 2.0 / ((g + 1.0) * s.rho);
            let bk = (g - 1.0) / (g + 1.0) * s.p;
            let root = (ak / (p + bk)).sqrt();
            let val = (p - s.p) * root;
            let der = root * (1.0 - (p - s.p) / (2.0 * (p + bk)));
            (val, der)
        } else {
            // Rarefaction branch.
            let pr = p / s.p;
            let val = 2.0 * a / (g - 1.0) * (pr.powf((g - 1.0) / (2.0 * g)) - 1.0);
            let der = 1.0 / (s.rho * a) * pr.powf(-(g + 1.0) / (2.0 * g));
            (val, der)
        }
    };

    // Newton iteration from the primitive-variable guess.
    let al = (g * left.p / left.rho).sqrt();
    let ar = (g * right.p / right.rho).sqrt();
    let mut p = ((al + ar - 0.5 * (g - 1.0) * (right.u - left.u))
        / (al / left.p.powf((g - 1.0) / (2.0 * g)) + ar / right.p.powf((g - 1.0) / (2.0 * g))))
    .powf(2.0 * g / (g - 1.0));
    if !p.is_finite() || p <= 0.0 {
        p = 0.5 * (left.p + right.p);
    }
    for _ in 0..100 {
        let (fl, dl) = f(p, &left);
        let (fr, dr) = f(p, &right);
        let res = fl + fr + right.u - left.u;
        let step = res / (dl + dr);
        let pn = (p - step).max(1e-14 * p);
        if (pn - p).abs() <= 1e-14 * p {
            p = pn;
            break;
        }
        p = pn;
    }
    let (fl, _) = f(p, &left);
    let (fr, _) = f(p, &right);
    let u = 0.5 * (left.u + right.u) + 0.5 * (fr - fl);
    RiemannSolution { gamma: g, left, right, p_star: p, u_star: u }
}

impl RiemannSolution {
    pub fn sample(&self, xi: f64) -> GasState {
        let g = self.gamma;
        let (p_star, u_star) = (self.p_star, self.u_star);
        if xi <= u_star {
            // Left of the contact.
            let s = self.left;
            let a = (g * s.p / s.rho).sqrt();
            if p_star > s.p {
                let sl =
                    s.u - a * ((g + 1.0) / (2.0 * g) * p_star / s.p + (g - 1.0) / (2.0 * g)).sqrt();
                if xi < sl {
                    s
                } else {
                    let pr = p_star / s.p;
                    let rho = s.rho * ((pr + (g - 1.0) / (g + 1.0)) / ((g - 1.0) / (g + 1.0) * pr + 1.0));
                    GasState { rho, u: u_star, p: p_star }
                }
            } else {
                let head = s.u - a;
                let a_star = a * (p_star / s.p).powf((g - 1.0) / (2.0 * g));
                let tail = u_star - a_star;
                if xi < head {
                    s
                } else if xi > tail {
                    GasState { rho: s.rho * (p_star / s.p).powf(1.0 / g), u: u_star, p: p_star }
                } else {
                    let u = 2.0 / (g + 1.0) * (a + 0.5 * (g - 1.0) * s.u + xi);
                    let c = 2.0 / (g + 1.0) * (a + 0.5 * (g - 1.0) * (s.u - xi));
                    let rho = s.rho * (c / a).powf(2.0 / (g - 1.0));
                    GasState { rho, u, p: s.p * (c / a).powf(2.0 * g / (g - 1.0)) }
                }
            }
        } else {
            let s = self.right;
            let a = (g * s.p / s.rho).sqrt();
            if p_star > s.p {
                let sr =
                    s.u + a * ((g + 1.0) / (2.0 * g) * p_star / s.p + (g - 1.0) / (2.0 * g)).sqrt();
                if xi > sr {
                    s
                } else {
                    let pr = p_star / s.p;
                    let rho = s.rho * ((pr + (g - 1.0) / (g + 1.0)) / ((g - 1.0) / (g + 1.0) * pr + 1.0));
                    GasState { rho, u: u_star, p: p_star }
                }
            } else {
                let head = s.u + a;
                let a_star = a * (p_star / s.p).powf((g - 1.0) / (2.0 * g));
                let tail = u_star + a_star;
                if xi > head {
                    s
                } else if xi < tail {
                    GasState { rho: s.rho * (p_star / s.p).powf(1.0 / g), u: u_star, p: p_star }
                } else {
                    let u = 2.0 / (g + 1.0) * (-a + 0.5 * (g - 1.0) * s.u + xi);
                    let c = 2.0 / (g + 1.0) * (a - 0.5 * (g - 1.0) * (s.u - xi));
                    let rho = s.rho * (c / a).powf(2.0 / (g - 1.0));
                    GasState { rho, u, p: s.p * (c / a).powf(2.0 * g / (g - 1.0)) }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vortex_center_and_far_field() {
        let (_, v, _) = vortex_exact(0.0, VORTEX_CENTER);
        assert!((v.x - 1.0).abs() < 1e-15 && (v.y - 1.0).abs() < 1e-15);
        let (rho, v, p) = vortex_exact(0.0, Vec2::new(0.0, 0.0));
        // Distance 5 sqrt(2) from the center: perturbations below 1e-9.
        assert!((rho - 1.0).abs() < 1e-9 && (p - 1.0).abs() < 1e-9);
        assert!((v.x - 1.0).abs() < 1e-9);
    }

    #[test]
    fn vortex_density_perturbation_at_unit_radius() {
        // delta rho = (1 + dT)^(1/(gamma-1)) - 1 evaluated independently at
        // r = 1: dT = -(0.4 * 25) / (8 * 1.4 * pi^2) = -0.0904653425, so
        // delta rho = 0.9095346575^2.5 - 1 = -0.2110524518.
        let dt = vortex_delta_temperature(1.0);
        assert!((dt + 0.090_465_342_5).abs() < 1e-9);
        let drho = (1.0 + dt).powf(2.5) - 1.0;
        assert!((drho + 0.211_052_451_8).abs() < 1e-9);
    }

    #[test]
    fn kidder_similarity_factors() {
        let k = KidderSolution::standard();
        assert!((k.density0(0.9) - 1.0).abs() < 1e-14);
        assert!((k.density0(1.0) - 2.0).abs() < 1e-14);
        let (ri, re) = k.radii(0.0);
        assert!((ri - 0.9).abs() < 1e-15 && (re - 1.0).abs() < 1e-15);
        // h(t_f) = sqrt(1 - 3/4) = 1/2 exactly, so the radii halve.
        assert!((k.h(k.t_final()) - 0.5).abs() < 1e-13);
        let (ri, re) = k.radii(k.t_final());
        assert!((ri - 0.45).abs() < 1e-13 && (re - 0.5).abs() < 1e-13);
        // h decreases monotonically from one.
        assert!((k.h(0.0) - 1.0).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 1..=20 {
            let h = k.h(k.t_final() * i as f64 / 20.0);
            assert!(h < prev);
            prev = h;
        }
    }

    #[test]
    fn kidder_fields_are_isentropic_and_match_boundaries() {
        let k = KidderSolution::standard();
        let t = 0.6 * k.t_final();
        let (ri, re) = k.radii(t);
        let (pi, pe) = k.boundary_pressures(t);
        let (rho_i, _, p_i) = k.state(t, ri);
        let (rho_e, _, p_e) = k.state(t, re);
        assert!((p_i - pi).abs() < 1e-12 * pi);
        assert!((p_e - pe).abs() < 1e-12 * pe);
        assert!((p_i - k.s * rho_i.powf(k.gamma)).abs() < 1e-12 * p_i);
        assert!((p_e - k.s * rho_e.powf(k.gamma)).abs() < 1e-12 * p_e);
        // Velocity vanishes at t = 0.
        let (_, v0, _) = k.state(0.0, 0.95);
        assert_eq!(v0, 0.0);
    }

    #[test]
    fn becker_limits_and_continuity_relation() {
        let b = BeckerShock::standard();
        assert!((b.kappa_sq() - 0.375).abs() < 1e-15);
        // Density compression at M = 2 equals the Rankine-Hugoniot value 8/3.
        assert!((1.0 / b.kappa_sq() - 8.0 / 3.0).abs() < 1e-13);
        // Asymptotics of the profile.
        assert!((b.u_bar(0.5) - 1.0).abs() < 1e-7, "pre-shock side must be undisturbed");
        assert!((b.u_bar(-0.5) - b.kappa_sq()).abs() < 1e-7);
        // Integrated continuity rho_bar u_bar = 1 pointwise.
        for i in -40..=40 {
            let xi = i as f64 * 0.01;
            let ub = b.u_bar(xi);
            let (rho, _, _) = b.state(b.x0 + xi, 0.0);
            assert!((rho / b.rho0 * ub - 1.0).abs() < 1e-12);
        }
        // u_bar monotone decreasing from 1 to kappa^2 going left.
        let mut prev = b.u_bar(0.6);
        for i in (-60..=60).rev() {
            let ub = b.u_bar(i as f64 * 0.01);
            assert!(ub <= prev + 1e-12);
            prev = ub;
        }
    }

    #[test]
    fn becker_lab_frame_states() {
        let b = BeckerShock::standard();
        // Far ahead of the shock the gas is at rest at the upstream state.
        let (rho, u, p) = b.state(0.9, 0.0);
        assert!((rho - 1.0).abs() < 1e-9 && u.abs() < 1e-9 && (p - b.p0).abs() < 1e-9);
        // Far behind: Rankine-Hugoniot state for M = 2.
        let (rho, u, p) = b.state(-0.9, 0.0);
        assert!((rho - 8.0 / 3.0).abs() < 1e-8);
        assert!((u - 1.25).abs() < 1e-8);
        let p2 = b.p0 * (1.0 + 2.0 * b.gamma / (b.gamma + 1.0) * (b.m_s * b.m_s - 1.0));
        assert!((p - p2).abs() < 1e-8);
        // The shock center travels at speed M c0.
        let (rho_later, _, _) = b.state(0.25 + 2.0 * 0.2, 0.2);
        let (rho_init, _, _) = b.state(0.25, 0.0);
        assert!((rho_later - rho_init).abs() < 1e-9);
    }

    #[test]
    fn sedov_indicator_values() {
        let (r, ratio) = sedov_indicators(1.4);
        assert_eq!(r, 1.0);
        assert!((ratio - 6.0).abs() < 1e-14);
    }

    #[test]
    fn swinging_plate_zero_crossings() {
        let s = SwingingPlate::standard();
        // At a quarter period the velocity field vanishes identically.
        let t = 0.5 * std::f64::consts::PI / s.omega;
        let v = s.velocity(t, Vec2::new(0.7, 1.3));
        assert!(v.norm() < 1e-16 * s.omega * s.u0);
        // v_x vanishes on the x = 0 edge, v_y on the y = 0 edge.
        let v = s.velocity(0.0, Vec2::new(0.0, 0.8));
        assert_eq!(v.x, 0.0);
        let v = s.velocity(0.0, Vec2::new(0.8, 0.0));
        assert_eq!(v.y, 0.0);
        // At the final time the energy is purely kinetic.
        let e = s.energy(s.period_time(), Vec2::new(0.3, 0.4));
        let v = s.velocity(s.period_time(), Vec2::new(0.3, 0.4));
        assert!((e - 0.5 * v.norm_sq()).abs() < 1e-18);
    }

    #[test]
    fn exact_riemann_sod_consistency() {
        let left = GasState { rho: 1.0, u: 0.0, p: 1.0 };
        let right = GasState { rho: 0.125, u: 0.0, p: 0.1 };
        let sol = exact_riemann(1.4, left, right);
        // The star state must satisfy both wave relations: recompute the
        // velocity jump functions and check the root.
        let g = 1.4;
        let a_l = (g * left.p / left.rho).sqrt();
        let f_l = 2.0 * a_l / (g - 1.0) * ((sol.p_star / left.p).powf((g - 1.0) / (2.0 * g)) - 1.0);
        let ak = 2.0 / ((g + 1.0) * right.rho);
        let bk = (g - 1.0) / (g + 1.0) * right.p;
        let f_r = (sol.p_star - right.p) * (ak / (sol.p_star + bk)).sqrt();
        assert!((f_l + f_r).abs() < 1e-10, "star pressure is not a root");
        // Known regime: left rarefaction, right shock, star pressure between.
        assert!(sol.p_star < left.p && sol.p_star > right.p);
        assert!(sol.u_star > 0.0);
        // Sampling is continuous across the contact in p and u.
        let a = sol.sample(sol.u_star - 1e-9);
        let b = sol.sample(sol.u_star + 1e-9);
        assert!((a.p - b.p).abs() < 1e-6 && (a.u - b.u).abs() < 1e-6);
        // Density jumps across the contact.
        assert!(a.rho > b.rho);
    }
}
