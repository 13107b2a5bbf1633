//! One-dimensional Eulerian MUSCL-TVD finite volume solver for the
//! compressible Navier-Stokes(-Fourier) equations. Serves as the fine-grid
//! reference for the viscous Riemann problems; accuracy over speed.

use crate::error::{Result, SolverError};
use crate::refsol::{exact_riemann, GasState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ns1dBc {
    Transmissive,
    Reflective,
    Periodic,
}

#[derive(Clone, Copy, Debug)]
pub struct Ns1dConfig {
    pub gamma: f64,
    pub c_v: f64,
    pub mu: f64,
    pub kappa: f64,
    pub x0: f64,
    pub x1: f64,
    pub n: usize,
    pub cfl: f64,
    pub bc: Ns1dBc,
}

impl Ns1dConfig {
    pub fn new(gamma: f64, mu: f64, n: usize) -> Self {
        Ns1dConfig {
            gamma,
            c_v: 2.5,
            mu,
            kappa: 0.0,
            x0: 0.0,
            x1: 1.0,
            n,
            cfl: 0.4,
            bc: Ns1dBc::Transmissive,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Profile1d {
    pub x: Vec<f64>,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
}

impl Profile1d {
    /// Piecewise-linear interpolation of the density at x.
    pub fn rho_at(&self, x: f64) -> f64 {
        interp(&self.x, &self.rho, x)
    }

    pub fn u_at(&self, x: f64) -> f64 {
        interp(&self.x, &self.u, x)
    }

    pub fn p_at(&self, x: f64) -> f64 {
        interp(&self.x, &self.p, x)
    }
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let idx = xs.partition_point(|&v| v < x).max(1);
    let (x0, x1) = (xs[idx - 1], xs[idx]);
    let w = (x - x0) / (x1 - x0);
    ys[idx - 1] * (1.0 - w) + ys[idx] * w
}

struct Grid {
    rho: Vec<f64>,
    mom: Vec<f64>,
    ene: Vec<f64>, // total energy per volume
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

fn hllc_flux(l: GasState, r: GasState, gamma: f64) -> [f64; 3] {
    let g = gamma;
    let al = (g * l.p / l.rho).sqrt();
    let ar = (g * r.p / r.rho).sqrt();
    // PVRS star-pressure estimate with shock corrections on each side.
    let p_pvrs = 0.5 * (l.p + r.p) - 0.125 * (r.u - l.u) * (l.rho + r.rho) * (al + ar);
    let p_star = p_pvrs.max(0.0);
    let qk = |p: f64, pk: f64| {
        if p_star <= pk {
            1.0
        } else {
            (1.0 + (g + 1.0) / (2.0 * g) * (p / pk - 1.0)).sqrt()
        }
    };
    let sl = l.u - al * qk(p_star, l.p);
    let sr = r.u + ar * qk(p_star, r.p);
    let s_star = (r.p - l.p + l.rho * l.u * (sl - l.u) - r.rho * r.u * (sr - r.u))
        / (l.rho * (sl - l.u) - r.rho * (sr - r.u));

    let energy = |s: &GasState| s.p / (g - 1.0) + 0.5 * s.rho * s.u * s.u;
    let flux = |s: &GasState| {
        let e = energy(s);
        [s.rho * s.u, s.rho * s.u * s.u + s.p, s.u * (e + s.p)]
    };
    if sl >= 0.0 {
        flux(&l)
    } else if sr <= 0.0 {
        flux(&r)
    } else {
        let star = |s: &GasState, sk: f64| -> [f64; 3] {
            let e = energy(s);
            let coef = s.rho * (sk - s.u) / (sk - s_star);
            let e_star =
                coef * (e / s.rho + (s_star - s.u) * (s_star + s.p / (s.rho * (sk - s.u))));
            [coef, coef * s_star, e_star]
        };
        if s_star >= 0.0 {
            let f = flux(&l);
            let u_star = star(&l, sl);
            let u = [l.rho, l.rho * l.u, energy(&l)];
            [
                f[0] + sl * (u_star[0] - u[0]),
                f[1] + sl * (u_star[1] - u[1]),
                f[2] + sl * (u_star[2] - u[2]),
            ]
        } else {
            let f = flux(&r);
            let u_star = star(&r, sr);
            let u = [r.rho, r.rho * r.u, energy(&r)];
            [
                f[0] + sr * (u_star[0] - u[0]),
                f[1] + sr * (u_star[1] - u[1]),
                f[2] + sr * (u_star[2] - u[2]),
            ]
        }
    }
}

fn ghost(cfg: &Ns1dConfig, w: &[GasState], i: isize) -> GasState {
    let n = w.len() as isize;
    match cfg.bc {
        Ns1dBc::Periodic => w[i.rem_euclid(n) as usize],
        Ns1dBc::Transmissive => w[i.clamp(0, n - 1) as usize],
        Ns1dBc::Reflective => {
            if i < 0 {
                let s = w[(-1 - i) as usize];
                GasState { rho: s.rho, u: -s.u, p: s.p }
            } else if i >= n {
                let s = w[(2 * n - 1 - i) as usize];
                GasState { rho: s.rho, u: -s.u, p: s.p }
            } else {
                w[i as usize]
            }
        }
    }
}

/// One evaluation of the hyperbolic right-hand side with limited linear
/// reconstruction of the primitive variables.
fn hyperbolic_rhs(cfg: &Ns1dConfig, grid: &Grid, h: f64, out: &mut [[f64; 3]]) {
    let n = cfg.n;
    let g = cfg.gamma;
    let w: Vec<GasState> = (0..n)
        .map(|i| {
            let rho = grid.rho[i];
            let u = grid.mom[i] / rho;
            let p = (grid.ene[i] - 0.5 * rho * u * u) * (g - 1.0);
            GasState { rho, u, p }
        })
        .collect();

    // Limited slopes per cell and primitive component.
    let slope = |i: isize| -> [f64; 3] {
        let c = ghost(cfg, &w, i);
        let l = ghost(cfg, &w, i - 1);
        let r = ghost(cfg, &w, i + 1);
        [
            minmod(c.rho - l.rho, r.rho - c.rho),
            minmod(c.u - l.u, r.u - c.u),
            minmod(c.p - l.p, r.p - c.p),
        ]
    };

    // Face fluxes; face i sits between cells i-1 and i.
    let mut fluxes = vec![[0.0; 3]; n + 1];
    for f in 0..=n {
        let il = f as isize - 1;
        let ir = f as isize;
        let sl = slope(il);
        let sr = slope(ir);
        let wl = ghost(cfg, &w, il);
        let wr = ghost(cfg, &w, ir);
        let left = GasState {
            rho: (wl.rho + 0.5 * sl[0]).max(1e-12),
            u: wl.u + 0.5 * sl[1],
            p: (wl.p + 0.5 * sl[2]).max(1e-12),
        };
        let right = GasState {
            rho: (wr.rho - 0.5 * sr[0]).max(1e-12),
            u: wr.u - 0.5 * sr[1],
            p: (wr.p - 0.5 * sr[2]).max(1e-12),
        };
        fluxes[f] = hllc_flux(left, right, g);
    }
    for i in 0..n {
        for c in 0..3 {
            out[i][c] = -(fluxes[i + 1][c] - fluxes[i][c]) / h;
        }
    }
}

/// Thomas solve of a tridiagonal system; `a` sub, `b` main, `c` super.
fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &mut [f64]) {
    let n = d.len();
    let mut cp = vec![0.0; n];
    let mut bp = b[0];
    d[0] /= bp;
    for i in 1..n {
        cp[i - 1] = c[i - 1] / bp;
        bp = b[i] - a[i] * cp[i - 1];
        d[i] = (d[i] - a[i] * d[i - 1]) / bp;
    }
    for i in (0..n - 1).rev() {
        d[i] -= cp[i] * d[i + 1];
    }
}

/// Backward-Euler diffusion of velocity (conservative momentum and energy
/// updates) followed by heat conduction on the temperature.
fn diffusion_step(cfg: &Ns1dConfig, grid: &mut Grid, h: f64, dt: f64) {
    let n = cfg.n;
    let mu_eff = 4.0 / 3.0 * cfg.mu;
    if cfg.mu > 0.0 {
        // Implicit solve for the new velocity.
        let r = mu_eff * dt / (h * h);
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 0..n {
            let rho = grid.rho[i];
            a[i] = -r / rho;
            c[i] = -r / rho;
            b[i] = 1.0 + 2.0 * r / rho;
            d[i] = grid.mom[i] / rho;
            if i == 0 {
                match cfg.bc {
                    Ns1dBc::Transmissive => b[i] = 1.0 + r / rho,
                    Ns1dBc::Reflective => b[i] = 1.0 + 3.0 * r / rho,
                    Ns1dBc::Periodic => b[i] = 1.0 + r / rho, // wrap ignored
                }
                a[i] = 0.0;
            }
            if i == n - 1 {
                match cfg.bc {
                    Ns1dBc::Transmissive => b[i] = 1.0 + r / grid.rho[i],
                    Ns1dBc::Reflective => b[i] = 1.0 + 3.0 * r / grid.rho[i],
                    Ns1dBc::Periodic => b[i] = 1.0 + r / grid.rho[i],
                }
                c[i] = 0.0;
            }
        }
        thomas(&a, &b, &c, &mut d);
        let u_new = d;
        // Conservative energy update with the implied viscous fluxes.
        let mut fv = vec![0.0; n + 1];
        for f in 1..n {
            let du = (u_new[f] - u_new[f - 1]) / h;
            let ubar = 0.5 * (u_new[f] + u_new[f - 1]);
            fv[f] = mu_eff * ubar * du;
        }
        if cfg.bc == Ns1dBc::Reflective {
            // Wall faces: u = 0 there, zero energy flux but full friction on
            // momentum (accounted in the velocity solve).
        }
        for i in 0..n {
            grid.ene[i] += dt / h * (fv[i + 1] - fv[i]);
            grid.mom[i] = grid.rho[i] * u_new[i];
        }
    }
    if cfg.kappa > 0.0 {
        // rho c_v (T' - T)/dt = kappa (T'_{i+1} - 2 T'_i + T'_{i-1}) / h^2
        // with zero-flux closures at both ends.
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 0..n {
            let rho = grid.rho[i];
            let u = grid.mom[i] / rho;
            d[i] = (grid.ene[i] / rho - 0.5 * u * u) / cfg.c_v;
            let kk = cfg.kappa * dt / (rho * cfg.c_v * h * h);
            a[i] = -kk;
            c[i] = -kk;
            b[i] = 1.0 + 2.0 * kk;
            if i == 0 {
                b[i] = 1.0 + kk;
                a[i] = 0.0;
            }
            if i == n - 1 {
                b[i] = 1.0 + kk;
                c[i] = 0.0;
            }
        }
        thomas(&a, &b, &c, &mut d);
        let t_new = d;
        let mut fq = vec![0.0; n + 1];
        for f in 1..n {
            fq[f] = cfg.kappa * (t_new[f] - t_new[f - 1]) / h;
        }
        for i in 0..n {
            grid.ene[i] += dt / h * (fq[i + 1] - fq[i]);
        }
    }
}

/// Integrate to `t_final` from pointwise initial primitives.
pub fn ns_reference_1d(
    cfg: &Ns1dConfig,
    init: impl Fn(f64) -> (f64, f64, f64),
    t_final: f64,
) -> Result<Profile1d> {
    let n = cfg.n;
    let h = (cfg.x1 - cfg.x0) / n as f64;
    let g = cfg.gamma;
    let mut grid = Grid { rho: vec![0.0; n], mom: vec![0.0; n], ene: vec![0.0; n] };
    let mut xs = vec![0.0; n];
    for i in 0..n {
        let x = cfg.x0 + (i as f64 + 0.5) * h;
        xs[i] = x;
        let (rho, u, p) = init(x);
        grid.rho[i] = rho;
        grid.mom[i] = rho * u;
        grid.ene[i] = p / (g - 1.0) + 0.5 * rho * u * u;
    }

    let mut t = 0.0;
    let mut rhs1 = vec![[0.0; 3]; n];
    let mut rhs2 = vec![[0.0; 3]; n];
    let mut guard = 0u64;
    while t < t_final * (1.0 - 1e-12) {
        guard += 1;
        if guard > 100_000_000 {
            return Err(SolverError::NonConvergence("1D reference time loop".into()));
        }
        // Advective CFL bound.
        let mut smax = 0.0f64;
        for i in 0..n {
            let rho = grid.rho[i];
            let u = grid.mom[i] / rho;
            let p = (grid.ene[i] - 0.5 * rho * u * u) * (g - 1.0);
            if p <= 0.0 || rho <= 0.0 {
                return Err(SolverError::EosDomain(format!(
                    "1D reference lost positivity at cell {i}"
                )));
            }
            smax = smax.max(u.abs() + (g * p / rho).sqrt());
        }
        let dt = (cfg.cfl * h / smax).min(t_final - t);

        // Heun two-stage hyperbolic update.
        hyperbolic_rhs(cfg, &grid, h, &mut rhs1);
        let mut mid = Grid {
            rho: grid.rho.clone(),
            mom: grid.mom.clone(),
            ene: grid.ene.clone(),
        };
        for i in 0..n {
            mid.rho[i] += dt * rhs1[i][0];
            mid.mom[i] += dt * rhs1[i][1];
            mid.ene[i] += dt * rhs1[i][2];
        }
        hyperbolic_rhs(cfg, &mid, h, &mut rhs2);
        for i in 0..n {
            grid.rho[i] += 0.5 * dt * (rhs1[i][0] + rhs2[i][0]);
            grid.mom[i] += 0.5 * dt * (rhs1[i][1] + rhs2[i][1]);
            grid.ene[i] += 0.5 * dt * (rhs1[i][2] + rhs2[i][2]);
        }

        diffusion_step(cfg, &mut grid, h, dt);
        t += dt;
    }

    let mut out = Profile1d { x: xs, rho: vec![0.0; n], u: vec![0.0; n], p: vec![0.0; n] };
    for i in 0..n {
        let rho = grid.rho[i];
        let u = grid.mom[i] / rho;
        out.rho[i] = rho;
        out.u[i] = u;
        out.p[i] = (grid.ene[i] - 0.5 * rho * u * u) * (g - 1.0);
    }
    Ok(out)
}

/// Sod shock-tube initial data with the jump at x = 0.5.
pub fn sod_initial(x: f64) -> (f64, f64, f64) {
    if x <= 0.5 {
        (1.0, 0.0, 1.0)
    } else {
        (0.125, 0.0, 0.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inviscid_sod_matches_the_exact_riemann_solution() {
        let cfg = Ns1dConfig::new(1.4, 0.0, 2000);
        let prof = ns_reference_1d(&cfg, sod_initial, 0.2).unwrap();
        let sol = exact_riemann(
            1.4,
            GasState { rho: 1.0, u: 0.0, p: 1.0 },
            GasState { rho: 0.125, u: 0.0, p: 0.1 },
        );
        let mut l1 = 0.0;
        let h = 1.0 / 2000.0;
        for i in 0..cfg.n {
            let xi = (prof.x[i] - 0.5) / 0.2;
            l1 += (prof.rho[i] - sol.sample(xi).rho).abs() * h;
        }
        // First-order convergence near the discontinuities dominates.
        assert!(l1 < 5e-3, "L1 density error vs exact Riemann solution: {l1:.3e}");
    }

    #[test]
    fn viscous_profile_is_smoothed_and_monotone_where_expected() {
        let cfg = Ns1dConfig::new(1.4, 1e-2, 1500);
        let prof = ns_reference_1d(&cfg, sod_initial, 0.2).unwrap();
        // Physical viscosity smears the shock: density decreases monotonically
        // behind the rarefaction foot, allowing a tiny numerical ripple.
        let mut max_up = 0.0f64;
        for i in 1..cfg.n {
            max_up = max_up.max(prof.rho[i] - prof.rho[i - 1]);
        }
        assert!(max_up < 2e-3, "density profile must be non-increasing, ripple {max_up:.2e}");
    }

    #[test]
    fn conservation_on_closed_domains() {
        // Pure hyperbolic periodic transport conserves all three invariants.
        let cfg = Ns1dConfig { bc: Ns1dBc::Periodic, ..Ns1dConfig::new(1.4, 0.0, 200) };
        let init = |x: f64| (1.0 + 0.2 * (2.0 * std::f64::consts::PI * x).sin(), 0.3, 1.0);
        let h = 1.0 / 200.0;
        let prof0: Vec<(f64, f64, f64)> = (0..200)
            .map(|i| init(cfg.x0 + (i as f64 + 0.5) * h))
            .collect();
        let mass0: f64 = prof0.iter().map(|s| s.0).sum::<f64>() * h;
        let mom0: f64 = prof0.iter().map(|s| s.0 * s.1).sum::<f64>() * h;
        let e0: f64 = prof0
            .iter()
            .map(|s| s.2 / 0.4 + 0.5 * s.0 * s.1 * s.1)
            .sum::<f64>()
            * h;
        let prof = ns_reference_1d(&cfg, init, 0.05).unwrap();
        let mass: f64 = prof.rho.iter().sum::<f64>() * h;
        let mom: f64 = prof.rho.iter().zip(&prof.u).map(|(r, u)| r * u).sum::<f64>() * h;
        let e: f64 = (0..200)
            .map(|i| prof.p[i] / 0.4 + 0.5 * prof.rho[i] * prof.u[i] * prof.u[i])
            .sum::<f64>()
            * h;
        assert!((mass - mass0).abs() < 1e-13 * mass0);
        assert!((mom - mom0).abs() < 1e-13 * mom0.abs().max(1.0));
        assert!((e - e0).abs() < 1e-12 * e0);

        // Viscous reflective box: mass and energy still conserved.
        let cfg = Ns1dConfig { bc: Ns1dBc::Reflective, kappa: 1e-3, ..Ns1dConfig::new(1.4, 1e-2, 150) };
        let init = |x: f64| (1.0, 0.4 * (std::f64::consts::PI * x).sin(), 1.0 + 0.1 * x);
        let h = 1.0 / 150.0;
        let mass0: f64 = (0..150).map(|i| init((i as f64 + 0.5) * h).0).sum::<f64>() * h;
        let e0: f64 = (0..150)
            .map(|i| {
                let (r, u, p) = init((i as f64 + 0.5) * h);
                p / 0.4 + 0.5 * r * u * u
            })
            .sum::<f64>()
            * h;
        let prof = ns_reference_1d(&cfg, init, 0.1).unwrap();
        let mass: f64 = prof.rho.iter().sum::<f64>() * h;
        let e: f64 = (0..150)
            .map(|i| prof.p[i] / 0.4 + 0.5 * prof.rho[i] * prof.u[i] * prof.u[i])
            .sum::<f64>()
            * h;
        assert!((mass - mass0).abs() < 1e-12 * mass0);
        assert!((e - e0).abs() < 1e-11 * e0, "energy drift {:.2e}", (e - e0) / e0);
    }

    #[test]
    fn grid_convergence_of_the_viscous_profile() {
        // Doubling the resolution changes the L1 profile by a small fraction.
        let coarse = ns_reference_1d(&Ns1dConfig::new(1.4, 5e-3, 1000), sod_initial, 0.2).unwrap();
        let fine = ns_reference_1d(&Ns1dConfig::new(1.4, 5e-3, 2000), sod_initial, 0.2).unwrap();
        let mut l1 = 0.0;
        let mut norm = 0.0;
        for i in 0..1000 {
            let x = coarse.x[i];
            l1 += (coarse.rho[i] - fine.rho_at(x)).abs();
            norm += coarse.rho[i].abs();
        }
        assert!(l1 / norm < 2e-3, "L1 change on refinement: {:.3e}", l1 / norm);
    }
}
