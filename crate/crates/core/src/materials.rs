//! Drude-model fits and the discrete polarization-current update.
//!
//! A complex refractive index at the drive frequency is converted into the
//! single-pole model eps(w) = eps_inf - wp^2 / (w^2 + i*g*w) (time convention
//! e^{-iwt}, natural units eps0 = 1). One pole matches one complex datum
//! exactly, so the fit is a closed-form two-real-unknown solve.
//!
//! The time-domain realization marches the polarization current
//! dJ/dt + g*J = wp^2 * E with the semi-implicit (bilinear) discretization,
//! which keeps the second-order accuracy of the leapfrog scheme:
//!
//!   J^{n+1} = ka * J^n + (kb/2) * (E^{n+1} + E^n)
//!   E^{n+1} = [ (c1 - kb/4) E^n + curl(H) - (1+ka)/2 * J^n ] / (c1 + kb/4)
//!
//! with ka = (1 - g dt/2)/(1 + g dt/2), kb = wp^2 dt / (1 + g dt/2),
//! c1 = eps_inf / dt. For wp = 0 this reduces exactly to the vacuum update.

use num_complex::Complex64;

use crate::error::CoreError;

/// Single-pole Drude medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrudeMedium {
    pub eps_inf: f64,
    /// Plasma frequency (rad per unit ct).
    pub omega_p: f64,
    /// Collision rate (rad per unit ct).
    pub gamma: f64,
}

impl DrudeMedium {
    pub const VACUUM: Self = Self {
        eps_inf: 1.0,
        omega_p: 0.0,
        gamma: 0.0,
    };

    /// Model permittivity at angular frequency `omega`.
    pub fn epsilon(&self, omega: f64) -> Complex64 {
        if self.omega_p == 0.0 {
            return Complex64::new(self.eps_inf, 0.0);
        }
        let denom = Complex64::new(omega * omega, self.gamma * omega);
        Complex64::new(self.eps_inf, 0.0) - self.omega_p.powi(2) / denom
    }
}

/// Fit a Drude medium so that eps(omega0) equals n^2 exactly.
pub fn fit_drude(n: Complex64, omega0: f64, eps_inf: f64) -> Result<DrudeMedium, CoreError> {
    if omega0 <= 0.0 {
        return Err(CoreError::MaterialFit("omega0 must be positive".into()));
    }
    if n.im < 0.0 {
        return Err(CoreError::MaterialFit(format!(
            "Im(n) = {} must be non-negative",
            n.im
        )));
    }
    let target = n * n;
    let a = eps_inf - target.re;
    let b = target.im;

    if a == 0.0 && b == 0.0 {
        // Identity medium: by convention omega_p = 0, gamma = 0.
        return Ok(DrudeMedium {
            eps_inf,
            omega_p: 0.0,
            gamma: 0.0,
        });
    }
    if a <= 0.0 {
        return Err(CoreError::MaterialFit(format!(
            "wp^2 would be non-positive: eps_inf - Re(n^2) = {a:.6e}"
        )));
    }
    let gamma = b * omega0 / a;
    if b > 0.0 && gamma <= 0.0 {
        return Err(CoreError::MaterialFit(format!(
            "gamma = {gamma:.6e} is non-positive"
        )));
    }
    let omega_p_sq = a * (omega0 * omega0 + gamma * gamma);
    Ok(DrudeMedium {
        eps_inf,
        omega_p: omega_p_sq.sqrt(),
        gamma,
    })
}

/// Precomputed scalars for the discrete current and field updates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdeCoefficients {
    /// Current decay factor ka; 1 for vacuum, in (0, 1) for lossy media.
    pub j_decay: f64,
    /// Drive factor kb/2 applied to (E_new + E_old) in the current update.
    pub j_drive: f64,
    /// Coefficient on E_old in the field update.
    pub e_self: f64,
    /// Divisor applied to (curl - j_couple * J - J_source).
    pub e_div: f64,
    /// Weight of the previous current in the field update, (1 + ka)/2.
    pub j_couple: f64,
}

impl AdeCoefficients {
    pub fn vacuum(dt: f64) -> Self {
        Self {
            j_decay: 1.0,
            j_drive: 0.0,
            e_self: 1.0,
            e_div: dt,
            j_couple: 1.0,
        }
    }
}

/// Coefficients for one medium at time step `dt`.
pub fn ade_coefficients(medium: &DrudeMedium, dt: f64) -> AdeCoefficients {
    if medium.omega_p == 0.0 && medium.eps_inf == 1.0 {
        return AdeCoefficients::vacuum(dt);
    }
    let half_gdt = 0.5 * medium.gamma * dt;
    let ka = (1.0 - half_gdt) / (1.0 + half_gdt);
    let kb = medium.omega_p.powi(2) * dt / (1.0 + half_gdt);
    let c1 = medium.eps_inf / dt;
    let denom = c1 + 0.25 * kb;
    AdeCoefficients {
        j_decay: ka,
        j_drive: 0.5 * kb,
        e_self: (c1 - 0.25 * kb) / denom,
        e_div: 1.0 / denom,
        j_couple: 0.5 * (1.0 + ka),
    }
}
