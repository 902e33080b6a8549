//! Convex flux models and shock setup.

use crate::error::{CoreError, Result};

/// A strictly convex C^3 flux together with its derivatives.
///
/// All built-in models are polynomial, so derivatives of every order are
/// exact. `Polynomial` holds coefficients in increasing degree.
#[derive(Debug, Clone, PartialEq)]
pub enum FluxModel {
    /// f(u) = u^2 / 2, the reference case.
    Burgers,
    /// f(u) = u^2 / 2 + c u; the linear part shifts the wave speed only.
    QuadraticLinear { c: f64 },
    /// User-supplied polynomial, coefficients in increasing degree.
    Polynomial { coeffs: Vec<f64> },
}

impl FluxModel {
    pub fn descriptor(&self) -> String {
        match self {
            FluxModel::Burgers => "burgers u^2/2".to_string(),
            FluxModel::QuadraticLinear { c } => format!("u^2/2 + {c} u"),
            FluxModel::Polynomial { coeffs } => format!("polynomial deg {}", coeffs.len().saturating_sub(1)),
        }
    }

    fn poly_deriv(coeffs: &[f64], m: usize, u: f64) -> f64 {
        let mut acc = 0.0;
        for k in (m..coeffs.len()).rev() {
            let mut c = coeffs[k];
            for j in 0..m {
                c *= (k - j) as f64;
            }
            acc = acc * u + c;
        }
        acc
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self {
            FluxModel::Burgers => 0.5 * u * u,
            FluxModel::QuadraticLinear { c } => 0.5 * u * u + c * u,
            FluxModel::Polynomial { coeffs } => Self::poly_deriv(coeffs, 0, u),
        }
    }

    pub fn d1(&self, u: f64) -> f64 {
        match self {
            FluxModel::Burgers => u,
            FluxModel::QuadraticLinear { c } => u + c,
            FluxModel::Polynomial { coeffs } => Self::poly_deriv(coeffs, 1, u),
        }
    }

    pub fn d2(&self, u: f64) -> f64 {
        match self {
            FluxModel::Burgers => 1.0,
            FluxModel::QuadraticLinear { .. } => 1.0,
            FluxModel::Polynomial { coeffs } => Self::poly_deriv(coeffs, 2, u),
        }
    }

    pub fn d3(&self, u: f64) -> f64 {
        match self {
            FluxModel::Burgers => 0.0,
            FluxModel::QuadraticLinear { .. } => 0.0,
            FluxModel::Polynomial { coeffs } => Self::poly_deriv(coeffs, 3, u),
        }
    }

    /// Strict convexity on [lo, hi], checked by dense sampling.
    pub fn check_convex(&self, lo: f64, hi: f64) -> Result<()> {
        let n = 1000;
        for i in 0..=n {
            let u = lo + (hi - lo) * i as f64 / n as f64;
            if self.d2(u) <= 0.0 {
                return Err(CoreError::InvalidConfig(format!(
                    "flux not strictly convex: f''({u}) = {}",
                    self.d2(u)
                )));
            }
        }
        Ok(())
    }

    /// Consistency of d1/d2/d3 with central differences of `eval`,
    /// relative error <= 1e-6 with an absolute floor of 1e-12.
    pub fn check_derivatives(&self, lo: f64, hi: f64) -> Result<()> {
        let n = 57;
        let scale = (hi - lo).abs().max(1.0);
        // step sizes balance truncation against the 1/h^k rounding blowup
        let h1 = 1e-5 * scale;
        let h2 = 1e-3 * scale;
        let h3 = 1e-2 * scale;
        for i in 0..=n {
            let u = lo + (hi - lo) * i as f64 / n as f64;
            let fd1 = (self.eval(u + h1) - self.eval(u - h1)) / (2.0 * h1);
            let fd2 = (self.eval(u + h2) - 2.0 * self.eval(u) + self.eval(u - h2)) / (h2 * h2);
            let fd3 = (self.eval(u + 2.0 * h3) - 2.0 * self.eval(u + h3) + 2.0 * self.eval(u - h3)
                - self.eval(u - 2.0 * h3))
                / (2.0 * h3 * h3 * h3);
            for (have, want, tol, floor) in [
                (self.d1(u), fd1, 1e-6, 1e-9),
                (self.d2(u), fd2, 1e-4, 1e-6),
                (self.d3(u), fd3, 1e-2, 1e-4),
            ] {
                let denom = want.abs().max(1e-12);
                if (have - want).abs() / denom > tol && (have - want).abs() > floor {
                    return Err(CoreError::InvalidConfig(format!(
                        "flux derivative mismatch at u = {u}: {have} vs FD {want}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Rankine-Hugoniot shock speed s (u_l - u_r) = f(u_l) - f(u_r).
pub fn rankine_hugoniot_speed(flux: &FluxModel, u_l: f64, u_r: f64) -> Result<f64> {
    if u_l == u_r {
        return Err(CoreError::DegenerateStates(u_l));
    }
    Ok((flux.eval(u_l) - flux.eval(u_r)) / (u_l - u_r))
}

/// Admissibility report for the profile construction.
#[derive(Debug, Clone, Copy)]
pub struct ExistenceReport {
    /// gamma^2 + 4 mu (s - f'(u_l)); the profile is monotone iff >= 0.
    pub discriminant: f64,
    pub pass: bool,
}

/// Far-field states, coefficients and shock speed for one scenario.
#[derive(Debug, Clone)]
pub struct ShockSetup {
    pub flux: FluxModel,
    pub u_l: f64,
    pub u_r: f64,
    pub mu: f64,
    pub gamma: f64,
    pub s: f64,
    /// mu = 0 is only allowed through `inviscid_oracle`, where the profile
    /// equation becomes first order and has closed-form solutions to test
    /// against.
    pub oracle_mode: bool,
}

impl ShockSetup {
    pub fn new(flux: FluxModel, u_l: f64, u_r: f64, mu: f64, gamma: f64) -> Result<Self> {
        if mu <= 0.0 {
            return Err(CoreError::InvalidConfig(format!(
                "dispersion mu must be positive, got {mu} (use inviscid_oracle for mu = 0)"
            )));
        }
        Self::build(flux, u_l, u_r, mu, gamma, false)
    }

    /// mu = 0 reference construction with closed-form profiles.
    pub fn inviscid_oracle(flux: FluxModel, u_l: f64, u_r: f64, gamma: f64) -> Result<Self> {
        Self::build(flux, u_l, u_r, 0.0, gamma, true)
    }

    fn build(flux: FluxModel, u_l: f64, u_r: f64, mu: f64, gamma: f64, oracle_mode: bool) -> Result<Self> {
        if gamma <= 0.0 {
            return Err(CoreError::InvalidConfig(format!("viscosity gamma must be positive, got {gamma}")));
        }
        if u_l <= u_r {
            return Err(CoreError::InvalidConfig(format!(
                "need u_l > u_r for a compressive shock, got ({u_l}, {u_r})"
            )));
        }
        flux.check_convex(u_r, u_l)?;
        flux.check_derivatives(u_r, u_l)?;
        let s = rankine_hugoniot_speed(&flux, u_l, u_r)?;
        // Lax condition is automatic for strictly convex f; assert as a gate.
        if !(flux.d1(u_l) > s && s > flux.d1(u_r)) {
            return Err(CoreError::InvalidConfig(format!(
                "Lax condition violated: f'(u_l) = {}, s = {s}, f'(u_r) = {}",
                flux.d1(u_l),
                flux.d1(u_r)
            )));
        }
        Ok(Self {
            flux,
            u_l,
            u_r,
            mu,
            gamma,
            s,
            oracle_mode,
        })
    }

    pub fn jump(&self) -> f64 {
        self.u_l - self.u_r
    }

    /// Lemma-2.1-style admissibility: gamma^2 + 4 mu (s - f'(u_l)) >= 0.
    pub fn check_profile_existence(&self) -> ExistenceReport {
        let discriminant = self.gamma * self.gamma + 4.0 * self.mu * (self.s - self.flux.d1(self.u_l));
        ExistenceReport {
            discriminant,
            pass: discriminant >= 0.0,
        }
    }
}
