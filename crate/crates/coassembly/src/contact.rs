//! Soft-finger contact limit surface and the Winkler-foundation
//! eccentricity that couples friction force and friction torque.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Elastic pad parameters. `k` is the elastic modulus in pascals; `r1` and
/// `r2` are the relative radii of the finger pad and the contacted surface.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SoftFingerParams {
    pub mu: f64,
    pub h: f64,
    pub k: f64,
    pub r1: f64,
    pub r2: f64,
}

impl SoftFingerParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("mu", self.mu),
            ("h", self.h),
            ("k", self.k),
            ("r1", self.r1),
            ("r2", self.r2),
        ];
        for (name, v) in fields {
            if !(v > 0.0) {
                return Err(Error::SceneInvalid(format!(
                    "soft-finger parameter {name} must be positive, got {v}"
                )));
            }
        }
        if self.mu > 2.0 {
            return Err(Error::SceneInvalid(format!(
                "friction coefficient {} exceeds the sanity bound 2.0",
                self.mu
            )));
        }
        Ok(())
    }
}

impl Default for SoftFingerParams {
    /// Rubber-pad defaults; the object-side radius uses the flat-face proxy.
    fn default() -> Self {
        Self {
            mu: 0.8,
            h: 2e-3,
            k: 5e5,
            r1: 0.015,
            r2: 0.05,
        }
    }
}

/// Loads at one finger contact: tangential force, torque about the contact
/// normal, and the normal pressure force.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ContactState {
    pub f_t: f64,
    pub tau_n: f64,
    pub p: f64,
}

/// Outcome of the limit-surface test.
#[derive(Clone, Copy, Debug)]
pub struct SlipCheck {
    pub satisfied: bool,
    /// `mu^2 P^2 - (f_t^2 + tau_n^2 / e_n^2)`, in newtons squared.
    pub margin: f64,
}

/// Eccentricity of the contact patch under a Winkler elastic foundation:
/// `e_n = (16/15) * sqrt(P * h * sqrt(r1 * r2) / (k * pi))`, meters.
pub fn eccentricity(params: &SoftFingerParams, p: f64) -> Result<f64> {
    params.validate()?;
    if !(p > 0.0) {
        return Err(Error::SceneInvalid(format!(
            "normal force must be positive, got {p}"
        )));
    }
    let inner = p * params.h * (params.r1 * params.r2).sqrt() / (params.k * std::f64::consts::PI);
    Ok((16.0 / 15.0) * inner.sqrt())
}

/// Limit-surface membership: the contact holds iff
/// `f_t^2 + tau_n^2 / e_n^2 <= mu^2 P^2`.
pub fn soft_finger_satisfied(state: &ContactState, params: &SoftFingerParams) -> Result<SlipCheck> {
    let e_n = eccentricity(params, state.p)?;
    let load = state.f_t * state.f_t + (state.tau_n * state.tau_n) / (e_n * e_n);
    let cap = params.mu * params.mu * state.p * state.p;
    Ok(SlipCheck {
        satisfied: load <= cap,
        margin: cap - load,
    })
}

/// Largest torque the pad can still resist once `f_t` of its tangential
/// budget is spent: `tau_max = e_n * sqrt(mu^2 P^2 - f_t^2)`.
pub fn max_friction_torque(params: &SoftFingerParams, p: f64, f_t: f64) -> Result<f64> {
    let e_n = eccentricity(params, p)?;
    let budget = params.mu * p;
    if f_t > budget {
        return Err(Error::ForceBudgetExceeded { f_t, budget });
    }
    Ok(e_n * (budget * budget - f_t * f_t).sqrt())
}
