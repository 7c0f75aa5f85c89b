//! In-hand rotational slip: gravity torque on a grasped object, critical
//! inclination, and the constraint-relaxation limit consumed by the motion
//! planner.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::contact::{max_friction_torque, SoftFingerParams};
use crate::error::Result;

pub const GRAVITY: f64 = 9.81;

/// Scan resolution for the inclination sweep, one degree.
const SCAN_STEP: f64 = std::f64::consts::PI / 180.0;
/// Bisection convergence width, radians.
const BISECT_TOL: f64 = 1e-4;

/// Geometry of one grasp for slip purposes. `com_offset` is the distance
/// from the grasp contact to the object's center of mass;
/// `inertia_about_contact` is the moment of inertia about the in-hand
/// rotation axis through the contact.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GraspGeometry {
    pub ee_length: f64,
    pub com_offset: f64,
    pub mass: f64,
    pub inertia_about_contact: f64,
}

/// Result of the relaxation sweep for one (object, grasp, gripper) triple.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SlipAnalysis {
    /// Critical inclination, radians.
    pub theta_c: f64,
    /// Admissible inclination band half-width for the planner, radians.
    pub relaxation_limit: f64,
    /// Gravity torque sampled at one-degree steps over [0, 90] degrees,
    /// as (inclination radians, torque newton-meters) pairs.
    pub torque_curve: Vec<(f64, f64)>,
    /// Two-finger friction torque budget at zero inclination, newton-meters.
    pub friction_budget: f64,
}

/// Torque of the object's weight about the contact normal at end-effector
/// inclination `theta` and in-hand slip angle `phi`:
///
/// `T_g = (mg/2) sin(theta) sin(phi) (d sin(phi))
///      + (mg/2) sin(theta) cos(phi) (L + d cos(phi))`
///
/// with `d` the contact-to-CoM distance and `L` the end-effector length.
pub fn gravity_torque(g: &GraspGeometry, theta: f64, phi: f64) -> f64 {
    let half_weight = g.mass * GRAVITY / 2.0;
    let (s_t, s_p, c_p) = (theta.sin(), phi.sin(), phi.cos());
    half_weight * s_t * s_p * (g.com_offset * s_p)
        + half_weight * s_t * c_p * (g.ee_length + g.com_offset * c_p)
}

/// Angular acceleration once gravity torque beats the two-finger friction
/// budget. Clamped at zero: static friction is reactive and never spins
/// the object backwards.
pub fn slip_acceleration(g: &GraspGeometry, t_g: f64, friction_budget: f64) -> f64 {
    ((t_g - friction_budget) / g.inertia_about_contact).max(0.0)
}

/// Piecewise in-hand slip angle: zero below the critical inclination, the
/// caller-supplied resting angle above it. The boundary itself is assigned
/// to the no-slip branch.
pub fn slip_angle(theta: f64, theta_c: f64, phi_rest: f64) -> f64 {
    if theta > theta_c {
        phi_rest
    } else {
        0.0
    }
}

/// Smallest inclination at which gravity torque exceeds a constant
/// friction budget, or pi/2 when it never does. One-degree scan refined by
/// bisection to 1e-4 rad.
pub fn critical_inclination(g: &GraspGeometry, friction_budget: f64) -> f64 {
    let exceeds = |theta: f64| gravity_torque(g, theta, 0.0) > friction_budget;
    scan_then_bisect(&exceeds)
}

fn scan_then_bisect(exceeds: &dyn Fn(f64) -> bool) -> f64 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut prev = 0.0;
    let mut crossing = None;
    for step in 0..=90 {
        let theta = (step as f64 * SCAN_STEP).min(half_pi);
        if exceeds(theta) {
            crossing = Some((prev, theta));
            break;
        }
        prev = theta;
    }
    let (mut lo, mut hi) = match crossing {
        Some(bracket) => bracket,
        None => return half_pi,
    };
    while hi - lo > BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        if exceeds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Sweep the inclination range and determine the admissible band.
///
/// At each inclination the two-finger friction torque budget is evaluated
/// with the tangential load set to the in-plane gravity component shared
/// evenly by the two fingers, `f_t = m g sin(theta) / 2`. The limit is the
/// first inclination at which gravity torque beats the budget. A
/// `ForceBudgetExceeded` from the pad model propagates only when the
/// weight alone defeats the tangential budget before any torque crossing:
/// the object falls rather than rotating.
pub fn relaxation_limit(
    g: &GraspGeometry,
    params: &SoftFingerParams,
    grip_force: f64,
) -> Result<SlipAnalysis> {
    params.validate()?;
    let half_pi = std::f64::consts::FRAC_PI_2;

    let budget_at = |theta: f64| -> Result<f64> {
        let f_t = g.mass * GRAVITY * theta.sin() / 2.0;
        Ok(2.0 * max_friction_torque(params, grip_force, f_t)?)
    };

    let torque_curve: Vec<(f64, f64)> = (0..=90)
        .map(|step| {
            let theta = (step as f64 * SCAN_STEP).min(half_pi);
            (theta, gravity_torque(g, theta, 0.0))
        })
        .collect();

    // Scan for the first crossing; a budget failure without a prior torque
    // crossing is a pure force failure.
    let mut prev = 0.0;
    let mut crossing: Option<(f64, f64)> = None;
    for step in 0..=90 {
        let theta = (step as f64 * SCAN_STEP).min(half_pi);
        match budget_at(theta) {
            Ok(budget) => {
                if gravity_torque(g, theta, 0.0) > budget {
                    crossing = Some((prev, theta));
                    break;
                }
            }
            Err(e) => {
                if gravity_torque(g, theta, 0.0) > 0.0 {
                    // Torque crosses in the same bracket where the force
                    // budget dies; the bisection below resolves it.
                    crossing = Some((prev, theta));
                    break;
                }
                return Err(e);
            }
        }
        prev = theta;
    }

    let limit = match crossing {
        None => half_pi,
        Some((mut lo, mut hi)) => {
            // Torque minus budget grows monotonically in theta; treat a
            // dead budget as crossed.
            let exceeds = |theta: f64| match budget_at(theta) {
                Ok(budget) => gravity_torque(g, theta, 0.0) > budget,
                Err(_) => true,
            };
            while hi - lo > BISECT_TOL {
                let mid = 0.5 * (lo + hi);
                if exceeds(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        }
    };

    Ok(SlipAnalysis {
        theta_c: limit,
        relaxation_limit: limit,
        torque_curve,
        friction_budget: budget_at(0.0)?,
    })
}

/// Shared, race-free memo of slip analyses keyed per (board, grasp).
#[derive(Default)]
pub struct SlipCache {
    entries: Mutex<HashMap<(String, usize), Arc<SlipAnalysis>>>,
}

impl SlipCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_compute<F>(&self, board: &str, grasp_index: usize, compute: F) -> Result<Arc<SlipAnalysis>>
    where
        F: FnOnce() -> Result<SlipAnalysis>,
    {
        let key = (board.to_string(), grasp_index);
        if let Some(found) = self.entries.lock().unwrap().get(&key) {
            return Ok(found.clone());
        }
        let fresh = Arc::new(compute()?);
        self.entries
            .lock()
            .unwrap()
            .entry(key)
            .or_insert_with(|| fresh.clone());
        Ok(fresh)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use std::f64::consts::FRAC_PI_2;

    fn medium_longitudinal() -> GraspGeometry {
        // 1.8 kg board grasped at the end of its 0.587 m axis.
        GraspGeometry {
            ee_length: 0.20,
            com_offset: 0.2935,
            mass: 1.8,
            inertia_about_contact: 0.2,
        }
    }

    #[test]
    fn no_inclination_means_no_torque() {
        let g = medium_longitudinal();
        for phi in [0.0, 0.4, 1.0, 3.0] {
            assert_eq!(gravity_torque(&g, 0.0, phi), 0.0);
        }
    }

    #[test]
    fn hanging_torque_matches_hand_arithmetic() {
        let g = medium_longitudinal();
        // Independent evaluation at theta = 90 deg, phi = 0:
        // (1.8 * 9.81 / 2) * (0.20 + 0.2935).
        let expected = (1.8 * 9.81 / 2.0) * (0.20 + 0.2935);
        let got = gravity_torque(&g, FRAC_PI_2, 0.0);
        assert!((got - expected).abs() < 1e-12, "got {got}, want {expected}");
    }

    #[test]
    fn torque_factors_through_sine_at_zero_phi() {
        let g = medium_longitudinal();
        let at_90 = gravity_torque(&g, FRAC_PI_2, 0.0);
        let at_30 = gravity_torque(&g, 30f64.to_radians(), 0.0);
        assert!((at_30 - 0.5 * at_90).abs() < 1e-12);
    }

    #[test]
    fn torque_strictly_increases_with_inclination() {
        let g = medium_longitudinal();
        let mut prev = 0.0;
        for deg in 1..=90 {
            let t = gravity_torque(&g, (deg as f64).to_radians(), 0.0);
            assert!(t > prev, "torque not increasing at {deg} deg");
            prev = t;
        }
    }

    #[test]
    fn slip_acceleration_balance_and_clamp() {
        let g = GraspGeometry {
            ee_length: 0.1,
            com_offset: 0.1,
            mass: 1.0,
            inertia_about_contact: 0.05,
        };
        assert_eq!(slip_acceleration(&g, 2.0, 2.0), 0.0);
        assert_eq!(slip_acceleration(&g, 1.0, 2.0), 0.0, "friction is reactive");
        assert!((slip_acceleration(&g, 4.0, 2.0) - 40.0).abs() < 1e-12);
    }

    #[test]
    fn slip_angle_piecewise_branches() {
        let theta_c = 0.6;
        assert_eq!(slip_angle(0.3, theta_c, 0.4), 0.0);
        assert_eq!(slip_angle(0.9, theta_c, 0.4), 0.4);
        assert_eq!(slip_angle(theta_c, theta_c, 0.4), 0.0, "boundary is no-slip");
    }

    #[test]
    fn critical_inclination_extremes() {
        let g = medium_longitudinal();
        let max_torque = gravity_torque(&g, FRAC_PI_2, 0.0);
        assert_eq!(critical_inclination(&g, max_torque * 1.01), FRAC_PI_2);
        assert!(critical_inclination(&g, 0.0) < 1e-4, "zero budget slips at once");
    }

    #[test]
    fn critical_inclination_inverts_the_sine() {
        // Budget at half the hanging torque: since T ~ sin(theta), the
        // crossing is at arcsin(0.5) = 30 degrees.
        let g = medium_longitudinal();
        let budget = gravity_torque(&g, FRAC_PI_2, 0.0) / 2.0;
        let theta_c = critical_inclination(&g, budget);
        assert!(
            (theta_c - 30f64.to_radians()).abs() < 2e-4,
            "got {} deg",
            theta_c.to_degrees()
        );
    }

    #[test]
    fn critical_inclination_brackets_the_budget() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        for _ in 0..100 {
            let g = GraspGeometry {
                ee_length: rng.random_range(0.05..0.4),
                com_offset: rng.random_range(0.0..0.5),
                mass: rng.random_range(0.1..5.0),
                inertia_about_contact: 0.1,
            };
            let budget = rng.random_range(0.0..gravity_torque(&g, FRAC_PI_2, 0.0));
            let theta_c = critical_inclination(&g, budget);
            if theta_c > 1e-3 && theta_c < FRAC_PI_2 - 1e-3 {
                assert!(gravity_torque(&g, theta_c - 1e-3, 0.0) <= budget);
                assert!(gravity_torque(&g, theta_c + 1e-3, 0.0) > budget);
            }
        }
    }

    #[test]
    fn scan_and_bisection_agree_with_brute_force() {
        // Brute-force equivalence: the refined crossing lies within one
        // degree of the coarse scan's answer.
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        for _ in 0..100 {
            let g = GraspGeometry {
                ee_length: rng.random_range(0.05..0.4),
                com_offset: rng.random_range(0.0..0.5),
                mass: rng.random_range(0.1..5.0),
                inertia_about_contact: 0.1,
            };
            let budget = rng.random_range(0.0..1.2 * gravity_torque(&g, FRAC_PI_2, 0.0));
            let refined = critical_inclination(&g, budget);
            let coarse = (0..=90)
                .map(|d| (d as f64).to_radians().min(FRAC_PI_2))
                .find(|&t| gravity_torque(&g, t, 0.0) > budget)
                .unwrap_or(FRAC_PI_2);
            assert!(
                (refined - coarse).abs() <= 1f64.to_radians() + 1e-9,
                "refined {refined} vs coarse {coarse}"
            );
        }
    }

    fn pad() -> SoftFingerParams {
        SoftFingerParams::default()
    }

    /// Grip force in the band where the default pad holds the light board
    /// everywhere but the heavier ones only part of the range.
    const TEST_GRIP: f64 = 4500.0;

    #[test]
    fn light_board_is_unconstrained() {
        // 0.22 kg board: friction dominates over the whole sweep.
        let g = GraspGeometry {
            ee_length: 0.24,
            com_offset: 0.1985,
            mass: 0.22,
            inertia_about_contact: 0.01,
        };
        let a = relaxation_limit(&g, &pad(), TEST_GRIP).unwrap();
        assert_eq!(a.relaxation_limit, FRAC_PI_2);
        assert_eq!(a.theta_c, FRAC_PI_2);
        assert_eq!(a.torque_curve.len(), 91);
    }

    #[test]
    fn transverse_grasp_relaxes_more_than_longitudinal() {
        // Same 1.8 kg board, contact at the rim of the short axis vs the
        // long axis: the shorter lever leaves a wider admissible band.
        let transverse = GraspGeometry {
            ee_length: 0.24,
            com_offset: 0.1475,
            mass: 1.8,
            inertia_about_contact: 0.1,
        };
        let longitudinal = GraspGeometry {
            ee_length: 0.24,
            com_offset: 0.2935,
            mass: 1.8,
            inertia_about_contact: 0.1,
        };
        let t = relaxation_limit(&transverse, &pad(), TEST_GRIP).unwrap();
        let l = relaxation_limit(&longitudinal, &pad(), TEST_GRIP).unwrap();
        assert!(
            t.relaxation_limit > l.relaxation_limit,
            "transverse {} <= longitudinal {}",
            t.relaxation_limit.to_degrees(),
            l.relaxation_limit.to_degrees()
        );
        assert!(t.relaxation_limit < FRAC_PI_2);
    }

    #[test]
    fn zero_mass_object_is_unconstrained() {
        let g = GraspGeometry {
            ee_length: 0.24,
            com_offset: 0.3,
            mass: 0.0,
            inertia_about_contact: 1.0,
        };
        let a = relaxation_limit(&g, &pad(), 40.0).unwrap();
        assert_eq!(a.relaxation_limit, FRAC_PI_2);
    }

    #[test]
    fn relaxation_tightens_with_mass_and_lever() {
        // 5x5 grid: heavier or longer never widens the band.
        let masses = [0.5, 1.0, 1.5, 2.0, 2.5];
        let offsets = [0.05, 0.1, 0.2, 0.3, 0.4];
        let mut by_mass: Vec<Vec<f64>> = Vec::new();
        for &m in &masses {
            let mut row = Vec::new();
            for &d in &offsets {
                let g = GraspGeometry {
                    ee_length: 0.24,
                    com_offset: d,
                    mass: m,
                    inertia_about_contact: 0.1,
                };
                row.push(relaxation_limit(&g, &pad(), TEST_GRIP).unwrap().relaxation_limit);
            }
            by_mass.push(row);
        }
        for row in &by_mass {
            for pair in row.windows(2) {
                assert!(pair[1] <= pair[0] + 1e-12, "longer lever widened the band");
            }
        }
        for col in 0..offsets.len() {
            for pair in by_mass.windows(2) {
                assert!(
                    pair[1][col] <= pair[0][col] + 1e-12,
                    "heavier object widened the band"
                );
            }
        }
    }

    #[test]
    fn pure_force_failure_reports_fall() {
        // Zero lever: no gravity torque ever, but the weight alone defeats
        // the tangential budget partway through the sweep.
        let g = GraspGeometry {
            ee_length: 0.0,
            com_offset: 0.0,
            mass: 20.0,
            inertia_about_contact: 0.5,
        };
        match relaxation_limit(&g, &pad(), 60.0) {
            Err(Error::ForceBudgetExceeded { .. }) => {}
            other => panic!("expected ForceBudgetExceeded, got {other:?}"),
        }
    }

    #[test]
    fn torque_curve_is_monotone_at_rest_angle() {
        let g = medium_longitudinal();
        let a = relaxation_limit(&g, &pad(), TEST_GRIP).unwrap();
        for pair in a.torque_curve.windows(2) {
            assert!(pair[1].1 >= pair[0].1);
        }
    }

    #[test]
    fn cache_returns_shared_analysis() {
        let cache = SlipCache::new();
        let g = medium_longitudinal();
        let first = cache
            .get_or_compute("medium", 3, || relaxation_limit(&g, &pad(), TEST_GRIP))
            .unwrap();
        let second = cache
            .get_or_compute("medium", 3, || panic!("must hit the cache"))
            .unwrap();
        assert!(Arc::ptr_eq(&first, &second));
    }
}
