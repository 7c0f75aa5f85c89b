//! Constrained joint-space motion planning: bidirectional tree search with
//! per-sample inclination rejection, dense edge validation, shortcutting,
//! and plan re-validation.

use nalgebra::Vector3;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::time::Instant;

use crate::collision::{Obb, ObstacleSet};
use crate::contact::SoftFingerParams;
use crate::error::{Error, Result};
use crate::grasp::{grasp_tcp_pose, ArmRig, BoardSpec, GraspCandidate};
use crate::kinematics::JointConfig;
use crate::se3::Pose;
use crate::slip::relaxation_limit;

/// Maximum joint-space spacing between emitted waypoints, infinity norm.
pub const WAYPOINT_SPACING: f64 = 0.05;
/// Interpolation step for edge validation, infinity norm.
pub const EDGE_RESOLUTION: f64 = 0.02;
/// Extension step of the tree search.
const EXTEND_STEP: f64 = 0.25;
/// Slack granted on the inclination bound during re-validation.
pub const INCLINATION_SLACK: f64 = 1e-6;

/// Admissible inclination band: the angle between the gripper opening
/// direction and the gravity vector must stay within `limit` of zero.
/// Reference direction is world -z; the angle folds so that 0 means the
/// opening is parallel to gravity (safest) and pi/2 normal to it (worst).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct InclinationConstraint {
    pub limit: f64,
}

impl InclinationConstraint {
    pub fn unconstrained() -> Self {
        Self {
            limit: std::f64::consts::FRAC_PI_2,
        }
    }
}

/// Folded angle between the TCP opening axis (local y) and gravity.
pub fn inclination_of_pose(tcp: &Pose) -> f64 {
    let opening = tcp.rotation * Vector3::y();
    opening.z.abs().clamp(0.0, 1.0).acos()
}

/// Inclination at configuration `q` of `chain`.
pub fn inclination_of(chain: &crate::kinematics::SerialChain, q: &JointConfig) -> Result<f64> {
    Ok(inclination_of_pose(&chain.forward_kinematics(q)?))
}

/// Signed vertical component of the opening axis; its sign splits the
/// constraint region into disconnected components when the limit is below
/// pi/2.
fn opening_z(tcp: &Pose) -> f64 {
    (tcp.rotation * Vector3::y()).z
}

/// An object rigidly attached to the TCP for collision purposes.
#[derive(Clone, Debug)]
pub struct ObjectAttachment {
    pub half_extents: Vector3<f64>,
    /// Object pose expressed in the TCP frame.
    pub tcp_to_object: Pose,
}

impl ObjectAttachment {
    pub fn for_grasp(board: &BoardSpec, grasp: &GraspCandidate) -> Self {
        let grasp_in_board = grasp_tcp_pose(&Pose::identity(), grasp);
        Self {
            half_extents: board.half_extents(),
            tcp_to_object: grasp_in_board.inverse(),
        }
    }

    pub fn object_obb(&self, tcp: &Pose) -> Obb {
        Obb::from_pose(&tcp.compose(&self.tcp_to_object), self.half_extents)
    }
}

/// Everything a validity check needs: the arm, the constraint, obstacles,
/// and any objects rigidly attached to the TCP.
pub struct PlanContext<'a> {
    pub arm: &'a ArmRig,
    pub constraint: InclinationConstraint,
    pub obstacles: &'a ObstacleSet,
    pub attachments: &'a [ObjectAttachment],
}

impl PlanContext<'_> {
    /// Joint limits, inclination bound, and collision freedom at `q`.
    pub fn config_valid(&self, q: &JointConfig) -> bool {
        self.violation(q, 0.0).is_none()
    }

    /// First violated check at `q`, or None. `slack` widens the
    /// inclination bound for re-validation. One forward-kinematics pass
    /// serves the inclination, link, palm, and attachment checks.
    pub fn violation(&self, q: &JointConfig, slack: f64) -> Option<String> {
        if !self.arm.chain.within_limits(q) {
            return Some("joint limits".to_string());
        }
        let Ok((tcp, frames)) = self.arm.chain.fk_frames(q) else {
            return Some("dimension mismatch".to_string());
        };
        let incl = inclination_of_pose(&tcp);
        if incl > self.constraint.limit + slack {
            return Some(format!(
                "inclination {:.4} rad exceeds limit {:.4} rad",
                incl, self.constraint.limit
            ));
        }
        for link in self.arm.link_obbs_from_frames(&frames, &tcp) {
            if let Some(hit) = self.obstacles.first_hit(&link) {
                return Some(format!("arm link collides with '{hit}'"));
            }
        }
        let palm = self.arm.palm_obb(&tcp);
        if let Some(hit) = self.obstacles.first_hit(&palm) {
            return Some(format!("palm collides with '{hit}'"));
        }
        for att in self.attachments {
            let obb = att.object_obb(&tcp);
            if let Some(hit) = self.obstacles.first_hit(&obb) {
                return Some(format!("attached object collides with '{hit}'"));
            }
        }
        None
    }

    /// Dense check of the straight joint-space segment from `a` to `b`.
    fn edge_valid(&self, a: &[f64], b: &[f64], resolution: f64) -> bool {
        let dist = inf_dist(a, b);
        let steps = (dist / resolution).ceil() as usize;
        for s in 1..=steps.max(1) {
            let t = s as f64 / steps.max(1) as f64;
            let q: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + (y - x) * t).collect();
            if !self.config_valid(&JointConfig(q)) {
                return false;
            }
        }
        true
    }
}

fn inf_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// A collision-free, constraint-satisfying joint path.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MotionPlan {
    pub arm: String,
    pub waypoints: Vec<JointConfig>,
    pub constraint: InclinationConstraint,
    pub object_binding: Option<(String, GraspCandidate)>,
}

/// Tunables for one planning query.
#[derive(Clone, Copy, Debug)]
pub struct PlanParams {
    pub budget_s: f64,
    pub max_samples: usize,
    pub shortcut_attempts: usize,
    pub edge_resolution: f64,
    pub waypoint_spacing: f64,
}

impl Default for PlanParams {
    fn default() -> Self {
        Self {
            budget_s: 30.0,
            max_samples: 30_000,
            shortcut_attempts: 200,
            edge_resolution: EDGE_RESOLUTION,
            waypoint_spacing: WAYPOINT_SPACING,
        }
    }
}

struct Tree {
    nodes: Vec<Vec<f64>>,
    parents: Vec<usize>,
}

impl Tree {
    fn new(root: Vec<f64>) -> Self {
        Self {
            nodes: vec![root],
            parents: vec![usize::MAX],
        }
    }

    fn nearest(&self, q: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, n) in self.nodes.iter().enumerate() {
            let d: f64 = n.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    fn path_to_root(&self, mut idx: usize) -> Vec<Vec<f64>> {
        let mut path = Vec::new();
        while idx != usize::MAX {
            path.push(self.nodes[idx].clone());
            idx = self.parents[idx];
        }
        path
    }
}

enum Extend {
    Reached(usize),
    Advanced(usize),
    Trapped,
}

fn steer(from: &[f64], to: &[f64], step: f64) -> Vec<f64> {
    let dist = inf_dist(from, to);
    if dist <= step {
        return to.to_vec();
    }
    let t = step / dist;
    from.iter().zip(to).map(|(a, b)| a + (b - a) * t).collect()
}

fn extend(tree: &mut Tree, target: &[f64], ctx: &PlanContext, resolution: f64) -> Extend {
    let near = tree.nearest(target);
    let candidate = steer(&tree.nodes[near], target, EXTEND_STEP);
    if !ctx.edge_valid(&tree.nodes[near], &candidate, resolution) {
        return Extend::Trapped;
    }
    tree.nodes.push(candidate.clone());
    tree.parents.push(near);
    let idx = tree.nodes.len() - 1;
    if inf_dist(&candidate, target) < 1e-12 {
        Extend::Reached(idx)
    } else {
        Extend::Advanced(idx)
    }
}

fn connect(tree: &mut Tree, target: &[f64], ctx: &PlanContext, resolution: f64) -> Option<usize> {
    loop {
        match extend(tree, target, ctx, resolution) {
            Extend::Reached(i) => return Some(i),
            Extend::Advanced(_) => continue,
            Extend::Trapped => return None,
        }
    }
}

/// Bidirectional sampling-tree search between two valid configurations.
/// Every random sample must satisfy the constraint and collision checks or
/// it is discarded; accepted edges are validated densely. Deterministic
/// for a fixed seed.
pub fn plan_constrained(
    ctx: &PlanContext,
    start: &JointConfig,
    goal: &JointConfig,
    seed: u64,
    params: &PlanParams,
) -> Result<MotionPlan> {
    let dof = ctx.arm.chain.dof();
    if start.len() != dof || goal.len() != dof {
        return Err(Error::DimensionMismatch {
            chain: ctx.arm.chain.name.clone(),
            got: start.len().max(goal.len()),
            expected: dof,
        });
    }
    if let Some(reason) = ctx.violation(start, 0.0) {
        return Err(Error::InvalidEndpoint {
            reason: format!("start: {reason}"),
        });
    }
    if let Some(reason) = ctx.violation(goal, 0.0) {
        return Err(Error::InvalidEndpoint {
            reason: format!("goal: {reason}"),
        });
    }

    // Below pi/2 the constraint region splits by the sign of the opening's
    // vertical component; endpoints in different components are provably
    // unreachable.
    if ctx.constraint.limit < std::f64::consts::FRAC_PI_2 - 1e-9 {
        let zs = opening_z(&ctx.arm.chain.forward_kinematics(start)?);
        let zg = opening_z(&ctx.arm.chain.forward_kinematics(goal)?);
        if zs.signum() != zg.signum() {
            return Err(Error::PlanningFailed {
                reason: "endpoints lie in disconnected components of the inclination constraint"
                    .to_string(),
            });
        }
    }

    if inf_dist(&start.0, &goal.0) < 1e-12 {
        return Ok(finish_plan(ctx, vec![start.0.clone()], seed, params));
    }
    if ctx.edge_valid(&start.0, &goal.0, params.edge_resolution) {
        let plan = finish_plan(ctx, vec![start.0.clone(), goal.0.clone()], seed, params);
        if validate_plan(&plan, ctx, 0.01).pass {
            return Ok(plan);
        }
    }

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut tree_a = Tree::new(start.0.clone());
    let mut tree_b = Tree::new(goal.0.clone());
    let mut a_is_start = true;
    let clock = Instant::now();

    // Uniform sampling over a window spanning both endpoints with wide
    // margins, clamped to the joint limits; desk-scale queries never need
    // the full multi-turn range.
    let window: Vec<(f64, f64)> = ctx
        .arm
        .chain
        .joints
        .iter()
        .zip(start.0.iter().zip(&goal.0))
        .map(|(j, (&qs, &qg))| {
            let lo = (qs.min(qg) - 2.2).max(j.limits.0);
            let hi = (qs.max(qg) + 2.2).min(j.limits.1);
            (lo, hi)
        })
        .collect();

    let mut tried = 0usize;
    let mut valid = 0usize;
    for iteration in 0..params.max_samples {
        if clock.elapsed().as_secs_f64() > params.budget_s {
            break;
        }
        tried += 1;
        // Every few iterations, bias a sample toward the opposite root to
        // pull the trees through narrow passages.
        let sample: Vec<f64> = if iteration % 7 == 6 {
            let anchor = if a_is_start { &goal.0 } else { &start.0 };
            anchor
                .iter()
                .zip(&window)
                .map(|(&a, &(lo, hi))| (a + rng.random_range(-0.6..0.6)).clamp(lo, hi))
                .collect()
        } else {
            window
                .iter()
                .map(|&(lo, hi)| rng.random_range(lo..hi))
                .collect()
        };
        // Constraint rejection: discard samples outside the admissible
        // region before any tree work.
        if !ctx.config_valid(&JointConfig(sample.clone())) {
            continue;
        }
        valid += 1;
        if let Extend::Reached(ia) | Extend::Advanced(ia) =
            extend(&mut tree_a, &sample, ctx, params.edge_resolution)
        {
            let tip = tree_a.nodes[ia].clone();
            if let Some(ib) = connect(&mut tree_b, &tip, ctx, params.edge_resolution) {
                let mut path_a = tree_a.path_to_root(ia);
                path_a.reverse();
                let path_b = tree_b.path_to_root(ib);
                let mut joined = path_a;
                joined.extend(path_b.into_iter().skip(1));
                if !a_is_start {
                    joined.reverse();
                }
                let plan = finish_plan(ctx, joined, seed, params);
                // Enforce the postcondition by construction: a returned
                // plan must survive its own dense re-validation; otherwise
                // keep searching.
                if validate_plan(&plan, ctx, 0.01).pass {
                    return Ok(plan);
                }
                continue;
            }
        }
        std::mem::swap(&mut tree_a, &mut tree_b);
        a_is_start = !a_is_start;
    }

    Err(Error::PlanningFailed {
        reason: format!(
            "no path within {:.1} s ({} samples tried, {} valid, trees {} + {})",
            clock.elapsed().as_secs_f64(),
            tried,
            valid,
            tree_a.nodes.len(),
            tree_b.nodes.len()
        ),
    })
}

/// Shortcut with the same dense validation, then resample to the waypoint
/// spacing bound.
fn finish_plan(ctx: &PlanContext, mut path: Vec<Vec<f64>>, seed: u64, params: &PlanParams) -> MotionPlan {
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x5c0f_f1e5);
    for _ in 0..params.shortcut_attempts {
        if path.len() < 3 {
            break;
        }
        let i = rng.random_range(0..path.len() - 2);
        let j = rng.random_range(i + 2..path.len());
        if ctx.edge_valid(&path[i], &path[j], params.edge_resolution) {
            path.drain(i + 1..j);
        }
    }

    let mut waypoints: Vec<JointConfig> = Vec::new();
    waypoints.push(JointConfig(path[0].clone()));
    for pair in path.windows(2) {
        let dist = inf_dist(&pair[0], &pair[1]);
        let steps = (dist / params.waypoint_spacing).ceil().max(1.0) as usize;
        for s in 1..=steps {
            let t = s as f64 / steps as f64;
            let q: Vec<f64> = pair[0]
                .iter()
                .zip(&pair[1])
                .map(|(a, b)| a + (b - a) * t)
                .collect();
            waypoints.push(JointConfig(q));
        }
    }

    MotionPlan {
        arm: ctx.arm.id.clone(),
        waypoints,
        constraint: ctx.constraint,
        object_binding: None,
    }
}

/// Plan a board transfer under the grasp's slip-relaxation limit: solve
/// the grasp IK at both board poses, attach the board for collision, and
/// run the constrained search.
#[allow(clippy::too_many_arguments)]
pub fn plan_object_transfer(
    arm: &ArmRig,
    board: &BoardSpec,
    grasp: &GraspCandidate,
    start_pose: &Pose,
    goal_pose: &Pose,
    obstacles: &ObstacleSet,
    pad: &SoftFingerParams,
    grip_force: f64,
    seed: u64,
    params: &PlanParams,
) -> Result<MotionPlan> {
    let analysis = relaxation_limit(&grasp.geometry(board, arm.gripper.ee_length), pad, grip_force)?;
    let constraint = InclinationConstraint {
        limit: analysis.relaxation_limit,
    };

    let tcp_start = grasp_tcp_pose(start_pose, grasp);
    let tcp_goal = grasp_tcp_pose(goal_pose, grasp);
    let q_start = arm.solve_ik(&tcp_start).map_err(|e| Error::InvalidEndpoint {
        reason: format!("start grasp unreachable: {e}"),
    })?;
    let q_goal = arm
        .chain
        .inverse_kinematics(&tcp_goal, &q_start)
        .or_else(|_| arm.solve_ik(&tcp_goal))
        .map_err(|e| Error::InvalidEndpoint {
            reason: format!("goal grasp unreachable: {e}"),
        })?;

    let attachments = [ObjectAttachment::for_grasp(board, grasp)];
    let ctx = PlanContext {
        arm,
        constraint,
        obstacles,
        attachments: &attachments,
    };
    let mut plan = plan_constrained(&ctx, &q_start, &q_goal, seed, params)?;
    plan.object_binding = Some((board.id.clone(), grasp.clone()));
    Ok(plan)
}

/// One validation finding.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub detail: Option<String>,
}

/// Re-validation report for a plan.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pass: bool,
    pub checks: Vec<CheckOutcome>,
    /// Path parameter (waypoint index fraction) of the first violation.
    pub first_violation_at: Option<f64>,
}

/// Re-check every dense interpolant of a plan for joint limits, the
/// inclination bound (with 1e-6 rad slack), collision freedom, and the
/// waypoint spacing invariant.
pub fn validate_plan(
    plan: &MotionPlan,
    ctx: &PlanContext,
    resolution: f64,
) -> ValidationReport {
    let mut checks = Vec::new();
    let mut first_violation_at = None;

    let spacing_ok = plan
        .waypoints
        .windows(2)
        .all(|w| inf_dist(&w[0].0, &w[1].0) <= WAYPOINT_SPACING + 1e-9);
    checks.push(CheckOutcome {
        name: "waypoint-spacing".into(),
        pass: spacing_ok,
        detail: None,
    });

    let mut limits_ok = true;
    let mut incl_ok = true;
    let mut collision_ok = true;
    let mut detail: Option<String> = None;

    let mut probe = |q: &JointConfig, at: f64| {
        if let Some(reason) = ctx.violation(q, INCLINATION_SLACK) {
            if reason.contains("limits") {
                limits_ok = false;
            } else if reason.contains("inclination") {
                incl_ok = false;
            } else {
                collision_ok = false;
            }
            if first_violation_at.is_none() {
                first_violation_at = Some(at);
                detail = Some(reason);
            }
        }
    };

    if plan.waypoints.len() == 1 {
        probe(&plan.waypoints[0], 0.0);
    }
    for (i, pair) in plan.waypoints.windows(2).enumerate() {
        let dist = inf_dist(&pair[0].0, &pair[1].0);
        let steps = ((dist / resolution).ceil() as usize).max(1);
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            let q: Vec<f64> = pair[0]
                .0
                .iter()
                .zip(&pair[1].0)
                .map(|(a, b)| a + (b - a) * t)
                .collect();
            probe(&JointConfig(q), i as f64 + t);
        }
    }

    checks.push(CheckOutcome {
        name: "joint-limits".into(),
        pass: limits_ok,
        detail: None,
    });
    checks.push(CheckOutcome {
        name: "inclination".into(),
        pass: incl_ok,
        detail: detail.clone().filter(|d| d.contains("inclination")),
    });
    checks.push(CheckOutcome {
        name: "collision".into(),
        pass: collision_ok,
        detail: detail.filter(|d| d.contains("collides")),
    });

    ValidationReport {
        pass: spacing_ok && limits_ok && incl_ok && collision_ok,
        checks,
        first_violation_at,
    }
}
