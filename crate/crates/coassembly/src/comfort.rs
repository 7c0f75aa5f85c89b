//! Human comfort scoring of grasps, goal-pose sampling around the assembly
//! target, and comfort-ranked candidate lists.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::collision::PlacedMesh;
use crate::error::{Error, Result};
use crate::grasp::{
    check_human_grasp_stability, generate_candidates, grasp_tcp_pose, BoardSpec, GraspCandidate,
};
use crate::kinematics::{singular_values, JointConfig, SerialChain};
use crate::scene::HumanModel;
use crate::se3::{sample_pose_near_with, Pose};

/// Rotation bound on sampled goal poses, radians (45 degrees).
pub const GOAL_ROT_BOUND: f64 = std::f64::consts::FRAC_PI_4;
/// Translation bound on sampled goal poses, meters.
pub const GOAL_TRANS_BOUND: f64 = 0.5;

/// Inverse condition number of a Jacobian: smallest over largest singular
/// value, in [0, 1], zero when rank-deficient. Dimensionless, so it is
/// invariant to uniform scaling of the matrix.
pub fn inverse_condition_number(j: &DMatrix<f64>) -> f64 {
    let sv = singular_values(j).singular_values;
    let (Some(&max), Some(&min)) = (sv.first(), sv.last()) else {
        return 0.0;
    };
    if !(max > 0.0) || !max.is_finite() {
        return 0.0;
    }
    (min / max).clamp(0.0, 1.0)
}

/// Comfort of holding a grasp at configuration `q`: the inverse condition
/// number of the arm Jacobian there.
pub fn comfort_score(arm: &SerialChain, q: &JointConfig) -> Result<f64> {
    Ok(inverse_condition_number(&arm.jacobian(q)?))
}

/// A scored human grasp.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComfortScore {
    pub value: f64,
    pub grasp: GraspCandidate,
    pub config: JointConfig,
}

/// A goal pose with its best grasp score and the full per-grasp breakdown.
#[derive(Clone, Debug)]
pub struct GoalPoseCandidate {
    pub pose: Pose,
    pub best: ComfortScore,
    pub all: Vec<ComfortScore>,
}

/// Accepted samples plus the number of rejected attempts, which grows as
/// the finished assembly crowds the sampling ball.
#[derive(Clone, Debug)]
pub struct SampledPoses {
    pub poses: Vec<Pose>,
    pub rejected: usize,
}

/// Rejection-sample `n` poses near the assembly goal: within
/// [`GOAL_ROT_BOUND`] of its rotation, within [`GOAL_TRANS_BOUND`] of its
/// position, and clear of every finished-assembly mesh. Each accepted
/// sample gets a `10 * n` attempt budget.
pub fn sample_goal_poses(
    board: &BoardSpec,
    assembly_goal: &Pose,
    finished: &[PlacedMesh],
    n: usize,
    seed: u64,
) -> Result<SampledPoses> {
    assert!(n > 0, "sample count must be positive");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let budget = 10 * n;
    let mut poses = Vec::with_capacity(n);
    let mut rejected = 0;
    while poses.len() < n {
        let mut accepted = None;
        for _ in 0..budget {
            let pose = sample_pose_near_with(assembly_goal, GOAL_ROT_BOUND, GOAL_TRANS_BOUND, &mut rng);
            let probe = board.obb_at(&pose);
            if finished.iter().any(|m| m.obb().intersects(&probe)) {
                rejected += 1;
                continue;
            }
            accepted = Some(pose);
            break;
        }
        match accepted {
            Some(pose) => poses.push(pose),
            None => {
                return Err(Error::SamplingExhausted {
                    attempts: budget,
                    accepted: poses.len(),
                })
            }
        }
    }
    Ok(SampledPoses { poses, rejected })
}

/// Score every IK-feasible, slip-stable human grasp of `board` at `pose`,
/// over both arms.
pub fn score_human_grasps(board: &BoardSpec, pose: &Pose, human: &HumanModel) -> Vec<ComfortScore> {
    let mut scores = Vec::new();
    for (arm, owner) in human.arms() {
        let batch = generate_candidates(board, owner, human.grasp_spacing, arm.gripper.max_opening);
        for cand in &batch.candidates {
            let tcp = grasp_tcp_pose(pose, cand);
            let Ok(config) = arm.solve_ik(&tcp) else {
                continue;
            };
            let stable = check_human_grasp_stability(cand, board, pose, &human.pad, human.grip_force)
                .unwrap_or(false);
            if !stable {
                continue;
            }
            let Ok(value) = comfort_score(&arm.chain, &config) else {
                continue;
            };
            scores.push(ComfortScore {
                value,
                grasp: cand.clone(),
                config,
            });
        }
    }
    scores
}

/// Rank goal poses by the comfort of their best feasible grasp, dropping
/// poses with none. Stable descending sort, so equal scores keep their
/// input order.
pub fn rank_goal_poses(
    board: &BoardSpec,
    poses: &[Pose],
    human: &HumanModel,
) -> Vec<GoalPoseCandidate> {
    let mut out: Vec<GoalPoseCandidate> = Vec::new();
    for pose in poses {
        let all = score_human_grasps(board, pose, human);
        let Some(best_idx) = all
            .iter()
            .enumerate()
            .max_by(|(ia, a), (ib, b)| {
                a.value
                    .partial_cmp(&b.value)
                    .unwrap()
                    .then(ib.cmp(ia))
            })
            .map(|(i, _)| i)
        else {
            continue;
        };
        out.push(GoalPoseCandidate {
            pose: *pose,
            best: all[best_idx].clone(),
            all,
        });
    }
    out.sort_by(|a, b| b.best.value.partial_cmp(&a.best.value).unwrap());
    out
}
