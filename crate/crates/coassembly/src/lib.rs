//! Manipulation planning toolkit for human-robot collaborative assembly.
//!
//! A dual-arm robot picks thin boards with a suction tool, transfers them
//! to a parallel gripper, and carries each one to a handover pose chosen
//! for the human collaborator's comfort, all under a slip-awareness
//! constraint on the gripper's inclination. The pieces:
//!
//! - [`se3`]: rigid transforms, rotation distances, constrained pose
//!   sampling.
//! - [`kinematics`]: serial chains, Jacobians, damped-least-squares IK.
//! - [`contact`]: the soft-finger limit surface and Winkler eccentricity.
//! - [`slip`]: gravity torque on a grasped board, critical inclination,
//!   and the planner's constraint-relaxation limit.
//! - [`grasp`]: pinch-grasp candidates on boards, feasibility, shared
//!   grasps, human grasp stability.
//! - [`comfort`]: comfort scoring and goal-pose sampling / ranking.
//! - [`handover`]: robot-robot and robot-human handover selection and the
//!   per-board four-step pipeline.
//! - [`planner`]: constrained bidirectional tree search and plan
//!   validation.
//! - [`scene`] / [`trace`] / [`cli`]: scene files, the multi-board
//!   assembly driver, trace emission and re-validation, and the command
//!   line.
//!
//! Runnable walkthroughs of each capability live in `examples/`.

pub mod cli;
pub mod collision;
pub mod comfort;
pub mod contact;
pub mod error;
pub mod grasp;
pub mod handover;
pub mod kinematics;
pub mod planner;
pub mod scene;
pub mod se3;
pub mod slip;
pub mod trace;

pub use error::{Error, Result};
pub use se3::Pose;
