//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("joint vector has {got} entries but chain '{chain}' has {expected} joints")]
    DimensionMismatch {
        chain: String,
        got: usize,
        expected: usize,
    },

    #[error("inverse kinematics did not converge within the iteration budget")]
    Unreachable,

    #[error("inverse kinematics converged outside joint limits (joint {joint}, value {value:.4} rad)")]
    OutOfLimits { joint: usize, value: f64 },

    #[error("tangential load {f_t:.3} N exceeds the friction force budget {budget:.3} N")]
    ForceBudgetExceeded { f_t: f64, budget: f64 },

    #[error("pose sampling exhausted its attempt budget ({attempts} attempts for sample {accepted})")]
    SamplingExhausted { attempts: usize, accepted: usize },

    #[error("no pose in the search grid admits both a suction reach and a receiving grasp")]
    NoBimanualPose,

    #[error("no handover pose candidate survived the comfort and shared-grasp filters")]
    NoHandoverPose,

    #[error("planning endpoint invalid: {reason}")]
    InvalidEndpoint { reason: String },

    #[error("constrained planning failed: {reason}")]
    PlanningFailed { reason: String },

    #[error("grasp sets do not match: {reason}")]
    GraspSetMismatch { reason: String },

    #[error("quaternion '{field}' has norm {norm:.8}, more than 1e-6 away from 1")]
    QuaternionNotNormalized { field: String, norm: f64 },

    #[error("scene file invalid: {0}")]
    SceneInvalid(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
