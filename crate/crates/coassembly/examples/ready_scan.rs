//! Development probe: scan candidate ready configurations for TCP placement
//! and IK coverage over the shared workspace.

use coassembly::collision::ObstacleSet;
use coassembly::grasp::{feasible_grasps, generate_candidates, ArmRig, BoardSpec, GripperModel};
use coassembly::kinematics::JointConfig;
use coassembly::scene::chain_by_name;
use coassembly::se3::Pose;

fn main() {
    let base = Pose::from_translation(0.0, 0.24, 0.40);
    let board = BoardSpec::new("medium", 0.587, 0.295, 0.010, 1.8).unwrap();

    let mut best: Vec<(usize, Vec<f64>)> = Vec::new();
    for pan in [-2.4, -1.9, -1.57, 1.57, 1.9, 2.4, 3.14] {
        for lift in [-0.6, -0.9, -1.2, -1.5] {
            for elbow in [0.9, 1.2, 1.6, 2.0] {
                for w1 in [-2.2, -1.8, -1.4, -1.0] {
                    for w2 in [-1.57, 1.57] {
                        let ready = vec![pan, lift, elbow, w1, w2, 0.0];
                        let chain = chain_by_name("ur3").unwrap().build(base).unwrap();
                        let mut chain = chain;
                        chain.ready = JointConfig(ready.clone());
                        let arm = ArmRig::new("probe", chain, GripperModel::default());
                        let fk = arm.chain.forward_kinematics(&arm.chain.ready).unwrap();
                        // Want the TCP hovering over the shared zone.
                        if fk.position.x < 0.1 || fk.position.z < 0.05 || fk.position.z > 0.55 {
                            continue;
                        }
                        let batch = generate_candidates(&board, coassembly::grasp::Owner::RobotLeft, 0.05, 0.085);
                        let mut count = 0;
                        for pose in [
                            Pose::from_translation(0.30, 0.0, 0.20),
                            Pose::from_translation(0.35, 0.15, 0.28),
                            Pose::from_translation(0.28, 0.25, 0.22),
                        ] {
                            count += feasible_grasps(&board, &pose, &batch.candidates, &arm, &ObstacleSet::new())
                                .entries
                                .len();
                        }
                        best.push((count, ready));
                    }
                }
            }
        }
    }
    best.sort_by(|a, b| b.0.cmp(&a.0));
    for (count, ready) in best.iter().take(12) {
        println!("coverage {count}: ready {ready:?}");
    }
}
