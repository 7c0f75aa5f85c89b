//! Development probe: walk the handover pipeline stage by stage for one
//! board of the bundled cabinet and report set sizes and failure causes.

use coassembly::comfort::{sample_goal_poses, score_human_grasps};
use coassembly::grasp::{feasible_grasps, generate_candidates};
use coassembly::handover::{
    filter_comfortable, intersect_shared, rank_rr_handover_poses, receiving_sets,
    select_handover_pose,
};
use coassembly::planner::{inclination_of_pose, plan_object_transfer};
use coassembly::scene::SceneModel;
use coassembly::slip::relaxation_limit;

fn main() {
    let scene = SceneModel::bundled_cabinet();
    let board_id = std::env::args().nth(1).unwrap_or_else(|| "base".into());
    let seq_pos = scene
        .sequence
        .iter()
        .position(|&i| scene.boards[i].spec.id == board_id)
        .unwrap();
    let finished: Vec<_> = scene.sequence[..seq_pos]
        .iter()
        .map(|&i| scene.boards[i].placed_at_assembly())
        .collect();
    let instance = &scene.boards[scene.sequence[seq_pos]];
    let board = &instance.spec;
    let obstacles = scene.obstacles_for(seq_pos, &finished);

    println!("board '{board_id}' assembly pose: p = {:?}", instance.assembly.position);
    println!(
        "assembly inclination of thickness axis: {:.1} deg",
        {
            let n = instance.assembly.rotation * nalgebra::Vector3::z();
            n.z.abs().clamp(0.0, 1.0).acos().to_degrees()
        }
    );

    let rr_list = match rank_rr_handover_poses(&scene, board, &instance.initial, &obstacles) {
        Ok(rr) => rr,
        Err(e) => {
            println!("rr selection failed: {e}");
            return;
        }
    };
    println!("rr candidates: {}", rr_list.len());
    let rr = &rr_list[0];
    println!(
        "best rr pose p = {:?}, receiving grasps = {}",
        rr.pose.position,
        rr.receiving_set.entries.len()
    );

    let sampled = sample_goal_poses(board, &instance.assembly, &finished, scene.planning.rh_samples, 7).unwrap();
    println!("sampled {} poses ({} rejected)", sampled.poses.len(), sampled.rejected);

    // Distribution of best human scores.
    let mut best: Vec<f64> = Vec::new();
    let mut feasible_any = 0;
    for pose in &sampled.poses {
        let scores = score_human_grasps(board, pose, &scene.human);
        if !scores.is_empty() {
            feasible_any += 1;
            best.push(scores.iter().map(|s| s.value).fold(0.0, f64::max));
        }
    }
    best.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!(
        "human-feasible poses: {feasible_any}/{} best-score range {:?} .. {:?}",
        sampled.poses.len(),
        best.first(),
        best.last()
    );

    let s = filter_comfortable(&sampled.poses, board, &scene, scene.planning.comfort_threshold);
    println!("|S| = {} at threshold {}", s.len(), scene.planning.comfort_threshold);

    let mut move_obstacles = obstacles.clone();
    if let Ok(links) = scene.suction.rig.link_obbs(&scene.suction.park) {
        for (i, l) in links.into_iter().enumerate() {
            move_obstacles.push(format!("parked-suction-{i}"), l);
        }
    }
    // Robot feasibility of the S poses on their own.
    let batch = generate_candidates(
        board,
        scene.receiver.owner,
        scene.planning.robot_grasp_spacing,
        scene.receiver.rig.gripper.max_opening,
    );
    let mut robot_ok = 0;
    for (pose, _) in &s {
        let set = feasible_grasps(board, pose, &batch.candidates, &scene.receiver.rig, &move_obstacles);
        if !set.entries.is_empty() {
            robot_ok += 1;
        }
    }
    println!("poses in S with any receiving grasp: {robot_ok}/{}", s.len());

    let sets = receiving_sets(&s, board, &scene, &move_obstacles);
    for (k, rr) in rr_list.iter().take(12).enumerate() {
        let shared = intersect_shared(&sets, &rr.receiving_set);
        println!(
            "rr[{k}] p = [{:.2} {:.2} {:.2}] yaw-ish count {}: |shared| = {}",
            rr.pose.position.x,
            rr.pose.position.y,
            rr.pose.position.z,
            rr.receiving_set.entries.len(),
            shared.len()
        );
        if shared.is_empty() {
            continue;
        }
        let ordered = select_handover_pose(&shared, &instance.assembly, scene.planning.w_rot).unwrap();
        for (i, cand) in ordered.iter().take(6).enumerate() {
            let incl = inclination_of_pose(&coassembly::grasp::grasp_tcp_pose(
                &cand.pose,
                &cand.shared[0],
            ));
            print!(
                "  cand[{i}] Q={:.3} p=[{:.2} {:.2} {:.2}] incl {:.0} deg grasps {}: ",
                cand.quality,
                cand.pose.position.x,
                cand.pose.position.y,
                cand.pose.position.z,
                incl.to_degrees(),
                cand.shared.len()
            );
            // best-limit grasp
            let mut grasps: Vec<_> = cand
                .shared_entries
                .iter()
                .map(|(e, _)| {
                    let a = relaxation_limit(
                        &e.candidate.geometry(board, scene.receiver.rig.gripper.ee_length),
                        &scene.receiver.pad,
                        scene.receiver.grip_force,
                    )
                    .unwrap();
                    (e, a.relaxation_limit)
                })
                .collect();
            grasps.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
            let (entry, limit) = &grasps[0];
            match plan_object_transfer(
                &scene.receiver.rig,
                board,
                &entry.candidate,
                &rr.pose,
                &cand.pose,
                &move_obstacles,
                &scene.receiver.pad,
                scene.receiver.grip_force,
                1234,
                &scene.planning.plan_params(),
            ) {
                Ok(plan) => println!("OK limit {:.0} deg, {} waypoints", limit.to_degrees(), plan.waypoints.len()),
                Err(e) => println!("limit {:.0} deg FAIL: {e}", limit.to_degrees()),
            }
        }
        break;
    }
}
