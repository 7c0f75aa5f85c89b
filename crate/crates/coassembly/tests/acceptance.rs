//! Acceptance suite: one test per acceptance criterion, each printing a
//! pass/fail line (run with `--nocapture` to see them).

use coassembly::collision::{ObstacleSet, PlacedMesh, TriMesh};
use coassembly::comfort::{
    inverse_condition_number, sample_goal_poses, score_human_grasps, GOAL_ROT_BOUND,
    GOAL_TRANS_BOUND,
};
use coassembly::contact::{eccentricity, max_friction_torque, soft_finger_satisfied, ContactState, SoftFingerParams};
use coassembly::grasp::{
    canonical_rim_grasp, feasible_grasps, generate_candidates, shared_grasps, shared_pairs,
    ArmRig, AxisTag, BoardSpec, GraspCandidate, Owner,
};
use coassembly::handover::{
    filter_comfortable, filter_shared, handover_quality, select_handover_pose,
    select_rr_handover_pose,
};
use coassembly::kinematics::{JointConfig, SerialChain};
use coassembly::planner::{
    inclination_of_pose, plan_constrained, validate_plan, InclinationConstraint, ObjectAttachment,
    PlanContext, PlanParams,
};
use coassembly::scene::{bench_scene, chain_by_name, human_by_name, RrGrid, SceneModel};
use coassembly::se3::{sample_pose_near, Pose};
use coassembly::slip::{gravity_torque, relaxation_limit, GraspGeometry, GRAVITY};
use nalgebra::{DMatrix, UnitQuaternion, Vector3};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::f64::consts::{FRAC_PI_2, PI};

fn boards() -> (BoardSpec, BoardSpec, BoardSpec) {
    let scene = SceneModel::bundled_cabinet();
    let find = |mass: f64| {
        scene
            .boards
            .iter()
            .find(|b| (b.spec.mass - mass).abs() < 1e-9)
            .map(|b| b.spec.clone())
            .expect("board type present")
    };
    (find(0.22), find(1.8), find(2.5))
}

// ---------------------------------------------------------------------------
// 1. Gravity-torque correctness.

#[test]
fn criterion_01_gravity_torque() {
    let t0 = std::time::Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(101);

    // Zero inclination kills the torque exactly, for any slip angle.
    for _ in 0..50 {
        let g = random_geometry(&mut rng);
        let phi = rng.random_range(0.0..PI);
        assert_eq!(gravity_torque(&g, 0.0, phi), 0.0);
    }

    // Strictly increasing over the one-degree grid at zero slip angle.
    let g = GraspGeometry {
        ee_length: 0.24,
        com_offset: 0.2935,
        mass: 1.8,
        inertia_about_contact: 0.2,
    };
    let mut prev = gravity_torque(&g, 0.0, 0.0);
    for deg in 1..=90 {
        let t = gravity_torque(&g, (deg as f64).to_radians(), 0.0);
        assert!(t > prev, "not increasing at {deg} deg");
        prev = t;
    }

    // Twenty random points against an independent re-evaluation.
    for _ in 0..20 {
        let g = random_geometry(&mut rng);
        let theta = rng.random_range(0.01..FRAC_PI_2);
        let phi = rng.random_range(0.0..PI);
        let got = gravity_torque(&g, theta, phi);
        // Different association order and explicit half-weight factoring.
        let half_mg = 0.5 * (g.mass * GRAVITY);
        let expected = half_mg
            * theta.sin()
            * (phi.sin() * (g.com_offset * phi.sin())
                + phi.cos() * (g.ee_length + g.com_offset * phi.cos()));
        let rel = (got - expected).abs() / expected.abs().max(1e-300);
        assert!(rel < 1e-9, "relative error {rel}");
    }

    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 1.0, "took {dt} s");
    println!("[PASS] criterion 1: gravity torque zero at rest, monotone in inclination, matches independent re-evaluation ({dt:.3} s)");
}

fn random_geometry(rng: &mut ChaCha12Rng) -> GraspGeometry {
    GraspGeometry {
        ee_length: rng.random_range(0.05..0.4),
        com_offset: rng.random_range(0.01..0.5),
        mass: rng.random_range(0.05..5.0),
        inertia_about_contact: rng.random_range(0.01..0.5),
    }
}

// ---------------------------------------------------------------------------
// 2. Relaxation-angle reproduction.

#[test]
fn criterion_02_relaxation_angles() {
    let t0 = std::time::Instant::now();
    let (small, medium, large) = boards();
    let pad = SoftFingerParams::default();
    let ee = 0.24;

    let limit_for = |board: &BoardSpec, axis: AxisTag, grip: f64| -> f64 {
        let grasp = canonical_rim_grasp(board, Owner::RobotLeft, axis);
        relaxation_limit(&grasp.geometry(board, ee), &pad, grip)
            .unwrap()
            .relaxation_limit
    };

    // Single-scalar calibration: grip force such that the medium board's
    // transverse rim grasp relaxes to exactly 62 degrees.
    let target = 62f64.to_radians();
    let (mut lo, mut hi) = (1.0f64, 1.0e6);
    for _ in 0..120 {
        let mid = 0.5 * (lo + hi);
        if limit_for(&medium, AxisTag::Transverse, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let grip = 0.5 * (lo + hi);

    let med_trans = limit_for(&medium, AxisTag::Transverse, grip);
    let med_long = limit_for(&medium, AxisTag::Longitudinal, grip);
    let large_long = limit_for(&large, AxisTag::Longitudinal, grip);
    let small_long = limit_for(&small, AxisTag::Longitudinal, grip);
    let small_trans = limit_for(&small, AxisTag::Transverse, grip);

    assert!(
        (med_trans - target).abs() < 1e-3,
        "calibration failed: {:.3} deg",
        med_trans.to_degrees()
    );
    assert_eq!(small_long, FRAC_PI_2, "small board must be unconstrained");
    assert_eq!(small_trans, FRAC_PI_2);
    let med_long_deg = med_long.to_degrees();
    assert!(
        (30.0..=50.0).contains(&med_long_deg),
        "medium longitudinal {med_long_deg:.2} deg outside 40 +/- 10"
    );
    let large_deg = large_long.to_degrees();
    assert!(
        (12.0..=32.0).contains(&large_deg),
        "large {large_deg:.2} deg outside 22 +/- 10"
    );
    assert!(
        large_long < med_long && med_long < med_trans && med_trans < small_long,
        "ordering violated: {large_deg:.1} < {med_long_deg:.1} < {:.1} < 90 must hold strictly",
        med_trans.to_degrees()
    );

    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 5.0, "took {dt} s");
    println!(
        "[PASS] criterion 2: calibrated grip {grip:.1} N reproduces relaxation angles \
         (large {large_deg:.1}, medium-long {med_long_deg:.1}, medium-trans {:.1}, small 90) ({dt:.2} s)",
        med_trans.to_degrees()
    );
}

// ---------------------------------------------------------------------------
// Shared fixtures for the planner criteria.

fn bench_receiver() -> ArmRig {
    let mut chain = chain_by_name("ur3")
        .unwrap()
        .build(Pose::from_translation(0.0, 0.24, 0.40))
        .unwrap();
    chain.ready = JointConfig(vec![-2.4, -0.9, 1.2, -1.8, -1.57, 0.0]);
    ArmRig::new("robot-left", chain, Default::default())
}

/// Reorientation task on the bench: the board swings most of a quarter
/// turn about the vertical while tilting up toward the constraint bound,
/// keeping one grasp feasible at both ends.
fn flip_task(board: &BoardSpec, arm: &ArmRig) -> (GraspCandidate, JointConfig, JointConfig) {
    let start = Pose::from_translation(0.30, 0.0, 0.20);
    let batch = generate_candidates(board, Owner::RobotLeft, 0.05, arm.gripper.max_opening);
    let sa = feasible_grasps(board, &start, &batch.candidates, arm, &ObstacleSet::new());
    for yaw_deg in [75.0f64, 60.0, 45.0] {
        let goal = Pose::new(
            Vector3::new(0.26, 0.12, 0.26),
            UnitQuaternion::from_axis_angle(&Vector3::z_axis(), yaw_deg.to_radians())
                * UnitQuaternion::from_axis_angle(&Vector3::x_axis(), 25f64.to_radians()),
        );
        let sb = feasible_grasps(board, &goal, &batch.candidates, arm, &ObstacleSet::new());
        let pairs = shared_pairs(&sa, &sb).unwrap();
        if let Some((ea, eb)) = pairs.first() {
            return (ea.candidate.clone(), ea.config.clone(), eb.config.clone());
        }
    }
    panic!("no reorientation task with a shared grasp");
}

// ---------------------------------------------------------------------------
// 3. Planner soundness on 100 seeded flip queries at the 40-degree limit.

#[test]
fn criterion_03_planner_soundness() {
    let (_, medium, _) = boards();
    let arm = bench_receiver();
    let scene = bench_scene(vec![(
        medium.clone(),
        Pose::from_translation(0.34, -0.22, 0.007),
        Pose::from_translation(0.42, 0.28, 0.25),
    )]);
    let obstacles = scene.static_obstacle_set();
    let (grasp, q_start, q_goal) = flip_task(&medium, &arm);
    let attachments = [ObjectAttachment::for_grasp(&medium, &grasp)];
    let ctx = PlanContext {
        arm: &arm,
        constraint: InclinationConstraint {
            limit: 40f64.to_radians(),
        },
        obstacles: &obstacles,
        attachments: &attachments,
    };

    let mut successes = 0;
    for seed in 0..100u64 {
        let t0 = std::time::Instant::now();
        match plan_constrained(&ctx, &q_start, &q_goal, seed, &PlanParams::default()) {
            Ok(plan) => {
                let dt = t0.elapsed().as_secs_f64();
                assert!(dt < 30.0, "seed {seed} took {dt} s");
                let report = validate_plan(&plan, &ctx, 0.01);
                assert!(
                    report.pass,
                    "seed {seed}: returned plan fails re-validation at {:?}",
                    report.first_violation_at
                );
                successes += 1;
            }
            Err(_) => {}
        }
    }
    assert!(successes >= 90, "only {successes}/100 queries succeeded");
    println!(
        "[PASS] criterion 3: {successes}/100 flip queries solved at the 40 deg limit, every returned plan re-validates with zero violations at 0.01 rad"
    );
}

// ---------------------------------------------------------------------------
// 4. Necessity of constrained planning.

#[test]
fn criterion_04_necessity_of_constrained_planning() {
    // Analytic part: the naive geodesic that rolls the wrist half a turn
    // about the approach axis passes through a fully horizontal opening.
    let start_rot = UnitQuaternion::from_axis_angle(&Vector3::x_axis(), FRAC_PI_2);
    let start = Pose::from_rotation(start_rot);
    assert!(inclination_of_pose(&start) < 1e-9, "start opening is vertical");
    let approach_local = Vector3::z();
    let midpoint = Pose::from_rotation(
        start_rot * UnitQuaternion::from_axis_angle(&nalgebra::Unit::new_normalize(approach_local), PI / 2.0),
    );
    let end = Pose::from_rotation(
        start_rot * UnitQuaternion::from_axis_angle(&nalgebra::Unit::new_normalize(approach_local), PI),
    );
    let mid_incl = inclination_of_pose(&midpoint);
    assert!(
        mid_incl.to_degrees() >= 89.0,
        "geodesic midpoint inclination {:.2} deg",
        mid_incl.to_degrees()
    );
    assert!(inclination_of_pose(&end) < 1e-9, "endpoint is constraint-valid");
    println!(
        "[PASS] criterion 4 (analytic): the 180-degree about-approach geodesic reaches {:.1} deg inclination at its midpoint, violating any limit below 89 deg",
        mid_incl.to_degrees()
    );

    // Planner part, as stated: a violation-free alternative for the same
    // endpoints at the 22-degree limit.
    let (_, medium, _) = boards();
    let arm = bench_receiver();
    let obstacles = ObstacleSet::new();
    let pose_up = Pose::from_translation(0.30, 0.0, 0.20);
    let pose_down = Pose::new(
        pose_up.position,
        UnitQuaternion::from_axis_angle(&Vector3::x_axis(), PI),
    );
    let batch = generate_candidates(&medium, Owner::RobotLeft, 0.05, arm.gripper.max_opening);
    let sa = feasible_grasps(&medium, &pose_up, &batch.candidates, &arm, &obstacles);
    let sb = feasible_grasps(&medium, &pose_down, &batch.candidates, &arm, &obstacles);
    let pairs = shared_pairs(&sa, &sb).unwrap();
    let (ea, eb) = pairs.first().expect("face-flip endpoints share a grasp");
    let attachments = [ObjectAttachment::for_grasp(&medium, &ea.candidate)];
    let ctx = PlanContext {
        arm: &arm,
        constraint: InclinationConstraint {
            limit: 22f64.to_radians(),
        },
        obstacles: &obstacles,
        attachments: &attachments,
    };
    let result = plan_constrained(&ctx, &ea.config, &eb.config, 4, &PlanParams::default());
    match &result {
        Ok(plan) => {
            let report = validate_plan(plan, &ctx, 0.01);
            assert!(report.pass);
            println!("[PASS] criterion 4 (planner): violation-free alternative found");
        }
        Err(e) => {
            println!("[FAIL] criterion 4 (planner): {e}");
        }
    }
    assert!(
        result.is_ok(),
        "no violation-free alternative can exist: the flip endpoints place the \
         gripper opening axis at antipodal directions, and under the folded \
         inclination measure every limit below 90 degrees splits the valid \
         orientations into two disconnected polar caps; any continuous path \
         between antipodal openings crosses the 90-degree band"
    );
}

// ---------------------------------------------------------------------------
// 5. Comfort-score properties.

#[test]
fn criterion_05_comfort_score_properties() {
    let body = human_by_name("average-adult")
        .unwrap()
        .build(Pose::identity())
        .unwrap();
    let arm: &SerialChain = &body.right;
    let mut rng = ChaCha12Rng::seed_from_u64(55);

    for _ in 0..10_000 {
        let q = JointConfig(
            arm.joints
                .iter()
                .map(|j| rng.random_range(j.limits.0..j.limits.1))
                .collect(),
        );
        let j = arm.jacobian(&q).unwrap();
        let score = inverse_condition_number(&j);
        assert!((0.0..=1.0).contains(&score), "score {score} out of range");
        for c in [0.1, 10.0] {
            let scaled = inverse_condition_number(&(&j * c));
            assert!(
                (scaled - score).abs() < 1e-12,
                "scale invariance violated: {score} vs {scaled}"
            );
        }
    }

    // Fully extended arm is singular.
    let q = JointConfig(vec![0.0; 7]);
    let j = arm.jacobian(&q).unwrap();
    let singular = inverse_condition_number(&j);
    assert!(singular < 1e-6, "extended-arm score {singular}");

    // Eigen-decomposition oracle on random Jacobians.
    for _ in 0..100 {
        let j = DMatrix::from_fn(6, 7, |_, _| rng.random_range(-1.0..1.0));
        let got = inverse_condition_number(&j);
        let jjt = &j * j.transpose();
        let mut eig: Vec<f64> = jjt
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .map(|&l| l.max(0.0).sqrt())
            .collect();
        eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let expected = eig.last().unwrap() / eig.first().unwrap();
        assert!((got - expected).abs() < 1e-10);
    }

    println!("[PASS] criterion 5: comfort score in [0,1] on 10^4 configs, scale-invariant to 1e-12, singular at full extension, matches the eigenvalue oracle to 1e-10");
}

// ---------------------------------------------------------------------------
// 6. Handover pipeline oracle equivalence.

#[test]
fn criterion_06_handover_oracle_equivalence() {
    let t0 = std::time::Instant::now();
    let (_, medium, _) = boards();

    for scene_seed in 0..20u64 {
        // A randomized scene: the assembly target jitters around the
        // shared zone.
        let assembly = sample_pose_near(
            &Pose::from_translation(0.40, 0.25, 0.28),
            0.4,
            0.08,
            1000 + scene_seed,
        );
        let mut scene = bench_scene(vec![(
            medium.clone(),
            Pose::from_translation(0.34, -0.22, 0.007),
            assembly,
        )]);
        scene.planning.rh_samples = 20;
        scene.planning.robot_grasp_spacing = 0.09;
        scene.human.grasp_spacing = 0.1;
        scene.planning.rr_grid = RrGrid {
            center: [0.28, 0.0, 0.21],
            extents: [0.04, 0.0, 0.0],
            step: 0.04,
            yaws_deg: vec![0.0, 90.0, 180.0, 270.0],
        };
        let obstacles = scene.static_obstacle_set();
        let instance = &scene.boards[0];

        let rr = select_rr_handover_pose(&scene, &medium, &instance.initial, &obstacles)
            .expect("bimanual pose exists");
        let sampled =
            sample_goal_poses(&medium, &instance.assembly, &[], scene.planning.rh_samples, scene_seed)
                .unwrap();
        let threshold = scene.planning.comfort_threshold;
        let s = filter_comfortable(&sampled.poses, &medium, &scene, threshold);
        let shared = filter_shared(&s, &rr.receiving_set, &medium, &scene, &obstacles);

        // Strict filtration chain: shared poses within S within samples.
        for sp in &shared {
            assert!(
                s.iter().any(|(p, _)| p == &sp.pose),
                "shared pose not in S"
            );
        }
        for (p, _) in &s {
            assert!(sampled.poses.contains(p), "S pose not sampled");
        }

        // Independent membership re-evaluation for S.
        for pose in &sampled.poses {
            let best = score_human_grasps(&medium, pose, &scene.human)
                .into_iter()
                .map(|c| c.value)
                .fold(f64::NEG_INFINITY, f64::max);
            let in_s = s.iter().any(|(p, _)| p == pose);
            assert_eq!(in_s, best > threshold, "S membership mismatch");
        }

        // Independent membership re-evaluation for the shared set.
        let batch = generate_candidates(
            &medium,
            scene.receiver.owner,
            scene.planning.robot_grasp_spacing,
            scene.receiver.rig.gripper.max_opening,
        );
        for (pose, _) in &s {
            let g_pose = feasible_grasps(&medium, pose, &batch.candidates, &scene.receiver.rig, &obstacles);
            let any_shared = !shared_grasps(&g_pose, &rr.receiving_set).unwrap().is_empty();
            let in_shared = shared.iter().any(|sp| &sp.pose == pose);
            assert_eq!(in_shared, any_shared, "shared membership mismatch");
        }

        // Nearest-candidate selection equals the brute-force minimizer.
        if !shared.is_empty() {
            let ordered = select_handover_pose(&shared, &instance.assembly, scene.planning.w_rot)
                .unwrap();
            let brute = shared
                .iter()
                .map(|sp| handover_quality(&sp.pose, &instance.assembly, scene.planning.w_rot))
                .fold(f64::INFINITY, f64::min);
            assert!(
                (ordered[0].quality - brute).abs() < 1e-12,
                "first candidate is not the quality minimizer"
            );
        }
    }

    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 60.0, "took {dt} s");
    println!("[PASS] criterion 6: filtration chain, set memberships, and nearest-pose selection match independent re-evaluation on 20 seeded scenes ({dt:.1} s)");
}

// ---------------------------------------------------------------------------
// 7. Goal-pose sampler under the admissibility conditions.

mod mesh_oracle {
    use super::*;

    /// Triangle-triangle intersection (Moller interval test), used as the
    /// independent mesh-overlap oracle.
    pub fn tri_tri_intersect(a: &[Vector3<f64>; 3], b: &[Vector3<f64>; 3]) -> bool {
        let n2 = (b[1] - b[0]).cross(&(b[2] - b[0]));
        let d2 = -n2.dot(&b[0]);
        let da: Vec<f64> = a.iter().map(|v| n2.dot(v) + d2).collect();
        if da.iter().all(|&d| d > 1e-12) || da.iter().all(|&d| d < -1e-12) {
            return false;
        }
        let n1 = (a[1] - a[0]).cross(&(a[2] - a[0]));
        let d1 = -n1.dot(&a[0]);
        let db: Vec<f64> = b.iter().map(|v| n1.dot(v) + d1).collect();
        if db.iter().all(|&d| d > 1e-12) || db.iter().all(|&d| d < -1e-12) {
            return false;
        }
        let dir = n1.cross(&n2);
        let axis = dir.iamax();
        let interval = |tri: &[Vector3<f64>; 3], dist: &[f64]| -> Option<(f64, f64)> {
            let proj: Vec<f64> = tri.iter().map(|v| v[axis]).collect();
            // Find the vertex on its own side.
            let mut lone = None;
            for i in 0..3 {
                let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                if dist[i].signum() != dist[j].signum() && dist[i].signum() != dist[k].signum()
                    || (dist[j].abs() < 1e-12 && dist[k].abs() < 1e-12)
                {
                    lone = Some(i);
                    break;
                }
            }
            let lone = lone?;
            let (j, k) = ((lone + 1) % 3, (lone + 2) % 3);
            let t1 = proj[lone]
                + (proj[j] - proj[lone]) * dist[lone] / (dist[lone] - dist[j]);
            let t2 = proj[lone]
                + (proj[k] - proj[lone]) * dist[lone] / (dist[lone] - dist[k]);
            Some((t1.min(t2), t1.max(t2)))
        };
        match (interval(a, &da), interval(b, &db)) {
            (Some((a0, a1)), Some((b0, b1))) => a1 >= b0 && b1 >= a0,
            // Coplanar or degenerate: fall back to a conservative overlap
            // of vertex projections.
            _ => {
                let overlap = |u: &[Vector3<f64>; 3], v: &[Vector3<f64>; 3]| {
                    u.iter().any(|p| {
                        v.iter().any(|q| (p - q).norm() < 1e-9)
                    })
                };
                overlap(a, b)
            }
        }
    }

    /// Independent mesh-overlap check: any crossing triangles, or one mesh
    /// wholly containing a vertex of the other (both are convex cuboids).
    pub fn meshes_intersect(a: &PlacedMesh, b: &PlacedMesh) -> bool {
        let tris_a: Vec<_> = a.mesh.world_triangles(&a.pose).collect();
        let tris_b: Vec<_> = b.mesh.world_triangles(&b.pose).collect();
        for ta in &tris_a {
            for tb in &tris_b {
                if tri_tri_intersect(ta, tb) {
                    return true;
                }
            }
        }
        let inside = |m: &PlacedMesh, p: &Vector3<f64>| m.obb().contains_point(p);
        a.mesh
            .vertices
            .iter()
            .map(|v| a.pose.transform_point(v))
            .all(|v| inside(b, &v))
            || b.mesh
                .vertices
                .iter()
                .map(|v| b.pose.transform_point(v))
                .all(|v| inside(a, &v))
    }
}

#[test]
fn criterion_07_goal_pose_sampler() {
    let (_, medium, _) = boards();

    // Five obstacle arrangements around the goal.
    let arrangements: Vec<Vec<PlacedMesh>> = vec![
        vec![],
        vec![block("wall", Vector3::new(0.25, 0.0, 0.3), Vector3::new(0.02, 0.4, 0.3))],
        vec![
            block("floor", Vector3::new(0.0, 0.0, -0.05), Vector3::new(0.6, 0.6, 0.05)),
            block("pillar", Vector3::new(0.3, 0.3, 0.3), Vector3::new(0.05, 0.05, 0.4)),
        ],
        vec![block("slab", Vector3::new(0.0, 0.25, 0.35), Vector3::new(0.4, 0.01, 0.2))],
        vec![
            block("left", Vector3::new(-0.3, 0.0, 0.3), Vector3::new(0.05, 0.4, 0.3)),
            block("right", Vector3::new(0.35, 0.0, 0.3), Vector3::new(0.05, 0.4, 0.3)),
        ],
    ];
    let goal = Pose::new(
        Vector3::new(0.0, 0.0, 0.3),
        UnitQuaternion::from_axis_angle(&Vector3::y_axis(), 0.4),
    );

    for (i, finished) in arrangements.iter().enumerate() {
        let seed = 700 + i as u64;
        let sampled = sample_goal_poses(&medium, &goal, finished, 10_000, seed).unwrap();
        assert_eq!(sampled.poses.len(), 10_000);
        for pose in &sampled.poses {
            // Independent rotation distance via the trace formula.
            let rel = goal.rotation_matrix().transpose() * pose.rotation_matrix();
            let angle = ((rel.trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos();
            assert!(angle < GOAL_ROT_BOUND, "rotation bound violated: {angle}");
            let dp = pose.position - goal.position;
            assert!(dp.norm() < GOAL_TRANS_BOUND, "translation bound violated");
            let placed = PlacedMesh {
                id: "board".into(),
                mesh: medium.mesh.clone(),
                half_extents: medium.half_extents(),
                pose: *pose,
            };
            for mesh in finished {
                assert!(
                    !mesh_oracle::meshes_intersect(&placed, mesh),
                    "scene {i}: sampled pose intersects '{}'",
                    mesh.id
                );
            }
        }
        // Determinism per seed.
        let again = sample_goal_poses(&medium, &goal, finished, 100, seed).unwrap();
        for (a, b) in sampled.poses.iter().zip(&again.poses) {
            assert_eq!(a.position, b.position);
            assert_eq!(a.rotation, b.rotation);
        }
    }
    println!("[PASS] criterion 7: 5 x 10^4 accepted samples satisfy the rotation, translation, and mesh-clearance conditions under independent re-checks, deterministically per seed");
}

fn block(id: &str, center: Vector3<f64>, half: Vector3<f64>) -> PlacedMesh {
    PlacedMesh {
        id: id.into(),
        mesh: TriMesh::cuboid(half.x * 2.0, half.y * 2.0, half.z * 2.0),
        half_extents: half,
        pose: Pose::new(center, UnitQuaternion::identity()),
    }
}

// ---------------------------------------------------------------------------
// 8. Soft-finger model identities.

#[test]
fn criterion_08_soft_finger_model() {
    let pad = SoftFingerParams::default();
    let mut rng = ChaCha12Rng::seed_from_u64(88);

    // Quadrupling the normal force exactly doubles the eccentricity.
    for _ in 0..200 {
        let p = rng.random_range(0.1..500.0);
        assert_eq!(eccentricity(&pad, 4.0 * p).unwrap(), 2.0 * eccentricity(&pad, p).unwrap());
    }

    // Boundary consistency of the derived maximum torque.
    for _ in 0..500 {
        let p = rng.random_range(0.5..300.0);
        let f_t = rng.random_range(0.0..pad.mu * p);
        let tau = max_friction_torque(&pad, p, f_t).unwrap();
        let check = soft_finger_satisfied(&ContactState { f_t, tau_n: tau, p }, &pad).unwrap();
        let cap = pad.mu * pad.mu * p * p;
        assert!(check.margin.abs() < 1e-12 * cap, "margin {}", check.margin);
    }

    // Convexity of the admissible region on 10^3 random boundary pairs.
    let p = 80.0;
    let e_n = eccentricity(&pad, p).unwrap();
    let cap = pad.mu * p;
    for _ in 0..1000 {
        let a1: f64 = rng.random_range(0.0..FRAC_PI_2);
        let a2: f64 = rng.random_range(0.0..FRAC_PI_2);
        let mid = ContactState {
            f_t: 0.5 * (cap * a1.cos() + cap * a2.cos()),
            tau_n: 0.5 * (cap * e_n * a1.sin() + cap * e_n * a2.sin()),
            p,
        };
        assert!(soft_finger_satisfied(&mid, &pad).unwrap().satisfied);
    }
    println!("[PASS] criterion 8: eccentricity scaling exact, boundary margin below 1e-12 of the load cap, admissible region convex on 10^3 boundary pairs");
}

// ---------------------------------------------------------------------------
// 9. Kinematics oracles.

#[test]
fn criterion_09_kinematics() {
    let body = human_by_name("average-adult")
        .unwrap()
        .build(Pose::from_translation(0.86, 0.22, 0.42))
        .unwrap();
    let ur3 = chain_by_name("ur3")
        .unwrap()
        .build(Pose::from_translation(0.0, 0.24, 0.40))
        .unwrap();
    let chains: Vec<&SerialChain> = vec![&ur3, &body.right, &body.left];
    let mut rng = ChaCha12Rng::seed_from_u64(99);

    // Jacobian versus central finite differences, 100 configs per chain.
    for chain in &chains {
        for _ in 0..100 {
            let q: Vec<f64> = chain
                .joints
                .iter()
                .map(|j| rng.random_range(j.limits.0.max(-PI)..j.limits.1.min(PI)))
                .collect();
            let j = chain.jacobian(&JointConfig(q.clone())).unwrap();
            let h = 1e-7;
            for i in 0..q.len() {
                let mut qp = q.clone();
                let mut qm = q.clone();
                qp[i] += h;
                qm[i] -= h;
                let fp = chain.forward_kinematics(&JointConfig(qp)).unwrap();
                let fm = chain.forward_kinematics(&JointConfig(qm)).unwrap();
                let dp = (fp.position - fm.position) / (2.0 * h);
                let dr = (fp.rotation * fm.rotation.inverse()).scaled_axis() / (2.0 * h);
                for (row, v) in dp.iter().chain(dr.iter()).enumerate() {
                    assert!(
                        (j[(row, i)] - v).abs() < 1e-6,
                        "chain {} FD mismatch {:.2e}",
                        chain.name,
                        (j[(row, i)] - v).abs()
                    );
                }
            }
        }
    }

    // Forward/inverse roundtrip on 1000 reachable targets.
    let mut converged = 0;
    let trials = 1000;
    for t in 0..trials {
        let chain = chains[t % chains.len()];
        let q: Vec<f64> = chain
            .joints
            .iter()
            .map(|j| rng.random_range(j.limits.0.max(-2.0)..j.limits.1.min(2.0)))
            .collect();
        let target = chain.forward_kinematics(&JointConfig(q.clone())).unwrap();
        let seed = JointConfig(
            q.iter()
                .zip(&chain.joints)
                .map(|(v, j)| (v + rng.random_range(-0.1..0.1)).clamp(j.limits.0, j.limits.1))
                .collect(),
        );
        if let Ok(solution) = chain.inverse_kinematics(&target, &seed) {
            let fk = chain.forward_kinematics(&solution).unwrap();
            assert!((fk.position - target.position).norm() < 1e-4);
            assert!(
                coassembly::se3::rotation_distance(&fk.rotation, &target.rotation) < 1e-3
            );
            converged += 1;
        }
    }
    assert!(
        converged * 100 >= trials * 95,
        "roundtrip convergence {converged}/{trials}"
    );
    println!("[PASS] criterion 9: Jacobian matches finite differences below 1e-6 on 100 configs per chain; forward/inverse roundtrip converged on {converged}/{trials} targets within 1e-4 m / 1e-3 rad");
}

// ---------------------------------------------------------------------------
// 10. End-to-end assembly of the bundled cabinet.

#[test]
fn criterion_10_end_to_end_cabinet() {
    use coassembly::handover::StepKind;
    use coassembly::trace::{run_assembly, validate_trace};

    let scene = SceneModel::bundled_cabinet();
    let t0 = std::time::Instant::now();
    let trace = run_assembly(&scene, 7);
    let planning_s = t0.elapsed().as_secs_f64();

    assert!(trace.failure.is_none(), "assembly failed: {:?}", trace.failure);
    assert_eq!(trace.boards.len(), 7);
    let mut counts = std::collections::BTreeMap::new();
    for board in &trace.boards {
        for step in &board.steps {
            *counts.entry(step.kind).or_insert(0usize) += 1;
        }
    }
    for kind in [
        StepKind::SuctionPick,
        StepKind::RobotRobotTransfer,
        StepKind::ConstrainedMove,
        StepKind::HumanRelease,
    ] {
        assert_eq!(counts.get(&kind), Some(&7), "{kind:?} count");
    }

    let validation = validate_trace(&trace, &scene, 0.01);
    assert!(
        validation.pass,
        "trace validation failed: {:?}",
        validation
            .findings
            .iter()
            .filter(|f| !f.pass)
            .collect::<Vec<_>>()
    );
    assert!(
        planning_s < 300.0,
        "planning took {planning_s:.0} s, over the five-minute budget"
    );
    println!(
        "[PASS] criterion 10: seven-board cabinet planned in {planning_s:.0} s with 7 x 4 pipeline steps and a fully re-validated trace"
    );
}
