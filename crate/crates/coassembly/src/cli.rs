//! Command-line interface: full-assembly planning, single-board analyses,
//! and trace validation.

use clap::{Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};

use crate::comfort::{rank_goal_poses, sample_goal_poses};
use crate::error::Error;
use crate::grasp::{canonical_rim_grasp, AxisTag};
use crate::scene::{load_scene, SceneModel};
use crate::se3::PoseRecord;
use crate::slip::relaxation_limit;
use crate::trace::{run_assembly, validate_trace, PlanTrace};

#[derive(Parser)]
#[command(
    name = "coassembly",
    version,
    about = "Slip-aware manipulation planning for human-robot collaborative assembly"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GraspAxisArg {
    Longitudinal,
    Transverse,
}

#[derive(Subcommand)]
enum Command {
    /// Plan the full assembly sequence and emit a trace file.
    Plan {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "trace.json")]
        out: PathBuf,
        /// Override the per-query planning budget, seconds.
        #[arg(long)]
        budget_s: Option<f64>,
        /// Override the comfort threshold for handover candidates.
        #[arg(long)]
        comfort_threshold: Option<f64>,
        /// Override both grippers' squeeze force, newtons.
        #[arg(long)]
        grip_force: Option<f64>,
    },
    /// Plan a single board (earlier boards in the sequence count as
    /// already assembled).
    PlanBoard {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        board: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "trace.json")]
        out: PathBuf,
        #[arg(long)]
        budget_s: Option<f64>,
        #[arg(long)]
        comfort_threshold: Option<f64>,
        #[arg(long)]
        grip_force: Option<f64>,
    },
    /// Torque curve, friction budget, and relaxation limit for one board
    /// and grasp axis.
    SlipAnalyze {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        board: String,
        #[arg(long, value_enum)]
        grasp_axis: GraspAxisArg,
        #[arg(long)]
        grip_force: Option<f64>,
        /// Write the machine-readable record here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-pose, per-grasp comfort scores around a board's assembly pose.
    ComfortMap {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        board: String,
        #[arg(long, default_value_t = 50)]
        pose_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample admissible goal poses for a board.
    SampleGoals {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        board: String,
        #[arg(short, long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-validate an emitted trace against its scene.
    Validate {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        scene: PathBuf,
    },
}

/// Run the CLI on an argument vector. Exit codes: 0 success, 1 planning
/// failure or failed validation, 2 input error.
pub fn dispatch<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successful exits.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn load_with_overrides(
    path: &Path,
    budget_s: Option<f64>,
    comfort_threshold: Option<f64>,
    grip_force: Option<f64>,
) -> crate::error::Result<SceneModel> {
    let mut scene = load_scene(path)?;
    if let Some(b) = budget_s {
        scene.planning.plan_budget_s = b;
    }
    if let Some(t) = comfort_threshold {
        scene.planning.comfort_threshold = t;
    }
    if let Some(g) = grip_force {
        scene.suction.grip_force = g;
        scene.receiver.grip_force = g;
    }
    Ok(scene)
}

fn run(cli: Cli) -> crate::error::Result<i32> {
    match cli.command {
        Command::Plan {
            scene,
            seed,
            out,
            budget_s,
            comfort_threshold,
            grip_force,
        } => {
            let scene = load_with_overrides(&scene, budget_s, comfort_threshold, grip_force)?;
            let trace = run_assembly(&scene, seed);
            print_trace_summary(&trace);
            std::fs::write(&out, trace.to_json())?;
            println!("trace written to {}", out.display());
            Ok(if trace.failure.is_some() { 1 } else { 0 })
        }
        Command::PlanBoard {
            scene,
            board,
            seed,
            out,
            budget_s,
            comfort_threshold,
            grip_force,
        } => {
            let scene_model =
                load_with_overrides(&scene, budget_s, comfort_threshold, grip_force)?;
            let seq_pos = scene_model
                .sequence
                .iter()
                .position(|&i| scene_model.boards[i].spec.id == board)
                .ok_or_else(|| Error::SceneInvalid(format!("unknown board '{board}'")))?;
            let finished: Vec<_> = scene_model.sequence[..seq_pos]
                .iter()
                .map(|&i| scene_model.boards[i].placed_at_assembly())
                .collect();
            let instance = &scene_model.boards[scene_model.sequence[seq_pos]];
            let obstacles = scene_model.obstacles_for(seq_pos, &finished);
            match crate::handover::build_handover_plan(
                &scene_model,
                &instance.spec,
                &instance.initial,
                &instance.assembly,
                &obstacles,
                &finished,
                seed,
            ) {
                Ok((steps, diagnostics)) => {
                    println!(
                        "board '{board}': {} steps, |S| = {}, |shared| = {}, chosen = {:?}",
                        steps.len(),
                        diagnostics.comfortable,
                        diagnostics.shared,
                        diagnostics.chosen_index
                    );
                    let trace = PlanTrace {
                        scene: scene_model.name.clone(),
                        seed,
                        boards: vec![crate::trace::BoardTraceRecord {
                            board: board.clone(),
                            steps: steps
                                .iter()
                                .map(|s| {
                                    crate::trace::StepRecord::from_handover_step(
                                        s,
                                        scene_model.planning.joint_speed,
                                    )
                                })
                                .collect(),
                            diagnostics,
                        }],
                        failure: None,
                    };
                    std::fs::write(&out, trace.to_json())?;
                    println!("trace written to {}", out.display());
                    Ok(0)
                }
                Err(e) => {
                    eprintln!("planning failed for '{board}': {e}");
                    Ok(1)
                }
            }
        }
        Command::SlipAnalyze {
            scene,
            board,
            grasp_axis,
            grip_force,
            out,
        } => {
            let scene = load_with_overrides(&scene, None, None, grip_force)?;
            let instance = scene
                .board_by_id(&board)
                .ok_or_else(|| Error::SceneInvalid(format!("unknown board '{board}'")))?;
            let axis = match grasp_axis {
                GraspAxisArg::Longitudinal => AxisTag::Longitudinal,
                GraspAxisArg::Transverse => AxisTag::Transverse,
            };
            let receiver = &scene.receiver;
            let grasp = canonical_rim_grasp(&instance.spec, receiver.owner, axis);
            let geometry = grasp.geometry(&instance.spec, receiver.rig.gripper.ee_length);
            let analysis = relaxation_limit(&geometry, &receiver.pad, receiver.grip_force)?;
            println!(
                "board '{}' ({axis:?} rim grasp, lever {:.4} m, grip {:.1} N)",
                board, geometry.com_offset, receiver.grip_force
            );
            println!("friction torque budget: {:.6} N*m", analysis.friction_budget);
            println!(
                "relaxation limit: {:.2} deg (critical inclination {:.2} deg)",
                analysis.relaxation_limit.to_degrees(),
                analysis.theta_c.to_degrees()
            );
            println!("incl_deg  gravity_torque_nm");
            for (theta, torque) in &analysis.torque_curve {
                println!("{:8.1}  {:.6}", theta.to_degrees(), torque);
            }
            if let Some(out) = out {
                let record = serde_json::json!({
                    "board": board,
                    "axis": format!("{axis:?}"),
                    "geometry": geometry,
                    "grip_force": receiver.grip_force,
                    "analysis": analysis,
                });
                std::fs::write(&out, serde_json::to_string_pretty(&record).unwrap())?;
            }
            Ok(0)
        }
        Command::ComfortMap {
            scene,
            board,
            pose_samples,
            seed,
            out,
        } => {
            let scene = load_with_overrides(&scene, None, None, None)?;
            let instance = scene
                .board_by_id(&board)
                .ok_or_else(|| Error::SceneInvalid(format!("unknown board '{board}'")))?;
            let sampled =
                sample_goal_poses(&instance.spec, &instance.assembly, &[], pose_samples, seed)?;
            let ranked = rank_goal_poses(&instance.spec, &sampled.poses, &scene.human);
            println!(
                "board '{board}': {} sampled poses, {} with feasible stable grasps",
                sampled.poses.len(),
                ranked.len()
            );
            println!("rank  best_score  grasps  position");
            for (i, cand) in ranked.iter().enumerate() {
                println!(
                    "{:4}  {:10.4}  {:6}  [{:.3}, {:.3}, {:.3}]",
                    i,
                    cand.best.value,
                    cand.all.len(),
                    cand.pose.position.x,
                    cand.pose.position.y,
                    cand.pose.position.z
                );
            }
            if let Some(out) = out {
                let records: Vec<_> = ranked
                    .iter()
                    .map(|c| {
                        serde_json::json!({
                            "pose": PoseRecord::from_pose(&c.pose),
                            "best": c.best,
                            "scores": c.all,
                        })
                    })
                    .collect();
                std::fs::write(&out, serde_json::to_string_pretty(&records).unwrap())?;
            }
            Ok(0)
        }
        Command::SampleGoals {
            scene,
            board,
            n,
            seed,
            out,
        } => {
            let scene = load_with_overrides(&scene, None, None, None)?;
            let instance = scene
                .board_by_id(&board)
                .ok_or_else(|| Error::SceneInvalid(format!("unknown board '{board}'")))?;
            let sampled = sample_goal_poses(&instance.spec, &instance.assembly, &[], n, seed)?;
            println!(
                "{} poses sampled for '{board}' ({} rejected attempts)",
                sampled.poses.len(),
                sampled.rejected
            );
            for pose in &sampled.poses {
                let r = PoseRecord::from_pose(pose);
                println!(
                    "p = [{:.4}, {:.4}, {:.4}]  q = [{:.4}, {:.4}, {:.4}, {:.4}]",
                    r.p[0], r.p[1], r.p[2], r.q[0], r.q[1], r.q[2], r.q[3]
                );
            }
            if let Some(out) = out {
                let records: Vec<_> = sampled.poses.iter().map(PoseRecord::from_pose).collect();
                std::fs::write(&out, serde_json::to_string_pretty(&records).unwrap())?;
            }
            Ok(0)
        }
        Command::Validate { trace, scene } => {
            let scene = load_scene(&scene)?;
            let text = std::fs::read_to_string(&trace)?;
            let trace = PlanTrace::from_json(&text)?;
            let validation = validate_trace(&trace, &scene, 0.01);
            for f in &validation.findings {
                println!(
                    "[{}] {}: {}{}",
                    if f.pass { "PASS" } else { "FAIL" },
                    f.board,
                    f.check,
                    f.detail
                        .as_ref()
                        .map(|d| format!(" ({d})"))
                        .unwrap_or_default()
                );
            }
            Ok(if validation.pass { 0 } else { 1 })
        }
    }
}

fn print_trace_summary(trace: &PlanTrace) {
    for board in &trace.boards {
        let limit = board
            .diagnostics
            .relaxation
            .as_ref()
            .map(|a| format!("{:.1} deg", a.relaxation_limit.to_degrees()))
            .unwrap_or_else(|| "-".to_string());
        println!(
            "board '{}': {} steps, sampled {}, |S| = {}, |shared| = {}, chosen = {:?}, limit = {}",
            board.board,
            board.steps.len(),
            board.diagnostics.sampled,
            board.diagnostics.comfortable,
            board.diagnostics.shared,
            board.diagnostics.chosen_index,
            limit
        );
    }
    if let Some(f) = &trace.failure {
        println!("FAILED at board '{}': {}", f.board, f.message);
    }
}
