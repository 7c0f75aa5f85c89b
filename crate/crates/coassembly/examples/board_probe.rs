//! Development probe: run one board's pipeline and dump attempt failures.

use coassembly::handover::build_handover_plan;
use coassembly::scene::SceneModel;

fn main() {
    let scene = SceneModel::bundled_cabinet();
    let board_id = std::env::args().nth(1).unwrap_or_else(|| "lateral-a".into());
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
    let obstacles = scene.obstacles_for(seq_pos, &finished);
    match build_handover_plan(
        &scene,
        &instance.spec,
        &instance.initial,
        &instance.assembly,
        &obstacles,
        &finished,
        77,
    ) {
        Ok((steps, diag)) => {
            println!("OK: {} steps, diag {:#?}", steps.len(), diag.attempt_failures);
        }
        Err(e) => {
            println!("FAILED: {e}");
        }
    }
}
