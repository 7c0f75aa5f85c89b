//! Plan the bundled seven-board cabinet end to end, validate the emitted
//! trace, and print a per-board summary.

use coassembly::scene::SceneModel;
use coassembly::trace::{run_assembly, validate_trace};

fn main() {
    let scene = SceneModel::bundled_cabinet();
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(7u64);
    println!("planning '{}' with seed {seed}...", scene.name);
    let t0 = std::time::Instant::now();
    let trace = run_assembly(&scene, seed);
    println!("planned in {:.1} s", t0.elapsed().as_secs_f64());

    for board in &trace.boards {
        let d = &board.diagnostics;
        println!(
            "  {:>10}: sampled {:3} (rej {:3}), |S| {:3}, |shared| {:3}, chosen {:?}, attempts {}, limit {}",
            board.board,
            d.sampled,
            d.rejected_samples,
            d.comfortable,
            d.shared,
            d.chosen_index,
            d.plan_attempts,
            d.relaxation
                .as_ref()
                .map(|a| format!("{:.1} deg", a.relaxation_limit.to_degrees()))
                .unwrap_or_else(|| "-".into()),
        );
    }
    if let Some(f) = &trace.failure {
        println!("FAILED at '{}': {}", f.board, f.message);
        std::process::exit(1);
    }
    for board in &trace.boards {
        for (err, n) in &board.diagnostics.attempt_failures {
            println!("  [{}] {n} x {err}", board.board);
        }
    }

    let t1 = std::time::Instant::now();
    let validation = validate_trace(&trace, &scene, 0.01);
    println!(
        "validation: {} ({} findings, {:.1} s)",
        if validation.pass { "PASS" } else { "FAIL" },
        validation.findings.len(),
        t1.elapsed().as_secs_f64()
    );
    for f in validation.findings.iter().filter(|f| !f.pass) {
        println!("  FAIL {} {} {:?}", f.board, f.check, f.detail);
    }

    let out = std::env::temp_dir().join("cabinet_trace.json");
    std::fs::write(&out, trace.to_json()).unwrap();
    println!("trace written to {}", out.display());
}
