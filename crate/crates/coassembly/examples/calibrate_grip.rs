//! Development probe: solve for the grip force that puts the medium
//! board's transverse rim grasp at a 62-degree relaxation limit, then
//! report every board/axis limit at that force.

use coassembly::contact::SoftFingerParams;
use coassembly::grasp::{canonical_rim_grasp, AxisTag, BoardSpec, Owner};
use coassembly::slip::relaxation_limit;

fn main() {
    let pad = SoftFingerParams::default();
    let ee = 0.24;
    let medium = BoardSpec::new("medium", 0.587, 0.295, 0.010, 1.8).unwrap();
    let large = BoardSpec::new("large", 0.700, 0.350, 0.015, 2.6).unwrap();
    let small = BoardSpec::new("small", 0.397, 0.280, 0.003, 0.22).unwrap();

    let limit_for = |board: &BoardSpec, axis: AxisTag, grip: f64| -> f64 {
        let grasp = canonical_rim_grasp(board, Owner::RobotLeft, axis);
        relaxation_limit(&grasp.geometry(board, ee), &pad, grip)
            .unwrap()
            .relaxation_limit
    };

    let target = 62f64.to_radians();
    let (mut lo, mut hi) = (1.0, 1.0e6);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if limit_for(&medium, AxisTag::Transverse, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let grip = 0.5 * (lo + hi);
    println!("calibrated grip force: {grip:.6} N");
    for (board, name) in [(&medium, "medium"), (&large, "large"), (&small, "small")] {
        for axis in [AxisTag::Longitudinal, AxisTag::Transverse] {
            let deg = limit_for(board, axis, grip).to_degrees();
            println!("{name:>7} {axis:?}: {deg:.3} deg");
        }
    }
}
