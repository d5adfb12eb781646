use vdsom_web::Workbench;

fn bench() -> Workbench {
    Workbench::train(12, true, 8_000, 3).unwrap()
}

#[test]
fn forward_query_lands_near_truth() {
    let b = bench();
    let [px, py, tx, ty] = b.forward_mm(40.0, 90.0).unwrap();
    let err = (px - tx).hypot(py - ty);
    assert!(err < 40.0, "forward error {err} mm");
}

#[test]
fn inverse_query_reaches_target() {
    let b = bench();
    let target = [120.0, 160.0];
    let [_, _, rx, ry] = b.inverse_deg(target[0], target[1]).unwrap();
    let err = (rx - target[0]).hypot(ry - target[1]);
    assert!(err < 40.0, "reach error {err} mm");
}

#[test]
fn weights_cover_every_node() {
    let b = bench();
    assert_eq!(b.sensory_weights().len(), 2 * b.side() * b.side());
}

#[test]
fn stretching_raises_distortion_above_training_level() {
    let b = bench();
    let trace = b.perturbed_trace(1.5, 3).unwrap();
    assert_eq!(trace.len(), 3);
    assert!(trace.iter().all(|z| *z > b.final_zeta()), "{trace:?} vs {}", b.final_zeta());
}

#[test]
fn invalid_perturbation_is_rejected() {
    assert!(bench().perturbed_trace(-1.0, 1).is_err());
}
