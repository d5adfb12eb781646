use vdsom::*;

fn trained(side: usize, variant: MapVariant, seed: u64) -> (SensorimotorModel, BabbleSet) {
    let arm = ArmModel::default();
    let train = babble(&arm, 10_000, seed).unwrap();
    let pairs: Vec<_> = train.samples.iter().map(|s| (s.joints_norm, s.position_norm)).collect();
    let mut cfg = ModelConfig::square(side, variant, seed);
    cfg.map_iters = 40_000;
    cfg.bridge_iters = 10_000;
    (SensorimotorModel::fit(cfg, &pairs).unwrap(), train)
}

fn dist(a: [f64; 2], b: &[f64]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

#[test]
fn forward_then_inverse_returns_near_the_motor_bmu() {
    let (model, train) = trained(20, MapVariant::Vdsom(DensityParams::default()), 3);
    let test = babble_with(&ArmModel::default(), 2000, 4, &train.normalizer).unwrap();
    // One lattice cell spans a step along each axis.
    let cell = model.motor.lattice_unit() * 2f64.sqrt();
    let hits = test
        .iter()
        .filter(|s| {
            let bmu = find_bmu(&model.motor, &s.joints_norm).unwrap();
            let p = model.forward(s.joints_norm, Decode::Argmax).unwrap();
            let q = model.inverse(p, Decode::Argmax).unwrap();
            dist(q, model.motor.weight(bmu)) <= cell
        })
        .count();
    let rate = hits as f64 / test.len() as f64;
    assert!(rate >= 0.9, "reciprocity {rate}");
}

#[test]
fn readaptation_without_change_keeps_distortion() {
    let (mut model, train) = trained(15, MapVariant::Som, 8);
    let positions = train.positions_norm();
    let before = distortion(&model.sensory, recent_window(&positions)).unwrap();
    let pairs: Vec<_> = train.samples.iter().map(|s| (s.joints_norm, s.position_norm)).collect();
    // A zero threshold forces the trigger on unchanged data.
    let mut ctl = model.controller(0.0, 1.0, 0.1, 8_000).unwrap();
    assert!(ctl.detect_change(before));
    let r = run_readaptation(&mut model, &pairs, &mut ctl).unwrap();
    assert!(!r.sensory_tau.max_radius);
    let change = (r.final_distortion - before).abs() / before;
    assert!(change <= 0.05, "distortion moved by {change}");
    assert!(ctl.tau().is_some());
}

#[test]
fn fit_is_deterministic() {
    let (a, _) = trained(10, MapVariant::Vdsom(DensityParams::default()), 5);
    let (b, _) = trained(10, MapVariant::Vdsom(DensityParams::default()), 5);
    assert_eq!(a, b);
}

#[test]
fn untrained_bridge_reports_the_node() {
    let cfg = ModelConfig::square(5, MapVariant::Som, 1);
    let model = SensorimotorModel::untrained(cfg).unwrap();
    match model.forward([0.5, 0.5], Decode::Argmax) {
        Err(Error::UntrainedLink { side, .. }) => assert_eq!(side, "motor"),
        other => panic!("expected untrained link, got {other:?}"),
    }
}
