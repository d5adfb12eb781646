//! Trains a small varying-density model and queries it in both directions.

use vdsom::{babble, Decode, DensityParams, MapVariant, ModelConfig, SensorimotorModel};

fn main() -> vdsom::Result<()> {
    let arm = vdsom::ArmModel::default();
    let data = babble(&arm, 10_000, 7)?;
    let pairs: Vec<_> = data.samples.iter().map(|s| (s.joints_norm, s.position_norm)).collect();

    let mut config = ModelConfig::square(20, MapVariant::Vdsom(DensityParams::default()), 7);
    config.map_iters = 20_000;
    config.bridge_iters = 10_000;
    let model = SensorimotorModel::fit(config, &pairs)?;

    let norm = data.normalizer;
    let joints = [40f64.to_radians(), 90f64.to_radians()];
    let predicted = norm.denormalize_task(model.forward(norm.normalize_joints(joints), Decode::Argmax)?);
    println!("forward: predicted {predicted:.1?} mm, true {:.1?} mm", arm.forward_kinematics(joints));

    let target = [120.0, 160.0];
    let q = norm.denormalize_joints(model.inverse(norm.normalize_task(target), Decode::Argmax)?);
    println!("inverse: joints {:.1?} deg reach {:.1?} mm", q.map(f64::to_degrees), arm.forward_kinematics(q));
    Ok(())
}
