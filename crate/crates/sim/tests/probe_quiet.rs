mod common;
use common::*;
use rubble_geom::scene::{fracture_model, parse_model};
use rubble_sim::{init_world, SimulationConfig};

const FRAME_MODEL: &str = r#"{
  "version": 1,
  "unit": "m",
  "solids": [
    { "id": "column_west",
      "shape": { "type": "box", "size": [0.3, 0.3, 1.5] },
      "position": [-1.3, -0.15, 0.0],
      "material": "concrete" },
    { "id": "column_east",
      "shape": { "type": "box", "size": [0.3, 0.3, 1.5] },
      "position": [1.0, -0.15, 0.0],
      "material": "concrete" },
    { "id": "beam",
      "shape": { "type": "box", "size": [2.6, 0.3, 0.3] },
      "position": [-1.3, -0.15, 1.5],
      "material": "concrete" },
    { "id": "infill",
      "shape": { "type": "box", "size": [2.0, 0.2, 1.5] },
      "position": [-1.0, -0.1, 0.0],
      "material": "brick" }
  ]
}"#;

fn ke_curve(iterations: u32, sleeping: bool) {
    let model = parse_model(FRAME_MODEL).unwrap();
    let scene = fracture_model(&model, 11, 1e-3).unwrap();
    let config = SimulationConfig { duration: 5.0, iterations, sleeping, ..Default::default() };
    let mut world = init_world(vec![scene], &[], still_drive(40, 200), config).unwrap();
    print!("iters {iterations:3} sleep {sleeping}: ");
    for i in 0..200 {
        world.step().unwrap();
        if i % 25 == 24 { print!("{:9.4} ", world.kinetic_energy()); }
    }
    println!();
}

#[test]
fn probe() {
    for iters in [16, 32, 64, 128] {
        ke_curve(iters, true);
    }
    ke_curve(16, false);
}
