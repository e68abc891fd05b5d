//! NN against JCBB when a pose error shifts every prediction the same way,
//! then both associators over seeded runs at two sensor-noise levels.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use robopinion::interview::ConceptSpec;
use robopinion::landscape::GroundTruthMap;
use robopinion::montecarlo::{compare_associators, summary_csv};
use robopinion::slam::{
    jcbb, joint_mahalanobis2, nn_associate, AssociationConfig, Control, Observation, RobotPose, SimConfig, SlamState,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut state = SlamState::new(RobotPose::new(0.0, 0.0, 0.0), Matrix3::identity() * 1e-4);
    let r = Matrix2::identity() * 0.0025;
    for (i, x) in [10.0, 11.0, 12.0].into_iter().enumerate() {
        state.augment_landmark(&Observation { z: Vector2::new(x, 0.0), true_id: i as i32 }, &r);
    }
    // an uncertain pose: the whole row of landmarks may appear shifted
    state.predict(Control { forward: 0.0, turn: 0.0 }, &Matrix3::from_diagonal(&Vector3::new(0.5, 0.5, 1e-6)))?;

    let seen: Vec<Observation> = [10.6, 11.6, 12.6]
        .into_iter()
        .enumerate()
        .map(|(i, x)| Observation { z: Vector2::new(x, 0.0), true_id: i as i32 })
        .collect();
    let cfg = AssociationConfig::default();
    let nn = nn_associate(&state, &seen, &r, &cfg)?;
    let joint = jcbb(&state, &seen, &r, &cfg)?;
    println!("NN   {:?}", nn.pairing);
    println!("JCBB {:?}  D^2 = {:.3}", joint.pairing, joint_mahalanobis2(&state, &seen, &joint, &r)?);

    let runs: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20);
    let spec = ConceptSpec::new("demo", (1..=10).map(|i| format!("f{i}")))?;
    let gt = GroundTruthMap::build(&spec, 100.0, None)?;
    let observed: Vec<_> = gt.landmarks().iter().map(|l| l.position).collect();
    let rows = compare_associators(&gt, &observed, SimConfig::default(), &[1.0, 25.0], runs)?;
    print!("\n{}", summary_csv(&rows));
    Ok(())
}
