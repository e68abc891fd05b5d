//! One EKF-SLAM lap around the landscape, stepping the simulation by hand
//! and writing the run exports.
//!
//!     cargo run --release --example slam_run -- /tmp/run

use std::path::PathBuf;

use robopinion::interview::ConceptSpec;
use robopinion::landscape::GroundTruthMap;
use robopinion::slam::{Associator, SimConfig, Simulation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "slam_run_out".into()));
    let spec = ConceptSpec::new("demo", (1..=10).map(|i| format!("f{i}")))?;
    let gt = GroundTruthMap::build(&spec, 100.0, None)?;
    let mut observed: Vec<_> = gt.landmarks().iter().map(|l| l.position).collect();
    observed[4].x += 2.0;

    let config = SimConfig { seed: 11, associator: Associator::Jcbb, ..Default::default() };
    let mut sim = Simulation::new(&gt, &observed, config)?;
    let mut worst_eig = f64::INFINITY;
    while sim.step()? {
        worst_eig = worst_eig.min(sim.state().smallest_eigenvalue());
        if sim.steps_taken() % 100 == 0 {
            let (t, e) = (sim.truth(), sim.state().pose());
            println!(
                "step {:>3}: truth ({:6.2}, {:6.2})  estimate ({:6.2}, {:6.2})  {} landmarks",
                sim.steps_taken(), t.x, t.y, e.x, e.y, sim.state().landmark_count()
            );
        }
    }
    let run = sim.into_result();
    println!("correct association rate {:.4}, smallest covariance eigenvalue {worst_eig:.3e}", run.correct_rate);

    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("trail.csv"), run.trail_csv())?;
    std::fs::write(out.join("associations.csv"), run.associations_csv())?;
    std::fs::write(out.join("final_map.csv"), run.final_map_csv(&gt))?;
    println!("wrote {}", out.display());
    Ok(())
}
