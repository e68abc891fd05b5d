//! Ground-truth landmark map for the fixture concept and the positions an
//! all-positive session pushes the features to.

use std::path::Path;

use robopinion::interview::{run_session, ConceptSpec, ScriptedAnswers, SessionConfig};
use robopinion::landscape::{opinion_offsets, place_observed_features, GroundTruthMap, DEFAULT_DELTA_MAX};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let spec = ConceptSpec::parse(&std::fs::read_to_string(root.join("concept.txt"))?)?;

    let gt = GroundTruthMap::build(&spec, 100.0, None)?;
    print!("{}", gt.to_csv());
    println!("feature sum = {}", gt.feature_sum());

    // imposed values must keep the sign pattern and sum to zero
    let values = [2.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -2.0];
    let weighted = GroundTruthMap::build(&spec, 100.0, Some(&values))?;
    println!("weighted sum = {}", weighted.feature_sum());
    let bad = [1.0, 1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
    println!("rejected: {}", GroundTruthMap::build(&spec, 100.0, Some(&bad)).unwrap_err());

    let mut script = ScriptedAnswers::parse("5,1,5,1,5,1,5,1,5,1");
    let session = run_session(&spec, &mut script, None, &SessionConfig::default())?;
    let offsets = opinion_offsets(&spec, &session.responses, DEFAULT_DELTA_MAX)?;
    let observed = place_observed_features(&gt, &offsets)?;
    println!("\nindex  ground truth        observed");
    for (l, p) in gt.landmarks().iter().zip(&observed) {
        println!("{:>5}  ({:6.2}, {:6.2})  ({:6.2}, {:6.2})", l.index, l.position.x, l.position.y, p.x, p.y);
    }
    Ok(())
}
