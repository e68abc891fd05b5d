//! Slope lengths of a normalized aberration profile.

use robopinion::polarity::{score_profile, slope_lengths, AberrationProfile, DEFAULT_EPSILON};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // ten features spanning [-0.645, 0.355]
    let values = [0.355, -0.12, 0.2, -0.645, 0.05, -0.3, 0.1, -0.5, 0.0, -0.2];
    let profile = AberrationProfile::from_values(&values)?.normalize()?;
    let r = slope_lengths(&profile, DEFAULT_EPSILON)?;
    println!("positive {:.2}  negative {:.2}  neutral {:.2}  score {:+.2}", r.pos_len, r.neg_len, r.neutral_len, r.score);
    print!("{}", profile.to_csv());

    // scale does not matter, sign does
    let raw: Vec<f64> = values.iter().map(|v| v * 7.5).collect();
    let scaled = score_profile(&AberrationProfile::from_values(&raw)?, DEFAULT_EPSILON)?.unwrap();
    let flipped = score_profile(&AberrationProfile::from_values(&raw)?.negated(), DEFAULT_EPSILON)?.unwrap();
    println!("scaled x7.5: {:+.2}, negated: {:+.2}", scaled.score, flipped.score);

    let flat = AberrationProfile::from_values(&[0.0; 10])?;
    println!("constant profile scores as {:?}", score_profile(&flat, DEFAULT_EPSILON)?);
    Ok(())
}
