//! Seeded Monte Carlo batches comparing NN and JCBB association.

use nalgebra::Vector2;
use rayon::prelude::*;

use crate::landscape::GroundTruthMap;
use crate::slam::{simulate_run, Associator, SimConfig, SlamError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssociatorSummary {
    pub associator: Associator,
    pub r_factor: f64,
    pub runs: usize,
    pub mean_rate: f64,
    pub std_rate: f64,
}

/// Correct-association rates of `runs` runs with seeds `base.seed..`, in seed order.
pub fn batch_rates(
    gt: &GroundTruthMap,
    observed: &[Vector2<f64>],
    base: SimConfig,
    runs: usize,
) -> Result<Vec<f64>, SlamError> {
    (0..runs as u64)
        .into_par_iter()
        .map(|k| {
            let config = SimConfig {
                seed: base.seed.wrapping_add(k),
                ..base
            };
            simulate_run(gt, observed, config).map(|r| r.correct_rate)
        })
        .collect()
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Both associators at every sensor-noise factor, same seeds throughout.
/// `r_factor` multiplies the observation covariance of `base`.
pub fn compare_associators(
    gt: &GroundTruthMap,
    observed: &[Vector2<f64>],
    base: SimConfig,
    r_factors: &[f64],
    runs: usize,
) -> Result<Vec<AssociatorSummary>, SlamError> {
    let mut out = Vec::new();
    for &r_factor in r_factors {
        for associator in [Associator::NearestNeighbour, Associator::Jcbb] {
            let config = SimConfig {
                associator,
                noise: base.noise.scaled(1.0, r_factor),
                ..base
            };
            let rates = batch_rates(gt, observed, config, runs)?;
            let (mean_rate, std_rate) = mean_std(&rates);
            out.push(AssociatorSummary {
                associator,
                r_factor,
                runs,
                mean_rate,
                std_rate,
            });
        }
    }
    Ok(out)
}

pub fn summary_csv(rows: &[AssociatorSummary]) -> String {
    let mut out = String::from("associator,r_factor,runs,mean_rate,std_rate\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:.6},{:.6}\n",
            r.associator.name(),
            r.r_factor,
            r.runs,
            r.mean_rate,
            r.std_rate
        ));
    }
    out
}
