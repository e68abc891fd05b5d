//! Acceptance suite. Prints one `PASS` / `FAIL` line per criterion.
//!
//! Exits non-zero on any failure outside `KNOWN_FAILURES`; with
//! `ROBOPINION_STRICT=1` every failure is fatal.

use std::cmp::Ordering;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use robopinion::config::PipelineConfig;
use robopinion::corpus::{parse_posts, serialize_post, Document};
use robopinion::interview::{parse_session, write_session_file, ConceptSpec};
use robopinion::landscape::{GroundTruthMap, DEFAULT_SIDE};
use robopinion::lexicon::{ContextMode, CooccurrenceTable, ParadigmSets};
use robopinion::montecarlo::compare_associators;
use robopinion::pipeline::run_pipeline;
use robopinion::polarity::{slope_lengths, AberrationProfile, PolarityResult};
use robopinion::slam::{
    chi2_quantile, jcbb, simulate_run, wrap_angle, AssociationConfig, Control, Hypothesis, NoiseModel, Observation,
    RobotPose, SimConfig, Simulation, SlamState,
};

/// Criteria that fail for reasons recorded in the design notes; reported, not fatal by default.
const KNOWN_FAILURES: &[u32] = &[3];

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

// 1 ------------------------------------------------------------------------

fn polarity_anchor() -> Outcome {
    let profile = AberrationProfile::from_values(&[0.355, -0.645, 0.1, -0.2]).unwrap().normalize().unwrap();
    let r = slope_lengths(&profile, 0.045).unwrap();
    let want = (0.31, 0.60, 0.09, -0.29);
    let err = [r.pos_len - want.0, r.neg_len - want.1, r.neutral_len - want.2, r.score - want.3]
        .iter()
        .fold(0.0f64, |m, e| m.max(e.abs()));
    outcome(
        err <= 1e-12,
        format!("({:.2}, {:.2}, {:.2}) score {:+.2}, max error {err:.1e}", r.pos_len, r.neg_len, r.neutral_len, r.score),
    )
}

// 2 ------------------------------------------------------------------------

fn random_instance(rng: &mut ChaCha8Rng) -> (SlamState, Vec<Observation>, Matrix2<f64>) {
    let n = rng.random_range(0..=5);
    let dim = 3 + 2 * n;
    let mut mean = DVector::zeros(dim);
    mean[0] = rng.random_range(-5.0..5.0);
    mean[1] = rng.random_range(-5.0..5.0);
    mean[2] = rng.random_range(-3.1..3.1);
    let pose = RobotPose::new(mean[0], mean[1], mean[2]);
    for slot in 0..n {
        let p = pose.to_world(&Vector2::new(rng.random_range(1.0..3.0), rng.random_range(-1.0..1.0)));
        mean[3 + 2 * slot] = p.x;
        mean[4 + 2 * slot] = p.y;
    }
    let a = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-0.3..0.3));
    let cov = &a * a.transpose() + DMatrix::identity(dim, dim) * 0.01;
    let state = SlamState::from_parts(mean, cov, (0..n as i32).collect()).unwrap();
    let m = rng.random_range(0..=4);
    let obs = (0..m)
        .map(|i| Observation {
            z: Vector2::new(rng.random_range(0.5..3.5), rng.random_range(-1.5..1.5)),
            true_id: i,
        })
        .collect();
    let s: f64 = rng.random_range(0.05..0.6);
    (state, obs, Matrix2::identity() * s * s)
}

/// Enumerates every injective pairing; nulls sort after any slot.
fn exhaustive(state: &SlamState, obs: &[Observation], r: &Matrix2<f64>, cfg: &AssociationConfig) -> Hypothesis {
    let dim = state.dim();
    let r_dyn = DMatrix::from_column_slice(2, 2, r.as_slice());
    let stacked = |pairs: &[(usize, usize)]| -> f64 {
        let k = pairs.len();
        let mut h = DMatrix::zeros(2 * k, dim);
        let mut nu = DVector::zeros(2 * k);
        for (row, &(i, j)) in pairs.iter().enumerate() {
            let (z, hj) = state.observe_model(j).unwrap();
            h.view_mut((2 * row, 0), (2, dim)).copy_from(&hj);
            nu[2 * row] = obs[i].z.x - z.x;
            nu[2 * row + 1] = obs[i].z.y - z.y;
        }
        let mut s = &h * state.covariance() * h.transpose();
        for row in 0..k {
            let mut block = s.view_mut((2 * row, 2 * row), (2, 2));
            block += &r_dyn;
        }
        (nu.transpose() * s.try_inverse().unwrap() * &nu)[0]
    };
    let gate = chi2_quantile(cfg.alpha_individual, 2).unwrap();
    let m = state.landmark_count();

    let mut all: Vec<Vec<Option<usize>>> = vec![vec![]];
    for _ in obs {
        all = all
            .into_iter()
            .flat_map(|h| {
                (0..m)
                    .map(Some)
                    .chain([None])
                    .filter(|c| c.is_none() || !h.contains(c))
                    .map(|c| {
                        let mut e = h.clone();
                        e.push(c);
                        e
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
    }

    let key = |h: &[Option<usize>]| h.iter().map(|s| s.unwrap_or(usize::MAX)).collect::<Vec<_>>();
    let mut best: Option<(usize, f64, Vec<Option<usize>>)> = None;
    for h in all {
        let pairs: Vec<(usize, usize)> = h.iter().enumerate().filter_map(|(i, s)| s.map(|s| (i, s))).collect();
        if pairs.iter().any(|&p| stacked(&[p]) >= gate) {
            continue;
        }
        let k = pairs.len();
        let d2 = if k == 0 { 0.0 } else { stacked(&pairs) };
        if k > 0 && d2 >= chi2_quantile(cfg.alpha_joint, 2 * k).unwrap() {
            continue;
        }
        let better = match &best {
            None => true,
            Some((bk, bd, bh)) => match k.cmp(bk) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal if (d2 - bd).abs() <= 1e-9 * (1.0 + bd.abs()) => key(&h) < key(bh),
                Ordering::Equal => d2 < *bd,
            },
        };
        if better {
            best = Some((k, d2, h));
        }
    }
    Hypothesis { pairing: best.unwrap().2 }
}

fn jcbb_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cfg = AssociationConfig::default();
    let (mut same, mut paired) = (0, 0);
    for _ in 0..500 {
        let (state, obs, r) = random_instance(&mut rng);
        let fast = jcbb(&state, &obs, &r, &cfg).unwrap();
        let slow = exhaustive(&state, &obs, &r, &cfg);
        if fast.pairings() > 0 {
            paired += 1;
        }
        if fast == slow {
            same += 1;
        }
    }
    outcome(same == 500, format!("{same}/500 identical hypotheses ({paired} with at least one pairing)"))
}

// 3 ------------------------------------------------------------------------

fn default_landscape() -> (GroundTruthMap, Vec<Vector2<f64>>) {
    let text = std::fs::read_to_string(fixtures().join("concept.txt")).unwrap();
    let spec = ConceptSpec::parse(&text).unwrap();
    let gt = GroundTruthMap::build(&spec, DEFAULT_SIDE, None).unwrap();
    let observed = gt.landmarks().iter().map(|l| l.position).collect();
    (gt, observed)
}

fn nn_sensitivity() -> Outcome {
    let (gt, observed) = default_landscape();
    let rows = compare_associators(&gt, &observed, SimConfig::default(), &[1.0, 25.0], 100).unwrap();
    let [nn_low, jcbb_low, nn_high, jcbb_high] = [rows[0], rows[1], rows[2], rows[3]].map(|r| r.mean_rate);
    let jcbb_wins = jcbb_high >= nn_high;
    let drop_pp = 100.0 * (nn_low - nn_high);
    outcome(
        jcbb_wins && drop_pp >= 10.0,
        format!(
            "R x1: NN {nn_low:.4} JCBB {jcbb_low:.4}; R x25: NN {nn_high:.4} JCBB {jcbb_high:.4}; \
             JCBB >= NN {jcbb_wins}, NN drop {drop_pp:+.2} pp (needs >= 10)"
        ),
    )
}

// 4 ------------------------------------------------------------------------

fn noiseless_limit() -> Outcome {
    let (gt, observed) = default_landscape();
    let config = SimConfig {
        noise: NoiseModel::zero(),
        ..Default::default()
    };
    let run = simulate_run(&gt, &observed, config).unwrap();
    let state = &run.final_state;
    let worst = (0..state.landmark_count())
        .map(|slot| {
            let truth = gt.landmark(state.registry()[slot]).unwrap().position;
            (state.landmark(slot).unwrap() - truth).norm()
        })
        .fold(0.0f64, f64::max);
    let mapped = state.landmark_count() == gt.landmarks().len();
    outcome(
        run.correct_rate == 1.0 && worst <= 1e-9 && mapped,
        format!("rate {}, {} slots, worst landmark error {worst:.1e}", run.correct_rate, state.landmark_count()),
    )
}

// 5 ------------------------------------------------------------------------

fn relative_error(analytic: &DMatrix<f64>, numeric: &DMatrix<f64>) -> f64 {
    (analytic - numeric).amax() / analytic.amax().max(1.0)
}

fn central<F: Fn(&DVector<f64>) -> DVector<f64>>(f: F, x: &DVector<f64>, rows: usize) -> DMatrix<f64> {
    let h = 1e-6;
    let mut j = DMatrix::zeros(rows, x.len());
    for c in 0..x.len() {
        let (mut a, mut b) = (x.clone(), x.clone());
        a[c] += h;
        b[c] -= h;
        let mut d = f(&a) - f(&b);
        d /= 2.0 * h;
        j.set_column(c, &d);
    }
    j
}

fn jacobians_match(rng: &mut ChaCha8Rng) -> f64 {
    let n = rng.random_range(1..=4);
    let dim = 3 + 2 * n;
    let mean = DVector::from_fn(dim, |i, _| match i {
        2 => rng.random_range(-3.0..3.0),
        _ => rng.random_range(-10.0..10.0),
    });
    let cov = DMatrix::identity(dim, dim);
    let state = SlamState::from_parts(mean.clone(), cov.clone(), (0..n as i32).collect()).unwrap();
    let pose = state.pose();
    let control = Control { forward: rng.random_range(0.0..2.0), turn: rng.random_range(-0.5..0.5) };
    let z = Vector2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
    let pose_vec = DVector::from_vec(vec![pose.x, pose.y, pose.theta]);
    let mut worst = 0.0f64;

    let f = pose.motion_jacobian(control);
    let f_num = central(
        |p| {
            let next = RobotPose::new(p[0], p[1], p[2]).advance(control);
            let d_theta = wrap_angle(next.theta - pose.advance(control).theta);
            DVector::from_vec(vec![next.x, next.y, d_theta])
        },
        &pose_vec,
        3,
    );
    worst = worst.max(relative_error(&DMatrix::from_column_slice(3, 3, f.as_slice()), &f_num));

    let (g_r, g_z) = pose.to_world_jacobians(&z);
    let g_r_num = central(
        |p| {
            let w = RobotPose::new(p[0], p[1], p[2]).to_world(&z);
            DVector::from_vec(vec![w.x, w.y])
        },
        &pose_vec,
        2,
    );
    let g_z_num = central(
        |zz| {
            let w = pose.to_world(&Vector2::new(zz[0], zz[1]));
            DVector::from_vec(vec![w.x, w.y])
        },
        &DVector::from_vec(vec![z.x, z.y]),
        2,
    );
    worst = worst.max(relative_error(&DMatrix::from_column_slice(2, 3, g_r.as_slice()), &g_r_num));
    worst = worst.max(relative_error(&DMatrix::from_column_slice(2, 2, g_z.as_slice()), &g_z_num));

    for slot in 0..n {
        let (_, h) = state.observe_model(slot).unwrap();
        let h_num = central(
            |m| {
                let s = SlamState::from_parts(m.clone(), cov.clone(), (0..n as i32).collect()).unwrap();
                let (zh, _) = s.observe_model(slot).unwrap();
                DVector::from_vec(vec![zh.x, zh.y])
            },
            &mean,
            2,
        );
        worst = worst.max(relative_error(&h, &h_num));
    }
    worst
}

fn filter_hygiene() -> Outcome {
    let (gt, observed) = default_landscape();
    let config = SimConfig { laps: 3, seed: 99, ..Default::default() };
    let mut sim = Simulation::new(&gt, &observed, config).unwrap();
    let (mut asym, mut eig) = (0.0f64, f64::INFINITY);
    while sim.steps_taken() < 1000 && sim.step().unwrap() {
        asym = asym.max(sim.state().asymmetry());
        eig = eig.min(sim.state().smallest_eigenvalue());
    }
    let steps = sim.steps_taken();

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let jac = (0..100).map(|_| jacobians_match(&mut rng)).fold(0.0f64, f64::max);
    outcome(
        steps >= 1000 && asym <= 1e-12 && eig >= -1e-9 && jac <= 1e-6,
        format!("{steps} steps, max asymmetry {asym:.1e}, min eigenvalue {eig:.2e}; Jacobian relative error {jac:.1e}"),
    )
}

// 6 ------------------------------------------------------------------------

fn pmi_oracle() -> Outcome {
    let docs: Vec<Document> = ["tasty good", "tasty good", "tasty bad", "bad"]
        .iter()
        .enumerate()
        .map(|(i, t)| Document::plain(format!("d{i}"), *t))
        .collect();
    let table = CooccurrenceTable::build(&docs, ContextMode::Document).unwrap().with_smoothing(0.0).unwrap();
    let paradigms = ParadigmSets::new(["good"], ["bad"]).unwrap();
    // N = 4, c(tasty) = 3, c(good) = 2, c(bad) = 2, c(tasty, good) = 2, c(tasty, bad) = 1
    let pmi_good = ((2.0f64 / 4.0) / ((3.0 / 4.0) * (2.0 / 4.0))).log2();
    let pmi_bad = ((1.0f64 / 4.0) / ((3.0 / 4.0) * (2.0 / 4.0))).log2();
    let got_good = table.pmi("tasty", "good").unwrap();
    let got_bad = table.pmi("tasty", "bad").unwrap();
    let so = table.semantic_orientation(&paradigms, "tasty").unwrap().value;
    let exact = got_good == pmi_good && got_bad == pmi_bad && so == pmi_good - pmi_bad;

    let vocab = ["alpha", "beta", "gamma", "delta", "omega", "sigma", "kappa", "theta"];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut sym_bad, mut swap_bad, mut checks) = (0, 0, 0);
    for _ in 0..100 {
        let docs: Vec<Document> = (0..rng.random_range(3..12))
            .map(|i| {
                let body: Vec<&str> = (0..rng.random_range(1..7)).map(|_| vocab[rng.random_range(0..vocab.len())]).collect();
                Document::plain(format!("r{i}"), body.join(" "))
            })
            .collect();
        let table = CooccurrenceTable::build(&docs, ContextMode::Document).unwrap();
        let terms: Vec<String> = table.terms().map(str::to_string).collect();
        for x in &terms {
            for y in &terms {
                checks += 1;
                if table.pmi(x, y).unwrap() != table.pmi(y, x).unwrap() {
                    sym_bad += 1;
                }
            }
        }
        let p = ParadigmSets::new(["alpha", "beta"], ["gamma", "omega"]).unwrap();
        for t in &terms {
            let a = table.semantic_orientation(&p, t).unwrap().value;
            let b = table.semantic_orientation(&p.swapped(), t).unwrap().value;
            if (a + b).abs() > 1e-12 {
                swap_bad += 1;
            }
        }
    }
    outcome(
        exact && sym_bad == 0 && swap_bad == 0,
        format!(
            "toy PMI {got_good:.6}/{got_bad:.6}, SO {so:.6} (exact {exact}); \
             {checks} symmetry checks, {sym_bad} asymmetric, {swap_bad} swap violations"
        ),
    )
}

// 7 ------------------------------------------------------------------------

fn profile_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut worst_span, mut worst_sum, mut out_of_range, mut antisym) = (0.0f64, 0.0f64, 0, 0);
    for _ in 0..1000 {
        let values: Vec<f64> = (0..rng.random_range(1..12)).map(|_| rng.random_range(-50.0..50.0)).collect();
        let profile = AberrationProfile::from_values(&values).unwrap();
        let Ok(unit) = profile.normalize() else { continue };
        worst_span = worst_span.max((unit.span() - 1.0).abs());
        let eps = rng.random_range(0.0..0.5);
        let r: PolarityResult = slope_lengths(&unit, eps).unwrap();
        worst_sum = worst_sum.max((r.pos_len + r.neg_len + r.neutral_len - 1.0).abs());
        if !(-1.0..=1.0).contains(&r.score) {
            out_of_range += 1;
        }
        let flipped = slope_lengths(&unit.negated(), eps).unwrap();
        if (flipped.score + r.score).abs() > 1e-12 {
            antisym += 1;
        }
    }
    outcome(
        worst_span <= 1e-12 && worst_sum <= 1e-12 && out_of_range == 0 && antisym == 0,
        format!(
            "span error {worst_span:.1e}, partition error {worst_sum:.1e}, \
             {out_of_range} scores outside [-1,1], {antisym} antisymmetry violations"
        ),
    )
}

// 8 ------------------------------------------------------------------------

fn fixture_config(script: &str, out: &Path) -> PipelineConfig {
    let mut config = PipelineConfig::load(&fixtures().join("pipeline.conf")).unwrap();
    config.script = Some(fixtures().join("scripts").join(script));
    config.out = out.to_path_buf();
    config
}

fn end_to_end_sign() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let run = |script: &str| run_pipeline(&fixture_config(script, &tmp.path().join(script)), None).unwrap();
    let negative = run("all_negative.txt");
    let mirrored = run("mirrored.txt");
    let neutral = run("all_neutral.txt");
    let pass = negative.scored.result.score < 0.0
        && mirrored.scored.result.score > 0.0
        && neutral.scored.degenerate()
        && neutral.scored.result == PolarityResult::neutral();
    outcome(
        pass,
        format!(
            "negative {:+.3}, mirrored {:+.3}, neutral degenerate {}",
            negative.scored.result.score,
            mirrored.scored.result.score,
            neutral.scored.degenerate()
        ),
    )
}

// 9 ------------------------------------------------------------------------

fn round_trips() -> Outcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    for entry in std::fs::read_dir(fixtures().join("corpus")).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let docs = parse_posts(&text).unwrap();
        let again = docs.iter().map(serialize_post).collect::<Vec<_>>().join("\n");
        checked += docs.len();
        if again != text || parse_posts(&again).unwrap() != docs {
            failures.push(path.display().to_string());
        }
    }

    let tmp = tempfile::tempdir().unwrap();
    let mut sessions: Vec<(String, String)> = std::fs::read_dir(fixtures().join("sessions"))
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            (path.display().to_string(), std::fs::read_to_string(&path).unwrap())
        })
        .collect();
    let mut bytes = Vec::new();
    for pass in 0..2 {
        for script in ["all_negative.txt", "mirrored.txt", "all_neutral.txt", "worded.txt"] {
            let out = tmp.path().join(format!("{pass}-{script}"));
            let outcome = run_pipeline(&fixture_config(script, &out), None).unwrap();
            let files: Vec<Vec<u8>> = outcome.artifacts.iter().map(|p| std::fs::read(p).unwrap()).collect();
            bytes.push(files);
            if pass == 0 {
                let session = std::fs::read_to_string(out.join("session.txt")).unwrap();
                sessions.push((script.to_string(), session));
            }
        }
    }
    for (name, text) in &sessions {
        checked += 1;
        let parsed = parse_session(text).unwrap();
        if write_session_file(&parsed) != *text || parse_session(&write_session_file(&parsed)).unwrap() != parsed {
            failures.push(name.clone());
        }
    }
    let (first, second) = bytes.split_at(4);
    let deterministic = first == second;
    outcome(
        failures.is_empty() && deterministic,
        format!("{checked} documents and sessions, failures {failures:?}; repeated runs byte-identical {deterministic}"),
    )
}

fn main() {
    let strict = std::env::var("ROBOPINION_STRICT").is_ok_and(|v| v == "1");
    let criteria: [(u32, &str, f64, fn() -> Outcome); 9] = [
        (1, "polarity anchor", 1.0, polarity_anchor),
        (2, "JCBB matches exhaustive enumeration", 30.0, jcbb_oracle),
        (3, "NN sensitivity to sensor noise", 120.0, nn_sensitivity),
        (4, "noiseless limit", 1.0, noiseless_limit),
        (5, "filter hygiene and Jacobians", 30.0, filter_hygiene),
        (6, "PMI and SO oracle", 5.0, pmi_oracle),
        (7, "normalization and partition invariants", 5.0, profile_invariants),
        (8, "end-to-end sign", 10.0, end_to_end_sign),
        (9, "round-trips and determinism", 5.0, round_trips),
    ];
    let mut fatal = Vec::new();
    for (id, name, budget, check) in criteria {
        let t = Instant::now();
        let o = check();
        let secs = t.elapsed().as_secs_f64();
        let pass = o.pass && secs <= budget;
        let known = !pass && KNOWN_FAILURES.contains(&id);
        let tag = match (pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("{tag} [{id}] {name}: {} [{secs:.2}s of {budget}s]", o.detail);
        if !pass && (strict || !known) {
            fatal.push(id);
        }
    }
    if !fatal.is_empty() {
        println!("failing criteria: {fatal:?}");
        std::process::exit(1);
    }
}
