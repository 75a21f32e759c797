//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fail.
//!
//! Runs with `harness = false`; the grid cells it needs (10 trials x 300
//! iterations each) are computed once up front.

use std::collections::{BTreeMap, HashMap};
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use inter_mdm::experiment::{run_cells, run_experiment, CellKey, CellSummary, Condition, ExperimentConfig};
use inter_mdm::par::Parallelism;
use inter_mdm::stochastic::sample_dirichlet;
use inter_mdm::{
    adjusted_rand_index, gibbs_word, kappa, mh_exchange, AgentId, AgentModel, AgentParts, CommunicationMode,
    Hyperparams, Modality, ProbVector, StochasticMatrix, Variant,
};

use CommunicationMode::{AllRejection as Reject, GibbsTopline as Gibbs, MH};
use Variant::{H2H, T2T};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

struct Grid(HashMap<CellKey, CellSummary>);

impl Grid {
    fn compute() -> Grid {
        let mut cells = Vec::new();
        for variant in Variant::ALL {
            for method in CommunicationMode::ALL {
                for condition in [1, 3, 4] {
                    if method == Gibbs && !(variant == H2H && condition == 3) {
                        continue;
                    }
                    cells.push(key(variant, method, condition));
                }
            }
            cells.push(key(variant, MH, 2));
        }
        let base = ExperimentConfig::default();
        let results = run_cells(&base, &cells, Parallelism::Global).expect("grid run");
        Grid(results.iter().map(|r| (r.key, r.summary().expect("summary"))).collect())
    }

    fn get(&self, variant: Variant, method: CommunicationMode, condition: u8) -> &CellSummary {
        &self.0[&key(variant, method, condition)]
    }
}

fn key(variant: Variant, method: CommunicationMode, condition: u8) -> CellKey {
    CellKey {
        variant,
        method,
        condition: Condition::new(condition).unwrap(),
    }
}

fn kappa_mean(s: &CellSummary) -> f64 {
    s.kappa.expect("kappa present").mean
}

fn in_band(x: f64) -> bool {
    (0.80..=0.95).contains(&x)
}

fn tv(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

fn empirical(counts: &[u64]) -> Vec<f64> {
    let n: u64 = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / n as f64).collect()
}

fn criterion_1(g: &Grid) -> Outcome {
    let s = g.get(H2H, MH, 1);
    let k = kappa_mean(s);
    outcome(
        in_band(s.ari_a.mean) && in_band(s.ari_b.mean) && k >= 0.90,
        format!("ARI_A {:.3} ARI_B {:.3} kappa {:.3}", s.ari_a.mean, s.ari_b.mean, k),
    )
}

fn criterion_2(g: &Grid) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for v in Variant::ALL {
        let s = g.get(v, Reject, 1);
        let k = kappa_mean(s);
        pass &= k.abs() <= 0.15 && in_band(s.ari_a.mean) && in_band(s.ari_b.mean);
        parts.push(format!(
            "{v}: kappa {k:.3} ARI_A {:.3} ARI_B {:.3}",
            s.ari_a.mean, s.ari_b.mean
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_3(g: &Grid) -> Outcome {
    let mh = g.get(H2H, MH, 3).ari_b.mean;
    let rej = g.get(H2H, Reject, 3).ari_b.mean;
    let gibbs = g.get(H2H, Gibbs, 3).ari_b.mean;
    outcome(
        mh - rej >= 0.05 && (mh - gibbs).abs() <= 0.06,
        format!(
            "ARI_B mh {mh:.3} reject {rej:.3} (gain {:+.3}) gibbs {gibbs:.3}",
            mh - rej
        ),
    )
}

fn criterion_4(g: &Grid) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for v in Variant::ALL {
        let (mh, rej) = (g.get(v, MH, 4), g.get(v, Reject, 4));
        let gain_a = mh.ari_a.mean - rej.ari_a.mean;
        let gain_b = mh.ari_b.mean - rej.ari_b.mean;
        let k = kappa_mean(mh);
        pass &= gain_a >= 0.03 && gain_b >= 0.05 && k >= 0.85;
        parts.push(format!("{v}: gain A {gain_a:+.3} gain B {gain_b:+.3} kappa {k:.3}"));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_5(g: &Grid) -> Outcome {
    let k = kappa_mean(g.get(T2T, MH, 1));
    let mut worst: f64 = 0.0;
    for c in Condition::ALL {
        let (t, h) = (g.get(T2T, MH, c.number()), g.get(H2H, MH, c.number()));
        worst = worst
            .max((t.ari_a.mean - h.ari_a.mean).abs())
            .max((t.ari_b.mean - h.ari_b.mean).abs());
    }
    outcome(
        k >= 0.85 && worst <= 0.08,
        format!("t2t kappa {k:.3}; largest t2t/h2h ARI gap {worst:.3}"),
    )
}

/// Single-object agent with a frozen theta and category.
fn frozen_agent(id: AgentId, variant: Variant, theta: Vec<Vec<f64>>, c: usize, w: usize) -> AgentModel {
    let (k, l) = match variant {
        H2H => (theta.len(), theta[0].len()),
        T2T => (theta[0].len(), theta.len()),
    };
    AgentModel::from_parts(AgentParts {
        id,
        variant,
        hyper: Hyperparams {
            categories: k,
            signs: l,
            ..Hyperparams::default()
        },
        mask: "v".parse().unwrap(),
        pi: (variant == H2H).then(|| ProbVector::uniform(k)),
        theta: StochasticMatrix::from_vecs(theta).unwrap(),
        phi: BTreeMap::from([(Modality::Vision, StochasticMatrix::uniform(k, 2))]),
        categories: vec![c],
        signs: vec![w],
    })
    .unwrap()
}

fn random_theta(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| sample_dirichlet(&vec![1.0; cols], rng).unwrap().as_slice().to_vec())
        .collect()
}

/// Entry of the sign-given-category table, whichever way it is stored.
fn word_weight(variant: Variant, theta: &[Vec<f64>], c: usize, w: usize) -> f64 {
    match variant {
        H2H => theta[c][w],
        T2T => theta[w][c],
    }
}

fn criterion_6() -> Outcome {
    const SAMPLES: usize = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for variant in Variant::ALL {
        for _ in 0..20 {
            let l = rng.random_range(2..=5);
            let k = rng.random_range(2..=4);
            let shape = |rng: &mut ChaCha8Rng| match variant {
                H2H => random_theta(k, l, rng),
                T2T => random_theta(l, k, rng),
            };
            let (theta_a, theta_b) = (shape(&mut rng), shape(&mut rng));
            let (ca, cb) = (rng.random_range(0..k), rng.random_range(0..k));

            // Enumerated target: normalized product of both agents' weights.
            let raw: Vec<f64> = (0..l)
                .map(|w| word_weight(variant, &theta_a, ca, w) * word_weight(variant, &theta_b, cb, w))
                .collect();
            let z: f64 = raw.iter().sum();
            let target: Vec<f64> = raw.iter().map(|x| x / z).collect();

            let mut a = frozen_agent(AgentId::A, variant, theta_a, ca, rng.random_range(0..l));
            let mut b = frozen_agent(AgentId::B, variant, theta_b, cb, rng.random_range(0..l));
            for _ in 0..200 {
                mh_exchange(&a, &mut b, 0, &mut rng);
                mh_exchange(&b, &mut a, 0, &mut rng);
            }
            let mut counts = vec![0u64; l];
            for i in 0..SAMPLES {
                if i % 2 == 0 {
                    mh_exchange(&a, &mut b, 0, &mut rng);
                    counts[b.signs()[0]] += 1;
                } else {
                    mh_exchange(&b, &mut a, 0, &mut rng);
                    counts[a.signs()[0]] += 1;
                }
            }
            worst = worst.max(tv(&empirical(&counts), &target));
        }
    }
    outcome(worst < 0.03, format!("max TV over 40 chains {worst:.4}"))
}

fn criterion_7() -> Outcome {
    let target = [7.0 / 18.0, 4.0 / 18.0, 7.0 / 18.0];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for variant in Variant::ALL {
        let (ta, tb) = match variant {
            H2H => (vec![vec![0.7, 0.2, 0.1]], vec![vec![0.1, 0.2, 0.7]]),
            T2T => (
                vec![vec![0.7, 0.3], vec![0.2, 0.8], vec![0.1, 0.9]],
                vec![vec![0.1, 0.9], vec![0.2, 0.8], vec![0.7, 0.3]],
            ),
        };
        let mut a = frozen_agent(AgentId::A, variant, ta, 0, 0);
        let mut b = frozen_agent(AgentId::B, variant, tb, 0, 0);
        let mut counts = vec![0u64; 3];
        for _ in 0..100_000 {
            counts[gibbs_word(&mut a, &mut b, 0, &mut rng).unwrap()] += 1;
        }
        worst = worst.max(tv(&empirical(&counts), &target));
    }
    outcome(
        worst < 0.01,
        format!("max TV {worst:.4} against [0.3889, 0.2222, 0.3889]"),
    )
}

/// Pair-by-pair Rand counts, then the usual adjustment.
fn ari_oracle(x: &[usize], y: &[usize]) -> f64 {
    let n = x.len();
    let (mut both, mut same_x, mut same_y, mut pairs) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let sx = x[i] == x[j];
            let sy = y[i] == y[j];
            both += f64::from(u8::from(sx && sy));
            same_x += f64::from(u8::from(sx));
            same_y += f64::from(u8::from(sy));
            pairs += 1.0;
        }
    }
    let expected = same_x * same_y / pairs;
    let max = 0.5 * (same_x + same_y);
    if max == expected {
        let identical = (0..n).all(|i| (0..n).all(|j| (x[i] == x[j]) == (y[i] == y[j])));
        return if identical { 1.0 } else { 0.0 };
    }
    (both - expected) / (max - expected)
}

fn kappa_oracle(a: &[usize], b: &[usize], l: usize) -> f64 {
    let n = a.len() as f64;
    let observed = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / n;
    let mut chance = 0.0;
    for w in 0..l {
        let fa = a.iter().filter(|&&x| x == w).count() as f64 / n;
        let fb = b.iter().filter(|&&x| x == w).count() as f64 / n;
        chance += fa * fb;
    }
    if chance == 1.0 {
        return if observed == 1.0 { 1.0 } else { 0.0 };
    }
    (observed - chance) / (1.0 - chance)
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let d = rng.random_range(1..=30);
        let k = rng.random_range(1..=6);
        let l = rng.random_range(1..=6);
        let x: Vec<usize> = (0..d).map(|_| rng.random_range(0..k)).collect();
        let y: Vec<usize> = (0..d).map(|_| rng.random_range(0..k)).collect();
        let wa: Vec<usize> = (0..d).map(|_| rng.random_range(0..l)).collect();
        let wb: Vec<usize> = (0..d).map(|_| rng.random_range(0..l)).collect();
        worst = worst
            .max((adjusted_rand_index(&x, &y).unwrap() - ari_oracle(&x, &y)).abs())
            .max((kappa(&wa, &wb, l).unwrap() - kappa_oracle(&wa, &wb, l)).abs());
    }
    let half = adjusted_rand_index(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap();
    outcome(
        worst <= 1e-12 && half == -0.5,
        format!("max deviation {worst:.2e}; ARI([0,0,1,1],[0,1,0,1]) = {half}"),
    )
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let cfg = ExperimentConfig {
            condition: Condition::new(2).unwrap(),
            trials: 3,
            iterations: 25,
            seed: 99,
            output: dir.path().join(sub),
            ..ExperimentConfig::default()
        };
        run_experiment(&cfg).unwrap();
        std::fs::read(cfg.output.join("detail.csv")).unwrap()
    };
    let (first, second) = (run("a"), run("b"));
    outcome(
        first == second && !first.is_empty(),
        format!("{} bytes, identical: {}", first.len(), first == second),
    )
}

fn main() -> ExitCode {
    let grid = Grid::compute();
    let results: Vec<(&str, Outcome)> = vec![
        ("1 condition 1 h2h mh scores", criterion_1(&grid)),
        ("2 condition 1 all-rejection", criterion_2(&grid)),
        ("3 condition 3 h2h gains", criterion_3(&grid)),
        ("4 condition 4 gains", criterion_4(&grid)),
        ("5 t2t/h2h parity", criterion_5(&grid)),
        ("6 mh stationarity", criterion_6()),
        ("7 gibbs product draw", criterion_7()),
        ("8 ari and kappa oracles", criterion_8()),
        ("9 deterministic detail csv", criterion_9()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "{} criterion {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
