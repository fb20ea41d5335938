//! Independent oracles shared by the integration tests and the acceptance report.
#![allow(dead_code)]

use neotaxis::clustering::{kmeans, Weights};
use neotaxis::{simulate_trace, Clusterer, ClustererConfig, ClustererKind, Discretization, HabituationParams, StimulusSegment};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<String, String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_rows(rng: &mut impl Rng, rows: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..rows).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect()
}

/// Sum of squared differences, accumulated left to right.
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        acc += d * d;
    }
    acc
}

/// Lowest index among the minima.
pub fn scan_argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..values.len() {
        if values[i] < values[best] {
            best = i;
        }
    }
    best
}

/// Rows a training step is allowed to touch.
pub fn touched_rows(kind: ClustererKind, winner: usize, rows: usize) -> Vec<usize> {
    match kind {
        ClustererKind::Kmeans => vec![winner],
        _ => {
            let mut v = vec![(winner + rows - 1) % rows, winner, (winner + 1) % rows];
            v.sort_unstable();
            v.dedup();
            v
        }
    }
}

fn random_clusterer(rng: &mut impl Rng, kind: ClustererKind) -> (Clusterer<f64>, Vec<Vec<f64>>) {
    let rows = rng.random_range(2..16);
    let dim = if kind == ClustererKind::Tkm { rng.random_range(1..3) } else { rng.random_range(1..8) };
    let weights = random_rows(rng, rows, dim);
    let mut config = ClustererConfig::new(kind, 0);
    config.eta = rng.random_range(0.01..1.0);
    config.gamma = rng.random_range(0.0..0.95);
    let c = Clusterer::with_weights(config, Weights::from_rows(&weights).unwrap()).unwrap();
    (c, weights)
}

pub fn winner_oracle(kind: ClustererKind, trials: usize, seed: u64) -> Check {
    let mut rng = rng(seed);
    for trial in 0..trials {
        let (mut c, weights) = random_clusterer(&mut rng, kind);
        let dim = weights[0].len();
        if kind == ClustererKind::Tkm {
            let acts: Vec<f64> = (0..weights.len()).map(|_| rng.random_range(0.0..2.0)).collect();
            c.set_activities(acts.clone()).unwrap();
        }
        let input: Vec<f64> = (0..dim).map(|_| rng.random()).collect();
        let before_acts = c.activities().to_vec();
        let got = c.classify(&input).map_err(|e| e.to_string())?.winner;
        let want = match kind {
            ClustererKind::Tkm => {
                let gamma = c.config().gamma;
                let acts: Vec<f64> = weights
                    .iter()
                    .zip(&before_acts)
                    .map(|(w, a)| gamma * a + (-0.5 * sq_dist(&input, w)).exp())
                    .collect();
                if acts != c.activities() {
                    return Err(format!("trial {trial}: activities differ from the leaky-integrator formula"));
                }
                let d: Vec<f64> = weights.iter().map(|w| sq_dist(&input, w)).collect();
                let mut best = 0;
                for i in 1..acts.len() {
                    if acts[i] > acts[best] || (acts[i] == acts[best] && d[i] < d[best]) {
                        best = i;
                    }
                }
                best
            }
            _ => scan_argmin(&weights.iter().map(|w| sq_dist(&input, w)).collect::<Vec<_>>()),
        };
        if got != want {
            return Err(format!("trial {trial}: winner {got}, exhaustive scan says {want}"));
        }
    }
    Ok(format!("{trials} trials"))
}

pub fn locality(kind: ClustererKind, trials: usize, seed: u64) -> Check {
    let mut rng = rng(seed);
    for trial in 0..trials {
        let (mut c, weights) = random_clusterer(&mut rng, kind);
        let dim = weights[0].len();
        let input: Vec<f64> = (0..dim).map(|_| rng.random()).collect();
        let winner = rng.random_range(0..weights.len());
        c.train(&input, winner).map_err(|e| e.to_string())?;
        let allowed = touched_rows(kind, winner, weights.len());
        for (i, row) in weights.iter().enumerate() {
            let now = c.weights().row(i);
            let same = now.iter().zip(row).all(|(a, b)| a.to_bits() == b.to_bits());
            if !allowed.contains(&i) && !same {
                return Err(format!("trial {trial}: row {i} moved but winner was {winner}"));
            }
        }
        let w = c.weights().row(winner);
        if sq_dist(w, &input) > sq_dist(&weights[winner], &input) {
            return Err(format!("trial {trial}: winner moved away from the input"));
        }
    }
    Ok(format!("{trials} trials"))
}

/// With no memory the most active neuron is the nearest one.
pub fn tkm_gamma_zero(trials: usize, seed: u64) -> Check {
    let mut rng = rng(seed);
    for trial in 0..trials {
        let rows = rng.random_range(2..16);
        let weights = random_rows(&mut rng, rows, 1);
        let mut config = ClustererConfig::new(ClustererKind::Tkm, 0);
        config.gamma = 0.0;
        let mut c = Clusterer::with_weights(config, Weights::from_rows(&weights).unwrap()).unwrap();
        c.set_activities((0..rows).map(|_| rng.random_range(0.0..5.0)).collect()).unwrap();
        let input = [rng.random::<f64>()];
        let got = c.classify(&input).unwrap().winner;
        let d: Vec<f64> = weights.iter().map(|w| sq_dist(&input, w)).collect();
        let want = scan_argmin(&d);
        if got != want {
            return Err(format!("trial {trial}: winner {got}, nearest is {want}"));
        }
    }
    Ok(format!("{trials} trials"))
}

/// Plain Lloyd iterations with the library's cost function as the objective.
pub fn lloyd_monotone(points: usize, k: usize, iterations: usize, seed: u64) -> Check {
    let mut rng = rng(seed);
    let data = random_rows(&mut rng, points, 2);
    let mut centres = data[..k].to_vec();
    let mut last = f64::INFINITY;
    for it in 0..iterations {
        let w = Weights::from_rows(&centres).unwrap();
        let j = kmeans::cost(&w, &data).map_err(|e| e.to_string())?;
        let direct: f64 = data
            .iter()
            .map(|x| centres.iter().map(|c| sq_dist(x, c)).fold(f64::INFINITY, f64::min))
            .sum();
        if (j - direct).abs() > 1e-9 * direct.max(1.0) {
            return Err(format!("iteration {it}: cost {j} but direct sum is {direct}"));
        }
        if j > last + 1e-12 {
            return Err(format!("iteration {it}: cost rose from {last} to {j}"));
        }
        last = j;
        let mut sums = vec![vec![0.0; 2]; k];
        let mut counts = vec![0usize; k];
        for x in &data {
            let c = kmeans::classify(&w, x).unwrap().winner;
            counts[c] += 1;
            sums[c][0] += x[0];
            sums[c][1] += x[1];
        }
        for c in 0..k {
            if counts[c] > 0 {
                centres[c] = vec![sums[c][0] / counts[c] as f64, sums[c][1] / counts[c] as f64];
            }
        }
    }
    Ok(format!("{iterations} iterations, final cost {last:.4}"))
}

/// Repeated updates towards one point shrink the gap by `(1 - eta)` per step.
pub fn online_contraction(steps: i32, seed: u64) -> Check {
    let mut rng = rng(seed);
    let start = random_rows(&mut rng, 3, 4);
    let target: Vec<f64> = (0..4).map(|_| rng.random()).collect();
    let eta = 0.25;
    let mut config = ClustererConfig::new(ClustererKind::Kmeans, 0);
    config.eta = eta;
    let mut c = Clusterer::with_weights(config, Weights::from_rows(&start).unwrap()).unwrap();
    let d0 = sq_dist(&start[1], &target).sqrt();
    let mut worst: f64 = 0.0;
    for t in 1..=steps {
        c.train(&target, 1).unwrap();
        let d = sq_dist(c.weights().row(1), &target).sqrt();
        worst = worst.max((d - (1.0 - eta).powi(t) * d0).abs());
    }
    if worst < 1e-12 {
        Ok(format!("{steps} steps, max deviation {worst:.1e}"))
    } else {
        Err(format!("deviation {worst:e} from (1 - eta)^t"))
    }
}

/// Efficacy after `n` robot steps of continuous firing: `y_n = 2 * 0.95^n - 1`.
pub fn robot_closed_form(n: i32) -> f64 {
    2.0 * 0.95f64.powi(n) - 1.0
}

pub fn steady_state_matches_trace() -> Check {
    let mut notes = Vec::new();
    for alpha in [1.05f64, 1.2] {
        let p = HabituationParams::curve(alpha).map_err(|e| e.to_string())?;
        let target = p.steady_state(1.0).unwrap();
        let rate = 1.0 - alpha / 20.0;
        let ticks = ((1e-4 / (1.0 - target)).ln() / rate.ln()).ceil() as u32;
        let trace = simulate_trace(&p, &[StimulusSegment::new(ticks, 1.0)]).unwrap();
        let err = (trace.last().unwrap() - target).abs();
        if err >= 1e-3 {
            return Err(format!("alpha {alpha}: |{} - {target}| = {err}", trace.last().unwrap()));
        }
        notes.push(format!("alpha {alpha}: {ticks} ticks, err {err:.1e}"));
    }
    Ok(notes.join("; "))
}

pub fn robot_crossing() -> Check {
    let p = HabituationParams::<f64>::robot();
    let trace = simulate_trace(&p, &[StimulusSegment::new(12, 1.0)]).unwrap();
    for (i, y) in trace.iter().enumerate() {
        let want = robot_closed_form(i as i32 + 1).max(0.0);
        if (y - want).abs() > 1e-12 {
            return Err(format!("step {}: {y} vs closed form {want}", i + 1));
        }
    }
    let first_below = trace.iter().position(|&y| y < 0.4).map(|i| i + 1);
    if first_below == Some(7) && trace[5] > 0.4 {
        Ok(format!("y6 = {:.4}, y7 = {:.4}", trace[5], trace[6]))
    } else {
        Err(format!("first step below 0.4 is {first_below:?}"))
    }
}

pub fn curve_shape() -> Check {
    for alpha in [1.05, 1.2] {
        let p = HabituationParams::new(20.0, alpha, Discretization::Divisive).unwrap();
        let segs = [StimulusSegment::new(150, 1.0), StimulusSegment::new(50, 0.0), StimulusSegment::new(100, 1.0)];
        let trace = simulate_trace(&p, &segs).unwrap();
        let falls = |r: std::ops::Range<usize>| trace[r].windows(2).all(|w| w[1] < w[0]);
        let rises = trace[149..200].windows(2).all(|w| w[1] > w[0]);
        if !(trace[0] < 1.0 && falls(0..150) && rises && falls(199..300)) {
            return Err(format!("alpha {alpha}: segments are not fall / rise / fall"));
        }
    }
    Ok("fall 0..150, rise 150..200, fall 200..300".into())
}
