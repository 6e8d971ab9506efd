#![allow(dead_code)]

use diffyw::linalg::reflection_to_coeffs;
use rand::Rng;

/// Optimal-partitioning recursion over every split, with a two-pass segment
/// cost. Ties go to the earliest split.
pub fn brute_force_segmentation(x: &[f64], penalty: f64) -> Vec<usize> {
    let cost = |s: usize, t: usize| {
        let seg = &x[s..t];
        let mean = seg.iter().sum::<f64>() / seg.len() as f64;
        seg.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
    };
    let n = x.len();
    let mut best = vec![0.0; n + 1];
    let mut last = vec![0; n + 1];
    best[0] = -penalty;
    for t in 1..=n {
        let mut min = f64::INFINITY;
        for (s, &prev) in best.iter().enumerate().take(t) {
            let v = prev + cost(s, t) + penalty;
            if v < min {
                min = v;
                last[t] = s;
            }
        }
        best[t] = min;
    }
    let mut times = Vec::new();
    let mut t = n;
    while t > 0 {
        if last[t] > 0 {
            times.push(last[t]);
        }
        t = last[t];
    }
    times.reverse();
    times
}

/// Piecewise-constant Gaussian series with a random number of level changes.
pub fn random_segmented_series<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let jumps = rng.random_range(0..6);
    let mut cuts: Vec<usize> = (0..jumps).map(|_| rng.random_range(1..n)).collect();
    cuts.sort_unstable();
    let mut level = 0.0;
    let mut next = 0;
    (0..n)
        .map(|i| {
            while next < cuts.len() && cuts[next] == i {
                level += rng.random_range(-3.0..3.0);
                next += 1;
            }
            level + rng.sample::<f64, _>(rand_distr::StandardNormal)
        })
        .collect()
}

/// Causal AR(p) coefficients from reflection coefficients in (−bound, bound).
pub fn random_causal_coeffs<R: Rng>(rng: &mut R, p: usize, bound: f64) -> Vec<f64> {
    let kappa: Vec<f64> = (0..p).map(|_| rng.random_range(-bound..bound)).collect();
    reflection_to_coeffs(&kappa)
}
