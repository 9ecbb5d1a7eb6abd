//! Independent oracles and fixtures shared by the integration tests.

#![allow(dead_code)]

use acan::data::{generate_synthetic, Dataset, SynthConfig};
use acan::numeric::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Projected-gradient descent with Armijo backtracking over the simplex in
/// `start.len()` dimensions. `f` is the objective and `grad` its gradient.
pub fn simplex_minimize(
    f: impl Fn(&[f64]) -> f64,
    grad: impl Fn(&[f64]) -> Vec<f64>,
    start: &[f64],
) -> (Vec<f64>, f64) {
    let mut x = project_to_simplex(start);
    let mut fx = f(&x);
    for _ in 0..20_000 {
        let g = grad(&x);
        let mut step = 1.0;
        let mut moved = false;
        while step > 1e-20 {
            let cand: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - step * gi).collect();
            let y = project_to_simplex(&cand);
            let decrease: f64 = g.iter().zip(y.iter().zip(&x)).map(|(gi, (yi, xi))| gi * (yi - xi)).sum();
            let fy = f(&y);
            if fy <= fx + 1e-4 * decrease {
                let delta = y.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                x = y;
                fx = fy;
                moved = delta > 1e-16;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (x, fx)
}

/// Brute-force CMC and mAP: every gallery rank is counted directly rather
/// than sorted.
pub fn brute_force_cmc_map(
    query: &Matrix,
    gallery: &Matrix,
    q_ids: &[usize],
    q_cams: &[usize],
    g_ids: &[usize],
    g_cams: &[usize],
    max_rank: usize,
) -> Option<(Vec<f64>, f64, usize)> {
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let mut hits = vec![0usize; max_rank];
    let mut ap_sum = 0.0;
    let mut counted = 0usize;
    for q in 0..query.rows() {
        let valid: Vec<usize> = (0..gallery.rows())
            .filter(|&g| !(g_ids[g] == q_ids[q] && g_cams[g] == q_cams[q]))
            .collect();
        let d: Vec<f64> = valid.iter().map(|&g| dist(query.row(q), gallery.row(g))).collect();
        let rank_of = |i: usize| {
            (0..valid.len())
                .filter(|&j| d[j] < d[i] || (d[j] == d[i] && valid[j] < valid[i]))
                .count()
        };
        let mut rel_ranks: Vec<usize> = (0..valid.len()).filter(|&i| g_ids[valid[i]] == q_ids[q]).map(rank_of).collect();
        if rel_ranks.is_empty() {
            continue;
        }
        rel_ranks.sort_unstable();
        counted += 1;
        for (r, h) in hits.iter_mut().enumerate() {
            if rel_ranks[0] <= r {
                *h += 1;
            }
        }
        let mut precision_sum = 0.0;
        for (n, &r) in rel_ranks.iter().enumerate() {
            precision_sum += (n + 1) as f64 / (r + 1) as f64;
        }
        ap_sum += precision_sum / rel_ranks.len() as f64;
    }
    if counted == 0 {
        return None;
    }
    let cmc = hits.iter().map(|&h| h as f64 / counted as f64).collect();
    Some((cmc, ap_sum / counted as f64, counted))
}

/// Exhaustive batch-hard mining: every (positive, negative) pair of the
/// anchor's camera is scored and the lexicographically best kept, i.e. the
/// farthest positive then the nearest negative, lowest index winning ties.
pub fn exhaustive_mining(d: &Matrix, ids: &[usize], cams: &[usize]) -> Vec<Option<(usize, usize)>> {
    let n = d.rows();
    (0..n)
        .map(|a| {
            let key = |p: usize, q: usize| (-d.get(a, p), p, d.get(a, q), q);
            let mut best: Option<(usize, usize)> = None;
            for p in (0..n).filter(|&p| p != a && cams[p] == cams[a] && ids[p] == ids[a]) {
                for q in (0..n).filter(|&q| cams[q] == cams[a] && ids[q] != ids[a]) {
                    let better = best.is_none_or(|(bp, bq)| {
                        let (k, b) = (key(p, q), key(bp, bq));
                        k.0.total_cmp(&b.0)
                            .then(k.1.cmp(&b.1))
                            .then(k.2.total_cmp(&b.2))
                            .then(k.3.cmp(&b.3))
                            .is_lt()
                    });
                    if better {
                        best = Some((p, q));
                    }
                }
            }
            best
        })
        .collect()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A small dataset that trains in well under a second.
pub fn small_config() -> SynthConfig {
    SynthConfig {
        cameras: 3,
        identities_per_camera: 4,
        samples_per_identity: 4,
        input_dim: 6,
        cross_camera_overlap: 3,
        ..SynthConfig::default()
    }
}

pub fn small_dataset() -> Dataset {
    generate_synthetic(&small_config()).unwrap()
}
