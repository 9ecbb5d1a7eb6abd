mod common;

use acan::data::{generate_synthetic, sample_camera_balanced, sample_pk_batch, Split, SynthConfig};
use acan::eval::{
    camera_confusion, cmc_map, inter_camera_discrepancy, rank_queries, Labels, Protocol,
};
use acan::numeric::{finite_difference_check, softmax_rows, Matrix, Network};
use acan::objectives::{batch_hard_triplet, grl_backward, mine_batch_hard, pairwise_distances};
use common::{random_matrix, rng};
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize, scale: f64) -> impl Strategy<Value = Matrix> {
    proptest::collection::vec(-scale..scale, rows * cols).prop_map(move |v| Matrix::from_vec(rows, cols, v).unwrap())
}

fn sized_matrix(max_rows: usize, max_cols: usize, scale: f64) -> impl Strategy<Value = Matrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(move |(r, c)| matrix(r, c, scale))
}

/// A batch of `cams × ids × k` embeddings with per-camera identity labels.
fn triplet_batch() -> impl Strategy<Value = (Matrix, Vec<usize>, Vec<usize>)> {
    (1..3usize, 2..4usize, 2..4usize, 2..5usize).prop_flat_map(|(cams, ids, k, dim)| {
        let n = cams * ids * k;
        let labels: Vec<(usize, usize)> = (0..cams)
            .flat_map(|c| (0..ids).flat_map(move |i| std::iter::repeat_n((c, i), k)))
            .collect();
        matrix(n, dim, 2.0).prop_map(move |e| {
            let (cams, ids) = labels.iter().copied().unzip::<usize, usize, Vec<_>, Vec<_>>();
            (e, ids, cams)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn softmax_rows_are_distributions_and_shift_invariant(z in sized_matrix(6, 8, 50.0), shift in -100.0..100.0f64) {
        let p = softmax_rows(&z);
        for row in p.row_iter() {
            prop_assert!(row.iter().all(|&v| v >= 0.0));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
        let mut shifted = z.clone();
        shifted.as_mut_slice().iter_mut().for_each(|v| *v += shift);
        prop_assert!(softmax_rows(&shifted).max_abs_diff(&p) <= 1e-12);
    }

    #[test]
    fn forward_is_pure(seed in any::<u64>(), rows in 1..5usize) {
        let mut r = rng(seed);
        let net = Network::random(4, &[5, 3], 3, 2, &mut r).unwrap();
        let x = random_matrix(&mut r, rows, 4);
        let a = net.forward_discriminator(&net.embed(&x).unwrap()).unwrap();
        let b = net.forward_discriminator(&net.embed(&x).unwrap()).unwrap();
        prop_assert_eq!(a.logits.as_slice(), b.logits.as_slice());
        prop_assert_eq!(a.probs.as_slice(), b.probs.as_slice());
    }

    #[test]
    fn relu_gradient_vanishes_off_support(seed in any::<u64>(), rows in 1..5usize) {
        let mut r = rng(seed);
        let net = Network::random(3, &[6], 4, 2, &mut r).unwrap();
        let x = random_matrix(&mut r, rows, 3);
        let (emb, cache) = net.forward_extractor(&x).unwrap();
        let up = Matrix::from_vec(emb.rows(), emb.cols(), vec![1.0; emb.rows() * emb.cols()]).unwrap();
        let g = net.backward_extractor(&cache, &up).unwrap();
        // The hidden gradient reaches the input only through active units, so
        // an input row whose hidden units are all inactive gets zero gradient.
        let hidden = &cache.pre_activations()[0];
        for i in 0..rows {
            if hidden.row(i).iter().all(|&v| v <= 0.0) {
                prop_assert!(g.input.row(i).iter().all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn gradcheck_passes_iff_within_tolerance(a in -5.0..5.0f64, b in -5.0..5.0f64, eps in -1e-3..1e-3f64, tol in 1e-8..1e-2f64) {
        let f = |p: &[f64]| a * p[0] + b * p[1];
        let r = finite_difference_check("affine", f, &[a + eps, b], &[0.3, -0.7], 1e-5, tol).unwrap();
        prop_assert_eq!(r.passed, r.max_relative_error <= tol);
    }

    #[test]
    fn triplet_loss_nonnegative_and_zero_iff_margins_hold((e, ids, cams) in triplet_batch(), margin in 0.01..1.0f64) {
        let out = batch_hard_triplet(&e, &ids, &cams, margin).unwrap();
        prop_assert!(out.loss >= 0.0);
        let all_hold = out.triplets.iter().all(|t| t.negative_distance - t.positive_distance >= margin);
        prop_assert_eq!(out.loss == 0.0, all_hold);
    }

    #[test]
    fn mining_invariant_under_monotone_transform((e, ids, cams) in triplet_batch()) {
        let d = pairwise_distances(&e);
        let mut t = d.clone();
        t.as_mut_slice().iter_mut().for_each(|v| *v = v.powi(3) + 2.0 * *v + 1.0);
        prop_assert_eq!(mine_batch_hard(&d, &ids, &cams).unwrap(), mine_batch_hard(&t, &ids, &cams).unwrap());
    }

    #[test]
    fn mining_matches_exhaustive_search((e, ids, cams) in triplet_batch()) {
        let d = pairwise_distances(&e);
        prop_assert_eq!(mine_batch_hard(&d, &ids, &cams).unwrap(), common::exhaustive_mining(&d, &ids, &cams));
    }

    #[test]
    fn double_reversal_is_identity(g in sized_matrix(5, 5, 10.0)) {
        prop_assert_eq!(grl_backward(&grl_backward(&g, 1.0), 1.0), g);
    }

    #[test]
    fn generated_datasets_are_valid(
        cameras in 2..5usize,
        ids in 2..6usize,
        per in 2..5usize,
        dim in 2..8usize,
        overlap in 1..4usize,
        shift in 0.0..4.0f64,
        spread in 0.1..1.0f64,
        seed in any::<u64>(),
    ) {
        let cfg = SynthConfig {
            cameras,
            identities_per_camera: ids,
            samples_per_identity: per,
            input_dim: dim,
            identity_spread: spread,
            camera_shift_scale: shift,
            cross_camera_overlap: overlap,
            seed,
        };
        let ds = generate_synthetic(&cfg).unwrap();
        prop_assert_eq!(ds.num_cameras(), cameras);
        prop_assert!(ds.samples().iter().all(|s| s.camera < cameras && s.features.len() == dim));
        for c in 0..cameras {
            let groups = ds.train_identities(c);
            prop_assert!(groups.len() >= 2);
            prop_assert!(groups.iter().all(|g| g.samples.len() >= 2));
        }
        let gallery = ds.split_indices(Split::Gallery);
        for q in ds.split_indices(Split::Query) {
            let s = &ds.samples()[q];
            let matched = gallery.iter().any(|&g| {
                let t = &ds.samples()[g];
                t.identity == s.identity && t.camera != s.camera
            });
            prop_assert!(matched, "query {} has no cross-camera match", q);
        }
    }

    #[test]
    fn samplers_stay_in_range(seed in any::<u64>(), p in 2..5usize, k in 1..6usize, base in 3..40usize) {
        let ds = generate_synthetic(&SynthConfig { identities_per_camera: 5, ..common::small_config() }).unwrap();
        let mut r = rng(seed);
        for camera in 0..ds.num_cameras() {
            let b = sample_pk_batch(&ds, p, k, camera, &mut r).unwrap();
            prop_assert_eq!(b.indices.len(), p * k);
            for &i in &b.indices {
                let s = &ds.samples()[i];
                prop_assert!(i < ds.len());
                prop_assert_eq!(s.camera, camera);
                prop_assert_eq!(s.split, Split::Train);
            }
        }
        let b = sample_camera_balanced(&ds, base, &mut r).unwrap();
        let q = base / ds.num_cameras();
        for c in 0..ds.num_cameras() {
            prop_assert_eq!(b.indices.iter().filter(|&&i| ds.samples()[i].camera == c).count(), q);
        }
        prop_assert!(b.indices.iter().all(|&i| i < ds.len()));
    }

    #[test]
    fn cmc_monotone_and_scale_invariant(seed in any::<u64>(), nq in 1..8usize, ng in 2..20usize, ids in 1..4usize) {
        let mut r = rng(seed);
        use rand::Rng;
        let q = random_matrix(&mut r, nq, 3);
        let g = random_matrix(&mut r, ng, 3);
        let qi: Vec<usize> = (0..nq).map(|_| r.random_range(0..ids)).collect();
        let qc: Vec<usize> = (0..nq).map(|_| r.random_range(0..2)).collect();
        let gi: Vec<usize> = (0..ng).map(|_| r.random_range(0..ids)).collect();
        let gc: Vec<usize> = (0..ng).map(|_| r.random_range(0..2)).collect();
        let rank = |q: &Matrix, g: &Matrix| {
            rank_queries(q, g, Labels { identities: &qi, cameras: &qc }, Labels { identities: &gi, cameras: &gc }, Protocol::CrossCamera).unwrap()
        };
        let rr = rank(&q, &g);
        for qr in &rr.queries {
            prop_assert!(qr.distances.windows(2).all(|w| w[0] <= w[1]));
            for (pos, &gidx) in qr.gallery.iter().enumerate() {
                prop_assert_eq!(qr.relevant[pos], gi[gidx] == qi[qr.query]);
            }
        }
        let Ok((cmc, map)) = cmc_map(&rr, 10) else { return Ok(()) };
        prop_assert!(cmc.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(cmc.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!((0.0..=1.0).contains(&map));
        let scaled = cmc_map(&rank(&q.scale(4.0), &g.scale(4.0)), 10).unwrap();
        prop_assert_eq!(scaled, (cmc, map));
    }

    #[test]
    fn discrepancy_nonnegative_zero_iff_means_coincide(seed in any::<u64>(), per in 1..5usize, offset in prop_oneof![Just(0.0), 0.01..1.0f64]) {
        let mut r = rng(seed);
        let base = random_matrix(&mut r, per, 3);
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut cams = Vec::new();
        for c in 0..3 {
            for row in base.row_iter() {
                let mut v = row.to_vec();
                if c == 2 {
                    v[0] += offset;
                }
                rows.push(v);
                cams.push(c);
            }
        }
        let e = Matrix::from_rows(&rows).unwrap();
        let d = inter_camera_discrepancy(&e, &cams, 3).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert_eq!(d <= 1e-12, offset == 0.0);
    }

    #[test]
    fn confusion_rows_are_distributions(seed in any::<u64>()) {
        let mut r = rng(seed);
        let net = Network::random(4, &[5], 3, 3, &mut r).unwrap();
        let x = random_matrix(&mut r, 9, 4);
        let conf = camera_confusion(&net, &x, &[0, 1, 2, 0, 1, 2, 0, 1, 2]).unwrap();
        for row in conf.row_iter() {
            prop_assert!(row.iter().all(|&v| v >= 0.0));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
    }
}
