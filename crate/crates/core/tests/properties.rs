//! Property tests over random graphs, signals and datasets.

mod common;

use std::sync::Arc;

use common::{connected_graph, dense_poly, permutation, rng, small_config};
use gdn_core::autodiff::Tape;
use gdn_core::graph::{build_left_norm_adj, build_renorm_adj, build_sym_laplacian};
use gdn_core::model::{DecoderVariant, GraphAutoencoder};
use gdn_core::params::ParamStore;
use gdn_core::sparse::CsrMatrix;
use gdn_core::spectral::{apply_filter, response, SpectralBasis};
use gdn_core::tasks::reconstruct::band_energies;
use gdn_core::tasks::recsys::{ils, ils_naive, inject_noise, Rating, RatingData};
use gdn_core::{Graph, Matrix};
use proptest::prelude::*;
use rand::Rng;

fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n, 0.0..0.6f64, any::<u64>()).prop_map(|(n, p, seed)| {
        let mut r = rng(seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if r.gen_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        Graph::from_edges(n, &edges).unwrap()
    })
}

fn arb_connected(min_n: usize, max_n: usize) -> impl Strategy<Value = Graph> {
    (min_n..=max_n, 0.0..0.5f64, any::<u64>()).prop_map(|(n, p, seed)| connected_graph(n, p, &mut rng(seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn laplacian_spectrum_in_unit_interval_times_two(g in arb_graph(25)) {
        let l = build_sym_laplacian(&g);
        prop_assert!(l.matrix().is_symmetric(1e-12));
        let basis = SpectralBasis::of(&l, 100).unwrap();
        for &lam in &basis.eigenvalues {
            prop_assert!((-1e-10..=2.0 + 1e-10).contains(&lam), "eigenvalue {lam}");
        }
        // isolated nodes keep a unit diagonal
        for i in 0..g.num_nodes() {
            if g.degree(i) == 0 {
                prop_assert_eq!(l.matrix().get(i, i), 1.0);
            }
        }
    }

    #[test]
    fn propagation_operators_are_normalized(g in arb_graph(20)) {
        let left = build_left_norm_adj(&g).to_dense();
        for i in 0..g.num_nodes() {
            let s: f64 = left.row(i).iter().sum();
            let ok = if g.degree(i) == 0 { s == 0.0 } else { (s - 1.0).abs() < 1e-12 };
            prop_assert!(ok);
        }
        let renorm = build_renorm_adj(&g);
        prop_assert!(renorm.matrix().is_symmetric(1e-12));
        let basis = SpectralBasis::of_dense(&renorm.to_dense(), 100).unwrap();
        prop_assert!(basis.eigenvalues.iter().all(|&l| (-1.0 - 1e-10..=1.0 + 1e-10).contains(&l)));
    }

    #[test]
    fn filters_match_dense_polynomials(g in arb_connected(2, 30), seed in any::<u64>()) {
        let l = build_sym_laplacian(&g);
        let dense = l.to_dense();
        let x = common::random_matrix(g.num_nodes(), 3, &mut rng(seed));
        for spec in common::all_filters() {
            let fast = apply_filter(&spec, &l, &x).unwrap();
            let slow = dense_poly(&spec.coefficients(), &dense, &x);
            prop_assert!(fast.max_abs_diff(&slow) < 1e-10, "{spec:?}");
        }
    }

    #[test]
    fn eigenvectors_scale_by_the_response(g in arb_connected(2, 20)) {
        let l = build_sym_laplacian(&g);
        let basis = SpectralBasis::of(&l, 100).unwrap();
        for spec in common::all_filters() {
            for (k, &lam) in basis.eigenvalues.iter().enumerate() {
                let lam_c = lam.clamp(0.0, 2.0);
                let u = Matrix::column(&basis.eigenvectors.col_values(k));
                let out = apply_filter(&spec, &l, &u).unwrap();
                let expected = u.scale(response(&spec, lam_c).unwrap());
                prop_assert!(out.max_abs_diff(&expected) < 1e-9);
            }
        }
    }

    #[test]
    fn filtering_commutes_with_relabeling(g in arb_connected(2, 20), seed in any::<u64>()) {
        let mut r = rng(seed);
        let perm = permutation(g.num_nodes(), &mut r);
        let x = common::random_matrix(g.num_nodes(), 2, &mut r);
        let gp = g.permute(&perm).unwrap();
        for spec in common::all_filters() {
            let a = apply_filter(&spec, &build_sym_laplacian(&g), &x).unwrap().select_rows(&perm);
            let b = apply_filter(&spec, &build_sym_laplacian(&gp), &x.select_rows(&perm)).unwrap();
            prop_assert!(a.max_abs_diff(&b) < 1e-10);
        }
    }

    #[test]
    fn sparse_products_match_dense(rows in 1..12usize, cols in 1..12usize, seed in any::<u64>()) {
        let mut r = rng(seed);
        let trips: Vec<(usize, usize, f64)> = (0..rows * cols / 2 + 1)
            .map(|_| (r.gen_range(0..rows), r.gen_range(0..cols), r.gen_range(-1.0..1.0)))
            .collect();
        let s = CsrMatrix::from_triplets(rows, cols, trips).unwrap();
        let d = s.to_dense();
        let x = common::random_matrix(cols, 3, &mut r);
        let y = common::random_matrix(rows, 3, &mut r);
        prop_assert!(s.spmm(&x).unwrap().max_abs_diff(&d.matmul(&x).unwrap()) < 1e-12);
        prop_assert!(s.spmm_t(&y).unwrap().max_abs_diff(&d.t_matmul(&y).unwrap()) < 1e-12);
    }

    #[test]
    fn band_energies_satisfy_parseval(g in arb_connected(1, 30), seed in any::<u64>()) {
        let basis = SpectralBasis::of(&build_sym_laplacian(&g), 100).unwrap();
        let x = common::random_matrix(g.num_nodes(), 2, &mut rng(seed));
        let bands = band_energies(&basis, &x).unwrap();
        prop_assert!((bands.iter().sum::<f64>() - x.frobenius_sq()).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pooling_is_invariant_and_decoding_equivariant(g in arb_connected(2, 10), seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = g.num_nodes();
        let g = common::with_random_features(g, 3, &mut r);
        let model = GraphAutoencoder::new(small_config(3, DecoderVariant::Gdn), seed).unwrap();
        let perm = permutation(n, &mut r);
        let a = model.forward(&model.prepare(&g).unwrap()).unwrap();
        let b = model.forward(&model.prepare(&g.permute(&perm).unwrap()).unwrap()).unwrap();
        prop_assert!(a.z.unwrap().max_abs_diff(&b.z.unwrap()) < 1e-9);
        prop_assert!(a.a_pool.unwrap().max_abs_diff(&b.a_pool.unwrap()) < 1e-9);
        prop_assert!(a.x_prime.select_rows(&perm).max_abs_diff(&b.x_prime) < 1e-9);
        prop_assert!((a.loss - b.loss).abs() < 1e-9);
    }

    #[test]
    fn masked_loss_ignores_unobserved_cells(seed in any::<u64>()) {
        let mut r = rng(seed);
        let pred = common::random_matrix(5, 4, &mut r);
        let target = common::random_matrix(5, 4, &mut r);
        let mask = Matrix::from_fn(5, 4, |_, _| f64::from(r.gen_bool(0.5)));
        let mut perturbed = target.clone();
        for k in 0..perturbed.len() {
            if mask.data()[k] == 0.0 {
                perturbed.data_mut()[k] += r.gen_range(-100.0..100.0);
            }
        }
        let loss = |t: Matrix| {
            let mut tape = Tape::new();
            let p = tape.param(pred.clone()).unwrap();
            let l = tape.masked_mse_loss(p, Arc::new(t), Arc::new(mask.clone())).unwrap();
            let grads = tape.backward(l).unwrap();
            (tape.scalar(l), grads.get(p).unwrap().clone())
        };
        let (l1, g1) = loss(target);
        let (l2, g2) = loss(perturbed);
        prop_assert_eq!(l1.to_bits(), l2.to_bits());
        prop_assert_eq!(g1, g2);
    }

    #[test]
    fn ils_paths_agree(users in 1..8usize, items in 1..12usize, k in 1..12usize, seed in any::<u64>()) {
        let mut r = rng(seed);
        let preds = common::random_matrix(users, items, &mut r);
        // sparse nonnegative ratings, some columns entirely empty
        let ratings = Matrix::from_fn(users, items, |_, _| if r.gen_bool(0.4) { r.gen_range(1.0..5.0) } else { 0.0 });
        let k = k.min(items);
        let a = ils(&preds, &ratings, k).unwrap();
        let b = ils_naive(&preds, &ratings, k).unwrap();
        prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn noise_injection_preserves_existing_entries(p in 0.0..=1.0f64, seed in any::<u64>()) {
        let mut r = rng(seed);
        let (users, items) = (6, 8);
        let mut cells: Vec<(usize, usize)> = (0..users).flat_map(|u| (0..items).map(move |i| (u, i))).collect();
        use rand::seq::SliceRandom;
        cells.shuffle(&mut r);
        let rating = |&(user, item): &(usize, usize)| Rating { user, item, value: 3.0 };
        let data = RatingData {
            num_users: users,
            num_items: items,
            train: cells[..12].iter().map(rating).collect(),
            test: cells[12..18].iter().map(rating).collect(),
            social: Graph::from_edges(users, &[(0, 1)]).unwrap(),
            rating_range: (1.0, 5.0),
        };
        let noisy = inject_noise(&data, p, seed).unwrap();
        prop_assert_eq!(noisy.train.len(), 12 + (p * 12.0).floor() as usize);
        prop_assert_eq!(&noisy.train[..12], &data.train[..]);
        prop_assert_eq!(&noisy.test, &data.test);
        prop_assert!(noisy.validate().is_ok());
    }

    #[test]
    fn checkpoints_reproduce_outputs_bitwise(g in arb_connected(2, 8), seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = common::with_random_features(g, 3, &mut r);
        let model = GraphAutoencoder::new(small_config(3, DecoderVariant::Gdn), seed).unwrap();
        let text = model.params.to_text();
        let restored = ParamStore::from_text(&text, std::path::Path::new("mem")).unwrap();
        let twin = GraphAutoencoder::with_params(model.config.clone(), restored).unwrap();
        let inputs = model.prepare(&g).unwrap();
        let a = model.forward(&inputs).unwrap();
        let b = twin.forward(&inputs).unwrap();
        prop_assert_eq!(a.loss.to_bits(), b.loss.to_bits());
        prop_assert_eq!(a.x_prime, b.x_prime);
    }
}
