mod support;

use lexalign::mapping::{align, apply_mapping, cross_covariance_trace, fit_orthogonal};
use lexalign::synthetic::rotated_pair;
use lexalign::{BilingualDictionary, EmbeddingTable};
use nalgebra::DMatrix;
use rand::Rng;
use support::*;

fn identity_dict(n: usize) -> BilingualDictionary {
    BilingualDictionary::from_pairs((0..n).map(|i| (format!("s{i}"), format!("t{i}")))).unwrap()
}

#[test]
fn fitted_maps_are_orthogonal_and_preserve_dot_products() {
    for trial in 0..100u64 {
        let mut r = rng(1000 + trial);
        let dim = r.random_range(1..=64);
        let n = r.random_range(1..=500);
        let src = random_table(&mut r, "s", n, dim);
        let tgt = random_table(&mut r, "t", n, dim);
        let am = align(&identity_dict(n), &src, &tgt, false).unwrap();
        let model = fit_orthogonal(&am).unwrap();
        assert!(model.orthogonality_error() <= 1e-6, "trial {trial}: {}", model.orthogonality_error());

        let x = normal_vec(&mut r, dim);
        let y = normal_vec(&mut r, dim);
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
        let (mx, my) = (model.map_vector(&x), model.map_vector(&y));
        let before = dot(&x, &y);
        assert!((dot(&mx, &my) - before).abs() <= 1e-6 * before.abs().max(1.0));
    }
}

#[test]
fn procrustes_beats_random_rotations() {
    for trial in 0..5u64 {
        let mut r = rng(50 + trial);
        let dim = r.random_range(2..=8);
        let n = 40;
        let src = random_table(&mut r, "s", n, dim);
        let tgt = random_table(&mut r, "t", n, dim);
        let am = align(&identity_dict(n), &src, &tgt, false).unwrap();
        let model = fit_orthogonal(&am).unwrap();
        let best = cross_covariance_trace(&am, model.weights());
        for _ in 0..1000 {
            let cols = gram_schmidt_orthogonal(&mut r, dim);
            let rot = DMatrix::from_fn(dim, dim, |i, j| cols[j][i]);
            assert!(cross_covariance_trace(&am, &rot) <= best + 1e-9);
        }
    }
}

#[test]
fn exact_rotation_is_recovered() {
    // Q from Gram–Schmidt here, independent of the QR used by the library
    let mut r = rng(77);
    let (n, dim) = (500, 32);
    let cols = gram_schmidt_orthogonal(&mut r, dim);
    let src = random_table(&mut r, "s", n, dim);
    let rows = src.rows().map(|x| (0..dim).map(|j| x.iter().zip(&cols[j]).map(|(a, b)| a * b).sum()).collect());
    let tgt = EmbeddingTable::from_rows((0..n).map(|i| format!("t{i}")).zip(rows)).unwrap();
    let am = align(&identity_dict(n), &src, &tgt, false).unwrap();
    let model = fit_orthogonal(&am).unwrap();
    let w = model.weights();
    let err = (0..dim)
        .flat_map(|i| (0..dim).map(move |j| (i, j)))
        .map(|(i, j)| (w[(i, j)] - cols[j][i]).abs())
        .fold(0.0, f64::max);
    assert!(err <= 1e-6, "{err}");
}

#[test]
fn mapped_table_keeps_vocabulary_and_norms() {
    let pair = rotated_pair(50, 6, 0.0, 4);
    let am = align(&pair.dictionary, &pair.source, &pair.target, false).unwrap();
    let model = fit_orthogonal(&am).unwrap();
    let mapped = apply_mapping(&model, &pair.source).unwrap();
    assert_eq!(mapped.words(), pair.source.words());
    for (a, b) in mapped.rows().zip(pair.target.rows()) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}
