use proptest::prelude::*;
use sparsecomm::compress::top_k;
use sparsecomm::rng::gaussian_vector;
use sparsecomm::{densify, sorted_pi, vector_stats};

#[test]
fn gaussian_stats_match_two_pass() {
    let u = gaussian_vector(10_000, 1);
    let s = vector_stats(&u).unwrap();
    let n = u.len() as f64;
    let mean = u.iter().sum::<f64>() / n;
    let var = u.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    assert!((s.mean - mean).abs() < 1e-12);
    assert!((s.std - var.sqrt()).abs() < 1e-12);
    assert!(s.mean.abs() < 0.05);
    assert!((s.std - 1.0).abs() < 0.05);
    let naive: f64 = u.iter().map(|x| x * x).sum();
    assert!(((s.l2_sq - naive) / naive).abs() < 1e-12);
}

#[test]
fn l2_sq_matches_naive_loop_at_1e6() {
    let u = gaussian_vector(1_000_000, 2);
    let s = vector_stats(&u).unwrap();
    let mut naive = 0.0;
    for x in &u {
        naive += x * x;
    }
    assert!(((s.l2_sq - naive) / naive).abs() < 1e-12);
}

#[test]
fn sorted_pi_against_full_sort() {
    let u = gaussian_vector(1_000, 3);
    let pi = sorted_pi(&u).unwrap();
    assert_eq!(pi[0], 1.0);
    assert!(pi.windows(2).all(|w| w[0] >= w[1]));
    let max = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut oracle: Vec<f64> = u.iter().map(|x| x.abs() / max).collect();
    oracle.sort_by(|a, b| b.partial_cmp(a).unwrap());
    assert_eq!(pi, oracle);
}

proptest! {
    #[test]
    fn stats_invariants(u in prop::collection::vec(-1e3f64..1e3, 1..200)) {
        let s = vector_stats(&u).unwrap();
        prop_assert!(s.std >= 0.0 && s.l2_sq >= 0.0 && s.linf >= 0.0);
        let d = u.len() as f64;
        let tol = 1e-9 * s.l2_sq.max(1.0);
        prop_assert!(s.linf * s.linf <= s.l2_sq + tol);
        prop_assert!(s.l2_sq <= d * s.linf * s.linf + tol);
    }

    #[test]
    fn sorted_pi_is_a_permutation(u in prop::collection::vec(-50f64..50.0, 1..100)) {
        prop_assume!(u.iter().any(|x| *x != 0.0));
        let pi = sorted_pi(&u).unwrap();
        let max = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut expect: Vec<f64> = u.iter().map(|x| x.abs() / max).collect();
        let mut got = pi.clone();
        expect.sort_by(f64::total_cmp);
        got.sort_by(f64::total_cmp);
        prop_assert_eq!(got, expect);
        prop_assert_eq!(pi[0], 1.0);
    }

    #[test]
    fn densify_of_full_topk_is_identity(u in prop::collection::vec(-10f64..10.0, 1..64)) {
        let d = u.len();
        let dense = densify(&top_k(&u, d).unwrap()).unwrap();
        prop_assert_eq!(dense.as_slice(), &u[..]);
    }
}
