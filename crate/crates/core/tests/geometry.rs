use nalgebra::DMatrix;
use nsco::geometry::*;
use nsco::linalg::{dist, dot, norm, norm1};
use nsco::oracles::{LinearMinimizationOracle, ProjectionOracle};
use nsco::rng::StreamRng;
use proptest::prelude::*;

/// Exact ℓ1-ball projection by enumerating every sign/support pattern and
/// solving the KKT system `y_i = x_i - theta s_i` on that support.
fn l1_projection_oracle(x: &[f64], r: f64) -> Vec<f64> {
    if norm1(x) <= r {
        return x.to_vec();
    }
    let d = x.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let total = 3usize.pow(d as u32);
    for code in 0..total {
        let mut c = code;
        let signs: Vec<f64> = (0..d)
            .map(|_| {
                let s = [0.0, 1.0, -1.0][c % 3];
                c /= 3;
                s
            })
            .collect();
        let support = signs.iter().filter(|s| **s != 0.0).count();
        if support == 0 {
            continue;
        }
        let theta = (dot(&signs, x) - r) / support as f64;
        if theta < 0.0 {
            continue;
        }
        let y: Vec<f64> = (0..d)
            .map(|i| if signs[i] == 0.0 { 0.0 } else { x[i] - theta * signs[i] })
            .collect();
        if (0..d).any(|i| signs[i] * y[i] < 0.0) {
            continue;
        }
        let dd = dist(&y, x);
        if best.as_ref().is_none_or(|(b, _)| dd < *b) {
            best = Some((dd, y));
        }
    }
    best.unwrap().1
}

fn random_vec(rng: &mut StreamRng, d: usize, scale: f64) -> Vec<f64> {
    (0..d).map(|_| scale * rng.normal()).collect()
}

fn sets() -> Vec<SetDescriptor> {
    vec![
        SetDescriptor::l2(6, 1.3).unwrap(),
        SetDescriptor::l1(6, 1.3).unwrap(),
        SetDescriptor::nuclear(3, 4, 1.3).unwrap(),
    ]
}

#[test]
fn l2_projection_examples() {
    assert_eq!(project_l2_ball(&[3.0, 4.0], 5.0), vec![3.0, 4.0]);
    let p = project_l2_ball(&[3.0, 4.0], 1.0);
    assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.8).abs() < 1e-15);
    assert_eq!(project_l2_ball(&[0.0, 0.0], 2.0), vec![0.0, 0.0]);
}

#[test]
fn l1_projection_examples_match_kkt_oracle() {
    assert_eq!(project_l1_ball(&[0.2, -0.3], 1.0), vec![0.2, -0.3]);
    for (x, r, want) in [
        (vec![3.0, 1.0], 1.0, vec![1.0, 0.0]),
        (vec![2.0, 2.0], 2.0, vec![1.0, 1.0]),
    ] {
        let p = project_l1_ball(&x, r);
        let o = l1_projection_oracle(&x, r);
        assert!(dist(&p, &want) < 1e-12);
        assert!(dist(&o, &want) < 1e-10);
    }
}

#[test]
fn l1_projection_agrees_with_kkt_oracle() {
    let mut rng = StreamRng::from_seed(21);
    for trial in 0..200 {
        let d = 1 + trial % 8;
        let x = random_vec(&mut rng, d, 1.5);
        let r = 0.2 + 2.0 * rng.uniform();
        let p = project_l1_ball(&x, r);
        let o = l1_projection_oracle(&x, r);
        assert!(dist(&p, &o) < 1e-8, "x = {x:?}, r = {r}");
    }
}

#[test]
fn projections_are_feasible_optimal_and_nonexpansive() {
    let mut rng = StreamRng::from_seed(5);
    for set in sets() {
        let d = set.dim();
        for _ in 0..20 {
            let x = random_vec(&mut rng, d, 1.0);
            let px = set.project_vec(&x).unwrap();
            assert!(set.residual(&px).unwrap() <= 1e-8, "{:?}", set.kind());
            let again = set.project_vec(&px).unwrap();
            assert!(dist(&again, &px) <= 1e-10);
            for _ in 0..50 {
                let s = set.random_point(&mut rng);
                let cert: f64 = (0..d).map(|i| (x[i] - px[i]) * (s[i] - px[i])).sum();
                assert!(cert <= 1e-8, "{:?}: certificate {cert}", set.kind());
            }
        }
        for _ in 0..1000 {
            let a = random_vec(&mut rng, d, 1.0);
            let b = random_vec(&mut rng, d, 1.0);
            let pa = set.project_vec(&a).unwrap();
            let pb = set.project_vec(&b).unwrap();
            assert!(dist(&pa, &pb) <= dist(&a, &b) + 1e-12);
        }
    }
}

#[test]
fn nuclear_projection_examples() {
    let p = project_nuclear_ball(Matrix::diag(&[0.3, 0.2]).as_slice(), 2, 2, 1.0, 1e-12, 60).unwrap();
    assert_eq!(p, Matrix::diag(&[0.3, 0.2]).as_slice());
    let p = project_nuclear_ball(Matrix::diag(&[3.0, 1.0]).as_slice(), 2, 2, 1.0, 1e-12, 60).unwrap();
    assert!(dist(&p, Matrix::diag(&[1.0, 0.0]).as_slice()) < 1e-12);
}

#[test]
fn nuclear_projection_beats_random_feasible_points() {
    let mut rng = StreamRng::from_seed(17);
    let set = SetDescriptor::nuclear(4, 3, 1.0).unwrap();
    for _ in 0..3 {
        let x = random_vec(&mut rng, 12, 1.0);
        let p = set.project_vec(&x).unwrap();
        assert!(nuclear_norm(&p, 4, 3).unwrap() <= 1.0 + 1e-8);
        let dp = dist(&p, &x);
        for _ in 0..10_000 {
            let s = set.random_point(&mut rng);
            assert!(dp <= dist(&s, &x) + 1e-12);
        }
    }
}

#[test]
fn jacobi_singular_values_match_nalgebra() {
    let mut rng = StreamRng::from_seed(3);
    for &(m, n) in &[(4, 3), (3, 4), (6, 6), (7, 2), (1, 5)] {
        let a = random_vec(&mut rng, m * n, 1.0);
        let ours = jacobi_svd(&a, m, n, 1e-12, 60).unwrap();
        let mut theirs: Vec<f64> = DMatrix::from_row_slice(m, n, &a)
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .collect();
        theirs.sort_by(|x, y| y.total_cmp(x));
        for (s, t) in ours.s.iter().zip(&theirs) {
            assert!((s - t).abs() < 1e-10 * theirs[0].max(1.0), "{m}x{n}: {s} vs {t}");
        }
    }
}

#[test]
fn top_singular_pair_matches_full_svd() {
    let mut rng = StreamRng::from_seed(12);
    for _ in 0..20 {
        let a = random_vec(&mut rng, 36, 1.0);
        let (sigma, u, v) = top_singular_pair(&a, 6, 6, 1e-12, 1_000_000, &mut rng).unwrap();
        let full = jacobi_svd(&a, 6, 6, 1e-12, 60).unwrap();
        assert!((sigma - full.s[0]).abs() < 1e-8);
        assert!((norm(&u) - 1.0).abs() < 1e-12 && (norm(&v) - 1.0).abs() < 1e-12);
        let av: Vec<f64> = (0..6).map(|i| dot(&a[i * 6..(i + 1) * 6], &v)).collect();
        let resid: Vec<f64> = av.iter().zip(&u).map(|(x, y)| x - sigma * y).collect();
        assert!(norm(&resid) <= 1e-12 * sigma);
    }
}

#[test]
fn l1_lmo_examples_and_vertex_search() {
    assert_eq!(lmo_l1_ball(&[0.5, -2.0], 2.0), vec![0.0, 2.0]);
    assert_eq!(lmo_l1_ball(&[0.0, 0.0], 1.0), vec![-1.0, 0.0]);
    assert_eq!(lmo_l1_ball(&[1.0, 1.0], 1.0), vec![-1.0, 0.0]);
    let mut rng = StreamRng::from_seed(2);
    for d in 1..=10 {
        for _ in 0..50 {
            let g = random_vec(&mut rng, d, 1.0);
            let s = lmo_l1_ball(&g, 1.5);
            let best = (0..2 * d)
                .map(|i| {
                    let mut v = vec![0.0; d];
                    v[i / 2] = if i % 2 == 0 { 1.5 } else { -1.5 };
                    dot(&g, &v)
                })
                .fold(f64::INFINITY, f64::min);
            assert!(dot(&g, &s) <= best);
        }
    }
}

#[test]
fn nuclear_lmo_example_and_monte_carlo() {
    let mut rng = StreamRng::from_seed(4);
    let s = lmo_nuclear_ball(Matrix::diag(&[1.0, -3.0]).as_slice(), 2, 2, 1.0, 1e-12, 100_000, &mut rng).unwrap();
    assert!(dist(&s, &[0.0, 0.0, 0.0, 1.0]) < 1e-9);
    let set = SetDescriptor::nuclear(5, 4, 2.0).unwrap();
    for _ in 0..5 {
        let g = random_vec(&mut rng, 20, 1.0);
        let s = set.lmo_vec(&g, &mut rng).unwrap();
        let sigma = jacobi_svd(&g, 5, 4, 1e-12, 60).unwrap().s[0];
        assert!(dot(&g, &s) <= -2.0 * sigma * (1.0 - 1e-9));
        for _ in 0..1000 {
            let sp = set.boundary_point(&mut rng);
            assert!(dot(&g, &s) <= dot(&g, &sp) + 1e-6);
        }
    }
}

#[test]
fn lmo_beats_random_feasible_points_for_every_kind() {
    let mut rng = StreamRng::from_seed(9);
    for set in sets() {
        for _ in 0..20 {
            let g = random_vec(&mut rng, set.dim(), 1.0);
            let mut s = vec![0.0; set.dim()];
            set.minimize(&g, &mut rng, &mut s).unwrap();
            assert!(set.residual(&s).unwrap() <= 1e-8);
            for _ in 0..100 {
                let x = set.random_point(&mut rng);
                assert!(dot(&g, &s) <= dot(&g, &x) + 1e-9);
            }
        }
    }
}

#[test]
fn wrong_dimension_is_rejected() {
    let set = SetDescriptor::l1(3, 1.0).unwrap();
    let mut out = [0.0; 2];
    assert!(set.project(&[1.0, 2.0], &mut out).is_err());
}

proptest! {
    #[test]
    fn l1_projection_is_feasible_and_idempotent(
        x in proptest::collection::vec(-5.0f64..5.0, 1..12),
        r in 0.1f64..3.0,
    ) {
        let p = project_l1_ball(&x, r);
        prop_assert!(norm1(&p) <= r * (1.0 + 1e-12));
        let q = project_l1_ball(&p, r);
        prop_assert!(dist(&p, &q) <= 1e-12);
    }

    #[test]
    fn l2_projection_is_nonexpansive(
        a in proptest::collection::vec(-5.0f64..5.0, 4),
        b in proptest::collection::vec(-5.0f64..5.0, 4),
        r in 0.1f64..3.0,
    ) {
        let pa = project_l2_ball(&a, r);
        let pb = project_l2_ball(&b, r);
        prop_assert!(dist(&pa, &pb) <= dist(&a, &b) + 1e-12);
    }

    #[test]
    fn l1_lmo_hits_a_vertex(g in proptest::collection::vec(-5.0f64..5.0, 1..12), r in 0.1f64..3.0) {
        let s = lmo_l1_ball(&g, r);
        prop_assert_eq!(s.iter().filter(|v| **v != 0.0).count(), 1);
        prop_assert!((norm1(&s) - r).abs() <= 1e-15);
    }
}
