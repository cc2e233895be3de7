use std::sync::Arc;

use noma_core::analysis::{
    composite_gap, difference_scan, product_distance, scan_scheme, user_weights,
};
use noma_core::constellation::lattice_partition_alpha;
use noma_core::{
    coset_leaders, cyclotomic_lattice, demin_analytic, dpmin_lattice_partition,
    dpmin_upper_bound_with, lattice_partition_scheme, superimpose, BandVariant, CompositeScheme,
    RotatedLattice, SchemeMode,
};
use proptest::prelude::*;

const VARIANTS: [BandVariant; 2] = [BandVariant::Printed, BandVariant::Squared];

fn lattice(p: u32) -> Arc<RotatedLattice> {
    Arc::new(cyclotomic_lattice(p).unwrap())
}

fn general(l: &Arc<RotatedLattice>, m1: u32, m2: u32, alpha: f64) -> CompositeScheme {
    let c1 = coset_leaders(l.clone(), m1).unwrap();
    let c2 = coset_leaders(l.clone(), m2).unwrap();
    superimpose(&c1, &c2, alpha).unwrap()
}

fn grid(count: usize) -> Vec<f64> {
    (0..count).map(|k| k as f64 / (count - 1) as f64).collect()
}

#[test]
fn bound_dominates_exact_minimum() {
    let cases = [
        (1, 1, 5, 512),
        (2, 1, 5, 512),
        (1, 2, 5, 512),
        (2, 2, 5, 512),
        (3, 3, 5, 512),
        (1, 1, 7, 512),
        (2, 1, 7, 512),
        (1, 2, 7, 512),
        (2, 2, 7, 512),
        (3, 3, 7, 96),
    ];
    for (m1, m2, p, count) in cases {
        let l = lattice(p);
        let n = l.dim();
        for alpha in grid(count) {
            let exact = difference_scan(&l, m1, m2, SchemeMode::General, alpha)
                .unwrap()
                .dpmin;
            for v in VARIANTS {
                let bound = dpmin_upper_bound_with(m1, m2, n, p, alpha, v).unwrap();
                assert!(
                    bound >= exact - 1e-12,
                    "({m1},{m2}) p={p} alpha={alpha} {v:?}: {bound} < {exact}"
                );
            }
        }
    }
}

#[test]
fn bound_is_tight_at_lattice_partition_alpha() {
    for p in [5u32, 7] {
        let l = lattice(p);
        let n = l.dim();
        for (m1, m2) in [(1, 1), (2, 1), (1, 2), (2, 2), (3, 3)] {
            let alpha = lattice_partition_alpha(m1);
            let closed = dpmin_lattice_partition(m1, m2, n, p);
            let exact = difference_scan(&l, m1, m2, SchemeMode::General, alpha)
                .unwrap()
                .dpmin;
            let lp = difference_scan(&l, m1, m2, SchemeMode::LatticePartition, alpha)
                .unwrap()
                .dpmin;
            assert!((exact - closed).abs() < 1e-9, "({m1},{m2}) p={p}");
            assert!((lp - closed).abs() < 1e-9, "({m1},{m2}) p={p}");
            for v in VARIANTS {
                let bound = dpmin_upper_bound_with(m1, m2, n, p, alpha, v).unwrap();
                assert!((bound - closed).abs() < 1e-9, "({m1},{m2}) p={p} {v:?}");
            }
        }
    }
}

#[test]
fn difference_and_pair_scans_agree() {
    for p in [5u32, 7] {
        let l = lattice(p);
        for (m1, m2) in [(1, 1), (2, 1), (1, 2)] {
            for alpha in [
                0.0,
                0.03,
                0.2,
                lattice_partition_alpha(m1),
                0.5,
                0.61,
                0.97,
                1.0,
            ] {
                let pairs = scan_scheme(&general(&l, m1, m2, alpha)).unwrap();
                let diffs = difference_scan(&l, m1, m2, SchemeMode::General, alpha).unwrap();
                assert!(
                    (pairs.dpmin - diffs.dpmin).abs() < 1e-12,
                    "p={p} alpha={alpha}"
                );
                assert!(
                    (pairs.demin - diffs.demin).abs() < 1e-12,
                    "p={p} alpha={alpha}"
                );
            }
        }
        let lp = lattice_partition_scheme(l.clone(), 2, 1).unwrap();
        let pairs = scan_scheme(&lp).unwrap();
        let diffs = difference_scan(&l, 2, 1, SchemeMode::LatticePartition, lp.alpha()).unwrap();
        assert!((pairs.dpmin - diffs.dpmin).abs() < 1e-12);
    }
}

#[test]
fn lattice_partition_weights_nest_user_two() {
    let (w1, w2) = user_weights(2, 1, SchemeMode::LatticePartition, 0.0);
    assert!((w2 - 4.0 * w1).abs() < 1e-15);
    let alpha = lattice_partition_alpha(2);
    let (g1, g2) = user_weights(2, 1, SchemeMode::General, alpha);
    assert!((g1 - w1).abs() < 1e-12 && (g2 - w2).abs() < 1e-12);
}

#[test]
fn analytic_euclidean_distance_bounds_line_gap() {
    for (m1, m2) in [(1, 1), (2, 1), (1, 2), (2, 2), (3, 2)] {
        for alpha in grid(257) {
            let gap = composite_gap(m1, m2, alpha);
            for v in VARIANTS {
                let de = demin_analytic(m1, m2, alpha, v).unwrap();
                assert!(de >= gap - 1e-12, "({m1},{m2}) alpha={alpha} {v:?}");
            }
        }
    }
}

fn collinear_case() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, f64)> {
    (2usize..=6).prop_flat_map(|n| {
        (
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec(prop_oneof![-4.0f64..-0.01, 0.01f64..4.0], n),
            0.01f64..0.99,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn nth_root_is_additive_on_collinear_points((a, dir, t) in collinear_case()) {
        let n = a.len();
        let c: Vec<f64> = a.iter().zip(&dir).map(|(x, d)| x + d).collect();
        let b: Vec<f64> = a.iter().zip(&dir).map(|(x, d)| x + t * d).collect();
        let root = |u: &[f64], v: &[f64]| {
            let (p, l) = product_distance(u, v);
            prop_assert_eq!(l, n);
            Ok(p.powf(1.0 / n as f64))
        };
        let whole = root(&a, &c)?;
        let parts = root(&a, &b)? + root(&b, &c)?;
        prop_assert!((whole - parts).abs() <= 1e-10 * whole.max(1.0));
    }

    #[test]
    fn layer_ordering_is_gap_independent(
        p in prop::sample::select(vec![5u32, 7, 11]),
        layers in (0usize..5, 0usize..5),
        offsets in prop::collection::vec(-3i32..=3, 10),
        gaps in prop::collection::vec(0.05f64..3.0, 1..8),
    ) {
        let l = cyclotomic_lattice(p).unwrap();
        let n = l.dim();
        let (i, j) = (layers.0 % n, layers.1 % n);
        prop_assume!(i != j);
        let g = l.generator();
        let x0 = l.point(&offsets[..n].iter().map(|&v| v as f64).collect::<Vec<_>>());
        let y0 = l.point(&offsets[n..2 * n].iter().map(|&v| v as f64).collect::<Vec<_>>());
        let step = |base: &[f64], row: usize, gap: f64| -> Vec<f64> {
            base.iter().zip(g.row(row)).map(|(x, r)| x + gap * r).collect()
        };
        let mut signs = gaps.iter().map(|&gap| {
            let da = product_distance(&x0, &step(&x0, i, gap)).0;
            let db = product_distance(&y0, &step(&y0, j, gap)).0;
            if (da - db).abs() <= 1e-12 * da.max(db) { 0 } else if da < db { -1 } else { 1 }
        });
        let first = signs.next().unwrap();
        prop_assert!(signs.all(|s| s == first));
    }

    #[test]
    fn bound_is_mirror_symmetric(
        pair in prop::sample::select(vec![(1u32, 1u32), (2, 1), (1, 2), (3, 1), (2, 3)]),
        p in prop::sample::select(vec![5u32, 7, 11]),
        alpha in 0.0f64..=1.0,
    ) {
        prop_assume!((alpha - 0.5).abs() > 1e-9);
        let (m1, m2) = pair;
        let n = ((p - 1) / 2) as usize;
        for v in VARIANTS {
            let a = dpmin_upper_bound_with(m1, m2, n, p, alpha, v).unwrap();
            let b = dpmin_upper_bound_with(m2, m1, n, p, 1.0 - alpha, v).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
    }

    #[test]
    fn exact_minimum_is_mirror_symmetric(
        pair in prop::sample::select(vec![(1u32, 1u32), (2, 1), (1, 2)]),
        alpha in 0.0f64..=1.0,
    ) {
        let (m1, m2) = pair;
        let l = lattice(5);
        let a = difference_scan(&l, m1, m2, SchemeMode::General, alpha).unwrap();
        let b = difference_scan(&l, m2, m1, SchemeMode::General, 1.0 - alpha).unwrap();
        prop_assert!((a.dpmin - b.dpmin).abs() < 1e-12);
        prop_assert!((a.demin - b.demin).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn euclidean_minimum_reduces_to_one_dimension(
        setup in prop::sample::select(vec![
            (5u32, 1u32, 1u32), (5, 2, 1), (5, 1, 2), (7, 1, 1),
        ]),
        alpha in 0.0f64..=1.0,
    ) {
        let (p, m1, m2) = setup;
        let l = lattice(p);
        let de = scan_scheme(&general(&l, m1, m2, alpha)).unwrap().demin;
        let gap = composite_gap(m1, m2, alpha);
        prop_assert!((de - gap).abs() < 1e-12, "{} vs {}", de, gap);
    }
}
