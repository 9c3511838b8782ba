use lyapsize::audit::monotonicity_audit;
use lyapsize::dynamics::{quotient_distance, SystemSpec};
use lyapsize::expansivity::{advance_chain, Chain, PairState};
use lyapsize::hyperspace::{hausdorff_points, induced_image, size_component, whitney_size, whitney_size_exact, SizeConfig};
use lyapsize::metric::{AmbientSpace, DenseSequence, PointSet};
use proptest::prelude::*;

fn unit_torus() -> AmbientSpace<f64> {
    AmbientSpace::flat_torus(vec![1.0, 1.0]).unwrap()
}

fn square() -> AmbientSpace<f64> {
    AmbientSpace::euclidean_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap()
}

fn pt() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..1.0f64, 2)
}

fn box_pt() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, 2)
}

fn pts(max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(pt(), 1..max)
}

fn set(points: Vec<Vec<f64>>) -> PointSet<f64> {
    PointSet::new(points, 0.0).unwrap()
}

fn slack(xs: &[f64]) -> f64 {
    8.0 * f64::EPSILON * xs.iter().fold(1.0f64, |m, x| m.max(x.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn torus_and_box_distances_are_metrics(x in pt(), y in pt(), z in pt(), bx in box_pt(), by in box_pt(), bz in box_pt()) {
        for (s, x, y, z) in [(unit_torus(), &x, &y, &z), (square(), &bx, &by, &bz)] {
            let (dxy, dyz, dxz) = (s.dist(x, y), s.dist(y, z), s.dist(x, z));
            prop_assert_eq!(s.dist(x, x), 0.0);
            prop_assert!(dxy >= 0.0);
            prop_assert_eq!(dxy, s.dist(y, x));
            prop_assert!(dxz <= dxy + dyz + slack(&[dxy, dyz]));
        }
    }

    #[test]
    fn circle_distance_is_a_metric(a in 0.0..6.0f64, b in 0.0..6.0f64, c in 0.0..6.0f64) {
        let s = AmbientSpace::circle(6.0).unwrap();
        let (x, y, z) = ([a], [b], [c]);
        prop_assert!(s.dist(&x, &y) <= 3.0);
        prop_assert_eq!(s.dist(&x, &y), s.dist(&y, &x));
        prop_assert!(s.dist(&x, &z) <= s.dist(&x, &y) + s.dist(&y, &z) + slack(&[6.0]));
    }

    #[test]
    fn size_ignores_point_order(mut a in pts(12), seed in any::<u64>()) {
        let cfg = SizeConfig::new(unit_torus(), 64).unwrap();
        let before = whitney_size_exact(&set(a.clone()), &cfg);
        let n = a.len();
        a.rotate_left((seed as usize) % n);
        a.reverse();
        prop_assert_eq!(before, whitney_size_exact(&set(a), &cfg));
    }

    #[test]
    fn size_is_monotone_and_zero_on_singletons(a in pts(10), extra in pts(6)) {
        let cfg = SizeConfig::new(unit_torus(), 64).unwrap();
        let small = set(a.clone());
        let mut b = a.clone();
        b.extend(extra);
        let big = set(b);
        prop_assert!(whitney_size_exact(&small, &cfg) <= whitney_size_exact(&big, &cfg));
        prop_assert_eq!(whitney_size(&set(vec![a[0].clone()]), &cfg).value, 0.0);
        for q in cfg.references() {
            prop_assert!(size_component(cfg.space(), &small, q) <= size_component(cfg.space(), &big, q));
        }
    }

    #[test]
    fn size_is_two_lipschitz_for_hausdorff(a in pts(10), b in pts(10)) {
        let cfg = SizeConfig::new(unit_torus(), 64).unwrap();
        let (sa, sb) = (whitney_size(&set(a.clone()), &cfg), whitney_size(&set(b.clone()), &cfg));
        let dh = hausdorff_points(cfg.space(), &a, &b);
        prop_assert!((sa.value - sb.value).abs() <= 2.0 * dh + 2.0 * sa.tail_bound + slack(&[sa.value, sb.value]));
    }

    #[test]
    fn exact_and_float_sizes_agree(a in pts(16)) {
        let cfg = SizeConfig::new(unit_torus(), 64).unwrap();
        let s = set(a);
        let f = whitney_size(&s, &cfg).value;
        let e = whitney_size_exact(&s, &cfg).to_f64();
        prop_assert!((f - e).abs() <= 1e-14 * e.abs().max(1e-300));
    }

    #[test]
    fn hausdorff_is_a_metric_on_finite_sets(a in pts(8), b in pts(8), c in pts(8)) {
        let s = unit_torus();
        let (ab, bc, ac) = (hausdorff_points(&s, &a, &b), hausdorff_points(&s, &b, &c), hausdorff_points(&s, &a, &c));
        prop_assert_eq!(hausdorff_points(&s, &a, &a), 0.0);
        prop_assert_eq!(ab, hausdorff_points(&s, &b, &a));
        prop_assert!(ac <= ab + bc + slack(&[ab, bc]));
    }

    #[test]
    fn quotient_distance_is_a_pseudometric_collapsing_lambda(x in box_pt(), y in box_pt(), z in box_pt(), l in prop::collection::vec(box_pt(), 1..6)) {
        let base = square();
        let q = |u: &[f64], v: &[f64]| quotient_distance(&base, &l, u, v).unwrap();
        let (xy, yz, xz) = (q(&x, &y), q(&y, &z), q(&x, &z));
        prop_assert_eq!(q(&x, &x), 0.0);
        prop_assert_eq!(xy, q(&y, &x));
        prop_assert!(xz <= xy + yz + slack(&[xy, yz]));
        prop_assert!(xy <= base.dist(&x, &y));
        for a in &l {
            for b in &l {
                prop_assert_eq!(q(a, b), 0.0);
            }
        }
    }

    #[test]
    fn dense_prefix_covers_within_its_density(n in 1usize..300, x in box_pt()) {
        let s = square();
        let seq = DenseSequence::new(&s);
        let prefix = seq.prefix(n);
        let nearest = prefix.iter().map(|q| s.dist(q, &x)).fold(f64::INFINITY, f64::min);
        prop_assert!(nearest <= seq.density(n));
    }

    #[test]
    fn induced_image_commutes_with_union(a in pts(8), b in pts(8)) {
        let cat = SystemSpec::<f64>::cat_map();
        let (sa, sb) = (set(a), set(b));
        let left = induced_image(&cat, &sa.union(&sb)).unwrap();
        let right = induced_image(&cat, &sa).unwrap().union(&induced_image(&cat, &sb).unwrap());
        prop_assert_eq!(left.points(), right.points());
    }

    #[test]
    fn chain_gaps_stay_below_eps_after_advancing(x in pt(), ang in 0.0..std::f64::consts::TAU, len in 1e-4..1e-2f64) {
        let cat = SystemSpec::<f64>::cat_map();
        let y = vec![x[0] + len * ang.cos(), x[1] + len * ang.sin()];
        let mut c = Chain::segment(x, y, 1e-3).unwrap();
        for _ in 0..6 {
            c = advance_chain(&cat, &c).unwrap();
            prop_assert!(c.max_gap() <= c.eps_chain());
        }
    }

    #[test]
    fn segment_chains_track_endpoint_pairs_under_the_cat_map(x in pt(), ang in 0.0..std::f64::consts::TAU, len in 1e-4..1e-2f64) {
        // a linear map sends segments to segments, so the chain diameter is the
        // endpoint distance until it reaches half the torus
        let cat = SystemSpec::<f64>::cat_map();
        let y = vec![x[0] + len * ang.cos(), x[1] + len * ang.sin()];
        let mut c = Chain::segment(x.clone(), y.clone(), 1e-2).unwrap();
        let mut wrapped = y;
        cat.space().normalize(&mut wrapped);
        let mut p = PairState::new(cat.space(), x, wrapped).unwrap();
        for _ in 0..8 {
            let d = c.diameter(cat.space());
            if d >= 0.3 {
                break;
            }
            prop_assert!((d - p.diam).abs() <= 1e-9, "{} vs {}", d, p.diam);
            c = advance_chain(&cat, &c).unwrap();
            p = p.step(&cat, true).unwrap();
        }
    }

    #[test]
    fn audit_flags_exactly_the_non_decreasing_steps(vals in prop::collection::vec(-1.0..1.0f64, 2..40)) {
        let series: Vec<(f64, f64)> = vals.iter().enumerate().map(|(i, &v)| (i as f64, v)).collect();
        let flagged = monotonicity_audit(&series, 1e-9).unwrap();
        let expected: Vec<usize> = (0..vals.len() - 1).filter(|&i| vals[i + 1] - vals[i] >= -1e-9).collect();
        prop_assert_eq!(flagged, expected);
    }
}

#[test]
fn single_precision_sizes_follow_double() {
    let cfg32 = SizeConfig::<f32>::new(AmbientSpace::flat_torus(vec![1.0f32, 1.0]).unwrap(), 32).unwrap();
    let cfg64 = SizeConfig::<f64>::new(unit_torus(), 32).unwrap();
    let a32 = PointSet::new(vec![vec![0.1f32, 0.2], vec![0.4, 0.7]], 0.0).unwrap();
    let a64 = set(vec![vec![0.1, 0.2], vec![0.4, 0.7]]);
    let (s32, s64) = (whitney_size(&a32, &cfg32).value, whitney_size(&a64, &cfg64).value);
    assert!((s32 as f64 - s64).abs() < 1e-6, "{s32} vs {s64}");
}
