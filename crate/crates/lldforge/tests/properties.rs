use lldforge::exactalg::{vecops, Field, Mat, Scalar};
use lldforge::format::{parse_mat, parse_matspace, write_mat, write_matspace};
use lldforge::ldb::{make_octonion, make_quaternion};
use lldforge::lld;
use lldforge::matspace::MatSpace;
use lldforge::suite::{flanders_instance, random_invertible};
use lldforge::twisted::build_twisted;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_fp_space(p: u64, m: usize, n: usize, dim: usize, rng: &mut StdRng) -> MatSpace {
    let f = Field::prime(p).unwrap();
    let gens: Vec<Mat> = (0..dim).map(|_| Mat::from_fn(&f, m, n, |_, _| Scalar::fp(rng.random_range(0..p), p))).collect();
    MatSpace::spanned_by(&f, m, n, &gens)
}

fn random_fp_invertible(p: u64, n: usize, rng: &mut StdRng) -> Mat {
    let f = Field::prime(p).unwrap();
    loop {
        let m = Mat::from_fn(&f, n, n, |_, _| Scalar::fp(rng.random_range(0..p), p));
        if m.rank() == n {
            return m;
        }
    }
}

fn small_vec(f: &Field, n: usize, rng: &mut StdRng) -> Vec<Scalar> {
    (0..n).map(|_| f.from_i64(rng.random_range(-3..=3))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mat_text_round_trip(seed in any::<u64>(), rows in 1usize..5, cols in 1usize..5) {
        let mut rng = StdRng::seed_from_u64(seed);
        let f7 = Field::prime(7).unwrap();
        let m = Mat::from_fn(&f7, rows, cols, |_, _| Scalar::fp(rng.random_range(0..7), 7));
        prop_assert_eq!(parse_mat(&write_mat(&m)).unwrap(), m);
        let q = Field::Q;
        let m = Mat::from_fn(&q, rows, cols, |_, _| q.from_ratio(rng.random_range(-9..=9), rng.random_range(1..=5)).unwrap());
        prop_assert_eq!(parse_mat(&write_mat(&m)).unwrap(), m);
    }

    #[test]
    fn matspace_text_round_trip(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let s = random_fp_space(5, 3, 2, 3, &mut rng);
        let back = parse_matspace(&write_matspace(&s)).unwrap();
        prop_assert_eq!(back.basis(), s.basis());
    }

    #[test]
    fn equivalence_preserves_rank_distribution(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let s = random_fp_space(3, 3, 3, 3, &mut rng);
        prop_assume!(s.dim() > 0);
        let (p, q) = (random_fp_invertible(3, 3, &mut rng), random_fp_invertible(3, 3, &mut rng));
        let t = s.apply_equivalence(&p, &q).unwrap();
        prop_assert_eq!(s.rank_histogram().unwrap(), t.rank_histogram().unwrap());
    }

    #[test]
    fn analyze_invariant_under_equivalence(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let s = random_fp_space(3, 2, 3, 3, &mut rng);
        prop_assume!(s.dim() > 0);
        let (p, q) = (random_fp_invertible(3, 2, &mut rng), random_fp_invertible(3, 3, &mut rng));
        let a = lld::analyze(&s).unwrap();
        let b = lld::analyze(&s.apply_equivalence(&p, &q).unwrap()).unwrap();
        prop_assert_eq!(a.c_max, b.c_max);
        prop_assert_eq!(a.rank_optimal_rank, b.rank_optimal_rank);
    }

    #[test]
    fn double_dual_of_reduced_space(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let s = random_fp_space(3, 3, 3, 3, &mut rng);
        prop_assume!(s.dim() > 0);
        let r = s.reduce().reduced_space;
        let dd = r.dual_space().dual_space();
        prop_assert_eq!(dd.dim(), r.dim());
        prop_assert_eq!(dd.upper_rank().unwrap(), r.upper_rank().unwrap());
    }

    #[test]
    fn upper_rank_stable_under_field_extension(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let s = random_fp_space(5, 3, 3, 2, &mut rng);
        prop_assume!(s.dim() > 0);
        let u = s.upper_rank().unwrap();
        let ext = Field::function_field(lldforge::exactalg::BaseField::Fp(5), &["t"]).unwrap();
        prop_assert_eq!(s.extend_scalars(&ext).unwrap().upper_rank().unwrap(), u);
    }

    #[test]
    fn flanders_on_random_rational_instances(seed in any::<u64>(), r in 1usize..=3) {
        let mut rng = StdRng::seed_from_u64(seed);
        let m = rng.random_range(r + 1..=5);
        let n = rng.random_range(r + 1..=5);
        let s = flanders_instance(&Field::Q, r, m, n, &mut rng);
        prop_assert!(s.upper_rank().unwrap() <= r);
        prop_assert!(s.flanders_check(r).unwrap().is_empty());
    }

    #[test]
    fn reflections_are_isometries(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let f = Field::Q;
        let m1 = f.from_i64(-1);
        let q = make_quaternion(&f, &m1, &m1).unwrap().q;
        let a = small_vec(&f, 4, &mut rng);
        prop_assume!(!vecops::is_zero(&a));
        let s = q.reflection(&a).unwrap();
        prop_assert_eq!(s.transpose().mul(&q.polar()).mul(&s), q.polar());
        prop_assert_eq!(s.mul(&s), Mat::identity(&f, 4));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn octonion_ldb_identity(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let f = Field::Q;
        let m1 = f.from_i64(-1);
        let o = make_octonion(&f, &m1, &m1, &m1).unwrap();
        let x = small_vec(&f, 8, &mut rng);
        let qx = o.q.evaluate(&x).unwrap();
        prop_assert_eq!(o.star.left(&x).mul(&o.bullet.left(&x)), Mat::identity(&f, 8).scale(&qx));
    }

    #[test]
    fn quaternion_twisted_rank_dichotomy(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let f = Field::Q;
        let m1 = f.from_i64(-1);
        let t = build_twisted(&make_quaternion(&f, &m1, &m1).unwrap()).unwrap();
        let mut v = small_vec(&f, 6, &mut rng);
        if rng.random_bool(0.5) {
            // force q̃(v) = |x|² − λμ = 0 with μ = 1
            let x2 = t.algebra.q.evaluate(&v[..4]).unwrap();
            v[4] = x2;
            v[5] = f.one();
        }
        prop_assume!(!vecops::is_zero(&v));
        let r = t.gamma(&v).rank();
        if t.qtilde.evaluate(&v).unwrap().is_zero() {
            prop_assert_eq!(r, 4);
        } else {
            prop_assert_eq!(r, 8);
        }
    }

    #[test]
    fn scrambling_keeps_twisted_ranks(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let f = Field::Q;
        let m1 = f.from_i64(-1);
        let t = build_twisted(&make_quaternion(&f, &m1, &m1).unwrap()).unwrap();
        let (p, q) = (random_invertible(&f, 8, &mut rng), random_invertible(&f, 8, &mut rng));
        let s = t.space.apply_equivalence(&p, &q).unwrap();
        let v = small_vec(&f, 6, &mut rng);
        prop_assume!(!vecops::is_zero(&v));
        prop_assert_eq!(s.element(&v).rank(), t.gamma(&v).rank());
    }
}
