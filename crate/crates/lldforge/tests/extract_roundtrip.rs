use lldforge::exactalg::{Field, Mat};
use lldforge::extract::{gallery, run_extraction, verify_equivalence_certificate, ExtractOptions, GalleryName};
use lldforge::ldb::{make_quadratic_ext, make_quaternion, QuadraticKind};
use lldforge::matspace::MatSpace;
use lldforge::twisted::{build_twisted, hyperplane_space, nonisotropic_hyperplane, TwistedSpace};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_invertible(f: &Field, n: usize, rng: &mut StdRng) -> Mat {
    loop {
        let m = Mat::from_fn(f, n, n, |_, _| f.from_i64(rng.random_range(-3..=3)));
        if m.rank() == n {
            return m;
        }
    }
}

fn scrambled(t: &TwistedSpace, alpha: i64, seed: u64) -> (MatSpace, MatSpace) {
    let f = t.field().clone();
    let mut rng = StdRng::seed_from_u64(seed);
    let n = 2 * t.d();
    let (p, q) = (random_invertible(&f, n, &mut rng), random_invertible(&f, n, &mut rng));
    let h = nonisotropic_hyperplane(t, &f.from_i64(alpha)).unwrap();
    let hs = hyperplane_space(t, &h).unwrap();
    (t.space.apply_equivalence(&p, &q).unwrap(), hs.apply_equivalence(&p, &q).unwrap())
}

#[test]
fn gaussian_alpha_three() {
    let f = Field::Q;
    let t = build_twisted(&make_quadratic_ext(&f, QuadraticKind::Kummer(f.from_i64(-1))).unwrap()).unwrap();
    for seed in 0..3 {
        let (s, h) = scrambled(&t, 3, seed);
        let run = run_extraction(&s, &h, ExtractOptions { mrk_height: 2 });
        assert!(run.transcript.iter().all(|l| l.pass), "{:?}", run.transcript);
        let ex = run.outcome.unwrap();
        assert_eq!(ex.algebra.dim(), 2);
        assert!(ex.algebra.q_certificate.is_some());
        assert!(verify_equivalence_certificate(&s, &ex.algebra, &ex.certificate));
    }
}

#[test]
fn quaternion_alpha_minus_one() {
    let f = Field::Q;
    let m1 = f.from_i64(-1);
    let t = build_twisted(&make_quaternion(&f, &m1, &m1).unwrap()).unwrap();
    let (s, h) = scrambled(&t, -1, 7);
    let run = run_extraction(&s, &h, ExtractOptions { mrk_height: 1 });
    assert!(run.transcript.iter().all(|l| l.pass), "{:?}", run.transcript);
    let ex = run.outcome.unwrap();
    assert_eq!(ex.algebra.dim(), 4);
    assert!(verify_equivalence_certificate(&s, &ex.algebra, &ex.certificate));
}

#[test]
fn hyperplane_containing_kernel_generator_fails() {
    let f = Field::Q;
    let t = build_twisted(&make_quadratic_ext(&f, QuadraticKind::Kummer(f.from_i64(-1))).unwrap()).unwrap();
    // A ⊕ K(1,0) holds isotropic vectors (0,1,0): rank 2 < 4
    let e = |i| lldforge::exactalg::vecops::unit(&f, 4, i);
    let h = MatSpace::new(&f, 4, 4, vec![t.gamma(&e(0)), t.gamma(&e(1)), t.gamma(&e(2))]).unwrap();
    let run = run_extraction(&t.space, &h, ExtractOptions { mrk_height: 1 });
    assert!(run.outcome.is_err());
    let last = run.transcript.last().unwrap();
    assert!(!last.pass);
    assert!(["h-min-rank", "kernel-meets-h"].contains(&last.stage), "{last:?}");
}

#[test]
fn gallery_eight_by_eight() {
    for name in [GalleryName::Alt8, GalleryName::Oct8] {
        let e = gallery(name).unwrap();
        assert!(!e.nonsingular.is_isotropic());
    }
}
