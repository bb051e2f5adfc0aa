use k3kit::counting::{
    lambert_coefficients, log_derivative_series, product_expansion, CountProfile, PowerSeries,
};
use k3kit::lattice::{make_lattice, pair, reflect, Lattice, LatticeVector};
use k3kit::orbit::{canonicalize_root, random_isometry, random_root};
use k3kit::period::{compose_h, random_point, split_h, tube_embed, TubeForm};
use k3kit::rational::{format_rational, parse_rational, rat, rat_frac, Rational};
use nalgebra::DVector;
use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::Zero;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ambient() -> Lattice {
    make_lattice("U^2+E8(-1)").unwrap()
}

/// Fixed seed unless `PROPTEST_RNG_SEED` asks for another.
fn config() -> ProptestConfig {
    let mut c = ProptestConfig::with_cases(64);
    if std::env::var_os("PROPTEST_RNG_SEED").is_none() {
        c.rng_seed = RngSeed::Fixed(20240229);
    }
    c
}

fn int_vec(lat: &Lattice, c: &[i64]) -> LatticeVector {
    lat.int_vector(c).unwrap()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn rational_text_round_trip(n in -10_000i64..10_000, d in 1i64..500) {
        let r = rat_frac(n, d);
        prop_assert_eq!(parse_rational(&format_rational(&r)), Some(r));
    }

    #[test]
    fn reflections_are_involutive_isometries(seed in any::<u64>(), x in prop::collection::vec(-9i64..=9, 12), y in prop::collection::vec(-9i64..=9, 12)) {
        let lat = ambient();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_root(&lat, &mut rng, 4).unwrap();
        let (x, y) = (int_vec(&lat, &x), int_vec(&lat, &y));
        let (rx, ry) = (reflect(&d, &x).unwrap(), reflect(&d, &y).unwrap());
        prop_assert_eq!(pair(&rx, &ry).unwrap(), pair(&x, &y).unwrap());
        prop_assert_eq!(reflect(&d, &rx).unwrap(), x);
    }

    #[test]
    fn random_words_preserve_the_form(seed in any::<u64>(), len in 0usize..12, x in prop::collection::vec(-9i64..=9, 12)) {
        let lat = ambient();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random_isometry(&lat, &mut rng, len).unwrap();
        let x = int_vec(&lat, &x);
        prop_assert_eq!(w.apply(&x).unwrap().norm(), x.norm());
    }

    #[test]
    fn roots_canonicalize_with_replayable_certificates(seed in any::<u64>(), size in 1i64..25) {
        let lat = ambient();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = random_root(&lat, &mut rng, size).unwrap();
        prop_assert_eq!(r.norm(), rat(-2));
        let cert = canonicalize_root(&r).unwrap();
        prop_assert!(cert.replays());
        let mut want = vec![0i64; lat.rank()];
        want[0] = 1;
        want[1] = -1;
        prop_assert_eq!(cert.output, int_vec(&lat, &want));
    }

    #[test]
    fn product_log_derivative_is_lambert(a in prop::collection::vec(-50i64..=50, 1..25)) {
        let lat = make_lattice("U").unwrap();
        let l = int_vec(&lat, &[1, 1]);
        let a: Vec<BigInt> = a.into_iter().map(BigInt::from).collect();
        let profile = CountProfile::synthetic(&lat, l, a.clone());
        let lhs = product_expansion(&profile, &Rational::zero()).neg_log_derivative().unwrap();
        let rhs = log_derivative_series(&profile);
        prop_assert_eq!(lhs.coeffs(), rhs.coeffs());
        prop_assert_eq!(lhs.coeffs(), &lambert_coefficients(&a)[..]);
    }

    #[test]
    fn series_multiplication_commutes(a in prop::collection::vec(-20i64..=20, 1..15), b in prop::collection::vec(-20i64..=20, 1..15)) {
        let order = 12;
        let s = |v: Vec<i64>| PowerSeries::new(rat(0), v.into_iter().map(BigInt::from).collect(), order).unwrap();
        let (x, y) = (s(a), s(b));
        prop_assert_eq!(x.mul(&y), y.mul(&x));
    }

    #[test]
    fn tube_points_are_isotropic(
        x in prop::collection::vec((-40i64..=40, 1i64..=6), 10),
        y in prop::collection::vec((-3i64..=3, 1i64..=6), 8),
        h in (1i64..=30, 1i64..=30),
    ) {
        let lat = make_lattice("U+E8(-1)").unwrap();
        let form = TubeForm::new(&lat).unwrap();
        let mut im: Vec<Rational> = vec![rat(h.0 + 4), rat(h.1 + 4)];
        im.extend(y.iter().map(|&(n, d)| rat_frac(n, d)));
        prop_assume!(form.in_cone(&im));
        let w: Vec<Complex<Rational>> =
            x.iter().zip(&im).map(|(&(n, d), b)| Complex::new(rat_frac(n, d), b.clone())).collect();
        let psi = tube_embed(&form, &w).unwrap();
        prop_assert!(form.ambient_pair(&psi, &psi).is_zero());
    }

    #[test]
    fn split_round_trip(seed in any::<u64>(), i in 0usize..3, j in 3usize..8, s in 0.5f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pt = random_point(&mut rng, 3, 5, 0.3).unwrap();
        // e_i + e_j is isotropic and pairs to 2 with e_i - e_j
        let (mut u1, mut u2) = (DVector::zeros(8), DVector::zeros(8));
        let r = std::f64::consts::FRAC_1_SQRT_2;
        u1[i] = s * r;
        u1[j] = s * r;
        u2[i] = r / s;
        u2[j] = -r / s;
        let split = split_h(&pt, &u1, &u2).unwrap();
        prop_assert!(split.lambda > 0.0);
        let back = compose_h(&split, &u1, &u2).unwrap();
        prop_assert!((back.tau() - pt.tau()).amax() < 1e-9);
    }
}
