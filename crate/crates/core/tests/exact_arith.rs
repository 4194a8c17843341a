use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use tiling_core::exact::{orientation, Placement, Point, Scalar, Sym};

fn rand_scalar(rng: &mut StdRng) -> Scalar {
    Scalar::q3(
        rng.gen_range(-40..=40),
        rng.gen_range(1..=12),
        rng.gen_range(-40..=40),
        rng.gen_range(1..=12),
    )
}

fn rand_point(rng: &mut StdRng) -> Point {
    Point::new(rand_scalar(rng), rand_scalar(rng))
}

#[test]
fn field_identities() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..500 {
        let (a, b, c) = (rand_scalar(&mut rng), rand_scalar(&mut rng), rand_scalar(&mut rng));
        assert_eq!(&(&a + &b) - &b, a);
        assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        if !b.is_zero() {
            assert_eq!(a.checked_div(&b).unwrap().clone() * b.clone(), a);
            assert_eq!(&b * &b.inv().unwrap(), Scalar::one());
        }
    }
}

#[test]
fn zero_division_is_an_error() {
    assert!(Scalar::int(3).checked_div(&Scalar::zero()).is_err());
    assert!(Scalar::zero().inv().is_err());
}

#[test]
fn ordering_agrees_with_floats_away_from_ties() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..2000 {
        let (a, b) = (rand_scalar(&mut rng), rand_scalar(&mut rng));
        let (x, y) = (a.to_f64(), b.to_f64());
        if (x - y).abs() > 1e-9 {
            assert_eq!(a < b, x < y, "{a} vs {b}");
        }
    }
}

#[test]
fn sign_matches_integer_squares() {
    // p + q*r3 with opposite signs: positive iff p^2 > 3 q^2 when p > 0
    for p in -30i64..=30 {
        for q in -30i64..=30 {
            let s = Scalar::q3(p, 1, q, 1);
            let want = if p >= 0 && q >= 0 {
                (p + q).signum()
            } else if p <= 0 && q <= 0 {
                -((-p - q).signum())
            } else if p > 0 {
                (p * p - 3 * q * q).signum()
            } else {
                (3 * q * q - p * p).signum()
            };
            assert_eq!(s.signum() as i64, want, "{p} + {q}*r3");
        }
    }
}

#[test]
fn literal_round_trip() {
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..300 {
        let a = rand_scalar(&mut rng);
        let back: Scalar = a.to_string().parse().unwrap();
        assert_eq!(back, a);
    }
    for bad in ["", "1.5", "1e3", "1/0", "r3", "2 +", "1 + 2*r2", "3 * r3"] {
        assert!(bad.parse::<Scalar>().is_err(), "accepted '{bad}'");
    }
}

#[test]
fn placements_form_a_group() {
    let mut rng = StdRng::seed_from_u64(5);
    let syms = Sym::all();
    assert_eq!(syms.len(), 24);
    for _ in 0..200 {
        let pick = |rng: &mut StdRng| {
            let s = syms[rng.gen_range(0..syms.len())];
            Placement::from_sym(s, rand_point(rng))
        };
        let (f, g, h) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
        let p = rand_point(&mut rng);
        assert_eq!(f.compose(&g).apply(&p), f.apply(&g.apply(&p)));
        assert_eq!(f.compose(&g).compose(&h), f.compose(&g.compose(&h)));
        assert_eq!(f.inverse().apply(&f.apply(&p)), p);
        assert_eq!(f.compose(&f.inverse()), Placement::identity());
    }
}

#[test]
fn twelve_rotations_return_home() {
    let p = Point::new(Scalar::frac(1, 3), Scalar::q3(2, 1, -1, 2));
    let r = Placement::new(1, false, Point::origin());
    let mut q = p.clone();
    for k in 1..=12 {
        q = r.apply(&q);
        assert_eq!(q == p, k == 12);
        assert_eq!(q.norm2(), p.norm2());
    }
}

#[test]
fn orientation_is_antisymmetric() {
    let mut rng = StdRng::seed_from_u64(9);
    for _ in 0..300 {
        let (a, b, c) = (rand_point(&mut rng), rand_point(&mut rng), rand_point(&mut rng));
        assert_eq!(orientation(&a, &b, &c), -orientation(&b, &a, &c));
        assert_eq!(orientation(&a, &b, &c), orientation(&b, &c, &a));
    }
    let (o, x) = (Point::origin(), Point::ints(1, 0));
    assert_eq!(orientation(&o, &x, &Point::ints(2, 0)), 0);
    assert_eq!(orientation(&o, &x, &Point::ints(0, 1)), 1);
}
