use multmap::field::{format_scalar, hom_check, parse_scalar, recognize_hom, Field, Hom, RingHom, Scalar};
use multmap::mapexpr::{canonical_eq, eval, random_expr, simplify, FormOracle};
use multmap::matrix::Matrix;
use multmap::slword::{decompose_gl, decompose_sl, default_pool, random_gl, random_sl};
use multmap::verify::{check_multiplicative, FuzzConfig};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn field_strategy() -> impl Strategy<Value = Field> {
    prop_oneof![Just(Field::Rational), (0usize..5).prop_map(|i| Field::quadratic([2, 3, 5, -1, -7][i]).unwrap())]
}

fn rat() -> impl Strategy<Value = BigRational> {
    (-40i64..40, 1i64..9).prop_map(|(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q)))
}

fn scalar_in(f: Field) -> impl Strategy<Value = Scalar> {
    (rat(), rat()).prop_map(move |(a, b)| match f {
        Field::Rational => f.rational(a),
        Field::Quadratic(_) => f.quad(a, b).unwrap(),
    })
}

fn three_scalars() -> impl Strategy<Value = (Scalar, Scalar, Scalar)> {
    field_strategy().prop_flat_map(|f| (scalar_in(f), scalar_in(f), scalar_in(f)))
}

fn int_matrix(n: usize) -> impl Strategy<Value = Matrix> {
    proptest::collection::vec(-3i64..4, n * n).prop_map(move |v| {
        let rows: Vec<Vec<Scalar>> = v.chunks(n).map(|r| r.iter().map(|&x| Field::Rational.int(x)).collect()).collect();
        Matrix::from_rows(Field::Rational, rows).unwrap()
    })
}

fn int_matrix_pair() -> impl Strategy<Value = (Matrix, Matrix)> {
    (2usize..6).prop_flat_map(|n| (int_matrix(n), int_matrix(n)))
}

proptest! {
    #[test]
    fn field_axioms((x, y, z) in three_scalars()) {
        prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert_eq!(&x + &y, &y + &x);
        prop_assert_eq!(&x * &y, &y * &x);
        if !x.is_zero() {
            prop_assert!((&x * &x.inv().unwrap()).is_one());
        }
    }

    #[test]
    fn conjugation_is_an_involutive_hom((x, y, _) in three_scalars()) {
        let c = Hom::Conjugation;
        if x.field().is_quadratic() {
            prop_assert_eq!(c.apply(&c.apply(&x)), x.clone());
            prop_assert_eq!(c.apply(&(&x + &y)), &c.apply(&x) + &c.apply(&y));
            prop_assert_eq!(c.apply(&(&x * &y)), &c.apply(&x) * &c.apply(&y));
            prop_assert!((&x * &c.apply(&x)).is_rational());
        }
    }

    #[test]
    fn scalar_text_round_trip((x, _, _) in three_scalars()) {
        prop_assert_eq!(parse_scalar(&format_scalar(&x), x.field()).unwrap(), x);
    }

    #[test]
    fn rational_homs_are_rigid(xs in proptest::collection::vec(rat(), 1..6), c in 2i64..7) {
        let f = Field::Rational;
        let mut table: Vec<(Scalar, Scalar)> = vec![(f.one(), f.one())];
        table.extend(xs.iter().map(|x| (f.rational(x.clone()), f.rational(x.clone()))));
        prop_assert_eq!(recognize_hom(&table), RingHom::Identity);
        let scaled: Vec<(Scalar, Scalar)> =
            vec![(f.one(), f.int(c)), (f.int(2), f.int(2 * c))];
        prop_assert!(!hom_check(&RingHom::Sampled(scaled.clone()), &scaled));
    }

    #[test]
    fn cofactor_identities((a, b) in int_matrix_pair()) {
        let n = a.n();
        let ca = a.cofactor().unwrap();
        prop_assert_eq!((&a * &b).cofactor().unwrap(), &ca * &b.cofactor().unwrap());
        prop_assert_eq!(&a * &ca.transpose(), Matrix::identity(Field::Rational, n).scalar_mul(&a.det()));
        let d = a.det().pow(n as i64 - 2);
        if let Ok(d) = d {
            prop_assert_eq!(ca.cofactor().unwrap(), a.scalar_mul(&d));
        }
    }

    #[test]
    fn sl_round_trip(n in 2usize..6, len in 0usize..30, seed in any::<u64>(), q in any::<bool>()) {
        let f = if q { Field::quadratic(3).unwrap() } else { Field::Rational };
        let a = random_sl(n, len, &default_pool(f), seed);
        let w = decompose_sl(&a).unwrap();
        prop_assert_eq!(w.product(f, n).unwrap(), a);
        prop_assert!(w.len() <= n * n + n - 2);
    }

    #[test]
    fn gl_round_trip(n in 2usize..5, seed in any::<u64>()) {
        let a = random_gl(n, 8, &default_pool(Field::Rational), seed);
        prop_assert_eq!(decompose_gl(&a).unwrap().product(n).unwrap(), a);
    }

    #[test]
    fn simplify_agrees_with_eval(n in 2usize..5, depth in 1usize..5, seed in any::<u64>(), q in any::<bool>()) {
        let f = if q { Field::quadratic(2).unwrap() } else { Field::Rational };
        let e = random_expr(n, f, depth, seed);
        let form = simplify(&e).unwrap();
        prop_assert!(canonical_eq(&form, &form));
        prop_assert!(canonical_eq(&form, &simplify(&e).unwrap()));
        let fo = FormOracle { form: &form, n, field: f };
        let a = random_gl(n, 2 * n, &default_pool(f), seed ^ 1);
        prop_assert_eq!(eval(&e, &a).unwrap(), multmap::oracle::MapOracle::evaluate(&fo, &a).unwrap());
    }

    #[test]
    fn random_expressions_are_multiplicative(seed in 0u64..1000) {
        let f = Field::Rational;
        let e = random_expr(3, f, 3, seed);
        let cfg = FuzzConfig::new(f, seed).with_pairs(10);
        prop_assert!(check_multiplicative(&e, &cfg).unwrap().pass);
    }
}
