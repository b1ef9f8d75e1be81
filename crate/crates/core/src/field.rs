//! Exact scalars over Q and quadratic extensions Q(√d).
//!
//! A [`Scalar`] carries its [`Field`] so that mixing elements of different
//! fields is caught. The checked operations report [`Error::FieldMismatch`];
//! the operator impls panic on mismatch and are meant for code that has
//! already validated its inputs (every [`Matrix`](crate::matrix::Matrix)
//! checks that its entries share one field).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// The ambient field: Q, or Q(√d) for a squarefree `d ∉ {0, 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Rational,
    Quadratic(i64),
}

impl Field {
    pub fn quadratic(d: i64) -> Result<Field> {
        if d == 0 || d == 1 {
            return Err(Error::InvalidField(format!("d = {d} is not allowed")));
        }
        if !is_squarefree(d) {
            return Err(Error::InvalidField(format!("d = {d} is not squarefree")));
        }
        Ok(Field::Quadratic(d))
    }

    pub fn validate(self) -> Result<Field> {
        match self {
            Field::Rational => Ok(self),
            Field::Quadratic(d) => Field::quadratic(d),
        }
    }

    pub fn is_quadratic(self) -> bool {
        matches!(self, Field::Quadratic(_))
    }

    pub fn zero(self) -> Scalar {
        Scalar { field: self, a: BigRational::zero(), b: BigRational::zero() }
    }

    pub fn one(self) -> Scalar {
        self.int(1)
    }

    pub fn int(self, v: i64) -> Scalar {
        Scalar { field: self, a: BigRational::from_integer(v.into()), b: BigRational::zero() }
    }

    /// `num / den`; panics if `den == 0`.
    pub fn ratio(self, num: i64, den: i64) -> Scalar {
        assert!(den != 0, "zero denominator");
        Scalar { field: self, a: BigRational::new(num.into(), den.into()), b: BigRational::zero() }
    }

    pub fn rational(self, q: BigRational) -> Scalar {
        Scalar { field: self, a: q, b: BigRational::zero() }
    }

    /// `a + b·√d`. Fails on Q when `b ≠ 0`.
    pub fn quad(self, a: BigRational, b: BigRational) -> Result<Scalar> {
        if !b.is_zero() && self == Field::Rational {
            return Err(Error::FieldMismatch("irrational part in rational field".into()));
        }
        Ok(Scalar { field: self, a, b })
    }

    /// The generator √d; `None` over Q.
    pub fn sqrt_d(self) -> Option<Scalar> {
        match self {
            Field::Rational => None,
            Field::Quadratic(_) => Some(Scalar { field: self, a: BigRational::zero(), b: BigRational::one() }),
        }
    }

    fn d(self) -> BigRational {
        match self {
            Field::Rational => BigRational::zero(),
            Field::Quadratic(d) => BigRational::from_integer(d.into()),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rational => write!(f, "Q"),
            Field::Quadratic(d) => write!(f, "Q(sqrt({d}))"),
        }
    }
}

fn is_squarefree(d: i64) -> bool {
    let mut m = d.unsigned_abs();
    let mut p = 2u64;
    while p * p <= m {
        if m.is_multiple_of(p * p) {
            return false;
        }
        if m.is_multiple_of(p) {
            m /= p;
        }
        p += 1;
    }
    true
}

/// An element `a + b·√d` of a [`Field`]. Over Q, `b` is always zero.
///
/// Both parts are reduced fractions, so derived equality is exact equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Scalar {
    field: Field,
    a: BigRational,
    b: BigRational,
}

impl Scalar {
    pub fn field(&self) -> Field {
        self.field
    }

    /// Rational part.
    pub fn a(&self) -> &BigRational {
        &self.a
    }

    /// Coefficient of √d.
    pub fn b(&self) -> &BigRational {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    fn same_field(&self, other: &Scalar) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(format!("{} vs {}", self.field, other.field)));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Scalar) -> Result<Scalar> {
        self.same_field(other)?;
        Ok(Scalar { field: self.field, a: &self.a + &other.a, b: &self.b + &other.b })
    }

    pub fn checked_sub(&self, other: &Scalar) -> Result<Scalar> {
        self.same_field(other)?;
        Ok(Scalar { field: self.field, a: &self.a - &other.a, b: &self.b - &other.b })
    }

    pub fn checked_mul(&self, other: &Scalar) -> Result<Scalar> {
        self.same_field(other)?;
        let d = self.field.d();
        let a = &self.a * &other.a + &self.b * &other.b * d;
        let b = &self.a * &other.b + &self.b * &other.a;
        Ok(Scalar { field: self.field, a, b })
    }

    pub fn checked_div(&self, other: &Scalar) -> Result<Scalar> {
        self.checked_mul(&other.inv()?)
    }

    /// Field norm `a² − d·b²`.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - &self.b * &self.b * self.field.d()
    }

    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let norm = self.norm();
        Ok(Scalar { field: self.field, a: &self.a / &norm, b: -(&self.b / &norm) })
    }

    /// Galois conjugate `a − b√d`; identity on rational elements.
    pub fn conjugate(&self) -> Scalar {
        Scalar { field: self.field, a: self.a.clone(), b: -self.b.clone() }
    }

    /// Integer power; negative exponents require a nonzero base.
    pub fn pow(&self, e: i64) -> Result<Scalar> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = self.field.one();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            e >>= 1;
            if e > 0 {
                sq = &sq * &sq;
            }
        }
        Ok(acc)
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        self.checked_add(rhs).expect("scalar field mismatch")
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self.checked_sub(rhs).expect("scalar field mismatch")
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        self.checked_mul(rhs).expect("scalar field mismatch")
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { field: self.field, a: -self.a.clone(), b: -self.b.clone() }
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        &self + &rhs
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        &self - &rhs
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        &self * &rhs
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.a)?;
        if !self.b.is_zero() {
            let sign = if self.b.is_negative() { '-' } else { '+' };
            write!(f, "{}{}*s", sign, self.b.abs())?;
        }
        Ok(())
    }
}

/// Canonical text form; `parse_scalar(&format_scalar(x), x.field())` returns `x`.
pub fn format_scalar(x: &Scalar) -> String {
    x.to_string()
}

/// Parse `rational (('+'|'-') rational '*s')?` with
/// `rational := '-'? digits ('/' digits)?`. No whitespace is accepted.
pub fn parse_scalar(text: &str, field: Field) -> Result<Scalar> {
    let mut p = ScalarParser { bytes: text.as_bytes(), pos: 0 };
    let a = p.rational()?;
    let mut b = BigRational::zero();
    if p.pos < p.bytes.len() {
        let negate = match p.bytes[p.pos] {
            b'+' => false,
            b'-' => true,
            _ => return Err(p.error("expected '+' or '-'")),
        };
        p.pos += 1;
        let coeff = p.rational()?;
        if !p.bytes[p.pos..].starts_with(b"*s") {
            return Err(p.error("expected '*s'"));
        }
        if field == Field::Rational {
            return Err(p.error("'s' is undefined over the rationals"));
        }
        p.pos += 2;
        b = if negate { -coeff } else { coeff };
        if p.pos != p.bytes.len() {
            return Err(p.error("trailing characters"));
        }
    }
    Ok(Scalar { field, a, b })
}

struct ScalarParser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl ScalarParser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Parse { position: self.pos, message: message.to_string() }
    }

    fn digits(&mut self) -> Result<BigInt> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected digits"));
        }
        let s = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii digits");
        Ok(s.parse().expect("digit string"))
    }

    fn rational(&mut self) -> Result<BigRational> {
        let negative = self.bytes.get(self.pos) == Some(&b'-');
        if negative {
            self.pos += 1;
        }
        let num = self.digits()?;
        let den = if self.bytes.get(self.pos) == Some(&b'/') {
            self.pos += 1;
            let at = self.pos;
            let den = self.digits()?;
            if den.is_zero() {
                return Err(Error::Parse { position: at, message: "zero denominator".into() });
            }
            den
        } else {
            BigInt::one()
        };
        let q = BigRational::new(num, den);
        Ok(if negative { -q } else { q })
    }
}

/// A member of the registered homomorphism family. These are the only homs
/// that may drive evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Hom {
    Identity,
    Conjugation,
}

impl Hom {
    pub fn apply(self, x: &Scalar) -> Scalar {
        match self {
            Hom::Identity => x.clone(),
            Hom::Conjugation => x.conjugate(),
        }
    }

    /// `self ∘ other`.
    pub fn compose(self, other: Hom) -> Hom {
        if self == other {
            Hom::Identity
        } else {
            Hom::Conjugation
        }
    }

    pub fn valid_for(self, field: Field) -> bool {
        self == Hom::Identity || field.is_quadratic()
    }

    pub fn name(self) -> &'static str {
        match self {
            Hom::Identity => "id",
            Hom::Conjugation => "conj",
        }
    }
}

/// A ring homomorphism `F → F`: either registered, or a finite table of
/// probe values recovered from an oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RingHom {
    Identity,
    QuadConjugation,
    Sampled(Vec<(Scalar, Scalar)>),
}

impl From<Hom> for RingHom {
    fn from(h: Hom) -> RingHom {
        match h {
            Hom::Identity => RingHom::Identity,
            Hom::Conjugation => RingHom::QuadConjugation,
        }
    }
}

impl RingHom {
    pub fn registered(&self) -> Option<Hom> {
        match self {
            RingHom::Identity => Some(Hom::Identity),
            RingHom::QuadConjugation => Some(Hom::Conjugation),
            RingHom::Sampled(_) => None,
        }
    }
}

pub fn hom_apply(h: &RingHom, x: &Scalar) -> Result<Scalar> {
    match h {
        RingHom::Identity => Ok(x.clone()),
        RingHom::QuadConjugation => {
            if !x.field().is_quadratic() {
                return Err(Error::UnregisteredHom("conjugation over Q".into()));
            }
            Ok(x.conjugate())
        }
        RingHom::Sampled(table) => {
            if let Some((_, y)) = table.iter().find(|(p, _)| p == x) {
                Ok(y.clone())
            } else if x.is_zero() || x.is_one() {
                Ok(x.clone())
            } else {
                Err(Error::ProbeMiss(x.to_string()))
            }
        }
    }
}

/// True iff `h` is additive, multiplicative and unital on every sampled pair.
/// For sampled homs, pairs whose sum or product is off-table are skipped.
pub fn hom_check(h: &RingHom, samples: &[(Scalar, Scalar)]) -> bool {
    let Some(field) = samples.first().map(|(x, _)| x.field()) else {
        return true;
    };
    match hom_apply(h, &field.one()) {
        Ok(one) if one.is_one() => {}
        Ok(_) => return false,
        Err(Error::ProbeMiss(_)) => {}
        Err(_) => return false,
    }
    for (x, y) in samples {
        let (Ok(hx), Ok(hy)) = (hom_apply(h, x), hom_apply(h, y)) else {
            if matches!(h, RingHom::Sampled(_)) {
                continue;
            }
            return false;
        };
        let (Ok(sum), Ok(prod)) = (x.checked_add(y), x.checked_mul(y)) else {
            return false;
        };
        for (arg, expect) in [(sum, &hx + &hy), (prod, &hx * &hy)] {
            match hom_apply(h, &arg) {
                Ok(v) if v == expect => {}
                Ok(_) => return false,
                Err(Error::ProbeMiss(_)) => {}
                Err(_) => return false,
            }
        }
    }
    true
}

/// All ordered pairs drawn from the domain of a probe table.
pub fn table_pairs(table: &[(Scalar, Scalar)]) -> Vec<(Scalar, Scalar)> {
    let mut pairs = Vec::with_capacity(table.len() * table.len());
    for (x, _) in table {
        for (y, _) in table {
            pairs.push((x.clone(), y.clone()));
        }
    }
    pairs
}

/// Match a probe table against the registered family, falling back to a
/// sampled hom.
pub fn recognize_hom(table: &[(Scalar, Scalar)]) -> RingHom {
    for h in [Hom::Identity, Hom::Conjugation] {
        let fits = table.iter().all(|(x, y)| h.valid_for(x.field()) && &h.apply(x) == y);
        if fits {
            return h.into();
        }
    }
    RingHom::Sampled(table.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q2() -> Field {
        Field::quadratic(2).unwrap()
    }

    #[test]
    fn fraction_addition() {
        let f = Field::Rational;
        assert_eq!(&f.ratio(1, 2) + &f.ratio(1, 3), f.ratio(5, 6));
    }

    #[test]
    fn quadratic_inverse_by_conjugate() {
        let f = q2();
        let x = &f.int(2) + &f.sqrt_d().unwrap();
        let expect = parse_scalar("1-1/2*s", f).unwrap();
        assert_eq!(x.inv().unwrap(), expect);
        assert!((&x * &x.inv().unwrap()).is_one());
    }

    #[test]
    fn inverse_of_zero_fails() {
        assert!(matches!(Field::Rational.zero().inv(), Err(Error::DivisionByZero)));
    }

    #[test]
    fn mixed_fields_rejected() {
        let x = Field::Rational.one();
        let y = q2().one();
        assert!(matches!(x.checked_add(&y), Err(Error::FieldMismatch(_))));
    }

    #[test]
    fn descriptor_validation() {
        assert!(Field::quadratic(0).is_err());
        assert!(Field::quadratic(1).is_err());
        assert!(Field::quadratic(8).is_err());
        assert!(Field::quadratic(-4).is_err());
        assert!(Field::quadratic(-1).is_ok());
        assert!(Field::quadratic(30).is_ok());
    }

    #[test]
    fn parse_examples() {
        let f = Field::Rational;
        assert_eq!(parse_scalar("3/4", f).unwrap(), f.ratio(3, 4));
        assert_eq!(parse_scalar("-6/8", f).unwrap(), f.ratio(-3, 4));
        let g = q2();
        let x = parse_scalar("1/2-5/3*s", g).unwrap();
        assert_eq!(x.a(), &BigRational::new(1.into(), 2.into()));
        assert_eq!(x.b(), &BigRational::new((-5).into(), 3.into()));
        assert_eq!(parse_scalar("1+-2*s", g).unwrap().to_string(), "1-2*s");
    }

    #[test]
    fn parse_errors_carry_position() {
        let f = Field::Rational;
        match parse_scalar("1/0", f) {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 2),
            other => panic!("unexpected {other:?}"),
        }
        for bad in ["", "-", "1/", "1 ", "a", "1+2", "1+2*t", "1/2/3"] {
            assert!(parse_scalar(bad, q2()).is_err(), "{bad:?}");
        }
        assert!(parse_scalar("1+2*s", f).is_err());
    }

    #[test]
    fn format_is_canonical() {
        let g = q2();
        assert_eq!(g.zero().to_string(), "0");
        assert_eq!(g.sqrt_d().unwrap().to_string(), "0+1*s");
        assert_eq!((-g.sqrt_d().unwrap()).to_string(), "0-1*s");
        assert_eq!(Field::Rational.ratio(-10, 4).to_string(), "-5/2");
    }

    #[test]
    fn hom_examples() {
        let f = Field::quadratic(5).unwrap();
        let x = parse_scalar("3+2*s", f).unwrap();
        assert_eq!(hom_apply(&RingHom::QuadConjugation, &x).unwrap().to_string(), "3-2*s");
        let q = Field::Rational.ratio(7, 3);
        assert_eq!(hom_apply(&RingHom::Identity, &q).unwrap(), q);
        assert!(hom_apply(&RingHom::QuadConjugation, &q).is_err());
        let t = RingHom::Sampled(vec![(Field::Rational.int(2), Field::Rational.int(2))]);
        assert!(matches!(hom_apply(&t, &Field::Rational.int(5)), Err(Error::ProbeMiss(_))));
    }

    #[test]
    fn corrupted_table_fails_check() {
        let f = Field::Rational;
        let h = RingHom::Sampled(vec![(f.int(2), f.int(3)), (f.int(4), f.int(9))]);
        assert!(!hom_check(&h, &[(f.int(2), f.int(2))]));
    }

    #[test]
    fn registered_homs_pass_check() {
        let g = q2();
        let s = g.sqrt_d().unwrap();
        let samples = vec![(s.clone(), g.int(3)), (&s + &g.one(), g.ratio(1, 2)), (s.clone(), s)];
        assert!(hom_check(&RingHom::Identity, &samples));
        assert!(hom_check(&RingHom::QuadConjugation, &samples));
    }

    #[test]
    fn recognize() {
        let g = q2();
        let s = g.sqrt_d().unwrap();
        let t = vec![(g.int(2), g.int(2)), (s.clone(), -&s)];
        assert_eq!(recognize_hom(&t), RingHom::QuadConjugation);
        let t = vec![(g.int(2), g.int(2)), (s.clone(), s.clone())];
        assert_eq!(recognize_hom(&t), RingHom::Identity);
        let t = vec![(g.int(2), g.int(4))];
        assert!(matches!(recognize_hom(&t), RingHom::Sampled(_)));
    }
}
