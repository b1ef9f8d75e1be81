//! Multiplicative maps as compositions of canonical atoms.
//!
//! Every multiplicative map `M_n(F) → M_n(F)` that is not trivial has the
//! shape `A ↦ λ(det A)·R⁻¹·ε(φ(A))·R`, where `φ` acts entrywise, `ε` is
//! either nothing or the cofactor map and `λ` is a multiplicative function
//! on `F*`. [`simplify`] folds an arbitrary [`MapExpr`] into that shape.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{hom_apply, Field, Hom, RingHom, Scalar};
use crate::matrix::{block_diag, Matrix};
use crate::oracle::{check_input, MapOracle};
use crate::slword::{random_gl_with, rng};

/// A closed-form multiplicative function `x ↦ ∏ hom_i(x)^{p_i}` on `F*`.
///
/// Factors are merged per hom and zero powers dropped, so equality is
/// structural. The empty product is the constant 1.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScalarCharacter {
    factors: BTreeMap<Hom, i64>,
}

impl ScalarCharacter {
    pub fn one() -> ScalarCharacter {
        ScalarCharacter::default()
    }

    pub fn power(h: Hom, p: i64) -> ScalarCharacter {
        ScalarCharacter::from_factors([(h, p)])
    }

    pub fn from_factors(factors: impl IntoIterator<Item = (Hom, i64)>) -> ScalarCharacter {
        let mut map = BTreeMap::new();
        for (h, p) in factors {
            *map.entry(h).or_insert(0) += p;
        }
        map.retain(|_, p| *p != 0);
        ScalarCharacter { factors: map }
    }

    pub fn factors(&self) -> impl Iterator<Item = (Hom, i64)> + '_ {
        self.factors.iter().map(|(h, p)| (*h, *p))
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn max_abs_power(&self) -> i64 {
        self.factors.values().map(|p| p.abs()).max().unwrap_or(0)
    }

    pub fn valid_for(&self, field: Field) -> bool {
        self.factors.keys().all(|h| h.valid_for(field))
    }

    pub fn mul(&self, other: &ScalarCharacter) -> ScalarCharacter {
        ScalarCharacter::from_factors(self.factors().chain(other.factors()))
    }

    pub fn pow(&self, e: i64) -> ScalarCharacter {
        ScalarCharacter::from_factors(self.factors().map(|(h, p)| (h, p * e)))
    }

    /// `self ∘ inner`: `∏_h ∏_g (h∘g)^{p_h·q_g}`.
    pub fn compose(&self, inner: &ScalarCharacter) -> ScalarCharacter {
        ScalarCharacter::from_factors(
            self.factors().flat_map(|(h, p)| inner.factors().map(move |(g, q)| (h.compose(g), p * q))),
        )
    }

    /// `ψ ∘ self`.
    pub fn after_hom(&self, psi: Hom) -> ScalarCharacter {
        ScalarCharacter::power(psi, 1).compose(self)
    }

    pub fn apply(&self, x: &Scalar) -> Result<Scalar> {
        let mut acc = x.field().one();
        for (h, p) in self.factors() {
            acc = &acc * &h.apply(x).pow(p)?;
        }
        Ok(acc)
    }
}

/// An invertible matrix together with its inverse.
#[derive(Clone, Debug)]
pub struct Conjugator {
    r: Matrix,
    r_inv: Matrix,
}

impl Conjugator {
    pub fn new(r: Matrix) -> Result<Conjugator> {
        let r_inv = r.inverse().map_err(|_| Error::SingularConjugator)?;
        Ok(Conjugator { r, r_inv })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.r
    }

    pub fn inverse(&self) -> &Matrix {
        &self.r_inv
    }

    /// `R⁻¹·A·R`.
    pub fn apply(&self, a: &Matrix) -> Matrix {
        a.conjugate_by(&self.r, &self.r_inv)
    }
}

impl PartialEq for Conjugator {
    fn eq(&self, other: &Conjugator) -> bool {
        self.r == other.r
    }
}

impl Eq for Conjugator {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MapAtom {
    /// `A ↦ R⁻¹AR`.
    Conj(Conjugator),
    /// `A ↦ C(A)`, the cofactor matrix.
    Cof,
    /// `A ↦ (φ(a_ij))`.
    Hom(Hom),
    /// `A ↦ λ(det A)·A` on invertibles, `0` on singular matrices.
    DetScale(ScalarCharacter),
    /// `A ↦ diag(λ_1(det A), …, λ_l(det A), 0_zero_pad, I_one_pad)`, with
    /// the character block zero on singular matrices.
    TrivialDet { chars: Vec<ScalarCharacter>, zero_pad: usize, one_pad: usize },
}

impl MapAtom {
    pub fn conj(r: Matrix) -> Result<MapAtom> {
        Ok(MapAtom::Conj(Conjugator::new(r)?))
    }
}

/// A composition of atoms. `atoms[0]` is applied last:
/// `eval(e, A) = atoms[0](atoms[1](…atoms[m−1](A)))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapExpr {
    n: usize,
    field: Field,
    atoms: Vec<MapAtom>,
}

impl MapExpr {
    pub fn new(n: usize, field: Field, atoms: Vec<MapAtom>) -> Result<MapExpr> {
        if n == 0 {
            return Err(Error::DimensionMismatch("domain dimension must be at least 1".into()));
        }
        for (idx, atom) in atoms.iter().enumerate() {
            match atom {
                MapAtom::Conj(c) => {
                    if c.matrix().n() != n {
                        return Err(Error::DimensionMismatch(format!(
                            "conjugator is {}x{}, expression acts on {n}x{n}",
                            c.matrix().n(),
                            c.matrix().n()
                        )));
                    }
                    if c.matrix().field() != field {
                        return Err(Error::FieldMismatch("conjugator field".into()));
                    }
                }
                MapAtom::Cof if n < 2 => {
                    return Err(Error::DimensionMismatch("cofactor atom needs n >= 2".into()));
                }
                MapAtom::Cof => {}
                MapAtom::Hom(h) => {
                    if !h.valid_for(field) {
                        return Err(Error::UnregisteredHom(format!("{} over {field}", h.name())));
                    }
                }
                MapAtom::DetScale(ch) => {
                    if !ch.valid_for(field) {
                        return Err(Error::UnregisteredHom(format!("character over {field}")));
                    }
                }
                MapAtom::TrivialDet { chars, .. } => {
                    if idx != 0 {
                        return Err(Error::TrivialNotOutermost);
                    }
                    if chars.iter().any(|c| !c.valid_for(field)) {
                        return Err(Error::UnregisteredHom(format!("character over {field}")));
                    }
                }
            }
        }
        if let Some(MapAtom::TrivialDet { chars, zero_pad, one_pad }) = atoms.first() {
            if chars.len() + zero_pad + one_pad == 0 {
                return Err(Error::DimensionMismatch("trivial-det atom with empty codomain".into()));
            }
        }
        Ok(MapExpr { n, field, atoms })
    }

    pub fn identity(n: usize, field: Field) -> MapExpr {
        MapExpr { n, field, atoms: Vec::new() }
    }

    pub fn atom(n: usize, field: Field, atom: MapAtom) -> Result<MapExpr> {
        MapExpr::new(n, field, vec![atom])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn atoms(&self) -> &[MapAtom] {
        &self.atoms
    }

    /// Codomain dimension.
    pub fn k(&self) -> usize {
        match self.atoms.first() {
            Some(MapAtom::TrivialDet { chars, zero_pad, one_pad }) => chars.len() + zero_pad + one_pad,
            _ => self.n,
        }
    }
}

pub fn eval(e: &MapExpr, a: &Matrix) -> Result<Matrix> {
    check_input(e, a)?;
    let field = e.field;
    let mut x = a.clone();
    for atom in e.atoms.iter().rev() {
        x = match atom {
            MapAtom::Conj(c) => c.apply(&x),
            MapAtom::Cof => x.cofactor()?,
            MapAtom::Hom(h) => x.apply_hom(*h),
            MapAtom::DetScale(ch) => {
                let d = x.det();
                if d.is_zero() {
                    Matrix::zero(field, x.n())
                } else {
                    x.scalar_mul(&ch.apply(&d)?)
                }
            }
            MapAtom::TrivialDet { chars, zero_pad, one_pad } => {
                let d = x.det();
                if d.is_zero() || chars.is_empty() {
                    block_diag(field, None, chars.len() + zero_pad, *one_pad)
                } else {
                    let diag = chars.iter().map(|c| c.apply(&d)).collect::<Result<Vec<_>>>()?;
                    block_diag(field, Some(&Matrix::diagonal(field, diag)), *zero_pad, *one_pad)
                }
            }
        };
    }
    Ok(x)
}

impl MapOracle for MapExpr {
    fn field(&self) -> Field {
        self.field
    }

    fn domain_dim(&self) -> usize {
        self.n
    }

    fn codomain_dim(&self) -> usize {
        self.k()
    }

    fn evaluate(&self, a: &Matrix) -> Result<Matrix> {
        eval(self, a)
    }
}

/// `f ∘ g`: apply `g`, then `f`.
pub fn compose(f: &MapExpr, g: &MapExpr) -> Result<MapExpr> {
    if f.field != g.field {
        return Err(Error::FieldMismatch(format!("{} vs {}", f.field, g.field)));
    }
    if g.k() != f.n {
        return Err(Error::DimensionMismatch(format!(
            "inner map lands in dimension {}, outer map expects {}",
            g.k(),
            f.n
        )));
    }
    if matches!(g.atoms.first(), Some(MapAtom::TrivialDet { .. })) && !f.atoms.is_empty() {
        return Err(Error::TrivialNotOutermost);
    }
    let atoms = f.atoms.iter().chain(&g.atoms).cloned().collect();
    MapExpr::new(g.n, g.field, atoms)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Eps {
    Plain,
    Cofactor,
}

/// A multiplicative function on `F*`: closed form, or a probe table when
/// no closed form fits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Lambda {
    Character(ScalarCharacter),
    Sampled(Vec<(Scalar, Scalar)>),
}

impl Lambda {
    pub fn apply(&self, x: &Scalar) -> Result<Scalar> {
        match self {
            Lambda::Character(c) => c.apply(x),
            Lambda::Sampled(table) => table
                .iter()
                .find(|(p, _)| p == x)
                .map(|(_, y)| y.clone())
                .ok_or_else(|| Error::ProbeMiss(x.to_string())),
        }
    }

    pub fn is_sampled(&self) -> bool {
        matches!(self, Lambda::Sampled(_))
    }
}

/// The three classes of multiplicative map, with their parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CanonicalForm {
    /// `A ↦ diag(λ_1(det A), …, λ_l(det A), 0_zero_pad, I_one_pad)`.
    Trivial { chars: Vec<Lambda>, zero_pad: usize, one_pad: usize },
    /// `A ↦ λ(det A)·R⁻¹·ε(φ(A))·R` on invertibles, `0` on singulars.
    Degenerate { lambda: Lambda, phi: RingHom, r: Matrix, eps: Eps },
    /// `A ↦ R⁻¹·ε(φ(A))·R` everywhere.
    NonDegenerate { phi: RingHom, r: Matrix, eps: Eps },
}

impl CanonicalForm {
    pub fn class_name(&self) -> &'static str {
        match self {
            CanonicalForm::Trivial { .. } => "trivial",
            CanonicalForm::Degenerate { .. } => "degenerate",
            CanonicalForm::NonDegenerate { .. } => "nondegenerate",
        }
    }

    /// Codomain dimension for inputs of dimension `n`.
    pub fn codomain_dim(&self, n: usize) -> usize {
        match self {
            CanonicalForm::Trivial { chars, zero_pad, one_pad } => chars.len() + zero_pad + one_pad,
            _ => n,
        }
    }

    pub fn has_samples(&self) -> bool {
        match self {
            CanonicalForm::Trivial { chars, .. } => chars.iter().any(Lambda::is_sampled),
            CanonicalForm::Degenerate { lambda, phi, .. } => lambda.is_sampled() || phi.registered().is_none(),
            CanonicalForm::NonDegenerate { phi, .. } => phi.registered().is_none(),
        }
    }

    pub fn eval(&self, a: &Matrix) -> Result<Matrix> {
        let field = a.field();
        match self {
            CanonicalForm::Trivial { chars, zero_pad, one_pad } => {
                let d = a.det();
                if d.is_zero() || chars.is_empty() {
                    return Ok(block_diag(field, None, chars.len() + zero_pad, *one_pad));
                }
                let diag = chars.iter().map(|c| c.apply(&d)).collect::<Result<Vec<_>>>()?;
                Ok(block_diag(field, Some(&Matrix::diagonal(field, diag)), *zero_pad, *one_pad))
            }
            CanonicalForm::Degenerate { lambda, phi, r, eps } => {
                let d = a.det();
                if d.is_zero() {
                    return Ok(Matrix::zero(field, a.n()));
                }
                let core = form_core(a, phi, r, *eps)?;
                Ok(core.scalar_mul(&lambda.apply(&d)?))
            }
            CanonicalForm::NonDegenerate { phi, r, eps } => form_core(a, phi, r, *eps),
        }
    }

    /// The unique representative for inputs of dimension `n`: the
    /// conjugator is normalized, and for `n = 2`, where `C(A) = J·A·J⁻¹`
    /// with `J = [[0, 1], [−1, 0]]`, the cofactor flag is traded for `R ← J·R`.
    pub fn canonical(self, n: usize) -> CanonicalForm {
        let fix = |r: Matrix, eps: Eps| {
            if n == 2 && eps == Eps::Cofactor {
                let f = r.field();
                let j = Matrix::from_ints(f, &[&[0, 1], &[-1, 0]]).expect("2x2");
                ((&j * &r).normalized(), Eps::Plain)
            } else {
                (r.normalized(), eps)
            }
        };
        match self {
            CanonicalForm::Degenerate { lambda, phi, r, eps } => {
                let (r, eps) = fix(r, eps);
                CanonicalForm::Degenerate { lambda, phi, r, eps }
            }
            CanonicalForm::NonDegenerate { phi, r, eps } => {
                let (r, eps) = fix(r, eps);
                CanonicalForm::NonDegenerate { phi, r, eps }
            }
            t => t,
        }
    }
}

fn form_core(a: &Matrix, phi: &RingHom, r: &Matrix, eps: Eps) -> Result<Matrix> {
    let mapped = match phi.registered() {
        Some(h) => a.apply_hom(h),
        None => {
            let entries = a.entries().iter().map(|x| hom_apply(phi, x)).collect::<Result<Vec<_>>>()?;
            Matrix::new(a.field(), a.n(), entries)?
        }
    };
    let inner = match eps {
        Eps::Plain => mapped,
        Eps::Cofactor => mapped.cofactor()?,
    };
    let r_inv = r.inverse().map_err(|_| Error::SingularConjugator)?;
    Ok(inner.conjugate_by(r, &r_inv))
}

/// A canonical form viewed as an oracle on `n×n` inputs.
pub struct FormOracle<'a> {
    pub form: &'a CanonicalForm,
    pub n: usize,
    pub field: Field,
}

impl MapOracle for FormOracle<'_> {
    fn field(&self) -> Field {
        self.field
    }

    fn domain_dim(&self) -> usize {
        self.n
    }

    fn codomain_dim(&self) -> usize {
        self.form.codomain_dim(self.n)
    }

    fn evaluate(&self, a: &Matrix) -> Result<Matrix> {
        check_input(self, a)?;
        self.form.eval(a)
    }
}

/// Structural equality; conjugators are compared projectively.
pub fn canonical_eq(c1: &CanonicalForm, c2: &CanonicalForm) -> bool {
    use CanonicalForm::*;
    match (c1, c2) {
        (Trivial { chars: a, zero_pad: za, one_pad: oa }, Trivial { chars: b, zero_pad: zb, one_pad: ob }) => {
            a == b && za == zb && oa == ob
        }
        (Degenerate { lambda: la, phi: pa, r: ra, eps: ea }, Degenerate { lambda: lb, phi: pb, r: rb, eps: eb }) => {
            la == lb && pa == pb && ea == eb && ra.normalized() == rb.normalized()
        }
        (NonDegenerate { phi: pa, r: ra, eps: ea }, NonDegenerate { phi: pb, r: rb, eps: eb }) => {
            pa == pb && ea == eb && ra.normalized() == rb.normalized()
        }
        _ => false,
    }
}

/// Rewrite a composition into canonical form.
///
/// Atoms are folded innermost first into an accumulator
/// `A ↦ λ(det A)·R⁻¹·ε(φ(A))·R`, each step applying one exact identity:
///
/// * `Conj(S)`: `R ← R·S`
/// * `Hom(ψ)`: `φ ← ψ∘φ`, `λ ← ψ∘λ`, `R ← ψ(R)`
/// * `Cof`: `R ← C(R)`, `λ ← λ^{n−1}`, and `ε` flips; undoing an earlier
///   cofactor contributes `det(φ(A))^{n−2} = φ(det A)^{n−2}`
/// * `DetScale(μ)`: `λ ← λ·(μ∘D)` with `D(x) = λ(x)^n·φ(x)^e` the
///   determinant of the accumulated map, `e = 1` or `n−1`
/// * `TrivialDet(c_i)`: characters `c_i∘D`
///
/// so the final `λ` always takes `det A` itself as argument.
pub fn simplify(e: &MapExpr) -> Result<CanonicalForm> {
    let n = e.n;
    let field = e.field;
    let mut lambda = ScalarCharacter::one();
    let mut phi = Hom::Identity;
    let mut r = Matrix::identity(field, n);
    let mut eps = Eps::Plain;
    let mut degenerate = false;
    let det_character = |lambda: &ScalarCharacter, phi: Hom, eps: Eps| {
        let e = match eps {
            Eps::Plain => 1,
            Eps::Cofactor => n as i64 - 1,
        };
        lambda.pow(n as i64).mul(&ScalarCharacter::power(phi, e))
    };
    for atom in e.atoms.iter().rev() {
        match atom {
            MapAtom::Conj(c) => r = &r * c.matrix(),
            MapAtom::Hom(psi) => {
                lambda = lambda.after_hom(*psi);
                phi = psi.compose(phi);
                r = r.apply_hom(*psi);
            }
            MapAtom::Cof => {
                lambda = lambda.pow(n as i64 - 1);
                r = r.cofactor()?;
                eps = match eps {
                    Eps::Plain => Eps::Cofactor,
                    Eps::Cofactor => {
                        lambda = lambda.mul(&ScalarCharacter::power(phi, n as i64 - 2));
                        if n >= 3 {
                            degenerate = true;
                        }
                        Eps::Plain
                    }
                };
            }
            MapAtom::DetScale(mu) => {
                let d = det_character(&lambda, phi, eps);
                lambda = lambda.mul(&mu.compose(&d));
                degenerate = true;
            }
            MapAtom::TrivialDet { chars, zero_pad, one_pad } => {
                let d = det_character(&lambda, phi, eps);
                return Ok(CanonicalForm::Trivial {
                    chars: chars.iter().map(|c| Lambda::Character(c.compose(&d))).collect(),
                    zero_pad: *zero_pad,
                    one_pad: *one_pad,
                });
            }
        }
    }
    let phi = RingHom::from(phi);
    let form = if degenerate {
        CanonicalForm::Degenerate { lambda: Lambda::Character(lambda), phi, r, eps }
    } else {
        debug_assert!(lambda.is_one());
        CanonicalForm::NonDegenerate { phi, r, eps }
    };
    Ok(form.canonical(n))
}

/// Largest absolute exponent among the characters of a form.
pub fn max_power(form: &CanonicalForm) -> i64 {
    let of = |l: &Lambda| match l {
        Lambda::Character(c) => c.max_abs_power(),
        Lambda::Sampled(_) => 0,
    };
    match form {
        CanonicalForm::Trivial { chars, .. } => chars.iter().map(of).max().unwrap_or(0),
        CanonicalForm::Degenerate { lambda, .. } => of(lambda),
        CanonicalForm::NonDegenerate { .. } => 0,
    }
}

fn random_character(rng: &mut impl Rng, field: Field) -> ScalarCharacter {
    let mut factors = vec![(Hom::Identity, rng.gen_range(-2..=2))];
    if field.is_quadratic() && rng.gen_bool(0.5) {
        factors.push((Hom::Conjugation, rng.gen_range(-2..=2)));
    }
    ScalarCharacter::from_factors(factors)
}

fn conjugator_pool(field: Field) -> Vec<Scalar> {
    let mut pool = vec![field.int(1), field.int(-1), field.int(2), field.ratio(1, 2)];
    pool.extend(field.sqrt_d());
    pool
}

/// A random expression of exactly `depth` atoms. A trivial-det atom, when
/// drawn, is placed outermost.
pub fn random_expr(n: usize, field: Field, depth: usize, seed: u64) -> MapExpr {
    let mut rng = rng(seed);
    let pool = conjugator_pool(field);
    let mut atoms = Vec::with_capacity(depth);
    for idx in 0..depth {
        let choice = rng.gen_range(0..if idx == 0 { 9 } else { 8 });
        let atom = match choice {
            0 | 1 => MapAtom::conj(random_gl_with(&mut rng, field, n, 3, &pool)).expect("random_gl is invertible"),
            2 | 3 if n >= 2 => MapAtom::Cof,
            4 | 5 => {
                let homs: &[Hom] =
                    if field.is_quadratic() { &[Hom::Identity, Hom::Conjugation] } else { &[Hom::Identity] };
                MapAtom::Hom(*homs.choose(&mut rng).expect("nonempty"))
            }
            8 => {
                let l = rng.gen_range(0..=n);
                let zero_pad = rng.gen_range(0..=n - l);
                let one_pad = n - l - zero_pad;
                let chars = (0..l).map(|_| random_character(&mut rng, field)).collect();
                if l + zero_pad + one_pad == 0 {
                    MapAtom::Cof
                } else {
                    MapAtom::TrivialDet { chars, zero_pad, one_pad }
                }
            }
            _ => MapAtom::DetScale(random_character(&mut rng, field)),
        };
        atoms.push(atom);
    }
    MapExpr::new(n, field, atoms).expect("well-formed random expression")
}

/// Like [`random_expr`], but redraws until every character of the
/// simplified form has exponents of absolute value at most `max_abs_power`.
pub fn random_expr_bounded(n: usize, field: Field, depth: usize, seed: u64, max_abs_power: i64) -> MapExpr {
    (0u64..)
        .map(|attempt| random_expr(n, field, depth, seed.wrapping_mul(1_000_003).wrapping_add(attempt)))
        .find(|e| simplify(e).is_ok_and(|f| max_power(&f) <= max_abs_power))
        .expect("unbounded search")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{coidempotent, rank_idempotent};
    use crate::slword::{default_pool, random_gl, random_singular};

    fn q2() -> Field {
        Field::quadratic(2).unwrap()
    }

    fn samples(field: Field, n: usize, seed: u64) -> Vec<Matrix> {
        let pool = default_pool(field);
        let mut out: Vec<Matrix> = (0..6).map(|i| random_gl(n, 4, &pool, seed + i)).collect();
        out.extend((0..4).map(|i| random_singular(n, 4, &pool, seed + 100 + i)));
        out.push(Matrix::zero(field, n));
        out
    }

    #[test]
    fn character_algebra() {
        let c = ScalarCharacter::from_factors([(Hom::Identity, 2), (Hom::Conjugation, -1), (Hom::Identity, -2)]);
        assert_eq!(c, ScalarCharacter::power(Hom::Conjugation, -1));
        let d = ScalarCharacter::from_factors([(Hom::Identity, 3), (Hom::Conjugation, 1)]);
        // σ^-1 ∘ (id^3 σ) = σ^-3 id^-1
        assert_eq!(c.compose(&d), ScalarCharacter::from_factors([(Hom::Conjugation, -3), (Hom::Identity, -1)]));
        let f = q2();
        let x = &f.int(1) + &f.sqrt_d().unwrap();
        assert_eq!(d.apply(&x).unwrap(), &x.pow(3).unwrap() * &x.conjugate());
        assert!(ScalarCharacter::one().apply(&x).unwrap().is_one());
    }

    #[test]
    fn conj_atom_evaluates() {
        let f = Field::Rational;
        let r = Matrix::from_ints(f, &[&[1, 2], &[0, 1]]).unwrap();
        let e = MapExpr::atom(2, f, MapAtom::conj(r.clone()).unwrap()).unwrap();
        let a = Matrix::from_ints(f, &[&[3, 1], &[4, 1]]).unwrap();
        assert_eq!(eval(&e, &a).unwrap(), &(&r.inverse().unwrap() * &a) * &r);
        assert!(matches!(MapAtom::conj(Matrix::zero(f, 2)), Err(Error::SingularConjugator)));
    }

    #[test]
    fn cof_on_coidempotent() {
        let f = Field::Rational;
        let e = MapExpr::atom(3, f, MapAtom::Cof).unwrap();
        assert_eq!(eval(&e, &coidempotent(f, 3, 1).unwrap()).unwrap(), Matrix::unit(f, 3, 0, 0));
    }

    #[test]
    fn detscale_vanishes_on_singular() {
        let f = q2();
        let e = MapExpr::new(
            3,
            f,
            vec![MapAtom::DetScale(ScalarCharacter::power(Hom::Identity, 2)), MapAtom::Hom(Hom::Conjugation)],
        )
        .unwrap();
        let a = rank_idempotent(f, 3, 2).unwrap();
        assert!(eval(&e, &a).unwrap().is_zero());
    }

    #[test]
    fn construction_errors() {
        let f = Field::Rational;
        assert!(matches!(MapExpr::atom(2, f, MapAtom::Hom(Hom::Conjugation)), Err(Error::UnregisteredHom(_))));
        assert!(MapExpr::atom(1, f, MapAtom::Cof).is_err());
        let t = MapAtom::TrivialDet { chars: vec![], zero_pad: 1, one_pad: 0 };
        assert!(matches!(MapExpr::new(2, f, vec![MapAtom::Cof, t.clone()]), Err(Error::TrivialNotOutermost)));
        let g = MapExpr::atom(2, f, t).unwrap();
        let cof = MapExpr::atom(1, f, MapAtom::Hom(Hom::Identity)).unwrap();
        assert!(matches!(compose(&cof, &g), Err(Error::TrivialNotOutermost)));
        let a3 = MapExpr::identity(3, f);
        assert!(matches!(compose(&a3, &MapExpr::identity(2, f)), Err(Error::DimensionMismatch(_))));
        let a = Matrix::identity(f, 3);
        assert!(matches!(eval(&MapExpr::identity(2, f), &a), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn composition_examples() {
        let f = Field::Rational;
        let pool = default_pool(f);
        let cof = MapExpr::atom(3, f, MapAtom::Cof).unwrap();
        let cc = compose(&cof, &cof).unwrap();
        for a in samples(f, 3, 5) {
            assert_eq!(eval(&cc, &a).unwrap(), a.scalar_mul(&a.det()));
        }
        let r = random_gl(3, 4, &pool, 1);
        let s = random_gl(3, 4, &pool, 2);
        let cr = MapExpr::atom(3, f, MapAtom::conj(r.clone()).unwrap()).unwrap();
        let cs = MapExpr::atom(3, f, MapAtom::conj(s.clone()).unwrap()).unwrap();
        let sr = MapExpr::atom(3, f, MapAtom::conj(&s * &r).unwrap()).unwrap();
        let both = compose(&cr, &cs).unwrap();
        for a in samples(f, 3, 9) {
            assert_eq!(eval(&both, &a).unwrap(), eval(&sr, &a).unwrap());
        }
        let id = MapExpr::identity(3, f);
        assert_eq!(compose(&cr, &id).unwrap(), cr);
    }

    #[test]
    fn simplify_double_cofactor() {
        let f = Field::Rational;
        let cof = MapExpr::atom(3, f, MapAtom::Cof).unwrap();
        let form = simplify(&compose(&cof, &cof).unwrap()).unwrap();
        let expect = CanonicalForm::Degenerate {
            lambda: Lambda::Character(ScalarCharacter::power(Hom::Identity, 1)),
            phi: RingHom::Identity,
            r: Matrix::identity(f, 3),
            eps: Eps::Plain,
        };
        assert!(canonical_eq(&form, &expect), "{form:?}");
        let cof2 = MapExpr::atom(2, f, MapAtom::Cof).unwrap();
        let form2 = simplify(&compose(&cof2, &cof2).unwrap()).unwrap();
        assert!(canonical_eq(
            &form2,
            &CanonicalForm::NonDegenerate { phi: RingHom::Identity, r: Matrix::identity(f, 2), eps: Eps::Plain }
        ));
    }

    #[test]
    fn simplify_conj_cof_conj() {
        let f = Field::Rational;
        let pool = default_pool(f);
        let r = random_gl(3, 4, &pool, 11);
        let s = random_gl(3, 4, &pool, 12);
        let e = MapExpr::new(
            3,
            f,
            vec![MapAtom::conj(r.clone()).unwrap(), MapAtom::Cof, MapAtom::conj(s.clone()).unwrap()],
        )
        .unwrap();
        let form = simplify(&e).unwrap();
        let expect = CanonicalForm::NonDegenerate {
            phi: RingHom::Identity,
            r: (&s.cofactor().unwrap() * &r).normalized(),
            eps: Eps::Cofactor,
        };
        assert!(canonical_eq(&form, &expect));
        for a in samples(f, 3, 3) {
            assert_eq!(form.eval(&a).unwrap(), eval(&e, &a).unwrap());
        }
    }

    #[test]
    fn simplify_double_conjugation() {
        let f = q2();
        let e = MapExpr::new(3, f, vec![MapAtom::Hom(Hom::Conjugation), MapAtom::Hom(Hom::Conjugation)]).unwrap();
        assert!(canonical_eq(
            &simplify(&e).unwrap(),
            &CanonicalForm::NonDegenerate { phi: RingHom::Identity, r: Matrix::identity(f, 3), eps: Eps::Plain }
        ));
    }

    #[test]
    fn canonical_eq_examples() {
        let f = Field::Rational;
        let r = Matrix::from_ints(f, &[&[2, 1], &[1, 1]]).unwrap();
        let a = CanonicalForm::NonDegenerate { phi: RingHom::Identity, r: r.clone(), eps: Eps::Plain };
        let b = CanonicalForm::NonDegenerate { phi: RingHom::Identity, r: r.scalar_mul(&f.int(3)), eps: Eps::Plain };
        let c = CanonicalForm::NonDegenerate { phi: RingHom::Identity, r, eps: Eps::Cofactor };
        assert!(canonical_eq(&a, &a));
        assert!(canonical_eq(&a, &b));
        assert!(!canonical_eq(&a, &c));
    }

    #[test]
    fn trivial_det_depends_only_on_determinant() {
        let f = Field::Rational;
        let t = MapAtom::TrivialDet {
            chars: vec![ScalarCharacter::power(Hom::Identity, 2), ScalarCharacter::one()],
            zero_pad: 1,
            one_pad: 1,
        };
        let e = MapExpr::atom(3, f, t).unwrap();
        assert_eq!(e.k(), 4);
        let a = Matrix::diagonal(f, vec![f.int(6), f.one(), f.one()]);
        let b = Matrix::from_ints(f, &[&[1, 2, 0], &[0, 3, 1], &[0, 0, 2]]).unwrap();
        assert_eq!(a.det(), b.det());
        assert_eq!(eval(&e, &a).unwrap(), eval(&e, &b).unwrap());
        let z = eval(&e, &rank_idempotent(f, 3, 2).unwrap()).unwrap();
        assert_eq!(z, Matrix::diagonal(f, vec![f.zero(), f.zero(), f.zero(), f.one()]));
    }

    #[test]
    fn random_exprs_simplify_faithfully() {
        for (seed, field) in [(1u64, Field::Rational), (2, q2()), (3, q2()), (4, Field::Rational)] {
            for n in 2..=4 {
                for depth in 1..=5 {
                    let e = random_expr_bounded(n, field, depth, seed * 100 + depth as u64, 6);
                    let form = simplify(&e).unwrap();
                    for a in samples(field, n, seed) {
                        assert_eq!(form.eval(&a).unwrap(), eval(&e, &a).unwrap(), "{e:?}");
                    }
                }
            }
        }
    }
}
