//! Transvection words for SL(n, F), `D_1(det)·word` factorizations of
//! GL(n, F), and seeded random group elements for probing.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{Field, Scalar};
use crate::matrix::{diag_unit, elementary, rank_idempotent, transvection, ElementaryGen, Matrix};

/// A product of transvections, read left to right.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TransvectionWord {
    pub gens: Vec<ElementaryGen>,
}

impl TransvectionWord {
    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn product(&self, field: Field, n: usize) -> Result<Matrix> {
        self.gens.iter().try_fold(Matrix::identity(field, n), |acc, g| Ok(&acc * &elementary(g, field, n)?))
    }
}

/// `A = D_1(det_scalar)·product(word)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlFactorization {
    pub det_scalar: Scalar,
    pub word: TransvectionWord,
}

impl GlFactorization {
    pub fn product(&self, n: usize) -> Result<Matrix> {
        let field = self.det_scalar.field();
        Ok(&diag_unit(field, n, 1, self.det_scalar.clone()) * &self.word.product(field, n)?)
    }
}

/// Write a determinant-one matrix as a word in transvections.
///
/// Row operations `E_t⋯E_1·A = I` reduce `A` to the identity, so the word
/// is `E_1⁻¹⋯E_t⁻¹`. Each column is given a unit pivot by adding a lower
/// row (never swapping), then cleared. The word has at most `n² + n − 2`
/// letters.
pub fn decompose_sl(a: &Matrix) -> Result<TransvectionWord> {
    let n = a.n();
    let field = a.field();
    if n < 2 {
        return Err(Error::DimensionMismatch("decompose_sl needs n >= 2".into()));
    }
    let det = a.det();
    if !det.is_one() {
        return Err(Error::NotSpecialLinear(det.to_string()));
    }
    let mut rows = a.rows();
    let mut ops: Vec<(usize, usize, Scalar)> = Vec::new();
    // rows[target] += k * rows[source]
    let mut row_add = |rows: &mut Vec<Vec<Scalar>>, target: usize, source: usize, k: Scalar| {
        if k.is_zero() {
            return;
        }
        for c in 0..n {
            let v = &rows[target][c] + &(&k * &rows[source][c]);
            rows[target][c] = v;
        }
        ops.push((target, source, k));
    };
    for c in 0..n {
        if c + 1 < n && !rows[c][c].is_one() {
            let below = (c + 1..n).find(|&r| !rows[r][c].is_zero());
            let src = match below {
                Some(r) => r,
                None => {
                    // only the pivot itself is nonzero; copy it downwards first
                    row_add(&mut rows, c + 1, c, field.one());
                    c + 1
                }
            };
            let k = (&field.one() - &rows[c][c]).checked_div(&rows[src][c])?;
            row_add(&mut rows, c, src, k);
        }
        debug_assert!(rows[c][c].is_one());
        for r in 0..n {
            if r != c && !rows[r][c].is_zero() {
                let k = -&rows[r][c];
                row_add(&mut rows, r, c, k);
            }
        }
    }
    let gens = ops.into_iter().map(|(t, s, k)| ElementaryGen::Transvection { i: t + 1, j: s + 1, k: -k }).collect();
    Ok(TransvectionWord { gens })
}

pub fn decompose_gl(a: &Matrix) -> Result<GlFactorization> {
    let det = a.det();
    if det.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let n = a.n();
    let a0 = &diag_unit(a.field(), n, 1, det.inv()?) * a;
    Ok(GlFactorization { det_scalar: det, word: decompose_sl(&a0)? })
}

/// `{±1, ±2, ±1/2, 3}`, plus `√d` and `1 + √d` over a quadratic field.
pub fn default_pool(field: Field) -> Vec<Scalar> {
    let mut pool = vec![
        field.int(1),
        field.int(-1),
        field.int(2),
        field.int(-2),
        field.ratio(1, 2),
        field.ratio(-1, 2),
        field.int(3),
    ];
    if let Some(s) = field.sqrt_d() {
        pool.push(&field.one() + &s);
        pool.push(s);
    }
    pool
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn random_transvection(rng: &mut impl Rng, field: Field, n: usize, pool: &[Scalar]) -> Matrix {
    let i = rng.gen_range(1..=n);
    let mut j = rng.gen_range(1..n);
    if j >= i {
        j += 1;
    }
    let k = pool.choose(rng).expect("nonempty pool").clone();
    transvection(field, n, i, j, k)
}

pub(crate) fn random_sl_with(rng: &mut impl Rng, field: Field, n: usize, length: usize, pool: &[Scalar]) -> Matrix {
    let mut m = Matrix::identity(field, n);
    if n < 2 {
        return m;
    }
    for _ in 0..length {
        m = &m * &random_transvection(rng, field, n, pool);
    }
    m
}

pub(crate) fn random_gl_with(rng: &mut impl Rng, field: Field, n: usize, length: usize, pool: &[Scalar]) -> Matrix {
    let left = random_sl_with(rng, field, n, length / 2, pool);
    let i = rng.gen_range(1..=n);
    let k = pool.choose(rng).expect("nonempty pool").clone();
    let right = random_sl_with(rng, field, n, length - length / 2, pool);
    &(&left * &diag_unit(field, n, i, k)) * &right
}

pub(crate) fn random_singular_with(
    rng: &mut impl Rng,
    field: Field,
    n: usize,
    length: usize,
    pool: &[Scalar],
) -> Matrix {
    let r = rng.gen_range(0..n);
    let left = random_gl_with(rng, field, n, length, pool);
    let right = random_gl_with(rng, field, n, length, pool);
    &(&left * &rank_idempotent(field, n, r).expect("r < n")) * &right
}

pub(crate) fn random_unitriangular_with(rng: &mut impl Rng, field: Field, n: usize, pool: &[Scalar]) -> Matrix {
    let mut m = Matrix::identity(field, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(0.8) {
                m.set(i, j, pool.choose(rng).expect("nonempty pool").clone());
            }
        }
    }
    m
}

/// Product of `length` random transvections with scalars drawn from `pool`.
pub fn random_sl(n: usize, length: usize, pool: &[Scalar], seed: u64) -> Matrix {
    let field = pool[0].field();
    random_sl_with(&mut rng(seed), field, n, length, pool)
}

/// `SL·D_i(k)·SL` with a total of `length` transvections.
pub fn random_gl(n: usize, length: usize, pool: &[Scalar], seed: u64) -> Matrix {
    let field = pool[0].field();
    random_gl_with(&mut rng(seed), field, n, length, pool)
}

/// `GL·diag(I_r, 0)·GL` with `r` uniform in `0..n`.
pub fn random_singular(n: usize, length: usize, pool: &[Scalar], seed: u64) -> Matrix {
    let field = pool[0].field();
    random_singular_with(&mut rng(seed), field, n, length, pool)
}

/// Unit upper triangular matrix with entries drawn from `pool`.
pub fn random_unitriangular(n: usize, pool: &[Scalar], seed: u64) -> Matrix {
    let field = pool[0].field();
    random_unitriangular_with(&mut rng(seed), field, n, pool)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_gives_empty_word() {
        let f = Field::Rational;
        assert!(decompose_sl(&Matrix::identity(f, 4)).unwrap().is_empty());
    }

    #[test]
    fn single_transvection() {
        let f = Field::Rational;
        let p = transvection(f, 3, 1, 2, f.ratio(3, 2));
        let w = decompose_sl(&p).unwrap();
        assert_eq!(w.gens, vec![ElementaryGen::Transvection { i: 1, j: 2, k: f.ratio(3, 2) }]);
    }

    #[test]
    fn rotation_needs_three() {
        let f = Field::Rational;
        let a = Matrix::from_ints(f, &[&[0, 1], &[-1, 0]]).unwrap();
        let w = decompose_sl(&a).unwrap();
        assert!(w.len() <= 3);
        assert_eq!(w.product(f, 2).unwrap(), a);
    }

    #[test]
    fn pivot_only_column() {
        let f = Field::Rational;
        let a = Matrix::diagonal(f, vec![f.int(2), f.ratio(1, 2), f.one()]);
        let w = decompose_sl(&a).unwrap();
        assert_eq!(w.product(f, 3).unwrap(), a);
    }

    #[test]
    fn not_special_linear() {
        let f = Field::Rational;
        let a = diag_unit(f, 2, 1, f.int(2));
        assert!(matches!(decompose_sl(&a), Err(Error::NotSpecialLinear(_))));
        assert!(matches!(decompose_gl(&Matrix::zero(f, 2)), Err(Error::SingularMatrix)));
    }

    #[test]
    fn gl_examples() {
        let f = Field::Rational;
        let d = decompose_gl(&diag_unit(f, 3, 1, f.int(5))).unwrap();
        assert_eq!(d.det_scalar, f.int(5));
        assert!(d.word.is_empty());
        let a = Matrix::diagonal(f, vec![f.int(3), f.ratio(1, 3), f.one()]);
        let d = decompose_gl(&a).unwrap();
        assert!(d.det_scalar.is_one());
        assert!(!d.word.is_empty());
        assert_eq!(d.product(3).unwrap(), a);
    }

    #[test]
    fn random_generators() {
        let f = Field::quadratic(3).unwrap();
        let pool = default_pool(f);
        assert!(random_sl(3, 0, &pool, 9).is_identity());
        assert!(random_sl(3, 20, &pool, 9).det().is_one());
        assert_eq!(random_sl(3, 20, &pool, 9), random_sl(3, 20, &pool, 9));
        let u = random_unitriangular(4, &pool, 2);
        assert!(u.is_unitriangular() && u.is_unipotent());
        assert!(!random_gl(3, 6, &pool, 4).det().is_zero());
        assert!(random_singular(3, 6, &pool, 4).det().is_zero());
    }
}
