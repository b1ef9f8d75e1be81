//! Sampling checks: multiplicativity, pointwise equality of two maps, and
//! the lower central series of the unitriangular group.
//!
//! Verdicts are data. A failed check returns `pass: false` with the first
//! counterexample by sample index, greedily simplified.

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{Field, Scalar};
use crate::matrix::Matrix;
use crate::oracle::MapOracle;
use crate::slword::{default_pool, random_gl_with, random_singular_with, random_unitriangular_with, rng};

#[derive(Clone, Debug)]
pub struct FuzzConfig {
    pub seed: u64,
    pub pair_count: usize,
    pub dims: Vec<usize>,
    pub scalar_pool: Vec<Scalar>,
    pub include_singular: bool,
}

impl FuzzConfig {
    /// 100 samples over `default_pool(field)` with singular matrices mixed in.
    pub fn new(field: Field, seed: u64) -> FuzzConfig {
        FuzzConfig {
            seed,
            pair_count: 100,
            dims: vec![2, 3, 4],
            scalar_pool: default_pool(field),
            include_singular: true,
        }
    }

    pub fn with_pairs(mut self, pair_count: usize) -> FuzzConfig {
        self.pair_count = pair_count;
        self
    }

    pub fn with_dims(mut self, dims: Vec<usize>) -> FuzzConfig {
        self.dims = dims;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.pair_count == 0 || self.dims.is_empty() || self.scalar_pool.is_empty() {
            return Err(Error::DimensionMismatch("fuzz config needs pair_count >= 1, dims and a scalar pool".into()));
        }
        Ok(())
    }

    fn field(&self) -> Field {
        self.scalar_pool[0].field()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub pass: bool,
    /// `(A, B)` for pair checks, `(A, None)` for pointwise ones.
    pub counterexample: Option<(Matrix, Option<Matrix>)>,
    pub samples: usize,
    pub seed: u64,
}

impl Verdict {
    fn passed(samples: usize, seed: u64) -> Verdict {
        Verdict { pass: true, counterexample: None, samples, seed }
    }
}

fn sample(g: &mut impl Rng, cfg: &FuzzConfig, n: usize) -> Matrix {
    let field = cfg.field();
    if cfg.include_singular && g.gen_ratio(1, 4) {
        random_singular_with(g, field, n, n, &cfg.scalar_pool)
    } else {
        random_gl_with(g, field, n, 2 * n, &cfg.scalar_pool)
    }
}

/// Zero entries one at a time while `fails` keeps holding.
fn shrink(m: &Matrix, mut fails: impl FnMut(&Matrix) -> Result<bool>) -> Result<Matrix> {
    let mut cur = m.clone();
    let n = cur.n();
    for i in 0..n {
        for j in 0..n {
            if cur.get(i, j).is_zero() {
                continue;
            }
            let mut next = cur.clone();
            next.set(i, j, cur.field().zero());
            if fails(&next)? {
                cur = next;
            }
        }
    }
    Ok(cur)
}

fn breaks_mult(o: &dyn MapOracle, a: &Matrix, b: &Matrix) -> Result<bool> {
    Ok(o.evaluate(&(a * b))? != &o.evaluate(a)? * &o.evaluate(b)?)
}

/// Compare `Φ(AB)` with `Φ(A)Φ(B)` on `(I, I)` and then on random pairs
/// of the oracle's dimension.
pub fn check_multiplicative(o: &dyn MapOracle, cfg: &FuzzConfig) -> Result<Verdict> {
    cfg.validate()?;
    let (field, n) = (o.field(), o.domain_dim());
    if field != cfg.field() {
        return Err(Error::FieldMismatch(format!("map over {field}, scalar pool over {}", cfg.field())));
    }
    let id = Matrix::identity(field, n);
    if breaks_mult(o, &id, &id)? {
        return Ok(Verdict { pass: false, counterexample: Some((id.clone(), Some(id))), samples: 1, seed: cfg.seed });
    }
    let mut g = rng(cfg.seed);
    for idx in 1..cfg.pair_count {
        let a = sample(&mut g, cfg, n);
        let b = sample(&mut g, cfg, n);
        if breaks_mult(o, &a, &b)? {
            let a = shrink(&a, |x| breaks_mult(o, x, &b))?;
            let b = shrink(&b, |y| breaks_mult(o, &a, y))?;
            return Ok(Verdict { pass: false, counterexample: Some((a, Some(b))), samples: idx + 1, seed: cfg.seed });
        }
    }
    Ok(Verdict::passed(cfg.pair_count, cfg.seed))
}

/// Run [`check_multiplicative`] for each `n` in `cfg.dims`, stopping at the
/// first failure. `samples` accumulates across dimensions.
pub fn check_multiplicative_dims(make: impl Fn(usize) -> Box<dyn MapOracle>, cfg: &FuzzConfig) -> Result<Verdict> {
    cfg.validate()?;
    let mut total = 0;
    for &n in &cfg.dims {
        let mut v = check_multiplicative(make(n).as_ref(), cfg)?;
        total += v.samples;
        if !v.pass {
            v.samples = total;
            return Ok(v);
        }
    }
    Ok(Verdict::passed(total, cfg.seed))
}

/// Pointwise comparison on `pair_count` sampled matrices.
pub fn check_equal(o1: &dyn MapOracle, o2: &dyn MapOracle, cfg: &FuzzConfig) -> Result<Verdict> {
    cfg.validate()?;
    if o1.domain_dim() != o2.domain_dim() || o1.codomain_dim() != o2.codomain_dim() {
        return Err(Error::DimensionMismatch(format!(
            "maps M_{} → M_{} and M_{} → M_{}",
            o1.domain_dim(),
            o1.codomain_dim(),
            o2.domain_dim(),
            o2.codomain_dim()
        )));
    }
    if o1.field() != o2.field() || o1.field() != cfg.field() {
        return Err(Error::FieldMismatch(format!("maps over {} and {}", o1.field(), o2.field())));
    }
    let differ = |a: &Matrix| -> Result<bool> { Ok(o1.evaluate(a)? != o2.evaluate(a)?) };
    let mut g = rng(cfg.seed);
    for idx in 0..cfg.pair_count {
        let a = sample(&mut g, cfg, o1.domain_dim());
        if differ(&a)? {
            let a = shrink(&a, differ)?;
            return Ok(Verdict { pass: false, counterexample: Some((a, None)), samples: idx + 1, seed: cfg.seed });
        }
    }
    Ok(Verdict::passed(cfg.pair_count, cfg.seed))
}

/// `x·y·x⁻¹·y⁻¹`.
pub fn commutator(x: &Matrix, y: &Matrix) -> Result<Matrix> {
    Ok(&(&(x * y) * &x.inverse()?) * &y.inverse()?)
}

/// Whether `m` is unitriangular with zeros on superdiagonals `1..=depth`.
pub fn in_lcs_term(m: &Matrix, depth: usize) -> bool {
    let n = m.n();
    m.is_unitriangular() && (1..=depth.min(n)).all(|d| (0..n - d.min(n)).all(|i| m.get(i, i + d).is_zero()))
}

/// Sample `pair_count` nests `[x_d, [x_{d−1}, … [x_1, x_0]]]` of random
/// unitriangular matrices and check each lies in the `depth`-th term of the
/// lower central series: the first `depth` superdiagonals vanish, so the
/// nest is `I` once `depth ≥ n − 1`.
pub fn lcs_depth_check(n: usize, depth: usize, cfg: &FuzzConfig) -> Result<Verdict> {
    cfg.validate()?;
    let field = cfg.field();
    let mut g = rng(cfg.seed);
    for idx in 0..cfg.pair_count {
        let mut c = random_unitriangular_with(&mut g, field, n, &cfg.scalar_pool);
        for _ in 0..depth {
            let x = random_unitriangular_with(&mut g, field, n, &cfg.scalar_pool);
            c = commutator(&x, &c)?;
        }
        let ok = in_lcs_term(&c, depth) && (depth + 1 < n || c.is_identity());
        if !ok {
            return Ok(Verdict { pass: false, counterexample: Some((c, None)), samples: idx + 1, seed: cfg.seed });
        }
    }
    Ok(Verdict::passed(cfg.pair_count, cfg.seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Hom;
    use crate::mapexpr::{simplify, FormOracle, MapAtom, MapExpr, ScalarCharacter};
    use crate::oracle::{adjugate, plus_identity};

    fn cfg(seed: u64) -> FuzzConfig {
        FuzzConfig::new(Field::Rational, seed).with_pairs(40)
    }

    #[test]
    fn atoms_are_multiplicative() {
        let f = Field::Rational;
        let atoms = [
            MapAtom::Cof,
            MapAtom::Hom(Hom::Identity),
            MapAtom::DetScale(ScalarCharacter::power(Hom::Identity, 2)),
            MapAtom::conj(Matrix::from_ints(f, &[&[1, 2, 0], &[0, 1, 0], &[3, 0, 1]]).unwrap()).unwrap(),
        ];
        for a in atoms {
            let e = MapExpr::atom(3, f, a).unwrap();
            assert!(check_multiplicative(&e, &cfg(1)).unwrap().pass);
        }
    }

    #[test]
    fn plus_identity_fails_on_identity_pair() {
        let f = Field::Rational;
        let v = check_multiplicative(&plus_identity(f, 3), &cfg(0)).unwrap();
        let id = Matrix::identity(f, 3);
        assert_eq!(v.counterexample, Some((id.clone(), Some(id))));
        assert_eq!(v.samples, 1);
    }

    #[test]
    fn adjugate_counterexample_is_shrunk() {
        let f = Field::Rational;
        let o = adjugate(f, 2);
        let v = check_multiplicative(&o, &cfg(3)).unwrap();
        assert!(!v.pass);
        let (a, b) = v.counterexample.unwrap();
        let b = b.unwrap();
        assert!(breaks_mult(&o, &a, &b).unwrap());
        assert!(&a * &b != &b * &a);
    }

    #[test]
    fn equality_examples() {
        let f = Field::Rational;
        let e = MapExpr::new(
            3,
            f,
            vec![
                MapAtom::Cof,
                MapAtom::conj(Matrix::from_ints(f, &[&[2, 1, 0], &[1, 1, 0], &[0, 0, 1]]).unwrap()).unwrap(),
            ],
        )
        .unwrap();
        let form = simplify(&e).unwrap();
        let fo = FormOracle { form: &form, n: 3, field: f };
        assert!(check_equal(&e, &fo, &cfg(5)).unwrap().pass);

        let plain = MapExpr::identity(3, f);
        let cof = MapExpr::atom(3, f, MapAtom::Cof).unwrap();
        let v = check_equal(&plain, &cof, &cfg(5)).unwrap();
        assert!(!v.pass);
        assert!(v.counterexample.unwrap().1.is_none());

        let r = Matrix::from_ints(f, &[&[1, 1], &[0, 1]]).unwrap();
        let c1 = MapExpr::atom(2, f, MapAtom::conj(r.clone()).unwrap()).unwrap();
        let c2 = MapExpr::atom(2, f, MapAtom::conj(r.scalar_mul(&f.int(2))).unwrap()).unwrap();
        assert!(check_equal(&c1, &c2, &cfg(5)).unwrap().pass);

        let small = MapExpr::identity(2, f);
        assert!(matches!(check_equal(&plain, &small, &cfg(5)), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn equality_is_symmetric() {
        let f = Field::Rational;
        let a = MapExpr::identity(3, f);
        let b = MapExpr::atom(3, f, MapAtom::DetScale(ScalarCharacter::one())).unwrap();
        let v1 = check_equal(&a, &b, &cfg(9)).unwrap();
        let v2 = check_equal(&b, &a, &cfg(9)).unwrap();
        assert_eq!(v1, v2);
        assert!(!v1.pass);
        assert!(check_equal(&a, &a, &cfg(9)).unwrap().pass);
    }

    #[test]
    fn lower_central_series() {
        for n in 2..=5 {
            assert!(lcs_depth_check(n, n, &cfg(2)).unwrap().pass);
        }
        assert!(lcs_depth_check(3, 3, &cfg(4)).unwrap().pass);
        assert!(lcs_depth_check(4, 2, &cfg(4)).unwrap().pass);
        assert!(lcs_depth_check(4, 0, &cfg(4)).unwrap().pass);
    }

    #[test]
    fn lcs_term_detects_nonzero_superdiagonal() {
        let f = Field::Rational;
        let m = Matrix::from_ints(f, &[&[1, 0, 1], &[0, 1, 0], &[0, 0, 1]]).unwrap();
        assert!(in_lcs_term(&m, 1));
        assert!(!in_lcs_term(&m, 2));
    }

    #[test]
    fn empty_config_rejected() {
        let f = Field::Rational;
        let c = cfg(0).with_pairs(0);
        assert!(check_multiplicative(&MapExpr::identity(2, f), &c).is_err());
    }
}
