//! Recover the canonical form of a multiplicative map from evaluation
//! access alone.
//!
//! The procedure follows the constructive structure theory:
//!
//! 1. `Φ(0)` and `Φ(I)` are commuting idempotents; a change of basis puts
//!    every image into the block form `diag(X, 0, I_s)` and the rest of the
//!    work happens on the `l×l` block `X`.
//! 2. If transvections map to the identity the map factors through the
//!    determinant; each diagonal slot is fitted by a character. This is
//!    forced whenever `l < n`.
//! 3. Otherwise the images of `D_i(−1)` are diagonalized together, the
//!    images of the swaps `S_{i,i+1}` fix the remaining diagonal freedom,
//!    `Φ(P_12(x))` reveals the cofactor flag and the ring hom `φ`, and
//!    `Φ(D_1(x))` reveals `λ`.
//! 4. A map that is nonzero on some singular matrix is recovered from the
//!    images of the matrix units, or (when those vanish) from the rank
//!    `n−1` ladder on top of step 3.
//!
//! Every consistency check that fails raises [`Error::NotMultiplicative`]
//! naming the violated relation. The result is finally compared against the
//! oracle on every logged probe and on fresh random samples.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::field::{hom_check, recognize_hom, table_pairs, Field, Hom, RingHom, Scalar};
use crate::mapexpr::{CanonicalForm, Eps, Lambda, ScalarCharacter};
use crate::matrix::{
    block_diag, coidempotent, conjugator_from_units, diag_unit, kernel_of_rows, rank_idempotent, split_idempotent_pair,
    swap, transvection, Matrix,
};
use crate::oracle::MapOracle;
use crate::slword::{default_pool, random_gl_with, random_singular_with, rng};

type Table = Vec<(Scalar, Scalar)>;

/// Largest exponent tried when fitting characters.
pub const MAX_CHARACTER_POWER: i64 = 6;

/// Scalars used to read off `φ`: `{1, 2, 3, 1/2, −1}`, plus `√d` and
/// `1 + √d` over a quadratic field.
pub fn phi_pool(field: Field) -> Vec<Scalar> {
    let mut pool = vec![field.int(1), field.int(2), field.int(3), field.ratio(1, 2), field.int(-1)];
    if let Some(s) = field.sqrt_d() {
        pool.push(s.clone());
        pool.push(&field.one() + &s);
    }
    pool
}

/// Scalars used to read off `λ`: `{2, 3, 5, −1, 1/2}`, plus `√d`, `1 + √d`
/// and `2 + √d` over a quadratic field so that `x^p·σ(x)^q` is determined
/// by its values.
pub fn lambda_pool(field: Field) -> Vec<Scalar> {
    let mut pool = vec![field.int(2), field.int(3), field.int(5), field.int(-1), field.ratio(1, 2)];
    if let Some(s) = field.sqrt_d() {
        pool.push(s.clone());
        pool.push(&field.one() + &s);
        pool.push(&field.int(2) + &s);
    }
    pool
}

/// Oracle call cap: `10·n² + 200`.
pub fn call_budget(n: usize) -> usize {
    10 * n * n + 200
}

#[derive(Clone, Debug)]
pub struct ClassifyConfig {
    pub seed: u64,
    pub fresh_invertible: usize,
    pub fresh_singular: usize,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig { seed: 0, fresh_invertible: 50, fresh_singular: 10 }
    }
}

#[derive(Clone, Debug)]
pub struct ClassifyReport {
    pub n: usize,
    pub k: usize,
    pub field: Field,
    /// `S` with `S⁻¹·Φ(A)·S = diag(X, 0, I_s)`.
    pub pre_conjugator: Matrix,
    pub s: usize,
    pub l: usize,
    pub form: CanonicalForm,
    pub hom_table: Vec<(Scalar, Scalar)>,
    pub lambda_table: Vec<(Scalar, Scalar)>,
    pub probe_log: Vec<(Matrix, Matrix)>,
    /// False when the form holds sampled tables and could not be checked on
    /// fresh inputs.
    pub verified: bool,
}

impl ClassifyReport {
    /// Evaluate the reconstructed map `A ↦ S·form(A)·S⁻¹`.
    pub fn eval(&self, a: &Matrix) -> Result<Matrix> {
        let inner = self.form.eval(a)?;
        let s_inv = self.pre_conjugator.inverse()?;
        Ok(&(&self.pre_conjugator * &inner) * &s_inv)
    }
}

impl MapOracle for ClassifyReport {
    fn field(&self) -> Field {
        self.field
    }

    fn domain_dim(&self) -> usize {
        self.n
    }

    fn codomain_dim(&self) -> usize {
        self.k
    }

    fn evaluate(&self, a: &Matrix) -> Result<Matrix> {
        self.eval(a)
    }
}

fn not_mult(msg: impl Into<String>) -> Error {
    Error::NotMultiplicative(msg.into())
}

/// Budgeted, logged access to an oracle, plus the block normalization.
struct Prober<'a> {
    oracle: &'a dyn MapOracle,
    field: Field,
    n: usize,
    k: usize,
    budget: usize,
    calls: usize,
    log: Vec<(Matrix, Matrix)>,
    cache: HashMap<Matrix, Matrix>,
    conj: Matrix,
    conj_inv: Matrix,
    s: usize,
    l: usize,
}

impl<'a> Prober<'a> {
    fn new(oracle: &'a dyn MapOracle) -> Result<Prober<'a>> {
        let (field, n, k) = (oracle.field(), oracle.domain_dim(), oracle.codomain_dim());
        if n < 2 {
            return Err(Error::UnsupportedDimension(format!("n = {n}; classification needs n >= 2")));
        }
        if k == 0 || k > n {
            return Err(Error::UnsupportedDimension(format!("k = {k} with n = {n}; need 1 <= k <= n")));
        }
        let id = Matrix::identity(field, k);
        Ok(Prober {
            oracle,
            field,
            n,
            k,
            budget: call_budget(n),
            calls: 0,
            log: Vec::new(),
            cache: HashMap::new(),
            conj: id.clone(),
            conj_inv: id,
            s: 0,
            l: k,
        })
    }

    fn raw(&mut self, a: &Matrix) -> Result<Matrix> {
        if let Some(v) = self.cache.get(a) {
            return Ok(v.clone());
        }
        if self.calls >= self.budget {
            return Err(Error::BudgetExceeded(self.budget));
        }
        self.calls += 1;
        let out = self.oracle.evaluate(a)?;
        if out.n() != self.k || out.field() != self.field {
            return Err(Error::DimensionMismatch(format!(
                "oracle returned a {}x{} matrix over {}, expected {}x{} over {}",
                out.n(),
                out.n(),
                out.field(),
                self.k,
                self.k,
                self.field
            )));
        }
        self.log.push((a.clone(), out.clone()));
        self.cache.insert(a.clone(), out.clone());
        Ok(out)
    }

    /// Block normalization from the idempotents `Φ(0)` and `Φ(I)`.
    fn normalize(&mut self) -> Result<()> {
        let p0 = self.raw(&Matrix::zero(self.field, self.n))?;
        let p1 = self.raw(&Matrix::identity(self.field, self.n))?;
        let (s_mat, s, l) = split_idempotent_pair(&p0, &p1).map_err(|e| match e {
            Error::NotCommutingIdempotents(m) => not_mult(m),
            other => other,
        })?;
        self.conj_inv = s_mat.inverse()?;
        self.conj = s_mat;
        self.s = s;
        self.l = l;
        Ok(())
    }

    /// The `l×l` working block of `S⁻¹·Φ(A)·S`, after checking that the
    /// remaining blocks are `diag(0, I_s)`.
    fn probe(&mut self, a: &Matrix) -> Result<Matrix> {
        let out = self.raw(a)?;
        let m = &(&self.conj_inv * &out) * &self.conj;
        let (k, l) = (self.k, self.l);
        let ones_from = k - self.s;
        for i in 0..k {
            for j in 0..k {
                if i < l && j < l {
                    continue;
                }
                let ok = if i == j && i >= ones_from { m.get(i, j).is_one() } else { m.get(i, j).is_zero() };
                if !ok {
                    return Err(not_mult(
                        "image is not of the form diag(X, 0, I_s) forced by Φ(0)Φ(A) = Φ(A)Φ(0) = Φ(0)",
                    ));
                }
            }
        }
        Ok(m.block(0, l))
    }
}

/// `(S, s, l)` with `s = rank Φ(0)` and `l = rank Φ(I) − rank Φ(0)`.
pub fn normalize_idempotents(o: &dyn MapOracle) -> Result<(Matrix, usize, usize)> {
    let mut p = Prober::new(o)?;
    p.normalize()?;
    Ok((p.conj, p.s, p.l))
}

/// Whether every probe transvection maps to the identity (on the working
/// block). For `l < n` a nontrivial probe image is a contradiction.
pub fn is_trivial(o: &dyn MapOracle) -> Result<bool> {
    let mut p = Prober::new(o)?;
    p.normalize()?;
    if p.l == 0 {
        return Ok(true);
    }
    probe_trivial(&mut p)
}

fn probe_trivial(p: &mut Prober) -> Result<bool> {
    let (field, n) = (p.field, p.n);
    let mut pairs = Vec::new();
    for i in 1..n {
        pairs.push((i, i + 1));
        pairs.push((i + 1, i));
    }
    if n >= 3 {
        pairs.push((1, 3));
    }
    for x in phi_pool(field) {
        for &(i, j) in &pairs {
            let img = p.probe(&transvection(field, n, i, j, x.clone()))?;
            if !img.is_identity() {
                if p.l < n {
                    return Err(not_mult(format!(
                        "map into dimension {} < {n} sends P_{i}{j}({x}) to a non-identity matrix, \
                         but such maps must be trivial",
                        p.l
                    )));
                }
                return Ok(false);
            }
        }
    }
    let s12 = p.probe(&swap(field, n, 1, 2))?;
    let d1 = p.probe(&diag_unit(field, n, 1, field.int(-1)))?;
    if s12 != d1 {
        return Err(not_mult("SL(n) maps to I but Φ(S_12) ≠ Φ(D_1(−1))"));
    }
    Ok(true)
}

/// Result of fitting a trivial map: its form and the full pre-conjugator.
#[derive(Clone, Debug)]
pub struct TrivialFit {
    pub form: CanonicalForm,
    pub pre_conjugator: Matrix,
}

/// Fit `A ↦ diag(λ_1(det A), …)` for a trivial map.
pub fn classify_trivial(o: &dyn MapOracle) -> Result<TrivialFit> {
    let mut p = Prober::new(o)?;
    p.normalize()?;
    if p.l > 0 && !probe_trivial(&mut p)? {
        return Err(not_mult("classify_trivial called on a nontrivial map"));
    }
    fit_trivial(&mut p)
}

fn fit_trivial(p: &mut Prober) -> Result<TrivialFit> {
    let (field, n, k, l, s) = (p.field, p.n, p.k, p.l, p.s);
    let zero_pad = k - l - s;
    if l == 0 {
        return Ok(TrivialFit {
            form: CanonicalForm::Trivial { chars: Vec::new(), zero_pad, one_pad: s },
            pre_conjugator: p.conj.clone(),
        });
    }
    let pool = lambda_pool(field);
    let images = pool.iter().map(|x| p.probe(&diag_unit(field, n, 1, x.clone()))).collect::<Result<Vec<_>>>()?;
    if images.iter().all(Matrix::is_diagonal) {
        let chars = (0..l)
            .map(|slot| {
                let table: Vec<(Scalar, Scalar)> =
                    pool.iter().cloned().zip(images.iter().map(|m| m.get(slot, slot).clone())).collect();
                fit_lambda(&table)
            })
            .collect();
        return Ok(TrivialFit {
            form: CanonicalForm::Trivial { chars, zero_pad, one_pad: s },
            pre_conjugator: p.conj.clone(),
        });
    }
    for (i, a) in images.iter().enumerate() {
        for b in &images[i + 1..] {
            if a * b != b * a {
                return Err(Error::NonDiagonalizableTrivial("images of D_1(x) do not commute".into()));
            }
        }
    }
    // joint eigenspaces of the images, one candidate character at a time
    let mut found: Vec<(Vec<Scalar>, ScalarCharacter)> = Vec::new();
    for cand in candidate_characters(field) {
        let values = pool.iter().map(|x| cand.apply(x)).collect::<Result<Vec<_>>>()?;
        let shifted = |m: &Matrix, v: &Scalar| m - &Matrix::identity(field, l).scalar_mul(v);
        if shifted(&images[0], &values[0]).det().is_zero() {
            let rows: Vec<Vec<Scalar>> = images.iter().zip(&values).flat_map(|(m, v)| shifted(m, v).rows()).collect();
            for v in kernel_of_rows(field, rows, l) {
                found.push((v, cand.clone()));
            }
        }
    }
    if found.len() != l {
        return Err(Error::NonDiagonalizableTrivial(format!(
            "joint eigenvectors for fitted characters span dimension {} of {l}; raw images: {}",
            found.len(),
            images
                .iter()
                .map(|m| format!(
                    "{:?}",
                    m.rows().iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>()
                ))
                .collect::<Vec<_>>()
                .join("; ")
        )));
    }
    found.sort_by_key(|(v, _)| v.iter().position(|x| !x.is_zero()));
    let cols: Vec<Vec<Scalar>> = found.iter().map(|(v, _)| v.clone()).collect();
    let q = Matrix::from_columns(field, &cols)?;
    if q.det().is_zero() {
        return Err(Error::NonDiagonalizableTrivial("joint eigenvectors are dependent".into()));
    }
    let big = block_diag(field, Some(&q), 0, k - l);
    Ok(TrivialFit {
        form: CanonicalForm::Trivial {
            chars: found.into_iter().map(|(_, c)| Lambda::Character(c)).collect(),
            zero_pad,
            one_pad: s,
        },
        pre_conjugator: &p.conj * &big,
    })
}

/// Characters `x^p·σ(x)^q` with `|p|, |q| ≤ MAX_CHARACTER_POWER`, simplest
/// first.
pub fn candidate_characters(field: Field) -> Vec<ScalarCharacter> {
    let m = MAX_CHARACTER_POWER;
    let qs: Vec<i64> = if field.is_quadratic() { (-m..=m).collect() } else { vec![0] };
    let mut out: Vec<(i64, i64)> = (-m..=m).flat_map(|p| qs.iter().map(move |&q| (p, q))).collect();
    out.sort_by_key(|&(p, q)| (p.abs() + q.abs(), p.abs(), p < 0, q.abs(), q < 0));
    out.into_iter().map(|(p, q)| ScalarCharacter::from_factors([(Hom::Identity, p), (Hom::Conjugation, q)])).collect()
}

/// Fit a probe table by a character, or keep the table.
pub fn fit_lambda(table: &[(Scalar, Scalar)]) -> Lambda {
    let Some(field) = table.first().map(|(x, _)| x.field()) else {
        return Lambda::Character(ScalarCharacter::one());
    };
    candidate_characters(field)
        .into_iter()
        .find(|c| table.iter().all(|(x, y)| c.apply(x).is_ok_and(|v| &v == y)))
        .map(Lambda::Character)
        .unwrap_or_else(|| Lambda::Sampled(table.to_vec()))
}

/// Parameters of `A ↦ λ(det A)·R⁻¹·ε(φ(A))·R` on GL(n).
struct GlParams {
    lambda: Lambda,
    phi: RingHom,
    r: Matrix,
    eps: Eps,
    hom_table: Vec<(Scalar, Scalar)>,
    lambda_table: Vec<(Scalar, Scalar)>,
}

/// Normalized view `A ↦ W⁻¹·Φ(A)·W`, times `det A` when the `D_i(−1)`
/// images had to be sign-flipped.
struct Normalized {
    w: Matrix,
    w_inv: Matrix,
    det_twist: bool,
}

impl Normalized {
    fn eval(&self, p: &mut Prober, a: &Matrix) -> Result<Matrix> {
        let img = p.probe(a)?;
        let m = img.conjugate_by(&self.w, &self.w_inv);
        Ok(if self.det_twist { m.scalar_mul(&a.det()) } else { m })
    }
}

fn gl_pipeline(p: &mut Prober) -> Result<GlParams> {
    let (field, n) = (p.field, p.n);
    let id = Matrix::identity(field, n);
    let minus = field.int(-1);

    // involutions D_i(−1)
    let mut invs = (1..=n).map(|i| p.probe(&diag_unit(field, n, i, minus.clone()))).collect::<Result<Vec<_>>>()?;
    for (i, m) in invs.iter().enumerate() {
        if !(m * m).is_identity() {
            return Err(not_mult(format!("Φ(D_{}(−1))² ≠ I", i + 1)));
        }
        for (j, o) in invs.iter().enumerate().skip(i + 1) {
            if m * o != o * m {
                return Err(not_mult(format!("Φ(D_{}(−1)) and Φ(D_{}(−1)) do not commute", i + 1, j + 1)));
            }
        }
    }
    let m = (&invs[0] + &id).kernel_basis().len();
    let det_twist = if m == 1 {
        false
    } else if m == n - 1 {
        invs = invs.iter().map(|x| x.scalar_mul(&minus)).collect();
        true
    } else {
        return Err(not_mult(format!(
            "Φ(D_1(−1)) has a (−1)-eigenspace of dimension {m}; a nontrivial map needs 1 or n−1"
        )));
    };
    let mut cols = Vec::with_capacity(n);
    for (i, inv) in invs.iter().enumerate() {
        let ker = (inv + &id).kernel_basis();
        if ker.len() != 1 {
            return Err(not_mult(format!(
                "Φ(D_{}(−1)) has a (−1)-eigenspace of dimension {} after normalization",
                i + 1,
                ker.len()
            )));
        }
        cols.push(ker.into_iter().next().expect("one vector"));
    }
    let q = Matrix::from_columns(field, &cols)?;
    let q_inv = q.inverse().map_err(|_| not_mult("images of D_i(−1) share a (−1)-eigenvector"))?;
    for (i, inv) in invs.iter().enumerate() {
        if inv.conjugate_by(&q, &q_inv) != diag_unit(field, n, i + 1, minus.clone()) {
            return Err(not_mult("images of D_i(−1) are not simultaneously diagonalizable"));
        }
    }

    // swaps S_{i,i+1} fix the diagonal freedom
    let mut t_diag = vec![field.one()];
    for i in 1..n {
        let img = p.probe(&swap(field, n, i, i + 1))?;
        let mut b = img.conjugate_by(&q, &q_inv);
        if det_twist {
            b = b.scalar_mul(&minus);
        }
        let coeff = b.get(i - 1, i).clone();
        let mut expect = swap(field, n, i, i + 1);
        if coeff.is_zero() {
            return Err(not_mult(format!("Φ(S_{}{}) has no antidiagonal block", i, i + 1)));
        }
        expect.set(i - 1, i, coeff.clone());
        expect.set(i, i - 1, coeff.inv()?);
        if b != expect {
            return Err(not_mult(format!(
                "Φ(S_{}{}) is not diag(1, …, [[0, b], [1/b, 0]], …, 1) after normalization",
                i,
                i + 1
            )));
        }
        let prev = t_diag.last().expect("nonempty").clone();
        t_diag.push(&prev * &coeff);
    }
    let t = Matrix::diagonal(field, t_diag);
    let w = &q * &t.inverse()?;
    let w_inv = w.inverse()?;
    let norm = Normalized { w, w_inv, det_twist };

    // transvections P_12(x): cofactor flag and φ
    let pool = phi_pool(field);
    let read = |m: &Matrix, eps: Option<Eps>| -> Result<(Eps, Scalar)> {
        let d = m - &id;
        let nz: Vec<(usize, usize)> =
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| !d.get(i, j).is_zero()).collect();
        match (nz.as_slice(), eps) {
            ([(0, 1)], None | Some(Eps::Plain)) => Ok((Eps::Plain, d.get(0, 1).clone())),
            ([(1, 0)], None | Some(Eps::Cofactor)) => Ok((Eps::Cofactor, -d.get(1, 0))),
            _ => Err(not_mult("Φ(P_12(x)) is not a single upper or lower transvection after normalization")),
        }
    };
    let first = norm.eval(p, &transvection(field, n, 1, 2, pool[0].clone()))?;
    let (eps, _) = read(&first, None)?;
    let mut hom_table = Vec::with_capacity(pool.len());
    for x in &pool {
        let img = norm.eval(p, &transvection(field, n, 1, 2, x.clone()))?;
        let (_, v) = read(&img, Some(eps))?;
        hom_table.push((x.clone(), v));
    }
    if !hom_table[0].1.is_one() {
        return Err(not_mult("φ(1) ≠ 1"));
    }
    let phi_of = |table: &[(Scalar, Scalar)], x: &Scalar| {
        table.iter().find(|(k, _)| k == x).map(|(_, v)| v.clone()).expect("tabulated")
    };
    let mut add_pairs = vec![(field.int(2), field.ratio(1, 2)), (field.int(3), field.int(-1))];
    let mut mul_pairs = vec![(field.int(2), field.int(3)), (field.ratio(1, 2), field.int(-1))];
    if let Some(sq) = field.sqrt_d() {
        add_pairs.push((sq.clone(), &field.one() + &sq));
        mul_pairs.push((sq.clone(), &field.one() + &sq));
    }
    for (x, y) in &add_pairs {
        let img = norm.eval(p, &transvection(field, n, 1, 2, x + y))?;
        let (_, v) = read(&img, Some(eps))?;
        if v != &phi_of(&hom_table, x) + &phi_of(&hom_table, y) {
            return Err(not_mult(format!("φ({x}+{y}) ≠ φ({x})+φ({y})")));
        }
    }
    for (x, y) in &mul_pairs {
        let prod = &phi_of(&hom_table, x) * &phi_of(&hom_table, y);
        let ok = if n >= 3 {
            // P_13(kl) = P_12(k)⁻¹·P_23(l)⁻¹·P_12(k)·P_23(l)
            let img = norm.eval(p, &transvection(field, n, 1, 3, x * y))?;
            let expect = transvection(field, n, 1, 3, prod);
            img == match eps {
                Eps::Plain => expect,
                Eps::Cofactor => expect.cofactor()?,
            }
        } else {
            let img = norm.eval(p, &transvection(field, n, 1, 2, x * y))?;
            read(&img, Some(eps))?.1 == prod
        };
        if !ok {
            return Err(not_mult(format!("φ({x}·{y}) ≠ φ({x})·φ({y}) via the P_13 commutator identity")));
        }
    }
    if !hom_check(&RingHom::Sampled(hom_table.clone()), &table_pairs(&hom_table)) {
        return Err(not_mult("φ probe table is not additive and multiplicative"));
    }

    // D_1(x): Φ(D_1(x)) = s·diag(t, 1, …, 1)
    let mut lambda_table = Vec::new();
    let mut t_table = Vec::new();
    for x in lambda_pool(field) {
        let img = norm.eval(p, &diag_unit(field, n, 1, x.clone()))?;
        let s = img.get(1, 1).clone();
        if s.is_zero() || !img.is_diagonal() || (2..n).any(|i| img.get(i, i) != &s) {
            return Err(not_mult(format!("Φ(D_1({x})) is not of the form s·diag(t, 1, …, 1)")));
        }
        let t = img.get(0, 0).checked_div(&s)?;
        let phi_x = match eps {
            Eps::Plain => t.clone(),
            Eps::Cofactor => t.inv()?,
        };
        // D_1(x)·D_2(1/x) lies in SL(n), so its image is diag(φ(x), 1/φ(x), 1, …) up to ε
        let mut dd = diag_unit(field, n, 1, x.clone());
        dd.set(1, 1, x.inv()?);
        let sl_img = norm.eval(p, &dd)?;
        let mut expect = diag_unit(field, n, 1, phi_x.clone());
        expect.set(1, 1, phi_x.inv()?);
        if eps == Eps::Cofactor {
            expect = expect.cofactor()?;
        }
        if sl_img != expect {
            return Err(not_mult(format!("Φ(D_1({x})D_2(1/{x})) ≠ diag(φ(x), 1/φ(x), 1, …): t ≠ φ(x)")));
        }
        let mut lam = match eps {
            Eps::Plain => s,
            Eps::Cofactor => &s * &t,
        };
        if det_twist {
            lam = lam.checked_div(&x)?;
        }
        lambda_table.push((x.clone(), lam));
        t_table.push((x, phi_x));
    }

    let phi = recognize_hom(&hom_table);
    match phi.registered() {
        Some(h) => {
            if let Some((x, _)) = t_table.iter().find(|(x, v)| &h.apply(x) != v) {
                return Err(not_mult(format!("Φ(D_1({x})) disagrees with φ read from transvections")));
            }
        }
        None => {
            for entry in t_table {
                if !hom_table.iter().any(|(x, _)| x == &entry.0) {
                    hom_table.push(entry);
                }
            }
        }
    }
    let phi = match phi {
        RingHom::Sampled(_) => RingHom::Sampled(hom_table.clone()),
        other => other,
    };
    let lambda = fit_lambda(&lambda_table);
    Ok(GlParams { lambda, phi, r: norm.w_inv.normalized(), eps, hom_table, lambda_table })
}

/// Rank `n−1` probes: every `F_j` plus two random ones.
fn corank_one_probes(field: Field, n: usize, seed: u64) -> Vec<Matrix> {
    let mut out: Vec<Matrix> = (1..=n).map(|j| coidempotent(field, n, j).expect("in range")).collect();
    let pool = default_pool(field);
    let mut g = rng(seed ^ 0x5eed_0fc0);
    let f_n = coidempotent(field, n, n).expect("in range");
    for _ in 0..2 {
        let a = random_gl_with(&mut g, field, n, 4, &pool);
        let b = random_gl_with(&mut g, field, n, 4, &pool);
        out.push(&(&a * &f_n) * &b);
    }
    out
}

fn classify_gl_inner(p: &mut Prober, seed: u64) -> Result<(CanonicalForm, GlParams)> {
    let params = gl_pipeline(p)?;
    let mut vanishes = true;
    for a in corank_one_probes(p.field, p.n, seed) {
        if !p.probe(&a)?.is_zero() {
            vanishes = false;
            break;
        }
    }
    let form = if vanishes {
        CanonicalForm::Degenerate {
            lambda: params.lambda.clone(),
            phi: params.phi.clone(),
            r: params.r.clone(),
            eps: params.eps,
        }
    } else {
        if params.lambda != Lambda::Character(ScalarCharacter::one()) {
            return Err(not_mult("map is nonzero on singular matrices but λ is not constant"));
        }
        CanonicalForm::NonDegenerate { phi: params.phi.clone(), r: params.r.clone(), eps: params.eps }
    };
    Ok((form.canonical(p.n), params))
}

fn require_square_normalized(p: &mut Prober) -> Result<()> {
    p.normalize()?;
    if p.k != p.n || p.s != 0 || p.l != p.n {
        return Err(Error::UnsupportedDimension(format!(
            "expected Φ(0) = 0 and Φ(I) = I on M_{}, got s = {}, l = {}",
            p.n, p.s, p.l
        )));
    }
    Ok(())
}

/// Replay the GL(n) analysis on a nontrivial map with `k = n`. The class
/// is decided by probing rank `n−1` matrices.
pub fn classify_gl(o: &dyn MapOracle) -> Result<CanonicalForm> {
    let mut p = Prober::new(o)?;
    require_square_normalized(&mut p)?;
    Ok(classify_gl_inner(&mut p, 0)?.0)
}

/// Recover a map that is nonzero on some singular matrix.
pub fn recover_nondegenerate(o: &dyn MapOracle) -> Result<CanonicalForm> {
    let mut p = Prober::new(o)?;
    require_square_normalized(&mut p)?;
    Ok(nondegenerate_inner(&mut p, 0)?.0)
}

fn nondegenerate_inner(p: &mut Prober, seed: u64) -> Result<(CanonicalForm, Table, Table)> {
    let (field, n) = (p.field, p.n);
    let e11 = p.probe(&Matrix::unit(field, n, 0, 0))?;
    if !e11.is_zero() {
        let mut units = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                row.push(p.probe(&Matrix::unit(field, n, i, j))?);
            }
            units.push(row);
        }
        let r = conjugator_from_units(&units).map_err(|e| match e {
            Error::NotMatrixUnits(m) => not_mult(m),
            Error::SingularRecovery => not_mult("matrix units F_ij do not assemble an invertible conjugator"),
            other => other,
        })?;
        let r_inv = r.inverse()?;
        let mut table = Vec::new();
        for x in phi_pool(field) {
            let img = p.probe(&Matrix::unit(field, n, 0, 1).scalar_mul(&x))?;
            let g = &(&r * &img) * &r_inv;
            let v = g.get(0, 1).clone();
            if g != Matrix::unit(field, n, 0, 1).scalar_mul(&v) {
                return Err(not_mult(format!("Φ({x}·E_12) is not a multiple of E_12 after conjugation")));
            }
            table.push((x, v));
        }
        if !table[0].1.is_one() || !hom_check(&RingHom::Sampled(table.clone()), &table_pairs(&table)) {
            return Err(not_mult("φ read from Φ(b·E_12) is not a ring homomorphism on the probes"));
        }
        let phi = recognize_hom(&table);
        let form = CanonicalForm::NonDegenerate { phi, r, eps: Eps::Plain }.canonical(n);
        return Ok((form, table, Vec::new()));
    }

    // Φ(E_11) = 0: everything below rank n−1 must vanish
    for r in 1..n.saturating_sub(1) {
        let lead = rank_idempotent(field, n, r)?;
        let tail =
            Matrix::diagonal(field, (0..n).map(|i| if i >= n - r { field.one() } else { field.zero() }).collect());
        for a in [lead, tail] {
            if !p.probe(&a)?.is_zero() {
                return Err(Error::RankLadderViolation(format!(
                    "Φ(E_11) = 0 but a rank-{r} idempotent has nonzero image; Φ(B) = 0 must hold whenever rank(B) = rank(E_11) ≤ {r}"
                )));
            }
        }
    }
    let mut coidems = Vec::with_capacity(n);
    for j in 1..=n {
        let fj = coidempotent(field, n, j)?;
        let img = p.probe(&fj)?;
        if img.rank() != 1 {
            return Err(Error::RankLadderViolation(format!(
                "rank(Φ(F_{j})) = {}, expected 1 for a nondegenerate map vanishing on rank 1",
                img.rank()
            )));
        }
        coidems.push((fj, img));
    }
    let (form, params) = classify_gl_inner(p, seed)?;
    let CanonicalForm::NonDegenerate { phi, r, .. } = &form else {
        return Err(not_mult("nondegenerate map looks degenerate on rank n−1 probes"));
    };
    if params.eps != Eps::Cofactor {
        return Err(not_mult("rank n−1 matrices map to rank 1 but the GL part has no cofactor"));
    }
    let form = CanonicalForm::NonDegenerate { phi: phi.clone(), r: r.clone(), eps: params.eps }.canonical(n);
    for (fj, img) in &coidems {
        if &form.eval(fj)? != img {
            return Err(not_mult("recovered cofactor form disagrees with Φ(F_j)"));
        }
    }
    Ok((form, params.hom_table, params.lambda_table))
}

/// Classify a black-box map and verify the result.
pub fn classify(o: &dyn MapOracle, cfg: &ClassifyConfig) -> Result<ClassifyReport> {
    let mut p = Prober::new(o)?;
    p.normalize()?;
    let (n, k, field) = (p.n, p.k, p.field);
    let trivial = p.l == 0 || probe_trivial(&mut p)?;
    let (form, pre_conjugator, hom_table, lambda_table) = if trivial {
        let fit = fit_trivial(&mut p)?;
        (fit.form, fit.pre_conjugator, Vec::new(), Vec::new())
    } else {
        if p.l != n || p.s != 0 {
            return Err(not_mult("nontrivial map with Φ(I) ≠ I"));
        }
        let mut vanishes = true;
        for a in corank_one_probes(field, n, cfg.seed) {
            if !p.probe(&a)?.is_zero() {
                vanishes = false;
                break;
            }
        }
        let id = Matrix::identity(field, n);
        if vanishes {
            let (form, params) = classify_gl_inner(&mut p, cfg.seed)?;
            (form, id, params.hom_table, params.lambda_table)
        } else {
            let (form, h, l) = nondegenerate_inner(&mut p, cfg.seed)?;
            (form, id, h, l)
        }
    };

    let mut report = ClassifyReport {
        n,
        k,
        field,
        pre_conjugator,
        s: p.s,
        l: p.l,
        form,
        hom_table,
        lambda_table,
        probe_log: Vec::new(),
        verified: false,
    };
    if !report.form.has_samples() {
        for (a, out) in p.log.clone() {
            if report.eval(&a)? != out {
                return Err(Error::VerificationFailed { counterexample: Box::new(a) });
            }
        }
        let pool = default_pool(field);
        let mut g = rng(cfg.seed);
        let mut fresh: Vec<Matrix> =
            (0..cfg.fresh_invertible).map(|_| random_gl_with(&mut g, field, n, 2 * n, &pool)).collect();
        fresh.extend((0..cfg.fresh_singular).map(|_| random_singular_with(&mut g, field, n, n, &pool)));
        for a in fresh {
            if report.eval(&a)? != p.raw(&a)? {
                return Err(Error::VerificationFailed { counterexample: Box::new(a) });
            }
        }
        report.verified = true;
    }
    report.probe_log = p.log;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapexpr::{canonical_eq, simplify, MapAtom, MapExpr};
    use crate::oracle::{det_power_scalar, plus_identity, FnOracle};
    use crate::slword::random_gl;

    fn q2() -> Field {
        Field::quadratic(2).unwrap()
    }

    fn x_pow(p: i64) -> Lambda {
        Lambda::Character(ScalarCharacter::power(Hom::Identity, p))
    }

    #[test]
    fn pools() {
        assert_eq!(phi_pool(Field::Rational).len(), 5);
        assert_eq!(phi_pool(q2()).len(), 7);
        assert_eq!(lambda_pool(q2()).len(), 8);
        assert_eq!(call_budget(3), 290);
    }

    #[test]
    fn identity_normalizes_trivially() {
        let e = MapExpr::identity(3, Field::Rational);
        let (s, s0, l) = normalize_idempotents(&e).unwrap();
        assert!(s.is_identity());
        assert_eq!((s0, l), (0, 3));
    }

    #[test]
    fn block_oracle_ranks() {
        let f = Field::Rational;
        let t = MapAtom::TrivialDet { chars: vec![ScalarCharacter::power(Hom::Identity, 1)], zero_pad: 1, one_pad: 1 };
        let e = MapExpr::atom(3, f, t).unwrap();
        let (_, s, l) = normalize_idempotents(&e).unwrap();
        assert_eq!((s, l), (1, 1));
    }

    #[test]
    fn broken_absorption_is_not_multiplicative() {
        let f = Field::Rational;
        let o = FnOracle::new(f, 2, 2, move |a| {
            Ok(if a.is_zero() { Matrix::unit(f, 2, 0, 0) } else { Matrix::unit(f, 2, 1, 1) })
        });
        assert!(matches!(normalize_idempotents(&o), Err(Error::NotMultiplicative(_))));
    }

    #[test]
    fn triviality_examples() {
        let f = Field::Rational;
        assert!(is_trivial(&det_power_scalar(f, 3, 3, 3)).unwrap());
        assert!(!is_trivial(&MapExpr::identity(3, f)).unwrap());
        assert!(is_trivial(&det_power_scalar(f, 3, 2, 1)).unwrap());
        // a map into a smaller dimension that moves a transvection
        let o = FnOracle::new(f, 3, 2, |a| Ok(a.block(0, 2)));
        assert!(matches!(is_trivial(&o), Err(Error::NotMultiplicative(_))));
    }

    #[test]
    fn trivial_fits() {
        let f = Field::Rational;
        let fit = classify_trivial(&det_power_scalar(f, 3, 2, 2)).unwrap();
        assert_eq!(fit.form, CanonicalForm::Trivial { chars: vec![x_pow(2), x_pow(2)], zero_pad: 0, one_pad: 0 });
        let t = MapAtom::TrivialDet { chars: vec![ScalarCharacter::one()], zero_pad: 1, one_pad: 1 };
        let fit = classify_trivial(&MapExpr::atom(3, f, t).unwrap()).unwrap();
        assert_eq!(fit.form, CanonicalForm::Trivial { chars: vec![x_pow(0)], zero_pad: 1, one_pad: 1 });
        let constant = FnOracle::new(f, 3, 2, move |a| {
            Ok(if a.det().is_zero() { Matrix::zero(f, 2) } else { Matrix::identity(f, 2) })
        });
        let fit = classify_trivial(&constant).unwrap();
        assert_eq!(fit.form, CanonicalForm::Trivial { chars: vec![x_pow(0), x_pow(0)], zero_pad: 0, one_pad: 0 });
    }

    #[test]
    fn conjugated_trivial_map_diagonalizes() {
        let f = Field::Rational;
        let s0 = Matrix::from_ints(f, &[&[1, 1], &[1, 2]]).unwrap();
        let s0_inv = s0.inverse().unwrap();
        let o = FnOracle::new(f, 3, 2, move |a| {
            let d = a.det();
            if d.is_zero() {
                return Ok(Matrix::zero(f, 2));
            }
            let m = Matrix::diagonal(f, vec![d.pow(2)?, d.pow(-1)?]);
            Ok(&(&s0_inv * &m) * &s0)
        });
        let report = classify(&o, &ClassifyConfig::default()).unwrap();
        assert!(report.verified);
        let CanonicalForm::Trivial { chars, .. } = &report.form else { panic!() };
        let mut got = chars.clone();
        got.sort_by_key(|c| format!("{c:?}"));
        let mut want = vec![x_pow(2), x_pow(-1)];
        want.sort_by_key(|c| format!("{c:?}"));
        assert_eq!(got, want);
    }

    #[test]
    fn noncommuting_trivial_images_reported() {
        let f = Field::Rational;
        // A ↦ [[1, log-ish], [0, 1]] is not available over Q; use a Jordan block in det
        let o = FnOracle::new(f, 2, 2, move |a| {
            let d = a.det();
            if d.is_zero() {
                return Ok(Matrix::zero(f, 2));
            }
            let mut m = Matrix::identity(f, 2).scalar_mul(&d);
            if d != f.one() {
                m.set(0, 1, f.one());
            }
            Ok(m)
        });
        assert!(matches!(classify_trivial(&o), Err(Error::NonDiagonalizableTrivial(_))));
    }

    #[test]
    fn gl_examples() {
        let f = Field::Rational;
        let form = classify_gl(&MapExpr::identity(3, f)).unwrap();
        assert!(canonical_eq(
            &form,
            &CanonicalForm::NonDegenerate { phi: RingHom::Identity, r: Matrix::identity(f, 3), eps: Eps::Plain }
        ));
        let cof = MapExpr::atom(3, f, MapAtom::Cof).unwrap();
        let form = classify_gl(&cof).unwrap();
        assert!(canonical_eq(&form, &simplify(&cof).unwrap()));

        let g = q2();
        let e = MapExpr::new(
            3,
            g,
            vec![MapAtom::DetScale(ScalarCharacter::power(Hom::Identity, 3)), MapAtom::Hom(Hom::Conjugation)],
        )
        .unwrap();
        let form = classify_gl(&e).unwrap();
        let CanonicalForm::Degenerate { lambda, phi, r, eps } = &form else { panic!("{form:?}") };
        assert_eq!(phi, &RingHom::QuadConjugation);
        assert_eq!(eps, &Eps::Plain);
        assert!(r.is_identity());
        // DetScale(x³) after σ: λ(det A) = σ(det A)³
        assert_eq!(lambda, &Lambda::Character(ScalarCharacter::power(Hom::Conjugation, 3)));
        assert!(canonical_eq(&form, &simplify(&e).unwrap()));
    }

    #[test]
    fn nondegenerate_conjugation() {
        let f = Field::Rational;
        let r0 = random_gl(3, 5, &default_pool(f), 17);
        let e = MapExpr::atom(3, f, MapAtom::conj(r0.clone()).unwrap()).unwrap();
        let form = recover_nondegenerate(&e).unwrap();
        let CanonicalForm::NonDegenerate { r, eps: Eps::Plain, phi: RingHom::Identity } = &form else { panic!() };
        assert!((r * &r0.inverse().unwrap()).as_scalar().is_some());
    }

    #[test]
    fn nondegenerate_cofactor_branch() {
        let f = Field::Rational;
        let cof = MapExpr::atom(3, f, MapAtom::Cof).unwrap();
        let form = recover_nondegenerate(&cof).unwrap();
        assert!(matches!(form, CanonicalForm::NonDegenerate { eps: Eps::Cofactor, .. }));
    }

    #[test]
    fn rank_ladder_violation() {
        let f = Field::Rational;
        // vanishes on E_11 but not on the rank-2 idempotent (n = 4)
        let o = FnOracle::new(f, 4, 4, move |a| {
            Ok(if a.rank() == 2 || a.rank() == 4 { a.clone() } else { Matrix::zero(f, 4) })
        });
        assert!(matches!(recover_nondegenerate(&o), Err(Error::RankLadderViolation(_))));
    }

    #[test]
    fn non_multiplicative_rejected() {
        let f = Field::Rational;
        assert!(matches!(classify(&plus_identity(f, 3), &ClassifyConfig::default()), Err(Error::NotMultiplicative(_))));
    }

    #[test]
    fn unsupported_dimensions() {
        let f = Field::Rational;
        let one = MapExpr::identity(1, f);
        assert!(matches!(classify(&one, &ClassifyConfig::default()), Err(Error::UnsupportedDimension(_))));
        let up = FnOracle::new(f, 2, 3, move |_| Ok(Matrix::identity(f, 3)));
        assert!(matches!(classify(&up, &ClassifyConfig::default()), Err(Error::UnsupportedDimension(_))));
    }

    #[test]
    fn wild_lambda_is_sampled() {
        let f = Field::Rational;
        let e = MapExpr::atom(2, f, MapAtom::DetScale(ScalarCharacter::power(Hom::Identity, 7))).unwrap();
        let report = classify(&e, &ClassifyConfig::default()).unwrap();
        assert!(!report.verified);
        let CanonicalForm::Degenerate { lambda: Lambda::Sampled(t), .. } = &report.form else { panic!() };
        assert_eq!(t[0], (f.int(2), f.int(128)));
    }

    #[test]
    fn dual_path_small_corpus() {
        for (field, n) in [(Field::Rational, 2), (q2(), 2), (Field::Rational, 3), (q2(), 3), (Field::Rational, 4)] {
            for seed in 0..6u64 {
                let e = crate::mapexpr::random_expr_bounded(n, field, 1 + (seed as usize % 5), seed, 6);
                let report = classify(&e, &ClassifyConfig { seed, ..Default::default() })
                    .unwrap_or_else(|err| panic!("{err} for {e:?}"));
                let expect = simplify(&e).unwrap();
                assert!(canonical_eq(&report.form, &expect), "n={n} {field}: {:?} vs {:?}", report.form, expect);
            }
        }
    }
}
