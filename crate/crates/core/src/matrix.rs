//! Dense square matrices over a [`Field`] with exact linear algebra.
//!
//! Entry accessors are 0-based. The constructors that mirror the usual
//! elementary-matrix notation ([`ElementaryGen`], [`coidempotent`]) take
//! 1-based indices.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::field::{Field, Hom, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: Field,
    n: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn new(field: Field, n: usize, data: Vec<Scalar>) -> Result<Matrix> {
        if n == 0 {
            return Err(Error::DimensionMismatch("matrix dimension must be at least 1".into()));
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch(format!("{} entries for a {n}x{n} matrix", data.len())));
        }
        if let Some(x) = data.iter().find(|x| x.field() != field) {
            return Err(Error::FieldMismatch(format!("entry in {} inside {field} matrix", x.field())));
        }
        Ok(Matrix { field, n, data })
    }

    pub fn from_rows(field: Field, rows: Vec<Vec<Scalar>>) -> Result<Matrix> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("matrix rows must have n entries".into()));
        }
        Matrix::new(field, n, rows.into_iter().flatten().collect())
    }

    /// Rational matrix from small integers; handy in tests.
    pub fn from_ints(field: Field, rows: &[&[i64]]) -> Result<Matrix> {
        let rows = rows.iter().map(|r| r.iter().map(|&v| field.int(v)).collect()).collect();
        Matrix::from_rows(field, rows)
    }

    pub fn identity(field: Field, n: usize) -> Matrix {
        Matrix::diagonal(field, (0..n).map(|_| field.one()).collect())
    }

    pub fn zero(field: Field, n: usize) -> Matrix {
        Matrix { field, n, data: vec![field.zero(); n * n] }
    }

    pub fn diagonal(field: Field, diag: Vec<Scalar>) -> Matrix {
        let n = diag.len();
        let mut m = Matrix::zero(field, n);
        for (i, x) in diag.into_iter().enumerate() {
            m.set(i, i, x);
        }
        m
    }

    /// Standard matrix unit `E_ij` (0-based).
    pub fn unit(field: Field, n: usize, i: usize, j: usize) -> Matrix {
        let mut m = Matrix::zero(field, n);
        m.set(i, j, field.one());
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Scalar) {
        assert_eq!(x.field(), self.field, "entry field mismatch");
        self.data[i * self.n + j] = x;
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<Scalar>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    fn same_shape(&self, other: &Matrix) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(format!("{} vs {}", self.field, other.field)));
        }
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!("{} vs {}", self.n, other.n)));
        }
        Ok(())
    }

    pub fn mat_mul(&self, other: &Matrix) -> Result<Matrix> {
        self.same_shape(other)?;
        let n = self.n;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = self.field.zero();
                for t in 0..n {
                    let x = self.get(i, t);
                    let y = other.get(t, j);
                    if !x.is_zero() && !y.is_zero() {
                        acc = &acc + &(x * y);
                    }
                }
                data.push(acc);
            }
        }
        Ok(Matrix { field: self.field, n, data })
    }

    pub fn mat_add(&self, other: &Matrix) -> Result<Matrix> {
        self.same_shape(other)?;
        Ok(self.zip_with(other, |x, y| x + y))
    }

    pub fn mat_sub(&self, other: &Matrix) -> Result<Matrix> {
        self.same_shape(other)?;
        Ok(self.zip_with(other, |x, y| x - y))
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(&Scalar, &Scalar) -> Scalar) -> Matrix {
        let data = self.data.iter().zip(&other.data).map(|(x, y)| f(x, y)).collect();
        Matrix { field: self.field, n: self.n, data }
    }

    pub fn map(&self, f: impl Fn(&Scalar) -> Scalar) -> Matrix {
        Matrix { field: self.field, n: self.n, data: self.data.iter().map(f).collect() }
    }

    /// Entrywise application of a registered hom.
    pub fn apply_hom(&self, h: Hom) -> Matrix {
        self.map(|x| h.apply(x))
    }

    pub fn scalar_mul(&self, c: &Scalar) -> Matrix {
        self.map(|x| c * x)
    }

    pub fn transpose(&self) -> Matrix {
        let n = self.n;
        let mut data = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                data.push(self.get(i, j).clone());
            }
        }
        Matrix { field: self.field, n, data }
    }

    pub fn pow(&self, e: u32) -> Matrix {
        let mut acc = Matrix::identity(self.field, self.n);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        *self == Matrix::identity(self.field, self.n)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.get(i, j).is_zero()))
    }

    /// `Some(c)` when the matrix equals `c·I`.
    pub fn as_scalar(&self) -> Option<Scalar> {
        let c = self.get(0, 0).clone();
        (self.is_diagonal() && (0..self.n).all(|i| *self.get(i, i) == c)).then_some(c)
    }

    pub fn det(&self) -> Scalar {
        let n = self.n;
        let mut rows = self.rows();
        let mut det = self.field.one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !rows[r][c].is_zero()) else {
                return self.field.zero();
            };
            if p != c {
                rows.swap(p, c);
                det = -det;
            }
            let pivot = rows[c][c].clone();
            det = &det * &pivot;
            let pinv = pivot.inv().expect("nonzero pivot");
            for r in (c + 1)..n {
                if rows[r][c].is_zero() {
                    continue;
                }
                let f = &rows[r][c] * &pinv;
                for t in c..n {
                    let v = &rows[r][t] - &(&f * &rows[c][t]);
                    rows[r][t] = v;
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Result<Matrix> {
        let n = self.n;
        let mut aug: Vec<Vec<Scalar>> = self
            .rows()
            .into_iter()
            .enumerate()
            .map(|(i, mut r)| {
                r.extend((0..n).map(|j| if i == j { self.field.one() } else { self.field.zero() }));
                r
            })
            .collect();
        let pivots = rref(&mut aug, 2 * n);
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(Error::SingularMatrix);
        }
        let data = aug.into_iter().flat_map(|r| r.into_iter().skip(n)).collect();
        Ok(Matrix { field: self.field, n, data })
    }

    pub fn rank(&self) -> usize {
        let mut rows = self.rows();
        rref(&mut rows, self.n).len()
    }

    /// Basis of the null space `{v : A·v = 0}` read off the reduced row
    /// echelon form, one vector per free column.
    pub fn kernel_basis(&self) -> Vec<Vec<Scalar>> {
        kernel_of_rows(self.field, self.rows(), self.n)
    }

    /// Basis of the column space: the nonzero rows of `rref(Aᵗ)`.
    pub fn image_basis(&self) -> Vec<Vec<Scalar>> {
        let mut rows = self.transpose().rows();
        let r = rref(&mut rows, self.n).len();
        rows.truncate(r);
        rows
    }

    /// Matrix with row `i` and column `j` deleted.
    pub fn minor_matrix(&self, i: usize, j: usize) -> Matrix {
        let n = self.n;
        let data = (0..n)
            .filter(|&r| r != i)
            .flat_map(|r| (0..n).filter(move |&c| c != j).map(move |c| (r, c)))
            .map(|(r, c)| self.get(r, c).clone())
            .collect();
        Matrix { field: self.field, n: n - 1, data }
    }

    /// The cofactor matrix: entry `(i, j)` is `(−1)^(i+j)` times the minor
    /// obtained by deleting row `i` and column `j`. Unlike the adjugate (its
    /// transpose) it is multiplicative: `C(AB) = C(A)·C(B)`.
    pub fn cofactor(&self) -> Result<Matrix> {
        let n = self.n;
        if n < 2 {
            return Err(Error::DimensionMismatch("cofactor needs n >= 2".into()));
        }
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let m = self.minor_matrix(i, j).det();
                data.push(if (i + j) % 2 == 0 { m } else { -m });
            }
        }
        Ok(Matrix { field: self.field, n, data })
    }

    pub fn is_idempotent(&self) -> bool {
        &(self * self) == self
    }

    /// `(A − I)^n = 0`.
    pub fn is_unipotent(&self) -> bool {
        let nil = self - &Matrix::identity(self.field, self.n);
        nil.pow(self.n as u32).is_zero()
    }

    /// Unit upper triangular.
    pub fn is_unitriangular(&self) -> bool {
        (0..self.n).all(|i| self.get(i, i).is_one() && (0..i).all(|j| self.get(i, j).is_zero()))
    }

    /// Scale so the first nonzero entry in row-major order is 1.
    pub fn normalized(&self) -> Matrix {
        match self.data.iter().find(|x| !x.is_zero()) {
            Some(lead) => self.scalar_mul(&lead.inv().expect("nonzero lead")),
            None => self.clone(),
        }
    }

    /// Rows/columns `start..start+len` as a square block.
    pub fn block(&self, start: usize, len: usize) -> Matrix {
        let data = (start..start + len)
            .flat_map(|i| (start..start + len).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j).clone())
            .collect();
        Matrix { field: self.field, n: len, data }
    }

    pub fn from_columns(field: Field, cols: &[Vec<Scalar>]) -> Result<Matrix> {
        let n = cols.len();
        if cols.iter().any(|c| c.len() != n) {
            return Err(Error::DimensionMismatch("column length".into()));
        }
        let rows = (0..n).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect();
        Matrix::from_rows(field, rows)
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        (0..self.n).map(|i| (0..self.n).fold(self.field.zero(), |acc, j| &acc + &(self.get(i, j) * &v[j]))).collect()
    }

    /// `R⁻¹·self·R`.
    pub fn conjugate_by(&self, r: &Matrix, r_inv: &Matrix) -> Matrix {
        &(r_inv * self) * r
    }
}

/// Block diagonal matrix of `diag` (an `l`-square block, possibly absent),
/// `zeros` zero rows and `ones` identity rows, in that order.
pub fn block_diag(field: Field, top: Option<&Matrix>, zeros: usize, ones: usize) -> Matrix {
    let l = top.map_or(0, Matrix::n);
    let k = l + zeros + ones;
    let mut m = Matrix::zero(field, k);
    if let Some(t) = top {
        for i in 0..l {
            for j in 0..l {
                m.set(i, j, t.get(i, j).clone());
            }
        }
    }
    for i in (l + zeros)..k {
        m.set(i, i, field.one());
    }
    m
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.mat_mul(rhs).expect("matrix shape mismatch")
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        self.mat_add(rhs).expect("matrix shape mismatch")
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        self.mat_sub(rhs).expect("matrix shape mismatch")
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.data.chunks(self.n) {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// Reduce `rows` (each of length `cols`) to reduced row echelon form in
/// place; returns the pivot columns. Pivot rows are the lowest-index
/// nonzero candidates.
pub(crate) fn rref(rows: &mut [Vec<Scalar>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(p, r);
        let inv = rows[r][c].inv().expect("nonzero pivot");
        for t in c..cols {
            let v = &rows[r][t] * &inv;
            rows[r][t] = v;
        }
        for i in 0..rows.len() {
            if i == r || rows[i][c].is_zero() {
                continue;
            }
            let f = rows[i][c].clone();
            for t in c..cols {
                let v = &rows[i][t] - &(&f * &rows[r][t]);
                rows[i][t] = v;
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Null space of a (possibly rectangular) system given by `rows`.
pub(crate) fn kernel_of_rows(field: Field, mut rows: Vec<Vec<Scalar>>, cols: usize) -> Vec<Vec<Scalar>> {
    let pivots = rref(&mut rows, cols);
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![field.zero(); cols];
        v[free] = field.one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -&rows[r][free];
        }
        basis.push(v);
    }
    basis
}

/// One of the three kinds of elementary generator. Indices are 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ElementaryGen {
    /// `D_i(k)`: identity with `k` at `(i, i)`.
    DiagUnit { i: usize, k: Scalar },
    /// `S_ij`: identity with rows `i` and `j` swapped.
    Swap { i: usize, j: usize },
    /// `P_ij(k)`: identity plus `k` at `(i, j)`.
    Transvection { i: usize, j: usize, k: Scalar },
}

pub fn elementary(g: &ElementaryGen, field: Field, n: usize) -> Result<Matrix> {
    let check = |i: usize| {
        if i == 0 || i > n {
            Err(Error::IndexOutOfRange(format!("index {i} outside 1..={n}")))
        } else {
            Ok(i - 1)
        }
    };
    let mut m = Matrix::identity(field, n);
    match g {
        ElementaryGen::DiagUnit { i, k } => {
            if k.is_zero() {
                return Err(Error::SingularMatrix);
            }
            let i = check(*i)?;
            m.set(i, i, k.clone());
        }
        ElementaryGen::Swap { i, j } => {
            let (i, j) = (check(*i)?, check(*j)?);
            if i == j {
                return Err(Error::IndexOutOfRange("swap needs i != j".into()));
            }
            m.set(i, i, field.zero());
            m.set(j, j, field.zero());
            m.set(i, j, field.one());
            m.set(j, i, field.one());
        }
        ElementaryGen::Transvection { i, j, k } => {
            let (i, j) = (check(*i)?, check(*j)?);
            if i == j {
                return Err(Error::IndexOutOfRange("transvection needs i != j".into()));
            }
            m.set(i, j, k.clone());
        }
    }
    Ok(m)
}

/// `D_i(k)` with 1-based `i`.
pub fn diag_unit(field: Field, n: usize, i: usize, k: Scalar) -> Matrix {
    elementary(&ElementaryGen::DiagUnit { i, k }, field, n).expect("valid diagonal unit")
}

/// `P_ij(k)` with 1-based indices.
pub fn transvection(field: Field, n: usize, i: usize, j: usize, k: Scalar) -> Matrix {
    elementary(&ElementaryGen::Transvection { i, j, k }, field, n).expect("valid transvection")
}

/// `S_ij` with 1-based indices.
pub fn swap(field: Field, n: usize, i: usize, j: usize) -> Matrix {
    elementary(&ElementaryGen::Swap { i, j }, field, n).expect("valid swap")
}

/// `diag(I_r, 0_{n−r})`.
pub fn rank_idempotent(field: Field, n: usize, r: usize) -> Result<Matrix> {
    if r > n {
        return Err(Error::IndexOutOfRange(format!("rank {r} > {n}")));
    }
    Ok(Matrix::diagonal(field, (0..n).map(|i| if i < r { field.one() } else { field.zero() }).collect()))
}

/// `F_j = I − E_jj` with 1-based `j`.
pub fn coidempotent(field: Field, n: usize, j: usize) -> Result<Matrix> {
    if j == 0 || j > n {
        return Err(Error::IndexOutOfRange(format!("index {j} outside 1..={n}")));
    }
    let mut m = Matrix::identity(field, n);
    m.set(j - 1, j - 1, field.zero());
    Ok(m)
}

/// Check `F_ij·F_kl = δ_jk·F_il` over the whole family.
pub fn check_unit_relations(units: &[Vec<Matrix>]) -> Result<()> {
    let m = units.len();
    if m == 0 || units.iter().any(|r| r.len() != m) {
        return Err(Error::DimensionMismatch("unit family must be square".into()));
    }
    let field = units[0][0].field();
    let dim = units[0][0].n();
    if units.iter().flatten().any(|u| u.n() != dim || u.field() != field) {
        return Err(Error::DimensionMismatch("unit family members differ in shape".into()));
    }
    if units[0][0].is_zero() {
        return Err(Error::NotMatrixUnits("F_11 = 0".into()));
    }
    let zero = Matrix::zero(field, dim);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    let expect = if j == k { &units[i][l] } else { &zero };
                    if &(&units[i][j] * &units[k][l]) != expect {
                        return Err(Error::NotMatrixUnits(format!(
                            "unit relations F_ij F_kl = δ_jk F_il violated at (i,j,k,l) = ({},{},{},{})",
                            i + 1,
                            j + 1,
                            k + 1,
                            l + 1
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Recover `R` with `R·F_ij·R⁻¹ = E_ij` from a full system of matrix units.
///
/// With `v` the first nonzero column of `F_11`, column `j` of `R⁻¹` is
/// `F_j1·v`. The result is normalized so its first nonzero entry is 1.
pub fn conjugator_from_units(units: &[Vec<Matrix>]) -> Result<Matrix> {
    check_unit_relations(units)?;
    let n = units.len();
    let field = units[0][0].field();
    if units[0][0].n() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n}x{n} unit family of {}x{} matrices",
            units[0][0].n(),
            units[0][0].n()
        )));
    }
    let f11 = &units[0][0];
    let col = (0..n).find(|&c| (0..n).any(|r| !f11.get(r, c).is_zero())).expect("F_11 nonzero");
    let v: Vec<Scalar> = (0..n).map(|r| f11.get(r, col).clone()).collect();
    let cols: Vec<Vec<Scalar>> = (0..n).map(|j| units[j][0].mul_vec(&v)).collect();
    let r_inv = Matrix::from_columns(field, &cols)?;
    let r = r_inv.inverse().map_err(|_| Error::SingularRecovery)?.normalized();
    let r_inv = r.inverse()?;
    for i in 0..n {
        for j in 0..n {
            if &(&r * &units[i][j]) * &r_inv != Matrix::unit(field, n, i, j) {
                return Err(Error::NotMatrixUnits(format!("recovered conjugator fails on F_{}{}", i + 1, j + 1)));
            }
        }
    }
    Ok(r)
}

/// Split a pair of idempotents `P0`, `P1` with `P0·P1 = P1·P0 = P0` into
/// block form. Returns `(S, s, l)` with `S⁻¹·P0·S = diag(0_l, 0, I_s)` and
/// `S⁻¹·P1·S = diag(I_l, 0, I_s)`, where `s = rank P0` and
/// `l = rank P1 − rank P0`. The columns of `S` are a basis of
/// `im(P1 − P0)`, then `ker P1`, then `im P0`.
pub fn split_idempotent_pair(p0: &Matrix, p1: &Matrix) -> Result<(Matrix, usize, usize)> {
    p0.same_shape(p1)?;
    if !p0.is_idempotent() {
        return Err(Error::NotCommutingIdempotents("Φ(0) is not idempotent".into()));
    }
    if !p1.is_idempotent() {
        return Err(Error::NotCommutingIdempotents("Φ(I) is not idempotent".into()));
    }
    if &(p0 * p1) != p0 || &(p1 * p0) != p0 {
        return Err(Error::NotCommutingIdempotents("Φ(0)Φ(I) = Φ(I)Φ(0) = Φ(0) violated".into()));
    }
    let mid = (p1 - p0).image_basis();
    let ker = p1.kernel_basis();
    let top = p0.image_basis();
    let (l, s) = (mid.len(), top.len());
    let cols: Vec<Vec<Scalar>> = mid.into_iter().chain(ker).chain(top).collect();
    let sm = Matrix::from_columns(p0.field(), &cols)?;
    debug_assert!(sm.inverse().is_ok());
    Ok((sm, s, l))
}
