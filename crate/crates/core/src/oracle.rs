//! Black-box access to a map `M_n(F) → M_k(F)`.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::Matrix;

/// Evaluation access to a map. Implementations must be deterministic; the
/// classifier assumes but does not trust multiplicativity.
pub trait MapOracle {
    fn field(&self) -> Field;
    fn domain_dim(&self) -> usize;
    fn codomain_dim(&self) -> usize;
    fn evaluate(&self, a: &Matrix) -> Result<Matrix>;
}

type EvalFn = dyn Fn(&Matrix) -> Result<Matrix> + Send + Sync;

/// An oracle backed by a closure.
pub struct FnOracle {
    field: Field,
    n: usize,
    k: usize,
    f: Box<EvalFn>,
}

impl FnOracle {
    pub fn new(
        field: Field,
        n: usize,
        k: usize,
        f: impl Fn(&Matrix) -> Result<Matrix> + Send + Sync + 'static,
    ) -> FnOracle {
        FnOracle { field, n, k, f: Box::new(f) }
    }
}

impl MapOracle for FnOracle {
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
        check_input(self, a)?;
        (self.f)(a)
    }
}

pub(crate) fn check_input(o: &(impl MapOracle + ?Sized), a: &Matrix) -> Result<()> {
    if a.field() != o.field() {
        return Err(Error::FieldMismatch(format!("input over {}, map over {}", a.field(), o.field())));
    }
    if a.n() != o.domain_dim() {
        return Err(Error::DimensionMismatch(format!(
            "input is {}x{}, map domain is {}x{}",
            a.n(),
            a.n(),
            o.domain_dim(),
            o.domain_dim()
        )));
    }
    Ok(())
}

/// `A ↦ adj(A) = C(A)ᵗ`, the anti-multiplicative reading of the cofactor
/// map. Kept as a negative control.
pub fn adjugate(field: Field, n: usize) -> FnOracle {
    FnOracle::new(field, n, n, |a| Ok(a.cofactor()?.transpose()))
}

/// `A ↦ A + I`; not multiplicative.
pub fn plus_identity(field: Field, n: usize) -> FnOracle {
    FnOracle::new(field, n, n, move |a| Ok(a + &Matrix::identity(field, n)))
}

/// `A ↦ det(A)^power · I_k`, a trivial map into any dimension `k`.
pub fn det_power_scalar(field: Field, n: usize, k: usize, power: i64) -> FnOracle {
    FnOracle::new(field, n, k, move |a| {
        let d = a.det();
        if d.is_zero() {
            return Ok(Matrix::zero(field, k));
        }
        Ok(Matrix::identity(field, k).scalar_mul(&d.pow(power)?))
    })
}
