use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

pub const DEFAULT_FOCK_LEVELS: usize = 30;

/// Number of retained Fock levels `0..d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FockTruncation(usize);

impl FockTruncation {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::param("d", format!("Fock truncation needs d >= 2, got {d}")));
        }
        Ok(Self(d))
    }

    #[inline]
    pub fn levels(self) -> usize {
        self.0
    }
}

impl Default for FockTruncation {
    fn default() -> Self {
        Self(DEFAULT_FOCK_LEVELS)
    }
}

#[derive(Clone, Debug)]
pub struct FockOperators {
    pub a: ComplexMatrix,
    pub a_dag: ComplexMatrix,
    pub n_op: ComplexMatrix,
}

/// Truncated ladder operators: a[k-1, k] = √k.
pub fn fock_operators(trunc: FockTruncation) -> FockOperators {
    let d = trunc.levels();
    let mut a = ComplexMatrix::zeros(d);
    for k in 1..d {
        a[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    let a_dag = a.adjoint();
    let n_op = a_dag.matmul(&a);
    FockOperators { a, a_dag, n_op }
}

/// σ⁻ = |g⟩⟨e| in the basis (g, e).
pub fn qubit_lowering() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2);
    m[(0, 1)] = C64::new(1.0, 0.0);
    m
}

pub fn qubit_raising() -> ComplexMatrix {
    qubit_lowering().adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_truncation() {
        let ops = fock_operators(FockTruncation::new(2).unwrap());
        let want = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(ops.a, want);
    }

    #[test]
    fn ladder_entries() {
        let ops = fock_operators(FockTruncation::new(3).unwrap());
        assert!((ops.a[(1, 2)].re - 2f64.sqrt()).abs() < 1e-15);
        assert!((ops.a[(1, 2)].re - 1.414214).abs() < 1e-6);
        assert_eq!(ops.a_dag, ops.a.adjoint());
    }

    #[test]
    fn number_operator_diagonal() {
        let ops = fock_operators(FockTruncation::default());
        for k in 0..30 {
            assert!((ops.n_op[(k, k)].re - k as f64).abs() < 1e-12);
        }
        assert_eq!(ops.n_op.nnz(), 29);
    }

    #[test]
    fn truncated_commutator() {
        for d in [2, 3, 7, 30] {
            let ops = fock_operators(FockTruncation::new(d).unwrap());
            let comm = ops.a.commutator(&ops.a_dag);
            for i in 0..d {
                for j in 0..d {
                    let want = if i != j {
                        0.0
                    } else if i == d - 1 {
                        1.0 - d as f64
                    } else {
                        1.0
                    };
                    assert!((comm[(i, j)] - C64::new(want, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rejects_tiny_truncation() {
        assert!(FockTruncation::new(1).is_err());
        assert!(FockTruncation::new(0).is_err());
    }
}
