//! Column-indexed sparse view of a dense operator. Generators cache these
//! so that applying the master equation costs O(nnz · d) per product.

use super::matrix::{ComplexMatrix, C64, ZERO};

#[derive(Clone, Debug)]
pub(crate) struct SparseOp {
    dim: usize,
    /// (row, col, value) in row-major order
    entries: Vec<(usize, usize, C64)>,
    /// per column: (row, value)
    cols: Vec<Vec<(usize, C64)>>,
}

impl SparseOp {
    pub fn from_dense(m: &ComplexMatrix) -> Self {
        let dim = m.dim();
        let mut entries = Vec::new();
        let mut cols = vec![Vec::new(); dim];
        for i in 0..dim {
            for (j, &v) in m.row(i).iter().enumerate() {
                if v != ZERO {
                    entries.push((i, j, v));
                    cols[j].push((i, v));
                }
            }
        }
        Self { dim, entries, cols }
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[(usize, C64)] {
        &self.cols[j]
    }

    /// out += coeff · S · X  (X row-major d×d)
    pub fn left_mul_add(&self, x: &[C64], coeff: C64, out: &mut [C64]) {
        let d = self.dim;
        for &(i, k, v) in &self.entries {
            let f = coeff * v;
            let src = &x[k * d..(k + 1) * d];
            let dst = &mut out[i * d..(i + 1) * d];
            for (o, &s) in dst.iter_mut().zip(src) {
                *o += f * s;
            }
        }
    }

    /// out += coeff · X · S^†
    pub fn right_mul_adjoint_add(&self, x: &[C64], coeff: C64, out: &mut [C64]) {
        let d = self.dim;
        // (X S^†)[i, l] = Σ_k X[i, k] conj(S[l, k])
        for &(l, k, v) in &self.entries {
            let f = coeff * v.conj();
            for i in 0..d {
                out[i * d + l] += f * x[i * d + k];
            }
        }
    }
}
