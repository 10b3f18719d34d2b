use super::eigen::{hermitian_eigen, Eigen};
use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Trace-one, positive semidefinite Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, HERMITIAN_TOL, TRACE_TOL, POSITIVITY_TOL)
    }

    pub(crate) fn with_tolerance(
        matrix: ComplexMatrix,
        herm_tol: f64,
        trace_tol: f64,
        pos_tol: f64,
    ) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let defect = matrix.hermiticity_defect();
        if defect > herm_tol {
            return Err(Error::InvalidState(format!(
                "Hermiticity defect {defect:e} exceeds {herm_tol:e}"
            )));
        }
        let tr = matrix.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > trace_tol {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = min_eigenvalue(&matrix)?;
        if min < -pos_tol {
            return Err(Error::InvalidState(format!(
                "minimum eigenvalue {min:e} is below -{pos_tol:e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// |k⟩⟨k| in a space of dimension `dim`.
    pub fn basis_state(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::param("k", format!("level {k} outside dimension {dim}")));
        }
        let mut m = ComplexMatrix::zeros(dim);
        m[(k, k)] = C64::new(1.0, 0.0);
        Ok(Self { matrix: m })
    }

    /// Diagonal state with the given populations (normalized on input).
    pub fn from_populations(pops: &[f64]) -> Result<Self> {
        if pops.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::param("populations", "must be finite and nonnegative"));
        }
        let total: f64 = pops.iter().sum();
        if total <= 0.0 {
            return Err(Error::param("populations", "must not all vanish"));
        }
        let scaled: Vec<f64> = pops.iter().map(|p| p / total).collect();
        Ok(Self {
            matrix: ComplexMatrix::from_diagonal(&scaled),
        })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::from_diagonal(&vec![1.0 / dim as f64; dim]),
        }
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// Tr(ρ A)
    pub fn expectation(&self, op: &ComplexMatrix) -> C64 {
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.matrix[(i, k)] * op[(k, i)];
            }
        }
        acc
    }

    pub fn eigen(&self) -> Result<Eigen> {
        hermitian_eigen(&self.matrix)
    }
}

fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    let e = hermitian_eigen(&m.hermitian_part())?;
    Ok(e.values.first().copied().unwrap_or(0.0))
}

/// exp(-H/T) / Tr exp(-H/T), evaluated in the eigenbasis of H with the
/// ground energy factored out.
pub fn gibbs_state(h: &ComplexMatrix, temperature: f64) -> Result<DensityMatrix> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::param("T", format!("temperature must be positive, got {temperature}")));
    }
    let eig = hermitian_eigen(h)?;
    let e0 = eig.values[0];
    let weights: Vec<f64> = eig.values.iter().map(|&e| (-(e - e0) / temperature).exp()).collect();
    let z: f64 = weights.iter().sum();
    let pops: Vec<f64> = weights.iter().map(|w| w / z).collect();
    let mut scaled = eig.vectors.clone();
    let n = h.dim();
    for i in 0..n {
        for (k, &p) in pops.iter().enumerate() {
            scaled[(i, k)] *= p;
        }
    }
    let rho = scaled.matmul(&eig.vectors.adjoint()).hermitian_part();
    Ok(DensityMatrix { matrix: rho })
}

/// S = -Σ λ ln λ (nats), eigenvalues clamped to [0, 1] and 0 ln 0 = 0.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let eig = rho.eigen()?;
    Ok(entropy_of_spectrum(&eig.values))
}

pub(crate) fn entropy_of_spectrum(values: &[f64]) -> f64 {
    values
        .iter()
        .map(|&l| l.clamp(0.0, 1.0))
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.ln())
        .sum()
}

/// ½ ‖ρ − σ‖₁
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let diff = (a.matrix() - b.matrix()).hermitian_part();
    let eig = hermitian_eigen(&diff)?;
    Ok(0.5 * eig.values.iter().map(|x| x.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::fock::{fock_operators, FockTruncation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn infinite_temperature_qubit() {
        let h = ComplexMatrix::from_diagonal(&[0.0, 1.0]);
        let rho = gibbs_state(&h, 1e9).unwrap();
        let p = rho.populations();
        assert!((p[0] - 0.5).abs() < 1e-8 && (p[1] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn boltzmann_ratio_and_truncated_mean() {
        let ops = fock_operators(FockTruncation::new(30).unwrap());
        let rho = gibbs_state(&ops.n_op, 1.0).unwrap();
        let p = rho.populations();
        assert!((p[1] / p[0] - (-1.0f64).exp()).abs() < 1e-14);
        // truncated geometric: q/(1-q) - d q^d/(1-q^d), q = e^-1
        let q = (-1.0f64).exp();
        let d = 30.0;
        let oracle = q / (1.0 - q) - d * q.powf(d) / (1.0 - q.powf(d));
        let mean = rho.expectation(&ops.n_op).re;
        assert!((mean - oracle).abs() < 1e-12, "{mean} vs {oracle}");
        assert!((mean - 1.0 / (1f64.exp() - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn rejects_nonpositive_temperature() {
        let h = ComplexMatrix::from_diagonal(&[0.0, 1.0]);
        assert!(gibbs_state(&h, 0.0).is_err());
        assert!(gibbs_state(&h, -1.0).is_err());
    }

    #[test]
    fn entropy_reference_values() {
        let pure = DensityMatrix::basis_state(3, 0).unwrap();
        assert_eq!(von_neumann_entropy(&pure).unwrap(), 0.0);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!((von_neumann_entropy(&mixed).unwrap() - 2f64.ln()).abs() < 1e-15);

        // thermal oscillator with N = 1: T = 1/ln 2
        let ops = fock_operators(FockTruncation::new(60).unwrap());
        let rho = gibbs_state(&ops.n_op, 1.0 / 2f64.ln()).unwrap();
        let n = rho.expectation(&ops.n_op).re;
        let closed = (n + 1.0) * (n + 1.0).ln() - n * n.ln();
        let s = von_neumann_entropy(&rho).unwrap();
        assert!((s - closed).abs() < 1e-12);
        assert!((s - 2.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn gibbs_states_are_valid_over_temperature_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = rng.gen_range(2..7);
            let mut h = ComplexMatrix::zeros(n);
            for i in 0..n {
                h[(i, i)] = C64::new(rng.gen_range(-3.0..3.0), 0.0);
                for j in (i + 1)..n {
                    let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    h[(i, j)] = z;
                    h[(j, i)] = z.conj();
                }
            }
            for t in [1e-3, 0.1, 1.0, 10.0, 1e9] {
                let rho = gibbs_state(&h, t).unwrap();
                DensityMatrix::new(rho.matrix().clone()).unwrap();
            }
        }
    }

    #[test]
    fn entropy_unitary_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let n = 5;
            let mut g = ComplexMatrix::zeros(n);
            let mut h = ComplexMatrix::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    g[(i, j)] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
                h[(i, i)] = C64::new(rng.gen_range(-1.0..1.0), 0.0);
                for j in (i + 1)..n {
                    let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    h[(i, j)] = z;
                    h[(j, i)] = z.conj();
                }
            }
            let gg = g.matmul(&g.adjoint());
            let tr = gg.trace().re;
            let rho = DensityMatrix::new(gg.scale_real(1.0 / tr).hermitian_part()).unwrap();
            let u = hermitian_eigen(&h).unwrap().vectors;
            let rotated = u.matmul(rho.matrix()).matmul(&u.adjoint()).hermitian_part();
            let rotated = DensityMatrix::new(rotated).unwrap();
            let s0 = von_neumann_entropy(&rho).unwrap();
            let s1 = von_neumann_entropy(&rotated).unwrap();
            assert!((s0 - s1).abs() <= 1e-9);
        }
    }

    #[test]
    fn density_matrix_validation() {
        let bad_trace = ComplexMatrix::from_diagonal(&[0.5, 0.4]);
        assert!(DensityMatrix::new(bad_trace).is_err());
        let negative = ComplexMatrix::from_diagonal(&[1.5, -0.5]);
        assert!(DensityMatrix::new(negative).is_err());
        let non_herm = ComplexMatrix::from_real_rows(&[vec![0.5, 0.1], vec![0.0, 0.5]]).unwrap();
        assert!(DensityMatrix::new(non_herm).is_err());
    }

    #[test]
    fn trace_distance_of_orthogonal_states() {
        let a = DensityMatrix::basis_state(2, 0).unwrap();
        let b = DensityMatrix::basis_state(2, 1).unwrap();
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(trace_distance(&a, &a).unwrap(), 0.0);
    }
}
