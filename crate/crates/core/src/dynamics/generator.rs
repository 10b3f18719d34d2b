use std::collections::BTreeMap;

use log::warn;

use crate::baths::{occupation_from_ratio, BathModel};
use crate::error::{Error, Result};
use crate::qcore::sparse::SparseOp;
use crate::qcore::{
    fock_operators, hermitian_eigen, qubit_lowering, qubit_raising, ComplexMatrix, DensityMatrix,
    FockTruncation, C64, ZERO,
};

const HAMILTONIAN_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Emission into the bath (rate ∝ G(ω)).
    Down,
    /// Absorption from the bath (rate ∝ G(−ω)).
    Up,
}

/// One GKLS dissipator rate · (JρJ† − ½{J†J, ρ}) tagged with its bath and
/// Bohr frequency.
#[derive(Clone, Debug)]
pub struct DissipatorSpec {
    pub jump: ComplexMatrix,
    pub rate: f64,
    pub bath_id: String,
    pub bohr_omega: f64,
    pub direction: Direction,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BathCoupling {
    pub model: BathModel,
    pub gamma0: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThermometerKind {
    Oscillator(FockTruncation),
    TwoLevel,
}

impl ThermometerKind {
    pub fn dim(self) -> usize {
        match self {
            Self::Oscillator(t) => t.levels(),
            Self::TwoLevel => 2,
        }
    }
}

/// GKLS generator L(ρ) = −i[H, ρ] + Σ_k rate_k (J_k ρ J_k† − ½{J_k†J_k, ρ}).
#[derive(Clone, Debug)]
pub struct Generator {
    hamiltonian: ComplexMatrix,
    dissipators: Vec<DissipatorSpec>,
    baths: BTreeMap<String, BathCoupling>,
    /// H − (i/2) Σ rate J†J
    h_eff: SparseOp,
    /// active (rate > 0) dissipators: (index into `dissipators`, sparse J)
    jumps: Vec<(usize, SparseOp)>,
    max_abs_energy: f64,
}

impl Generator {
    pub fn new(
        hamiltonian: ComplexMatrix,
        baths: BTreeMap<String, BathCoupling>,
        dissipators: Vec<DissipatorSpec>,
    ) -> Result<Self> {
        let d = hamiltonian.dim();
        if !hamiltonian.is_finite() {
            return Err(Error::param("hamiltonian", "entries must be finite"));
        }
        let defect = hamiltonian.hermiticity_defect();
        if defect > HAMILTONIAN_TOL {
            return Err(Error::NotHermitian { deviation: defect });
        }
        for (id, b) in &baths {
            b.model.validate()?;
            if !(b.gamma0 > 0.0) || !b.gamma0.is_finite() {
                return Err(Error::param("gamma0", format!("coupling of bath `{id}` must be positive")));
            }
        }
        for dis in &dissipators {
            if dis.jump.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: dis.jump.dim(),
                });
            }
            if !(dis.rate >= 0.0) || !dis.rate.is_finite() {
                return Err(Error::param("rate", format!("dissipator rate must be finite and >= 0, got {}", dis.rate)));
            }
            if !(dis.bohr_omega > 0.0) {
                return Err(Error::param("bohr_omega", "Bohr frequency must be positive"));
            }
            if !baths.contains_key(&dis.bath_id) {
                return Err(Error::UnknownBath(dis.bath_id.clone()));
            }
        }

        let mut h_eff = hamiltonian.clone();
        let mut jumps = Vec::new();
        for (k, dis) in dissipators.iter().enumerate() {
            if dis.rate == 0.0 {
                continue;
            }
            let jdj = dis.jump.adjoint().matmul(&dis.jump);
            h_eff = &h_eff - &jdj.scale(C64::new(0.0, 0.5 * dis.rate));
            jumps.push((k, SparseOp::from_dense(&dis.jump)));
        }
        let energies = hermitian_eigen(&hamiltonian)?.values;
        let max_abs_energy = energies.iter().map(|e| e.abs()).fold(0.0, f64::max);

        Ok(Self {
            h_eff: SparseOp::from_dense(&h_eff),
            hamiltonian,
            dissipators,
            baths,
            jumps,
            max_abs_energy,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn dissipators(&self) -> &[DissipatorSpec] {
        &self.dissipators
    }

    pub fn baths(&self) -> &BTreeMap<String, BathCoupling> {
        &self.baths
    }

    pub fn max_rate(&self) -> f64 {
        self.dissipators.iter().map(|d| d.rate).fold(0.0, f64::max)
    }

    pub fn has_dissipation(&self) -> bool {
        !self.jumps.is_empty()
    }

    /// max rate · d + max |E|; the RK4 guard requires dt times this ≤ 0.1.
    pub fn stiffness(&self) -> f64 {
        self.max_rate() * self.dim() as f64 + self.max_abs_energy
    }

    pub(crate) fn h_eff(&self) -> &SparseOp {
        &self.h_eff
    }

    pub(crate) fn active_jumps(&self) -> impl Iterator<Item = (&DissipatorSpec, &SparseOp)> {
        self.jumps.iter().map(move |(k, op)| (&self.dissipators[*k], op))
    }

    /// L(X) for row-major `x`, written into `out`. `scratch` must hold d².
    pub(crate) fn apply_into(&self, x: &[C64], out: &mut [C64], scratch: &mut [C64]) {
        out.fill(ZERO);
        self.h_eff.left_mul_add(x, C64::new(0.0, -1.0), out);
        self.h_eff.right_mul_adjoint_add(x, C64::new(0.0, 1.0), out);
        for (dis, op) in self.active_jumps() {
            scratch.fill(ZERO);
            op.left_mul_add(x, C64::new(dis.rate, 0.0), scratch);
            op.right_mul_adjoint_add(scratch, C64::new(1.0, 0.0), out);
        }
    }

    /// L applied to an arbitrary matrix.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.dim();
        if m.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: m.dim(),
            });
        }
        let mut out = vec![ZERO; d * d];
        let mut scratch = vec![ZERO; d * d];
        self.apply_into(m.as_slice(), &mut out, &mut scratch);
        Ok(ComplexMatrix::from_vec_unchecked(d, out))
    }

    /// Dissipative part belonging to one bath, D_b(ρ).
    pub fn apply_bath(&self, bath_id: &str, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if !self.baths.contains_key(bath_id) {
            return Err(Error::UnknownBath(bath_id.to_string()));
        }
        let d = self.dim();
        if m.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: m.dim(),
            });
        }
        let mut out = vec![ZERO; d * d];
        let mut scratch = vec![ZERO; d * d];
        for (dis, op) in self.active_jumps().filter(|(dis, _)| dis.bath_id == bath_id) {
            let jdj = SparseOp::from_dense(&dis.jump.adjoint().matmul(&dis.jump));
            let half = C64::new(-0.5 * dis.rate, 0.0);
            jdj.left_mul_add(m.as_slice(), half, &mut out);
            jdj.right_mul_adjoint_add(m.as_slice(), half, &mut out);
            scratch.fill(ZERO);
            op.left_mul_add(m.as_slice(), C64::new(dis.rate, 0.0), &mut scratch);
            op.right_mul_adjoint_add(&scratch, C64::new(1.0, 0.0), &mut out);
        }
        Ok(ComplexMatrix::from_vec_unchecked(d, out))
    }
}

/// GKLS right-hand side for a state.
pub fn apply_generator(gen: &Generator, rho: &DensityMatrix) -> Result<ComplexMatrix> {
    gen.apply_matrix(rho.matrix())
}

/// Single-bath thermometer coupled through (a + a†) ⊗ B, bath id `"bath"`.
pub fn build_thermometer_generator(
    kind: ThermometerKind,
    omega: f64,
    bath: &BathModel,
    gamma0: f64,
) -> Result<Generator> {
    build_multi_bath_thermometer(kind, omega, &[("bath".to_string(), bath.clone(), gamma0)])
}

/// Thermometer coupled to several baths at its single Bohr frequency ω.
/// Each bath contributes emission (rate γ₀(N+1)) and absorption (rate γ₀N)
/// with N = ratio/(1 − ratio) taken from G(−ω)/G(ω).
pub fn build_multi_bath_thermometer(
    kind: ThermometerKind,
    omega: f64,
    baths: &[(String, BathModel, f64)],
) -> Result<Generator> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::param("omega", format!("thermometer frequency must be positive, got {omega}")));
    }
    let (h, lower, raise) = match kind {
        ThermometerKind::Oscillator(trunc) => {
            let ops = fock_operators(trunc);
            (ops.n_op.scale_real(omega), ops.a, ops.a_dag)
        }
        ThermometerKind::TwoLevel => (
            ComplexMatrix::from_diagonal(&[0.0, omega]),
            qubit_lowering(),
            qubit_raising(),
        ),
    };
    let mut couplings = BTreeMap::new();
    let mut dissipators = Vec::new();
    for (id, model, gamma0) in baths {
        if !(*gamma0 > 0.0) || !gamma0.is_finite() {
            return Err(Error::param("gamma0", format!("coupling must be positive, got {gamma0}")));
        }
        if *gamma0 > omega / 10.0 {
            warn!("gamma0 = {gamma0} exceeds omega/10 = {}; weak-coupling assumption is questionable", omega / 10.0);
        }
        let n = occupation_from_ratio(model, omega)?;
        if couplings.insert(id.clone(), BathCoupling { model: model.clone(), gamma0: *gamma0 }).is_some() {
            return Err(Error::param("bath_id", format!("duplicate bath id `{id}`")));
        }
        dissipators.push(DissipatorSpec {
            jump: lower.clone(),
            rate: gamma0 * (n + 1.0),
            bath_id: id.clone(),
            bohr_omega: omega,
            direction: Direction::Down,
        });
        dissipators.push(DissipatorSpec {
            jump: raise.clone(),
            rate: gamma0 * n,
            bath_id: id.clone(),
            bohr_omega: omega,
            direction: Direction::Up,
        });
    }
    Generator::new(h, couplings, dissipators)
}
