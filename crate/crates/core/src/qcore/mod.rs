//! Dense complex linear algebra, states and truncated operators.

mod eigen;
mod fock;
mod matrix;
pub(crate) mod sparse;
mod state;

pub use eigen::{hermitian_eigen, Eigen};
pub use fock::{
    fock_operators, qubit_lowering, qubit_raising, FockOperators, FockTruncation,
    DEFAULT_FOCK_LEVELS,
};
pub use matrix::{ComplexMatrix, C64};
pub use state::{gibbs_state, trace_distance, von_neumann_entropy, DensityMatrix, HERMITIAN_TOL, POSITIVITY_TOL, TRACE_TOL};

pub(crate) use matrix::ZERO;
pub(crate) use state::entropy_of_spectrum;
