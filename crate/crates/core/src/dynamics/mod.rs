//! Master-equation thermometers: generator construction, time evolution,
//! stationary states and trajectory export.

mod evolve;
mod export;
mod generator;
mod steady;

pub use evolve::{check_stability, evolve, max_stable_dt, Trajectory, TrajectoryPoint, MAX_SAMPLES, STABILITY_LIMIT};
pub use export::write_trajectory_csv;
pub use generator::{
    apply_generator, build_multi_bath_thermometer, build_thermometer_generator, BathCoupling, Direction,
    DissipatorSpec, Generator, ThermometerKind,
};
pub use steady::{steady_state, RESIDUAL_TOL};

use crate::error::{Error, Result};
use crate::qcore::{DensityMatrix, FockTruncation};

/// Tail population callers enforce before trusting a truncated oscillator.
pub const TAIL_TOL: f64 = 1e-6;
/// Largest truncation the automatic search will try.
pub const MAX_AUTO_LEVELS: usize = 8192;

/// Population of the two highest Fock levels.
pub fn tail_guard(rho: &DensityMatrix) -> f64 {
    let p = rho.populations();
    p.iter().rev().take(2).sum()
}

/// Truncated oscillator problem solved with the smallest tried d whose
/// steady state has tail population below `tol`.
#[derive(Clone, Debug)]
pub struct AutoTruncated {
    pub trunc: FockTruncation,
    pub generator: Generator,
    pub steady: DensityMatrix,
    pub tail: f64,
}

/// Starting from `start`, grows d by half until the steady-state tail
/// population drops below `tol`.
pub fn steady_state_auto_truncation(
    start: FockTruncation,
    tol: f64,
    build: impl Fn(FockTruncation) -> Result<Generator>,
) -> Result<AutoTruncated> {
    if !(tol > 0.0) {
        return Err(Error::param("tol", "tail tolerance must be positive"));
    }
    let mut d = start.levels();
    loop {
        let trunc = FockTruncation::new(d)?;
        let generator = build(trunc)?;
        let steady = steady_state(&generator)?;
        let tail = tail_guard(&steady);
        if tail < tol {
            return Ok(AutoTruncated {
                trunc,
                generator,
                steady,
                tail,
            });
        }
        if d >= MAX_AUTO_LEVELS {
            return Err(Error::Unsupported(format!(
                "tail population {tail:e} still above {tol:e} at d = {d}"
            )));
        }
        d = (d + d / 2).min(MAX_AUTO_LEVELS);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baths::BathModel;
    use crate::qcore::{fock_operators, gibbs_state};

    #[test]
    fn tail_of_ground_state_is_zero() {
        assert_eq!(tail_guard(&DensityMatrix::basis_state(30, 0).unwrap()), 0.0);
    }

    #[test]
    fn tail_of_thermal_states() {
        let ops = fock_operators(FockTruncation::new(30).unwrap());
        // N = 1: geometric with ratio 1/2
        let rho = gibbs_state(&ops.n_op, 1.0 / 2f64.ln()).unwrap();
        let tail = tail_guard(&rho);
        let oracle = (0.5f64.powi(28) + 0.5f64.powi(29)) * 0.5 / (1.0 - 0.5f64.powi(30));
        assert!((tail - oracle).abs() < 1e-20);
        assert!(tail < 1e-8);
        // N = 10: guard must fire
        let rho = gibbs_state(&ops.n_op, 1.0 / (1.1f64).ln()).unwrap();
        assert!(tail_guard(&rho) > 1e-3);
    }

    #[test]
    fn auto_truncation_grows_until_tail_is_small() {
        let bath = BathModel::squeezed(1.0, 1.0).unwrap();
        let auto = steady_state_auto_truncation(FockTruncation::new(10).unwrap(), TAIL_TOL, |t| {
            build_thermometer_generator(ThermometerKind::Oscillator(t), 1.0, &bath, 0.1)
        })
        .unwrap();
        assert!(auto.tail < TAIL_TOL);
        assert!(auto.trunc.levels() > 30);
    }
}
