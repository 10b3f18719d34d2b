use super::generator::Generator;
use crate::error::{Error, Result};
use crate::qcore::{hermitian_eigen, ComplexMatrix, DensityMatrix, C64, ZERO};

/// dt · stiffness may not exceed this.
pub const STABILITY_LIMIT: f64 = 0.1;
/// Upper bound on the number of stored samples per trajectory.
pub const MAX_SAMPLES: usize = 500;
/// Drift beyond which integration aborts.
const INVARIANT_ABORT: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub state: DensityMatrix,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    /// step actually used (t_final / steps, never above the requested dt)
    pub dt: f64,
    pub steps: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> &DensityMatrix {
        &self.points.last().expect("trajectory is never empty").state
    }
}

/// Largest step allowed by the stability guard for this generator.
pub fn max_stable_dt(gen: &Generator) -> f64 {
    let s = gen.stiffness();
    if s == 0.0 {
        f64::INFINITY
    } else {
        STABILITY_LIMIT / s
    }
}

pub fn check_stability(gen: &Generator, dt: f64) -> Result<()> {
    let value = dt * gen.stiffness();
    if value > STABILITY_LIMIT * (1.0 + 1e-12) {
        return Err(Error::StabilityGuard { value });
    }
    Ok(())
}

pub(crate) struct Rk4Workspace {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
    scratch: Vec<C64>,
}

impl Rk4Workspace {
    pub fn new(d: usize) -> Self {
        let z = vec![ZERO; d * d];
        Self {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z.clone(),
            scratch: z,
        }
    }

    /// One classic fourth-order Runge–Kutta step of size h, in place.
    pub fn step(&mut self, gen: &Generator, x: &mut [C64], h: f64) {
        let Self {
            k1,
            k2,
            k3,
            k4,
            tmp,
            scratch,
        } = self;
        gen.apply_into(x, k1, scratch);
        axpy_into(tmp, x, 0.5 * h, k1);
        gen.apply_into(tmp, k2, scratch);
        axpy_into(tmp, x, 0.5 * h, k2);
        gen.apply_into(tmp, k3, scratch);
        axpy_into(tmp, x, h, k3);
        gen.apply_into(tmp, k4, scratch);
        let w = h / 6.0;
        for i in 0..x.len() {
            x[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
        }
    }
}

fn axpy_into(out: &mut [C64], x: &[C64], a: f64, y: &[C64]) {
    for ((o, &xi), &yi) in out.iter_mut().zip(x).zip(y) {
        *o = xi + yi * a;
    }
}

/// Re-Hermitizes and renormalizes, then checks the state invariants.
fn stabilize(x: &mut [C64], d: usize, t: f64) -> Result<DensityMatrix> {
    let m = ComplexMatrix::from_vec_unchecked(d, x.to_vec());
    if !m.is_finite() {
        return Err(Error::StateInvariant {
            t,
            detail: "non-finite entries (integration diverged)".into(),
        });
    }
    let herm_defect = m.hermiticity_defect();
    let tr = m.trace();
    if herm_defect > INVARIANT_ABORT || (tr - C64::new(1.0, 0.0)).norm() > INVARIANT_ABORT {
        return Err(Error::StateInvariant {
            t,
            detail: format!("Hermiticity defect {herm_defect:e}, trace {tr}"),
        });
    }
    let fixed = m.hermitian_part().scale_real(1.0 / tr.re);
    let min_eig = hermitian_eigen(&fixed)?.values[0];
    if min_eig < -INVARIANT_ABORT {
        return Err(Error::StateInvariant {
            t,
            detail: format!("minimum eigenvalue {min_eig:e}"),
        });
    }
    x.copy_from_slice(fixed.as_slice());
    DensityMatrix::with_tolerance(fixed, 1e-12, 1e-10, INVARIANT_ABORT)
}

/// Fixed-step RK4 integration of dρ/dt = L(ρ) up to `t_final`.
///
/// The step count is ceil(t_final/dt), with the step shrunk so that the
/// last step lands on `t_final`. States are stored every
/// ceil(steps/500) steps and at the end.
pub fn evolve(gen: &Generator, rho0: &DensityMatrix, t_final: f64, dt: f64) -> Result<Trajectory> {
    let d = gen.dim();
    if rho0.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: rho0.dim(),
        });
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::param("dt", format!("time step must be positive, got {dt}")));
    }
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::param("t_final", format!("final time must be >= 0, got {t_final}")));
    }
    check_stability(gen, dt)?;

    let steps = if t_final == 0.0 {
        0
    } else {
        ((t_final / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
    };
    let h = if steps == 0 { dt } else { t_final / steps as f64 };
    let stride = steps.div_ceil(MAX_SAMPLES).max(1);

    let mut x = rho0.matrix().as_slice().to_vec();
    let mut ws = Rk4Workspace::new(d);
    let mut points = vec![TrajectoryPoint {
        t: 0.0,
        state: rho0.clone(),
    }];
    for k in 1..=steps {
        ws.step(gen, &mut x, h);
        if k % stride == 0 || k == steps {
            let t = k as f64 * h;
            let state = stabilize(&mut x, d, t)?;
            points.push(TrajectoryPoint { t, state });
        }
    }
    Ok(Trajectory {
        points,
        dt: h,
        steps,
    })
}
