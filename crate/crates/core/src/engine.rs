//! Quantum Otto cycle between a thermal cold bath and an arbitrary hot bath.
//!
//! The working oscillator is tracked by its mean occupation. Adiabats keep
//! n fixed while the frequency switches between ω_c and ω_h; isochores relax
//! n towards the bath occupation at the current frequency,
//! n' = N + (n − N) e^{−γ₀τ}.

use std::io::Write;

use rayon::prelude::*;

use crate::baths::{bose_occupation, effective_occupation, local_temperature, occupation_from_ratio, BathModel, LocalTemperature};
use crate::error::{Error, Result};
use crate::report::fmt_sig;

/// Slack on eta ≤ eta_generalized.
pub const BOUND_TOL: f64 = 1e-9;
/// Default upper end of the ω_h search, in units of ω_c.
pub const DEFAULT_RANGE_FACTOR: f64 = 50.0;
pub const SEARCH_TOL: f64 = 1e-6;
pub const SEARCH_MAX_ITER: usize = 200;
const PRESCAN_POINTS: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StrokeTiming {
    /// full thermalization on both isochores
    Ideal,
    Finite { tau_h: f64, tau_c: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CycleParams {
    pub omega_c: f64,
    pub omega_h: f64,
    /// cold bath temperature
    pub t1: f64,
    pub hot: BathModel,
    pub gamma0: f64,
    pub timing: StrokeTiming,
    pub tau_adiabatic: f64,
}

impl CycleParams {
    pub fn ideal(omega_c: f64, omega_h: f64, t1: f64, hot: BathModel) -> Self {
        CycleParams { omega_c, omega_h, t1, hot, gamma0: 1.0, timing: StrokeTiming::Ideal, tau_adiabatic: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_c > 0.0 && self.omega_c.is_finite()) {
            return Err(Error::param("omega_c", format!("must be positive and finite, got {}", self.omega_c)));
        }
        if !(self.omega_h > self.omega_c && self.omega_h.is_finite()) {
            return Err(Error::param(
                "omega_h",
                format!("must exceed omega_c = {}, got {}", self.omega_c, self.omega_h),
            ));
        }
        if !(self.t1 > 0.0 && self.t1.is_finite()) {
            return Err(Error::param("T1", format!("must be positive and finite, got {}", self.t1)));
        }
        if !(self.gamma0 > 0.0 && self.gamma0.is_finite()) {
            return Err(Error::param("gamma0", format!("must be positive and finite, got {}", self.gamma0)));
        }
        if !(self.tau_adiabatic >= 0.0 && self.tau_adiabatic.is_finite()) {
            return Err(Error::param("tau_adiabatic", format!("must be >= 0, got {}", self.tau_adiabatic)));
        }
        if let StrokeTiming::Finite { tau_h, tau_c } = self.timing {
            for (name, v) in [("tau_h", tau_h), ("tau_c", tau_c)] {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::param(name, format!("must be positive and finite, got {v}")));
                }
            }
        }
        self.hot.validate()
    }

    pub fn with_omega_h(&self, omega_h: f64) -> Self {
        CycleParams { omega_h, ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CycleResult {
    pub params: CycleParams,
    /// occupation after the cold stroke
    pub n_a: f64,
    /// occupation after the hot stroke
    pub n_b: f64,
    /// hot-bath occupation at ω_h
    pub n_hot: f64,
    pub q_h: f64,
    pub q_c: f64,
    pub work: f64,
    /// W/Q_h, or 0 when no positive work is produced
    pub eta: f64,
    /// None for ideal cycles
    pub power: Option<f64>,
    /// 1 − T1/T2 when the hot bath has a nominal temperature
    pub eta_carnot_naive: Option<f64>,
    pub t_local_hot: LocalTemperature,
    /// 1 − T1/T_hot[ω_h], defined when β_hot[ω_h] < 1/T1
    pub eta_generalized: Option<f64>,
    pub positive_work: bool,
}

fn hot_occupation(hot: &BathModel, omega: f64) -> Result<f64> {
    match hot {
        BathModel::Tabulated(_) => occupation_from_ratio(hot, omega),
        _ => effective_occupation(hot, omega),
    }
}

pub fn run_cycle(params: &CycleParams) -> Result<CycleResult> {
    params.validate()?;
    let p = params;
    let n_cold = bose_occupation(p.omega_c, p.t1)?;
    let n_hot = hot_occupation(&p.hot, p.omega_h)?;
    let (n_a, n_b, period) = match p.timing {
        StrokeTiming::Ideal => (n_cold, n_hot, None),
        StrokeTiming::Finite { tau_h, tau_c } => {
            let xh = (-p.gamma0 * tau_h).exp();
            let xc = (-p.gamma0 * tau_c).exp();
            let n_a = (n_cold * (1.0 - xc) + xc * (1.0 - xh) * n_hot) / (1.0 - xc * xh);
            let n_b = n_hot * (1.0 - xh) + xh * n_a;
            (n_a, n_b, Some(tau_h + tau_c + 2.0 * p.tau_adiabatic))
        }
    };
    let q_h = p.omega_h * (n_b - n_a);
    let q_c = p.omega_c * (n_a - n_b);
    let work = q_h + q_c;
    let positive_work = work > 0.0;
    let eta = if positive_work { work / q_h } else { 0.0 };
    let t_local_hot = local_temperature(&p.hot, p.omega_h)?;
    let beta_cold = 1.0 / p.t1;
    let eta_generalized = (t_local_hot.beta < beta_cold).then(|| 1.0 - t_local_hot.beta / beta_cold);
    let eta_carnot_naive = p.hot.nominal_temperature().map(|t2| 1.0 - p.t1 / t2);
    Ok(CycleResult {
        params: params.clone(),
        n_a,
        n_b,
        n_hot,
        q_h,
        q_c,
        work,
        eta,
        power: period.map(|t| work / t),
        eta_carnot_naive,
        t_local_hot,
        eta_generalized,
        positive_work,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub eta: f64,
    pub eta_generalized: f64,
    /// eta_generalized − eta
    pub margin: f64,
    /// eta exceeds the naive 1 − T1/T2
    pub beyond_carnot: bool,
}

pub fn verify_bounds(result: &CycleResult) -> Result<BoundReport> {
    if !result.positive_work {
        return Err(Error::param("cycle", "bound check needs a positive-work cycle"));
    }
    let bound = result.eta_generalized.ok_or_else(|| Error::BoundViolation {
        eta: result.eta,
        bound: f64::NAN,
        params: format!("{:?}", result.params),
    })?;
    if result.eta > bound + BOUND_TOL {
        return Err(Error::BoundViolation {
            eta: result.eta,
            bound,
            params: format!("{:?}", result.params),
        });
    }
    Ok(BoundReport {
        eta: result.eta,
        eta_generalized: bound,
        margin: bound - result.eta,
        beyond_carnot: result.eta_carnot_naive.is_some_and(|c| result.eta > c),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaxPower {
    pub omega_h: f64,
    pub eta: f64,
    pub power: f64,
    /// optimum sits on an end of the search range
    pub boundary_hit: bool,
    pub iterations: usize,
    pub result: CycleResult,
}

pub fn default_range(omega_c: f64) -> (f64, f64) {
    (omega_c * (1.0 + 1e-2), omega_c * DEFAULT_RANGE_FACTOR)
}

/// Power-maximizing ω_h in [lo, hi] for a finite-time cycle.
///
/// A uniform pre-scan locates the best bracket, which golden-section search
/// then refines to `SEARCH_TOL`. The refined point is compared with both
/// range ends.
pub fn max_power_search(base: &CycleParams, lo: f64, hi: f64) -> Result<MaxPower> {
    if !matches!(base.timing, StrokeTiming::Finite { .. }) {
        return Err(Error::param("timing", "max-power search needs finite stroke durations"));
    }
    if !(lo > base.omega_c) || !(hi > lo) || !hi.is_finite() {
        return Err(Error::param(
            "omega_h_range",
            format!("need omega_c < lo < hi, got [{lo}, {hi}] with omega_c = {}", base.omega_c),
        ));
    }
    base.with_omega_h(lo).validate()?;
    let power = |w: f64| -> Result<f64> {
        let r = run_cycle(&base.with_omega_h(w))?;
        Ok(r.power.unwrap_or(f64::NAN))
    };

    let step = (hi - lo) / (PRESCAN_POINTS - 1) as f64;
    let mut best = (0, f64::NEG_INFINITY);
    for i in 0..PRESCAN_POINTS {
        let w = if i + 1 == PRESCAN_POINTS { hi } else { lo + step * i as f64 };
        let pw = power(w)?;
        if pw > best.1 {
            best = (i, pw);
        }
    }
    if !(best.1 > 0.0) {
        return Err(Error::NoPositiveWork { lo, hi });
    }

    let mut a = (lo + step * best.0.saturating_sub(1) as f64).max(lo);
    let mut b = (lo + step * (best.0 + 1) as f64).min(hi);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = power(c)?;
    let mut fd = power(d)?;
    let mut iterations = 0;
    while b - a > SEARCH_TOL && iterations < SEARCH_MAX_ITER {
        iterations += 1;
        // ties keep the left bracket
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = power(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = power(d)?;
        }
    }
    let mid = 0.5 * (a + b);
    let mut candidates = vec![(mid, power(mid)?), (lo, power(lo)?), (hi, power(hi)?)];
    // highest power, then smallest omega_h
    candidates.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.total_cmp(&y.0)));
    let (omega_h, pw) = candidates[0];
    let boundary_hit = (omega_h - lo).abs() <= SEARCH_TOL || (hi - omega_h).abs() <= SEARCH_TOL;
    let result = run_cycle(&base.with_omega_h(omega_h))?;
    Ok(MaxPower {
        omega_h,
        eta: 1.0 - base.omega_c / omega_h,
        power: pw,
        boundary_hit,
        iterations,
        result,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub r: f64,
    pub result: CycleResult,
    pub max_power: Option<MaxPower>,
}

/// One row per squeezing parameter. The hot bath of `base` must carry a
/// temperature (thermal or squeezed); its squeezing is replaced by each r.
/// With `range` set, each row is the max-power cycle in that ω_h range.
pub fn sweep(r_values: &[f64], base: &CycleParams, range: Option<(f64, f64)>) -> Vec<Result<SweepRow>> {
    r_values
        .par_iter()
        .map(|&r| {
            let t2 = base
                .hot
                .nominal_temperature()
                .ok_or_else(|| Error::Unsupported("squeezing sweep needs a thermal or squeezed hot bath".into()))?;
            let params = CycleParams { hot: BathModel::squeezed(t2, r)?, ..base.clone() };
            match range {
                Some((lo, hi)) => {
                    let mp = max_power_search(&params, lo, hi)?;
                    Ok(SweepRow { r, result: mp.result.clone(), max_power: Some(mp) })
                }
                None => Ok(SweepRow { r, result: run_cycle(&params)?, max_power: None }),
            }
        })
        .collect()
}

pub const SWEEP_HEADER: &str = "r,omega_c,omega_h,T1,T2,n_A,n_B,Q_h,Q_c,W,eta,power,eta_carnot_naive,T_local_hot,eta_generalized,positive_work,boundary_hit";

fn squeezing(bath: &BathModel) -> f64 {
    match bath {
        BathModel::SqueezedThermal { r, .. } => *r,
        BathModel::Thermal { .. } => 0.0,
        BathModel::Tabulated(_) => f64::NAN,
    }
}

/// CSV fields for one cycle; `boundary_hit` is left empty when no search ran.
pub fn sweep_fields(result: &CycleResult, boundary_hit: Option<bool>) -> Vec<String> {
    let p = &result.params;
    let opt = |x: Option<f64>| x.map_or_else(|| "nan".to_string(), fmt_sig);
    vec![
        fmt_sig(squeezing(&p.hot)),
        fmt_sig(p.omega_c),
        fmt_sig(p.omega_h),
        fmt_sig(p.t1),
        opt(p.hot.nominal_temperature()),
        fmt_sig(result.n_a),
        fmt_sig(result.n_b),
        fmt_sig(result.q_h),
        fmt_sig(result.q_c),
        fmt_sig(result.work),
        fmt_sig(result.eta),
        opt(result.power),
        opt(result.eta_carnot_naive),
        fmt_sig(result.t_local_hot.temperature_or_inf()),
        opt(result.eta_generalized),
        result.positive_work.to_string(),
        boundary_hit.map_or_else(String::new, |b| b.to_string()),
    ]
}

pub fn write_sweep_csv<'a>(
    mut w: impl Write,
    rows: impl IntoIterator<Item = (&'a CycleResult, Option<bool>)>,
) -> Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for (result, hit) in rows {
        writeln!(w, "{}", sweep_fields(result, hit).join(","))?;
    }
    Ok(())
}

/// Draws ideal-cycle parameters with T1 ∈ [0.2, 2], T2 ∈ [T1, 4],
/// r ∈ [0, 4], ω_c ∈ [0.5, 2], ω_h ∈ (ω_c, 20], retrying until the cycle
/// produces positive work. `uniform` must return samples in [0, 1).
pub fn sample_positive_work_params(mut uniform: impl FnMut() -> f64) -> Result<CycleParams> {
    let mut u = |lo: f64, hi: f64| lo + (hi - lo) * uniform();
    for _ in 0..100_000 {
        let t1 = u(0.2, 2.0);
        let t2 = u(t1, 4.0);
        let r = u(0.0, 4.0);
        let omega_c = u(0.5, 2.0);
        // (ω_c, 20]
        let omega_h = 20.0 - u(0.0, 20.0 - omega_c);
        if omega_h <= omega_c {
            continue;
        }
        let params = CycleParams::ideal(omega_c, omega_h, t1, BathModel::squeezed(t2, r)?);
        if run_cycle(&params)?.positive_work {
            return Ok(params);
        }
    }
    Err(Error::Unsupported("no positive-work sample found".into()))
}
