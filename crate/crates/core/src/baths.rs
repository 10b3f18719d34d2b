//! Bath models and the frequency-dependent local temperature.
//!
//! A stationary bath is probed at frequency ω through the ratio
//! G(−ω)/G(ω) of its correlation spectrum. Writing that ratio as a
//! Boltzmann factor e^{−βω} defines the local inverse temperature β[ω].
//! Equilibrium baths give the same β at every ω; the phase-averaged
//! squeezed thermal bath has an enhanced mode population
//! N = n̄ + (2n̄ + 1) sinh²r and therefore a hotter, ω-dependent reading.
//!
//! Conventions: ħ = k_B = 1. For built-in baths G(ω) = γ₀(N + 1) drives
//! emission and G(−ω) = γ₀N drives absorption.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

/// Bose–Einstein occupation 1/(e^{ω/T} − 1).
pub fn bose_occupation(omega: f64, temperature: f64) -> Result<f64> {
    check_omega(omega)?;
    check_temperature("T", temperature)?;
    Ok(1.0 / (omega / temperature).exp_m1())
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::param("omega", format!("frequency must be positive and finite, got {omega}")));
    }
    Ok(())
}

fn check_temperature(name: &'static str, t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::param(name, format!("temperature must be positive and finite, got {t}")));
    }
    Ok(())
}

/// ln(e^a + e^b)
fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// ln sinh²(r), −∞ at r = 0.
fn ln_sinh_sq(r: f64) -> f64 {
    if r == 0.0 {
        f64::NEG_INFINITY
    } else if r > 20.0 {
        2.0 * (r - std::f64::consts::LN_2 + (-(-2.0 * r).exp()).ln_1p())
    } else {
        2.0 * r.sinh().ln()
    }
}

/// Sampled correlation spectrum G(±ω) on a strictly increasing grid of
/// positive frequencies.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedSpectrum {
    omega: Vec<f64>,
    g_plus: Vec<f64>,
    g_minus: Vec<f64>,
}

impl TabulatedSpectrum {
    pub fn new(omega: Vec<f64>, g_plus: Vec<f64>, g_minus: Vec<f64>) -> Result<Self> {
        if omega.is_empty() {
            return Err(Error::InvalidSpectrum("empty grid".into()));
        }
        if omega.len() != g_plus.len() || omega.len() != g_minus.len() {
            return Err(Error::InvalidSpectrum(format!(
                "column lengths differ: omega {}, g_plus {}, g_minus {}",
                omega.len(),
                g_plus.len(),
                g_minus.len()
            )));
        }
        for (i, &w) in omega.iter().enumerate() {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidSpectrum(format!("omega[{i}] = {w} is not a positive frequency")));
            }
            if i > 0 && w <= omega[i - 1] {
                return Err(Error::InvalidSpectrum(format!("omega is not strictly increasing at index {i}")));
            }
            if !(g_plus[i] > 0.0) || !g_plus[i].is_finite() {
                return Err(Error::InvalidSpectrum(format!("g_plus[{i}] = {} must be positive", g_plus[i])));
            }
            if !(g_minus[i] >= 0.0) || !g_minus[i].is_finite() {
                return Err(Error::InvalidSpectrum(format!("g_minus[{i}] = {} must be nonnegative", g_minus[i])));
            }
        }
        Ok(Self {
            omega,
            g_plus,
            g_minus,
        })
    }

    /// Reads `omega,g_plus,g_minus` CSV. Errors carry the offending line.
    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| csv_error(&e, 1))?.clone();
        let names: Vec<&str> = headers.iter().collect();
        if names != ["omega", "g_plus", "g_minus"] {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header `omega,g_plus,g_minus`, found `{}`", names.join(",")),
            });
        }
        let (mut omega, mut g_plus, mut g_minus) = (Vec::new(), Vec::new(), Vec::new());
        for record in rdr.records() {
            let record = record.map_err(|e| csv_error(&e, 0))?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != 3 {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected 3 fields, found {}", record.len()),
                });
            }
            let mut vals = [0.0; 3];
            for (k, field) in record.iter().enumerate() {
                vals[k] = field.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    msg: format!("`{field}` is not a decimal number"),
                })?;
            }
            if let Some(&prev) = omega.last() {
                if vals[0] <= prev {
                    return Err(Error::Parse {
                        line,
                        msg: format!("omega {} is not greater than previous {prev}", vals[0]),
                    });
                }
            }
            if !(vals[0] > 0.0) || !(vals[1] > 0.0) || !(vals[2] >= 0.0) {
                return Err(Error::Parse {
                    line,
                    msg: "need omega > 0, g_plus > 0, g_minus >= 0".into(),
                });
            }
            omega.push(vals[0]);
            g_plus.push(vals[1]);
            g_minus.push(vals[2]);
        }
        Self::new(omega, g_plus, g_minus)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.omega[0], *self.omega.last().unwrap())
    }

    /// Piecewise-linear (g_plus, g_minus) at ω; no extrapolation.
    fn interpolate(&self, omega: f64) -> Result<(f64, f64)> {
        let (lo, hi) = self.range();
        if omega < lo || omega > hi {
            return Err(Error::OutOfRange { omega, lo, hi });
        }
        let idx = self.omega.partition_point(|&w| w < omega);
        if idx < self.omega.len() && self.omega[idx] == omega {
            return Ok((self.g_plus[idx], self.g_minus[idx]));
        }
        let (i0, i1) = (idx - 1, idx);
        let t = (omega - self.omega[i0]) / (self.omega[i1] - self.omega[i0]);
        let lerp = |v: &[f64]| v[i0] + t * (v[i1] - v[i0]);
        Ok((lerp(&self.g_plus), lerp(&self.g_minus)))
    }
}

fn csv_error(e: &csv::Error, fallback: u64) -> Error {
    let line = e.position().map_or(fallback, |p| p.line());
    Error::Parse {
        line,
        msg: e.to_string(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BathModel {
    Thermal { temperature: f64 },
    /// Phase-averaged squeezed thermal bath: only mode populations enter.
    SqueezedThermal { t2: f64, r: f64 },
    Tabulated(TabulatedSpectrum),
}

impl BathModel {
    pub fn thermal(temperature: f64) -> Result<Self> {
        check_temperature("T", temperature)?;
        Ok(Self::Thermal { temperature })
    }

    pub fn squeezed(t2: f64, r: f64) -> Result<Self> {
        check_temperature("T2", t2)?;
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::param("r", format!("squeezing must be finite and >= 0, got {r}")));
        }
        Ok(Self::SqueezedThermal { t2, r })
    }

    pub fn tabulated(spectrum: TabulatedSpectrum) -> Self {
        Self::Tabulated(spectrum)
    }

    /// Checks field invariants for values built directly from the enum.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Thermal { temperature } => check_temperature("T", temperature),
            Self::SqueezedThermal { t2, r } => Self::squeezed(t2, r).map(|_| ()),
            Self::Tabulated(_) => Ok(()),
        }
    }

    /// T for thermal baths, T2 for squeezed ones.
    pub fn nominal_temperature(&self) -> Option<f64> {
        match *self {
            Self::Thermal { temperature } => Some(temperature),
            Self::SqueezedThermal { t2, .. } => Some(t2),
            Self::Tabulated(_) => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Thermal { temperature } => format!("thermal(T={temperature})"),
            Self::SqueezedThermal { t2, r } => format!("squeezed(T2={t2}, r={r})"),
            Self::Tabulated(s) => {
                let (lo, hi) = s.range();
                format!("tabulated([{lo}, {hi}])")
            }
        }
    }
}

/// N = n̄ + (2n̄ + 1) sinh²r, with n̄ the Bose occupation at (ω, T2).
pub fn effective_occupation(bath: &BathModel, omega: f64) -> Result<f64> {
    bath.validate()?;
    match *bath {
        BathModel::Thermal { temperature } => bose_occupation(omega, temperature),
        BathModel::SqueezedThermal { t2, r } => {
            let n = bose_occupation(omega, t2)?;
            Ok(n + (2.0 * n + 1.0) * r.sinh().powi(2))
        }
        BathModel::Tabulated(_) => Err(Error::Unsupported(
            "effective occupation is defined for thermal and squeezed baths; use kms_ratio for tabulated spectra".into(),
        )),
    }
}

/// ln G(−ω)/G(ω), evaluated without cancellation for both small and
/// large ω/T and for large squeezing.
pub fn log_kms_ratio(bath: &BathModel, omega: f64) -> Result<f64> {
    check_omega(omega)?;
    bath.validate()?;
    match bath {
        BathModel::Thermal { temperature } => Ok(-omega / temperature),
        BathModel::SqueezedThermal { t2, r } => {
            // With q = e^{-x}, s = sinh²r:
            //   N/(N+1) = (q + (1+q)s) / (1 + (1+q)s) = 1 − (1−q)/(1 + (1+q)s)
            let x = omega / t2;
            let q = (-x).exp();
            let one_minus_q = -(-x).exp_m1();
            let ln_qs = q.ln_1p() + ln_sinh_sq(*r); // ln((1+q)s)
            let ln_denom = log_add_exp(0.0, ln_qs); // ln(1 + (1+q)s)
            let gap = one_minus_q * (-ln_denom).exp();
            if gap < 0.5 {
                Ok((-gap).ln_1p())
            } else {
                Ok(log_add_exp(-x, ln_qs) - ln_denom)
            }
        }
        BathModel::Tabulated(spec) => {
            let (gp, gm) = spec.interpolate(omega)?;
            if !(gp > 0.0) {
                return Err(Error::InvalidSpectrum(format!(
                    "interpolated G(omega) = {gp} is not positive at omega = {omega}"
                )));
            }
            Ok((gm / gp).ln())
        }
    }
}

/// G(−ω)/G(ω).
pub fn kms_ratio(bath: &BathModel, omega: f64) -> Result<f64> {
    if let BathModel::Tabulated(spec) = bath {
        check_omega(omega)?;
        let (gp, gm) = spec.interpolate(omega)?;
        if !(gp > 0.0) {
            return Err(Error::InvalidSpectrum(format!(
                "interpolated G(omega) = {gp} is not positive at omega = {omega}"
            )));
        }
        return Ok(gm / gp);
    }
    Ok(log_kms_ratio(bath, omega)?.exp())
}

/// Local inverse temperature β[ω]; the temperature itself is derived.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalTemperature {
    pub omega: f64,
    pub beta: f64,
}

impl LocalTemperature {
    /// Ratio exactly 1: the thermometer sees an infinitely hot bath.
    pub fn is_infinite(&self) -> bool {
        self.beta == 0.0
    }

    /// Negative for population inversion, zero when β = +∞.
    pub fn temperature(&self) -> Option<f64> {
        if self.beta == 0.0 {
            None
        } else {
            Some(1.0 / self.beta)
        }
    }

    /// T[ω] with +∞ for an infinite reading.
    pub fn temperature_or_inf(&self) -> f64 {
        self.temperature().unwrap_or(f64::INFINITY)
    }

    pub fn is_inverted(&self) -> bool {
        self.beta < 0.0
    }
}

/// β[ω] = −ln(G(−ω)/G(ω)) / ω.
pub fn local_temperature(bath: &BathModel, omega: f64) -> Result<LocalTemperature> {
    let ln_ratio = log_kms_ratio(bath, omega)?;
    // -0.0 would make T = -inf
    let beta = if ln_ratio == 0.0 { 0.0 } else { -ln_ratio / omega };
    Ok(LocalTemperature { omega, beta })
}

/// Mean occupation that makes a thermometer at ω reproduce the bath's
/// ratio: N = ratio/(1 − ratio). Errors on inversion or an infinite reading.
pub fn occupation_from_ratio(bath: &BathModel, omega: f64) -> Result<f64> {
    let ln_ratio = log_kms_ratio(bath, omega)?;
    if ln_ratio >= 0.0 {
        return Err(Error::UnsupportedInversion {
            omega,
            ratio: ln_ratio.exp(),
        });
    }
    Ok(1.0 / (-ln_ratio).exp_m1())
}
