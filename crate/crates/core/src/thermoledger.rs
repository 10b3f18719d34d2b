//! Heat currents, entropy rate and entropy production.
//!
//! For a stroke with fixed Hamiltonian H, bath b exchanges heat
//! J_b = Tr(H D_b(ρ)) (positive into the system) at its single Bohr
//! frequency ω_b, where it reads the local inverse temperature β_b[ω_b].
//! The entropy production
//!
//! ```text
//! σ = dS/dt − Σ_b β_b[ω_b] J_b
//! ```
//!
//! is non-negative for every state when each bath's rates obey detailed
//! balance at β_b[ω_b].

use std::io::Write;

use crate::baths::{local_temperature, BathModel, LocalTemperature};
use crate::dynamics::{Generator, Trajectory};
use crate::error::{Error, Result};
use crate::qcore::{entropy_of_spectrum, DensityMatrix};
use crate::report::fmt_sig;

/// Eigenvalues below this are raised to it before taking logarithms.
pub const EIGEN_CLAMP: f64 = 1e-14;
/// Slack on σ ≥ 0 allowed for rounding.
pub const SIGMA_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct BathFlow {
    pub bath_id: String,
    /// energy per unit time, positive into the system
    pub current: f64,
    pub local: LocalTemperature,
    /// β < 0: the (tabulated) bath is population-inverted at its frequency.
    pub inverted: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThermoReport {
    /// one entry per bath, ordered by bath id
    pub flows: Vec<BathFlow>,
    pub entropy_rate: f64,
    pub sigma: f64,
}

impl ThermoReport {
    pub fn flow(&self, bath_id: &str) -> Option<&BathFlow> {
        self.flows.iter().find(|f| f.bath_id == bath_id)
    }

    /// Σ_b β_b J_b
    pub fn entropy_flow(&self) -> f64 {
        self.flows.iter().map(|f| f.local.beta * f.current).sum()
    }

    pub fn total_current(&self) -> f64 {
        self.flows.iter().map(|f| f.current).sum()
    }
}

/// J_b = Tr(H D_b(ρ)).
pub fn heat_current(gen: &Generator, bath_id: &str, rho: &DensityMatrix) -> Result<f64> {
    let dissipated = gen.apply_bath(bath_id, rho.matrix())?;
    Ok(trace_product(gen.hamiltonian(), &dissipated))
}

fn trace_product(a: &crate::qcore::ComplexMatrix, b: &crate::qcore::ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for (k, &aik) in a.row(i).iter().enumerate() {
            if aik.re != 0.0 || aik.im != 0.0 {
                acc += (aik * b[(k, i)]).re;
            }
        }
    }
    acc
}

/// dS/dt = −Tr(L(ρ) ln ρ), evaluated in the eigenbasis of ρ.
pub fn entropy_rate(gen: &Generator, rho: &DensityMatrix) -> Result<f64> {
    let eig = rho.eigen()?;
    if let Some(&min) = eig.values.first() {
        if min < -crate::qcore::POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
    }
    let lrho = gen.apply_matrix(rho.matrix())?;
    // diag(V† L(ρ) V)
    let y = lrho.matmul(&eig.vectors);
    let n = rho.dim();
    let mut rate = 0.0;
    for k in 0..n {
        let mut proj = 0.0;
        for i in 0..n {
            let v = eig.vectors[(i, k)];
            if v.re != 0.0 || v.im != 0.0 {
                proj += (v.conj() * y[(i, k)]).re;
            }
        }
        rate -= proj * eig.values[k].max(EIGEN_CLAMP).ln();
    }
    Ok(rate)
}

/// Von Neumann entropy with the same eigen path as `entropy_rate`.
pub fn entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(entropy_of_spectrum(&rho.eigen()?.values))
}

fn bath_frequency(gen: &Generator, bath_id: &str) -> Result<Option<f64>> {
    let mut omega: Option<f64> = None;
    for dis in gen.dissipators().iter().filter(|d| d.bath_id == bath_id) {
        match omega {
            None => omega = Some(dis.bohr_omega),
            Some(w) if (w - dis.bohr_omega).abs() <= 1e-12 * w => {}
            Some(w) => {
                return Err(Error::Unsupported(format!(
                    "bath `{bath_id}` couples at several Bohr frequencies ({w} and {}); \
                     averaged local temperatures are not defined",
                    dis.bohr_omega
                )))
            }
        }
    }
    Ok(omega)
}

/// Full entropy balance for state ρ under `gen`.
pub fn entropy_production(gen: &Generator, rho: &DensityMatrix) -> Result<ThermoReport> {
    let mut flows = Vec::new();
    for (id, coupling) in gen.baths() {
        let Some(omega) = bath_frequency(gen, id)? else {
            continue;
        };
        let local = local_temperature(&coupling.model, omega)?;
        if !local.beta.is_finite() {
            return Err(Error::Unsupported(format!(
                "bath `{id}` has an infinite local inverse temperature at omega = {omega}"
            )));
        }
        let inverted = local.is_inverted();
        if inverted && !matches!(coupling.model, BathModel::Tabulated(_)) {
            return Err(Error::InvalidSpectrum(format!("built-in bath `{id}` reported inversion")));
        }
        flows.push(BathFlow {
            bath_id: id.clone(),
            current: heat_current(gen, id, rho)?,
            local,
            inverted,
        });
    }
    let rate = entropy_rate(gen, rho)?;
    let flow: f64 = flows.iter().map(|f| f.local.beta * f.current).sum();
    Ok(ThermoReport {
        flows,
        entropy_rate: rate,
        sigma: rate - flow,
    })
}

/// 1 − β_hot/β_cold, i.e. 1 − T_cold/T_hot; β_hot = 0 is an infinitely hot bath.
pub fn carnot_bound(beta_cold: f64, beta_hot: f64) -> Result<f64> {
    if !(beta_hot >= 0.0 && beta_hot < beta_cold) || !beta_cold.is_finite() {
        return Err(Error::param(
            "beta",
            format!("need 0 <= beta_hot < beta_cold, got beta_hot = {beta_hot}, beta_cold = {beta_cold}"),
        ));
    }
    Ok(1.0 - beta_hot / beta_cold)
}

/// Report at every stored point of a trajectory.
pub fn ledger_along(gen: &Generator, traj: &Trajectory) -> Result<Vec<(f64, ThermoReport)>> {
    traj.points
        .iter()
        .map(|p| Ok((p.t, entropy_production(gen, &p.state)?)))
        .collect()
}

/// Writes `t,J_<id>...,beta_<id>...,dS_dt,sigma`.
pub fn write_report_csv(mut w: impl Write, rows: &[(f64, ThermoReport)]) -> Result<()> {
    let Some((_, first)) = rows.first() else {
        return Ok(());
    };
    let ids: Vec<&str> = first.flows.iter().map(|f| f.bath_id.as_str()).collect();
    let mut header = vec!["t".to_string()];
    header.extend(ids.iter().map(|id| format!("J_{id}")));
    header.extend(ids.iter().map(|id| format!("beta_{id}")));
    header.push("dS_dt".into());
    header.push("sigma".into());
    writeln!(w, "{}", header.join(","))?;
    for (t, rep) in rows {
        let mut fields = vec![fmt_sig(*t)];
        for id in &ids {
            fields.push(rep.flow(id).map_or("nan".into(), |f| fmt_sig(f.current)));
        }
        for id in &ids {
            fields.push(rep.flow(id).map_or("nan".into(), |f| fmt_sig(f.local.beta)));
        }
        fields.push(fmt_sig(rep.entropy_rate));
        fields.push(fmt_sig(rep.sigma));
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}
