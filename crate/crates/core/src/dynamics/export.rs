use std::io::Write;

use super::evolve::Trajectory;
use super::generator::ThermometerKind;
use crate::error::Result;
use crate::qcore::{trace_distance, von_neumann_entropy, DensityMatrix};
use crate::report::fmt_sig;

/// Writes `t,mean_n,p0,...,p{d-1},entropy,trace_dist_gibbs` for an
/// oscillator (distance to `reference`) or `t,p_g,p_e,entropy` for a
/// two-level thermometer.
pub fn write_trajectory_csv(
    mut w: impl Write,
    traj: &Trajectory,
    kind: ThermometerKind,
    reference: &DensityMatrix,
) -> Result<()> {
    match kind {
        ThermometerKind::Oscillator(trunc) => {
            let d = trunc.levels();
            let mut header = vec!["t".to_string(), "mean_n".to_string()];
            header.extend((0..d).map(|k| format!("p{k}")));
            header.push("entropy".into());
            header.push("trace_dist_gibbs".into());
            writeln!(w, "{}", header.join(","))?;
            for p in &traj.points {
                let pops = p.state.populations();
                let mean: f64 = pops.iter().enumerate().map(|(k, x)| k as f64 * x).sum();
                let mut fields = vec![fmt_sig(p.t), fmt_sig(mean)];
                fields.extend(pops.iter().map(|&x| fmt_sig(x)));
                fields.push(fmt_sig(von_neumann_entropy(&p.state)?));
                fields.push(fmt_sig(trace_distance(&p.state, reference)?));
                writeln!(w, "{}", fields.join(","))?;
            }
        }
        ThermometerKind::TwoLevel => {
            writeln!(w, "t,p_g,p_e,entropy")?;
            for p in &traj.points {
                let pops = p.state.populations();
                writeln!(
                    w,
                    "{},{},{},{}",
                    fmt_sig(p.t),
                    fmt_sig(pops[0]),
                    fmt_sig(pops[1]),
                    fmt_sig(von_neumann_entropy(&p.state)?)
                )?;
            }
        }
    }
    Ok(())
}
