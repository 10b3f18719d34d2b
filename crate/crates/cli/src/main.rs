mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use qthermo::baths::{
    bose_occupation, effective_occupation, kms_ratio, local_temperature, occupation_from_ratio, BathModel,
    TabulatedSpectrum,
};
use qthermo::dynamics::{
    build_multi_bath_thermometer, evolve, max_stable_dt, steady_state, steady_state_auto_truncation,
    write_trajectory_csv, Generator, ThermometerKind, TAIL_TOL,
};
use qthermo::engine::{
    default_range, max_power_search, run_cycle, sample_positive_work_params, sweep, verify_bounds, write_sweep_csv,
    CycleParams, CycleResult, StrokeTiming,
};
use qthermo::qcore::{gibbs_state, trace_distance, DensityMatrix, FockTruncation, DEFAULT_FOCK_LEVELS};
use qthermo::report::fmt_sig;
use qthermo::thermoledger::{entropy_production, ledger_along, write_report_csv, SIGMA_TOL};

use output::{Format, Report};

const UNITS: &str = "hbar = k_B = 1";

#[derive(Parser, Debug)]
#[command(name = "qthermo", version, about = "Local temperatures, thermometers and a squeezed-bath Otto engine")]
pub struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
struct GlobalOpts {
    /// JSON file with the same keys as the long flags
    #[arg(long, global = true)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// write output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// seed for randomized rows
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// fail (exit 4) when a cycle violates the generalized Carnot bound
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "is_false")]
    verify_bounds: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Local temperature T[ω] of a squeezed or tabulated bath
    Temp(TempArgs),
    /// Relax a thermometer in contact with one bath
    Thermometer(ThermometerArgs),
    /// Otto cycle rows, squeezing sweeps and max-power searches
    Engine(EngineArgs),
    /// Heat currents and entropy production along a trajectory
    Entropy(EntropyArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Temp(_) => "temp",
            Command::Thermometer(_) => "thermometer",
            Command::Engine(_) => "engine",
            Command::Entropy(_) => "entropy",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Kind {
    Oscillator,
    TwoLevel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum BathKind {
    Thermal,
    Squeezed,
    Tabulated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Initial {
    Ground,
    Excited,
    Mixed,
    Gibbs,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
struct TempArgs {
    /// bath temperature
    #[arg(long)]
    t2: Option<f64>,
    /// squeezing parameters, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    r: Option<Vec<f64>>,
    /// thermometer frequencies, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    omega: Option<Vec<f64>>,
    /// tabulated spectrum CSV (omega,g_plus,g_minus) instead of a squeezed bath
    #[arg(long)]
    spectrum: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
struct ThermometerArgs {
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    #[arg(long, allow_negative_numbers = true)]
    omega: Option<f64>,
    #[arg(long, value_enum)]
    bath: Option<BathKind>,
    /// bath temperature (thermal or squeezed)
    #[arg(long)]
    t2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    r: Option<f64>,
    #[arg(long)]
    spectrum: Option<PathBuf>,
    /// coupling rate, default omega/10
    #[arg(long, allow_negative_numbers = true)]
    gamma0: Option<f64>,
    /// default 15/gamma0
    #[arg(long, allow_negative_numbers = true)]
    t_final: Option<f64>,
    /// default: largest stable step
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<f64>,
    /// starting Fock truncation; raised until the tail population is small
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long, value_enum)]
    initial: Option<Initial>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
struct EngineArgs {
    #[arg(long, allow_negative_numbers = true)]
    omega_c: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    omega_h: Option<f64>,
    /// cold bath temperature
    #[arg(long)]
    t1: Option<f64>,
    /// hot bath temperature
    #[arg(long)]
    t2: Option<f64>,
    /// hot bath squeezing, comma separated for a sweep
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    r: Option<Vec<f64>>,
    /// tabulated hot bath instead of a squeezed one
    #[arg(long)]
    spectrum: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    gamma0: Option<f64>,
    /// hot stroke duration (finite-time cycle needs both taus)
    #[arg(long, allow_negative_numbers = true)]
    tau_h: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tau_c: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tau_adiabatic: Option<f64>,
    /// search omega_h for maximal power
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    max_power: bool,
    /// omega_h search range lo,hi (default 1.01*omega_c, 50*omega_c)
    #[arg(long, value_delimiter = ',', num_args = 1)]
    range: Option<Vec<f64>>,
    /// emit this many random positive-work ideal cycles instead
    #[arg(long)]
    random: Option<usize>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
struct EntropyArgs {
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    #[arg(long, allow_negative_numbers = true)]
    omega: Option<f64>,
    /// cold (thermal) bath temperature
    #[arg(long)]
    t1: Option<f64>,
    #[arg(long, value_enum)]
    hot: Option<BathKind>,
    /// hot bath temperature
    #[arg(long)]
    t2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    r: Option<f64>,
    #[arg(long)]
    spectrum: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    gamma0: Option<f64>,
    /// couple only the cold bath
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    single_bath: bool,
    #[arg(long, value_enum)]
    initial: Option<Initial>,
    #[arg(long, allow_negative_numbers = true)]
    t_final: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<f64>,
    #[arg(long)]
    levels: Option<usize>,
}

#[derive(Debug)]
enum Failure {
    Param(String),
    Physics(String),
    Bound(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Param(_) => 2,
            Failure::Physics(_) => 3,
            Failure::Bound(_) => 4,
            Failure::Io(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Param(m) | Failure::Physics(m) | Failure::Bound(m) | Failure::Io(m) => m,
        }
    }
}

impl From<qthermo::Error> for Failure {
    fn from(e: qthermo::Error) -> Self {
        use qthermo::Error as E;
        let msg = e.to_string();
        match e {
            E::BoundViolation { .. } => Failure::Bound(msg),
            E::NoPositiveWork { .. } => Failure::Physics(msg),
            E::Io(_) => Failure::Io(msg),
            ref other if other.is_physics_guard() => Failure::Physics(msg),
            _ => Failure::Param(msg),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome<T> = Result<T, Failure>;

fn positive(flag: &str, x: f64) -> Outcome<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Failure::Param(format!("--{flag} must be positive and finite, got {x}")))
    }
}

fn non_negative(flag: &str, x: f64) -> Outcome<f64> {
    if x >= 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Failure::Param(format!("--{flag} must be >= 0 and finite, got {x}")))
    }
}

fn required<T>(flag: &str, v: Option<T>) -> Outcome<T> {
    v.ok_or_else(|| Failure::Param(format!("--{flag} is required")))
}

fn load_spectrum(path: &PathBuf) -> Outcome<TabulatedSpectrum> {
    TabulatedSpectrum::from_csv_path(path).map_err(|e| match e {
        qthermo::Error::Io(io) => Failure::Param(format!("--spectrum {}: {io}", path.display())),
        other => Failure::Param(format!("--spectrum {}: {other}", path.display())),
    })
}

/// What a command hands back: the report plus a deferred failure that
/// still lets the output be written (bound checks, per-row errors).
struct Run {
    report: Report,
    params: Value,
    late_failure: Option<Failure>,
}

fn cmd_temp(a: &mut TempArgs) -> Outcome<Run> {
    let omegas = required("omega", a.omega.clone())?;
    if omegas.is_empty() {
        return Err(Failure::Param("--omega needs at least one value".into()));
    }
    for &w in &omegas {
        positive("omega", w)?;
    }
    let mut csv = String::from("omega,T2,r,n_bar,N_eff,kms_ratio,T_local\n");
    let push = |csv: &mut String, fields: [String; 7]| {
        csv.push_str(&fields.join(","));
        csv.push('\n');
    };
    if let Some(path) = &a.spectrum {
        let bath = BathModel::tabulated(load_spectrum(path)?);
        for &w in &omegas {
            let lt = local_temperature(&bath, w)?;
            let n_eff = occupation_from_ratio(&bath, w).map_or(f64::NAN, |n| n);
            push(
                &mut csv,
                [fmt_sig(w), "nan".into(), "nan".into(), "nan".into(), fmt_sig(n_eff), fmt_sig(kms_ratio(&bath, w)?), fmt_sig(lt.temperature_or_inf())],
            );
        }
    } else {
        let t2 = positive("t2", required("t2", a.t2)?)?;
        let rs = a.r.get_or_insert_with(|| vec![0.0]).clone();
        for &r in &rs {
            non_negative("r", r)?;
        }
        for &r in &rs {
            let bath = BathModel::squeezed(t2, r)?;
            for &w in &omegas {
                let lt = local_temperature(&bath, w)?;
                push(
                    &mut csv,
                    [
                        fmt_sig(w),
                        fmt_sig(t2),
                        fmt_sig(r),
                        fmt_sig(bose_occupation(w, t2)?),
                        fmt_sig(effective_occupation(&bath, w)?),
                        fmt_sig(kms_ratio(&bath, w)?),
                        fmt_sig(lt.temperature_or_inf()),
                    ],
                );
            }
        }
    }
    Ok(Run { report: Report { csv, footer: vec![] }, params: json!(a), late_failure: None })
}

/// Bath from --bath/--hot, --t2, --r, --spectrum.
fn bath_from(kind: Option<BathKind>, t2: Option<f64>, r: Option<f64>, spectrum: &Option<PathBuf>, t2_flag: &str) -> Outcome<BathModel> {
    let kind = kind.unwrap_or(if spectrum.is_some() { BathKind::Tabulated } else { BathKind::Squeezed });
    Ok(match kind {
        BathKind::Thermal => BathModel::thermal(positive(t2_flag, required(t2_flag, t2)?)?)?,
        BathKind::Squeezed => {
            let r = non_negative("r", r.unwrap_or(0.0))?;
            BathModel::squeezed(positive(t2_flag, required(t2_flag, t2)?)?, r)?
        }
        BathKind::Tabulated => BathModel::tabulated(load_spectrum(required("spectrum", spectrum.as_ref())?)?),
    })
}

fn initial_state(init: Initial, gen: &Generator, gibbs_t: f64) -> Outcome<DensityMatrix> {
    let d = gen.dim();
    Ok(match init {
        Initial::Ground => DensityMatrix::basis_state(d, 0)?,
        Initial::Excited => DensityMatrix::basis_state(d, 1)?,
        Initial::Mixed => DensityMatrix::maximally_mixed(d),
        Initial::Gibbs => gibbs_state(gen.hamiltonian(), gibbs_t)?,
    })
}

/// Generator for `kind`, with oscillator truncation raised until the
/// steady-state tail population is below the guard.
fn thermometer(kind: Kind, levels: usize, omega: f64, baths: &[(String, BathModel, f64)]) -> Outcome<(ThermometerKind, Generator, DensityMatrix, Option<f64>)> {
    match kind {
        Kind::TwoLevel => {
            let gen = build_multi_bath_thermometer(ThermometerKind::TwoLevel, omega, baths)?;
            let ss = steady_state(&gen)?;
            Ok((ThermometerKind::TwoLevel, gen, ss, None))
        }
        Kind::Oscillator => {
            let start = FockTruncation::new(levels).map_err(|_| Failure::Param(format!("--levels must be >= 2, got {levels}")))?;
            let auto = steady_state_auto_truncation(start, TAIL_TOL, |t| {
                build_multi_bath_thermometer(ThermometerKind::Oscillator(t), omega, baths)
            })?;
            Ok((ThermometerKind::Oscillator(auto.trunc), auto.generator, auto.steady, Some(auto.tail)))
        }
    }
}

fn cmd_thermometer(a: &mut ThermometerArgs) -> Outcome<Run> {
    let omega = positive("omega", required("omega", a.omega)?)?;
    let kind = *a.kind.get_or_insert(Kind::Oscillator);
    let bath = bath_from(a.bath, a.t2, a.r, &a.spectrum, "t2")?;
    let gamma0 = positive("gamma0", *a.gamma0.get_or_insert(omega / 10.0))?;
    let t_final = non_negative("t-final", *a.t_final.get_or_insert(15.0 / gamma0))?;
    let levels = *a.levels.get_or_insert(DEFAULT_FOCK_LEVELS);
    let init = *a.initial.get_or_insert(Initial::Ground);
    if let Some(dt) = a.dt {
        positive("dt", dt)?;
    }

    let lt = local_temperature(&bath, omega)?;
    let (kind, gen, ss, tail) = thermometer(kind, levels, omega, &[("bath".into(), bath, gamma0)])?;
    let dt = *a.dt.get_or_insert(max_stable_dt(&gen));
    let t_local = lt.temperature().ok_or_else(|| Failure::Physics("bath has infinite local temperature".into()))?;
    let gibbs = gibbs_state(gen.hamiltonian(), t_local)?;
    let rho0 = initial_state(init, &gen, t_local)?;
    let traj = evolve(&gen, &rho0, t_final, dt)?;

    let mut buf = Vec::new();
    write_trajectory_csv(&mut buf, &traj, kind, &gibbs)?;
    let mut report = Report { csv: String::from_utf8(buf).expect("CSV is UTF-8"), footer: vec![] };
    report.push_footer("levels", gen.dim().to_string());
    report.push_footer("T_local", fmt_sig(t_local));
    report.push_footer("steady_trace_dist_gibbs", fmt_sig(trace_distance(&ss, &gibbs)?));
    report.push_footer("final_trace_dist_gibbs", fmt_sig(trace_distance(traj.final_state(), &gibbs)?));
    if let Some(tail) = tail {
        report.push_footer("steady_tail", fmt_sig(tail));
    }
    let mut params = json!(a);
    params["dt"] = json!(traj.dt);
    params["levels"] = json!(gen.dim());
    Ok(Run { report, params, late_failure: None })
}

fn cmd_entropy(a: &mut EntropyArgs) -> Outcome<Run> {
    let omega = positive("omega", required("omega", a.omega)?)?;
    let kind = *a.kind.get_or_insert(Kind::Oscillator);
    let t1 = positive("t1", *a.t1.get_or_insert(0.5))?;
    let gamma0 = positive("gamma0", *a.gamma0.get_or_insert(omega / 10.0))?;
    let t_final = non_negative("t-final", *a.t_final.get_or_insert(15.0 / gamma0))?;
    let levels = *a.levels.get_or_insert(DEFAULT_FOCK_LEVELS);
    let init = *a.initial.get_or_insert(Initial::Ground);
    if let Some(dt) = a.dt {
        positive("dt", dt)?;
    }
    let mut baths = vec![("cold".to_string(), BathModel::thermal(t1)?, gamma0)];
    if !a.single_bath {
        baths.push(("hot".into(), bath_from(a.hot, a.t2, a.r, &a.spectrum, "t2")?, gamma0));
    }

    let (_, gen, ss, _) = thermometer(kind, levels, omega, &baths)?;
    let dt = *a.dt.get_or_insert(max_stable_dt(&gen));
    let rho0 = initial_state(init, &gen, t1)?;
    let traj = evolve(&gen, &rho0, t_final, dt)?;
    let rows = ledger_along(&gen, &traj)?;

    let mut buf = Vec::new();
    write_report_csv(&mut buf, &rows)?;
    let mut report = Report { csv: String::from_utf8(buf).expect("CSV is UTF-8"), footer: vec![] };
    let steady = entropy_production(&gen, &ss)?;
    report.push_footer("levels", gen.dim().to_string());
    for f in &steady.flows {
        report.push_footer(&format!("steady_J_{}", f.bath_id), fmt_sig(f.current));
    }
    report.push_footer("steady_J_sum", fmt_sig(steady.total_current()));
    report.push_footer("steady_sigma", fmt_sig(steady.sigma));

    let worst = rows.iter().map(|(t, r)| (*t, r.sigma)).fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    let late_failure = (worst.1 < -SIGMA_TOL)
        .then(|| Failure::Bound(format!("entropy production {:e} < 0 at t = {}", worst.1, worst.0)));
    let mut params = json!(a);
    params["dt"] = json!(traj.dt);
    params["levels"] = json!(gen.dim());
    Ok(Run { report, params, late_failure })
}

fn cmd_engine(a: &mut EngineArgs, seed: u64, verify: bool) -> Outcome<Run> {
    let mut results: Vec<(CycleResult, Option<bool>)> = Vec::new();
    let mut late_failure: Option<Failure> = None;
    let note = |f: Failure, late: &mut Option<Failure>| {
        error!("{}", f.message());
        late.get_or_insert(f);
    };

    if let Some(n) = a.random {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..n {
            let p = sample_positive_work_params(|| rng.gen::<f64>())?;
            results.push((run_cycle(&p)?, None));
        }
    } else {
        let omega_c = positive("omega-c", *a.omega_c.get_or_insert(1.0))?;
        let t1 = positive("t1", *a.t1.get_or_insert(1.0))?;
        let gamma0 = positive("gamma0", *a.gamma0.get_or_insert(0.1))?;
        let tau_ad = non_negative("tau-adiabatic", *a.tau_adiabatic.get_or_insert(0.0))?;
        let timing = match (a.tau_h, a.tau_c) {
            (Some(h), Some(c)) => StrokeTiming::Finite { tau_h: positive("tau-h", h)?, tau_c: positive("tau-c", c)? },
            (None, None) => StrokeTiming::Ideal,
            _ => return Err(Failure::Param("--tau-h and --tau-c must be given together".into())),
        };
        let range = if a.max_power {
            if timing == StrokeTiming::Ideal {
                return Err(Failure::Param("--max-power needs --tau-h and --tau-c".into()));
            }
            let (lo, hi) = match a.range.as_deref() {
                None => default_range(omega_c),
                Some([lo, hi]) => (*lo, *hi),
                Some(_) => return Err(Failure::Param("--range takes exactly two values lo,hi".into())),
            };
            if !(lo > omega_c && hi > lo && hi.is_finite()) {
                return Err(Failure::Param(format!("--range needs omega_c < lo < hi, got {lo},{hi}")));
            }
            a.range = Some(vec![lo, hi]);
            Some((lo, hi))
        } else {
            None
        };
        let omega_h = match range {
            Some((lo, _)) => lo,
            None => required("omega-h", a.omega_h)?,
        };
        if !(omega_h > omega_c) || !omega_h.is_finite() {
            return Err(Failure::Param(format!("--omega-h must exceed --omega-c = {omega_c}, got {omega_h}")));
        }

        if let Some(path) = &a.spectrum {
            let hot = BathModel::tabulated(load_spectrum(path)?);
            let base = CycleParams { omega_c, omega_h, t1, hot, gamma0, timing, tau_adiabatic: tau_ad };
            match range {
                Some((lo, hi)) => {
                    let mp = max_power_search(&base, lo, hi)?;
                    results.push((mp.result, Some(mp.boundary_hit)));
                }
                None => results.push((run_cycle(&base)?, None)),
            }
        } else {
            let t2 = positive("t2", *a.t2.get_or_insert(2.0))?;
            let rs = a.r.get_or_insert_with(|| vec![0.0]).clone();
            for &r in &rs {
                non_negative("r", r)?;
            }
            let base = CycleParams { omega_c, omega_h, t1, hot: BathModel::thermal(t2)?, gamma0, timing, tau_adiabatic: tau_ad };
            for (r, row) in rs.iter().zip(sweep(&rs, &base, range)) {
                match row {
                    Ok(row) => results.push((row.result, row.max_power.map(|m| m.boundary_hit))),
                    Err(e) => note(Failure::from(e).prefixed(&format!("r = {r}: ")), &mut late_failure),
                }
            }
        }
    }

    let mut footer_checked = 0;
    if verify {
        for (res, _) in results.iter().filter(|(r, _)| r.positive_work) {
            footer_checked += 1;
            if let Err(e) = verify_bounds(res) {
                note(Failure::from(e), &mut late_failure);
            }
        }
    }
    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, results.iter().map(|(r, b)| (r, *b)))?;
    let mut report = Report { csv: String::from_utf8(buf).expect("CSV is UTF-8"), footer: vec![] };
    if verify {
        report.push_footer("bounds_checked", footer_checked.to_string());
    }
    let mut params = json!(a);
    params["power_denominator"] = json!("tau_h + tau_c + 2*tau_adiabatic");
    Ok(Run { report, params, late_failure })
}

impl Failure {
    fn prefixed(self, p: &str) -> Self {
        match self {
            Failure::Param(m) => Failure::Param(format!("{p}{m}")),
            Failure::Physics(m) => Failure::Physics(format!("{p}{m}")),
            Failure::Bound(m) => Failure::Bound(format!("{p}{m}")),
            Failure::Io(m) => Failure::Io(format!("{p}{m}")),
        }
    }
}

fn run(cli: Cli) -> Outcome<Option<Failure>> {
    let name = cli.command.name();
    let file = match &cli.global.config {
        Some(path) => config::load(path, name).map_err(Failure::Param)?,
        None => Default::default(),
    };
    let global = config::merge(&cli.global, &file).map_err(Failure::Param)?;
    let seed = global.seed.unwrap_or(0);
    let run = match cli.command {
        Command::Temp(a) => cmd_temp(&mut config::merge(&a, &file).map_err(Failure::Param)?)?,
        Command::Thermometer(a) => cmd_thermometer(&mut config::merge(&a, &file).map_err(Failure::Param)?)?,
        Command::Entropy(a) => cmd_entropy(&mut config::merge(&a, &file).map_err(Failure::Param)?)?,
        Command::Engine(a) => {
            cmd_engine(&mut config::merge(&a, &file).map_err(Failure::Param)?, seed, global.verify_bounds)?
        }
    };
    let meta = json!({
        "command": name,
        "params": run.params,
        "seed": seed,
        "verify_bounds": global.verify_bounds,
        "version": env!("CARGO_PKG_VERSION"),
        "units": UNITS,
    });
    match output::emit(&run.report, global.format.unwrap_or_default(), meta, global.out.as_deref()) {
        // reader went away (e.g. piped into head)
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
        r => r?,
    }
    Ok(run.late_failure)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(f)) | Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
