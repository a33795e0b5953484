//! The `radar-sg` command line: read a scenario file, run one computation,
//! write a CSV or JSON table.
//!
//! ```text
//! radar-sg <mean|cdf|ps|optimize|duty-cycle|mc|converge> --scenario F
//!     [--sweep name:from:to:points[:log]] [--mc --replicates N --seed S --threads T]
//!     --out F [--format csv|json]
//! ```
//!
//! A sweep over a scenario field (`density_per_m`, `duty_cycle`, ...) reruns
//! the command for each value and prepends that column. A sweep over the
//! command's own axis (`x_watts` for `cdf`, `range_m` for `ps`, ...) replaces
//! the default abscissa.

mod output;
mod scenario_file;

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde_json::json;

pub use output::{Cell, Table};
pub use scenario_file::{parse_scenario, FadingFile, GeometryFile, LaneFile, ScenarioFile, REFERENCE_JSON};

use crate::error::{Error, Result};
use crate::interference::{interference_cdf, levy_scale, mean_interference, CfSpec};
use crate::model::{db_to_linear, dbm_to_watts, GeometryKind, Lane, Scenario};
use crate::montecarlo::{
    contiguous_intervals, interference_samples, mc_convergence_bl_to_ppp, write_samples_le, McConfig, Parallelism,
};
use crate::performance::{
    beta_of_lambda, duty_cycle_asymptote, expected_optimal_duty_cycle, optimal_duty_cycle, p_success_il,
    p_success_ranges, p_success_wc, ranging_signal,
};
use crate::stats::{mean_ci, wilson_halfwidth};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Mean,
    Cdf,
    Ps,
    Optimize,
    DutyCycle,
    Mc,
    Converge,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Mean => "mean",
            Command::Cdf => "cdf",
            Command::Ps => "ps",
            Command::Optimize => "optimize",
            Command::DutyCycle => "duty-cycle",
            Command::Mc => "mc",
            Command::Converge => "converge",
        }
    }

    /// Axis names the command accepts in `--sweep`.
    fn axes(self) -> &'static [&'static str] {
        match self {
            Command::Cdf => &["x_watts"],
            Command::Ps => &["range_m"],
            Command::Optimize => &["range_m", "lambda_i_per_m"],
            Command::DutyCycle => &["n"],
            Command::Converge => &["delta_m"],
            Command::Mean | Command::Mc => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepScale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub name: String,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub scale: SweepScale,
}

impl Sweep {
    /// `name:from:to:points[:log]`
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        if !(4..=5).contains(&parts.len()) {
            return Err(Error::invalid("sweep", format!("'{text}' is not name:from:to:points[:log]")));
        }
        let num = |s: &str, what: &str| {
            s.trim().parse::<f64>().map_err(|_| Error::invalid("sweep", format!("{what} '{s}' is not a number")))
        };
        let from = num(parts[1], "from")?;
        let to = num(parts[2], "to")?;
        let points: usize = parts[3]
            .trim()
            .parse()
            .map_err(|_| Error::invalid("sweep", format!("points '{}' is not an integer", parts[3])))?;
        let scale = match parts.get(4).map(|s| s.trim()) {
            None | Some("lin") | Some("linear") => SweepScale::Linear,
            Some("log") => SweepScale::Log,
            Some(other) => return Err(Error::invalid("sweep", format!("unknown scale '{other}'"))),
        };
        let sweep = Sweep { name: parts[0].trim().to_string(), from, to, points, scale };
        sweep.validate()?;
        Ok(sweep)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::invalid("sweep", format!("{} points; at least 2 are needed", self.points)));
        }
        if !(self.from.is_finite() && self.to.is_finite()) || self.from == self.to {
            return Err(Error::invalid("sweep", "from and to must be finite and distinct"));
        }
        if self.scale == SweepScale::Log && !(self.from > 0.0 && self.to > 0.0) {
            return Err(Error::invalid("sweep", "a log sweep needs positive bounds"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..=n)
            .map(|i| {
                let t = i as f64 / n as f64;
                if i == 0 {
                    return self.from;
                }
                if i == n {
                    return self.to;
                }
                match self.scale {
                    SweepScale::Linear => self.from + t * (self.to - self.from),
                    SweepScale::Log => (self.from.ln() + t * (self.to.ln() - self.from.ln())).exp(),
                }
            })
            .collect()
    }
}

/// One parsed invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub scenario: PathBuf,
    pub command: Command,
    pub sweep: Option<Sweep>,
    pub out: PathBuf,
    pub format: Format,
    /// Present when `--mc` is given or the command is inherently Monte-Carlo.
    pub mc: Option<McConfig>,
    pub samples_out: Option<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(name = "radar-sg", version, about = "Automotive radar interference and ranging performance")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// name:from:to:points[:log]
    #[arg(long)]
    sweep: Option<String>,
    /// Add Monte-Carlo columns (mean, cdf, ps).
    #[arg(long)]
    mc: bool,
    #[arg(long, default_value_t = 5000)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for Monte-Carlo; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Simulation window W [m]; interferers lie on (δ₀, W].
    #[arg(long, default_value_t = 1e4)]
    window_m: f64,
    /// Also write raw `mc` samples as little-endian f64.
    #[arg(long)]
    samples_out: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

impl Args {
    fn into_spec(self) -> Result<RunSpec> {
        let sweep = self.sweep.as_deref().map(Sweep::parse).transpose()?;
        if let Some(s) = &sweep {
            if !self.command.axes().contains(&s.name.as_str()) && !is_scenario_field(&s.name) {
                let mut allowed: Vec<&str> = self.command.axes().to_vec();
                allowed.extend(SCENARIO_FIELDS);
                return Err(Error::invalid(
                    "sweep",
                    format!(
                        "'{}' is not a scenario field or an axis of {}; expected one of {}",
                        s.name,
                        self.command.name(),
                        allowed.join(", ")
                    ),
                ));
            }
        }
        let wants_mc = self.mc || matches!(self.command, Command::Mc | Command::Converge);
        let mc = if wants_mc {
            let cfg = McConfig {
                replicates: self.replicates,
                window: self.window_m,
                master_seed: self.seed,
                parallelism: self.threads.map_or(Parallelism::Auto, Parallelism::Threads),
            };
            cfg.validate()?;
            Some(cfg)
        } else {
            None
        };
        Ok(RunSpec {
            scenario: self.scenario,
            command: self.command,
            sweep,
            out: self.out,
            format: self.format,
            mc,
            samples_out: self.samples_out,
        })
    }
}

const SCENARIO_FIELDS: [&str; 12] = [
    "tx_power_dbm",
    "antenna_gain_db",
    "beamwidth_deg",
    "frequency_hz",
    "rcs_dbsm",
    "sinr_threshold_db",
    "pathloss_exp",
    "noise_power_w",
    "duty_cycle",
    "offset_m",
    "density_per_m",
    "guard_distance_m",
];

fn is_scenario_field(name: &str) -> bool {
    SCENARIO_FIELDS.contains(&name)
}

/// Sets a scenario field in file units. Lane fields apply to every lane.
pub fn set_scenario_field(s: &mut Scenario, name: &str, v: f64) -> Result<()> {
    match name {
        "tx_power_dbm" => s.radar.tx_power = dbm_to_watts(v),
        "antenna_gain_db" => s.radar.antenna_gain = db_to_linear(v),
        "beamwidth_deg" => s.radar.beamwidth = v.to_radians(),
        "frequency_hz" => s.radar.frequency = v,
        "rcs_dbsm" => s.radar.rcs = db_to_linear(v),
        "sinr_threshold_db" => s.radar.sinr_threshold = db_to_linear(v),
        "pathloss_exp" => s.radar.pathloss_exp = v,
        "noise_power_w" => s.radar.noise_power = v,
        "duty_cycle" => s.access.duty_cycle = v,
        "offset_m" => s.lanes.iter_mut().for_each(|l| l.offset = v),
        "density_per_m" => s.lanes.iter_mut().for_each(|l| l.density = v),
        "guard_distance_m" => s.lanes.iter_mut().for_each(|l| l.guard_distance = Some(v)),
        other => return Err(Error::invalid("sweep", format!("'{other}' is not a scenario field"))),
    }
    s.validate()
}

/// Parses command-line arguments (including the program name).
pub fn parse_args<I, T>(args: I) -> std::result::Result<RunSpec, ParseFailure>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let a = Args::try_parse_from(args).map_err(ParseFailure::Clap)?;
    a.into_spec().map_err(ParseFailure::Spec)
}

#[derive(Debug)]
pub enum ParseFailure {
    Clap(clap::Error),
    Spec(Error),
}

/// Runs `spec` and writes its output file.
pub fn run(spec: &RunSpec) -> Result<()> {
    let text =
        std::fs::read_to_string(&spec.scenario).map_err(|e| Error::Io(format!("{}: {e}", spec.scenario.display())))?;
    let scenario = parse_scenario(&text)?;
    let table = compute(spec, &scenario)?;
    let body = match spec.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(spec.command.name()),
    };
    std::fs::write(&spec.out, body).map_err(|e| Error::Io(format!("{}: {e}", spec.out.display())))?;
    Ok(())
}

/// The table `spec` produces for `scenario`, without touching the output
/// file.
pub fn compute(spec: &RunSpec, scenario: &Scenario) -> Result<Table> {
    let axis = spec.sweep.as_ref().filter(|s| spec.command.axes().contains(&s.name.as_str()));
    let field = spec.sweep.as_ref().filter(|s| axis.is_none() && is_scenario_field(&s.name));
    let mut table = match field {
        None => compute_one(spec, scenario, axis)?,
        Some(sw) => {
            let mut all = Table::default();
            for v in sw.values() {
                let mut s = scenario.clone();
                set_scenario_field(&mut s, &sw.name, v)?;
                all.extend(compute_one(spec, &s, None)?.with_leading(&sw.name, v));
            }
            all
        }
    };
    if let Some(mc) = &spec.mc {
        table.meta.insert("replicates".into(), json!(mc.replicates));
        table.meta.insert("seed".into(), json!(mc.master_seed));
        table.meta.insert("window_m".into(), json!(mc.window));
    }
    if let (Command::Mc, Some(path), Some(mc)) = (spec.command, &spec.samples_out, &spec.mc) {
        if field.is_some() {
            return Err(Error::invalid("samples_out", "not supported together with a scenario sweep"));
        }
        write_samples_le(path, &interference_samples(scenario, mc)?)?;
    }
    Ok(table)
}

fn compute_one(spec: &RunSpec, s: &Scenario, axis: Option<&Sweep>) -> Result<Table> {
    let axis_values = |name: &str| axis.filter(|a| a.name == name).map(Sweep::values);
    match spec.command {
        Command::Mean => mean_table(s, spec.mc.as_ref()),
        Command::Cdf => {
            let grid = match axis_values("x_watts") {
                Some(g) => g,
                None => default_x_grid(s)?,
            };
            cdf_table(s, &grid, spec.mc.as_ref())
        }
        Command::Ps => {
            let ranges = axis_values("range_m").unwrap_or_else(|| linspace(10.0, 250.0, 25));
            ps_table(s, &ranges, spec.mc.as_ref())
        }
        Command::Optimize => {
            let ranges = axis_values("range_m").unwrap_or_else(|| vec![50.0, 100.0, 150.0]);
            let lambdas = axis_values("lambda_i_per_m").unwrap_or_else(|| logspace(1e-6, 1e-1, 200));
            optimize_table(s, &ranges, &lambdas)
        }
        Command::DutyCycle => {
            let ns = match axis_values("n") {
                Some(v) => v,
                None => linspace(1.0, 30.0, 30),
            };
            duty_cycle_table(s, &ns)
        }
        Command::Mc => {
            let mc = spec.mc.as_ref().ok_or_else(|| Error::invalid("mc", "missing Monte-Carlo settings"))?;
            mc_table(s, mc)
        }
        Command::Converge => {
            let mc = spec.mc.as_ref().ok_or_else(|| Error::invalid("mc", "missing Monte-Carlo settings"))?;
            let li = s.lambda_i();
            let deltas = axis_values("delta_m").unwrap_or_else(|| (0..8).map(|k| 0.5f64.powi(k) / li).collect());
            converge_table(li, &deltas, mc)
        }
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    Sweep { name: String::new(), from: a, to: b, points: n, scale: SweepScale::Linear }.values()
}

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    Sweep { name: String::new(), from: a, to: b, points: n, scale: SweepScale::Log }.values()
}

fn with_geometry(s: &Scenario, g: GeometryKind) -> Scenario {
    let mut s = s.clone();
    s.geometry = g;
    s
}

fn mean_table(s: &Scenario, mc: Option<&McConfig>) -> Result<Table> {
    let ppp = mean_interference(&with_geometry(s, GeometryKind::Ppp))?;
    let bl = mean_interference(&with_geometry(s, GeometryKind::BernoulliLattice))?;
    match mc {
        None => {
            let mut t = Table::new(&["mean_ppp_watts", "mean_bl_watts"]);
            t.push(vec![ppp.into(), bl.into()]);
            Ok(t)
        }
        Some(mc) => {
            let (m, h) = mean_ci(&interference_samples(s, mc)?);
            let mut t = Table::new(&["mean_ppp_watts", "mean_bl_watts", "mean_mc_watts", "mean_mc_ci99_watts"]);
            t.push(vec![ppp.into(), bl.into(), m.into(), h.into()]);
            Ok(t)
        }
    }
}

/// 200 log-spaced points over four decades around the typical level: the
/// mean when it is finite, the worst-case scale otherwise.
fn default_x_grid(s: &Scenario) -> Result<Vec<f64>> {
    let m = mean_interference(s)?;
    let level = if m.is_finite() && m > 0.0 { m } else { levy_scale(&CfSpec::worst_case(s)?)? };
    Ok(logspace(1e-2 * level, 1e2 * level, 200))
}

fn cdf_table(s: &Scenario, grid: &[f64], mc: Option<&McConfig>) -> Result<Table> {
    let curve = interference_cdf(s, grid)?;
    let mut t = match mc {
        None => {
            let mut t = Table::new(&["x_watts", "cdf"]);
            for (x, f) in curve.grid.iter().zip(&curve.cdf) {
                t.push(vec![(*x).into(), (*f).into()]);
            }
            t
        }
        Some(mc) => {
            let emp = crate::interference::DistributionCurve::empirical(&interference_samples(s, mc)?);
            let mut t = Table::new(&["x_watts", "cdf", "cdf_mc"]);
            for (x, f) in curve.grid.iter().zip(&curve.cdf) {
                t.push(vec![(*x).into(), (*f).into(), emp.eval(*x).into()]);
            }
            t
        }
    };
    t.meta.insert("method".into(), json!(curve.method.as_str()));
    t.meta.insert("tolerance".into(), json!(curve.tolerance));
    Ok(t)
}

fn ps_table(s: &Scenario, ranges: &[f64], mc: Option<&McConfig>) -> Result<Table> {
    let consts = s.derive(0)?;
    let noise = s.radar.noise_power;
    let t_thr = s.radar.sinr_threshold;
    let signals: Vec<f64> = ranges.iter().map(|&r| ranging_signal(&consts, r)).collect::<Result<_>>()?;
    let (general, tolerance) = p_success_ranges(s, ranges)?;
    let total = Lane::new(0.0, s.lanes.iter().map(|l| l.density).sum());
    let samples = mc.map(|mc| interference_samples(s, mc)).transpose()?;
    let mut cols = vec!["range_m", "p_success", "p_success_wc", "p_success_il"];
    if samples.is_some() {
        cols.extend(["p_success_mc", "p_success_mc_ci99"]);
    }
    let mut t = Table::new(&cols);
    t.meta.insert("p_success_tolerance".into(), json!(tolerance));
    for (i, (&r, &sig)) in ranges.iter().zip(&signals).enumerate() {
        let mut row: Vec<Cell> = vec![
            r.into(),
            general[i].into(),
            p_success_wc(&consts, r, &s.access, &total, noise)?.into(),
            p_success_il(&consts, r, &s.access, &total)?.into(),
        ];
        if let Some(samples) = &samples {
            let k = samples.iter().filter(|&&i| sig >= t_thr * (i + noise)).count();
            row.push((k as f64 / samples.len() as f64).into());
            row.push(wilson_halfwidth(k, samples.len()).into());
        }
        t.push(row);
    }
    Ok(t)
}

fn optimize_table(s: &Scenario, ranges: &[f64], lambdas: &[f64]) -> Result<Table> {
    let consts = s.derive(0)?;
    let lane = &s.lanes[0];
    let mut t =
        Table::new(&["range_m", "lambda_i_per_m", "beta_per_m", "xi_star", "lambda_i_star_per_m", "beta_star_per_m"]);
    for &r in ranges {
        let opt = optimal_duty_cycle(lane, &consts, r)?;
        for &l in lambdas {
            t.push(vec![
                r.into(),
                l.into(),
                beta_of_lambda(&consts, r, l).into(),
                opt.xi_star.into(),
                opt.lambda_i_star.into(),
                opt.beta_star.into(),
            ]);
        }
    }
    Ok(t)
}

fn duty_cycle_table(s: &Scenario, ns: &[f64]) -> Result<Table> {
    let consts = s.derive(0)?;
    let lane = &s.lanes[0];
    let mut t = Table::new(&["n", "xi_star_mean", "xi_star_asymptote"]);
    for &nf in ns {
        if !(nf >= 1.0 && nf.fract() == 0.0) {
            return Err(Error::invalid("n", format!("{nf} is not a positive integer")));
        }
        let n = nf as u32;
        t.push(vec![
            n.into(),
            expected_optimal_duty_cycle(lane, &consts, n)?.into(),
            duty_cycle_asymptote(lane, &consts, n)?.into(),
        ]);
    }
    Ok(t)
}

fn mc_table(s: &Scenario, mc: &McConfig) -> Result<Table> {
    let samples = interference_samples(s, mc)?;
    let mut t = Table::new(&["replicate", "interference_watts"]);
    for (i, x) in samples.iter().enumerate() {
        t.push(vec![i.into(), (*x).into()]);
    }
    Ok(t)
}

fn converge_table(lambda_i: f64, deltas: &[f64], mc: &McConfig) -> Result<Table> {
    let intervals = contiguous_intervals(0.0, 1.0 / lambda_i, 20);
    let rows = mc_convergence_bl_to_ppp(lambda_i, deltas, &intervals, mc)?;
    let mut t = Table::new(&["delta_m", "xi", "chi_square", "dof", "p_value", "tv_distance", "observations"]);
    for r in rows {
        t.push(vec![
            r.delta.into(),
            r.xi.into(),
            r.chi_square.into(),
            r.dof.into(),
            r.p_value.into(),
            r.tv_distance.into(),
            r.observations.into(),
        ]);
    }
    Ok(t)
}

fn error_json(kind: &str, message: &str) -> String {
    json!({ "error": { "kind": kind, "message": message } }).to_string()
}

/// Entry point for the binary. Returns the process exit code; errors are
/// reported on stderr as `{"error": {"kind": ..., "message": ...}}`. Exit 2
/// means bad input (flags or scenario file), 1 a failed computation.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let spec = match parse_args(args) {
        Ok(s) => s,
        Err(ParseFailure::Clap(e)) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprintln!("{}", error_json("usage", e.to_string().trim()));
            return 2;
        }
        Err(ParseFailure::Spec(e)) => {
            eprintln!("{}", error_json(e.kind(), &e.to_string()));
            return 2;
        }
    };
    match run(&spec) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_json(e.kind(), &e.to_string()));
            // A bad scenario file is the caller's input error, like a bad flag.
            if matches!(e, Error::Schema(_) | Error::Invalid { .. }) {
                2
            } else {
                1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(args: &[&str]) -> RunSpec {
        let mut v = vec!["radar-sg"];
        v.extend(args);
        parse_args(v).unwrap()
    }

    #[test]
    fn sweep_parsing() {
        let s = Sweep::parse("density_per_m:0.005:0.04:4:log").unwrap();
        let v = s.values();
        assert_eq!(v.len(), 4);
        assert_eq!((v[0], v[3]), (0.005, 0.04));
        assert!((v[1] - 0.01).abs() < 1e-15);
        assert!(Sweep::parse("x:1:2:1").is_err());
        assert!(Sweep::parse("x:0:2:3:log").is_err());
        assert!(Sweep::parse("x:1:2").is_err());
    }

    #[test]
    fn sweep_must_name_field_or_axis() {
        let r = parse_args(["radar-sg", "ps", "--scenario", "a", "--out", "b", "--sweep", "colour:1:2:3"]);
        assert!(matches!(r, Err(ParseFailure::Spec(_))));
        let s = spec(&["ps", "--scenario", "a", "--out", "b", "--sweep", "range_m:10:250:5"]);
        assert_eq!(s.sweep.unwrap().points, 5);
        assert!(s.mc.is_none());
        let s = spec(&["mc", "--scenario", "a", "--out", "b", "--threads", "3", "--seed", "9"]);
        let mc = s.mc.unwrap();
        assert_eq!((mc.parallelism, mc.master_seed), (Parallelism::Threads(3), 9));
    }

    #[test]
    fn optimize_reference_point() {
        // ξ* = z₀/(λC) at R = 100 m, λ = 0.01/m.
        let mut s = Scenario::reference();
        s.lanes[0].density = 0.01;
        let rs = spec(&["optimize", "--scenario", "a", "--out", "b", "--sweep", "range_m:100:200:2"]);
        let t = compute(&rs, &s).unwrap();
        let Cell::Num(xi) = t.rows[0][3] else { panic!() };
        assert!((xi - 0.016_92).abs() < 5e-6, "{xi}");
    }

    #[test]
    fn mean_sweep_ppp_equals_bl_without_offset() {
        let mut s = Scenario::reference();
        s.lanes[0] = Lane::new(0.0, 0.1).with_guard_distance(76.0);
        let rs = spec(&["mean", "--scenario", "a", "--out", "b", "--sweep", "density_per_m:0.005:0.04:4:log"]);
        let t = compute(&rs, &s).unwrap();
        assert_eq!(t.columns, ["density_per_m", "mean_ppp_watts", "mean_bl_watts"]);
        for r in &t.rows {
            let (Cell::Num(a), Cell::Num(b)) = (&r[1], &r[2]) else { panic!() };
            assert!((a - b).abs() <= 1e-12 * a);
        }
    }
}
