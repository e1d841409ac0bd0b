//! `freqbound`: bound evaluation, Monte Carlo runs and figure sweeps from the shell.

mod config_file;

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use log::warn;

use freqbound::sweep::{prior_grid, write_csv, write_json, ExponentMode, PresetOptions, SnrRange};
use freqbound::testpoints::build;
use freqbound::wwb::S_GRID;
use freqbound::{run_sweep, BoundKind, Error, ErrorMetric, QuadratureSpec, SweepRow, SweepSpec, TestPointConfig};

#[derive(Debug, Parser)]
#[command(name = "freqbound", version, about = "Bayesian bounds for single-tone frequency estimation")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Args)]
struct Global {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Gauss-Legendre nodes per panel for the prior integrals.
    #[arg(long, global = true)]
    quad_nodes: Option<usize>,
    /// Integration rate in Hz; adds an `rmse_hz` column to CSV output.
    #[arg(long, global = true)]
    f_int: Option<f64>,
    /// Flat key = value file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Weiss-Weinstein bound.
    Wwb(WwbArgs),
    /// Bayesian Cramér-Rao bound.
    Bcrb(AxisArgs),
    /// Ziv-Zakai bound.
    Zzb(AxisArgs),
    /// Monte Carlo MSE of the MAP estimator.
    MapSim(MapArgs),
    /// Lists the test points of a (C,S,E) trio.
    Testpoints(TestpointArgs),
    /// Parameter sweep or figure preset.
    Sweep(SweepArgs),
}

/// Grid axes; list values are comma separated.
#[derive(Debug, Args)]
struct AxisArgs {
    /// Single SNR in dB (sets start and stop).
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    snr_start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    snr_stop: Option<f64>,
    #[arg(long)]
    snr_step: Option<f64>,
    /// Number of samples K.
    #[arg(long)]
    k: Option<String>,
    /// Prior concentrations.
    #[arg(long)]
    kappa: Option<String>,
    /// Prior means in radians.
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
}

#[derive(Debug, Args)]
struct WwbOptions {
    /// Test-point trio "C,S,E"; separate several with ';' or repeat the flag.
    #[arg(long)]
    trio: Vec<String>,
    /// Fixed exponent(s); one row per value.
    #[arg(long, conflicts_with = "s_grid")]
    s: Option<String>,
    /// Exponents to maximize over (default 0.1,...,0.9).
    #[arg(long)]
    s_grid: Option<String>,
}

#[derive(Debug, Args)]
struct McOptions {
    #[arg(long)]
    trials: Option<usize>,
    /// FFT grid size of the coarse MAP search.
    #[arg(long)]
    grid_size: Option<usize>,
}

#[derive(Debug, Args)]
struct WwbArgs {
    #[command(flatten)]
    axes: AxisArgs,
    #[command(flatten)]
    wwb: WwbOptions,
}

#[derive(Debug, Args)]
struct MapArgs {
    #[command(flatten)]
    axes: AxisArgs,
    #[command(flatten)]
    mc: McOptions,
    /// Score the raw difference instead of the wrapped circular error.
    #[arg(long)]
    linear_error: bool,
}

#[derive(Debug, Args)]
struct TestpointArgs {
    #[arg(long, default_value_t = 20)]
    k: usize,
    #[arg(long, default_value = "2,9,10")]
    trio: String,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Figure preset: 6, 7, 8, 11, 12 or 13.
    #[arg(long)]
    figure: Option<u32>,
    #[command(flatten)]
    axes: AxisArgs,
    /// Bound kinds: wwb, bcrb, zzb, map.
    #[arg(long)]
    kinds: Option<String>,
    #[command(flatten)]
    wwb: WwbOptions,
    #[command(flatten)]
    mc: McOptions,
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn parse_list<T: std::str::FromStr>(field: &str, raw: &str) -> Result<Vec<T>, Error> {
    raw.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|_| cfg_err(format!("{field}: cannot parse {t:?}"))))
        .collect()
}

fn parse_kind(t: &str) -> Result<BoundKind, Error> {
    match t.to_ascii_lowercase().as_str() {
        "wwb" => Ok(BoundKind::Wwb),
        "bcrb" => Ok(BoundKind::Bcrb),
        "zzb" => Ok(BoundKind::Zzb),
        "map" => Ok(BoundKind::Map),
        other => Err(cfg_err(format!("bound_kinds: unknown kind {other:?}"))),
    }
}

fn single<T: Copy>(v: &Option<Vec<T>>) -> Option<T> {
    match v.as_deref() {
        Some([x]) => Some(*x),
        _ => None,
    }
}

fn unique(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for v in values {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

struct Axes {
    k: Option<Vec<usize>>,
    kappa: Option<Vec<f64>>,
    mu: Option<Vec<f64>>,
}

impl AxisArgs {
    fn lists(&self) -> Result<Axes, Error> {
        Ok(Axes {
            k: self.k.as_deref().map(|r| parse_list("k_values", r)).transpose()?,
            kappa: self.kappa.as_deref().map(|r| parse_list("kappa_values", r)).transpose()?,
            mu: self.mu.as_deref().map(|r| parse_list("mu_values", r)).transpose()?,
        })
    }

    /// Applies explicit axes on top of `spec`.
    fn apply(&self, axes: Axes, spec: &mut SweepSpec) {
        if let Some(db) = self.snr_db {
            spec.snr_db = SnrRange::new(db, db, 1.0);
        }
        if let Some(v) = self.snr_start {
            spec.snr_db.start = v;
        }
        if let Some(v) = self.snr_stop {
            spec.snr_db.stop = v;
        }
        if let Some(v) = self.snr_step {
            spec.snr_db.step = v;
        }
        if let Some(k) = axes.k {
            spec.k_values = k;
        }
        if axes.kappa.is_some() || axes.mu.is_some() {
            let mus = axes.mu.unwrap_or_else(|| unique(spec.priors.iter().map(|p| p.0)));
            let kappas = axes.kappa.unwrap_or_else(|| unique(spec.priors.iter().map(|p| p.1)));
            spec.priors = prior_grid(&mus, &kappas);
        }
    }
}

impl WwbOptions {
    fn apply(&self, spec: &mut SweepSpec) -> Result<(), Error> {
        let trios: Vec<&str> = self.trio.iter().flat_map(|t| t.split(';')).map(str::trim).collect();
        if !self.trio.is_empty() {
            spec.trios = trios
                .iter()
                .map(|t| t.parse::<TestPointConfig>().map_err(|e| cfg_err(format!("testpoint_trio: {e}"))))
                .collect::<Result<_, _>>()?;
        }
        if let Some(s) = &self.s {
            spec.exponent = ExponentMode::Each(parse_list("s_grid", s)?);
        } else if let Some(s) = &self.s_grid {
            spec.exponent = ExponentMode::Optimize(parse_list("s_grid", s)?);
        }
        Ok(())
    }
}

impl McOptions {
    fn apply(&self, spec: &mut SweepSpec) {
        if let Some(t) = self.trials {
            spec.trials = t;
        }
        if let Some(g) = self.grid_size {
            spec.grid_size = g;
        }
    }
}

/// Spec with the global settings applied and all axes at their defaults.
fn base_spec(global: &Global, kind: BoundKind) -> Result<SweepSpec, Error> {
    let mut spec = SweepSpec { kinds: vec![kind], seed: global.seed, ..SweepSpec::default() };
    apply_quadrature(global, &mut spec)?;
    Ok(spec)
}

fn apply_quadrature(global: &Global, spec: &mut SweepSpec) -> Result<(), Error> {
    if let Some(n) = global.quad_nodes {
        spec.quadrature = QuadratureSpec::new(n, spec.quadrature.rel_tol())?;
    }
    Ok(())
}

/// Single-point commands default to K = 20 and a uniform prior at 0 dB.
fn point_spec(global: &Global, kind: BoundKind, axes: &AxisArgs) -> Result<SweepSpec, Error> {
    let mut spec = base_spec(global, kind)?;
    spec.snr_db = SnrRange::new(0.0, 0.0, 1.0);
    spec.priors = vec![(0.0, 0.0)];
    axes.apply(axes.lists()?, &mut spec);
    Ok(spec)
}

fn sweep_spec(global: &Global, args: &SweepArgs) -> Result<SweepSpec, Error> {
    let axes = args.axes.lists()?;
    let mut spec = match args.figure {
        Some(f) => {
            let opts = PresetOptions { kappa: single(&axes.kappa), k: single(&axes.k) };
            SweepSpec::preset(f, opts)?
        }
        None => SweepSpec::default(),
    };
    spec.seed = global.seed;
    apply_quadrature(global, &mut spec)?;
    args.axes.apply(axes, &mut spec);
    if let Some(kinds) = &args.kinds {
        spec.kinds =
            kinds.split(',').map(str::trim).filter(|t| !t.is_empty()).map(parse_kind).collect::<Result<_, _>>()?;
    }
    args.wwb.apply(&mut spec)?;
    args.mc.apply(&mut spec);
    Ok(spec)
}

fn emit_rows(rows: &[SweepRow], global: &Global) -> Result<Vec<u8>, Error> {
    let path = output_name(global);
    let mut buf = Vec::new();
    match global.format {
        Format::Csv => write_csv(rows, &mut buf, global.f_int, &path)?,
        Format::Json => {
            if global.f_int.is_some() {
                warn!("--f-int only adds a column to CSV output; ignored for JSON");
            }
            write_json(rows, &mut buf, &path)?
        }
    }
    Ok(buf)
}

fn emit_testpoints(args: &TestpointArgs, global: &Global) -> Result<Vec<u8>, Error> {
    let cfg: TestPointConfig = args.trio.parse()?;
    let set = build(&cfg, args.k)?;
    let mut out = String::new();
    let rows = set.h().iter().zip(set.provenance());
    match global.format {
        Format::Csv => {
            out.push_str("h_rad,h_over_pi,provenance\n");
            for (h, p) in rows {
                out.push_str(&format!("{h:.16e},{:.16e},{p}\n", h / std::f64::consts::PI));
            }
        }
        Format::Json => {
            let items: Vec<String> = rows
                .map(|(h, p)| {
                    format!(
                        "  {{\"h_rad\": {h:.16e}, \"h_over_pi\": {:.16e}, \"provenance\": \"{p}\"}}",
                        h / std::f64::consts::PI
                    )
                })
                .collect();
            out.push_str(&format!("[\n{}\n]\n", items.join(",\n")));
        }
    }
    Ok(out.into_bytes())
}

fn output_name(global: &Global) -> String {
    global.out.as_ref().map_or_else(|| "<stdout>".to_string(), |p| p.display().to_string())
}

fn write_output(bytes: &[u8], global: &Global) -> Result<(), Error> {
    let path = output_name(global);
    let io_err = |e: io::Error| Error::Io { path: path.clone(), message: e.to_string() };
    match &global.out {
        Some(p) => File::create(p).and_then(|mut f| f.write_all(bytes)).map_err(io_err),
        None => io::stdout().lock().write_all(bytes).map_err(io_err),
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    let g = &cli.global;
    let bytes = match &cli.command {
        Cmd::Wwb(a) => {
            let mut spec = point_spec(g, BoundKind::Wwb, &a.axes)?;
            spec.exponent = ExponentMode::Optimize(S_GRID.to_vec());
            a.wwb.apply(&mut spec)?;
            emit_rows(&run_sweep(&spec)?, g)?
        }
        Cmd::Bcrb(a) => emit_rows(&run_sweep(&point_spec(g, BoundKind::Bcrb, a)?)?, g)?,
        Cmd::Zzb(a) => emit_rows(&run_sweep(&point_spec(g, BoundKind::Zzb, a)?)?, g)?,
        Cmd::MapSim(a) => {
            let mut spec = point_spec(g, BoundKind::Map, &a.axes)?;
            a.mc.apply(&mut spec);
            if a.linear_error {
                spec.metric = ErrorMetric::Linear;
            }
            emit_rows(&run_sweep(&spec)?, g)?
        }
        Cmd::Testpoints(a) => emit_testpoints(a, g)?,
        Cmd::Sweep(a) => emit_rows(&run_sweep(&sweep_spec(g, a)?)?, g)?,
    };
    write_output(&bytes, g)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        _ if e.is_config() => 2,
        Error::Io { .. } => 1,
        _ => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match config_file::expand(std::env::args().collect(), &Cli::command()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("freqbound").chain(args.iter().copied())).unwrap()
    }

    fn sweep_of(cli: &Cli) -> SweepSpec {
        match &cli.command {
            Cmd::Sweep(a) => sweep_spec(&cli.global, a).unwrap(),
            _ => panic!("not a sweep"),
        }
    }

    #[test]
    fn lists_and_kinds() {
        assert_eq!(parse_list::<f64>("x", "1, 2,3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(parse_list::<f64>("x", "").unwrap().is_empty());
        assert!(parse_list::<usize>("x", "a").unwrap_err().is_config());
        assert_eq!(parse_kind("ZZB").unwrap(), BoundKind::Zzb);
        assert!(parse_kind("crb").is_err());
    }

    #[test]
    fn figure_thirteen_defaults() {
        let spec = sweep_of(&parse(&["sweep", "--figure", "13", "--seed", "7"]));
        assert_eq!(spec.k_values, vec![20]);
        assert_eq!(spec.priors, vec![(0.0, 1.0)]);
        assert_eq!(spec.seed, 7);
        assert_eq!(spec.kinds, vec![BoundKind::Wwb, BoundKind::Zzb, BoundKind::Map]);
        assert_eq!(spec.snr_db.values().len(), 31);
    }

    #[test]
    fn axes_override_preset() {
        let spec = sweep_of(&parse(&[
            "sweep",
            "--figure",
            "11",
            "--kappa",
            "1,2",
            "--mu",
            "0.5",
            "--snr-start",
            "-5",
            "--kinds",
            "wwb",
            "--trio",
            "2,3,0;2,9,10",
        ]));
        assert_eq!(spec.priors, vec![(0.5, 1.0), (0.5, 2.0)]);
        assert_eq!(spec.snr_db.start, -5.0);
        assert_eq!(spec.kinds, vec![BoundKind::Wwb]);
        assert_eq!(spec.trios.len(), 2);
    }

    #[test]
    fn empty_kappa_is_a_config_error() {
        let cli = parse(&["sweep", "--figure", "13", "--kappa", ""]);
        let Cmd::Sweep(a) = &cli.command else { unreachable!() };
        let spec = sweep_spec(&cli.global, a).unwrap();
        let err = run_sweep(&spec).unwrap_err();
        assert_eq!(exit_code(&err), 2);
        assert!(err.to_string().contains("kappa_values"));
    }

    #[test]
    fn figure_seven_requires_kappa() {
        let cli = parse(&["sweep", "--figure", "7"]);
        let Cmd::Sweep(a) = &cli.command else { unreachable!() };
        assert_eq!(exit_code(&sweep_spec(&cli.global, a).unwrap_err()), 2);
    }
}
