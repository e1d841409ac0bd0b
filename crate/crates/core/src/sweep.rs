//! Parameter sweeps over SNR, K and prior, figure presets and tabular output.

use std::f64::consts::PI;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::benchmark::{bcrb, zzb, BoundKind};
use crate::error::{config, Error, Result};
use crate::map_sim::{run_monte_carlo, ErrorMetric, McConfig};
use crate::numerics::QuadratureSpec;
use crate::prior::VonMisesPrior;
use crate::signal::{linear_to_db, SignalConfig};
use crate::testpoints::{build, TestPointConfig};
use crate::wwb::{WwbEvaluator, S_GRID};

pub const SNR_DB_MIN: f64 = -45.0;
pub const SNR_DB_MAX: f64 = 30.0;

/// Column order of the CSV output.
pub const CSV_HEADER: [&str; 10] =
    ["kind", "snr_db", "k", "kappa", "mu_rad", "s", "trio", "value_rad2", "value_db", "extra"];

/// Inclusive SNR grid in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SnrRange {
    pub fn new(start: f64, stop: f64, step: f64) -> Self {
        Self { start, stop, step }
    }

    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(config(format!("snr_db.step must be positive, got {}", self.step)));
        }
        if self.start > self.stop {
            return Err(config(format!("snr_db.start {} exceeds snr_db.stop {}", self.start, self.stop)));
        }
        if self.start < SNR_DB_MIN || self.stop > SNR_DB_MAX {
            return Err(config(format!(
                "snr_db range [{}, {}] must lie within [{SNR_DB_MIN}, {SNR_DB_MAX}]",
                self.start, self.stop
            )));
        }
        Ok(())
    }
}

/// How the WWB exponent is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ExponentMode {
    /// Maximize over the listed values.
    Optimize(Vec<f64>),
    /// One row per listed value.
    Each(Vec<f64>),
}

impl ExponentMode {
    fn values(&self) -> &[f64] {
        match self {
            ExponentMode::Optimize(v) | ExponentMode::Each(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub snr_db: SnrRange,
    pub k_values: Vec<usize>,
    /// `(μ, κ)` pairs.
    pub priors: Vec<(f64, f64)>,
    pub kinds: Vec<BoundKind>,
    pub trios: Vec<TestPointConfig>,
    pub exponent: ExponentMode,
    pub seed: u64,
    pub trials: usize,
    pub grid_size: usize,
    pub metric: ErrorMetric,
    pub quadrature: QuadratureSpec,
}

impl Default for SweepSpec {
    fn default() -> Self {
        let mc = McConfig::default();
        Self {
            snr_db: SnrRange::new(-20.0, 10.0, 1.0),
            k_values: vec![20],
            priors: vec![(0.0, 1.0)],
            kinds: vec![BoundKind::Wwb],
            trios: vec![TestPointConfig::proposed()],
            exponent: ExponentMode::Optimize(S_GRID.to_vec()),
            seed: 0,
            trials: mc.trials,
            grid_size: mc.grid_size,
            metric: mc.metric,
            quadrature: QuadratureSpec::default(),
        }
    }
}

/// Overrides for values a preset leaves open.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PresetOptions {
    pub kappa: Option<f64>,
    pub k: Option<usize>,
}

/// Cartesian product of `μ` and `κ` lists.
pub fn prior_grid(mu_values: &[f64], kappa_values: &[f64]) -> Vec<(f64, f64)> {
    mu_values.iter().flat_map(|&m| kappa_values.iter().map(move |&k| (m, k))).collect()
}

impl SweepSpec {
    /// Parameter grid of a figure.
    ///
    /// Figure 7 leaves κ open and needs `opts.kappa`. Figure 13 leaves K open;
    /// it defaults to 20, the value the text carries through every example.
    pub fn preset(figure: u32, opts: PresetOptions) -> Result<Self> {
        let base = Self::default();
        let k = opts.k.unwrap_or(20);
        let figure_priors = prior_grid(&[0.0], &[0.0, 1.0, 2.0, 5.0, 20.0]);
        let spec = match figure {
            6 => Self {
                k_values: opts.k.map_or(vec![20, 40, 60], |k| vec![k]),
                priors: vec![(0.0, opts.kappa.unwrap_or(2.0))],
                exponent: ExponentMode::Each(vec![0.1, 0.5]),
                ..base
            },
            7 => {
                let kappa = opts.kappa.ok_or_else(|| config("figure 7 does not state kappa; pass --kappa"))?;
                Self {
                    k_values: vec![k],
                    priors: vec![(0.0, kappa)],
                    trios: vec![TestPointConfig::legacy(), TestPointConfig::proposed()],
                    ..base
                }
            }
            8 => Self {
                k_values: vec![k],
                priors: figure_eight_priors(opts.kappa),
                trios: [1, 3, 5, 7, 9].iter().map(|&n| TestPointConfig::new(2, n, 0, 0.5)).collect::<Result<_>>()?,
                ..base
            },
            11 => Self {
                k_values: vec![k],
                priors: opts.kappa.map_or(figure_priors, |kp| vec![(0.0, kp)]),
                kinds: vec![BoundKind::Wwb, BoundKind::Bcrb, BoundKind::Map],
                ..base
            },
            12 => Self {
                k_values: vec![k],
                priors: opts.kappa.map_or(figure_priors, |kp| vec![(0.0, kp)]),
                kinds: vec![BoundKind::Wwb, BoundKind::Zzb],
                ..base
            },
            13 => Self {
                k_values: vec![k],
                priors: vec![(0.0, opts.kappa.unwrap_or(1.0))],
                kinds: vec![BoundKind::Wwb, BoundKind::Zzb, BoundKind::Map],
                ..base
            },
            other => return Err(config(format!("no preset for figure {other}; choose 6, 7, 8, 11, 12 or 13"))),
        };
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.snr_db.validate()?;
        if self.k_values.is_empty() {
            return Err(config("k_values is empty"));
        }
        if let Some(k) = self.k_values.iter().find(|&&k| k < 2) {
            return Err(config(format!("k_values entries must be >= 2, got {k}")));
        }
        if self.priors.is_empty() {
            return Err(config("kappa_values / mu_values are empty"));
        }
        for &(mu, kappa) in &self.priors {
            VonMisesPrior::new(mu, kappa).map_err(|e| config(format!("mu_values/kappa_values: {e}")))?;
        }
        if self.kinds.is_empty() {
            return Err(config("bound_kinds is empty"));
        }
        if self.kinds.contains(&BoundKind::Wwb) {
            if self.trios.is_empty() {
                return Err(config("testpoint_trio is empty"));
            }
            for t in &self.trios {
                t.validate().map_err(|e| config(format!("testpoint_trio: {e}")))?;
            }
            let s = self.exponent.values();
            if s.is_empty() {
                return Err(config("s_grid is empty"));
            }
            if let Some(bad) = s.iter().find(|&&v| !(v > 0.0 && v < 1.0)) {
                return Err(config(format!("s_grid values must lie in (0, 1), got {bad}")));
            }
        }
        McConfig { trials: self.trials, grid_size: self.grid_size, ..McConfig::default() }
            .validate()
            .map_err(|e| config(format!("map settings: {e}")))?;
        Ok(())
    }
}

fn figure_eight_priors(kappa: Option<f64>) -> Vec<(f64, f64)> {
    match kappa {
        Some(k) => vec![(0.0, k)],
        // κ rising at μ = 0, then shifted means at small and moderate κ
        None => vec![(0.0, 0.0), (0.0, 1.0), (0.0, 5.0), (PI / 2.0, 2.0), (PI, 1.0), (-PI / 2.0, 5.0)],
    }
}

/// One output row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub kind: BoundKind,
    pub snr_db: f64,
    pub k: usize,
    pub kappa: f64,
    pub mu_rad: f64,
    pub s: Option<f64>,
    pub trio: Option<String>,
    pub value_rad2: f64,
    pub value_db: f64,
    /// JSON object with diagnostics (dropped points, Monte Carlo statistics).
    pub extra: String,
}

impl SweepRow {
    fn new(kind: BoundKind, snr_db: f64, k: usize, prior: (f64, f64), value: f64) -> Self {
        Self {
            kind,
            snr_db,
            k,
            kappa: prior.1,
            mu_rad: prior.0,
            s: None,
            trio: None,
            value_rad2: value,
            value_db: linear_to_db(value),
            extra: "{}".to_string(),
        }
    }

    fn sort_key(&self) -> (BoundKind, usize, f64, f64, f64, String, f64) {
        (
            self.kind,
            self.k,
            self.kappa,
            self.mu_rad,
            self.snr_db,
            self.trio.clone().unwrap_or_default(),
            self.s.unwrap_or(0.0),
        )
    }
}

fn point_name(kind: BoundKind, k: usize, prior: (f64, f64), snr_db: f64) -> String {
    format!("{kind} K={k} mu={} kappa={} snr_db={snr_db}", prior.0, prior.1)
}

fn at_point<T>(r: Result<T>, kind: BoundKind, k: usize, prior: (f64, f64), snr_db: f64) -> Result<T> {
    r.map_err(|e| Error::GridPoint { point: point_name(kind, k, prior, snr_db), source: Box::new(e) })
}

/// Evaluates every requested kind on the full grid; rows sorted by
/// `(kind, K, κ, μ, snr_db)`.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let snrs = spec.snr_db.values();
    let mut rows = Vec::new();
    for &k in &spec.k_values {
        for &prior_pair in &spec.priors {
            let prior = VonMisesPrior::new(prior_pair.0, prior_pair.1)?;
            for &kind in &spec.kinds {
                let block = match kind {
                    BoundKind::Wwb => wwb_rows(spec, k, prior_pair, &prior, &snrs)?,
                    BoundKind::Bcrb | BoundKind::Zzb => snrs
                        .iter()
                        .map(|&db| {
                            let c = at_point(SignalConfig::from_snr_db(k, db), kind, k, prior_pair, db)?;
                            let v = if kind == BoundKind::Bcrb {
                                bcrb(&prior, k, c.snr())
                            } else {
                                zzb(&prior, k, c.snr())
                            };
                            Ok(SweepRow::new(kind, db, k, prior_pair, at_point(v, kind, k, prior_pair, db)?))
                        })
                        .collect::<Result<Vec<_>>>()?,
                    BoundKind::Map => map_rows(spec, k, prior_pair, &prior, &snrs)?,
                };
                rows.extend(block);
            }
        }
    }
    rows.sort_by(|a, b| a.sort_key().partial_cmp(&b.sort_key()).expect("finite sort keys"));
    Ok(rows)
}

fn wwb_rows(
    spec: &SweepSpec,
    k: usize,
    pair: (f64, f64),
    prior: &VonMisesPrior,
    snrs: &[f64],
) -> Result<Vec<SweepRow>> {
    let kind = BoundKind::Wwb;
    let mut rows = Vec::new();
    for trio in &spec.trios {
        let set = at_point(build(trio, k), kind, k, pair, snrs[0])?;
        let ev =
            at_point(WwbEvaluator::new(prior, &set, spec.exponent.values(), &spec.quadrature), kind, k, pair, snrs[0])?;
        let block: Vec<Vec<SweepRow>> = snrs
            .par_iter()
            .map(|&db| {
                let c = at_point(SignalConfig::from_snr_db(k, db), kind, k, pair, db)?;
                let results = match &spec.exponent {
                    ExponentMode::Optimize(_) => vec![at_point(ev.optimize(&c), kind, k, pair, db)?],
                    ExponentMode::Each(values) => values
                        .iter()
                        .map(|&s| Ok((s, at_point(ev.value(&c, s), kind, k, pair, db)?)))
                        .collect::<Result<Vec<_>>>()?,
                };
                Ok(results
                    .into_iter()
                    .map(|(s, r)| {
                        let mut row = SweepRow::new(kind, db, k, pair, r.mse_bound);
                        row.s = Some(s);
                        row.trio = Some(trio.trio());
                        row.extra = json!({ "dropped_points": r.dropped_points }).to_string();
                        row
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        rows.extend(block.into_iter().flatten());
    }
    Ok(rows)
}

fn map_rows(
    spec: &SweepSpec,
    k: usize,
    pair: (f64, f64),
    prior: &VonMisesPrior,
    snrs: &[f64],
) -> Result<Vec<SweepRow>> {
    let kind = BoundKind::Map;
    let mc = McConfig {
        trials: spec.trials,
        grid_size: spec.grid_size,
        seed: spec.seed,
        metric: spec.metric,
        ..McConfig::default()
    };
    snrs.iter()
        .map(|&db| {
            let c = at_point(SignalConfig::from_snr_db(k, db), kind, k, pair, db)?;
            let r = at_point(run_monte_carlo(&c, prior, &mc), kind, k, pair, db)?;
            let mut row = SweepRow::new(kind, db, k, pair, r.mse);
            row.extra = json!({
                "trials": r.trials_used,
                "outlier_fraction": r.outlier_fraction,
                "mse_std_err": r.mse_std_err,
                "seed": spec.seed,
            })
            .to_string();
            Ok(row)
        })
        .collect()
}

/// Seventeen significant digits.
fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Hertz equivalent of an RMSE in radians for integration rate `f_int`.
pub fn rmse_hz(value_rad2: f64, f_int: f64) -> f64 {
    value_rad2.sqrt() * f_int / (2.0 * PI)
}

fn io_err(path: &str, e: impl std::fmt::Display) -> Error {
    Error::Io { path: path.to_string(), message: e.to_string() }
}

/// Writes rows as CSV; `f_int` appends an `rmse_hz` column.
pub fn write_csv<W: Write>(rows: &[SweepRow], out: W, f_int: Option<f64>, path: &str) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = CSV_HEADER.to_vec();
    if f_int.is_some() {
        header.push("rmse_hz");
    }
    w.write_record(&header).map_err(|e| io_err(path, e))?;
    for r in rows {
        let mut rec = vec![
            r.kind.to_string(),
            fmt_float(r.snr_db),
            r.k.to_string(),
            fmt_float(r.kappa),
            fmt_float(r.mu_rad),
            r.s.map(fmt_float).unwrap_or_default(),
            r.trio.clone().unwrap_or_default(),
            fmt_float(r.value_rad2),
            fmt_float(r.value_db),
            r.extra.clone(),
        ];
        if let Some(f) = f_int {
            rec.push(fmt_float(rmse_hz(r.value_rad2, f)));
        }
        w.write_record(&rec).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Writes rows as a JSON array of records.
pub fn write_json<W: Write>(rows: &[SweepRow], mut out: W, path: &str) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows).map_err(|e| io_err(path, e))?;
    writeln!(out).map_err(|e| io_err(path, e))
}

/// Reads rows written by [`write_csv`]; an `rmse_hz` column is ignored.
pub fn read_csv<R: Read>(input: R, path: &str) -> Result<Vec<SweepRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers().map_err(|e| io_err(path, e))?.clone();
    if header.iter().take(CSV_HEADER.len()).ne(CSV_HEADER.iter().copied()) {
        return Err(io_err(path, "unexpected CSV header"));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| io_err(path, format!("{s:?}: {e}")));
    rd.records()
        .map(|rec| {
            let rec = rec.map_err(|e| io_err(path, e))?;
            let kind = match &rec[0] {
                "WWB" => BoundKind::Wwb,
                "BCRB" => BoundKind::Bcrb,
                "ZZB" => BoundKind::Zzb,
                "MAP" => BoundKind::Map,
                other => return Err(io_err(path, format!("unknown kind {other:?}"))),
            };
            Ok(SweepRow {
                kind,
                snr_db: num(&rec[1])?,
                k: rec[2].parse().map_err(|e| io_err(path, e))?,
                kappa: num(&rec[3])?,
                mu_rad: num(&rec[4])?,
                s: if rec[5].is_empty() { None } else { Some(num(&rec[5])?) },
                trio: if rec[6].is_empty() { None } else { Some(rec[6].to_string()) },
                value_rad2: num(&rec[7])?,
                value_db: num(&rec[8])?,
                extra: rec[9].to_string(),
            })
        })
        .collect()
}

/// Reads rows written by [`write_json`].
pub fn read_json<R: Read>(input: R, path: &str) -> Result<Vec<SweepRow>> {
    serde_json::from_reader(input).map_err(|e| io_err(path, e))
}
