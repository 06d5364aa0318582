//! Experiment configuration, batch execution and CSV/JSON artifacts.
//!
//! Configs are flat `key=value` text. Several pairs may share a line,
//! `#` starts a comment, and later assignments override earlier ones, so
//! command-line overrides are simply applied after the file.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{
    check_lemma_dec_a, fit_decay_exponent, fit_lifespan_scaling, in_global_region,
    lifespan_bracket, lifespan_pairs, lifespan_sweep, measure_lifespan, threshold_map,
    FitResult, LifespanLaw, SweepSetup,
};
use crate::characteristics::{oracle_over_seeds, DEFAULT_SEED_STRIDE};
use crate::error::{Error, Result};
use crate::grid::{Boundary, Family, Grid, InitialData};
use crate::outcome::{RunOutcome, SeriesSample, Status};
use crate::solver::{run, Limiter, SeriesCadence, SnapshotPolicy, SolverOptions};
use crate::thermo::Parameters;

pub const SCHEMA_VERSION: u32 = 1;
pub const SERIES_HEADER: [&str; 7] = ["t", "sup_r", "sup_s", "sup_rx", "sup_sx", "sup_rt", "sup_st"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Run,
    DecayFit,
    LifespanSweep,
    ThresholdMap,
    LemmaCheck,
    OracleCompare,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Run => "run",
            ExperimentKind::DecayFit => "decay_fit",
            ExperimentKind::LifespanSweep => "lifespan_sweep",
            ExperimentKind::ThresholdMap => "threshold_map",
            ExperimentKind::LemmaCheck => "lemma_check",
            ExperimentKind::OracleCompare => "oracle_compare",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "run" => ExperimentKind::Run,
            "decay_fit" => ExperimentKind::DecayFit,
            "lifespan_sweep" => ExperimentKind::LifespanSweep,
            "threshold_map" => ExperimentKind::ThresholdMap,
            "lemma_check" => ExperimentKind::LemmaCheck,
            "oracle_compare" => ExperimentKind::OracleCompare,
            _ => {
                return Err(format!(
                    "unknown kind '{s}' (expected run|decay_fit|lifespan_sweep|threshold_map|lemma_check|oracle_compare)"
                ))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub params: Parameters,
    pub grid: Grid,
    pub data: InitialData,
    pub horizon: f64,
    pub options: SolverOptions,
    pub series: SeriesCadence,
    pub history_every: usize,
    pub kind: ExperimentKind,
    /// Amplitudes of a lifespan sweep.
    pub epsilons: Vec<f64>,
    pub mu_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    pub fit_window: (f64, f64),
    pub law: LifespanLaw,
    /// Upper end of the weighted-integral check.
    pub t_max: f64,
    pub n_quad: usize,
    pub seed_stride: usize,
    pub output: PathBuf,
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            params: Parameters::default(),
            grid: Grid::default(),
            data: InitialData::default(),
            horizon: 1e3,
            options: SolverOptions::default(),
            series: SeriesCadence::LogSpaced { per_decade: 40 },
            history_every: 1,
            kind: ExperimentKind::Run,
            epsilons: vec![0.1, 0.05, 0.02, 0.01],
            mu_grid: vec![0.0, 0.5, 1.0, 1.5, 2.0],
            lambda_grid: vec![0.0, 1.0, 2.0, 3.0, 4.0],
            fit_window: (10.0, 1e3),
            law: LifespanLaw::Power,
            t_max: 1e6,
            n_quad: 2000,
            seed_stride: DEFAULT_SEED_STRIDE,
            output: PathBuf::from("out"),
            workers: 1,
        }
    }
}

fn parse_list(v: &str) -> Result<Vec<f64>, String> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| format!("'{s}': {e}")))
        .collect()
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_cadence(v: &str) -> Result<SeriesCadence, String> {
    let bad = || format!("'{v}' (expected every|log:N|uniform:DT)");
    match v.split_once(':') {
        None if v == "every" => Ok(SeriesCadence::EveryStep),
        Some(("log", n)) => n
            .parse()
            .map(|per_decade| SeriesCadence::LogSpaced { per_decade })
            .map_err(|_| bad()),
        Some(("uniform", d)) => d
            .parse()
            .map(|interval| SeriesCadence::Uniform { interval })
            .map_err(|_| bad()),
        _ => Err(bad()),
    }
}

fn fmt_cadence(c: &SeriesCadence) -> String {
    match c {
        SeriesCadence::EveryStep => "every".into(),
        SeriesCadence::LogSpaced { per_decade } => format!("log:{per_decade}"),
        SeriesCadence::Uniform { interval } => format!("uniform:{interval}"),
    }
}

fn num<T: FromStr>(v: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| format!("'{v}': {e}"))
}

pub const KEYS: &[&str] = &[
    "kind", "gamma", "lambda", "mu", "epsilon", "u_floor", "x_min", "x_max", "n_cells",
    "boundary", "data", "wavenumber", "phase", "center", "width", "horizon", "cfl",
    "blowup_factor", "bracket_factors", "dt_min", "limiter", "series", "history_every",
    "epsilons", "mu_grid", "lambda_grid", "fit_lo", "fit_hi", "law", "t_max", "n_quad",
    "seed_stride", "output", "workers",
];

impl ExperimentConfig {
    /// Assign one key. Errors are bare messages; callers add the location.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        match key {
            "kind" => self.kind = v.parse()?,
            "gamma" => self.params.gamma = num(v)?,
            "lambda" => self.params.lambda = num(v)?,
            "mu" => self.params.mu = num(v)?,
            "epsilon" => self.params.epsilon = num(v)?,
            "u_floor" => self.params.u_floor = num(v)?,
            "x_min" => self.grid.x_min = num(v)?,
            "x_max" => self.grid.x_max = num(v)?,
            "n_cells" => self.grid.n_cells = num(v)?,
            "boundary" => self.grid.boundary = v.parse::<Boundary>()?,
            "data" => self.data.family = v.parse::<Family>()?,
            "wavenumber" => self.data.wavenumber = num(v)?,
            "phase" => self.data.phase = num(v)?,
            "center" => self.data.center = num(v)?,
            "width" => self.data.width = num(v)?,
            "horizon" => self.horizon = num(v)?,
            "cfl" => self.options.cfl = num(v)?,
            "blowup_factor" => self.options.blowup_factor = num(v)?,
            "bracket_factors" => self.options.bracket_factors = parse_list(v)?,
            "dt_min" => self.options.dt_min = num(v)?,
            "limiter" => self.options.limiter = v.parse::<Limiter>()?,
            "series" => self.series = parse_cadence(v)?,
            "history_every" => self.history_every = num(v)?,
            "epsilons" => self.epsilons = parse_list(v)?,
            "mu_grid" => self.mu_grid = parse_list(v)?,
            "lambda_grid" => self.lambda_grid = parse_list(v)?,
            "fit_lo" => self.fit_window.0 = num(v)?,
            "fit_hi" => self.fit_window.1 = num(v)?,
            "law" => self.law = v.parse()?,
            "t_max" => self.t_max = num(v)?,
            "n_quad" => self.n_quad = num(v)?,
            "seed_stride" => self.seed_stride = num(v)?,
            "output" => self.output = PathBuf::from(v),
            "workers" => self.workers = num(v)?,
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    /// Every field as `key=value` lines, in [`KEYS`] order. Parsing the
    /// result gives back an equal config.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let g = &self.grid;
        let d = &self.data;
        let o = &self.options;
        let values: Vec<String> = vec![
            self.kind.name().into(),
            p.gamma.to_string(),
            p.lambda.to_string(),
            p.mu.to_string(),
            p.epsilon.to_string(),
            p.u_floor.to_string(),
            g.x_min.to_string(),
            g.x_max.to_string(),
            g.n_cells.to_string(),
            g.boundary.to_string(),
            d.family.to_string(),
            d.wavenumber.to_string(),
            d.phase.to_string(),
            d.center.to_string(),
            d.width.to_string(),
            self.horizon.to_string(),
            o.cfl.to_string(),
            o.blowup_factor.to_string(),
            fmt_list(&o.bracket_factors),
            o.dt_min.to_string(),
            o.limiter.to_string(),
            fmt_cadence(&self.series),
            self.history_every.to_string(),
            fmt_list(&self.epsilons),
            fmt_list(&self.mu_grid),
            fmt_list(&self.lambda_grid),
            self.fit_window.0.to_string(),
            self.fit_window.1.to_string(),
            self.law.to_string(),
            self.t_max.to_string(),
            self.n_quad.to_string(),
            self.seed_stride.to_string(),
            self.output.display().to_string(),
            self.workers.to_string(),
        ];
        let mut out = String::new();
        for (k, v) in KEYS.iter().zip(values) {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    /// Check every field against the invariants of the module that will
    /// consume it.
    pub fn validate(&self) -> Result<()> {
        let sem = |e: Error| Error::Config {
            location: "config".into(),
            message: match e {
                Error::InvalidParameter(m) | Error::Precondition(m) => m,
                e => e.to_string(),
            },
        };
        let fail = |m: String| sem(Error::InvalidParameter(m));
        self.params.validate().map_err(sem)?;
        self.grid.validate().map_err(sem)?;
        self.data.validate().map_err(sem)?;
        self.options.validate().map_err(sem)?;
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(fail(format!("horizon must be positive (got {})", self.horizon)));
        }
        if self.history_every == 0 {
            return Err(fail("history_every must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(fail("workers must be at least 1".into()));
        }
        match self.series {
            SeriesCadence::LogSpaced { per_decade: 0 } => {
                return Err(fail("series log:N needs N >= 1".into()))
            }
            SeriesCadence::Uniform { interval } if !(interval > 0.0) => {
                return Err(fail("series uniform:DT needs DT > 0".into()))
            }
            _ => {}
        }
        match self.kind {
            ExperimentKind::LifespanSweep => {
                if self.epsilons.is_empty() {
                    return Err(fail("epsilons must be nonempty for a lifespan sweep".into()));
                }
                for &e in &self.epsilons {
                    Parameters { epsilon: e, ..self.params }.validate().map_err(sem)?;
                }
            }
            ExperimentKind::ThresholdMap => {
                if self.mu_grid.is_empty() || self.lambda_grid.is_empty() {
                    return Err(fail("mu_grid and lambda_grid must be nonempty".into()));
                }
                for &mu in &self.mu_grid {
                    for &lambda in &self.lambda_grid {
                        Parameters { mu, lambda, ..self.params }.validate().map_err(sem)?;
                    }
                }
            }
            ExperimentKind::DecayFit => {
                let (lo, hi) = self.fit_window;
                if !((1.0 + hi) >= 10.0 * (1.0 + lo) && hi <= self.horizon) {
                    return Err(fail(format!(
                        "fit window [{lo}, {hi}] must span a decade in 1+t and end by the horizon"
                    )));
                }
            }
            ExperimentKind::LemmaCheck => {
                if !in_global_region(self.params.mu, self.params.lambda) {
                    return Err(fail(format!(
                        "lemma_check needs 0 <= mu < 1 with lambda > 0, or mu = 1 with lambda > 2 (got mu = {}, lambda = {})",
                        self.params.mu, self.params.lambda
                    )));
                }
                if !(self.t_max >= 0.0 && self.t_max.is_finite()) || self.n_quad < 2 {
                    return Err(fail("lemma_check needs finite t_max >= 0 and n_quad >= 2".into()));
                }
            }
            ExperimentKind::OracleCompare => {
                if self.params.lambda != 0.0 {
                    return Err(fail(format!(
                        "oracle_compare needs lambda = 0 (got {})",
                        self.params.lambda
                    )));
                }
                if self.seed_stride == 0 {
                    return Err(fail("seed_stride must be at least 1".into()));
                }
            }
            ExperimentKind::Run => {}
        }
        Ok(())
    }

    fn policy(&self, history: bool) -> SnapshotPolicy {
        SnapshotPolicy {
            series: self.series,
            history_every: history.then_some(self.history_every),
        }
    }

    fn sweep_setup(&self) -> SweepSetup {
        SweepSetup {
            grid: self.grid,
            data: self.data,
            horizon: self.horizon,
            options: self.options.clone(),
            policy: self.policy(false),
            workers: self.workers,
        }
    }
}

/// Apply `key=value` pairs from config text on top of `cfg`.
pub fn apply_text(cfg: &mut ExperimentConfig, text: &str) -> Result<()> {
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for token in line.split_whitespace() {
            let location = format!("line {}", i + 1);
            let (k, v) = token.split_once('=').ok_or_else(|| Error::Config {
                location: location.clone(),
                message: format!("expected key=value, found '{token}'"),
            })?;
            cfg.set(k, v)
                .map_err(|message| Error::Config { location, message })?;
        }
    }
    Ok(())
}

/// Apply command-line overrides: `key=value`, `--key=value` or
/// `--key value`.
pub fn apply_flags(cfg: &mut ExperimentConfig, args: &[String]) -> Result<()> {
    let mut i = 0;
    while i < args.len() {
        let arg = &args[i];
        let location = format!("flag '{arg}'");
        let stripped = arg.strip_prefix("--").unwrap_or(arg);
        let (k, v) = match stripped.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None if arg.starts_with("--") => {
                i += 1;
                let v = args.get(i).ok_or_else(|| Error::Config {
                    location: location.clone(),
                    message: "missing value".into(),
                })?;
                (stripped.to_string(), v.clone())
            }
            None => {
                return Err(Error::Config {
                    location,
                    message: "expected key=value".into(),
                })
            }
        };
        cfg.set(&k.replace('-', "_"), &v)
            .map_err(|message| Error::Config { location, message })?;
        i += 1;
    }
    Ok(())
}

/// Defaults, then `text`, then validation.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    apply_text(&mut cfg, text)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Exit status of a command: success or a classified failure.
pub fn exit_code_for(status: &Status) -> i32 {
    match status {
        Status::GlobalToHorizon(_) | Status::BlowUp(_) => 0,
        Status::Vacuum(_) => 3,
        Status::CflFailure(_) => 4,
    }
}

/// 2 for configuration problems, 1 for anything else that stopped a run.
pub fn exit_code_for_error(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::InvalidParameter(_) | Error::Precondition(_) => 2,
        Error::Vacuum { .. } => 3,
        Error::CflFailure { .. } => 4,
        _ => 1,
    }
}

fn worst_code(statuses: impl IntoIterator<Item = Status>) -> i32 {
    let codes: Vec<i32> = statuses.into_iter().map(|s| exit_code_for(&s)).collect();
    if codes.contains(&3) {
        3
    } else if codes.contains(&4) {
        4
    } else {
        0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub exit_code: i32,
    pub summary: Value,
    pub files: Vec<PathBuf>,
}

/// A float with 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_path(path)?)
}

pub fn write_series_csv(path: &Path, series: &[SeriesSample]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(SERIES_HEADER)?;
    for s in series {
        w.write_record(
            [s.t, s.sup_r, s.sup_s, s.sup_rx, s.sup_sx, s.sup_rt, s.sup_st].map(fmt_float),
        )?;
    }
    w.flush()?;
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

fn fit_json(r: Result<FitResult>) -> Value {
    match r {
        Ok(f) => json!({
            "exponent": f.exponent,
            "constant": f.constant,
            "residual_rms": f.residual_rms,
            "r_squared": f.r_squared,
            "window": [f.window.0, f.window.1],
            "samples": f.samples,
        }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn status_json(s: &Status) -> Value {
    json!({ "kind": s.name(), "t": s.time() })
}

fn run_json(o: &RunOutcome) -> Value {
    json!({
        "status": status_json(&o.status),
        "t_star": measure_lifespan(o).time(),
        "t_bracket": lifespan_bracket(o).map(|b| b.0),
        "crossings": o.crossings.iter().map(|c| json!({"factor": c.factor, "t": c.t})).collect::<Vec<_>>(),
        "gradient_base": o.gradient_base,
        "steps": o.steps,
    })
}

/// Run the experiment and write its artifacts into `cfg.output`.
pub fn execute(cfg: &ExperimentConfig) -> Result<Execution> {
    cfg.validate()?;
    let started = Instant::now();
    fs::create_dir_all(&cfg.output)?;
    let series_path = cfg.output.join("series.csv");
    let sweep_path = cfg.output.join("sweep.csv");
    let mut files = Vec::new();

    let (exit_code, results) = match cfg.kind {
        ExperimentKind::Run | ExperimentKind::DecayFit => {
            let o = run(&cfg.data, &cfg.grid, &cfg.params, cfg.horizon, &cfg.policy(false), &cfg.options)?;
            write_series_csv(&series_path, &o.series)?;
            files.push(series_path);
            let mut res = run_json(&o);
            if cfg.kind == ExperimentKind::DecayFit {
                res["fits"] = json!({
                    "gradient": fit_json(fit_decay_exponent(&o.gradient_series(), cfg.fit_window)),
                    "rt": fit_json(fit_decay_exponent(&o.rt_series(), cfg.fit_window)),
                });
            }
            res["lemma_esp"] = match crate::analysis::check_lemma_esp(&o) {
                Ok(b) => json!(b),
                Err(_) => Value::Null,
            };
            (exit_code_for(&o.status), res)
        }
        ExperimentKind::LifespanSweep => {
            let rows = lifespan_sweep(&cfg.params, &cfg.epsilons, &cfg.sweep_setup())?;
            let mut w = csv_writer(&sweep_path)?;
            w.write_record(["epsilon", "status", "t_star", "t_bracket"])?;
            for r in &rows {
                w.write_record([fmt_float(r.epsilon), r.status.name().into(), opt(r.t_star), opt(r.t_bracket)])?;
            }
            w.flush()?;
            files.push(sweep_path);
            let pairs = lifespan_pairs(&rows);
            let res = json!({
                "points": rows.iter().map(|r| json!({
                    "epsilon": r.epsilon,
                    "status": status_json(&r.status),
                    "t_star": r.t_star,
                    "t_bracket": r.t_bracket,
                })).collect::<Vec<_>>(),
                "fits": { "law": cfg.law.to_string(), "lifespan": fit_json(fit_lifespan_scaling(&pairs, cfg.law)) },
            });
            (worst_code(rows.iter().map(|r| r.status)), res)
        }
        ExperimentKind::ThresholdMap => {
            let map = threshold_map(&cfg.mu_grid, &cfg.lambda_grid, &cfg.params, &cfg.sweep_setup())?;
            let mut w = csv_writer(&sweep_path)?;
            w.write_record(["mu", "lambda", "status", "t", "expected", "agrees"])?;
            for c in &map.cells {
                let expected = serde_json::to_value(c.expected)?;
                w.write_record([
                    fmt_float(c.mu),
                    fmt_float(c.lambda),
                    c.status.name().into(),
                    fmt_float(c.status.time()),
                    expected.as_str().unwrap_or_default().into(),
                    c.agrees().map(|b| b.to_string()).unwrap_or_else(|| "exempt".into()),
                ])?;
            }
            w.flush()?;
            files.push(sweep_path);
            let res = json!({
                "cells": map.cells.len(),
                "mismatches": map.mismatches().iter().map(|c| json!({"mu": c.mu, "lambda": c.lambda, "status": status_json(&c.status)})).collect::<Vec<_>>(),
            });
            (worst_code(map.cells.iter().map(|c| c.status)), res)
        }
        ExperimentKind::LemmaCheck => {
            let (sup_value, argmax_t) = check_lemma_dec_a(&cfg.params, cfg.t_max, cfg.n_quad)?;
            let (doubled, _) = check_lemma_dec_a(&cfg.params, 2.0 * cfg.t_max, cfg.n_quad)?;
            let drift = if sup_value > 0.0 { (doubled - sup_value).abs() / sup_value } else { 0.0 };
            (0, json!({
                "sup_value": sup_value,
                "argmax_t": argmax_t,
                "sup_value_doubled": doubled,
                "relative_drift": drift,
            }))
        }
        ExperimentKind::OracleCompare => {
            let o = run(&cfg.data, &cfg.grid, &cfg.params, cfg.horizon, &cfg.policy(true), &cfg.options)?;
            write_series_csv(&series_path, &o.series)?;
            files.push(series_path);
            let mut res = run_json(&o);
            let oracle = match &o.history {
                Some(h) if o.status.is_healthy() => oracle_over_seeds(h, &cfg.params, cfg.seed_stride)?,
                _ => None,
            };
            res["oracle_t_star"] = json!(oracle);
            res["relative_error"] = json!(match (measure_lifespan(&o).time(), oracle) {
                (Some(t), Some(t0)) => Some((t - t0).abs() / t0),
                _ => None,
            });
            (exit_code_for(&o.status), res)
        }
    };

    let summary = json!({
        "schema": SCHEMA_VERSION,
        "kind": cfg.kind.name(),
        "exit_code": exit_code,
        "results": results,
        "provenance": {
            "config": cfg.to_text(),
            "version": env!("CARGO_PKG_VERSION"),
            "wall_time_s": started.elapsed().as_secs_f64(),
        },
    });
    let summary_path = cfg.output.join("summary.json");
    fs::write(&summary_path, serde_json::to_string_pretty(&summary)? + "\n")?;
    files.push(summary_path);
    Ok(Execution {
        exit_code,
        summary,
        files,
    })
}
