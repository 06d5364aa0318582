//! Decay-exponent and lifespan fits, lemma checks and the `(μ, λ)`
//! threshold map.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, InitialData};
use crate::outcome::{RunOutcome, Status};
use crate::quadrature::adaptive_simpson;
use crate::solver::{run, SnapshotPolicy, SolverOptions};
use crate::thermo::Parameters;

pub const MIN_FIT_SAMPLES: usize = 8;
pub const MIN_LIFESPAN_POINTS: usize = 4;
pub const ESP_SLACK: f64 = 1e-6;
pub const DEC_A_REL_TOL: f64 = 1e-8;

/// Least-squares line through `(log-abscissa, log T or log value)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub exponent: f64,
    /// Prefactor, `exp(intercept)`.
    pub constant: f64,
    pub residual_rms: f64,
    pub r_squared: f64,
    /// Abscissa range of the samples that entered the fit.
    pub window: (f64, f64),
    pub samples: usize,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("abscissae do not vary".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let rms = (ss_res / n).sqrt();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok((slope, intercept, rms, r2))
}

/// Slope of `log value` against `log(1+t)` over samples with `t` in
/// `window`.
pub fn fit_decay_exponent(series: &[(f64, f64)], window: (f64, f64)) -> Result<FitResult> {
    let (lo, hi) = window;
    if !((1.0 + hi) >= 10.0 * (1.0 + lo)) {
        return Err(Error::DegenerateFit(format!(
            "window [{lo}, {hi}] spans less than a decade in 1+t"
        )));
    }
    let picked: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|&(t, _)| t >= lo && t <= hi)
        .collect();
    if picked.len() < MIN_FIT_SAMPLES {
        return Err(Error::DegenerateFit(format!(
            "{} samples in [{lo}, {hi}], need at least {MIN_FIT_SAMPLES}",
            picked.len()
        )));
    }
    if let Some(&(t, v)) = picked.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::DegenerateFit(format!(
            "value {v} at t = {t} is not positive"
        )));
    }
    let xs: Vec<f64> = picked.iter().map(|(t, _)| t.ln_1p()).collect();
    let ys: Vec<f64> = picked.iter().map(|(_, v)| v.ln()).collect();
    let (slope, intercept, rms, r2) = least_squares(&xs, &ys)?;
    Ok(FitResult {
        exponent: slope,
        constant: intercept.exp(),
        residual_rms: rms,
        r_squared: r2,
        window: (picked[0].0, picked[picked.len() - 1].0),
        samples: picked.len(),
    })
}

/// Numerical lifespan of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "t", rename_all = "snake_case")]
pub enum Lifespan {
    Finite(f64),
    /// No blow-up before the horizon.
    Global,
    /// Vacuum or CFL failure; not a lifespan.
    Failed(Status),
}

impl Lifespan {
    pub fn time(&self) -> Option<f64> {
        match *self {
            Lifespan::Finite(t) => Some(t),
            _ => None,
        }
    }
}

pub fn measure_lifespan(outcome: &RunOutcome) -> Lifespan {
    match outcome.status {
        Status::BlowUp(t) => Lifespan::Finite(t),
        Status::GlobalToHorizon(_) => Lifespan::Global,
        s => Lifespan::Failed(s),
    }
}

/// First crossing time of the smallest bracket factor and the blow-up
/// time, when the run blew up.
pub fn lifespan_bracket(outcome: &RunOutcome) -> Option<(f64, f64)> {
    let t_star = measure_lifespan(outcome).time()?;
    let early = outcome
        .crossings
        .iter()
        .filter(|c| c.factor < outcome.blowup_factor)
        .map(|c| c.t)
        .fold(t_star, f64::min);
    Some((early, t_star))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LifespanLaw {
    /// `T* ≈ C ε^k`: slope of `log T*` against `log ε`.
    Power,
    /// `T* ≈ C e^{k/ε}`: slope of `log T*` against `1/ε`.
    Exponential,
}

impl std::str::FromStr for LifespanLaw {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "power" => Ok(LifespanLaw::Power),
            "exponential" => Ok(LifespanLaw::Exponential),
            _ => Err(format!("unknown law '{s}' (expected power|exponential)")),
        }
    }
}

impl std::fmt::Display for LifespanLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LifespanLaw::Power => "power",
            LifespanLaw::Exponential => "exponential",
        })
    }
}

pub fn fit_lifespan_scaling(pairs: &[(f64, f64)], law: LifespanLaw) -> Result<FitResult> {
    if pairs.len() < MIN_LIFESPAN_POINTS {
        return Err(Error::DegenerateFit(format!(
            "{} lifespans, need at least {MIN_LIFESPAN_POINTS}",
            pairs.len()
        )));
    }
    if let Some(&(e, t)) = pairs.iter().find(|(e, t)| !(*e > 0.0 && *t > 0.0)) {
        return Err(Error::DegenerateFit(format!(
            "non-positive pair (epsilon = {e}, T* = {t})"
        )));
    }
    let (e_min, e_max) = pairs
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), (e, _)| (a.min(*e), b.max(*e)));
    if !(e_max >= 10.0 * e_min * (1.0 - 1e-12)) {
        return Err(Error::DegenerateFit(format!(
            "epsilon range [{e_min}, {e_max}] spans less than a decade"
        )));
    }
    let xs: Vec<f64> = pairs
        .iter()
        .map(|(e, _)| match law {
            LifespanLaw::Power => e.ln(),
            LifespanLaw::Exponential => 1.0 / e,
        })
        .collect();
    let ys: Vec<f64> = pairs.iter().map(|(_, t)| t.ln()).collect();
    let (slope, intercept, rms, r2) = least_squares(&xs, &ys)?;
    let (w0, w1) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
    Ok(FitResult {
        exponent: slope,
        constant: intercept.exp(),
        residual_rms: rms,
        r_squared: r2,
        window: (w0, w1),
        samples: pairs.len(),
    })
}

/// `(0 ≤ μ < 1 ∧ λ > 0) ∨ (μ = 1 ∧ λ > 2)`.
pub fn in_global_region(mu: f64, lambda: f64) -> bool {
    (mu >= 0.0 && mu < 1.0 && lambda > 0.0) || (mu == 1.0 && lambda > 2.0)
}

/// `(μ > 1 ∧ λ > 0) ∨ (μ = 1 ∧ 0 ≤ λ ≤ 2)`.
pub fn in_blowup_region(mu: f64, lambda: f64) -> bool {
    (mu > 1.0 && lambda > 0.0) || (mu == 1.0 && (0.0..=2.0).contains(&lambda))
}

/// Supremum over a log-spaced grid of
/// `(1+t)^μ A(t)⁻¹ ∫₀ᵗ A(s)(1+s)^{-2μ} ds`, with the time attaining it.
/// Requires `(0 ≤ μ < 1 ∧ λ > 0) ∨ (μ = 1 ∧ λ > 2)`.
pub fn check_lemma_dec_a(p: &Parameters, t_max: f64, n_quad: usize) -> Result<(f64, f64)> {
    if !in_global_region(p.mu, p.lambda) {
        return Err(Error::Precondition(format!(
            "the weighted integral bound needs 0 <= mu < 1 with lambda > 0, or mu = 1 with lambda > 2 (got mu = {}, lambda = {})",
            p.mu, p.lambda
        )));
    }
    decay_integral_sup(p, t_max, n_quad)
}

/// [`check_lemma_dec_a`] without the parameter restriction.
pub fn decay_integral_sup(p: &Parameters, t_max: f64, n_quad: usize) -> Result<(f64, f64)> {
    p.validate()?;
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(Error::Precondition(format!("t_max must be finite and >= 0 (got {t_max})")));
    }
    if t_max == 0.0 {
        return Ok((0.0, 0.0));
    }
    if n_quad < 2 {
        return Err(Error::Precondition("n_quad must be at least 2".into()));
    }
    let ln_a = |t: f64| p.ln_damping_weight(t);
    let span = t_max.ln_1p();
    let mut best = (0.0f64, 0.0f64);
    // J(t) = A(t)⁻¹ ∫₀ᵗ A(s)(1+s)^{-2μ} ds, advanced interval by interval
    // in σ = ln(1+s) so the weights never overflow.
    let mut j = 0.0f64;
    let mut sigma_prev = 0.0f64;
    for k in 1..n_quad {
        let sigma = span * k as f64 / (n_quad - 1) as f64;
        let t = sigma.exp_m1();
        let t_prev = sigma_prev.exp_m1();
        let ln_at = ln_a(t);
        let integrand = |s: f64| (ln_a(s.exp_m1()) - ln_at + (1.0 - 2.0 * p.mu) * s).exp();
        let piece = adaptive_simpson(integrand, sigma_prev, sigma, DEC_A_REL_TOL);
        j = j * (ln_a(t_prev) - ln_at).exp() + piece;
        let value = (p.mu * sigma).exp() * j;
        if value > best.0 {
            best = (value, t);
        }
        sigma_prev = sigma;
    }
    Ok(best)
}

/// `‖r‖_∞ + ‖s‖_∞` never exceeds its initial value by more than the slack
/// at any recorded sample.
pub fn check_lemma_esp(outcome: &RunOutcome) -> Result<bool> {
    if !outcome.status.is_healthy() {
        return Err(Error::Precondition(format!(
            "run ended in {}; the sup-norm bound applies to healthy runs",
            outcome.status
        )));
    }
    let Some(first) = outcome.series.first() else {
        return Ok(true);
    };
    let bound = first.sup_r + first.sup_s + ESP_SLACK;
    Ok(outcome.series.iter().all(|s| s.sup_r + s.sup_s <= bound))
}

/// Grid, data and solver settings shared by every point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSetup {
    pub grid: Grid,
    pub data: InitialData,
    pub horizon: f64,
    pub options: SolverOptions,
    pub policy: SnapshotPolicy,
    pub workers: usize,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))
}

/// Run every parameter set on the worker pool. Results come back in input
/// order.
pub fn run_all(params: &[Parameters], setup: &SweepSetup) -> Result<Vec<RunOutcome>> {
    pool(setup.workers)?.install(|| {
        params
            .par_iter()
            .map(|p| {
                run(
                    &setup.data,
                    &setup.grid,
                    p,
                    setup.horizon,
                    &setup.policy,
                    &setup.options,
                )
            })
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub status: Status,
    pub t_star: Option<f64>,
    /// First crossing of the smallest bracket factor, when blown up.
    pub t_bracket: Option<f64>,
}

/// Lifespans over `epsilons` with everything else taken from `base`.
pub fn lifespan_sweep(
    base: &Parameters,
    epsilons: &[f64],
    setup: &SweepSetup,
) -> Result<Vec<SweepRow>> {
    let params = epsilons
        .iter()
        .map(|&e| Parameters { epsilon: e, ..*base }.validated())
        .collect::<Result<Vec<_>>>()?;
    let outcomes = run_all(&params, setup)?;
    Ok(outcomes
        .iter()
        .zip(epsilons)
        .map(|(o, &epsilon)| SweepRow {
            epsilon,
            status: o.status,
            t_star: measure_lifespan(o).time(),
            t_bracket: lifespan_bracket(o).map(|b| b.0),
        })
        .collect())
}

/// The `(ε, T*)` pairs of rows that blew up.
pub fn lifespan_pairs(rows: &[SweepRow]) -> Vec<(f64, f64)> {
    rows.iter()
        .filter_map(|r| r.t_star.map(|t| (r.epsilon, t)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Global,
    BlowUp,
    /// On the boundary between the two regions, or in neither.
    Boundary,
}

impl Region {
    /// Points with `λ = 0` and `μ ≠ 1` belong to neither region; `(1, 2)`
    /// is where the critical line changes behaviour.
    pub fn of(mu: f64, lambda: f64) -> Region {
        if mu == 1.0 && lambda == 2.0 {
            Region::Boundary
        } else if in_global_region(mu, lambda) {
            Region::Global
        } else if in_blowup_region(mu, lambda) {
            Region::BlowUp
        } else {
            Region::Boundary
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapCell {
    pub mu: f64,
    pub lambda: f64,
    pub status: Status,
    pub expected: Region,
}

impl MapCell {
    /// `None` for boundary points, otherwise whether the run agrees with
    /// the expected region.
    pub fn agrees(&self) -> Option<bool> {
        match self.expected {
            Region::Boundary => None,
            Region::Global => Some(matches!(self.status, Status::GlobalToHorizon(_))),
            Region::BlowUp => Some(matches!(self.status, Status::BlowUp(_))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdMap {
    pub mu_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    pub epsilon: f64,
    pub horizon: f64,
    /// Row-major: all `λ` for the first `μ`, then the next `μ`.
    pub cells: Vec<MapCell>,
}

impl ThresholdMap {
    pub fn mismatches(&self) -> Vec<&MapCell> {
        self.cells
            .iter()
            .filter(|c| c.agrees() == Some(false))
            .collect()
    }
}

/// Classify a run at every `(μ, λ)` pair with `base`'s `γ` and floor.
pub fn threshold_map(
    mu_grid: &[f64],
    lambda_grid: &[f64],
    base: &Parameters,
    setup: &SweepSetup,
) -> Result<ThresholdMap> {
    let mut points = Vec::with_capacity(mu_grid.len() * lambda_grid.len());
    for &mu in mu_grid {
        for &lambda in lambda_grid {
            points.push(
                Parameters {
                    mu,
                    lambda,
                    ..*base
                }
                .validated()?,
            );
        }
    }
    let outcomes = run_all(&points, setup)?;
    let cells = points
        .iter()
        .zip(&outcomes)
        .map(|(p, o)| MapCell {
            mu: p.mu,
            lambda: p.lambda,
            status: o.status,
            expected: Region::of(p.mu, p.lambda),
        })
        .collect();
    Ok(ThresholdMap {
        mu_grid: mu_grid.to_vec(),
        lambda_grid: lambda_grid.to_vec(),
        epsilon: base.epsilon,
        horizon: setup.horizon,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws_fit_exactly() {
        let series: Vec<(f64, f64)> = (0..40)
            .map(|k| {
                let t = 10f64.powf(k as f64 / 10.0);
                (t, 3.0 * (1.0 + t).powf(-0.5))
            })
            .collect();
        let fit = fit_decay_exponent(&series, (1.0, 1e3)).unwrap();
        assert!((fit.exponent + 0.5).abs() < 1e-12);
        assert!((fit.constant - 3.0).abs() < 1e-10);
        assert!(fit.residual_rms < 1e-12);
    }

    #[test]
    fn decay_fit_rejects_short_windows() {
        let series: Vec<(f64, f64)> = (0..5).map(|k| (k as f64 * 100.0, 1.0)).collect();
        assert!(matches!(
            fit_decay_exponent(&series, (10.0, 1e3)),
            Err(Error::DegenerateFit(_))
        ));
        let dense: Vec<(f64, f64)> = (0..50).map(|k| (k as f64, 1.0)).collect();
        assert!(fit_decay_exponent(&dense, (10.0, 50.0)).is_err());
    }

    #[test]
    fn lifespan_classification() {
        use crate::outcome::RunOutcome;
        let mut o = RunOutcome {
            status: Status::BlowUp(12.5),
            series: vec![],
            params: Parameters::default(),
            grid: Grid::default(),
            data: InitialData::default(),
            horizon: 1e3,
            gradient_base: 0.01,
            blowup_factor: 1e4,
            crossings: vec![],
            steps: 0,
            history: None,
        };
        assert_eq!(measure_lifespan(&o).time(), Some(12.5));
        o.status = Status::GlobalToHorizon(1e3);
        assert_eq!(measure_lifespan(&o), Lifespan::Global);
        o.status = Status::Vacuum(3.2);
        assert_eq!(measure_lifespan(&o), Lifespan::Failed(Status::Vacuum(3.2)));
        assert_eq!(measure_lifespan(&o).time(), None);
    }

    #[test]
    fn synthetic_lifespans() {
        let pairs: Vec<(f64, f64)> = [0.1, 0.05, 0.02, 0.01].iter().map(|&e| (e, 2.0 / e)).collect();
        let fit = fit_lifespan_scaling(&pairs, LifespanLaw::Power).unwrap();
        assert!((fit.exponent + 1.0).abs() < 1e-12);
        let pairs: Vec<(f64, f64)> = [0.1, 0.05, 0.02, 0.01]
            .iter()
            .map(|&e: &f64| (e, 0.5 * (0.3 / e).exp()))
            .collect();
        let fit = fit_lifespan_scaling(&pairs, LifespanLaw::Exponential).unwrap();
        assert!((fit.exponent - 0.3).abs() < 1e-12);
        assert!(fit_lifespan_scaling(&pairs[..3], LifespanLaw::Power).is_err());
        let narrow: Vec<(f64, f64)> = [0.1, 0.08, 0.05, 0.02].iter().map(|&e| (e, 1.0 / e)).collect();
        assert!(fit_lifespan_scaling(&narrow, LifespanLaw::Power).is_err());
    }

    #[test]
    fn regions() {
        assert_eq!(Region::of(0.5, 1.0), Region::Global);
        assert_eq!(Region::of(1.0, 3.0), Region::Global);
        assert_eq!(Region::of(2.0, 1.0), Region::BlowUp);
        assert_eq!(Region::of(1.0, 1.0), Region::BlowUp);
        assert_eq!(Region::of(1.0, 0.0), Region::BlowUp);
        assert_eq!(Region::of(1.0, 2.0), Region::Boundary);
        assert_eq!(Region::of(0.5, 0.0), Region::Boundary);
        assert_eq!(Region::of(2.0, 0.0), Region::Boundary);
    }

    #[test]
    fn dec_a_preconditions_and_empty_interval() {
        let p = Parameters::new(1.4, 1.0, 1.0, 0.01).unwrap();
        assert!(matches!(check_lemma_dec_a(&p, 10.0, 50), Err(Error::Precondition(_))));
        let q = Parameters::new(1.4, 2.0, 0.0, 0.01).unwrap();
        assert_eq!(check_lemma_dec_a(&q, 0.0, 50).unwrap(), (0.0, 0.0));
    }
}
