//! Classified results of a solver run.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::grid::{Grid, InitialData, RiemannField};
use crate::thermo::Parameters;

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "t", rename_all = "snake_case")]
pub enum Status {
    GlobalToHorizon(f64),
    BlowUp(f64),
    Vacuum(f64),
    CflFailure(f64),
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::GlobalToHorizon(_) => "global_to_horizon",
            Status::BlowUp(_) => "blow_up",
            Status::Vacuum(_) => "vacuum",
            Status::CflFailure(_) => "cfl_failure",
        }
    }

    pub fn time(&self) -> f64 {
        match *self {
            Status::GlobalToHorizon(t)
            | Status::BlowUp(t)
            | Status::Vacuum(t)
            | Status::CflFailure(t) => t,
        }
    }

    pub fn is_healthy(&self) -> bool {
        matches!(self, Status::GlobalToHorizon(_) | Status::BlowUp(_))
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name(), self.time())
    }
}

/// Sup-norms at one recorded time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesSample {
    pub t: f64,
    pub sup_r: f64,
    pub sup_s: f64,
    pub sup_rx: f64,
    pub sup_sx: f64,
    /// `max |c r_x - (λ/(2(1+t)^μ))(r+s)|`, i.e. `‖r_t‖_∞` from the
    /// minus-family transport equation.
    pub sup_rt: f64,
    /// `max |-c s_x - (λ/(2(1+t)^μ))(r+s)|`.
    pub sup_st: f64,
}

impl SeriesSample {
    /// `‖(r_x, s_x)‖_∞`.
    pub fn gradient(&self) -> f64 {
        self.sup_rx.max(self.sup_sx)
    }

    /// `‖(r_t, s_t)‖_∞`.
    pub fn time_derivative(&self) -> f64 {
        self.sup_rt.max(self.sup_st)
    }
}

/// First time the gradient sup-norm exceeded `factor × base`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCrossing {
    pub factor: f64,
    pub t: f64,
}

/// Snapshots of the field at increasing times, for characteristic tracing.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    pub grid: Grid,
    pub params: Parameters,
    pub snapshots: Vec<RiemannField>,
}

impl History {
    pub fn t_start(&self) -> f64 {
        self.snapshots.first().map_or(0.0, |f| f.t)
    }

    pub fn t_end(&self) -> f64 {
        self.snapshots.last().map_or(0.0, |f| f.t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub status: Status,
    pub series: Vec<SeriesSample>,
    pub params: Parameters,
    pub grid: Grid,
    pub data: InitialData,
    pub horizon: f64,
    /// `max(initial gradient sup-norm, ε)`; blow-up thresholds are
    /// multiples of this.
    pub gradient_base: f64,
    pub blowup_factor: f64,
    pub crossings: Vec<ThresholdCrossing>,
    pub steps: usize,
    pub history: Option<History>,
}

impl RunOutcome {
    /// `(t, ‖(r_x, s_x)‖_∞)` pairs.
    pub fn gradient_series(&self) -> Vec<(f64, f64)> {
        self.series.iter().map(|s| (s.t, s.gradient())).collect()
    }

    /// `(t, ‖(r_t, s_t)‖_∞)` pairs.
    pub fn time_derivative_series(&self) -> Vec<(f64, f64)> {
        self.series.iter().map(|s| (s.t, s.time_derivative())).collect()
    }

    /// `(t, ‖r_t‖_∞)` pairs.
    pub fn rt_series(&self) -> Vec<(f64, f64)> {
        self.series.iter().map(|s| (s.t, s.sup_rt)).collect()
    }
}
