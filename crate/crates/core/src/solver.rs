//! Diagonalized solver for `(r, s, r_x, s_x)`.
//!
//! The invariants are transported in advective form on the grid, `r` with
//! speed `-c` and `s` with speed `+c`, using upwind face values from a
//! limited linear reconstruction and Heun time stepping. The gradients are
//! unknowns of their own, carried by markers that move along the two
//! characteristic families and integrate
//!
//! ```text
//! ∂₋ r_x = (c'/2c) r_x (r_x - s_x) - (λ/(2(1+t)^μ)) (r_x + s_x)
//! ∂₊ s_x = (c'/2c) s_x (s_x - r_x) - (λ/(2(1+t)^μ)) (r_x + s_x)
//! ```
//!
//! with `c` and the cross gradient interpolated at the marker. The cell
//! arrays `r_x`, `s_x` are the markers deposited onto the centres.
//! Blow-up is flagged when a marker value passes the threshold or two
//! markers of one family cross.
//!
//! The linear damping only contracts `r + s` and leaves `s - r`, hence `u`
//! and `c`, untouched. It is applied in two half steps around the Heun
//! step, each using the exponential of the coefficient at its midpoint.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{init, sup, Grid, InitialData, RiemannField};
use crate::markers::MarkerFamily;
use crate::outcome::{History, RunOutcome, SeriesSample, Status, ThresholdCrossing};
use crate::thermo::{InvariantMap, Parameters};

pub const DEFAULT_BLOWUP_FACTOR: f64 = 1e4;
pub const DEFAULT_BRACKET_FACTOR: f64 = 1e3;
pub const DEFAULT_DT_MIN: f64 = 1e-12;
pub const MAX_CFL: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Limiter {
    Minmod,
    VanLeer,
    MonotonizedCentral,
    /// Centred slope without limiting (Fromm's scheme).
    Unlimited,
}

impl Limiter {
    /// Undivided slope from the backward and forward differences.
    #[inline]
    pub fn slope(self, back: f64, fwd: f64) -> f64 {
        match self {
            Limiter::Minmod => {
                if back * fwd <= 0.0 {
                    0.0
                } else if back.abs() < fwd.abs() {
                    back
                } else {
                    fwd
                }
            }
            Limiter::VanLeer => {
                let prod = back * fwd;
                if prod <= 0.0 {
                    0.0
                } else {
                    2.0 * prod / (back + fwd)
                }
            }
            Limiter::MonotonizedCentral => {
                if back * fwd <= 0.0 {
                    0.0
                } else {
                    let m = (2.0 * back.abs()).min(2.0 * fwd.abs()).min(0.5 * (back + fwd).abs());
                    m.copysign(back)
                }
            }
            Limiter::Unlimited => 0.5 * (back + fwd),
        }
    }
}

impl std::str::FromStr for Limiter {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "minmod" => Ok(Limiter::Minmod),
            "van_leer" => Ok(Limiter::VanLeer),
            "mc" | "monotonized_central" => Ok(Limiter::MonotonizedCentral),
            "unlimited" => Ok(Limiter::Unlimited),
            _ => Err(format!("unknown limiter '{s}' (expected minmod|van_leer|mc|unlimited)")),
        }
    }
}

impl std::fmt::Display for Limiter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Limiter::Minmod => "minmod",
            Limiter::VanLeer => "van_leer",
            Limiter::MonotonizedCentral => "mc",
            Limiter::Unlimited => "unlimited",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub cfl: f64,
    /// Blow-up fires once `max(|r_x|, |s_x|)` exceeds this multiple of
    /// `max(initial gradient sup-norm, ε)`.
    pub blowup_factor: f64,
    /// Smaller multiples whose first crossing times are also reported.
    pub bracket_factors: Vec<f64>,
    pub dt_min: f64,
    pub limiter: Limiter,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            cfl: 0.5,
            blowup_factor: DEFAULT_BLOWUP_FACTOR,
            bracket_factors: vec![DEFAULT_BRACKET_FACTOR],
            dt_min: DEFAULT_DT_MIN,
            limiter: Limiter::Minmod,
        }
    }
}

impl SolverOptions {
    pub fn with_cfl(cfl: f64) -> Self {
        SolverOptions {
            cfl,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= MAX_CFL) {
            return Err(Error::InvalidParameter(format!(
                "cfl must lie in (0, {MAX_CFL}] (got {})",
                self.cfl
            )));
        }
        if !(self.blowup_factor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "blowup_factor must be positive (got {})",
                self.blowup_factor
            )));
        }
        if !(self.dt_min > 0.0) {
            return Err(Error::InvalidParameter("dt_min must be positive".into()));
        }
        Ok(())
    }
}

/// When to sample sup-norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesCadence {
    EveryStep,
    /// Targets equally spaced in `log(1+t)`.
    LogSpaced { per_decade: usize },
    Uniform { interval: f64 },
}

impl SeriesCadence {
    fn target(&self, k: usize) -> f64 {
        match *self {
            SeriesCadence::EveryStep => 0.0,
            SeriesCadence::LogSpaced { per_decade } => {
                10f64.powf(k as f64 / per_decade.max(1) as f64) - 1.0
            }
            SeriesCadence::Uniform { interval } => k as f64 * interval,
        }
    }
}

/// What a run records besides its classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotPolicy {
    pub series: SeriesCadence,
    /// Keep a full field snapshot every this many steps.
    pub history_every: Option<usize>,
}

impl Default for SnapshotPolicy {
    fn default() -> Self {
        SnapshotPolicy {
            series: SeriesCadence::LogSpaced { per_decade: 40 },
            history_every: None,
        }
    }
}

impl SnapshotPolicy {
    pub fn with_history(every: usize) -> Self {
        SnapshotPolicy {
            history_every: Some(every.max(1)),
            ..Default::default()
        }
    }
}

/// Reusable stepper with scratch buffers for one grid.
///
/// The gradient markers belong to the field being advanced; call
/// [`Solver::attach`] before stepping a different field.
#[derive(Debug, Clone)]
pub struct Solver {
    grid: Grid,
    params: Parameters,
    options: SolverOptions,
    map: InvariantMap,
    /// Gradient sup-norm above which a step reports blow-up.
    pub threshold: f64,
    u: Vec<f64>,
    c: Vec<f64>,
    stage: RiemannField,
    rates: [Vec<f64>; 2],
    pad: Vec<f64>,
    slope: Vec<f64>,
    markers: Option<[MarkerFamily; 2]>,
    backup: (RiemannField, Option<[MarkerFamily; 2]>),
}

impl Solver {
    pub fn new(grid: Grid, params: Parameters, options: SolverOptions) -> Result<Self> {
        grid.validate()?;
        params.validate()?;
        options.validate()?;
        let n = grid.n_cells;
        Ok(Solver {
            grid,
            params,
            map: InvariantMap::new(&params),
            options,
            threshold: f64::INFINITY,
            u: vec![0.0; n],
            c: vec![0.0; n],
            stage: RiemannField::zeros(n),
            rates: [vec![0.0; n], vec![0.0; n]],
            pad: vec![0.0; n + 4],
            slope: vec![0.0; n + 4],
            markers: None,
            backup: (RiemannField::zeros(n), None),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &Parameters {
        &self.params
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    /// Seed the gradient markers from the cell values of `f`.
    pub fn attach(&mut self, f: &RiemannField) {
        self.markers = Some([
            MarkerFamily::seed(&self.grid, &f.rx, -1.0),
            MarkerFamily::seed(&self.grid, &f.sx, 1.0),
        ]);
    }

    /// Largest gradient carried by a marker.
    pub fn marker_gradient(&self) -> f64 {
        self.markers
            .as_ref()
            .map_or(0.0, |[m, p]| m.max_abs().max(p.max_abs()))
    }

    /// Fill `u`, `c` from `f`; returns `max c` or the offending cell.
    fn local_states(&mut self, f: &RiemannField) -> std::result::Result<f64, usize> {
        let mut c_max = 0.0f64;
        for i in 0..f.r.len() {
            match self.map.local(f.r[i], f.s[i]) {
                Some(l) => {
                    self.u[i] = l.u;
                    self.c[i] = l.c;
                    c_max = c_max.max(l.c);
                }
                None => return Err(i),
            }
        }
        Ok(c_max)
    }

    fn vacuum(&self, r: f64, s: f64, t: f64) -> Error {
        let e = 0.5 * (s - r) + self.params.eta_offset();
        let u = crate::thermo::eta_inv(e, &self.params).unwrap_or(f64::INFINITY);
        Error::Vacuum {
            t: Some(t),
            u,
            floor: self.params.u_floor,
        }
    }

    /// Transport rates of `r` and `s` at `f`, assuming `c` already holds
    /// the local sound speeds of `f`.
    fn rates_at(&mut self, f: &RiemannField) {
        let limiter = self.options.limiter;
        for (k, (q, leftward)) in [(&f.r, true), (&f.s, false)].into_iter().enumerate() {
            upwind_derivative(
                q,
                &self.grid,
                limiter,
                leftward,
                &mut self.pad,
                &mut self.slope,
                &mut self.rates[k],
            );
        }
        let [rr, rs] = &mut self.rates;
        for (i, &c) in self.c.iter().enumerate() {
            rr[i] *= c;
            rs[i] *= -c;
        }
    }

    /// Contract `r + s` by `exp(-∫ damping)` over `[a, b]`, with the
    /// coefficient taken at the midpoint.
    fn damp(&self, f: &mut RiemannField, a: f64, b: f64) {
        if self.params.lambda == 0.0 || b <= a {
            return;
        }
        let rate = self.params.damping_rate(0.5 * (a + b));
        let keep = (-rate * (b - a)).exp();
        let lose = 0.5 * (1.0 - keep);
        for i in 0..f.r.len() {
            let w = lose * (f.r[i] + f.s[i]);
            f.r[i] -= w;
            f.s[i] -= w;
        }
    }

    /// Stable time step for `f`.
    pub fn stable_dt(&mut self, f: &RiemannField) -> Result<f64> {
        let c_max = self
            .local_states(f)
            .map_err(|i| self.vacuum(f.r[i], f.s[i], f.t))?;
        Ok(self.options.cfl * self.grid.dx() / c_max)
    }

    /// Advance `f` by one step, not past `t_stop`. Returns the step taken.
    ///
    /// On a blow-up error `f` holds the state that crossed the threshold;
    /// on vacuum and CFL errors `f` is left at the last healthy state.
    pub fn step(&mut self, f: &mut RiemannField, t_stop: f64) -> Result<f64> {
        let c_max = self
            .local_states(f)
            .map_err(|i| self.vacuum(f.r[i], f.s[i], f.t))?;
        let dt_cfl = self.options.cfl * self.grid.dx() / c_max;
        if !(dt_cfl >= self.options.dt_min) {
            return Err(Error::CflFailure {
                t: f.t,
                dt: dt_cfl,
                dt_min: self.options.dt_min,
            });
        }
        let t0 = f.t;
        let dt = dt_cfl.min(t_stop - t0);
        if !(dt > 0.0) {
            return Ok(0.0);
        }
        if self.markers.is_none() {
            self.attach(f);
        }
        self.backup.0.clone_from(f);
        self.backup.1.clone_from(&self.markers);
        match self.advance(f, t0, dt, t_stop) {
            Err(e @ Error::Vacuum { .. }) => {
                f.clone_from(&self.backup.0);
                self.markers.clone_from(&self.backup.1);
                Err(e)
            }
            other => other,
        }
    }

    fn advance(&mut self, f: &mut RiemannField, t0: f64, dt: f64, t_stop: f64) -> Result<f64> {
        let n = f.r.len();
        let mut markers = self.markers.take().expect("markers attached");
        let coef = -(self.params.gamma + 1.0) / 4.0;

        self.damp(f, t0, t0 + 0.5 * dt);

        // Heun stage 1: u, c still describe f since damping keeps s - r.
        self.rates_at(f);
        let g0 = self.params.damping_rate(t0);
        for (fam, other) in markers.iter_mut().zip([&f.sx, &f.rx]) {
            marker_rates(fam, &self.grid, coef, &self.u, &self.c, other, g0);
            fam.pos0.clone_from(&fam.pos);
            fam.val0.clone_from(&fam.val);
            for j in 0..fam.len() {
                fam.pos[j] += dt * fam.dpos[j];
                fam.val[j] += dt * fam.dval[j];
            }
        }
        let mut stage = std::mem::replace(&mut self.stage, RiemannField::zeros(0));
        for i in 0..n {
            stage.r[i] = f.r[i] + dt * self.rates[0][i];
            stage.s[i] = f.s[i] + dt * self.rates[1][i];
        }
        stage.t = t0 + dt;
        let [minus, plus] = &markers;
        minus.deposit(&self.grid, &mut stage.rx);
        plus.deposit(&self.grid, &mut stage.sx);
        let checked = self
            .local_states(&stage)
            .map_err(|i| self.vacuum(stage.r[i], stage.s[i], t0 + dt));
        if let Err(e) = checked {
            self.stage = stage;
            return Err(e);
        }

        // Heun stage 2.
        self.rates_at(&stage);
        let g1 = self.params.damping_rate(t0 + dt);
        for (fam, other) in markers.iter_mut().zip([&stage.sx, &stage.rx]) {
            marker_rates(fam, &self.grid, coef, &self.u, &self.c, other, g1);
            for j in 0..fam.len() {
                fam.pos[j] = 0.5 * (fam.pos0[j] + fam.pos[j] + dt * fam.dpos[j]);
                fam.val[j] = 0.5 * (fam.val0[j] + fam.val[j] + dt * fam.dval[j]);
            }
        }
        for i in 0..n {
            f.r[i] = 0.5 * (f.r[i] + stage.r[i] + dt * self.rates[0][i]);
            f.s[i] = 0.5 * (f.s[i] + stage.s[i] + dt * self.rates[1][i]);
        }
        self.stage = stage;

        self.damp(f, t0 + 0.5 * dt, t0 + dt);
        f.t = if t_stop - (t0 + dt) <= 0.0 { t_stop } else { t0 + dt };

        if let Err(i) = self.local_states(f) {
            return Err(self.vacuum(f.r[i], f.s[i], f.t));
        }
        let crossed = markers.iter().any(|m| !m.ordered(&self.grid));
        if !crossed {
            markers.iter_mut().for_each(|m| m.maintain(&self.grid));
        }
        markers[0].deposit(&self.grid, &mut f.rx);
        markers[1].deposit(&self.grid, &mut f.sx);
        self.markers = Some(markers);
        let g = if crossed {
            f64::INFINITY
        } else {
            self.marker_gradient()
        };
        if !(g <= self.threshold) {
            return Err(Error::BlowUp {
                t: f.t,
                max_gradient: g,
            });
        }
        Ok(dt)
    }

    /// Sup-norms of `f`, including the time-derivative proxies.
    pub fn sample(&mut self, f: &RiemannField) -> SeriesSample {
        let damping = 0.5 * self.params.damping_rate(f.t);
        let mut rt = 0.0f64;
        let mut st = 0.0f64;
        for i in 0..f.r.len() {
            let c = self
                .map
                .local(f.r[i], f.s[i])
                .map_or(f64::NAN, |l| l.c);
            let src = damping * (f.r[i] + f.s[i]);
            rt = rt.max((c * f.rx[i] - src).abs());
            st = st.max((-c * f.sx[i] - src).abs());
        }
        let [sup_r, sup_s, sup_rx, sup_sx] = f.sup_norms();
        SeriesSample {
            t: f.t,
            sup_r,
            sup_s,
            sup_rx,
            sup_sx,
            sup_rt: rt,
            sup_st: st,
        }
    }
}

/// Velocities and gradient rates of one marker family. `u` and `c` are
/// the local states of the cells and `other` holds the cell values of the
/// opposite family's gradient.
#[allow(clippy::too_many_arguments)]
fn marker_rates(
    fam: &mut MarkerFamily,
    grid: &Grid,
    coef: f64,
    u: &[f64],
    c: &[f64],
    other: &[f64],
    damping: f64,
) {
    let m = fam.len();
    fam.dpos.resize(m, 0.0);
    fam.dval.resize(m, 0.0);
    let half = 0.5 * damping;
    let lerp = |a: &[f64], (i0, i1, w): (usize, usize, f64)| a[i0] + w * (a[i1] - a[i0]);
    for j in 0..m {
        let at = grid.locate(fam.pos[j]);
        let q = lerp(other, at);
        let v = fam.val[j];
        fam.dpos[j] = fam.dir * lerp(c, at);
        // c'/(2c) = -(γ+1)/(4u)
        fam.dval[j] = coef / lerp(u, at) * v * (v - q) - half * (v + q);
    }
}

/// Upwind derivative of `q` from limited face values. `leftward` selects
/// the minus family (speed `-c`, information from the right).
fn upwind_derivative(
    q: &[f64],
    grid: &Grid,
    limiter: Limiter,
    leftward: bool,
    pad: &mut [f64],
    slope: &mut [f64],
    out: &mut [f64],
) {
    let n = q.len();
    let inv_dx = 1.0 / grid.dx();
    pad[2..n + 2].copy_from_slice(q);
    for (k, off) in [(0usize, -2isize), (1, -1)] {
        pad[k] = q[grid.neighbor(0, off)];
    }
    pad[n + 2] = q[grid.neighbor(n - 1, 1)];
    pad[n + 3] = q[grid.neighbor(n - 1, 2)];
    for k in 1..n + 3 {
        slope[k] = limiter.slope(pad[k] - pad[k - 1], pad[k + 1] - pad[k]);
    }
    if leftward {
        for i in 0..n {
            let k = i + 2;
            let right_face = pad[k + 1] - 0.5 * slope[k + 1];
            let left_face = pad[k] - 0.5 * slope[k];
            out[i] = (right_face - left_face) * inv_dx;
        }
    } else {
        for i in 0..n {
            let k = i + 2;
            let right_face = pad[k] + 0.5 * slope[k];
            let left_face = pad[k - 1] + 0.5 * slope[k - 1];
            out[i] = (right_face - left_face) * inv_dx;
        }
    }
}

/// One step with default options and no blow-up threshold.
pub fn step(f: &RiemannField, grid: &Grid, p: &Parameters, cfl: f64) -> Result<RiemannField> {
    if f.len() != grid.n_cells {
        return Err(Error::InvalidParameter(format!(
            "field has {} cells, grid has {}",
            f.len(),
            grid.n_cells
        )));
    }
    let mut solver = Solver::new(*grid, *p, SolverOptions::with_cfl(cfl))?;
    let mut next = f.clone();
    solver.step(&mut next, f64::INFINITY)?;
    Ok(next)
}

/// Evolve `data` up to `horizon` or the first blow-up, vacuum or CFL
/// signal. Failures during time stepping become the outcome's status;
/// only invalid setups return `Err`.
pub fn run(
    data: &InitialData,
    grid: &Grid,
    p: &Parameters,
    horizon: f64,
    policy: &SnapshotPolicy,
    options: &SolverOptions,
) -> Result<RunOutcome> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Precondition(format!("horizon must be positive (got {horizon})")));
    }
    let mut solver = Solver::new(*grid, *p, options.clone())?;
    let mut outcome = RunOutcome {
        status: Status::GlobalToHorizon(horizon),
        series: Vec::new(),
        params: *p,
        grid: *grid,
        data: *data,
        horizon,
        gradient_base: 0.0,
        blowup_factor: options.blowup_factor,
        crossings: Vec::new(),
        steps: 0,
        history: None,
    };
    let mut f = match init(data, grid, p) {
        Ok(f) => f,
        Err(Error::Vacuum { .. }) => {
            outcome.status = Status::Vacuum(0.0);
            return Ok(outcome);
        }
        Err(e) => return Err(e),
    };

    let g0 = sup(&f.rx).max(sup(&f.sx));
    let base = g0.max(p.epsilon);
    outcome.gradient_base = base;
    solver.threshold = options.blowup_factor * base;
    solver.attach(&f);
    let mut brackets: Vec<f64> = options
        .bracket_factors
        .iter()
        .copied()
        .filter(|&b| b < options.blowup_factor)
        .collect();
    brackets.sort_by(f64::total_cmp);
    let mut next_bracket = 0;

    let mut history = policy.history_every.map(|_| vec![f.clone()]);
    outcome.series.push(solver.sample(&f));
    let mut target_index = 1;
    let mut steps = 0usize;

    let status = loop {
        if f.t >= horizon {
            break Status::GlobalToHorizon(horizon);
        }
        let res = solver.step(&mut f, horizon);
        steps += 1;
        let status = match res {
            Ok(_) => None,
            Err(Error::BlowUp { t, .. }) => Some(Status::BlowUp(t)),
            Err(Error::Vacuum { .. }) => Some(Status::Vacuum(f.t)),
            Err(Error::CflFailure { t, .. }) => Some(Status::CflFailure(t)),
            Err(e) => return Err(e),
        };
        if status.is_none() || matches!(status, Some(Status::BlowUp(_))) {
            let g = solver.marker_gradient();
            while next_bracket < brackets.len() && g > brackets[next_bracket] * base {
                outcome.crossings.push(ThresholdCrossing {
                    factor: brackets[next_bracket],
                    t: f.t,
                });
                next_bracket += 1;
            }
            if let (Some(h), Some(every)) = (history.as_mut(), policy.history_every) {
                if steps % every == 0 || status.is_some() || f.t >= horizon {
                    h.push(f.clone());
                }
            }
        }
        if let Some(s) = status {
            break s;
        }
        let record = match policy.series {
            SeriesCadence::EveryStep => true,
            cadence => {
                let mut hit = false;
                while f.t >= cadence.target(target_index) {
                    hit = true;
                    target_index += 1;
                }
                hit
            }
        };
        if record && f.t < horizon {
            outcome.series.push(solver.sample(&f));
        }
    };
    if outcome.series.last().map(|s| s.t) != Some(f.t) {
        outcome.series.push(solver.sample(&f));
    }
    if let Status::BlowUp(t) = status {
        outcome.crossings.push(ThresholdCrossing {
            factor: options.blowup_factor,
            t,
        });
    }
    outcome.status = status;
    outcome.steps = steps;
    outcome.history = history.map(|snapshots| History {
        grid: *grid,
        params: *p,
        snapshots,
    });
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
        use std::f64::consts::PI;

    fn constant_field(n: usize, v0: f64) -> RiemannField {
        let mut f = RiemannField::zeros(n);
        f.r.iter_mut().for_each(|r| *r = v0);
        f.s.iter_mut().for_each(|s| *s = v0);
        f
    }

    #[test]
    fn zero_state_is_a_fixed_point() {
        let p = Parameters::new(1.4, 1.0, 0.5, 0.0).unwrap();
        let grid = Grid::periodic(0.0, 2.0 * PI, 64).unwrap();
        let mut f = RiemannField::zeros(64);
        let mut solver = Solver::new(grid, p, SolverOptions::default()).unwrap();
        for _ in 0..50 {
            solver.step(&mut f, f64::INFINITY).unwrap();
        }
        assert_eq!(f.sup_norms(), [0.0; 4]);
        assert!(f.t > 0.0);
    }

    #[test]
    fn constant_velocity_decays_with_damping_weight() {
        // v' = -λ(1+t)^{-μ} v  ⇒  v(3) = v₀ e^{-2(√4 - 1)} = v₀ e^{-2}
        let p = Parameters::new(1.4, 1.0, 0.5, 0.01).unwrap();
        let grid = Grid::periodic(0.0, 2.0 * PI, 512).unwrap();
        let v0 = 0.01;
        let mut f = constant_field(512, v0);
        let mut solver = Solver::new(grid, p, SolverOptions::default()).unwrap();
        while f.t < 3.0 {
            solver.step(&mut f, 3.0).unwrap();
        }
        let exact = v0 * (-2.0f64).exp();
        let v = 0.5 * (f.r[100] + f.s[100]);
        assert!(((v - exact) / exact).abs() <= 1e-5, "{v} vs {exact}");
    }

    #[test]
    fn step_hits_stop_time_exactly() {
        let p = Parameters::new(1.4, 1.0, 0.5, 0.01).unwrap();
        let grid = Grid::periodic(0.0, 1.0, 32).unwrap();
        let mut f = init(&InitialData::sine(2.0 * PI), &grid, &p).unwrap();
        let mut solver = Solver::new(grid, p, SolverOptions::default()).unwrap();
        while f.t < 0.1 {
            solver.step(&mut f, 0.1).unwrap();
        }
        assert_eq!(f.t, 0.1);
    }

    #[test]
    fn simple_wave_plus_invariant_stays_zero() {
        let p = Parameters::new(3.0, 0.0, 0.0, 0.05).unwrap();
        let grid = Grid::periodic(0.0, 2.0 * PI, 128).unwrap();
        let mut f = init(&InitialData::simple_wave(1.0), &grid, &p).unwrap();
        let mut solver = Solver::new(grid, p, SolverOptions::default()).unwrap();
        for _ in 0..200 {
            solver.step(&mut f, f64::INFINITY).unwrap();
        }
        assert!(sup(&f.s) <= 1e-10 && sup(&f.sx) <= 1e-10);
    }

    #[test]
    fn invalid_cfl_rejected() {
        let grid = Grid::default();
        let p = Parameters::default();
        assert!(Solver::new(grid, p, SolverOptions::with_cfl(0.95)).is_err());
        assert!(Solver::new(grid, p, SolverOptions::with_cfl(0.0)).is_err());
    }

    #[test]
    fn vacuum_is_classified_not_raised() {
        let p = Parameters::new(1.4, 1.0, 0.5, 0.5)
            .unwrap()
            .with_u_floor(0.6)
            .unwrap();
        let grid = Grid::periodic(0.0, 2.0 * PI, 64).unwrap();
        let out = run(
            &InitialData::sine(1.0),
            &grid,
            &p,
            1.0,
            &SnapshotPolicy::default(),
            &SolverOptions::default(),
        )
        .unwrap();
        assert_eq!(out.status, Status::Vacuum(0.0));
    }

    #[test]
    fn minmod_slope_properties() {
        assert_eq!(Limiter::Minmod.slope(1.0, -1.0), 0.0);
        assert_eq!(Limiter::Minmod.slope(1.0, 3.0), 1.0);
        assert_eq!(Limiter::Minmod.slope(-2.0, -0.5), -0.5);
        assert_eq!(Limiter::VanLeer.slope(1.0, 1.0), 1.0);
        assert_eq!(Limiter::MonotonizedCentral.slope(1.0, 3.0), 2.0);
        assert_eq!(Limiter::Unlimited.slope(1.0, -1.0), 0.0);
    }
}
