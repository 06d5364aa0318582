//! Characteristic curves through a recorded solution and the weighted
//! gradient Riccati equations along them.
//!
//! Along a minus curve `dx/dt = -c(u)` the weighted gradient
//! `y = A(t)√c r_x` obeys
//!
//! ```text
//! dy/dt = -A⁻¹ (γ+1)/4 u^{(γ-3)/4} y² - λ q / (2(1+t)^μ),    q = A(t)√c s_x,
//! ```
//!
//! and symmetrically for `q` along plus curves. The cross term is read
//! from the grid fields rather than co-integrated.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Boundary, RiemannField};
use crate::outcome::History;
use crate::quadrature::{adaptive_simpson, bisect};
use crate::thermo::{theta_gamma, InvariantMap, Parameters};

pub const DEFAULT_RICCATI_TOL: f64 = 1e-8;
pub const DEFAULT_BLOWUP_TIME_TOL: f64 = 1e-6;
pub const DEFAULT_SEED_STRIDE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    #[inline]
    pub fn direction(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "t", rename_all = "snake_case")]
pub enum Termination {
    ReachedHorizon,
    RiccatiBlowup(f64),
    LeftDomain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceNode {
    pub t: f64,
    pub x: f64,
    pub u: f64,
    /// `A√c r_x`: Riccati-integrated on minus curves, read from the grid
    /// on plus curves.
    pub y: f64,
    /// `A√c s_x`: Riccati-integrated on plus curves, read from the grid on
    /// minus curves.
    pub q: f64,
    /// Grid-interpolated `A√c r_x` and `A√c s_x`.
    pub y_grid: f64,
    pub q_grid: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharTrace {
    pub sign: Sign,
    pub nodes: Vec<TraceNode>,
    pub terminated: Termination,
}

impl CharTrace {
    pub fn first(&self) -> &TraceNode {
        &self.nodes[0]
    }

    pub fn last(&self) -> &TraceNode {
        self.nodes.last().expect("trace has a start node")
    }

    /// The Riccati-integrated quantity at each node.
    pub fn carried(&self) -> Vec<(f64, f64)> {
        self.nodes
            .iter()
            .map(|n| match self.sign {
                Sign::Minus => (n.t, n.y),
                Sign::Plus => (n.t, n.q),
            })
            .collect()
    }

    /// Piecewise-linear `u(t)` along the curve, held constant outside the
    /// traced interval.
    pub fn u_at(&self, t: f64) -> f64 {
        let n = &self.nodes;
        if t <= n[0].t {
            return n[0].u;
        }
        let j = n.partition_point(|node| node.t <= t);
        if j >= n.len() {
            return n[n.len() - 1].u;
        }
        let (a, b) = (&n[j - 1], &n[j]);
        a.u + (t - a.t) / (b.t - a.t) * (b.u - a.u)
    }
}

/// Field values at a space-time point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSample {
    pub r: f64,
    pub s: f64,
    pub rx: f64,
    pub sx: f64,
}

impl History {
    /// Bilinear interpolation in `(t, x)`. `Ok(None)` when `x` lies outside
    /// a non-periodic domain.
    pub fn sample(&self, t: f64, x: f64) -> Result<Option<PointSample>> {
        let snaps = &self.snapshots;
        if snaps.is_empty() {
            return Err(Error::Interpolation("history holds no snapshots".into()));
        }
        let (t0, t1) = (self.t_start(), self.t_end());
        // allow round-off at the ends
        let slack = 1e-12 * (1.0 + t1.abs());
        if !(t >= t0 - slack && t <= t1 + slack) {
            return Err(Error::Interpolation(format!(
                "t = {t} outside recorded interval [{t0}, {t1}]"
            )));
        }
        if self.grid.boundary == Boundary::Extrapolate
            && !(x >= self.grid.x_min && x <= self.grid.x_max)
        {
            return Ok(None);
        }
        let at = |f: &RiemannField| PointSample {
            r: self.grid.interpolate(&f.r, x),
            s: self.grid.interpolate(&f.s, x),
            rx: self.grid.interpolate(&f.rx, x),
            sx: self.grid.interpolate(&f.sx, x),
        };
        let k = snaps.partition_point(|f| f.t <= t);
        if k == 0 {
            return Ok(Some(at(&snaps[0])));
        }
        if k == snaps.len() {
            return Ok(Some(at(&snaps[k - 1])));
        }
        let (a, b) = (&snaps[k - 1], &snaps[k]);
        let w = (t - a.t) / (b.t - a.t);
        let (pa, pb) = (at(a), at(b));
        let mix = |u: f64, v: f64| u + w * (v - u);
        Ok(Some(PointSample {
            r: mix(pa.r, pb.r),
            s: mix(pa.s, pb.s),
            rx: mix(pa.rx, pb.rx),
            sx: mix(pa.sx, pb.sx),
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiOptions {
    /// Blow-up is declared once `|y|` exceeds `1 / tol`.
    pub tol: f64,
    /// Bisection tolerance for the blow-up time.
    pub time_tol: f64,
    /// Bound on `h · |∂(rate)/∂y|` per substep.
    pub max_growth: f64,
}

impl Default for RiccatiOptions {
    fn default() -> Self {
        RiccatiOptions {
            tol: DEFAULT_RICCATI_TOL,
            time_tol: DEFAULT_BLOWUP_TIME_TOL,
            max_growth: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RiccatiEnd {
    /// Value at the end of the interval.
    Finished(f64),
    BlowUp(f64),
}

/// Integrate the weighted-gradient Riccati equation from `(t0, y0)` to
/// `t1`. `background(t)` returns `(u, cross)` along the curve.
pub fn riccati_integrate<B>(
    y0: f64,
    t0: f64,
    t1: f64,
    background: B,
    p: &Parameters,
    opts: &RiccatiOptions,
) -> RiccatiEnd
where
    B: Fn(f64) -> (f64, f64),
{
    let limit = 1.0 / opts.tol;
    let rate = |t: f64, y: f64| {
        let (u, cross) = background(t);
        let quad = (-p.ln_damping_weight(t)).exp() * p.riccati_coefficient(u);
        (-quad * y * y - 0.5 * p.damping_rate(t) * cross, quad)
    };
    let rk4 = |t: f64, y: f64, h: f64| {
        let (k1, _) = rate(t, y);
        let (k2, _) = rate(t + 0.5 * h, y + 0.5 * h * k1);
        let (k3, _) = rate(t + 0.5 * h, y + 0.5 * h * k2);
        let (k4, _) = rate(t + h, y + h * k3);
        y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    };
    let span = t1 - t0;
    if !(span > 0.0) {
        return RiccatiEnd::Finished(y0);
    }
    let (mut t, mut y) = (t0, y0);
    while t < t1 {
        let (_, quad) = rate(t, y);
        let stiff = 2.0 * quad * y.abs();
        let mut h = (t1 - t).min(span / 4.0);
        if stiff > 0.0 {
            h = h.min(opts.max_growth / stiff);
        }
        let next = rk4(t, y, h);
        if !(next.abs() <= limit) {
            let over = |tau: f64| {
                let v = rk4(t, y, tau);
                if v.is_finite() {
                    v.abs() - limit
                } else {
                    1.0
                }
            };
            let tau = bisect(over, 0.0, h, opts.time_tol).unwrap_or(h);
            return RiccatiEnd::BlowUp(t + tau);
        }
        y = next;
        t = if t1 - (t + h) <= 0.0 { t1 } else { t + h };
    }
    RiccatiEnd::Finished(y)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    /// Time step as a fraction of `dx / c`.
    pub courant: f64,
    pub riccati: RiccatiOptions,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            courant: 0.5,
            riccati: RiccatiOptions::default(),
        }
    }
}

struct Local {
    u: f64,
    c: f64,
    y: f64,
    q: f64,
}

fn local_at(
    history: &History,
    map: &InvariantMap,
    p: &Parameters,
    t: f64,
    x: f64,
) -> Result<Option<Local>> {
    let Some(ps) = history.sample(t, x)? else {
        return Ok(None);
    };
    let l = map.local(ps.r, ps.s).ok_or_else(|| Error::Vacuum {
        t: Some(t),
        u: f64::INFINITY,
        floor: p.u_floor,
    })?;
    let w = p.ln_damping_weight(t).exp() * l.c.sqrt();
    Ok(Some(Local {
        u: l.u,
        c: l.c,
        y: w * ps.rx,
        q: w * ps.sx,
    }))
}

/// Follow the `sign` characteristic from `(t0, x0)` until `horizon`, a
/// Riccati blow-up or the domain edge.
pub fn trace(
    start: (f64, f64),
    sign: Sign,
    history: &History,
    p: &Parameters,
    horizon: f64,
) -> Result<CharTrace> {
    trace_with(start, sign, history, p, horizon, &TraceOptions::default())
}

pub fn trace_with(
    start: (f64, f64),
    sign: Sign,
    history: &History,
    p: &Parameters,
    horizon: f64,
    opts: &TraceOptions,
) -> Result<CharTrace> {
    p.validate()?;
    let (t0, x0) = start;
    if !(horizon >= t0) {
        return Err(Error::Precondition(format!(
            "horizon {horizon} precedes the start time {t0}"
        )));
    }
    if horizon > history.t_end() * (1.0 + 1e-12) + 1e-12 {
        return Err(Error::Interpolation(format!(
            "history ends at t = {} but the trace runs to {horizon}",
            history.t_end()
        )));
    }
    let map = InvariantMap::new(p);
    let dir = sign.direction();
    let Some(mut here) = local_at(history, &map, p, t0, x0)? else {
        return Err(Error::Precondition(format!(
            "start point x = {x0} lies outside the domain"
        )));
    };
    let node = |t: f64, x: f64, l: &Local, carried: f64| TraceNode {
        t,
        x,
        u: l.u,
        y: if sign == Sign::Minus { carried } else { l.y },
        q: if sign == Sign::Plus { carried } else { l.q },
        y_grid: l.y,
        q_grid: l.q,
    };
    let mut carried = if sign == Sign::Minus { here.y } else { here.q };
    let mut nodes = vec![node(t0, x0, &here, carried)];
    let (mut t, mut x) = (t0, x0);
    let dx = history.grid.dx();

    let terminated = loop {
        if t >= horizon {
            break Termination::ReachedHorizon;
        }
        let h = (opts.courant * dx / here.c).min(horizon - t);
        let k1 = dir * here.c;
        let Some(mid) = local_at(history, &map, p, t + h, x + h * k1)? else {
            break Termination::LeftDomain;
        };
        let t_next = if horizon - (t + h) <= 0.0 { horizon } else { t + h };
        let x_next = x + 0.5 * h * (k1 + dir * mid.c);
        let Some(next) = local_at(history, &map, p, t_next, x_next)? else {
            break Termination::LeftDomain;
        };
        let (cross0, cross1) = match sign {
            Sign::Minus => (here.q, next.q),
            Sign::Plus => (here.y, next.y),
        };
        let (u0, u1) = (here.u, next.u);
        let span = t_next - t;
        let background = |s: f64| {
            let w = (s - t) / span;
            (u0 + w * (u1 - u0), cross0 + w * (cross1 - cross0))
        };
        match riccati_integrate(carried, t, t_next, background, p, &opts.riccati) {
            RiccatiEnd::Finished(v) => carried = v,
            RiccatiEnd::BlowUp(tb) => break Termination::RiccatiBlowup(tb),
        }
        t = t_next;
        x = x_next;
        here = next;
        nodes.push(node(t, x, &here, carried));
    };
    Ok(CharTrace {
        sign,
        nodes,
        terminated,
    })
}

/// Closed-form blow-up time for `λ = 0`: the root of
/// `1/y₀ + ∫ (γ+1)/4 u^{(γ-3)/4} dτ` from `t0`, searched up to `t_max`.
pub fn lax_oracle_blowup_time<U>(
    y0: f64,
    u_along: U,
    t0: f64,
    t_max: f64,
    p: &Parameters,
) -> Result<Option<f64>>
where
    U: Fn(f64) -> f64,
{
    p.validate()?;
    if p.lambda != 0.0 {
        return Err(Error::Precondition(format!(
            "the closed-form blow-up time needs lambda = 0 (got {})",
            p.lambda
        )));
    }
    if !(y0 < 0.0) {
        return Ok(None);
    }
    let integrand = |t: f64| p.riccati_coefficient(u_along(t));
    let piece = |a: f64, b: f64| adaptive_simpson(integrand, a, b, 1e-12);
    let target = -1.0 / y0;
    // First bracket: the time the integral needs with the initial rate.
    let mut guess = target / integrand(t0).max(f64::MIN_POSITIVE);
    let (mut lo, mut acc_lo) = (t0, 0.0);
    let (hi, acc_hi) = loop {
        let hi = (t0 + guess).min(t_max);
        let acc = acc_lo + piece(lo, hi);
        if acc >= target {
            break (hi, acc);
        }
        if hi >= t_max {
            return Ok(None);
        }
        lo = hi;
        acc_lo = acc;
        guess *= 2.0;
    };
    if acc_hi == target {
        return Ok(Some(hi));
    }
    let root = bisect(|t| acc_lo + piece(lo, t) - target, lo, hi, 1e-12 * (1.0 + hi));
    Ok(root)
}

/// Earliest closed-form blow-up time over curves of both families seeded
/// at every `stride`-th cell at the start of `history`. Each curve's `u`
/// is held at its last traced value beyond the recorded interval, and the
/// search stops at twice the recorded span.
pub fn oracle_over_seeds(
    history: &History,
    p: &Parameters,
    stride: usize,
) -> Result<Option<f64>> {
    let (t0, t1) = (history.t_start(), history.t_end());
    let t_max = t1 + (t1 - t0);
    let mut best: Option<f64> = None;
    for trace in seed_traces(history, p, stride, t1)? {
        let first = trace.first();
        let y0 = match trace.sign {
            Sign::Minus => first.y,
            Sign::Plus => first.q,
        };
        if let Some(t) = lax_oracle_blowup_time(y0, |t| trace.u_at(t), t0, t_max, p)? {
            best = Some(best.map_or(t, |b: f64| b.min(t)));
        }
    }
    Ok(best)
}

/// Curves of both families from every `stride`-th cell centre at the
/// first snapshot, traced to `horizon`.
pub fn seed_traces(
    history: &History,
    p: &Parameters,
    stride: usize,
    horizon: f64,
) -> Result<Vec<CharTrace>> {
    let t0 = history.t_start();
    let stride = stride.max(1);
    let mut out = Vec::new();
    for i in (0..history.grid.n_cells).step_by(stride) {
        let x = history.grid.center(i);
        for sign in [Sign::Minus, Sign::Plus] {
            out.push(trace((t0, x), sign, history, p, horizon)?);
        }
    }
    Ok(out)
}

/// Residuals of the two integral identities behind the weighted gradient
/// bound along a minus curve, each the largest discrepancy over all
/// partial intervals `[t₀, t_k]` of the trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaResidual {
    /// `∫ q/(1+τ)^μ dτ` against its integrated-by-parts form in `θ_γ(u)`.
    pub by_parts: f64,
    /// `∫ √c s_x dτ` against `θ_γ(u(t)) - θ_γ(u(t₀))`.
    pub driver: f64,
}

impl ThetaResidual {
    pub fn max(&self) -> f64 {
        self.by_parts.max(self.driver)
    }
}

/// Evaluate both sides of
///
/// ```text
/// ∫₀ᵗ q/(1+τ)^μ dτ = ∫₀ᵗ A/(1+τ)^μ (μ/(1+τ) - λ/(2(1+τ)^μ)) θ_γ dτ
///                    + A(t) θ_γ(t)/(1+t)^μ - θ_γ(0)
/// ```
///
/// and of `∫ √c s_x dτ = θ_γ(t) - θ_γ(0)` with the trapezoidal rule over
/// the trace nodes, using the grid-interpolated `q`. A trace starting at
/// `t₀ > 0` uses `A(t₀)/(1+t₀)^μ` in the lower boundary term.
pub fn verify_theta_identity(trace: &CharTrace, p: &Parameters) -> Result<ThetaResidual> {
    if trace.sign != Sign::Minus {
        return Err(Error::Precondition(
            "the theta identity is stated along minus curves".into(),
        ));
    }
    let weight = |t: f64| p.ln_damping_weight(t).exp();
    let decay = |t: f64| (1.0 + t).powf(-p.mu);
    let mut res = ThetaResidual {
        by_parts: 0.0,
        driver: 0.0,
    };
    let (mut lhs, mut rhs, mut drive) = (0.0, 0.0, 0.0);
    let mut prev: Option<(f64, f64, f64, f64)> = None;
    let first = &trace.nodes[0];
    let theta0 = theta_gamma(first.u, p)?;
    let lower = weight(first.t) * theta0 * decay(first.t);
    for n in &trace.nodes {
        let t = n.t;
        let theta = theta_gamma(n.u, p)?;
        let a = weight(t);
        let f_l = n.q_grid * decay(t);
        let f_r = a * decay(t) * (p.mu / (1.0 + t) - 0.5 * p.damping_rate(t)) * theta;
        let f_d = n.q_grid / a;
        if let Some((tp, gl, gr, gd)) = prev {
            let h = 0.5 * (t - tp);
            lhs += h * (gl + f_l);
            rhs += h * (gr + f_r);
            drive += h * (gd + f_d);
        }
        prev = Some((t, f_l, f_r, f_d));
        let boundary = a * theta * decay(t) - lower;
        res.by_parts = res.by_parts.max((lhs - rhs - boundary).abs());
        res.driver = res.driver.max((drive - (theta - theta0)).abs());
    }
    Ok(res)
}
