//! Conservative finite-volume reference solver for `(u, v)`.
//!
//! Rusanov fluxes for `(-v, p(u))` on minmod-reconstructed face states,
//! Heun time stepping, and the damping source integrated exactly: over
//! `[t₀, t₁]` it multiplies `v` by `(A(t₀)/A(t₁))²`. The source is split
//! in halves around the transport step.

use crate::error::{Error, Result};
use crate::grid::{init, Grid, InitialData, RiemannField};
use crate::outcome::Status;
use crate::solver::Limiter;
use crate::thermo::{from_riemann, Parameters, RiemannPair};

#[derive(Debug, Clone, PartialEq)]
pub struct ConservativeField {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl ConservativeField {
    /// Gas state of every cell of an invariant field.
    pub fn from_invariants(f: &RiemannField, p: &Parameters) -> Result<Self> {
        let mut u = Vec::with_capacity(f.len());
        let mut v = Vec::with_capacity(f.len());
        for (&r, &s) in f.r.iter().zip(&f.s) {
            let g = from_riemann(RiemannPair { r, s }, p)?;
            u.push(g.u);
            v.push(g.v);
        }
        Ok(ConservativeField { t: f.t, u, v })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.u.iter().sum()
    }

    pub fn momentum(&self) -> f64 {
        self.v.iter().sum()
    }

    /// `max(sup |u - other.u|, sup |v - other.v|)`.
    pub fn distance(&self, other: &ConservativeField) -> f64 {
        let d = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        };
        d(&self.u, &other.u).max(d(&self.v, &other.v))
    }
}

/// Cell values from the same point samples the grid solver starts from.
pub fn fv_init(data: &InitialData, grid: &Grid, p: &Parameters) -> Result<ConservativeField> {
    ConservativeField::from_invariants(&init(data, grid, p)?, p)
}

#[derive(Debug, Clone)]
pub struct FvSolver {
    grid: Grid,
    params: Parameters,
    cfl: f64,
    pub dt_min: f64,
    stage: ConservativeField,
    du: Vec<f64>,
    dv: Vec<f64>,
    flux_u: Vec<f64>,
    flux_v: Vec<f64>,
}

impl FvSolver {
    pub fn new(grid: Grid, params: Parameters, cfl: f64) -> Result<Self> {
        grid.validate()?;
        params.validate()?;
        if !(cfl > 0.0 && cfl <= crate::solver::MAX_CFL) {
            return Err(Error::InvalidParameter(format!(
                "cfl must lie in (0, {}] (got {cfl})",
                crate::solver::MAX_CFL
            )));
        }
        let n = grid.n_cells;
        Ok(FvSolver {
            grid,
            params,
            cfl,
            dt_min: crate::solver::DEFAULT_DT_MIN,
            stage: ConservativeField {
                t: 0.0,
                u: vec![0.0; n],
                v: vec![0.0; n],
            },
            du: vec![0.0; n],
            dv: vec![0.0; n],
            flux_u: vec![0.0; n + 1],
            flux_v: vec![0.0; n + 1],
        })
    }

    fn check(&self, f: &ConservativeField) -> Result<f64> {
        let p = &self.params;
        let mut c_max = 0.0f64;
        for &u in &f.u {
            if !(u >= p.u_floor) {
                return Err(Error::Vacuum {
                    t: Some(f.t),
                    u,
                    floor: p.u_floor,
                });
            }
            c_max = c_max.max(u.powf(-0.5 * (p.gamma + 1.0)));
        }
        Ok(c_max)
    }

    /// Divergence of the Rusanov fluxes at `f` into `du`, `dv`.
    fn rates(&mut self, f: &ConservativeField) -> Result<()> {
        let n = f.len();
        let g = &self.grid;
        let p = &self.params;
        let lim = Limiter::Minmod;
        let slope = |q: &[f64], i: usize| {
            let (l, r) = (q[g.neighbor(i, -1)], q[g.neighbor(i, 1)]);
            lim.slope(q[i] - l, r - q[i])
        };
        let pressure = |u: f64, t: f64| {
            if u >= p.u_floor {
                Ok(u.powf(-p.gamma) / p.gamma)
            } else {
                Err(Error::Vacuum {
                    t: Some(t),
                    u,
                    floor: p.u_floor,
                })
            }
        };
        let speed = |u: f64| u.powf(-0.5 * (p.gamma + 1.0));
        let faces = n + 1;
        for k in 0..faces {
            // face k sits between cells k-1 and k
            let (il, ir) = if k == n {
                (n - 1, g.neighbor(n - 1, 1))
            } else {
                (g.neighbor(k, -1), k)
            };
            let ul = f.u[il] + 0.5 * slope(&f.u, il);
            let vl = f.v[il] + 0.5 * slope(&f.v, il);
            let ur = f.u[ir] - 0.5 * slope(&f.u, ir);
            let vr = f.v[ir] - 0.5 * slope(&f.v, ir);
            let a = speed(ul).max(speed(ur));
            let (pl, pr) = (pressure(ul, f.t)?, pressure(ur, f.t)?);
            self.flux_u[k] = 0.5 * (-vl - vr) - 0.5 * a * (ur - ul);
            self.flux_v[k] = 0.5 * (pl + pr) - 0.5 * a * (vr - vl);
        }
        let inv_dx = 1.0 / g.dx();
        for i in 0..n {
            self.du[i] = -(self.flux_u[i + 1] - self.flux_u[i]) * inv_dx;
            self.dv[i] = -(self.flux_v[i + 1] - self.flux_v[i]) * inv_dx;
        }
        Ok(())
    }

    fn damp(&self, f: &mut ConservativeField, a: f64, b: f64) {
        if self.params.lambda == 0.0 {
            return;
        }
        let p = &self.params;
        let factor = (-2.0 * (p.ln_damping_weight(b) - p.ln_damping_weight(a))).exp();
        f.v.iter_mut().for_each(|v| *v *= factor);
    }

    /// Advance `f` by one step, not past `t_stop`. On error `f` is
    /// unchanged.
    pub fn step(&mut self, f: &mut ConservativeField, t_stop: f64) -> Result<f64> {
        let c_max = self.check(f)?;
        let dt_cfl = self.cfl * self.grid.dx() / c_max;
        if !(dt_cfl >= self.dt_min) {
            return Err(Error::CflFailure {
                t: f.t,
                dt: dt_cfl,
                dt_min: self.dt_min,
            });
        }
        let t0 = f.t;
        let dt = dt_cfl.min(t_stop - t0);
        if !(dt > 0.0) {
            return Ok(0.0);
        }
        let mut next = f.clone();
        self.damp(&mut next, t0, t0 + 0.5 * dt);
        self.rates(&next)?;
        let mut stage = std::mem::replace(&mut self.stage, ConservativeField {
            t: 0.0,
            u: Vec::new(),
            v: Vec::new(),
        });
        stage.t = t0 + dt;
        for i in 0..next.len() {
            stage.u[i] = next.u[i] + dt * self.du[i];
            stage.v[i] = next.v[i] + dt * self.dv[i];
        }
        let res = self.check(&stage).and_then(|_| self.rates(&stage));
        if let Err(e) = res {
            self.stage = stage;
            return Err(e);
        }
        for i in 0..next.len() {
            next.u[i] = 0.5 * (next.u[i] + stage.u[i] + dt * self.du[i]);
            next.v[i] = 0.5 * (next.v[i] + stage.v[i] + dt * self.dv[i]);
        }
        self.stage = stage;
        self.damp(&mut next, t0 + 0.5 * dt, t0 + dt);
        next.t = if t_stop - (t0 + dt) <= 0.0 { t_stop } else { t0 + dt };
        self.check(&next)?;
        *f = next;
        Ok(dt)
    }
}

/// One step without a stop time.
pub fn fv_step(
    f: &ConservativeField,
    grid: &Grid,
    p: &Parameters,
    cfl: f64,
) -> Result<ConservativeField> {
    if f.len() != grid.n_cells {
        return Err(Error::InvalidParameter(format!(
            "field has {} cells, grid has {}",
            f.len(),
            grid.n_cells
        )));
    }
    let mut s = FvSolver::new(*grid, *p, cfl)?;
    let mut next = f.clone();
    s.step(&mut next, f64::INFINITY)?;
    Ok(next)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FvOutcome {
    /// `GlobalToHorizon`, `Vacuum` or `CflFailure`; this solver has no
    /// gradient unknowns and never reports blow-up.
    pub status: Status,
    pub field: ConservativeField,
    pub steps: usize,
}

/// Evolve `f` to `horizon`.
pub fn fv_evolve(
    mut f: ConservativeField,
    grid: &Grid,
    p: &Parameters,
    cfl: f64,
    horizon: f64,
) -> Result<FvOutcome> {
    let mut s = FvSolver::new(*grid, *p, cfl)?;
    let mut steps = 0;
    let status = loop {
        if f.t >= horizon {
            break Status::GlobalToHorizon(horizon);
        }
        match s.step(&mut f, horizon) {
            Ok(_) => steps += 1,
            Err(Error::Vacuum { .. }) => break Status::Vacuum(f.t),
            Err(Error::CflFailure { t, .. }) => break Status::CflFailure(t),
            Err(e) => return Err(e),
        }
    };
    Ok(FvOutcome {
        status,
        field: f,
        steps,
    })
}

pub fn fv_run(
    data: &InitialData,
    grid: &Grid,
    p: &Parameters,
    cfl: f64,
    horizon: f64,
) -> Result<FvOutcome> {
    fv_evolve(fv_init(data, grid, p)?, grid, p, cfl, horizon)
}
