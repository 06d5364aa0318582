//! Spatial grid, initial-data families and the evolved invariant field.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::thermo::{from_riemann, to_riemann, GasState, InvariantMap, Parameters, RiemannPair};

pub const MIN_CELLS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    /// Zero-order extrapolation: ghost cells copy the edge cell.
    Extrapolate,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Periodic => "periodic",
            Boundary::Extrapolate => "extrapolate",
        })
    }
}

impl FromStr for Boundary {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "extrapolate" => Ok(Boundary::Extrapolate),
            _ => Err(format!("unknown boundary '{s}' (expected periodic|extrapolate)")),
        }
    }
}

/// Uniform cell-centred grid on `[x_min, x_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
    pub boundary: Boundary,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            x_min: 0.0,
            x_max: 2.0 * PI,
            n_cells: 1024,
            boundary: Boundary::Periodic,
        }
    }
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize, boundary: Boundary) -> Result<Self> {
        let g = Grid {
            x_min,
            x_max,
            n_cells,
            boundary,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn periodic(x_min: f64, x_max: f64, n_cells: usize) -> Result<Self> {
        Self::new(x_min, x_max, n_cells, Boundary::Periodic)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_max > self.x_min) {
            return Err(Error::InvalidParameter(format!(
                "x_max must exceed x_min (got [{}, {}])",
                self.x_min, self.x_max
            )));
        }
        if self.n_cells < MIN_CELLS {
            return Err(Error::InvalidParameter(format!(
                "n_cells must be at least {MIN_CELLS} (got {})",
                self.n_cells
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_cells as f64
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    #[inline]
    pub fn center(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.center(i)).collect()
    }

    /// Index of cell `i + offset` after applying the boundary rule.
    #[inline]
    pub(crate) fn neighbor(&self, i: usize, offset: isize) -> usize {
        let n = self.n_cells as isize;
        let j = i as isize + offset;
        match self.boundary {
            Boundary::Periodic => j.rem_euclid(n) as usize,
            Boundary::Extrapolate => j.clamp(0, n - 1) as usize,
        }
    }

    /// Bracketing cells `(i0, i1)` and weight `w` of `i1` for linear
    /// interpolation at `x`. Periodic grids wrap `x`; otherwise values are
    /// held constant past the outer centres.
    #[inline]
    pub fn locate(&self, x: f64) -> (usize, usize, f64) {
        let n = self.n_cells;
        let xi = (x - self.x_min) * (n as f64 / (self.x_max - self.x_min)) - 0.5;
        match self.boundary {
            Boundary::Periodic => {
                let fl = xi.floor();
                let i0 = (fl as i64).rem_euclid(n as i64) as usize;
                let i1 = if i0 + 1 == n { 0 } else { i0 + 1 };
                (i0, i1, xi - fl)
            }
            Boundary::Extrapolate => {
                if !(xi > 0.0) {
                    (0, 0, 0.0)
                } else if xi >= (n - 1) as f64 {
                    (n - 1, n - 1, 0.0)
                } else {
                    let i0 = xi as usize;
                    (i0, i0 + 1, xi - i0 as f64)
                }
            }
        }
    }

    /// Linear interpolation of cell-centred `q` at `x`.
    #[inline]
    pub fn interpolate(&self, q: &[f64], x: f64) -> f64 {
        let (i0, i1, w) = self.locate(x);
        q[i0] + w * (q[i1] - q[i0])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `φ = sin(kx + phase)`, `ψ = 0`.
    Sine,
    /// `φ = exp(-((x - center)/width)²)`, `ψ = 0`.
    GaussianBump,
    /// Rarefying simple wave: `s ≡ 0`, `r = ε(1 + tanh((x - center)/width))`.
    MonotoneTanh,
    /// Simple wave: `s ≡ 0`, `r = ε sin(kx + phase)`.
    SimpleWaveSConst,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Sine => "sine",
            Family::GaussianBump => "gaussian_bump",
            Family::MonotoneTanh => "monotone_tanh",
            Family::SimpleWaveSConst => "simple_wave_s_const",
        })
    }
}

impl FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sine" => Ok(Family::Sine),
            "gaussian_bump" => Ok(Family::GaussianBump),
            "monotone_tanh" => Ok(Family::MonotoneTanh),
            "simple_wave_s_const" => Ok(Family::SimpleWaveSConst),
            _ => Err(format!(
                "unknown family '{s}' (expected sine|gaussian_bump|monotone_tanh|simple_wave_s_const)"
            )),
        }
    }
}

/// Shape of the initial perturbation. The amplitude is `Parameters::epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub family: Family,
    pub wavenumber: f64,
    pub phase: f64,
    pub center: f64,
    pub width: f64,
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData {
            family: Family::Sine,
            wavenumber: 1.0,
            phase: 0.0,
            center: 0.0,
            width: 1.0,
        }
    }
}

/// Point values of the invariants and their exact x-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialPoint {
    pub r: f64,
    pub s: f64,
    pub rx: f64,
    pub sx: f64,
}

impl InitialData {
    pub fn sine(wavenumber: f64) -> Self {
        InitialData {
            family: Family::Sine,
            wavenumber,
            ..Default::default()
        }
    }

    pub fn simple_wave(wavenumber: f64) -> Self {
        InitialData {
            family: Family::SimpleWaveSConst,
            wavenumber,
            ..Default::default()
        }
    }

    pub fn monotone_tanh(center: f64, width: f64) -> Self {
        InitialData {
            family: Family::MonotoneTanh,
            center,
            width,
            ..Default::default()
        }
    }

    pub fn gaussian_bump(center: f64, width: f64) -> Self {
        InitialData {
            family: Family::GaussianBump,
            center,
            width,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.wavenumber, self.phase, self.center, self.width]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("initial data parameters must be finite".into()));
        }
        if matches!(self.family, Family::GaussianBump | Family::MonotoneTanh) && self.width <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "width must be positive (got {})",
                self.width
            )));
        }
        Ok(())
    }

    /// Evaluate the data at `x`. Derivatives come from the chain rule on the
    /// analytic profiles, never from differencing.
    pub fn evaluate(&self, x: f64, p: &Parameters) -> Result<InitialPoint> {
        let eps = p.epsilon;
        match self.family {
            Family::Sine | Family::GaussianBump => {
                let (phi, dphi) = match self.family {
                    Family::Sine => {
                        let arg = self.wavenumber * x + self.phase;
                        (arg.sin(), self.wavenumber * arg.cos())
                    }
                    _ => {
                        let xi = (x - self.center) / self.width;
                        let g = (-xi * xi).exp();
                        (g, -2.0 * xi / self.width * g)
                    }
                };
                let gas = GasState {
                    u: 1.0 + eps * phi,
                    v: 0.0,
                };
                let rp = to_riemann(gas, p).map_err(|_| vacuum_at_init(gas.u, p))?;
                let c = gas.u.powf(-0.5 * (p.gamma + 1.0));
                let ux = eps * dphi;
                let vx = 0.0;
                Ok(InitialPoint {
                    r: rp.r,
                    s: rp.s,
                    rx: vx + c * ux,
                    sx: vx - c * ux,
                })
            }
            Family::MonotoneTanh | Family::SimpleWaveSConst => {
                let (r, rx) = match self.family {
                    Family::MonotoneTanh => {
                        let th = ((x - self.center) / self.width).tanh();
                        (eps * (1.0 + th), eps * (1.0 - th * th) / self.width)
                    }
                    _ => {
                        let arg = self.wavenumber * x + self.phase;
                        (eps * arg.sin(), eps * self.wavenumber * arg.cos())
                    }
                };
                let g = from_riemann(RiemannPair { r, s: 0.0 }, p)?;
                if g.u < p.u_floor {
                    return Err(vacuum_at_init(g.u, p));
                }
                Ok(InitialPoint {
                    r,
                    s: 0.0,
                    rx,
                    sx: 0.0,
                })
            }
        }
    }
}

fn vacuum_at_init(u: f64, p: &Parameters) -> Error {
    Error::Vacuum {
        t: Some(0.0),
        u,
        floor: p.u_floor,
    }
}

/// The evolved state: invariants and independently evolved gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannField {
    pub t: f64,
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    pub rx: Vec<f64>,
    pub sx: Vec<f64>,
}

impl RiemannField {
    pub fn zeros(n: usize) -> Self {
        RiemannField {
            t: 0.0,
            r: vec![0.0; n],
            s: vec![0.0; n],
            rx: vec![0.0; n],
            sx: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Cellwise `(u, v)`.
    pub fn gas_states(&self, p: &Parameters) -> Result<Vec<GasState>> {
        self.r
            .iter()
            .zip(&self.s)
            .map(|(&r, &s)| from_riemann(RiemannPair { r, s }, p))
            .collect()
    }

    /// Cellwise specific volume, failing with a vacuum error if any cell
    /// drops below the floor.
    pub fn specific_volume(&self, p: &Parameters) -> Result<Vec<f64>> {
        let map = InvariantMap::new(p);
        self.r
            .iter()
            .zip(&self.s)
            .map(|(&r, &s)| {
                map.local(r, s).map(|l| l.u).ok_or(Error::Vacuum {
                    t: Some(self.t),
                    u: from_riemann(RiemannPair { r, s }, p).map(|g| g.u).unwrap_or(f64::INFINITY),
                    floor: p.u_floor,
                })
            })
            .collect()
    }

    pub fn sup_norms(&self) -> [f64; 4] {
        [sup(&self.r), sup(&self.s), sup(&self.rx), sup(&self.sx)]
    }

    /// Sup-norm of the mismatch between centred differences of `(r, s)`
    /// and the evolved gradients `(r_x, s_x)`; interior cells only for
    /// extrapolating boundaries.
    pub fn compatibility_residual(&self, grid: &Grid) -> f64 {
        let n = self.len();
        let dx = grid.dx();
        let range = match grid.boundary {
            Boundary::Periodic => 0..n,
            Boundary::Extrapolate => 1..n - 1,
        };
        range
            .map(|i| {
                let (l, rgt) = (grid.neighbor(i, -1), grid.neighbor(i, 1));
                let dr = (self.r[rgt] - self.r[l]) / (2.0 * dx) - self.rx[i];
                let ds = (self.s[rgt] - self.s[l]) / (2.0 * dx) - self.sx[i];
                dr.abs().max(ds.abs())
            })
            .fold(0.0, f64::max)
    }
}

pub fn sup(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Sample the initial data at the cell centres.
pub fn init(data: &InitialData, grid: &Grid, p: &Parameters) -> Result<RiemannField> {
    p.validate()?;
    grid.validate()?;
    data.validate()?;
    let n = grid.n_cells;
    let mut f = RiemannField::zeros(n);
    for i in 0..n {
        let pt = data.evaluate(grid.center(i), p)?;
        f.r[i] = pt.r;
        f.s[i] = pt.s;
        f.rx[i] = pt.rx;
        f.sx[i] = pt.sx;
    }
    // Checks the floor on every cell, including the (φ, ψ) families.
    f.specific_volume(p)?;
    Ok(f)
}
