//! Closed-form thermodynamics of the polytropic p-system and the
//! Riemann-invariant change of variables.
//!
//! With `p(u) = u^{-γ}/γ` the sound speed is `c = √(-p'(u)) = u^{-(γ+1)/2}`
//! and `η(u) = ∫_u^∞ c = (2/(γ-1)) u^{-(γ-1)/2}`. The invariants
//!
//! ```text
//! r = v - η + 2/(γ-1),    s = v + η - 2/(γ-1)
//! ```
//!
//! vanish on the reference state `(u, v) = (1, 0)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_U_FLOOR: f64 = 0.1;

/// Below this distance from 3 the logarithmic branch of θ_γ is used.
const GAMMA_THREE_TOL: f64 = 1e-9;

/// Below this distance from 1 the power-law branch of A(t) is used.
const MU_ONE_TOL: f64 = 1e-12;

/// Physical, damping and perturbation constants of one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    /// Adiabatic exponent, `γ > 1`.
    pub gamma: f64,
    /// Damping strength `λ ≥ 0`.
    pub lambda: f64,
    /// Damping decay exponent `μ ≥ 0`.
    pub mu: f64,
    /// Perturbation amplitude `ε ≥ 0`.
    pub epsilon: f64,
    /// Positivity floor for the specific volume.
    pub u_floor: f64,
}

impl Default for Parameters {
    fn default() -> Self {
        Parameters {
            gamma: 1.4,
            lambda: 1.0,
            mu: 0.5,
            epsilon: 0.01,
            u_floor: DEFAULT_U_FLOOR,
        }
    }
}

impl Parameters {
    pub fn new(gamma: f64, lambda: f64, mu: f64, epsilon: f64) -> Result<Self> {
        let p = Parameters {
            gamma,
            lambda,
            mu,
            epsilon,
            u_floor: DEFAULT_U_FLOOR,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_u_floor(mut self, u_floor: f64) -> Result<Self> {
        self.u_floor = u_floor;
        self.validate()?;
        Ok(self)
    }

    /// `self` if it passes [`Parameters::validate`].
    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.gamma.is_finite() && self.gamma > 1.0) {
            return bad(format!("gamma must exceed 1 (got {})", self.gamma));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return bad(format!("lambda must be nonnegative (got {})", self.lambda));
        }
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            return bad(format!("mu must be nonnegative (got {})", self.mu));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return bad(format!("epsilon must be nonnegative (got {})", self.epsilon));
        }
        if !(self.u_floor.is_finite() && self.u_floor > 0.0) {
            return bad(format!("u_floor must be positive (got {})", self.u_floor));
        }
        Ok(())
    }

    /// The additive normalization `2/(γ-1)`, equal to `η(1)`.
    #[inline]
    pub fn eta_offset(&self) -> f64 {
        2.0 / (self.gamma - 1.0)
    }

    /// Damping coefficient `λ/(1+t)^μ`.
    #[inline]
    pub fn damping_rate(&self, t: f64) -> f64 {
        if self.lambda == 0.0 {
            0.0
        } else if self.mu == 0.0 {
            self.lambda
        } else {
            self.lambda * (1.0 + t).powf(-self.mu)
        }
    }

    /// `ln A(t) = ∫₀ᵗ λ / (2(1+τ)^μ) dτ`.
    pub fn ln_damping_weight(&self, t: f64) -> f64 {
        if self.lambda == 0.0 {
            return 0.0;
        }
        let log1p_t = t.ln_1p();
        let k = 1.0 - self.mu;
        if k.abs() < MU_ONE_TOL {
            0.5 * self.lambda * log1p_t
        } else {
            // expm1 keeps the antiderivative accurate as μ → 1.
            0.5 * self.lambda * (k * log1p_t).exp_m1() / k
        }
    }

    /// Riccati coefficient `(γ+1)/4 · u^{(γ-3)/4}`.
    #[inline]
    pub fn riccati_coefficient(&self, u: f64) -> f64 {
        let e = (self.gamma - 3.0) / 4.0;
        let base = (self.gamma + 1.0) / 4.0;
        if e == 0.0 {
            base
        } else {
            base * u.powf(e)
        }
    }

    fn check_volume(&self, u: f64) -> Result<()> {
        if u.is_nan() || u < self.u_floor {
            return Err(Error::Domain {
                quantity: "specific volume u",
                value: u,
                constraint: "u >= u_floor",
            });
        }
        Ok(())
    }
}

/// Specific volume and velocity at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasState {
    pub u: f64,
    pub v: f64,
}

/// Minus-family invariant `r` and plus-family invariant `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiemannPair {
    pub r: f64,
    pub s: f64,
}

/// `p(u) = u^{-γ}/γ`.
pub fn pressure(u: f64, p: &Parameters) -> Result<f64> {
    p.check_volume(u)?;
    Ok(u.powf(-p.gamma) / p.gamma)
}

/// `p'(u) = -u^{-γ-1}`.
pub fn pressure_derivative(u: f64, p: &Parameters) -> Result<f64> {
    p.check_volume(u)?;
    Ok(-u.powf(-p.gamma - 1.0))
}

/// `c(u) = u^{-(γ+1)/2}`.
pub fn sound_speed(u: f64, p: &Parameters) -> Result<f64> {
    p.check_volume(u)?;
    Ok(u.powf(-0.5 * (p.gamma + 1.0)))
}

pub fn eta(u: f64, p: &Parameters) -> Result<f64> {
    p.check_volume(u)?;
    Ok(p.eta_offset() * u.powf(-0.5 * (p.gamma - 1.0)))
}

pub fn eta_inv(e: f64, p: &Parameters) -> Result<f64> {
    if e.is_nan() || e <= 0.0 {
        return Err(Error::Domain {
            quantity: "eta",
            value: e,
            constraint: "eta > 0",
        });
    }
    Ok((e / p.eta_offset()).powf(-2.0 / (p.gamma - 1.0)))
}

pub fn to_riemann(g: GasState, p: &Parameters) -> Result<RiemannPair> {
    let shifted = eta(g.u, p)? - p.eta_offset();
    Ok(RiemannPair {
        r: g.v - shifted,
        s: g.v + shifted,
    })
}

pub fn from_riemann(rp: RiemannPair, p: &Parameters) -> Result<GasState> {
    let e = 0.5 * (rp.s - rp.r) + p.eta_offset();
    if e.is_nan() || e <= 0.0 {
        return Err(Error::Vacuum {
            t: None,
            u: f64::INFINITY,
            floor: p.u_floor,
        });
    }
    Ok(GasState {
        u: eta_inv(e, p)?,
        v: 0.5 * (rp.r + rp.s),
    })
}

/// `A(t) = exp(∫₀ᵗ λ / (2(1+τ)^μ) dτ)`, in closed form for every μ.
pub fn damping_weight(t: f64, p: &Parameters) -> f64 {
    p.ln_damping_weight(t).exp()
}

/// θ_γ, normalized so that θ_γ(1) = 0 and θ_γ' = √c.
pub fn theta_gamma(u: f64, p: &Parameters) -> Result<f64> {
    if u.is_nan() || u <= 0.0 {
        return Err(Error::Domain {
            quantity: "specific volume u",
            value: u,
            constraint: "u > 0",
        });
    }
    let k = (3.0 - p.gamma) / 4.0;
    if k.abs() < GAMMA_THREE_TOL / 4.0 {
        Ok(u.ln())
    } else {
        Ok((k * u.ln()).exp_m1() / k)
    }
}

/// Pointwise thermodynamics recovered from a pair of invariants. This is
/// the solver hot path: one logarithm, two exponentials.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LocalState {
    pub u: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct InvariantMap {
    offset: f64,
    c_exp: f64,
    inv_u_exp: f64,
    pub floor: f64,
}

impl InvariantMap {
    pub fn new(p: &Parameters) -> Self {
        let gm1 = p.gamma - 1.0;
        InvariantMap {
            offset: p.eta_offset(),
            c_exp: (p.gamma + 1.0) / gm1,
            inv_u_exp: 2.0 / gm1,
            floor: p.u_floor,
        }
    }

    /// `None` signals η ≤ 0 or u below the floor.
    #[inline]
    pub fn local(&self, r: f64, s: f64) -> Option<LocalState> {
        let e = 0.5 * (s - r) + self.offset;
        if !(e > 0.0) {
            return None;
        }
        let ln_b = (e / self.offset).ln();
        let u = (-self.inv_u_exp * ln_b).exp();
        if !(u >= self.floor) {
            return None;
        }
        Some(LocalState {
            u,
            c: (self.c_exp * ln_b).exp(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(gamma: f64) -> Parameters {
        Parameters::new(gamma, 1.0, 0.5, 0.01).unwrap()
    }

    #[test]
    fn pressure_values() {
        assert!((pressure(1.0, &params(3.0)).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((pressure(1.0, &params(2.0)).unwrap() - 0.5).abs() < 1e-15);
        assert!((pressure(2.0, &params(3.0)).unwrap() - 1.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn pressure_rejects_volume_below_floor() {
        let p = params(1.4);
        assert!(matches!(pressure(0.05, &p), Err(Error::Domain { .. })));
        assert!(sound_speed(f64::NAN, &p).is_err());
    }

    #[test]
    fn sound_speed_values() {
        for g in [1.4, 2.0, 3.0] {
            assert_eq!(sound_speed(1.0, &params(g)).unwrap(), 1.0);
        }
        assert!((sound_speed(4.0, &params(3.0)).unwrap() - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn eta_values_and_inverse() {
        assert!((eta(1.0, &params(3.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!((eta(1.0, &params(2.0)).unwrap() - 2.0).abs() < 1e-15);
        let p = params(1.4);
        for u in [0.5, 1.0, 2.0] {
            let back = eta_inv(eta(u, &p).unwrap(), &p).unwrap();
            assert!((back - u).abs() <= 1e-12 * u);
        }
        assert!(eta_inv(0.0, &p).is_err());
        assert!(eta_inv(-1.0, &p).is_err());
    }

    #[test]
    fn riemann_examples() {
        for g in [1.4, 2.0, 3.0] {
            let p = params(g);
            let rp = to_riemann(GasState { u: 1.0, v: 0.0 }, &p).unwrap();
            assert!(rp.r.abs() < 1e-15 && rp.s.abs() < 1e-15);
            let rp = to_riemann(GasState { u: 1.0, v: 0.3 }, &p).unwrap();
            assert!((rp.r - 0.3).abs() < 1e-15 && (rp.s - 0.3).abs() < 1e-15);
        }
        let rp = to_riemann(GasState { u: 2.0, v: 0.0 }, &params(3.0)).unwrap();
        assert!((rp.r - 0.5).abs() < 1e-15);
        assert!((rp.s + 0.5).abs() < 1e-15);
    }

    #[test]
    fn from_riemann_detects_vacuum() {
        let p = params(3.0);
        // (s - r)/2 + 1 = 0
        let err = from_riemann(RiemannPair { r: 1.0, s: -1.0 }, &p).unwrap_err();
        assert!(matches!(err, Error::Vacuum { .. }));
    }

    #[test]
    fn damping_weight_values() {
        let p = Parameters::new(1.4, 2.0, 1.0, 0.01).unwrap();
        assert!((damping_weight(3.0, &p) - 4.0).abs() < 1e-14);
        for mu in [0.0, 0.5, 1.0, 2.0] {
            let p = Parameters::new(1.4, 1.7, mu, 0.01).unwrap();
            assert_eq!(damping_weight(0.0, &p), 1.0);
        }
        let p = Parameters::new(1.4, 2.0, 0.0, 0.01).unwrap();
        assert!((damping_weight(1.0, &p) - std::f64::consts::E).abs() < 1e-14);
    }

    #[test]
    fn theta_values() {
        for g in [1.4, 2.0, 3.0, 5.0] {
            assert_eq!(theta_gamma(1.0, &params(g)).unwrap(), 0.0);
        }
        let e = std::f64::consts::E;
        assert!((theta_gamma(e, &params(3.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!(theta_gamma(0.0, &params(1.4)).is_err());
    }

    #[test]
    fn local_state_matches_closed_forms() {
        let p = params(1.4);
        let map = InvariantMap::new(&p);
        let g = GasState { u: 1.3, v: -0.2 };
        let rp = to_riemann(g, &p).unwrap();
        let ls = map.local(rp.r, rp.s).unwrap();
        assert!((ls.u - 1.3).abs() < 1e-13);
        assert!((ls.c - sound_speed(1.3, &p).unwrap()).abs() < 1e-13);
        assert!(map.local(10.0, -10.0).is_none());
    }
}
