//! Numerical laboratory for the one-dimensional compressible Euler
//! equations in Lagrangian coordinates (the p-system) with time-dependent
//! damping,
//!
//! ```text
//! u_t - v_x = 0,
//! v_t + p(u)_x = -λ/(1+t)^μ · v,       p(u) = u^{-γ}/γ.
//! ```
//!
//! The crate evolves the Riemann invariants and their gradients on a grid
//! ([`solver`]), cross-checks that against a conservative finite-volume
//! scheme ([`fv`]), traces characteristics and integrates the weighted
//! gradient Riccati equation along them ([`characteristics`]), and turns
//! runs into decay exponents, lifespans and threshold maps ([`analysis`]).
//! [`experiment`] drives batch runs and writes CSV/JSON artifacts.

pub mod analysis;
pub mod characteristics;
pub mod error;
pub mod experiment;
pub mod fv;
pub mod grid;
mod markers;
pub mod outcome;
pub mod quadrature;
pub mod solver;
pub mod thermo;

pub use analysis::{
    check_lemma_dec_a, check_lemma_esp, fit_decay_exponent, fit_lifespan_scaling,
    measure_lifespan, threshold_map, FitResult, Lifespan, LifespanLaw, Region, SweepSetup,
    ThresholdMap,
};
pub use characteristics::{
    lax_oracle_blowup_time, oracle_over_seeds, trace, verify_theta_identity, CharTrace, Sign,
    Termination, ThetaResidual,
};
pub use error::{Error, Result};
pub use experiment::{execute, parse_config, ExperimentConfig, ExperimentKind};
pub use fv::{fv_evolve, fv_init, fv_run, fv_step, ConservativeField, FvOutcome, FvSolver};
pub use grid::{init, Boundary, Family, Grid, InitialData, RiemannField};
pub use outcome::{History, RunOutcome, SeriesSample, Status, ThresholdCrossing};
pub use solver::{run, step, Limiter, SeriesCadence, SnapshotPolicy, Solver, SolverOptions};
pub use thermo::{
    damping_weight, eta, eta_inv, from_riemann, pressure, sound_speed, theta_gamma, to_riemann,
    GasState, Parameters, RiemannPair,
};
