//! First-order upwind finite volumes for the master equations, valid for
//! any ratio of switching rate to growth rate.
//!
//! The solver advances the characteristic combinations `u1 = W − W1` and
//! `u2 = W + W1` in conservative form,
//!
//!   u1_τ + (v1 u1)_x = r (u2 − u1),   v1 = x + (p2 − q2) x²
//!   u2_τ + (v2 u2)_x = r (u1 − u2),   v2 = x + (p2 + q2) x²
//!
//! where `r = ν/p1`.

use serde::Serialize;
use thiserror::Error;

use crate::quad::QuadError;
use crate::verhulst::{InitialDensity, InitialKind, VerhulstParams};

pub const DEFAULT_CFL: f64 = 0.5;
/// Default upper end of the grid, in units of the outer equilibrium.
pub const DEFAULT_MARGIN: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UpwindError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("CFL violation: dtau * max|v| / dx = {number} exceeds {limit}")]
    Cfl { number: f64, limit: f64 },
    #[error("invalid setup: {0}")]
    InvalidSetup(String),
    #[error(transparent)]
    Quad(#[from] QuadError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid1D {
    pub x_lo: f64,
    pub x_hi: f64,
    pub cells: usize,
}

impl Grid1D {
    pub fn new(x_lo: f64, x_hi: f64, cells: usize) -> Result<Self, UpwindError> {
        if !(x_lo >= 0.0 && x_hi > x_lo && x_hi.is_finite() && cells > 0) {
            return Err(UpwindError::InvalidGrid(format!("[{x_lo}, {x_hi}] with {cells} cells")));
        }
        Ok(Self { x_lo, x_hi, cells })
    }

    /// `[0, margin / |p2 + q2|]`.
    pub fn covering(params: &VerhulstParams, margin: f64, cells: usize) -> Result<Self, UpwindError> {
        Self::new(0.0, margin * params.outer_equilibrium(), cells)
    }

    pub fn dx(&self) -> f64 {
        (self.x_hi - self.x_lo) / self.cells as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x_lo + (i as f64 + 0.5) * self.dx()
    }

    /// Left edge of cell `i`; `face(cells)` is the right end of the grid.
    pub fn face(&self, i: usize) -> f64 {
        self.x_lo + i as f64 * self.dx()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.cells).map(|i| self.center(i)).collect()
    }
}

/// Cell averages at time `tau`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PdeGridState {
    pub tau: f64,
    #[serde(rename = "W")]
    pub w: Vec<f64>,
    #[serde(rename = "W1")]
    pub w1: Vec<f64>,
}

impl PdeGridState {
    pub fn mass(&self, grid: &Grid1D) -> f64 {
        self.w.iter().sum::<f64>() * grid.dx()
    }

    pub fn min_w(&self) -> f64 {
        self.w.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Cell averages of `W0` (mass-preserving); a delta goes entirely into its cell.
pub fn project(w0: &InitialDensity, grid: &Grid1D) -> Result<PdeGridState, UpwindError> {
    let n = grid.cells;
    let dx = grid.dx();
    let mut w = vec![0.0; n];
    if let InitialKind::Delta(x) = w0.kind() {
        if !(*x >= grid.x_lo && *x < grid.x_hi) {
            return Err(UpwindError::InvalidSetup(format!("delta at {x} lies outside the grid")));
        }
        let i = (((x - grid.x_lo) / dx) as usize).min(n - 1);
        w[i] = 1.0 / dx;
    } else {
        let mut prev = w0.i1(grid.face(0))?;
        for (i, wi) in w.iter_mut().enumerate() {
            let next = w0.i1(grid.face(i + 1))?;
            *wi = (next - prev) / dx;
            prev = next;
        }
    }
    Ok(PdeGridState { tau: 0.0, w1: vec![0.0; n], w })
}

/// Face velocities of both families, precomputed for a grid.
#[derive(Clone, Debug)]
struct Faces {
    v1: Vec<f64>,
    v2: Vec<f64>,
}

impl Faces {
    fn new(grid: &Grid1D, params: &VerhulstParams) -> Self {
        let faces: Vec<f64> = (0..=grid.cells).map(|i| grid.face(i)).collect();
        let v = |c: f64| faces.iter().map(|&x| x + c * x * x).collect::<Vec<_>>();
        Self { v1: v(params.c_minus()), v2: v(params.c_plus()) }
    }

    fn max_speed(&self) -> f64 {
        self.v1.iter().chain(&self.v2).fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Upwind flux through every face; boundary ghosts are empty.
fn fluxes(u: &[f64], v: &[f64], out: &mut [f64]) {
    let n = u.len();
    for (j, f) in out.iter_mut().enumerate() {
        let left = if j > 0 { u[j - 1] } else { 0.0 };
        let right = if j < n { u[j] } else { 0.0 };
        *f = if v[j] > 0.0 { v[j] * left } else { v[j] * right };
    }
}

/// Reusable stepping workspace for one grid and parameter set.
pub struct Stepper {
    grid: Grid1D,
    faces: Faces,
    nu_ratio: f64,
    u1: Vec<f64>,
    u2: Vec<f64>,
    f1: Vec<f64>,
    f2: Vec<f64>,
    /// Net mass that left through the grid ends so far.
    pub outflow: f64,
}

impl Stepper {
    pub fn new(grid: Grid1D, params: &VerhulstParams, nu_ratio: f64) -> Result<Self, UpwindError> {
        if !(nu_ratio >= 0.0 && nu_ratio.is_finite()) {
            return Err(UpwindError::InvalidSetup(format!("nu_ratio = {nu_ratio}")));
        }
        let n = grid.cells;
        Ok(Self {
            faces: Faces::new(&grid, params),
            grid,
            nu_ratio,
            u1: vec![0.0; n],
            u2: vec![0.0; n],
            f1: vec![0.0; n + 1],
            f2: vec![0.0; n + 1],
            outflow: 0.0,
        })
    }

    pub fn max_speed(&self) -> f64 {
        self.faces.max_speed()
    }

    pub fn cfl_number(&self, dtau: f64) -> f64 {
        dtau * self.max_speed() / self.grid.dx()
    }

    /// One explicit Euler step of length `dtau`.
    pub fn step(&mut self, state: &PdeGridState, dtau: f64, cfl: f64) -> Result<PdeGridState, UpwindError> {
        let number = self.cfl_number(dtau);
        if !(number <= cfl && cfl <= 1.0) {
            return Err(UpwindError::Cfl { number, limit: cfl.min(1.0) });
        }
        let n = self.grid.cells;
        for i in 0..n {
            self.u1[i] = state.w[i] - state.w1[i];
            self.u2[i] = state.w[i] + state.w1[i];
        }
        fluxes(&self.u1, &self.faces.v1, &mut self.f1);
        fluxes(&self.u2, &self.faces.v2, &mut self.f2);
        self.outflow += dtau * (self.f1[n] + self.f2[n] - self.f1[0] - self.f2[0]) / 2.0;
        let lam = dtau / self.grid.dx();
        let k = dtau * self.nu_ratio;
        let mut w = vec![0.0; n];
        let mut w1 = vec![0.0; n];
        for i in 0..n {
            let (a, b) = (self.u1[i], self.u2[i]);
            let a_new = a - lam * (self.f1[i + 1] - self.f1[i]) + k * (b - a);
            let b_new = b - lam * (self.f2[i + 1] - self.f2[i]) + k * (a - b);
            w[i] = 0.5 * (a_new + b_new);
            w1[i] = 0.5 * (b_new - a_new);
        }
        Ok(PdeGridState { tau: state.tau + dtau, w, w1 })
    }
}

/// Single step with a fresh workspace.
pub fn step(
    state: &PdeGridState,
    grid: &Grid1D,
    dtau: f64,
    params: &VerhulstParams,
    nu_ratio: f64,
    cfl: f64,
) -> Result<PdeGridState, UpwindError> {
    Stepper::new(*grid, params, nu_ratio)?.step(state, dtau, cfl)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub initial_mass: f64,
    /// Mass at each checkpoint.
    pub mass: Vec<f64>,
    /// Largest `|mass − initial| / τ` over the checkpoints.
    pub mass_drift_rate: f64,
    /// Smallest cell value of `W` seen at any checkpoint.
    pub min_w: f64,
    pub outflow: f64,
    pub steps: usize,
    pub dtau: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PdeSolution {
    pub grid: Grid1D,
    pub states: Vec<PdeGridState>,
    pub diagnostics: Diagnostics,
}

/// Advances `initial` through every checkpoint (ascending, `τ ≥ 0`); the
/// last step before each checkpoint is shortened to land on it.
pub fn solve(
    initial: &PdeGridState,
    grid: &Grid1D,
    checkpoints: &[f64],
    params: &VerhulstParams,
    nu_ratio: f64,
    cfl: f64,
) -> Result<PdeSolution, UpwindError> {
    if checkpoints.windows(2).any(|w| w[1] < w[0]) || checkpoints.iter().any(|t| t.is_nan() || *t < initial.tau) {
        return Err(UpwindError::InvalidSetup("checkpoints must be ascending and not before the initial time".into()));
    }
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(UpwindError::InvalidSetup(format!("cfl = {cfl} must lie in (0, 1]")));
    }
    if initial.w.len() != grid.cells || initial.w1.len() != grid.cells {
        return Err(UpwindError::InvalidSetup("state does not match the grid".into()));
    }
    let mut stepper = Stepper::new(*grid, params, nu_ratio)?;
    let mut dtau = cfl * grid.dx() / stepper.max_speed();
    if nu_ratio > 0.0 {
        dtau = dtau.min(0.5 / nu_ratio);
    }
    let initial_mass = initial.mass(grid);
    let mut state = initial.clone();
    let mut states = Vec::with_capacity(checkpoints.len());
    let mut steps = 0;
    for &tk in checkpoints {
        while state.tau < tk {
            let remaining = tk - state.tau;
            let last = remaining <= dtau;
            let h = if last { remaining } else { dtau };
            state = stepper.step(&state, h, cfl)?;
            if last {
                state.tau = tk;
            }
            steps += 1;
        }
        states.push(state.clone());
    }
    let mass: Vec<f64> = states.iter().map(|s| s.mass(grid)).collect();
    let mass_drift_rate = states
        .iter()
        .zip(&mass)
        .filter(|(s, _)| s.tau > initial.tau)
        .map(|(s, m)| (m - initial_mass).abs() / (s.tau - initial.tau))
        .fold(0.0, f64::max);
    let min_w = states.iter().map(PdeGridState::min_w).fold(initial.min_w(), f64::min);
    let diagnostics = Diagnostics { initial_mass, mass, mass_drift_rate, min_w, outflow: stepper.outflow, steps, dtau };
    Ok(PdeSolution { grid: *grid, states, diagnostics })
}
