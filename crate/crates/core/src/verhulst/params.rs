use serde::{Deserialize, Serialize};

use super::VerhulstError;

/// Dimensionless Verhulst parameters: `ẋ = x + p2 x² + α q2 x²` in units
/// where the linear growth rate is one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerhulstParams {
    p2: f64,
    q2: f64,
}

impl VerhulstParams {
    /// Requires `p2 < 0` and `|p2| > q2 > 0`.
    pub fn new(p2: f64, q2: f64) -> Result<Self, VerhulstError> {
        if !(p2.is_finite() && q2.is_finite() && p2 < 0.0 && q2 > 0.0 && p2.abs() > q2) {
            return Err(VerhulstError::InvalidParams(format!(
                "need p2 < 0 and |p2| > q2 > 0, got p2 = {p2}, q2 = {q2}"
            )));
        }
        Ok(Self { p2, q2 })
    }

    /// Skips validation; test code uses this for degenerate limits such as `q2 = 0`.
    pub fn new_unchecked(p2: f64, q2: f64) -> Self {
        Self { p2, q2 }
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    pub fn q2(&self) -> f64 {
        self.q2
    }

    /// Quadratic coefficient of the `α = +1` branch, `p2 + q2`.
    pub fn c_plus(&self) -> f64 {
        self.p2 + self.q2
    }

    /// Quadratic coefficient of the `α = −1` branch, `p2 − q2`.
    pub fn c_minus(&self) -> f64 {
        self.p2 - self.q2
    }

    /// Equilibrium of the `α = −1` branch, `1/|p2 − q2|`.
    pub fn inner_equilibrium(&self) -> f64 {
        1.0 / self.c_minus().abs()
    }

    /// Equilibrium of the `α = +1` branch, `1/|p2 + q2|`.
    pub fn outer_equilibrium(&self) -> f64 {
        1.0 / self.c_plus().abs()
    }
}

/// Parameters in the user's units: `ẋ = p1 x + p2 x² + α(t) q2 x²` with
/// the noise switching at frequency `2ν`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserParams {
    pub p1: f64,
    pub p2: f64,
    pub q2: f64,
    pub nu: f64,
}

impl UserParams {
    pub fn validate(&self) -> Result<(), VerhulstError> {
        let UserParams { p1, p2, q2, nu } = *self;
        let ok = [p1, p2, q2, nu].iter().all(|v| v.is_finite())
            && p1 > 0.0
            && p2 < 0.0
            && q2 > 0.0
            && p2.abs() > q2
            && nu > 0.0;
        if ok {
            Ok(())
        } else {
            Err(VerhulstError::InvalidParams(format!(
                "need p1 > 0, p2 < 0, |p2| > q2 > 0, nu > 0; got p1 = {p1}, p2 = {p2}, q2 = {q2}, nu = {nu}"
            )))
        }
    }

    /// Rescales time by `p1` (`τ = p1 t`), so the growth rate becomes one and
    /// the flip rate of the noise becomes `ν/p1`. Returns the dimensionless
    /// parameters and that ratio.
    pub fn dimensionless(&self) -> Result<(VerhulstParams, f64), VerhulstError> {
        self.validate()?;
        let params = VerhulstParams::new(self.p2 / self.p1, self.q2 / self.p1)?;
        Ok((params, self.nu / self.p1))
    }
}
