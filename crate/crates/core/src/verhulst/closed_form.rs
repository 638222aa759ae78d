use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::distribution::{Atom, Density, MixedDistribution1D};
use super::initial::{InitialDensity, InitialKind};
use super::params::VerhulstParams;
use super::VerhulstError;

/// Real number or the point at infinity reached by a backward characteristic
/// that left through `+∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    BeyondInfinity,
}

impl ExtReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::BeyondInfinity => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolutionPoint {
    #[serde(rename = "W")]
    pub w: f64,
    #[serde(rename = "W1")]
    pub w1: f64,
}

/// `(x̄, ȳ)`, constant along the `α = +1` and `α = −1` characteristics.
pub fn char_vars(x: f64, tau: f64, params: &VerhulstParams) -> Result<(f64, f64), VerhulstError> {
    let a = 1.0 + params.c_plus() * x;
    let b = 1.0 + params.c_minus() * x;
    if !(x > 0.0 && a > 0.0 && b > 0.0) {
        return Err(VerhulstError::Domain { x, tau });
    }
    Ok((-tau + (x / a).ln(), -tau + (x / b).ln()))
}

/// Denominator `e^τ(1 + c x) − c x` of the backward logistic flow.
fn backward_den(x: f64, tau: f64, c: f64) -> f64 {
    tau.exp() + c * x * tau.exp_m1()
}

fn backward_one(x: f64, tau: f64, c: f64) -> (ExtReal, f64) {
    let d = backward_den(x, tau, c);
    if d > 0.0 {
        (ExtReal::Finite(x / d), d)
    } else {
        (ExtReal::BeyondInfinity, d)
    }
}

/// Starting points `(x̂, ŷ)` at `τ = 0` of the two characteristics through `(x, τ)`.
pub fn backward_map(x: f64, tau: f64, params: &VerhulstParams) -> (ExtReal, ExtReal) {
    (backward_one(x, tau, params.c_plus()).0, backward_one(x, tau, params.c_minus()).0)
}

/// A function of one characteristic variable together with its derivative.
pub trait CharFunction: Sync {
    fn value(&self, s: f64) -> Result<f64, VerhulstError>;
    fn deriv(&self, s: f64) -> Result<f64, VerhulstError>;
}

/// [`CharFunction`] from a pair of closures.
pub struct SmoothFn<F, D> {
    pub f: F,
    pub df: D,
}

impl<F, D> CharFunction for SmoothFn<F, D>
where
    F: Fn(f64) -> f64 + Sync,
    D: Fn(f64) -> f64 + Sync,
{
    fn value(&self, s: f64) -> Result<f64, VerhulstError> {
        Ok((self.f)(s))
    }

    fn deriv(&self, s: f64) -> Result<f64, VerhulstError> {
        Ok((self.df)(s))
    }
}

/// General solution built from arbitrary `F(x̄)` and `G(ȳ)`.
pub fn general_solution(
    f: &dyn CharFunction,
    g: &dyn CharFunction,
    x: f64,
    tau: f64,
    params: &VerhulstParams,
) -> Result<SolutionPoint, VerhulstError> {
    let (xb, yb) = char_vars(x, tau, params)?;
    let q2 = params.q2();
    let (fv, fd) = (f.value(xb)?, f.deriv(xb)?);
    let (gv, gd) = (g.value(yb)?, g.deriv(yb)?);
    let w = q2 / (x * x) * (fd - fv + gd - gv);
    let lin = 1.0 + params.p2() * x;
    let w1 = (-q2 * x * gd + lin * gv + q2 * x * fd + lin * fv) / (x * x * x);
    Ok(SolutionPoint { w, w1 })
}

/// One of the two functions produced by [`fit_cauchy`]; `F` for the `+`
/// branch, `G` for the `−` branch.
#[derive(Clone, Debug)]
pub struct FitBranch {
    w0: Arc<InitialDensity>,
    q2: f64,
    c: f64,
    plus: bool,
}

impl FitBranch {
    /// Position at `τ = 0` with characteristic variable `s`.
    fn position(&self, s: f64) -> f64 {
        let e = s.exp();
        e / (1.0 - self.c * e)
    }

    /// Numerator of the branch as a function of x, and its x-derivative.
    fn numerator(&self, x: f64) -> Result<(f64, f64), VerhulstError> {
        let i1 = self.w0.i1(x)?;
        let i2 = self.w0.i2(x)?;
        let w = self.w0.eval(x);
        let q2 = self.q2;
        Ok(if self.plus {
            (-x * i2 + (1.0 + q2 * x) * i1, -i2 + q2 * i1 + q2 * x * w)
        } else {
            (x * i2 + (q2 * x - 1.0) * i1, i2 + q2 * i1 + q2 * x * w)
        })
    }
}

impl CharFunction for FitBranch {
    fn value(&self, s: f64) -> Result<f64, VerhulstError> {
        let x = self.position(s);
        let (n, _) = self.numerator(x)?;
        Ok(n / (2.0 * self.q2 * self.q2 * (1.0 + self.c * x)))
    }

    fn deriv(&self, s: f64) -> Result<f64, VerhulstError> {
        let x = self.position(s);
        let (n, dn) = self.numerator(x)?;
        let a = 1.0 + self.c * x;
        let dx = (dn * a - self.c * n) / (2.0 * self.q2 * self.q2 * a * a);
        Ok(dx * x * a)
    }
}

#[derive(Clone, Debug)]
pub struct CauchyFit {
    pub f: FitBranch,
    pub g: FitBranch,
}

impl CauchyFit {
    pub fn eval(&self, x: f64, tau: f64, params: &VerhulstParams) -> Result<SolutionPoint, VerhulstError> {
        general_solution(&self.f, &self.g, x, tau, params)
    }
}

/// `F`, `G` such that the general solution matches `W0` (and `W1 = 0`) at `τ = 0`.
pub fn fit_cauchy(w0: &InitialDensity, params: &VerhulstParams) -> Result<CauchyFit, VerhulstError> {
    if w0.is_delta() {
        return Err(VerhulstError::DeltaInitial);
    }
    let (_, hi) = w0.support();
    if hi >= 1.0 / params.c_minus().abs() {
        return Err(VerhulstError::Domain { x: hi, tau: 0.0 });
    }
    let w0 = Arc::new(w0.clone());
    let branch = |c: f64, plus: bool| FitBranch { w0: Arc::clone(&w0), q2: params.q2(), c, plus };
    Ok(CauchyFit { f: branch(params.c_plus(), true), g: branch(params.c_minus(), false) })
}

/// `(W, W1)` at `(x, τ)` for smooth initial data.
///
/// A backward characteristic that escapes through infinity picks up the
/// full mass integrals and contributes no boundary term.
pub fn solve(w0: &InitialDensity, x: f64, tau: f64, params: &VerhulstParams) -> Result<SolutionPoint, VerhulstError> {
    if w0.is_delta() {
        return Err(VerhulstError::DeltaInitial);
    }
    if !(x > 0.0 && tau >= 0.0) {
        return Err(VerhulstError::Domain { x, tau });
    }
    let (xh, dx) = backward_one(x, tau, params.c_plus());
    let (yh, dy) = backward_one(x, tau, params.c_minus());
    // (I1, I2, boundary term W0/(2 D^2)) at one end
    let end = |e: ExtReal, d: f64| -> Result<(f64, f64, f64), VerhulstError> {
        Ok(match e {
            ExtReal::Finite(z) => (w0.i1(z)?, w0.i2(z)?, w0.eval(z) / (2.0 * d * d)),
            ExtReal::BeyondInfinity => (w0.i1(f64::INFINITY)?, w0.i2(f64::INFINITY)?, 0.0),
        })
    };
    let (i1x, i2x, bx) = end(xh, dx)?;
    let (i1y, i2y, by) = end(yh, dy)?;
    let (p2, q2) = (params.p2(), params.q2());
    let di1 = i1y - i1x;
    let di2 = i2y - i2x;
    let em = (-tau).exp();
    let w = di1 / (2.0 * q2 * x * x) + by + bx;
    let w1 =
        di1 / (2.0 * q2 * q2 * x * x * x) * ((em - 1.0) * p2 * x - 1.0) + em * di2 / (2.0 * q2 * q2 * x * x) - by + bx;
    Ok(SolutionPoint { w, w1 })
}

/// [`solve`] at every `x` in parallel; output order follows `xs`.
pub fn solve_grid(
    w0: &InitialDensity,
    xs: &[f64],
    tau: f64,
    params: &VerhulstParams,
) -> Result<Vec<SolutionPoint>, VerhulstError> {
    xs.par_iter().map(|&x| solve(w0, x, tau, params)).collect()
}

fn forward_flow(x: f64, tau: f64, c: f64) -> f64 {
    x * tau.exp() / (1.0 - c * x * tau.exp_m1())
}

/// Exact law at `τ` when all mass starts at `x★`: two atoms riding the
/// noiseless branches plus the `1/(2 q2 x²)` density between them.
pub fn solve_delta(xstar: f64, tau: f64, params: &VerhulstParams) -> Result<MixedDistribution1D, VerhulstError> {
    if !(xstar > 0.0 && xstar.is_finite() && tau >= 0.0) {
        return Err(VerhulstError::Domain { x: xstar, tau });
    }
    let lo = forward_flow(xstar, tau, params.c_minus());
    let hi = forward_flow(xstar, tau, params.c_plus());
    let m = 0.5 * (-tau).exp();
    let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let density = if tau > 0.0 { Density::InverseSquare { scale: 0.5 / params.q2(), lo, hi } } else { Density::None };
    Ok(MixedDistribution1D::new(vec![Atom { x: lo, mass: m }, Atom { x: hi, mass: m }], density))
}

/// Continuous part of `W1` for data concentrated at `x★`, at a point
/// strictly between the two atoms (zero elsewhere). The atoms themselves
/// carry `W1` masses `−e^{−τ}/2` at the lower and `+e^{−τ}/2` at the upper one.
pub fn delta_w1_density(x: f64, xstar: f64, tau: f64, params: &VerhulstParams) -> f64 {
    let lo = forward_flow(xstar, tau, params.c_minus());
    let hi = forward_flow(xstar, tau, params.c_plus());
    if !(x > lo && x < hi) {
        return 0.0;
    }
    let (p2, q2) = (params.p2(), params.q2());
    let em = (-tau).exp();
    ((em - 1.0) * p2 * x - 1.0) / (2.0 * q2 * q2 * x * x * x) + em / (2.0 * q2 * q2 * x * x * xstar)
}

/// `τ → ∞` limit: `1/(2 q2 x²)` between the two branch equilibria.
pub fn stationary(params: &VerhulstParams) -> MixedDistribution1D {
    MixedDistribution1D::new(
        Vec::new(),
        Density::InverseSquare {
            scale: 0.5 / params.q2(),
            lo: params.inner_equilibrium(),
            hi: params.outer_equilibrium(),
        },
    )
}

/// The solution `W(·, τ)` for smooth data as a distribution; delta data go
/// through [`solve_delta`].
pub fn solution_distribution(
    w0: &InitialDensity,
    tau: f64,
    params: &VerhulstParams,
) -> Result<MixedDistribution1D, VerhulstError> {
    if let InitialKind::Delta(x) = w0.kind() {
        return solve_delta(*x, tau, params);
    }
    let (a, b) = w0.support();
    // images of the support ends along both branches; W may have kinks there
    let mut breaks: Vec<f64> = [a, b]
        .iter()
        .flat_map(|&z| [forward_flow(z, tau, params.c_minus()), forward_flow(z, tau, params.c_plus())])
        .collect();
    breaks.sort_by(f64::total_cmp);
    let (lo, hi) = (breaks[0], breaks[3]);
    let w0 = w0.clone();
    let p = *params;
    let f = move |x: f64| solve(&w0, x, tau, &p).map(|s| s.w).unwrap_or(f64::NAN);
    Ok(MixedDistribution1D::new(Vec::new(), Density::Callable { f: Arc::new(f), lo, hi, breaks }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> VerhulstParams {
        VerhulstParams::new(-2.0, 0.5).unwrap()
    }

    #[test]
    fn char_vars_example() {
        let (xb, yb) = char_vars(0.2, 0.0, &params()).unwrap();
        assert!((xb - (0.2f64 / 0.7).ln()).abs() < 1e-15);
        assert!((yb - (0.2f64 / 0.5).ln()).abs() < 1e-15);
        let (xb1, _) = char_vars(0.2, 1.0, &params()).unwrap();
        assert!((xb - xb1 - 1.0).abs() < 1e-15);
        assert!(matches!(char_vars(0.45, 0.0, &params()), Err(VerhulstError::Domain { .. })));
    }

    #[test]
    fn backward_map_example() {
        let (xh, yh) = backward_map(0.5, 2f64.ln(), &params());
        assert!((xh.finite().unwrap() - 0.4).abs() < 1e-15);
        assert!((yh.finite().unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(backward_map(0.3, 0.0, &params()), (ExtReal::Finite(0.3), ExtReal::Finite(0.3)));
        assert_eq!(backward_map(0.9, 3.0, &params()).1, ExtReal::BeyondInfinity);
    }

    #[test]
    fn exponential_f_cancels_in_w() {
        let f = SmoothFn { f: f64::exp, df: f64::exp };
        let g = SmoothFn { f: |_: f64| 0.0, df: |_: f64| 0.0 };
        let p = params();
        for &(x, tau) in &[(0.1, 0.0), (0.3, 1.5)] {
            let s = general_solution(&f, &g, x, tau, &p).unwrap();
            assert!(s.w.abs() < 1e-15);
            let (xb, _) = char_vars(x, tau, &p).unwrap();
            let expected = (0.5 * x + 1.0 - 2.0 * x) * xb.exp() / (x * x * x);
            assert!((s.w1 - expected).abs() < 1e-12 * expected.abs());
        }
    }

    #[test]
    fn delta_example() {
        let d = solve_delta(0.5, 2f64.ln(), &params()).unwrap();
        let atoms = d.atoms();
        assert!((atoms[0].x - 4.0 / 9.0).abs() < 1e-15);
        assert!((atoms[1].x - 4.0 / 7.0).abs() < 1e-15);
        assert!((atoms[0].mass - 0.25).abs() < 1e-15);
        assert!((d.continuous_mass().unwrap() - 0.5).abs() < 1e-14);
        let d0 = solve_delta(0.5, 0.0, &params()).unwrap();
        assert_eq!(d0.atoms(), &[Atom { x: 0.5, mass: 1.0 }]);
        assert_eq!(d0.moment(1).unwrap(), 0.5);
    }

    #[test]
    fn stationary_is_normalized() {
        let s = stationary(&params());
        assert!((s.total_mass().unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(s.support(), Some((0.4, 1.0 / 1.5)));
        assert!((s.density_at(0.5) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn solve_reproduces_initial_data() {
        let w0 = InitialDensity::bump(0.1, 0.3).unwrap();
        let p = params();
        for x in [0.05, 0.12, 0.2, 0.27, 0.35] {
            let s = solve(&w0, x, 0.0, &p).unwrap();
            assert!((s.w - w0.eval(x)).abs() < 1e-9);
            assert!(s.w1.abs() < 1e-9);
        }
    }

    #[test]
    fn fit_round_trip() {
        let w0 = InitialDensity::bump(0.1, 0.3).unwrap();
        let p = params();
        let fit = fit_cauchy(&w0, &p).unwrap();
        for x in [0.05, 0.15, 0.22, 0.3] {
            let s = fit.eval(x, 0.0, &p).unwrap();
            assert!((s.w - w0.eval(x)).abs() < 1e-8, "{x}: {} vs {}", s.w, w0.eval(x));
            assert!(s.w1.abs() < 1e-8);
        }
    }
}
