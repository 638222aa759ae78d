use std::fmt;
use std::sync::Arc;

use rand::Rng;

use super::VerhulstError;
use crate::quad::{integrate_breaks, QuadError, QuadOptions};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Tolerance on `|∫W0 − 1|` accepted by the normalized constructors.
pub const NORMALIZATION_TOL: f64 = 1e-8;

#[derive(Clone)]
pub enum InitialKind {
    /// Point mass at the given location.
    Delta(f64),
    /// Piecewise-linear density through `(xs[i], values[i])`, zero outside.
    Grid {
        xs: Vec<f64>,
        values: Vec<f64>,
    },
    Analytic(RealFn),
}

impl fmt::Debug for InitialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialKind::Delta(x) => write!(f, "Delta({x})"),
            InitialKind::Grid { xs, .. } => write!(f, "Grid({} nodes)", xs.len()),
            InitialKind::Analytic(_) => f.write_str("Analytic"),
        }
    }
}

/// Antiderivatives of `W0` and `W0(θ)/θ`, both anchored at the lower end of the support.
#[derive(Clone)]
pub struct MassIntegrals {
    pub i1: RealFn,
    pub i2: RealFn,
}

/// Initial probability density `W0` with support `[lo, hi]`, `lo > 0`.
#[derive(Clone)]
pub struct InitialDensity {
    kind: InitialKind,
    support: (f64, f64),
    integrals: Option<MassIntegrals>,
    quad: QuadOptions,
}

impl fmt::Debug for InitialDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InitialDensity")
            .field("kind", &self.kind)
            .field("support", &self.support)
            .field("closed_form_integrals", &self.integrals.is_some())
            .finish()
    }
}

fn check_support(lo: f64, hi: f64) -> Result<(), VerhulstError> {
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
        return Err(VerhulstError::InvalidInitial(format!("support [{lo}, {hi}] must satisfy 0 < lo <= hi < inf")));
    }
    Ok(())
}

impl InitialDensity {
    pub fn delta(x: f64) -> Result<Self, VerhulstError> {
        check_support(x, x)?;
        Ok(Self { kind: InitialKind::Delta(x), support: (x, x), integrals: None, quad: QuadOptions::default() })
    }

    /// `C (x − a)⁴ (b − x)⁴` on `[a, b]`, normalized (`C = 630/(b − a)⁹`).
    /// Three times continuously differentiable across the support ends.
    pub fn bump(a: f64, b: f64) -> Result<Self, VerhulstError> {
        check_support(a, b)?;
        if a == b {
            return Err(VerhulstError::InvalidInitial("bump needs a < b".into()));
        }
        let c = 630.0 / (b - a).powi(9);
        let f = move |x: f64| {
            if x <= a || x >= b {
                0.0
            } else {
                c * ((x - a) * (b - x)).powi(4)
            }
        };
        Self::analytic(Arc::new(f), a, b)
    }

    /// `C exp(−1/(1 − s²))` with `s = (2x − a − b)/(b − a)`, normalized;
    /// infinitely differentiable everywhere.
    pub fn smooth_bump(a: f64, b: f64) -> Result<Self, VerhulstError> {
        check_support(a, b)?;
        if a == b {
            return Err(VerhulstError::InvalidInitial("bump needs a < b".into()));
        }
        let shape = move |x: f64| {
            let s = (2.0 * x - a - b) / (b - a);
            if s.abs() >= 1.0 {
                0.0
            } else {
                (-1.0 / (1.0 - s * s)).exp()
            }
        };
        let opts = QuadOptions { abs_tol: 1e-15, ..QuadOptions::default() };
        let norm = integrate_breaks(shape, &[a, 0.5 * (a + b), b], &opts)?.value;
        Self::analytic(Arc::new(move |x| shape(x) / norm), a, b)
    }

    /// Uniform density on `[a, b]` with closed-form mass integrals.
    pub fn uniform(a: f64, b: f64) -> Result<Self, VerhulstError> {
        check_support(a, b)?;
        if a == b {
            return Err(VerhulstError::InvalidInitial("uniform needs a < b".into()));
        }
        let height = 1.0 / (b - a);
        let f = move |x: f64| if x < a || x > b { 0.0 } else { height };
        let i1 = move |z: f64| (z.clamp(a, b) - a) * height;
        let i2 = move |z: f64| (z.clamp(a, b) / a).ln() * height;
        Ok(Self {
            kind: InitialKind::Analytic(Arc::new(f)),
            support: (a, b),
            integrals: Some(MassIntegrals { i1: Arc::new(i1), i2: Arc::new(i2) }),
            quad: QuadOptions::default(),
        })
    }

    /// Density given by a closure on `[lo, hi]`; checked to integrate to one.
    pub fn analytic(f: RealFn, lo: f64, hi: f64) -> Result<Self, VerhulstError> {
        let d = Self::analytic_unnormalized(f, lo, hi)?;
        d.check_normalized()?;
        Ok(d)
    }

    /// As [`Self::analytic`] without the normalization check (zero data, scaled data).
    pub fn analytic_unnormalized(f: RealFn, lo: f64, hi: f64) -> Result<Self, VerhulstError> {
        check_support(lo, hi)?;
        Ok(Self { kind: InitialKind::Analytic(f), support: (lo, hi), integrals: None, quad: QuadOptions::default() })
    }

    /// Piecewise-linear density from samples; `xs` strictly increasing.
    pub fn grid(xs: Vec<f64>, values: Vec<f64>) -> Result<Self, VerhulstError> {
        if xs.len() < 2 || xs.len() != values.len() {
            return Err(VerhulstError::InvalidInitial("grid needs >= 2 matching nodes".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) || values.iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err(VerhulstError::InvalidInitial(
                "grid nodes must increase and values be finite and nonnegative".into(),
            ));
        }
        check_support(xs[0], xs[xs.len() - 1])?;
        let support = (xs[0], xs[xs.len() - 1]);
        let d = Self { kind: InitialKind::Grid { xs, values }, support, integrals: None, quad: QuadOptions::default() };
        d.check_normalized()?;
        Ok(d)
    }

    /// Supply exact antiderivatives (anchored at the lower support end).
    pub fn with_integrals(mut self, integrals: MassIntegrals) -> Self {
        self.integrals = Some(integrals);
        self
    }

    pub fn with_quad_options(mut self, quad: QuadOptions) -> Self {
        self.quad = quad;
        self
    }

    fn check_normalized(&self) -> Result<(), VerhulstError> {
        let mass = self.i1(self.support.1)?;
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(VerhulstError::InvalidInitial(format!("total mass {mass} is not 1")));
        }
        Ok(())
    }

    pub fn kind(&self) -> &InitialKind {
        &self.kind
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn is_delta(&self) -> bool {
        matches!(self.kind, InitialKind::Delta(_))
    }

    /// Density value; zero outside the support. A delta has no pointwise value
    /// and evaluates to zero everywhere.
    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = self.support;
        if !(x >= lo && x <= hi) {
            return 0.0;
        }
        match &self.kind {
            InitialKind::Delta(_) => 0.0,
            InitialKind::Analytic(f) => f(x),
            InitialKind::Grid { xs, values } => {
                let j = xs.partition_point(|&n| n <= x).clamp(1, xs.len() - 1);
                let (x0, x1) = (xs[j - 1], xs[j]);
                let w = (x - x0) / (x1 - x0);
                values[j - 1] * (1.0 - w) + values[j] * w
            }
        }
    }

    fn breakpoints(&self, upto: f64) -> Vec<f64> {
        let lo = self.support.0;
        let mut pts = vec![lo];
        if let InitialKind::Grid { xs, .. } = &self.kind {
            pts.extend(xs.iter().copied().filter(|&x| x > lo && x < upto));
        }
        pts.push(upto);
        pts
    }

    /// `I1(z) = ∫_lo^z W0`. Constant (the total mass) above the support.
    pub fn i1(&self, z: f64) -> Result<f64, QuadError> {
        let (lo, hi) = self.support;
        if let InitialKind::Delta(x) = self.kind {
            return Ok(if z >= x { 1.0 } else { 0.0 });
        }
        let z = z.clamp(lo, hi);
        if let Some(m) = &self.integrals {
            return Ok((m.i1)(z));
        }
        if z <= lo {
            return Ok(0.0);
        }
        Ok(integrate_breaks(|t| self.eval(t), &self.breakpoints(z), &self.quad)?.value)
    }

    /// `I2(z) = ∫_lo^z W0(θ)/θ dθ`.
    pub fn i2(&self, z: f64) -> Result<f64, QuadError> {
        let (lo, hi) = self.support;
        if let InitialKind::Delta(x) = self.kind {
            return Ok(if z >= x { 1.0 / x } else { 0.0 });
        }
        let z = z.clamp(lo, hi);
        if let Some(m) = &self.integrals {
            return Ok((m.i2)(z));
        }
        if z <= lo {
            return Ok(0.0);
        }
        Ok(integrate_breaks(|t| self.eval(t) / t, &self.breakpoints(z), &self.quad)?.value)
    }

    /// Inverse-CDF sampler for Monte Carlo initial states.
    pub fn sampler(&self) -> Result<InitialSampler, QuadError> {
        const NODES: usize = 4097;
        let (lo, hi) = self.support;
        if let InitialKind::Delta(x) = self.kind {
            return Ok(InitialSampler::Point(x));
        }
        let xs: Vec<f64> = (0..NODES).map(|i| lo + (hi - lo) * i as f64 / (NODES - 1) as f64).collect();
        let mut cdf = Vec::with_capacity(NODES);
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in xs.windows(2) {
            acc += integrate_breaks(|t| self.eval(t), &[w[0], w[1]], &self.quad)?.value;
            cdf.push(acc);
        }
        let total = acc;
        for c in &mut cdf {
            *c /= total;
        }
        Ok(InitialSampler::Table { xs, cdf })
    }
}

#[derive(Clone, Debug)]
pub enum InitialSampler {
    Point(f64),
    Table { xs: Vec<f64>, cdf: Vec<f64> },
}

impl InitialSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            InitialSampler::Point(x) => *x,
            InitialSampler::Table { xs, cdf } => {
                let u: f64 = rng.gen();
                let j = cdf.partition_point(|&c| c < u).clamp(1, cdf.len() - 1);
                let (c0, c1) = (cdf[j - 1], cdf[j]);
                let w = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.0 };
                xs[j - 1] + w * (xs[j] - xs[j - 1])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bump_is_normalized() {
        let b = InitialDensity::bump(0.1, 0.3).unwrap();
        assert!((b.i1(1.0).unwrap() - 1.0).abs() < 1e-13);
        assert!((b.i1(0.2).unwrap() - 0.5).abs() < 1e-13);
        assert_eq!(b.i1(0.05).unwrap(), 0.0);
    }

    #[test]
    fn smooth_bump_is_normalized_and_flat_at_the_ends() {
        let b = InitialDensity::smooth_bump(0.1, 0.3).unwrap();
        assert!((b.i1(1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((b.i1(0.2).unwrap() - 0.5).abs() < 1e-12);
        // the unit mollifier integrates to 0.443993816168079...
        assert!((b.eval(0.2) - (-1f64).exp() / (0.1 * 0.443_993_816_168_079_4)).abs() < 1e-9);
        assert!(b.eval(0.1 + 1e-3) < 1e-20);
        assert_eq!(b.eval(0.3), 0.0);
    }

    #[test]
    fn uniform_closed_form_matches_quadrature() {
        let u = InitialDensity::uniform(0.2, 0.4).unwrap();
        let f = u.kind().clone();
        let InitialKind::Analytic(f) = f else { panic!() };
        let q = InitialDensity::analytic(f, 0.2, 0.4).unwrap();
        for z in [0.1, 0.25, 0.33, 0.5] {
            assert!((u.i1(z).unwrap() - q.i1(z).unwrap()).abs() < 1e-12);
            assert!((u.i2(z).unwrap() - q.i2(z).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_density() {
        let g = InitialDensity::grid(vec![0.1, 0.2, 0.3], vec![0.0, 10.0, 0.0]).unwrap();
        assert!((g.eval(0.15) - 5.0).abs() < 1e-12);
        assert!((g.i1(0.3).unwrap() - 1.0).abs() < 1e-12);
        assert!(InitialDensity::grid(vec![0.1, 0.2], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn rejects_support_touching_zero() {
        assert!(InitialDensity::uniform(0.0, 0.3).is_err());
        assert!(InitialDensity::delta(-1.0).is_err());
    }

    #[test]
    fn sampler_reproduces_uniform_mean() {
        let u = InitialDensity::uniform(0.2, 0.4).unwrap();
        let s = u.sampler().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 20000;
        let mean = (0..n).map(|_| s.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 0.3).abs() < 4.0 * 0.2 / (12f64.sqrt() * (n as f64).sqrt()));
    }
}
