#![allow(dead_code)]

use laplace_kinetics::verhulst::VerhulstParams;

/// Fourth-order central difference.
fn d5(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Largest relative residual of the two dimensionless master equations
///
///   W_τ  + (p W)_x  + (q W1)_x = 0
///   W1_τ + 2r W1 + (p W1)_x + (q W)_x = 0
///
/// with `p = x + p2 x²`, `q = q2 x²`, measured against the sum of the
/// magnitudes of the individual terms, but never against less than `floor`.
pub fn master_residual(
    field: impl Fn(f64, f64) -> (f64, f64),
    x: f64,
    tau: f64,
    params: &VerhulstParams,
    r: f64,
    h: f64,
    floor: f64,
) -> f64 {
    let (p2, q2) = (params.p2(), params.q2());
    let (w, w1) = field(x, tau);
    let wt = d5(|t| field(x, t).0, tau, h);
    let w1t = d5(|t| field(x, t).1, tau, h);
    let wx = d5(|s| field(s, tau).0, x, h);
    let w1x = d5(|s| field(s, tau).1, x, h);
    let (p, dp) = (x + p2 * x * x, 1.0 + 2.0 * p2 * x);
    let (q, dq) = (q2 * x * x, 2.0 * q2 * x);
    let e1 = [wt, dp * w, p * wx, dq * w1, q * w1x];
    let e2 = [w1t, 2.0 * r * w1, dp * w1, p * w1x, dq * w, q * wx];
    let rel = |terms: &[f64]| {
        let res: f64 = terms.iter().sum();
        let scale: f64 = terms.iter().map(|t| t.abs()).sum();
        res.abs() / scale.max(floor)
    };
    rel(&e1).max(rel(&e2))
}

use laplace_kinetics::algebra::{rat, Rat, RationalFunction, UPoly};
use laplace_kinetics::charform::CharacteristicSystem;
use rand::Rng;

pub type Rf = RationalFunction;

/// `Σ c_j(x) t^j`: test functions on which first-order operators in `(x, t)`
/// act exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct TimePoly(Vec<Rf>);

impl TimePoly {
    pub fn new(mut c: Vec<Rf>) -> Self {
        while c.last().is_some_and(Rf::is_zero) {
            c.pop();
        }
        Self(c)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dt(&self) -> Self {
        Self::new(self.0.iter().enumerate().skip(1).map(|(j, c)| c.scale(&rat(j as i64, 1))).collect())
    }

    pub fn dx(&self) -> Self {
        Self::new(self.0.iter().map(|c| c.derivative().unwrap()).collect())
    }

    pub fn mul(&self, f: &Rf) -> Self {
        Self::new(self.0.iter().map(|c| c.checked_mul(f).unwrap()).collect())
    }

    pub fn div(&self, f: &Rf) -> Self {
        Self::new(self.0.iter().map(|c| c.checked_div(f).unwrap()).collect())
    }

    pub fn scale(&self, r: &Rat) -> Self {
        Self::new(self.0.iter().map(|c| c.scale(r)).collect())
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.0.len().max(o.0.len());
        let zero = Rf::zero();
        Self::new(
            (0..n).map(|j| self.0.get(j).unwrap_or(&zero).checked_add(o.0.get(j).unwrap_or(&zero)).unwrap()).collect(),
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&rat(-1, 1)))
    }
}

/// `X_i u = s_i (u_t − λ_i u_x)`, built from the speeds alone.
pub fn apply(cs: &CharacteristicSystem, i: usize, u: &TimePoly) -> TimePoly {
    u.dt().sub(&u.dx().mul(cs.lambda(i))).scale(cs.scale(i))
}

/// Second-order equation for the first unknown after eliminating the
/// second one with the first equation; leading part `X_2 X_1`.
pub fn elim_first(cs: &CharacteristicSystem, u: &TimePoly) -> TimePoly {
    let a = |i, k| cs.alpha(i, k);
    let w = apply(cs, 0, u).sub(&u.mul(a(0, 0)));
    let u2 = w.div(a(0, 1));
    apply(cs, 1, &u2).sub(&u.mul(a(1, 0))).sub(&u2.mul(a(1, 1))).mul(a(0, 1))
}

/// Same for the second unknown; leading part `X_1 X_2`.
pub fn elim_second(cs: &CharacteristicSystem, u: &TimePoly) -> TimePoly {
    let a = |i, k| cs.alpha(i, k);
    let w = apply(cs, 1, u).sub(&u.mul(a(1, 1)));
    let u1 = w.div(a(1, 0));
    apply(cs, 0, &u1).sub(&u.mul(a(0, 1))).sub(&u1.mul(a(0, 0))).mul(a(1, 0))
}

pub fn random_rat<R: Rng>(rng: &mut R) -> Rat {
    rat(rng.gen_range(-6..=6), rng.gen_range(1..=4))
}

pub fn random_nonzero_rat<R: Rng>(rng: &mut R) -> Rat {
    loop {
        let r = random_rat(rng);
        if r != rat(0, 1) {
            return r;
        }
    }
}

pub fn random_upoly<R: Rng>(rng: &mut R, degree: usize) -> UPoly {
    UPoly::new((0..=degree).map(|_| random_rat(rng)).collect())
}

pub fn random_nonzero_upoly<R: Rng>(rng: &mut R, degree: usize) -> UPoly {
    loop {
        let p = random_upoly(rng, degree);
        if !p.is_zero() {
            return p;
        }
    }
}

/// Nonzero rational function with a denominator free of real roots.
pub fn random_rf<R: Rng>(rng: &mut R, degree: usize) -> Rf {
    let den = UPoly::new(vec![rat(1, 1), rat(0, 1), rat(rng.gen_range(0..=3), 1)]);
    Rf::new(random_nonzero_upoly(rng, degree), den).unwrap()
}

/// Strictly hyperbolic system with polynomial speeds and `α_12 α_21 ≠ 0`.
pub fn random_system<R: Rng>(rng: &mut R) -> CharacteristicSystem {
    let l1 = random_upoly(rng, 2);
    let l2 = &l1 + &random_nonzero_upoly(rng, 1);
    let mut entry = |off: bool| if off || rng.gen_bool(0.7) { random_rf(rng, 1) } else { Rf::zero() };
    let alpha = [[entry(false), entry(true)], [entry(true), entry(false)]];
    CharacteristicSystem::new([Rf::from_poly(l1), Rf::from_poly(l2)], alpha).unwrap()
}

pub fn random_timepoly<R: Rng>(rng: &mut R) -> TimePoly {
    TimePoly::new((0..3).map(|_| Rf::from_poly(random_upoly(rng, 3))).collect())
}
