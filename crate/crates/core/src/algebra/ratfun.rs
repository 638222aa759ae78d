use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_traits::{One, Zero};

use super::rat::Rat;
use super::upoly::UPoly;
use super::AlgebraError;

pub const DEFAULT_DEGREE_CAP: usize = 512;

static DEGREE_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_DEGREE_CAP);

/// Largest numerator or denominator degree a [`RationalFunction`] may have.
pub fn degree_cap() -> usize {
    DEGREE_CAP.load(Ordering::Relaxed)
}

/// Process-wide; meant to be set once at startup.
pub fn set_degree_cap(cap: usize) {
    DEGREE_CAP.store(cap, Ordering::Relaxed);
}

/// Quotient of univariate polynomials in lowest terms with a monic
/// denominator. Two equal values always have identical fields, so `==` is
/// exact equality of rational functions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    num: UPoly,
    den: UPoly,
}

impl RationalFunction {
    pub fn new(num: UPoly, den: UPoly) -> Result<Self, AlgebraError> {
        if den.is_zero() {
            return Err(AlgebraError::ZeroDivisor);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let g = num.gcd(&den);
        let (mut num, mut den) = if g.is_constant() { (num, den) } else { (num.div_rem(&g)?.0, den.div_rem(&g)?.0) };
        let lc = den.leading().expect("nonzero denominator").recip();
        if !lc.is_one() {
            num = num.scale(&lc);
            den = den.scale(&lc);
        }
        let cap = degree_cap();
        let degree = num.degree().unwrap_or(0).max(den.degree().unwrap_or(0));
        if degree > cap {
            return Err(AlgebraError::DegreeCap { degree, cap });
        }
        Ok(Self { num, den })
    }

    pub fn zero() -> Self {
        Self { num: UPoly::zero(), den: UPoly::one() }
    }

    pub fn one() -> Self {
        Self::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        Self { num: UPoly::constant(c), den: UPoly::one() }
    }

    pub fn x() -> Self {
        Self { num: UPoly::x(), den: UPoly::one() }
    }

    pub fn from_poly(p: UPoly) -> Self {
        Self { num: p, den: UPoly::one() }
    }

    pub fn num(&self) -> &UPoly {
        &self.num
    }

    pub fn den(&self) -> &UPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_constant() && self.num == UPoly::one()
    }

    /// The value if `self` is constant.
    pub fn as_constant(&self) -> Option<Rat> {
        (self.num.is_constant() && self.den.is_constant()).then(|| self.num.coeff(0))
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self, AlgebraError> {
        if self.den == rhs.den {
            return Self::new(&self.num + &rhs.num, self.den.clone());
        }
        Self::new(&self.num * &rhs.den + &rhs.num * &self.den, &self.den * &rhs.den)
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self, AlgebraError> {
        self.checked_add(&rhs.neg())
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self, AlgebraError> {
        if self.is_zero() || rhs.is_zero() {
            return Ok(Self::zero());
        }
        Self::new(&self.num * &rhs.num, &self.den * &rhs.den)
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, AlgebraError> {
        self.checked_mul(&rhs.recip()?)
    }

    pub fn recip(&self) -> Result<Self, AlgebraError> {
        if self.is_zero() {
            return Err(AlgebraError::ZeroDivisor);
        }
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn neg(&self) -> Self {
        Self { num: -&self.num, den: self.den.clone() }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { num: self.num.scale(c), den: self.den.clone() }
    }

    /// d/dx, via the quotient rule.
    pub fn derivative(&self) -> Result<Self, AlgebraError> {
        if self.den.is_constant() {
            return Ok(Self { num: self.num.derivative(), den: self.den.clone() });
        }
        let top = &self.num.derivative() * &self.den - &self.num * &self.den.derivative();
        Self::new(top, &self.den * &self.den)
    }

    /// `f'/f`, the derivative of `ln f` without forming the logarithm.
    pub fn log_deriv(&self) -> Result<Self, AlgebraError> {
        if self.is_zero() {
            return Err(AlgebraError::LogOfZero);
        }
        // (n/d)'/(n/d) = n'/n - d'/d
        let a = Self::new(self.num.derivative(), self.num.clone())?;
        let b = Self::new(self.den.derivative(), self.den.clone())?;
        a.checked_sub(&b)
    }

    pub fn eval(&self, x: &Rat) -> Option<Rat> {
        let d = self.den.eval(x);
        (!d.is_zero()).then(|| self.num.eval(x) / d)
    }

    /// Float view: Horner on numerator and denominator.
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.num.eval_f64(x) / self.den.eval_f64(x)
    }
}

impl Default for RationalFunction {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<UPoly> for RationalFunction {
    fn from(p: UPoly) -> Self {
        Self::from_poly(p)
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_constant() {
            return write!(f, "{}", self.num);
        }
        let wrap = |p: &UPoly| {
            let s = p.to_string();
            if p.coeffs().iter().filter(|c| !c.is_zero()).count() > 1 || s.starts_with('-') {
                format!("({s})")
            } else {
                s
            }
        };
        write!(f, "{}/{}", wrap(&self.num), wrap(&self.den))
    }
}
