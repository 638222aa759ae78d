use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::rat::{rat_to_string, Rat};
use super::upoly::UPoly;

/// One of the three variables of an [`MPoly3`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X = 0,
    Y = 1,
    Z = 2,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

type Exponents = [u32; 3];

/// Sparse polynomial in `x, y, z` with rational coefficients. Zero
/// coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct MPoly3 {
    terms: BTreeMap<Exponents, Rat>,
}

impl MPoly3 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rat) -> Self {
        Self::monomial(c, [0, 0, 0])
    }

    pub fn one() -> Self {
        Self::constant(Rat::one())
    }

    pub fn var(axis: Axis) -> Self {
        let mut e = [0; 3];
        e[axis as usize] = 1;
        Self::monomial(Rat::one(), e)
    }

    pub fn monomial(c: Rat, exps: [u32; 3]) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        Self { terms }
    }

    pub fn from_terms(it: impl IntoIterator<Item = ([u32; 3], Rat)>) -> Self {
        let mut out = Self::zero();
        for (e, c) in it {
            out.add_term(e, c);
        }
        out
    }

    /// Univariate polynomial placed on one axis.
    pub fn from_upoly(p: &UPoly, axis: Axis) -> Self {
        Self::from_terms(p.coeffs().iter().enumerate().map(|(k, c)| {
            let mut e = [0; 3];
            e[axis as usize] = k as u32;
            (e, c.clone())
        }))
    }

    fn add_term(&mut self, e: Exponents, c: Rat) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(Rat::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32; 3], &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Highest exponent of `axis` appearing in any term.
    pub fn degree_in(&self, axis: Axis) -> u32 {
        self.terms.keys().map(|e| e[axis as usize]).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &Rat) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, a)| (*e, a * c)))
    }

    pub fn partial(&self, axis: Axis) -> Self {
        let i = axis as usize;
        Self::from_terms(self.terms.iter().filter(|(e, _)| e[i] > 0).map(|(e, c)| {
            let mut d = *e;
            d[i] -= 1;
            (d, c * Rat::from_integer(BigInt::from(e[i])))
        }))
    }

    /// Antiderivative along `axis` with no constant term in that variable.
    pub fn antiderivative(&self, axis: Axis) -> Self {
        let i = axis as usize;
        Self::from_terms(self.terms.iter().map(|(e, c)| {
            let mut d = *e;
            d[i] += 1;
            (d, c / Rat::from_integer(BigInt::from(d[i])))
        }))
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(), |acc, _| &acc * self)
    }

    /// Replace each variable by a polynomial: `images[0]` for x, `[1]` for y, `[2]` for z.
    pub fn substitute(&self, images: &[MPoly3; 3]) -> Self {
        let mut powers: [Vec<MPoly3>; 3] = Default::default();
        for (axis, img) in images.iter().enumerate() {
            let deg = self.terms.keys().map(|e| e[axis]).max().unwrap_or(0);
            let mut v = vec![Self::one()];
            for k in 1..=deg as usize {
                let next = &v[k - 1] * img;
                v.push(next);
            }
            powers[axis] = v;
        }
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            let t = &(&powers[0][e[0] as usize] * &powers[1][e[1] as usize]) * &powers[2][e[2] as usize];
            out = &out + &t.scale(c);
        }
        out
    }

    /// Set `axis` to a fixed rational value.
    pub fn restrict(&self, axis: Axis, value: &Rat) -> Self {
        let i = axis as usize;
        Self::from_terms(self.terms.iter().map(|(e, c)| {
            let mut d = *e;
            d[i] = 0;
            (d, c * num_traits::pow(value.clone(), e[i] as usize))
        }))
    }

    pub fn evaluate(&self, point: &[Rat; 3]) -> Rat {
        self.terms.iter().fold(Rat::zero(), |acc, (e, c)| {
            let mut t = c.clone();
            for (i, p) in point.iter().enumerate() {
                t *= num_traits::pow(p.clone(), e[i] as usize);
            }
            acc + t
        })
    }
}

impl fmt::Display for MPoly3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (n, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            match (n, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mag = c.abs();
            let vars: Vec<String> = Axis::ALL
                .iter()
                .filter(|a| e[**a as usize] > 0)
                .map(|a| match e[*a as usize] {
                    1 => a.name().to_string(),
                    k => format!("{}^{}", a.name(), k),
                })
                .collect();
            if vars.is_empty() {
                f.write_str(&rat_to_string(&mag))?;
            } else if mag.is_one() {
                f.write_str(&vars.join("*"))?;
            } else {
                write!(f, "{}*{}", rat_to_string(&mag), vars.join("*"))?;
            }
        }
        Ok(())
    }
}

impl Add for &MPoly3 {
    type Output = MPoly3;
    fn add(self, rhs: &MPoly3) -> MPoly3 {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl Sub for &MPoly3 {
    type Output = MPoly3;
    fn sub(self, rhs: &MPoly3) -> MPoly3 {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c);
        }
        out
    }
}

impl Mul for &MPoly3 {
    type Output = MPoly3;
    fn mul(self, rhs: &MPoly3) -> MPoly3 {
        let mut out = MPoly3::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term([ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]], ca * cb);
            }
        }
        out
    }
}

impl Neg for &MPoly3 {
    type Output = MPoly3;
    fn neg(self) -> MPoly3 {
        MPoly3::from_terms(self.terms.iter().map(|(e, c)| (*e, -c)))
    }
}
